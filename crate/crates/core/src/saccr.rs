//! Baseline SA-CCR for linear interest-rate trades: supervisory parameters,
//! trade-level add-ons, hedging-set aggregation across maturity buckets, the
//! PFE multiplier, replacement cost and EAD.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::trades::{Direction, LegKind, Trade};

/// Supervisory constants. Defaults are the Basel values for interest rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupervisoryConfig {
    pub alpha: f64,
    pub sf_ir: f64,
    /// Factor for index-vs-discount basis hedging sets. Not a regulatory
    /// value: half the rates factor unless overridden.
    pub sf_basis: f64,
    pub sf_inflation: f64,
    pub sf_fx: f64,
    /// MF floor for unmargined trades, in business days (10 or 20).
    pub mf_floor_business_days: u32,
    pub business_days_per_year: f64,
    pub multiplier_floor: f64,
    /// Decay rate of the supervisory duration.
    pub a_supervisory: f64,
    /// Correlation of adjacent maturity buckets.
    pub rho1: f64,
    /// Correlation of the outer buckets M1 and M3.
    pub rho2: f64,
}

impl Default for SupervisoryConfig {
    fn default() -> Self {
        Self {
            alpha: 1.4,
            sf_ir: 0.005,
            sf_basis: 0.0025,
            sf_inflation: 0.005,
            sf_fx: 0.04,
            mf_floor_business_days: 10,
            business_days_per_year: 250.0,
            multiplier_floor: 0.05,
            a_supervisory: 0.05,
            rho1: 0.7,
            rho2: 0.3,
        }
    }
}

impl SupervisoryConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("sf_ir", self.sf_ir),
            ("sf_basis", self.sf_basis),
            ("sf_inflation", self.sf_inflation),
            ("sf_fx", self.sf_fx),
            ("business_days_per_year", self.business_days_per_year),
            ("multiplier_floor", self.multiplier_floor),
            ("a_supervisory", self.a_supervisory),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mf_floor_business_days == 0 {
            return Err(Error::Config(
                "mf_floor_business_days must be positive".into(),
            ));
        }
        if !(self.multiplier_floor < 1.0) {
            return Err(Error::Config("multiplier_floor must be below 1".into()));
        }
        if !(self.rho2 < self.rho1 && self.rho1 < 1.0) {
            return Err(Error::Config(format!(
                "bucket correlations must satisfy rho2 < rho1 < 1 (got {}, {})",
                self.rho2, self.rho1
            )));
        }
        Ok(())
    }

    pub fn mf_floor_years(&self) -> f64 {
        self.mf_floor_business_days as f64 / self.business_days_per_year
    }

    pub fn supervisory_factor(&self, set: &HedgingSet) -> f64 {
        match set {
            HedgingSet::Rates(_) => self.sf_ir,
            HedgingSet::Basis(..) => self.sf_basis,
            HedgingSet::Inflation(_) => self.sf_inflation,
            HedgingSet::Fx(_) => self.sf_fx,
        }
    }
}

/// Residual-maturity buckets [0,1), [1,5), [5,∞).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MaturityBucket {
    M1,
    M2,
    M3,
}

impl MaturityBucket {
    pub fn of(t: f64) -> Self {
        if t < 1.0 {
            MaturityBucket::M1
        } else if t < 5.0 {
            MaturityBucket::M2
        } else {
            MaturityBucket::M3
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub const ALL: [MaturityBucket; 3] =
        [MaturityBucket::M1, MaturityBucket::M2, MaturityBucket::M3];
}

impl fmt::Display for MaturityBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.index() + 1)
    }
}

/// Aggregation group within which netting is recognised.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HedgingSet {
    Rates(String),
    /// Index-vs-discount basis of a currency, keyed by index tenor in months.
    Basis(String, u32),
    Inflation(String),
    /// Currency pair against the domestic currency, e.g. `EUR/USD`.
    Fx(String),
}

impl fmt::Display for HedgingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HedgingSet::Rates(c) => write!(f, "Rates:{c}"),
            HedgingSet::Basis(c, m) => write!(f, "Basis:{c}:{m}M"),
            HedgingSet::Inflation(c) => write!(f, "Inflation:{c}"),
            HedgingSet::Fx(p) => write!(f, "FX:{p}"),
        }
    }
}

/// The atom of SA-CCR and cashflow-level aggregation.
///
/// For bucketed sets the adjusted notional is `effective_notional · SD(start, end)`;
/// FX contributions carry no duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddOnContribution {
    pub hedging_set: HedgingSet,
    pub bucket: Option<MaturityBucket>,
    pub effective_notional: f64,
    pub start: f64,
    pub end: f64,
    /// +1 or -1.
    pub delta: f64,
    pub maturity_factor: f64,
}

impl AddOnContribution {
    pub fn adjusted_notional(&self, cfg: &SupervisoryConfig) -> Result<f64> {
        match self.bucket {
            Some(_) => Ok(self.effective_notional
                * supervisory_duration(self.start, self.end, cfg.a_supervisory)?),
            None => Ok(self.effective_notional),
        }
    }

    /// Signed stand-alone add-on δ · SF · d · MF.
    pub fn addon(&self, cfg: &SupervisoryConfig) -> Result<f64> {
        Ok(self.delta
            * cfg.supervisory_factor(&self.hedging_set)
            * self.adjusted_notional(cfg)?
            * self.maturity_factor)
    }
}

/// SD = (e^{−aS} − e^{−aE}) / a.
pub fn supervisory_duration(start: f64, end: f64, a: f64) -> Result<f64> {
    if !(start >= 0.0) || !(start <= end) {
        return domain(format!(
            "supervisory duration needs 0 <= S <= E, got S = {start}, E = {end}"
        ));
    }
    if !(a > 0.0) {
        return domain(format!(
            "supervisory duration decay must be positive, got {a}"
        ));
    }
    // expm1 keeps precision when a(E − S) is tiny
    Ok((-a * start).exp() * -(-a * (end - start)).exp_m1() / a)
}

pub fn unmargined_maturity_factor(maturity: f64, cfg: &SupervisoryConfig) -> f64 {
    maturity.max(cfg.mf_floor_years()).min(1.0).sqrt()
}

pub fn margined_maturity_factor(mpor: f64) -> f64 {
    1.5 * mpor.sqrt()
}

pub fn maturity_factor(trade: &Trade, cfg: &SupervisoryConfig) -> f64 {
    match (trade.margined, trade.mpor) {
        (true, Some(mpor)) => margined_maturity_factor(mpor),
        _ => unmargined_maturity_factor(trade.maturity(), cfg),
    }
}

/// Trade-level SA-CCR contribution of a linear trade with one fixed leg.
/// Paying fixed gives delta +1.
pub fn trade_addon(trade: &Trade, cfg: &SupervisoryConfig) -> Result<AddOnContribution> {
    trade.validate()?;
    let fixed = trade.fixed_leg().ok_or_else(|| {
        Error::Unsupported(format!(
            "{}: SA-CCR needs a fixed leg to assign direction",
            trade.id
        ))
    })?;
    let inflation = trade.legs.iter().any(|l| {
        matches!(
            l.kind,
            LegKind::InflationFloating { .. } | LegKind::InflationCompound { .. }
        )
    });
    let hedging_set = if inflation {
        HedgingSet::Inflation(trade.currency.clone())
    } else {
        HedgingSet::Rates(trade.currency.clone())
    };
    let maturity = trade.maturity();
    Ok(AddOnContribution {
        hedging_set,
        bucket: Some(MaturityBucket::of(maturity)),
        effective_notional: fixed.time_averaged_notional()?,
        start: trade.start().max(0.0),
        end: maturity,
        delta: if fixed.direction == Direction::Pay {
            1.0
        } else {
            -1.0
        },
        maturity_factor: maturity_factor(trade, cfg),
    })
}

/// Sum with positive and negative terms accumulated separately in sorted
/// order: the result does not depend on input order and exactly mirrored
/// term sets cancel to zero.
pub(crate) fn stable_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut pos, mut neg): (Vec<f64>, Vec<f64>) = terms.into_iter().partition(|x| *x >= 0.0);
    pos.sort_by(f64::total_cmp);
    neg.sort_by(|a, b| b.total_cmp(a));
    pos.iter().sum::<f64>() + neg.iter().sum::<f64>()
}

/// Per-bucket signed sums D_j (including SF and MF) of one hedging set.
pub fn bucket_sums(contribs: &[AddOnContribution], cfg: &SupervisoryConfig) -> Result<[f64; 3]> {
    let mut terms: [Vec<f64>; 3] = Default::default();
    for c in contribs {
        let bucket = c.bucket.ok_or_else(|| {
            Error::Domain(format!(
                "contribution in {} has no maturity bucket",
                c.hedging_set
            ))
        })?;
        terms[bucket.index()].push(c.addon(cfg)?);
    }
    Ok(terms.map(stable_sum))
}

/// sqrt(D1² + D2² + D3² + 2ρ1(D1D2 + D2D3) + 2ρ2 D1D3).
pub fn bucket_quadratic_form(d: [f64; 3], cfg: &SupervisoryConfig) -> f64 {
    let nonzero: Vec<f64> = d.iter().copied().filter(|x| *x != 0.0).collect();
    if nonzero.len() <= 1 {
        return nonzero.first().map_or(0.0, |x| x.abs());
    }
    let [d1, d2, d3] = d;
    let q = d1 * d1
        + d2 * d2
        + d3 * d3
        + 2.0 * cfg.rho1 * (d1 * d2 + d2 * d3)
        + 2.0 * cfg.rho2 * d1 * d3;
    q.max(0.0).sqrt()
}

/// Add-on of a single hedging set.
pub fn aggregate_hedging_set(
    contribs: &[AddOnContribution],
    cfg: &SupervisoryConfig,
) -> Result<f64> {
    let Some(first) = contribs.first() else {
        return Ok(0.0);
    };
    if contribs.iter().any(|c| c.hedging_set != first.hedging_set) {
        return domain("aggregate_hedging_set called with mixed hedging sets");
    }
    if contribs.iter().all(|c| c.bucket.is_none()) {
        let terms = contribs
            .iter()
            .map(|c| c.addon(cfg))
            .collect::<Result<Vec<_>>>()?;
        return Ok(stable_sum(terms).abs());
    }
    Ok(bucket_quadratic_form(bucket_sums(contribs, cfg)?, cfg))
}

/// Add-ons per hedging set, summed without cross-set diversification.
pub fn aggregate_by_hedging_set(
    contribs: &[AddOnContribution],
    cfg: &SupervisoryConfig,
) -> Result<(f64, BTreeMap<HedgingSet, f64>)> {
    let mut groups: BTreeMap<HedgingSet, Vec<AddOnContribution>> = BTreeMap::new();
    for c in contribs {
        groups
            .entry(c.hedging_set.clone())
            .or_default()
            .push(c.clone());
    }
    let mut per_set = BTreeMap::new();
    for (set, group) in groups {
        per_set.insert(set, aggregate_hedging_set(&group, cfg)?);
    }
    let total = per_set.values().sum();
    Ok((total, per_set))
}

/// f(x) = min(1, floor + (1 − floor) exp(x / (2(1 − floor)))) with x = (V − C) / AddOn.
pub fn pfe_multiplier(v: f64, c: f64, addon_aggregate: f64, cfg: &SupervisoryConfig) -> f64 {
    let floor = cfg.multiplier_floor;
    let net = v - c;
    if addon_aggregate <= 0.0 {
        return if net >= 0.0 { 1.0 } else { floor };
    }
    let x = net / addon_aggregate;
    (floor + (1.0 - floor) * (x / (2.0 * (1.0 - floor))).exp()).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CollateralTerms {
    /// Mark-to-market of the netting set.
    pub v: f64,
    /// Haircut value of net collateral held.
    pub c: f64,
    pub th: f64,
    pub mta: f64,
    pub nica: f64,
}

impl CollateralTerms {
    pub fn validate(&self) -> Result<()> {
        if self.th < 0.0 || self.mta < 0.0 {
            return domain("threshold and MTA must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExposureAtDefault {
    pub replacement_cost: f64,
    pub multiplier: f64,
    pub addon: f64,
    pub pfe: f64,
    pub ead: f64,
}

fn exposure(
    addon: f64,
    rc: f64,
    coll: &CollateralTerms,
    cfg: &SupervisoryConfig,
) -> ExposureAtDefault {
    let multiplier = pfe_multiplier(coll.v, coll.c, addon, cfg);
    let pfe = multiplier * addon;
    ExposureAtDefault {
        replacement_cost: rc,
        multiplier,
        addon,
        pfe,
        ead: cfg.alpha * (rc + pfe),
    }
}

/// EAD from aggregate add-ons. `margined_addon` is `Some` for a margined
/// netting set; the result is then capped at the unmargined EAD.
pub fn ead_from_addon(
    unmargined_addon: f64,
    margined_addon: Option<f64>,
    coll: &CollateralTerms,
    cfg: &SupervisoryConfig,
) -> Result<ExposureAtDefault> {
    coll.validate()?;
    let unmargined = exposure(unmargined_addon, (coll.v - coll.c).max(0.0), coll, cfg);
    Ok(match margined_addon {
        None => unmargined,
        Some(addon) => {
            let rc = (coll.v - coll.c)
                .max(coll.th + coll.mta - coll.nica)
                .max(0.0);
            let margined = exposure(addon, rc, coll, cfg);
            if margined.ead <= unmargined.ead {
                margined
            } else {
                unmargined
            }
        }
    })
}

/// Aggregate SA-CCR add-on of a netting set, with the per-hedging-set split.
pub fn portfolio_addon(
    trades: &[Trade],
    cfg: &SupervisoryConfig,
) -> Result<(f64, BTreeMap<HedgingSet, f64>)> {
    cfg.validate()?;
    let contribs = trades
        .iter()
        .map(|t| trade_addon(t, cfg))
        .collect::<Result<Vec<_>>>()?;
    aggregate_by_hedging_set(&contribs, cfg)
}

/// SA-CCR EAD of a netting set. The set is margined when any trade is.
pub fn ead(
    trades: &[Trade],
    coll: &CollateralTerms,
    cfg: &SupervisoryConfig,
) -> Result<ExposureAtDefault> {
    cfg.validate()?;
    let contribs = trades
        .iter()
        .map(|t| trade_addon(t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (margined_addon, _) = aggregate_by_hedging_set(&contribs, cfg)?;
    let unmargined: Vec<AddOnContribution> = trades
        .iter()
        .zip(&contribs)
        .map(|(t, c)| AddOnContribution {
            maturity_factor: unmargined_maturity_factor(t.maturity(), cfg),
            ..c.clone()
        })
        .collect();
    let (unmargined_addon, _) = aggregate_by_hedging_set(&unmargined, cfg)?;
    let margined = trades.iter().any(|t| t.margined);
    ead_from_addon(
        unmargined_addon,
        margined.then_some(margined_addon),
        coll,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trades::{
        make_fra_strip, make_zero_addon_package, mirror, split_swap, vanilla_swap,
    };

    fn cfg() -> SupervisoryConfig {
        SupervisoryConfig::default()
    }

    fn addon_of(trades: &[Trade]) -> f64 {
        portfolio_addon(trades, &cfg()).unwrap().0
    }

    #[test]
    fn supervisory_duration_examples() {
        let sd = supervisory_duration(0.0, 10.0, 0.05).unwrap();
        assert!((sd - (1.0 - (-0.5f64).exp()) / 0.05).abs() < 1e-12);
        assert!((sd - 7.8693868).abs() < 1e-7);
        assert_eq!(supervisory_duration(4.0, 4.0, 0.05).unwrap(), 0.0);
        let sd = supervisory_duration(3.0, 10.0, 0.05).unwrap();
        assert!((sd - 5.0835464).abs() < 1e-7);
        assert!(matches!(
            supervisory_duration(5.0, 3.0, 0.05),
            Err(Error::Domain(_))
        ));
        assert!(supervisory_duration(-1.0, 3.0, 0.05).is_err());
    }

    #[test]
    fn duration_tends_to_maturity_as_decay_vanishes() {
        let sd = supervisory_duration(0.0, 10.0, 1e-8).unwrap();
        assert!((sd / 10.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn maturity_factor_examples() {
        let c = cfg();
        assert_eq!(unmargined_maturity_factor(10.0, &c), 1.0);
        assert!((unmargined_maturity_factor(0.5, &c) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((unmargined_maturity_factor(0.001, &c) - (10.0f64 / 250.0).sqrt()).abs() < 1e-15);
        assert!((margined_maturity_factor(10.0 / 250.0) - 0.3).abs() < 1e-15);
        let mut t = vanilla_swap("m", Direction::Pay, 1e8, 0.03, 0.0, 10.0, 0.25);
        t.margined = true;
        t.mpor = Some(10.0 / 250.0);
        assert!((maturity_factor(&t, &c) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn trade_addon_examples() {
        let c = cfg();
        let atm = vanilla_swap("atm", Direction::Pay, 100e6, 0.03, 0.0, 10.0, 0.25);
        let a = trade_addon(&atm, &c).unwrap();
        assert_eq!(a.bucket, Some(MaturityBucket::M3));
        assert_eq!(a.delta, 1.0);
        assert!((a.addon(&c).unwrap() - 3_934_693.4028736656).abs() < 1e-6);

        let three = vanilla_swap("3y", Direction::Pay, 100e6, 0.03, 0.0, 3.0, 0.25);
        assert!(
            (trade_addon(&three, &c).unwrap().addon(&c).unwrap() - 1_392_920.235_7).abs() < 1e-3
        );
        let fwd = vanilla_swap("fwd", Direction::Pay, 100e6, 0.03, 3.0, 10.0, 0.25);
        assert!((trade_addon(&fwd, &c).unwrap().addon(&c).unwrap() - 2_541_773.167_1).abs() < 1e-3);

        let rec = vanilla_swap("r", Direction::Receive, 100e6, 0.03, 0.0, 10.0, 0.25);
        assert_eq!(trade_addon(&rec, &c).unwrap().delta, -1.0);
    }

    #[test]
    fn aggregation_examples() {
        let atm = vanilla_swap("atm", Direction::Pay, 100e6, 0.03, 0.0, 10.0, 0.25);
        let (near, far) = split_swap(&atm, 3.0).unwrap();
        assert!((addon_of(&[near, far]) - 3_654_794.0854601).abs() < 1e-3);
        assert_eq!(addon_of(&[atm.clone(), mirror(&atm)]), 0.0);
        let pkg = make_zero_addon_package(100e6, 0.03, 6.0).unwrap();
        let gross: f64 = pkg.iter().map(|t| addon_of(std::slice::from_ref(t))).sum();
        assert!(addon_of(&pkg) <= 1e-12 * gross);
        let strip = addon_of(&make_fra_strip(&atm).unwrap());
        assert!((strip / 3_433_691.0 - 1.0).abs() < 0.005);
    }

    #[test]
    fn aggregation_rejects_mixed_sets() {
        let mut a = trade_addon(
            &vanilla_swap("a", Direction::Pay, 1.0, 0.0, 0.0, 2.0, 0.25),
            &cfg(),
        )
        .unwrap();
        let b = a.clone();
        a.hedging_set = HedgingSet::Rates("EUR".into());
        assert!(aggregate_hedging_set(&[a, b], &cfg()).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let c = cfg();
        assert_eq!(pfe_multiplier(0.0, 0.0, 1e6, &c), 1.0);
        assert!((pfe_multiplier(-1e300, 0.0, 1.0, &c) - 0.05).abs() < 1e-15);
        let f = pfe_multiplier(-1e6, 0.0, 1e6, &c);
        assert!((f - (0.05 + 0.95 * (-1.0f64 / 1.9).exp())).abs() < 1e-15);
        assert!((f - 0.6112386).abs() < 1e-7);
        assert_eq!(pfe_multiplier(5.0, 0.0, 1e6, &c), 1.0);
        assert_eq!(pfe_multiplier(0.0, 0.0, 0.0, &c), 1.0);
        assert_eq!(pfe_multiplier(-1.0, 0.0, 0.0, &c), 0.05);
    }

    #[test]
    fn ead_examples() {
        let c = cfg();
        let zero = ead(&[], &CollateralTerms::default(), &c).unwrap();
        assert_eq!(zero.ead, 0.0);

        let atm = vanilla_swap("atm", Direction::Pay, 100e6, 0.03, 0.0, 10.0, 0.25);
        let coll = CollateralTerms {
            v: 2e6,
            c: 2e6,
            ..Default::default()
        };
        let e = ead(std::slice::from_ref(&atm), &coll, &c).unwrap();
        assert!((e.ead - 1.4 * e.addon).abs() < 1e-6);
        assert_eq!(e.replacement_cost, 0.0);

        let mut margined = atm.clone();
        margined.margined = true;
        margined.mpor = Some(10.0 / 250.0);
        let coll = CollateralTerms {
            v: 1e6,
            c: 0.0,
            th: 5e6,
            mta: 1e6,
            nica: 0.0,
        };
        let em = ead(&[margined], &coll, &c).unwrap();
        let eu = ead(&[atm], &coll, &c).unwrap();
        assert!(em.ead <= eu.ead);
    }

    #[test]
    fn margined_ead_is_capped_by_large_threshold() {
        let c = cfg();
        let coll = CollateralTerms {
            v: 0.0,
            c: 0.0,
            th: 1e9,
            mta: 0.0,
            nica: 0.0,
        };
        let e = ead_from_addon(1e6, Some(3e5), &coll, &c).unwrap();
        assert!((e.ead - 1.4e6).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = SupervisoryConfig { rho2: 0.8, ..cfg() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
    }
}
