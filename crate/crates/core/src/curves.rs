//! Market data: discount curves, index-vs-discount basis curves, inflation
//! index projections and FX spots.
//!
//! All times are ACT/365-fixed year fractions from the as-of date. Zero rates
//! are continuously compounded and interpolated linearly, with flat
//! extrapolation on both sides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{domain, Error, Result};

/// Name reserved for the flat zero-rate curve.
pub const FLAT0: &str = "FLAT0";

/// Tolerance used when matching times (schedule dates, fixings, pillars).
pub const TIME_EPS: f64 = 1e-9;

/// Snap a year fraction onto a 1e-10 lattice so that dates produced by
/// different schedule arithmetic compare bit-identical.
pub fn snap_time(t: f64) -> f64 {
    (t * 1e10).round() / 1e10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    LinearOnZero,
}

/// Piecewise-linear interpolation on `(x, y)` pillars with flat extrapolation.
fn interp_flat(pillars: &[(f64, f64)], x: f64) -> f64 {
    match pillars {
        [] => 0.0,
        [(_, y)] => *y,
        _ => {
            let first = pillars[0];
            let last = pillars[pillars.len() - 1];
            if x <= first.0 {
                return first.1;
            }
            if x >= last.0 {
                return last.1;
            }
            let i = pillars.partition_point(|p| p.0 <= x);
            let (x0, y0) = pillars[i - 1];
            let (x1, y1) = pillars[i];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}

fn validate_pillars(pillars: &[(f64, f64)], what: &str) -> Result<()> {
    if pillars.is_empty() {
        return domain(format!("{what}: at least one pillar required"));
    }
    for (t, v) in pillars {
        if !t.is_finite() || !v.is_finite() || *t < 0.0 {
            return domain(format!("{what}: invalid pillar ({t}, {v})"));
        }
    }
    if pillars.windows(2).any(|w| w[1].0 <= w[0].0) {
        return domain(format!("{what}: pillar times must be strictly increasing"));
    }
    Ok(())
}

/// Zero-rate discount curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub asof: String,
    pillars: Vec<(f64, f64)>,
    pub interpolation: Interpolation,
}

impl Curve {
    pub fn new(asof: impl Into<String>, pillars: Vec<(f64, f64)>) -> Result<Self> {
        validate_pillars(&pillars, "curve")?;
        Ok(Self {
            asof: asof.into(),
            pillars,
            interpolation: Interpolation::LinearOnZero,
        })
    }

    /// Curve with a single constant zero rate.
    pub fn flat(rate: f64) -> Self {
        Self {
            asof: String::new(),
            pillars: vec![(0.0, rate)],
            interpolation: Interpolation::LinearOnZero,
        }
    }

    pub fn flat_zero() -> Self {
        Self::flat(0.0)
    }

    pub fn pillars(&self) -> &[(f64, f64)] {
        &self.pillars
    }

    /// Parallel shift of every zero rate.
    pub fn shifted(&self, bump: f64) -> Self {
        Self {
            asof: self.asof.clone(),
            pillars: self.pillars.iter().map(|&(t, z)| (t, z + bump)).collect(),
            interpolation: self.interpolation,
        }
    }

    pub fn zero_rate(&self, t: f64) -> f64 {
        interp_flat(&self.pillars, t)
    }

    /// P(0,t).
    pub fn discount_factor(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return domain(format!("discount factor requested at t = {t}"));
        }
        Ok((-self.zero_rate(t) * t).exp())
    }

    /// Instantaneous forward f(0,t) = d/dt [z(t) t], one-sided on the right at pillars.
    pub fn instantaneous_forward(&self, t: f64) -> f64 {
        let h = 1e-6;
        let lt = |s: f64| self.zero_rate(s) * s;
        (lt(t + h) - lt(t)) / h
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            time_years: f64,
            zero_rate: f64,
        }
        let mut rdr = csv::Reader::from_path(path)?;
        let mut pillars = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            pillars.push((row.time_years, row.zero_rate));
        }
        Curve::new(path.display().to_string(), pillars)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }
}

/// Projection curve for a money-market index: P_f(0,s) = P_b(0,s) P(0,s).
#[derive(Debug, Clone, PartialEq)]
pub struct BasisCurve {
    pub base: Curve,
    spread_pillars: Vec<(f64, f64)>,
}

impl BasisCurve {
    pub fn new(base: Curve, spread_pillars: Vec<(f64, f64)>) -> Result<Self> {
        validate_pillars(&spread_pillars, "basis curve")?;
        Ok(Self {
            base,
            spread_pillars,
        })
    }

    /// Projection on the discount curve itself (P_b = 1).
    pub fn zero_basis(base: Curve) -> Self {
        Self {
            base,
            spread_pillars: vec![(0.0, 0.0)],
        }
    }

    /// P_b(0,s).
    pub fn basis_factor(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return domain(format!("basis factor requested at t = {s}"));
        }
        Ok((-interp_flat(&self.spread_pillars, s) * s).exp())
    }

    /// P_f(0,s).
    pub fn projection_factor(&self, s: f64) -> Result<f64> {
        Ok(self.basis_factor(s)? * self.base.discount_factor(s)?)
    }

    /// Simple forward rate L(0, t_fix, t_fix + tenor), accrual = tenor.
    pub fn forward_rate(&self, t_fix: f64, tenor: f64) -> Result<f64> {
        if !(tenor > 0.0) {
            return domain(format!("forward tenor must be positive, got {tenor}"));
        }
        let p0 = self.projection_factor(t_fix)?;
        let p1 = self.projection_factor(t_fix + tenor)?;
        Ok((p0 / p1 - 1.0) / tenor)
    }

    fn from_csv_path(base: Curve, path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            time_years: f64,
            zero_spread: f64,
        }
        let mut rdr = csv::Reader::from_path(path)?;
        let mut pillars = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            pillars.push((row.time_years, row.zero_spread));
        }
        BasisCurve::new(base, pillars).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }
}

/// Inflation index: historical fixings (t < 0), base value at t = 0 and
/// projected levels (t > 0), log-linear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct InflationCurve {
    pub base_index_value: f64,
    projection_pillars: Vec<(f64, f64)>,
    history: Vec<(f64, f64)>,
}

impl InflationCurve {
    pub fn new(
        base_index_value: f64,
        projection_pillars: Vec<(f64, f64)>,
        history: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if !(base_index_value > 0.0) {
            return domain("inflation base index must be positive");
        }
        if projection_pillars
            .iter()
            .chain(history.iter())
            .any(|&(_, level)| !(level > 0.0))
        {
            return domain("inflation index levels must be positive");
        }
        if projection_pillars.iter().any(|&(t, _)| !(t > 0.0))
            || projection_pillars.windows(2).any(|w| w[1].0 <= w[0].0)
        {
            return domain("projection pillars must be strictly increasing positive times");
        }
        if history.iter().any(|&(t, _)| !(t < 0.0)) {
            return domain("historical fixings must lie strictly before the as-of date");
        }
        let mut history = history;
        history.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            base_index_value,
            projection_pillars,
            history,
        })
    }

    pub fn constant(level: f64) -> Self {
        Self {
            base_index_value: level,
            projection_pillars: Vec::new(),
            history: Vec::new(),
        }
    }

    /// I(t), historical when t < 0.
    pub fn index(&self, t: f64) -> Result<f64> {
        if t < -TIME_EPS {
            return self
                .history
                .iter()
                .find(|(s, _)| (s - t).abs() <= TIME_EPS)
                .map(|&(_, v)| v)
                .ok_or_else(|| {
                    Error::Data(format!("missing historical inflation fixing at t = {t}"))
                });
        }
        if t <= TIME_EPS || self.projection_pillars.is_empty() {
            return Ok(self.base_index_value);
        }
        let log_pillars: Vec<(f64, f64)> = std::iter::once((0.0, self.base_index_value.ln()))
            .chain(self.projection_pillars.iter().map(|&(s, v)| (s, v.ln())))
            .collect();
        let &(t_last, log_last) = log_pillars.last().expect("non-empty");
        if t > t_last {
            // constant growth rate of the last pillar
            let growth = (log_last - log_pillars[0].1) / t_last;
            return Ok((log_pillars[0].1 + growth * t).exp());
        }
        Ok(interp_flat(&log_pillars, t).exp())
    }

    /// I(t_end) / I(t_start).
    pub fn inflation_ratio(&self, t_start: f64, t_end: f64) -> Result<f64> {
        if (t_end - t_start).abs() <= TIME_EPS {
            return Ok(1.0);
        }
        Ok(self.index(t_end)? / self.index(t_start)?)
    }

    fn from_csv_path(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            time_years: f64,
            index_level: f64,
        }
        let mut rdr = csv::Reader::from_path(path)?;
        let mut base = None;
        let mut projection = Vec::new();
        let mut history = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            if row.time_years.abs() <= TIME_EPS {
                base = Some(row.index_level);
            } else if row.time_years < 0.0 {
                history.push((row.time_years, row.index_level));
            } else {
                projection.push((row.time_years, row.index_level));
            }
        }
        let base = base.ok_or_else(|| {
            Error::Data(format!(
                "{}: missing base index row at time 0",
                path.display()
            ))
        })?;
        InflationCurve::new(base, projection, history)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }
}

/// Tenor key in whole months, used to look up basis curves.
pub fn tenor_months(tenor: f64) -> u32 {
    (tenor * 12.0).round() as u32
}

/// All curves needed to project and discount a portfolio.
#[derive(Debug, Clone, Default)]
pub struct MarketData {
    discount: BTreeMap<String, Curve>,
    basis: BTreeMap<(String, u32), BasisCurve>,
    inflation: BTreeMap<String, InflationCurve>,
    fx_spot: BTreeMap<String, f64>,
    /// Curve used for any currency without an explicit discount curve.
    fallback: Option<Curve>,
}

impl MarketData {
    pub fn new() -> Self {
        Self::default()
    }

    /// Flat zero curves in every currency.
    pub fn flat_zero() -> Self {
        Self {
            fallback: Some(Curve::flat_zero()),
            ..Self::default()
        }
    }

    /// The same discount curve for every currency.
    pub fn single_curve(curve: Curve) -> Self {
        Self {
            fallback: Some(curve),
            ..Self::default()
        }
    }

    pub fn with_discount(mut self, ccy: &str, curve: Curve) -> Self {
        self.discount.insert(ccy.to_string(), curve);
        self
    }

    pub fn with_basis(mut self, ccy: &str, tenor: f64, curve: BasisCurve) -> Self {
        self.basis
            .insert((ccy.to_string(), tenor_months(tenor)), curve);
        self
    }

    pub fn with_inflation(mut self, index: &str, curve: InflationCurve) -> Self {
        self.inflation.insert(index.to_string(), curve);
        self
    }

    pub fn with_fx_spot(mut self, ccy: &str, spot: f64) -> Self {
        self.fx_spot.insert(ccy.to_string(), spot);
        self
    }

    pub fn discount(&self, ccy: &str) -> Result<&Curve> {
        self.discount
            .get(ccy)
            .or(self.fallback.as_ref())
            .ok_or_else(|| Error::Data(format!("no discount curve for {ccy}")))
    }

    /// Projection curve of the `tenor` index in `ccy`; zero basis when none is loaded.
    pub fn projection(&self, ccy: &str, tenor: f64) -> Result<BasisCurve> {
        match self.basis.get(&(ccy.to_string(), tenor_months(tenor))) {
            Some(b) => Ok(b.clone()),
            None => Ok(BasisCurve::zero_basis(self.discount(ccy)?.clone())),
        }
    }

    pub fn inflation(&self, index: &str) -> Result<&InflationCurve> {
        self.inflation
            .get(index)
            .ok_or_else(|| Error::Data(format!("no inflation curve for index {index}")))
    }

    /// Units of `domestic` per unit of `ccy`.
    pub fn fx_spot(&self, ccy: &str, domestic: &str) -> Result<f64> {
        if ccy == domestic {
            return Ok(1.0);
        }
        self.fx_spot
            .get(ccy)
            .copied()
            .ok_or_else(|| Error::Data(format!("missing FX spot for {ccy}/{domestic}")))
    }

    /// Load every curve file in `dir`, or the flat zero set when `dir` is `FLAT0`.
    ///
    /// Layout: `<CCY>.csv` (`time_years,zero_rate`), `<CCY>-<N>M.basis.csv`
    /// (`time_years,zero_spread`), `<INDEX>.inflation.csv`
    /// (`time_years,index_level`, row at 0 is the base, negative rows are
    /// fixings) and `fx.csv` (`currency,spot`).
    pub fn load(dir: &Path) -> Result<Self> {
        if dir.as_os_str() == FLAT0 {
            return Ok(Self::flat_zero());
        }
        if !dir.is_dir() {
            return Err(Error::Data(format!(
                "curve directory {} not found",
                dir.display()
            )));
        }
        let mut files: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let name_of = |p: &Path| {
            p.file_name()
                .and_then(|s| s.to_str())
                .unwrap_or("")
                .to_string()
        };

        let mut md = MarketData::new();
        for p in &files {
            let name = name_of(p);
            if name == "fx.csv" || name.ends_with(".basis.csv") || name.ends_with(".inflation.csv")
            {
                continue;
            }
            if let Some(ccy) = name.strip_suffix(".csv") {
                md.discount
                    .insert(ccy.to_string(), Curve::from_csv_path(p)?);
            }
        }
        for p in &files {
            let name = name_of(p);
            if let Some(stem) = name.strip_suffix(".basis.csv") {
                let (ccy, tenor) = stem
                    .split_once('-')
                    .and_then(|(c, t)| t.strip_suffix('M').map(|m| (c, m)))
                    .and_then(|(c, m)| m.parse::<u32>().ok().map(|m| (c, m)))
                    .ok_or_else(|| Error::Data(format!("bad basis file name {name}")))?;
                let base = md.discount(ccy)?.clone();
                md.basis.insert(
                    (ccy.to_string(), tenor),
                    BasisCurve::from_csv_path(base, p)?,
                );
            } else if let Some(index) = name.strip_suffix(".inflation.csv") {
                md.inflation
                    .insert(index.to_string(), InflationCurve::from_csv_path(p)?);
            } else if name == "fx.csv" {
                #[derive(Deserialize)]
                struct Row {
                    currency: String,
                    spot: f64,
                }
                let mut rdr = csv::Reader::from_path(p)?;
                for row in rdr.deserialize() {
                    let row: Row = row?;
                    if !(row.spot > 0.0) {
                        return Err(Error::Data(format!(
                            "non-positive FX spot for {}",
                            row.currency
                        )));
                    }
                    md.fx_spot.insert(row.currency, row.spot);
                }
            }
        }
        if md.discount.is_empty() {
            return Err(Error::Data(format!(
                "no discount curves found in {}",
                dir.display()
            )));
        }
        Ok(md)
    }
}

/// Illustrative USD discount curve (continuously compounded zero rates,
/// mildly upward sloping around 3%) used by the builtin scenarios.
pub fn sample_usd_curve() -> Curve {
    Curve::new(
        "sample-usd",
        vec![
            (0.25, 0.0240),
            (0.5, 0.0250),
            (1.0, 0.0262),
            (2.0, 0.0272),
            (3.0, 0.0280),
            (5.0, 0.0290),
            (7.0, 0.0298),
            (10.0, 0.0306),
            (15.0, 0.0312),
            (20.0, 0.0314),
            (30.0, 0.0310),
        ],
    )
    .expect("valid sample curve")
}
