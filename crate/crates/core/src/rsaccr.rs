//! Cashflow-decomposed add-ons.
//!
//! Every linear trade is broken into elementary cashflows (fixed, floating,
//! rates compound, CMS, inflation floating, inflation compound). Each cashflow
//! contributes its present value to the bucket of its payment date, and
//! non-fixed cashflows add index contributions at the buckets of their fixing
//! and index maturity dates. Contributions are aggregated with the SA-CCR
//! bucket correlation, so the portfolio add-on depends on net cashflows only.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::curves::{tenor_months, MarketData, TIME_EPS};
use crate::error::{Error, Result};
use crate::saccr::{
    aggregate_by_hedging_set, margined_maturity_factor, unmargined_maturity_factor,
    AddOnContribution, HedgingSet, MaturityBucket, SupervisoryConfig,
};
use crate::trades::{CashflowKind, Trade};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Discounting {
    /// P(0,T) = 1 in effective notionals.
    None,
    #[default]
    Market,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionSettings {
    pub discounting: Discounting,
    pub stochastic_basis: bool,
    pub include_fx: bool,
    pub domestic_ccy: String,
}

impl Default for DecompositionSettings {
    fn default() -> Self {
        Self {
            discounting: Discounting::Market,
            stochastic_basis: false,
            include_fx: false,
            domestic_ccy: "USD".to_string(),
        }
    }
}

/// Elementary cashflow kinds with their risk-relevant dates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ElementaryKind {
    Fixed,
    Floating {
        fixing: f64,
        tenor: f64,
    },
    Compound {
        start: f64,
        end: f64,
        tenor: f64,
        next_reset: f64,
    },
    Cms {
        fixing: f64,
        swap_end: f64,
        tenor: f64,
    },
    InflationFloating {
        start: f64,
        end: f64,
        next_observation: f64,
    },
    InflationCompound {
        start: f64,
        end: f64,
        next_observation: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementaryCashflow {
    pub trade_id: String,
    pub currency: String,
    pub pay_date: f64,
    pub notional: f64,
    /// Projected amount CF(T), nonnegative for the kinds that carry the notional.
    pub projected: f64,
    /// +1 received, -1 paid.
    pub sign: f64,
    pub kind: ElementaryKind,
    pub maturity_factor: f64,
}

fn trade_maturity_factor(trade: &Trade, horizon: f64, cfg: &SupervisoryConfig) -> f64 {
    match (trade.margined, trade.mpor) {
        (true, Some(mpor)) => margined_maturity_factor(mpor),
        _ => unmargined_maturity_factor(horizon, cfg),
    }
}

/// Break a linear trade into elementary cashflows projected on `market`.
///
/// Notional-bearing kinds (compound, inflation compound) are split into the
/// kind itself plus a fixed cashflow of −N. Fixed cashflows of one trade on
/// the same date are merged.
pub fn decompose(trade: &Trade, market: &MarketData) -> Result<Vec<ElementaryCashflow>> {
    trade.validate()?;
    let mut out = Vec::new();
    let mut fixed_by_date: BTreeMap<u64, f64> = BTreeMap::new();
    let mut add_fixed = |date: f64, signed: f64| {
        *fixed_by_date.entry(date.to_bits()).or_insert(0.0) += signed;
    };
    let elementary =
        |pay_date: f64, notional: f64, projected: f64, sign: f64, kind: ElementaryKind| {
            ElementaryCashflow {
                trade_id: trade.id.clone(),
                currency: trade.currency.clone(),
                pay_date,
                notional,
                projected,
                sign,
                kind,
                maturity_factor: f64::NAN,
            }
        };
    for cf in trade.cashflows(market)? {
        if cf.pay_date <= TIME_EPS {
            continue;
        }
        match cf.kind {
            CashflowKind::Fixed { .. } | CashflowKind::ZeroCouponFixed { .. } => {
                add_fixed(cf.pay_date, cf.signed_amount());
            }
            CashflowKind::Floating { fixing, tenor, .. } => {
                if fixing <= TIME_EPS {
                    // fixed in the past or today: no index risk left
                    add_fixed(cf.pay_date, cf.signed_amount());
                } else {
                    out.push(elementary(
                        cf.pay_date,
                        cf.notional,
                        cf.amount,
                        cf.sign,
                        ElementaryKind::Floating { fixing, tenor },
                    ));
                }
            }
            CashflowKind::Compound {
                start,
                end,
                tenor,
                next_reset,
                ..
            } => {
                out.push(elementary(
                    cf.pay_date,
                    cf.notional,
                    cf.amount + cf.notional,
                    cf.sign,
                    ElementaryKind::Compound {
                        start,
                        end,
                        tenor,
                        next_reset,
                    },
                ));
                add_fixed(cf.pay_date, -cf.sign * cf.notional);
            }
            CashflowKind::Cms {
                fixing,
                swap_end,
                tenor,
                ..
            } => out.push(elementary(
                cf.pay_date,
                cf.notional,
                cf.amount,
                cf.sign,
                ElementaryKind::Cms {
                    fixing,
                    swap_end,
                    tenor,
                },
            )),
            CashflowKind::InflationFloating {
                start,
                end,
                next_observation,
                ..
            } => out.push(elementary(
                cf.pay_date,
                cf.notional,
                cf.amount,
                cf.sign,
                ElementaryKind::InflationFloating {
                    start,
                    end,
                    next_observation,
                },
            )),
            CashflowKind::InflationCompound {
                start,
                end,
                next_observation,
                ..
            } => {
                out.push(elementary(
                    cf.pay_date,
                    cf.notional,
                    cf.amount + cf.notional,
                    cf.sign,
                    ElementaryKind::InflationCompound {
                        start,
                        end,
                        next_observation,
                    },
                ));
                add_fixed(cf.pay_date, -cf.sign * cf.notional);
            }
        }
    }
    for (bits, signed) in fixed_by_date {
        let pay_date = f64::from_bits(bits);
        out.push(elementary(
            pay_date,
            signed.abs(),
            signed.abs(),
            if signed >= 0.0 { 1.0 } else { -1.0 },
            ElementaryKind::Fixed,
        ));
    }
    out.sort_by(|a, b| a.pay_date.total_cmp(&b.pay_date));
    Ok(out)
}

fn discount(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
) -> Result<f64> {
    match settings.discounting {
        Discounting::None => Ok(1.0),
        Discounting::Market => market.discount(&cf.currency)?.discount_factor(cf.pay_date),
    }
}

/// Units of the domestic currency per unit of the cashflow currency.
fn fx_rate(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
) -> Result<f64> {
    market.fx_spot(&cf.currency, &settings.domestic_ccy)
}

/// Contribution built in received orientation, then oriented by the cashflow sign.
struct Builder<'a> {
    cf: &'a ElementaryCashflow,
    cfg: &'a SupervisoryConfig,
    margined_mf: Option<f64>,
    scale: f64,
}

impl Builder<'_> {
    fn mf(&self, end: f64) -> f64 {
        self.margined_mf
            .unwrap_or_else(|| unmargined_maturity_factor(end, self.cfg))
    }

    fn make(
        &self,
        set: HedgingSet,
        bucket: MaturityBucket,
        notional: f64,
        start: f64,
        end: f64,
        received_delta: f64,
    ) -> AddOnContribution {
        // paid cashflows carry the opposite delta of the received rows
        let delta = if self.cf.sign >= 0.0 {
            received_delta
        } else {
            -received_delta
        };
        AddOnContribution {
            hedging_set: set,
            bucket: Some(bucket),
            effective_notional: notional * self.scale,
            start,
            end,
            delta,
            maturity_factor: self.mf(end),
        }
    }

    fn at_end(
        &self,
        set: HedgingSet,
        notional: f64,
        end: f64,
        received_delta: f64,
    ) -> AddOnContribution {
        let end = end.max(0.0);
        self.make(
            set,
            MaturityBucket::of(end),
            notional,
            0.0,
            end,
            received_delta,
        )
    }
}

fn builder<'a>(
    cf: &'a ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &'a SupervisoryConfig,
    margined_mf: Option<f64>,
) -> Result<Builder<'a>> {
    Ok(Builder {
        cf,
        cfg,
        margined_mf,
        scale: fx_rate(cf, market, settings)?,
    })
}

/// Present-value contribution: bucket M(T), interval [0, T], notional |CF(T)| P(0,T).
pub fn pv_contribution(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
) -> Result<AddOnContribution> {
    pv_contribution_with(cf, market, settings, cfg, None)
}

fn pv_contribution_with(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
    margined_mf: Option<f64>,
) -> Result<AddOnContribution> {
    let b = builder(cf, market, settings, cfg, margined_mf)?;
    let p = discount(cf, market, settings)?;
    let mut c = b.at_end(
        HedgingSet::Rates(cf.currency.clone()),
        cf.projected.abs() * p,
        cf.pay_date,
        -1.0,
    );
    // a negative projected amount flips the economic direction
    if cf.projected < 0.0 {
        c.delta = -c.delta;
    }
    Ok(c)
}

fn index_sets(
    cf: &ElementaryCashflow,
    tenor: f64,
    settings: &DecompositionSettings,
) -> Vec<HedgingSet> {
    let mut sets = vec![HedgingSet::Rates(cf.currency.clone())];
    if settings.stochastic_basis {
        sets.push(HedgingSet::Basis(cf.currency.clone(), tenor_months(tenor)));
    }
    sets
}

/// Floating cashflow: PV contribution plus −(N+CF)P at M(T_f) and +(N+CF)P at M(T_f+τ).
pub fn floating_contributions(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
) -> Result<Vec<AddOnContribution>> {
    floating_with(cf, market, settings, cfg, None)
}

fn floating_with(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
    margined_mf: Option<f64>,
) -> Result<Vec<AddOnContribution>> {
    let ElementaryKind::Floating { fixing, tenor } = cf.kind else {
        return Err(Error::Unsupported(
            "floating_contributions on a non-floating cashflow".into(),
        ));
    };
    let mut out = vec![pv_contribution_with(
        cf,
        market,
        settings,
        cfg,
        margined_mf,
    )?];
    if fixing <= TIME_EPS {
        return Ok(out);
    }
    let b = builder(cf, market, settings, cfg, margined_mf)?;
    let notional = (cf.notional + cf.projected) * discount(cf, market, settings)?;
    for set in index_sets(cf, tenor, settings) {
        out.push(b.at_end(set.clone(), notional, fixing, -1.0));
        out.push(b.at_end(set, notional, fixing + tenor, 1.0));
    }
    Ok(out)
}

/// Rates compound cashflow: −CF·P at M(max(τ_C, T_s)) and +CF·P at M(T_e).
pub fn compound_contributions(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
) -> Result<Vec<AddOnContribution>> {
    compound_with(cf, market, settings, cfg, None)
}

fn compound_with(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
    margined_mf: Option<f64>,
) -> Result<Vec<AddOnContribution>> {
    let ElementaryKind::Compound {
        start,
        end,
        tenor,
        next_reset,
    } = cf.kind
    else {
        return Err(Error::Unsupported(
            "compound_contributions on a non-compound cashflow".into(),
        ));
    };
    let mut out = vec![pv_contribution_with(
        cf,
        market,
        settings,
        cfg,
        margined_mf,
    )?];
    let b = builder(cf, market, settings, cfg, margined_mf)?;
    let notional = cf.projected * discount(cf, market, settings)?;
    let first = next_reset.max(start).max(0.0);
    for set in index_sets(cf, tenor, settings) {
        out.push(b.at_end(set.clone(), notional, first, -1.0));
        out.push(b.at_end(set, notional, end, 1.0));
    }
    Ok(out)
}

/// CMS cashflow: weight δ_τ/δ(T_s,T_e) on (N+CF)P, spread over the three
/// buckets with the fixing-to-swap-end interval clamped to each bucket.
/// Rows whose clamped interval is empty are dropped.
pub fn cms_contributions(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
) -> Result<Vec<AddOnContribution>> {
    cms_with(cf, market, settings, cfg, None)
}

fn cms_with(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
    margined_mf: Option<f64>,
) -> Result<Vec<AddOnContribution>> {
    let ElementaryKind::Cms {
        fixing,
        swap_end,
        tenor,
    } = cf.kind
    else {
        return Err(Error::Unsupported(
            "cms_contributions on a non-CMS cashflow".into(),
        ));
    };
    let mut out = vec![pv_contribution_with(
        cf,
        market,
        settings,
        cfg,
        margined_mf,
    )?];
    let b = builder(cf, market, settings, cfg, margined_mf)?;
    let weight = tenor / (swap_end - fixing);
    let notional = weight * (cf.notional + cf.projected) * discount(cf, market, settings)?;
    let (ts, te) = (fixing, swap_end);
    let rows = [
        (MaturityBucket::M1, ts.min(1.0), te.min(1.0), -1.0),
        (
            MaturityBucket::M2,
            ts.clamp(1.0, 5.0),
            te.clamp(1.0, 5.0),
            1.0,
        ),
        (MaturityBucket::M3, ts.max(5.0), te.max(5.0), 1.0),
    ];
    for set in index_sets(cf, tenor, settings) {
        for &(bucket, s, e, d) in &rows {
            if e - s > TIME_EPS {
                out.push(b.make(set.clone(), bucket, notional, s, e, d));
            }
        }
    }
    Ok(out)
}

/// Inflation cashflows: PV contribution in the rates set plus two rows in
/// the inflation set at M(max(τ_I, T_s)) (delta −1) and M(T_e) (delta +1).
/// The floating kind uses (N+CF)P, the compound kind CF·P.
pub fn inflation_contributions(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
) -> Result<Vec<AddOnContribution>> {
    inflation_with(cf, market, settings, cfg, None)
}

fn inflation_with(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
    margined_mf: Option<f64>,
) -> Result<Vec<AddOnContribution>> {
    let (start, end, next_obs, carries_notional) = match cf.kind {
        ElementaryKind::InflationFloating {
            start,
            end,
            next_observation,
        } => (start, end, next_observation, true),
        ElementaryKind::InflationCompound {
            start,
            end,
            next_observation,
        } => (start, end, next_observation, false),
        _ => {
            return Err(Error::Unsupported(
                "inflation_contributions on a non-inflation cashflow".into(),
            ))
        }
    };
    let mut out = vec![pv_contribution_with(
        cf,
        market,
        settings,
        cfg,
        margined_mf,
    )?];
    let b = builder(cf, market, settings, cfg, margined_mf)?;
    let base = if carries_notional {
        cf.notional + cf.projected
    } else {
        cf.projected
    };
    let notional = base * discount(cf, market, settings)?;
    let set = HedgingSet::Inflation(cf.currency.clone());
    out.push(b.at_end(set.clone(), notional, next_obs.max(start), -1.0));
    out.push(b.at_end(set, notional, end, 1.0));
    Ok(out)
}

/// FX contribution of a foreign cashflow: its present value in the domestic
/// currency, in the `CCY/domestic` set. `None` for domestic cashflows.
pub fn fx_contribution(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
) -> Result<Option<AddOnContribution>> {
    fx_with(cf, market, settings, cfg, None)
}

fn fx_with(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
    margined_mf: Option<f64>,
) -> Result<Option<AddOnContribution>> {
    if cf.currency == settings.domestic_ccy {
        return Ok(None);
    }
    let spot = fx_rate(cf, market, settings)?;
    let p = discount(cf, market, settings)?;
    let received_delta = if cf.projected >= 0.0 { -1.0 } else { 1.0 };
    Ok(Some(AddOnContribution {
        hedging_set: HedgingSet::Fx(format!("{}/{}", cf.currency, settings.domestic_ccy)),
        bucket: None,
        effective_notional: cf.projected.abs() * p * spot,
        start: 0.0,
        end: cf.pay_date,
        delta: if cf.sign >= 0.0 {
            received_delta
        } else {
            -received_delta
        },
        maturity_factor: margined_mf
            .unwrap_or_else(|| unmargined_maturity_factor(cf.pay_date, cfg)),
    }))
}

/// All contributions of one elementary cashflow.
pub fn cashflow_contributions(
    cf: &ElementaryCashflow,
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
    margined_mf: Option<f64>,
) -> Result<Vec<AddOnContribution>> {
    let mut out = match cf.kind {
        ElementaryKind::Fixed => vec![pv_contribution_with(
            cf,
            market,
            settings,
            cfg,
            margined_mf,
        )?],
        ElementaryKind::Floating { .. } => floating_with(cf, market, settings, cfg, margined_mf)?,
        ElementaryKind::Compound { .. } => compound_with(cf, market, settings, cfg, margined_mf)?,
        ElementaryKind::Cms { .. } => cms_with(cf, market, settings, cfg, margined_mf)?,
        ElementaryKind::InflationFloating { .. } | ElementaryKind::InflationCompound { .. } => {
            inflation_with(cf, market, settings, cfg, margined_mf)?
        }
    };
    if settings.include_fx {
        out.extend(fx_with(cf, market, settings, cfg, margined_mf)?);
    }
    Ok(out)
}

/// Contribution tagged with the trade it came from, for dumps and breakdowns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaggedContribution {
    pub trade_id: String,
    pub contribution: AddOnContribution,
}

/// Every contribution of every trade, in deterministic order.
pub fn portfolio_contributions(
    trades: &[Trade],
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
) -> Result<Vec<TaggedContribution>> {
    let mut out = Vec::new();
    for trade in trades {
        let margined_mf = trade_maturity_factor(trade, trade.maturity(), cfg);
        let margined_mf = trade.margined.then_some(margined_mf);
        for cf in decompose(trade, market)? {
            for c in cashflow_contributions(&cf, market, settings, cfg, margined_mf)? {
                out.push(TaggedContribution {
                    trade_id: trade.id.clone(),
                    contribution: c,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        let (x, y) = (&a.contribution, &b.contribution);
        x.hedging_set
            .cmp(&y.hedging_set)
            .then(x.bucket.cmp(&y.bucket))
            .then(x.end.total_cmp(&y.end))
            .then(x.delta.total_cmp(&y.delta))
            .then(a.trade_id.cmp(&b.trade_id))
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsaccrAddOn {
    pub total: f64,
    pub per_hedging_set: BTreeMap<HedgingSet, f64>,
}

/// Portfolio add-on: contributions aggregated per hedging set with the
/// bucket quadratic form, then summed across sets.
pub fn portfolio_rsaccr_addon(
    trades: &[Trade],
    market: &MarketData,
    settings: &DecompositionSettings,
    cfg: &SupervisoryConfig,
) -> Result<RsaccrAddOn> {
    cfg.validate()?;
    let contribs: Vec<AddOnContribution> = portfolio_contributions(trades, market, settings, cfg)?
        .into_iter()
        .map(|t| t.contribution)
        .collect();
    let (total, per_hedging_set) = aggregate_by_hedging_set(&contribs, cfg)?;
    Ok(RsaccrAddOn {
        total,
        per_hedging_set,
    })
}

/// Render contributions as `trade_id,hedging_set,bucket,eff_notional,start,end,delta,mf`.
pub fn contributions_csv(contribs: &[TaggedContribution]) -> String {
    let mut s = String::from("trade_id,hedging_set,bucket,eff_notional,start,end,delta,mf\n");
    for t in contribs {
        let c = &t.contribution;
        let bucket = c.bucket.map(|b| b.to_string()).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            t.trade_id,
            c.hedging_set,
            bucket,
            c.effective_notional,
            c.start,
            c.end,
            c.delta,
            c.maturity_factor
        ));
    }
    s
}
