//! Linear rate trades, their cashflow schedules and projected amounts.

mod builders;
mod portfolio;

pub use builders::{
    amortising_swap, make_fra_strip, make_zero_addon_package, mirror, split_swap, vanilla_swap,
    zero_coupon_swap,
};
pub use portfolio::{parse_portfolio, portfolio_to_json, PortfolioDocument, SCHEMA_VERSION};

use serde::{Deserialize, Serialize};

use crate::curves::{snap_time, MarketData, TIME_EPS};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Pay,
    Receive,
}

impl Direction {
    /// +1 for received cashflows, -1 for paid ones.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Pay => -1.0,
            Direction::Receive => 1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Pay => Direction::Receive,
            Direction::Receive => Direction::Pay,
        }
    }
}

fn default_observation_interval() -> f64 {
    1.0 / 12.0
}

/// Economic kind of a leg. Dates of each cashflow follow from the leg
/// schedule; only the kind-specific terms live here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LegKind {
    /// N δ R per period.
    Fixed { rate: f64 },
    /// N ((1+R)^δ − 1) per period, δ the period length (one period for a zero-coupon leg).
    ZeroCouponFixed { rate: f64 },
    /// N δ L(T_f, T_f+τ), fixed at period start.
    Floating { tenor: f64 },
    /// N (Π(1+δ_τ L) − 1) per payment period, compounding every `tenor`.
    /// `accrued_factor` is the realised growth from period start to the next
    /// reset, required when the period started before the as-of date.
    Compound {
        tenor: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        accrued_factor: Option<f64>,
    },
    /// N δ S_τ(T_s, T_s + swap_tenor), swap rate fixed at period start.
    Cms { swap_tenor: f64, tenor: f64 },
    /// N (I(T_e)/I(T_s) − 1) per period.
    InflationFloating {
        index: String,
        #[serde(default = "default_observation_interval")]
        observation_interval: f64,
    },
    /// N (I(E)/I(S) − 1) per payment period.
    InflationCompound {
        index: String,
        #[serde(default = "default_observation_interval")]
        observation_interval: f64,
    },
}

impl LegKind {
    pub fn is_fixed(&self) -> bool {
        matches!(
            self,
            LegKind::Fixed { .. } | LegKind::ZeroCouponFixed { .. }
        )
    }

    pub fn fixed_rate(&self) -> Option<f64> {
        match self {
            LegKind::Fixed { rate } | LegKind::ZeroCouponFixed { rate } => Some(*rate),
            _ => None,
        }
    }
}

/// One leg of a linear trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub direction: Direction,
    pub kind: LegKind,
    /// Piecewise-constant notional: `(from_time, notional)` steps; the
    /// notional of a period is the step in force at its start.
    pub notional: Vec<(f64, f64)>,
    pub frequency: f64,
    pub start: f64,
    pub end: f64,
}

impl Leg {
    pub fn validate(&self) -> Result<()> {
        if !(self.start < self.end) {
            return domain(format!(
                "leg start {} must precede end {}",
                self.start, self.end
            ));
        }
        if !(self.frequency > 0.0) {
            return domain(format!(
                "leg frequency must be positive, got {}",
                self.frequency
            ));
        }
        if self.notional.is_empty() {
            return domain("leg notional schedule is empty");
        }
        if self
            .notional
            .iter()
            .any(|&(_, n)| !(n >= 0.0) || !n.is_finite())
        {
            return domain("leg notionals must be finite and nonnegative");
        }
        if self.notional.windows(2).any(|w| w[1].0 <= w[0].0) {
            return domain("notional steps must have increasing start times");
        }
        match &self.kind {
            LegKind::Floating { tenor } | LegKind::Compound { tenor, .. } if !(*tenor > 0.0) => {
                domain("index tenor must be positive")
            }
            LegKind::Cms { swap_tenor, tenor } if !(*swap_tenor > 0.0 && *tenor > 0.0) => {
                domain("CMS tenors must be positive")
            }
            _ => Ok(()),
        }
    }

    /// Number of whole periods in the leg.
    pub fn period_count(&self) -> Result<usize> {
        self.validate()?;
        let n = (self.end - self.start) / self.frequency;
        let rounded = n.round();
        if rounded < 1.0 || (n - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::Schedule(format!(
                "leg [{}, {}] is not a whole number of {}-year periods",
                self.start, self.end, self.frequency
            )));
        }
        Ok(rounded as usize)
    }

    /// Accrual periods `(start, end)` tiling `[S, E]`.
    pub fn periods(&self) -> Result<Vec<(f64, f64)>> {
        let n = self.period_count()?;
        let date = |i: usize| {
            if i == n {
                snap_time(self.end)
            } else {
                snap_time(self.start + i as f64 * self.frequency)
            }
        };
        Ok((0..n).map(|i| (date(i), date(i + 1))).collect())
    }

    pub fn notional_at(&self, t: f64) -> f64 {
        let i = self
            .notional
            .partition_point(|&(from, _)| from <= t + TIME_EPS);
        if i == 0 {
            self.notional[0].1
        } else {
            self.notional[i - 1].1
        }
    }

    /// Accrual-weighted mean notional over the leg.
    pub fn time_averaged_notional(&self) -> Result<f64> {
        let periods = self.periods()?;
        let total: f64 = periods.iter().map(|(s, e)| e - s).sum();
        let weighted: f64 = periods
            .iter()
            .map(|&(s, e)| (e - s) * self.notional_at(s))
            .sum();
        Ok(weighted / total)
    }
}

/// A linear trade: one or more legs in one currency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub id: String,
    pub currency: String,
    pub legs: Vec<Leg>,
    #[serde(default)]
    pub margined: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mpor: Option<f64>,
}

impl Trade {
    pub fn validate(&self) -> Result<()> {
        if self.legs.is_empty() {
            return domain(format!("trade {} has no legs", self.id));
        }
        for leg in &self.legs {
            leg.period_count()?;
        }
        if self.margined && !self.mpor.is_some_and(|m| m > 0.0) {
            return domain(format!("margined trade {} needs a positive MPOR", self.id));
        }
        Ok(())
    }

    /// Latest payment date over all legs.
    pub fn maturity(&self) -> f64 {
        self.legs
            .iter()
            .map(|l| l.end)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn start(&self) -> f64 {
        self.legs
            .iter()
            .map(|l| l.start)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn fixed_leg(&self) -> Option<&Leg> {
        self.legs.iter().find(|l| l.kind.is_fixed())
    }

    /// Projected cashflows of every leg, in leg order.
    pub fn cashflows(&self, market: &MarketData) -> Result<Vec<DatedCashflow>> {
        let mut out = Vec::new();
        for leg in &self.legs {
            out.extend(generate_schedule(leg, &self.currency, market)?);
        }
        Ok(out)
    }

    /// Present value on the initial curves of the cashflows paid after today.
    pub fn pv(&self, market: &MarketData) -> Result<f64> {
        let curve = market.discount(&self.currency)?;
        let mut pv = 0.0;
        for cf in self.cashflows(market)? {
            if cf.pay_date > TIME_EPS {
                pv += cf.signed_amount() * curve.discount_factor(cf.pay_date)?;
            }
        }
        Ok(pv)
    }
}

/// Kind-specific dates of a projected cashflow.
#[derive(Debug, Clone, PartialEq)]
pub enum CashflowKind {
    Fixed {
        accrual: f64,
        rate: f64,
    },
    ZeroCouponFixed {
        accrual: f64,
        rate: f64,
    },
    Floating {
        fixing: f64,
        tenor: f64,
        accrual: f64,
    },
    /// Compounding over `[start, end]` with resets every `tenor`; `next_reset`
    /// is the first reset strictly after today, `accrued` the realised growth
    /// up to it (1 when compounding has not started).
    Compound {
        start: f64,
        end: f64,
        tenor: f64,
        next_reset: f64,
        accrued: f64,
    },
    Cms {
        fixing: f64,
        swap_end: f64,
        tenor: f64,
        accrual: f64,
    },
    InflationFloating {
        start: f64,
        end: f64,
        next_observation: f64,
        index: String,
    },
    InflationCompound {
        start: f64,
        end: f64,
        next_observation: f64,
        index: String,
    },
}

/// A scheduled cashflow with its amount projected on the initial curves.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedCashflow {
    pub pay_date: f64,
    /// Projected amount CF(T) as seen by the receiver.
    pub amount: f64,
    pub notional: f64,
    /// +1 received, -1 paid.
    pub sign: f64,
    pub kind: CashflowKind,
}

impl DatedCashflow {
    pub fn signed_amount(&self) -> f64 {
        self.sign * self.amount
    }
}

/// First date of the lattice `start + k·step` lying at or after today
/// (strictly after when `strict`).
fn next_on_lattice(start: f64, step: f64, strict: bool) -> f64 {
    if start > TIME_EPS || (!strict && start >= -TIME_EPS) {
        return snap_time(start.max(0.0));
    }
    let mut k = (-start / step).ceil();
    let mut t = start + k * step;
    if strict && t <= TIME_EPS {
        k += 1.0;
        t = start + k * step;
    }
    snap_time(t)
}

/// Forward swap rate S_τ(T_s, T_e) on a τ-spaced schedule.
pub(crate) fn forward_swap_rate(
    market: &MarketData,
    ccy: &str,
    start: f64,
    end: f64,
    tenor: f64,
) -> Result<f64> {
    let curve = market.discount(ccy)?;
    let proj = market.projection(ccy, tenor)?;
    let n = ((end - start) / tenor).round().max(1.0) as usize;
    let (mut float, mut annuity) = (0.0, 0.0);
    for k in 0..n {
        let s = start + k as f64 * tenor;
        let e = if k + 1 == n { end } else { s + tenor };
        let df = curve.discount_factor(e)?;
        let delta = e - s;
        float += df * delta * proj.forward_rate(s.max(0.0), delta)?;
        annuity += df * delta;
    }
    if annuity <= 0.0 {
        return Err(Error::Numerical("zero annuity in CMS swap rate".into()));
    }
    Ok(float / annuity)
}

/// Cashflows of one leg with amounts projected from `market`.
pub fn generate_schedule(leg: &Leg, ccy: &str, market: &MarketData) -> Result<Vec<DatedCashflow>> {
    let periods = leg.periods()?;
    let sign = leg.direction.sign();
    let mut out = Vec::with_capacity(periods.len());
    for (s, e) in periods {
        let notional = leg.notional_at(s);
        let accrual = e - s;
        let (amount, kind) = match &leg.kind {
            LegKind::Fixed { rate } => (
                notional * accrual * rate,
                CashflowKind::Fixed {
                    accrual,
                    rate: *rate,
                },
            ),
            LegKind::ZeroCouponFixed { rate } => (
                notional * ((1.0 + rate).powf(accrual) - 1.0),
                CashflowKind::ZeroCouponFixed {
                    accrual,
                    rate: *rate,
                },
            ),
            LegKind::Floating { tenor } => {
                let proj = market.projection(ccy, *tenor)?;
                // a past fixing is not stored; fixings at or before today project from t = 0
                let l = proj.forward_rate(s.max(0.0), accrual)?;
                (
                    notional * accrual * l,
                    CashflowKind::Floating {
                        fixing: s,
                        tenor: *tenor,
                        accrual,
                    },
                )
            }
            LegKind::Compound {
                tenor,
                accrued_factor,
            } => {
                let proj = market.projection(ccy, *tenor)?;
                let next_reset = next_on_lattice(s, *tenor, true).min(e);
                let accrued = if s > TIME_EPS {
                    1.0
                } else if s >= -TIME_EPS {
                    // first fixing is today: known from the initial curve
                    1.0 / proj.projection_factor(next_reset)?
                } else {
                    accrued_factor.ok_or_else(|| {
                        Error::Data(format!(
                            "compounding started at {s}: accrued_factor required"
                        ))
                    })?
                };
                let growth =
                    accrued * proj.projection_factor(next_reset)? / proj.projection_factor(e)?;
                (
                    notional * (growth - 1.0),
                    CashflowKind::Compound {
                        start: s,
                        end: e,
                        tenor: *tenor,
                        next_reset,
                        accrued,
                    },
                )
            }
            LegKind::Cms { swap_tenor, tenor } => {
                if s < -TIME_EPS {
                    return Err(Error::Unsupported("CMS coupon with a past fixing".into()));
                }
                let swap_end = snap_time(s + swap_tenor);
                let rate = forward_swap_rate(market, ccy, s, swap_end, *tenor)?;
                (
                    notional * accrual * rate,
                    CashflowKind::Cms {
                        fixing: s,
                        swap_end,
                        tenor: *tenor,
                        accrual,
                    },
                )
            }
            LegKind::InflationFloating {
                index,
                observation_interval,
            } => {
                let ratio = market.inflation(index)?.inflation_ratio(s, e)?;
                (
                    notional * (ratio - 1.0),
                    CashflowKind::InflationFloating {
                        start: s,
                        end: e,
                        next_observation: next_on_lattice(s, *observation_interval, false).min(e),
                        index: index.clone(),
                    },
                )
            }
            LegKind::InflationCompound {
                index,
                observation_interval,
            } => {
                let ratio = market.inflation(index)?.inflation_ratio(s, e)?;
                (
                    notional * (ratio - 1.0),
                    CashflowKind::InflationCompound {
                        start: s,
                        end: e,
                        next_observation: next_on_lattice(s, *observation_interval, false).min(e),
                        index: index.clone(),
                    },
                )
            }
        };
        if !amount.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite projected cashflow at {e}"
            )));
        }
        out.push(DatedCashflow {
            pay_date: e,
            amount,
            notional,
            sign,
            kind,
        });
    }
    Ok(out)
}

/// Fixed rate giving the trade zero value on the initial curves.
///
/// The trade must have exactly one fixed leg and one non-fixed leg.
pub fn par_rate(trade: &Trade, market: &MarketData) -> Result<f64> {
    let (fixed, other) = match trade.legs.as_slice() {
        [a, b] if a.kind.is_fixed() && !b.kind.is_fixed() => (a, b),
        [a, b] if b.kind.is_fixed() && !a.kind.is_fixed() => (b, a),
        _ => {
            return Err(Error::Unsupported(format!(
                "par rate needs a fixed-vs-floating trade ({})",
                trade.id
            )))
        }
    };
    let curve = market.discount(&trade.currency)?;
    let mut float_pv = 0.0;
    for cf in generate_schedule(other, &trade.currency, market)? {
        if cf.pay_date > TIME_EPS {
            float_pv += cf.amount * curve.discount_factor(cf.pay_date)?;
        }
    }
    match fixed.kind {
        LegKind::Fixed { .. } => {
            let mut annuity = 0.0;
            for (s, e) in fixed.periods()? {
                if e > TIME_EPS {
                    annuity += fixed.notional_at(s) * (e - s) * curve.discount_factor(e)?;
                }
            }
            if annuity.abs() < f64::MIN_POSITIVE {
                return Err(Error::Numerical(format!("zero annuity for {}", trade.id)));
            }
            Ok(float_pv / annuity)
        }
        LegKind::ZeroCouponFixed { .. } => {
            let periods = fixed.periods()?;
            let &[(s, e)] = periods.as_slice() else {
                return Err(Error::Unsupported(
                    "zero-coupon par rate needs a single period".into(),
                ));
            };
            let base = fixed.notional_at(s) * curve.discount_factor(e)?;
            if base.abs() < f64::MIN_POSITIVE {
                return Err(Error::Numerical(format!("zero annuity for {}", trade.id)));
            }
            Ok((1.0 + float_pv / base).powf(1.0 / (e - s)) - 1.0)
        }
        _ => unreachable!("fixed leg"),
    }
}
