//! Exposure profiles of portfolios on simulated paths, and the add-on as the
//! time average of expected positive exposure over one year.
//!
//! Values are undiscounted: V(t) is the value at t of the cashflows paid
//! after t, and E[(V(t) − V(0))⁺] is a plain path average. Cashflows paid
//! before t leave the portfolio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::simulation::{simulate_gmm3f, simulate_hw1f, Grid, PathScenario, ScenarioSet};
use super::{GMM3FParams, HWParams, SigmaConvention};
use crate::curves::{snap_time, MarketData, TIME_EPS};
use crate::error::{domain, Error, Result};
use crate::saccr::SupervisoryConfig;
use crate::trades::{CashflowKind, Trade};

const BLOCK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ModelChoice {
    Hw1f,
    #[default]
    Gmm3f,
}

impl std::str::FromStr for ModelChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hw1f" => Ok(ModelChoice::Hw1f),
            "gmm3f" => Ok(ModelChoice::Gmm3f),
            _ => Err(Error::Config(format!("unknown model '{s}' (hw1f|gmm3f)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSettings {
    pub model: ModelChoice,
    pub paths: usize,
    pub seed: u64,
    pub grid: Grid,
    pub hw: HWParams,
    pub gmm: GMM3FParams,
}

impl McSettings {
    pub fn supervisory(cfg: &SupervisoryConfig) -> Self {
        Self {
            model: ModelChoice::default(),
            paths: 20_000,
            seed: 42,
            grid: Grid::Weekly,
            hw: HWParams::supervisory(cfg, SigmaConvention::Exact),
            gmm: GMM3FParams::supervisory(cfg, SigmaConvention::Exact),
        }
    }
}

impl Default for McSettings {
    fn default() -> Self {
        Self::supervisory(&SupervisoryConfig::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AddOnEstimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExposureProfile {
    pub times: Vec<f64>,
    /// E[(V(t) − V(0))⁺].
    pub epe_pay: Vec<f64>,
    /// E[(V(0) − V(t))⁺], the exposure of the mirrored portfolio.
    pub epe_receive: Vec<f64>,
    pub stderr_pay: Vec<f64>,
    pub stderr_receive: Vec<f64>,
    pub stderr_average: Vec<f64>,
    pub mean_change: Vec<f64>,
    pub var_change: Vec<f64>,
    pub addon_pay: AddOnEstimate,
    pub addon_receive: AddOnEstimate,
    /// Average of the pay and receive add-ons.
    pub addon: AddOnEstimate,
    pub paths: usize,
    pub seed: u64,
}

impl ExposureProfile {
    /// Average of the pay and receive profiles.
    pub fn epe(&self) -> Vec<f64> {
        self.epe_pay
            .iter()
            .zip(&self.epe_receive)
            .map(|(p, r)| 0.5 * (p + r))
            .collect()
    }

    /// `t,epe,stderr` rows of the averaged profile.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,epe,stderr\n");
        for ((t, e), se) in self.times.iter().zip(self.epe()).zip(&self.stderr_average) {
            s.push_str(&format!("{t},{e},{se}\n"));
        }
        s
    }
}

/// Trapezoid weights on [0, 1] with a zero value at t = 0.
fn trapezoid_weights(times: &[f64]) -> Result<Vec<f64>> {
    if times.is_empty() {
        return domain("empty exposure grid");
    }
    if times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return domain("exposure grid must be positive and strictly increasing");
    }
    let last = *times.last().unwrap();
    if (last - 1.0).abs() > TIME_EPS {
        return domain(format!(
            "exposure grid ends at {last}, it must cover [0, 1]"
        ));
    }
    let n = times.len();
    Ok((0..n)
        .map(|i| {
            let prev = if i == 0 { 0.0 } else { times[i - 1] };
            let next = if i + 1 < n { times[i + 1] } else { times[i] };
            0.5 * (next - prev)
        })
        .collect())
}

/// (1/T)∫₀ᵀ epe(t) dt over T = 1 by the trapezoid rule, with epe(0) = 0.
pub fn addon_from_profile(times: &[f64], epe: &[f64]) -> Result<f64> {
    if times.len() != epe.len() {
        return domain("profile times and values differ in length");
    }
    let w = trapezoid_weights(times)?;
    Ok(w.iter().zip(epe).map(|(w, e)| w * e).sum())
}

fn estimate(sum: f64, sum2: f64, n: usize) -> AddOnEstimate {
    let n_f = n as f64;
    let mean = sum / n_f;
    let var = if n > 1 {
        ((sum2 - n_f * mean * mean) / (n_f - 1.0)).max(0.0)
    } else {
        0.0
    };
    AddOnEstimate {
        value: mean,
        stderr: (var / n_f).sqrt(),
    }
}

/// Add-on of dV = σ dW simulated exactly on `grid` (pay and receive averaged).
pub fn brownian_addon(sigma: f64, paths: usize, grid: &[f64], seed: u64) -> Result<AddOnEstimate> {
    let w = trapezoid_weights(grid)?;
    if paths == 0 {
        return domain("at least one path is required");
    }
    let blocks: Vec<(f64, f64)> = (0..paths.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let (mut s, mut s2) = (0.0, 0.0);
            for idx in b * BLOCK..((b + 1) * BLOCK).min(paths) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(idx as u64);
                let (mut v, mut prev, mut y) = (0.0f64, 0.0f64, 0.0f64);
                for (t, wi) in grid.iter().zip(&w) {
                    let z: f64 = rng.sample(StandardNormal);
                    v += sigma * (t - prev).sqrt() * z;
                    prev = *t;
                    y += wi * 0.5 * v.abs();
                }
                s += y;
                s2 += y * y;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = blocks
        .iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(estimate(s, s2, paths))
}

#[derive(Debug, Clone)]
struct Reset {
    date: f64,
    j: usize,
    k: Option<usize>,
    /// Deterministic basis ratio P_b(r_i)/P_b(r_{i+1}) of the period starting here.
    basis: f64,
}

#[derive(Debug, Clone)]
enum Term {
    Fixed {
        pay: f64,
        j: usize,
        amount: f64,
    },
    Floating {
        fixing: f64,
        k_fix: Option<usize>,
        j_fix: usize,
        pay: f64,
        j_pay: usize,
        scale: f64,
        basis: f64,
    },
    Compound {
        /// r_0 < … < r_m = end.
        resets: Vec<Reset>,
        accrued: f64,
        scale: f64,
    },
}

/// Bond prices seen by the valuer: either a simulated path or the initial curve.
trait Bonds {
    fn now(&self, j: usize) -> f64;
    fn at(&self, k: usize, j: usize) -> f64;
}

struct Initial<'a>(&'a ScenarioSet);

impl Bonds for Initial<'_> {
    fn now(&self, j: usize) -> f64 {
        self.0.initial_bond(j)
    }
    fn at(&self, _: usize, _: usize) -> f64 {
        unreachable!("no fixing has happened at t = 0")
    }
}

struct OnPath<'a> {
    path: &'a PathScenario,
    k: usize,
}

impl Bonds for OnPath<'_> {
    fn now(&self, j: usize) -> f64 {
        self.path.bond(self.k, j)
    }
    fn at(&self, k: usize, j: usize) -> f64 {
        self.path.bond(k, j)
    }
}

impl Term {
    fn value(&self, t: f64, b: &impl Bonds) -> f64 {
        match self {
            Term::Fixed { pay, j, amount } => {
                if *pay <= t + TIME_EPS {
                    0.0
                } else {
                    amount * b.now(*j)
                }
            }
            Term::Floating {
                fixing,
                k_fix,
                j_fix,
                pay,
                j_pay,
                scale,
                basis,
            } => {
                if *pay <= t + TIME_EPS {
                    0.0
                } else if *fixing <= t + TIME_EPS {
                    let k = k_fix.expect("fixings before the horizon are simulation times");
                    scale * (basis / b.at(k, *j_pay) - 1.0) * b.now(*j_pay)
                } else {
                    scale * (basis * b.now(*j_fix) - b.now(*j_pay))
                }
            }
            Term::Compound {
                resets,
                accrued,
                scale,
            } => {
                let last = resets.last().expect("compound has an end date");
                if last.date <= t + TIME_EPS {
                    return 0.0;
                }
                let mut growth = *accrued;
                let mut next = 0;
                while next + 1 < resets.len() && resets[next].date <= t + TIME_EPS {
                    let r = &resets[next];
                    let k = r.k.expect("resets before the horizon are simulation times");
                    growth *= r.basis / b.at(k, resets[next + 1].j);
                    next += 1;
                }
                let future_basis: f64 = resets[next..resets.len() - 1]
                    .iter()
                    .map(|r| r.basis)
                    .product();
                scale * (growth * future_basis * b.now(resets[next].j) - b.now(last.j))
            }
        }
    }
}

/// Dates a portfolio needs as bonds; also the fixing times to simulate.
fn term_dates(trades: &[Trade], market: &MarketData) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for trade in trades {
        for cf in trade.cashflows(market)? {
            out.push(cf.pay_date);
            match cf.kind {
                CashflowKind::Floating { fixing, .. } => out.push(fixing),
                CashflowKind::Compound {
                    start,
                    end,
                    tenor,
                    next_reset,
                    ..
                } => out.extend(reset_dates(start, end, tenor, next_reset)),
                _ => {}
            }
        }
    }
    Ok(out.into_iter().filter(|d| *d > TIME_EPS).collect())
}

fn reset_dates(start: f64, end: f64, tenor: f64, next_reset: f64) -> Vec<f64> {
    let mut r = vec![if start > TIME_EPS { start } else { next_reset }];
    while *r.last().unwrap() < end - TIME_EPS {
        let x = *r.last().unwrap();
        r.push(snap_time((x + tenor).min(end)));
    }
    r
}

fn compile(trades: &[Trade], market: &MarketData, scen: &ScenarioSet) -> Result<Vec<Term>> {
    let date = |d: f64| {
        scen.date_index(d).ok_or_else(|| {
            Error::Numerical(format!("date {d} missing from the simulated bond set"))
        })
    };
    let mut terms = Vec::new();
    for trade in trades {
        for cf in trade.cashflows(market)? {
            if cf.pay_date <= TIME_EPS {
                continue;
            }
            let scale = cf.sign * cf.notional;
            match &cf.kind {
                CashflowKind::Fixed { .. } | CashflowKind::ZeroCouponFixed { .. } => {
                    terms.push(Term::Fixed {
                        pay: cf.pay_date,
                        j: date(cf.pay_date)?,
                        amount: cf.signed_amount(),
                    })
                }
                CashflowKind::Floating { fixing, tenor, .. } => {
                    if *fixing <= TIME_EPS {
                        terms.push(Term::Fixed {
                            pay: cf.pay_date,
                            j: date(cf.pay_date)?,
                            amount: cf.signed_amount(),
                        });
                        continue;
                    }
                    let proj = market.projection(&trade.currency, *tenor)?;
                    terms.push(Term::Floating {
                        fixing: *fixing,
                        k_fix: scen.time_index(*fixing),
                        j_fix: date(*fixing)?,
                        pay: cf.pay_date,
                        j_pay: date(cf.pay_date)?,
                        scale,
                        basis: proj.basis_factor(*fixing)? / proj.basis_factor(cf.pay_date)?,
                    });
                }
                CashflowKind::Compound {
                    start,
                    end,
                    tenor,
                    next_reset,
                    accrued,
                } => {
                    let proj = market.projection(&trade.currency, *tenor)?;
                    let dates = reset_dates(*start, *end, *tenor, *next_reset);
                    let mut resets = Vec::with_capacity(dates.len());
                    for (i, &d) in dates.iter().enumerate() {
                        let basis = match dates.get(i + 1) {
                            Some(&e) => proj.basis_factor(d)? / proj.basis_factor(e)?,
                            None => 1.0,
                        };
                        resets.push(Reset {
                            date: d,
                            j: date(d)?,
                            k: scen.time_index(d),
                            basis,
                        });
                    }
                    terms.push(Term::Compound {
                        resets,
                        accrued: *accrued,
                        scale,
                    });
                }
                CashflowKind::Cms { .. } => {
                    return Err(Error::Unsupported(format!(
                        "{}: the Monte Carlo oracle does not price CMS coupons",
                        trade.id
                    )))
                }
                CashflowKind::InflationFloating { .. } | CashflowKind::InflationCompound { .. } => {
                    return Err(Error::Unsupported(format!(
                        "{}: the Monte Carlo oracle does not price inflation cashflows",
                        trade.id
                    )))
                }
            }
        }
    }
    Ok(terms)
}

fn portfolio_value(terms: &[Term], t: f64, b: &impl Bonds) -> f64 {
    terms.iter().map(|x| x.value(t, b)).sum()
}

fn common_currency(portfolios: &[Vec<Trade>]) -> Result<Option<String>> {
    let mut ccy: Option<&str> = None;
    for t in portfolios.iter().flatten() {
        match ccy {
            None => ccy = Some(&t.currency),
            Some(c) if c != t.currency => {
                return Err(Error::Unsupported(format!(
                    "the Monte Carlo oracle is single-currency, found {c} and {}",
                    t.currency
                )))
            }
            _ => {}
        }
    }
    Ok(ccy.map(str::to_string))
}

/// Every bond date the portfolios need.
pub fn valuation_dates(portfolios: &[Vec<Trade>], market: &MarketData) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for p in portfolios {
        out.extend(term_dates(p, market)?);
    }
    Ok(out)
}

#[derive(Clone)]
struct Acc {
    pos: Vec<f64>,
    pos2: Vec<f64>,
    neg: Vec<f64>,
    neg2: Vec<f64>,
    half_abs2: Vec<f64>,
    d: Vec<f64>,
    d2: Vec<f64>,
    y: [f64; 6],
}

impl Acc {
    fn new(g: usize) -> Self {
        Self {
            pos: vec![0.0; g],
            pos2: vec![0.0; g],
            neg: vec![0.0; g],
            neg2: vec![0.0; g],
            half_abs2: vec![0.0; g],
            d: vec![0.0; g],
            d2: vec![0.0; g],
            y: [0.0; 6],
        }
    }

    fn merge(&mut self, o: &Acc) {
        for (a, b) in [
            (&mut self.pos, &o.pos),
            (&mut self.pos2, &o.pos2),
            (&mut self.neg, &o.neg),
            (&mut self.neg2, &o.neg2),
            (&mut self.half_abs2, &o.half_abs2),
            (&mut self.d, &o.d),
            (&mut self.d2, &o.d2),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.y.iter_mut().zip(o.y).for_each(|(x, y)| *x += y);
    }
}

/// Profiles of several portfolios on the same paths. `grid` must be a
/// subset of the scenario times and end at 1.
pub fn exposure_profiles(
    scen: &ScenarioSet,
    portfolios: &[Vec<Trade>],
    market: &MarketData,
    grid: &[f64],
) -> Result<Vec<ExposureProfile>> {
    let weights = trapezoid_weights(grid).ok();
    let ks = grid
        .iter()
        .map(|t| {
            scen.time_index(*t)
                .ok_or_else(|| Error::Domain(format!("profile time {t} is not a simulation time")))
        })
        .collect::<Result<Vec<_>>>()?;
    let compiled = portfolios
        .iter()
        .map(|p| compile(p, market, scen))
        .collect::<Result<Vec<_>>>()?;
    let v0: Vec<f64> = compiled
        .iter()
        .map(|terms| portfolio_value(terms, 0.0, &Initial(scen)))
        .collect();
    let g = grid.len();
    let paths = scen.paths();
    let blocks: Vec<Vec<Acc>> = (0..paths.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Acc::new(g); compiled.len()];
            for idx in b * BLOCK..((b + 1) * BLOCK).min(paths) {
                let path = scen.path(idx);
                for (p, terms) in compiled.iter().enumerate() {
                    let a = &mut acc[p];
                    let mut y = [0.0; 3];
                    for (gi, (&k, &t)) in ks.iter().zip(grid).enumerate() {
                        let dv = portfolio_value(terms, t, &OnPath { path: &path, k }) - v0[p];
                        let (pos, neg) = (dv.max(0.0), (-dv).max(0.0));
                        a.pos[gi] += pos;
                        a.pos2[gi] += pos * pos;
                        a.neg[gi] += neg;
                        a.neg2[gi] += neg * neg;
                        a.half_abs2[gi] += 0.25 * dv * dv;
                        a.d[gi] += dv;
                        a.d2[gi] += dv * dv;
                        if let Some(w) = &weights {
                            y[0] += w[gi] * pos;
                            y[1] += w[gi] * neg;
                            y[2] += w[gi] * 0.5 * dv.abs();
                        }
                    }
                    for (i, v) in y.iter().enumerate() {
                        a.y[2 * i] += v;
                        a.y[2 * i + 1] += v * v;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Acc::new(g); compiled.len()];
    for block in &blocks {
        for (t, a) in total.iter_mut().zip(block) {
            t.merge(a);
        }
    }
    let n = paths as f64;
    let mean = |v: &[f64]| v.iter().map(|x| x / n).collect::<Vec<_>>();
    let se = |s: &[f64], s2: &[f64]| {
        s.iter()
            .zip(s2)
            .map(|(a, b)| estimate(*a, *b, paths).stderr)
            .collect::<Vec<_>>()
    };
    let nan = AddOnEstimate {
        value: f64::NAN,
        stderr: f64::NAN,
    };
    Ok(total
        .iter()
        .map(|a| {
            let mean_change = mean(&a.d);
            let avg: Vec<f64> = a
                .pos
                .iter()
                .zip(&a.neg)
                .map(|(p, q)| 0.5 * (p + q))
                .collect();
            ExposureProfile {
                times: grid.to_vec(),
                epe_pay: mean(&a.pos),
                epe_receive: mean(&a.neg),
                stderr_pay: se(&a.pos, &a.pos2),
                stderr_receive: se(&a.neg, &a.neg2),
                stderr_average: se(&avg, &a.half_abs2),
                var_change: a
                    .d2
                    .iter()
                    .zip(&mean_change)
                    .map(|(s2, m)| {
                        if paths > 1 {
                            (s2 - n * m * m) / (n - 1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect(),
                mean_change,
                addon_pay: if weights.is_some() {
                    estimate(a.y[0], a.y[1], paths)
                } else {
                    nan
                },
                addon_receive: if weights.is_some() {
                    estimate(a.y[2], a.y[3], paths)
                } else {
                    nan
                },
                addon: if weights.is_some() {
                    estimate(a.y[4], a.y[5], paths)
                } else {
                    nan
                },
                paths,
                seed: scen.seed(),
            }
        })
        .collect())
}

/// Simulate the chosen model on the discount curve of the portfolios'
/// currency and return one profile per portfolio.
pub fn oracle_addons(
    portfolios: &[Vec<Trade>],
    market: &MarketData,
    settings: &McSettings,
) -> Result<Vec<ExposureProfile>> {
    let grid = settings.grid.times();
    let Some(ccy) = common_currency(portfolios)? else {
        let zero = AddOnEstimate {
            value: 0.0,
            stderr: 0.0,
        };
        let g = grid.len();
        return Ok(portfolios
            .iter()
            .map(|_| ExposureProfile {
                times: grid.clone(),
                epe_pay: vec![0.0; g],
                epe_receive: vec![0.0; g],
                stderr_pay: vec![0.0; g],
                stderr_receive: vec![0.0; g],
                stderr_average: vec![0.0; g],
                mean_change: vec![0.0; g],
                var_change: vec![0.0; g],
                addon_pay: zero,
                addon_receive: zero,
                addon: zero,
                paths: settings.paths,
                seed: settings.seed,
            })
            .collect());
    };
    let curve = market.discount(&ccy)?;
    let dates = valuation_dates(portfolios, market)?;
    let scen = match settings.model {
        ModelChoice::Hw1f => simulate_hw1f(
            settings.paths,
            &grid,
            &dates,
            curve,
            &settings.hw,
            settings.seed,
        )?,
        ModelChoice::Gmm3f => simulate_gmm3f(
            settings.paths,
            &grid,
            &dates,
            curve,
            &settings.gmm,
            settings.seed,
        )?,
    };
    exposure_profiles(&scen, portfolios, market, &grid)
}
