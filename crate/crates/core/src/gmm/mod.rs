//! Hull-White and Gaussian market model analytics, plus the Monte Carlo
//! oracle used to measure theoretical add-ons.

mod exposure;
mod simulation;

pub use exposure::{
    addon_from_profile, brownian_addon, exposure_profiles, oracle_addons, valuation_dates,
    AddOnEstimate, ExposureProfile, McSettings, ModelChoice,
};
pub use simulation::{simulate_gmm3f, simulate_hw1f, Grid, PathScenario, ScenarioSet};

use serde::Serialize;

use crate::curves::{MarketData, TIME_EPS};
use crate::error::{domain, Error, Result};
use crate::saccr::SupervisoryConfig;
use crate::trades::{LegKind, Trade};

/// σ_HW = 1.5·√(2π)·SF.
pub fn identify_sigma_hw(sf_ir: f64) -> f64 {
    1.5 * (2.0 * std::f64::consts::PI).sqrt() * sf_ir
}

/// (2/3)·σ_V·√(T/2π): average expected positive exposure of dV = σ_V dW over [0, T].
pub fn theoretical_addon(sigma_v: f64, horizon: f64) -> f64 {
    2.0 / 3.0 * sigma_v * (horizon / (2.0 * std::f64::consts::PI)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum SigmaConvention {
    #[default]
    Exact,
    /// √(2π) rounded to 2.52, which gives the quoted 0.0189 for SF = 0.5%.
    Rounded,
}

/// One-factor Hull-White, dr = a(φ − r)dt + σ dW, with φ fitted to the initial curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HWParams {
    pub a: f64,
    pub sigma: f64,
}

impl HWParams {
    pub fn new(a: f64, sigma: f64) -> Result<Self> {
        let p = Self { a, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn supervisory(cfg: &SupervisoryConfig, convention: SigmaConvention) -> Self {
        let sigma = match convention {
            SigmaConvention::Exact => identify_sigma_hw(cfg.sf_ir),
            SigmaConvention::Rounded => 1.5 * 2.52 * cfg.sf_ir,
        };
        Self {
            a: cfg.a_supervisory,
            sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::Config(format!(
                "Hull-White parameters need a > 0 and sigma >= 0, got a = {}, sigma = {}",
                self.a, self.sigma
            )));
        }
        Ok(())
    }

    /// (σ/a)(1 − e^{−a τ}): bond volatility for time to maturity τ.
    pub fn bond_vol(&self, tau: f64) -> f64 {
        self.sigma / self.a * (-(-self.a * tau).exp_m1())
    }
}

/// Three-factor model: bond dynamics of Hull-White shape driven by one
/// Brownian per maturity bucket of the bond's maturity date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GMM3FParams {
    pub a: f64,
    pub sigma: f64,
    pub rho_adjacent: f64,
    pub rho_outer: f64,
}

impl GMM3FParams {
    pub fn supervisory(cfg: &SupervisoryConfig, convention: SigmaConvention) -> Self {
        let hw = HWParams::supervisory(cfg, convention);
        Self {
            a: hw.a,
            sigma: hw.sigma,
            rho_adjacent: cfg.rho1,
            rho_outer: cfg.rho2,
        }
    }

    pub fn hw(&self) -> HWParams {
        HWParams {
            a: self.a,
            sigma: self.sigma,
        }
    }

    pub fn correlation(&self) -> [[f64; 3]; 3] {
        let (r1, r2) = (self.rho_adjacent, self.rho_outer);
        [[1.0, r1, r2], [r1, 1.0, r1], [r2, r1, 1.0]]
    }

    /// Lower-triangular L with L·Lᵀ = correlation. Singular but PSD matrices
    /// (e.g. all correlations 1) are accepted.
    pub fn cholesky(&self) -> Result<[[f64; 3]; 3]> {
        self.hw().validate()?;
        let c = self.correlation();
        if c.iter().flatten().any(|x| !(x.abs() <= 1.0)) {
            return Err(Error::Config("correlations must lie in [-1, 1]".into()));
        }
        let mut l = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                if i == j {
                    let pivot = c[i][i] - s;
                    if pivot < -1e-10 {
                        return Err(Error::Config(
                            "bucket correlation matrix is not positive semi-definite".into(),
                        ));
                    }
                    l[i][i] = pivot.max(0.0).sqrt();
                } else if l[j][j] > 1e-12 {
                    l[i][j] = (c[i][j] - s) / l[j][j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                if (r - c[i][j]).abs() > 1e-9 {
                    return Err(Error::Config(
                        "bucket correlation matrix is not positive semi-definite".into(),
                    ));
                }
            }
        }
        Ok(l)
    }
}

/// σ_V split into index, floating-cashflow and fixed-cashflow parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapVolDecomposition {
    pub sigma_atm: f64,
    pub sigma_float: f64,
    pub sigma_fixed: f64,
}

impl SwapVolDecomposition {
    pub fn total(&self) -> f64 {
        self.sigma_atm + self.sigma_float + self.sigma_fixed
    }
}

struct SwapPeriod {
    start: f64,
    end: f64,
    notional: f64,
    p_end: f64,
    forward: f64,
}

/// Periods of a fixed-vs-floating swap, plus the fixed rate and the payer sign.
fn swap_periods(swap: &Trade, market: &MarketData, t: f64) -> Result<(Vec<SwapPeriod>, f64, f64)> {
    let fixed = swap
        .legs
        .iter()
        .find(|l| matches!(l.kind, LegKind::Fixed { .. }));
    let float = swap
        .legs
        .iter()
        .find(|l| matches!(l.kind, LegKind::Floating { .. }));
    let (Some(fixed), Some(float), 2) = (fixed, float, swap.legs.len()) else {
        return Err(Error::Unsupported(format!(
            "{} is not a fixed-vs-floating swap",
            swap.id
        )));
    };
    let fp = fixed.periods()?;
    let lp = float.periods()?;
    let aligned = fp.len() == lp.len()
        && fp
            .iter()
            .zip(&lp)
            .all(|(a, b)| (a.0 - b.0).abs() < TIME_EPS && (a.1 - b.1).abs() < TIME_EPS);
    if !aligned {
        return Err(Error::Unsupported(format!(
            "{}: fixed and floating schedules must coincide",
            swap.id
        )));
    }
    if t > fp[0].0 + TIME_EPS || t < 0.0 {
        return domain(format!(
            "volatility requested at t = {t}, after the swap start {}",
            fp[0].0
        ));
    }
    let curve = market.discount(&swap.currency)?;
    let LegKind::Floating { tenor } = float.kind else {
        unreachable!()
    };
    let proj = market.projection(&swap.currency, tenor)?;
    let p_t = curve.discount_factor(t)?;
    let pf_t = proj.projection_factor(t)?;
    let mut out = Vec::with_capacity(fp.len());
    for &(s, e) in &fp {
        let pf = |x: f64| -> Result<f64> { Ok(proj.projection_factor(x)? / pf_t) };
        out.push(SwapPeriod {
            start: s,
            end: e,
            notional: fixed.notional_at(s),
            p_end: curve.discount_factor(e)? / p_t,
            forward: (pf(s)? / pf(e)? - 1.0) / (e - s),
        });
    }
    let rate = fixed.kind.fixed_rate().unwrap_or(0.0);
    Ok((out, rate, -fixed.direction.sign()))
}

/// Instantaneous volatility of a fixed-vs-floating swap at `t ≤ T_s`, on
/// the curves rolled forward deterministically to `t`. Signs are those of
/// the swap's own value: a receiver swap has the payer's terms negated.
pub fn swap_vol_decomposition(
    swap: &Trade,
    market: &MarketData,
    params: &HWParams,
    t: f64,
) -> Result<SwapVolDecomposition> {
    params.validate()?;
    let (periods, rate, payer) = swap_periods(swap, market, t)?;
    let (a, k) = (params.a, params.sigma / params.a);
    let mut d = SwapVolDecomposition {
        sigma_atm: 0.0,
        sigma_float: 0.0,
        sigma_fixed: 0.0,
    };
    for p in &periods {
        let delta = p.end - p.start;
        let e0 = (-a * (p.start - t)).exp();
        let e1 = (-a * (p.end - t)).exp();
        d.sigma_atm += p.notional * p.p_end * k * (e0 - e1);
        d.sigma_float -= p.notional * p.p_end * k * (1.0 - e0) * delta * p.forward;
        d.sigma_fixed += p.notional * p.p_end * k * (1.0 - e1) * delta * rate;
    }
    d.sigma_atm *= payer;
    d.sigma_float *= payer;
    d.sigma_fixed *= payer;
    Ok(d)
}

/// As [`swap_vol_decomposition`] with the cashflow weights (1 − e^{−a(T−t)})
/// replaced by their annuity-weighted average, so that the floating and
/// fixed terms cancel for a swap at par.
pub fn swap_vol_decomposition_frozen(
    swap: &Trade,
    market: &MarketData,
    params: &HWParams,
    t: f64,
) -> Result<SwapVolDecomposition> {
    let exact = swap_vol_decomposition(swap, market, params, t)?;
    let (periods, rate, payer) = swap_periods(swap, market, t)?;
    let (a, k) = (params.a, params.sigma / params.a);
    let annuity: f64 = periods
        .iter()
        .map(|p| p.notional * p.p_end * (p.end - p.start))
        .sum();
    if annuity == 0.0 {
        return Ok(exact);
    }
    let weight = periods
        .iter()
        .map(|p| p.notional * p.p_end * (p.end - p.start) * (1.0 - (-a * (p.end - t)).exp()))
        .sum::<f64>()
        / annuity;
    let float_pv: f64 = periods
        .iter()
        .map(|p| p.notional * p.p_end * (p.end - p.start) * p.forward)
        .sum();
    Ok(SwapVolDecomposition {
        sigma_atm: exact.sigma_atm,
        sigma_float: -payer * k * weight * float_pv,
        sigma_fixed: payer * k * weight * rate * annuity,
    })
}
