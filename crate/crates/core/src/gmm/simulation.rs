//! Path generation for the one-factor Hull-White model and the three-factor
//! Gaussian market model. A path is the matrix of bond prices P(t_k, D_j)
//! on the simulation times t_k and bond dates D_j, plus the bank account.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{GMM3FParams, HWParams};
use crate::curves::{snap_time, Curve, TIME_EPS};
use crate::error::{domain, Error, Result};
use crate::saccr::MaturityBucket;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Grid {
    #[default]
    Weekly,
    Daily,
}

impl Grid {
    /// Profile times k/n, k = 1..=n, over one year.
    pub fn times(self) -> Vec<f64> {
        let n = match self {
            Grid::Weekly => 52,
            Grid::Daily => 365,
        };
        (1..=n).map(|k| k as f64 / n as f64).collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weekly" => Ok(Grid::Weekly),
            "daily" => Ok(Grid::Daily),
            _ => Err(Error::Config(format!("unknown grid '{s}' (weekly|daily)"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Dynamics {
    Hw1f(HWParams),
    Gmm3f {
        params: GMM3FParams,
        chol: [[f64; 3]; 3],
    },
}

/// Lazily generated, seed-reproducible set of paths.
#[derive(Debug, Clone)]
pub struct ScenarioSet {
    dynamics: Dynamics,
    curve: Curve,
    times: Vec<f64>,
    dates: Vec<f64>,
    paths: usize,
    seed: u64,
    log_p0: Vec<f64>,
    buckets: Vec<usize>,
}

/// Bond prices of one path, row-major by simulation time.
#[derive(Debug, Clone, PartialEq)]
pub struct PathScenario {
    n_dates: usize,
    bonds: Vec<f64>,
    numeraire: Vec<f64>,
}

impl PathScenario {
    /// P(t_k, D_j); 1 once D_j ≤ t_k.
    #[inline]
    pub fn bond(&self, k: usize, j: usize) -> f64 {
        self.bonds[k * self.n_dates + j]
    }

    pub fn numeraire(&self, k: usize) -> f64 {
        self.numeraire[k]
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < TIME_EPS);
    v
}

fn build(
    dynamics: Dynamics,
    paths: usize,
    grid: &[f64],
    dates: &[f64],
    curve: &Curve,
    seed: u64,
) -> Result<ScenarioSet> {
    if paths == 0 {
        return domain("at least one path is required");
    }
    if grid.is_empty() || grid.iter().any(|t| !(*t > 0.0)) {
        return domain("simulation grid must be non-empty with positive times");
    }
    let horizon = grid.iter().copied().fold(0.0, f64::max);
    let times = sorted_unique(
        grid.iter()
            .chain(
                dates
                    .iter()
                    .filter(|d| **d > TIME_EPS && **d <= horizon + TIME_EPS),
            )
            .map(|t| snap_time(*t))
            .collect(),
    );
    let dates = sorted_unique(
        dates
            .iter()
            .filter(|d| **d > TIME_EPS)
            .chain(times.iter())
            .map(|t| snap_time(*t))
            .collect(),
    );
    let log_p0 = dates
        .iter()
        .map(|d| curve.discount_factor(*d).map(f64::ln))
        .collect::<Result<Vec<_>>>()?;
    let buckets = dates
        .iter()
        .map(|d| MaturityBucket::of(*d).index())
        .collect();
    Ok(ScenarioSet {
        dynamics,
        curve: curve.clone(),
        times,
        dates,
        paths,
        seed,
        log_p0,
        buckets,
    })
}

/// Hull-White paths with the exact Gaussian transition of the short-rate
/// deviation and its integral. Simulation times are the grid plus every
/// date up to the grid horizon; bond dates are `dates` plus the simulation times.
pub fn simulate_hw1f(
    paths: usize,
    grid: &[f64],
    dates: &[f64],
    curve: &Curve,
    params: &HWParams,
    seed: u64,
) -> Result<ScenarioSet> {
    params.validate()?;
    build(Dynamics::Hw1f(*params), paths, grid, dates, curve, seed)
}

/// Gaussian market model paths: log-Euler steps of every bond with drift
/// equal to the one-step rate and the exact integrated variance over the step.
pub fn simulate_gmm3f(
    paths: usize,
    grid: &[f64],
    dates: &[f64],
    curve: &Curve,
    params: &GMM3FParams,
    seed: u64,
) -> Result<ScenarioSet> {
    let chol = params.cholesky()?;
    build(
        Dynamics::Gmm3f {
            params: *params,
            chol,
        },
        paths,
        grid,
        dates,
        curve,
        seed,
    )
}

impl ScenarioSet {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn date_index(&self, d: f64) -> Option<usize> {
        let d = snap_time(d);
        let i = self.dates.partition_point(|x| *x < d - TIME_EPS);
        (i < self.dates.len() && (self.dates[i] - d).abs() < TIME_EPS).then_some(i)
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        let t = snap_time(t);
        let i = self.times.partition_point(|x| *x < t - TIME_EPS);
        (i < self.times.len() && (self.times[i] - t).abs() < TIME_EPS).then_some(i)
    }

    /// P(0, D_j).
    pub fn initial_bond(&self, j: usize) -> f64 {
        self.log_p0[j].exp()
    }

    /// Path `idx`; the same index always gives the same path.
    pub fn path(&self, idx: usize) -> PathScenario {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(idx as u64);
        let n = self.dates.len();
        let mut out = PathScenario {
            n_dates: n,
            bonds: vec![1.0; self.times.len() * n],
            numeraire: vec![1.0; self.times.len()],
        };
        match &self.dynamics {
            Dynamics::Hw1f(p) => self.hw_path(p, &mut rng, &mut out),
            Dynamics::Gmm3f { params, chol } => self.gmm_path(params, chol, &mut rng, &mut out),
        }
        out
    }

    fn hw_path(&self, p: &HWParams, rng: &mut ChaCha8Rng, out: &mut PathScenario) {
        let (a, s2) = (p.a, p.sigma * p.sigma);
        let n = self.dates.len();
        let (mut x, mut integral, mut prev) = (0.0f64, 0.0f64, 0.0f64);
        for (k, &t) in self.times.iter().enumerate() {
            let h = t - prev;
            let e = (-a * h).exp();
            let var_x = s2 * (1.0 - e * e) / (2.0 * a);
            let var_i = s2 / (a * a) * (h - 2.0 * (1.0 - e) / a + (1.0 - e * e) / (2.0 * a));
            let cov = s2 / (2.0 * a * a) * (1.0 - e) * (1.0 - e);
            // same draw layout as the three-factor model
            let z: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let (dx, di) = if var_x > 0.0 {
                let sd = var_x.sqrt();
                let cond = (var_i - cov * cov / var_x).max(0.0).sqrt();
                (sd * z[0], cov / sd * z[0] + cond * z[1])
            } else {
                (0.0, 0.0)
            };
            integral += x * (1.0 - e) / a + di;
            x = e * x + dx;
            prev = t;

            let et = (-a * t).exp();
            let mu = s2 / (2.0 * a * a) * (1.0 - et) * (1.0 - et);
            let y = s2 / (2.0 * a) * (1.0 - et * et);
            let int_mu =
                s2 / (2.0 * a * a) * (t - 2.0 * (1.0 - et) / a + (1.0 - et * et) / (2.0 * a));
            let state = mu + x;
            let log_p0_t = self.curve.discount_factor(t).map(f64::ln).unwrap_or(0.0);
            out.numeraire[k] = (-log_p0_t + int_mu + integral).exp();
            let row = &mut out.bonds[k * n..(k + 1) * n];
            for (j, &d) in self.dates.iter().enumerate() {
                if d <= t + TIME_EPS {
                    continue;
                }
                let b = -(-a * (d - t)).exp_m1() / a;
                row[j] = (self.log_p0[j] - log_p0_t - b * state - 0.5 * b * b * y).exp();
            }
        }
    }

    fn gmm_path(
        &self,
        p: &GMM3FParams,
        chol: &[[f64; 3]; 3],
        rng: &mut ChaCha8Rng,
        out: &mut PathScenario,
    ) {
        let (a, k2) = (p.a, (p.sigma / p.a).powi(2));
        let n = self.dates.len();
        let mut log_p = self.log_p0.clone();
        let (mut log_b, mut prev) = (0.0f64, 0.0f64);
        let mut first_alive = 0usize;
        for (k, &t) in self.times.iter().enumerate() {
            let h = t - prev;
            let z: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let eps: [f64; 3] = std::array::from_fn(|i| (0..=i).map(|m| chol[i][m] * z[m]).sum());
            // one-step rate from the bond maturing at t, so every bond over the
            // bank account is an exact martingale across the step
            let jt = self.date_index(t).expect("simulation times are bond dates");
            let rh = -log_p[jt];
            log_b += rh;
            while first_alive < n && self.dates[first_alive] <= t + TIME_EPS {
                log_p[first_alive] = 0.0;
                first_alive += 1;
            }
            for j in first_alive..n {
                let d = self.dates[j];
                let (u0, u1) = ((-a * (d - prev)).exp(), (-a * (d - t)).exp());
                let var = k2 * (h - 2.0 / a * (u1 - u0) + 1.0 / (2.0 * a) * (u1 * u1 - u0 * u0));
                log_p[j] += rh - 0.5 * var - var.max(0.0).sqrt() * eps[self.buckets[j]];
            }
            prev = t;
            out.numeraire[k] = log_b.exp();
            let row = &mut out.bonds[k * n..(k + 1) * n];
            for j in first_alive..n {
                row[j] = log_p[j].exp();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::sample_usd_curve;
    use crate::gmm::SigmaConvention;
    use crate::saccr::SupervisoryConfig;

    fn hw() -> HWParams {
        HWParams::supervisory(&SupervisoryConfig::default(), SigmaConvention::Exact)
    }

    fn gmm() -> GMM3FParams {
        GMM3FParams::supervisory(&SupervisoryConfig::default(), SigmaConvention::Exact)
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::Weekly.times().len(), 52);
        assert_eq!(*Grid::Daily.times().last().unwrap(), 1.0);
        assert!("hourly".parse::<Grid>().is_err());
    }

    #[test]
    fn merges_dates_into_times_and_pins_expired_bonds() {
        let curve = sample_usd_curve();
        let s = simulate_gmm3f(
            4,
            &Grid::Weekly.times(),
            &[0.3, 2.0, 10.0],
            &curve,
            &gmm(),
            1,
        )
        .unwrap();
        assert_eq!(s.times().len(), 53);
        assert!(s.time_index(0.3).is_some());
        assert!(s.time_index(2.0).is_none());
        let path = s.path(0);
        let k = s.time_index(0.5).unwrap();
        assert_eq!(path.bond(k, s.date_index(0.3).unwrap()), 1.0);
        assert!(path.bond(k, s.date_index(10.0).unwrap()) < 1.0);
    }

    #[test]
    fn paths_are_reproducible() {
        let curve = sample_usd_curve();
        for s in [
            simulate_hw1f(8, &Grid::Weekly.times(), &[5.0], &curve, &hw(), 9).unwrap(),
            simulate_gmm3f(8, &Grid::Weekly.times(), &[5.0], &curve, &gmm(), 9).unwrap(),
        ] {
            assert_eq!(s.path(3), s.path(3));
            assert_ne!(s.path(3), s.path(4));
        }
    }

    #[test]
    fn zero_vol_reproduces_forwards() {
        let curve = sample_usd_curve();
        let p = HWParams::new(0.05, 0.0).unwrap();
        let s = simulate_hw1f(2, &[0.5, 1.0], &[3.0], &curve, &p, 1).unwrap();
        let path = s.path(0);
        let fwd = curve.discount_factor(3.0).unwrap() / curve.discount_factor(1.0).unwrap();
        assert!((path.bond(1, s.date_index(3.0).unwrap()) - fwd).abs() < 1e-12);
        assert!((path.numeraire(1) * curve.discount_factor(1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    fn martingale_check(s: &ScenarioSet, date: f64) {
        let j = s.date_index(date).unwrap();
        let k = s.times().len() - 1;
        let xs: Vec<f64> = (0..s.paths())
            .map(|i| {
                let p = s.path(i);
                p.bond(k, j) / p.numeraire(k)
            })
            .collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let se = (v / xs.len() as f64).sqrt();
        assert!(
            (m - s.initial_bond(j)).abs() < 3.0 * se + 1e-12,
            "{m} vs {} (se {se})",
            s.initial_bond(j)
        );
    }

    #[test]
    fn discounted_bonds_are_martingales() {
        let curve = sample_usd_curve();
        let grid: Vec<f64> = (1..=4).map(|k| k as f64 / 4.0).collect();
        let hw = simulate_hw1f(4000, &grid, &[2.0, 10.0], &curve, &hw(), 5).unwrap();
        let gm = simulate_gmm3f(4000, &grid, &[2.0, 10.0], &curve, &gmm(), 5).unwrap();
        for s in [&hw, &gm] {
            martingale_check(s, 2.0);
            martingale_check(s, 10.0);
        }
    }
}
