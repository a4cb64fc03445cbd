//! Monte Carlo estimation of threshold values and perpetual-transfer costs.
//!
//! Paths are grouped in fixed blocks; block sums and the final reduction use
//! pairwise summation in path order, so estimates do not depend on the
//! number of worker threads.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::closed_form::{perpetual_d, Method, ValueEstimate};
use crate::error::{invalid, Error, Result};
use crate::law::LossLaw;
use crate::model::{flow, run_to_threshold, RandomShocks, ShockSource};
use crate::params::ModelParams;
use crate::quadrature::pairwise_sum;
use crate::rng::{path_rng, BATCH_ABOVE_THRESHOLD, BATCH_AT_THRESHOLD, BATCH_TRAPPING};

const BLOCK: usize = 1024;

/// Horizon at which discounting has shrunk below `1e-8`.
pub fn default_horizon(delta: f64) -> f64 {
    8.0 * std::f64::consts::LN_10 / delta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    /// Truncation horizon; `None` uses [`default_horizon`].
    pub horizon: Option<f64>,
    pub master_seed: u64,
    pub ci_level: f64,
}

impl McConfig {
    pub fn new(n_paths: usize, master_seed: u64) -> Self {
        Self {
            n_paths,
            horizon: None,
            master_seed,
            ci_level: 0.99,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(invalid("n_paths must be at least 1"));
        }
        if let Some(t) = self.horizon {
            if !(t > 0.0) {
                return Err(invalid(format!("horizon {t} must be positive")));
            }
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(invalid(format!("ci_level {} not in (0, 1)", self.ci_level)));
        }
        Ok(())
    }

    pub fn horizon_for(&self, params: &ModelParams) -> f64 {
        self.horizon.unwrap_or_else(|| default_horizon(params.delta))
    }

    /// Two-sided standard normal quantile for `ci_level`.
    pub fn z_score(&self) -> f64 {
        let normal = Normal::standard();
        normal.inverse_cdf(0.5 + 0.5 * self.ci_level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    /// `y - X` at the first drop below `y` (0 if truncated).
    pub deficit: f64,
    /// First drop time, `None` when the horizon came first.
    pub tau: Option<f64>,
    /// `exp(-delta tau)`, 0 if truncated.
    pub discount: f64,
}

impl PathOutcome {
    pub fn truncated() -> Self {
        Self {
            deficit: 0.0,
            tau: None,
            discount: 0.0,
        }
    }

    pub fn transfer(deficit: f64, tau: f64, delta: f64) -> Self {
        Self {
            deficit,
            tau: Some(tau),
            discount: (-delta * tau).exp(),
        }
    }

    /// Discounted deficit `J exp(-delta tau)`.
    pub fn discounted_deficit(&self) -> f64 {
        self.deficit * self.discount
    }
}

/// First drop of the controlled path below `y`, starting from `x0 >= y`.
pub fn first_passage<S: ShockSource>(
    x0: f64,
    y: f64,
    params: &ModelParams,
    horizon: f64,
    shocks: &mut S,
) -> Result<PathOutcome> {
    let stop = run_to_threshold(x0, y, params, horizon, shocks, |_| {})?;
    Ok(match stop.transfer {
        Some((t, j)) => PathOutcome::transfer(j, t, params.delta),
        None => PathOutcome::truncated(),
    })
}

/// Sums over paths of `a`, `b`, `a^2`, `b^2`, `ab`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub sum_a: f64,
    pub sum_b: f64,
    pub sum_aa: f64,
    pub sum_bb: f64,
    pub sum_ab: f64,
}

impl Moments {
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        let col = |f: &dyn Fn(&(f64, f64)) -> f64| -> f64 {
            let v: Vec<f64> = pairs.iter().map(f).collect();
            pairwise_sum(&v)
        };
        Self {
            n: pairs.len(),
            sum_a: col(&|p| p.0),
            sum_b: col(&|p| p.1),
            sum_aa: col(&|p| p.0 * p.0),
            sum_bb: col(&|p| p.1 * p.1),
            sum_ab: col(&|p| p.0 * p.1),
        }
    }

    fn combine(parts: &[Moments]) -> Self {
        let col = |f: &dyn Fn(&Moments) -> f64| -> f64 {
            let v: Vec<f64> = parts.iter().map(f).collect();
            pairwise_sum(&v)
        };
        Self {
            n: parts.iter().map(|m| m.n).sum(),
            sum_a: col(&|m| m.sum_a),
            sum_b: col(&|m| m.sum_b),
            sum_aa: col(&|m| m.sum_aa),
            sum_bb: col(&|m| m.sum_bb),
            sum_ab: col(&|m| m.sum_ab),
        }
    }

    pub fn mean_a(&self) -> f64 {
        self.sum_a / self.n as f64
    }

    pub fn mean_b(&self) -> f64 {
        self.sum_b / self.n as f64
    }

    /// Sample covariances `(var a, var b, cov ab)`; zero for a single path.
    pub fn covariances(&self) -> (f64, f64, f64) {
        if self.n < 2 {
            return (0.0, 0.0, 0.0);
        }
        let n = self.n as f64;
        let (ma, mb) = (self.mean_a(), self.mean_b());
        let k = n / (n - 1.0);
        (
            ((self.sum_aa / n - ma * ma) * k).max(0.0),
            ((self.sum_bb / n - mb * mb) * k).max(0.0),
            (self.sum_ab / n - ma * mb) * k,
        )
    }
}

/// Evaluate `pair(i)` for every path and reduce deterministically.
fn simulate_moments<F>(n: usize, pair: F) -> Result<Moments>
where
    F: Fn(u64) -> Result<(f64, f64)> + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let lo = blk * BLOCK;
            let hi = (lo + BLOCK).min(n);
            let pairs = (lo..hi)
                .map(|i| pair(i as u64))
                .collect::<Result<Vec<_>>>()?;
            Ok(Moments::from_pairs(&pairs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Moments::combine(&parts))
}

/// Ratio estimate `mean(J e^{-delta tau}) / (1 - mean(e^{-delta tau}))` and
/// its delta-method variance.
pub fn ratio_from_moments(m: &Moments) -> Result<(f64, f64)> {
    if m.sum_b == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (a, b) = (m.mean_a(), m.mean_b());
    let d = 1.0 - b;
    if !(d > 0.0) {
        return Err(Error::NoTransferEvents);
    }
    let (va, vb, cab) = m.covariances();
    let var = (va / (d * d) + a * a * vb / d.powi(4) + 2.0 * a * cab / d.powi(3)) / m.n as f64;
    Ok((a / d, var.max(0.0)))
}

/// Ratio estimate from explicit outcomes, returning `(value, ci half-width)`.
pub fn ratio_estimate(outcomes: &[PathOutcome], ci_level: f64) -> Result<(f64, f64)> {
    let pairs: Vec<(f64, f64)> = outcomes
        .iter()
        .map(|o| (o.discounted_deficit(), o.discount))
        .collect();
    let cfg = McConfig {
        ci_level,
        ..McConfig::new(1, 0)
    };
    cfg.validate()?;
    let (v, var) = ratio_from_moments(&Moments::from_pairs(&pairs))?;
    Ok((v, cfg.z_score() * var.sqrt()))
}

fn check_threshold(y: f64, params: &ModelParams) -> Result<()> {
    if y >= params.x_star && y.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("threshold {y} below the poverty line {}", params.x_star)))
    }
}

fn at_threshold_moments(y: f64, params: &ModelParams, law: &LossLaw, cfg: &McConfig) -> Result<Moments> {
    let horizon = cfg.horizon_for(params);
    simulate_moments(cfg.n_paths, |i| {
        let rng = path_rng(cfg.master_seed, BATCH_AT_THRESHOLD, i);
        let mut shocks = RandomShocks::new(rng, params.lambda, law);
        let o = first_passage(y, y, params, horizon, &mut shocks)?;
        Ok((o.discounted_deficit(), o.discount))
    })
}

/// `(value, variance)` of the ratio estimator of `V_y(y)`.
fn vy_at_y(y: f64, params: &ModelParams, law: &LossLaw, cfg: &McConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    check_threshold(y, params)?;
    ratio_from_moments(&at_threshold_moments(y, params, law, cfg)?)
}

/// Monte Carlo estimate of `V_y(y)`. Path `i` uses the same random stream for
/// every `y`, which gives common random numbers across thresholds.
pub fn estimate_vy_at_y(
    y: f64,
    params: &ModelParams,
    law: &LossLaw,
    cfg: &McConfig,
) -> Result<ValueEstimate> {
    let (v, var) = vy_at_y(y, params, law, cfg)?;
    Ok(ValueEstimate {
        x: y,
        value: v,
        method: Method::MonteCarlo,
        ci_half_width: cfg.z_score() * var.sqrt(),
    })
}

/// Monte Carlo estimate of `V_y(x)`. Above the threshold, fresh paths from `x`
/// are combined with an independent estimate of `V_y(y)`; below it the value
/// is shifted by `y - x`.
pub fn estimate_vy(
    x: f64,
    y: f64,
    params: &ModelParams,
    law: &LossLaw,
    cfg: &McConfig,
) -> Result<ValueEstimate> {
    let (vy, var_vy) = vy_at_y(y, params, law, cfg)?;
    let z = cfg.z_score();
    if x < y {
        return Ok(ValueEstimate {
            x,
            value: y - x + vy,
            method: Method::MonteCarlo,
            ci_half_width: z * var_vy.sqrt(),
        });
    }
    let horizon = cfg.horizon_for(params);
    let m = simulate_moments(cfg.n_paths, |i| {
        let rng = path_rng(cfg.master_seed, BATCH_ABOVE_THRESHOLD, i);
        let mut shocks = RandomShocks::new(rng, params.lambda, law);
        let o = first_passage(x, y, params, horizon, &mut shocks)?;
        Ok((o.discounted_deficit(), o.discount))
    })?;
    let (va, vb, cab) = m.covariances();
    let b = m.mean_b();
    let var = (va + vy * vy * vb + 2.0 * vy * cab) / m.n as f64 + b * b * var_vy;
    Ok(ValueEstimate {
        x,
        value: m.mean_a() + vy * b,
        method: Method::MonteCarlo,
        ci_half_width: z * var.max(0.0).sqrt(),
    })
}

/// Uncontrolled path until the first loss leaving capital at or below `x*`;
/// returns `(capital, time)` or `None` if the horizon comes first.
pub fn trapping<S: ShockSource>(
    x0: f64,
    params: &ModelParams,
    horizon: f64,
    shocks: &mut S,
) -> Result<Option<(f64, f64)>> {
    let mut t = 0.0;
    let mut x = x0;
    loop {
        let s = shocks.next_shock();
        t += s.wait;
        if t > horizon {
            return Ok(None);
        }
        let pre = flow(x, s.wait, params);
        if !pre.is_finite() {
            return Err(Error::NonFiniteCapital { time: t, capital: pre });
        }
        x = pre * s.remaining;
        if x <= params.x_star {
            return Ok(Some((x, t)));
        }
    }
}

/// Cost of perpetual shortfall transfers. Closed form at or below `x*`; above
/// it, the closed form at the trapping capital discounted over the trapping time.
pub fn estimate_d(x: f64, params: &ModelParams, law: &LossLaw, cfg: &McConfig) -> Result<ValueEstimate> {
    cfg.validate()?;
    if x <= params.x_star {
        return Ok(ValueEstimate::exact(x, perpetual_d(x, params, law)?, Method::ClosedForm));
    }
    let horizon = cfg.horizon_for(params);
    let m = simulate_moments(cfg.n_paths, |i| {
        let rng = path_rng(cfg.master_seed, BATCH_TRAPPING, i);
        let mut shocks = RandomShocks::new(rng, params.lambda, law);
        Ok(match trapping(x, params, horizon, &mut shocks)? {
            Some((xt, t)) => (perpetual_d(xt, params, law)? * (-params.delta * t).exp(), 0.0),
            None => (0.0, 0.0),
        })
    })?;
    let (va, _, _) = m.covariances();
    Ok(ValueEstimate {
        x,
        value: m.mean_a(),
        method: Method::MonteCarlo,
        ci_half_width: cfg.z_score() * (va / m.n as f64).sqrt(),
    })
}
