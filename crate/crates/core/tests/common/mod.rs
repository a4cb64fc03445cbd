#![allow(dead_code)]

use ct_core::dist::LossDistribution;
use ct_core::ide::{apply_t, CapitalGrid, GridFunction};
use ct_core::insurance::CoverKind;
use ct_core::law::LossLaw;
use ct_core::params::ModelParams;
use ct_core::rng::{open_unit, path_rng};

pub fn base_params(delta: f64) -> ModelParams {
    ModelParams::new(0.1, 3.0, 0.4, 60.0, 1.0, delta).unwrap()
}

pub fn beta_law(alpha: f64) -> LossLaw {
    LossLaw::Plain(LossDistribution::beta(alpha).unwrap())
}

/// Kolmogorov-Smirnov distance between `n` draws of `law` and its CDF,
/// counting both one-sided limits so that atoms are handled.
pub fn ks_statistic(law: &LossLaw, n: usize, seed: u64) -> f64 {
    let mut rng = path_rng(seed, 99, 0);
    let mut xs: Vec<f64> = (0..n).map(|_| law.sample(open_unit(&mut rng))).collect();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let x = xs[i];
        let mut j = i;
        while j < n && xs[j] == x {
            j += 1;
        }
        let below = law.prob_below(x);
        let at_or_below = law.cdf(x);
        d = d.max((i as f64 / nf - below).abs());
        d = d.max((j as f64 / nf - at_or_below).abs());
        i = j;
    }
    d
}

/// Every loss law exercised by the sampling checks.
pub fn sampling_laws() -> Vec<(String, LossLaw)> {
    let dists = [
        LossDistribution::beta(0.5).unwrap(),
        LossDistribution::beta(1.25).unwrap(),
        LossDistribution::beta(2.5).unwrap(),
        LossDistribution::kumaraswamy(3.0, 4.0).unwrap(),
        LossDistribution::kumaraswamy(0.5, 4.0).unwrap(),
    ];
    let covers = [
        None,
        Some(CoverKind::Proportional { eta: 0.5 }),
        Some(CoverKind::Proportional { eta: 0.0 }),
        Some(CoverKind::ExcessOfLoss { l: 0.3 }),
        Some(CoverKind::TotalLoss { limit: 0.6 }),
    ];
    let mut out = Vec::new();
    for d in dists {
        for c in covers {
            out.push((format!("{d:?} {c:?}"), LossLaw::new(d, c)));
        }
    }
    out
}

/// Grid function `a ((x* + 1) / (x + 1))^beta + floor` on `grid`.
pub fn power_function(grid: &CapitalGrid, x_star: f64, a: f64, beta: f64, floor: f64) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |x| Ok(a * ((x_star + 1.0) / (x + 1.0)).powf(beta) + floor)).unwrap()
}

pub struct PairCheck {
    pub ratio: f64,
    pub kappa: f64,
    /// Largest `T(W1) - T(W2)` with `W1 <= W2` (should not be positive).
    pub order_excess: f64,
    pub scale: f64,
}

/// Compare `T` on `W1` and `W2 = scale W1 + shift` (so `W1 <= W2`).
pub fn pair_check(params: &ModelParams, law: &LossLaw, y: f64, w1: (f64, f64, f64), scale: f64, shift: f64) -> PairCheck {
    let grid = CapitalGrid::geometric(y, 1e4 * y, 120, params).unwrap();
    let f1 = power_function(&grid, params.x_star, w1.0, w1.1, w1.2);
    let v2: Vec<f64> = f1.values().iter().map(|v| scale * v + shift).collect();
    let f2 = GridFunction::new(grid.clone(), v2).unwrap();
    let t1 = apply_t(&f1, params, law).unwrap();
    let t2 = apply_t(&f2, params, law).unwrap();
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let num = sup(t1.values(), t2.values());
    let den = sup(f1.values(), f2.values());
    let order_excess = t1
        .values()
        .iter()
        .zip(t2.values())
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    PairCheck {
        ratio: num / den,
        kappa: params.kappa(),
        order_excess,
        scale: t2.values().iter().fold(0.0, |m: f64, v| m.max(v.abs())),
    }
}

/// Run `f` inside dedicated pools of 1, 4 and all available threads.
pub fn across_pools<T: Send>(f: impl Fn() -> T + Sync) -> Vec<(usize, T)> {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut sizes = vec![1, 4, max];
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            (n, pool.install(&f))
        })
        .collect()
}
