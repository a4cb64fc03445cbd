//! Gauss–Legendre rules, double-exponential quadrature and pairwise sums.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Shared rule of size `n`, built once per process.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(n)
        .or_insert_with(|| Box::leak(Box::new(GaussLegendre::new(n))))
}

/// Tanh-sinh quadrature on `[a, b]`.
///
/// `f` receives `(x, x - a, b - x)` with both distances computed without
/// cancellation, so integrands with endpoint singularities keep full precision.
pub fn tanh_sinh(a: f64, b: f64, tol: f64, f: impl Fn(f64, f64, f64) -> f64) -> Result<f64> {
    let len = b - a;
    if len == 0.0 {
        return Ok(0.0);
    }
    const S_MAX: f64 = 6.0;
    const MAX_LEVEL: u32 = 12;
    let term = |s: f64| -> f64 {
        let u = 0.5 * PI * s.sinh();
        let e = (-2.0 * u.abs()).exp();
        // logistic split of the interval: the smaller part is len * e / (1 + e)
        let small = len * e / (1.0 + e);
        let large = len / (1.0 + e);
        let (da, db) = if u < 0.0 { (small, large) } else { (large, small) };
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        let x = if da < db { a + da } else { b - db };
        let w = PI * s.cosh() * e / ((1.0 + e) * (1.0 + e));
        let v = f(x, da, db);
        if v.is_finite() {
            w * v * len
        } else {
            0.0
        }
    };
    let mut h = 1.0;
    let mut sum = term(0.0);
    let mut k = 1;
    while (k as f64) * h <= S_MAX {
        let s = k as f64 * h;
        sum += term(s) + term(-s);
        k += 1;
    }
    let mut estimate = sum * h;
    let mut last_diff = f64::INFINITY;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut fresh = 0.0;
        let mut j = 1;
        while (j as f64) * h <= S_MAX {
            let s = j as f64 * h;
            fresh += term(s) + term(-s);
            j += 2;
        }
        sum += fresh;
        let next = sum * h;
        let diff = (next - estimate).abs();
        estimate = next;
        // the error after a level is roughly the square of the previous change
        if diff <= tol.sqrt() * estimate.abs().max(f64::MIN_POSITIVE) && last_diff.is_finite() {
            return Ok(estimate);
        }
        last_diff = diff;
    }
    let scale = estimate.abs().max(f64::MIN_POSITIVE);
    if last_diff <= 1e3 * tol * scale {
        Ok(estimate)
    } else {
        Err(Error::QuadratureNonConvergence {
            achieved: last_diff / scale,
        })
    }
}

/// Pairwise (cascade) summation; the result depends only on the slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
