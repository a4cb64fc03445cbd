//! Monotonicity-preserving cubic Hermite interpolation.
//!
//! Node slopes come from a five-point Lagrange derivative (fourth order on
//! smooth data) and are then limited with the Hyman filter, so monotone data
//! give a monotone interpolant.

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing and of the same length as `ys`.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(!xs.is_empty());
        let ds = limited_slopes(&xs, &ys);
        Self { xs, ys, ds }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.ds
    }

    /// Index `j` of the cell `[x_j, x_{j+1}]` containing `x`, clamped to the range.
    pub fn cell(&self, x: f64) -> usize {
        let n = self.xs.len();
        if n < 2 || x <= self.xs[0] {
            return 0;
        }
        if x >= self.xs[n - 1] {
            return n - 2;
        }
        self.xs.partition_point(|&v| v <= x) - 1
    }

    /// Value at `x`, using the cubic of cell `j` (no search).
    #[inline]
    pub fn eval_in_cell(&self, j: usize, x: f64) -> f64 {
        if self.xs.len() == 1 {
            return self.ys[0];
        }
        let x0 = self.xs[j];
        let h = self.xs[j + 1] - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[j] + h * (h10 * self.ds[j] + h11 * self.ds[j + 1]) + h01 * self.ys[j + 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_in_cell(self.cell(x), x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if self.xs.len() == 1 {
            return 0.0;
        }
        let j = self.cell(x);
        let x0 = self.xs[j];
        let h = self.xs[j + 1] - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let dh00 = (6.0 * t2 - 6.0 * t) / h;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = (-6.0 * t2 + 6.0 * t) / h;
        let dh11 = 3.0 * t2 - 2.0 * t;
        dh00 * self.ys[j] + dh10 * self.ds[j] + dh01 * self.ys[j + 1] + dh11 * self.ds[j + 1]
    }
}

/// Derivative at `xs[at]` of the Lagrange polynomial through all points.
pub fn lagrange_derivative(xs: &[f64], ys: &[f64], at: usize) -> f64 {
    let xi = xs[at];
    let mut d = 0.0;
    for k in 0..xs.len() {
        if k == at {
            let s: f64 = (0..xs.len())
                .filter(|&m| m != at)
                .map(|m| 1.0 / (xi - xs[m]))
                .sum();
            d += ys[k] * s;
        } else {
            let mut num = 1.0;
            let mut den = 1.0;
            for m in 0..xs.len() {
                if m != k {
                    den *= xs[k] - xs[m];
                    if m != at {
                        num *= xi - xs[m];
                    }
                }
            }
            d += ys[k] * num / den;
        }
    }
    d
}

/// Stencil of up to `width` consecutive indices around `i`, shifted inward at the ends.
pub fn stencil(i: usize, n: usize, width: usize) -> std::ops::Range<usize> {
    let w = width.min(n);
    let lo = i.saturating_sub(w / 2).min(n - w);
    lo..lo + w
}

fn limited_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n == 1 {
        return vec![0.0];
    }
    let secant: Vec<f64> = (0..n - 1)
        .map(|j| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]))
        .collect();
    if n == 2 {
        return vec![secant[0]; 2];
    }
    let mut ds: Vec<f64> = (0..n)
        .map(|i| {
            let s = stencil(i, n, 5);
            lagrange_derivative(&xs[s.clone()], &ys[s.clone()], i - s.start)
        })
        .collect();
    for i in 0..n {
        let left = if i > 0 { Some(secant[i - 1]) } else { None };
        let right = if i + 1 < n { Some(secant[i]) } else { None };
        ds[i] = match (left, right) {
            (Some(l), Some(r)) => {
                if l * r <= 0.0 {
                    0.0
                } else {
                    clamp_slope(ds[i], l.signum(), 3.0 * l.abs().min(r.abs()))
                }
            }
            (None, Some(s)) | (Some(s), None) => {
                if s == 0.0 {
                    0.0
                } else {
                    clamp_slope(ds[i], s.signum(), 3.0 * s.abs())
                }
            }
            (None, None) => 0.0,
        };
    }
    ds
}

fn clamp_slope(d: f64, sign: f64, bound: f64) -> f64 {
    sign * (sign * d).clamp(0.0, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_nodes_and_cubics() {
        let xs: Vec<f64> = (0..20).map(|i| (i as f64 * 0.15).exp()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 100.0 - x * x * x / 50.0).collect();
        let p = MonotoneCubic::new(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert_relative_eq!(p.eval(*x), *y, max_relative = 1e-14);
        }
    }

    #[test]
    fn fourth_order_on_power_law() {
        let f = |x: f64| x.powf(-0.475);
        let err = |n: usize| {
            let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 7.0 / (n - 1) as f64).exp()).collect();
            let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            let p = MonotoneCubic::new(xs.clone(), ys);
            xs.windows(2)
                .map(|w| {
                    let m = 0.5 * (w[0] + w[1]);
                    ((p.eval(m) - f(m)) / f(m)).abs()
                })
                .fold(0.0, f64::max)
        };
        let e1 = err(100);
        let e2 = err(199);
        assert!(e1 < 1e-5, "{e1}");
        assert!(e1 / e2 > 10.0, "{e1} {e2}");
    }

    #[test]
    fn monotone_data_stay_monotone() {
        let xs = vec![0.0, 1.0, 1.1, 3.0, 3.05, 7.0];
        let ys = vec![10.0, 9.0, 2.0, 1.9, 0.0, 0.0];
        let p = MonotoneCubic::new(xs, ys);
        let mut prev = f64::INFINITY;
        for i in 0..=7000 {
            let v = p.eval(i as f64 * 1e-3);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn lagrange_derivative_exact_on_quartic() {
        let xs: [f64; 5] = [0.0, 0.3, 1.0, 1.7, 2.9];
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(4) - 2.0 * x).collect();
        for i in 0..5 {
            let exact = 4.0 * xs[i].powi(3) - 2.0;
            assert_relative_eq!(lagrange_derivative(&xs, &ys, i), exact, epsilon = 1e-11);
        }
    }
}
