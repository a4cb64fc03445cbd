//! Fixed-point iteration for threshold values and the HJB residual check.
//!
//! Values live on a grid geometric in `x - x* + d` and are interpolated with
//! monotone cubics. The loss integral is taken cell by cell against the law of
//! the remaining proportion, with explicit atoms. Because the flow carries
//! grid cell `j` onto itself in a time that does not depend on the starting
//! node, the time integral of the one-jump operator collapses to a backward
//! recursion over cells.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::interp::{stencil, MonotoneCubic};
use crate::law::LossLaw;
use crate::params::ModelParams;
use crate::quadrature::gauss_legendre;

/// Nodes per cell for the loss integral.
const Z_NODES: usize = 6;
/// Nodes for cells where the density may be singular at an end.
const Z_NODES_EDGE: usize = 16;
/// Nodes per cell for the time integral.
const T_NODES: usize = 4;
const CELL_NONE: u32 = u32::MAX;

/// `d / x*` for geometric grids. Terms like `(x - x*)^s` are smooth in
/// `ln(x - x* + d)` down to `x - x* ~ d`.
pub const GRID_OFFSET: f64 = 1e-5;

/// Largest ratio `x_max / y` used by default grids.
pub const MAX_SPAN: f64 = 1e15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub n: usize,
    /// `x_max = x_max_factor * y`; `None` picks the capital reached from `y`
    /// by the flow over the time after which `e^{-(lambda+delta) t} < 1e-12`.
    pub x_max_factor: Option<f64>,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            n: 400,
            x_max_factor: None,
        }
    }
}

/// Default `x_max / y`: `e^{r T}` with `T = 12 ln 10 / (lambda + delta)`.
pub fn default_span(params: &ModelParams) -> f64 {
    let t = 12.0 * std::f64::consts::LN_10 / (params.lambda + params.delta);
    (params.r * t).exp().clamp(10.0, MAX_SPAN)
}

/// Capitals `[y, x_max]` together with the log coordinate
/// `s = ln(x + offset)` in which grid functions are interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct CapitalGrid {
    points: Vec<f64>,
    sigmas: Vec<f64>,
    offset: f64,
}

impl CapitalGrid {
    /// Arbitrary increasing positive points, interpolated in `ln x`.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        Self::with_offset(points, 0.0)
    }

    pub fn with_offset(points: Vec<f64>, offset: f64) -> Result<Self> {
        if points.len() < 3 {
            return Err(invalid("a capital grid needs at least 3 points"));
        }
        if points.iter().any(|p| !p.is_finite() || *p < 0.0) || !offset.is_finite() {
            return Err(invalid("grid points must be finite and non-negative"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("grid points must be strictly increasing"));
        }
        if points[0] + offset <= 0.0 {
            return Err(invalid("grid offset must keep x + offset positive"));
        }
        let sigmas = points.iter().map(|&x| (x + offset).ln()).collect();
        Ok(Self {
            points,
            sigmas,
            offset,
        })
    }

    /// `n` points on `[y, x_max]`, geometric in `x - x* + d` with `d = 1e-5 x*`.
    pub fn geometric(y: f64, x_max: f64, n: usize, params: &ModelParams) -> Result<Self> {
        let xs = params.x_star;
        if !(y >= xs) || !(x_max > y) || n < 3 {
            return Err(invalid(format!(
                "grid needs x* <= y < x_max and n >= 3 (y = {y}, x_max = {x_max}, n = {n})"
            )));
        }
        let d = GRID_OFFSET * if xs > 0.0 { xs } else { y.max(1.0) };
        let lo = y - xs + d;
        let span = ((x_max - xs + d) / lo).ln();
        let mut points: Vec<f64> = (0..n)
            .map(|i| xs - d + lo * (span * i as f64 / (n - 1) as f64).exp())
            .collect();
        points[0] = y;
        points[n - 1] = x_max;
        Self::with_offset(points, d - xs)
    }

    pub fn with_options(y: f64, params: &ModelParams, opts: &GridOptions) -> Result<Self> {
        let factor = opts.x_max_factor.unwrap_or_else(|| default_span(params));
        Self::geometric(y, factor * y.max(params.x_star), opts.n, params)
    }

    pub fn default_for(y: f64, params: &ModelParams) -> Result<Self> {
        Self::with_options(y, params, &GridOptions::default())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn y(&self) -> f64 {
        self.points[0]
    }

    pub fn x_max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    #[inline]
    pub fn sigma(&self, x: f64) -> f64 {
        (x + self.offset).ln()
    }

    /// Cell index containing `u`, or `None` beyond the last point.
    fn cell(&self, u: f64) -> Option<usize> {
        if u > self.x_max() {
            return None;
        }
        let n = self.points.len();
        Some((self.points.partition_point(|&p| p <= u).max(1) - 1).min(n - 2))
    }
}

/// Values on a grid starting at the threshold `y`, extended by
/// `W(x) = (y - x) + W(y)` below it and by a power law beyond `x_max`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: CapitalGrid,
    interp: MonotoneCubic,
    /// Decay rate in the log coordinate beyond the last point.
    tail_rate: f64,
}

fn tail_rate(s: &[f64], v: &[f64]) -> f64 {
    let n = v.len();
    let (a, b) = (v[n - 2], v[n - 1]);
    if a > 0.0 && b > 0.0 && b <= a {
        (a / b).ln() / (s[n - 1] - s[n - 2])
    } else {
        0.0
    }
}

impl GridFunction {
    pub fn new(grid: CapitalGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("one value per grid point is required"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid values must be finite"));
        }
        let tail_rate = tail_rate(&grid.sigmas, &values);
        let interp = MonotoneCubic::new(grid.sigmas.clone(), values);
        Ok(Self {
            grid,
            interp,
            tail_rate,
        })
    }

    pub fn from_fn(grid: CapitalGrid, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = grid.points.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn zeros(grid: CapitalGrid) -> Self {
        let n = grid.len();
        Self::new(grid, vec![0.0; n]).expect("zero function is valid")
    }

    pub fn grid(&self) -> &CapitalGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        self.interp.ys()
    }

    pub fn y(&self) -> f64 {
        self.grid.y()
    }

    /// Value at grid node `k`.
    pub fn points_value(&self, k: usize) -> f64 {
        self.interp.ys()[k]
    }

    pub fn at_threshold(&self) -> f64 {
        self.interp.ys()[0]
    }

    pub fn value(&self, x: f64) -> f64 {
        let y = self.y();
        if x < y {
            return y - x + self.at_threshold();
        }
        self.value_at_sigma(None, self.grid.sigma(x))
    }

    #[inline]
    fn value_at_sigma(&self, cell: Option<usize>, s: f64) -> f64 {
        let sig = &self.grid.sigmas;
        let last = sig[sig.len() - 1];
        if s > last {
            let v = *self.interp.ys().last().expect("non-empty grid");
            return v * (-self.tail_rate * (s - last)).exp();
        }
        match cell {
            Some(j) => self.interp.eval_in_cell(j, s),
            None => self.interp.eval(s),
        }
    }

    #[inline]
    fn value_in_cell(&self, cell: u32, s: f64) -> f64 {
        if cell == CELL_NONE {
            self.value_at_sigma(None, s)
        } else {
            self.interp.eval_in_cell(cell as usize, s)
        }
    }

    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.values().windows(2).all(|w| w[1] <= w[0] + tol)
    }

    /// `u'(x)`: exactly -1 below the threshold, otherwise the slope of the
    /// local Lagrange polynomial in the log coordinate (seven nodes centred
    /// on a grid node, eight around a cell, one-sided near the ends).
    pub fn derivative(&self, x: f64) -> f64 {
        let y = self.y();
        if x < y {
            return -1.0;
        }
        let pts = self.grid.points();
        let n = pts.len();
        let s = self.grid.sigma(x);
        if x > self.grid.x_max() {
            return -self.tail_rate * self.value_at_sigma(None, s) / (x + self.grid.offset);
        }
        let i = pts.partition_point(|&p| p < x);
        let near = |k: usize| k < n && (pts[k] - x).abs() <= 1e-12 * x.max(1.0);
        let window = if near(i) {
            stencil(i, n, 7)
        } else if i > 0 && near(i - 1) {
            stencil(i - 1, n, 7)
        } else {
            let w = 8.min(n);
            let start = i.saturating_sub(w / 2).min(n - w);
            start..start + w
        };
        let ds = poly_derivative(&self.grid.sigmas[window.clone()], &self.values()[window], s);
        ds / (x + self.grid.offset)
    }

    /// `E[u(v W)]` with `u` this function extended below the threshold.
    pub fn expected_after_loss(&self, v: f64, law: &LossLaw) -> f64 {
        let mut plan = JumpPlan::default();
        plan.push_row(&self.grid, law, v);
        plan.eval_row(0, self)
    }
}

/// Derivative at `t` of the polynomial through `(xs, ys)`.
fn poly_derivative(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let m = xs.len();
    let mut total = 0.0;
    for j in 0..m {
        let mut dl = 0.0;
        for k in 0..m {
            if k == j {
                continue;
            }
            let mut term = 1.0 / (xs[j] - xs[k]);
            for q in 0..m {
                if q != j && q != k {
                    term *= (t - xs[q]) / (xs[j] - xs[q]);
                }
            }
            dl += term;
        }
        total += ys[j] * dl;
    }
    total
}

#[derive(Debug, Clone, Copy)]
struct Row {
    v: f64,
    prob_below: f64,
    mean_below: f64,
    start: usize,
    end: usize,
}

/// Quadrature points and weights for `E[u(v W)]` at a set of capitals `v`.
#[derive(Debug, Clone, Default)]
struct JumpPlan {
    rows: Vec<Row>,
    cells: Vec<u32>,
    sigmas: Vec<f64>,
    weights: Vec<f64>,
}

impl JumpPlan {
    fn push_row(&mut self, grid: &CapitalGrid, law: &LossLaw, v: f64) {
        let y = grid.y();
        let start = self.sigmas.len();
        let zeta = if v > 0.0 { y / v } else { f64::INFINITY };
        let prob_below = law.prob_below(zeta);
        let mean_below = law.partial_mean_below(zeta);
        if let Some((lo, hi)) = law.continuous_support() {
            let ua = (v * lo).max(y);
            let ub = v * hi;
            if ua < ub {
                self.push_segments(grid, law, v, ua, ub, v * lo);
            }
        }
        if let Some((a, mass)) = law.atom() {
            let u = v * a;
            if u >= y {
                let cell = grid.cell(u).map_or(CELL_NONE, |c| c as u32);
                self.cells.push(cell);
                self.sigmas.push(grid.sigma(u));
                self.weights.push(mass);
            }
        }
        self.rows.push(Row {
            v,
            prob_below,
            mean_below,
            start,
            end: self.sigmas.len(),
        });
    }

    fn push_segments(&mut self, grid: &CapitalGrid, law: &LossLaw, v: f64, ua: f64, ub: f64, support_lo: f64) {
        let pts = grid.points();
        let mut a = ua;
        while a < ub {
            let (cell, b) = match grid.cell(a) {
                Some(j) if a < grid.x_max() => (j as u32, pts[j + 1].min(ub)),
                _ => (CELL_NONE, (a * 1.5).min(ub)),
            };
            if b <= a {
                break;
            }
            let touches_edge = a <= support_lo * (1.0 + 1e-12) || b >= v * (1.0 - 1e-12);
            let rule = gauss_legendre(if touches_edge { Z_NODES_EDGE } else { Z_NODES });
            for (u, w) in rule.mapped(a, b) {
                self.cells.push(cell);
                self.sigmas.push(grid.sigma(u));
                self.weights.push(w * law.density(u / v) / v);
            }
            a = b;
        }
    }

    #[inline]
    fn eval_row(&self, k: usize, f: &GridFunction) -> f64 {
        let row = self.rows[k];
        let y = f.y();
        let mut s = (y + f.at_threshold()) * row.prob_below - row.v * row.mean_below;
        for idx in row.start..row.end {
            s += self.weights[idx] * f.value_in_cell(self.cells[idx], self.sigmas[idx]);
        }
        s
    }
}

/// The one-jump operator `T` for a fixed threshold, grid and law.
#[derive(Debug, Clone)]
pub struct JumpOperator {
    grid: CapitalGrid,
    params: ModelParams,
    plan: JumpPlan,
}

impl JumpOperator {
    pub fn new(grid: CapitalGrid, params: &ModelParams, law: &LossLaw) -> Result<Self> {
        params.validate()?;
        if grid.y() < params.x_star {
            return Err(invalid("grid must start at a threshold y >= x*"));
        }
        let mut plan = JumpPlan::default();
        for &v in grid.points() {
            plan.push_row(&grid, law, v);
        }
        Ok(Self {
            grid,
            params: *params,
            plan,
        })
    }

    pub fn grid(&self) -> &CapitalGrid {
        &self.grid
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa()
    }

    /// `E[u(v W)]` at every grid node.
    pub fn expected_at_nodes(&self, w: &GridFunction) -> Vec<f64> {
        (0..self.grid.len())
            .into_par_iter()
            .map(|k| self.plan.eval_row(k, w))
            .collect()
    }

    pub fn apply(&self, w: &GridFunction) -> Result<GridFunction> {
        if w.grid() != &self.grid {
            return Err(invalid("grid function lives on a different grid"));
        }
        let p = &self.params;
        let xs = p.x_star;
        let kappa = p.lambda + p.delta;
        let pts = self.grid.points();
        let n = pts.len();
        let g = self.expected_at_nodes(w);
        let g_fn = GridFunction::new(self.grid.clone(), g.clone())?;
        let rule = gauss_legendre(T_NODES);

        // contribution of each cell when entered at its left end
        let first = usize::from(pts[0] <= xs);
        let mut cell_part = vec![0.0; n - 1];
        for j in first..n - 1 {
            let dt = ((pts[j + 1] - xs) / (pts[j] - xs)).ln() / p.r;
            let mut s = 0.0;
            for (t, wt) in rule.mapped(0.0, dt) {
                let v = xs + (pts[j] - xs) * (p.r * t).exp();
                s += wt * (-kappa * t).exp() * g_fn.interp.eval_in_cell(j, self.grid.sigma(v));
            }
            cell_part[j] = p.lambda * s;
        }
        let mut out = vec![0.0; n];
        out[n - 1] = self.tail_part(&g_fn);
        for j in (first..n - 1).rev() {
            let decay = ((pts[j + 1] - xs) / (pts[j] - xs)).powf(-kappa / p.r);
            out[j] = cell_part[j] + decay * out[j + 1];
        }
        if first == 1 {
            // capital frozen at the poverty line until the first loss
            out[0] = p.lambda / kappa * g[0];
        }
        GridFunction::new(self.grid.clone(), out)
    }

    /// Time integral from the last node on, with `g` extended beyond it.
    fn tail_part(&self, g: &GridFunction) -> f64 {
        let p = &self.params;
        let kappa = p.lambda + p.delta;
        let xn = self.grid.x_max();
        let panel = 0.25 / (kappa + g.tail_rate * p.r);
        let panels = (40.0 / kappa / panel).ceil() as usize;
        let rule = gauss_legendre(8);
        let mut s = 0.0;
        for k in 0..panels {
            let a = k as f64 * panel;
            for (t, wt) in rule.mapped(a, a + panel) {
                let v = p.x_star + (xn - p.x_star) * (p.r * t).exp();
                s += wt * (-kappa * t).exp() * g.value(v);
            }
        }
        p.lambda * s
    }
}

/// One application of `T` to `w` (threshold taken from the grid).
pub fn apply_t(w: &GridFunction, params: &ModelParams, law: &LossLaw) -> Result<GridFunction> {
    JumpOperator::new(w.grid().clone(), params, law)?.apply(w)
}

#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub value: GridFunction,
    pub iterations: usize,
    /// Sup-norm change of the first and last iterations.
    pub first_change: f64,
    pub last_change: f64,
}

pub const MAX_ITERATIONS: usize = 20_000;

/// Picard iteration `W <- T(W)` from `W = 0` until the sup-norm change drops
/// below `tol (1 - kappa) / kappa`.
pub fn solve_fixed_point_report(
    params: &ModelParams,
    law: &LossLaw,
    grid: CapitalGrid,
    tol: f64,
) -> Result<FixedPointSolution> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance {tol} must be positive")));
    }
    let op = JumpOperator::new(grid, params, law)?;
    let kappa = op.kappa();
    let stop = tol * (1.0 - kappa) / kappa;
    let mut w = GridFunction::zeros(op.grid().clone());
    let mut first_change = f64::NAN;
    let mut change = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let next = op.apply(&w)?;
        change = next
            .values()
            .iter()
            .zip(w.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if it == 1 {
            first_change = change;
        }
        w = next;
        if change < stop {
            return Ok(FixedPointSolution {
                value: w,
                iterations: it,
                first_change,
                last_change: change,
            });
        }
    }
    Err(Error::IterationCap {
        cap: MAX_ITERATIONS,
        change,
        kappa,
    })
}

/// `V_y` on `grid` (which starts at `y`).
pub fn solve_fixed_point(
    params: &ModelParams,
    law: &LossLaw,
    grid: CapitalGrid,
    tol: f64,
) -> Result<GridFunction> {
    Ok(solve_fixed_point_report(params, law, grid, tol)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HjbResidual {
    /// `1 + u'(x)`.
    pub deriv_slack: f64,
    /// `L(u)(x)`.
    pub generator: f64,
}

/// Both parts of `min{1 + u', L(u)}` at `x` in `(x*, x_max)`.
pub fn hjb_residual(v: &GridFunction, params: &ModelParams, law: &LossLaw, x: f64) -> Result<HjbResidual> {
    let lo = params.x_star;
    let hi = v.grid().x_max();
    if !(x > lo && x < hi) {
        return Err(Error::OutsideGrid { x, lo, hi });
    }
    let du = v.derivative(x);
    let generator = params.r * (x - params.x_star) * du - (params.lambda + params.delta) * v.value(x)
        + params.lambda * v.expected_after_loss(x, law);
    Ok(HjbResidual {
        deriv_slack: 1.0 + du,
        generator,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupersolutionReport {
    pub max_deriv_violation: f64,
    pub max_generator_violation: f64,
    /// Capital of the worst violation of each kind.
    pub worst_deriv_x: f64,
    pub worst_generator_x: f64,
    pub eps_d: f64,
    pub eps_g: f64,
    pub pass: bool,
    /// `(x, 1 + u'(x), L(u)(x))` at every checked point.
    pub points: Vec<(f64, f64, f64)>,
}

pub const EPS_DERIV: f64 = 1e-6;
const ACTION_POINTS: usize = 64;

/// Supersolution check of a candidate value function: interior grid nodes,
/// plus points of the transfer region `(x*, y)` when `y > x*`.
pub fn verify_supersolution(v: &GridFunction, params: &ModelParams, law: &LossLaw) -> SupersolutionReport {
    let xs = params.x_star;
    let start = xs * (1.0 + 1e-6);
    let y = v.y();
    let mut xs_check: Vec<f64> = Vec::new();
    if y > start {
        for k in 0..ACTION_POINTS {
            xs_check.push(start + (y - start) * k as f64 / ACTION_POINTS as f64);
        }
    }
    let pts = v.grid().points();
    xs_check.extend(pts[1..pts.len() - 1].iter().copied().filter(|&x| x >= start));
    let points: Vec<(f64, f64, f64)> = xs_check
        .par_iter()
        .filter_map(|&x| {
            hjb_residual(v, params, law, x)
                .ok()
                .map(|r| (x, r.deriv_slack, r.generator))
        })
        .collect();
    let eps_g = 1e-4 * (params.lambda + params.delta) * v.at_threshold().abs();
    let (mut md, mut mg) = (0.0f64, 0.0f64);
    let (mut xd, mut xg) = (f64::NAN, f64::NAN);
    for &(x, d, g) in &points {
        if -d > md {
            md = -d;
            xd = x;
        }
        if -g > mg {
            mg = -g;
            xg = x;
        }
    }
    SupersolutionReport {
        max_deriv_violation: md,
        max_generator_violation: mg,
        worst_deriv_x: xd,
        worst_generator_x: xg,
        eps_d: EPS_DERIV,
        eps_g,
        pass: md <= EPS_DERIV && mg <= eps_g,
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::LossDistribution;
    use crate::insurance::CoverKind;
    use approx::assert_relative_eq;

    fn params() -> ModelParams {
        ModelParams::new(0.1, 3.0, 0.4, 60.0, 1.0, 0.1).unwrap()
    }

    fn beta() -> LossLaw {
        LossLaw::Plain(LossDistribution::beta(1.25).unwrap())
    }

    #[test]
    fn grid_shape() {
        let p = params();
        let g = CapitalGrid::default_for(20.0, &p).unwrap();
        assert_eq!(g.len(), 400);
        assert_eq!(g.y(), 20.0);
        assert_relative_eq!(g.x_max(), 20.0 * (1.08f64 * 12.0 * 10f64.ln() / 1.1).exp(), max_relative = 1e-12);
        assert!(CapitalGrid::geometric(19.0, 100.0, 10, &p).is_err());
        assert!(CapitalGrid::new(vec![1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn first_iterate_at_poverty_line() {
        let p = params();
        let grid = CapitalGrid::default_for(20.0, &p).unwrap();
        let t0 = apply_t(&GridFunction::zeros(grid), &p, &beta()).unwrap();
        assert_relative_eq!(t0.values()[0], 20.0 * (4.0 / 9.0) / 1.1, max_relative = 1e-12);
        assert_relative_eq!(t0.values()[0], 8.0808, epsilon = 1e-4);
    }

    #[test]
    fn plan_weights_sum_to_one() {
        let p = params();
        let grid = CapitalGrid::geometric(25.0, 2_500.0, 120, &p).unwrap();
        let k = LossDistribution::kumaraswamy(3.0, 4.0).unwrap();
        let laws = [
            beta(),
            LossLaw::Plain(k),
            LossLaw::Covered { dist: k, cover: CoverKind::ExcessOfLoss { l: 0.5 } },
            LossLaw::Covered { dist: k, cover: CoverKind::TotalLoss { limit: 0.5 } },
            LossLaw::Covered { dist: k, cover: CoverKind::Proportional { eta: 0.5 } },
        ];
        for law in laws {
            for &v in &[25.0, 30.0, 61.3, 900.0] {
                let mut plan = JumpPlan::default();
                plan.push_row(&grid, &law, v);
                let row = plan.rows[0];
                let total: f64 = plan.weights[row.start..row.end].iter().sum::<f64>() + row.prob_below;
                assert_relative_eq!(total, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn no_losses_means_no_value() {
        let p = params().with_lambda(1e-300).unwrap();
        let grid = CapitalGrid::geometric(25.0, 2_500.0, 50, &p).unwrap();
        let w = GridFunction::from_fn(grid, |x| Ok(100.0 / x)).unwrap();
        let t = apply_t(&w, &p, &beta()).unwrap();
        assert!(t.values().iter().all(|v| v.abs() < 1e-250));
    }

    #[test]
    fn linear_function_has_zero_slack() {
        let p = params();
        let grid = CapitalGrid::geometric(30.0, 3_000.0, 100, &p).unwrap();
        let w = GridFunction::from_fn(grid, |x| Ok(5000.0 - x)).unwrap();
        for &x in &[20.5, 25.0, 29.9] {
            assert_eq!(hjb_residual(&w, &p, &beta(), x).unwrap().deriv_slack, 0.0);
        }
        for &x in &[30.5, 33.0, 150.0, 2999.0] {
            let r = hjb_residual(&w, &p, &beta(), x).unwrap();
            assert!(r.deriv_slack.abs() < EPS_DERIV, "{r:?}");
        }
        assert!(hjb_residual(&w, &p, &beta(), 20.0).is_err());
        assert!(hjb_residual(&w, &p, &beta(), 3_000.0).is_err());
    }

    #[test]
    fn zero_candidate_report() {
        let p = params();
        let grid = CapitalGrid::geometric(20.0, 2_000.0, 100, &p).unwrap();
        let w = GridFunction::zeros(grid);
        let x = 20.0 * (1.0 + 1e-6);
        let r = hjb_residual(&w, &p, &beta(), x).unwrap();
        assert_eq!(r.deriv_slack, 1.0);
        // lambda E[(x* - x W)^+] just above the poverty line
        assert_relative_eq!(r.generator, 20.0 * (4.0 / 9.0), max_relative = 1e-5);
        let rep = verify_supersolution(&w, &p, &beta());
        assert!(rep.pass);
        assert_eq!(rep.max_deriv_violation, 0.0);
        assert_eq!(rep.max_generator_violation, 0.0);
        assert_eq!(rep.points.len(), 98);
    }
}
