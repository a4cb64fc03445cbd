//! Search for the optimal threshold `y*` minimising `y + V_y(y)`.

use rayon::prelude::*;

use crate::closed_form::{Method, ThresholdValue, ValueEstimate};
use crate::error::{invalid, Error, Result};
use crate::ide::{solve_fixed_point, verify_supersolution, CapitalGrid, GridFunction, GridOptions, SupersolutionReport};
use crate::law::LossLaw;
use crate::mc::{estimate_vy_at_y, McConfig};
use crate::params::ModelParams;

/// Default fixed-point tolerance (sup norm, currency units).
pub const FIXED_POINT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluator {
    ClosedForm,
    FixedPoint { grid: GridOptions, tol: f64 },
    MonteCarlo(McConfig),
}

impl Evaluator {
    pub fn fixed_point() -> Self {
        Evaluator::FixedPoint {
            grid: GridOptions::default(),
            tol: FIXED_POINT_TOL,
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Evaluator::ClosedForm => Method::ClosedForm,
            Evaluator::FixedPoint { .. } => Method::FixedPoint,
            Evaluator::MonteCarlo(_) => Method::MonteCarlo,
        }
    }

    /// `V_y(y)` with a confidence half-width (zero for deterministic evaluators).
    pub fn value_at_threshold(&self, y: f64, params: &ModelParams, law: &LossLaw) -> Result<ValueEstimate> {
        match self {
            Evaluator::ClosedForm => {
                let alpha = closed_form_alpha(law)?;
                let v = ThresholdValue::new(y, params, alpha)?.at_threshold();
                Ok(ValueEstimate::exact(y, v, Method::ClosedForm))
            }
            Evaluator::FixedPoint { grid, tol } => {
                let g = CapitalGrid::with_options(y, params, grid)?;
                let w = solve_fixed_point(params, law, g, *tol)?;
                Ok(ValueEstimate::exact(y, w.at_threshold(), Method::FixedPoint))
            }
            Evaluator::MonteCarlo(cfg) => estimate_vy_at_y(y, params, law, cfg),
        }
    }

    /// `V_y` on a grid, for the supersolution check.
    pub fn value_function(&self, y: f64, params: &ModelParams, law: &LossLaw) -> Result<GridFunction> {
        match self {
            Evaluator::ClosedForm => {
                let tv = ThresholdValue::new(y, params, closed_form_alpha(law)?)?;
                GridFunction::from_fn(CapitalGrid::default_for(y, params)?, |x| tv.value(x))
            }
            Evaluator::FixedPoint { grid, tol } => {
                solve_fixed_point(params, law, CapitalGrid::with_options(y, params, grid)?, *tol)
            }
            Evaluator::MonteCarlo(_) => {
                solve_fixed_point(params, law, CapitalGrid::default_for(y, params)?, FIXED_POINT_TOL)
            }
        }
    }
}

fn closed_form_alpha(law: &LossLaw) -> Result<f64> {
    match law {
        LossLaw::Plain(d) => d.beta_alpha().ok_or(Error::ClosedFormUnavailable),
        LossLaw::Covered { .. } => Err(Error::ClosedFormUnavailable),
    }
}

/// `y + V_y(y)`.
pub fn objective(y: f64, params: &ModelParams, law: &LossLaw, evaluator: &Evaluator) -> Result<f64> {
    Ok(objective_estimate(y, params, law, evaluator)?.value)
}

pub fn objective_estimate(
    y: f64,
    params: &ModelParams,
    law: &LossLaw,
    evaluator: &Evaluator,
) -> Result<ValueEstimate> {
    if !(y >= params.x_star) {
        return Err(invalid(format!("threshold {y} below the poverty line {}", params.x_star)));
    }
    let mut e = evaluator.value_at_threshold(y, params, law)?;
    e.value += y;
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    /// Upper end of the search range; `None` means `3 x*`.
    pub y_max: Option<f64>,
    pub tol_y: f64,
    pub scan_points: usize,
    pub fine_points: usize,
    pub verify: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            y_max: None,
            tol_y: 1e-3,
            scan_points: 64,
            fine_points: 512,
            verify: true,
        }
    }
}

impl OptimizeOptions {
    pub fn y_max_for(&self, params: &ModelParams) -> f64 {
        self.y_max.unwrap_or(3.0 * params.x_star.max(1.0))
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub y_star: f64,
    pub value_at_y_star: f64,
    pub ci_half_width: f64,
    pub evaluator: Method,
    pub verification: Option<SupersolutionReport>,
    /// Every `(y, y + V_y(y))` evaluated, in evaluation order.
    pub search_trace: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn scan(
    lo: f64,
    hi: f64,
    n: usize,
    params: &ModelParams,
    law: &LossLaw,
    evaluator: &Evaluator,
) -> Result<Vec<(f64, ValueEstimate)>> {
    (0..n)
        .into_par_iter()
        .map(|k| {
            let y = if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
            objective_estimate(y, params, law, evaluator).map(|e| (y, e))
        })
        .collect()
}

fn argmin(values: &[(f64, ValueEstimate)]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if v.1.value < values[best].1.value {
            best = k;
        }
    }
    best
}

fn local_minima(values: &[(f64, ValueEstimate)]) -> usize {
    let n = values.len();
    (0..n)
        .filter(|&k| {
            let v = values[k].1.value;
            (k == 0 || v < values[k - 1].1.value) && (k + 1 == n || v < values[k + 1].1.value)
        })
        .count()
}

/// Scan, bracket and golden-section search for `y*` on `[x*, y_max]`.
pub fn optimize(
    params: &ModelParams,
    law: &LossLaw,
    evaluator: &Evaluator,
    opts: &OptimizeOptions,
) -> Result<OptimizeResult> {
    params.validate()?;
    let lo = params.x_star;
    let hi = opts.y_max_for(params);
    if !(hi > lo) {
        return Err(invalid(format!("y_max = {hi} must exceed x* = {lo}")));
    }
    if !(opts.tol_y > 0.0) {
        return Err(invalid("tol_y must be positive"));
    }
    if opts.scan_points < 3 || opts.fine_points < 3 {
        return Err(invalid("scan sizes must be at least 3"));
    }
    if let Evaluator::MonteCarlo(cfg) = evaluator {
        cfg.validate()?;
    }
    if matches!(evaluator, Evaluator::ClosedForm) {
        closed_form_alpha(law)?;
    }

    let mut warnings = Vec::new();
    let mut points = scan(lo, hi, opts.scan_points, params, law, evaluator)?;
    let mut trace: Vec<(f64, f64)> = points.iter().map(|(y, e)| (*y, e.value)).collect();

    if let Evaluator::MonteCarlo(cfg) = evaluator {
        let k = argmin(&points);
        let noise = points[k].1.ci_half_width;
        let max = points.iter().map(|p| p.1.value).fold(f64::NEG_INFINITY, f64::max);
        let range = max - points[k].1.value;
        if range < noise {
            let ratio = 2.0 * noise / range.max(f64::MIN_POSITIVE);
            let suggested_n = (cfg.n_paths as f64 * ratio * ratio).ceil().min(usize::MAX as f64) as usize;
            return Err(Error::NoisyObjective {
                noise,
                range,
                suggested_n,
            });
        }
    }

    if local_minima(&points) > 1 {
        warnings.push("objective has several local minima on the coarse scan; refined on a fine sweep".to_string());
        points = scan(lo, hi, opts.fine_points, params, law, evaluator)?;
        trace.extend(points.iter().map(|(y, e)| (*y, e.value)));
    }

    let k = argmin(&points);
    if k + 1 == points.len() {
        warnings.push(format!("minimum at y_max = {hi}; increase y_max"));
    }
    let mut a = points[k.saturating_sub(1)].0;
    let mut b = points[(k + 1).min(points.len() - 1)].0;

    let eval = |y: f64, trace: &mut Vec<(f64, f64)>| -> Result<f64> {
        let v = objective_estimate(y, params, law, evaluator)?.value;
        trace.push((y, v));
        Ok(v)
    };
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = eval(c, &mut trace)?;
    let mut fd = eval(d, &mut trace)?;
    while b - a > opts.tol_y {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = eval(c, &mut trace)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = eval(d, &mut trace)?;
        }
    }

    let (y_star, value) = trace
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best });
    if y_star - lo <= opts.tol_y {
        warnings.push(format!("minimum at the poverty line x* = {lo}"));
    }
    let ci_half_width = objective_estimate(y_star, params, law, evaluator)?.ci_half_width;
    let verification = if opts.verify {
        let v = evaluator.value_function(y_star, params, law)?;
        Some(verify_supersolution(&v, params, law))
    } else {
        None
    };
    Ok(OptimizeResult {
        y_star,
        value_at_y_star: value - y_star,
        ci_half_width,
        evaluator: evaluator.method(),
        verification,
        search_trace: trace,
        warnings,
    })
}
