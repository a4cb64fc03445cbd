//! Closed-form values for Beta(alpha, 1) losses.
//!
//! With `G(z) = z^alpha` the one-jump equation reduces to a hypergeometric
//! ODE. Writing `F(z) = 2F1(b, b - c + 1; b - a + 1; z)` for the exponent roots
//! `a <= 0 <= b` (here `hg_a`, `hg_b`, `hg_c = alpha`) and
//! `h(x) = (x*/x)^b F(x*/x)`:
//!
//! * `C(x) = (x* - x) + lambda x* / ((alpha + 1) delta)` for `x <= x*`, and
//!   `C(x) = lambda x* / ((alpha + 1) delta) * h(x) / F(1)` above.
//! * For a threshold `y >= x*`, `V_y(x) = K(y) h(x)` for `x >= y` and
//!   `V_y(x) = (y - x) + V_y(y)` below, with
//!   `K(y) = lambda y / ((alpha + 1) (x*/y)^b [delta F(x*/y) + r (y - x*) (b / y) F+(x*/y)])`
//!   and `F+(z) = 2F1(b + 1, b - c + 1; b - a + 1; z)`. The constant comes
//!   from evaluating the jump equation at `x = y`, using
//!   `h'(x) = -(b / x) (x*/x)^b F+(x*/x)`. At `y = x*` it reduces to `C`.

use crate::error::{invalid, Error, Result};
use crate::law::LossLaw;
use crate::params::ModelParams;
use crate::special::hyp2f1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricParams {
    pub hg_a: f64,
    pub hg_b: f64,
    pub hg_c: f64,
}

/// Roots of `r s^2 + (delta + lambda - alpha r) s - alpha delta = 0`.
pub fn abc_params(params: &ModelParams, alpha: f64) -> HypergeometricParams {
    let r = params.r;
    let bb = params.delta + params.lambda - alpha * r;
    let disc = (bb * bb + 4.0 * r * alpha * params.delta).sqrt();
    // avoid cancellation in the smaller-magnitude root
    let (hg_a, hg_b) = if bb >= 0.0 {
        let a = (-bb - disc) / (2.0 * r);
        (a, -alpha * params.delta / (r * a))
    } else {
        let b = (-bb + disc) / (2.0 * r);
        (-alpha * params.delta / (r * b), b)
    };
    HypergeometricParams {
        hg_a,
        hg_b,
        hg_c: alpha,
    }
}

impl HypergeometricParams {
    fn lower(&self) -> f64 {
        self.hg_b - self.hg_c + 1.0
    }

    fn denom(&self) -> f64 {
        self.hg_b - self.hg_a + 1.0
    }

    /// `F(z)`.
    pub fn f(&self, z: f64) -> Result<f64> {
        hyp2f1(self.hg_b, self.lower(), self.denom(), z)
    }

    /// `F+(z)`, the series with the first parameter raised by one.
    pub fn f_plus(&self, z: f64) -> Result<f64> {
        hyp2f1(self.hg_b + 1.0, self.lower(), self.denom(), z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    MonteCarlo,
    FixedPoint,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::MonteCarlo => "monte_carlo",
            Self::FixedPoint => "fixed_point",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueEstimate {
    pub x: f64,
    pub value: f64,
    pub method: Method,
    /// Half-width of the confidence interval; 0 for deterministic methods.
    pub ci_half_width: f64,
}

impl ValueEstimate {
    pub fn exact(x: f64, value: f64, method: Method) -> Self {
        Self {
            x,
            value,
            method,
            ci_half_width: 0.0,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("Beta shape {alpha} must be positive")))
    }
}

/// Cost of social protection `C(x)`: lump sums restoring capital to `x*`.
pub fn cost_c(x: f64, params: &ModelParams, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x >= 0.0) {
        return Err(invalid(format!("capital {x} must be non-negative")));
    }
    let xs = params.x_star;
    let at_star = params.lambda * xs / ((alpha + 1.0) * params.delta);
    if x <= xs {
        return Ok(xs - x + at_star);
    }
    let hp = abc_params(params, alpha);
    let z = xs / x;
    Ok(at_star * z.powf(hp.hg_b) * hp.f(z)? / hp.f(1.0)?)
}

/// `C(x*) = lambda (1 - mu) x* / delta` for any loss law.
pub fn cost_c_general(params: &ModelParams, law: &LossLaw) -> f64 {
    params.lambda * (1.0 - law.mean()) * params.x_star / params.delta
}

/// `C(x) = (x* - x) + C(x*)` for `x <= x*`.
pub fn cost_c_general_at(x: f64, params: &ModelParams, law: &LossLaw) -> Result<f64> {
    if x > params.x_star {
        return Err(invalid("the general closed form only holds up to the poverty line"));
    }
    Ok(params.x_star - x + cost_c_general(params, law))
}

/// Cost of paying the income shortfall forever once trapped, for `x <= x*`.
pub fn perpetual_d(x: f64, params: &ModelParams, law: &LossLaw) -> Result<f64> {
    if x > params.x_star {
        return Err(invalid(format!(
            "perpetual transfer closed form needs x <= x* = {}",
            params.x_star
        )));
    }
    let loss_rate = params.lambda * (1.0 - law.mean());
    let denom = params.delta + loss_rate;
    let at_star = params.b * params.x_star / params.delta * (loss_rate / denom);
    Ok(at_star + params.b / denom * (params.x_star - x))
}

/// `D(x) - C(x)` for `x <= x*`, in factored form.
pub fn d_minus_c(x: f64, params: &ModelParams, law: &LossLaw) -> Result<f64> {
    if x > params.x_star {
        return Err(invalid("x must not exceed the poverty line"));
    }
    let loss_rate = params.lambda * (1.0 - law.mean());
    let factor = params.b / (params.delta + loss_rate) - 1.0;
    Ok(factor * (params.x_star * loss_rate / params.delta + params.x_star - x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    LumpsumCheaper,
    PerpetualCheaper,
    Indifferent,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::LumpsumCheaper => "lumpsum_cheaper",
            Self::PerpetualCheaper => "perpetual_cheaper",
            Self::Indifferent => "indifferent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyComparison {
    pub verdict: Verdict,
    /// `delta + lambda (1 - mu)`, the income rate at which both strategies cost the same.
    pub boundary: f64,
}

pub fn compare_strategies(params: &ModelParams, law: &LossLaw) -> StrategyComparison {
    compare_rates(params.b, params.delta, params.lambda, law.mean())
}

/// Classification from the rates alone, with `mu` the mean remaining proportion.
pub fn compare_rates(b: f64, delta: f64, lambda: f64, mu: f64) -> StrategyComparison {
    let boundary = delta + lambda * (1.0 - mu);
    let verdict = if b > boundary {
        Verdict::LumpsumCheaper
    } else if b < boundary {
        Verdict::PerpetualCheaper
    } else {
        Verdict::Indifferent
    };
    StrategyComparison { verdict, boundary }
}

/// `V_y` for Beta(alpha, 1) losses, with the constant `K(y)` precomputed.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdValue {
    params: ModelParams,
    hp: HypergeometricParams,
    y: f64,
    k: f64,
    at_y: f64,
}

impl ThresholdValue {
    pub fn new(y: f64, params: &ModelParams, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let xs = params.x_star;
        if !(y >= xs) || !y.is_finite() {
            return Err(invalid(format!("threshold {y} below the poverty line {xs}")));
        }
        let hp = abc_params(params, alpha);
        let z = xs / y;
        let zb = z.powf(hp.hg_b);
        let f = hp.f(z)?;
        let slope_term = if y > xs {
            params.r * (y - xs) * hp.hg_b / y * hp.f_plus(z)?
        } else {
            0.0
        };
        let k = params.lambda * y / ((alpha + 1.0) * zb * (params.delta * f + slope_term));
        if !k.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "threshold constant is not finite at y = {y}"
            )));
        }
        Ok(Self {
            params: *params,
            hp,
            y,
            k,
            at_y: k * zb * f,
        })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// `V_y(y)`.
    pub fn at_threshold(&self) -> f64 {
        self.at_y
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(invalid(format!("capital {x} must be non-negative")));
        }
        if x <= self.y {
            return Ok(self.y - x + self.at_y);
        }
        let z = self.params.x_star / x;
        Ok(self.k * z.powf(self.hp.hg_b) * self.hp.f(z)?)
    }
}

/// Expected discounted transfers under the threshold strategy `y`.
pub fn value_threshold_closed(x: f64, y: f64, params: &ModelParams, alpha: f64) -> Result<f64> {
    ThresholdValue::new(y, params, alpha)?.value(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::LossDistribution;
    use crate::quadrature::tanh_sinh;
    use approx::assert_relative_eq;

    fn params(delta: f64) -> ModelParams {
        ModelParams::new(0.1, 3.0, 0.4, 60.0, 1.0, delta).unwrap()
    }

    fn beta_law(alpha: f64) -> LossLaw {
        LossLaw::Plain(LossDistribution::beta(alpha).unwrap())
    }

    #[test]
    fn abc_example() {
        let hp = abc_params(&params(0.1), 1.25);
        assert_relative_eq!(hp.hg_a, -0.24362, epsilon = 1e-5);
        assert_relative_eq!(hp.hg_b, 0.47510, epsilon = 1e-5);
        assert_eq!(hp.hg_c, 1.25);
        assert_relative_eq!(hp.hg_a * hp.hg_b, -1.25 * 0.1 / 1.08, max_relative = 1e-14);
        assert_relative_eq!(hp.hg_a + hp.hg_b, -(0.1 + 1.0 - 1.25 * 1.08) / 1.08, max_relative = 1e-13);
    }

    #[test]
    fn cost_examples() {
        let p = params(0.1);
        assert_relative_eq!(cost_c(20.0, &p, 1.25).unwrap(), 88.888_888_888_888_9, max_relative = 1e-14);
        assert_relative_eq!(cost_c(0.0, &p, 1.25).unwrap(), 108.888_888_888_888_9, max_relative = 1e-14);
        assert!(cost_c(1e12, &p, 1.25).unwrap() < 1e-3);
        assert_relative_eq!(cost_c(20.0 + 1e-13, &p, 1.25).unwrap(), 88.888_888_888_9, max_relative = 1e-9);
        assert_relative_eq!(cost_c_general(&p, &beta_law(1.25)), 88.888_888_888_888_9, max_relative = 1e-14);
        let q = ModelParams::from_poverty_line(0.1, 3.0, 0.4, 20.0, 1.0, 0.2).unwrap();
        let half = LossLaw::Plain(LossDistribution::beta(1.0).unwrap());
        assert_relative_eq!(cost_c_general(&q, &half), 50.0, max_relative = 1e-14);
    }

    #[test]
    fn perpetual_examples() {
        let p = params(0.1);
        let law = beta_law(1.25);
        assert_relative_eq!(perpetual_d(20.0, &p, &law).unwrap(), 600.0 * (4.0 / 9.0) / (0.1 + 4.0 / 9.0), max_relative = 1e-14);
        assert_relative_eq!(perpetual_d(20.0, &p, &law).unwrap(), 489.80, epsilon = 1e-2);
        assert_relative_eq!(perpetual_d(0.0, &p, &law).unwrap(), 600.0, max_relative = 1e-13);
        assert!(perpetual_d(21.0, &p, &law).is_err());
    }

    #[test]
    fn comparison_examples() {
        let p = params(0.1);
        let c = compare_strategies(&p, &beta_law(1.25));
        assert_eq!(c.verdict, Verdict::LumpsumCheaper);
        assert_relative_eq!(c.boundary, 0.1 + 4.0 / 9.0, max_relative = 1e-14);
        let q = ModelParams::new(0.1, 0.3, 0.4, 6.0, 1.0, 0.2).unwrap();
        assert_eq!(compare_strategies(&q, &beta_law(1.0)).verdict, Verdict::PerpetualCheaper);
        // b = delta + lambda (1 - mu) with mu = 1/2: 0.75 = 0.25 + 0.5
        let e = ModelParams::new(0.1, 0.75, 0.4, 6.0, 1.0, 0.25).unwrap();
        assert_eq!(compare_strategies(&e, &beta_law(1.0)).verdict, Verdict::Indifferent);
    }

    #[test]
    fn d_minus_c_matches_difference() {
        let p = params(0.3);
        let law = beta_law(0.7);
        for &x in &[0.0, 5.0, 19.9, 20.0] {
            let direct = perpetual_d(x, &p, &law).unwrap() - cost_c_general_at(x, &p, &law).unwrap();
            assert_relative_eq!(d_minus_c(x, &p, &law).unwrap(), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn boundary_identity_by_quadrature() {
        // (delta + lambda) C(x*) = lambda int (x* - x* z + C(x*)) dG(z)
        for &(delta, alpha) in &[(0.1, 1.25), (0.4, 0.5), (0.25, 2.5)] {
            let p = params(delta);
            let c = cost_c(p.x_star, &p, alpha).unwrap();
            let rhs = p.lambda
                * tanh_sinh(0.0, 1.0, 1e-15, |z, _, _| {
                    (p.x_star - p.x_star * z + c) * alpha * z.powf(alpha - 1.0)
                })
                .unwrap();
            assert_relative_eq!((p.delta + p.lambda) * c, rhs, max_relative = 1e-12);
        }
    }

    /// Residual of the one-jump equation for `V_y` at `x > y`, computed with
    /// Richardson-extrapolated differences and tanh-sinh quadrature.
    fn jump_equation_residual(v: &ThresholdValue, p: &ModelParams, alpha: f64, x: f64) -> f64 {
        let f = |s: f64| v.value(s).unwrap();
        let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        let h = 1e-3 * (x - v.y()).min(x);
        let deriv = (4.0 * d(h / 2.0) - d(h)) / 3.0;
        let dens = |z: f64| alpha * z.powf(alpha - 1.0);
        let zeta = v.y() / x;
        let low = tanh_sinh(0.0, zeta, 1e-15, |z, _, _| (v.at_threshold() + v.y() - x * z) * dens(z)).unwrap();
        let high = tanh_sinh(zeta, 1.0, 1e-15, |z, _, _| f(x * z) * dens(z)).unwrap();
        p.r * (x - p.x_star) * deriv - (p.lambda + p.delta) * f(x) + p.lambda * (low + high)
    }

    #[test]
    fn threshold_value_solves_jump_equation() {
        for &(delta, alpha, y) in &[(0.1, 1.25, 40.0), (0.1, 1.25, 26.66), (0.25, 0.5, 30.0), (0.5, 2.5, 20.0)] {
            let p = params(delta);
            let v = ThresholdValue::new(y, &p, alpha).unwrap();
            for &x in &[y * 1.01, y * 1.3, y * 3.0, y * 20.0] {
                let res = jump_equation_residual(&v, &p, alpha, x);
                assert!(res.abs() < 1e-6 * v.at_threshold(), "delta {delta} y {y} x {x}: {res}");
            }
        }
    }

    #[test]
    fn threshold_at_poverty_line_is_cost() {
        let p = params(0.1);
        for &x in &[0.0, 10.0, 20.0, 20.5, 27.0, 100.0, 1e4] {
            let a = value_threshold_closed(x, 20.0, &p, 1.25).unwrap();
            let b = cost_c(x, &p, 1.25).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn threshold_value_continuous_and_decaying() {
        let p = params(0.1);
        let v = ThresholdValue::new(40.0, &p, 1.25).unwrap();
        assert_relative_eq!(v.value(40.0 + 1e-9).unwrap(), v.value(40.0).unwrap(), max_relative = 1e-9);
        assert!(v.value(1e12).unwrap() < 1e-3);
        assert!(value_threshold_closed(30.0, 19.0, &p, 1.25).is_err());
    }
}
