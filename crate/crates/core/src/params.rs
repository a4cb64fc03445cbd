//! Household economy constants.

use crate::error::{invalid, Result};

/// Constants of the capital process. `r` and `x_star` are derived and kept
/// consistent by the constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Consumption rate.
    pub a: f64,
    /// Income-generation rate.
    pub b: f64,
    /// Capital-conversion constant.
    pub c: f64,
    /// Critical income.
    pub i_star: f64,
    /// Critical capital (poverty line), `i_star / b`.
    pub x_star: f64,
    /// Growth rate above the poverty line, `(1 - a) b c`.
    pub r: f64,
    /// Loss intensity.
    pub lambda: f64,
    /// Discount rate.
    pub delta: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, c: f64, i_star: f64, lambda: f64, delta: f64) -> Result<Self> {
        let p = Self {
            a,
            b,
            c,
            i_star,
            x_star: i_star / b,
            r: (1.0 - a) * b * c,
            lambda,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from the poverty line instead of the critical income.
    pub fn from_poverty_line(
        a: f64,
        b: f64,
        c: f64,
        x_star: f64,
        lambda: f64,
        delta: f64,
    ) -> Result<Self> {
        let mut p = Self::new(a, b, c, x_star * b, lambda, delta)?;
        p.x_star = x_star;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.c, self.i_star, self.lambda, self.delta]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("model parameters must be finite"));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(invalid(format!("consumption rate a = {} not in (0, 1)", self.a)));
        }
        if self.b <= 0.0 || self.c <= 0.0 {
            return Err(invalid("b and c must be positive"));
        }
        if self.lambda <= 0.0 {
            return Err(invalid(format!("loss intensity {} must be positive", self.lambda)));
        }
        if self.delta <= 0.0 {
            return Err(invalid(format!("discount rate {} must be positive", self.delta)));
        }
        if self.i_star < 0.0 {
            return Err(invalid("critical income must be non-negative"));
        }
        Ok(())
    }

    /// Same household paying a continuous premium `premium` out of income:
    /// the effective income rate drops to `b - premium` while `I*` stays put.
    pub fn with_premium(&self, premium: f64) -> Result<Self> {
        let mut p = Self::new(
            self.a,
            self.b - premium,
            self.c,
            self.i_star,
            self.lambda,
            self.delta,
        )?;
        if premium == 0.0 {
            p.x_star = self.x_star;
        }
        Ok(p)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let p = Self { delta, ..*self };
        p.validate()?;
        Ok(p)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let p = Self { lambda, ..*self };
        p.validate()?;
        Ok(p)
    }

    /// Contraction modulus `lambda / (lambda + delta)` of the one-jump operator.
    pub fn kappa(&self) -> f64 {
        self.lambda / (self.lambda + self.delta)
    }
}
