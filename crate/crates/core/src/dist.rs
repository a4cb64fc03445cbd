//! Laws of the remaining proportion `Z` of capital after a loss.

use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossDistribution {
    /// `G(z) = z^alpha` on `[0, 1]`.
    Beta { alpha: f64 },
    /// `G(z) = 1 - (1 - z^p)^q` on `[0, 1]`.
    Kumaraswamy { p: f64, q: f64 },
}

impl LossDistribution {
    pub fn beta(alpha: f64) -> Result<Self> {
        let d = Self::Beta { alpha };
        d.validate()?;
        Ok(d)
    }

    pub fn kumaraswamy(p: f64, q: f64) -> Result<Self> {
        let d = Self::Kumaraswamy { p, q };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Beta { alpha } => alpha.is_finite() && alpha > 0.0,
            Self::Kumaraswamy { p, q } => p.is_finite() && q.is_finite() && p > 0.0 && q > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("shape parameters of {self:?} must be positive")))
        }
    }

    /// Shape `alpha` when the law is Beta(alpha, 1).
    pub fn beta_alpha(&self) -> Option<f64> {
        match *self {
            Self::Beta { alpha } => Some(alpha),
            Self::Kumaraswamy { .. } => None,
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if z >= 1.0 {
            return 1.0;
        }
        match *self {
            Self::Beta { alpha } => z.powf(alpha),
            Self::Kumaraswamy { p, q } => -(q * (-z.powf(p)).ln_1p()).exp_m1(),
        }
    }

    pub fn pdf(&self, z: f64) -> f64 {
        if z <= 0.0 || z >= 1.0 {
            return 0.0;
        }
        match *self {
            Self::Beta { alpha } => alpha * z.powf(alpha - 1.0),
            Self::Kumaraswamy { p, q } => {
                let zp = z.powf(p);
                p * q * zp / z * (1.0 - zp).powf(q - 1.0)
            }
        }
    }

    /// Inverse CDF at `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::Beta { alpha } => u.powf(1.0 / alpha),
            Self::Kumaraswamy { p, q } => {
                // 1 - (1 - u)^{1/q}, written to keep precision for small u
                let t = -((-u).ln_1p() / q).exp_m1();
                t.powf(1.0 / p)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Beta { alpha } => alpha / (alpha + 1.0),
            Self::Kumaraswamy { p, q } => {
                q * gamma(1.0 + 1.0 / p) * gamma(q) / gamma(1.0 + 1.0 / p + q)
            }
        }
    }

    /// `E[Z; Z < zeta]`.
    pub fn partial_mean(&self, zeta: f64) -> f64 {
        if zeta <= 0.0 {
            return 0.0;
        }
        let zeta = zeta.min(1.0);
        match *self {
            Self::Beta { alpha } => alpha / (alpha + 1.0) * zeta.powf(alpha + 1.0),
            Self::Kumaraswamy { p, q } => {
                // substitute t = z^p: q B(1 + 1/p, q) I_{zeta^p}(1 + 1/p, q)
                let s = 1.0 + 1.0 / p;
                q * beta(s, q) * beta_reg(s, q, zeta.powf(p))
            }
        }
    }
}

/// Inverse-CDF draw of `Z` from a uniform variate.
pub fn sample_z(dist: &LossDistribution, u: f64) -> f64 {
    dist.quantile(u)
}

pub fn mean_z(dist: &LossDistribution) -> f64 {
    dist.mean()
}
