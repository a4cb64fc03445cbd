//! Microinsurance covers, the expected-value premium, and the insured model.

use crate::dist::LossDistribution;
use crate::error::{invalid, Error, Result};
use crate::law::LossLaw;
use crate::params::ModelParams;
use crate::quadrature::tanh_sinh;

/// Retained-loss rule `R(u)` applied to the proportional loss `u = 1 - Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoverKind {
    /// `R(u) = eta u`.
    Proportional { eta: f64 },
    /// `R(u) = min(u, l)`.
    ExcessOfLoss { l: f64 },
    /// `R(u) = u` if `u <= limit`, else 0.
    TotalLoss { limit: f64 },
}

impl CoverKind {
    pub fn parameter(&self) -> f64 {
        match *self {
            Self::Proportional { eta } => eta,
            Self::ExcessOfLoss { l } => l,
            Self::TotalLoss { limit } => limit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.parameter();
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(invalid(format!("cover parameter {v} outside [0, 1]")))
        }
    }

    pub fn retained(&self, u: f64) -> f64 {
        match *self {
            Self::Proportional { eta } => eta * u,
            Self::ExcessOfLoss { l } => u.min(l),
            Self::TotalLoss { limit } => {
                if u <= limit {
                    u
                } else {
                    0.0
                }
            }
        }
    }

    /// `W = 1 - R(1 - Z)`.
    #[inline]
    pub fn remaining(&self, z: f64) -> f64 {
        match *self {
            Self::Proportional { eta } => 1.0 - eta * (1.0 - z),
            Self::ExcessOfLoss { l } => z.max(1.0 - l),
            Self::TotalLoss { limit } => {
                if z >= 1.0 - limit {
                    z
                } else {
                    1.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cover {
    pub kind: CoverKind,
    /// Safety loading of the expected-value premium.
    pub gamma: f64,
}

impl Cover {
    pub fn new(kind: CoverKind, gamma: f64) -> Result<Self> {
        kind.validate()?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("safety loading {gamma} must be >= 0")));
        }
        Ok(Self { kind, gamma })
    }
}

/// Premium rate `(1 + gamma) lambda E[1 - Z - R(1 - Z)]`.
///
/// Analytic for the proportional cover and for Beta(alpha, 1) losses;
/// quadrature otherwise.
pub fn premium_rate(cover: &Cover, lambda: f64, dist: &LossDistribution) -> Result<f64> {
    let load = (1.0 + cover.gamma) * lambda;
    match (cover.kind, dist.beta_alpha()) {
        (CoverKind::Proportional { eta }, _) => Ok(load * (1.0 - eta) * (1.0 - dist.mean())),
        (CoverKind::ExcessOfLoss { l }, Some(alpha)) => {
            Ok(load * (1.0 - l).powf(alpha + 1.0) / (alpha + 1.0))
        }
        (CoverKind::TotalLoss { limit }, Some(alpha)) => {
            let u = 1.0 - limit;
            Ok(load * (u.powf(alpha) - alpha / (alpha + 1.0) * u.powf(alpha + 1.0)))
        }
        _ => premium_rate_quadrature(cover, lambda, dist),
    }
}

/// Premium rate by quadrature of the ceded loss against the density of `Z`,
/// split where the retained-loss rule has a kink or jump.
pub fn premium_rate_quadrature(cover: &Cover, lambda: f64, dist: &LossDistribution) -> Result<f64> {
    let ceded = |z: f64| {
        let u = 1.0 - z;
        u - cover.kind.retained(u)
    };
    let split = match cover.kind {
        CoverKind::Proportional { .. } => None,
        CoverKind::ExcessOfLoss { l } => Some(1.0 - l),
        CoverKind::TotalLoss { limit } => Some(1.0 - limit),
    };
    let piece = |a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        tanh_sinh(a, b, 1e-15, |z, _, _| ceded(z) * dist.pdf(z))
    };
    let total = match split {
        Some(s) if s > 0.0 && s < 1.0 => piece(0.0, s)? + piece(s, 1.0)?,
        _ => piece(0.0, 1.0)?,
    };
    Ok((1.0 + cover.gamma) * lambda * total)
}

/// The household after buying `cover`: income reduced by the premium, losses
/// replaced by the retained law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsuredModel {
    pub base: ModelParams,
    pub cover: Cover,
    pub premium: f64,
    /// Base parameters with `b` replaced by `b - premium`.
    pub params: ModelParams,
    pub law: LossLaw,
}

impl InsuredModel {
    pub fn x_star(&self) -> f64 {
        self.params.x_star
    }

    pub fn r(&self) -> f64 {
        self.params.r
    }
}

pub fn build_insured_model(
    base: &ModelParams,
    cover: &Cover,
    dist: &LossDistribution,
) -> Result<InsuredModel> {
    let premium = premium_rate(cover, base.lambda, dist)?;
    if premium >= base.b {
        return Err(Error::PremiumExceedsIncome {
            premium,
            b: base.b,
        });
    }
    let params = base.with_premium(premium)?;
    Ok(InsuredModel {
        base: *base,
        cover: *cover,
        premium,
        params,
        law: LossLaw::Covered {
            dist: *dist,
            cover: cover.kind,
        },
    })
}

pub fn sample_w(cover: &CoverKind, dist: &LossDistribution, u: f64) -> f64 {
    cover.remaining(dist.quantile(u))
}

pub fn cdf_w(cover: &CoverKind, dist: &LossDistribution, w: f64) -> f64 {
    LossLaw::Covered {
        dist: *dist,
        cover: *cover,
    }
    .cdf(w)
}
