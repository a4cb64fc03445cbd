//! Law of the remaining proportion after a loss, with or without a cover.
//!
//! A covered law `W = 1 - R(1 - Z)` is an absolutely continuous part on an
//! interval plus at most one atom; quadrature elsewhere splits at both.

use crate::dist::LossDistribution;
use crate::insurance::CoverKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossLaw {
    Plain(LossDistribution),
    Covered {
        dist: LossDistribution,
        cover: CoverKind,
    },
}

impl LossLaw {
    pub fn new(dist: LossDistribution, cover: Option<CoverKind>) -> Self {
        match cover {
            Some(cover) => Self::Covered { dist, cover },
            None => Self::Plain(dist),
        }
    }

    pub fn base(&self) -> &LossDistribution {
        match self {
            Self::Plain(d) | Self::Covered { dist: d, .. } => d,
        }
    }

    /// Shape `alpha` when this is an uncovered Beta(alpha, 1) law.
    pub fn beta_alpha(&self) -> Option<f64> {
        match self {
            Self::Plain(d) => d.beta_alpha(),
            Self::Covered { .. } => None,
        }
    }

    /// Draw by transforming an inverse-CDF draw of `Z`.
    #[inline]
    pub fn sample(&self, u: f64) -> f64 {
        match *self {
            Self::Plain(d) => d.quantile(u),
            Self::Covered { dist, cover } => cover.remaining(dist.quantile(u)),
        }
    }

    /// `P(W < zeta)`.
    pub fn prob_below(&self, zeta: f64) -> f64 {
        let (d, cover) = match *self {
            Self::Plain(d) => return d.cdf(zeta),
            Self::Covered { dist, cover } => (dist, cover),
        };
        match cover {
            CoverKind::Proportional { eta } => {
                if eta == 0.0 {
                    if zeta > 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    d.cdf((zeta - 1.0 + eta) / eta)
                }
            }
            CoverKind::ExcessOfLoss { l } => {
                if zeta <= 1.0 - l {
                    0.0
                } else {
                    d.cdf(zeta)
                }
            }
            CoverKind::TotalLoss { limit } => {
                if zeta <= 1.0 - limit {
                    0.0
                } else if zeta <= 1.0 {
                    d.cdf(zeta) - d.cdf(1.0 - limit)
                } else {
                    1.0
                }
            }
        }
    }

    /// `P(W <= w)`, including any atom at `w`.
    pub fn cdf(&self, w: f64) -> f64 {
        let atom = match self.atom() {
            Some((at, mass)) if at == w => mass,
            _ => 0.0,
        };
        (self.prob_below(w) + atom).min(1.0)
    }

    /// `E[W; W < zeta]`.
    pub fn partial_mean_below(&self, zeta: f64) -> f64 {
        let (d, cover) = match *self {
            Self::Plain(d) => return d.partial_mean(zeta),
            Self::Covered { dist, cover } => (dist, cover),
        };
        match cover {
            CoverKind::Proportional { eta } => {
                if eta == 0.0 {
                    return if zeta > 1.0 { 1.0 } else { 0.0 };
                }
                let s = ((zeta - 1.0 + eta) / eta).clamp(0.0, 1.0);
                (1.0 - eta) * d.cdf(s) + eta * d.partial_mean(s)
            }
            CoverKind::ExcessOfLoss { l } => {
                let u = 1.0 - l;
                if zeta <= u {
                    0.0
                } else {
                    u * d.cdf(u) + d.partial_mean(zeta) - d.partial_mean(u)
                }
            }
            CoverKind::TotalLoss { limit } => {
                let u = 1.0 - limit;
                if zeta <= u {
                    0.0
                } else {
                    let body = d.partial_mean(zeta) - d.partial_mean(u);
                    if zeta > 1.0 {
                        body + d.cdf(u)
                    } else {
                        body
                    }
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.partial_mean_below(f64::INFINITY)
    }

    /// Density of the absolutely continuous part.
    #[inline]
    pub fn density(&self, w: f64) -> f64 {
        let (d, cover) = match *self {
            Self::Plain(d) => return d.pdf(w),
            Self::Covered { dist, cover } => (dist, cover),
        };
        match cover {
            CoverKind::Proportional { eta } => {
                if eta == 0.0 || w <= 1.0 - eta {
                    0.0
                } else {
                    d.pdf((w - 1.0 + eta) / eta) / eta
                }
            }
            CoverKind::ExcessOfLoss { l } => {
                if w <= 1.0 - l {
                    0.0
                } else {
                    d.pdf(w)
                }
            }
            CoverKind::TotalLoss { limit } => {
                if w <= 1.0 - limit {
                    0.0
                } else {
                    d.pdf(w)
                }
            }
        }
    }

    /// Interval carrying the absolutely continuous part, if it has positive mass.
    pub fn continuous_support(&self) -> Option<(f64, f64)> {
        let lo = match *self {
            Self::Plain(_) => return Some((0.0, 1.0)),
            Self::Covered { cover, .. } => match cover {
                CoverKind::Proportional { eta } => 1.0 - eta,
                CoverKind::ExcessOfLoss { l } => 1.0 - l,
                CoverKind::TotalLoss { limit } => 1.0 - limit,
            },
        };
        if lo < 1.0 {
            Some((lo, 1.0))
        } else {
            None
        }
    }

    /// Point mass `(location, mass)` if the cover creates one.
    pub fn atom(&self) -> Option<(f64, f64)> {
        let (d, cover) = match *self {
            Self::Plain(_) => return None,
            Self::Covered { dist, cover } => (dist, cover),
        };
        let (at, mass) = match cover {
            CoverKind::Proportional { eta } => (1.0, if eta == 0.0 { 1.0 } else { 0.0 }),
            CoverKind::ExcessOfLoss { l } => (1.0 - l, d.cdf(1.0 - l)),
            CoverKind::TotalLoss { limit } => (1.0, d.cdf(1.0 - limit)),
        };
        if mass > 0.0 {
            Some((at, mass))
        } else {
            None
        }
    }
}
