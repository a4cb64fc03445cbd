use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypergeometric series diverges at z = 1 (r - p - q = {excess} <= 0)")]
    GaussDivergence { excess: f64 },

    #[error("hypergeometric series did not converge after {terms} terms (partial sum {partial_sum:e}, last term {last_term:e})")]
    SeriesNonConvergence {
        terms: usize,
        partial_sum: f64,
        last_term: f64,
    },

    #[error("quadrature did not converge (achieved tolerance {achieved:e})")]
    QuadratureNonConvergence { achieved: f64 },

    #[error("non-finite capital {capital} at time {time}; reduce the horizon or the growth rate")]
    NonFiniteCapital { time: f64, capital: f64 },

    #[error("no transfer events observed; increase T or N")]
    NoTransferEvents,

    #[error("fixed-point iteration cap of {cap} exceeded (last sup-norm change {change:e}); contraction factor {kappa} is close to 1, tighten quadrature or leave acceleration off")]
    IterationCap { cap: usize, change: f64, kappa: f64 },

    #[error("capital {x} is outside the grid interior ({lo}, {hi})")]
    OutsideGrid { x: f64, lo: f64, hi: f64 },

    #[error("premium {premium} exceeds income generation {b}; model trapped with certainty")]
    PremiumExceedsIncome { premium: f64, b: f64 },

    #[error("closed form unavailable; use mc or fixed-point")]
    ClosedFormUnavailable,

    #[error("Monte Carlo noise {noise:e} exceeds the objective range {range:e} of the bracket; try n_paths >= {suggested_n}")]
    NoisyObjective {
        noise: f64,
        range: f64,
        suggested_n: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
