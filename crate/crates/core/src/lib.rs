//! Optimal capital transfers to households exposed to proportional losses.
//!
//! Capital grows exponentially above the poverty line `x*`, stays frozen
//! below it, and is hit by proportional losses at Poisson times. A threshold
//! strategy injects `y - x` whenever capital drops below `y`. The crate
//! evaluates such strategies in closed form (Beta(alpha, 1) losses), by
//! Monte Carlo and by fixed-point iteration, checks candidates against the
//! HJB equation, searches for the best threshold and handles microinsurance
//! covers by rewriting the model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod dist;
pub mod error;
pub mod ide;
pub mod insurance;
pub mod interp;
pub mod law;
pub mod mc;
pub mod model;
pub mod optimizer;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use closed_form::{
    abc_params, compare_strategies, cost_c, cost_c_general, perpetual_d, value_threshold_closed,
    HypergeometricParams, Method, ThresholdValue, ValueEstimate, Verdict,
};
pub use dist::{mean_z, sample_z, LossDistribution};
pub use error::{Error, Result};
pub use ide::{solve_fixed_point, verify_supersolution, CapitalGrid, GridFunction};
pub use insurance::{build_insured_model, cdf_w, premium_rate, sample_w, Cover, CoverKind, InsuredModel};
pub use law::LossLaw;
pub use mc::{estimate_vy, estimate_vy_at_y, McConfig};
pub use model::{apply_loss, flow, simulate_path, ThresholdStrategy, Trajectory};
pub use optimizer::{optimize, Evaluator, OptimizeOptions, OptimizeResult};
pub use params::ModelParams;
pub use special::hyp2f1;
