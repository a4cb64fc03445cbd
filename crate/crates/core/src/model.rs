//! The household capital process: deterministic growth between loss events,
//! proportional losses at Poisson times, and paths controlled by a threshold.

use rand::RngCore;

use crate::error::{invalid, Error, Result};
use crate::law::LossLaw;
use crate::params::ModelParams;
use crate::rng::open_unit;

/// Capital after growing for `t` from `x0`: exponential above the poverty line, frozen below.
#[inline]
pub fn flow(x0: f64, t: f64, params: &ModelParams) -> f64 {
    if x0 > params.x_star {
        (x0 - params.x_star) * (params.r * t).exp() + params.x_star
    } else {
        x0
    }
}

/// Time for the flow to carry `from` up to `to` (`x_star < from <= to`).
#[inline]
pub fn time_to_reach(from: f64, to: f64, params: &ModelParams) -> f64 {
    ((to - params.x_star) / (from - params.x_star)).ln() / params.r
}

pub fn apply_loss(x: f64, z: f64) -> Result<f64> {
    if !(z > 0.0 && z < 1.0) {
        return Err(invalid(format!("remaining proportion {z} not in (0, 1)")));
    }
    Ok(x * z)
}

/// Inject `y - x` whenever capital drops strictly below `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdStrategy {
    pub y: f64,
}

impl ThresholdStrategy {
    pub fn new(y: f64, params: &ModelParams) -> Result<Self> {
        if !(y >= params.x_star) || !y.is_finite() {
            return Err(invalid(format!(
                "threshold {y} below the poverty line {}",
                params.x_star
            )));
        }
        Ok(Self { y })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub z: f64,
    pub pre_loss_capital: f64,
    pub post_loss_capital: f64,
    pub transfer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Top-up paid at time 0 when the path starts below the threshold.
    pub initial_transfer: f64,
    pub events: Vec<Event>,
    pub stop_time: f64,
    /// `false` when the horizon was reached before the first transfer.
    pub stopped_by_transfer: bool,
    pub discounted_transfer_total: f64,
}

impl Trajectory {
    /// Deficit `y - X` at the first transfer, if one happened.
    pub fn deficit(&self) -> Option<f64> {
        if self.stopped_by_transfer {
            self.events.last().map(|e| e.transfer)
        } else {
            None
        }
    }
}

/// One loss event: waiting time since the previous event and the remaining proportion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shock {
    pub wait: f64,
    pub remaining: f64,
}

pub trait ShockSource {
    fn next_shock(&mut self) -> Shock;
}

/// Exponential waits by inverse transform and remaining proportions from `law`,
/// two uniforms per event.
pub struct RandomShocks<'a, R> {
    rng: R,
    lambda: f64,
    law: &'a LossLaw,
}

impl<'a, R: RngCore> RandomShocks<'a, R> {
    pub fn new(rng: R, lambda: f64, law: &'a LossLaw) -> Self {
        Self { rng, lambda, law }
    }
}

impl<R: RngCore> ShockSource for RandomShocks<'_, R> {
    #[inline]
    fn next_shock(&mut self) -> Shock {
        let wait = -open_unit(&mut self.rng).ln() / self.lambda;
        let remaining = self.law.sample(open_unit(&mut self.rng));
        Shock { wait, remaining }
    }
}

/// Scripted shocks, mostly for tests; repeats the last shock when exhausted.
pub struct FixedShocks {
    shocks: Vec<Shock>,
    next: usize,
}

impl FixedShocks {
    pub fn new(shocks: Vec<Shock>) -> Self {
        assert!(!shocks.is_empty());
        Self { shocks, next: 0 }
    }
}

impl ShockSource for FixedShocks {
    fn next_shock(&mut self) -> Shock {
        let s = self.shocks[self.next.min(self.shocks.len() - 1)];
        self.next += 1;
        s
    }
}

/// How a controlled run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Stop {
    /// `Some((time, deficit))` at the first drop below `y`, `None` if truncated.
    pub transfer: Option<(f64, f64)>,
}

/// Advance from `x0 >= y` until the first drop below `y` or the horizon.
#[inline]
pub(crate) fn run_to_threshold<S: ShockSource>(
    x0: f64,
    y: f64,
    params: &ModelParams,
    horizon: f64,
    shocks: &mut S,
    mut on_event: impl FnMut(Event),
) -> Result<Stop> {
    let mut t = 0.0;
    let mut x = x0;
    loop {
        let shock = shocks.next_shock();
        let next_t = t + shock.wait;
        if next_t > horizon {
            return Ok(Stop { transfer: None });
        }
        let pre = flow(x, shock.wait, params);
        if !pre.is_finite() {
            return Err(Error::NonFiniteCapital {
                time: next_t,
                capital: pre,
            });
        }
        let post = pre * shock.remaining;
        t = next_t;
        if post < y {
            let deficit = y - post;
            on_event(Event {
                time: t,
                z: shock.remaining,
                pre_loss_capital: pre,
                post_loss_capital: y,
                transfer: deficit,
            });
            return Ok(Stop {
                transfer: Some((t, deficit)),
            });
        }
        on_event(Event {
            time: t,
            z: shock.remaining,
            pre_loss_capital: pre,
            post_loss_capital: post,
            transfer: 0.0,
        });
        x = post;
    }
}

/// Simulate one path under `strategy` with shocks drawn from `rng`.
pub fn simulate_path<R: RngCore>(
    x0: f64,
    strategy: ThresholdStrategy,
    params: &ModelParams,
    law: &LossLaw,
    horizon: f64,
    rng: R,
) -> Result<Trajectory> {
    let mut shocks = RandomShocks::new(rng, params.lambda, law);
    simulate_path_with(x0, strategy, params, horizon, &mut shocks)
}

/// Simulate one path under `strategy` with an arbitrary shock source.
pub fn simulate_path_with<S: ShockSource>(
    x0: f64,
    strategy: ThresholdStrategy,
    params: &ModelParams,
    horizon: f64,
    shocks: &mut S,
) -> Result<Trajectory> {
    if !(x0 >= 0.0) || !(horizon > 0.0) {
        return Err(invalid("initial capital must be >= 0 and horizon > 0"));
    }
    let y = strategy.y;
    let initial_transfer = (y - x0).max(0.0);
    let mut events = Vec::new();
    let stop = run_to_threshold(x0.max(y), y, params, horizon, shocks, |e| events.push(e))?;
    let (stop_time, stopped_by_transfer, discounted) = match stop.transfer {
        Some((t, j)) => (t, true, j * (-params.delta * t).exp()),
        None => (horizon, false, 0.0),
    };
    Ok(Trajectory {
        initial_transfer,
        events,
        stop_time,
        stopped_by_transfer,
        discounted_transfer_total: initial_transfer + discounted,
    })
}
