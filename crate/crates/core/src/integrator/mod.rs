//! Integration of the modified problem `x′ = f(p(t,x))`, a set-valued Euler
//! scheme for the inclusion `x′ ∈ Kf(t,x)`, and an adaptive reference solver
//! for continuous right-hand sides.

mod euler;
mod reference;
mod rk4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVec;

pub use euler::{integrate_euler, integrate_inclusion_euler};
pub use reference::{reference_solution, reference_solution_at, MIN_REL_TOL};
pub use rk4::integrate_modified;

/// Evaluations whose projected point has `h` above this are counted as
/// outside the region.
pub const CONTAINMENT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4Events,
    Euler,
    SetvaluedEuler,
    ReferenceAdaptive,
}

impl Method {
    /// Convergence order of the fixed-step schemes.
    pub fn order(self) -> u32 {
        match self {
            Method::Rk4Events => 4,
            Method::Euler | Method::SetvaluedEuler => 1,
            Method::ReferenceAdaptive => 5,
        }
    }
}

/// How the set-valued Euler scheme picks a direction near a surface.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Centroid of the envelope samples.
    #[default]
    Center,
    /// One envelope sample drawn with the configured seed.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Defaults to `T / 1e5`.
    pub step: Option<f64>,
    /// Defaults to `1e-10 · T`.
    pub event_tol: Option<f64>,
    pub max_event_bisections: usize,
    pub selection: Selection,
    pub seed: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4Events,
            step: None,
            event_tol: None,
            max_event_bisections: 60,
            selection: Selection::Center,
            seed: 0,
        }
    }
}

/// Config with defaults filled in for a given horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolved {
    pub step: f64,
    pub event_tol: f64,
    pub max_event_bisections: usize,
}

impl IntegratorConfig {
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn resolve(&self, horizon: f64) -> Result<Resolved> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::usage(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let step = self.step.unwrap_or(horizon / 1e5);
        let event_tol = self.event_tol.unwrap_or(1e-10 * horizon);
        if !(step > 0.0 && step <= horizon) {
            return Err(Error::usage(format!(
                "step must lie in (0, {horizon}], got {step}"
            )));
        }
        if !(event_tol > 0.0 && event_tol < step) {
            return Err(Error::usage(format!(
                "event_tol must lie in (0, step), got {event_tol} with step {step}"
            )));
        }
        if self.max_event_bisections == 0 {
            return Err(Error::usage("max_event_bisections must be positive"));
        }
        Ok(Resolved {
            step,
            event_tol,
            max_event_bisections: self.max_event_bisections,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub surface: usize,
    pub level: f64,
    /// `+1` when the surface value increases through the level.
    pub direction: i8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `0 = t₀ < … < t_K = T`.
    pub times: Vec<f64>,
    pub states: Vec<StateVec>,
    /// Mean slope over `[tᵢ, tᵢ₊₁]` assembled from the stage values; one per step.
    pub derivs: Vec<StateVec>,
    pub events: Vec<Event>,
    pub method: Method,
    pub step: f64,
    /// Stage evaluations at which `p(t,x)` fell outside the region.
    pub outside_evaluations: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    pub fn last(&self) -> Option<(f64, &StateVec)> {
        Some((*self.times.last()?, self.states.last()?))
    }
}

/// Grid `t_k = k·h`, last point exactly `T` (a short final step absorbs the
/// remainder when `T/h` is not an integer).
pub(crate) fn fixed_grid(horizon: f64, step: f64) -> Vec<f64> {
    let k = (horizon / step - 1e-9).ceil().max(1.0) as usize;
    let mut times: Vec<f64> = (0..k).map(|i| i as f64 * step).collect();
    times.push(horizon);
    times
}

/// `x += dx` with a running compensation term.
pub(crate) fn compensated_add(x: &mut [f64], carry: &mut [f64], dx: &[f64]) {
    for ((xi, ci), di) in x.iter_mut().zip(carry.iter_mut()).zip(dx) {
        let y = di - *ci;
        let s = *xi + y;
        *ci = (s - *xi) - y;
        *xi = s;
    }
}

pub(crate) fn ensure_finite(x: &[f64], t: f64) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}
