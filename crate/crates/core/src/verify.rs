//! A-posteriori certificates for computed trajectories: region membership,
//! differential residual off the surfaces, and time spent near surfaces.
//!
//! These bound grid behavior only; absolute continuity of the underlying
//! solution is not something a discrete check can establish.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{Method, Trajectory};
use crate::regions::ViablePair;
use crate::rhs::{RhsModel, VectorField};

/// Residual constant `C` in the tolerance `C·h⁴·T` for RK4 runs. The band
/// example measures about 0.1; the ball example up to about 1.6.
pub const RESIDUAL_CONSTANT: f64 = 10.0;
/// Default surface-time tolerance as a fraction of the horizon.
pub const SURFACE_TIME_TOL: f64 = 1e-3;
/// At most this many violation times are kept per certificate.
const MAX_VIOLATIONS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Grid times where the condition failed (first few).
    pub violations: Vec<f64>,
}

impl Certificate {
    fn new(value: f64, tolerance: f64, violations: Vec<f64>) -> Self {
        Certificate {
            value,
            tolerance,
            passed: value <= tolerance,
            violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub max_h: f64,
    pub residual: f64,
    pub surface_time_fraction: f64,
    pub region: Certificate,
    /// Absent when the integration method has no calibrated tolerance.
    pub residual_check: Option<Certificate>,
    pub surface_time: Certificate,
    pub notes: Vec<String>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.region.passed
            && self.surface_time.passed
            && self.residual_check.as_ref().is_none_or(|c| c.passed)
    }

    pub fn violations(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.region.violations.clone();
        if let Some(c) = &self.residual_check {
            v.extend(&c.violations);
        }
        v.extend(&self.surface_time.violations);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

fn check_nonempty(traj: &Trajectory) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::usage("empty trajectory"));
    }
    Ok(())
}

/// `max_i h(tᵢ, xᵢ)`; passes iff at most `tol`.
pub fn certify_region(traj: &Trajectory, pair: &ViablePair, tol: f64) -> Result<Certificate> {
    check_nonempty(traj)?;
    let mut max_h = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let h = pair.h(*t, x);
        max_h = max_h.max(h);
        if h > tol && violations.len() < MAX_VIOLATIONS {
            violations.push(*t);
        }
    }
    Ok(Certificate::new(max_h, tol, violations))
}

/// Residual tolerance `C·h⁴·T` plus a rounding floor.
pub fn residual_tolerance(step: f64, horizon: f64, max_slope: f64) -> f64 {
    RESIDUAL_CONSTANT * step.powi(4) * horizon + 64.0 * f64::EPSILON * (1.0 + max_slope) * horizon
}

/// Discrete L¹ residual `Σ ‖dᵢ − Sᵢ‖·Δtᵢ` between each step's mean slope
/// `dᵢ` (from the integrator stages) and the Simpson average `Sᵢ` of `f`
/// over the step, with the midpoint state from cubic Hermite interpolation.
///
/// Steps are skipped when an endpoint lies within `delta_surface` of a
/// surface, when an event was logged inside the step, or when the branch
/// cells differ between the endpoints and the midpoint: `f` is not smooth
/// across such a step, so its Simpson average says nothing about the
/// solution.
pub fn residual(
    traj: &Trajectory,
    model: &RhsModel,
    delta_surface: f64,
) -> Result<(f64, Vec<f64>, usize)> {
    check_nonempty(traj)?;
    if traj.derivs.len() + 1 != traj.len() {
        return Err(Error::usage(
            "trajectory has no per-step derivative samples",
        ));
    }
    let n = model.dim();
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    let mut fm = vec![0.0; n];
    let mut xm = vec![0.0; n];
    let (mut s0, mut s1, mut sm) = (Vec::new(), Vec::new(), Vec::new());
    let mut total = 0.0;
    let mut worst = Vec::new();
    let mut skipped = 0;
    let mut next_event = 0;
    for i in 0..traj.derivs.len() {
        let (t0, t1) = (traj.times[i], traj.times[i + 1]);
        let (x0, x1) = (&traj.states[i], &traj.states[i + 1]);
        let dt = t1 - t0;
        let mut has_event = false;
        while next_event < traj.events.len() && traj.events[next_event].time <= t1 {
            has_event |= traj.events[next_event].time > t0;
            next_event += 1;
        }
        if has_event
            || model.surface_distance_unchecked(t0, x0) <= delta_surface
            || model.surface_distance_unchecked(t1, x1) <= delta_surface
        {
            skipped += 1;
            continue;
        }
        model.eval_into(t0, x0, &mut f0)?;
        model.eval_into(t1, x1, &mut f1)?;
        for k in 0..n {
            xm[k] = 0.5 * (x0[k] + x1[k]) + dt * (f0[k] - f1[k]) / 8.0;
        }
        let tm = t0 + 0.5 * dt;
        model.cell_signature(t0, x0, &mut s0);
        model.cell_signature(t1, x1, &mut s1);
        model.cell_signature(tm, &xm, &mut sm);
        if s0 != s1 || s0 != sm {
            skipped += 1;
            continue;
        }
        model.eval_into(tm, &xm, &mut fm)?;
        let d = &traj.derivs[i];
        let mut sq = 0.0;
        for k in 0..n {
            let simpson = (f0[k] + 4.0 * fm[k] + f1[k]) / 6.0;
            sq += (d[k] - simpson).powi(2);
        }
        let local = sq.sqrt() * dt;
        total += local;
        if worst.len() < MAX_VIOLATIONS && local > 0.0 {
            worst.push((local, t0));
        }
        if worst.len() == MAX_VIOLATIONS {
            worst.sort_by(|a, b| b.0.total_cmp(&a.0));
            worst.truncate(MAX_VIOLATIONS / 2);
        }
    }
    worst.sort_by(|a, b| b.0.total_cmp(&a.0));
    let times = worst.iter().take(10).map(|w| w.1).collect();
    Ok((total, times, skipped))
}

/// [`residual`] against the RK4 tolerance; fixed-step RK4 runs only.
pub fn certify_residual(
    traj: &Trajectory,
    model: &RhsModel,
    delta_surface: f64,
) -> Result<Certificate> {
    if traj.method != Method::Rk4Events {
        return Err(Error::usage(format!(
            "residual tolerance is calibrated for rk4_events runs, not {:?}",
            traj.method
        )));
    }
    let (value, worst, _) = residual(traj, model, delta_surface)?;
    let max_slope = traj
        .derivs
        .iter()
        .map(|d| crate::state::norm(d))
        .fold(0.0, f64::max);
    let horizon = traj.times.last().unwrap() - traj.times[0];
    let tol = residual_tolerance(traj.step, horizon, max_slope);
    let mut c = Certificate::new(value, tol, Vec::new());
    if !c.passed {
        c.violations = worst;
    }
    Ok(c)
}

/// Fraction of `[t₀, T]` covered by steps whose left grid point lies within
/// `delta` of a surface. Zero without surfaces.
pub fn surface_time_fraction(
    traj: &Trajectory,
    model: &RhsModel,
    delta: f64,
) -> Result<(f64, Vec<f64>)> {
    check_nonempty(traj)?;
    if model.surfaces().is_empty() || traj.len() < 2 {
        return Ok((0.0, Vec::new()));
    }
    let mut near = 0.0;
    let mut times = Vec::new();
    for i in 0..traj.len() - 1 {
        let (t, x) = (traj.times[i], &traj.states[i]);
        if model.surface_distance_unchecked(t, x) < delta {
            near += traj.times[i + 1] - t;
            if times.len() < MAX_VIOLATIONS {
                times.push(t);
            }
        }
    }
    let total = traj.times.last().unwrap() - traj.times[0];
    Ok(((near / total).clamp(0.0, 1.0), times))
}

/// [`surface_time_fraction`] against `tol`.
pub fn surface_time(
    traj: &Trajectory,
    model: &RhsModel,
    delta: f64,
    tol: f64,
) -> Result<Certificate> {
    let (fraction, times) = surface_time_fraction(traj, model, delta)?;
    let mut c = Certificate::new(fraction, tol, Vec::new());
    if !c.passed {
        c.violations = times;
    }
    Ok(c)
}

/// Tolerances for [`certify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertOptions {
    pub region_tol: f64,
    /// Defaults to `10·event_tol`.
    pub delta_surface: Option<f64>,
    pub surface_delta: f64,
    pub surface_time_tol: f64,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions {
            region_tol: 1e-6,
            delta_surface: None,
            surface_delta: 1e-6,
            surface_time_tol: SURFACE_TIME_TOL,
        }
    }
}

/// All certificates for one trajectory.
pub fn certify(
    traj: &Trajectory,
    model: &RhsModel,
    pair: &ViablePair,
    event_tol: f64,
    opts: &CertOptions,
) -> Result<CertReport> {
    let region = certify_region(traj, pair, opts.region_tol)?;
    let delta_surface = opts.delta_surface.unwrap_or(10.0 * event_tol);
    let mut notes = vec![
        "grid-level certificate: absolute continuity between grid points is not verified"
            .to_string(),
    ];
    let (residual_value, residual_check) = if traj.method == Method::Rk4Events {
        let c = certify_residual(traj, model, delta_surface)?;
        (c.value, Some(c))
    } else {
        notes.push(format!("residual not certified for {:?} runs", traj.method));
        (residual(traj, model, delta_surface)?.0, None)
    };
    let surface_time = surface_time(traj, model, opts.surface_delta, opts.surface_time_tol)?;
    Ok(CertReport {
        max_h: region.value,
        residual: residual_value,
        surface_time_fraction: surface_time.value,
        region,
        residual_check,
        surface_time,
        notes,
    })
}
