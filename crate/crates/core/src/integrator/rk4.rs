use log::warn;

use super::{
    compensated_add, ensure_finite, fixed_grid, Event, IntegratorConfig, Method, Trajectory,
    CONTAINMENT_TOL,
};
use crate::error::{Error, Result};
use crate::regions::ViablePair;
use crate::rhs::{RhsModel, VectorField};
use crate::state::{check_dim, check_finite, StateVec};

/// More crossings than this inside one step means the trajectory is sliding
/// along a surface, which fixed-step splitting cannot follow.
const MAX_SPLITS_PER_STEP: usize = 1000;

/// `f(p(t,x))` with a counter for evaluations whose projection leaves `R`.
struct Projected<'a> {
    model: &'a RhsModel,
    pair: &'a ViablePair,
    py: Vec<f64>,
    outside: usize,
}

impl Projected<'_> {
    /// Stages use the branch of `cells` so that a step never mixes branches.
    fn eval(&mut self, t: f64, y: &[f64], cells: &[i64], out: &mut [f64]) -> Result<()> {
        let s = self.pair.project_into(t, y, &mut self.py);
        if self.pair.h(s, &self.py) > CONTAINMENT_TOL {
            self.outside += 1;
        }
        self.model.eval_in_cells_into(s, &self.py, cells, out)
    }

    fn signature(&mut self, t: f64, y: &[f64], out: &mut Vec<i64>) {
        let s = self.pair.project_into(t, y, &mut self.py);
        self.model.cell_signature(s, &self.py, out);
    }
}

struct Stages {
    k: [Vec<f64>; 4],
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Stages {
            k: std::array::from_fn(|_| vec![0.0; n]),
            y: vec![0.0; n],
            slope: vec![0.0; n],
        }
    }

    /// Classical RK4 slope over `[t, t+h]` from `x`, left in `self.slope`.
    fn step(
        &mut self,
        field: &mut Projected<'_>,
        cells: &[i64],
        t: f64,
        x: &[f64],
        h: f64,
    ) -> Result<()> {
        let n = x.len();
        let [k1, k2, k3, k4] = &mut self.k;
        field.eval(t, x, cells, k1)?;
        for i in 0..n {
            self.y[i] = x[i] + 0.5 * h * k1[i];
        }
        field.eval(t + 0.5 * h, &self.y, cells, k2)?;
        for i in 0..n {
            self.y[i] = x[i] + 0.5 * h * k2[i];
        }
        field.eval(t + 0.5 * h, &self.y, cells, k3)?;
        for i in 0..n {
            self.y[i] = x[i] + h * k3[i];
        }
        field.eval(t + h, &self.y, cells, k4)?;
        for i in 0..n {
            self.slope[i] = (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) / 6.0;
        }
        Ok(())
    }

    /// `x + h·slope` into `out` (uncompensated, for trial states).
    fn trial(
        &mut self,
        field: &mut Projected<'_>,
        cells: &[i64],
        t: f64,
        x: &[f64],
        h: f64,
        out: &mut [f64],
    ) -> Result<()> {
        self.step(field, cells, t, x, h)?;
        for i in 0..x.len() {
            out[i] = x[i] + h * self.slope[i];
        }
        Ok(())
    }
}

/// Fixed-step RK4 on `f̃(t,x) = f(p(t,x))` with event splitting.
///
/// Every stage of a step evaluates the branch selected at the step start
/// (frozen cells), so steps are smooth. After each step the branch cells of
/// every surface at `p(t,x)` are compared with those at the step start. A change is localized by bisection on the
/// substep length until the bracket is below `event_tol`; the step is split
/// just past the crossing and the crossed levels are logged. The stored grid
/// is the regular one; event points only appear in the event log.
pub fn integrate_modified(
    model: &RhsModel,
    pair: &ViablePair,
    x0: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    check_dim(model.dim(), x0)?;
    check_finite(x0)?;
    if pair.dim() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: pair.dim(),
        });
    }
    match config.method {
        Method::Rk4Events => {}
        Method::Euler => return super::euler::euler_modified(model, pair, x0, config),
        other => {
            return Err(Error::usage(format!(
                "integrate_modified runs rk4_events or euler, not {other:?}"
            )))
        }
    }
    let cfg = config.resolve(model.horizon())?;
    let h0 = pair.h(0.0, x0);
    if h0 > 0.0 {
        warn!(
            "initial point lies outside the region (h = {h0}); continuing with the modified field"
        );
    }

    let n = model.dim();
    let times = fixed_grid(model.horizon(), cfg.step);
    let mut field = Projected {
        model,
        pair,
        py: vec![0.0; n],
        outside: 0,
    };
    let mut stages = Stages::new(n);
    let mut states = Vec::with_capacity(times.len());
    let mut derivs = Vec::with_capacity(times.len() - 1);
    let mut events = Vec::new();

    let mut x = x0.to_vec();
    let mut carry = vec![0.0; n];
    let mut dx = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut sig_cur = Vec::new();
    let mut sig_new = Vec::new();
    let mut mean = vec![0.0; n];
    states.push(StateVec::from_vec_unchecked(x.clone()));
    field.signature(0.0, &x, &mut sig_cur);

    for w in times.windows(2) {
        let (t_start, t_next) = (w[0], w[1]);
        check_identity_on_region(pair, t_start, &x, &mut field.py)?;
        mean.iter_mut().for_each(|v| *v = 0.0);
        let mut t = t_start;
        let mut splits = 0;
        loop {
            let dt = t_next - t;
            stages.trial(&mut field, &sig_cur, t, &x, dt, &mut trial)?;
            ensure_finite(&trial, t_next)?;
            field.signature(t_next, &trial, &mut sig_new);
            if sig_new == sig_cur {
                accumulate(&mut mean, &stages.slope, dt);
                for (d, k) in dx.iter_mut().zip(&stages.slope) {
                    *d = dt * k;
                }
                compensated_add(&mut x, &mut carry, &dx);
                break;
            }

            // Bisect on the substep fraction: `lo` keeps the start cells.
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            let mut iterations = 0;
            while (hi - lo) * dt > cfg.event_tol {
                iterations += 1;
                if iterations > cfg.max_event_bisections {
                    let surface = first_changed(&sig_cur, &sig_new);
                    return Err(Error::EventLocalization {
                        surface,
                        lo: t + lo * dt,
                        hi: t + hi * dt,
                        iterations: iterations - 1,
                    });
                }
                let mid = 0.5 * (lo + hi);
                stages.trial(&mut field, &sig_cur, t, &x, mid * dt, &mut trial)?;
                field.signature(t + mid * dt, &trial, &mut sig_new);
                if sig_new == sig_cur {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }

            splits += 1;
            if splits > MAX_SPLITS_PER_STEP {
                return Err(Error::EventLocalization {
                    surface: first_changed(&sig_cur, &sig_new),
                    lo: t_start,
                    hi: t_next,
                    iterations: splits,
                });
            }
            let sub = if hi >= 1.0 { dt } else { hi * dt };
            let t_event = if hi >= 1.0 { t_next } else { t + sub };
            stages.step(&mut field, &sig_cur, t, &x, sub)?;
            accumulate(&mut mean, &stages.slope, sub);
            for (d, k) in dx.iter_mut().zip(&stages.slope) {
                *d = sub * k;
            }
            compensated_add(&mut x, &mut carry, &dx);
            ensure_finite(&x, t_event)?;
            field.signature(t_event, &x, &mut sig_new);
            log_crossings(model, t_event, &sig_cur, &sig_new, &mut events);
            std::mem::swap(&mut sig_cur, &mut sig_new);
            t = t_event;
            if t >= t_next {
                break;
            }
        }
        let width = t_next - t_start;
        derivs.push(StateVec::from_vec_unchecked(
            mean.iter().map(|v| v / width).collect(),
        ));
        states.push(StateVec::from_vec_unchecked(x.clone()));
        if sig_cur.is_empty() {
            continue;
        }
        // The stored state can differ from the trial state by rounding.
        field.signature(t_next, &x, &mut sig_new);
        if sig_new != sig_cur {
            log_crossings(model, t_next, &sig_cur, &sig_new, &mut events);
            std::mem::swap(&mut sig_cur, &mut sig_new);
        }
    }

    Ok(Trajectory {
        times,
        states,
        derivs,
        events,
        method: Method::Rk4Events,
        step: cfg.step,
        outside_evaluations: field.outside,
    })
}

fn accumulate(mean: &mut [f64], slope: &[f64], dt: f64) {
    for (m, s) in mean.iter_mut().zip(slope) {
        *m += dt * s;
    }
}

fn first_changed(a: &[i64], b: &[i64]) -> usize {
    a.iter().zip(b).position(|(x, y)| x != y).unwrap_or(0)
}

/// `p` must fix every point of `R`.
pub(crate) fn check_identity_on_region(
    pair: &ViablePair,
    t: f64,
    x: &[f64],
    buf: &mut [f64],
) -> Result<()> {
    if pair.h(t, x) > 0.0 {
        return Ok(());
    }
    let s = pair.project_into(t, x, buf);
    let moved = s != t
        || buf
            .iter()
            .zip(x)
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()));
    if moved {
        let mut witness = vec![t];
        witness.extend_from_slice(x);
        return Err(Error::InconsistentPair {
            message: "projection moves a point of the region".into(),
            witness,
        });
    }
    Ok(())
}

/// One event per level between the old and new cells.
fn log_crossings(model: &RhsModel, t: f64, before: &[i64], after: &[i64], events: &mut Vec<Event>) {
    for (si, (&c0, &c1)) in before.iter().zip(after).enumerate() {
        let levels = &model.surfaces()[si].levels;
        if c1 > c0 {
            for c in c0..c1 {
                if let Some(level) = levels.upper_level(c) {
                    events.push(Event {
                        time: t,
                        surface: si,
                        level,
                        direction: 1,
                    });
                }
            }
        } else {
            for c in (c1 + 1..=c0).rev() {
                if let Some(level) = levels.lower_level(c) {
                    events.push(Event {
                        time: t,
                        surface: si,
                        level,
                        direction: -1,
                    });
                }
            }
        }
    }
}
