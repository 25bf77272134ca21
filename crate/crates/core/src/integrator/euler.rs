use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    ensure_finite, fixed_grid, IntegratorConfig, Method, Selection, Trajectory, CONTAINMENT_TOL,
};
use crate::error::{Error, Result};
use crate::krasovskij::EnvelopeProbe;
use crate::regions::ViablePair;
use crate::rhs::RhsModel;
use crate::state::{check_dim, check_finite, StateVec};

/// Probe size used to pick set-valued directions.
const SELECTION_SAMPLES: usize = 64;

/// Plain explicit Euler on `f(p(t,x))`. Crossings are not localized.
pub(crate) fn euler_modified(
    model: &RhsModel,
    pair: &ViablePair,
    x0: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut py = vec![0.0; model.dim()];
    let mut outside = 0;
    let mut tr = run(model, x0, config, Method::Euler, |t, x, out| {
        let s = pair.project_into(t, x, &mut py);
        if pair.h(s, &py) > CONTAINMENT_TOL {
            outside += 1;
        }
        model.eval_into(s, &py, out)
    })?;
    tr.outside_evaluations = outside;
    Ok(tr)
}

/// Plain explicit Euler on `f`.
pub fn integrate_euler(
    model: &RhsModel,
    x0: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    check_dim(model.dim(), x0)?;
    check_finite(x0)?;
    run(model, x0, config, Method::Euler, |t, x, out| {
        model.eval_into(t, x, out)
    })
}

/// Explicit Euler for `x′ ∈ Kf(t,x)`: within `event_tol` of a surface the
/// direction is taken from the envelope samples at radius `event_tol`
/// (their centroid, or one drawn with the configured seed) instead of the
/// branch value. Away from surfaces this is plain Euler.
pub fn integrate_inclusion_euler(
    model: &RhsModel,
    x0: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    check_dim(model.dim(), x0)?;
    check_finite(x0)?;
    if config.method != Method::SetvaluedEuler {
        return Err(Error::usage(format!(
            "integrate_inclusion_euler needs method setvalued_euler, got {:?}",
            config.method
        )));
    }
    let cfg = config.resolve(model.horizon())?;
    let probe = EnvelopeProbe::new(model.dim(), SELECTION_SAMPLES, config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run(model, x0, config, Method::SetvaluedEuler, |t, x, out| {
        if model.surface_distance_unchecked(t, x) >= cfg.event_tol {
            return model.eval_into(t, x, out);
        }
        let sample = probe.envelope_samples(model, t, x, cfg.event_tol)?;
        match config.selection {
            Selection::Center => {
                let k = sample.points.len() as f64;
                out.iter_mut().for_each(|v| *v = 0.0);
                for p in &sample.points {
                    for (o, v) in out.iter_mut().zip(p.iter()) {
                        *o += v / k;
                    }
                }
            }
            Selection::Random => {
                let i = rng.random_range(0..sample.points.len());
                out.copy_from_slice(&sample.points[i]);
            }
        }
        Ok(())
    })
}

fn run<F>(
    model: &RhsModel,
    x0: &[f64],
    config: &IntegratorConfig,
    method: Method,
    mut field: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let cfg = config.resolve(model.horizon())?;
    let times = fixed_grid(model.horizon(), cfg.step);
    let mut states = Vec::with_capacity(times.len());
    let mut derivs = Vec::with_capacity(times.len() - 1);
    let mut x = x0.to_vec();
    let mut z = vec![0.0; x.len()];
    states.push(StateVec::from_vec_unchecked(x.clone()));
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        field(w[0], &x, &mut z)?;
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += dt * zi;
        }
        ensure_finite(&x, w[1])?;
        derivs.push(StateVec::from_vec_unchecked(z.clone()));
        states.push(StateVec::from_vec_unchecked(x.clone()));
    }
    Ok(Trajectory {
        times,
        states,
        derivs,
        events: Vec::new(),
        method,
        step: cfg.step,
        outside_evaluations: 0,
    })
}
