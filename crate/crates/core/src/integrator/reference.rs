use super::{compensated_add, ensure_finite, Method, Trajectory};
use crate::error::{Error, Result};
use crate::rhs::RhsModel;
use crate::state::{check_dim, check_finite, StateVec};

/// Tightest accepted relative tolerance.
pub const MIN_REL_TOL: f64 = 1e-15;

const MAX_STEPS: usize = 50_000_000;

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    ],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) solution on `[0, T]`, reported on 1000
/// uniform intervals.
pub fn reference_solution(
    model: &RhsModel,
    x0: &[f64],
    horizon: f64,
    rel_tol: f64,
) -> Result<Trajectory> {
    let times = super::fixed_grid(horizon, horizon / 1000.0);
    reference_solution_at(model, x0, &times, rel_tol)
}

/// Adaptive Dormand–Prince 5(4) solution reported at `times` (strictly
/// increasing, starting at 0); steps are clipped to land on each output time.
///
/// Local error per step is held below `rel_tol · (1 + |x|)` componentwise.
/// The state is accumulated with compensated summation so that long runs at
/// tight tolerances are not dominated by rounding.
pub fn reference_solution_at(
    model: &RhsModel,
    x0: &[f64],
    times: &[f64],
    rel_tol: f64,
) -> Result<Trajectory> {
    check_dim(model.dim(), x0)?;
    check_finite(x0)?;
    if !model.surfaces().is_empty() {
        return Err(Error::usage(
            "reference mode needs a model without discontinuity surfaces",
        ));
    }
    if !(MIN_REL_TOL..1.0).contains(&rel_tol) {
        return Err(Error::usage(format!(
            "rel_tol must lie in [{MIN_REL_TOL}, 1), got {rel_tol}"
        )));
    }
    let ok_times = !times.is_empty()
        && times[0] == 0.0
        && times.windows(2).all(|w| w[0] < w[1])
        && *times.last().unwrap() <= model.horizon() * (1.0 + 1e-12);
    if !ok_times {
        return Err(Error::usage(
            "output times must start at 0, increase strictly and stay within the horizon",
        ));
    }

    let n = model.dim();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut y = vec![0.0; n];
    let mut dx = vec![0.0; n];
    let mut x = x0.to_vec();
    let mut carry = vec![0.0; n];
    let mut states = vec![StateVec::from_vec_unchecked(x.clone())];
    let mut derivs = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut h = (times.last().unwrap() * 1e-3).max(1e-12);
    let mut steps = 0usize;

    for &target in &times[1..] {
        let seg_start = t;
        let x_seg = x.clone();
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::usage(format!(
                    "reference solver exceeded {MAX_STEPS} steps near t = {t}"
                )));
            }
            let last = t + h >= target;
            let dt = if last { target - t } else { h };
            model.eval_into(t, &x, &mut k[0])?;
            for s in 0..6 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, a) in A[s].iter().enumerate() {
                        acc += a * k[j][i];
                    }
                    y[i] = x[i] + dt * acc;
                }
                model.eval_into(t + C[s] * dt, &y, &mut k[s + 1])?;
            }
            let mut err: f64 = 0.0;
            for i in 0..n {
                let mut d5 = 0.0;
                let mut d4 = 0.0;
                for j in 0..7 {
                    d5 += B5[j] * k[j][i];
                    d4 += B4[j] * k[j][i];
                }
                dx[i] = dt * d5;
                let scale = rel_tol * (1.0 + x[i].abs().max((x[i] + dx[i]).abs()));
                err = err.max((dt * (d5 - d4)).abs() / scale);
            }
            if !err.is_finite() {
                return Err(Error::NonFiniteState { t });
            }
            if err <= 1.0 {
                compensated_add(&mut x, &mut carry, &dx);
                ensure_finite(&x, t + dt)?;
                t = if last { target } else { t + dt };
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // Keep the controller's step when a clipped step was accepted.
            if !(last && err <= 1.0) || dt * factor < h {
                h = dt * factor;
            }
        }
        let width = target - seg_start;
        derivs.push(StateVec::from_vec_unchecked(
            x.iter().zip(&x_seg).map(|(a, b)| (a - b) / width).collect(),
        ));
        states.push(StateVec::from_vec_unchecked(x.clone()));
    }

    Ok(Trajectory {
        times: times.to_vec(),
        states,
        derivs,
        events: Vec::new(),
        method: Method::ReferenceAdaptive,
        step: 0.0,
        outside_evaluations: 0,
    })
}
