//! Sampled certificates for viable pairs and the field they localize.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krasovskij::{EnvelopeOptions, Functional};
use crate::regions::pair::{ModifiedField, SmoothScalar, ViablePair};
use crate::regions::piecewise::PiecewiseFn;
use crate::regions::report::{CheckReport, Comparison, Witness};
use crate::rhs::{RhsModel, SurfaceSpec};
use crate::sampling::{Domain, LowDiscrepancySampler, PointSampler, SpatialDomain};
use crate::state::{check_dim, dot};

/// Absorbs rounding in non-strict region inequalities.
pub const REGION_SLACK: f64 = 1e-10;
/// Default distance from zero required of transversality intervals.
pub const TRANSVERSALITY_MARGIN: f64 = 1e-6;
/// `|s|` at or below this counts as an exact zero when classifying pairs.
pub const ZERO_TOL: f64 = 1e-12;

/// Which envelope the solution-region inequality quantifies over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMode {
    /// `z ∈ Kf(p(t,x))`.
    #[default]
    Projected,
    /// `z ∈ K f̃(t,x)` with `f̃ = f ∘ p`.
    Modified,
}

/// `[0, T] × [−B, B]ⁿ` with `B = 2·bound(p₂) + 1`.
pub fn complement_domain(pair: &ViablePair, horizon: f64) -> Result<Domain> {
    let b = 2.0 * pair.bound() + 1.0;
    Domain::new(
        0.0,
        horizon,
        SpatialDomain::Box {
            lo: vec![-b; pair.dim()],
            hi: vec![b; pair.dim()],
        },
    )
}

pub fn complement_sampler(
    pair: &ViablePair,
    horizon: f64,
    seed: u64,
) -> Result<LowDiscrepancySampler> {
    Ok(LowDiscrepancySampler::new(
        complement_domain(pair, horizon)?,
        seed,
    ))
}

/// Draw points of `Rᶜ` with a usable gradient; calls `visit` for each of
/// the first `m` accepted ones.
fn sample_complement<V>(
    pair: &ViablePair,
    sampler: &mut dyn PointSampler,
    m: usize,
    report: &mut CheckReport,
    mut visit: V,
) -> Result<()>
where
    V: FnMut(f64, &[f64], &[f64]) -> Result<()>,
{
    if m == 0 {
        return Err(Error::usage("need at least one sample"));
    }
    check_dim(pair.dim(), &vec![0.0; sampler.domain().dim()])?;
    let n = pair.dim();
    let mut x = vec![0.0; n];
    let mut grad = vec![0.0; n + 1];
    let mut accepted = 0;
    let mut draws = 0usize;
    let budget = 1000 * m + 1000;
    while accepted < m && draws < budget {
        draws += 1;
        let t = sampler.next_point(&mut x);
        if pair.h(t, &x) <= 0.0 {
            continue;
        }
        if !pair.gradient_into(t, &x, &mut grad) {
            report.resampled += 1;
            continue;
        }
        visit(t, &x, &grad)?;
        accepted += 1;
    }
    if accepted < m {
        report.notes.push(format!(
            "only {accepted} of {m} complement samples found in {draws} draws"
        ));
    }
    if report.resampled * 100 > m {
        report.notes.push(format!(
            "sampler flagged: {} of {} draws landed on seams",
            report.resampled, m
        ));
    }
    Ok(())
}

/// `⟨∇h(t,x), (1,z)⟩ ≤ tol` for every sampled `(t,x) ∉ R` and every `z` in
/// the selected envelope, plus `h(0, x₀) ≤ 0`.
#[allow(clippy::too_many_arguments)]
pub fn check_solution_region(
    pair: &ViablePair,
    model: &RhsModel,
    x0: &[f64],
    sampler: &mut dyn PointSampler,
    m: usize,
    tol: f64,
    mode: EnvelopeMode,
    env: &EnvelopeOptions,
) -> Result<CheckReport> {
    check_dim(model.dim(), x0)?;
    let probe = env.probe(model.dim())?;
    let condition = match mode {
        EnvelopeMode::Projected => "solution_region",
        EnvelopeMode::Modified => "solution_region_modified",
    };
    let mut report = CheckReport::new(
        condition,
        sampler.seed(),
        Comparison::AtMost,
        tol + REGION_SLACK,
    );
    let h0 = pair.h(0.0, x0);
    let initial_ok = h0 <= 0.0;
    if !initial_ok {
        report
            .notes
            .push(format!("initial point outside the region: h(0, x0) = {h0}"));
    }
    let modified = ModifiedField::new(model, pair)?;
    let mut y = vec![0.0; model.dim()];
    let mut values = Vec::with_capacity(m);
    sample_complement(pair, sampler, m, &mut report, |t, x, grad| {
        let v = Functional::space_time(grad);
        let iv = match mode {
            EnvelopeMode::Projected => {
                let s = pair.project_into(t, x, &mut y);
                probe.support_interval(model, s, &y, &v, &env.schedule)?
            }
            EnvelopeMode::Modified => probe.support_interval(&modified, t, x, &v, &env.schedule)?,
        };
        values.push((iv.upper, t, x.to_vec()));
        Ok(())
    })?;
    for (value, t, x) in values {
        report.record(value, t, &x);
    }
    Ok(report.finish(initial_ok))
}

/// `⟨x, z⟩ ≤ tol` for `‖x‖ = r` and `z ∈ Kf(t,x)`.
pub fn check_ball_boundary(
    model: &RhsModel,
    r: f64,
    m: usize,
    tol: f64,
    seed: u64,
    env: &EnvelopeOptions,
) -> Result<CheckReport> {
    if m == 0 {
        return Err(Error::usage("need at least one sample"));
    }
    let n = model.dim();
    let probe = env.probe(n)?;
    let mut sampler = LowDiscrepancySampler::new(
        Domain::new(
            0.0,
            model.horizon(),
            SpatialDomain::Sphere {
                center: vec![0.0; n],
                radius: r,
            },
        )?,
        seed,
    );
    let mut report = CheckReport::new(
        "ball_boundary",
        seed,
        Comparison::AtMost,
        tol + REGION_SLACK,
    );
    let mut x = vec![0.0; n];
    for _ in 0..m {
        let t = sampler.next_point(&mut x);
        let iv =
            probe.support_interval(model, t, &x, &Functional::spatial(x.clone()), &env.schedule)?;
        report.record(iv.upper, t, &x);
    }
    Ok(report.finish(true))
}

/// `⟨∇h(λx), z⟩ ≤ tol` for `‖x‖ = r`, `z ∈ Kf(t,x)` and every `λ` in the grid,
/// after probing that `{h ≤ 0}` is the closed ball of radius `r`.
#[allow(clippy::too_many_arguments)]
pub fn check_lambda_condition(
    h: &SmoothScalar,
    model: &RhsModel,
    r: f64,
    lambda_grid: &[f64],
    m: usize,
    tol: f64,
    seed: u64,
    env: &EnvelopeOptions,
) -> Result<CheckReport> {
    if m == 0 {
        return Err(Error::usage("need at least one sample"));
    }
    if lambda_grid.is_empty() || lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 1.0)) {
        return Err(Error::usage(
            "lambda grid must be nonempty, finite and >= 1",
        ));
    }
    if lambda_grid.iter().cloned().fold(f64::INFINITY, f64::min) != 1.0 {
        return Err(Error::usage("lambda grid must contain 1"));
    }
    let n = model.dim();
    let horizon = model.horizon();

    // {h ≤ 0} = B̄_r, probed inside the ball and on the annulus r < ‖x‖ ≤ 3r.
    let mut x = vec![0.0; n];
    let mut inner = LowDiscrepancySampler::new(
        Domain::new(
            0.0,
            horizon,
            SpatialDomain::Ball {
                center: vec![0.0; n],
                radius: r,
            },
        )?,
        seed ^ 0x1,
    );
    let mut outer = LowDiscrepancySampler::new(
        Domain::new(
            0.0,
            horizon,
            SpatialDomain::Ball {
                center: vec![0.0; n],
                radius: 3.0 * r,
            },
        )?,
        seed ^ 0x2,
    );
    for _ in 0..m {
        inner.next_point(&mut x);
        if (h.value)(&x) > 1e-12 {
            return Err(Error::Construction {
                message: "h is positive inside the ball".into(),
                witness: x.clone(),
            });
        }
        outer.next_point(&mut x);
        if crate::state::norm(&x) > r * (1.0 + 1e-9) && (h.value)(&x) <= 0.0 {
            return Err(Error::Construction {
                message: "h is nonpositive outside the ball".into(),
                witness: x.clone(),
            });
        }
    }

    let probe = env.probe(n)?;
    let mut sampler = LowDiscrepancySampler::new(
        Domain::new(
            0.0,
            horizon,
            SpatialDomain::Sphere {
                center: vec![0.0; n],
                radius: r,
            },
        )?,
        seed,
    );
    let mut report = CheckReport::new(
        "lambda_condition",
        seed,
        Comparison::AtMost,
        tol + REGION_SLACK,
    );
    let mut scaled = vec![0.0; n];
    let mut grad = vec![0.0; n];
    for _ in 0..m {
        let t = sampler.next_point(&mut x);
        let mut worst = f64::NEG_INFINITY;
        for &lambda in lambda_grid {
            for (s, v) in scaled.iter_mut().zip(&x) {
                *s = lambda * v;
            }
            if lambda > 1.0 && (h.value)(&scaled) <= 0.0 {
                return Err(Error::Construction {
                    message: format!("h is nonpositive at lambda = {lambda} outside the ball"),
                    witness: scaled.clone(),
                });
            }
            (h.grad)(&scaled, &mut grad);
            let iv = probe.support_interval(
                model,
                t,
                &x,
                &Functional::spatial(grad.clone()),
                &env.schedule,
            )?;
            worst = worst.max(iv.upper);
        }
        report.record(worst, t, &x);
    }
    Ok(report.finish(true))
}

/// Transversality of every declared surface inside the region: over the
/// envelope at each located surface point, `⟨∇τ, (1,z)⟩` keeps one sign with
/// at least `margin` clearance.
///
/// The reported value per point is `max(lower, −upper)` (positive when the
/// interval excludes zero); the check passes iff its minimum exceeds `margin`.
pub fn check_transversality(
    model: &RhsModel,
    pair: &ViablePair,
    m: usize,
    margin: f64,
    seed: u64,
    env: &EnvelopeOptions,
) -> Result<CheckReport> {
    if model.surfaces().is_empty() {
        return Err(Error::usage(
            "transversality needs at least one declared surface",
        ));
    }
    if m == 0 {
        return Err(Error::usage("need at least one sample"));
    }
    check_dim(model.dim(), &vec![0.0; pair.dim()])?;
    let n = model.dim();
    let probe = env.probe(n)?;
    let mut report = CheckReport::new("transversality", seed, Comparison::Above, margin);

    // Pool of region points.
    let pool_size = (8 * m).max(4096);
    let mut sampler = complement_sampler(pair, model.horizon(), seed)?;
    let mut pool: Vec<(f64, Vec<f64>)> = Vec::with_capacity(pool_size);
    let mut x = vec![0.0; n];
    let mut draws = 0;
    while pool.len() < pool_size && draws < 200 * pool_size {
        draws += 1;
        let t = sampler.next_point(&mut x);
        if pair.contains(t, &x) {
            pool.push((t, x.clone()));
        }
    }
    if pool.is_empty() {
        report
            .notes
            .push("no region points found in the sampling box".into());
        return Ok(report.finish(true));
    }

    let mut unreachable = Vec::new();
    let mut located_levels = 0usize;
    let mut q = vec![0.0; n];
    for (si, surface) in model.surfaces().iter().enumerate() {
        let taus: Vec<f64> = pool.iter().map(|(t, x)| surface.value(*t, x)).collect();
        let lo = taus.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let levels = surface.levels.levels();
        let edge_below = levels
            .iter()
            .cloned()
            .filter(|&c| c < lo)
            .fold(f64::NEG_INFINITY, f64::max);
        let edge_above = levels
            .iter()
            .cloned()
            .filter(|&c| c > hi)
            .fold(f64::INFINITY, f64::min);
        for c in levels {
            if c < lo || c > hi {
                // Levels met only at an extremum of τ (a degenerate point)
                // never straddle pool points; search for them directly.
                if c != edge_below && c != edge_above {
                    continue;
                }
                let mut starts: Vec<usize> = (0..pool.len()).collect();
                starts.sort_by(|&i, &j| (taus[i] - c).abs().total_cmp(&(taus[j] - c).abs()));
                let mut found = 0;
                for &i in starts.iter().take(LEVEL_STARTS) {
                    if found >= m {
                        break;
                    }
                    let Some(tq) =
                        locate_level(surface, pair, model.horizon(), c, &pool[i], &mut q)
                    else {
                        continue;
                    };
                    let grad = surface.gradient(tq, &q);
                    let iv = probe.support_interval(
                        model,
                        tq,
                        &q,
                        &Functional::space_time(&grad),
                        &env.schedule,
                    )?;
                    report.record(iv.lower.max(-iv.upper), tq, &q);
                    found += 1;
                }
                if found > 0 {
                    located_levels += 1;
                    report.notes.push(format!(
                        "surface {si} level {c} met only at an extremum of the surface function"
                    ));
                }
                continue;
            }
            let below: Vec<usize> = (0..pool.len()).filter(|&i| taus[i] < c).collect();
            let above: Vec<usize> = (0..pool.len()).filter(|&i| taus[i] > c).collect();
            let on: Vec<usize> = (0..pool.len()).filter(|&i| taus[i] == c).collect();
            let mut found = 0;
            let mut attempt = 0;
            while found < m && attempt < 4 * m {
                let k = attempt;
                attempt += 1;
                let (tq, located) = if k < on.len() {
                    let (t, x) = &pool[on[k]];
                    q.copy_from_slice(x);
                    (*t, true)
                } else if below.is_empty() || above.is_empty() {
                    break;
                } else {
                    let a = &pool[below[k % below.len()]];
                    let b = &pool[above[(k * 31 + k / above.len()) % above.len()]];
                    let t = bisect_segment(a, b, &mut q, |t, y| surface.value(t, y) - c);
                    (t, pair.h(t, &q) <= 1e-12)
                };
                if !located {
                    continue;
                }
                let grad = surface.gradient(tq, &q);
                let iv = probe.support_interval(
                    model,
                    tq,
                    &q,
                    &Functional::space_time(&grad),
                    &env.schedule,
                )?;
                report.record(iv.lower.max(-iv.upper), tq, &q);
                found += 1;
            }
            if found == 0 {
                unreachable.push(format!("surface {si} level {c}"));
            } else {
                located_levels += 1;
            }
        }
    }
    report
        .notes
        .push(format!("{located_levels} levels located inside the region"));
    if !unreachable.is_empty() {
        report.notes.push(format!(
            "{} levels in range not located inside the region: {}",
            unreachable.len(),
            unreachable.join(", ")
        ));
    }
    Ok(report.finish(true))
}

const LEVEL_STARTS: usize = 8;
const LEVEL_ITERATIONS: usize = 200;
const LEVEL_TOL: f64 = 1e-14;

/// Projected Gauss-Newton search for a region point with `τ = c`, started at
/// `start`. Time stays in `[0, horizon]`; steps leaving the region are halved.
/// Accepts only near-exact convergence, so a level merely approached by the
/// region is not reported as met.
fn locate_level(
    surface: &SurfaceSpec,
    pair: &ViablePair,
    horizon: f64,
    c: f64,
    start: &(f64, Vec<f64>),
    out: &mut [f64],
) -> Option<f64> {
    let n = out.len();
    let mut t = start.0;
    out.copy_from_slice(&start.1);
    let mut r = surface.value(t, out) - c;
    let mut trial = vec![0.0; n];
    for _ in 0..LEVEL_ITERATIONS {
        if r == 0.0 {
            break;
        }
        let mut g = surface.gradient(t, out);
        // A time step pushing past either end of the horizon is dropped.
        if (t <= 0.0 && r * g[0] > 0.0) || (t >= horizon && r * g[0] < 0.0) {
            g[0] = 0.0;
        }
        let norm2: f64 = g.iter().map(|v| v * v).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            break;
        }
        let scale = r / norm2;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let tt = (t - lambda * scale * g[0]).clamp(0.0, horizon);
            for k in 0..n {
                trial[k] = out[k] - lambda * scale * g[k + 1];
            }
            let rt = surface.value(tt, &trial) - c;
            if pair.h(tt, &trial) <= REGION_SLACK && rt.abs() < r.abs() {
                t = tt;
                out.copy_from_slice(&trial);
                r = rt;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (r.abs() <= LEVEL_TOL * (1.0 + c.abs()) && pair.h(t, out) <= REGION_SLACK).then_some(t)
}

/// Root of `g` on the segment from `a` to `b` by 50 bisections, assuming
/// `g(a) < 0 < g(b)`. Writes the spatial part into `out`, returns the time.
fn bisect_segment<G>(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>), out: &mut [f64], g: G) -> f64
where
    G: Fn(f64, &[f64]) -> f64,
{
    let point = |s: f64, out: &mut [f64]| {
        for ((o, xa), xb) in out.iter_mut().zip(&a.1).zip(&b.1) {
            *o = xa + s * (xb - xa);
        }
        a.0 + s * (b.0 - a.0)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        let t = point(mid, out);
        if g(t, out) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    point(0.5 * (lo + hi), out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    /// `⟨∇ₓh, p₂ − x⟩ < 0` on every sample.
    Admissible,
    /// Nonpositive everywhere, zero somewhere.
    WeakAdmissible,
    /// Positive somewhere: only the viable-pair axioms hold.
    ViableOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: PairClass,
    /// First sample with `|s| ≤ ZERO_TOL`, if any.
    pub zero_witness: Option<Witness>,
    pub report: CheckReport,
}

/// Classify a viable pair by the sign of `s = ⟨∇ₓh(t,x), p₂(t,x) − x⟩` on
/// `m` complement samples.
pub fn classify_pair(
    pair: &ViablePair,
    sampler: &mut dyn PointSampler,
    m: usize,
) -> Result<Classification> {
    let mut report = CheckReport::new("admissible", sampler.seed(), Comparison::AtMost, -ZERO_TOL);
    let mut zero_witness = None;
    let mut y = vec![0.0; pair.dim()];
    let mut values = Vec::with_capacity(m);
    sample_complement(pair, sampler, m, &mut report, |t, x, grad| {
        pair.project_into(t, x, &mut y);
        let diff: Vec<f64> = y.iter().zip(x).map(|(p, v)| p - v).collect();
        values.push((dot(&grad[1..], &diff), t, x.to_vec()));
        Ok(())
    })?;
    for (s, t, x) in values {
        if zero_witness.is_none() && s.abs() <= ZERO_TOL {
            zero_witness = Some(Witness {
                index: report.samples,
                t,
                x: x.clone(),
            });
        }
        report.record(s, t, &x);
    }
    let report = report.finish(true);
    let class = if report.worst_value > ZERO_TOL {
        PairClass::ViableOnly
    } else if report.passed {
        PairClass::Admissible
    } else {
        PairClass::WeakAdmissible
    };
    Ok(Classification {
        class,
        zero_witness,
        report,
    })
}

/// Which inequality a candidate must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Lower,
    Upper,
}

/// Breakpoint jumps larger than this make a candidate discontinuous.
const JUMP_TOL: f64 = 1e-12;

/// Lower solution: `α(0) ≤ x₀` and `α′(t) − f(t, α(t)) ≤ tol`; upper
/// solution: `β(0) ≥ x₀` and `f(t, β(t)) − β′(t) ≤ tol`; both evaluated at
/// grid points off the breakpoints. Candidates must also be continuous.
pub fn check_bound_solution(
    model: &RhsModel,
    candidate: &PiecewiseFn,
    kind: Bound,
    x0: f64,
    grid: &[f64],
    tol: f64,
) -> Result<CheckReport> {
    check_dim(1, &vec![0.0; model.dim()])?;
    if grid.is_empty() {
        return Err(Error::usage("grid must contain at least one time"));
    }
    let condition = match kind {
        Bound::Lower => "lower_solution",
        Bound::Upper => "upper_solution",
    };
    let mut report = CheckReport::new(condition, 0, Comparison::AtMost, tol + REGION_SLACK);
    let start = candidate.eval(0.0);
    let initial_ok = match kind {
        Bound::Lower => start <= x0,
        Bound::Upper => start >= x0,
    };
    if !initial_ok {
        report.notes.push(format!(
            "initial ordering violated: candidate(0) = {start}, x0 = {x0}"
        ));
    }
    let mut continuous = true;
    for (t, jump) in candidate.jumps() {
        if jump.abs() > JUMP_TOL {
            continuous = false;
            report.notes.push(format!(
                "jump of {jump} at t = {t}: not absolutely continuous"
            ));
        }
    }
    for &t in grid {
        if candidate.near_breakpoint(t, JUMP_TOL) {
            continue;
        }
        let c = candidate.eval(t);
        let f = model.eval(t, &[c])?[0];
        let d = candidate.derivative(t);
        let margin = match kind {
            Bound::Lower => d - f,
            Bound::Upper => f - d,
        };
        report.record(margin, t, &[c]);
    }
    Ok(report.finish(initial_ok && continuous))
}

pub fn check_lower_solution(
    model: &RhsModel,
    alpha: &PiecewiseFn,
    x0: f64,
    grid: &[f64],
    tol: f64,
) -> Result<CheckReport> {
    check_bound_solution(model, alpha, Bound::Lower, x0, grid, tol)
}

pub fn check_upper_solution(
    model: &RhsModel,
    beta: &PiecewiseFn,
    x0: f64,
    grid: &[f64],
    tol: f64,
) -> Result<CheckReport> {
    check_bound_solution(model, beta, Bound::Upper, x0, grid, tol)
}

/// `k + 1` evenly spaced times on `[0, horizon]`.
pub fn uniform_grid(horizon: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| horizon * i as f64 / k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::regions::pair::{ball_pair, band_pair, example_band45_pair};
    use crate::regions::piecewise::Polynomial;

    fn env() -> EnvelopeOptions {
        EnvelopeOptions::default()
    }

    #[test]
    fn band_pair_with_zero_field_passes() {
        let pair = band_pair(PiecewiseFn::constant(-1.0), PiecewiseFn::constant(1.0), 1.0).unwrap();
        let model = presets::constant(vec![0.0], 1.0).unwrap();
        let mut s = complement_sampler(&pair, 1.0, 0).unwrap();
        let r = check_solution_region(
            &pair,
            &model,
            &[0.0],
            &mut s,
            200,
            0.0,
            EnvelopeMode::Projected,
            &env(),
        )
        .unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.worst_value, 0.0);
    }

    #[test]
    fn initial_point_outside_fails() {
        let pair = ball_pair(1.0, 2).unwrap();
        let model = presets::radial(-1.0, 2, 1.0).unwrap();
        let mut s = complement_sampler(&pair, 1.0, 0).unwrap();
        let r = check_solution_region(
            &pair,
            &model,
            &[2.0, 0.0],
            &mut s,
            50,
            0.0,
            EnvelopeMode::Projected,
            &env(),
        )
        .unwrap();
        assert!(!r.passed);
        assert!(r.worst_value <= 0.0);
    }

    #[test]
    fn ball_boundary_radial_fields() {
        let inward = presets::radial(-1.0, 2, 1.0).unwrap();
        let r = check_ball_boundary(&inward, 1.5, 100, 0.0, 0, &env()).unwrap();
        assert!(r.passed);
        assert!((r.worst_value + 2.25).abs() < 1e-12);
        let outward = presets::radial(1.0, 2, 1.0).unwrap();
        let r = check_ball_boundary(&outward, 1.0, 100, 0.0, 0, &env()).unwrap();
        assert!(!r.passed);
        assert!((r.worst_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_condition_reduces_to_boundary_check() {
        let inward = presets::radial(-1.0, 2, 1.0).unwrap();
        let h = SmoothScalar::half_sq_norm(1.0);
        let r =
            check_lambda_condition(&h, &inward, 1.0, &[1.0, 2.0, 4.0], 50, 0.0, 0, &env()).unwrap();
        assert!(r.passed);
        assert!(check_lambda_condition(&h, &inward, 1.0, &[2.0], 5, 0.0, 0, &env()).is_err());
        assert!(check_lambda_condition(&h, &inward, 1.0, &[0.5, 1.0], 5, 0.0, 0, &env()).is_err());
    }

    #[test]
    fn lambda_condition_rejects_h_with_wrong_zero_set() {
        let inward = presets::radial(-1.0, 2, 1.0).unwrap();
        let h = SmoothScalar::half_sq_norm(2.0);
        match check_lambda_condition(&h, &inward, 1.0, &[1.0], 50, 0.0, 0, &env()) {
            Err(Error::Construction { witness, .. }) => assert!(crate::state::norm(&witness) > 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn time_surface_is_transversal() {
        use crate::rhs::{LevelSet, SurfaceSpec};
        use std::sync::Arc;
        let model = presets::constant(vec![3.0], 1.0)
            .unwrap()
            .with_surface(SurfaceSpec::new(
                "t",
                Arc::new(|t, _| t),
                Arc::new(|_, _, g: &mut [f64]| {
                    g[0] = 1.0;
                    g[1] = 0.0
                }),
                LevelSet::explicit(vec![0.5]).unwrap(),
            ));
        let pair = band_pair(PiecewiseFn::constant(-1.0), PiecewiseFn::constant(1.0), 1.0).unwrap();
        let r = check_transversality(&model, &pair, 20, TRANSVERSALITY_MARGIN, 0, &env()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.samples, 20);
        assert!((r.worst_value - 1.0).abs() < 1e-12);
        let w = r.witness.unwrap();
        assert!((w.t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn transversality_needs_surfaces() {
        let pair = ball_pair(1.0, 1).unwrap();
        assert!(
            check_transversality(&presets::band_example().unwrap(), &pair, 5, 1e-6, 0, &env())
                .is_err()
        );
    }

    #[test]
    fn classify_ball_and_band() {
        let ball = ball_pair(1.0, 2).unwrap();
        let mut s = complement_sampler(&ball, 1.0, 0).unwrap();
        assert_eq!(
            classify_pair(&ball, &mut s, 500).unwrap().class,
            PairClass::Admissible
        );

        let band = band_pair(
            PiecewiseFn::linear(0.0, 0.5),
            PiecewiseFn::linear(1.0, 0.5),
            1.0,
        )
        .unwrap();
        let mut s = complement_sampler(&band, 1.0, 0).unwrap();
        assert_eq!(
            classify_pair(&band, &mut s, 500).unwrap().class,
            PairClass::Admissible
        );

        let b45 = example_band45_pair();
        let mut s = complement_sampler(&b45, 1.0, 0).unwrap();
        let c = classify_pair(&b45, &mut s, 500).unwrap();
        assert_eq!(c.class, PairClass::WeakAdmissible);
        let w = c.zero_witness.unwrap();
        assert!(
            w.t < 0.5 && w.x[0] > 1.0 && w.x[0] <= 2.0 * w.t + 1.0,
            "{w:?}"
        );
    }

    #[test]
    fn lower_and_upper_examples() {
        let model = presets::band_example().unwrap();
        let grid = uniform_grid(1.0, 1000);
        assert!(
            check_lower_solution(&model, &PiecewiseFn::linear(0.0, 1.0), 0.0, &grid, 0.0)
                .unwrap()
                .passed
        );
        let gamma =
            check_upper_solution(&model, &PiecewiseFn::constant(1.0), 0.0, &grid, 0.0).unwrap();
        assert!(!gamma.passed);
        assert!((gamma.worst_value - 1.0).abs() < 1e-12);
        let tilde = PiecewiseFn::new(
            vec![0.5],
            vec![Polynomial(vec![1.0, 2.0]), Polynomial(vec![2.0])],
            vec![true],
        )
        .unwrap();
        assert!(
            check_upper_solution(&model, &tilde, 0.0, &grid, 0.0)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn discontinuous_candidate_is_not_an_upper_solution() {
        let model = presets::band_example().unwrap();
        let beta = PiecewiseFn::new(
            vec![0.5],
            vec![Polynomial(vec![1.0]), Polynomial(vec![2.0])],
            vec![true],
        )
        .unwrap();
        let r = check_upper_solution(&model, &beta, 0.0, &uniform_grid(1.0, 1000), 0.0).unwrap();
        // Pointwise inequality holds on both pieces; the jump alone fails it.
        assert!(r.worst_value < 0.0);
        assert!(!r.passed);
        assert!(r.notes.iter().any(|n| n.contains("jump")));
    }

    #[test]
    fn initial_ordering_is_checked() {
        let model = presets::band_example().unwrap();
        let r =
            check_lower_solution(&model, &PiecewiseFn::linear(0.5, 1.0), 0.0, &[0.1], 0.0).unwrap();
        assert!(!r.passed);
    }
}
