//! Possibly discontinuous right-hand sides `f : [0,T] × Rⁿ → Rⁿ`.
//!
//! A model declares the hypersurfaces `{τ(t,x) = c, c ∈ A}` across which it
//! may jump. Off those surfaces the field is continuous; on them the
//! floor-based right-continuous branch convention makes evaluation single
//! valued: a τ-value in `[c, c⁺)` (between consecutive levels) selects the
//! branch of the cell that starts at `c`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::PointSampler;
use crate::state::{check_dim, check_finite, norm, StateVec};

/// `f(t, x, out)`.
pub type FieldFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// Scalar function of `(t, x)`.
pub type ScalarFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// Gradient of a scalar function of `(t, x)`; `out = (∂/∂t, ∇ₓ)`, length `n + 1`.
pub type GradFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// Outer map of the factored form: `F(t, g, x, out)`.
pub type OuterFn = Arc<dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync>;
/// Inner map of the factored form: `g(s, cell, x)` where `s = τ(t,x)` and
/// `cell` is the branch index of `s` in the surface's level set.
pub type InnerFn = Arc<dyn Fn(f64, i64, &[f64]) -> f64 + Send + Sync>;

/// Finite set of levels at which a surface function may cause a jump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelSet {
    /// Sorted, duplicate-free values.
    Explicit { values: Vec<f64> },
    /// `{k·step : k ∈ ℤ, lo ≤ k·step ≤ hi}`.
    Lattice { step: f64, lo: f64, hi: f64 },
}

impl LevelSet {
    pub fn explicit(mut values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(LevelSet::Explicit { values })
    }

    pub fn lattice(step: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::usage(format!(
                "lattice needs step > 0 and finite lo <= hi (got step {step}, [{lo}, {hi}])"
            )));
        }
        if (hi - lo) / step > 1e8 {
            return Err(Error::usage("lattice enumeration would exceed 1e8 levels"));
        }
        Ok(LevelSet::Lattice { step, lo, hi })
    }

    fn lattice_range(step: f64, lo: f64, hi: f64) -> (i64, i64) {
        ((lo / step).ceil() as i64, (hi / step).floor() as i64)
    }

    pub fn len(&self) -> usize {
        match self {
            LevelSet::Explicit { values } => values.len(),
            LevelSet::Lattice { step, lo, hi } => {
                let (a, b) = Self::lattice_range(*step, *lo, *hi);
                (b - a + 1).max(0) as usize
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn levels(&self) -> Vec<f64> {
        match self {
            LevelSet::Explicit { values } => values.clone(),
            LevelSet::Lattice { step, lo, hi } => {
                let (a, b) = Self::lattice_range(*step, *lo, *hi);
                (a..=b).map(|k| k as f64 * step).collect()
            }
        }
    }

    /// Branch index of the value `s`. Cells are half-open `[c_k, c_{k+1})`.
    pub fn cell(&self, s: f64) -> i64 {
        match self {
            LevelSet::Explicit { values } => values.partition_point(|v| *v <= s) as i64,
            LevelSet::Lattice { step, lo, hi } => {
                let (a, b) = Self::lattice_range(*step, *lo, *hi);
                ((s / step).floor() as i64).clamp(a - 1, b)
            }
        }
    }

    /// Level bounding `cell` from above.
    pub fn upper_level(&self, cell: i64) -> Option<f64> {
        match self {
            LevelSet::Explicit { values } => usize::try_from(cell)
                .ok()
                .and_then(|k| values.get(k))
                .copied(),
            LevelSet::Lattice { step, lo, hi } => {
                let (a, b) = Self::lattice_range(*step, *lo, *hi);
                (cell + 1 >= a && cell < b).then(|| (cell + 1) as f64 * step)
            }
        }
    }

    /// Level bounding `cell` from below.
    pub fn lower_level(&self, cell: i64) -> Option<f64> {
        match self {
            LevelSet::Explicit { values } => usize::try_from(cell - 1)
                .ok()
                .and_then(|k| values.get(k))
                .copied(),
            LevelSet::Lattice { step, lo, hi } => {
                let (a, b) = Self::lattice_range(*step, *lo, *hi);
                (cell >= a && cell <= b).then(|| cell as f64 * step)
            }
        }
    }

    /// Exact distance from `s` to the nearest level; `+∞` for an empty set.
    pub fn distance(&self, s: f64) -> f64 {
        match self.nearest(s) {
            Some(c) => (s - c).abs(),
            None => f64::INFINITY,
        }
    }

    pub fn nearest(&self, s: f64) -> Option<f64> {
        match self {
            LevelSet::Explicit { values } => {
                let i = values.partition_point(|v| *v < s);
                let below = i.checked_sub(1).map(|j| values[j]);
                let above = values.get(i).copied();
                match (below, above) {
                    (Some(b), Some(a)) => Some(if s - b <= a - s { b } else { a }),
                    (b, a) => b.or(a),
                }
            }
            LevelSet::Lattice { step, lo, hi } => {
                let (a, b) = Self::lattice_range(*step, *lo, *hi);
                if a > b {
                    return None;
                }
                let k = ((s / step).round() as i64).clamp(a, b);
                Some(k as f64 * step)
            }
        }
    }
}

/// A declared discontinuity surface `τ(t,x) ∈ levels`.
#[derive(Clone)]
pub struct SurfaceSpec {
    pub name: String,
    pub tau: ScalarFn,
    pub grad: GradFn,
    pub levels: LevelSet,
}

impl SurfaceSpec {
    pub fn new(name: impl Into<String>, tau: ScalarFn, grad: GradFn, levels: LevelSet) -> Self {
        SurfaceSpec {
            name: name.into(),
            tau,
            grad,
            levels,
        }
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        (self.tau)(t, x)
    }

    /// `(∂τ/∂t, ∇ₓτ)`.
    pub fn gradient(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len() + 1];
        (self.grad)(t, x, &mut g);
        g
    }
}

impl fmt::Debug for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceSpec")
            .field("name", &self.name)
            .field("levels", &self.levels)
            .finish_non_exhaustive()
    }
}

/// Branch convention at a surface. Only one is implemented; it is carried in
/// scenario files so that files stay readable if more are added.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchConvention {
    #[default]
    RightContinuous,
}

#[derive(Clone)]
pub struct InnerTerm {
    pub g: InnerFn,
    /// Index into the model's surfaces: supplies `τᵢ` and the jump levels `Aᵢ`.
    pub surface: usize,
}

#[derive(Clone)]
pub enum RhsForm {
    Direct(FieldFn),
    /// `f(t,x) = F(t, g₁(τ₁(t,x), x), …, g_N(τ_N(t,x), x))`.
    Factored {
        outer: OuterFn,
        inner: Vec<InnerTerm>,
    },
}

/// A right-hand side together with its declared discontinuity surfaces.
#[derive(Clone)]
pub struct RhsModel {
    name: String,
    dim: usize,
    horizon: f64,
    form: RhsForm,
    surfaces: Vec<SurfaceSpec>,
    sup_bound: Option<f64>,
}

impl fmt::Debug for RhsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RhsModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("horizon", &self.horizon)
            .field(
                "form",
                &match self.form {
                    RhsForm::Direct(_) => "direct",
                    RhsForm::Factored { .. } => "factored",
                },
            )
            .field("surfaces", &self.surfaces)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl RhsModel {
    pub fn direct(name: impl Into<String>, dim: usize, horizon: f64, f: FieldFn) -> Result<Self> {
        Self::build(name.into(), dim, horizon, RhsForm::Direct(f))
    }

    pub fn factored(
        name: impl Into<String>,
        dim: usize,
        horizon: f64,
        outer: OuterFn,
        inner: Vec<InnerTerm>,
    ) -> Result<Self> {
        Self::build(
            name.into(),
            dim,
            horizon,
            RhsForm::Factored { outer, inner },
        )
    }

    fn build(name: String, dim: usize, horizon: f64, form: RhsForm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::usage("state dimension must be at least 1"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::usage(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(RhsModel {
            name,
            dim,
            horizon,
            form,
            surfaces: Vec::new(),
            sup_bound: None,
        })
    }

    pub fn with_surface(mut self, surface: SurfaceSpec) -> Self {
        self.surfaces.push(surface);
        self
    }

    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    /// Validates that every inner term of a factored form references a
    /// declared surface.
    pub fn validated(self) -> Result<Self> {
        if let RhsForm::Factored { inner, .. } = &self.form {
            if let Some(term) = inner.iter().find(|t| t.surface >= self.surfaces.len()) {
                return Err(Error::usage(format!(
                    "factored term references surface {} but only {} declared",
                    term.surface,
                    self.surfaces.len()
                )));
            }
        }
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn form(&self) -> &RhsForm {
        &self.form
    }

    pub fn surfaces(&self) -> &[SurfaceSpec] {
        &self.surfaces
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    fn check_args(&self, t: f64, x: &[f64]) -> Result<()> {
        check_dim(self.dim, x)?;
        check_finite(x)?;
        let slack = 1e-9 * self.horizon;
        if !(t >= -slack && t <= self.horizon + slack) {
            return Err(Error::usage(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Single-valued branch selection of `f(t,x)`.
    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.eval_cells_into(t, x, None, out)
    }

    /// Factored form evaluated with every surface held in the given branch
    /// cell (one entry per surface) instead of the cell of `τ(t,x)`: the
    /// smooth extension of that branch across its surfaces. Direct forms
    /// ignore `cells`.
    pub fn eval_in_cells_into(
        &self,
        t: f64,
        x: &[f64],
        cells: &[i64],
        out: &mut [f64],
    ) -> Result<()> {
        if cells.len() != self.surfaces.len() {
            return Err(Error::Dimension {
                expected: self.surfaces.len(),
                got: cells.len(),
            });
        }
        self.eval_cells_into(t, x, Some(cells), out)
    }

    fn eval_cells_into(
        &self,
        t: f64,
        x: &[f64],
        cells: Option<&[i64]>,
        out: &mut [f64],
    ) -> Result<()> {
        self.check_args(t, x)?;
        check_dim(self.dim, out)?;
        match &self.form {
            RhsForm::Direct(f) => f(t, x, out),
            RhsForm::Factored { outer, inner } => {
                let mut buf = [0.0; 8];
                let mut heap;
                let g: &mut [f64] = if inner.len() <= buf.len() {
                    &mut buf[..inner.len()]
                } else {
                    heap = vec![0.0; inner.len()];
                    &mut heap
                };
                for (gi, term) in g.iter_mut().zip(inner) {
                    let surface = &self.surfaces[term.surface];
                    let s = surface.value(t, x);
                    let cell = match cells {
                        Some(c) => c[term.surface],
                        None => surface.levels.cell(s),
                    };
                    *gi = (term.g)(s, cell, x);
                }
                outer(t, g, x, out);
            }
        }
        if let Some(component) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation { component, t });
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<StateVec> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, x, &mut out)?;
        Ok(StateVec::from_vec_unchecked(out))
    }

    /// `min_n min_{c ∈ levels(n)} |τₙ(t,x) − c|`, or `+∞` without surfaces.
    pub fn surface_distance(&self, t: f64, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok(self.surface_distance_unchecked(t, x))
    }

    pub(crate) fn surface_distance_unchecked(&self, t: f64, x: &[f64]) -> f64 {
        self.surfaces
            .iter()
            .map(|s| s.levels.distance(s.value(t, x)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Problem (1) right-hand side: [`RhsModel::eval`].
pub fn eval_rhs(model: &RhsModel, t: f64, x: &[f64]) -> Result<StateVec> {
    model.eval(t, x)
}

pub fn surface_distance(model: &RhsModel, t: f64, x: &[f64]) -> Result<f64> {
    model.surface_distance(t, x)
}

/// Direction field `v(t,x)` for [`empirical_bound`].
pub type DirectionFn<'a> = &'a dyn Fn(f64, &[f64]) -> Vec<f64>;

/// Maximum of `‖f(t,x)‖` (or of `|⟨v(t,x), f(t,x)⟩|` when `direction` is
/// given) over the first `m` points of `sampler`.
pub fn empirical_bound(
    model: &RhsModel,
    sampler: &mut dyn PointSampler,
    m: usize,
    direction: Option<DirectionFn<'_>>,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::usage("empirical_bound needs at least one sample"));
    }
    if sampler.domain().dim() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: sampler.domain().dim(),
        });
    }
    let mut x = vec![0.0; model.dim()];
    let mut f = vec![0.0; model.dim()];
    let mut best = 0.0_f64;
    for _ in 0..m {
        let t = sampler.next_point(&mut x);
        if !sampler.domain().contains(t, &x) {
            return Err(Error::usage(format!(
                "sampler produced ({t}, {x:?}) outside its declared domain"
            )));
        }
        model.eval_into(t, &x, &mut f)?;
        let value = match direction {
            Some(v) => {
                let v = v(t, &x);
                check_dim(model.dim(), &v)?;
                crate::state::dot(&v, &f).abs()
            }
            None => norm(&f),
        };
        best = best.max(value);
    }
    Ok(best)
}

/// Field abstraction shared by the model and derived fields such as
/// `f(p(t,x))`, so that envelope queries work on either.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Whether a declared discontinuity may intersect the closed ball of
    /// radius `eps` around `x` at time `t`.
    fn may_jump_near(&self, t: f64, x: &[f64], eps: f64) -> bool;

    /// Branch cells of `(t,x)` for every declared surface.
    fn cell_signature(&self, t: f64, x: &[f64], out: &mut Vec<i64>);
}

impl VectorField for RhsModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        RhsModel::eval_into(self, t, x, out)
    }

    fn may_jump_near(&self, t: f64, x: &[f64], eps: f64) -> bool {
        // |τ(y) − τ(x)| ≤ ε‖∇ₓτ(x)‖ + O(ε²) on the ball; factor 2 and an ε²
        // allowance cover the curvature of the built-in surfaces.
        let mut g = vec![0.0; x.len() + 1];
        self.surfaces.iter().any(|s| {
            let d = s.levels.distance(s.value(t, x));
            if !d.is_finite() {
                return false;
            }
            (s.grad)(t, x, &mut g);
            let gx = norm(&g[1..]);
            d <= 2.0 * eps * (gx + eps)
        })
    }

    fn cell_signature(&self, t: f64, x: &[f64], out: &mut Vec<i64>) {
        out.clear();
        out.extend(self.surfaces.iter().map(|s| s.levels.cell(s.value(t, x))));
    }
}

/// Scenario Lipschitz estimate: the largest of `pairs` secant slopes of `f`
/// between off-surface points of the domain and perturbations of norm
/// `1e-4` inside the same branch cell, times 10.
pub fn lipschitz_estimate(
    model: &RhsModel,
    sampler: &mut dyn PointSampler,
    pairs: usize,
) -> Result<f64> {
    let n = model.dim();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut fx = vec![0.0; n];
    let mut fy = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut dirs = crate::sampling::RdSequence::new(crate::sampling::direction_dim(n), 0x5ec);
    let (mut sx, mut sy) = (Vec::new(), Vec::new());
    let mut best = 0.0_f64;
    let mut taken = 0;
    let mut k = 0u64;
    while taken < pairs && k < 100 * pairs as u64 + 100 {
        let t = sampler.next_point(&mut x);
        let u = dirs.next_vec();
        crate::sampling::unit_direction(k, &u, &mut dir);
        k += 1;
        let h = 1e-4;
        for i in 0..n {
            y[i] = x[i] + h * dir[i];
        }
        model.cell_signature(t, &x, &mut sx);
        model.cell_signature(t, &y, &mut sy);
        if sx != sy || model.surface_distance_unchecked(t, &x) < 1e-3 {
            continue;
        }
        model.eval_into(t, &x, &mut fx)?;
        model.eval_into(t, &y, &mut fy)?;
        best = best.max(crate::state::dist(&fx, &fy) / h);
        taken += 1;
    }
    Ok(10.0 * best)
}
