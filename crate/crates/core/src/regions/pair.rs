use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::regions::piecewise::PiecewiseFn;
use crate::rhs::{RhsModel, ScalarFn, VectorField};
use crate::state::norm;

/// Points this close to a nonsmooth seam of `h` have no usable gradient.
pub const SEAM_TOL: f64 = 1e-9;

/// Writes `(∂h/∂t, ∇ₓh)` into `out`; returns `false` on a nonsmooth seam.
pub type SeamGradFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) -> bool + Send + Sync>;
/// Writes `p₂(t,x)` into `out` and returns `p₁(t)`.
pub type ProjectionFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) -> f64 + Send + Sync>;

/// Region `R = {h ≤ 0}` described by the pair `(h, p)`, with `p` bounded
/// and equal to the identity on `R`.
#[derive(Clone)]
pub struct ViablePair {
    name: String,
    dim: usize,
    h: ScalarFn,
    grad: SeamGradFn,
    proj: ProjectionFn,
    bound: f64,
}

impl fmt::Debug for ViablePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ViablePair")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("bound", &self.bound)
            .finish_non_exhaustive()
    }
}

impl ViablePair {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        h: ScalarFn,
        grad: SeamGradFn,
        proj: ProjectionFn,
        bound: f64,
    ) -> Self {
        ViablePair {
            name: name.into(),
            dim,
            h,
            grad,
            proj,
            bound,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sup-norm bound on `p₂`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn h(&self, t: f64, x: &[f64]) -> f64 {
        (self.h)(t, x)
    }

    pub fn contains(&self, t: f64, x: &[f64]) -> bool {
        self.h(t, x) <= 0.0
    }

    /// `(∂h/∂t, ∇ₓh)`, or `None` on a seam.
    pub fn gradient(&self, t: f64, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.dim + 1];
        self.gradient_into(t, x, &mut g).then_some(g)
    }

    pub fn gradient_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> bool {
        (self.grad)(t, x, out)
    }

    pub fn project_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> f64 {
        (self.proj)(t, x, out)
    }

    pub fn project(&self, t: f64, x: &[f64]) -> (f64, Vec<f64>) {
        let mut y = vec![0.0; self.dim];
        let s = self.project_into(t, x, &mut y);
        (s, y)
    }
}

/// Orthogonal projection onto the closed ball of radius `r`.
pub fn ball_projection(r: f64, x: &[f64], out: &mut [f64]) {
    let len = norm(x);
    if len <= r {
        out.copy_from_slice(x);
    } else {
        for (o, v) in out.iter_mut().zip(x) {
            *o = r * v / len;
        }
    }
}

/// `R = I × B̄_r`: `h = ½‖x − p_r(x)‖²`, `∇ₓh = x − p_r(x)`, `p = (t, p_r(x))`.
pub fn ball_pair(r: f64, dim: usize) -> Result<ViablePair> {
    if !(r > 0.0 && r.is_finite()) || dim == 0 {
        return Err(Error::usage(format!(
            "ball pair needs r > 0 and dim >= 1 (got r = {r}, dim = {dim})"
        )));
    }
    let h: ScalarFn = Arc::new(move |_, x: &[f64]| {
        let len = norm(x);
        if len <= r {
            0.0
        } else {
            0.5 * (len - r) * (len - r)
        }
    });
    let grad: SeamGradFn = Arc::new(move |_, x: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        let len = norm(x);
        let scale = if len <= r { 0.0 } else { 1.0 - r / len };
        for (o, v) in out[1..].iter_mut().zip(x) {
            *o = scale * v;
        }
        true
    });
    let proj: ProjectionFn = Arc::new(move |t, x: &[f64], out: &mut [f64]| {
        ball_projection(r, x, out);
        t
    });
    Ok(ViablePair::new(
        format!("ball(r={r})"),
        dim,
        h,
        grad,
        proj,
        r,
    ))
}

/// Band between two time functions on `[0, horizon]`:
/// `h = max{x − β(t), α(t) − x, 0}`, `p = (t, clamp(x, α(t), β(t)))`.
pub fn band_pair(alpha: PiecewiseFn, beta: PiecewiseFn, horizon: f64) -> Result<ViablePair> {
    let mut grid: Vec<f64> = (0..=1000).map(|i| horizon * i as f64 / 1000.0).collect();
    for b in alpha.breakpoints().iter().chain(beta.breakpoints()) {
        grid.extend(
            [b - 1e-9, *b, b + 1e-9]
                .into_iter()
                .filter(|s| (0.0..=horizon).contains(s)),
        );
    }
    let mut bound = 0.0_f64;
    for &t in &grid {
        let (a, b) = (alpha.eval(t), beta.eval(t));
        if a > b {
            return Err(Error::Construction {
                message: "lower function exceeds upper function".into(),
                witness: vec![t, a, b],
            });
        }
        bound = bound.max(a.abs()).max(b.abs());
    }
    let (a1, b1) = (alpha.clone(), beta.clone());
    let h: ScalarFn =
        Arc::new(move |t, x: &[f64]| (x[0] - b1.eval(t)).max(a1.eval(t) - x[0]).max(0.0));
    let (a2, b2) = (alpha.clone(), beta.clone());
    let grad: SeamGradFn = Arc::new(move |t, x: &[f64], out: &mut [f64]| {
        if a2.near_breakpoint(t, SEAM_TOL) || b2.near_breakpoint(t, SEAM_TOL) {
            return false;
        }
        let (a, b) = (a2.eval(t), b2.eval(t));
        let x = x[0];
        if (x - b).abs() <= SEAM_TOL || (x - a).abs() <= SEAM_TOL {
            return false;
        }
        if x > b {
            out[0] = -b2.derivative(t);
            out[1] = 1.0;
        } else if x < a {
            out[0] = a2.derivative(t);
            out[1] = -1.0;
        } else {
            out[0] = 0.0;
            out[1] = 0.0;
        }
        true
    });
    let proj: ProjectionFn = Arc::new(move |t, x: &[f64], out: &mut [f64]| {
        out[0] = x[0].min(beta.eval(t)).max(alpha.eval(t));
        t
    });
    Ok(ViablePair::new("band", 1, h, grad, proj, bound))
}

/// Region between `α(t) = t` and the step function `β = 1` on `[0, ½)`,
/// `β = 2` on `[½, 1]`, with the explicit five-case `h` and three-case `p`.
///
/// `p₂` is the identity on the strip `0 ≤ t < ½, 1 < x ≤ 2t + 1`, which lies
/// outside the region.
pub fn example_band45_pair() -> ViablePair {
    fn in_region(t: f64, x: f64) -> bool {
        let beta = if t < 0.5 { 1.0 } else { 2.0 };
        t <= x && x <= beta
    }
    let h: ScalarFn = Arc::new(|t, x: &[f64]| {
        let x = x[0];
        if in_region(t, x) {
            0.0
        } else if x < t {
            t - x
        } else if t < 0.5 && x <= 2.0 * t + 1.0 {
            (x - 1.0) * (0.5 - t)
        } else if t < 0.5 {
            (x - 1.0) * (0.5 - t) + (x - 2.0 * t - 1.0).powi(2)
        } else {
            (x - 2.0).powi(2)
        }
    });
    let grad: SeamGradFn = Arc::new(|t, x: &[f64], out: &mut [f64]| {
        let x = x[0];
        let near = |a: f64, b: f64| (a - b).abs() <= SEAM_TOL;
        if near(t, 0.5)
            || near(x, t)
            || near(x, 2.0 * t + 1.0)
            || near(x, if t < 0.5 { 1.0 } else { 2.0 })
        {
            return false;
        }
        if in_region(t, x) {
            out[0] = 0.0;
            out[1] = 0.0;
        } else if x < t {
            out[0] = 1.0;
            out[1] = -1.0;
        } else if t < 0.5 && x <= 2.0 * t + 1.0 {
            out[0] = -(x - 1.0);
            out[1] = 0.5 - t;
        } else if t < 0.5 {
            let d = x - 2.0 * t - 1.0;
            out[0] = -(x - 1.0) - 4.0 * d;
            out[1] = (0.5 - t) + 2.0 * d;
        } else {
            out[0] = 0.0;
            out[1] = 2.0 * (x - 2.0);
        }
        true
    });
    let proj: ProjectionFn = Arc::new(|t, x: &[f64], out: &mut [f64]| {
        let cap = (2.0 * t + 1.0).min(2.0);
        out[0] = if x[0] < t {
            t
        } else if x[0] <= cap {
            x[0]
        } else {
            cap
        };
        t
    });
    ViablePair::new("example_band45", 1, h, grad, proj, 2.0)
}

pub type SpatialScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type SpatialGradFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Smooth spatial function `h : Rⁿ → R` with gradient, used by the λ-scaled
/// ball condition.
#[derive(Clone)]
pub struct SmoothScalar {
    pub value: SpatialScalarFn,
    pub grad: SpatialGradFn,
}

impl SmoothScalar {
    /// `h(x) = ½(‖x‖² − r²)`.
    pub fn half_sq_norm(r: f64) -> Self {
        SmoothScalar {
            value: Arc::new(move |x| 0.5 * (crate::state::dot(x, x) - r * r)),
            grad: Arc::new(|x, out| out.copy_from_slice(x)),
        }
    }
}

/// `f̃(t,x) = f(p(t,x))`: bounded by construction, equal to `f` on `R`.
pub struct ModifiedField<'a> {
    pub model: &'a RhsModel,
    pub pair: &'a ViablePair,
}

impl<'a> ModifiedField<'a> {
    pub fn new(model: &'a RhsModel, pair: &'a ViablePair) -> Result<Self> {
        if model.dim() != pair.dim() {
            return Err(Error::Dimension {
                expected: model.dim(),
                got: pair.dim(),
            });
        }
        Ok(ModifiedField { model, pair })
    }
}

impl VectorField for ModifiedField<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let mut y = vec![0.0; x.len()];
        let s = self.pair.project_into(t, x, &mut y);
        self.model.eval_into(s, &y, out)
    }

    fn may_jump_near(&self, t: f64, x: &[f64], eps: f64) -> bool {
        let (s, y) = self.pair.project(t, x);
        self.model.may_jump_near(s, &y, eps)
    }

    fn cell_signature(&self, t: f64, x: &[f64], out: &mut Vec<i64>) {
        let (s, y) = self.pair.project(t, x);
        self.model.cell_signature(s, &y, out)
    }
}
