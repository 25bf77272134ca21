//! Sampled approximation of the Krasovskij envelope
//! `Kf(t,x) = ⋂_{ε>0} co̅ f(t, B̄_ε(x))` and support-function queries over it.
//!
//! The hull is never built: for a linear functional the extremes over a
//! convex hull are attained at its generators, so each query reduces to a
//! min/max over sampled field values.
//!
//! Sample layout: the center plus `m − 1` probe offsets `ρᵢ·dᵢ`, with `dᵢ`
//! low-discrepancy unit directions and `ρᵢ` cycling through `1, 1/2, 1/4`.
//! Level `j` evaluates the offsets scaled by `ε_j`. The set reported for
//! level `j` is the union of the raw samples of levels `j..depth`, which lies
//! in `B̄_{ε_j}(x)` and shrinks with `j`, so the per-level bounds are monotone.
//!
//! When no declared discontinuity can reach the deepest ball (and every
//! deepest sample sits in the center's branch cell), `f(t,·)` is continuous at
//! `x` and the envelope is the singleton `{f(t,x)}`; the final bounds are then
//! exact rather than inflated by the `O(ε)` spread.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rhs::VectorField;
use crate::sampling::{direction_dim, unit_direction, RdSequence};
use crate::state::{check_dim, check_finite, dot, StateVec};

const RADIUS_CYCLE: [f64; 3] = [1.0, 0.5, 0.25];

/// `ε_j = eps0 · factor^j`, `j = 0..depth`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpsSchedule {
    pub eps0: f64,
    pub factor: f64,
    pub depth: usize,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule {
            eps0: 1e-2,
            factor: 0.5,
            depth: 6,
        }
    }
}

impl EpsSchedule {
    pub fn new(eps0: f64, factor: f64, depth: usize) -> Result<Self> {
        let s = EpsSchedule {
            eps0,
            factor,
            depth,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return Err(Error::usage(format!(
                "eps0 must be positive, got {}",
                self.eps0
            )));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::usage(format!(
                "factor must lie in (0,1), got {}",
                self.factor
            )));
        }
        if self.depth == 0 {
            return Err(Error::usage("schedule depth must be at least 1"));
        }
        Ok(())
    }

    pub fn eps(&self, j: usize) -> f64 {
        self.eps0 * self.factor.powi(j as i32)
    }

    pub fn deepest(&self) -> f64 {
        self.eps(self.depth - 1)
    }
}

/// Field values at the center and at probe points of `B̄_eps(x)`, same `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeSample {
    pub eps: f64,
    pub points: Vec<StateVec>,
}

/// Linear functional `z ↦ time·1 + ⟨space, z⟩`.
///
/// `time = 0` is a plain spatial direction; a nonzero `time` pairs with the
/// constant first slot as in `⟨∇τ, (1, z)⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    pub time: f64,
    pub space: Vec<f64>,
}

impl Functional {
    pub fn spatial(v: Vec<f64>) -> Self {
        Functional {
            time: 0.0,
            space: v,
        }
    }

    /// From a space-time gradient `(∂/∂t, ∇ₓ)`.
    pub fn space_time(grad: &[f64]) -> Self {
        Functional {
            time: grad[0],
            space: grad[1..].to_vec(),
        }
    }

    pub fn apply(&self, z: &[f64]) -> f64 {
        self.time + dot(&self.space, z)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Functional {
            time: lambda * self.time,
            space: self.space.iter().map(|v| lambda * v).collect(),
        }
    }

    pub fn sum(&self, other: &Functional) -> Self {
        Functional {
            time: self.time + other.time,
            space: self
                .space
                .iter()
                .zip(&other.space)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelBounds {
    pub eps: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Bounds on `⟨v, z⟩` over the envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportInterval {
    pub lower: f64,
    pub upper: f64,
    /// Deepest radius used.
    pub eps: f64,
    /// Samples per level.
    pub samples: usize,
    /// Whether the final bounds come from the continuity collapse.
    pub singleton: bool,
    /// Sampled bounds per level, coarsest first.
    pub levels: Vec<LevelBounds>,
}

/// Reusable probe layout for one dimension, sample count and seed.
#[derive(Clone, Debug)]
pub struct EnvelopeProbe {
    dim: usize,
    offsets: Vec<Vec<f64>>,
}

impl EnvelopeProbe {
    pub fn new(dim: usize, m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::usage("envelope sampling needs m >= 1"));
        }
        let mut seq = RdSequence::new(direction_dim(dim), seed);
        let mut u = vec![0.0; direction_dim(dim)];
        let offsets = (0..m - 1)
            .map(|i| {
                seq.next_into(&mut u);
                let mut d = vec![0.0; dim];
                unit_direction(i as u64, &u, &mut d);
                let rho = RADIUS_CYCLE[i % RADIUS_CYCLE.len()];
                d.iter_mut().for_each(|v| *v *= rho);
                d
            })
            .collect();
        Ok(EnvelopeProbe { dim, offsets })
    }

    pub fn samples(&self) -> usize {
        self.offsets.len() + 1
    }

    fn check<F: VectorField + ?Sized>(&self, field: &F, x: &[f64]) -> Result<()> {
        if field.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: field.dim(),
            });
        }
        check_dim(self.dim, x)?;
        check_finite(x)
    }

    /// Visit `f` at the center (first) and every probe point at radius `eps`.
    fn for_each_value<F, V>(
        &self,
        field: &F,
        t: f64,
        x: &[f64],
        eps: f64,
        mut visit: V,
    ) -> Result<()>
    where
        F: VectorField + ?Sized,
        V: FnMut(usize, &[f64], &[f64]),
    {
        let mut y = x.to_vec();
        let mut z = vec![0.0; self.dim];
        field.eval_into(t, x, &mut z)?;
        visit(0, x, &z);
        for (i, off) in self.offsets.iter().enumerate() {
            for k in 0..self.dim {
                y[k] = x[k] + eps * off[k];
            }
            field.eval_into(t, &y, &mut z)?;
            visit(i + 1, &y, &z);
        }
        Ok(())
    }

    pub fn envelope_samples<F: VectorField + ?Sized>(
        &self,
        field: &F,
        t: f64,
        x: &[f64],
        eps: f64,
    ) -> Result<EnvelopeSample> {
        self.check(field, x)?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::usage(format!("eps must be positive, got {eps}")));
        }
        let mut points = Vec::with_capacity(self.samples());
        self.for_each_value(field, t, x, eps, |_, _, z| {
            points.push(StateVec::from_vec_unchecked(z.to_vec()))
        })?;
        Ok(EnvelopeSample { eps, points })
    }

    pub fn support_interval<F: VectorField + ?Sized>(
        &self,
        field: &F,
        t: f64,
        x: &[f64],
        v: &Functional,
        schedule: &EpsSchedule,
    ) -> Result<SupportInterval> {
        self.check(field, x)?;
        schedule.validate()?;
        check_dim(self.dim, &v.space)?;
        if !v.time.is_finite() {
            return Err(Error::NonFiniteInput {
                index: 0,
                value: v.time,
            });
        }
        check_finite(&v.space)?;

        let mut center_value = 0.0;
        let mut center_cells = Vec::new();
        let mut cells = Vec::new();
        let mut same_cell = true;
        let mut raw = Vec::with_capacity(schedule.depth);
        for j in 0..schedule.depth {
            let eps = schedule.eps(j);
            let deepest = j + 1 == schedule.depth;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            self.for_each_value(field, t, x, eps, |i, y, z| {
                let s = v.apply(z);
                lo = lo.min(s);
                hi = hi.max(s);
                if i == 0 {
                    center_value = s;
                    if deepest {
                        field.cell_signature(t, y, &mut center_cells);
                    }
                } else if deepest && same_cell {
                    field.cell_signature(t, y, &mut cells);
                    same_cell = cells == center_cells;
                }
            })?;
            raw.push((eps, lo, hi));
        }

        let mut levels = vec![
            LevelBounds {
                eps: 0.0,
                lower: 0.0,
                upper: 0.0
            };
            schedule.depth
        ];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in (0..schedule.depth).rev() {
            let (eps, l, h) = raw[j];
            lo = lo.min(l);
            hi = hi.max(h);
            levels[j] = LevelBounds {
                eps,
                lower: lo,
                upper: hi,
            };
        }

        let eps = schedule.deepest();
        let singleton = same_cell && !field.may_jump_near(t, x, eps);
        let (lower, upper) = if singleton {
            (center_value, center_value)
        } else {
            let last = levels[schedule.depth - 1];
            (last.lower, last.upper)
        };
        Ok(SupportInterval {
            lower,
            upper,
            eps,
            samples: self.samples(),
            singleton,
            levels,
        })
    }
}

/// Envelope sampling parameters carried by every checker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvelopeOptions {
    pub samples: usize,
    pub seed: u64,
    pub schedule: EpsSchedule,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions {
            schedule: EpsSchedule::default(),
            samples: 64,
            seed: DEFAULT_PROBE_SEED,
        }
    }
}

impl EnvelopeOptions {
    pub fn probe(&self, dim: usize) -> Result<EnvelopeProbe> {
        self.schedule.validate()?;
        EnvelopeProbe::new(dim, self.samples, self.seed)
    }
}

/// Default probe seed for the free-function API.
pub const DEFAULT_PROBE_SEED: u64 = 0;

pub fn envelope_samples<F: VectorField + ?Sized>(
    field: &F,
    t: f64,
    x: &[f64],
    eps: f64,
    m: usize,
) -> Result<EnvelopeSample> {
    EnvelopeProbe::new(field.dim(), m, DEFAULT_PROBE_SEED)?.envelope_samples(field, t, x, eps)
}

pub fn support_interval<F: VectorField + ?Sized>(
    field: &F,
    t: f64,
    x: &[f64],
    v: &Functional,
    schedule: &EpsSchedule,
    m: usize,
) -> Result<SupportInterval> {
    EnvelopeProbe::new(field.dim(), m, DEFAULT_PROBE_SEED)?
        .support_interval(field, t, x, v, schedule)
}

/// Upper bound of [`support_interval`].
pub fn support_upper<F: VectorField + ?Sized>(
    field: &F,
    t: f64,
    x: &[f64],
    v: &Functional,
    schedule: &EpsSchedule,
    m: usize,
) -> Result<f64> {
    Ok(support_interval(field, t, x, v, schedule, m)?.upper)
}
