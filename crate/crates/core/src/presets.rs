//! Built-in right-hand sides.
//!
//! `ball_example` is the planar system
//!
//! ```text
//! x' = x³ + y − 3x + φ(x² + y² + αt)
//! y' = y³ − x − 3y·e^{|x|}
//! ```
//!
//! with the two-valued jump function `φ(s) = 0.3 + 0.4·(⌊Q·s⌋ mod 2)`,
//! discontinuous exactly on the lattice `s ∈ ℤ/Q`. `band_example` is the
//! smooth scalar field `x' = −x² − x + 2t + 1` on `[0, 1]`.

use std::sync::Arc;

use crate::error::Result;
use crate::rhs::{InnerTerm, LevelSet, RhsModel, SurfaceSpec};

/// Jump values of `φ`.
pub const PHI_LOW: f64 = 0.3;
pub const PHI_HIGH: f64 = 0.7;

/// `φ` on the branch cell `⌊Q·s⌋`.
pub fn phi_of_cell(cell: i64) -> f64 {
    PHI_LOW + (PHI_HIGH - PHI_LOW) * cell.rem_euclid(2) as f64
}

/// Parameters of the ball example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallExample {
    pub alpha: f64,
    /// Lattice resolution `Q`; jumps of `φ` sit at `k/Q`.
    pub q: u32,
    pub horizon: f64,
    /// Largest `‖x‖` at which the surface levels must be enumerated.
    pub reach: f64,
}

impl BallExample {
    pub fn new(alpha: f64, q: u32) -> Self {
        BallExample {
            alpha,
            q,
            horizon: 1.0,
            reach: 1.0,
        }
    }

    pub fn with_reach(mut self, reach: f64) -> Self {
        self.reach = reach;
        self
    }

    /// Truncation of ℚ to the τ-range attained on `[0, T] × B̄_reach`.
    pub fn levels(&self) -> Result<LevelSet> {
        let at = self.alpha * self.horizon;
        let step = 1.0 / f64::from(self.q.max(1));
        LevelSet::lattice(
            step,
            at.min(0.0) - step,
            self.reach * self.reach + at.max(0.0) + step,
        )
    }

    fn surface(&self) -> Result<SurfaceSpec> {
        let alpha = self.alpha;
        Ok(SurfaceSpec::new(
            "x^2+y^2+alpha*t",
            Arc::new(move |t, x: &[f64]| x[0] * x[0] + x[1] * x[1] + alpha * t),
            Arc::new(move |_, x: &[f64], g: &mut [f64]| {
                g[0] = alpha;
                g[1] = 2.0 * x[0];
                g[2] = 2.0 * x[1];
            }),
            self.levels()?,
        ))
    }

    /// Factored form: `F(t, g, x) = (x³ + y − 3x + g, y³ − x − 3y·e^{|x|})`
    /// with the single inner term `g(s) = φ(s)`.
    pub fn factored(&self) -> Result<RhsModel> {
        RhsModel::factored(
            "ball_example",
            2,
            self.horizon,
            Arc::new(|_, g: &[f64], x: &[f64], out: &mut [f64]| {
                let (a, b) = (x[0], x[1]);
                out[0] = a * a * a + b - 3.0 * a + g[0];
                out[1] = b * b * b - a - 3.0 * b * a.abs().exp();
            }),
            vec![InnerTerm {
                g: Arc::new(|_, cell, _| phi_of_cell(cell)),
                surface: 0,
            }],
        )?
        .with_surface(self.surface()?)
        .validated()
    }

    /// The same field written directly as a closure.
    pub fn direct(&self) -> Result<RhsModel> {
        let levels = self.levels()?;
        let alpha = self.alpha;
        Ok(RhsModel::direct(
            "ball_example_direct",
            2,
            self.horizon,
            Arc::new(move |t, x: &[f64], out: &mut [f64]| {
                let (a, b) = (x[0], x[1]);
                let s = a * a + b * b + alpha * t;
                out[0] = a * a * a + b - 3.0 * a + phi_of_cell(levels.cell(s));
                out[1] = b * b * b - a - 3.0 * b * a.abs().exp();
            }),
        )?
        .with_surface(self.surface()?))
    }
}

/// `x' = −x² − x + 2t + 1` on `[0, 1]`.
pub fn band_example() -> Result<RhsModel> {
    RhsModel::direct(
        "band_example",
        1,
        1.0,
        Arc::new(|t, x: &[f64], out: &mut [f64]| out[0] = -x[0] * x[0] - x[0] + 2.0 * t + 1.0),
    )
}

/// Scalar `x' = gain·sign(x)` with `sign(0) = +1` (right-continuous), one
/// surface `τ = x` at level 0.
pub fn sign_model(gain: f64, horizon: f64) -> Result<RhsModel> {
    RhsModel::factored(
        "sign",
        1,
        horizon,
        Arc::new(move |_, g: &[f64], _, out: &mut [f64]| out[0] = gain * g[0]),
        vec![InnerTerm {
            g: Arc::new(|_, cell, _| if cell >= 1 { 1.0 } else { -1.0 }),
            surface: 0,
        }],
    )?
    .with_surface(SurfaceSpec::new(
        "x",
        Arc::new(|_, x: &[f64]| x[0]),
        Arc::new(|_, _, g: &mut [f64]| {
            g[0] = 0.0;
            g[1] = 1.0;
        }),
        LevelSet::explicit(vec![0.0])?,
    ))
    .validated()
}

/// Constant field `f ≡ c`.
pub fn constant(c: Vec<f64>, horizon: f64) -> Result<RhsModel> {
    let n = c.len();
    RhsModel::direct(
        "constant",
        n,
        horizon,
        Arc::new(move |_, _, out: &mut [f64]| out.copy_from_slice(&c)),
    )
}

/// Linear field `f(t,x) = k·x`.
pub fn radial(k: f64, dim: usize, horizon: f64) -> Result<RhsModel> {
    RhsModel::direct(
        "radial",
        dim,
        horizon,
        Arc::new(move |_, x: &[f64], out: &mut [f64]| {
            for (o, v) in out.iter_mut().zip(x) {
                *o = k * v;
            }
        }),
    )
}

/// Scalar `x' = 2t`.
pub fn time_ramp(horizon: f64) -> Result<RhsModel> {
    RhsModel::direct(
        "time_ramp",
        1,
        horizon,
        Arc::new(|t, _, out: &mut [f64]| out[0] = 2.0 * t),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_example_at_origin() {
        let m = BallExample::new(10.0, 10).factored().unwrap();
        let f = m.eval(0.0, &[0.0, 0.0]).unwrap();
        // τ = 0 sits on a level; the right-continuous branch picks cell 0.
        assert_eq!(f.as_slice(), &[0.3, 0.0]);
    }

    #[test]
    fn band_example_at_origin() {
        assert_eq!(
            band_example()
                .unwrap()
                .eval(0.0, &[0.0])
                .unwrap()
                .as_slice(),
            &[1.0]
        );
    }

    #[test]
    fn phi_alternates_and_stays_in_unit_interval() {
        for cell in -5..5 {
            let v = phi_of_cell(cell);
            assert!(v > 0.0 && v < 1.0);
            assert_ne!(v, phi_of_cell(cell + 1));
        }
    }

    #[test]
    fn phi_jumps_on_lattice_points() {
        let ex = BallExample::new(0.0, 10);
        let m = ex.factored().unwrap();
        // τ = x² at y = 0; crossing τ = 0.1 flips φ.
        let below = m.eval(0.0, &[(0.1f64 - 1e-9).sqrt(), 0.0]).unwrap();
        let above = m.eval(0.0, &[(0.1f64 + 1e-9).sqrt(), 0.0]).unwrap();
        assert!((above[0] - below[0]).abs() > 0.39);
    }

    #[test]
    fn sign_model_branches() {
        let m = sign_model(1.0, 1.0).unwrap();
        assert_eq!(m.eval(0.0, &[0.0]).unwrap()[0], 1.0);
        assert_eq!(m.eval(0.0, &[-1e-300]).unwrap()[0], -1.0);
    }
}
