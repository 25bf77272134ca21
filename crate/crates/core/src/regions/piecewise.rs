use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial piece `c₀ + c₁t + c₂t² + …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * t + k as f64 * c)
    }
}

/// Piecewise-polynomial function of time.
///
/// `pieces[i]` is active on `(breakpoints[i-1], breakpoints[i])`; at a
/// breakpoint the right piece is used when `right_continuous[i]` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseRepr", into = "PiecewiseRepr")]
pub struct PiecewiseFn {
    breakpoints: Vec<f64>,
    pieces: Vec<Polynomial>,
    right_continuous: Vec<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PiecewiseRepr {
    #[serde(default)]
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<f64>>,
    #[serde(default)]
    right_continuous: Option<Vec<bool>>,
}

impl TryFrom<PiecewiseRepr> for PiecewiseFn {
    type Error = Error;

    fn try_from(r: PiecewiseRepr) -> Result<Self> {
        let n = r.breakpoints.len();
        PiecewiseFn::new(
            r.breakpoints,
            r.pieces.into_iter().map(Polynomial).collect(),
            r.right_continuous.unwrap_or_else(|| vec![true; n]),
        )
    }
}

impl From<PiecewiseFn> for PiecewiseRepr {
    fn from(p: PiecewiseFn) -> Self {
        PiecewiseRepr {
            breakpoints: p.breakpoints,
            pieces: p.pieces.into_iter().map(|q| q.0).collect(),
            right_continuous: Some(p.right_continuous),
        }
    }
}

impl PiecewiseFn {
    pub fn new(
        breakpoints: Vec<f64>,
        pieces: Vec<Polynomial>,
        right_continuous: Vec<bool>,
    ) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 || right_continuous.len() != breakpoints.len() {
            return Err(Error::usage(format!(
                "piecewise function needs breakpoints+1 pieces and one side flag per breakpoint (got {} breakpoints, {} pieces, {} flags)",
                breakpoints.len(),
                pieces.len(),
                right_continuous.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::usage(
                "breakpoints must be finite and strictly increasing",
            ));
        }
        if pieces
            .iter()
            .any(|p| p.0.is_empty() || p.0.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::usage(
                "polynomial pieces need at least one finite coefficient",
            ));
        }
        Ok(PiecewiseFn {
            breakpoints,
            pieces,
            right_continuous,
        })
    }

    pub fn constant(c: f64) -> Self {
        PiecewiseFn {
            breakpoints: vec![],
            pieces: vec![Polynomial(vec![c])],
            right_continuous: vec![],
        }
    }

    /// `a + b·t`.
    pub fn linear(a: f64, b: f64) -> Self {
        PiecewiseFn {
            breakpoints: vec![],
            pieces: vec![Polynomial(vec![a, b])],
            right_continuous: vec![],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn piece_index(&self, t: f64) -> usize {
        let i = self.breakpoints.partition_point(|b| *b < t);
        match self.breakpoints.get(i) {
            Some(b) if *b == t && self.right_continuous[i] => i + 1,
            _ => i,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.pieces[self.piece_index(t)].eval(t)
    }

    /// Derivative of the active piece (one-sided at breakpoints).
    pub fn derivative(&self, t: f64) -> f64 {
        self.pieces[self.piece_index(t)].derivative(t)
    }

    pub fn near_breakpoint(&self, t: f64, tol: f64) -> bool {
        self.breakpoints.iter().any(|b| (b - t).abs() <= tol)
    }

    /// `(t, right − left)` at every breakpoint.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(i, &b)| (b, self.pieces[i + 1].eval(b) - self.pieces[i].eval(b)))
            .collect()
    }

    pub fn is_continuous(&self, tol: f64) -> bool {
        self.jumps().iter().all(|(_, j)| j.abs() <= tol)
    }
}
