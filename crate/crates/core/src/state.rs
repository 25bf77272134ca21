//! State vectors and the handful of dense-vector helpers the rest of the
//! crate needs.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite point of Rⁿ.
///
/// Construction rejects NaN and infinite components, so every `StateVec`
/// handed to an operation is already admissible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StateVec(Vec<f64>);

impl StateVec {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::usage("state dimension must be at least 1"));
        }
        check_finite(&components)?;
        Ok(StateVec(components))
    }

    pub fn zeros(n: usize) -> Self {
        StateVec(vec![0.0; n.max(1)])
    }

    pub(crate) fn from_vec_unchecked(components: Vec<f64>) -> Self {
        StateVec(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for StateVec {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        StateVec::new(v)
    }
}

impl From<StateVec> for Vec<f64> {
    fn from(s: StateVec) -> Self {
        s.0
    }
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteInput {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Dimension {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(StateVec::new(vec![]).is_err());
        match StateVec::new(vec![1.0, f64::NAN]) {
            Err(Error::NonFiniteInput { index: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(StateVec::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn serde_goes_through_validation() {
        let ok: StateVec = serde_json_like("[1.0, 2.0]");
        assert_eq!(ok.as_slice(), &[1.0, 2.0]);
    }

    fn serde_json_like(s: &str) -> StateVec {
        #[derive(Deserialize)]
        struct W {
            v: StateVec,
        }
        let w: W = toml::from_str(&format!("v = {s}")).unwrap();
        w.v
    }
}
