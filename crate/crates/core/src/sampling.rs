//! Deterministic low-discrepancy point generation.
//!
//! All checkers draw their sample points from the additive recurrence
//! `u_k = frac(s + k·a)` with the generalized golden-ratio increments `a`
//! (the Rd sequence), rotated by a per-seed shift `s`. The recurrence is
//! evaluated in 64-bit fixed point so that prefixes of a stream are exactly
//! reproducible and nested in the sample count.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Additive recurrence in `dim` dimensions.
#[derive(Clone, Debug)]
pub struct RdSequence {
    increments: Vec<u64>,
    shift: Vec<u64>,
    index: u64,
}

impl RdSequence {
    pub fn new(dim: usize, seed: u64) -> Self {
        let dim = dim.max(1);
        // Positive root of x^(d+1) = x + 1.
        let mut g = 2.0_f64;
        for _ in 0..64 {
            g = (1.0 + g).powf(1.0 / (dim as f64 + 1.0));
        }
        let increments = (0..dim)
            .map(|i| to_fixed((1.0 / g).powi(i as i32 + 1).fract()))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.random::<u64>()).collect();
        RdSequence {
            increments,
            shift,
            index: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.increments.len()
    }

    /// Jump to sample `index` (the next call to `next_into` returns it).
    pub fn seek(&mut self, index: u64) {
        self.index = index;
    }

    /// Fill `out` with the next point of [0,1)^dim.
    pub fn next_into(&mut self, out: &mut [f64]) {
        let k = self.index;
        for ((o, a), s) in out.iter_mut().zip(&self.increments).zip(&self.shift) {
            let raw = s.wrapping_add(k.wrapping_mul(*a));
            *o = (raw >> 11) as f64 / (1u64 << 53) as f64;
        }
        self.index += 1;
    }

    pub fn next_vec(&mut self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.next_into(&mut v);
        v
    }
}

fn to_fixed(x: f64) -> u64 {
    (x * TWO_POW_64) as u64
}

/// Map a point of the unit cube to a unit vector in Rⁿ.
///
/// `n = 1` alternates `+1/-1` with the sample index; `n = 2` uses the angle
/// `2πu₀`; larger `n` goes through Box-Muller pairs and normalizes. The cube
/// point must have at least `direction_dim(n)` coordinates.
pub fn unit_direction(index: u64, u: &[f64], out: &mut [f64]) {
    let n = out.len();
    match n {
        1 => out[0] = if index % 2 == 0 { 1.0 } else { -1.0 },
        2 => {
            let a = std::f64::consts::TAU * u[0];
            out[0] = a.cos();
            out[1] = a.sin();
        }
        _ => {
            for pair in 0..n.div_ceil(2) {
                let u1 = 1.0 - u[2 * pair];
                let u2 = u[2 * pair + 1];
                let r = (-2.0 * u1.ln()).sqrt();
                let a = std::f64::consts::TAU * u2;
                out[2 * pair] = r * a.cos();
                if 2 * pair + 1 < n {
                    out[2 * pair + 1] = r * a.sin();
                }
            }
            let len = crate::state::norm(out);
            if len > 0.0 {
                out.iter_mut().for_each(|v| *v /= len);
            } else {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[0] = 1.0;
            }
        }
    }
}

/// Cube coordinates consumed by [`unit_direction`] in dimension `n`.
pub fn direction_dim(n: usize) -> usize {
    match n {
        1 | 2 => 1,
        _ => 2 * n.div_ceil(2),
    }
}

/// Spatial part of a sampling domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialDomain {
    /// Axis-aligned box `[lo, hi]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Closed ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Sphere (boundary of the ball).
    Sphere { center: Vec<f64>, radius: f64 },
}

impl SpatialDomain {
    pub fn dim(&self) -> usize {
        match self {
            SpatialDomain::Box { lo, .. } => lo.len(),
            SpatialDomain::Ball { center, .. } | SpatialDomain::Sphere { center, .. } => {
                center.len()
            }
        }
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            SpatialDomain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - slack && *v <= h + slack),
            SpatialDomain::Ball { center, radius } => {
                crate::state::dist(x, center) <= radius + slack
            }
            SpatialDomain::Sphere { center, radius } => {
                (crate::state::dist(x, center) - radius).abs() <= slack
            }
        }
    }
}

/// A compact set `[t0, t1] × spatial`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub t0: f64,
    pub t1: f64,
    pub spatial: SpatialDomain,
}

impl Domain {
    pub fn new(t0: f64, t1: f64, spatial: SpatialDomain) -> Result<Self> {
        let ok = t0.is_finite() && t1.is_finite() && t0 <= t1;
        let ok = ok
            && match &spatial {
                SpatialDomain::Box { lo, hi } => {
                    !lo.is_empty()
                        && lo.len() == hi.len()
                        && lo
                            .iter()
                            .zip(hi)
                            .all(|(l, h)| l.is_finite() && h.is_finite() && l <= h)
                }
                SpatialDomain::Ball { center, radius }
                | SpatialDomain::Sphere { center, radius } => {
                    !center.is_empty() && radius.is_finite() && *radius >= 0.0
                }
            };
        if !ok {
            return Err(Error::usage(format!(
                "invalid sampling domain {spatial:?} over [{t0}, {t1}]"
            )));
        }
        Ok(Domain { t0, t1, spatial })
    }

    pub fn dim(&self) -> usize {
        self.spatial.dim()
    }

    pub fn contains(&self, t: f64, x: &[f64]) -> bool {
        let slack = 1e-12 * (1.0 + self.t1.abs());
        t >= self.t0 - slack && t <= self.t1 + slack && self.spatial.contains(x, 1e-9)
    }
}

/// Source of points `(t, x)` over a declared compact domain.
pub trait PointSampler {
    fn domain(&self) -> &Domain;

    /// Write the next spatial point into `x` and return its time.
    fn next_point(&mut self, x: &mut [f64]) -> f64;

    /// Seed recorded in reports.
    fn seed(&self) -> u64 {
        0
    }
}

/// Uniform-ish low-discrepancy sampler over a [`Domain`].
#[derive(Clone, Debug)]
pub struct LowDiscrepancySampler {
    domain: Domain,
    seq: RdSequence,
    cube: Vec<f64>,
    seed: u64,
}

impl LowDiscrepancySampler {
    pub fn new(domain: Domain, seed: u64) -> Self {
        let n = domain.dim();
        let cube_dim = 1 + match domain.spatial {
            SpatialDomain::Box { .. } => n,
            SpatialDomain::Ball { .. } => direction_dim(n) + 1,
            SpatialDomain::Sphere { .. } => direction_dim(n),
        };
        LowDiscrepancySampler {
            domain,
            seq: RdSequence::new(cube_dim, seed),
            cube: vec![0.0; cube_dim],
            seed,
        }
    }
}

impl PointSampler for LowDiscrepancySampler {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn next_point(&mut self, x: &mut [f64]) -> f64 {
        let index = self.seq.index;
        self.seq.next_into(&mut self.cube);
        let u = &self.cube;
        let t = self.domain.t0 + (self.domain.t1 - self.domain.t0) * u[0];
        match &self.domain.spatial {
            SpatialDomain::Box { lo, hi } => {
                for i in 0..x.len() {
                    x[i] = lo[i] + (hi[i] - lo[i]) * u[1 + i];
                }
            }
            SpatialDomain::Ball { center, radius } => {
                let n = x.len();
                let dd = direction_dim(n);
                unit_direction(index, &u[1..1 + dd], x);
                let rho = radius * u[1 + dd].powf(1.0 / n as f64);
                for i in 0..n {
                    x[i] = center[i] + rho * x[i];
                }
            }
            SpatialDomain::Sphere { center, radius } => {
                let n = x.len();
                unit_direction(index, &u[1..], x);
                for i in 0..n {
                    x[i] = center[i] + radius * x[i];
                }
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_is_reproducible_and_in_unit_cube() {
        let mut a = RdSequence::new(3, 7);
        let mut b = RdSequence::new(3, 7);
        for _ in 0..1000 {
            let (pa, pb) = (a.next_vec(), b.next_vec());
            assert_eq!(pa, pb);
            assert!(pa.iter().all(|v| (0.0..1.0).contains(v)));
        }
        let mut c = RdSequence::new(3, 8);
        assert_ne!(RdSequence::new(3, 7).next_vec(), c.next_vec());
    }

    #[test]
    fn seek_matches_sequential() {
        let mut a = RdSequence::new(2, 0);
        let v: Vec<_> = (0..20).map(|_| a.next_vec()).collect();
        let mut b = RdSequence::new(2, 0);
        b.seek(13);
        assert_eq!(b.next_vec(), v[13]);
    }

    #[test]
    fn one_dimensional_stream_fills_bins() {
        let mut s = RdSequence::new(1, 0);
        let mut bins = [0usize; 10];
        for _ in 0..1000 {
            bins[(s.next_vec()[0] * 10.0) as usize] += 1;
        }
        assert!(bins.iter().all(|&b| (90..=110).contains(&b)), "{bins:?}");
    }

    #[test]
    fn directions_are_unit() {
        let mut seq = RdSequence::new(direction_dim(5), 1);
        let mut d = vec![0.0; 5];
        for k in 0..200 {
            let u = seq.next_vec();
            unit_direction(k, &u, &mut d);
            assert!((crate::state::norm(&d) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn samplers_stay_in_domain() {
        let domains = [
            SpatialDomain::Box {
                lo: vec![-1.0, 2.0],
                hi: vec![1.0, 3.0],
            },
            SpatialDomain::Ball {
                center: vec![0.5, 0.0, 1.0],
                radius: 2.0,
            },
            SpatialDomain::Sphere {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
        ];
        for spatial in domains {
            let n = spatial.dim();
            let dom = Domain::new(0.0, 2.0, spatial).unwrap();
            let mut s = LowDiscrepancySampler::new(dom.clone(), 3);
            let mut x = vec![0.0; n];
            for _ in 0..500 {
                let t = s.next_point(&mut x);
                assert!(dom.contains(t, &x), "{t} {x:?}");
            }
        }
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(Domain::new(
            1.0,
            0.0,
            SpatialDomain::Ball {
                center: vec![0.0],
                radius: 1.0
            }
        )
        .is_err());
        assert!(Domain::new(
            0.0,
            1.0,
            SpatialDomain::Box {
                lo: vec![1.0],
                hi: vec![0.0]
            }
        )
        .is_err());
    }
}
