//! Localized integration of discontinuous ODEs `x' = f(t, x)` whose
//! right-hand side jumps across surfaces `τ(t, x) = c`.
//!
//! A solution region `R = {h ≤ 0}` with a projection `p` onto it is checked
//! against the Krasovskij envelope of `f`; the modified problem
//! `x' = f(p(t, x))` is then integrated with event location at the surfaces and
//! the trajectory is certified after the fact.

pub mod error;
pub mod integrator;
pub mod krasovskij;
pub mod output;
pub mod pipeline;
pub mod presets;
pub mod regions;
pub mod rhs;
pub mod sampling;
pub mod scenario;
pub mod state;
pub mod verify;
