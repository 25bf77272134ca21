//! Viable pairs `(R, p)`, the modified field `f ∘ p`, and sampled checks of
//! the conditions that make `R` a solution region.

mod checks;
mod pair;
mod piecewise;
mod report;

pub use checks::*;
pub use pair::*;
pub use piecewise::*;
pub use report::*;
