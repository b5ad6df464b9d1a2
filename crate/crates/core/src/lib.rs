//! Numerical p-mechanics on the Heisenberg group H¹.
//!
//! Observables are complex functions k(s, x, y) sampled on periodic grids.
//! The crate provides their group convolution, the antiderivative in the
//! central variable, the p-mechanical bracket, and the quantum (ħ ≠ 0) and
//! classical (ħ = 0) representations of all of these.

pub mod bargmann;
pub mod catalog;
pub mod convolution;
pub mod error;
pub mod grid;
pub mod heisenberg;
pub mod oscillator;
pub mod dynamics;
pub mod pbracket;
pub mod pdo;
pub mod presets;
pub mod schrodinger;
pub mod verify;

pub use error::{PmechError, Result};
