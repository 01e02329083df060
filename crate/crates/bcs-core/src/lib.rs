//! Exact arithmetic for Boolean polynomial systems over 𝔽₂[x₁..xₙ]/⟨xᵢ²+xᵢ⟩,
//! variable orderings with frequency-spectrum features, and an instrumented
//! characteristic-set solver built on zero-decomposition.

pub mod anf;
pub mod error;
pub mod order;
pub mod solver;
pub mod system;

pub use anf::{Assignment, Monomial, Poly, VarId, MAX_VARS};
pub use error::CoreError;
pub use order::{Spectrum, VarOrder};
pub use solver::{
    decompose_step, simplify, solve_all, solve_with_ordering, CostMeter, DecomposeStep,
    Simplified, SolveResult, TriangularSet, WorkState, DEFAULT_CAP,
};
pub use system::BoolSystem;
