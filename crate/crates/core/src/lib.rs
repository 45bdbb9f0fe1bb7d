//! Solver and diagnostics for singular quasilinear Dirichlet problems
//!
//! ```text
//! −div(φ(|∇u|)∇u) = a(x)/u^α + b(x)u^γ  in Ω,   u > 0 in Ω,   u = 0 on ∂Ω
//! ```
//!
//! The pipeline regularizes the singular term to a_ε/(u+ε)^α with a_ε = min(a, 1/ε),
//! solves each regularized problem on a P1 finite-element space with damped
//! Newton, and walks ε down a ladder with warm starts. Around it sit an
//! N-function toolkit (Φ, Φ̃, Φ*, Luxemburg norms), a hypothesis checker, and
//! numerical checks of the a-priori estimates including the Moser L∞ envelope.

pub mod cli;
pub mod discretization;
pub mod error;
pub mod estimates;
pub mod expr;
pub mod nfunction;
pub mod problem;
pub mod quad;
pub mod solver;

pub use error::{Error, Result};
