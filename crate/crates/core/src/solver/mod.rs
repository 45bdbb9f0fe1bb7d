//! Damped Newton per ε-level, the ε-ladder, the coercivity certificate and the
//! multistart uniqueness check.

mod coercivity;
mod ladder;
mod newton;
mod uniqueness;

pub use coercivity::{coercivity_radius, CoercivityCertificate};
pub use ladder::{geometric_schedule, harmonic_schedule, run_ladder, run_ladder_partial, LadderConfig, LadderLevel, SolveLadder, Spacing};
pub use newton::{solve_level, NewtonConfig, NewtonTrace};
pub use uniqueness::{multistart_uniqueness_check, UniquenessReport};
