//! Low-rank RADI-type iteration for large nonsymmetric algebraic Riccati
//! equations `XCX - XD - AX + B = 0` with factored `B = LB*RB`, `C = LC*RC`.

pub mod cli;
pub mod dense;
pub mod error;
pub mod gen;
pub mod io;
pub mod oracle;
pub mod problem;
pub mod radi;
pub mod shifts;
pub mod solver;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
pub use problem::{NareProblem, Operator, ProblemKind};
pub use radi::{RadiState, SolveOptions, SolveOutcome, StopCause};
pub use shifts::{Orientation, ShiftPair, ShiftStrategy, StrategyKind};

pub type C64 = num_complex::Complex64;
pub type Mat = nalgebra::DMatrix<f64>;
pub type CMat = nalgebra::DMatrix<C64>;
