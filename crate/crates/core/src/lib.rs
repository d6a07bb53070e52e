//! Geometry of pure quantum states.
//!
//! The pure states of an `N`-level system form the complex projective space
//! `CP^{N-1}`, a Kähler manifold carrying the Fubini-Study metric and a
//! compatible symplectic form. For a pair of `N`-level systems the maximally
//! entangled states form an orbit `SU(N)/Z_N` inside `CP^{N²-1}`. This crate
//! provides the numerics to check that this orbit is Lagrangian (half
//! dimensional, with vanishing pullback of the symplectic form) and that its
//! volume is stationary under normal variations.

pub mod bipartite;
pub mod error;
pub mod exec;
pub mod fubini_study;
pub mod io;
pub mod linalg;
pub mod realform;
pub mod report;
pub mod states;
pub mod submanifold;

pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::ComplexMatrix;
pub use report::{CheckReport, ReportFormat};
pub use num_complex::Complex64 as C64;
