//! Exact constrained ergodic optimization on sofic shifts.
//!
//! Shifts, locally constant potentials and invariant measures are all
//! represented exactly: measures as rational edge frequencies on a
//! higher-block graph, rotation sets as rational polytopes. On top of that
//! sit an exact simplex solver for relative maximization and a constructive
//! synthesis of periodic orbits whose rotation vector hits a rational target
//! exactly.

// Dense linear algebra reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod measure;
pub mod optimizer;
pub mod potential;
pub mod random;
pub mod rational;
pub mod symbolic;
pub mod synthesis;

pub use error::{Error, Result};
pub use rational::{q, RatVec, Rational};
