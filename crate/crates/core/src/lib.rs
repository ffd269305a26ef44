//! Orbit-reflexivity analysis for real square matrices.
//!
//! A matrix `T` acts on `R^N`; its orbit is the power set `{T^n : n >= 0}`
//! and its real scaled orbit is `{lambda T^n : lambda in R, n >= 0}`. `T` is
//! *orbit reflexive* when every matrix `S` with `Sx` in the closure of
//! `Orb(T)x` for all `x` already lies in the closure of `Orb(T)`, and
//! *R-orbit reflexive* with `R-Orb(T)` in place of `Orb(T)`. Whether a given
//! `T` has these properties is decided by its real Jordan structure and by
//! rational dependence relations among its rotation angles.
//!
//! The crate is organized along that pipeline:
//!
//! - [`matrix`]: dense matrices generic over the scalar, with exact
//!   elimination for rational-like fields and Jacobi SVD for floats;
//! - [`qspan`]: exact arithmetic in finitely generated Q-vector spaces of
//!   reals, rational-kernel relation certificates, LLL lattice reduction and
//!   heuristic integer-relation detection;
//! - [`jordan`]: characteristic polynomials, certified root finding, real
//!   Jordan block structure extraction, and orbit finiteness;
//! - [`classify`]: the orbit / R-orbit reflexivity verdicts with evidence;
//! - [`torus`]: Kronecker orbits on the k-torus — ergodic averages, grid
//!   occupancy and approximate power location;
//! - [`witness`]: explicit counterexample operators for the negative
//!   verdicts, with reproducible pointwise verification.
//!
//! Angles are handled as *turns* (the angle divided by a full revolution)
//! throughout, so rationality questions never involve pi.

pub mod classify;
pub mod config;
pub mod jordan;
pub mod matrix;
pub mod qspan;
pub mod torus;
pub mod witness;

pub use config::Config;
pub use matrix::Matrix;

/// Exact rational scalar used by the exact tier.
pub type Rational = num_rational::BigRational;

/// Arbitrary-precision signed integer.
pub type Int = num_bigint::BigInt;

/// Dense matrix over exact rationals.
pub type MatQ = Matrix<Rational>;

/// Dense matrix over f64.
pub type MatF = Matrix<f64>;
