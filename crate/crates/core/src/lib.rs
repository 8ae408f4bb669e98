//! Hasse–Witt matrices of hyperelliptic curves `y^2 = f(x)` of genus at most
//! three, computed modulo every admissible prime `p <= N` at once.
//!
//! The pipeline is:
//!
//! 1. [`curve`] validates `f`, computes its discriminant and enumerates the
//!    admissible primes with a segmented sieve.
//! 2. [`transition`] derives, for each row index `i`, an integer polynomial
//!    matrix `M(n)` and denominator `D(n)` advancing a window of `r`
//!    coefficients of `f^n` to the matching window of `f^(n+1)`.
//! 3. [`remainder`] evaluates the reduced partial products
//!    `V * A_0 * ... * A_{j-1} mod m_j` for all `j` with an accumulating
//!    remainder forest.
//! 4. [`hassewitt`] drives one forest per row, strips the `p`-adic content of
//!    the denominators and assembles `W_p`.
//!
//! [`bigmat`] supplies the exact matrix arithmetic, including a four-prime
//! number-theoretic-transform product for matrices with very large entries.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bigmat;
pub mod curve;
pub mod hassewitt;
pub mod meter;
pub mod poly;
pub mod remainder;
pub mod transition;

mod error;

pub use error::Error;

pub use bigmat::{IntMatrix, Multiplier, NttContext};
pub use curve::{AdmissiblePrimeSet, CurveModel};
pub use hassewitt::{HasseWittOptions, HasseWittRecord, RecordSource};
pub use meter::MemoryMeter;
pub use remainder::ForestPlan;
pub use transition::TransitionSystem;
