//! Exact arithmetic on small matrices with huge integer entries.
//!
//! [`mat_mul_classical`] is the `O(r^3)` schoolbook product. [`mat_mul_fft`]
//! multiplies through four-prime number-theoretic transforms and needs only
//! `O(r^2)` transforms. [`Multiplier`] picks between them by operand size and
//! also hands out [`Reducer`]s for fast modular reduction.

mod fft;
mod matrix;
pub mod ntt;
mod reduce;

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;

pub use fft::{balanced_digits, choose_chunk_width, chunk_count, mat_mul_fft, mat_mul_fft_split, MAX_CHUNK_BITS};
pub use matrix::{mat_mul_classical, IntMatrix};
pub(crate) use matrix::bigint_bytes;
pub use ntt::{NttContext, TransformCounts, MAX_LOG_LEN, NTT_PRIMES};
pub use reduce::{reciprocal, Reducer};

/// Default entry size (bits) at which a product with as many entry products
/// as transforms switches to the transform. Other shapes scale it by
/// `(transforms / products)^1.5`, so a scalar product switches near `2^17`.
pub const DEFAULT_FFT_CUTOFF_BITS: u64 = 3 << 13;

/// Like [`DEFAULT_FFT_CUTOFF_BITS`] for block products, where one side is at
/// least [`SPLIT_RATIO`] times longer; scaled by `transforms / products`
/// counted per block.
pub const DEFAULT_SPLIT_CUTOFF_BITS: u64 = 3 << 11;

/// Length ratio from which the longer side is cut into blocks.
pub const SPLIT_RATIO: u64 = 4;

/// Default modulus size (bits) at which reductions switch to Barrett.
pub const DEFAULT_BARRETT_CUTOFF_BITS: u64 = 1 << 13;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BigmatError {
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    /// The product needs a longer transform than the primes support.
    ContextTooSmall { needed_log_len: u32, max_log_len: u32 },
}

impl fmt::Display for BigmatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BigmatError::DimensionMismatch { left, right } => write!(
                f,
                "cannot multiply {}x{} by {}x{}",
                left.0, left.1, right.0, right.1
            ),
            BigmatError::ContextTooSmall {
                needed_log_len,
                max_log_len,
            } => write!(
                f,
                "transform length 2^{needed_log_len} exceeds the supported 2^{max_log_len}"
            ),
        }
    }
}

impl core::error::Error for BigmatError {}

#[derive(Clone, Copy)]
enum Route {
    Classical,
    Fft,
    Split,
}

/// Size-dispatching multiplier shared by the whole pipeline.
///
/// Operands whose smaller side is below the FFT cutoff go through
/// schoolbook / `num-bigint` multiplication; larger ones through the
/// transform. The context is immutable apart from its counters, so one
/// `Multiplier` can be shared across threads.
#[derive(Debug)]
pub struct Multiplier {
    ctx: NttContext,
    fft_cutoff_bits: u64,
    split_cutoff_bits: u64,
    /// Scale the cutoffs by product shape; off for flat test cutoffs.
    by_shape: bool,
    barrett_cutoff_bits: u64,
}

impl Default for Multiplier {
    fn default() -> Self {
        Self::new()
    }
}

impl Multiplier {
    pub fn new() -> Self {
        Multiplier {
            split_cutoff_bits: DEFAULT_SPLIT_CUTOFF_BITS,
            by_shape: true,
            ..Self::with_cutoffs(DEFAULT_FFT_CUTOFF_BITS, DEFAULT_BARRETT_CUTOFF_BITS)
        }
    }

    /// Flat cutoffs: every product whose shorter side reaches
    /// `fft_cutoff_bits` goes through the transform, whatever its shape.
    pub fn with_cutoffs(fft_cutoff_bits: u64, barrett_cutoff_bits: u64) -> Self {
        Multiplier {
            ctx: NttContext::new(),
            fft_cutoff_bits,
            split_cutoff_bits: fft_cutoff_bits,
            by_shape: false,
            barrett_cutoff_bits: barrett_cutoff_bits.max(64),
        }
    }

    pub fn context(&self) -> &NttContext {
        &self.ctx
    }

    pub fn fft_cutoff_bits(&self) -> u64 {
        self.fft_cutoff_bits
    }

    pub fn barrett_cutoff_bits(&self) -> u64 {
        self.barrett_cutoff_bits
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        if a.bits().min(b.bits()) < self.split_cutoff_bits.min(self.fft_cutoff_bits) {
            return a * b;
        }
        let x = IntMatrix::scalar(a.clone());
        let y = IntMatrix::scalar(b.clone());
        match self.route(a.bits(), b.bits(), (1, 1, 1)) {
            Route::Classical => a * b,
            route => self
                .run(route, &x, &y)
                .expect("1x1 operands always agree")
                .into_entries()
                .pop()
                .expect("1x1 product"),
        }
    }

    pub fn mat_mul(&self, a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix, BigmatError> {
        let route = self.route(a.max_bits(), b.max_bits(), (a.rows(), a.cols(), b.cols()));
        self.run(route, a, b)
    }

    fn run(&self, route: Route, a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix, BigmatError> {
        match route {
            Route::Classical => mat_mul_classical(a, b),
            Route::Fft => mat_mul_fft(&self.ctx, a, b),
            Route::Split => mat_mul_fft_split(&self.ctx, a, b),
        }
    }

    /// Picks the algorithm for an `r x s` by `s x u` product whose entries
    /// have at most `left` and `right` bits.
    fn route(&self, left: u64, right: u64, (r, s, u): (usize, usize, usize)) -> Route {
        let (short, long) = (left.min(right), left.max(right));
        let products = (r * s * u) as u64;
        if long >= SPLIT_RATIO * short {
            let long_entries = if left >= right { r * s } else { s * u };
            let transforms = (long_entries + r * u) as u64;
            let cutoff = match self.by_shape {
                true => self.split_cutoff_bits * transforms / products,
                false => self.split_cutoff_bits,
            };
            if short >= cutoff {
                return Route::Split;
            }
            return Route::Classical;
        }
        let transforms = (r * s + s * u + r * u) as u64;
        let cutoff = match self.by_shape {
            // base * (T/P)^1.5
            true => {
                let scaled = self.fft_cutoff_bits as u128 * transforms as u128;
                let root = (((transforms as u128) << 32) / products as u128).isqrt();
                (scaled * root / products as u128 >> 16) as u64
            }
            false => self.fft_cutoff_bits,
        };
        if short >= cutoff {
            Route::Fft
        } else {
            Route::Classical
        }
    }

    /// Row vector times matrix.
    pub fn vec_mat_mul(&self, v: &[BigInt], a: &IntMatrix) -> Result<Vec<BigInt>, BigmatError> {
        let row = IntMatrix::row_vector(v.to_vec());
        Ok(self.mat_mul(&row, a)?.into_entries())
    }

    pub fn reducer(&self, m: BigInt) -> Reducer {
        Reducer::new(m, self)
    }
}

/// Row vector times matrix with the classical product.
pub fn vec_mat_mul(v: &[BigInt], a: &IntMatrix) -> Result<Vec<BigInt>, BigmatError> {
    let row = IntMatrix::row_vector(v.to_vec());
    Ok(mat_mul_classical(&row, a)?.into_entries())
}
