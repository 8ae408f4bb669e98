use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::BigmatError;

/// Dense row-major matrix of arbitrary-precision integers.
///
/// Row vectors are `1 x r` matrices; most of the pipeline stores them as plain
/// `Vec<BigInt>` and converts at the multiplication boundary.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(r: usize) -> Self {
        let mut m = Self::zeros(r, r);
        for i in 0..r {
            m.data[i * r + i] = BigInt::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        IntMatrix { rows, cols, data }
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().cloned().map(Into::into));
        }
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn row_vector(v: Vec<BigInt>) -> Self {
        let c = v.len();
        IntMatrix::from_vec(1, c, v)
    }

    pub fn scalar(x: BigInt) -> Self {
        IntMatrix::from_vec(1, 1, vec![x])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i * self.cols + j] = x;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [BigInt] {
        &mut self.data
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Largest bit length of any entry.
    pub fn max_bits(&self) -> u64 {
        self.data.iter().map(BigInt::bits).max().unwrap_or(0)
    }

    /// Approximate heap footprint of the entries.
    pub fn byte_size(&self) -> u64 {
        self.data.iter().map(bigint_bytes).sum()
    }
}

pub(crate) fn bigint_bytes(x: &BigInt) -> u64 {
    x.bits().div_ceil(8)
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

/// Schoolbook `O(r^3)` product.
pub fn mat_mul_classical(a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix, BigmatError> {
    if a.cols != b.rows {
        return Err(BigmatError::DimensionMismatch {
            left: (a.rows, a.cols),
            right: (b.rows, b.cols),
        });
    }
    let mut out = IntMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a.get(i, k);
            if x.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let y = b.get(k, j);
                if !y.is_zero() {
                    out.data[i * b.cols + j] += x * y;
                }
            }
        }
    }
    Ok(out)
}
