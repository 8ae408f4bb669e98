//! Univariate polynomials in `n` with arbitrary-precision coefficients.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Coefficients are stored lowest degree first with no trailing zeros, so the
/// zero polynomial is the empty vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(alloc::vec![c.into()])
    }

    /// `a*n + b`
    pub fn linear(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        Self::new(alloc::vec![b.into(), a.into()])
    }

    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    /// Gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        IntPoly {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Divides every coefficient by `c`, which must divide them all.
    pub fn div_exact(&self, c: &BigInt) -> Self {
        IntPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|x| {
                    let (q, r) = x.div_rem(c);
                    debug_assert!(r.is_zero(), "inexact coefficient division");
                    q
                })
                .collect(),
        }
    }

    /// Exact quotient by `a*n + b` over the integers, if there is one.
    pub fn div_linear(&self, a: i64, b: i64) -> Option<Self> {
        debug_assert!(a != 0);
        if self.is_zero() {
            return Some(Self::zero());
        }
        let a = BigInt::from(a);
        let b = BigInt::from(b);
        // Synthetic division from the top.
        let d = self.coeffs.len() - 1;
        let mut q = alloc::vec![BigInt::zero(); d];
        let mut rem = self.coeffs[d].clone();
        for k in (0..d).rev() {
            let (qk, r) = rem.div_rem(&a);
            if !r.is_zero() {
                return None;
            }
            rem = &self.coeffs[k] - &qk * &b;
            q[k] = qk;
        }
        if rem.is_zero() {
            Some(Self::new(q))
        } else {
            None
        }
    }

    /// Horner evaluation at an integer point.
    pub fn eval(&self, n: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * n + c;
        }
        acc
    }

    pub fn eval_u64(&self, n: u64) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc *= n;
            acc += c;
        }
        acc
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = IntPoly::constant(1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Flips the sign if needed so the leading coefficient is positive.
    pub fn normalized_sign(self) -> (Self, bool) {
        match self.leading() {
            Some(c) if c.is_negative() => (-self, true),
            _ => (self, false),
        }
    }

    /// Renders as `c_0 + c_1*n + c_2*n^2 + ...`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if self.is_zero() {
            s.push('0');
            return s;
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                s.push_str(" + ");
            }
            match k {
                0 => write!(s, "{c}"),
                1 => write!(s, "{c}*n"),
                _ => write!(s, "{c}*n^{k}"),
            }
            .expect("writing to a String");
        }
        s
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Add<&IntPoly> for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigInt::zero();
        IntPoly::new(
            (0..len)
                .map(|k| self.coeffs.get(k).unwrap_or(&zero) + rhs.coeffs.get(k).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub<&IntPoly> for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        self + &(-rhs.clone())
    }
}

impl Mul<&IntPoly> for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = alloc::vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl Neg for IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl One for IntPoly {
    fn one() -> Self {
        IntPoly::constant(1)
    }
}

impl Mul for IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: IntPoly) -> IntPoly {
        &self * &rhs
    }
}
