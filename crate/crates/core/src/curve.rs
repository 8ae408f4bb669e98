//! Curve model, discriminant and admissible-prime enumeration.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveError {
    /// No coefficients, or the last one given is zero.
    ZeroLeading,
    NotSquarefree,
    UnsupportedGenus { degree: usize },
}

impl fmt::Display for CurveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveError::ZeroLeading => write!(f, "leading coefficient is zero"),
            CurveError::NotSquarefree => write!(f, "f(x) is not squarefree (zero discriminant)"),
            CurveError::UnsupportedGenus { degree } => {
                write!(f, "degree {degree} does not give genus 1, 2 or 3")
            }
        }
    }
}

impl core::error::Error for CurveError {}

/// A validated hyperelliptic curve `y^2 = f(x)` with `deg f` in `3..=8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveModel {
    coeffs: Vec<BigInt>,
    genus: usize,
    dimension: usize,
    discriminant: BigInt,
}

impl CurveModel {
    /// `f_0, ..., f_d`, lowest degree first.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &BigInt {
        &self.coeffs[j]
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// Recurrence dimension `r`: `d` when `f_0 != 0`, else `d - 1`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn zero_constant(&self) -> bool {
        self.coeffs[0].is_zero()
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    pub fn leading(&self) -> &BigInt {
        &self.coeffs[self.degree()]
    }

    /// Coefficients reduced into `[0, p)`.
    pub fn coeffs_mod(&self, p: u64) -> Vec<u64> {
        let m = BigInt::from(p);
        self.coeffs
            .iter()
            .map(|c| c.mod_floor(&m).to_u64().expect("residue fits u64"))
            .collect()
    }
}

/// Builds a [`CurveModel`] from `f_0, ..., f_d`.
///
/// Checks run in order: nonzero leading coefficient, squarefreeness, degree.
pub fn validate_curve(coeffs: &[BigInt]) -> Result<CurveModel, CurveError> {
    match coeffs.last() {
        None => return Err(CurveError::ZeroLeading),
        Some(c) if c.is_zero() => return Err(CurveError::ZeroLeading),
        _ => {}
    }
    let discriminant = discriminant(coeffs);
    if discriminant.is_zero() {
        return Err(CurveError::NotSquarefree);
    }
    let degree = coeffs.len() - 1;
    if !(3..=8).contains(&degree) {
        return Err(CurveError::UnsupportedGenus { degree });
    }
    let genus = (degree - 1) / 2;
    let dimension = if coeffs[0].is_zero() { degree - 1 } else { degree };
    Ok(CurveModel {
        coeffs: coeffs.to_vec(),
        genus,
        dimension,
        discriminant,
    })
}

pub fn validate_curve_i64(coeffs: &[i64]) -> Result<CurveModel, CurveError> {
    let c: Vec<BigInt> = coeffs.iter().map(|&x| BigInt::from(x)).collect();
    validate_curve(&c)
}

/// Discriminant `(-1)^(d(d-1)/2) Res(f, f') / f_d` of a polynomial given
/// lowest degree first. Trailing zero coefficients are ignored.
pub fn discriminant(coeffs: &[BigInt]) -> BigInt {
    let mut f = coeffs.to_vec();
    while f.last().is_some_and(Zero::is_zero) {
        f.pop();
    }
    let d = match f.len() {
        0 => return BigInt::zero(),
        n => n - 1,
    };
    if d == 0 {
        return BigInt::zero();
    }
    if d == 1 {
        return BigInt::one();
    }
    let df: Vec<BigInt> = (1..=d).map(|j| &f[j] * BigInt::from(j)).collect();
    let res = resultant(&f, &df);
    let lead = &f[d];
    let (q, r) = res.div_rem(lead);
    debug_assert!(r.is_zero());
    if (d * (d - 1) / 2) % 2 == 1 {
        -q
    } else {
        q
    }
}

/// Resultant of two polynomials (lowest degree first, nonzero leading
/// coefficients) as the determinant of their Sylvester matrix.
pub fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut a = vec![vec![BigInt::zero(); size]; size];
    for row in 0..n {
        for (k, c) in f.iter().rev().enumerate() {
            a[row][row + k] = c.clone();
        }
    }
    for row in 0..m {
        for (k, c) in g.iter().rev().enumerate() {
            a[n + row][row + k] = c.clone();
        }
    }
    bareiss_determinant(a)
}

/// Fraction-free Gaussian elimination.
pub fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = !sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign {
        -det
    } else {
        det
    }
}

/// Why an odd prime was left out of the admissible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    DividesLeading,
    /// Divides `f_0`, or `f_1` when `f_0 = 0`.
    DividesConstant,
    DividesDiscriminant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissiblePrimeSet {
    pub bound: u64,
    pub primes: Vec<u64>,
    pub skipped: Vec<(u64, SkipReason)>,
}

impl AdmissiblePrimeSet {
    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }
}

/// Classifies one odd prime; `None` means admissible.
pub fn classify_prime(curve: &CurveModel, p: u64) -> Option<SkipReason> {
    let pb = BigInt::from(p);
    let divides = |x: &BigInt| x.mod_floor(&pb).is_zero();
    let constant = if curve.zero_constant() {
        curve.coeff(1)
    } else {
        curve.coeff(0)
    };
    if divides(curve.leading()) {
        Some(SkipReason::DividesLeading)
    } else if divides(constant) {
        Some(SkipReason::DividesConstant)
    } else if divides(curve.discriminant()) {
        Some(SkipReason::DividesDiscriminant)
    } else {
        None
    }
}

/// Odd primes `p <= bound` with `p` not dividing `2 f_d disc(f)` nor the
/// constant coefficient of the model, in ascending order.
pub fn admissible_primes(curve: &CurveModel, bound: u64) -> AdmissiblePrimeSet {
    let mut primes = Vec::new();
    let mut skipped = Vec::new();
    for p in primes_up_to(bound) {
        if p == 2 {
            continue;
        }
        match classify_prime(curve, p) {
            None => primes.push(p),
            Some(reason) => skipped.push((p, reason)),
        }
    }
    AdmissiblePrimeSet {
        bound,
        primes,
        skipped,
    }
}

/// Above this bound [`primes_up_to`] switches to the segmented sieve.
pub const PLAIN_SIEVE_LIMIT: u64 = 1 << 24;

/// Entries per segment of [`segmented_sieve`].
pub const SIEVE_WINDOW: u64 = 1 << 20;

pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound <= PLAIN_SIEVE_LIMIT {
        plain_sieve(bound)
    } else {
        segmented_sieve(bound, SIEVE_WINDOW)
    }
}

pub fn plain_sieve(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Sieve of Eratosthenes over windows of `window` integers, using base primes
/// up to `sqrt(bound)`. Memory is `O(window + sqrt(bound))` besides output.
pub fn segmented_sieve(bound: u64, window: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let root = bound.isqrt();
    let base = plain_sieve(root);
    let mut out = Vec::new();
    let mut lo = 2u64;
    let mut composite = vec![false; window as usize];
    while lo <= bound {
        let hi = lo.saturating_add(window - 1).min(bound);
        let span = (hi - lo + 1) as usize;
        composite[..span].fill(false);
        for &q in &base {
            if q * q > hi {
                break;
            }
            let start = (q * q).max(lo.div_ceil(q) * q);
            let mut j = start;
            while j <= hi {
                composite[(j - lo) as usize] = true;
                j += q;
            }
        }
        out.extend((0..span).filter(|&i| !composite[i]).map(|i| lo + i as u64));
        lo = hi + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn classic_discriminants() {
        assert_eq!(discriminant(&big(&[1, 1, 0, 1])), BigInt::from(-31));
        assert_eq!(discriminant(&big(&[1, 0, 1])), BigInt::from(-4));
        assert_eq!(discriminant(&big(&[1, 2, 1])), BigInt::zero());
        assert_eq!(discriminant(&big(&[0, 1, 0, 1])), BigInt::from(-4));
    }

    #[test]
    fn cubic_discriminant_formula() {
        // b^2c^2 - 4ac^3 - 4b^3d - 27a^2d^2 + 18abcd for a x^3 + b x^2 + c x + d
        for (a, b, c, d) in [(2i64, -3, 5, 7), (1, 0, -7, 6), (-4, 9, 1, -2), (3, 3, 3, 3)] {
            let expect = b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d
                + 18 * a * b * c * d;
            assert_eq!(discriminant(&big(&[d, c, b, a])), BigInt::from(expect));
        }
    }

    #[test]
    fn validation_shapes() {
        let c = validate_curve_i64(&[19, 17, 13, 11, 7, 5, 3, 2]).unwrap();
        assert_eq!((c.genus(), c.dimension()), (3, 7));
        let c = validate_curve_i64(&[0, 1, 0, 1]).unwrap();
        assert_eq!((c.genus(), c.dimension(), c.zero_constant()), (1, 2, true));
        assert_eq!(validate_curve_i64(&[1, 2, 1]), Err(CurveError::NotSquarefree));
        assert_eq!(validate_curve_i64(&[1, 3, 3, 1]), Err(CurveError::NotSquarefree));
        assert_eq!(validate_curve_i64(&[1, 1, 1, 0]), Err(CurveError::ZeroLeading));
        assert_eq!(validate_curve_i64(&[]), Err(CurveError::ZeroLeading));
        assert_eq!(
            validate_curve_i64(&[1, 0, 1]),
            Err(CurveError::UnsupportedGenus { degree: 2 })
        );
        assert_eq!(
            validate_curve_i64(&[1, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
            Err(CurveError::UnsupportedGenus { degree: 9 })
        );
    }

    #[test]
    fn admissible_small_examples() {
        let c = validate_curve_i64(&[1, 1, 0, 1]).unwrap();
        assert_eq!(admissible_primes(&c, 20).primes, vec![3, 5, 7, 11, 13, 17, 19]);
        let set = admissible_primes(&c, 40);
        assert!(!set.contains(31));
        assert_eq!(set.skipped, vec![(31, SkipReason::DividesDiscriminant)]);
        assert!(admissible_primes(&c, 2).primes.is_empty());
        let quartic = validate_curve_i64(&[1, 0, 0, 1, 3]).unwrap();
        assert!(!admissible_primes(&quartic, 50).contains(3));
    }

    #[test]
    fn sieves_agree() {
        for n in [0u64, 1, 2, 3, 100, 1000, 65_537] {
            assert_eq!(plain_sieve(n), segmented_sieve(n, 64));
            assert_eq!(plain_sieve(n), segmented_sieve(n, 1 << 10));
        }
        assert_eq!(plain_sieve(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }
}
