//! Fast reduction modulo a fixed large integer.
//!
//! A [`Reducer`] precomputes `floor(2^(2n) / m)` by Newton iteration, where
//! `n` is the bit length of `m`, and then reduces with Barrett's method.
//! Dividends longer than `2n` bits are consumed top-down in `n`-bit digits.
//! Small moduli fall back to plain long division.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Multiplier;

/// Below this many bits the reciprocal is computed by a single division.
const NEWTON_BASE_BITS: u64 = 4096;

/// Reciprocal bits kept beyond the quotient length in a Barrett step.
const BARRETT_GUARD_BITS: u64 = 64;

#[derive(Clone, Debug)]
pub struct Reducer {
    m: BigInt,
    bits: u64,
    recip: Option<BigInt>,
}

impl Reducer {
    /// `m` must be positive.
    pub fn new(m: BigInt, mul: &Multiplier) -> Self {
        assert!(m.is_positive(), "modulus must be positive");
        let bits = m.bits();
        let recip = (bits >= mul.barrett_cutoff_bits()).then(|| reciprocal(&m, bits, mul));
        Reducer { m, bits, recip }
    }

    pub fn modulus(&self) -> &BigInt {
        &self.m
    }

    pub fn is_one(&self) -> bool {
        self.m.is_one()
    }

    /// Bytes held by the modulus and its reciprocal.
    pub fn byte_size(&self) -> u64 {
        let r = self.recip.as_ref().map_or(0, |x| x.bits().div_ceil(8));
        self.bits.div_ceil(8) + r
    }

    /// `x mod m` in `[0, m)`.
    pub fn reduce(&self, x: &BigInt, mul: &Multiplier) -> BigInt {
        if self.m.is_one() || x.is_zero() {
            return BigInt::zero();
        }
        let r = match &self.recip {
            Some(recip) if x.bits() > self.bits => self.reduce_magnitude(x.magnitude(), recip, mul),
            _ => return x.mod_floor(&self.m),
        };
        if x.is_negative() && !r.is_zero() {
            &self.m - r
        } else {
            r
        }
    }

    /// `(x div m, x mod m)` for `x >= 0`.
    pub fn div_rem(&self, x: &BigInt, mul: &Multiplier) -> (BigInt, BigInt) {
        assert!(!x.is_negative(), "div_rem takes a non-negative dividend");
        match &self.recip {
            Some(recip) if x.bits() > self.bits => self.div_rem_magnitude(x.magnitude(), recip, mul, true),
            _ => x.div_rem(&self.m),
        }
    }

    fn reduce_magnitude(&self, x: &BigUint, recip: &BigInt, mul: &Multiplier) -> BigInt {
        self.div_rem_magnitude(x, recip, mul, false).1
    }

    /// Quotient (when `want_q`) and remainder of a magnitude above `2^n`.
    fn div_rem_magnitude(&self, x: &BigUint, recip: &BigInt, mul: &Multiplier, want_q: bool) -> (BigInt, BigInt) {
        let n = self.bits;
        let total = x.bits();
        if total <= 2 * n {
            return self.barrett(BigInt::from_biguint(Sign::Plus, x.clone()), recip, mul);
        }
        // Horner over n-bit digits, most significant first; the running
        // remainder stays below m < 2^n, so each step input is < 2^(2n).
        let digits = split_digits(x, n);
        let mut r = BigInt::zero();
        let mut q_digits = Vec::with_capacity(if want_q { digits.len() } else { 0 });
        for d in digits.into_iter().rev() {
            let t = (r << n as usize) + BigInt::from_biguint(Sign::Plus, d);
            let (q, rem) = self.barrett(t, recip, mul);
            if want_q {
                q_digits.push(q);
            }
            r = rem;
        }
        // Quotient digits are below 2^(n+1) and may overlap their neighbours.
        let q = q_digits.into_iter().fold(BigInt::zero(), |acc, d| (acc << n as usize) + d);
        (q, r)
    }

    /// Barrett step for `0 <= x < 2^(2n)`: quotient and remainder.
    fn barrett(&self, x: BigInt, recip: &BigInt, mul: &Multiplier) -> (BigInt, BigInt) {
        let n = self.bits as usize;
        if x < self.m {
            return (BigInt::zero(), x);
        }
        let top = &x >> (n - 1);
        // Only the leading bits of the reciprocal reach the quotient; the
        // truncation costs at most one more correction below.
        let keep = (top.bits() + BARRETT_GUARD_BITS) as usize;
        let drop = (n + 1).saturating_sub(keep);
        let mut q = mul.mul(&top, &(recip >> drop)) >> (n + 1 - drop);
        let mut r = x - mul.mul(&q, &self.m);
        let mut guard = 0;
        while r >= self.m {
            r -= &self.m;
            q += 1u32;
            guard += 1;
            debug_assert!(guard <= 3, "barrett quotient estimate off by more than 3");
        }
        (q, r)
    }
}

fn split_digits(x: &BigUint, n: u64) -> Vec<BigUint> {
    let count = x.bits().div_ceil(n);
    let mask = (BigUint::one() << n as usize) - 1u32;
    let mut out = Vec::with_capacity(count as usize);
    let mut rest = x.clone();
    for _ in 0..count {
        out.push(&rest & &mask);
        rest >>= n as usize;
    }
    out
}

/// `floor(2^(2n) / m)` for an `n`-bit `m`.
pub fn reciprocal(m: &BigInt, n: u64, mul: &Multiplier) -> BigInt {
    debug_assert_eq!(m.bits(), n);
    let two_n = 2 * n as usize;
    if n <= NEWTON_BASE_BITS {
        return (BigInt::one() << two_n) / m;
    }
    let mut x = approx_reciprocal(m, n, mul);
    let mut rem = (BigInt::one() << two_n) - mul.mul(m, &x);
    let mut guard = 0;
    while rem.is_negative() {
        x -= 1u32;
        rem += m;
        guard += 1;
        debug_assert!(guard < 64);
    }
    while &rem >= m {
        x += 1u32;
        rem -= m;
        guard += 1;
        debug_assert!(guard < 64);
    }
    x
}

/// Extra low bits kept when the Newton correction is truncated.
const NEWTON_GUARD_BITS: u64 = 32;

/// `floor(2^(2n) / m)` up to a few units: one Newton step from the
/// reciprocal of the top half of `m`, with no exactness check.
fn approx_reciprocal(m: &BigInt, n: u64, mul: &Multiplier) -> BigInt {
    let two_n = 2 * n as usize;
    if n <= NEWTON_BASE_BITS {
        return (BigInt::one() << two_n) / m;
    }
    let k = n / 2 + 2;
    let h = n - k;
    let r_hi = approx_reciprocal(&(m >> h as usize), k, mul);
    // x0 = r_hi * 2^h; e = 2^(2n) - m x0 is about 2^(2n-k).
    let e = (BigInt::one() << two_n) - (mul.mul(m, &r_hi) << h as usize);
    // x0 e / 2^(2n) only needs the top h + guard bits of e.
    let drop = e.bits().saturating_sub(h + NEWTON_GUARD_BITS);
    let corr = mul.mul(&r_hi, &(&e >> drop as usize)) >> (two_n - h as usize - drop as usize);
    (r_hi << h as usize) + corr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigmat::Multiplier;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_big(rng: &mut ChaCha8Rng, bits: u64) -> BigInt {
        let words = bits.div_ceil(32) as usize;
        let digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
        let x = BigUint::new(digits) >> (words as u64 * 32 - bits) as usize;
        BigInt::from_biguint(Sign::Plus, x | (BigUint::one() << (bits - 1) as usize))
    }

    #[test]
    fn reciprocal_matches_division() {
        let mul = Multiplier::with_cutoffs(2048, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for bits in [65u64, 4097, 5000, 9001, 40_000] {
            let m = random_big(&mut rng, bits);
            let expect = (BigInt::one() << (2 * bits) as usize) / &m;
            assert_eq!(reciprocal(&m, bits, &mul), expect, "bits={bits}");
        }
    }

    #[test]
    fn barrett_reduce_matches_mod_floor() {
        let mul = Multiplier::with_cutoffs(2048, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (mb, xb) in [(70u64, 100u64), (300, 2000), (5000, 9999), (5000, 10000), (6000, 60_000)] {
            let m = random_big(&mut rng, mb);
            let red = Reducer::new(m.clone(), &mul);
            for _ in 0..4 {
                let xbits = rng.gen_range(1..=xb);
                let mut x = random_big(&mut rng, xbits);
                if rng.gen() {
                    x = -x;
                }
                assert_eq!(red.reduce(&x, &mul), x.mod_floor(&m));
            }
        }
    }

    #[test]
    fn div_rem_matches_num_integer() {
        let mul = Multiplier::with_cutoffs(2048, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (mb, xb) in [(70u64, 60u64), (300, 2000), (5000, 10_000), (5000, 10_001), (6000, 60_000)] {
            let m = random_big(&mut rng, mb);
            let red = Reducer::new(m.clone(), &mul);
            let x = random_big(&mut rng, xb);
            assert_eq!(red.div_rem(&x, &mul), x.div_rem(&m));
            let y = &x * &m;
            assert_eq!(red.div_rem(&y, &mul), (x, BigInt::zero()));
        }
    }
}
