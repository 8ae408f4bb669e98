//! Small-primes FFT product of integer matrices.
//!
//! Every entry `u` is written as `F(2^c)` for a polynomial `F` with balanced
//! digits in `[-2^(c-1), 2^(c-1))`. The matrix of polynomials is multiplied as
//! a polynomial with matrix coefficients: one forward transform per input
//! entry, an `r x r` product of Fourier coefficients at every frequency, and
//! one inverse transform per output entry. Four 62-bit primes and a CRT step
//! recover the exact integer coefficients, which are then evaluated at `2^c`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};

use super::matrix::IntMatrix;
use super::ntt::{NttContext, NTT_PRIMES};
use super::BigmatError;

/// Upper bound on the digit width; digits must fit an `i128` with headroom.
pub const MAX_CHUNK_BITS: u32 = 120;

/// Product of the four transform primes.
fn prime_product() -> BigUint {
    NTT_PRIMES.iter().fold(BigUint::from(1u32), |acc, &p| acc * p)
}

/// Number of balanced base-`2^c` digits used for a `bits`-bit magnitude.
pub fn chunk_count(bits: u64, c: u32) -> u64 {
    bits.div_ceil(c as u64) + 1
}

/// Largest digit width `c` such that `chunks * 2^(2c) * r * 2 < p1 p2 p3 p4`,
/// capped at [`MAX_CHUNK_BITS`].
pub fn choose_chunk_width(entry_bits: u64, r: usize) -> u32 {
    let bound = prime_product();
    let entry_bits = entry_bits.max(1);
    for c in (1..=MAX_CHUNK_BITS).rev() {
        let lhs = (BigUint::from(chunk_count(entry_bits, c)) * BigUint::from(r.max(1)) * 2u32)
            << (2 * c as usize);
        if lhs < bound {
            return c;
        }
    }
    1
}

/// Balanced digit expansion `x = sum d_k 2^(c k)` with `|d_k| <= 2^(c-1)`.
pub fn balanced_digits(x: &BigInt, c: u32) -> Vec<i128> {
    debug_assert!((1..=MAX_CHUNK_BITS).contains(&c));
    let limbs: Vec<u64> = x.magnitude().iter_u64_digits().collect();
    let bits = x.bits();
    if bits == 0 {
        return Vec::new();
    }
    let n = bits.div_ceil(c as u64);
    let full = 1i128 << c;
    let half = 1i128 << (c - 1);
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut carry = 0i128;
    for k in 0..n {
        let field = extract_bits(&limbs, k * c as u64, c) as i128 + carry;
        if field >= half {
            out.push(field - full);
            carry = 1;
        } else {
            out.push(field);
            carry = 0;
        }
    }
    if carry != 0 {
        out.push(carry);
    }
    if x.sign() == Sign::Minus {
        for d in out.iter_mut() {
            *d = -*d;
        }
    }
    out
}

/// Bits `[offset, offset + width)` of a little-endian limb slice.
fn extract_bits(limbs: &[u64], offset: u64, width: u32) -> u128 {
    let idx = (offset / 64) as usize;
    let shift = (offset % 64) as u32;
    let word = |i: usize| limbs.get(i).copied().unwrap_or(0) as u128;
    let lo = word(idx) | (word(idx + 1) << 64);
    let mut v = lo >> shift;
    if shift > 0 {
        v |= word(idx + 2) << (128 - shift);
    }
    if width < 128 {
        v &= (1u128 << width) - 1;
    }
    v
}

/// Exact product `a * b` through the four-prime transform.
///
/// Runs exactly `a.rows*a.cols + b.rows*b.cols` forward and `a.rows*b.cols`
/// inverse transforms per prime.
pub fn mat_mul_fft(ctx: &NttContext, a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix, BigmatError> {
    if a.cols() != b.rows() {
        return Err(BigmatError::DimensionMismatch {
            left: (a.rows(), a.cols()),
            right: (b.rows(), b.cols()),
        });
    }
    let (rows, inner, cols) = (a.rows(), a.cols(), b.cols());
    let entry_bits = a.max_bits().max(b.max_bits());
    let c = choose_chunk_width(entry_bits, inner);

    let a_digits: Vec<Vec<i128>> = a.entries().iter().map(|x| balanced_digits(x, c)).collect();
    let b_digits: Vec<Vec<i128>> = b.entries().iter().map(|x| balanced_digits(x, c)).collect();
    let la = a_digits.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let lb = b_digits.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let out_len = la + lb - 1;
    let log_len = out_len.next_power_of_two().trailing_zeros();
    if log_len > ctx.max_log_len() {
        return Err(BigmatError::ContextTooSmall {
            needed_log_len: log_len,
            max_log_len: ctx.max_log_len(),
        });
    }
    let len = 1usize << log_len;

    // residues[prime][entry] holds the first `out_len` output coefficients.
    let mut residues: Vec<Vec<Vec<u64>>> = Vec::with_capacity(NTT_PRIMES.len());
    for prime in 0..NTT_PRIMES.len() {
        let field = ctx.field(prime);
        let tw = ctx.twiddles(prime, log_len);
        let transform = |digits: &Vec<i128>| {
            let mut buf = vec![0u64; len];
            for (slot, &d) in buf.iter_mut().zip(digits) {
                *slot = field.reduce_i128(d);
            }
            ctx.forward(prime, &tw, &mut buf);
            buf
        };
        let fa: Vec<Vec<u64>> = a_digits.iter().map(transform).collect();
        let fb: Vec<Vec<u64>> = b_digits.iter().map(transform).collect();

        let mut out = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let mut acc = vec![0u64; len];
                for k in 0..inner {
                    let x = &fa[i * inner + k];
                    let y = &fb[k * cols + j];
                    for ((s, &u), &v) in acc.iter_mut().zip(x).zip(y) {
                        *s = field.add(*s, field.redc(u as u128 * v as u128));
                    }
                }
                ctx.inverse(prime, &tw, &mut acc);
                acc.truncate(out_len);
                out.push(acc);
            }
        }
        residues.push(out);
    }

    let mut data = Vec::with_capacity(rows * cols);
    for e in 0..rows * cols {
        let mut acc = SignedAccumulator::new(out_len as u64 * c as u64 + 256);
        for t in 0..out_len {
            let x = [
                residues[0][e][t],
                residues[1][e][t],
                residues[2][e][t],
                residues[3][e][t],
            ];
            let (neg, mag) = ctx.garner.reconstruct(&ctx.fields, x);
            acc.add_shifted(neg, &mag, t as u64 * c as u64);
        }
        data.push(acc.finish());
    }
    Ok(IntMatrix::from_vec(rows, cols, data))
}

/// Transform length (log) for block products: the short side has `short`
/// digits, the long side `long`. Picks the length that minimises total
/// butterfly work over all blocks.
fn block_log_len(short: usize, long: usize) -> u32 {
    let full = (short + long - 1).next_power_of_two().trailing_zeros();
    let first = (2 * short).next_power_of_two().trailing_zeros().min(full);
    let cost = |log: u32| {
        let len = 1usize << log;
        let block = len - short + 1;
        long.div_ceil(block) as u64 * len as u64 * log.max(1) as u64
    };
    (first..=full.min(first + 3)).min_by_key(|&l| cost(l)).unwrap_or(full)
}

/// Exact product when the entries of one side are much longer than those
/// of the other.
///
/// The long side's digit sequences are cut into blocks. The short side is
/// transformed once; each block then costs one forward transform per long
/// entry and one inverse per output entry, with the block products
/// overlapping by the short length.
pub fn mat_mul_fft_split(ctx: &NttContext, a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix, BigmatError> {
    if a.cols() != b.rows() {
        return Err(BigmatError::DimensionMismatch {
            left: (a.rows(), a.cols()),
            right: (b.rows(), b.cols()),
        });
    }
    let (rows, inner, cols) = (a.rows(), a.cols(), b.cols());
    let long_left = a.max_bits() >= b.max_bits();
    let c = choose_chunk_width(a.max_bits().min(b.max_bits()), inner);
    let digits = |m: &IntMatrix| -> Vec<Vec<i128>> { m.entries().iter().map(|x| balanced_digits(x, c)).collect() };
    let (a_digits, b_digits) = (digits(a), digits(b));
    let (short, long) = if long_left { (&b_digits, &a_digits) } else { (&a_digits, &b_digits) };
    let short_len = short.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let long_len = long.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let log_len = block_log_len(short_len, long_len);
    if log_len > ctx.max_log_len() {
        return Err(BigmatError::ContextTooSmall {
            needed_log_len: log_len,
            max_log_len: ctx.max_log_len(),
        });
    }
    let len = 1usize << log_len;
    let block = len - short_len + 1;
    let twiddles: Vec<_> = (0..NTT_PRIMES.len()).map(|p| ctx.twiddles(p, log_len)).collect();
    let transform = |prime: usize, digits: &[i128]| -> Option<Vec<u64>> {
        if digits.is_empty() {
            return None;
        }
        let field = ctx.field(prime);
        let mut buf = vec![0u64; len];
        for (slot, &d) in buf.iter_mut().zip(digits) {
            *slot = field.reduce_i128(d);
        }
        ctx.forward(prime, &twiddles[prime], &mut buf);
        Some(buf)
    };
    // fixed[prime][entry]
    let fixed: Vec<Vec<Option<Vec<u64>>>> = (0..NTT_PRIMES.len())
        .map(|prime| short.iter().map(|d| transform(prime, d)).collect())
        .collect();

    let total_bits = (short_len + long_len) as u64 * c as u64 + 256;
    let mut accs: Vec<SignedAccumulator> = (0..rows * cols).map(|_| SignedAccumulator::new(total_bits)).collect();
    for start in (0..long_len).step_by(block) {
        let out_len = block.min(long_len - start) + short_len - 1;
        // residues[prime][entry]
        let mut residues: Vec<Vec<Option<Vec<u64>>>> = Vec::with_capacity(NTT_PRIMES.len());
        for prime in 0..NTT_PRIMES.len() {
            let field = ctx.field(prime);
            let pieces: Vec<Option<Vec<u64>>> = long
                .iter()
                .map(|d| {
                    let lo = start.min(d.len());
                    transform(prime, &d[lo..(start + block).min(d.len())])
                })
                .collect();
            let mut out = Vec::with_capacity(rows * cols);
            for i in 0..rows {
                for j in 0..cols {
                    let mut acc: Option<Vec<u64>> = None;
                    for k in 0..inner {
                        let (x, y) = if long_left {
                            (&pieces[i * inner + k], &fixed[prime][k * cols + j])
                        } else {
                            (&fixed[prime][i * inner + k], &pieces[k * cols + j])
                        };
                        let (Some(x), Some(y)) = (x, y) else { continue };
                        let acc = acc.get_or_insert_with(|| vec![0u64; len]);
                        for ((s, &u), &v) in acc.iter_mut().zip(x).zip(y) {
                            *s = field.add(*s, field.redc(u as u128 * v as u128));
                        }
                    }
                    if let Some(acc) = acc.as_mut() {
                        ctx.inverse(prime, &twiddles[prime], acc);
                        acc.truncate(out_len);
                    }
                    out.push(acc);
                }
            }
            residues.push(out);
        }
        for (e, acc) in accs.iter_mut().enumerate() {
            let [Some(r0), Some(r1), Some(r2), Some(r3)] = [0, 1, 2, 3].map(|p| residues[p][e].as_ref()) else {
                continue;
            };
            for t in 0..out_len {
                let (neg, mag) = ctx.garner.reconstruct(&ctx.fields, [r0[t], r1[t], r2[t], r3[t]]);
                acc.add_shifted(neg, &mag, (start + t) as u64 * c as u64);
            }
        }
    }
    let data = accs.into_iter().map(SignedAccumulator::finish).collect();
    Ok(IntMatrix::from_vec(rows, cols, data))
}

/// Sums signed 256-bit terms at arbitrary bit offsets, keeping positive and
/// negative parts apart so carries stay amortised constant time.
struct SignedAccumulator {
    pos: Vec<u64>,
    neg: Vec<u64>,
}

impl SignedAccumulator {
    fn new(bits: u64) -> Self {
        let limbs = bits.div_ceil(64) as usize + 2;
        SignedAccumulator {
            pos: vec![0; limbs],
            neg: vec![0; limbs],
        }
    }

    fn add_shifted(&mut self, negative: bool, mag: &[u64; 4], offset: u64) {
        if mag.iter().all(|&w| w == 0) {
            return;
        }
        let target = if negative { &mut self.neg } else { &mut self.pos };
        let idx = (offset / 64) as usize;
        let shift = (offset % 64) as u32;
        let mut shifted = [0u64; 5];
        if shift == 0 {
            shifted[..4].copy_from_slice(mag);
        } else {
            for i in 0..4 {
                shifted[i] |= mag[i] << shift;
                shifted[i + 1] = mag[i] >> (64 - shift);
            }
        }
        let mut carry = false;
        let mut i = idx;
        for &w in &shifted {
            let (s1, c1) = target[i].overflowing_add(w);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            target[i] = s2;
            carry = c1 || c2;
            i += 1;
        }
        while carry {
            let (s, c) = target[i].overflowing_add(1);
            target[i] = s;
            carry = c;
            i += 1;
        }
    }

    fn finish(self) -> BigInt {
        let to_big = |limbs: Vec<u64>| {
            let mut digits = Vec::with_capacity(limbs.len() * 2);
            for w in limbs {
                digits.push(w as u32);
                digits.push((w >> 32) as u32);
            }
            BigInt::from_biguint(Sign::Plus, BigUint::new(digits))
        };
        to_big(self.pos) - to_big(self.neg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    #[test]
    fn digits_reassemble() {
        for c in [1u32, 7, 63, 64, 65, 100, 120] {
            for x in [
                BigInt::zero(),
                BigInt::one(),
                -BigInt::one(),
                BigInt::from(u128::MAX) * BigInt::from(u128::MAX) + 17,
                -(BigInt::one() << 1000usize) + 3,
            ] {
                let d = balanced_digits(&x, c);
                let mut back = BigInt::zero();
                for &v in d.iter().rev() {
                    back = (back << c as usize) + BigInt::from(v);
                }
                assert_eq!(back, x, "c={c}");
                let half = 1i128 << (c - 1);
                assert!(d.iter().all(|&v| -half <= v && v <= half));
                assert!(d.len() as u64 <= chunk_count(x.bits().max(1), c));
            }
        }
    }

    #[test]
    fn chunk_width_is_maximal() {
        let bound = prime_product();
        for (bits, r) in [(1u64, 1usize), (1000, 8), (1 << 20, 8), (1 << 30, 3)] {
            let c = choose_chunk_width(bits, r);
            let ok = |c: u32| {
                ((BigUint::from(chunk_count(bits, c)) * BigUint::from(r) * 2u32) << (2 * c as usize)) < bound
            };
            assert!(ok(c));
            if c < MAX_CHUNK_BITS {
                assert!(!ok(c + 1));
            }
        }
    }
}
