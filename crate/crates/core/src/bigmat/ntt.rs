//! Number-theoretic transforms over four fixed 62-bit primes.
//!
//! Each prime has the form `k * 2^40 + 1`, so transforms of any power-of-two
//! length up to `2^40` exist modulo all of them. Butterflies use Shoup's
//! precomputed-quotient multiplication; pointwise products use Montgomery
//! reduction, with the stray `R^-1` factor folded into the final scaling.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};
use once_cell::race::OnceBox;

/// The four transform primes, in CRT order.
pub const NTT_PRIMES: [u64; 4] = [
    0x3fff_c000_0000_0001,
    0x3fff_be00_0000_0001,
    0x3fff_8400_0000_0001,
    0x3fff_8100_0000_0001,
];

/// Multiplicative generators of `(Z/p)^*` for [`NTT_PRIMES`].
const GENERATORS: [u64; 4] = [11, 3, 19, 5];

/// Largest supported transform length is `2^MAX_LOG_LEN`.
pub const MAX_LOG_LEN: u32 = 40;

/// Arithmetic modulo one transform prime.
#[derive(Clone, Debug)]
pub struct PrimeField {
    pub p: u64,
    /// `-p^-1 mod 2^64`
    neg_pinv: u64,
    /// `2^128 mod p`
    r2: u64,
    /// `roots[j]` is a primitive `2^j`-th root of unity.
    roots: [u64; MAX_LOG_LEN as usize + 1],
}

impl PrimeField {
    fn new(p: u64, generator: u64) -> Self {
        // Newton iteration for p^-1 mod 2^64.
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = (r as u128 * r as u128 % p as u128) as u64;
        let mut field = PrimeField {
            p,
            neg_pinv: inv.wrapping_neg(),
            r2,
            roots: [0; MAX_LOG_LEN as usize + 1],
        };
        let mut w = field.pow(generator, (p - 1) >> MAX_LOG_LEN);
        for j in (0..=MAX_LOG_LEN as usize).rev() {
            field.roots[j] = w;
            w = field.mul(w, w);
        }
        field
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    /// Plain modular product, for setup code only.
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.p as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }

    /// Montgomery reduction: `x * 2^-64 mod p` for `x < p * 2^64`.
    #[inline]
    pub fn redc(&self, x: u128) -> u64 {
        let m = (x as u64).wrapping_mul(self.neg_pinv);
        let t = ((x + m as u128 * self.p as u128) >> 64) as u64;
        if t >= self.p {
            t - self.p
        } else {
            t
        }
    }

    /// `x mod p` for any `x < p * 2^64`.
    #[inline]
    pub fn reduce_u128(&self, x: u128) -> u64 {
        self.redc(self.redc(x) as u128 * self.r2 as u128)
    }

    /// Residue of a signed digit with `|d| < 2^125`.
    #[inline]
    pub fn reduce_i128(&self, d: i128) -> u64 {
        let r = self.reduce_u128(d.unsigned_abs());
        if d < 0 && r != 0 {
            self.p - r
        } else {
            r
        }
    }

    #[inline]
    pub(crate) fn shoup(&self, w: u64) -> u64 {
        (((w as u128) << 64) / self.p as u128) as u64
    }

    /// `x * w mod p` for any `x < 2^64` and `w < p`.
    #[inline]
    pub(crate) fn mul_shoup(&self, x: u64, w: u64, w_shoup: u64) -> u64 {
        let q = ((x as u128 * w_shoup as u128) >> 64) as u64;
        let r = x.wrapping_mul(w).wrapping_sub(q.wrapping_mul(self.p));
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    /// `x * w mod p` up to one multiple of `p`: the result is below `2p`.
    #[inline]
    pub(crate) fn mul_shoup_lazy(&self, x: u64, w: u64, w_shoup: u64) -> u64 {
        let q = ((x as u128 * w_shoup as u128) >> 64) as u64;
        x.wrapping_mul(w).wrapping_sub(q.wrapping_mul(self.p))
    }

    pub fn root_of_unity(&self, log_len: u32) -> u64 {
        self.roots[log_len as usize]
    }
}

/// Twiddles of one butterfly stage: `w^j` for `j < 2^(m-1)` where `w` is a
/// primitive `2^m`-th root, each with its Shoup quotient.
fn stage_table(field: &PrimeField, m: u32) -> Vec<(u64, u64)> {
    let half = 1usize << (m - 1);
    let w = field.root_of_unity(m);
    let ws = field.shoup(w);
    let mut out = Vec::with_capacity(half);
    let mut a = 1u64;
    for _ in 0..half {
        out.push((a, field.shoup(a)));
        a = field.mul_shoup(a, w, ws);
    }
    out
}

/// Owned twiddles for every stage of transforms up to `2^log_len`.
pub struct TwiddleTable {
    stages: Vec<Vec<(u64, u64)>>,
}

impl TwiddleTable {
    pub fn new(field: &PrimeField, log_len: u32) -> Self {
        TwiddleTable {
            stages: (1..=log_len).map(|m| stage_table(field, m)).collect(),
        }
    }

    pub fn log_len(&self) -> u32 {
        self.stages.len() as u32
    }

    /// View for transforms of length `2^log_len`.
    pub fn twiddles(&self, field: &PrimeField, log_len: u32) -> Twiddles<'_> {
        assert!(log_len <= self.log_len(), "twiddle table too short");
        Twiddles::from_stages(field, log_len, |m| &self.stages[m as usize - 1])
    }
}

/// Twiddle factors for one prime and one transform length.
pub struct Twiddles<'a> {
    log_len: u32,
    /// `stages[m]` serves the butterflies of block length `2^m`.
    stages: [&'a [(u64, u64)]; MAX_LOG_LEN as usize + 1],
    /// `2^128 / L mod p`; undoes the transform scaling and the Montgomery
    /// factor left by pointwise products in one step.
    post_scale: u64,
}

impl<'a> Twiddles<'a> {
    fn from_stages(field: &PrimeField, log_len: u32, mut stage: impl FnMut(u32) -> &'a [(u64, u64)]) -> Self {
        let mut stages: [&[(u64, u64)]; MAX_LOG_LEN as usize + 1] = [&[]; MAX_LOG_LEN as usize + 1];
        for m in 1..=log_len {
            stages[m as usize] = stage(m);
        }
        let len_inv = field.inv((1u64 << log_len) % field.p);
        Twiddles {
            log_len,
            stages,
            post_scale: field.mul(field.r2, len_inv),
        }
    }

    pub fn len(&self) -> usize {
        1 << self.log_len
    }
}

// Butterflies keep values in [0, 2p); p < 2^62 leaves room for the sums.

/// Decimation-in-frequency transform: natural order in, bit-reversed out.
/// Input below `p`, output below `2p`.
pub fn forward(field: &PrimeField, tw: &Twiddles, a: &mut [u64]) {
    let n = tw.len();
    debug_assert_eq!(a.len(), n);
    let p2 = 2 * field.p;
    for m in (1..=tw.log_len).rev() {
        let len = 1usize << m;
        let table = tw.stages[m as usize];
        for block in a.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(len / 2);
            for ((x, y), &(w, ws)) in lo.iter_mut().zip(hi.iter_mut()).zip(table) {
                let (u, v) = (*x, *y);
                let s = u + v;
                *x = if s >= p2 { s - p2 } else { s };
                *y = field.mul_shoup_lazy(u + p2 - v, w, ws);
            }
        }
    }
}

/// Decimation-in-time inverse: bit-reversed in, natural order out, scaled by
/// the transform length (see [`Twiddles::post_scale`]). Input and output
/// below `2p`.
pub fn inverse(field: &PrimeField, tw: &Twiddles, a: &mut [u64]) {
    let n = tw.len();
    debug_assert_eq!(a.len(), n);
    let p2 = 2 * field.p;
    for m in 1..=tw.log_len {
        let len = 1usize << m;
        let half = len / 2;
        let table = tw.stages[m as usize];
        for block in a.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(half);
            let butterfly = |x: &mut u64, y: &mut u64, v: u64| {
                let u = *x;
                let s = u + v;
                let d = u + p2 - v;
                *x = if s >= p2 { s - p2 } else { s };
                *y = if d >= p2 { d - p2 } else { d };
            };
            let v = hi[0];
            butterfly(&mut lo[0], &mut hi[0], v);
            // w^-j = -w^(half - j)
            let rest = lo[1..].iter_mut().zip(hi[1..].iter_mut());
            for ((x, y), &(w, ws)) in rest.zip(table[1..].iter().rev()) {
                butterfly(x, y, p2 - field.mul_shoup_lazy(*y, w, ws));
            }
        }
    }
}

/// Multiplies every entry by `post_scale`, removing the length factor of
/// [`inverse`] and the `2^-64` left by [`PrimeField::redc`] products.
pub fn finish_inverse(field: &PrimeField, tw: &Twiddles, a: &mut [u64]) {
    for x in a.iter_mut() {
        *x = field.redc(*x as u128 * tw.post_scale as u128);
    }
}

/// Immutable transform context shared by all big matrix products.
///
/// Besides the prime data it carries instrumentation counters that record
/// how many single-prime transforms have been run through it.
pub struct NttContext {
    pub(crate) fields: [PrimeField; 4],
    pub(crate) garner: Garner,
    /// `stages[m - 1][prime]`, built on first use.
    stages: [[OnceBox<Vec<(u64, u64)>>; 4]; MAX_LOG_LEN as usize],
    forward_calls: AtomicU64,
    inverse_calls: AtomicU64,
}

impl Default for NttContext {
    fn default() -> Self {
        Self::new()
    }
}

impl core::fmt::Debug for NttContext {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("NttContext")
            .field("primes", &NTT_PRIMES)
            .field("max_log_len", &MAX_LOG_LEN)
            .finish()
    }
}

/// Per-polynomial transform counts (one count covers all four primes).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TransformCounts {
    pub forward: u64,
    pub inverse: u64,
}

impl NttContext {
    pub fn new() -> Self {
        let fields = [0, 1, 2, 3].map(|i| PrimeField::new(NTT_PRIMES[i], GENERATORS[i]));
        let garner = Garner::new(&fields);
        NttContext {
            fields,
            garner,
            stages: core::array::from_fn(|_| Default::default()),
            forward_calls: AtomicU64::new(0),
            inverse_calls: AtomicU64::new(0),
        }
    }

    pub fn primes(&self) -> [u64; 4] {
        NTT_PRIMES
    }

    pub fn max_log_len(&self) -> u32 {
        MAX_LOG_LEN
    }

    pub fn field(&self, i: usize) -> &PrimeField {
        &self.fields[i]
    }

    /// Transforms counted per polynomial, i.e. single-prime calls divided by
    /// the number of primes.
    pub fn transform_counts(&self) -> TransformCounts {
        let raw = self.raw_transform_counts();
        TransformCounts {
            forward: raw.forward / NTT_PRIMES.len() as u64,
            inverse: raw.inverse / NTT_PRIMES.len() as u64,
        }
    }

    /// Single-prime transform calls.
    pub fn raw_transform_counts(&self) -> TransformCounts {
        TransformCounts {
            forward: self.forward_calls.load(Ordering::Relaxed),
            inverse: self.inverse_calls.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counters(&self) {
        self.forward_calls.store(0, Ordering::Relaxed);
        self.inverse_calls.store(0, Ordering::Relaxed);
    }

    /// The unique integer in `(-P/2, P/2]` with the given residues.
    pub fn crt(&self, residues: [u64; 4]) -> num_bigint::BigInt {
        let (neg, mag) = self.garner.reconstruct(&self.fields, residues);
        let digits: Vec<u32> = mag
            .iter()
            .flat_map(|&l| [l as u32, (l >> 32) as u32])
            .collect();
        let sign = if neg {
            num_bigint::Sign::Minus
        } else {
            num_bigint::Sign::Plus
        };
        num_bigint::BigInt::from_slice(sign, &digits)
    }

    /// Twiddles for `prime` and length `2^log_len`.
    pub fn twiddles(&self, prime: usize, log_len: u32) -> Twiddles<'_> {
        let field = &self.fields[prime];
        Twiddles::from_stages(field, log_len, |m| {
            self.stages[m as usize - 1][prime].get_or_init(|| Box::new(stage_table(field, m)))
        })
    }

    pub(crate) fn forward(&self, prime: usize, tw: &Twiddles, a: &mut [u64]) {
        self.forward_calls.fetch_add(1, Ordering::Relaxed);
        forward(&self.fields[prime], tw, a);
    }

    pub(crate) fn inverse(&self, prime: usize, tw: &Twiddles, a: &mut [u64]) {
        self.inverse_calls.fetch_add(1, Ordering::Relaxed);
        inverse(&self.fields[prime], tw, a);
        finish_inverse(&self.fields[prime], tw, a);
    }
}

/// A constant `c < p` with its Shoup quotient.
#[derive(Clone, Copy)]
struct Factor(u64, u64);

impl Factor {
    fn new(f: &PrimeField, c: u64) -> Self {
        Factor(c, f.shoup(c))
    }

    #[inline]
    fn apply(self, f: &PrimeField, x: u64) -> u64 {
        f.mul_shoup(x, self.0, self.1)
    }
}

/// Mixed-radix CRT reconstruction into the symmetric range `(-P/2, P/2]`.
pub(crate) struct Garner {
    /// `p1^-1 mod p2`
    c12: Factor,
    /// `(p1 p2)^-1 mod p3`
    c123: Factor,
    /// `(p1 p2 p3)^-1 mod p4`
    c1234: Factor,
    p1_mod3: Factor,
    p1_mod4: Factor,
    p12_mod4: Factor,
    /// `P = p1 p2 p3 p4`, little-endian limbs.
    modulus: [u64; 4],
    half: [u64; 4],
}

impl Garner {
    fn new(f: &[PrimeField; 4]) -> Self {
        let [p1, p2, p3, _] = NTT_PRIMES;
        let c12 = f[1].inv(p1 % p2);
        let c123 = f[2].inv(f[2].mul(p1 % p3, p2 % p3));
        let p12_mod4 = f[3].mul(p1 % f[3].p, p2 % f[3].p);
        let c1234 = f[3].inv(f[3].mul(p12_mod4, p3 % f[3].p));
        let mut modulus = [1u64, 0, 0, 0];
        for p in NTT_PRIMES {
            limbs_mul_small(&mut modulus, p);
        }
        let mut half = modulus;
        let mut carry = 0u64;
        for limb in half.iter_mut().rev() {
            let next = *limb & 1;
            *limb = (*limb >> 1) | (carry << 63);
            carry = next;
        }
        Garner {
            c12: Factor::new(&f[1], c12),
            c123: Factor::new(&f[2], c123),
            c1234: Factor::new(&f[3], c1234),
            p1_mod3: Factor::new(&f[2], p1 % p3),
            p1_mod4: Factor::new(&f[3], p1 % f[3].p),
            p12_mod4: Factor::new(&f[3], p12_mod4),
            modulus,
            half,
        }
    }

    /// Returns `(negative, magnitude)` of the unique value in `(-P/2, P/2]`.
    /// The primes are within a factor two of each other, so one conditional
    /// subtraction moves a residue from one prime to the next.
    #[inline]
    pub(crate) fn reconstruct(&self, f: &[PrimeField; 4], x: [u64; 4]) -> (bool, [u64; 4]) {
        let [p1, p2, p3, p4] = NTT_PRIMES;
        let down = |y: u64, p: u64| if y >= p { y - p } else { y };
        let y1 = x[0];
        let y2 = self.c12.apply(&f[1], f[1].sub(x[1], down(y1, p2)));
        let t3 = f[2].add(down(y1, p3), self.p1_mod3.apply(&f[2], y2));
        let y3 = self.c123.apply(&f[2], f[2].sub(x[2], t3));
        let t4 = f[3].add(
            f[3].add(down(y1, p4), self.p1_mod4.apply(&f[3], y2)),
            self.p12_mod4.apply(&f[3], y3),
        );
        let y4 = self.c1234.apply(&f[3], f[3].sub(x[3], t4));

        // value = y1 + p1 * (y2 + p2 * (y3 + p3 * y4))
        let mut v = [y4, 0, 0, 0];
        limbs_mul_small(&mut v, p3);
        limbs_add_small(&mut v, y3);
        limbs_mul_small(&mut v, p2);
        limbs_add_small(&mut v, y2);
        limbs_mul_small(&mut v, p1);
        limbs_add_small(&mut v, y1);
        if limbs_gt(&v, &self.half) {
            (true, limbs_sub(&self.modulus, &v))
        } else {
            (false, v)
        }
    }
}

fn limbs_mul_small(v: &mut [u64; 4], m: u64) {
    let mut carry = 0u128;
    for limb in v.iter_mut() {
        let t = *limb as u128 * m as u128 + carry;
        *limb = t as u64;
        carry = t >> 64;
    }
    debug_assert_eq!(carry, 0);
}

fn limbs_add_small(v: &mut [u64; 4], a: u64) {
    let mut carry = a;
    for limb in v.iter_mut() {
        let (s, c) = limb.overflowing_add(carry);
        *limb = s;
        carry = c as u64;
        if carry == 0 {
            break;
        }
    }
}

fn limbs_gt(a: &[u64; 4], b: &[u64; 4]) -> bool {
    for i in (0..4).rev() {
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    false
}

fn limbs_sub(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut borrow = 0u64;
    for i in 0..4 {
        let (d1, b1) = a[i].overflowing_sub(b[i]);
        let (d2, b2) = d1.overflowing_sub(borrow);
        out[i] = d2;
        borrow = (b1 | b2) as u64;
    }
    out
}
