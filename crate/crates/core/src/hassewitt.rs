//! Hasse–Witt matrices for all admissible primes up to a bound.
//!
//! Row `i` of `W_p` for `p = 2n + 1` is read off `v_n` of the row-`i`
//! recurrence. One remainder forest per row evaluates
//! `C_j = V M(0) ... M(j-1) mod m_j` and `c_j = D(0) ... D(j-1) mod m_j` with
//! `m_j = p^e` for `p = 2j + 1 + 2w`. The last `w` steps are applied exactly,
//! after which the `p`-adic content of the denominator is divided out.
//! Small primes, and any prime whose valuation budget is exceeded, are
//! handled by expanding `f^((p-1)/2)` directly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::bigmat::ntt::{finish_inverse, forward, inverse, PrimeField, TwiddleTable};
use crate::bigmat::{mat_mul_classical, IntMatrix, Multiplier, NttContext, NTT_PRIMES};
use crate::curve::{AdmissiblePrimeSet, CurveModel};
use crate::meter::MemoryMeter;
use crate::remainder::{default_k, remainder_forest_multi, ForestPlan, LeafStream};
use crate::transition::{derive_with, TransitionError, TransitionSystem};
use crate::Error;

/// Primes below this are always expanded directly.
pub const DEFAULT_NAIVE_CUTOFF: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// The denominator product vanishes modulo `p^e`.
    DenominatorVanishes,
    /// The valuation to strip reaches the working precision.
    PrecisionExhausted,
    /// The numerator is not divisible by the valuation being stripped.
    NotDivisible,
}

/// A row that could not be recovered from the forest residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecisionFailure {
    pub p: u64,
    pub row: usize,
    pub kind: FailureKind,
}

impl fmt::Display for PrecisionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            FailureKind::DenominatorVanishes => "denominator product vanishes modulo p^e",
            FailureKind::PrecisionExhausted => "p-adic valuation exceeds working precision",
            FailureKind::NotDivisible => "numerator not divisible by denominator valuation",
        };
        write!(f, "row {} at p = {}: {what}", self.row, self.p)
    }
}

impl core::error::Error for PrecisionFailure {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordSource {
    Forest,
    Naive,
}

impl RecordSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordSource::Forest => "forest",
            RecordSource::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HasseWittRecord {
    pub p: u64,
    pub genus: usize,
    /// Row-major `g x g` residues in `[0, p)`.
    pub w: Vec<u64>,
    pub trace: u64,
    /// `(-1)^g l^g det(W - l I) mod p`, ascending, `2g + 1` coefficients.
    pub charpoly: Vec<u64>,
    /// Exact trace of Frobenius, genus 1 only. Lifted from the trace for
    /// `p >= 17`; the merger fills smaller `p` by counting points.
    pub a_p: Option<i64>,
    pub source: RecordSource,
}

impl HasseWittRecord {
    pub fn new(p: u64, genus: usize, w: Vec<u64>, source: RecordSource) -> Self {
        let trace = (0..genus).fold(0, |acc, i| (acc + w[i * genus + i]) % p);
        let charpoly = charpoly_mod_p(&w, genus, p);
        let a_p = (genus == 1).then(|| lift_trace(trace, p)).flatten();
        HasseWittRecord {
            p,
            genus,
            w,
            trace,
            charpoly,
            a_p,
            source,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.w[i * self.genus + j]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HasseWittOptions {
    /// Subtree split exponent; the default formula is used when `None`.
    pub k: Option<u32>,
    pub k_adjust: i32,
    pub naive_cutoff: u64,
    /// Work modulo `p^(d+1)` with no exact tail.
    pub safe_mode: bool,
    pub force_naive: bool,
}

impl Default for HasseWittOptions {
    fn default() -> Self {
        HasseWittOptions {
            k: None,
            k_adjust: 0,
            naive_cutoff: DEFAULT_NAIVE_CUTOFF,
            safe_mode: false,
            force_naive: false,
        }
    }
}

/// `e_(r-i+1)`: the only nonzero coefficient of `f^0` is at `x^0`, which sits
/// at position `r - i` (from zero) of the window `[i - r, i - 1]`.
pub fn initial_vector(curve: &CurveModel, i: usize) -> Vec<BigInt> {
    let r = curve.dimension();
    let mut v = vec![BigInt::zero(); r];
    v[r - i] = BigInt::one();
    v
}

/// Primes handed to the forest: admissible, at least the cutoff and at least
/// `2w + 1` so that every tail index is non-negative.
pub fn forest_primes(set: &AdmissiblePrimeSet, w: u32, options: &HasseWittOptions) -> Vec<u64> {
    if options.force_naive {
        return Vec::new();
    }
    let floor = options.naive_cutoff.max(2 * w as u64 + 1);
    set.primes.iter().copied().filter(|&p| p >= floor).collect()
}

/// Everything needed to run the forest for one row index.
#[derive(Debug, Clone)]
pub struct RowJob {
    pub curve: CurveModel,
    pub i: usize,
    pub ts: TransitionSystem,
    pub primes: Vec<u64>,
    pub plan: ForestPlan,
}

impl RowJob {
    pub fn new(
        curve: &CurveModel,
        set: &AdmissiblePrimeSet,
        i: usize,
        options: &HasseWittOptions,
    ) -> Result<Self, TransitionError> {
        let ts = derive_with(curve, i, options.safe_mode)?;
        check_denominator(&ts)?;
        let primes = forest_primes(set, ts.w, options);
        let len = primes.last().map_or(0, |&p| leaf_index(p, ts.w) + 1);
        let ell = ForestPlan::for_leaves(len, 0).ell;
        let k = options
            .k
            .unwrap_or_else(|| default_k(ell, curve.genus() as u32, options.k_adjust));
        Ok(RowJob {
            curve: curve.clone(),
            i,
            ts,
            primes,
            plan: ForestPlan::for_leaves(len, k),
        })
    }

    pub fn leaf_count(&self) -> usize {
        self.primes.last().map_or(0, |&p| leaf_index(p, self.ts.w) + 1)
    }

    pub fn modulus(&self, j: usize) -> BigInt {
        let p = 2 * j as u64 + 1 + 2 * self.ts.w as u64;
        if self.primes.binary_search(&p).is_ok() {
            BigInt::from(p).pow(self.ts.e)
        } else {
            BigInt::one()
        }
    }
}

fn leaf_index(p: u64, w: u32) -> usize {
    ((p - 1) / 2 - w as u64) as usize
}

/// `D(n) != 0` for all `n >= 0`.
fn check_denominator(ts: &TransitionSystem) -> Result<(), TransitionError> {
    for ((a, b), _) in ts.d_factored.factors() {
        if b <= 0 && (-b) % a == 0 {
            return Err(TransitionError::ZeroDenominatorAtIndex {
                n: ((-b) / a) as u64,
            });
        }
    }
    Ok(())
}

struct RowStream<'a> {
    job: &'a RowJob,
}

impl LeafStream for RowStream<'_> {
    fn len(&self) -> usize {
        self.job.leaf_count()
    }

    fn chains(&self) -> usize {
        2
    }

    fn dim(&self, chain: usize) -> usize {
        if chain == 0 {
            self.job.ts.r
        } else {
            1
        }
    }

    fn modulus(&self, j: usize) -> BigInt {
        self.job.modulus(j)
    }

    fn matrices(&mut self, start: usize, count: usize) -> Vec<Vec<IntMatrix>> {
        let mut ms = Vec::with_capacity(count);
        let mut ds = Vec::with_capacity(count);
        for j in start..start + count {
            let (m, d) = self.job.ts.evaluate(j as u64).expect("denominator checked nonzero");
            ms.push(m);
            ds.push(IntMatrix::scalar(d));
        }
        vec![ms, ds]
    }
}

/// One assembled row, or the reason it could not be assembled.
pub type RowResult = (u64, Result<Vec<u64>, PrecisionFailure>);

/// Runs the forest for one row and calls `emit` once per subtree with the
/// rows of the primes it covers, in ascending `p`.
pub fn compute_hassewitt_rows(
    mul: &Multiplier,
    job: &RowJob,
    meter: &mut MemoryMeter,
    emit: &mut dyn FnMut(Vec<RowResult>),
) -> Result<(), Error> {
    let mut stream = RowStream { job };
    let g = job.curve.genus();
    let w = job.ts.w;
    let e = job.ts.e;
    let vs = vec![initial_vector(&job.curve, job.i), vec![BigInt::one()]];
    remainder_forest_multi(mul, vs, &mut stream, job.plan, meter, &mut |start, leaves| {
        let mut batch = Vec::new();
        let [cs, ds]: [Vec<Vec<BigInt>>; 2] = leaves.try_into().expect("two chains");
        for (off, (c, dc)) in cs.iter().zip(&ds).enumerate() {
            let j = start + off;
            let p = 2 * j as u64 + 1 + 2 * w as u64;
            if job.primes.binary_search(&p).is_err() {
                continue;
            }
            let (tail_m, tail_d) = tail(&job.ts, j as u64);
            let row = assemble_row(c, &dc[0], &tail_m, &tail_d, p, e, g).map_err(|kind| {
                PrecisionFailure {
                    p,
                    row: job.i,
                    kind,
                }
            });
            batch.push((p, row));
        }
        emit(batch);
    })?;
    Ok(())
}

/// Exact `M(j) ... M(j+w-1)` and `D(j) ... D(j+w-1)`.
fn tail(ts: &TransitionSystem, j: u64) -> (IntMatrix, BigInt) {
    let mut m = IntMatrix::identity(ts.r);
    let mut d = BigInt::one();
    for n in j..j + ts.w as u64 {
        let (mn, dn) = ts.evaluate(n).expect("denominator checked nonzero");
        m = mat_mul_classical(&m, &mn).expect("square matrices");
        d *= dn;
    }
    (m, d)
}

fn valuation(x: &BigInt, p: &BigInt) -> u32 {
    debug_assert!(!x.is_zero());
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// Row `i` of `W_p`, ordered by column, from the forest residues.
///
/// `c` and `cd` are `V M(0)...M(j-1)` and `D(0)...D(j-1)` modulo `p^e`;
/// `tail_m` and `tail_d` are the exact remaining `w` factors. With
/// `X = c * tail_m` restricted to the last `g` columns, `X` is known modulo
/// `p^(e+tau)` where `p^tau` divides those columns. The row is
/// `X / p^nu` over the `p`-free part of `cd * tail_d`, where `nu` is the
/// valuation of that denominator.
pub fn assemble_row(
    c: &[BigInt],
    cd: &BigInt,
    tail_m: &IntMatrix,
    tail_d: &BigInt,
    p: u64,
    e: u32,
    g: usize,
) -> Result<Vec<u64>, FailureKind> {
    let pb = BigInt::from(p);
    let pe = pb.pow(e);
    let cd = cd.mod_floor(&pe);
    if cd.is_zero() {
        return Err(FailureKind::DenominatorVanishes);
    }
    let nu_pre = valuation(&cd, &pb);
    let nu_tail = valuation(tail_d, &pb);
    let nu = nu_pre + nu_tail;
    let unit = (&cd / pb.pow(nu_pre)) * (tail_d / pb.pow(nu_tail));
    let unit = unit.mod_floor(&pb).to_u64().expect("residue fits");

    let r = c.len();
    let cols: Vec<usize> = (r - g..r).collect();
    let mut tau = u32::MAX;
    for &col in &cols {
        for a in 0..r {
            let x = tail_m.get(a, col);
            if !x.is_zero() {
                tau = tau.min(valuation(x, &pb));
            }
        }
    }
    if tau == u32::MAX {
        return Ok(vec![0; g]);
    }
    if nu >= e + tau {
        return Err(FailureKind::PrecisionExhausted);
    }
    let known = pb.pow(e + tau);
    let scale = pb.pow(nu);
    let inv = BigInt::from(unit).modpow(&BigInt::from(p - 2), &pb);
    let mut row = Vec::with_capacity(g);
    for &col in cols.iter().rev() {
        let x = (0..r)
            .fold(BigInt::zero(), |acc, a| acc + &c[a] * tail_m.get(a, col))
            .mod_floor(&known);
        let (q, rem) = x.div_rem(&scale);
        if !rem.is_zero() {
            return Err(FailureKind::NotDivisible);
        }
        let v = (q * &inv).mod_floor(&pb);
        row.push(v.to_u64().expect("residue fits"));
    }
    Ok(row)
}

/// `W_p` from the coefficients of `f^((p-1)/2) mod p`, row-major.
pub fn naive_hassewitt(curve: &CurveModel, p: u64) -> Vec<u64> {
    let g = curve.genus();
    let f = curve.coeffs_mod(p);
    let h = truncated_power(&f, (p - 1) / 2, p, g * p as usize);
    let mut w = vec![0; g * g];
    for i in 1..=g {
        for j in 1..=g {
            w[(i - 1) * g + (j - 1)] = h.get(p as usize * i - j).copied().unwrap_or(0);
        }
    }
    w
}

/// `f^n mod (p, x^limit)`.
pub fn truncated_power(f: &[u64], n: u64, p: u64, limit: usize) -> Vec<u64> {
    let mut sq = Squarer::new(p);
    let mut acc = vec![1u64];
    if n == 0 {
        return acc;
    }
    for bit in (0..64 - n.leading_zeros()).rev() {
        acc = sq.square(&acc, limit);
        if (n >> bit) & 1 == 1 {
            acc = mul_short(&acc, f, p, limit);
        }
    }
    acc
}

fn mul_short(a: &[u64], f: &[u64], p: u64, limit: usize) -> Vec<u64> {
    let len = (a.len() + f.len() - 1).min(limit);
    let mut out = vec![0u64; len];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in f.iter().enumerate() {
            if i + j >= len {
                break;
            }
            out[i + j] = ((out[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
        }
    }
    out
}

const SCHOOLBOOK_SQUARE: usize = 64;

/// Squares polynomials over `Z/p` with transforms modulo one or two of the
/// transform primes, enough for exact integer convolutions of residues.
struct Squarer {
    p: u64,
    fields: Vec<PrimeField>,
    twiddles: Vec<Option<TwiddleTable>>,
}

impl Squarer {
    fn new(p: u64) -> Self {
        assert!(p < 1 << 30, "direct expansion supports p < 2^30");
        Squarer {
            p,
            fields: {
                let ctx = NttContext::new();
                vec![ctx.field(0).clone(), ctx.field(1).clone()]
            },
            twiddles: vec![None, None],
        }
    }

    fn square(&mut self, a: &[u64], limit: usize) -> Vec<u64> {
        let p = self.p;
        let out_len = (2 * a.len() - 1).min(limit);
        if a.len() <= SCHOOLBOOK_SQUARE {
            return mul_short(a, a, p, out_len);
        }
        let log_len = (2 * a.len() - 1).next_power_of_two().trailing_zeros();
        let bound = (p as u128 - 1).pow(2) * a.len() as u128;
        let nprimes = if bound < (NTT_PRIMES[0] / 2) as u128 { 1 } else { 2 };
        let mut residues = Vec::with_capacity(nprimes);
        for idx in 0..nprimes {
            let field = &self.fields[idx];
            let slot = &mut self.twiddles[idx];
            if slot.as_ref().map_or(true, |t| t.log_len() < log_len) {
                *slot = Some(TwiddleTable::new(field, log_len));
            }
            let tw = &slot.as_ref().unwrap().twiddles(field, log_len);
            let mut buf = vec![0u64; 1 << log_len];
            buf[..a.len()].copy_from_slice(a);
            forward(field, tw, &mut buf);
            for x in buf.iter_mut() {
                *x = field.redc(*x as u128 * *x as u128);
            }
            inverse(field, tw, &mut buf);
            finish_inverse(field, tw, &mut buf);
            buf.truncate(out_len);
            residues.push(buf);
        }
        if nprimes == 1 {
            return residues[0].iter().map(|&x| x % p).collect();
        }
        let (f1, f2) = (&self.fields[0], &self.fields[1]);
        let p1_inv = f2.inv(f1.p % f2.p);
        (0..out_len)
            .map(|k| {
                let (a1, a2) = (residues[0][k], residues[1][k]);
                let t = f2.mul(f2.sub(a2 % f2.p, a1 % f2.p), p1_inv);
                let x = a1 as u128 + f1.p as u128 * t as u128;
                (x % p as u128) as u64
            })
            .collect()
    }
}

fn poly_mul_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    mul_short(a, b, p, a.len() + b.len() - 1)
}

fn poly_add_mod(a: &mut Vec<u64>, b: &[u64], negate: bool, p: u64) {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (x, &y) in a.iter_mut().zip(b) {
        let y = if negate { (p - y) % p } else { y };
        *x = (*x + y) % p;
    }
}

/// `(-1)^g l^g det(W - l I) mod p`, ascending coefficients, length `2g + 1`.
pub fn charpoly_mod_p(w: &[u64], g: usize, p: u64) -> Vec<u64> {
    let entry = |i: usize, j: usize| -> Vec<u64> {
        if i == j {
            vec![w[i * g + j] % p, p - 1]
        } else {
            vec![w[i * g + j] % p]
        }
    };
    let mut det = Vec::new();
    for perm in permutations(g) {
        let mut term = vec![1u64];
        for (i, &j) in perm.iter().enumerate() {
            term = poly_mul_mod(&term, &entry(i, j), p);
        }
        poly_add_mod(&mut det, &term, parity(&perm), p);
    }
    det.resize(g + 1, 0);
    let mut out = vec![0u64; 2 * g + 1];
    for (t, &c) in det.iter().enumerate() {
        out[g + t] = if g % 2 == 1 { (p - c) % p } else { c };
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut perm = rest.clone();
            perm.insert(pos, n - 1);
            out.push(perm);
        }
    }
    out
}

/// True for odd permutations.
fn parity(perm: &[usize]) -> bool {
    let mut odd = false;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                odd = !odd;
            }
        }
    }
    odd
}

/// The unique `a` with `a = t mod p` and `|a| <= 2 sqrt(p)`, for `p >= 17`.
pub fn lift_trace(t: u64, p: u64) -> Option<i64> {
    if p < 17 {
        return None;
    }
    let t = t % p;
    if (t as u128).pow(2) <= 4 * p as u128 {
        Some(t as i64)
    } else {
        let a = p - t;
        debug_assert!((a as u128).pow(2) <= 4 * p as u128, "no lift within the Hasse bound");
        Some(-(a as i64))
    }
}

fn legendre(a: u64, p: u64) -> i64 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let x = BigInt::from(a).modpow(&BigInt::from((p - 1) / 2), &BigInt::from(p));
    if x.is_one() {
        1
    } else {
        -1
    }
}

/// `#C(F_p)` of the smooth model by enumerating `x`, counting the points at
/// infinity as 1 for odd `d` and `1 + (f_d / p)` for even `d`.
pub fn count_points(curve: &CurveModel, p: u64) -> u64 {
    let f = curve.coeffs_mod(p);
    let mut total: i64 = 0;
    for x in 0..p {
        let y2 = f
            .iter()
            .rev()
            .fold(0u64, |acc, &c| ((acc as u128 * x as u128 + c as u128) % p as u128) as u64);
        total += 1 + legendre(y2, p);
    }
    total += if curve.degree() % 2 == 1 {
        1
    } else {
        1 + legendre(f[curve.degree()], p)
    };
    total as u64
}

/// Merges rows from the per-row jobs into records, in ascending `p`.
///
/// Primes not handed to any forest, and primes where some row failed to
/// assemble, are expanded directly when their turn comes.
#[derive(Debug)]
pub struct RecordMerger {
    curve: CurveModel,
    pending: Vec<u64>,
    next: usize,
    forest: Vec<u64>,
    rows: BTreeMap<u64, PartialRecord>,
    failures: Vec<PrecisionFailure>,
}

#[derive(Debug)]
struct PartialRecord {
    rows: Vec<Option<Vec<u64>>>,
    seen: usize,
    failed: bool,
}

impl RecordMerger {
    pub fn new(curve: &CurveModel, all: &[u64], forest: &[u64]) -> Self {
        RecordMerger {
            curve: curve.clone(),
            pending: all.to_vec(),
            next: 0,
            forest: forest.to_vec(),
            rows: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    pub fn add(&mut self, row: usize, (p, result): RowResult) {
        let g = self.curve.genus();
        let slot = self.rows.entry(p).or_insert_with(|| PartialRecord {
            rows: vec![None; g],
            seen: 0,
            failed: false,
        });
        slot.seen += 1;
        match result {
            Ok(v) => slot.rows[row - 1] = Some(v),
            Err(f) => {
                slot.failed = true;
                self.failures.push(f);
            }
        }
    }

    /// Records that are complete, in order.
    pub fn drain(&mut self) -> Vec<HasseWittRecord> {
        let g = self.curve.genus();
        let mut out = Vec::new();
        while let Some(&p) = self.pending.get(self.next) {
            let record = if self.forest.binary_search(&p).is_err() {
                HasseWittRecord::new(p, g, naive_hassewitt(&self.curve, p), RecordSource::Naive)
            } else {
                match self.rows.get(&p) {
                    Some(part) if part.seen == g => {
                        let part = self.rows.remove(&p).unwrap();
                        if part.failed {
                            HasseWittRecord::new(p, g, naive_hassewitt(&self.curve, p), RecordSource::Naive)
                        } else {
                            let w = part.rows.into_iter().flatten().flatten().collect();
                            HasseWittRecord::new(p, g, w, RecordSource::Forest)
                        }
                    }
                    _ => break,
                }
            };
            out.push(self.with_small_lift(record));
            self.next += 1;
        }
        out
    }

    /// Genus 1 below the unique-lift range: count points directly, which is
    /// cheap there and exact.
    fn with_small_lift(&self, mut record: HasseWittRecord) -> HasseWittRecord {
        if record.genus == 1 && record.a_p.is_none() {
            let p = record.p;
            record.a_p = Some(p as i64 + 1 - count_points(&self.curve, p) as i64);
        }
        record
    }

    pub fn failures(&self) -> &[PrecisionFailure] {
        &self.failures
    }

    pub fn is_done(&self) -> bool {
        self.next == self.pending.len()
    }
}

/// One job per row. Rows may need different tail lengths, so every job is
/// restricted to the primes all rows can handle; the rest go to the merger's
/// direct expansion.
pub fn row_jobs(
    curve: &CurveModel,
    set: &AdmissiblePrimeSet,
    options: &HasseWittOptions,
) -> Result<Vec<RowJob>, TransitionError> {
    let mut jobs: Vec<RowJob> = (1..=curve.genus())
        .map(|i| RowJob::new(curve, set, i, options))
        .collect::<Result<_, _>>()?;
    let mut common = jobs.first().map(|j| j.primes.clone()).unwrap_or_default();
    for job in &jobs[1..] {
        common.retain(|p| job.primes.binary_search(p).is_ok());
    }
    for job in &mut jobs {
        job.primes.clone_from(&common);
    }
    Ok(jobs)
}

/// All records for `p <= bound`, plus the precision failures that were
/// rerouted to direct expansion.
#[derive(Debug, Clone)]
pub struct HasseWittReport {
    pub records: Vec<HasseWittRecord>,
    pub failures: Vec<PrecisionFailure>,
    pub primes: AdmissiblePrimeSet,
    /// Peak metered bytes over the row jobs.
    pub peak_bytes: u64,
}

/// Single-threaded driver: one forest per row, merged by `p`.
pub fn compute_hassewitt_matrices(
    mul: &Multiplier,
    curve: &CurveModel,
    bound: u64,
    options: &HasseWittOptions,
) -> Result<HasseWittReport, Error> {
    let primes = crate::curve::admissible_primes(curve, bound);
    let jobs = row_jobs(curve, &primes, options)?;
    let forest = jobs.first().map(|j| j.primes.clone()).unwrap_or_default();
    let mut merger = RecordMerger::new(curve, &primes.primes, &forest);
    let mut peak = 0;
    for job in &jobs {
        let mut meter = MemoryMeter::new();
        compute_hassewitt_rows(mul, job, &mut meter, &mut |batch| {
            for r in batch {
                merger.add(job.i, r);
            }
        })?;
        peak = peak.max(meter.peak());
    }
    let records = merger.drain();
    debug_assert!(merger.is_done());
    Ok(HasseWittReport {
        records,
        failures: merger.failures().to_vec(),
        primes,
        peak_bytes: peak,
    })
}
