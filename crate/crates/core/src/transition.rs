//! Transition matrices advancing windows of coefficients of `f^n`.
//!
//! Write `X_k` for the coefficient of `x^k` in `f^n`. Comparing `f^(n+1) = f f^n`
//! with its derivative gives, for every `k`,
//!
//! ```text
//! sum_j ((j - 2i) n + (j - kappa)) f_j X_{k-j} = 0,    k = 2in + kappa.
//! ```
//!
//! Solving for the leftmost or rightmost term extends a known window of `r`
//! consecutive coefficients by one place. The window
//! `v_n = [X_{2in+i-r}, ..., X_{2in+i-1}]` is pushed `2i` places right and
//! `d - 2i` places left, after which `v_(n+1)` follows from
//! `X'_k = sum_j f_j X_{k-j}`. Every tracked coefficient is kept as an exact
//! linear form in the entries of `v_n` over `Q(n)`, with denominators stored as
//! a constant times a product of primitive linear factors in `n`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::bigmat::IntMatrix;
use crate::curve::CurveModel;
use crate::poly::IntPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransitionError {
    InvalidRowIndex { i: usize, genus: usize },
    /// An extension step divides by a polynomial that vanishes identically.
    DivisionByZeroPolynomial { offset: i64 },
    ZeroDenominatorAtIndex { n: u64 },
}

impl fmt::Display for TransitionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionError::InvalidRowIndex { i, genus } => {
                write!(f, "row index {i} outside 1..={genus}")
            }
            TransitionError::DivisionByZeroPolynomial { offset } => write!(
                f,
                "pivot vanishes identically while solving for offset {offset}"
            ),
            TransitionError::ZeroDenominatorAtIndex { n } => {
                write!(f, "denominator vanishes at n = {n}")
            }
        }
    }
}

impl core::error::Error for TransitionError {}

/// `constant * prod (a n + b)^e` with each `(a, b)` coprime and `a > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Denominator {
    constant: BigInt,
    factors: BTreeMap<(i64, i64), u32>,
}

impl Denominator {
    pub fn one() -> Self {
        Denominator {
            constant: BigInt::one(),
            factors: BTreeMap::new(),
        }
    }

    /// `scale * (a n + b)`, or `None` if that is the zero polynomial.
    fn linear(a: i64, b: i64, scale: &BigInt) -> Option<Self> {
        if scale.is_zero() || (a == 0 && b == 0) {
            return None;
        }
        let mut out = Denominator::one();
        if a == 0 {
            out.constant = scale * b;
            return Some(out);
        }
        let g = a.gcd(&b) * a.signum();
        out.constant = scale * g;
        out.factors.insert((a / g, b / g), 1);
        Some(out)
    }

    pub fn constant(&self) -> &BigInt {
        &self.constant
    }

    /// The linear factors `(a, b)` for `a n + b`, with multiplicities.
    pub fn factors(&self) -> impl Iterator<Item = ((i64, i64), u32)> + '_ {
        self.factors.iter().map(|(&k, &v)| (k, v))
    }

    pub fn degree(&self) -> u32 {
        self.factors.values().sum()
    }

    fn mul(&self, other: &Denominator) -> Denominator {
        let mut out = self.clone();
        out.constant *= &other.constant;
        for (&k, &v) in &other.factors {
            *out.factors.entry(k).or_insert(0) += v;
        }
        out
    }

    fn lcm(&self, other: &Denominator) -> Denominator {
        let mut out = self.clone();
        out.constant = self.constant.lcm(&other.constant);
        for (&k, &v) in &other.factors {
            let e = out.factors.entry(k).or_insert(0);
            *e = (*e).max(v);
        }
        out
    }

    /// `self / other` as a polynomial; `other` must divide `self`.
    fn quotient(&self, other: &Denominator) -> IntPoly {
        let (c, r) = self.constant.div_rem(&other.constant);
        debug_assert!(r.is_zero());
        let mut q = IntPoly::constant(c);
        for (&(a, b), &v) in &self.factors {
            let have = other.factors.get(&(a, b)).copied().unwrap_or(0);
            debug_assert!(have <= v);
            for _ in have..v {
                q = &q * &IntPoly::linear(a, b);
            }
        }
        q
    }

    pub fn to_poly(&self) -> IntPoly {
        self.quotient(&Denominator::one())
    }
}

/// An exact linear form `sum_a nums[a] / den * v_n[a]`.
#[derive(Clone, Debug)]
struct RatRow {
    nums: Vec<IntPoly>,
    den: Denominator,
}

impl RatRow {
    fn basis(r: usize, a: usize) -> Self {
        let mut nums = alloc::vec![IntPoly::zero(); r];
        nums[a] = IntPoly::constant(1);
        RatRow {
            nums,
            den: Denominator::one(),
        }
    }

    fn is_zero(&self) -> bool {
        self.nums.iter().all(IntPoly::is_zero)
    }

    /// `sum_t coeff_t * row_t`.
    fn combine(r: usize, terms: &[(IntPoly, &RatRow)]) -> RatRow {
        let live: Vec<&(IntPoly, &RatRow)> = terms
            .iter()
            .filter(|(c, row)| !c.is_zero() && !row.is_zero())
            .collect();
        let den = live
            .iter()
            .fold(Denominator::one(), |acc, (_, row)| acc.lcm(&row.den));
        let mut nums = alloc::vec![IntPoly::zero(); r];
        for (c, row) in live {
            let scale = c * &den.quotient(&row.den);
            for (acc, x) in nums.iter_mut().zip(&row.nums) {
                *acc = &*acc + &(&scale * x);
            }
        }
        let mut out = RatRow { nums, den };
        out.reduce();
        out
    }

    fn reduce(&mut self) {
        reduce_fraction(&mut self.nums, &mut self.den);
    }
}

/// Cancels shared linear factors and content, and makes the constant of the
/// denominator positive.
fn reduce_fraction(nums: &mut [IntPoly], den: &mut Denominator) {
    if nums.iter().all(IntPoly::is_zero) {
        *den = Denominator::one();
        return;
    }
    let keys: Vec<(i64, i64)> = den.factors.keys().copied().collect();
    for (a, b) in keys {
        while den.factors[&(a, b)] > 0 {
            let divided: Option<Vec<IntPoly>> = nums.iter().map(|x| x.div_linear(a, b)).collect();
            match divided {
                Some(q) => {
                    nums.clone_from_slice(&q);
                    *den.factors.get_mut(&(a, b)).unwrap() -= 1;
                }
                None => break,
            }
        }
    }
    den.factors.retain(|_, v| *v > 0);
    let mut g = den.constant.clone();
    for x in nums.iter() {
        g = g.gcd(&x.content());
    }
    if den.constant.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for x in nums.iter_mut() {
            *x = x.div_exact(&g);
        }
        den.constant = &den.constant / &g;
    }
}

/// The recurrence `v_(n+1) D(n) = v_n M(n)` for one row index, together with
/// the precision parameters used to run it modulo prime powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    pub i: usize,
    pub r: usize,
    /// Row-major `r x r` entries.
    pub m: Vec<IntPoly>,
    pub d: IntPoly,
    pub d_factored: Denominator,
    pub e: u32,
    pub w: u32,
}

impl TransitionSystem {
    pub fn entry(&self, a: usize, b: usize) -> &IntPoly {
        &self.m[a * self.r + b]
    }

    /// Exact `(M(n), D(n))`.
    pub fn evaluate(&self, n: u64) -> Result<(IntMatrix, BigInt), TransitionError> {
        let den = self.d.eval_u64(n);
        if den.is_zero() {
            return Err(TransitionError::ZeroDenominatorAtIndex { n });
        }
        let data = self.m.iter().map(|x| x.eval_u64(n)).collect();
        Ok((IntMatrix::from_vec(self.r, self.r, data), den))
    }

    /// One line per entry, `entry[a][b] = c_0 + c_1*n + ...`, then `D = ...`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for a in 0..self.r {
            for b in 0..self.r {
                writeln!(s, "entry[{a}][{b}] = {}", self.entry(a, b)).unwrap();
            }
        }
        writeln!(s, "D = {}", self.d).unwrap();
        s
    }
}

/// Same as [`TransitionSystem::evaluate`].
pub fn evaluate_matrix(
    ts: &TransitionSystem,
    n: u64,
) -> Result<(IntMatrix, BigInt), TransitionError> {
    ts.evaluate(n)
}

/// Moduli exponent `e` and tail length `w` for row `i`.
///
/// `m_j = p^e` suffices once the last `w` factors of the partial product are
/// applied exactly. Safe mode uses `p^(d+1)` and no tail.
pub fn precision_parameters(curve: &CurveModel, _i: usize, safe_mode: bool) -> (u32, u32) {
    let d = curve.degree() as u32;
    if safe_mode {
        return (d + 1, 0);
    }
    match (curve.genus(), d) {
        (1, 4) if !curve.zero_constant() => (1, 2),
        (1, _) => (1, 0),
        (2, _) => (2, 1),
        _ => (3, 3),
    }
}

/// Steps before the end at which a prime can divide the denominator.
///
/// For `p = 2n + 1`, `p` divides `2m + b` at `m = n - (b - 1)/2`; any other
/// linear factor `a m + b` can only meet `p` near `m = c p / a` with
/// `c != a/2`, away from the end. The exact tail must cover the largest such
/// offset, so this is a lower bound for `w`.
pub fn end_offset(den: &Denominator) -> u32 {
    den.factors()
        .filter(|&((a, b), _)| a == 2 && b >= 3)
        .map(|((_, b), _)| ((b - 1) / 2) as u32)
        .max()
        .unwrap_or(0)
}

pub fn derive_transition(curve: &CurveModel, i: usize) -> Result<TransitionSystem, TransitionError> {
    derive_with(curve, i, false)
}

pub fn derive_with(
    curve: &CurveModel,
    i: usize,
    safe_mode: bool,
) -> Result<TransitionSystem, TransitionError> {
    let g = curve.genus();
    if i == 0 || i > g {
        return Err(TransitionError::InvalidRowIndex { i, genus: g });
    }
    let f = curve.coeffs();
    let d = curve.degree() as i64;
    let r = curve.dimension();
    let ii = i as i64;
    let zero_constant = curve.zero_constant();

    // Offsets are relative to 2in.
    let mut known: BTreeMap<i64, RatRow> = BTreeMap::new();
    for a in 0..r {
        known.insert(ii - r as i64 + a as i64, RatRow::basis(r, a));
    }

    // Solve the relation at k = 2in + kappa for X_{2in+target}, where the
    // pivot is the term with index j_star.
    let solve = |known: &BTreeMap<i64, RatRow>,
                 target: i64,
                 j_star: i64|
     -> Result<RatRow, TransitionError> {
        let kappa = target + j_star;
        let pivot = Denominator::linear(j_star - 2 * ii, j_star - kappa, &f[j_star as usize])
            .ok_or(TransitionError::DivisionByZeroPolynomial { offset: target })?;
        let mut terms = Vec::new();
        for j in 0..=d {
            if j == j_star || f[j as usize].is_zero() {
                continue;
            }
            let coeff = IntPoly::linear(j - 2 * ii, j - kappa).scale(&-&f[j as usize]);
            let row = known
                .get(&(kappa - j))
                .expect("relation only touches tracked coefficients");
            terms.push((coeff, row));
        }
        let mut out = RatRow::combine(r, &terms);
        if !out.is_zero() {
            out.den = out.den.mul(&pivot);
            out.reduce();
        }
        Ok(out)
    };

    let right_pivot = if zero_constant { 1 } else { 0 };
    for target in ii..3 * ii {
        let row = solve(&known, target, right_pivot)?;
        known.insert(target, row);
    }
    let lowest = 3 * ii - 2 * d + if zero_constant { 1 } else { 0 };
    let mut target = ii - r as i64 - 1;
    while target >= lowest {
        let row = solve(&known, target, d)?;
        known.insert(target, row);
        target -= 1;
    }

    // v_(n+1)[b] = X'_{2in + 3i - r + b}.
    let mut entries: Vec<(IntPoly, Denominator)> = alloc::vec![(IntPoly::zero(), Denominator::one()); r * r];
    for b in 0..r {
        let k = 3 * ii - r as i64 + b as i64;
        let terms: Vec<(IntPoly, &RatRow)> = (0..=d)
            .filter(|&j| !f[j as usize].is_zero())
            .map(|j| {
                let row = known.get(&(k - j)).expect("window covers the convolution");
                (IntPoly::constant(f[j as usize].clone()), row)
            })
            .collect();
        let next = RatRow::combine(r, &terms);
        for a in 0..r {
            let mut num = [next.nums[a].clone()];
            let mut den = next.den.clone();
            reduce_fraction(&mut num, &mut den);
            let [num] = num;
            entries[a * r + b] = (num, den);
        }
    }

    let mut den = entries
        .iter()
        .fold(Denominator::one(), |acc, (_, dn)| acc.lcm(dn));
    let mut m: Vec<IntPoly> = entries
        .iter()
        .map(|(num, dn)| num * &den.quotient(dn))
        .collect();
    let mut content = den.constant.clone();
    for x in &m {
        content = content.gcd(&x.content());
    }
    if !content.is_one() {
        for x in m.iter_mut() {
            *x = x.div_exact(&content);
        }
        den.constant = &den.constant / &content;
    }
    let (e, mut w) = precision_parameters(curve, i, safe_mode);
    if !safe_mode {
        w = w.max(end_offset(&den));
    }
    Ok(TransitionSystem {
        i,
        r,
        m,
        d: den.to_poly(),
        d_factored: den,
        e,
        w,
    })
}
