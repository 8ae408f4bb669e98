//! Shared test data: a curve corpus covering every supported shape, the
//! published genus-1 transition matrices and the genus-2/3 denominator
//! products, and checks against them that report instead of panicking.

#![allow(dead_code)]

use hwforest_core::curve::{validate_curve_i64, CurveModel};
use hwforest_core::poly::IntPoly;
use hwforest_core::transition::{derive_transition, TransitionSystem};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ascending coefficients; shapes `(g, r)` noted per line.
pub const CORPUS: &[&[i64]] = &[
    &[0, 1, 0, 1],                  // (1, 2)
    &[0, -1, 1, 1],                 // (1, 2)
    &[1, 1, 0, 1],                  // (1, 3)
    &[-2, 3, -1, 1],                // (1, 3)
    &[1, 0, 0, 1, 1],               // (1, 4)
    &[3, -1, 2, 0, 2],              // (1, 4)
    &[0, 1, 0, 3, 0, 1],            // (2, 4)
    &[1, 1, 0, 3, 0, 1],            // (2, 5)
    &[1, 2, 0, -1, 0, 0, 1],        // (2, 6)
    &[-1, 0, 3, 1, 0, 2, 1],        // (2, 6)
    &[0, 1, 2, 0, 0, -1, 0, 1],     // (3, 6)
    &[19, 17, 13, 11, 7, 5, 3, 2],  // (3, 7)
    &[1, 0, -1, 0, 2, 0, 0, 1, 1],  // (3, 8)
    &[2, 1, 0, 0, 0, 0, 0, 0, -3],  // (3, 8)
];

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn powers(f: &[i64], upto: usize) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![BigInt::from(1)]];
    for _ in 0..upto {
        let last = out.last().unwrap();
        let mut next = vec![BigInt::zero(); last.len() + f.len() - 1];
        for (i, a) in last.iter().enumerate() {
            for (j, &b) in f.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        out.push(next);
    }
    out
}

pub fn coeff(h: &[BigInt], k: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    h.get(k as usize).cloned().unwrap_or_default()
}

pub fn window(h: &[BigInt], n: i64, i: i64, r: i64) -> Vec<BigInt> {
    (0..r).map(|a| coeff(h, 2 * i * n + i - r + a)).collect()
}

pub fn random_curve(rng: &mut ChaCha8Rng, d: usize, zero_constant: bool) -> Vec<i64> {
    loop {
        let mut f: Vec<i64> = (0..=d).map(|_| rng.gen_range(-10..=10)).collect();
        if zero_constant {
            f[0] = 0;
        }
        if validate_curve_i64(&f).is_ok() && (f[0] != 0) != zero_constant {
            return f;
        }
    }
}

/// `v_(n+1) D(n) = v_n M(n)` for every row and `n <= 8`, with the windows
/// read off the expanded powers of `f`.
pub fn check_recurrence(f: &[i64]) -> Result<(), String> {
    let curve = validate_curve_i64(f).map_err(|e| format!("{f:?}: {e}"))?;
    let pw = powers(f, 9);
    let r = curve.dimension() as i64;
    for i in 1..=curve.genus() {
        let ts = derive_transition(&curve, i).map_err(|e| format!("{f:?}: {e}"))?;
        check(ts.d.degree().unwrap() <= curve.degree(), || format!("{f:?} i={i}: deg D > d"))?;
        for n in 0..=8i64 {
            let (m, d) = ts.evaluate(n as u64).map_err(|e| e.to_string())?;
            let v = window(&pw[n as usize], n, i as i64, r);
            let next = window(&pw[n as usize + 1], n + 1, i as i64, r);
            for b in 0..r as usize {
                let lhs = &next[b] * &d;
                let rhs: BigInt = (0..r as usize).map(|a| &v[a] * m.get(a, b)).sum();
                check(lhs == rhs, || format!("{f:?} i={i} n={n} column {b}"))?;
            }
        }
    }
    Ok(())
}

/// Random curves of every degree, both signs of `f0 = 0`.
pub fn recurrence_suite(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in 3..=8 {
        for zero_constant in [false, true] {
            for _ in 0..3 {
                check_recurrence(&random_curve(&mut rng, d, zero_constant))?;
            }
        }
    }
    Ok(())
}

pub fn lin(a: i64, b: i64) -> IntPoly {
    IntPoly::linear(a, b)
}

pub fn k(c: i64) -> IntPoly {
    IntPoly::constant(c)
}

pub fn quartic_reference(f: [i64; 5]) -> (Vec<Vec<IntPoly>>, IntPoly) {
    let [f0, f1, f2, f3, f4] = f;
    let j1 = &(&lin(1, 1) * &lin(2, 1)) * &k(f0);
    let j2 = &(&(&lin(1, 1) * &lin(2, 1)) * &lin(2, 5)) * &k(f0 * f4);
    let j3 = &(&(&lin(1, 1) * &lin(1, 2)) * &lin(2, 5)) * &k(2 * f0 * f4);
    let j4 = &(&lin(1, 2) * &lin(2, 5)) * &k(f4);
    let m = vec![
        vec![
            &(&(&lin(-1, -3) * &k(f3 * f3)) + &(&lin(4, 8) * &k(f2 * f4))) * &j1,
            &k(f3) * &j2,
            &k(4 * f4) * &j3,
            &(&lin(2, 3) * &k(f1 * f4)) * &j4,
        ],
        vec![
            &(&k(-2 * f2 * f3) + &(&lin(6, 12) * &k(f1 * f4))) * &j1,
            &k(2 * f2) * &j2,
            &k(3 * f3) * &j3,
            &(&(&lin(8, 4) * &k(f0 * f4)) + &(&lin(1, 2) * &k(f1 * f3))) * &j4,
        ],
        vec![
            &(&(&lin(1, -1) * &k(f1 * f3)) + &(&lin(8, 16) * &k(f0 * f4))) * &j1,
            &k(3 * f1) * &j2,
            &k(2 * f2) * &j3,
            &(&(&lin(6, 3) * &k(f0 * f3)) + &k(f1 * f2)) * &j4,
        ],
        vec![
            &(&lin(2, 0) * &k(f0 * f3)) * &j1,
            &k(4 * f0) * &j2,
            &k(f1) * &j3,
            &(&(&lin(4, 2) * &k(f0 * f2)) - &(&lin(1, 0) * &k(f1 * f1))) * &j4,
        ],
    ];
    let d = &(&(&lin(1, 2) * &lin(2, 1)) * &lin(2, 5)) * &k(2 * f0 * f4);
    (m, d)
}

pub fn cubic_reference(f: [i64; 4]) -> (Vec<Vec<IntPoly>>, IntPoly) {
    let [f0, f1, f2, f3] = f;
    let a = &lin(1, 1) * &lin(2, 1);
    let b = &lin(1, 1) * &lin(1, 3);
    let m = vec![
        vec![
            &a * &k(2 * f0 * f2),
            &b * &k(6 * f0 * f3),
            &(&lin(1, 3) * &lin(1, 2)) * &k(f1 * f3),
        ],
        vec![
            &a * &k(4 * f0 * f1),
            &b * &k(4 * f0 * f2),
            &lin(1, 3) * &(&(&lin(6, 3) * &k(f0 * f3)) + &k(f1 * f2)),
        ],
        vec![
            &a * &k(6 * f0 * f0),
            &b * &k(2 * f0 * f1),
            &lin(1, 3) * &(&(&lin(4, 2) * &k(f0 * f2)) - &(&lin(1, 0) * &k(f1 * f1))),
        ],
    ];
    let d = &(&lin(1, 3) * &lin(2, 1)) * &k(2 * f0);
    (m, d)
}

pub fn cubic_zero_reference(f: [i64; 4]) -> (Vec<Vec<IntPoly>>, IntPoly) {
    let [_, f1, f2, f3] = f;
    let m = vec![
        vec![&lin(1, 1) * &k(f2), &lin(2, 4) * &k(f3)],
        vec![&lin(2, 2) * &k(f1), &lin(1, 2) * &k(f2)],
    ];
    (m, lin(1, 2))
}

/// `M_ours * D_ref == M_ref * D_ours` entrywise.
pub fn same_rational(ts: &TransitionSystem, m_ref: &[Vec<IntPoly>], d_ref: &IntPoly) -> Result<(), String> {
    let r = ts.r;
    check(m_ref.len() == r, || format!("dimension {r} vs {}", m_ref.len()))?;
    for a in 0..r {
        for b in 0..r {
            check(ts.entry(a, b) * d_ref == &m_ref[a][b] * &ts.d, || format!("entry ({a}, {b})"))?;
        }
    }
    Ok(())
}

/// Quartic and both cubic cases on random coefficients.
pub fn genus_one_suite(seed: u64, trials: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let derive = |f: &[i64]| -> Result<TransitionSystem, String> {
        let curve = validate_curve_i64(f).map_err(|e| e.to_string())?;
        derive_transition(&curve, 1).map_err(|e| e.to_string())
    };
    for _ in 0..trials {
        let f = random_curve(&mut rng, 4, false);
        let (m, d) = quartic_reference(f.clone().try_into().unwrap());
        same_rational(&derive(&f)?, &m, &d).map_err(|e| format!("quartic {f:?}: {e}"))?;

        let f = random_curve(&mut rng, 3, false);
        let (m, d) = cubic_reference(f.clone().try_into().unwrap());
        same_rational(&derive(&f)?, &m, &d).map_err(|e| format!("cubic {f:?}: {e}"))?;

        let f = random_curve(&mut rng, 3, true);
        let (m, d) = cubic_zero_reference(f.clone().try_into().unwrap());
        same_rational(&derive(&f)?, &m, &d).map_err(|e| format!("cubic f0=0 {f:?}: {e}"))?;
    }
    Ok(())
}

/// Reference denominator: constant, linear factors `(a, b)`, powers of `f_0`,
/// `f_1` and `f_d`.
pub struct RefDen {
    constant: i64,
    factors: &'static [(i64, i64)],
    f0: u32,
    f1: u32,
    fd: u32,
}

pub fn reference_denominator(genus: usize, d: usize, zero_constant: bool, i: usize) -> RefDen {
    let rd = |constant, factors, f0, f1, fd| RefDen {
        constant,
        factors,
        f0,
        f1,
        fd,
    };
    match (genus, d, zero_constant, i) {
        (2, 6, false, 1) => rd(8, &[(1, 2), (2, 1), (2, 3), (4, 7), (4, 9)], 1, 0, 3),
        (2, 5, false, 1) => rd(6, &[(1, 2), (2, 1), (3, 5), (3, 7)], 1, 0, 2),
        (2, 5, true, 1) => rd(3, &[(1, 2), (3, 4), (3, 5)], 0, 0, 2),
        (2, 6, false, 2) => rd(8, &[(1, 3), (2, 1), (2, 5), (4, 3), (4, 5)], 3, 0, 1),
        (2, 5, false, 2) => rd(8, &[(1, 4), (2, 1), (4, 3), (4, 5)], 3, 0, 0),
        (2, 5, true, 2) => rd(3, &[(1, 3), (3, 2), (3, 4)], 0, 2, 0),
        (3, 8, false, 1) => rd(72, &[(1, 2), (2, 1), (2, 3), (3, 4), (3, 5), (6, 11), (6, 13)], 1, 0, 5),
        (3, 7, false, 1) => rd(10, &[(1, 2), (2, 1), (5, 7), (5, 8), (5, 9), (5, 11)], 1, 0, 4),
        (3, 7, true, 1) => rd(5, &[(1, 2), (5, 6), (5, 7), (5, 8), (5, 9)], 0, 0, 4),
        (3, 8, false, 2) => rd(8, &[(1, 2), (2, 1), (2, 5), (4, 3), (4, 5), (4, 7), (4, 9)], 3, 0, 3),
        (3, 7, false, 2) => rd(24, &[(1, 2), (2, 1), (3, 7), (3, 8), (4, 3), (4, 5)], 3, 0, 2),
        (3, 7, true, 2) => rd(3, &[(1, 2), (3, 2), (3, 4), (3, 5), (3, 7)], 0, 2, 2),
        (3, 8, false, 3) => rd(72, &[(1, 3), (2, 1), (2, 7), (3, 2), (3, 4), (6, 5), (6, 7)], 5, 0, 1),
        (3, 7, false, 3) => rd(72, &[(1, 5), (2, 1), (3, 2), (3, 4), (6, 5), (6, 7)], 5, 0, 0),
        (3, 7, true, 3) => rd(5, &[(1, 4), (5, 3), (5, 4), (5, 6), (5, 7)], 0, 4, 0),
        other => panic!("no reference for {other:?}"),
    }
}

/// Our `D` divides the reference product times `(f_0 f_1 f_d)^d`, and the
/// factored form expands to `D`.
pub fn divides_reference(curve: &CurveModel, ts: &TransitionSystem) -> Result<(), String> {
    let d = curve.degree();
    let rd = reference_denominator(curve.genus(), d, curve.zero_constant(), ts.i);
    let f = |j: usize| curve.coeff(j).clone();
    let mut scale = BigInt::from(rd.constant) * f(0).pow(rd.f0) * f(1).pow(rd.f1) * f(d).pow(rd.fd);
    for j in [0, 1, d] {
        if !f(j).is_zero() {
            scale *= f(j).pow(d as u32);
        }
    }
    let mut rest = IntPoly::constant(scale);
    for &(a, b) in rd.factors {
        rest = &rest * &lin(a, b);
    }
    for ((a, b), mult) in ts.d_factored.factors() {
        for _ in 0..mult {
            rest = rest
                .div_linear(a, b)
                .ok_or_else(|| format!("factor {a}n+{b} not in reference, i={}", ts.i))?;
        }
    }
    let c = ts.d_factored.constant();
    check((rest.content() % c).is_zero(), || format!("constant {c} does not divide reference, i={}", ts.i))?;
    let mut expanded = IntPoly::constant(c.clone());
    for ((a, b), mult) in ts.d_factored.factors() {
        for _ in 0..mult {
            expanded = &expanded * &lin(a, b);
        }
    }
    check(expanded == ts.d, || format!("factored form of D differs, i={}", ts.i))
}

/// Every genus-2/3 shape, a few random curves each, every row.
pub fn higher_genus_suite(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (d, zero_constant) in [(5, false), (5, true), (6, false), (7, false), (7, true), (8, false)] {
        for _ in 0..3 {
            let f = random_curve(&mut rng, d, zero_constant);
            let curve = validate_curve_i64(&f).map_err(|e| e.to_string())?;
            for i in 1..=curve.genus() {
                let ts = derive_transition(&curve, i).map_err(|e| e.to_string())?;
                divides_reference(&curve, &ts).map_err(|e| format!("{f:?}: {e}"))?;
            }
        }
    }
    Ok(())
}
