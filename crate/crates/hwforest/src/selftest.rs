//! Quick internal checks behind `hwforest selftest`. Each one compares two
//! independent routes to the same answer.

use hwforest_core::bigmat::{mat_mul_classical, mat_mul_fft, IntMatrix};
use hwforest_core::curve::validate_curve_i64;
use hwforest_core::hassewitt::{compute_hassewitt_matrices, count_points, naive_hassewitt};
use hwforest_core::remainder::{remainder_forest, ForestPlan, VecStream};
use hwforest_core::transition::derive_transition;
use hwforest_core::{HasseWittOptions, MemoryMeter, Multiplier};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<(), String>;

pub fn checks() -> Vec<(&'static str, Check)> {
    vec![
        ("wilson forest", wilson as Check),
        ("quartic denominator", quartic_denominator),
        ("transform product", transform_product),
        ("small genus-1 record", genus_one_record),
        ("forest vs direct expansion", forest_vs_direct),
        ("trace vs point count", trace_vs_points),
    ]
}

pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    checks().into_iter().map(|(name, f)| (name, f())).collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn wilson() -> Result<(), String> {
    let mul = Multiplier::new();
    let mut matrices: Vec<IntMatrix> = (0..7i64)
        .map(|n| IntMatrix::scalar(BigInt::from((2 * n + 1) * (2 * n + 2))))
        .collect();
    matrices.push(IntMatrix::identity(1));
    let moduli: Vec<BigInt> = [1, 3, 5, 7, 1, 11, 13, 1].map(BigInt::from).to_vec();
    let want: Vec<BigInt> = [0, 2, 4, 6, 0, 10, 12, 0].map(BigInt::from).to_vec();
    for k in 0..=3 {
        let mut stream = VecStream {
            matrices: matrices.clone(),
            moduli: moduli.clone(),
        };
        let got = remainder_forest(&mul, &[BigInt::from(1)], &mut stream, ForestPlan::new(3, k), &mut MemoryMeter::new())
            .map_err(|e| e.to_string())?;
        let got: Vec<BigInt> = got.into_iter().map(|v| v[0].clone()).collect();
        ensure(got == want, || format!("k={k}: {got:?}"))?;
    }
    Ok(())
}

fn quartic_denominator() -> Result<(), String> {
    let curve = validate_curve_i64(&[1, 0, 0, 1, 1]).map_err(|e| e.to_string())?;
    let ts = derive_transition(&curve, 1).map_err(|e| e.to_string())?;
    for n in 0..10u64 {
        let (_, d) = ts.evaluate(n).map_err(|e| e.to_string())?;
        let n = n as i64;
        let want = BigInt::from(2 * (n + 2) * (2 * n + 1) * (2 * n + 5));
        ensure(d == want, || format!("D({n}) = {d}, expected {want}"))?;
    }
    Ok(())
}

fn transform_product() -> Result<(), String> {
    let mul = Multiplier::new();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for r in 1..=4 {
        let mut random = |bits: u64| {
            let data = (0..r * r)
                .map(|_| {
                    let digits: Vec<u32> = (0..bits / 32).map(|_| rng.gen()).collect();
                    let x = BigInt::from_slice(num_bigint::Sign::Plus, &digits);
                    if rng.gen() {
                        -x
                    } else {
                        x
                    }
                })
                .collect();
            IntMatrix::from_vec(r, r, data)
        };
        let a = random(4096);
        let b = random(2048);
        let fft = mat_mul_fft(mul.context(), &a, &b).map_err(|e| e.to_string())?;
        let classical = mat_mul_classical(&a, &b).map_err(|e| e.to_string())?;
        ensure(fft == classical, || format!("r={r}: products differ"))?;
    }
    Ok(())
}

fn genus_one_record() -> Result<(), String> {
    let mul = Multiplier::new();
    let curve = validate_curve_i64(&[1, 1, 0, 1]).map_err(|e| e.to_string())?;
    let report = compute_hassewitt_matrices(&mul, &curve, 64, &HasseWittOptions::default())
        .map_err(|e| e.to_string())?;
    let rec = report
        .records
        .iter()
        .find(|r| r.p == 5)
        .ok_or("no record for p=5")?;
    ensure(rec.trace == 2 && rec.a_p == Some(-3), || format!("{rec:?}"))
}

const SMALL_CORPUS: &[&[i64]] = &[&[1, 1, 0, 1], &[1, 0, 0, 1, 1], &[1, 1, 0, 3, 0, 1], &[19, 17, 13, 11, 7, 5, 3, 2]];

fn forest_vs_direct() -> Result<(), String> {
    let mul = Multiplier::new();
    for coeffs in SMALL_CORPUS {
        let curve = validate_curve_i64(coeffs).map_err(|e| e.to_string())?;
        let report = compute_hassewitt_matrices(&mul, &curve, 512, &HasseWittOptions::default())
            .map_err(|e| e.to_string())?;
        for rec in &report.records {
            let direct = naive_hassewitt(&curve, rec.p);
            ensure(rec.w == direct, || format!("{coeffs:?} p={}: {:?} vs {direct:?}", rec.p, rec.w))?;
        }
    }
    Ok(())
}

fn trace_vs_points() -> Result<(), String> {
    let mul = Multiplier::new();
    for coeffs in SMALL_CORPUS {
        let curve = validate_curve_i64(coeffs).map_err(|e| e.to_string())?;
        let report = compute_hassewitt_matrices(&mul, &curve, 200, &HasseWittOptions::default())
            .map_err(|e| e.to_string())?;
        for rec in &report.records {
            let p = rec.p;
            let expect = (p + 1 + p * p - count_points(&curve, p) % p) % p;
            ensure(rec.trace == expect, || format!("{coeffs:?} p={p}"))?;
        }
    }
    Ok(())
}
