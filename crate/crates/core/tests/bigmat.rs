use hwforest_core::bigmat::{
    balanced_digits, choose_chunk_width, mat_mul_classical, mat_mul_fft, mat_mul_fft_split, IntMatrix,
    NttContext, NTT_PRIMES,
};
use hwforest_core::Multiplier;
use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bits: u64) -> IntMatrix {
    let data = (0..rows * cols)
        .map(|_| {
            let b = rng.gen_range(0..=bits);
            let x = rng.gen_bigint(b);
            if rng.gen_bool(0.1) {
                BigInt::zero()
            } else {
                x
            }
        })
        .collect();
    IntMatrix::from_vec(rows, cols, data)
}

fn negate(a: &IntMatrix) -> IntMatrix {
    IntMatrix::from_vec(a.rows(), a.cols(), a.entries().iter().map(|x| -x).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_product_matches_schoolbook(seed in any::<u64>(), r in 1usize..=5, bits in 1u64..3000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = NttContext::new();
        let a = random_matrix(&mut rng, r, r, bits);
        let b_bits = rng.gen_range(1..=bits);
        let b = random_matrix(&mut rng, r, r, b_bits);
        prop_assert_eq!(mat_mul_fft(&ctx, &a, &b).unwrap(), mat_mul_classical(&a, &b).unwrap());
    }

    #[test]
    fn rectangular_products_agree(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=4, k in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = NttContext::new();
        let a = random_matrix(&mut rng, n, m, 500);
        let b = random_matrix(&mut rng, m, k, 900);
        prop_assert_eq!(mat_mul_fft(&ctx, &a, &b).unwrap(), mat_mul_classical(&a, &b).unwrap());
    }

    #[test]
    fn split_product_matches_schoolbook(
        seed in any::<u64>(),
        (n, m, k) in (1usize..=3, 1usize..=3, 1usize..=3),
        short in 1u64..600,
        ratio in 1u64..40,
        long_left in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = NttContext::new();
        let (a_bits, b_bits) = if long_left { (short * ratio, short) } else { (short, short * ratio) };
        let a = random_matrix(&mut rng, n, m, a_bits);
        let b = random_matrix(&mut rng, m, k, b_bits);
        prop_assert_eq!(mat_mul_fft_split(&ctx, &a, &b).unwrap(), mat_mul_classical(&a, &b).unwrap());
    }

    #[test]
    fn crt_recovers_balanced_values(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = NttContext::new();
        let p: BigInt = NTT_PRIMES.iter().fold(BigInt::one(), |acc, &q| acc * q);
        let half = &p / 2;
        // Uniform in (-P/2, P/2].
        let x = rng.gen_bigint_range(&(-&half + 1), &(&half + 1));
        let residues = NTT_PRIMES.map(|q| {
            let q = BigInt::from(q);
            u64::try_from(((&x % &q) + &q) % &q).unwrap()
        });
        prop_assert_eq!(ctx.crt(residues), x);
    }

    #[test]
    fn balanced_digits_reconstruct(seed in any::<u64>(), c in 1u32..=120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x_bits = rng.gen_range(0..2000);
        let x = rng.gen_bigint(x_bits);
        let digits = balanced_digits(&x, c);
        let half = 1i128 << (c - 1);
        let mut acc = BigInt::zero();
        for &d in digits.iter().rev() {
            prop_assert!(-half <= d && d <= half);
            acc = (acc << c as usize) + d;
        }
        prop_assert_eq!(acc, x);
    }
}

#[test]
fn crt_extremes() {
    let ctx = NttContext::new();
    let p: BigInt = NTT_PRIMES.iter().fold(BigInt::one(), |acc, &q| acc * q);
    let half: BigInt = &p / 2;
    for x in [BigInt::zero(), BigInt::one(), -BigInt::one(), half.clone(), -&half + 1] {
        let residues = NTT_PRIMES.map(|q| {
            let q = BigInt::from(q);
            u64::try_from(((&x % &q) + &q) % &q).unwrap()
        });
        assert_eq!(ctx.crt(residues), x);
    }
}

#[test]
fn transform_counts_are_quadratic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ctx = NttContext::new();
    for r in 1..=5 {
        let a = random_matrix(&mut rng, r, r, 4000);
        let b = random_matrix(&mut rng, r, r, 4000);
        ctx.reset_counters();
        mat_mul_fft(&ctx, &a, &b).unwrap();
        let counts = ctx.transform_counts();
        assert_eq!(counts.forward, 2 * (r * r) as u64, "r={r}");
        assert_eq!(counts.inverse, (r * r) as u64, "r={r}");
        let raw = ctx.raw_transform_counts();
        assert_eq!(raw.forward, 4 * counts.forward);
    }
}

#[test]
fn chunk_width_is_monotone_and_safe() {
    let p: BigUint = NTT_PRIMES.iter().fold(BigUint::one(), |acc, &q| acc * q);
    for r in 1..=9usize {
        let mut last = u32::MAX;
        for lg in 0..40 {
            let bits = 1u64 << lg;
            let c = choose_chunk_width(bits, r);
            assert!(c <= last, "r={r} bits={bits}");
            last = c;
            let chunks = bits.div_ceil(c as u64) + 1;
            let bound = (BigUint::from(chunks) * BigUint::from(r) * 2u32) << (2 * c as usize);
            assert!(bound < p, "r={r} bits={bits} c={c}");
        }
    }
    for bits in [10u64, 1 << 20, 1 << 30] {
        let mut last = u32::MAX;
        for r in 1..=9 {
            let c = choose_chunk_width(bits, r);
            assert!(c <= last);
            last = c;
        }
    }
}

#[test]
fn identity_product_preserves_huge_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ctx = NttContext::new();
    for r in [2, 4] {
        let a = random_matrix(&mut rng, r, r, 100_000);
        let mut id = IntMatrix::identity(r);
        assert_eq!(mat_mul_fft(&ctx, &a, &id).unwrap(), a);
        let big = BigInt::one() << 100_000usize;
        id.set(0, 0, big.clone());
        let got = mat_mul_fft(&ctx, &a, &id).unwrap();
        for i in 0..r {
            assert_eq!(got.get(i, 0), &(a.get(i, 0) * &big));
        }
    }
}

#[test]
fn negation_commutes_with_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ctx = NttContext::new();
    for _ in 0..5 {
        let a = random_matrix(&mut rng, 3, 3, 20_000);
        let b = random_matrix(&mut rng, 3, 3, 20_000);
        let ab = mat_mul_fft(&ctx, &a, &b).unwrap();
        assert_eq!(mat_mul_fft(&ctx, &negate(&a), &b).unwrap(), negate(&ab));
        assert_eq!(mat_mul_fft(&ctx, &a, &negate(&b)).unwrap(), negate(&ab));
        assert_eq!(mat_mul_fft(&ctx, &negate(&a), &negate(&b)).unwrap(), ab);
    }
}

#[test]
fn multiplier_dispatch_is_transparent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mul = Multiplier::with_cutoffs(256, 256);
    for bits in [10u64, 300, 5000, 70_000] {
        let a = random_matrix(&mut rng, 3, 3, bits);
        let b = random_matrix(&mut rng, 3, 3, bits);
        assert_eq!(mul.mat_mul(&a, &b).unwrap(), mat_mul_classical(&a, &b).unwrap());
        let x = rng.gen_bigint(bits);
        let y = rng.gen_bigint(bits);
        assert_eq!(mul.mul(&x, &y), &x * &y);
        let m = rng.gen_biguint(bits / 2 + 2) + 1u32;
        let m = BigInt::from_biguint(Sign::Plus, m);
        let red = mul.reducer(m.clone());
        let z = &x * &y;
        let want = ((&z % &m) + &m) % &m;
        assert_eq!(red.reduce(&z, &mul), want);
    }
}

#[test]
fn default_multiplier_on_lopsided_shapes() {
    // Sizes straddle the shape-dependent cutoffs of every route.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mul = Multiplier::new();
    for (short, long) in [(3000u64, 200_000u64), (9000, 60_000), (20_000, 20_000), (150_000, 150_000)] {
        let v = random_matrix(&mut rng, 1, 3, long);
        let a = random_matrix(&mut rng, 3, 3, short);
        assert_eq!(mul.mat_mul(&v, &a).unwrap(), mat_mul_classical(&v, &a).unwrap());
        let col = IntMatrix::from_vec(3, 1, v.entries().to_vec());
        assert_eq!(mul.mat_mul(&a, &col).unwrap(), mat_mul_classical(&a, &col).unwrap());
        let x = rng.gen_bigint(short);
        let y = rng.gen_bigint(long);
        assert_eq!(mul.mul(&x, &y), &x * &y);
        assert_eq!(mul.mul(&y, &x), &x * &y);
    }
}

#[test]
fn dimension_mismatch_is_reported() {
    let ctx = NttContext::new();
    let a = IntMatrix::zeros(2, 3);
    let b = IntMatrix::zeros(2, 3);
    assert!(mat_mul_fft(&ctx, &a, &b).is_err());
    assert!(mat_mul_classical(&a, &b).is_err());
}
