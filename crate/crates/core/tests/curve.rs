use hwforest_core::curve::{
    admissible_primes, classify_prime, discriminant, plain_sieve, primes_up_to, segmented_sieve,
    validate_curve_i64, CurveError, SkipReason,
};
use num_bigint::BigInt;
use num_traits::Zero;

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn mod_p(x: &BigInt, p: u64) -> u64 {
    let p = BigInt::from(p);
    u64::try_from(((x % &p) + &p) % &p).unwrap()
}

/// Squarefree mod `p` iff `gcd(f, f')` is constant over `F_p`, checked by
/// Euclid on coefficient vectors.
fn squarefree_mod_p(f: &[i64], p: u64) -> bool {
    let red = |v: &[i64]| -> Vec<u64> { v.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect() };
    let trim = |mut v: Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    };
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut a = trim(red(f));
    let df: Vec<i64> = f.iter().enumerate().skip(1).map(|(j, &c)| c * j as i64).collect();
    let mut b = trim(red(&df));
    while !b.is_empty() {
        let inv = pow(*b.last().unwrap(), p - 2);
        while a.len() >= b.len() {
            let q = a.last().unwrap() * inv % p;
            let shift = a.len() - b.len();
            for (j, &c) in b.iter().enumerate() {
                a[shift + j] = (a[shift + j] + p - q * c % p) % p;
            }
            a = trim(a);
        }
        core::mem::swap(&mut a, &mut b);
    }
    a.len() == 1
}

#[test]
fn admissible_primes_match_direct_definition() {
    let curves: &[&[i64]] = &[
        &[1, 1, 0, 1],
        &[1, 0, 0, 1, 1],
        &[0, 1, 0, 3, 0, 1],
        &[19, 17, 13, 11, 7, 5, 3, 2],
        &[2, 1, 0, 0, 0, 0, 0, 0, -3],
    ];
    for f in curves {
        let curve = validate_curve_i64(f).unwrap();
        let set = admissible_primes(&curve, 100_000);
        let f0 = f[0];
        let fd = *f.last().unwrap();
        let disc = discriminant(&f.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>());
        let want: Vec<u64> = (3..=100_000u64)
            .filter(|&p| is_prime(p))
            .filter(|&p| fd.rem_euclid(p as i64) != 0)
            .filter(|&p| f0 == 0 || f0.rem_euclid(p as i64) != 0)
            .filter(|&p| mod_p(&disc, p) != 0)
            .collect();
        assert_eq!(set.primes, want, "{f:?}");
        // Small primes: nonzero discriminant mod p agrees with squarefree mod p.
        for &p in want.iter().take_while(|&&p| p < 2000) {
            assert!(squarefree_mod_p(f, p), "{f:?} p={p}");
        }
        for (p, reason) in &set.skipped {
            assert_eq!(classify_prime(&curve, *p), Some(*reason));
        }
    }
}

#[test]
fn small_example_set() {
    let curve = validate_curve_i64(&[1, 1, 0, 1]).unwrap();
    let set = admissible_primes(&curve, 20);
    assert_eq!(set.primes, vec![3, 5, 7, 11, 13, 17, 19]);
    assert!(!set.contains(2));
    assert_eq!(classify_prime(&curve, 31), Some(SkipReason::DividesDiscriminant));
}

#[test]
fn validation_rejects_bad_input() {
    assert_eq!(validate_curve_i64(&[1, 1, 0, 0]).unwrap_err(), CurveError::ZeroLeading);
    assert_eq!(validate_curve_i64(&[1, 2, 1]).unwrap_err(), CurveError::NotSquarefree);
    assert!(matches!(
        validate_curve_i64(&[1, 1, 0, 0, 0, 0, 0, 0, 0, 1]).unwrap_err(),
        CurveError::UnsupportedGenus { .. }
    ));
    assert!(validate_curve_i64(&[0, 0, 1, 1]).is_err());
    assert!(!discriminant(&[1, 1, 0, 1].map(BigInt::from)).is_zero());
}

#[test]
fn sieves_agree() {
    for bound in [0u64, 1, 2, 3, 100, 65_537, 1_000_003] {
        let plain = plain_sieve(bound);
        assert_eq!(segmented_sieve(bound, 1 << 10), plain, "bound={bound}");
        assert_eq!(primes_up_to(bound), plain);
    }
    let brute: Vec<u64> = (0..=5000).filter(|&n| is_prime(n)).collect();
    assert_eq!(plain_sieve(5000), brute);
}

#[test]
fn segmented_sieve_past_plain_limit() {
    // Count of primes below 2^25 is 2063689.
    let primes = segmented_sieve(1 << 25, 1 << 20);
    assert_eq!(primes.len(), 2_063_689);
    assert_eq!(primes_up_to(1 << 25).len(), 2_063_689);
    assert!(primes.windows(2).all(|w| w[0] < w[1]));
}
