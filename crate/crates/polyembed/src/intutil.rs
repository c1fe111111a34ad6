//! Integer helpers: deterministic primality for `u64`, Pollard rho
//! factorization, and divisor enumeration for big integers.

use num::bigint::Sign;
use num::{BigInt, BigUint, One, Zero};

/// Deterministic Miller-Rabin for `u64` using a fixed base set that is
/// known to be exact for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'bases: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Pollard rho with Brent's cycle detection; `n` must be composite, odd,
/// and free of factors below the trial-division bound used upstream.
fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let f = |v: u64| (mul_mod_u64(v, v, n) + c) % n;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Full factorization of a `u64` into prime powers (ascending primes).
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = Vec::new();
    if n > 1 {
        stack.push(n);
    }
    let mut primes: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            primes.push(m);
            continue;
        }
        // Peel small factors first; fall back to rho for the hard core.
        let mut found = 0u64;
        let mut d = 7u64;
        while d * d <= m && d < 100_000 {
            if m % d == 0 {
                found = d;
                break;
            }
            d += 2;
        }
        if found == 0 {
            found = pollard_rho(m);
        }
        stack.push(found);
        stack.push(m / found);
    }
    primes.sort_unstable();
    let mut i = 0;
    while i < primes.len() {
        let p = primes[i];
        let mut e = 0u32;
        while i < primes.len() && primes[i] == p {
            e += 1;
            i += 1;
        }
        out.push((p, e));
    }
    out.sort_unstable();
    out
}

/// Prime factorization of a small exponent (used for peeling roots).
pub fn prime_factors(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        while m.is_multiple_of(p) {
            out.push(p);
            m /= p;
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// All divisors of `n > 0`, both signs excluded (positive only), ascending.
/// Returns `None` when `n` does not fit the factorization strategy
/// (a composite core above 64 bits survives trial division).
pub fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let mag = n.magnitude().clone();
    if mag.is_zero() {
        return None;
    }
    let mut core = mag;
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    let mut d = BigUint::from(2u32);
    let bound = BigUint::from(1_000_000u64);
    while &d * &d <= core && d <= bound {
        let mut e = 0u32;
        while (&core % &d).is_zero() {
            core /= &d;
            e += 1;
        }
        if e > 0 {
            factors.push((d.clone(), e));
        }
        d += 1u32;
    }
    if !core.is_one() {
        match u64::try_from(&core) {
            Ok(small) => {
                for (p, e) in factor_u64(small) {
                    factors.push((BigUint::from(p), e));
                }
            }
            Err(_) => {
                // A large core might still be prime; accept that case.
                let core_int = BigInt::from_biguint(Sign::Plus, core.clone());
                if probable_prime_bigint(&core_int) {
                    factors.push((core, 1));
                } else {
                    return None;
                }
            }
        }
    }
    factors.sort();
    let mut divs = vec![BigUint::one()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for dv in &divs {
            let mut pk = BigUint::one();
            for _ in 0..=e {
                next.push(dv * &pk);
                pk *= &p;
            }
        }
        divs = next;
    }
    divs.sort();
    Some(divs.into_iter().map(|u| BigInt::from_biguint(Sign::Plus, u)).collect())
}

/// Fermat test with a few bases; only used to accept an oversized prime
/// cofactor during divisor enumeration (a false positive would surface
/// later as a failed exact-division check, never as a wrong answer).
fn probable_prime_bigint(n: &BigInt) -> bool {
    if n <= &BigInt::from(1) {
        return false;
    }
    let nm1 = n - 1;
    for a in [2u32, 3, 5, 7, 11, 13] {
        let ab = BigInt::from(a);
        if &ab >= n {
            continue;
        }
        if ab.modpow(&nm1, n) != BigInt::one() {
            return false;
        }
    }
    true
}

pub const SMALL_PRIMES: &[u64] = &[
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// SplitMix64 step: advances the state and returns the next value.
/// Used wherever reproducible pseudo-random choices are needed, so that
/// a fixed seed gives bit-identical runs on every platform.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic Fisher-Yates shuffle driven by [`splitmix64`].
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut state = seed;
    for i in (1..items.len()).rev() {
        let j = (splitmix64(&mut state) % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_small_primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
    }

    #[test]
    fn test_factor_u64_mixed() {
        assert_eq!(factor_u64(1), vec![]);
        assert_eq!(factor_u64(2 * 2 * 3 * 97), vec![(2, 2), (3, 1), (97, 1)]);
        // two large primes that trial division alone cannot separate
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        assert_eq!(factor_u64(p * q), vec![(p, 1), (q, 1)]);
    }

    #[test]
    fn test_divisors_of_twelve() {
        let divs = divisors(&BigInt::from(-12)).expect("12 factors");
        let expected: Vec<BigInt> = [1, 2, 3, 4, 6, 12].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(divs, expected);
    }

    #[test]
    fn test_prime_factors_with_multiplicity() {
        assert_eq!(prime_factors(12), vec![2, 2, 3]);
        assert_eq!(prime_factors(1), Vec::<usize>::new());
    }
}
