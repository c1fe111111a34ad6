//! Irreducibility testing over field towers.
//!
//! Over `Q` the test is complete: a fast irreducibility proof modulo
//! small primes, then an exhaustive factor search by interpolation
//! through divisor tuples (with an explicit work cap, reported as
//! [`IrredOutcome::Inconclusive`] when exceeded). Over extension towers
//! the test covers binomials (via exact power tests), quadratics (via
//! square roots of the discriminant), polynomials with rational
//! coefficients, and the squarefree pre-check; anything else is
//! reported inconclusive rather than guessed.

use num::{BigInt, BigRational, One, Zero};

use super::powers::{nth_power_root, PowerOutcome};
use super::FieldTower;
use crate::intutil::{divisors, prime_factors, SMALL_PRIMES};
use crate::unipoly::UniPoly;

/// Outcome of an irreducibility test.
#[derive(Clone, Debug)]
pub enum IrredOutcome {
    Irreducible,
    /// A verified nontrivial monic factor.
    Reducible(UniPoly),
    /// The decision procedure does not cover this input.
    Inconclusive,
}

/// Test irreducibility of a nonconstant polynomial over its tower.
pub fn irreducible_over(f: &UniPoly) -> IrredOutcome {
    let n = match f.degree() {
        None | Some(0) => return IrredOutcome::Inconclusive,
        Some(1) => return IrredOutcome::Irreducible,
        Some(n) => n,
    };

    // Squarefree pre-check works over every tower.
    let g = f.gcd(&f.derivative());
    if !g.is_constant() {
        return IrredOutcome::Reducible(g);
    }

    if f.tower().is_rationals() {
        return irreducible_over_q(f, n);
    }

    // Binomials: Capelli's criterion via exact power tests.
    if let Some(out) = binomial_test(f, n) {
        return out;
    }

    // Quadratics: complete whenever the square test below is.
    if n == 2 {
        return quadratic_test(f);
    }

    // Rational coefficients: factor over Q and transfer what transfers.
    if let Some(rc) = f.rational_coeffs() {
        let q = FieldTower::rationals();
        let fq = UniPoly::from_coeffs(
            &q,
            f.var(),
            rc.into_iter().map(|r| q.from_rational(r)).collect(),
        );
        let purely_transcendental = f.tower().depth() == 1 && f.tower().top_is_transcendental();
        return match irreducible_over(&fq) {
            IrredOutcome::Reducible(h) => {
                IrredOutcome::Reducible(h.lift_to(f.tower()).expect("Q is a prefix"))
            }
            IrredOutcome::Irreducible if purely_transcendental => IrredOutcome::Irreducible,
            _ => IrredOutcome::Inconclusive,
        };
    }

    IrredOutcome::Inconclusive
}

/// Capelli: `x^n - a` is reducible exactly when `a` is a `p`-th power
/// for some prime `p | n`, or `4 | n` and `a = -4 b^4`.
fn binomial_test(f: &UniPoly, n: usize) -> Option<IrredOutcome> {
    let fm = f.monic();
    let mut nonzero: Vec<usize> = Vec::new();
    for i in 0..=n {
        if !fm.coefficient(i).is_zero() {
            nonzero.push(i);
        }
    }
    if nonzero != vec![0, n] {
        return None;
    }
    let a = fm.coefficient(0).neg();
    let tower = f.tower().clone();
    let mut undecided = false;
    let mut primes = prime_factors(n);
    primes.dedup();
    for p in primes {
        match nth_power_root(&a, p) {
            PowerOutcome::Root(b) => {
                // x^(n/p) - b divides x^n - b^p
                let mut coeffs = vec![b.neg()];
                coeffs.extend(std::iter::repeat_n(tower.zero(), n / p - 1));
                coeffs.push(tower.one());
                return Some(IrredOutcome::Reducible(UniPoly::from_coeffs(
                    &tower,
                    f.var(),
                    coeffs,
                )));
            }
            PowerOutcome::NotPower => {}
            PowerOutcome::Undecided => undecided = true,
        }
    }
    if n.is_multiple_of(4) {
        let quarter = a
            .neg()
            .mul(&tower.from_rational(BigRational::new(BigInt::from(1), BigInt::from(4))));
        match nth_power_root(&quarter, 4) {
            PowerOutcome::Root(b) => {
                // a = -4 b^4 gives X^4 + 4 b^4 = (X^2 - 2bX + 2b^2)(X^2 + 2bX + 2b^2)
                // with X = x^(n/4).
                let two_b = b.mul(&tower.from_integer(2));
                let two_b_sq = b.mul(&b).mul(&tower.from_integer(2));
                let mut coeffs = vec![tower.zero(); n / 2 + 1];
                coeffs[0] = two_b_sq;
                coeffs[n / 4] = two_b.neg();
                coeffs[n / 2] = tower.one();
                return Some(IrredOutcome::Reducible(UniPoly::from_coeffs(
                    &tower,
                    f.var(),
                    coeffs,
                )));
            }
            PowerOutcome::NotPower => {}
            PowerOutcome::Undecided => undecided = true,
        }
    }
    Some(if undecided { IrredOutcome::Inconclusive } else { IrredOutcome::Irreducible })
}

/// Quadratics reduce to a square test on the discriminant.
fn quadratic_test(f: &UniPoly) -> IrredOutcome {
    let fm = f.monic();
    let c0 = fm.coefficient(0);
    let c1 = fm.coefficient(1);
    let tower = f.tower().clone();
    let four = tower.from_integer(4);
    let disc = c1.mul(&c1).sub(&four.mul(&c0));
    match nth_power_root(&disc, 2) {
        PowerOutcome::Root(r) => {
            // root (r - c1)/2 yields the monic factor x - (r - c1)/2
            let half = tower.from_rational(BigRational::new(BigInt::from(1), BigInt::from(2)));
            let root = r.sub(&c1).mul(&half);
            IrredOutcome::Reducible(UniPoly::from_coeffs(
                &tower,
                f.var(),
                vec![root.neg(), tower.one()],
            ))
        }
        PowerOutcome::NotPower => IrredOutcome::Irreducible,
        PowerOutcome::Undecided => IrredOutcome::Inconclusive,
    }
}

/// Complete test over `Q`.
fn irreducible_over_q(f: &UniPoly, n: usize) -> IrredOutcome {
    let (coeffs, lambda) = monic_integer_model(f);

    // Fast path: irreducible modulo some small prime.
    for &p in SMALL_PRIMES {
        if rabin_irreducible_mod_p(&coeffs, p) == Some(true) {
            return IrredOutcome::Irreducible;
        }
    }

    kronecker_search(&coeffs, &lambda, f, n)
}

/// Monic integer model: for monic-normalized `f` and `lambda` the lcm of
/// coefficient denominators, `F(y) = lambda^n f(y/lambda)` has integer
/// coefficients and is monic; factors correspond under `y = lambda x`.
fn monic_integer_model(f: &UniPoly) -> (Vec<BigInt>, BigInt) {
    let fm = f.monic();
    let rc = fm.rational_coeffs().expect("polynomial over Q");
    let n = rc.len() - 1;
    let mut lambda = BigInt::one();
    for c in &rc {
        lambda = lcm_bigint(&lambda, c.denom());
    }
    let mut out = Vec::with_capacity(rc.len());
    for (i, c) in rc.iter().enumerate() {
        let scaled = c * BigRational::from_integer(num::pow::pow(lambda.clone(), n - i));
        debug_assert!(scaled.denom().is_one());
        out.push(scaled.numer().clone());
    }
    (out, lambda)
}

fn lcm_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    use num::Integer;
    a.lcm(b)
}

// ---- arithmetic on dense polynomials over F_p (u64 coefficients) ----

fn trim_mod(v: &mut Vec<u64>) {
    while matches!(v.last(), Some(0)) {
        v.pop();
    }
}

fn poly_rem_mod(mut a: Vec<u64>, f: &[u64], p: u64) -> Vec<u64> {
    // f monic
    let df = f.len() - 1;
    while a.len() > df {
        let lead = *a.last().expect("nonempty");
        let shift = a.len() - 1 - df;
        if lead != 0 {
            for (i, &fi) in f.iter().enumerate().take(df) {
                let sub = crate::intutil::mul_mod_u64(lead, fi, p);
                let idx = shift + i;
                a[idx] = (a[idx] + p - sub) % p;
            }
        }
        a.pop();
        trim_mod(&mut a);
        if a.len() <= df {
            break;
        }
    }
    trim_mod(&mut a);
    a
}

fn poly_mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y == 0 {
                continue;
            }
            let t = crate::intutil::mul_mod_u64(x, y, p);
            out[i + j] = (out[i + j] + t) % p;
        }
    }
    poly_rem_mod(out, f, p)
}

fn poly_pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &b, f, p);
        }
        e >>= 1;
        if e > 0 {
            b = poly_mul_mod(&b, &b, f, p);
        }
    }
    acc
}

/// Evaluate `g` at the polynomial `at`, modulo `f` (Horner).
fn poly_compose_mod(g: &[u64], at: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut acc: Vec<u64> = Vec::new();
    for &c in g.iter().rev() {
        acc = poly_mul_mod(&acc, at, f, p);
        if c != 0 {
            if acc.is_empty() {
                acc = vec![c];
            } else {
                acc[0] = (acc[0] + c) % p;
            }
        }
    }
    acc
}

fn poly_gcd_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim_mod(&mut x);
    trim_mod(&mut y);
    while !y.is_empty() {
        // make y monic, then reduce
        let lead = *y.last().expect("nonempty");
        let inv = crate::intutil::pow_mod_u64(lead, p - 2, p);
        let ym: Vec<u64> = y.iter().map(|&c| crate::intutil::mul_mod_u64(c, inv, p)).collect();
        let r = poly_rem_mod(x, &ym, p);
        x = ym;
        y = r;
    }
    x
}

fn poly_derivative_mod(a: &[u64], p: u64) -> Vec<u64> {
    if a.len() <= 1 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(a.len() - 1);
    for (i, &c) in a.iter().enumerate().skip(1) {
        out.push(crate::intutil::mul_mod_u64(c, (i as u64) % p, p));
    }
    trim_mod(&mut out);
    out
}

/// Rabin's irreducibility test for a monic integer polynomial reduced
/// modulo `p`. `Some(true)` proves irreducibility over `Q`;
/// `Some(false)` means reducible modulo `p` (no conclusion); `None`
/// means the prime is unusable for this polynomial.
fn rabin_irreducible_mod_p(coeffs: &[BigInt], p: u64) -> Option<bool> {
    let pb = BigInt::from(p);
    let f: Vec<u64> = coeffs
        .iter()
        .map(|c| {
            let r = ((c % &pb) + &pb) % &pb;
            u64::try_from(&r).expect("residue fits")
        })
        .collect();
    let n = f.len() - 1;
    if f[n] != 1 {
        return None;
    }
    // f must stay squarefree modulo p for the test to apply.
    let g = poly_gcd_mod(&f, &poly_derivative_mod(&f, p), p);
    if g.len() > 1 {
        return None;
    }

    let x_poly = vec![0u64, 1];
    let frob = poly_pow_mod(&x_poly, p, &f, p); // x^p mod f
    // iterated Frobenius: powers[k] = x^(p^k) mod f
    let mut powers: Vec<Vec<u64>> = vec![x_poly.clone(), frob.clone()];
    for _ in 2..=n {
        let prev = powers.last().expect("nonempty");
        powers.push(poly_compose_mod(prev, &frob, &f, p));
    }
    // x^(p^n) must equal x ...
    let mut top = powers[n].clone();
    if top.len() >= 2 {
        top[1] = (top[1] + p - 1) % p;
    } else {
        top.resize(2, 0);
        top[1] = p - 1;
    }
    trim_mod(&mut top);
    if !top.is_empty() {
        return Some(false);
    }
    // ... and x^(p^(n/q)) - x must be coprime to f for all primes q | n.
    let mut qs = prime_factors(n);
    qs.dedup();
    for q in qs {
        let k = n / q;
        let mut diff = powers[k].clone();
        if diff.len() >= 2 {
            diff[1] = (diff[1] + p - 1) % p;
        } else {
            diff.resize(2, 0);
            diff[1] = p - 1;
        }
        trim_mod(&mut diff);
        let g = poly_gcd_mod(&diff, &f, p);
        if g.len() > 1 {
            return Some(false);
        }
    }
    Some(true)
}

// ---- exhaustive factor search over Z ----

const TUPLE_BUDGET: usize = 500_000;
const POINT_CANDIDATES: usize = 40;

fn eval_bigint(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Candidate evaluation points: 0, 1, -1, 2, -2, ...
fn point_sequence() -> impl Iterator<Item = BigInt> {
    (0i64..).map(|i| {
        if i == 0 {
            BigInt::zero()
        } else if i % 2 == 1 {
            BigInt::from((i + 1) / 2)
        } else {
            BigInt::from(-(i / 2))
        }
    })
}

/// Exhaustive search for a monic integer factor of degree up to `n/2`,
/// by interpolation through divisor tuples of the values at small
/// points. Complete unless the work cap or an unfactorable value stops
/// it, in which case the outcome is `Inconclusive`.
fn kronecker_search(coeffs: &[BigInt], lambda: &BigInt, f: &UniPoly, n: usize) -> IrredOutcome {
    // Usable points: F(pt) != 0 and the value factors completely.
    let mut points: Vec<BigInt> = Vec::new();
    let mut value_divisors: Vec<Vec<BigInt>> = Vec::new();
    let mut tried = 0usize;
    for pt in point_sequence() {
        if points.len() >= n / 2 {
            break;
        }
        tried += 1;
        if tried > POINT_CANDIDATES {
            break;
        }
        let val = eval_bigint(coeffs, &pt);
        if val.is_zero() {
            // pt is an integer root: y - pt is a factor.
            let factor = UniPoly::from_coeffs(
                f.tower(),
                f.var(),
                vec![
                    f.tower().from_rational(BigRational::new(-&pt, lambda.clone())),
                    f.tower().one(),
                ],
            );
            debug_assert!(f.rem(&factor).expect("nonzero factor").is_zero());
            return IrredOutcome::Reducible(factor);
        }
        match divisors(&val) {
            Some(divs) => {
                points.push(pt);
                value_divisors.push(divs);
            }
            None => continue,
        }
    }
    if points.len() < n / 2 {
        return IrredOutcome::Inconclusive;
    }

    let mut budget = TUPLE_BUDGET;
    for r in 1..=n / 2 {
        match search_degree(coeffs, lambda, f, r, &points[..r], &value_divisors[..r], &mut budget) {
            SearchResult::Found(h) => return IrredOutcome::Reducible(h),
            SearchResult::Exhausted => continue,
            SearchResult::BudgetSpent => return IrredOutcome::Inconclusive,
        }
    }
    IrredOutcome::Irreducible
}

enum SearchResult {
    Found(UniPoly),
    Exhausted,
    BudgetSpent,
}

fn search_degree(
    coeffs: &[BigInt],
    lambda: &BigInt,
    f: &UniPoly,
    r: usize,
    points: &[BigInt],
    value_divisors: &[Vec<BigInt>],
    budget: &mut usize,
) -> SearchResult {
    // Signed divisor candidates for each point.
    let candidate_sets: Vec<Vec<BigInt>> = value_divisors
        .iter()
        .map(|ds| {
            let mut v: Vec<BigInt> = Vec::with_capacity(ds.len() * 2);
            for d in ds {
                v.push(d.clone());
                v.push(-d);
            }
            v
        })
        .collect();

    // M(y) = prod (y - p_j), the monic part of every candidate.
    let mut m_poly = vec![BigInt::one()];
    for pt in points {
        m_poly = int_poly_mul(&m_poly, &[-pt, BigInt::one()]);
    }

    // Lagrange denominators: prod_{k != j} (p_j - p_k).
    let mut lagrange_bases: Vec<Vec<BigRational>> = Vec::with_capacity(r);
    for j in 0..r {
        let mut numer = vec![BigInt::one()];
        let mut denom = BigInt::one();
        for k in 0..r {
            if k == j {
                continue;
            }
            numer = int_poly_mul(&numer, &[-&points[k], BigInt::one()]);
            denom *= &points[j] - &points[k];
        }
        let base: Vec<BigRational> =
            numer.into_iter().map(|c| BigRational::new(c, denom.clone())).collect();
        lagrange_bases.push(base);
    }

    let mut idx = vec![0usize; r];
    loop {
        if *budget == 0 {
            return SearchResult::BudgetSpent;
        }
        *budget -= 1;

        // h = M + sum_j d_j * basis_j, integer and monic of degree r.
        let mut h_low = vec![BigRational::zero(); r];
        for j in 0..r {
            let d = &candidate_sets[j][idx[j]];
            let dr = BigRational::from_integer(d.clone());
            for (i, b) in lagrange_bases[j].iter().enumerate() {
                h_low[i] += b * &dr;
            }
        }
        let integral = h_low.iter().all(|c| c.denom().is_one());
        if integral {
            let mut h: Vec<BigInt> = h_low.iter().map(|c| c.numer().clone()).collect();
            for (i, c) in m_poly.iter().enumerate().take(r) {
                h[i] += c;
            }
            h.push(BigInt::one());
            if int_poly_divides(&h, coeffs) {
                // map back through y = lambda x: g(x) = h(lambda x)/lambda^r
                let tower = f.tower();
                let mut gc = Vec::with_capacity(r + 1);
                for (i, c) in h.iter().enumerate() {
                    let num = c * num::pow::pow(lambda.clone(), i);
                    let den = num::pow::pow(lambda.clone(), r);
                    gc.push(tower.from_rational(BigRational::new(num, den)));
                }
                let g = UniPoly::from_coeffs(tower, f.var(), gc);
                if f.rem(&g).expect("nonzero factor").is_zero() {
                    return SearchResult::Found(g);
                }
            }
        }

        // odometer increment
        let mut pos = 0;
        loop {
            if pos == r {
                return SearchResult::Exhausted;
            }
            idx[pos] += 1;
            if idx[pos] < candidate_sets[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Whether monic `h` divides monic `f` over the integers.
fn int_poly_divides(h: &[BigInt], f: &[BigInt]) -> bool {
    let mut rem: Vec<BigInt> = f.to_vec();
    let dh = h.len() - 1;
    while rem.len() > dh {
        let lead = rem.last().expect("nonempty").clone();
        let shift = rem.len() - 1 - dh;
        if !lead.is_zero() {
            for i in 0..dh {
                let delta = &lead * &h[i];
                rem[shift + i] -= delta;
            }
        }
        rem.pop();
    }
    rem.iter().all(|c| c.is_zero())
}

/// Convenience wrapper used by callers that only need a yes/no with an
/// error on the undecided case.
pub fn require_irreducible(f: &UniPoly) -> Result<(), super::FieldError> {
    match irreducible_over(f) {
        IrredOutcome::Irreducible => Ok(()),
        IrredOutcome::Reducible(_) => Err(super::FieldError::ReducibleMinimalPolynomial),
        IrredOutcome::Inconclusive => Err(super::FieldError::InconclusiveIrreducibility),
    }
}
