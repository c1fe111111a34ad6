//! Exact power detection and root extraction in field towers.
//!
//! [`nth_power_root`] decides whether an element is an exact `e`-th
//! power and produces a root when it is. The test is complete over `Q`,
//! over a purely transcendental step (via squarefree decomposition), and
//! for square roots through chains of quadratic algebraic steps; other
//! shapes may report [`PowerOutcome::Undecided`], never a wrong answer.
//!
//! [`eth_root`] extracts an `e`-th root of a nonzero element, extending
//! the tower when necessary: roots are peeled prime by prime, each
//! missing root adjoined through a verified irreducible binomial. For a
//! monomial in the transcendental generator the tower is reparametrized
//! (`u = v^k`) instead, which keeps the new root inside a polynomial
//! subring of the reparametrized tower.

use num::{BigInt, BigRational, Signed, Zero};

use super::{FieldElement, FieldError, FieldTower, TowerEmbedding};
use crate::intutil::prime_factors;
use crate::unipoly::UniPoly;

/// Outcome of an exact power test.
#[derive(Clone, Debug)]
pub enum PowerOutcome {
    /// The element is an exact power with this root.
    Root(FieldElement),
    /// Proven not to be an exact power.
    NotPower,
    /// The test is not complete for this tower shape.
    Undecided,
}

/// Decide whether `x` is an exact `e`-th power in its own tower.
pub fn nth_power_root(x: &FieldElement, e: usize) -> PowerOutcome {
    assert!(e >= 1, "power test requires a positive exponent");
    if e == 1 || x.is_zero() || x.is_one() {
        return PowerOutcome::Root(x.clone());
    }
    let mut sigma = x.clone();
    for p in prime_factors(e) {
        match prime_power_root(&sigma, p) {
            PowerOutcome::Root(r) => sigma = r,
            other => return other,
        }
    }
    PowerOutcome::Root(sigma)
}

fn prime_power_root(x: &FieldElement, p: usize) -> PowerOutcome {
    if x.is_zero() || x.is_one() {
        return PowerOutcome::Root(x.clone());
    }
    if x.tower().is_rationals() {
        let r = x.as_rational().expect("tower is Q");
        return match rational_prime_root(&r, p) {
            Some(root) => PowerOutcome::Root(x.tower().from_rational(root)),
            None => PowerOutcome::NotPower,
        };
    }
    if let Some((num, den)) = x.as_frac() {
        return frac_prime_root(x.tower(), num, den, p);
    }
    if x.as_ext_poly().is_some() {
        return algebraic_prime_root(x, p);
    }
    unreachable!("every tower element has one of the three representations")
}

/// Exact p-th root of a rational number, if any.
fn rational_prime_root(r: &BigRational, p: usize) -> Option<BigRational> {
    if r.is_zero() {
        return Some(BigRational::zero());
    }
    let negative = r.is_negative();
    if negative && p == 2 {
        return None;
    }
    let numer = r.numer().abs();
    let denom = r.denom().abs();
    let rn = exact_int_root(&numer, p)?;
    let rd = exact_int_root(&denom, p)?;
    let signed = if negative { -rn } else { rn };
    Some(BigRational::new(signed, rd))
}

/// Exact p-th root of a nonnegative integer, if any.
fn exact_int_root(n: &BigInt, p: usize) -> Option<BigInt> {
    let root = n.nth_root(p as u32);
    if num::pow::pow(root.clone(), p) == *n {
        Some(root)
    } else {
        None
    }
}

/// p-th root of a reduced fraction over a transcendental step.
fn frac_prime_root(tower: &FieldTower, num: &UniPoly, den: &UniPoly, p: usize) -> PowerOutcome {
    // num/den is coprime with monic denominator, so a p-th root must have
    // numerator the p-th root of num and denominator the p-th root of den.
    let lc = num.leading_coefficient().expect("nonzero element").clone();
    let num_root = match monic_poly_prime_root(&num.monic(), p) {
        Some(r) => r,
        None => return PowerOutcome::NotPower,
    };
    let den_root = match monic_poly_prime_root(den, p) {
        Some(r) => r,
        None => return PowerOutcome::NotPower,
    };
    match prime_power_root(&lc, p) {
        PowerOutcome::Root(lr) => {
            let root = FieldElement::from_frac(tower, num_root.scale(&lr), den_root)
                .expect("denominator root is nonzero");
            debug_assert_eq!(root.powu(p), FieldElement::from_frac(tower, num.clone(), den.clone()).expect("input is canonical"));
            PowerOutcome::Root(root)
        }
        other => other,
    }
}

/// p-th root of a monic polynomial via its squarefree decomposition.
fn monic_poly_prime_root(f: &UniPoly, p: usize) -> Option<UniPoly> {
    if f.is_one() {
        return Some(f.clone());
    }
    let parts = f.squarefree_decomposition();
    let mut root = UniPoly::one(f.tower(), f.var());
    for (part, mult) in parts {
        if mult % p != 0 {
            return None;
        }
        root = root.mul(&part.pow(mult / p));
    }
    Some(root)
}

/// p-th root over an algebraic top step.
fn algebraic_prime_root(x: &FieldElement, p: usize) -> PowerOutcome {
    let tower = x.tower().clone();
    let below = tower.below().expect("algebraic step has a base").clone();
    let mut undecided = false;

    // Roots that already live below lift directly.
    if let Ok(c) = x.restrict_to(&below) {
        match prime_power_root(&c, p) {
            PowerOutcome::Root(r) => {
                return PowerOutcome::Root(r.lift_to(&tower).expect("base is a prefix"));
            }
            PowerOutcome::Undecided => undecided = true,
            PowerOutcome::NotPower => {}
        }
    }

    // Norm filter: the norm of a p-th power is a p-th power below.
    let nrm = field_norm(x);
    match prime_power_root(&nrm, p) {
        PowerOutcome::NotPower => return PowerOutcome::NotPower,
        PowerOutcome::Undecided => undecided = true,
        PowerOutcome::Root(_) => {}
    }

    let m = tower.top_minpoly().expect("algebraic step");
    if m.degree() == Some(2) && p == 2 {
        match quadratic_sqrt(x, &mut undecided) {
            Some(root) => return PowerOutcome::Root(root),
            None => {
                if !undecided {
                    return PowerOutcome::NotPower;
                }
            }
        }
    }
    PowerOutcome::Undecided
}

/// Norm of an element of an algebraic step: determinant of the
/// multiplication matrix on the power basis, computed over the base.
pub fn field_norm(x: &FieldElement) -> FieldElement {
    let tower = x.tower();
    let below = tower.below().expect("algebraic step has a base");
    let m = tower.top_minpoly().expect("algebraic step");
    let d = m.degree().expect("nonconstant minimal polynomial");
    let name = tower.top_name().expect("algebraic step is named");
    let xp = x.as_ext_poly().expect("algebraic representation");
    let mut cols: Vec<Vec<FieldElement>> = Vec::with_capacity(d);
    for j in 0..d {
        let basis = UniPoly::monomial(name, below.one(), j);
        let prod = xp.mul(&basis).rem(m).expect("minimal polynomial is nonzero");
        cols.push((0..d).map(|i| prod.coefficient(i)).collect());
    }
    // determinant by Gaussian elimination over the base field
    let mut mat: Vec<Vec<FieldElement>> = (0..d)
        .map(|i| (0..d).map(|j| cols[j][i].clone()).collect())
        .collect();
    let mut acc = below.one();
    let mut negate = false;
    for col in 0..d {
        let pivot = match (col..d).find(|&r| !mat[r][col].is_zero()) {
            None => return below.zero(),
            Some(r) => r,
        };
        if pivot != col {
            mat.swap(pivot, col);
            negate = !negate;
        }
        let pv = mat[col][col].clone();
        acc = acc.mul(&pv);
        let pinv = pv.inv().expect("pivot is nonzero");
        let (upper, lower) = mat.split_at_mut(col + 1);
        let prow = &upper[col];
        for row in lower.iter_mut().take(d - col - 1) {
            if row[col].is_zero() {
                continue;
            }
            let f = row[col].mul(&pinv);
            for (rc, pc) in row[col..d].iter_mut().zip(&prow[col..d]) {
                *rc = rc.sub(&pc.mul(&f));
            }
        }
    }
    if negate {
        acc.neg()
    } else {
        acc
    }
}

/// Complete square root over a quadratic step whose base has a complete
/// square test. Writes a candidate `y + z*a` and solves the resulting
/// quadratic in `z^2` over the base.
fn quadratic_sqrt(x: &FieldElement, undecided: &mut bool) -> Option<FieldElement> {
    let tower = x.tower().clone();
    let below = tower.below().expect("algebraic step has a base").clone();
    let m = tower.top_minpoly().expect("algebraic step");
    let c0 = m.coefficient(0);
    let c1 = m.coefficient(1);
    let xp = x.as_ext_poly().expect("algebraic representation");
    let a_coef = xp.coefficient(1);
    let b_coef = xp.coefficient(0);
    // (y + z a)^2 = (y^2 - c0 z^2) + (2yz - c1 z^2) a  for  a^2 = -c1 a - c0.
    let big_a = b_coef; // constant part of x
    let big_b = a_coef; // generator part of x
    let two = below.from_integer(2);
    let four = below.from_integer(4);

    // z = 0 branch: x must be a square below.
    if big_b.is_zero() {
        match prime_power_root(&big_a, 2) {
            PowerOutcome::Root(y) => {
                return Some(y.lift_to(&tower).expect("base is a prefix"));
            }
            PowerOutcome::Undecided => *undecided = true,
            PowerOutcome::NotPower => {}
        }
    }

    // z != 0 branch: w = z^2 satisfies
    // (c1^2 - 4 c0) w^2 + (2 B c1 - 4 A) w + B^2 = 0.
    let qa = c1.mul(&c1).sub(&four.mul(&c0));
    let qb = two.mul(&big_b).mul(&c1).sub(&four.mul(&big_a));
    let qc = big_b.mul(&big_b);
    debug_assert!(!qa.is_zero(), "irreducible quadratic has nonzero discriminant");
    let disc = qb.mul(&qb).sub(&four.mul(&qa).mul(&qc));
    let delta = match prime_power_root(&disc, 2) {
        PowerOutcome::Root(r) => r,
        PowerOutcome::Undecided => {
            *undecided = true;
            return None;
        }
        PowerOutcome::NotPower => return None,
    };
    let half_inv = two.mul(&qa).inv().expect("nonzero");
    for sign in [false, true] {
        let numer = if sign { qb.neg().add(&delta) } else { qb.neg().sub(&delta) };
        let w = numer.mul(&half_inv);
        if w.is_zero() {
            continue;
        }
        let z = match prime_power_root(&w, 2) {
            PowerOutcome::Root(r) => r,
            PowerOutcome::Undecided => {
                *undecided = true;
                continue;
            }
            PowerOutcome::NotPower => continue,
        };
        if z.is_zero() {
            continue;
        }
        let y = big_b.add(&c1.mul(&w)).div(&two.mul(&z)).expect("z is nonzero");
        let gen = tower.generator().expect("algebraic step has a generator");
        let candidate = y
            .lift_to(&tower)
            .expect("base is a prefix")
            .add(&z.lift_to(&tower).expect("base is a prefix").mul(&gen));
        if candidate.mul(&candidate) == *x {
            return Some(candidate);
        }
    }
    None
}

/// A generator adjoined during root extraction, recorded with its
/// minimal polynomial (over the tower built so far at that point).
#[derive(Clone)]
pub struct Adjunction {
    pub name: String,
    pub minpoly: UniPoly,
}

/// Result of extracting an `e`-th root, possibly in an extension.
pub struct EthRootOutcome {
    /// Field containing the root.
    pub tower: FieldTower,
    /// The root itself: `root^e` equals the image of the input.
    pub root: FieldElement,
    /// How the input's tower maps into `tower` (the identity unless the
    /// transcendental generator was reparametrized).
    pub embedding: TowerEmbedding,
    /// Algebraic generators adjoined along the way.
    pub adjunctions: Vec<Adjunction>,
    /// Whether the binomial `X^e - input` is reducible over the input's
    /// tower (equivalently, the root generates an extension of degree
    /// less than `e`).
    pub reducible_binomial: bool,
    /// Degree of the extension generated by the root (transcendental
    /// reparametrization `u = v^k` counts as degree `k`).
    pub extension_degree: usize,
}

fn fresh_name(tower: &FieldTower, base: &str) -> String {
    if !tower.contains_name(base) {
        return base.to_string();
    }
    let mut i = 2usize;
    loop {
        let candidate = format!("{base}{i}");
        if !tower.contains_name(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

/// Extract an `e`-th root of `kappa`, extending the tower as needed.
pub fn eth_root(kappa: &FieldElement, e: usize) -> Result<EthRootOutcome, FieldError> {
    assert!(e >= 1, "root extraction requires a positive exponent");
    let tower = kappa.tower().clone();
    if e == 1 || kappa.is_zero() || kappa.is_one() {
        return Ok(EthRootOutcome {
            tower: tower.clone(),
            root: kappa.clone(),
            embedding: TowerEmbedding::identity(&tower),
            adjunctions: Vec::new(),
            reducible_binomial: e > 1,
            extension_degree: 1,
        });
    }

    if tower.top_is_transcendental() {
        let below = tower.below().expect("transcendental step has a base").clone();
        if let Ok(below_kappa) = kappa.restrict_to(&below) {
            return eth_root_constant_over_u(&tower, &below_kappa, e);
        }
        let (num, den) = kappa.as_frac().expect("transcendental representation");
        if let (Some((mn, gamma)), Some((md, dc))) = (num.monomial_form(), den.monomial_form()) {
            debug_assert!(dc.is_one(), "canonical denominators are monic");
            return eth_root_monomial(&tower, &gamma, mn as i64 - md as i64, e);
        }
    }
    eth_root_peel(kappa, e)
}

/// Root of an element that does not involve the transcendental
/// generator: extract below and rebuild the transcendental step on top.
fn eth_root_constant_over_u(
    tower: &FieldTower,
    below_kappa: &FieldElement,
    e: usize,
) -> Result<EthRootOutcome, FieldError> {
    let u_name = tower.top_name().expect("transcendental step is named").to_string();
    let inner = eth_root(below_kappa, e)?;
    let full = inner.tower.extend_transcendental(&u_name)?;
    let mut images: Vec<FieldElement> = Vec::new();
    for img in inner.embedding.gen_images() {
        images.push(img.lift_to(&full)?);
    }
    images.push(full.generator().expect("transcendental step has a generator"));
    let embedding = TowerEmbedding::new(tower, &full, images)?;
    let root = inner.root.lift_to(&full)?;
    Ok(EthRootOutcome {
        tower: full,
        root,
        embedding,
        adjunctions: inner.adjunctions,
        reducible_binomial: inner.reducible_binomial,
        extension_degree: inner.extension_degree,
    })
}

/// Root of `gamma * u^m` with `u` the topmost (transcendental)
/// generator: reparametrize `u = v^(e/gcd(e,m))` and pull the
/// coefficient root from the base.
fn eth_root_monomial(
    tower: &FieldTower,
    gamma: &FieldElement,
    m: i64,
    e: usize,
) -> Result<EthRootOutcome, FieldError> {
    debug_assert!(m != 0, "constant case is handled separately");
    let u_name = tower.top_name().expect("transcendental step is named").to_string();
    let g = crate::intutil::gcd_u64(e as u64, m.unsigned_abs()) as i64;
    let e_prime = (e as i64 / g) as usize;
    let m_prime = m / g;

    let inner = eth_root(gamma, e)?;
    let (full, v_pow_needed) = if e_prime == 1 {
        (inner.tower.extend_transcendental(&u_name)?, 1usize)
    } else {
        let v_name = fresh_name(&inner.tower, "v");
        (inner.tower.extend_transcendental(&v_name)?, e_prime)
    };
    let v = full.generator().expect("transcendental step has a generator");
    let mut images: Vec<FieldElement> = Vec::new();
    for img in inner.embedding.gen_images() {
        images.push(img.lift_to(&full)?);
    }
    images.push(v.powu(v_pow_needed));
    let embedding = TowerEmbedding::new(tower, &full, images)?;
    let root = inner.root.lift_to(&full)?.mul(&v.pow(m_prime)?);
    let extension_degree = e_prime * inner.extension_degree;
    Ok(EthRootOutcome {
        tower: full,
        root,
        embedding,
        adjunctions: inner.adjunctions,
        reducible_binomial: extension_degree < e,
        extension_degree,
    })
}

/// Peel the exponent prime by prime, adjoining a verified irreducible
/// binomial root whenever the current field has none.
fn eth_root_peel(kappa: &FieldElement, e: usize) -> Result<EthRootOutcome, FieldError> {
    let source = kappa.tower().clone();
    let mut tower = source.clone();
    let mut sigma = kappa.clone();
    let mut adjunctions = Vec::new();
    let mut extension_degree = 1usize;
    for p in prime_factors(e) {
        match prime_power_root(&sigma, p) {
            PowerOutcome::Root(r) => sigma = r,
            PowerOutcome::NotPower => {
                let name = fresh_name(&tower, "c");
                let mut coeffs = vec![sigma.neg()];
                coeffs.extend(std::iter::repeat_n(tower.zero(), p - 1));
                coeffs.push(tower.one());
                let minpoly = UniPoly::from_coeffs(&tower, &name, coeffs);
                let next = tower.extend_algebraic(&name, minpoly.clone())?;
                adjunctions.push(Adjunction { name, minpoly });
                sigma = next.generator().expect("algebraic step has a generator");
                extension_degree *= p;
                tower = next;
            }
            PowerOutcome::Undecided => {
                return Err(FieldError::UnsupportedTowerShape(format!(
                    "cannot decide whether an element of {} is a {}-th power",
                    tower, p
                )));
            }
        }
    }
    let embedding = TowerEmbedding::inclusion(&source, &tower)?;
    debug_assert_eq!(sigma.powu(e), kappa.lift_to(&tower)?);
    Ok(EthRootOutcome {
        tower,
        root: sigma,
        embedding,
        adjunctions,
        reducible_binomial: extension_degree < e,
        extension_degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldTower {
        FieldTower::rationals()
    }

    fn qu() -> FieldTower {
        q().extend_transcendental("u").expect("fresh transcendental")
    }

    #[test]
    fn test_rational_powers() {
        let t = q();
        // 8/27 is a cube
        let x = t.from_rational(BigRational::new(BigInt::from(8), BigInt::from(27)));
        match nth_power_root(&x, 3) {
            PowerOutcome::Root(r) => assert_eq!(
                r.as_rational(),
                Some(BigRational::new(BigInt::from(2), BigInt::from(3)))
            ),
            other => panic!("expected a cube root, got {other:?}"),
        }
        // -4 is not a square, but -8 is a cube
        assert!(matches!(nth_power_root(&t.from_integer(-4), 2), PowerOutcome::NotPower));
        match nth_power_root(&t.from_integer(-8), 3) {
            PowerOutcome::Root(r) => assert_eq!(r, t.from_integer(-2)),
            other => panic!("expected a cube root, got {other:?}"),
        }
        // 36 is a square but not a fourth power
        assert!(matches!(nth_power_root(&t.from_integer(36), 2), PowerOutcome::Root(_)));
        assert!(matches!(nth_power_root(&t.from_integer(36), 4), PowerOutcome::NotPower));
    }

    #[test]
    fn test_rational_function_powers() {
        let ku = qu();
        let u = ku.generator().expect("generator exists");
        let x = u.add(&ku.one()).powu(4).mul(&ku.from_integer(16)).div(&u.powu(2)).expect("u nonzero");
        match nth_power_root(&x, 2) {
            PowerOutcome::Root(r) => assert_eq!(r.mul(&r), x),
            other => panic!("expected a square root, got {other:?}"),
        }
        // u itself is not a square in Q(u)
        assert!(matches!(nth_power_root(&u, 2), PowerOutcome::NotPower));
    }

    #[test]
    fn test_sqrt_in_quadratic_extension() {
        // 2 becomes a square after adjoining a with a^2 = 2.
        let k = q().extend_algebraic("a", UniPoly::from_integers(&q(), "a", &[-2, 0, 1]))
            .expect("x^2 - 2 is irreducible");
        let two = k.from_integer(2);
        match nth_power_root(&two, 2) {
            PowerOutcome::Root(r) => assert_eq!(r.mul(&r), two),
            other => panic!("expected sqrt(2) = a, got {other:?}"),
        }
        // 3 is still not a square in Q(sqrt 2)
        assert!(matches!(nth_power_root(&k.from_integer(3), 2), PowerOutcome::NotPower));
    }

    #[test]
    fn test_eth_root_adjoins_missing_root() {
        let t = q();
        let out = eth_root(&t.from_integer(2), 2).expect("supported shape");
        assert_eq!(out.extension_degree, 2);
        assert!(!out.reducible_binomial);
        assert_eq!(out.adjunctions.len(), 1);
        let img = out.embedding.apply(&t.from_integer(2)).expect("rational maps");
        assert_eq!(out.root.powu(2), img);
    }

    #[test]
    fn test_eth_root_capelli_minus_four() {
        // X^4 + 4 is reducible: the fourth root of -4 generates only a
        // quadratic extension.
        let t = q();
        let out = eth_root(&t.from_integer(-4), 4).expect("supported shape");
        assert_eq!(out.extension_degree, 2);
        assert!(out.reducible_binomial);
        let img = out.embedding.apply(&t.from_integer(-4)).expect("rational maps");
        assert_eq!(out.root.powu(4), img);
    }

    #[test]
    fn test_eth_root_monomial_reparametrizes() {
        let ku = qu();
        let u = ku.generator().expect("generator exists");
        let out = eth_root(&u, 2).expect("supported shape");
        // u = v^2, root = v
        assert_eq!(out.extension_degree, 2);
        assert!(!out.reducible_binomial);
        assert!(out.adjunctions.is_empty());
        let img = out.embedding.apply(&u).expect("u maps to v^2");
        assert_eq!(out.root.powu(2), img);
        assert_eq!(out.tower.top_name(), Some("v"));
    }

    #[test]
    fn test_eth_root_monomial_with_coefficient() {
        // 4u^2 has the square root 2u without any extension.
        let ku = qu();
        let u = ku.generator().expect("generator exists");
        let x = u.mul(&u).mul(&ku.from_integer(4));
        let out = eth_root(&x, 2).expect("supported shape");
        assert_eq!(out.extension_degree, 1);
        assert!(out.reducible_binomial);
        assert_eq!(out.root, u.mul(&ku.from_integer(2)).lift_to(&out.tower).expect("prefix"));
    }

    #[test]
    fn test_eth_root_constant_below_u() {
        // sqrt(2) over Q(u): adjoin c below u and keep u transcendental on top.
        let ku = qu();
        let two = ku.from_integer(2);
        let out = eth_root(&two, 2).expect("supported shape");
        assert_eq!(out.extension_degree, 2);
        assert!(out.tower.top_is_transcendental());
        let img = out.embedding.apply(&two).expect("constant maps");
        assert_eq!(out.root.powu(2), img);
    }
}
