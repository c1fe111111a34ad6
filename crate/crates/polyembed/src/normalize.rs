//! Normalization of monomial-curve-like subalgebras of `k[s]`.
//!
//! A finitely generated graded subalgebra `R ⊆ k[s]` has integral closure
//! `k[θ]` for a single polynomial `θ`.  This module finds `θ`, rewrites
//! every generator as a polynomial in `θ`, and computes the conductor of
//! `R` inside `k[θ]` — exactly when the rewritten generators are
//! monomials in `θ` with coprime degrees, and as a bounded, explicitly
//! flagged approximation otherwise.  A separate routine produces a
//! uniformizer of the fraction field by the classical kernel-polynomial
//! gcd construction.

use serde_json::{json, Value};
use thiserror::Error;

use crate::fields::{FieldError, FieldTower};
use crate::graded::{GradedError, SubalgebraPresentation};
use crate::semigroup::{NumericalSemigroup, SemigroupError};
use crate::unipoly::{PolyError, RationalFunction, UniPoly};

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error("every input function is constant")]
    AllConstant,
    #[error("unsupported coefficient tower: {0}")]
    UnsupportedTower(String),
    #[error("{0}")]
    GeneratorsOutsideCoefficientField(String),
    #[error("internal inconsistency: {0}")]
    InconsistentSystem(String),
}

/// Result of normalizing a subalgebra `R ⊆ k[s]`: the integral closure
/// is the polynomial ring `k[theta]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationResult {
    /// Generator of the integral closure: monic in the input variable,
    /// zero constant term (or the bare variable itself).
    pub theta: UniPoly,
    /// `deg theta`, the index `[k(s) : k(theta)]`.
    pub index: usize,
    /// Variable name used for the rewritten generators.
    pub theta_var: String,
    /// The non-constant generators rewritten as polynomials in
    /// `theta_var`, in presentation order: `expressions[i](theta)`
    /// equals the corresponding generator exactly.
    pub expressions: Vec<UniPoly>,
}

impl NormalizationResult {
    pub fn to_json(&self) -> Value {
        json!({
            "theta": self.theta.to_string(),
            "index": self.index,
            "variable": self.theta_var,
            "expressions": self.expressions.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// The conductor of `R` in its integral closure `k[theta]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConductorResult {
    /// The conductor is the principal ideal `(theta^exponent)`; this is
    /// exact.
    Principal { exponent: usize },
    /// Degree-bounded under-approximation: basis rows `a` of the
    /// filtration of `R` up to `bound` such that `a·theta^j` stays in
    /// `R` for every exponent `j ≥ 1` testable within the bound.  Rows
    /// admitting no testable exponent are omitted.
    Bounded { basis: Vec<UniPoly>, bound: usize },
}

impl ConductorResult {
    pub fn is_exact(&self) -> bool {
        matches!(self, ConductorResult::Principal { .. })
    }

    pub fn to_json(&self) -> Value {
        match self {
            ConductorResult::Principal { exponent } => {
                json!({ "exact": true, "exponent": exponent })
            }
            ConductorResult::Bounded { basis, bound } => json!({
                "exact": false,
                "bound": bound,
                "basis": basis.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            }),
        }
    }
}

/// Bidegree-bounded stability check for the conductor exponent under
/// polynomial extension.
///
/// When the conductor of `R` in `k[θ]` is `(θ^c)`, the conductor of
/// `R[x]` in `k[θ][x]` should again be generated by `θ^c`.  Membership
/// of `θ^c·θ^i·x^j` in `R[x]` is independent of the `x`-degree `j`
/// (coefficients reduce one by one), so the bidegree-`(i, j)` test
/// reduces to the `θ`-side: `stable` records that `c + i` lies in the
/// degree semigroup for all `i` up to the bound, and `minimal` that the
/// same fails for `c - 1` somewhere in the tested window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtensionConductorCheck {
    pub exponent: usize,
    pub bidegree_bound: usize,
    pub stable: bool,
    pub minimal: bool,
}

impl ExtensionConductorCheck {
    /// The exponent both persists and is sharp within the tested window.
    pub fn holds(&self) -> bool {
        self.stable && self.minimal
    }

    pub fn to_json(&self) -> Value {
        json!({
            "exponent": self.exponent,
            "bidegree_bound": self.bidegree_bound,
            "stable": self.stable,
            "minimal": self.minimal,
        })
    }
}

pub fn conductor_extension_check(
    sg: &NumericalSemigroup,
    exponent: usize,
    bidegree_bound: usize,
) -> ExtensionConductorCheck {
    let stable = (0..=bidegree_bound).all(|i| sg.contains(exponent + i));
    let minimal =
        exponent == 0 || (0..=bidegree_bound).any(|i| !sg.contains(exponent - 1 + i));
    ExtensionConductorCheck { exponent, bidegree_bound, stable, minimal }
}

/// A generator of the field `k(f_1, …, f_m) ⊆ k(s)`.
///
/// With several non-constant inputs this runs the kernel-polynomial gcd
/// construction: over `k(y)` the gcd of the polynomials
/// `num_i(s)·den_i(y) − den_i(s)·num_i(y)` is the minimal polynomial of
/// `s` over the generated subfield, and any coefficient outside `k`
/// generates that subfield.  A single non-constant input is returned
/// directly.  Either way the result is scaled so numerator and
/// denominator are monic, and is verified to generate every input by
/// exact kernel-polynomial divisibility.
pub fn luroth_generator(
    functions: &[RationalFunction],
) -> Result<RationalFunction, NormalizeError> {
    let nonconstant: Vec<&RationalFunction> =
        functions.iter().filter(|f| !f.is_constant()).collect();
    let Some(first) = nonconstant.first() else {
        return Err(NormalizeError::AllConstant);
    };
    let tower = first.tower().clone();
    if tower.has_transcendental() {
        return Err(NormalizeError::UnsupportedTower(
            "the uniformizer search adjoins an auxiliary transcendental and the \
             coefficient tower already carries one"
                .into(),
        ));
    }
    let var = first.var().to_string();
    for f in &nonconstant {
        assert!(
            f.tower() == &tower && f.var() == var,
            "mixed towers or variables in uniformizer search"
        );
    }
    let ext_name = fresh_transcendental_name(&tower, &var);
    let ext = tower.extend_transcendental(&ext_name)?;
    let point = ext.generator().expect("transcendental step has a generator");

    let t0 = if nonconstant.len() == 1 {
        monic_scaling(nonconstant[0])?
    } else {
        let mut g: Option<UniPoly> = None;
        for f in &nonconstant {
            let kf = kernel_poly(f, &ext, &point)?;
            g = Some(match g {
                None => kf,
                Some(prev) => prev.gcd(&kf),
            });
        }
        let g = g.expect("at least one non-constant function");
        let coeff = g
            .coefficients()
            .iter()
            .find(|c| !c.lies_in(&tower))
            .cloned()
            .ok_or_else(|| {
                NormalizeError::InconsistentSystem(
                    "kernel gcd is defined over the base field".into(),
                )
            })?;
        let (num, den) = coeff
            .as_frac()
            .map(|(n, d)| (n.clone(), d.clone()))
            .ok_or_else(|| {
                NormalizeError::InconsistentSystem(
                    "coefficient outside the base field has no fraction form".into(),
                )
            })?;
        monic_scaling(&RationalFunction::new(num.with_var(&var), den.with_var(&var))?)?
    };

    // Every input must be a rational function of the uniformizer: the
    // kernel polynomial of `t0` divides each input's kernel polynomial.
    let kt = kernel_poly(&t0, &ext, &point)?;
    for f in &nonconstant {
        let kf = kernel_poly(f, &ext, &point)?;
        if !kf.rem(&kt)?.is_zero() {
            return Err(NormalizeError::InconsistentSystem(format!(
                "candidate uniformizer ({})/({}) does not generate ({})/({})",
                t0.num(),
                t0.den(),
                f.num(),
                f.den()
            )));
        }
    }
    Ok(t0)
}

/// Normalize the curve algebra presented by `pres`: find the generator
/// `theta` of the integral closure of `R` in `k[s]` and rewrite every
/// generator as a polynomial in `theta`.
///
/// `theta` is the minimal-degree monic polynomial with zero constant
/// term, of degree at least 2, through which every generator factors as
/// a composition — and the bare variable when no such factor exists.
/// Rewriting is done by subduction against `k[theta]` at the larger of
/// `bound` and the generator degrees, and every rewritten expression is
/// verified by exact composition.
///
/// The presentation must have algebraic coefficients (no transcendental
/// in the coefficient field) and all generators and multipliers must lie
/// over the coefficient field `k`; otherwise the fraction field of `R`
/// is not of the form `k(t)` and the computation refuses.
pub fn normalize_curve(
    pres: &SubalgebraPresentation,
    bound: usize,
) -> Result<NormalizationResult, NormalizeError> {
    let k = pres.coefficient_field().clone();
    if k.has_transcendental() {
        return Err(NormalizeError::UnsupportedTower(
            "the coefficient field carries a transcendental; curve normalization \
             needs an algebraic coefficient field"
                .into(),
        ));
    }
    for m in pres.multipliers() {
        if !m.lies_in(&k) {
            return Err(NormalizeError::GeneratorsOutsideCoefficientField(format!(
                "constant {m} lies outside the coefficient field; the fraction \
                 field of the algebra is strictly larger than any simple \
                 transcendental extension of it"
            )));
        }
    }
    let mut gens = Vec::new();
    for g in pres.generators() {
        let restricted = g.map_coefficients(&k, |c| c.restrict_to(&k)).map_err(
            |_: FieldError| {
                NormalizeError::GeneratorsOutsideCoefficientField(format!(
                    "generator {g} has coefficients outside the coefficient field; \
                     the fraction field of the algebra is strictly larger than any \
                     simple transcendental extension of it"
                ))
            },
        )?;
        if !restricted.is_constant() {
            gens.push(restricted);
        }
    }
    if gens.is_empty() {
        return Err(NormalizeError::AllConstant);
    }
    let var = pres.var().to_string();

    // Uniformizer of the fraction field, for the degree cross-check.
    let funcs: Vec<RationalFunction> =
        gens.iter().cloned().map(RationalFunction::from_poly).collect();
    let uniformizer_degree = luroth_generator(&funcs)?.map_degree();

    // Minimal common right-composition factor of degree at least 2.
    let mut degree_gcd = 0usize;
    for g in &gens {
        degree_gcd = gcd_usize(degree_gcd, g.degree().expect("non-constant generator"));
    }
    let mut theta: Option<UniPoly> = None;
    for e in 2..=degree_gcd {
        if !degree_gcd.is_multiple_of(e) {
            continue;
        }
        let Some((_, h)) = gens[0].decompose_right(e)? else {
            continue;
        };
        let mut shared = true;
        for g in &gens[1..] {
            if expand_in(g, &h, "theta")?.is_none() {
                shared = false;
                break;
            }
        }
        if shared {
            theta = Some(h);
            break;
        }
    }
    let theta = match theta {
        Some(h) => h,
        None => UniPoly::monomial(&var, k.one(), 1),
    };
    let index = theta.degree().expect("theta is non-constant");
    if uniformizer_degree % index != 0 {
        return Err(NormalizeError::InconsistentSystem(format!(
            "closure index {index} does not divide the fraction-field index \
             {uniformizer_degree}"
        )));
    }

    // Rewrite the generators inside k[theta] by subduction and verify
    // each expression by exact composition.
    let theta_pres = SubalgebraPresentation::new(&k, &var, vec![theta.clone()])?;
    let sub_bound = gens
        .iter()
        .map(|g| g.degree().expect("non-constant generator"))
        .max()
        .expect("at least one generator")
        .max(bound);
    let mut expressions = Vec::new();
    for g in &gens {
        let outcome = theta_pres.subduct(g, sub_bound)?;
        if !outcome.is_member() {
            return Err(NormalizeError::InconsistentSystem(format!(
                "generator {g} does not reduce to zero against powers of {theta}"
            )));
        }
        let mut expr = UniPoly::zero(&k, "theta");
        for ((_, exps), c) in outcome.expression.terms() {
            expr = expr.add(&UniPoly::monomial("theta", c.clone(), exps[0] as usize));
        }
        let direct = expand_in(g, &theta, "theta")?.ok_or_else(|| {
            NormalizeError::InconsistentSystem(format!(
                "generator {g} has no adic expansion in {theta}"
            ))
        })?;
        if expr != direct || expr.compose(&theta) != *g {
            return Err(NormalizeError::InconsistentSystem(format!(
                "rewriting {g} in {theta} is not exact"
            )));
        }
        expressions.push(expr);
    }

    Ok(NormalizationResult { theta, index, theta_var: "theta".to_string(), expressions })
}

/// The conductor of `R` in `k[theta]`.
///
/// When every rewritten generator is a monomial in `theta` and the
/// monomial degrees are coprime, the conductor is exactly
/// `(theta^c)` with `c` the conductor exponent of the degree semigroup.
/// Otherwise the result is the degree-bounded under-approximation
/// described on [`ConductorResult::Bounded`].
pub fn conductor(
    pres: &SubalgebraPresentation,
    norm: &NormalizationResult,
    bound: usize,
) -> Result<ConductorResult, NormalizeError> {
    let mut monomial = true;
    let mut degrees = Vec::new();
    for expr in &norm.expressions {
        if expr.is_zero() {
            continue;
        }
        match expr.monomial_form() {
            Some((0, _)) => {}
            Some((d, _)) => degrees.push(d),
            None => {
                monomial = false;
                break;
            }
        }
    }
    if monomial && !degrees.is_empty() {
        let sg = NumericalSemigroup::from_generators(&degrees)?;
        if sg.gcd() == 1 {
            return Ok(ConductorResult::Principal { exponent: sg.conductor_exponent() });
        }
    }

    // Bounded fallback: keep the filtration basis rows that stay in R
    // under every testable multiplication by a power of theta.
    let theta = norm.theta.lift_to(pres.tower())?;
    let step = norm.index;
    let piece = pres.filtration_basis(bound)?;
    let mut basis = Vec::new();
    for n in piece.realized_degrees() {
        for i in piece.block_row_indices(n) {
            let row = piece.row_polynomial(i);
            let row_degree = row.degree().unwrap_or(0);
            let max_power = (bound.saturating_sub(row_degree)) / step;
            if max_power == 0 {
                continue;
            }
            let mut stays = true;
            let mut product = row.clone();
            for _ in 1..=max_power {
                product = product.mul(&theta);
                if !pres.subduct(&product, bound)?.is_member() {
                    stays = false;
                    break;
                }
            }
            if stays {
                basis.push(row.clone());
            }
        }
    }
    Ok(ConductorResult::Bounded { basis, bound })
}

/// Adic expansion of `g` in powers of `h`: when every digit is a
/// constant, the polynomial `E` (in `out_var`) with those digits as
/// coefficients satisfies `E(h) = g` exactly.
pub(crate) fn expand_in(
    g: &UniPoly,
    h: &UniPoly,
    out_var: &str,
) -> Result<Option<UniPoly>, PolyError> {
    let tower = g.tower().clone();
    let mut digits = Vec::new();
    let mut rest = g.clone();
    while !rest.is_zero() {
        let (quotient, digit) = rest.divmod(h)?;
        if !digit.is_constant() {
            return Ok(None);
        }
        digits.push(digit.constant_term());
        rest = quotient;
    }
    Ok(Some(UniPoly::from_coeffs(&tower, out_var, digits)))
}

/// `num(s)·den(point) − den(s)·num(point)`, lifted into `ext`: the
/// polynomial whose roots are the preimages of `f(point)` under `f`.
fn kernel_poly(
    f: &RationalFunction,
    ext: &FieldTower,
    point: &crate::fields::FieldElement,
) -> Result<UniPoly, NormalizeError> {
    let num = f.num().lift_to(ext)?;
    let den = f.den().lift_to(ext)?;
    let num_at = num.evaluate(point);
    let den_at = den.evaluate(point);
    Ok(num.scale(&den_at).sub(&den.scale(&num_at)))
}

/// Scale numerator and denominator monic; changes the function by a
/// constant factor only, so the generated field is unchanged.
fn monic_scaling(f: &RationalFunction) -> Result<RationalFunction, PolyError> {
    RationalFunction::new(f.num().monic(), f.den().monic())
}

fn fresh_transcendental_name(tower: &FieldTower, var: &str) -> String {
    let names = tower.names();
    let taken = |cand: &str| cand == var || names.iter().any(|n| n == cand);
    if !taken("y") {
        return "y".to_string();
    }
    let mut i = 0usize;
    loop {
        let cand = format!("y{i}");
        if !taken(&cand) {
            return cand;
        }
        i += 1;
    }
}

fn gcd_usize(a: usize, b: usize) -> usize {
    let mut a = a;
    let mut b = b;
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldTower;
    use crate::graded::SubalgebraPresentation;
    use crate::intutil::splitmix64;

    fn q() -> FieldTower {
        FieldTower::rationals()
    }

    fn qa() -> FieldTower {
        q().extend_algebraic("a", UniPoly::from_integers(&q(), "a", &[-2, 0, 1])).unwrap()
    }

    fn sp(coeffs: &[i64]) -> UniPoly {
        UniPoly::from_integers(&q(), "s", coeffs)
    }

    fn tp(coeffs: &[i64]) -> UniPoly {
        UniPoly::from_integers(&q(), "theta", coeffs)
    }

    fn pres(gens: Vec<UniPoly>) -> SubalgebraPresentation {
        SubalgebraPresentation::new(&q(), "s", gens).unwrap()
    }

    #[test]
    fn test_luroth_single_function() {
        let t = luroth_generator(&[RationalFunction::from_poly(sp(&[0, 0, 1]))]).unwrap();
        assert_eq!(*t.num(), sp(&[0, 0, 1]));
        assert!(t.den().is_one());

        let t = luroth_generator(&[RationalFunction::from_poly(sp(&[1, 0, 1]))]).unwrap();
        assert_eq!(*t.num(), sp(&[1, 0, 1]));
        assert!(t.den().is_one());

        let inv =
            RationalFunction::new(UniPoly::one(&q(), "s"), sp(&[0, 1])).unwrap();
        let t = luroth_generator(&[inv]).unwrap();
        assert!(t.num().is_one());
        assert_eq!(*t.den(), sp(&[0, 1]));
    }

    #[test]
    fn test_luroth_pairs_generate_the_variable() {
        let t = luroth_generator(&[
            RationalFunction::from_poly(sp(&[0, 0, 1])),
            RationalFunction::from_poly(sp(&[0, 0, 0, 1])),
        ])
        .unwrap();
        assert_eq!(*t.num(), sp(&[0, 1]));
        assert!(t.den().is_one());

        let t = luroth_generator(&[
            RationalFunction::from_poly(sp(&[0, 1, 1])),
            RationalFunction::from_poly(sp(&[0, 0, 0, 1])),
        ])
        .unwrap();
        assert_eq!(*t.num(), sp(&[0, 1]));
        assert!(t.den().is_one());
    }

    #[test]
    fn test_luroth_power_pairs() {
        let powers = |a: usize, b: usize| {
            let mut ca = vec![0i64; a + 1];
            ca[a] = 1;
            let mut cb = vec![0i64; b + 1];
            cb[b] = 1;
            luroth_generator(&[
                RationalFunction::from_poly(sp(&ca)),
                RationalFunction::from_poly(sp(&cb)),
            ])
            .unwrap()
        };
        assert_eq!(*powers(4, 6).num(), sp(&[0, 0, 1]));
        assert_eq!(*powers(6, 9).num(), sp(&[0, 0, 0, 1]));
        assert_eq!(*powers(4, 7).num(), sp(&[0, 1]));
    }

    #[test]
    fn test_luroth_shared_inner_square() {
        // s^6 and s^4 + s^2 are both polynomials in s^2, and together
        // they generate exactly k(s^2).
        let t = luroth_generator(&[
            RationalFunction::from_poly(sp(&[0, 0, 0, 0, 0, 0, 1])),
            RationalFunction::from_poly(sp(&[0, 0, 1, 0, 1])),
        ])
        .unwrap();
        assert_eq!(*t.num(), sp(&[0, 0, 1]));
        assert!(t.den().is_one());
    }

    #[test]
    fn test_luroth_degree_multiplicativity() {
        let mut state = 0xA5F0_32C1u64;
        for _ in 0..5 {
            let mut draw = |lo: i64, hi: i64| {
                lo + (splitmix64(&mut state) % ((hi - lo + 1) as u64)) as i64
            };
            let dg = 2 + (draw(0, 1) as usize);
            let dh = 2 + (draw(0, 1) as usize);
            let mut gc: Vec<i64> = (0..dg).map(|_| draw(-3, 3)).collect();
            gc.push(1);
            let mut hc = vec![0i64];
            hc.extend((1..dh).map(|_| draw(-3, 3)));
            hc.push(1);
            let g = UniPoly::from_integers(&q(), "y", &gc);
            let h = sp(&hc);
            let f = g.compose(&h);
            let t = luroth_generator(&[RationalFunction::from_poly(f)]).unwrap();
            assert_eq!(t.map_degree(), dg * dh);
        }
    }

    #[test]
    fn test_luroth_all_constant_rejected() {
        assert!(matches!(luroth_generator(&[]), Err(NormalizeError::AllConstant)));
        let c = RationalFunction::from_poly(sp(&[5]));
        assert!(matches!(luroth_generator(&[c]), Err(NormalizeError::AllConstant)));
    }

    #[test]
    fn test_normalize_cusp() {
        let p = pres(vec![sp(&[0, 0, 1]), sp(&[0, 0, 0, 1])]);
        let norm = normalize_curve(&p, 10).unwrap();
        assert_eq!(norm.theta, sp(&[0, 1]));
        assert_eq!(norm.index, 1);
        assert_eq!(norm.theta_var, "theta");
        assert_eq!(norm.expressions, vec![tp(&[0, 0, 1]), tp(&[0, 0, 0, 1])]);
    }

    #[test]
    fn test_normalize_single_square() {
        let p = pres(vec![sp(&[0, 0, 1])]);
        let norm = normalize_curve(&p, 10).unwrap();
        assert_eq!(norm.theta, sp(&[0, 0, 1]));
        assert_eq!(norm.index, 2);
        assert_eq!(norm.expressions, vec![tp(&[0, 1])]);
    }

    #[test]
    fn test_normalize_shifted_cube() {
        // (s^3 + 1)^2 = s^6 + 2 s^3 + 1 factors through s^3 and through
        // nothing smaller.
        let p = pres(vec![sp(&[1, 0, 0, 2, 0, 0, 1])]);
        let norm = normalize_curve(&p, 10).unwrap();
        assert_eq!(norm.theta, sp(&[0, 0, 0, 1]));
        assert_eq!(norm.index, 3);
        assert_eq!(norm.expressions, vec![tp(&[1, 2, 1])]);
    }

    #[test]
    fn test_normalize_common_inner_square() {
        let p = pres(vec![sp(&[0, 0, 0, 0, 1]), sp(&[0, 0, 0, 0, 0, 0, 1])]);
        let norm = normalize_curve(&p, 12).unwrap();
        assert_eq!(norm.theta, sp(&[0, 0, 1]));
        assert_eq!(norm.index, 2);
        assert_eq!(norm.expressions, vec![tp(&[0, 0, 1]), tp(&[0, 0, 0, 1])]);
    }

    #[test]
    fn test_normalize_number_field_coefficients() {
        let ka = qa();
        let alpha = ka.generator().unwrap();
        let s2 = UniPoly::monomial("s", alpha.clone(), 2);
        let s3 = UniPoly::monomial("s", alpha.clone(), 3);
        let p = SubalgebraPresentation::new(&ka, "s", vec![s2.clone(), s3.clone()]).unwrap();
        let norm = normalize_curve(&p, 10).unwrap();
        assert_eq!(norm.theta, UniPoly::monomial("s", ka.one(), 1));
        assert_eq!(norm.index, 1);
        assert_eq!(norm.expressions[0], UniPoly::monomial("theta", alpha.clone(), 2));
        assert_eq!(norm.expressions[1], UniPoly::monomial("theta", alpha, 3));
    }

    #[test]
    fn test_normalize_refuses_hidden_coefficient_field() {
        let ka = qa();
        let alpha = ka.generator().unwrap();
        let s2 = UniPoly::monomial("s", alpha.clone(), 2);
        let s3 = UniPoly::monomial("s", alpha, 3);
        let p =
            SubalgebraPresentation::over_coefficient_field(&ka, "s", vec![s2, s3], &q())
                .unwrap();
        let err = normalize_curve(&p, 10).unwrap_err();
        match err {
            NormalizeError::GeneratorsOutsideCoefficientField(msg) => {
                assert!(msg.contains("fraction field"), "unexpected message: {msg}");
            }
            other => panic!("expected a coefficient-field refusal, got {other:?}"),
        }
    }

    #[test]
    fn test_normalize_refuses_transcendental_tower() {
        let ku = q().extend_transcendental("u").unwrap();
        let u = ku.generator().unwrap();
        let us2 = UniPoly::monomial("s", u, 2);
        let p = SubalgebraPresentation::new(&ku, "s", vec![us2]).unwrap();
        assert!(matches!(
            normalize_curve(&p, 10),
            Err(NormalizeError::UnsupportedTower(_))
        ));
    }

    #[test]
    fn test_normalize_roundtrip_random() {
        let mut state = 0x5EED_CAFEu64;
        let mut produced = 0usize;
        let mut attempts = 0usize;
        while produced < 10 {
            attempts += 1;
            assert!(attempts < 400, "sampler failed to find enough clean draws");
            let mut draw = |lo: i64, hi: i64| {
                lo + (splitmix64(&mut state) % ((hi - lo + 1) as u64)) as i64
            };
            let dg = 2 + (draw(0, 1) as usize);
            let dh = 2 + (draw(0, 1) as usize);
            let mut gc: Vec<i64> = (0..dg).map(|_| draw(-3, 3)).collect();
            gc.push(1);
            let mut hc = vec![0i64];
            hc.extend((1..dh).map(|_| draw(-3, 3)));
            hc.push(1);
            let g = tp(&gc);
            let h = sp(&hc);
            let f = g.compose(&h);
            // Skip draws whose composite has a right factor below deg h;
            // the minimal factor would then legitimately differ from h.
            let df = f.degree().unwrap();
            let collision = (2..dh)
                .filter(|e| df.is_multiple_of(*e))
                .any(|e| f.decompose_right(e).unwrap().is_some());
            if collision {
                continue;
            }
            produced += 1;
            let p = pres(vec![f.clone()]);
            let norm = normalize_curve(&p, df).unwrap();
            assert_eq!(norm.theta, h, "wrong inner factor for {f}");
            assert_eq!(norm.index, dh);
            assert_eq!(norm.expressions, vec![g]);
        }
    }

    #[test]
    fn test_conductor_cusp_principal() {
        let p = pres(vec![sp(&[0, 0, 1]), sp(&[0, 0, 0, 1])]);
        let norm = normalize_curve(&p, 20).unwrap();
        let cond = conductor(&p, &norm, 20).unwrap();
        assert!(cond.is_exact());
        assert_eq!(cond, ConductorResult::Principal { exponent: 2 });

        // Brute-force cross-check within the bound: powers of theta = s
        // lie in R exactly from the conductor exponent on (and at 0).
        for n in 0..=20usize {
            let mut c = vec![0i64; n + 1];
            c[n] = 1;
            let member = p.subduct(&sp(&c), 20).unwrap().is_member();
            assert_eq!(member, n == 0 || n >= 2, "membership of s^{n}");
        }
    }

    #[test]
    fn test_conductor_polynomial_ring_trivial() {
        let p = pres(vec![sp(&[0, 1])]);
        let norm = normalize_curve(&p, 10).unwrap();
        let cond = conductor(&p, &norm, 10).unwrap();
        assert_eq!(cond, ConductorResult::Principal { exponent: 0 });
    }

    #[test]
    fn test_conductor_scaled_inner_square() {
        let p = pres(vec![sp(&[0, 0, 0, 0, 1]), sp(&[0, 0, 0, 0, 0, 0, 1])]);
        let norm = normalize_curve(&p, 12).unwrap();
        let cond = conductor(&p, &norm, 12).unwrap();
        assert_eq!(cond, ConductorResult::Principal { exponent: 2 });
    }

    #[test]
    fn test_conductor_bounded_fallback() {
        // R = k[s^2, s^5 + s^3] normalizes to k[s] with non-monomial
        // rewritten generators, so only the bounded approximation runs.
        let p = pres(vec![sp(&[0, 0, 1]), sp(&[0, 0, 0, 1, 0, 1])]);
        let norm = normalize_curve(&p, 12).unwrap();
        assert_eq!(norm.theta, sp(&[0, 1]));
        let cond = conductor(&p, &norm, 12).unwrap();
        assert!(!cond.is_exact());
        let ConductorResult::Bounded { basis, bound } = cond else {
            panic!("expected the bounded conductor path");
        };
        assert_eq!(bound, 12);
        // The rows are tail-reduced representatives; each is still a
        // difference of translates of s^3(s^2 + 1) and so a genuine
        // conductor element.
        let expected = vec![
            sp(&[0, 0, 0, 1, 0, 1]),
            sp(&[0, 0, 0, -1, 0, 0, 0, 1]),
            sp(&[0, 0, 0, 1, 0, 0, 0, 0, 0, 1]),
            sp(&[0, 0, 0, -1, 0, 0, 0, 0, 0, 0, 0, 1]),
        ];
        assert_eq!(basis, expected);
    }

    #[test]
    fn test_extension_conductor_check() {
        let sg = NumericalSemigroup::from_generators(&[2, 3]).unwrap();
        let check = conductor_extension_check(&sg, 2, 10);
        assert!(check.stable && check.minimal && check.holds());
        assert!(!conductor_extension_check(&sg, 1, 10).stable);
        assert!(!conductor_extension_check(&sg, 3, 10).minimal);

        let full = NumericalSemigroup::from_generators(&[1]).unwrap();
        let trivial = conductor_extension_check(&full, 0, 10);
        assert!(trivial.stable && trivial.minimal);
    }

    #[test]
    fn test_json_shapes() {
        let p = pres(vec![sp(&[1, 0, 0, 2, 0, 0, 1])]);
        let norm = normalize_curve(&p, 10).unwrap();
        let j = norm.to_json();
        assert_eq!(j["theta"], "s^3");
        assert_eq!(j["index"], 3);
        assert_eq!(j["variable"], "theta");
        assert_eq!(j["expressions"][0], "theta^2 + 2*theta + 1");

        let cusp = pres(vec![sp(&[0, 0, 1]), sp(&[0, 0, 0, 1])]);
        let cnorm = normalize_curve(&cusp, 20).unwrap();
        let cj = conductor(&cusp, &cnorm, 20).unwrap().to_json();
        assert_eq!(cj["exact"], true);
        assert_eq!(cj["exponent"], 2);
    }
}
