//! Construction and certification of degree-scaled embeddings of a
//! subalgebra `R ⊆ K[s]` into a polynomial ring `F[t]` over a smaller
//! coefficient field.
//!
//! Given a presentation of `R` over a coefficient field `k ⊆ K`, the
//! engine first detects the subfield of `K` generated by ratios of
//! leading-coefficient data ([`discover_coefficient_field`]). Depending
//! on whether the generator coefficients are algebraic over that
//! subfield, [`construct_embedding`] either rewrites the generators
//! exactly in a scaled variable `t = c·s^d` (adjoining a root `c` of a
//! leading coefficient when needed), or specializes the transcendental
//! generator of `K` at a point chosen so that the filtration ranks of
//! source and image agree up to the verification bound.
//!
//! Every certificate is re-verified from scratch before it is returned:
//! monomial relations are re-expanded on the images, degrees and
//! per-degree ranks are compared, transcendence degrees are recomputed
//! from Jacobian ranks, and explicit algebraicity witnesses are
//! produced for the target field's generators.

use serde_json::{json, Value};
use thiserror::Error;

use crate::fields::{
    eth_root, Adjunction, FieldElement, FieldError, FieldTower, Specialization, TowerEmbedding,
};
use crate::graded::{
    enumerate_weighted_tuples, GradedError, GradedPiece, SubalgebraPresentation,
};
use crate::intutil::shuffle;
use crate::linalg::integer_kernel;
use crate::unipoly::{PolyError, UniPoly};

/// Default number of rejected specialization points tolerated before
/// giving up.
pub const DEFAULT_RETRIES: usize = 6;
/// Half-width of the shuffled window of candidate specialization points.
const CANDIDATE_WINDOW: i64 = 20;
/// Extra unshuffled candidates appended after the window.
const CANDIDATE_TAIL: i64 = 40;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("graded computation failed: {0}")]
    Graded(#[from] GradedError),
    #[error("field arithmetic error: {0}")]
    Field(#[from] FieldError),
    #[error("polynomial arithmetic error: {0}")]
    Poly(#[from] PolyError),
    #[error("unsupported tower shape: {0}")]
    UnsupportedTowerShape(String),
    #[error("no specialization point passed the rank checks; rejected (point, degree) pairs: {rejected:?}")]
    RetriesExhausted { rejected: Vec<RejectedPoint> },
    #[error("certificate verification failed at the {check} check: {detail}")]
    VerificationFailed { check: String, detail: String },
}

fn verification_failure(check: &str, detail: String) -> EmbedError {
    EmbedError::VerificationFailed { check: check.to_string(), detail }
}

/// A specialization point rejected by the per-degree rank comparison,
/// together with the first degree where the ranks diverged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RejectedPoint {
    pub point: i64,
    pub degree: usize,
}

// ---------------------------------------------------------------------------
// Problems
// ---------------------------------------------------------------------------

/// An embedding problem: a presentation plus the verification bound and
/// the retry policy for specialization.
#[derive(Clone)]
pub struct EmbeddingProblem {
    presentation: SubalgebraPresentation,
    bound: usize,
    seed: u64,
    retries: usize,
}

impl EmbeddingProblem {
    /// Problem with the default bound `2·(max generator degree) +
    /// (conductor exponent of the degree semigroup)`, seed 0, and the
    /// default retry cap.
    pub fn new(presentation: SubalgebraPresentation) -> Result<Self, EmbedError> {
        validate_shape(&presentation)?;
        let maxdeg = presentation.max_generator_degree();
        let sg = presentation.degree_data(2 * maxdeg)?;
        let bound = 2 * maxdeg + sg.conductor_exponent();
        Ok(EmbeddingProblem { presentation, bound, seed: 0, retries: DEFAULT_RETRIES })
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_retries(mut self, retries: usize) -> Self {
        self.retries = retries;
        self
    }

    pub fn presentation(&self) -> &SubalgebraPresentation {
        &self.presentation
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn retries(&self) -> usize {
        self.retries
    }
}

/// The ambient tower must be a number field, or a number field with a
/// single transcendental generator as its topmost step.
fn validate_shape(pres: &SubalgebraPresentation) -> Result<(), EmbedError> {
    let tower = pres.tower();
    if tower.has_transcendental() && !tower.top_is_transcendental() {
        return Err(EmbedError::UnsupportedTowerShape(
            "the transcendental generator must be the topmost tower step".to_string(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Coefficient-field discovery
// ---------------------------------------------------------------------------

/// Where a leading coefficient used in a ratio witness came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeadRef {
    /// Leading coefficient of generator `i`.
    Generator(usize),
    /// Leading coefficient of the filtration-basis row at the given
    /// degree and position within its degree block.
    Row { degree: usize, position: usize },
}

/// A detected generator of the coefficient subfield, expressed as a
/// product of leading coefficients of explicit subalgebra elements
/// (numerator parts over denominator parts).
#[derive(Clone, Debug)]
pub struct DetectedGenerator {
    pub element: FieldElement,
    pub numerator: Vec<(LeadRef, u32)>,
    pub denominator: Vec<(LeadRef, u32)>,
}

/// The subfield of `K` detected from leading-coefficient data up to a
/// bound: its generators over `k` and its transcendence degree over `k`
/// (0 or 1).
pub struct CoefficientFieldReport {
    pub bound: usize,
    pub generators: Vec<DetectedGenerator>,
    pub trdeg: usize,
}

/// Detect the coefficient subfield at the problem's bound.
pub fn discover_coefficient_field(
    problem: &EmbeddingProblem,
) -> Result<CoefficientFieldReport, EmbedError> {
    discover_at(&problem.presentation, problem.bound)
}

fn discover_at(
    pres: &SubalgebraPresentation,
    bound: usize,
) -> Result<CoefficientFieldReport, EmbedError> {
    let k = pres.coefficient_field();
    let tower = pres.tower();
    let piece = pres.filtration_basis(bound)?;

    // Harvest leading coefficients with their degrees: the generators'
    // own leads plus every filtration-basis row lead.
    let mut entries: Vec<(FieldElement, usize, LeadRef)> = Vec::new();
    for (i, g) in pres.generators().iter().enumerate() {
        let lead = g.leading_coefficient().expect("nonzero generator").clone();
        let deg = g.degree().expect("nonzero generator");
        if deg <= bound {
            entries.push((lead, deg, LeadRef::Generator(i)));
        }
    }
    for n in piece.realized_degrees() {
        for (position, ri) in piece.block_row_indices(n).into_iter().enumerate() {
            entries.push((
                piece.row_leading_coefficient(ri),
                n,
                LeadRef::Row { degree: n, position },
            ));
        }
    }
    // Same value at the same degree contributes nothing new.
    let mut kept: Vec<(FieldElement, usize, LeadRef)> = Vec::new();
    for (lead, deg, src) in entries {
        if kept.iter().any(|(l, d, _)| *d == deg && *l == lead) {
            continue;
        }
        kept.push((lead, deg, src));
    }

    let mut generators: Vec<DetectedGenerator> = Vec::new();
    let push_generator = |g: DetectedGenerator, generators: &mut Vec<DetectedGenerator>| {
        if g.element.lies_in(k) {
            return;
        }
        if generators.iter().any(|h| h.element == g.element) {
            return;
        }
        generators.push(g);
    };

    // Degree-0 leads are subfield elements outright.
    let positive: Vec<&(FieldElement, usize, LeadRef)> =
        kept.iter().filter(|(_, d, _)| *d > 0).collect();
    for (lead, deg, src) in &kept {
        if *deg == 0 {
            push_generator(
                DetectedGenerator {
                    element: lead.clone(),
                    numerator: vec![(src.clone(), 1)],
                    denominator: Vec::new(),
                },
                &mut generators,
            );
        }
    }

    // Products of positive-degree leads along the integer kernel of the
    // degree vector: each kernel vector gives an equal-degree ratio.
    if positive.len() >= 2 {
        let degs: Vec<i64> = positive.iter().map(|(_, d, _)| *d as i64).collect();
        for vec in integer_kernel(&degs) {
            let mut value = tower.one();
            let mut numerator = Vec::new();
            let mut denominator = Vec::new();
            let mut ok = true;
            for (j, &e) in vec.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let (lead, _, src) = positive[j];
                let mag = e.unsigned_abs() as u32;
                if e > 0 {
                    value = value.mul(&lead.powu(mag as usize));
                    numerator.push((src.clone(), mag));
                } else {
                    match lead.inv() {
                        Ok(iv) => value = value.mul(&iv.powu(mag as usize)),
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                    denominator.push((src.clone(), mag));
                }
            }
            if ok {
                push_generator(
                    DetectedGenerator { element: value, numerator, denominator },
                    &mut generators,
                );
            }
        }
    }

    let trdeg = if tower.has_transcendental() && tower.top_is_transcendental() {
        let below = tower.below().expect("transcendental step has a base");
        if generators.iter().any(|g| !g.element.lies_in(below)) {
            1
        } else {
            0
        }
    } else {
        0
    };

    Ok(CoefficientFieldReport { bound, generators, trdeg })
}

/// Whether the exact-rewrite case applies: every generator coefficient
/// is algebraic over the detected subfield. That holds when the ambient
/// tower has no transcendental generator, when the coefficient field
/// itself contains it, when no coefficient mentions it, or when the
/// detected subfield already has transcendence degree 1.
fn algebraic_case_applies(
    pres: &SubalgebraPresentation,
    report: &CoefficientFieldReport,
) -> bool {
    let tower = pres.tower();
    if !tower.has_transcendental() {
        return true;
    }
    if pres.coefficient_field().has_transcendental() {
        return true;
    }
    if report.trdeg == 1 {
        return true;
    }
    let below = tower.below().expect("transcendental step has a base");
    let coeff_dependent = pres
        .generators()
        .iter()
        .any(|g| g.coefficients().iter().any(|c| !c.lies_in(below)));
    !coeff_dependent
}

// ---------------------------------------------------------------------------
// Jacobian transcendence degree
// ---------------------------------------------------------------------------

/// Rank of the matrix of formal partial derivatives of the generators
/// with respect to the transcendental variables present: the tower's
/// transcendental generator (when there is one) and the polynomial
/// variable. In characteristic zero this equals the transcendence
/// degree of the generated algebra over the algebraic numbers.
pub fn jacobian_trdeg(generators: &[UniPoly]) -> Result<usize, EmbedError> {
    let nonconstant: Vec<&UniPoly> = generators.iter().filter(|g| !g.is_constant()).collect();
    let Some(first) = nonconstant.first() else {
        return Ok(0);
    };
    let tower = first.tower().clone();
    let has_u = tower.has_transcendental();
    let mut matrix: Vec<Vec<UniPoly>> = Vec::new();
    for g in nonconstant {
        let mut row = Vec::new();
        if has_u {
            row.push(g.map_coefficients(&tower, du_element)?);
        }
        row.push(g.derivative());
        matrix.push(row);
    }
    Ok(poly_matrix_rank(matrix))
}

/// Formal derivative of a tower element with respect to the tower's
/// transcendental generator. Algebraic generators adjoined above the
/// transcendental step are differentiated implicitly through their
/// minimal polynomials.
fn du_element(x: &FieldElement) -> Result<FieldElement, FieldError> {
    let tower = x.tower().clone();
    if !tower.has_transcendental() || x.is_zero() {
        return Ok(tower.zero());
    }
    if let Some((num, den)) = x.as_frac() {
        let dn = num.derivative();
        let dd = den.derivative();
        let numerator = dn.mul(den).sub(&num.mul(&dd));
        let denominator = den.mul(den);
        if numerator.is_zero() {
            return Ok(tower.zero());
        }
        return FieldElement::from_frac(&tower, numerator, denominator);
    }
    if let Some(p) = x.as_ext_poly() {
        let below = tower.below().expect("algebraic step has a base").clone();
        let minpoly = tower.top_minpoly().expect("algebraic step has a minimal polynomial").clone();
        let alpha = tower.generator().expect("algebraic step has a generator");
        let m_du = minpoly.map_coefficients(&below, du_element)?;
        let m_prime = minpoly.derivative();
        let m_du_at = eval_lifted(&m_du, &alpha, &tower)?;
        let m_prime_at = eval_lifted(&m_prime, &alpha, &tower)?;
        let alpha_prime = m_du_at.neg().div(&m_prime_at)?;
        let p_du = p.map_coefficients(&below, du_element)?;
        let p_prime = p.derivative();
        let value = eval_lifted(&p_du, &alpha, &tower)?
            .add(&eval_lifted(&p_prime, &alpha, &tower)?.mul(&alpha_prime));
        return Ok(value);
    }
    // Rational constant inside a tower that merely contains the
    // transcendental generator somewhere below.
    Ok(tower.zero())
}

fn eval_lifted(
    p: &UniPoly,
    at: &FieldElement,
    tower: &FieldTower,
) -> Result<FieldElement, FieldError> {
    Ok(p.lift_to(tower)?.evaluate(at))
}

/// Rank of a matrix of polynomials over the fraction field, by
/// cross-multiplication elimination.
fn poly_matrix_rank(mut m: Vec<Vec<UniPoly>>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut top = 0usize;
    for col in 0..cols {
        let Some(pivot) = (top..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(top, pivot);
        let pivot_row = m[top].clone();
        for row in m.iter_mut().skip(top + 1) {
            if row[col].is_zero() {
                continue;
            }
            let a = pivot_row[col].clone();
            let b = row[col].clone();
            for (rc, pc) in row.iter_mut().zip(&pivot_row) {
                *rc = rc.mul(&a).sub(&pc.mul(&b));
            }
        }
        rank += 1;
        top += 1;
        if top == m.len() {
            break;
        }
    }
    rank
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingCase {
    /// The generators are rewritten exactly in the scaled variable.
    AlgebraicCoefficients,
    /// The transcendental generator was evaluated at the given point.
    Specialized { point: i64 },
}

/// How coefficients of the source tower map into the target tower.
#[derive(Clone)]
pub enum CoefficientMap {
    /// Restrict to a prefix of the source, then lift into the target.
    Lift { via: FieldTower },
    /// Apply a tower embedding (used when a root adjunction or a
    /// reparametrization extended the tower).
    Embed(TowerEmbedding),
    /// Evaluate the transcendental generator at a point, then lift.
    Specialize { source: FieldTower, point: FieldElement },
}

impl CoefficientMap {
    pub fn apply(
        &self,
        x: &FieldElement,
        target: &FieldTower,
    ) -> Result<FieldElement, EmbedError> {
        match self {
            CoefficientMap::Lift { via } => Ok(x.restrict_to(via)?.lift_to(target)?),
            CoefficientMap::Embed(phi) => {
                let y = x.restrict_to(phi.source())?;
                Ok(phi.apply(&y)?.lift_to(target)?)
            }
            CoefficientMap::Specialize { source, point } => {
                let spec = Specialization::at(source, point.clone())?;
                let y = x.lift_to(source)?;
                Ok(spec.apply(&y)?.lift_to(target)?)
            }
        }
    }
}

/// A verified embedding of the presented subalgebra into `F[t]`.
#[derive(Clone)]
pub struct EmbeddingCertificate {
    pub case: EmbeddingCase,
    /// The target tower `F`.
    pub tower: FieldTower,
    /// The target variable.
    pub var: String,
    /// Degree scale: `deg_s x = d · deg_t π(x)` for all `x`.
    pub d: usize,
    /// Images of the positive-degree generators, in order.
    pub images: Vec<UniPoly>,
    /// Images of the multiplier basis, in order.
    pub multiplier_images: Vec<FieldElement>,
    /// Algebraic generators adjoined while extracting the root.
    pub adjunctions: Vec<Adjunction>,
    /// The root `c` with `t = c·s^d`.
    pub root: FieldElement,
    /// The exponent `e` with `root^e` equal to the mapped leading
    /// coefficient below.
    pub root_exponent: usize,
    /// Image in `F` of the leading coefficient whose root was taken.
    pub scaled_lead: FieldElement,
    /// How source coefficients map into `F`.
    pub coefficient_map: CoefficientMap,
    /// Specialization points rejected along the way.
    pub rejected_points: Vec<RejectedPoint>,
    /// Cap on powers of the transcendental generator used in coordinate
    /// extraction.
    pub u_cap: usize,
    /// The verification report produced when the certificate was built.
    pub report: VerificationReport,
}

#[derive(Clone, Debug, Default)]
pub struct VerificationReport {
    pub bound: usize,
    /// Per generator: (index, source degree, image degree).
    pub degree_table: Vec<(usize, usize, usize)>,
    /// Per degree: (degree, source rank, image rank) of the spans of
    /// generator monomials of weighted degree at most the given degree.
    pub ranks: Vec<(usize, usize, usize)>,
    pub trdeg_source: usize,
    pub trdeg_image: usize,
    pub relations_checked: usize,
    pub witnesses: WitnessSet,
}

#[derive(Clone, Debug, Default)]
pub struct WitnessSet {
    /// Polynomial equation over the image algebra with root `t`.
    pub t_equation: String,
    /// The defining power relation of the adjoined root.
    pub root_equation: String,
    /// One entry per tower step of `F` above the coefficient field.
    pub field_generators: Vec<FieldGeneratorWitness>,
    /// Verified minimal polynomials of the adjoined generators.
    pub adjunctions: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct FieldGeneratorWitness {
    pub name: String,
    /// "leading-ratio", "adjoined-root", or "carried".
    pub kind: String,
    pub detail: String,
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

enum SpecializeFlow {
    Done(Box<EmbeddingCertificate>),
    Reclassify,
}

/// Build and verify an embedding certificate for the problem.
pub fn construct_embedding(
    problem: &EmbeddingProblem,
) -> Result<EmbeddingCertificate, EmbedError> {
    let pres = &problem.presentation;
    let initial_bound = pres.max_generator_degree();
    let mut report = discover_at(pres, initial_bound)?;
    let mut rejected: Vec<RejectedPoint> = Vec::new();
    let mut cert = loop {
        if algebraic_case_applies(pres, &report) {
            break construct_algebraic(problem)?;
        }
        match attempt_specialized(problem, &mut rejected)? {
            SpecializeFlow::Done(cert) => break *cert,
            SpecializeFlow::Reclassify => {
                report = discover_at(pres, problem.bound)?;
                debug_assert!(algebraic_case_applies(pres, &report));
            }
        }
    };
    cert.rejected_points = rejected;
    // Soundness: every certificate handed out has been re-verified.
    cert.report = verify_certificate(problem, &cert)?;
    Ok(cert)
}

fn restrict_poly(p: &UniPoly, target: &FieldTower) -> Result<UniPoly, EmbedError> {
    Ok(p.map_coefficients(target, |c| c.restrict_to(target))?)
}

fn construct_algebraic(
    problem: &EmbeddingProblem,
) -> Result<EmbeddingCertificate, EmbedError> {
    let pres = &problem.presentation;
    let tower = pres.tower();
    let k = pres.coefficient_field();

    // Drop the transcendental step when no coefficient mentions it.
    let mut ambient = tower.clone();
    let mut gens = pres.generators().to_vec();
    let mut mults = pres.multipliers().to_vec();
    if tower.has_transcendental() && !k.has_transcendental() {
        let below = tower.below().expect("transcendental step has a base").clone();
        let all_free = gens
            .iter()
            .all(|g| g.coefficients().iter().all(|c| c.lies_in(&below)))
            && mults.iter().all(|m| m.lies_in(&below));
        if all_free {
            gens = gens
                .iter()
                .map(|g| restrict_poly(g, &below))
                .collect::<Result<Vec<_>, _>>()?;
            mults = mults
                .iter()
                .map(|m| m.restrict_to(&below))
                .collect::<Result<Vec<_>, _>>()?;
            ambient = below;
        }
    }

    let mut working_gens = gens.clone();
    for m in &mults {
        if !m.is_one() {
            working_gens.push(UniPoly::constant(pres.var(), m.clone()));
        }
    }
    let eff =
        SubalgebraPresentation::over_coefficient_field(&ambient, pres.var(), working_gens, k)?;
    let piece = eff.filtration_basis(problem.bound)?;
    let sg = eff.degree_data(problem.bound)?;
    let d = sg.gcd();
    let n0 = piece
        .realized_degrees()
        .into_iter()
        .find(|&n| n > 0)
        .expect("presentation has a positive-degree generator");
    let r0_index = piece.block_row_indices(n0)[0];
    let kappa = piece.row_leading_coefficient(r0_index);

    let pure = gens.iter().all(|g| {
        g.coefficients().iter().enumerate().all(|(j, c)| c.is_zero() || j % d == 0)
    });

    if pure {
        let e = n0 / d;
        let outcome = eth_root(&kappa, e)?;
        let target = outcome.tower.clone();
        let phi = outcome.embedding.clone();
        let c = outcome.root.clone();
        let c_inv = c.inv()?;
        let images = gens
            .iter()
            .map(|g| rewrite_in_scaled_variable(g, d, &c_inv, &phi, &target, "t"))
            .collect::<Result<Vec<_>, _>>()?;
        let multiplier_images = mults
            .iter()
            .map(|m| Ok(phi.apply(m)?))
            .collect::<Result<Vec<_>, EmbedError>>()?;
        let scaled_lead = phi.apply(&kappa)?;
        debug_assert_eq!(c.powu(e), scaled_lead);
        Ok(EmbeddingCertificate {
            case: EmbeddingCase::AlgebraicCoefficients,
            tower: target,
            var: "t".to_string(),
            d,
            images,
            multiplier_images,
            adjunctions: outcome.adjunctions,
            root: c,
            root_exponent: e,
            scaled_lead,
            coefficient_map: CoefficientMap::Embed(phi),
            rejected_points: Vec::new(),
            u_cap: piece.u_cap(),
            report: VerificationReport::default(),
        })
    } else {
        // Mixed powers: the generators cannot be rewritten in `s^d`, so
        // fall back to the identity embedding with scale 1.
        let images = gens
            .iter()
            .map(|g| Ok(g.with_var("t")))
            .collect::<Result<Vec<_>, EmbedError>>()?;
        Ok(EmbeddingCertificate {
            case: EmbeddingCase::AlgebraicCoefficients,
            tower: ambient.clone(),
            var: "t".to_string(),
            d: 1,
            images,
            multiplier_images: mults.clone(),
            adjunctions: Vec::new(),
            root: ambient.one(),
            root_exponent: 1,
            scaled_lead: ambient.one(),
            coefficient_map: CoefficientMap::Lift { via: ambient },
            rejected_points: Vec::new(),
            u_cap: piece.u_cap(),
            report: VerificationReport::default(),
        })
    }
}

fn rewrite_in_scaled_variable(
    g: &UniPoly,
    d: usize,
    c_inv: &FieldElement,
    phi: &TowerEmbedding,
    target: &FieldTower,
    var: &str,
) -> Result<UniPoly, EmbedError> {
    let mut out = UniPoly::zero(target, var);
    for (j, a) in g.coefficients().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        debug_assert_eq!(j % d, 0, "purity was checked before rewriting");
        let coeff = phi.apply(a)?.mul(&c_inv.powu(j / d));
        out = out.add(&UniPoly::monomial(var, coeff, j / d));
    }
    Ok(out)
}

fn candidate_points(seed: u64) -> Vec<i64> {
    let mut window: Vec<i64> = (1..=CANDIDATE_WINDOW).flat_map(|n| [n, -n]).collect();
    shuffle(&mut window, seed);
    let mut out = vec![0];
    out.extend(window);
    out.extend((CANDIDATE_WINDOW + 1..=CANDIDATE_WINDOW + CANDIDATE_TAIL).flat_map(|n| [n, -n]));
    out
}

fn attempt_specialized(
    problem: &EmbeddingProblem,
    rejected: &mut Vec<RejectedPoint>,
) -> Result<SpecializeFlow, EmbedError> {
    let pres = &problem.presentation;
    let tower = pres.tower();
    let k = pres.coefficient_field();
    let target = tower
        .below()
        .expect("specialization requires a transcendental step")
        .clone();
    let n = problem.bound;
    let src_piece = pres.filtration_basis(n)?;
    let src_profile = rank_profile(&src_piece, 1, n);

    for point in candidate_points(problem.seed) {
        let point_el = target.from_integer(point);
        let Ok(spec) = Specialization::at(tower, point_el.clone()) else {
            continue;
        };
        // Filters: all coefficients specialize and no generator drops
        // degree. Filtered points do not count against the retry cap.
        let mut images = Vec::with_capacity(pres.generators().len());
        let mut viable = true;
        for g in pres.generators() {
            match spec.apply_poly(g) {
                Ok(img) if img.degree() == g.degree() => images.push(img.with_var("t")),
                _ => {
                    viable = false;
                    break;
                }
            }
        }
        let mut multiplier_images = Vec::with_capacity(pres.multipliers().len());
        if viable {
            for m in pres.multipliers() {
                match spec.apply(m) {
                    Ok(v) if !v.is_zero() => multiplier_images.push(v),
                    _ => {
                        viable = false;
                        break;
                    }
                }
            }
        }
        if !viable {
            continue;
        }

        let img_pres = image_presentation(&target, "t", &images, &multiplier_images, k)?;
        let img_piece = img_pres.filtration_basis(n)?;
        let img_profile = rank_profile(&img_piece, 1, n);
        match first_mismatch(&src_profile, &img_profile) {
            None => {
                return Ok(SpecializeFlow::Done(Box::new(EmbeddingCertificate {
                    case: EmbeddingCase::Specialized { point },
                    tower: target.clone(),
                    var: "t".to_string(),
                    d: 1,
                    images,
                    multiplier_images,
                    adjunctions: Vec::new(),
                    root: target.one(),
                    root_exponent: 1,
                    scaled_lead: target.one(),
                    coefficient_map: CoefficientMap::Specialize {
                        source: tower.clone(),
                        point: point_el,
                    },
                    rejected_points: Vec::new(),
                    u_cap: src_piece.u_cap(),
                    report: VerificationReport::default(),
                })));
            }
            Some(degree) => {
                rejected.push(RejectedPoint { point, degree });
                // A rank drop is new leading-coefficient information:
                // re-detect the coefficient subfield at the full bound
                // and reclassify when that changes the case.
                let fresh = discover_at(pres, n)?;
                if algebraic_case_applies(pres, &fresh) {
                    return Ok(SpecializeFlow::Reclassify);
                }
                if rejected.len() >= problem.retries {
                    return Err(EmbedError::RetriesExhausted { rejected: rejected.clone() });
                }
            }
        }
    }
    Err(EmbedError::RetriesExhausted { rejected: rejected.clone() })
}

fn image_presentation(
    tower: &FieldTower,
    var: &str,
    images: &[UniPoly],
    multiplier_images: &[FieldElement],
    k: &FieldTower,
) -> Result<SubalgebraPresentation, EmbedError> {
    let mut gens: Vec<UniPoly> = images.to_vec();
    for m in multiplier_images {
        if !m.is_one() {
            gens.push(UniPoly::constant(var, m.clone()));
        }
    }
    Ok(SubalgebraPresentation::over_coefficient_field(tower, var, gens, k)?)
}

/// Cumulative rank of the span of generator monomials of weighted
/// degree at most `w`, for `w = 0..=out_bound`, on the source degree
/// scale (`scale` is the certificate's degree ratio).
fn rank_profile(piece: &GradedPiece, scale: usize, out_bound: usize) -> Vec<usize> {
    let degs: Vec<usize> = piece
        .generators()
        .iter()
        .map(|g| g.degree().expect("nonzero generator") * scale)
        .collect();
    let mcount = piece.multipliers().len();
    let mut tuples = Vec::new();
    enumerate_weighted_tuples(&degs, piece.bound() * scale, &mut tuples);
    let mut monomials = vec![0usize; out_bound + 1];
    for (w, _) in &tuples {
        if *w <= out_bound {
            monomials[*w] += mcount;
        }
    }
    let mut relations = vec![0usize; out_bound + 1];
    for rel in piece.relations() {
        let w = rel
            .terms()
            .map(|((_, a), _)| {
                a.iter().zip(&degs).map(|(&e, &d)| e as usize * d).sum::<usize>()
            })
            .max()
            .unwrap_or(0);
        if w <= out_bound {
            relations[w] += 1;
        }
    }
    let mut out = vec![0usize; out_bound + 1];
    let mut monos = 0usize;
    let mut rels = 0usize;
    for w in 0..=out_bound {
        monos += monomials[w];
        rels += relations[w];
        out[w] = monos - rels;
    }
    out
}

fn first_mismatch(a: &[usize], b: &[usize]) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| x != y)
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Independently re-verify a certificate against its problem: relation
/// preservation, degree scaling, per-degree ranks, transcendence
/// degrees, and the algebraicity witnesses.
pub fn verify_certificate(
    problem: &EmbeddingProblem,
    cert: &EmbeddingCertificate,
) -> Result<VerificationReport, EmbedError> {
    let pres = &problem.presentation;
    let n = problem.bound;
    let target = &cert.tower;

    if cert.images.len() != pres.generators().len() {
        return Err(verification_failure(
            "shape",
            format!(
                "{} generators but {} images",
                pres.generators().len(),
                cert.images.len()
            ),
        ));
    }
    if cert.multiplier_images.len() != pres.multipliers().len() {
        return Err(verification_failure(
            "shape",
            format!(
                "{} multipliers but {} multiplier images",
                pres.multipliers().len(),
                cert.multiplier_images.len()
            ),
        ));
    }
    if cert.d == 0 {
        return Err(verification_failure("shape", "degree scale must be positive".into()));
    }

    let src_piece = pres.filtration_basis(n)?;

    // (a) every monomial relation found in the source re-expands to
    // zero on the images.
    let mut relations_checked = 0usize;
    for rel in src_piece.relations() {
        let value = rel.evaluate(&cert.multiplier_images, &cert.images, target, &cert.var)?;
        if !value.is_zero() {
            return Err(verification_failure(
                "homomorphism",
                format!(
                    "a relation among generator monomials of degree <= {n} does not vanish on the images (value {value})"
                ),
            ));
        }
        relations_checked += 1;
    }

    // (b) degree scaling per generator.
    let mut degree_table = Vec::new();
    for (i, (g, img)) in pres.generators().iter().zip(&cert.images).enumerate() {
        let ds = g.degree().expect("nonzero generator");
        let di = match img.degree() {
            Some(di) => di,
            None => {
                return Err(verification_failure(
                    "degree",
                    format!("image of generator {i} is zero"),
                ))
            }
        };
        if ds != cert.d * di {
            return Err(verification_failure(
                "degree",
                format!(
                    "generator {i} has degree {ds} but its image has degree {di} at scale {}",
                    cert.d
                ),
            ));
        }
        degree_table.push((i, ds, di));
    }

    // (c) per-degree rank equality of the monomial spans.
    let src_profile = rank_profile(&src_piece, 1, n);
    let img_pres = image_presentation(
        target,
        &cert.var,
        &cert.images,
        &cert.multiplier_images,
        pres.coefficient_field(),
    )?;
    let img_piece = img_pres.filtration_basis(n / cert.d)?;
    let img_profile = rank_profile(&img_piece, cert.d, n);
    let ranks: Vec<(usize, usize, usize)> =
        (0..=n).map(|w| (w, src_profile[w], img_profile[w])).collect();
    if let Some(w) = first_mismatch(&src_profile, &img_profile) {
        return Err(verification_failure(
            "rank",
            format!(
                "filtration ranks diverge at degree {w}: source {} vs image {}",
                src_profile[w], img_profile[w]
            ),
        ));
    }

    // (d) transcendence degrees from Jacobian ranks.
    let trdeg_source = jacobian_trdeg(pres.generators())?;
    let trdeg_image = jacobian_trdeg(&cert.images)?;
    if trdeg_source != trdeg_image {
        return Err(verification_failure(
            "transcendence",
            format!("source transcendence degree {trdeg_source} but image {trdeg_image}"),
        ));
    }
    // Leading forms never exceed the algebra's transcendence degree.
    let lead_forms: Vec<UniPoly> = pres
        .generators()
        .iter()
        .map(|g| {
            UniPoly::monomial(
                pres.var(),
                g.leading_coefficient().expect("nonzero generator").clone(),
                g.degree().expect("nonzero generator"),
            )
        })
        .collect();
    assert!(
        jacobian_trdeg(&lead_forms)? <= trdeg_source,
        "leading-form algebra exceeds the transcendence degree of the source"
    );

    // (e) witnesses.
    // The adjoined root satisfies its power relation.
    if cert.root.powu(cert.root_exponent) != cert.scaled_lead {
        return Err(verification_failure(
            "witness",
            "the adjoined root does not satisfy its power relation".into(),
        ));
    }
    let root_equation = format!(
        "({})^{} = {}",
        cert.root, cert.root_exponent, cert.scaled_lead
    );

    // The target variable satisfies a polynomial equation over the
    // image algebra: the minimal positive-degree basis row evaluated at
    // a fresh variable, minus its own value.
    let m0 = img_piece
        .realized_degrees()
        .into_iter()
        .find(|&m| m > 0)
        .ok_or_else(|| {
            verification_failure("witness", "the image algebra has no positive-degree element".into())
        })?;
    let rho_index = img_piece.block_row_indices(m0)[0];
    let rho = img_piece.row_polynomial(rho_index).clone();
    let t_equation = format!("{} - ({})", rho.with_var("X"), rho);
    // The first positive-degree source row lands inside the tabulated
    // image span (ties the two filtrations together at the bottom).
    if let Some(n0) = src_piece.realized_degrees().into_iter().find(|&m| m > 0) {
        let r0_index = src_piece.block_row_indices(n0)[0];
        let mapped = src_piece.row_expression(r0_index).evaluate(
            &cert.multiplier_images,
            &cert.images,
            target,
            &cert.var,
        )?;
        if !img_piece.subduct(&mapped)?.is_member() {
            return Err(verification_failure(
                "witness",
                "the image of the minimal-degree source row is not in the image span".into(),
            ));
        }
    }

    // Adjoined generators satisfy their recorded minimal polynomials.
    let mut adjunction_witnesses = Vec::new();
    for adj in &cert.adjunctions {
        let gen = target.generator_named(&adj.name)?;
        let value = eval_lifted(&adj.minpoly, &gen, target)?;
        if !value.is_zero() {
            return Err(verification_failure(
                "witness",
                format!("adjoined generator {} does not satisfy its minimal polynomial", adj.name),
            ));
        }
        adjunction_witnesses.push(format!("{}: {} = 0", adj.name, adj.minpoly));
    }

    // Provenance of every tower step of the target above the
    // coefficient field.
    let detected = discover_at(pres, n)?;
    let mut field_generators = Vec::new();
    for prefix in cert.tower.prefixes().iter().skip(1) {
        if prefix.is_prefix_of(pres.coefficient_field()) {
            continue;
        }
        let name = prefix.top_name().expect("non-rational step is named").to_string();
        if let Some(adj) = cert.adjunctions.iter().find(|a| a.name == name) {
            field_generators.push(FieldGeneratorWitness {
                name,
                kind: "adjoined-root".to_string(),
                detail: format!("{} = 0", adj.minpoly),
            });
            continue;
        }
        let gen_el = prefix
            .generator()
            .expect("non-rational step has a generator")
            .lift_to(&cert.tower)?;
        let mut matched = false;
        for det in &detected.generators {
            let (forward, inverse) = match cert.coefficient_map.apply(&det.element, &cert.tower) {
                Ok(m) => (m == gen_el, false),
                Err(_) => (false, false),
            };
            let inverse = inverse
                || match det.element.inv().map(|iv| cert.coefficient_map.apply(&iv, &cert.tower)) {
                    Ok(Ok(m)) => m == gen_el,
                    _ => false,
                };
            if forward || inverse {
                let (num, den) = if forward {
                    (&det.numerator, &det.denominator)
                } else {
                    (&det.denominator, &det.numerator)
                };
                check_ratio_witness(det, forward, &src_piece, pres, cert, &img_piece)?;
                field_generators.push(FieldGeneratorWitness {
                    name: name.clone(),
                    kind: "leading-ratio".to_string(),
                    detail: format!(
                        "ratio of leading coefficients of equal-degree subalgebra elements ({} over {} factors)",
                        num.len(),
                        den.len()
                    ),
                });
                matched = true;
                break;
            }
        }
        if !matched {
            field_generators.push(FieldGeneratorWitness {
                name,
                kind: "carried".to_string(),
                detail: "tower step of the input carried into the target".to_string(),
            });
        }
    }

    Ok(VerificationReport {
        bound: n,
        degree_table,
        ranks,
        trdeg_source,
        trdeg_image,
        relations_checked,
        witnesses: WitnessSet {
            t_equation,
            root_equation,
            field_generators,
            adjunctions: adjunction_witnesses,
        },
    })
}

/// Check a detected-generator witness on both sides: the numerator and
/// denominator products have equal degrees, and the ratio of their
/// leading coefficients is the detected element (forward) or its
/// inverse.
fn check_ratio_witness(
    det: &DetectedGenerator,
    forward: bool,
    src_piece: &GradedPiece,
    pres: &SubalgebraPresentation,
    cert: &EmbeddingCertificate,
    img_piece: &GradedPiece,
) -> Result<(), EmbedError> {
    let source_part = |r: &LeadRef| -> UniPoly {
        match r {
            LeadRef::Generator(i) => pres.generators()[*i].clone(),
            LeadRef::Row { degree, position } => {
                let ri = src_piece.block_row_indices(*degree)[*position];
                src_piece.row_polynomial(ri).clone()
            }
        }
    };
    let image_part = |r: &LeadRef| -> Result<UniPoly, EmbedError> {
        match r {
            LeadRef::Generator(i) => Ok(cert.images[*i].clone()),
            LeadRef::Row { degree, position } => {
                let ri = src_piece.block_row_indices(*degree)[*position];
                Ok(src_piece.row_expression(ri).evaluate(
                    &cert.multiplier_images,
                    &cert.images,
                    &cert.tower,
                    &cert.var,
                )?)
            }
        }
    };
    let product = |parts: &[(LeadRef, u32)],
                   make: &dyn Fn(&LeadRef) -> Result<UniPoly, EmbedError>,
                   tower: &FieldTower,
                   var: &str|
     -> Result<UniPoly, EmbedError> {
        let mut acc = UniPoly::one(tower, var);
        for (r, e) in parts {
            acc = acc.mul(&make(r)?.pow(*e as usize));
        }
        Ok(acc)
    };

    let (num_parts, den_parts) = if forward {
        (&det.numerator, &det.denominator)
    } else {
        (&det.denominator, &det.numerator)
    };
    let value = if forward { det.element.clone() } else { det.element.inv()? };

    // Source side.
    let src_tower = pres.tower().clone();
    let m_plus = product(num_parts, &|r| Ok(source_part(r)), &src_tower, pres.var())?;
    let m_minus = product(den_parts, &|r| Ok(source_part(r)), &src_tower, pres.var())?;
    if m_plus.degree() != m_minus.degree() {
        return Err(verification_failure(
            "witness",
            "ratio witness degrees differ on the source side".into(),
        ));
    }
    let lead_ratio_ok = match (m_plus.leading_coefficient(), m_minus.leading_coefficient()) {
        (Some(a), Some(b)) => *a == value.mul(b),
        _ => false,
    };
    if !lead_ratio_ok {
        return Err(verification_failure(
            "witness",
            "ratio witness leading coefficients do not match on the source side".into(),
        ));
    }

    // Image side, with the detected element mapped into the target.
    let mapped = cert.coefficient_map.apply(&value, &cert.tower)?;
    let p_plus = product(num_parts, &image_part, &cert.tower, &cert.var)?;
    let p_minus = product(den_parts, &image_part, &cert.tower, &cert.var)?;
    if p_plus.degree() != p_minus.degree() || p_plus.is_zero() {
        return Err(verification_failure(
            "witness",
            "ratio witness degrees differ on the image side".into(),
        ));
    }
    let img_ok = match (p_plus.leading_coefficient(), p_minus.leading_coefficient()) {
        (Some(a), Some(b)) => *a == mapped.mul(b),
        _ => false,
    };
    if !img_ok {
        return Err(verification_failure(
            "witness",
            "ratio witness leading coefficients do not match on the image side".into(),
        ));
    }
    let _ = img_piece;
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON encoding
// ---------------------------------------------------------------------------

impl EmbeddingCertificate {
    /// Human-readable description of the scaled variable.
    pub fn t_description(&self) -> String {
        let base = if self.d == 1 { "s".to_string() } else { format!("s^{}", self.d) };
        if self.root.is_one() {
            base
        } else {
            format!("({}) * {}", self.root, base)
        }
    }

    /// Stable JSON encoding (keys are emitted in sorted order).
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::Map::new();
        v.insert(
            "case".to_string(),
            json!(match self.case {
                EmbeddingCase::AlgebraicCoefficients => "AlgebraicCoefficients",
                EmbeddingCase::Specialized { .. } => "Specialized",
            }),
        );
        if let EmbeddingCase::Specialized { point } = self.case {
            v.insert("u0".to_string(), json!(point));
        }
        v.insert("d".to_string(), json!(self.d));
        v.insert("field_tower".to_string(), json!(tower_steps(&self.tower)));
        v.insert("t".to_string(), json!(self.t_description()));
        v.insert("variable".to_string(), json!(self.var));
        v.insert(
            "images".to_string(),
            json!(self.images.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
        );
        v.insert(
            "multiplier_images".to_string(),
            json!(self.multiplier_images.iter().map(|m| m.to_string()).collect::<Vec<_>>()),
        );
        v.insert(
            "adjunctions".to_string(),
            json!(self
                .adjunctions
                .iter()
                .map(|a| format!("{}: {} = 0", a.name, a.minpoly))
                .collect::<Vec<_>>()),
        );
        v.insert(
            "rejected_points".to_string(),
            json!(self
                .rejected_points
                .iter()
                .map(|r| vec![r.point, r.degree as i64])
                .collect::<Vec<_>>()),
        );
        v.insert("u_cap".to_string(), json!(self.u_cap));
        v.insert("verification".to_string(), self.report.to_json());
        Value::Object(v)
    }
}

impl VerificationReport {
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::Map::new();
        v.insert("bound".to_string(), json!(self.bound));
        v.insert(
            "degree_table".to_string(),
            json!(self.degree_table.iter().map(|&(i, s, d)| vec![i, s, d]).collect::<Vec<_>>()),
        );
        v.insert(
            "ranks".to_string(),
            json!(self.ranks.iter().map(|&(n, s, i)| vec![n, s, i]).collect::<Vec<_>>()),
        );
        v.insert("relations_checked".to_string(), json!(self.relations_checked));
        v.insert("trdeg_source".to_string(), json!(self.trdeg_source));
        v.insert("trdeg_image".to_string(), json!(self.trdeg_image));
        let mut w = serde_json::Map::new();
        w.insert("t_equation".to_string(), json!(self.witnesses.t_equation));
        w.insert("root_equation".to_string(), json!(self.witnesses.root_equation));
        w.insert(
            "field_generators".to_string(),
            json!(self
                .witnesses
                .field_generators
                .iter()
                .map(|g| {
                    let mut m = serde_json::Map::new();
                    m.insert("detail".to_string(), json!(g.detail));
                    m.insert("kind".to_string(), json!(g.kind));
                    m.insert("name".to_string(), json!(g.name));
                    Value::Object(m)
                })
                .collect::<Vec<_>>()),
        );
        w.insert("adjunctions".to_string(), json!(self.witnesses.adjunctions));
        v.insert("witnesses".to_string(), Value::Object(w));
        Value::Object(v)
    }
}

/// Tower steps as strings, root first.
fn tower_steps(tower: &FieldTower) -> Vec<String> {
    tower
        .prefixes()
        .iter()
        .map(|p| match p.top_name() {
            None => "Q".to_string(),
            Some(name) => match p.top_minpoly() {
                Some(m) => format!("{name}: {m} = 0"),
                None => format!("{name}: transcendental"),
            },
        })
        .collect()
}
