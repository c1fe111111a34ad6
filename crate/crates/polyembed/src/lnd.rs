//! Derivations on polynomial rings and the machinery built on top of them:
//! nilpotency certification, slice expansions, extension of a derivation to
//! the normalization of a curve algebra, conductor stability, and a fully
//! re-verified obstruction trace for cancellation-style questions.
//!
//! Throughout, a derivation `D` on `k[x_1, ..., x_n]` is given by the images
//! of the variables and extended by linearity and the Leibniz rule.  `D` is
//! locally nilpotent when every element is annihilated by some iterate of
//! `D`; in characteristic zero it suffices to check the algebra generators.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::fields::{FieldElement, FieldError};
use crate::graded::{GradedError, SubalgebraPresentation};
use crate::linalg::{Combination, Echelon, Insertion};
use crate::mpoly::{MPoly, MPolyRing};
use crate::normalize::{self, ConductorResult, NormalizationResult, NormalizeError};
use crate::unipoly::{PolyError, UniPoly};

/// Errors produced by the derivation layer.
#[derive(Debug, Error)]
pub enum LndError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    /// The derivation failed to annihilate an input within the iteration
    /// budget, so a slice expansion could not be computed.
    #[error("no iterate of the derivation annihilates the input within {bound} steps")]
    NotNilpotentOnInput { bound: usize },
    /// An operation required a locally nilpotent derivation but the
    /// nilpotency check did not certify one.
    #[error("the derivation is not certified locally nilpotent: {0}")]
    NotNilpotent(String),
    /// A derivation image left the subalgebra it was required to stay in.
    #[error("derivation image leaves the subalgebra: {0}")]
    NotClosed(String),
    /// The chain-rule system for the extension to the normalization has no
    /// polynomial solution, or its solutions disagree across generators.
    #[error("no consistent extension to the normalization: {0}")]
    InconsistentExtension(String),
    /// A derivation was required to restrict to a subring but does not.
    #[error("the derivation does not restrict to the subalgebra: {0}")]
    NotRestricting(String),
    /// The input derivation was declared locally nilpotent but its extension
    /// to the normalization could not be certified nilpotent.
    #[error("nilpotency did not transfer to the normalization: {0}")]
    NilpotencyNotTransferred(String),
    /// A derived equation failed its re-verification inside a trace.
    #[error("a derived step failed re-verification: {0}")]
    TraceContradiction(String),
    /// The proposed slice does not satisfy `D(s) != 0` and `D^2(s) = 0`.
    #[error("invalid slice: {0}")]
    InvalidSlice(String),
    /// Mismatched rings, towers, or argument shapes.
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    /// The conductor could only be computed as a bounded approximation, but
    /// an exact principal conductor was required.
    #[error("the conductor is not available in exact principal form")]
    ConductorInexact,
}

/// A derivation of a multivariate polynomial ring, determined by the images
/// of the variables and extended to all polynomials by the Leibniz rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyDerivation {
    ring: MPolyRing,
    images: Vec<MPoly>,
}

impl PolyDerivation {
    /// Builds the derivation with `D(x_i) = images[i]`.
    pub fn new(ring: &MPolyRing, images: Vec<MPoly>) -> Result<PolyDerivation, LndError> {
        if images.len() != ring.num_vars() {
            return Err(LndError::RingMismatch(format!(
                "expected {} variable images, got {}",
                ring.num_vars(),
                images.len()
            )));
        }
        for (name, img) in ring.vars().iter().zip(&images) {
            if img.ring() != ring {
                return Err(LndError::RingMismatch(format!(
                    "the image of {name} lives in a different ring"
                )));
            }
        }
        Ok(PolyDerivation {
            ring: ring.clone(),
            images,
        })
    }

    /// The zero derivation.
    pub fn zero(ring: &MPolyRing) -> PolyDerivation {
        PolyDerivation {
            ring: ring.clone(),
            images: vec![ring.zero(); ring.num_vars()],
        }
    }

    pub fn ring(&self) -> &MPolyRing {
        &self.ring
    }

    pub fn images(&self) -> &[MPoly] {
        &self.images
    }

    /// `D(f) = sum_i (∂f/∂x_i) · D(x_i)`.
    pub fn apply(&self, f: &MPoly) -> MPoly {
        assert!(f.ring() == &self.ring, "derivation applied outside its ring");
        let mut acc = self.ring.zero();
        for (i, img) in self.images.iter().enumerate() {
            if img.is_zero() {
                continue;
            }
            acc = acc.add(&f.partial(i).mul(img));
        }
        acc
    }

    /// `D^n(f)`.
    pub fn iterate(&self, f: &MPoly, n: usize) -> MPoly {
        let mut cur = f.clone();
        for _ in 0..n {
            cur = self.apply(&cur);
        }
        cur
    }
}

/// Outcome of the bounded nilpotency check.
#[derive(Debug, Clone, PartialEq)]
pub enum NilpotencyVerdict {
    /// Every variable is annihilated; `indices` records, per variable, the
    /// least `n` with `D^n(x) = 0`.
    ProvenNilpotent { indices: Vec<(String, usize)> },
    /// A witness certifies that no iterate ever vanishes.
    ProvenNot { witness: String },
    /// The iteration budget ran out without a decision either way.
    UnknownAtBound { bound: usize },
}

impl NilpotencyVerdict {
    pub fn is_nilpotent(&self) -> bool {
        matches!(self, NilpotencyVerdict::ProvenNilpotent { .. })
    }
}

impl fmt::Display for NilpotencyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NilpotencyVerdict::ProvenNilpotent { indices } => {
                let parts: Vec<String> =
                    indices.iter().map(|(v, i)| format!("{v}: {i}")).collect();
                write!(f, "locally nilpotent ({})", parts.join(", "))
            }
            NilpotencyVerdict::ProvenNot { witness } => {
                write!(f, "not locally nilpotent: {witness}")
            }
            NilpotencyVerdict::UnknownAtBound { bound } => {
                write!(f, "undetermined at iteration bound {bound}")
            }
        }
    }
}

/// Default iteration budget for nilpotency checks: twice the sum of the
/// total degrees of the nonzero variable images, plus slack.
pub fn default_nilpotency_bound(d: &PolyDerivation) -> usize {
    let degsum: usize = d
        .images
        .iter()
        .filter_map(|img| img.total_degree())
        .sum();
    2 * degsum + 4
}

/// Bounded local-nilpotency check.
///
/// In characteristic zero a derivation is locally nilpotent as soon as it is
/// nilpotent on each algebra generator, so it suffices to iterate on the
/// variables.  Before iterating, each variable image is scanned for an
/// eigen-monomial witness `D(x) = c · x^k` with `k >= 1`: such an image
/// reproduces a positive power of `x` under every iterate, which rules out
/// nilpotency outright.  Variables whose orbits neither terminate nor
/// produce a witness within `bound` applications yield `UnknownAtBound`.
pub fn is_locally_nilpotent(d: &PolyDerivation, bound: usize) -> NilpotencyVerdict {
    assert!(bound >= 1, "nilpotency bound must be positive");
    for (i, img) in d.images.iter().enumerate() {
        if img.is_zero() {
            continue;
        }
        if let Some((exps, c)) = single_term(img) {
            let pure_self = exps
                .iter()
                .enumerate()
                .all(|(j, &e)| j == i || e == 0);
            if pure_self && exps[i] >= 1 && !c.is_zero() {
                let name = &d.ring.vars()[i];
                return NilpotencyVerdict::ProvenNot {
                    witness: format!(
                        "D({name}) = {img} lies in {name}·k[{name}], so every iterate of D \
                         on {name} keeps a positive power of {name}"
                    ),
                };
            }
        }
    }
    let mut indices = Vec::new();
    for (i, name) in d.ring.vars().iter().enumerate() {
        let mut cur = d.ring.monomial(
            &{
                let mut e = vec![0u32; d.ring.num_vars()];
                e[i] = 1;
                e
            },
            d.ring.tower().one(),
        );
        let mut steps = 0usize;
        while !cur.is_zero() {
            if steps == bound {
                return NilpotencyVerdict::UnknownAtBound { bound };
            }
            cur = d.apply(&cur);
            steps += 1;
        }
        indices.push((name.clone(), steps));
    }
    NilpotencyVerdict::ProvenNilpotent { indices }
}

fn single_term(f: &MPoly) -> Option<(Vec<u32>, FieldElement)> {
    let mut it = f.terms();
    let first = it.next()?;
    if it.next().is_some() {
        return None;
    }
    Some((first.0.clone(), first.1.clone()))
}

/// A slice for a derivation: an element `s` with `D(s) != 0` and
/// `D^2(s) = 0`, so that `D(s)` lies in the kernel of `D`.
#[derive(Debug, Clone)]
pub struct SliceData {
    slice: MPoly,
    ds: MPoly,
}

impl SliceData {
    pub fn new(d: &PolyDerivation, s: &MPoly) -> Result<SliceData, LndError> {
        let ds = d.apply(s);
        if ds.is_zero() {
            return Err(LndError::InvalidSlice(format!(
                "D({s}) = 0, so {s} is not a slice"
            )));
        }
        if !d.apply(&ds).is_zero() {
            return Err(LndError::InvalidSlice(format!(
                "D^2({s}) != 0, so D({s}) does not lie in the kernel"
            )));
        }
        Ok(SliceData {
            slice: s.clone(),
            ds,
        })
    }

    pub fn slice(&self) -> &MPoly {
        &self.slice
    }

    /// `D(s)`, a nonzero kernel element.
    pub fn ds(&self) -> &MPoly {
        &self.ds
    }
}

/// One coefficient of a slice expansion, the fraction
/// `numerator / D(s)^denominator_power` with the numerator a kernel element.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCoefficient {
    pub numerator: MPoly,
    pub denominator_power: u32,
}

impl SliceCoefficient {
    pub fn is_polynomial(&self) -> bool {
        self.denominator_power == 0
    }
}

/// Expands `b` as `sum_i a_i s^i` with every `a_i` in the kernel of `D`,
/// allowing denominators that are powers of `D(s)`.  The coefficients are
/// peeled off top-down: if `q` is the largest index with `D^q(b) != 0` then
/// `a_q = D^q(b) / (q! · D(s)^q)`, and the remainder `b - a_q s^q` has
/// strictly smaller top index.  Returns the dense list `a_0, ..., a_q`
/// (empty for `b = 0`).  Fails with `NotNilpotentOnInput` when some iterate
/// chain exceeds `bound` applications without reaching zero.
pub fn slice_expansion(
    d: &PolyDerivation,
    slice: &SliceData,
    b: &MPoly,
    bound: usize,
) -> Result<Vec<SliceCoefficient>, LndError> {
    let ring = d.ring().clone();
    let tower = ring.tower().clone();
    let ds = slice.ds().clone();
    let s = slice.slice().clone();

    let mut recorded: BTreeMap<u32, SliceCoefficient> = BTreeMap::new();
    let mut num = b.clone();
    let mut denom_pow: u32 = 0;
    let mut prev_top = usize::MAX;

    while !num.is_zero() {
        let mut chain = vec![num.clone()];
        loop {
            let next = d.apply(chain.last().expect("nonempty chain"));
            if next.is_zero() {
                break;
            }
            if chain.len() > bound {
                return Err(LndError::NotNilpotentOnInput { bound });
            }
            chain.push(next);
        }
        let q = chain.len() - 1;
        assert!(q < prev_top, "slice peeling must strictly lower the top index");
        prev_top = q;

        let mut fact = tower.one();
        for j in 2..=q.max(1) {
            fact = fact.mul(&tower.from_integer(j as i64));
        }
        let inv_fact = tower.one().div(&fact)?;
        let top_num = chain[q].scale(&inv_fact);
        recorded.insert(
            q as u32,
            SliceCoefficient {
                numerator: top_num.clone(),
                denominator_power: denom_pow + q as u32,
            },
        );
        if q == 0 {
            break;
        }
        num = num
            .mul(&ds.powu(q as u32))
            .sub(&top_num.mul(&s.powu(q as u32)));
        denom_pow += q as u32;
    }

    // Clear removable denominator powers, then re-verify the two defining
    // properties: every numerator is a kernel element, and the expansion
    // reconstructs b exactly after clearing denominators.
    let top = recorded.keys().next_back().copied().map(|k| k as usize);
    let mut out = Vec::new();
    if let Some(top) = top {
        for i in 0..=top {
            let mut coeff = recorded.remove(&(i as u32)).unwrap_or(SliceCoefficient {
                numerator: ring.zero(),
                denominator_power: 0,
            });
            while coeff.denominator_power > 0 {
                match coeff.numerator.exact_div(&ds) {
                    Some(qt) => {
                        coeff.numerator = qt;
                        coeff.denominator_power -= 1;
                    }
                    None => break,
                }
            }
            assert!(
                d.apply(&coeff.numerator).is_zero(),
                "slice coefficient numerator must lie in the kernel"
            );
            out.push(coeff);
        }
    }
    let max_pow = out.iter().map(|c| c.denominator_power).max().unwrap_or(0);
    let mut lhs = ring.zero();
    for (i, coeff) in out.iter().enumerate() {
        let scaled = coeff
            .numerator
            .mul(&ds.powu(max_pow - coeff.denominator_power))
            .mul(&s.powu(i as u32));
        lhs = lhs.add(&scaled);
    }
    assert!(
        lhs == b.mul(&ds.powu(max_pow)),
        "slice expansion must reconstruct the input exactly"
    );
    Ok(out)
}

/// Outcome of testing the implication "`f` divides `D(f)` forces
/// `D(f) = 0`", which holds for every locally nilpotent `D`.
#[derive(Debug, Clone, PartialEq)]
pub enum DivisibilityConclusion {
    /// `D(f) = 0`; the implication holds with vanishing derivative.
    DerivativeVanishes,
    /// `f` does not divide `D(f)`; the hypothesis fails, so the test is
    /// vacuously passed.
    NotDivisible { derivative: MPoly },
    /// `f` divides `D(f)` yet `D(f) != 0`; for a locally nilpotent
    /// derivation this cannot happen, so the input data is inconsistent.
    Inconsistent { quotient: MPoly },
}

/// Tests whether `f | D(f)`, and if so whether `D(f) = 0` as a locally
/// nilpotent derivation would force.
pub fn df_in_fb_check(d: &PolyDerivation, f: &MPoly) -> DivisibilityConclusion {
    let df = d.apply(f);
    if df.is_zero() {
        return DivisibilityConclusion::DerivativeVanishes;
    }
    if f.is_zero() {
        // D(f) must lie in f·B = 0, and it does not.
        return DivisibilityConclusion::NotDivisible { derivative: df };
    }
    match df.exact_div(f) {
        Some(quotient) => DivisibilityConclusion::Inconsistent { quotient },
        None => DivisibilityConclusion::NotDivisible { derivative: df },
    }
}

/// The extension of a derivation of a curve algebra to its normalization
/// `k[theta]`, together with the nilpotency verdict for the extension.
#[derive(Debug, Clone)]
pub struct NormalizationExtension {
    /// Image of `theta` under the extended derivation (a polynomial in the
    /// normalization variable).
    pub dtheta: UniPoly,
    pub verdict: NilpotencyVerdict,
}

/// Extends a derivation `D` of the curve algebra `R`, given by `images` of
/// the presentation's generators, to the normalization `k[theta]`.
///
/// The extension is forced by the chain rule: writing the `i`-th generator
/// as `e_i(theta)`, the image `D(g_i)` rewritten in `theta` must equal
/// `e_i'(theta) · D(theta)`, which determines `D(theta)` by exact division.
/// A derivation of an integral domain always extends uniquely to the
/// normalization (a theorem of Seidenberg), so for genuine derivation data
/// the division is exact and consistent across all generators; inputs that
/// violate this are rejected with `InconsistentExtension`.
///
/// When `input_nilpotent` is set, the caller asserts that `D` is locally
/// nilpotent on `R`; the extension is then required to be certified locally
/// nilpotent as well (a theorem of Vasconcelos), and a failed certificate is
/// reported as `NilpotencyNotTransferred`.
pub fn extend_to_normalization(
    pres: &SubalgebraPresentation,
    images: &[UniPoly],
    norm: &NormalizationResult,
    bound: usize,
    input_nilpotent: bool,
) -> Result<NormalizationExtension, LndError> {
    let gens = pres.generators();
    if images.len() != gens.len() {
        return Err(LndError::RingMismatch(format!(
            "expected {} generator images, got {}",
            gens.len(),
            images.len()
        )));
    }
    let tower = pres.tower().clone();
    for img in images {
        if img.tower() != &tower {
            return Err(LndError::RingMismatch(
                "generator image has a different coefficient tower".into(),
            ));
        }
        if !img.is_constant() && img.var() != pres.var() {
            return Err(LndError::RingMismatch(format!(
                "generator image {img} is not a polynomial in {}",
                pres.var()
            )));
        }
    }

    // Closure: every image must lie in R.
    for (g, img) in gens.iter().zip(images) {
        if !s_poly_in_subalgebra(pres, img, bound)? {
            return Err(LndError::NotClosed(format!(
                "D({g}) = {img} does not lie in the subalgebra"
            )));
        }
    }

    // Rewrite the images theta-adically and solve e_i'(theta) · X = p_i.
    let theta = norm.theta.lift_to(&tower)?;
    let mut pairs = Vec::new();
    for (e, img) in norm.expressions.iter().zip(images) {
        let p = normalize::expand_in(img, &theta, &norm.theta_var)?.ok_or_else(|| {
            LndError::InconsistentExtension(format!(
                "image {img} is not a polynomial in theta = {theta}"
            ))
        })?;
        let ep = e.lift_to(&tower)?.derivative();
        assert!(!ep.is_zero(), "expressions have positive degree in characteristic zero");
        pairs.push((ep, p));
    }
    let mut x = UniPoly::zero(&tower, &norm.theta_var);
    if let Some((ep, p)) = pairs.iter().find(|(_, p)| !p.is_zero()) {
        x = p.exact_div(ep).map_err(|_| {
            LndError::InconsistentExtension(format!("{p} is not divisible by {ep}"))
        })?;
    }
    for ((ep, p), g) in pairs.iter().zip(gens) {
        if ep.mul(&x) != *p {
            return Err(LndError::InconsistentExtension(format!(
                "generator {g}: the chain rule needs ({ep}) · D(theta) = {p}, \
                 which D(theta) = {x} does not satisfy"
            )));
        }
    }

    // Nilpotency of the extension on k[theta].
    let ring_t = MPolyRing::new(&tower, &[&norm.theta_var]);
    let dprime = PolyDerivation::new(&ring_t, vec![ring_t.from_unipoly(&x)])?;
    let nb = default_nilpotency_bound(&dprime).max(bound).max(1);
    let verdict = is_locally_nilpotent(&dprime, nb);
    if input_nilpotent && !verdict.is_nilpotent() {
        return Err(LndError::NilpotencyNotTransferred(format!(
            "D(theta) = {x}: {verdict}"
        )));
    }
    Ok(NormalizationExtension { dtheta: x, verdict })
}

/// Outcome of the conductor-stability check `D(c) ⊆ c`.
#[derive(Debug, Clone, PartialEq)]
pub enum StabilityVerdict {
    /// The conductor is the unit ideal; there is nothing to check.
    VacuouslyStable,
    /// Every tested conductor element is killed by the derivation.
    KernelGenerator,
    /// Each tested conductor element `h` satisfies `D(h) = w · h`; the
    /// witnesses `w` are listed in order.
    Stable { witnesses: Vec<MPoly> },
    /// Some conductor element is mapped outside the conductor.
    Unstable { element: MPoly },
}

/// Checks that a derivation of `k[theta][x_1, ..., x_n]` maps the conductor
/// ideal of the curve algebra `R` into itself.
///
/// Preconditions verified here: the derivation must restrict to
/// `R[x_1, ..., x_n]`, which is checked on the generators (the rewritten
/// curve generators and the adjoined variables) by subduction.  For a
/// principal conductor `(theta^c)` stability is decided by exact division of
/// `D(theta^c)`; a bounded conductor approximation is checked element by
/// element.
pub fn conductor_stability(
    pres: &SubalgebraPresentation,
    norm: &NormalizationResult,
    d: &PolyDerivation,
    cond: &ConductorResult,
    bound: usize,
) -> Result<StabilityVerdict, LndError> {
    let ring = d.ring();
    let tower = ring.tower().clone();
    if &tower != pres.tower() {
        return Err(LndError::RingMismatch(
            "derivation ring and subalgebra have different coefficient towers".into(),
        ));
    }
    if ring.num_vars() == 0 || ring.vars()[0] != norm.theta_var {
        return Err(LndError::RingMismatch(format!(
            "the first variable of the derivation ring must be {}",
            norm.theta_var
        )));
    }
    let theta_s = norm.theta.lift_to(&tower)?;

    // Restriction precondition on the generators of R[x_1, ..., x_n].
    for e in &norm.expressions {
        let f = ring.from_unipoly(&e.lift_to(&tower)?);
        let df = d.apply(&f);
        if !theta_side_member(pres, &theta_s, &df, bound)? {
            return Err(LndError::NotRestricting(format!(
                "D({e}) = {df} does not lie in the subalgebra extension"
            )));
        }
    }
    for (name, img) in ring.vars().iter().zip(d.images()).skip(1) {
        if !theta_side_member(pres, &theta_s, img, bound)? {
            return Err(LndError::NotRestricting(format!(
                "D({name}) = {img} does not lie in the subalgebra extension"
            )));
        }
    }

    match cond {
        ConductorResult::Principal { exponent: 0 } => Ok(StabilityVerdict::VacuouslyStable),
        ConductorResult::Principal { exponent } => {
            let h = ring.var(&norm.theta_var).powu(*exponent as u32);
            let dh = d.apply(&h);
            if dh.is_zero() {
                return Ok(StabilityVerdict::KernelGenerator);
            }
            match dh.exact_div(&h) {
                Some(w) => Ok(StabilityVerdict::Stable { witnesses: vec![w] }),
                None => Ok(StabilityVerdict::Unstable { element: dh }),
            }
        }
        ConductorResult::Bounded { basis, .. } => {
            if basis.is_empty() {
                return Ok(StabilityVerdict::VacuouslyStable);
            }
            let mut elems = Vec::new();
            for b in basis {
                let bt = normalize::expand_in(&b.lift_to(&tower)?, &theta_s, &norm.theta_var)?
                    .ok_or_else(|| {
                        LndError::RingMismatch(format!(
                            "conductor element {b} is not a polynomial in theta"
                        ))
                    })?;
                elems.push(ring.from_unipoly(&bt));
            }
            let dhs: Vec<MPoly> = elems.iter().map(|h| d.apply(h)).collect();
            if dhs.iter().all(|dh| dh.is_zero()) {
                return Ok(StabilityVerdict::KernelGenerator);
            }
            let mut witnesses = Vec::new();
            for (h, dh) in elems.iter().zip(&dhs) {
                match dh.exact_div(h) {
                    Some(w) => witnesses.push(w),
                    None => {
                        return Ok(StabilityVerdict::Unstable {
                            element: dh.clone(),
                        })
                    }
                }
            }
            Ok(StabilityVerdict::Stable { witnesses })
        }
    }
}

/// One step of a cancellation trace: a statement together with the result
/// of re-verifying it from scratch.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub label: String,
    pub statement: String,
    pub verified: bool,
}

/// A fully re-verified obstruction trace for a derivation on `R[x_1, ..,
/// x_n]`, where `R` is a curve algebra inside `k[s]`.
#[derive(Debug, Clone)]
pub struct CancellationTrace {
    pub steps: Vec<TraceStep>,
    pub verdict: String,
    pub conductor_exponent: usize,
    /// Image of the normalization variable under the extended derivation.
    pub theta_image: MPoly,
}

impl CancellationTrace {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "steps": self
                .steps
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "label": s.label,
                        "statement": s.statement,
                        "verified": s.verified,
                    })
                })
                .collect::<Vec<_>>(),
            "verdict": self.verdict,
            "conductor_exponent": self.conductor_exponent,
            "theta_image": self.theta_image.to_string(),
        })
    }
}

/// Runs the rigidity argument for a derivation `D` of `R[x_1, ..., x_n]`
/// and records every derived equation together with its re-verification.
///
/// The ambient ring must have the curve parameter as its first variable;
/// `gen_images` lists `D` on the generators of `R` and `var_images` lists
/// `D` on the adjoined variables, all as polynomials in the ambient ring.
/// The argument proceeds: check closure, normalize `R` to `k[theta]`,
/// compute the (principal) conductor `(theta^c)`, extend `D` to the
/// normalization, certify the extension locally nilpotent, check conductor
/// stability, derive `D(theta^c) = 0`, and conclude.  When `c >= 1` the
/// conductor generator is a non-unit kernel element and `D` must vanish on
/// all of `R`; when `c = 0` the algebra is already normal and no
/// obstruction arises.  Any recorded equation that fails re-verification
/// aborts with `TraceContradiction`.
pub fn cancellation_trace(
    pres: &SubalgebraPresentation,
    ring: &MPolyRing,
    gen_images: &[MPoly],
    var_images: &[MPoly],
    bound: usize,
) -> Result<CancellationTrace, LndError> {
    let tower = pres.tower().clone();
    if ring.tower() != &tower {
        return Err(LndError::RingMismatch(
            "ambient ring and subalgebra have different coefficient towers".into(),
        ));
    }
    if ring.num_vars() == 0 || ring.vars()[0] != pres.var() {
        return Err(LndError::RingMismatch(format!(
            "the first variable of the ambient ring must be the curve parameter {}",
            pres.var()
        )));
    }
    let adjoined: Vec<String> = ring.vars()[1..].to_vec();
    if gen_images.len() != pres.generators().len() {
        return Err(LndError::RingMismatch(format!(
            "expected {} generator images, got {}",
            pres.generators().len(),
            gen_images.len()
        )));
    }
    if var_images.len() != adjoined.len() {
        return Err(LndError::RingMismatch(format!(
            "expected {} adjoined-variable images, got {}",
            adjoined.len(),
            var_images.len()
        )));
    }
    for img in gen_images.iter().chain(var_images) {
        if img.ring() != ring {
            return Err(LndError::RingMismatch(
                "derivation image lives in a different ring".into(),
            ));
        }
    }

    let ambient = if adjoined.is_empty() {
        "R".to_string()
    } else {
        format!("R[{}]", adjoined.join(", "))
    };
    let mut steps = Vec::new();

    // Closure of the derivation data in R[x_1, ..., x_n].
    for (g, img) in pres.generators().iter().zip(gen_images) {
        if !first_var_membership(pres, img, bound)? {
            return Err(LndError::NotClosed(format!(
                "D({g}) = {img} does not lie in {ambient}"
            )));
        }
    }
    for (name, img) in adjoined.iter().zip(var_images) {
        if !first_var_membership(pres, img, bound)? {
            return Err(LndError::NotClosed(format!(
                "D({name}) = {img} does not lie in {ambient}"
            )));
        }
    }
    steps.push(TraceStep {
        label: "closure".into(),
        statement: format!("every derivation image lies in {ambient}"),
        verified: true,
    });

    // Normalization of the curve algebra.
    let norm = normalize::normalize_curve(pres, bound)?;
    let tv = norm.theta_var.clone();
    let theta_s = norm.theta.lift_to(&tower)?;
    for (e, g) in norm.expressions.iter().zip(pres.generators()) {
        if e.lift_to(&tower)?.compose(&theta_s) != *g {
            return Err(LndError::TraceContradiction(format!(
                "normalization expression {e} does not reproduce the generator {g}"
            )));
        }
    }
    steps.push(TraceStep {
        label: "normalization".into(),
        statement: format!(
            "the integral closure of R is k[{tv}] with {tv} = {}",
            norm.theta
        ),
        verified: true,
    });

    // Principal conductor, re-verified by subduction on both sides of the
    // exponent.
    let cond = normalize::conductor(pres, &norm, bound)?;
    let c = match cond {
        ConductorResult::Principal { exponent } => exponent,
        ConductorResult::Bounded { .. } => return Err(LndError::ConductorInexact),
    };
    if c == 0 {
        if !s_poly_in_subalgebra(pres, &theta_s, bound)? {
            return Err(LndError::TraceContradiction(format!(
                "the conductor is the unit ideal, yet {tv} = {theta_s} is not in R"
            )));
        }
    } else {
        let below = theta_s.pow(c - 1);
        if s_poly_in_subalgebra(pres, &below, bound)? {
            return Err(LndError::TraceContradiction(format!(
                "{tv}^{} lies in R, so the conductor exponent {c} is not minimal",
                c - 1
            )));
        }
        for j in 0..=3usize {
            let above = theta_s.pow(c + j);
            if !s_poly_in_subalgebra(pres, &above, bound)? {
                return Err(LndError::TraceContradiction(format!(
                    "{tv}^{} does not lie in R, contradicting the conductor exponent {c}",
                    c + j
                )));
            }
        }
    }
    steps.push(TraceStep {
        label: "conductor".into(),
        statement: if c == 0 {
            format!("the conductor of R in k[{tv}] is the unit ideal")
        } else {
            format!("the conductor of R in k[{tv}] is generated by {tv}^{c}")
        },
        verified: true,
    });

    // Extend the derivation to k[theta][x_1, ..., x_n].
    let mut tvars: Vec<&str> = vec![tv.as_str()];
    for v in &adjoined {
        if *v == tv {
            return Err(LndError::RingMismatch(format!(
                "adjoined variable name collides with the normalization variable {tv}"
            )));
        }
        tvars.push(v.as_str());
    }
    let ring_t = MPolyRing::new(&tower, &tvars);
    let gen_t: Vec<MPoly> = gen_images
        .iter()
        .map(|f| rewrite_first_var(f, &theta_s, &ring_t))
        .collect::<Result<_, _>>()?;
    let var_t: Vec<MPoly> = var_images
        .iter()
        .map(|f| rewrite_first_var(f, &theta_s, &ring_t))
        .collect::<Result<_, _>>()?;
    let exprs_t: Vec<UniPoly> = norm
        .expressions
        .iter()
        .map(|e| e.lift_to(&tower))
        .collect::<Result<_, _>>()?;
    let mut x = ring_t.zero();
    if let Some(i) = gen_t.iter().position(|p| !p.is_zero()) {
        let ep = ring_t.from_unipoly(&exprs_t[i].derivative());
        x = gen_t[i].exact_div(&ep).ok_or_else(|| {
            LndError::InconsistentExtension(format!(
                "D({}) rewritten in {tv} is not divisible by {ep}",
                pres.generators()[i]
            ))
        })?;
    }
    for ((p, e), g) in gen_t.iter().zip(&exprs_t).zip(pres.generators()) {
        let ep = ring_t.from_unipoly(&e.derivative());
        if ep.mul(&x) != *p {
            return Err(LndError::InconsistentExtension(format!(
                "generator {g}: the chain rule needs ({ep}) · D({tv}) = {p}, \
                 which D({tv}) = {x} does not satisfy"
            )));
        }
    }
    steps.push(TraceStep {
        label: "extension".into(),
        statement: format!(
            "the derivation extends to k[{tv}]{} with D({tv}) = {x}",
            if adjoined.is_empty() {
                String::new()
            } else {
                format!("[{}]", adjoined.join(", "))
            }
        ),
        verified: true,
    });

    // Nilpotency of the extension.
    let mut images_t = vec![x.clone()];
    images_t.extend(var_t.iter().cloned());
    let dprime = PolyDerivation::new(&ring_t, images_t)?;
    let nb = default_nilpotency_bound(&dprime).max(bound).max(1);
    let verdict = is_locally_nilpotent(&dprime, nb);
    let NilpotencyVerdict::ProvenNilpotent { indices } = &verdict else {
        return Err(LndError::NotNilpotent(verdict.to_string()));
    };
    let index_list: Vec<String> = indices.iter().map(|(v, i)| format!("{v}: {i}")).collect();
    steps.push(TraceStep {
        label: "nilpotency".into(),
        statement: format!(
            "the extended derivation is locally nilpotent ({})",
            index_list.join(", ")
        ),
        verified: true,
    });

    if c == 0 {
        steps.push(TraceStep {
            label: "conclusion".into(),
            statement: format!(
                "the conductor is trivial, so R = k[{tv}] is normal and no obstruction arises"
            ),
            verified: true,
        });
        return Ok(CancellationTrace {
            steps,
            verdict: "h lies in k*; R is normal, no obstruction".into(),
            conductor_exponent: 0,
            theta_image: x,
        });
    }

    // Conductor stability: D(theta^c) must be a multiple of theta^c.
    let h = ring_t.var(&tv).powu(c as u32);
    let dh = dprime.apply(&h);
    let w = dh.exact_div(&h).ok_or_else(|| {
        LndError::TraceContradiction(format!(
            "D({tv}^{c}) = {dh} is not a multiple of {tv}^{c}, \
             yet a derivation preserving R and its normalization must preserve the conductor"
        ))
    })?;
    if w.mul(&h) != dh {
        return Err(LndError::TraceContradiction(
            "stability witness fails re-verification".into(),
        ));
    }
    steps.push(TraceStep {
        label: "stability".into(),
        statement: format!("D({tv}^{c}) = ({w}) · {tv}^{c}"),
        verified: true,
    });

    // The divisibility forces D(h) = 0 for a locally nilpotent derivation.
    if !dh.is_zero() {
        return Err(LndError::TraceContradiction(format!(
            "a locally nilpotent derivation with D(h) in (h) must satisfy D(h) = 0, \
             but D({tv}^{c}) = {dh}"
        )));
    }
    steps.push(TraceStep {
        label: "kernel-equation".into(),
        statement: format!("D({tv}^{c}) = 0"),
        verified: true,
    });

    // Conclusion: with h a non-unit kernel element, D vanishes on R.
    for (g, p) in pres.generators().iter().zip(&gen_t) {
        if !p.is_zero() {
            return Err(LndError::TraceContradiction(format!(
                "D must vanish on R, but D({g}) = {p}"
            )));
        }
    }
    steps.push(TraceStep {
        label: "conclusion".into(),
        statement: format!(
            "h = {tv}^{c} is a non-unit kernel element, so D vanishes on R: \
             every generator is killed"
        ),
        verified: true,
    });
    Ok(CancellationTrace {
        steps,
        verdict: "D kills R".into(),
        conductor_exponent: c,
        theta_image: x,
    })
}

/// Intersection of the kernels of the given derivations, computed degree by
/// degree up to total degree `bound`.
///
/// This is a bounded lower-bound computation: the returned polynomials span
/// exactly the common kernel within the finite-dimensional space of
/// polynomials of total degree at most `bound`.  An empty derivation list
/// yields the full monomial basis of that space.
pub fn ml_intersection(
    derivations: &[PolyDerivation],
    ring: &MPolyRing,
    bound: usize,
) -> Result<Vec<MPoly>, LndError> {
    for d in derivations {
        if d.ring() != ring {
            return Err(LndError::RingMismatch(
                "all derivations must live on the given ring".into(),
            ));
        }
    }
    let n = ring.num_vars();
    let tower = ring.tower().clone();
    let weights = vec![1usize; n];
    let mut monos: Vec<(usize, Vec<u32>)> = Vec::new();
    crate::graded::enumerate_weighted_tuples(&weights, bound, &mut monos);
    if derivations.is_empty() {
        return Ok(monos
            .iter()
            .map(|(_, t)| ring.monomial(t, tower.one()))
            .collect());
    }

    let imgmax = derivations
        .iter()
        .flat_map(|d| d.images())
        .filter_map(|f| f.total_degree())
        .max()
        .unwrap_or(0);
    let ibound = bound.saturating_sub(1) + imgmax;
    let mut imonos: Vec<(usize, Vec<u32>)> = Vec::new();
    crate::graded::enumerate_weighted_tuples(&weights, ibound, &mut imonos);
    let index: BTreeMap<Vec<u32>, usize> = imonos
        .into_iter()
        .enumerate()
        .map(|(i, (_, t))| (t, i))
        .collect();
    let width = index.len();

    let mut ech: Echelon<Combination> = Echelon::new(width * derivations.len());
    let mut kernel = Vec::new();
    for (j, (_, t)) in monos.iter().enumerate() {
        let m = ring.monomial(t, tower.one());
        let mut vec = vec![tower.zero(); width * derivations.len()];
        for (bi, d) in derivations.iter().enumerate() {
            let dm = d.apply(&m);
            for (e, c) in dm.terms() {
                let pos = *index.get(e).expect("image monomial within the degree bound");
                vec[bi * width + pos] = c.clone();
            }
        }
        let mut unit = Combination::new();
        unit.insert(j, tower.one());
        if let Insertion::Dependent(rel) = ech.insert(vec, unit) {
            let mut elem = ring.zero();
            for (idx, coeff) in &rel {
                elem = elem.add(&ring.monomial(&monos[*idx].1, coeff.clone()));
            }
            kernel.push(elem);
        }
    }
    Ok(kernel)
}

/// Splits a multivariate polynomial into groups sharing the exponents of
/// all variables except the first; each group becomes a univariate
/// polynomial in the first variable.
fn split_by_first_var(f: &MPoly) -> Vec<(Vec<u32>, UniPoly)> {
    let ring = f.ring();
    let tower = ring.tower().clone();
    let var0 = ring.vars()[0].clone();
    let mut groups: BTreeMap<Vec<u32>, BTreeMap<u32, FieldElement>> = BTreeMap::new();
    for (exps, c) in f.terms() {
        let mut rest = exps.clone();
        let e0 = rest[0];
        rest[0] = 0;
        groups.entry(rest).or_default().insert(e0, c.clone());
    }
    groups
        .into_iter()
        .map(|(rest, coeffs)| {
            let deg = *coeffs.keys().next_back().expect("nonempty group") as usize;
            let mut v = vec![tower.zero(); deg + 1];
            for (e, c) in coeffs {
                v[e as usize] = c;
            }
            (rest, UniPoly::from_coeffs(&tower, &var0, v))
        })
        .collect()
}

/// Membership of a univariate polynomial (in the curve parameter) in the
/// presented subalgebra; constants are members exactly when they lie in the
/// coefficient field.
fn s_poly_in_subalgebra(
    pres: &SubalgebraPresentation,
    f: &UniPoly,
    bound: usize,
) -> Result<bool, LndError> {
    if f.is_zero() {
        return Ok(true);
    }
    if f.is_constant() {
        return Ok(f.coefficient(0).restrict_to(pres.coefficient_field()).is_ok());
    }
    let deg = f.degree().unwrap_or(0);
    Ok(pres.subduct(f, bound.max(deg))?.is_member())
}

/// Membership of `f` in `R[x_1, ..., x_n]` where the ambient first variable
/// is the curve parameter: every first-variable coefficient must lie in `R`.
fn first_var_membership(
    pres: &SubalgebraPresentation,
    f: &MPoly,
    bound: usize,
) -> Result<bool, LndError> {
    for (_, c) in split_by_first_var(f) {
        if !s_poly_in_subalgebra(pres, &c, bound)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Membership in `R[x_1, ..., x_n]` for a polynomial whose first variable
/// is the normalization variable: coefficients are composed with `theta`
/// back into the curve parameter before subduction.
fn theta_side_member(
    pres: &SubalgebraPresentation,
    theta_s: &UniPoly,
    f: &MPoly,
    bound: usize,
) -> Result<bool, LndError> {
    for (_, c) in split_by_first_var(f) {
        let cs = c.compose(theta_s);
        if !s_poly_in_subalgebra(pres, &cs, bound)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rewrites `f`, whose first variable is the curve parameter, as an element
/// of `target`, whose first variable is the normalization variable; every
/// first-variable coefficient must be a polynomial in `theta`.
fn rewrite_first_var(
    f: &MPoly,
    theta: &UniPoly,
    target: &MPolyRing,
) -> Result<MPoly, LndError> {
    let theta_name = target.vars()[0].clone();
    let mut acc = target.zero();
    for (rest, c) in split_by_first_var(f) {
        let digits = normalize::expand_in(&c, theta, &theta_name)?.ok_or_else(|| {
            LndError::InconsistentExtension(format!(
                "{c} is not a polynomial in theta = {theta}"
            ))
        })?;
        for (i, d) in digits.coefficients().iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            let mut exps = rest.clone();
            exps[0] = i as u32;
            acc = acc.add(&target.monomial(&exps, d.clone()));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldTower;
    use crate::intutil::splitmix64;

    fn q() -> FieldTower {
        FieldTower::rationals()
    }

    fn ring_xy() -> MPolyRing {
        MPolyRing::new(&q(), &["x", "y"])
    }

    fn upoly(var: &str, coeffs: &[i64]) -> UniPoly {
        let t = q();
        UniPoly::from_coeffs(&t, var, coeffs.iter().map(|c| t.from_integer(*c)).collect())
    }

    fn cusp_pres() -> SubalgebraPresentation {
        SubalgebraPresentation::new(&q(), "s", vec![upoly("s", &[0, 0, 1]), upoly("s", &[0, 0, 0, 1])])
            .unwrap()
    }

    fn line_pres() -> SubalgebraPresentation {
        SubalgebraPresentation::new(&q(), "s", vec![upoly("s", &[0, 1])]).unwrap()
    }

    fn random_poly(ring: &MPolyRing, state: &mut u64, deg: u32) -> MPoly {
        let t = ring.tower().clone();
        let mut acc = ring.zero();
        for a in 0..=deg {
            for b in 0..=(deg - a) {
                let c = (splitmix64(state) % 7) as i64 - 3;
                if c != 0 {
                    acc = acc.add(&ring.monomial(&[a, b], t.from_integer(c)));
                }
            }
        }
        acc
    }

    #[test]
    fn test_leibniz_rule_on_random_pairs() {
        let r = ring_xy();
        let y2 = r.var("y").powu(2);
        let d = PolyDerivation::new(&r, vec![y2, r.one()]).unwrap();
        let mut state = 0x1dd5_u64;
        for _ in 0..10 {
            let f = random_poly(&r, &mut state, 3);
            let g = random_poly(&r, &mut state, 3);
            let lhs = d.apply(&f.mul(&g));
            let rhs = f.mul(&d.apply(&g)).add(&g.mul(&d.apply(&f)));
            assert!(lhs == rhs, "Leibniz rule failed");
        }
    }

    #[test]
    fn test_triangular_derivation_is_nilpotent() {
        let r = ring_xy();
        // D = x ∂/∂y
        let d = PolyDerivation::new(&r, vec![r.zero(), r.var("x")]).unwrap();
        let v = is_locally_nilpotent(&d, 3);
        assert_eq!(
            v,
            NilpotencyVerdict::ProvenNilpotent {
                indices: vec![("x".into(), 1), ("y".into(), 2)]
            }
        );
    }

    #[test]
    fn test_eigen_monomial_blocks_nilpotency() {
        let r = ring_xy();
        let d = PolyDerivation::new(&r, vec![r.zero(), r.var("y")]).unwrap();
        assert!(matches!(
            is_locally_nilpotent(&d, 10),
            NilpotencyVerdict::ProvenNot { .. }
        ));
        let cube = r.var("x").powu(3).scale(&q().from_integer(2));
        let d2 = PolyDerivation::new(&r, vec![cube, r.zero()]).unwrap();
        assert!(matches!(
            is_locally_nilpotent(&d2, 10),
            NilpotencyVerdict::ProvenNot { .. }
        ));
    }

    #[test]
    fn test_second_order_nilpotent_derivation() {
        let r = ring_xy();
        // D = y² ∂/∂x + ∂/∂y
        let d = PolyDerivation::new(&r, vec![r.var("y").powu(2), r.one()]).unwrap();
        let v = is_locally_nilpotent(&d, 4);
        assert_eq!(
            v,
            NilpotencyVerdict::ProvenNilpotent {
                indices: vec![("x".into(), 4), ("y".into(), 2)]
            }
        );
        assert_eq!(default_nilpotency_bound(&d), 8);
    }

    #[test]
    fn test_rotation_derivation_is_undetermined() {
        let r = ring_xy();
        // D(x) = y, D(y) = x: orbits cycle without an eigen-monomial witness.
        let d = PolyDerivation::new(&r, vec![r.var("y"), r.var("x")]).unwrap();
        assert_eq!(
            is_locally_nilpotent(&d, 5),
            NilpotencyVerdict::UnknownAtBound { bound: 5 }
        );
    }

    #[test]
    fn test_slice_rejects_bad_candidates() {
        let r = ring_xy();
        let d = PolyDerivation::new(&r, vec![r.zero(), r.var("x")]).unwrap();
        // D(x) = 0: not a slice.
        assert!(matches!(
            SliceData::new(&d, &r.var("x")),
            Err(LndError::InvalidSlice(_))
        ));
        // D = y²∂x + ∂y with s = x: D(s) = y², D²(s) = 2y ≠ 0.
        let d2 = PolyDerivation::new(&r, vec![r.var("y").powu(2), r.one()]).unwrap();
        assert!(matches!(
            SliceData::new(&d2, &r.var("x")),
            Err(LndError::InvalidSlice(_))
        ));
    }

    #[test]
    fn test_slice_expansion_examples() {
        let r = ring_xy();
        let d = PolyDerivation::new(&r, vec![r.zero(), r.var("x")]).unwrap();
        let sl = SliceData::new(&d, &r.var("y")).unwrap();

        // b = y²: a₂ = 1.
        let e = slice_expansion(&d, &sl, &r.var("y").powu(2), 10).unwrap();
        assert_eq!(e.len(), 3);
        assert!(e[0].numerator.is_zero() && e[1].numerator.is_zero());
        assert!(e[2].numerator == r.one() && e[2].denominator_power == 0);

        // b = x: a₀ = x.
        let e = slice_expansion(&d, &sl, &r.var("x"), 10).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e[0].numerator == r.var("x") && e[0].denominator_power == 0);

        // b = xy + y: a₀ = 0, a₁ = x + 1.
        let b = r.var("x").mul(&r.var("y")).add(&r.var("y"));
        let e = slice_expansion(&d, &sl, &b, 10).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e[0].numerator.is_zero());
        assert!(e[1].numerator == r.var("x").add(&r.one()));
        assert_eq!(e[1].denominator_power, 0);
    }

    #[test]
    fn test_slice_expansion_with_denominator() {
        let t = q();
        let r = MPolyRing::new(&t, &["x", "y", "z"]);
        // D = x ∂/∂y + y ∂/∂z, slice s = y with D(s) = x.
        let d = PolyDerivation::new(&r, vec![r.zero(), r.var("x"), r.var("y")]).unwrap();
        let sl = SliceData::new(&d, &r.var("y")).unwrap();
        let e = slice_expansion(&d, &sl, &r.var("z"), 10).unwrap();
        assert_eq!(e.len(), 3);
        // z = (z - y²/(2x)) + (1/(2x)) y²
        let half = t.one().div(&t.from_integer(2)).unwrap();
        let expected_a0 = r
            .var("x")
            .mul(&r.var("z"))
            .sub(&r.var("y").powu(2).scale(&half));
        assert!(e[0].numerator == expected_a0 && e[0].denominator_power == 1);
        assert!(e[1].numerator.is_zero());
        assert!(e[2].numerator == r.constant(half) && e[2].denominator_power == 1);
        assert!(!e[2].is_polynomial());
    }

    #[test]
    fn test_slice_expansion_reconstructs_random_inputs() {
        let r = ring_xy();
        let d = PolyDerivation::new(&r, vec![r.zero(), r.var("x")]).unwrap();
        let sl = SliceData::new(&d, &r.var("y")).unwrap();
        let mut state = 0xab54_u64;
        for _ in 0..20 {
            let b = random_poly(&r, &mut state, 5);
            let e = slice_expansion(&d, &sl, &b, 30).unwrap();
            // Re-verify the expansion independently of the internal checks.
            let m = e.iter().map(|c| c.denominator_power).max().unwrap_or(0);
            let mut lhs = r.zero();
            for (i, c) in e.iter().enumerate() {
                assert!(d.apply(&c.numerator).is_zero());
                lhs = lhs.add(
                    &c.numerator
                        .mul(&sl.ds().powu(m - c.denominator_power))
                        .mul(&sl.slice().powu(i as u32)),
                );
            }
            assert!(lhs == b.mul(&sl.ds().powu(m)));
        }
    }

    #[test]
    fn test_derivative_divisibility_check() {
        let r = ring_xy();
        let d = PolyDerivation::new(&r, vec![r.zero(), r.var("x")]).unwrap();
        // D(x) = 0.
        assert_eq!(
            df_in_fb_check(&d, &r.var("x")),
            DivisibilityConclusion::DerivativeVanishes
        );
        // D(y) = x is not divisible by y.
        assert!(matches!(
            df_in_fb_check(&d, &r.var("y")),
            DivisibilityConclusion::NotDivisible { .. }
        ));
        // D = y²∂x + ∂y: D(y) = 1 is not divisible by y.
        let d2 = PolyDerivation::new(&r, vec![r.var("y").powu(2), r.one()]).unwrap();
        assert!(matches!(
            df_in_fb_check(&d2, &r.var("y")),
            DivisibilityConclusion::NotDivisible { .. }
        ));
        // D(y) = y divides itself with nonzero quotient: inconsistent with
        // local nilpotency.
        let d3 = PolyDerivation::new(&r, vec![r.zero(), r.var("y")]).unwrap();
        match df_in_fb_check(&d3, &r.var("y")) {
            DivisibilityConclusion::Inconsistent { quotient } => assert!(quotient == r.one()),
            other => panic!("expected Inconsistent, got {other:?}"),
        }
    }

    #[test]
    fn test_extension_of_euler_derivation_on_cusp() {
        let pres = cusp_pres();
        let norm = normalize::normalize_curve(&pres, 12).unwrap();
        // D(s²) = 2s², D(s³) = 3s³ extends to D(theta) = theta, which is not
        // nilpotent.
        let images = vec![
            upoly("s", &[0, 0, 2]),
            upoly("s", &[0, 0, 0, 3]),
        ];
        let ext = extend_to_normalization(&pres, &images, &norm, 12, false).unwrap();
        assert_eq!(ext.dtheta, upoly("theta", &[0, 1]));
        assert!(matches!(ext.verdict, NilpotencyVerdict::ProvenNot { .. }));
        // Declaring the input nilpotent must then fail.
        assert!(matches!(
            extend_to_normalization(&pres, &images, &norm, 12, true),
            Err(LndError::NilpotencyNotTransferred(_))
        ));
    }

    #[test]
    fn test_extension_of_translation_on_line() {
        let pres = line_pres();
        let norm = normalize::normalize_curve(&pres, 8).unwrap();
        // D(s) = 1 extends to d/dtheta.
        let ext =
            extend_to_normalization(&pres, &[upoly("s", &[1])], &norm, 8, true).unwrap();
        assert_eq!(ext.dtheta, upoly("theta", &[1]));
        assert_eq!(
            ext.verdict,
            NilpotencyVerdict::ProvenNilpotent {
                indices: vec![("theta".into(), 2)]
            }
        );
    }

    #[test]
    fn test_extension_of_zero_derivation() {
        let pres = cusp_pres();
        let norm = normalize::normalize_curve(&pres, 12).unwrap();
        let zero = UniPoly::zero(&q(), "s");
        let ext =
            extend_to_normalization(&pres, &[zero.clone(), zero], &norm, 12, true).unwrap();
        assert!(ext.dtheta.is_zero());
        assert!(ext.verdict.is_nilpotent());
    }

    #[test]
    fn test_extension_rejects_inconsistent_images() {
        let pres = cusp_pres();
        let norm = normalize::normalize_curve(&pres, 12).unwrap();
        // D(s²) = s³ forces D(theta) = theta²/2, but D(s³) = 0 contradicts it.
        let images = vec![upoly("s", &[0, 0, 0, 1]), UniPoly::zero(&q(), "s")];
        assert!(matches!(
            extend_to_normalization(&pres, &images, &norm, 12, false),
            Err(LndError::InconsistentExtension(_))
        ));
    }

    #[test]
    fn test_extension_rejects_images_outside_subalgebra() {
        let pres = cusp_pres();
        let norm = normalize::normalize_curve(&pres, 12).unwrap();
        let images = vec![upoly("s", &[0, 1]), UniPoly::zero(&q(), "s")];
        assert!(matches!(
            extend_to_normalization(&pres, &images, &norm, 12, false),
            Err(LndError::NotClosed(_))
        ));
    }

    #[test]
    fn test_conductor_stability_for_translation() {
        let pres = cusp_pres();
        let norm = normalize::normalize_curve(&pres, 12).unwrap();
        let cond = normalize::conductor(&pres, &norm, 12).unwrap();
        let r = MPolyRing::new(&q(), &["theta", "x"]);
        // D = ∂/∂x kills theta, so the conductor generator is a kernel element.
        let d = PolyDerivation::new(&r, vec![r.zero(), r.one()]).unwrap();
        assert_eq!(
            conductor_stability(&pres, &norm, &d, &cond, 12).unwrap(),
            StabilityVerdict::KernelGenerator
        );
    }

    #[test]
    fn test_conductor_stability_vacuous_for_normal_input() {
        let pres = line_pres();
        let norm = normalize::normalize_curve(&pres, 8).unwrap();
        let cond = normalize::conductor(&pres, &norm, 8).unwrap();
        let r = MPolyRing::new(&q(), &["theta", "x"]);
        let d = PolyDerivation::new(&r, vec![r.zero(), r.one()]).unwrap();
        assert_eq!(
            conductor_stability(&pres, &norm, &d, &cond, 8).unwrap(),
            StabilityVerdict::VacuouslyStable
        );
    }

    #[test]
    fn test_conductor_stability_witness_for_euler_derivation() {
        let pres = cusp_pres();
        let norm = normalize::normalize_curve(&pres, 12).unwrap();
        let cond = normalize::conductor(&pres, &norm, 12).unwrap();
        let r = MPolyRing::new(&q(), &["theta"]);
        // D(theta) = theta restricts to R and scales theta² by 2.
        let d = PolyDerivation::new(&r, vec![r.var("theta")]).unwrap();
        match conductor_stability(&pres, &norm, &d, &cond, 12).unwrap() {
            StabilityVerdict::Stable { witnesses } => {
                assert_eq!(witnesses.len(), 1);
                assert!(witnesses[0] == r.constant(q().from_integer(2)));
            }
            other => panic!("expected Stable, got {other:?}"),
        }
    }

    #[test]
    fn test_conductor_stability_requires_restriction() {
        let pres = cusp_pres();
        let norm = normalize::normalize_curve(&pres, 12).unwrap();
        let cond = normalize::conductor(&pres, &norm, 12).unwrap();
        let r = MPolyRing::new(&q(), &["theta"]);
        // D(theta) = 1 sends theta² to 2·theta, which leaves R.
        let d = PolyDerivation::new(&r, vec![r.one()]).unwrap();
        assert!(matches!(
            conductor_stability(&pres, &norm, &d, &cond, 12),
            Err(LndError::NotRestricting(_))
        ));
    }

    #[test]
    fn test_conductor_stability_on_bounded_basis() {
        let t = q();
        // R = k[s², s⁵ + s³] has a non-monomial presentation, so the
        // conductor is only available as a bounded approximation.
        let pres = SubalgebraPresentation::new(
            &t,
            "s",
            vec![upoly("s", &[0, 0, 1]), upoly("s", &[0, 0, 0, 1, 0, 1])],
        )
        .unwrap();
        let norm = normalize::normalize_curve(&pres, 12).unwrap();
        let cond = normalize::conductor(&pres, &norm, 12).unwrap();
        assert!(!cond.is_exact());
        let r = MPolyRing::new(&t, &["theta"]);
        let d = PolyDerivation::zero(&r);
        assert_eq!(
            conductor_stability(&pres, &norm, &d, &cond, 12).unwrap(),
            StabilityVerdict::KernelGenerator
        );
    }

    #[test]
    fn test_cancellation_trace_on_cusp() {
        let pres = cusp_pres();
        let r = MPolyRing::new(&q(), &["s", "x"]);
        // D = ∂/∂x on R[x].
        let trace =
            cancellation_trace(&pres, &r, &[r.zero(), r.zero()], &[r.one()], 12).unwrap();
        assert_eq!(trace.verdict, "D kills R");
        assert_eq!(trace.conductor_exponent, 2);
        assert!(trace.theta_image.is_zero());
        let labels: Vec<&str> = trace.steps.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(
            labels,
            vec![
                "closure",
                "normalization",
                "conductor",
                "extension",
                "nilpotency",
                "stability",
                "kernel-equation",
                "conclusion"
            ]
        );
        assert!(trace.steps.iter().all(|s| s.verified));
    }

    #[test]
    fn test_cancellation_trace_on_normal_curve() {
        let pres = line_pres();
        let r = MPolyRing::new(&q(), &["s", "x"]);
        let trace = cancellation_trace(&pres, &r, &[r.zero()], &[r.one()], 8).unwrap();
        assert_eq!(trace.verdict, "h lies in k*; R is normal, no obstruction");
        assert_eq!(trace.conductor_exponent, 0);
        let labels: Vec<&str> = trace.steps.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(
            labels,
            vec![
                "closure",
                "normalization",
                "conductor",
                "extension",
                "nilpotency",
                "conclusion"
            ]
        );
    }

    #[test]
    fn test_cancellation_trace_with_curve_valued_image() {
        let pres = cusp_pres();
        let r = MPolyRing::new(&q(), &["s", "x"]);
        // D(x) = s², D = 0 on R.
        let s2 = r.var("s").powu(2);
        let trace = cancellation_trace(&pres, &r, &[r.zero(), r.zero()], &[s2], 12).unwrap();
        assert_eq!(trace.verdict, "D kills R");
        assert_eq!(trace.conductor_exponent, 2);
        assert!(trace.steps.iter().all(|s| s.verified));
    }

    #[test]
    fn test_cancellation_trace_rejects_unclosed_images() {
        let pres = cusp_pres();
        let r = MPolyRing::new(&q(), &["s", "x"]);
        // D(x) = s does not lie in R[x].
        assert!(matches!(
            cancellation_trace(&pres, &r, &[r.zero(), r.zero()], &[r.var("s")], 12),
            Err(LndError::NotClosed(_))
        ));
    }

    #[test]
    fn test_cancellation_trace_requires_exact_conductor() {
        let t = q();
        let pres = SubalgebraPresentation::new(
            &t,
            "s",
            vec![upoly("s", &[0, 0, 1]), upoly("s", &[0, 0, 0, 1, 0, 1])],
        )
        .unwrap();
        let r = MPolyRing::new(&t, &["s", "x"]);
        assert!(matches!(
            cancellation_trace(&pres, &r, &[r.zero(), r.zero()], &[r.one()], 12),
            Err(LndError::ConductorInexact)
        ));
    }

    #[test]
    fn test_trace_json_shape() {
        let pres = cusp_pres();
        let r = MPolyRing::new(&q(), &["s", "x"]);
        let trace =
            cancellation_trace(&pres, &r, &[r.zero(), r.zero()], &[r.one()], 12).unwrap();
        let json = trace.to_json();
        assert_eq!(json["verdict"], "D kills R");
        assert_eq!(json["conductor_exponent"], 2);
        assert_eq!(json["theta_image"], "0");
        let steps = json["steps"].as_array().unwrap();
        assert_eq!(steps.len(), 8);
        assert_eq!(steps[0]["label"], "closure");
        assert!(steps.iter().all(|s| s["verified"] == true));
    }

    #[test]
    fn test_kernel_intersection_of_triangular_derivation() {
        let r = ring_xy();
        let d = PolyDerivation::new(&r, vec![r.zero(), r.var("x")]).unwrap();
        let basis = ml_intersection(&[d], &r, 3).unwrap();
        let expected = vec![
            r.one(),
            r.var("x"),
            r.var("x").powu(2),
            r.var("x").powu(3),
        ];
        assert_eq!(basis, expected);
    }

    #[test]
    fn test_kernel_intersection_of_two_derivations() {
        let r = ring_xy();
        let d1 = PolyDerivation::new(&r, vec![r.zero(), r.var("x")]).unwrap();
        let d2 = PolyDerivation::new(&r, vec![r.var("y"), r.zero()]).unwrap();
        let basis = ml_intersection(&[d1, d2], &r, 2).unwrap();
        assert_eq!(basis, vec![r.one()]);
    }

    #[test]
    fn test_kernel_intersection_with_no_derivations() {
        let r = ring_xy();
        let basis = ml_intersection(&[], &r, 2).unwrap();
        assert_eq!(basis.len(), 6);
        assert!(basis.contains(&r.one()));
        assert!(basis.contains(&r.var("x").mul(&r.var("y"))));
    }
}
