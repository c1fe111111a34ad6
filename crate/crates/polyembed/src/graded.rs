//! Degree filtrations of finitely generated subalgebras of `K[s]`.
//!
//! A [`SubalgebraPresentation`] fixes an ambient polynomial ring `K[s]`,
//! a coefficient field `k` (a prefix of the tower `K`), and a finite set
//! of generators. [`SubalgebraPresentation::filtration_basis`] expands
//! every monomial in the generators up to a degree bound and row-reduces
//! the result over `k`, giving per-degree bases, leading-coefficient
//! spaces, and the relations among monomials. On top of that sit
//! [`SubalgebraPresentation::subduct`] (leading-term rewriting, the
//! bounded membership test), [`SubalgebraPresentation::degree_data`]
//! (the realized degree semigroup), and
//! [`SubalgebraPresentation::sagbi_complete`] (leading-term completion).
//!
//! Coordinates of tower elements over `k` are power products of the
//! tower generators above `k`; when a transcendental generator sits
//! above `k`, all denominators in that generator are cleared by one
//! common denominator per table, and the power of the transcendental
//! generator is capped (the cap is part of the table and reported by
//! callers that emit certificates).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fields::{FieldElement, FieldError, FieldTower};
use crate::linalg::{Combine, Echelon, Insertion};
use crate::semigroup::{NumericalSemigroup, SemigroupError};
use crate::unipoly::{PolyError, UniPoly};

/// Default cap on the number of generator monomials in one table.
const DEFAULT_MONOMIAL_LIMIT: usize = 50_000;
/// Cap on the size of the absorbed-constant basis (the multipliers).
const MULTIPLIER_BASIS_CAP: usize = 64;
/// Cap on how many degree-zero generators may be absorbed.
const MULTIPLIER_COUNT_CAP: usize = 4;
/// Cap on the algebraic degree searched for one absorbed constant.
const MULTIPLIER_DEGREE_CAP: usize = 16;
/// Transcendental-degree cap used while absorbing constants.
const ABSORB_U_CAP: usize = 256;
/// Safety limit on completion passes.
const SAGBI_ITERATION_LIMIT: usize = 1000;

#[derive(Debug, Error)]
pub enum GradedError {
    #[error("field arithmetic error: {0}")]
    Field(#[from] FieldError),
    #[error("polynomial arithmetic error: {0}")]
    Poly(#[from] PolyError),
    #[error("semigroup error: {0}")]
    Semigroup(#[from] SemigroupError),
    #[error("the coefficient field is not a prefix of the ambient tower")]
    CoefficientFieldNotPrefix,
    #[error("generator variable {found:?} does not match the ambient variable {expected:?}")]
    VariableMismatch { expected: String, found: String },
    #[error("zero generator is not allowed")]
    ZeroGenerator,
    #[error("no generator has positive degree")]
    NoPositiveDegree,
    #[error("coordinate in the transcendental generator needs power {needed}, cap is {cap}")]
    BoundTooLarge { needed: usize, cap: usize },
    #[error("monomial enumeration needs {needed} monomials, limit is {limit}")]
    MonomialLimit { needed: usize, limit: usize },
    #[error("a degree-zero generator is not algebraic over the coefficient field within the search cap")]
    MultiplierNotAlgebraic,
    #[error("the absorbed-constant basis exceeds its cap")]
    MultiplierCapExceeded,
    #[error("a denominator is not cleared by the table's common denominator")]
    DenominatorNotCleared,
    #[error("leading-term completion did not stabilize within {SAGBI_ITERATION_LIMIT} passes")]
    IterationLimit,
}

// ---------------------------------------------------------------------------
// Coordinates of tower elements over the coefficient field
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct StepInfo {
    transcendental: bool,
    /// The tower including this step.
    tower: FieldTower,
}

/// Coordinate system for the tower `K` viewed as a `k`-vector space.
///
/// Labels are one exponent per tower step above `k` (bottom-up). All
/// elements that will be extracted must be announced via [`note`] first
/// so that the common denominator in the transcendental generator is
/// known; after that, [`extract`] is `k`-linear and injective.
///
/// [`note`]: CoordContext::note
/// [`extract`]: CoordContext::extract
pub(crate) struct CoordContext {
    k: FieldTower,
    steps: Vec<StepInfo>,
    u_cap: usize,
    den: Option<UniPoly>,
}

impl CoordContext {
    pub fn new(k: &FieldTower, tower: &FieldTower, u_cap: usize) -> Result<Self, GradedError> {
        let mut steps = Vec::new();
        let mut cur = tower.clone();
        while cur != *k {
            let below = match cur.below() {
                Some(b) => b.clone(),
                None => return Err(GradedError::CoefficientFieldNotPrefix),
            };
            steps.push(StepInfo { transcendental: cur.top_is_transcendental(), tower: cur });
            cur = below;
        }
        steps.reverse();
        Ok(CoordContext { k: k.clone(), steps, u_cap, den: None })
    }

    pub fn u_cap(&self) -> usize {
        self.u_cap
    }

    pub fn denominator(&self) -> Option<&UniPoly> {
        self.den.as_ref()
    }

    /// Record the denominators of `x` so that extraction can clear them.
    pub fn note(&mut self, x: &FieldElement) {
        self.note_level(x, self.steps.len());
    }

    fn note_level(&mut self, x: &FieldElement, level: usize) {
        if level == 0 || x.is_zero() {
            return;
        }
        let transcendental = self.steps[level - 1].transcendental;
        if transcendental {
            if let Some((_, den)) = x.as_frac() {
                if den.degree().unwrap_or(0) > 0 {
                    let den = den.clone();
                    self.den = Some(match self.den.take() {
                        None => den.monic(),
                        Some(cur) => {
                            let g = cur.gcd(&den);
                            cur.mul(&den.exact_div(&g).expect("gcd divides")).monic()
                        }
                    });
                }
            }
        } else if let Some(p) = x.as_ext_poly() {
            let coeffs: Vec<FieldElement> = p.coefficients().to_vec();
            for c in &coeffs {
                self.note_level(c, level - 1);
            }
        }
    }

    /// Coordinates of `x` over `k`, keyed by the label of each occurring
    /// basis monomial. The map sends `x` to the coordinates of `D·x`
    /// where `D` is the common denominator accumulated by `note`, which
    /// is `k`-linear and injective for a fixed table.
    pub fn extract(
        &self,
        x: &FieldElement,
    ) -> Result<BTreeMap<Vec<u32>, FieldElement>, GradedError> {
        let mut out = BTreeMap::new();
        let mut label = vec![0u32; self.steps.len()];
        self.extract_level(x, self.steps.len(), &mut label, &mut out)?;
        Ok(out)
    }

    fn extract_level(
        &self,
        x: &FieldElement,
        level: usize,
        label: &mut Vec<u32>,
        out: &mut BTreeMap<Vec<u32>, FieldElement>,
    ) -> Result<(), GradedError> {
        if x.is_zero() {
            return Ok(());
        }
        if level == 0 {
            debug_assert_eq!(x.tower(), &self.k);
            let prev = out.insert(label.clone(), x.clone());
            debug_assert!(prev.is_none(), "one leaf per label per element");
            return Ok(());
        }
        let info = &self.steps[level - 1];
        if info.transcendental {
            let below = info.tower.below().expect("transcendental step has a base").clone();
            let uvar = info.tower.top_name().expect("transcendental step is named").to_string();
            let (num, den) = match x.as_frac() {
                Some((n, d)) => (n.clone(), d.clone()),
                None => {
                    let r = x
                        .as_rational()
                        .expect("canonical representation at a transcendental step");
                    (UniPoly::constant(&uvar, below.from_rational(r)), UniPoly::one(&below, &uvar))
                }
            };
            let scaled = match &self.den {
                None => {
                    if !den.is_one() {
                        return Err(GradedError::DenominatorNotCleared);
                    }
                    num
                }
                Some(d_all) => {
                    let (q, r) = d_all.divmod(&den)?;
                    if !r.is_zero() {
                        return Err(GradedError::DenominatorNotCleared);
                    }
                    num.mul(&q)
                }
            };
            for (i, c) in scaled.coefficients().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if i > self.u_cap {
                    return Err(GradedError::BoundTooLarge { needed: i, cap: self.u_cap });
                }
                label[level - 1] = i as u32;
                self.extract_level(c, level - 1, label, out)?;
            }
            label[level - 1] = 0;
        } else {
            match x.as_ext_poly() {
                Some(p) => {
                    for (j, c) in p.coefficients().iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        label[level - 1] = j as u32;
                        self.extract_level(c, level - 1, label, out)?;
                    }
                    label[level - 1] = 0;
                }
                None => {
                    label[level - 1] = 0;
                    let below =
                        info.tower.below().expect("algebraic step has a base").clone();
                    let r = x
                        .as_rational()
                        .expect("canonical representation at an algebraic step");
                    let xb = below.from_rational(r);
                    self.extract_level(&xb, level - 1, label, out)?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Formal expressions in the generators
// ---------------------------------------------------------------------------

/// A formal `k`-linear combination of generator monomials
/// `μ_t · Π wᵢ^{aᵢ}`, keyed by `(t, exponent vector)`. Coefficients
/// live in the coefficient field `k` of the presentation that produced
/// the expression.
#[derive(Clone, Debug, PartialEq)]
pub struct GenExpr {
    terms: BTreeMap<(usize, Vec<u32>), FieldElement>,
}

impl GenExpr {
    pub fn zero() -> GenExpr {
        GenExpr { terms: BTreeMap::new() }
    }

    pub(crate) fn monomial(mult: usize, exponents: Vec<u32>, coeff: FieldElement) -> GenExpr {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((mult, exponents), coeff);
        }
        GenExpr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterate over `((multiplier index, exponents), coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(usize, Vec<u32>), &FieldElement)> {
        self.terms.iter()
    }

    /// `self += c · other`.
    pub fn accumulate(&mut self, other: &GenExpr, c: &FieldElement) {
        self.sub_scaled(other, &c.neg());
    }

    /// Expand the expression into the ambient polynomial ring:
    /// `Σ c · μ_t · Π gensᵢ^{aᵢ}` over the tower of the generators.
    pub fn evaluate(
        &self,
        multipliers: &[FieldElement],
        generators: &[UniPoly],
        tower: &FieldTower,
        var: &str,
    ) -> Result<UniPoly, GradedError> {
        let mut acc = UniPoly::zero(tower, var);
        for ((t, a), c) in &self.terms {
            let coeff = c.lift_to(tower)?.mul(&multipliers[*t].lift_to(tower)?);
            let mut m = UniPoly::constant(var, coeff);
            for (i, e) in a.iter().enumerate() {
                if *e > 0 {
                    m = m.mul(&generators[i].pow(*e as usize));
                }
            }
            acc = acc.add(&m);
        }
        Ok(acc)
    }
}

impl Combine for GenExpr {
    fn scale_by(&mut self, c: &FieldElement) {
        if c.is_zero() {
            self.terms.clear();
            return;
        }
        for v in self.terms.values_mut() {
            *v = v.mul(c);
        }
    }

    fn sub_scaled(&mut self, other: &Self, c: &FieldElement) {
        if c.is_zero() {
            return;
        }
        for (key, v) in &other.terms {
            let delta = v.mul(c);
            match self.terms.get_mut(key) {
                Some(cur) => {
                    *cur = cur.sub(&delta);
                    if cur.is_zero() {
                        self.terms.remove(key);
                    }
                }
                None => {
                    if !delta.is_zero() {
                        self.terms.insert(key.clone(), delta.neg());
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Presentations
// ---------------------------------------------------------------------------

/// A finitely generated subalgebra `R = k[multipliers · generators]` of
/// `K[s]`, with `k` a prefix of the tower `K`.
///
/// Degree-zero generators are absorbed at construction: each constant
/// must be algebraic over `k`, and the multipliers become a `k`-basis
/// of the algebra the constants generate, so that the `k`-span of
/// `μ_t · Π wᵢ^{aᵢ}` over all monomials is closed under products.
#[derive(Clone, Debug)]
pub struct SubalgebraPresentation {
    tower: FieldTower,
    k: FieldTower,
    var: String,
    generators: Vec<UniPoly>,
    multipliers: Vec<FieldElement>,
    monomial_limit: usize,
    u_cap_override: Option<usize>,
}

impl SubalgebraPresentation {
    /// Presentation with coefficient field equal to the full tower.
    pub fn new(
        tower: &FieldTower,
        var: &str,
        generators: Vec<UniPoly>,
    ) -> Result<Self, GradedError> {
        Self::over_coefficient_field(tower, var, generators, tower)
    }

    pub fn over_coefficient_field(
        tower: &FieldTower,
        var: &str,
        generators: Vec<UniPoly>,
        k: &FieldTower,
    ) -> Result<Self, GradedError> {
        if !k.is_prefix_of(tower) {
            return Err(GradedError::CoefficientFieldNotPrefix);
        }
        let mut positive = Vec::new();
        let mut constants = Vec::new();
        for g in generators {
            if g.is_zero() {
                return Err(GradedError::ZeroGenerator);
            }
            if !g.is_constant() && g.var() != var {
                return Err(GradedError::VariableMismatch {
                    expected: var.to_string(),
                    found: g.var().to_string(),
                });
            }
            let g = g.lift_to(tower)?;
            if g.is_constant() {
                constants.push(g.constant_term());
            } else {
                positive.push(g.with_var(var));
            }
        }
        if positive.is_empty() {
            return Err(GradedError::NoPositiveDegree);
        }
        let multipliers = absorb_constants(k, tower, &constants)?;
        Ok(SubalgebraPresentation {
            tower: tower.clone(),
            k: k.clone(),
            var: var.to_string(),
            generators: positive,
            multipliers,
            monomial_limit: DEFAULT_MONOMIAL_LIMIT,
            u_cap_override: None,
        })
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn coefficient_field(&self) -> &FieldTower {
        &self.k
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn generators(&self) -> &[UniPoly] {
        &self.generators
    }

    pub fn multipliers(&self) -> &[FieldElement] {
        &self.multipliers
    }

    pub fn max_generator_degree(&self) -> usize {
        self.generators.iter().map(|g| g.degree().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn with_monomial_limit(mut self, limit: usize) -> Self {
        self.monomial_limit = limit;
        self
    }

    pub fn with_u_cap(mut self, cap: usize) -> Self {
        self.u_cap_override = Some(cap);
        self
    }

    /// The same presentation with extra generators appended.
    pub fn extended_with(&self, extra: Vec<UniPoly>) -> Result<Self, GradedError> {
        let mut gens = self.generators.clone();
        gens.extend(extra);
        let mut p = Self::over_coefficient_field(&self.tower, &self.var, gens, &self.k)?;
        p.monomial_limit = self.monomial_limit;
        p.u_cap_override = self.u_cap_override;
        Ok(p)
    }

    /// Expand all generator monomials of degree at most `bound` and
    /// row-reduce them over the coefficient field.
    pub fn filtration_basis(&self, bound: usize) -> Result<GradedPiece, GradedError> {
        let u_cap = self.u_cap_override.unwrap_or(2 * bound.max(1));
        let degs: Vec<usize> =
            self.generators.iter().map(|g| g.degree().expect("nonzero generator")).collect();
        let mut tuples: Vec<(usize, Vec<u32>)> = Vec::new();
        enumerate_tuples(&degs, bound, &mut vec![0u32; degs.len()], 0, 0, &mut tuples);
        tuples.sort();
        let needed = tuples.len() * self.multipliers.len();
        if needed > self.monomial_limit {
            return Err(GradedError::MonomialLimit { needed, limit: self.monomial_limit });
        }

        let pow_cache = self.power_cache(bound, &degs);
        let mut items: Vec<(UniPoly, GenExpr)> = Vec::with_capacity(needed);
        for (_, a) in &tuples {
            for (t, mu) in self.multipliers.iter().enumerate() {
                let mut p = UniPoly::constant(&self.var, mu.clone());
                for (i, e) in a.iter().enumerate() {
                    if *e > 0 {
                        p = p.mul(&pow_cache[i][*e as usize]);
                    }
                }
                items.push((p, GenExpr::monomial(t, a.clone(), self.k.one())));
            }
        }

        let mut ctx = CoordContext::new(&self.k, &self.tower, u_cap)?;
        for (p, _) in &items {
            for c in p.coefficients() {
                ctx.note(c);
            }
        }

        let mut maps: Vec<BTreeMap<(usize, Vec<u32>), FieldElement>> =
            Vec::with_capacity(items.len());
        let mut keys: BTreeSet<(usize, Vec<u32>)> = BTreeSet::new();
        for (p, _) in &items {
            let mut m = BTreeMap::new();
            for (j, c) in p.coefficients().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                debug_assert!(j <= bound);
                for (lab, val) in ctx.extract(c)? {
                    m.insert((bound - j, lab), val);
                }
            }
            keys.extend(m.keys().cloned());
            maps.push(m);
        }
        let columns: Vec<(usize, Vec<u32>)> = keys.into_iter().collect();
        let index: BTreeMap<&(usize, Vec<u32>), usize> =
            columns.iter().enumerate().map(|(i, key)| (key, i)).collect();

        let mut echelon = Echelon::new(columns.len());
        let mut relations = Vec::new();
        for (m, (_, expr)) in maps.into_iter().zip(items.iter()) {
            let mut v = vec![self.k.zero(); columns.len()];
            for (key, val) in m {
                v[index[&key]] = val;
            }
            if let Insertion::Dependent(rel) = echelon.insert(v, expr.clone()) {
                relations.push(rel);
            }
        }

        let row_polys: Vec<UniPoly> = echelon
            .rows()
            .iter()
            .map(|r| self.evaluate_cached(&r.payload, &pow_cache))
            .collect::<Result<_, _>>()?;
        for (row, poly) in echelon.rows().iter().zip(&row_polys) {
            debug_assert_eq!(
                poly.degree().expect("basis rows are nonzero"),
                bound - columns[row.pivot].0
            );
        }

        Ok(GradedPiece {
            bound,
            tower: self.tower.clone(),
            k: self.k.clone(),
            var: self.var.clone(),
            generators: self.generators.clone(),
            multipliers: self.multipliers.clone(),
            columns,
            echelon,
            relations,
            row_polys,
            ctx,
            monomials: needed,
        })
    }

    /// The numerical semigroup generated by the degrees realized by
    /// nonzero elements of the subalgebra, observed up to `bound`.
    pub fn degree_data(&self, bound: usize) -> Result<NumericalSemigroup, GradedError> {
        let bound = bound.max(self.max_generator_degree());
        let piece = self.filtration_basis(bound)?;
        let degs: Vec<usize> =
            piece.realized_degrees().into_iter().filter(|&n| n > 0).collect();
        Ok(NumericalSemigroup::from_generators(&degs)?)
    }

    /// Subduct `f` against the filtration table at `bound`.
    pub fn subduct(&self, f: &UniPoly, bound: usize) -> Result<SubductOutcome, GradedError> {
        self.filtration_basis(bound)?.subduct(f)
    }

    /// Leading-term completion up to `bound`: add, per degree, every
    /// basis row whose leading coefficient is not a `k`-combination of
    /// exact products of generator leading coefficients, and repeat
    /// until a pass adds nothing.
    pub fn sagbi_complete(&self, bound: usize) -> Result<SagbiOutcome, GradedError> {
        let mut pres = self.clone();
        let mut added: Vec<UniPoly> = Vec::new();
        let mut added_expressions: Vec<GenExpr> = Vec::new();
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            if iterations > SAGBI_ITERATION_LIMIT {
                return Err(GradedError::IterationLimit);
            }
            let piece = pres.filtration_basis(bound)?;
            let mut discrepancies: Vec<(UniPoly, GenExpr)> = Vec::new();
            for n in 1..=bound {
                let rows = piece.block_row_indices(n);
                if rows.is_empty() {
                    continue;
                }
                let leads: Vec<FieldElement> =
                    rows.iter().map(|&ri| piece.row_leading_coefficient(ri)).collect();
                let products = pres.monomial_lead_products(n);
                let mut ctx = CoordContext::new(&pres.k, &pres.tower, piece.u_cap())?;
                for v in products.iter().chain(leads.iter()) {
                    ctx.note(v);
                }
                let mut maps = Vec::new();
                let mut keys: BTreeSet<Vec<u32>> = BTreeSet::new();
                for v in products.iter().chain(leads.iter()) {
                    let m = ctx.extract(v)?;
                    keys.extend(m.keys().cloned());
                    maps.push(m);
                }
                let columns: Vec<Vec<u32>> = keys.into_iter().collect();
                let index: BTreeMap<&Vec<u32>, usize> =
                    columns.iter().enumerate().map(|(i, key)| (key, i)).collect();
                let dense = |m: &BTreeMap<Vec<u32>, FieldElement>| {
                    let mut v = vec![pres.k.zero(); columns.len()];
                    for (key, val) in m {
                        v[index[key]] = val.clone();
                    }
                    v
                };
                let mut span: Echelon<crate::linalg::Combination> =
                    Echelon::new(columns.len());
                for m in &maps[..products.len()] {
                    span.insert(dense(m), BTreeMap::new());
                }
                for (m, &ri) in maps[products.len()..].iter().zip(rows.iter()) {
                    if span.express(&dense(m)).is_none() {
                        discrepancies.push((
                            piece.row_polynomial(ri).clone(),
                            piece.row_expression(ri).clone(),
                        ));
                    }
                }
            }
            if discrepancies.is_empty() {
                let tail_active = added
                    .iter()
                    .any(|p| p.degree().unwrap_or(0) + 1 >= bound);
                return Ok(SagbiOutcome {
                    bounded: pres.k != pres.tower,
                    stable: true,
                    tail_active,
                    presentation: pres,
                    added,
                    added_expressions,
                    iterations,
                });
            }
            for (p, e) in discrepancies {
                pres.generators.push(p.clone());
                added.push(p);
                added_expressions.push(e);
            }
        }
    }

    fn power_cache(&self, bound: usize, degs: &[usize]) -> Vec<Vec<UniPoly>> {
        self.generators
            .iter()
            .zip(degs)
            .map(|(g, d)| {
                let max = bound / d.max(&1);
                let mut pows = Vec::with_capacity(max + 1);
                pows.push(UniPoly::one(&self.tower, &self.var));
                for e in 1..=max {
                    let prev: &UniPoly = &pows[e - 1];
                    pows.push(prev.mul(g));
                }
                pows
            })
            .collect()
    }

    fn evaluate_cached(
        &self,
        expr: &GenExpr,
        pow_cache: &[Vec<UniPoly>],
    ) -> Result<UniPoly, GradedError> {
        let mut acc = UniPoly::zero(&self.tower, &self.var);
        for ((t, a), c) in &expr.terms {
            let coeff = c.lift_to(&self.tower)?.mul(&self.multipliers[*t]);
            let mut m = UniPoly::constant(&self.var, coeff);
            for (i, e) in a.iter().enumerate() {
                if *e > 0 {
                    m = m.mul(&pow_cache[i][*e as usize]);
                }
            }
            acc = acc.add(&m);
        }
        Ok(acc)
    }

    /// All products `μ_t · Π κᵢ^{aᵢ}` of multiplier constants and
    /// generator leading coefficients over exponent tuples of total
    /// degree exactly `n`.
    fn monomial_lead_products(&self, n: usize) -> Vec<FieldElement> {
        let degs: Vec<usize> =
            self.generators.iter().map(|g| g.degree().expect("nonzero generator")).collect();
        let kappas: Vec<FieldElement> = self
            .generators
            .iter()
            .map(|g| g.leading_coefficient().expect("nonzero generator").clone())
            .collect();
        let mut tuples = Vec::new();
        enumerate_tuples(&degs, n, &mut vec![0u32; degs.len()], 0, 0, &mut tuples);
        tuples.sort();
        let mut out = Vec::new();
        for (deg, a) in tuples {
            if deg != n {
                continue;
            }
            let mut v = self.tower.one();
            for (i, e) in a.iter().enumerate() {
                if *e > 0 {
                    v = v.mul(&kappas[i].powu(*e as usize));
                }
            }
            for mu in &self.multipliers {
                out.push(mu.mul(&v));
            }
        }
        out
    }
}

fn enumerate_tuples(
    degs: &[usize],
    bound: usize,
    cur: &mut Vec<u32>,
    idx: usize,
    acc: usize,
    out: &mut Vec<(usize, Vec<u32>)>,
) {
    if idx == degs.len() {
        out.push((acc, cur.clone()));
        return;
    }
    let mut e = 0u32;
    loop {
        let deg = acc + (e as usize) * degs[idx];
        if deg > bound {
            break;
        }
        cur[idx] = e;
        enumerate_tuples(degs, bound, cur, idx + 1, deg, out);
        e += 1;
    }
    cur[idx] = 0;
}

/// All exponent tuples with weighted degree at most `bound`, sorted by
/// (degree, tuple).
pub(crate) fn enumerate_weighted_tuples(
    degs: &[usize],
    bound: usize,
    out: &mut Vec<(usize, Vec<u32>)>,
) {
    enumerate_tuples(degs, bound, &mut vec![0u32; degs.len()], 0, 0, out);
    out.sort();
}

/// Basis of the algebra generated over `k` by the given constants:
/// the linearly independent power products `Π cⱼ^{eⱼ}` with `eⱼ`
/// below the algebraic degree of `cⱼ` over `k`.
fn absorb_constants(
    k: &FieldTower,
    tower: &FieldTower,
    constants: &[FieldElement],
) -> Result<Vec<FieldElement>, GradedError> {
    if constants.is_empty() {
        return Ok(vec![tower.one()]);
    }
    if constants.len() > MULTIPLIER_COUNT_CAP {
        return Err(GradedError::MultiplierCapExceeded);
    }
    let mut degrees = Vec::new();
    for c in constants {
        let m = algebraic_degree_over(k, tower, c, MULTIPLIER_DEGREE_CAP)?
            .ok_or(GradedError::MultiplierNotAlgebraic)?;
        degrees.push(m);
    }
    if degrees.iter().product::<usize>() > MULTIPLIER_BASIS_CAP {
        return Err(GradedError::MultiplierCapExceeded);
    }
    let mut products = vec![tower.one()];
    for (c, m) in constants.iter().zip(&degrees) {
        let mut next = Vec::new();
        let mut p = tower.one();
        for _ in 0..*m {
            for b in &products {
                next.push(b.mul(&p));
            }
            p = p.mul(c);
        }
        products = next;
    }
    independent_subset(k, tower, &products)
}

/// The first linear dependence among `1, c, c², …` over `k`, searched
/// up to `cap`; `None` when no dependence is found (treated by callers
/// as "not algebraic within the cap").
fn algebraic_degree_over(
    k: &FieldTower,
    tower: &FieldTower,
    c: &FieldElement,
    cap: usize,
) -> Result<Option<usize>, GradedError> {
    let mut powers = Vec::with_capacity(cap + 1);
    let mut p = tower.one();
    for _ in 0..=cap {
        powers.push(p.clone());
        p = p.mul(c);
    }
    let mut ctx = CoordContext::new(k, tower, ABSORB_U_CAP)?;
    for v in &powers {
        ctx.note(v);
    }
    let mut maps = Vec::new();
    let mut keys: BTreeSet<Vec<u32>> = BTreeSet::new();
    for v in &powers {
        let m = match ctx.extract(v) {
            Ok(m) => m,
            Err(GradedError::BoundTooLarge { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        keys.extend(m.keys().cloned());
        maps.push(m);
    }
    let columns: Vec<Vec<u32>> = keys.into_iter().collect();
    let index: BTreeMap<&Vec<u32>, usize> =
        columns.iter().enumerate().map(|(i, key)| (key, i)).collect();
    let mut ech: Echelon<crate::linalg::Combination> = Echelon::new(columns.len());
    for (j, m) in maps.iter().enumerate() {
        let mut v = vec![k.zero(); columns.len()];
        for (key, val) in m {
            v[index[key]] = val.clone();
        }
        if let Insertion::Dependent(_) = ech.insert(v, BTreeMap::new()) {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

/// The subsequence of `items` that is linearly independent over `k`,
/// kept in input order.
fn independent_subset(
    k: &FieldTower,
    tower: &FieldTower,
    items: &[FieldElement],
) -> Result<Vec<FieldElement>, GradedError> {
    let _ = tower;
    let mut ctx = CoordContext::new(k, tower, ABSORB_U_CAP)?;
    for v in items {
        ctx.note(v);
    }
    let mut maps = Vec::new();
    let mut keys: BTreeSet<Vec<u32>> = BTreeSet::new();
    for v in items {
        let m = ctx.extract(v)?;
        keys.extend(m.keys().cloned());
        maps.push(m);
    }
    let columns: Vec<Vec<u32>> = keys.into_iter().collect();
    let index: BTreeMap<&Vec<u32>, usize> =
        columns.iter().enumerate().map(|(i, key)| (key, i)).collect();
    let mut ech: Echelon<crate::linalg::Combination> = Echelon::new(columns.len());
    let mut kept = Vec::new();
    for (m, v) in maps.iter().zip(items) {
        let mut vec = vec![k.zero(); columns.len()];
        for (key, val) in m {
            vec[index[key]] = val.clone();
        }
        if let Insertion::Added = ech.insert(vec, BTreeMap::new()) {
            kept.push(v.clone());
        }
    }
    Ok(kept)
}

// ---------------------------------------------------------------------------
// Filtration tables
// ---------------------------------------------------------------------------

/// The row-reduced table of all generator monomials of degree at most
/// `bound`, over the coefficient field. Columns are ordered by
/// descending polynomial degree, so the rows with pivots in the block
/// of degree `n` are exactly a basis complement realizing degree `n`,
/// and their leading coefficients span the degree-`n`
/// leading-coefficient space.
pub struct GradedPiece {
    bound: usize,
    tower: FieldTower,
    k: FieldTower,
    var: String,
    generators: Vec<UniPoly>,
    multipliers: Vec<FieldElement>,
    columns: Vec<(usize, Vec<u32>)>,
    echelon: Echelon<GenExpr>,
    relations: Vec<GenExpr>,
    row_polys: Vec<UniPoly>,
    ctx: CoordContext,
    monomials: usize,
}

impl GradedPiece {
    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn u_cap(&self) -> usize {
        self.ctx.u_cap()
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn coefficient_field(&self) -> &FieldTower {
        &self.k
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn generators(&self) -> &[UniPoly] {
        &self.generators
    }

    pub fn multipliers(&self) -> &[FieldElement] {
        &self.multipliers
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn monomial_count(&self) -> usize {
        self.monomials
    }

    /// The common denominator (in the transcendental generator) cleared
    /// from all coordinates, when one was needed.
    pub fn denominator(&self) -> Option<&UniPoly> {
        self.ctx.denominator()
    }

    /// Relations: formal combinations of generator monomials that
    /// expand to zero, harvested during row reduction. They form a
    /// basis of the relation space of the monomials in the table.
    pub fn relations(&self) -> &[GenExpr] {
        &self.relations
    }

    fn row_degree(&self, row_idx: usize) -> usize {
        self.bound - self.columns[self.echelon.rows()[row_idx].pivot].0
    }

    /// Number of basis rows of degree at most `n`.
    pub fn dimension_up_to(&self, n: usize) -> usize {
        (0..self.echelon.rank()).filter(|&i| self.row_degree(i) <= n).count()
    }

    /// Block sizes keyed by degree: how many basis rows realize each
    /// degree.
    pub fn dims_by_degree(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for i in 0..self.echelon.rank() {
            *out.entry(self.row_degree(i)).or_insert(0) += 1;
        }
        out
    }

    /// Degrees realized by the table, ascending.
    pub fn realized_degrees(&self) -> Vec<usize> {
        self.dims_by_degree().into_keys().collect()
    }

    /// Indices (in pivot order) of the basis rows of degree exactly `n`.
    pub fn block_row_indices(&self, n: usize) -> Vec<usize> {
        (0..self.echelon.rank()).filter(|&i| self.row_degree(i) == n).collect()
    }

    /// The polynomial realized by basis row `row_idx`.
    pub fn row_polynomial(&self, row_idx: usize) -> &UniPoly {
        &self.row_polys[row_idx]
    }

    /// The formal expression of basis row `row_idx` in the generators.
    pub fn row_expression(&self, row_idx: usize) -> &GenExpr {
        &self.echelon.rows()[row_idx].payload
    }

    /// Leading coefficient of the row polynomial.
    pub fn row_leading_coefficient(&self, row_idx: usize) -> FieldElement {
        self.row_polys[row_idx]
            .leading_coefficient()
            .expect("basis rows are nonzero")
            .clone()
    }

    /// The degree-`n` leading-coefficient space: leading coefficients
    /// of the degree-`n` basis rows (linearly independent over `k`).
    pub fn leading_coefficient_space(&self, n: usize) -> Vec<FieldElement> {
        self.block_row_indices(n)
            .into_iter()
            .map(|i| self.row_leading_coefficient(i))
            .collect()
    }

    /// Leading-term rewriting of `f` against this table: repeatedly
    /// cancel the leading coefficient of the running remainder by the
    /// equal-degree basis rows, strictly decreasing the degree. The
    /// remainder is zero exactly when `f` lies in the span of the
    /// tabulated monomials.
    pub fn subduct(&self, f: &UniPoly) -> Result<SubductOutcome, GradedError> {
        if !f.is_constant() && f.var() != self.var {
            return Err(GradedError::VariableMismatch {
                expected: self.var.clone(),
                found: f.var().to_string(),
            });
        }
        let mut r = f.lift_to(&self.tower)?.with_var(&self.var);
        let mut expr = GenExpr::zero();
        while let Some(n) = r.degree() {
            if n > self.bound {
                break;
            }
            let rows = self.block_row_indices(n);
            if rows.is_empty() {
                break;
            }
            let lead = r.coefficient(n);
            let mut cur = match self.ctx.extract(&lead) {
                Ok(m) => m,
                Err(GradedError::DenominatorNotCleared)
                | Err(GradedError::BoundTooLarge { .. }) => break,
                Err(e) => return Err(e),
            };
            let rev = self.bound - n;
            let mut used: Vec<(usize, FieldElement)> = Vec::new();
            for &ri in &rows {
                let row = &self.echelon.rows()[ri];
                let (prev, plab) = &self.columns[row.pivot];
                debug_assert_eq!(*prev, rev);
                let c = match cur.get(plab) {
                    Some(v) if !v.is_zero() => v.clone(),
                    _ => continue,
                };
                for (ci, val) in row.vec.iter().enumerate() {
                    if val.is_zero() {
                        continue;
                    }
                    let (crev, clab) = &self.columns[ci];
                    if *crev != rev {
                        continue;
                    }
                    let delta = val.mul(&c);
                    match cur.get_mut(clab) {
                        Some(entry) => {
                            *entry = entry.sub(&delta);
                            if entry.is_zero() {
                                cur.remove(clab);
                            }
                        }
                        None => {
                            cur.insert(clab.clone(), delta.neg());
                        }
                    }
                }
                used.push((ri, c));
            }
            if !cur.is_empty() {
                break;
            }
            for (ri, c) in used {
                let cl = c.lift_to(&self.tower)?;
                r = r.sub(&self.row_polys[ri].scale(&cl));
                expr.accumulate(self.row_expression(ri), &c);
            }
            debug_assert!(r.degree().is_none_or(|m| m < n));
        }
        Ok(SubductOutcome { remainder: r, expression: expr, bound: self.bound })
    }

    /// Full-span membership: express `f` in the row space in one shot.
    /// Agrees with [`subduct`] on membership verdicts.
    ///
    /// [`subduct`]: GradedPiece::subduct
    pub fn membership(&self, f: &UniPoly) -> Result<Option<GenExpr>, GradedError> {
        if !f.is_constant() && f.var() != self.var {
            return Err(GradedError::VariableMismatch {
                expected: self.var.clone(),
                found: f.var().to_string(),
            });
        }
        let f = f.lift_to(&self.tower)?;
        if f.degree().unwrap_or(0) > self.bound {
            return Ok(None);
        }
        let index: BTreeMap<&(usize, Vec<u32>), usize> =
            self.columns.iter().enumerate().map(|(i, key)| (key, i)).collect();
        let mut v = vec![self.k.zero(); self.columns.len()];
        for (j, c) in f.coefficients().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let m = match self.ctx.extract(c) {
                Ok(m) => m,
                Err(GradedError::DenominatorNotCleared)
                | Err(GradedError::BoundTooLarge { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            for (lab, val) in m {
                match index.get(&(self.bound - j, lab)) {
                    Some(&ci) => v[ci] = val,
                    None => return Ok(None),
                }
            }
        }
        match self.echelon.express(&v) {
            None => Ok(None),
            Some(combo) => {
                let mut expr = GenExpr::zero();
                for (pivot, c) in combo {
                    let row = self.echelon.row_by_pivot(pivot).expect("pivot from express");
                    expr.accumulate(&row.payload, &c);
                }
                Ok(Some(expr))
            }
        }
    }

    /// Expand a formal expression against this table's generators.
    pub fn expression_value(&self, expr: &GenExpr) -> Result<UniPoly, GradedError> {
        expr.evaluate(&self.multipliers, &self.generators, &self.tower, &self.var)
    }
}

/// Result of subduction: `input = expression + remainder` exactly, and
/// membership (at this bound) is `remainder == 0`.
pub struct SubductOutcome {
    pub remainder: UniPoly,
    pub expression: GenExpr,
    pub bound: usize,
}

impl SubductOutcome {
    pub fn is_member(&self) -> bool {
        self.remainder.is_zero()
    }
}

/// Result of leading-term completion.
pub struct SagbiOutcome {
    /// The input presentation with all added generators appended.
    pub presentation: SubalgebraPresentation,
    /// Generators added, in the order they were found.
    pub added: Vec<UniPoly>,
    /// For each added generator, its expression in the generators of
    /// the presentation current at the time it was added.
    pub added_expressions: Vec<GenExpr>,
    /// True when the coefficient field is a proper prefix of the
    /// ambient tower; completion is then only valid up to the bound.
    pub bounded: bool,
    /// The final pass added nothing.
    pub stable: bool,
    /// Some addition happened within one degree of the bound, so the
    /// completion may still be moving beyond it.
    pub tail_active: bool,
    pub iterations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn q() -> FieldTower {
        FieldTower::rationals()
    }

    fn qu() -> FieldTower {
        q().extend_transcendental("u").expect("fresh name")
    }

    fn s_pow(t: &FieldTower, e: usize) -> UniPoly {
        UniPoly::monomial("s", t.one(), e)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn test_filtration_dims_monomial_curve() {
        let t = q();
        let pres =
            SubalgebraPresentation::new(&t, "s", vec![s_pow(&t, 2), s_pow(&t, 3)]).expect("valid");
        let piece = pres.filtration_basis(5).expect("table");
        let dims = piece.dims_by_degree();
        let expected: BTreeMap<usize, usize> =
            [(0, 1), (2, 1), (3, 1), (4, 1), (5, 1)].into_iter().collect();
        assert_eq!(dims, expected);
        assert!(piece.block_row_indices(1).is_empty());
        assert_eq!(piece.rank(), 5);
    }

    #[test]
    fn test_filtration_full_ring() {
        let t = q();
        let pres = SubalgebraPresentation::new(&t, "s", vec![s_pow(&t, 1)]).expect("valid");
        let piece = pres.filtration_basis(3).expect("table");
        for n in 0..=3 {
            assert_eq!(piece.dimension_up_to(n), n + 1);
        }
    }

    #[test]
    fn test_degree_data_examples() {
        let t = q();
        let pres =
            SubalgebraPresentation::new(&t, "s", vec![s_pow(&t, 2), s_pow(&t, 3)]).expect("valid");
        let sg = pres.degree_data(12).expect("semigroup");
        assert_eq!(sg.minimal_generators(), vec![2, 3]);
        assert_eq!(sg.gcd(), 1);
        assert_eq!(sg.conductor_exponent(), 2);

        let full = SubalgebraPresentation::new(&t, "s", vec![s_pow(&t, 1)]).expect("valid");
        let sg = full.degree_data(6).expect("semigroup");
        assert_eq!(sg.minimal_generators(), vec![1]);
        assert_eq!(sg.conductor_exponent(), 0);
    }

    #[test]
    fn test_degree_data_scaled_generators() {
        // {a·s², a·s³} over Q(a), a² = 2: same degree semigroup as {s², s³}
        let t = q()
            .extend_algebraic("a", UniPoly::from_integers(&q(), "a", &[-2, 0, 1]))
            .expect("x^2 - 2 irreducible");
        let a = t.generator().expect("generator");
        let gens = vec![s_pow(&t, 2).scale(&a), s_pow(&t, 3).scale(&a)];
        let pres = SubalgebraPresentation::new(&t, "s", gens).expect("valid");
        let sg = pres.degree_data(12).expect("semigroup");
        assert_eq!(sg.minimal_generators(), vec![2, 3]);
        assert_eq!(sg.gcd(), 1);
    }

    #[test]
    fn test_hidden_coefficient_lambda_five() {
        // {s² + u·s, s³} over coefficient field Q inside Q(u):
        // w₁³ − w₂² = 3u·s⁵ + 3u²·s⁴ + u³·s³ shows up as the unique
        // degree-5 basis row at bound 6.
        let t = qu();
        let u = t.generator().expect("generator");
        let w1 = s_pow(&t, 2).add(&UniPoly::monomial("s", u.clone(), 1));
        let w2 = s_pow(&t, 3);
        let pres =
            SubalgebraPresentation::over_coefficient_field(&t, "s", vec![w1.clone(), w2.clone()], &q())
                .expect("valid");
        let piece = pres.filtration_basis(6).expect("table");
        let rows5 = piece.block_row_indices(5);
        // w₁·w₂ = s⁵ + u·s⁴ is one degree-5 row; the cancellation row is another
        assert_eq!(rows5.len(), 2);
        let witness = w1.pow(3).sub(&w2.pow(2));
        let expected = UniPoly::monomial("s", u.mul(&t.from_integer(3)), 5)
            .add(&UniPoly::monomial("s", u.powu(2).mul(&t.from_integer(3)), 4))
            .add(&UniPoly::monomial("s", u.powu(3), 3));
        assert_eq!(witness, expected);
        // one of the degree-5 leads is a rational multiple of u
        let found = rows5.iter().any(|&ri| {
            let lead = piece.row_leading_coefficient(ri);
            lead.mul(&u.inv().expect("u nonzero")).as_rational().is_some()
                && !lead.mul(&u.inv().expect("u nonzero")).is_zero()
        });
        assert!(found, "a degree-5 basis row has a u-proportional lead");
        // and the cancellation row's polynomial is (w₁³ − w₂²) up to a rational scale
        let found_poly = rows5.iter().any(|&ri| {
            let p = piece.row_polynomial(ri);
            let ratio = p
                .leading_coefficient()
                .expect("nonzero")
                .div(expected.leading_coefficient().expect("nonzero"))
                .expect("nonzero");
            ratio.as_rational().is_some() && *p == expected.scale(&ratio)
        });
        assert!(found_poly);
    }

    #[test]
    fn test_subduct_monomial_curve() {
        let t = q();
        let pres =
            SubalgebraPresentation::new(&t, "s", vec![s_pow(&t, 2), s_pow(&t, 3)]).expect("valid");
        let piece = pres.filtration_basis(6).expect("table");

        // s⁵ = w₁·w₂
        let out = piece.subduct(&s_pow(&t, 5)).expect("subduct");
        assert!(out.is_member());
        let terms: Vec<_> = out.expression.terms().collect();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0, &(0usize, vec![1, 1]));
        assert!(terms[0].1.is_one());

        // s is not a member; the remainder is s itself
        let out = piece.subduct(&s_pow(&t, 1)).expect("subduct");
        assert!(!out.is_member());
        assert_eq!(out.remainder, s_pow(&t, 1));

        // s² + s³ = w₁ + w₂
        let f = s_pow(&t, 2).add(&s_pow(&t, 3));
        let out = piece.subduct(&f).expect("subduct");
        assert!(out.is_member());
        let val = piece.expression_value(&out.expression).expect("evaluate");
        assert_eq!(val, f);
    }

    #[test]
    fn test_subduct_identity_soundness() {
        // f = expression + remainder exactly, on a non-monomial example
        let t = q();
        let w1 = s_pow(&t, 2).add(&s_pow(&t, 1)); // s² + s
        let w2 = s_pow(&t, 3);
        let pres = SubalgebraPresentation::new(&t, "s", vec![w1.clone(), w2.clone()]).expect("valid");
        let piece = pres.filtration_basis(8).expect("table");
        let f = w1.pow(2).mul(&w2).add(&w1.scale(&t.from_rational(rat(7, 2))));
        let out = piece.subduct(&f).expect("subduct");
        assert!(out.is_member());
        let val = piece.expression_value(&out.expression).expect("evaluate");
        assert_eq!(val.add(&out.remainder), f);

        // and something outside: s⁴ + s is not in k[s²+s, s³] at this bound
        let g = s_pow(&t, 4).add(&s_pow(&t, 1));
        let out = piece.subduct(&g).expect("subduct");
        let val = piece.expression_value(&out.expression).expect("evaluate");
        assert_eq!(val.add(&out.remainder), g);
    }

    #[test]
    fn test_membership_agrees_with_subduct() {
        let t = q();
        let w1 = s_pow(&t, 2).add(&s_pow(&t, 1));
        let w2 = s_pow(&t, 3);
        let pres = SubalgebraPresentation::new(&t, "s", vec![w1, w2]).expect("valid");
        let piece = pres.filtration_basis(7).expect("table");
        let mut state = 0x12345u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..30 {
            let mut f = UniPoly::zero(&t, "s");
            for j in 0..=7usize {
                let c = (next() % 7) as i64 - 3;
                if c != 0 {
                    f = f.add(&UniPoly::monomial("s", t.from_integer(c), j));
                }
            }
            let sub = piece.subduct(&f).expect("subduct");
            let mem = piece.membership(&f).expect("membership");
            assert_eq!(sub.is_member(), mem.is_some(), "verdicts agree on {f:?}");
            if let Some(expr) = mem {
                assert_eq!(piece.expression_value(&expr).expect("eval"), f);
            }
        }
    }

    #[test]
    fn test_relations_expand_to_zero() {
        let t = q();
        let pres =
            SubalgebraPresentation::new(&t, "s", vec![s_pow(&t, 2), s_pow(&t, 3)]).expect("valid");
        let piece = pres.filtration_basis(6).expect("table");
        // w₁³ and w₂² both have degree 6: exactly one relation
        assert_eq!(piece.relations().len(), 1);
        let val = piece.expression_value(&piece.relations()[0]).expect("evaluate");
        assert!(val.is_zero());
    }

    #[test]
    fn test_sagbi_monomial_curve_already_complete() {
        let t = q();
        let pres =
            SubalgebraPresentation::new(&t, "s", vec![s_pow(&t, 2), s_pow(&t, 3)]).expect("valid");
        let out = pres.sagbi_complete(8).expect("complete");
        assert!(out.added.is_empty());
        assert!(out.stable);
        assert!(!out.bounded);
        assert_eq!(out.presentation.generators().len(), 2);
    }

    #[test]
    fn test_sagbi_over_full_tower_unchanged() {
        // over K = Q(u) itself the leading coefficients are units, so
        // {s²+us, s³} is already complete
        let t = qu();
        let u = t.generator().expect("generator");
        let w1 = s_pow(&t, 2).add(&UniPoly::monomial("s", u, 1));
        let w2 = s_pow(&t, 3);
        let pres = SubalgebraPresentation::new(&t, "s", vec![w1, w2]).expect("valid");
        let out = pres.sagbi_complete(12).expect("complete");
        assert!(out.added.is_empty());
        assert!(!out.bounded);
    }

    #[test]
    fn test_sagbi_adds_hidden_generator() {
        let t = qu();
        let u = t.generator().expect("generator");
        let w1 = s_pow(&t, 2).add(&UniPoly::monomial("s", u.clone(), 1));
        let w2 = s_pow(&t, 3);
        let pres =
            SubalgebraPresentation::over_coefficient_field(&t, "s", vec![w1.clone(), w2.clone()], &q())
                .expect("valid");
        let out = pres.sagbi_complete(6).expect("complete");
        assert!(out.bounded);
        assert!(out.stable);
        assert_eq!(out.added.len(), 1);
        let added = &out.added[0];
        assert_eq!(added.degree(), Some(5));
        // the added generator is a rational multiple of w₁³ − w₂²
        let witness = w1.pow(3).sub(&w2.pow(2));
        let ratio = added
            .leading_coefficient()
            .expect("nonzero")
            .div(witness.leading_coefficient().expect("nonzero"))
            .expect("nonzero");
        assert!(ratio.as_rational().is_some());
        assert_eq!(added.scale(&ratio.inv().expect("nonzero")), witness);
        // its recorded expression expands to it
        let val = out.added_expressions[0]
            .evaluate(
                pres.multipliers(),
                pres.generators(),
                pres.tower(),
                pres.var(),
            )
            .expect("evaluate");
        assert_eq!(&val, added);
    }

    #[test]
    fn test_absorbed_constant_multipliers() {
        // a degree-zero generator a (a² = 2) over k = Q becomes the
        // multiplier basis {1, a}
        let t = q()
            .extend_algebraic("a", UniPoly::from_integers(&q(), "a", &[-2, 0, 1]))
            .expect("irreducible");
        let a = t.generator().expect("generator");
        let gens = vec![UniPoly::constant("s", a.clone()), s_pow(&t, 2)];
        let pres =
            SubalgebraPresentation::over_coefficient_field(&t, "s", gens, &q()).expect("valid");
        assert_eq!(pres.multipliers().len(), 2);
        assert_eq!(pres.generators().len(), 1);
        let piece = pres.filtration_basis(4).expect("table");
        assert_eq!(piece.dims_by_degree().get(&0), Some(&2));
        assert_eq!(piece.dims_by_degree().get(&2), Some(&2)); // s², a·s²
        // (1 + a)·s² is a member
        let f = s_pow(&t, 2).scale(&t.one().add(&a));
        assert!(piece.subduct(&f).expect("subduct").is_member());
    }

    #[test]
    fn test_transcendental_constant_rejected() {
        let t = qu();
        let u = t.generator().expect("generator");
        let gens = vec![UniPoly::constant("s", u), s_pow(&t, 2)];
        let err = SubalgebraPresentation::over_coefficient_field(&t, "s", gens, &q())
            .expect_err("u is not algebraic over Q");
        assert!(matches!(err, GradedError::MultiplierNotAlgebraic));
    }

    #[test]
    fn test_denominator_clearing() {
        // generator (1/u)·s² over k = Q inside Q(u)
        let t = qu();
        let u = t.generator().expect("generator");
        let uinv = u.inv().expect("nonzero");
        let w1 = UniPoly::monomial("s", uinv.clone(), 2);
        let w2 = s_pow(&t, 3);
        let pres = SubalgebraPresentation::over_coefficient_field(&t, "s", vec![w1, w2], &q())
            .expect("valid");
        let piece = pres.filtration_basis(4).expect("table");
        assert!(piece.denominator().is_some());
        // (1/u²)·s⁴ = w₁² is a member, s⁴ itself is not
        let f = UniPoly::monomial("s", uinv.powu(2), 4);
        assert!(piece.subduct(&f).expect("subduct").is_member());
        assert!(!piece.subduct(&s_pow(&t, 4)).expect("subduct").is_member());
    }

    #[test]
    fn test_subduct_degree_zero_uniform() {
        let t = q();
        let pres =
            SubalgebraPresentation::new(&t, "s", vec![s_pow(&t, 2)]).expect("valid");
        let piece = pres.filtration_basis(4).expect("table");
        // constants are members (the empty monomial)
        let c = UniPoly::constant("s", t.from_rational(rat(5, 3)));
        assert!(piece.subduct(&c).expect("subduct").is_member());
    }
}
