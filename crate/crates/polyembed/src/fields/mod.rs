//! Field towers over the rationals and their elements.
//!
//! A [`FieldTower`] is `Q` extended step by step, where each step either
//! adjoins a root of a monic irreducible polynomial over the tower built
//! so far (an algebraic step) or a fresh transcendental generator. At
//! most one transcendental step is allowed per tower. Irreducibility of
//! every minimal polynomial is verified at construction time, so a tower
//! is a field by construction.
//!
//! A [`FieldElement`] is stored in canonical form: rationals are reduced
//! fractions, elements of an algebraic step are polynomials in the top
//! generator reduced modulo the minimal polynomial, and elements of a
//! transcendental step are coprime fractions with monic denominator.
//! Structural equality therefore coincides with field equality.
//!
//! Arithmetic is strict about towers: both operands must live in the
//! same tower, and [`FieldElement::lift_to`] / [`FieldElement::restrict_to`]
//! move elements between a tower and its extensions explicitly.

pub mod irred;
pub mod powers;

use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};
use thiserror::Error;

use crate::unipoly::UniPoly;

pub use irred::{irreducible_over, IrredOutcome};
pub use powers::{eth_root, nth_power_root, Adjunction, EthRootOutcome, PowerOutcome};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("tower mismatch: {0}")]
    TowerMismatch(String),
    #[error("the tower already has a transcendental generator")]
    TranscendentalAlreadyPresent,
    #[error("generator name {0:?} is already used in this tower")]
    DuplicateGeneratorName(String),
    #[error("invalid minimal polynomial: {0}")]
    InvalidMinimalPolynomial(String),
    #[error("the proposed minimal polynomial is reducible")]
    ReducibleMinimalPolynomial,
    #[error("cannot decide irreducibility of the proposed minimal polynomial")]
    InconclusiveIrreducibility,
    #[error("unsupported tower shape: {0}")]
    UnsupportedTowerShape(String),
    #[error("element does not lie in the requested subtower")]
    NotInSubfield,
    #[error("denominator vanishes at the specialization point")]
    DenominatorVanishes,
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
}

pub(crate) enum TowerNode {
    Rationals,
    Algebraic { below: FieldTower, name: String, minpoly: UniPoly },
    Transcendental { below: FieldTower, name: String },
}

/// A tower of fields over `Q`, shared immutably.
#[derive(Clone)]
pub struct FieldTower {
    node: Arc<TowerNode>,
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.node, &other.node) {
            return true;
        }
        match (&*self.node, &*other.node) {
            (TowerNode::Rationals, TowerNode::Rationals) => true,
            (
                TowerNode::Algebraic { below: b1, name: n1, minpoly: m1 },
                TowerNode::Algebraic { below: b2, name: n2, minpoly: m2 },
            ) => n1 == n2 && b1 == b2 && m1 == m2,
            (
                TowerNode::Transcendental { below: b1, name: n1 },
                TowerNode::Transcendental { below: b2, name: n2 },
            ) => n1 == n2 && b1 == b2,
            _ => false,
        }
    }
}

impl Eq for FieldTower {}

impl FieldTower {
    pub fn rationals() -> FieldTower {
        FieldTower { node: Arc::new(TowerNode::Rationals) }
    }

    /// Adjoin a root of `minpoly`, a monic polynomial of degree at least
    /// two over `self` in the variable `name`. Irreducibility is
    /// verified; an inconclusive test rejects the extension.
    pub fn extend_algebraic(&self, name: &str, minpoly: UniPoly) -> Result<FieldTower, FieldError> {
        if self.contains_name(name) {
            return Err(FieldError::DuplicateGeneratorName(name.to_string()));
        }
        if minpoly.tower() != self {
            return Err(FieldError::InvalidMinimalPolynomial(
                "minimal polynomial must have coefficients in the base tower".into(),
            ));
        }
        if minpoly.var() != name {
            return Err(FieldError::InvalidMinimalPolynomial(format!(
                "minimal polynomial must be written in the new generator {name:?}"
            )));
        }
        if !minpoly.is_monic() {
            return Err(FieldError::InvalidMinimalPolynomial("must be monic".into()));
        }
        if minpoly.degree().unwrap_or(0) < 2 {
            return Err(FieldError::InvalidMinimalPolynomial("degree must be at least 2".into()));
        }
        match irred::irreducible_over(&minpoly) {
            IrredOutcome::Irreducible => {}
            IrredOutcome::Reducible(_) => return Err(FieldError::ReducibleMinimalPolynomial),
            IrredOutcome::Inconclusive => return Err(FieldError::InconclusiveIrreducibility),
        }
        Ok(FieldTower {
            node: Arc::new(TowerNode::Algebraic {
                below: self.clone(),
                name: name.to_string(),
                minpoly,
            }),
        })
    }

    /// Adjoin a transcendental generator. A tower carries at most one.
    pub fn extend_transcendental(&self, name: &str) -> Result<FieldTower, FieldError> {
        if self.has_transcendental() {
            return Err(FieldError::TranscendentalAlreadyPresent);
        }
        if self.contains_name(name) {
            return Err(FieldError::DuplicateGeneratorName(name.to_string()));
        }
        Ok(FieldTower {
            node: Arc::new(TowerNode::Transcendental { below: self.clone(), name: name.to_string() }),
        })
    }

    pub fn is_rationals(&self) -> bool {
        matches!(&*self.node, TowerNode::Rationals)
    }

    pub fn below(&self) -> Option<&FieldTower> {
        match &*self.node {
            TowerNode::Rationals => None,
            TowerNode::Algebraic { below, .. } | TowerNode::Transcendental { below, .. } => {
                Some(below)
            }
        }
    }

    pub fn top_name(&self) -> Option<&str> {
        match &*self.node {
            TowerNode::Rationals => None,
            TowerNode::Algebraic { name, .. } | TowerNode::Transcendental { name, .. } => {
                Some(name)
            }
        }
    }

    pub fn top_minpoly(&self) -> Option<&UniPoly> {
        match &*self.node {
            TowerNode::Algebraic { minpoly, .. } => Some(minpoly),
            _ => None,
        }
    }

    pub fn top_is_transcendental(&self) -> bool {
        matches!(&*self.node, TowerNode::Transcendental { .. })
    }

    pub fn top_is_algebraic(&self) -> bool {
        matches!(&*self.node, TowerNode::Algebraic { .. })
    }

    /// Number of extension steps above `Q`.
    pub fn depth(&self) -> usize {
        match self.below() {
            None => 0,
            Some(b) => b.depth() + 1,
        }
    }

    pub fn contains_name(&self, name: &str) -> bool {
        match &*self.node {
            TowerNode::Rationals => false,
            TowerNode::Algebraic { below, name: n, .. }
            | TowerNode::Transcendental { below, name: n } => n == name || below.contains_name(name),
        }
    }

    /// Generator names from the bottom step upwards.
    pub fn names(&self) -> Vec<String> {
        let mut out = match self.below() {
            None => Vec::new(),
            Some(b) => b.names(),
        };
        if let Some(n) = self.top_name() {
            out.push(n.to_string());
        }
        out
    }

    pub fn has_transcendental(&self) -> bool {
        self.transcendental_name().is_some()
    }

    pub fn transcendental_name(&self) -> Option<String> {
        match &*self.node {
            TowerNode::Rationals => None,
            TowerNode::Transcendental { name, .. } => Some(name.clone()),
            TowerNode::Algebraic { below, .. } => below.transcendental_name(),
        }
    }

    /// All prefix towers from `Q` up to and including `self`.
    pub fn prefixes(&self) -> Vec<FieldTower> {
        let mut out = match self.below() {
            None => Vec::new(),
            Some(b) => b.prefixes(),
        };
        out.push(self.clone());
        out
    }

    pub fn is_prefix_of(&self, other: &FieldTower) -> bool {
        if self == other {
            return true;
        }
        match other.below() {
            None => false,
            Some(b) => self.is_prefix_of(b),
        }
    }

    /// Field degree of `self` over a prefix; `None` when a transcendental
    /// step lies strictly between them.
    pub fn degree_over(&self, prefix: &FieldTower) -> Option<usize> {
        if self == prefix {
            return Some(1);
        }
        match &*self.node {
            TowerNode::Rationals => None,
            TowerNode::Algebraic { below, minpoly, .. } => {
                let d = minpoly.degree().expect("minimal polynomial is nonconstant");
                below.degree_over(prefix).map(|b| b * d)
            }
            TowerNode::Transcendental { .. } => None,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.from_rational(BigRational::zero())
    }

    pub fn one(&self) -> FieldElement {
        self.from_rational(BigRational::one())
    }

    pub fn from_integer(&self, n: i64) -> FieldElement {
        self.from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(&self, r: BigRational) -> FieldElement {
        match &*self.node {
            TowerNode::Rationals => FieldElement { tower: self.clone(), repr: Repr::Rat(r) },
            TowerNode::Algebraic { below, name, .. } => {
                let p = UniPoly::constant(name, below.from_rational(r));
                FieldElement { tower: self.clone(), repr: Repr::Ext(p) }
            }
            TowerNode::Transcendental { below, name } => {
                let num = UniPoly::constant(name, below.from_rational(r));
                let den = UniPoly::one(below, name);
                FieldElement { tower: self.clone(), repr: Repr::Frac { num, den } }
            }
        }
    }

    /// Generator of the top step (`None` over `Q`).
    pub fn generator(&self) -> Option<FieldElement> {
        match &*self.node {
            TowerNode::Rationals => None,
            TowerNode::Algebraic { below, name, .. } => Some(FieldElement {
                tower: self.clone(),
                repr: Repr::Ext(UniPoly::variable(below, name)),
            }),
            TowerNode::Transcendental { below, name } => Some(FieldElement {
                tower: self.clone(),
                repr: Repr::Frac {
                    num: UniPoly::variable(below, name),
                    den: UniPoly::one(below, name),
                },
            }),
        }
    }

    /// Generator with a given name, lifted into this tower.
    pub fn generator_named(&self, name: &str) -> Result<FieldElement, FieldError> {
        if self.top_name() == Some(name) {
            return Ok(self.generator().expect("non-rational tower has a generator"));
        }
        match self.below() {
            None => Err(FieldError::UnknownGenerator(name.to_string())),
            Some(b) => b.generator_named(name)?.lift_to(self),
        }
    }

    /// Detailed description including minimal polynomials.
    pub fn describe(&self) -> String {
        match &*self.node {
            TowerNode::Rationals => "Q".to_string(),
            TowerNode::Algebraic { below, name, minpoly } => {
                format!("{}({} | {} = 0)", below.describe(), name, minpoly)
            }
            TowerNode::Transcendental { below, name } => {
                format!("{}({})", below.describe(), name)
            }
        }
    }
}

impl fmt::Display for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            TowerNode::Rationals => write!(f, "Q"),
            TowerNode::Algebraic { below, name, .. }
            | TowerNode::Transcendental { below, name } => write!(f, "{}({})", below, name),
        }
    }
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldTower({})", self.describe())
    }
}

#[derive(Clone, PartialEq)]
pub(crate) enum Repr {
    /// Element of `Q`.
    Rat(BigRational),
    /// Element of an algebraic step: a polynomial in the top generator
    /// over the tower below, reduced modulo the minimal polynomial.
    Ext(UniPoly),
    /// Element of a transcendental step: a reduced fraction with monic
    /// denominator over the tower below.
    Frac { num: UniPoly, den: UniPoly },
}

/// An element of a [`FieldTower`], kept in canonical form.
#[derive(Clone, PartialEq)]
pub struct FieldElement {
    tower: FieldTower,
    repr: Repr,
}

impl Eq for FieldElement {}

impl FieldElement {
    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_zero(),
            Repr::Ext(p) => p.is_zero(),
            Repr::Frac { num, .. } => num.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_one(),
            Repr::Ext(p) => p.is_one(),
            Repr::Frac { num, den } => num.is_one() && den.is_one(),
        }
    }

    /// The value as a rational number, when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Rat(r) => Some(r.clone()),
            Repr::Ext(p) => {
                if p.is_constant() {
                    p.constant_term().as_rational()
                } else {
                    None
                }
            }
            Repr::Frac { num, den } => {
                if den.is_one() && num.is_constant() {
                    num.constant_term().as_rational()
                } else {
                    None
                }
            }
        }
    }

    /// Polynomial representation over the tower below (algebraic step).
    pub fn as_ext_poly(&self) -> Option<&UniPoly> {
        match &self.repr {
            Repr::Ext(p) => Some(p),
            _ => None,
        }
    }

    /// Numerator and denominator over the tower below (transcendental step).
    pub fn as_frac(&self) -> Option<(&UniPoly, &UniPoly)> {
        match &self.repr {
            Repr::Frac { num, den } => Some((num, den)),
            _ => None,
        }
    }

    /// Build an element of an algebraic step from a polynomial in the top
    /// generator; the polynomial is reduced modulo the minimal polynomial.
    pub fn from_ext_poly(tower: &FieldTower, p: UniPoly) -> Result<FieldElement, FieldError> {
        let minpoly = tower.top_minpoly().ok_or_else(|| {
            FieldError::TowerMismatch("top step of the tower is not algebraic".into())
        })?;
        if p.tower() != tower.below().expect("algebraic step has a base") || p.var() != tower.top_name().expect("algebraic step is named") {
            return Err(FieldError::TowerMismatch(
                "polynomial must be over the tower below in the top generator".into(),
            ));
        }
        let reduced = p.rem(minpoly).expect("minimal polynomial is nonzero");
        Ok(FieldElement { tower: tower.clone(), repr: Repr::Ext(reduced) })
    }

    /// Build an element of a transcendental step from a fraction; the
    /// fraction is reduced and the denominator normalized monic.
    pub fn from_frac(
        tower: &FieldTower,
        num: UniPoly,
        den: UniPoly,
    ) -> Result<FieldElement, FieldError> {
        if !tower.top_is_transcendental() {
            return Err(FieldError::TowerMismatch(
                "top step of the tower is not transcendental".into(),
            ));
        }
        let base = tower.below().expect("transcendental step has a base");
        let name = tower.top_name().expect("transcendental step is named");
        if num.tower() != base || den.tower() != base || num.var() != name || den.var() != name {
            return Err(FieldError::TowerMismatch(
                "fraction must be over the tower below in the top generator".into(),
            ));
        }
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::make_frac(tower.clone(), num, den))
    }

    fn make_frac(tower: FieldTower, num: UniPoly, den: UniPoly) -> FieldElement {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            let one = UniPoly::one(num.tower(), num.var());
            return FieldElement { tower, repr: Repr::Frac { num, den: one } };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides numerator"),
                den.exact_div(&g).expect("gcd divides denominator"),
            )
        };
        let lc_inv = den
            .leading_coefficient()
            .expect("nonzero denominator")
            .inv()
            .expect("nonzero leading coefficient is invertible");
        let num = num.scale(&lc_inv);
        let den = den.scale(&lc_inv);
        FieldElement { tower, repr: Repr::Frac { num, den } }
    }

    fn check_tower(&self, other: &FieldElement, op: &str) {
        assert!(
            self.tower == other.tower,
            "field {op} requires both operands in the same tower ({} vs {})",
            self.tower,
            other.tower
        );
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        self.check_tower(other, "addition");
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a + b),
            (Repr::Ext(p), Repr::Ext(q)) => Repr::Ext(p.add(q)),
            (Repr::Frac { num: n1, den: d1 }, Repr::Frac { num: n2, den: d2 }) => {
                let num = n1.mul(d2).add(&n2.mul(d1));
                return Self::make_frac(self.tower.clone(), num, d1.mul(d2));
            }
            _ => unreachable!("equal towers imply equal representation kinds"),
        };
        FieldElement { tower: self.tower.clone(), repr }
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FieldElement {
        let repr = match &self.repr {
            Repr::Rat(a) => Repr::Rat(-a),
            Repr::Ext(p) => Repr::Ext(p.neg()),
            Repr::Frac { num, den } => Repr::Frac { num: num.neg(), den: den.clone() },
        };
        FieldElement { tower: self.tower.clone(), repr }
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        self.check_tower(other, "multiplication");
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a * b),
            (Repr::Ext(p), Repr::Ext(q)) => {
                let m = self.tower.top_minpoly().expect("algebraic step");
                Repr::Ext(p.mul(q).rem(m).expect("minimal polynomial is nonzero"))
            }
            (Repr::Frac { num: n1, den: d1 }, Repr::Frac { num: n2, den: d2 }) => {
                return Self::make_frac(self.tower.clone(), n1.mul(n2), d1.mul(d2));
            }
            _ => unreachable!("equal towers imply equal representation kinds"),
        };
        FieldElement { tower: self.tower.clone(), repr }
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let repr = match &self.repr {
            Repr::Rat(a) => Repr::Rat(a.recip()),
            Repr::Ext(p) => {
                let m = self.tower.top_minpoly().expect("algebraic step");
                let (g, s, _) = p.ext_gcd(m);
                debug_assert!(g.is_one(), "minimal polynomial is irreducible");
                Repr::Ext(s.rem(m).expect("minimal polynomial is nonzero"))
            }
            Repr::Frac { num, den } => {
                return Ok(Self::make_frac(self.tower.clone(), den.clone(), num.clone()));
            }
        };
        Ok(FieldElement { tower: self.tower.clone(), repr })
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Nonnegative integer power.
    pub fn powu(&self, n: usize) -> FieldElement {
        let mut acc = self.tower.one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Integer power; negative exponents require an invertible element.
    pub fn pow(&self, n: i64) -> Result<FieldElement, FieldError> {
        if n >= 0 {
            Ok(self.powu(n as usize))
        } else {
            Ok(self.inv()?.powu(n.unsigned_abs() as usize))
        }
    }

    /// View the element in an extension of its tower.
    pub fn lift_to(&self, target: &FieldTower) -> Result<FieldElement, FieldError> {
        if &self.tower == target {
            return Ok(self.clone());
        }
        let below = target.below().ok_or_else(|| {
            FieldError::TowerMismatch(format!("{} is not a prefix of {}", self.tower, target))
        })?;
        let inner = self.lift_to(below)?;
        Ok(Self::wrap_from_below(target, inner))
    }

    /// Wrap an element of `tower.below()` as a constant of `tower`.
    fn wrap_from_below(tower: &FieldTower, x: FieldElement) -> FieldElement {
        debug_assert_eq!(Some(x.tower()), tower.below());
        match &*tower.node {
            TowerNode::Rationals => unreachable!("Q has no base"),
            TowerNode::Algebraic { name, .. } => FieldElement {
                tower: tower.clone(),
                repr: Repr::Ext(UniPoly::constant(name, x)),
            },
            TowerNode::Transcendental { below, name } => FieldElement {
                tower: tower.clone(),
                repr: Repr::Frac {
                    num: UniPoly::constant(name, x),
                    den: UniPoly::one(below, name),
                },
            },
        }
    }

    /// Move the element down into a prefix tower; fails when it does not
    /// lie there.
    pub fn restrict_to(&self, target: &FieldTower) -> Result<FieldElement, FieldError> {
        if &self.tower == target {
            return Ok(self.clone());
        }
        let below = self.tower.below().ok_or_else(|| {
            FieldError::TowerMismatch(format!("{} is not a prefix of {}", target, self.tower))
        })?;
        let inner = match &self.repr {
            Repr::Rat(_) => unreachable!("Q has no base"),
            Repr::Ext(p) => {
                if !p.is_constant() {
                    return Err(FieldError::NotInSubfield);
                }
                p.constant_term()
            }
            Repr::Frac { num, den } => {
                if !den.is_one() || !num.is_constant() {
                    return Err(FieldError::NotInSubfield);
                }
                num.constant_term()
            }
        };
        debug_assert_eq!(inner.tower(), below);
        inner.restrict_to(target)
    }

    /// Whether the element lies in the given prefix tower.
    pub fn lies_in(&self, prefix: &FieldTower) -> bool {
        self.restrict_to(prefix).is_ok()
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rat(r) => write!(f, "{}", r),
            Repr::Ext(p) => write!(f, "{}", p),
            Repr::Frac { num, den } => {
                if den.is_one() {
                    write!(f, "{}", num)
                } else {
                    write!(f, "({})/({})", num, den)
                }
            }
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({})", self)
    }
}

/// Evaluation of the top transcendental generator at a point of the
/// tower below; everything below is fixed.
pub struct Specialization {
    source: FieldTower,
    target: FieldTower,
    point: FieldElement,
}

impl Specialization {
    /// `source` must have its transcendental generator topmost, and the
    /// point must lie in the tower below it.
    pub fn at(source: &FieldTower, point: FieldElement) -> Result<Specialization, FieldError> {
        if !source.top_is_transcendental() {
            return Err(FieldError::UnsupportedTowerShape(
                "specialization requires the transcendental generator topmost".into(),
            ));
        }
        let target = source.below().expect("transcendental step has a base").clone();
        if point.tower() != &target {
            return Err(FieldError::TowerMismatch(
                "specialization point must lie in the tower below the transcendental step".into(),
            ));
        }
        Ok(Specialization { source: source.clone(), target, point })
    }

    pub fn source(&self) -> &FieldTower {
        &self.source
    }

    pub fn target(&self) -> &FieldTower {
        &self.target
    }

    pub fn point(&self) -> &FieldElement {
        &self.point
    }

    pub fn apply(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        if x.tower() != &self.source {
            return Err(FieldError::TowerMismatch(
                "element does not belong to the specialization source".into(),
            ));
        }
        let (num, den) = x.as_frac().expect("source top step is transcendental");
        let d = den.evaluate(&self.point);
        if d.is_zero() {
            return Err(FieldError::DenominatorVanishes);
        }
        Ok(num.evaluate(&self.point).mul(&d.inv()?))
    }

    /// Apply the specialization to every coefficient of a polynomial.
    pub fn apply_poly(&self, p: &UniPoly) -> Result<UniPoly, FieldError> {
        p.map_coefficients(&self.target, |c| self.apply(c))
    }
}

/// A field homomorphism between towers, given by images of the source
/// generators (bottom-up). Minimal polynomials are checked to map to
/// zero, so the map is a well-defined field embedding on algebraic
/// steps; for a transcendental generator the caller must supply an image
/// that is genuinely transcendental over the image of the base.
#[derive(Clone)]
pub struct TowerEmbedding {
    source: FieldTower,
    target: FieldTower,
    gen_images: Vec<FieldElement>,
}

impl TowerEmbedding {
    pub fn new(
        source: &FieldTower,
        target: &FieldTower,
        gen_images: Vec<FieldElement>,
    ) -> Result<TowerEmbedding, FieldError> {
        if gen_images.len() != source.depth() {
            return Err(FieldError::TowerMismatch(format!(
                "expected {} generator images, got {}",
                source.depth(),
                gen_images.len()
            )));
        }
        for img in &gen_images {
            if img.tower() != target {
                return Err(FieldError::TowerMismatch(
                    "generator image does not lie in the target tower".into(),
                ));
            }
        }
        let emb = TowerEmbedding {
            source: source.clone(),
            target: target.clone(),
            gen_images,
        };
        // Verify that each minimal polynomial maps to zero.
        for (i, prefix) in source.prefixes().iter().enumerate().skip(1) {
            if let Some(m) = prefix.top_minpoly() {
                let mut acc = target.zero();
                let img = &emb.gen_images[i - 1];
                for j in (0..=m.degree().expect("nonconstant minimal polynomial")).rev() {
                    let c = emb.apply_below(&m.coefficient(j))?;
                    acc = acc.mul(img).add(&c);
                }
                if !acc.is_zero() {
                    return Err(FieldError::InvalidMinimalPolynomial(format!(
                        "image of generator {:?} does not satisfy its minimal polynomial",
                        prefix.top_name().expect("algebraic step is named")
                    )));
                }
            }
        }
        Ok(emb)
    }

    /// Identity embedding of a tower into itself.
    pub fn identity(tower: &FieldTower) -> TowerEmbedding {
        let images = tower
            .prefixes()
            .iter()
            .skip(1)
            .map(|p| {
                p.generator()
                    .expect("non-rational prefix has a generator")
                    .lift_to(tower)
                    .expect("prefix lifts into the full tower")
            })
            .collect();
        TowerEmbedding {
            source: tower.clone(),
            target: tower.clone(),
            gen_images: images,
        }
    }

    /// Inclusion of a prefix tower into an extension.
    pub fn inclusion(source: &FieldTower, target: &FieldTower) -> Result<TowerEmbedding, FieldError> {
        if !source.is_prefix_of(target) {
            return Err(FieldError::TowerMismatch(format!(
                "{source} is not a prefix of {target}"
            )));
        }
        let images = source
            .prefixes()
            .iter()
            .skip(1)
            .map(|p| {
                p.generator()
                    .expect("non-rational prefix has a generator")
                    .lift_to(target)
                    .expect("prefix lifts into the target tower")
            })
            .collect();
        Ok(TowerEmbedding { source: source.clone(), target: target.clone(), gen_images: images })
    }

    pub fn source(&self) -> &FieldTower {
        &self.source
    }

    pub fn target(&self) -> &FieldTower {
        &self.target
    }

    pub fn gen_images(&self) -> &[FieldElement] {
        &self.gen_images
    }

    /// Image of an element of any prefix of the source tower.
    fn apply_below(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        let depth = x.tower().depth();
        if !x.tower().is_prefix_of(&self.source) {
            return Err(FieldError::TowerMismatch(
                "element does not belong to a prefix of the embedding source".into(),
            ));
        }
        match &x.repr {
            Repr::Rat(r) => Ok(self.target.from_rational(r.clone())),
            Repr::Ext(p) => {
                let img = &self.gen_images[depth - 1];
                self.apply_horner(p, img)
            }
            Repr::Frac { num, den } => {
                let img = &self.gen_images[depth - 1];
                let n = self.apply_horner(num, img)?;
                let d = self.apply_horner(den, img)?;
                if d.is_zero() {
                    return Err(FieldError::DenominatorVanishes);
                }
                n.div(&d)
            }
        }
    }

    fn apply_horner(
        &self,
        p: &UniPoly,
        at: &FieldElement,
    ) -> Result<FieldElement, FieldError> {
        let mut acc = self.target.zero();
        let deg = match p.degree() {
            None => return Ok(acc),
            Some(d) => d,
        };
        for j in (0..=deg).rev() {
            let c = self.apply_below(&p.coefficient(j))?;
            acc = acc.mul(at).add(&c);
        }
        Ok(acc)
    }

    pub fn apply(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        if x.tower() != &self.source {
            return Err(FieldError::TowerMismatch(
                "element does not belong to the embedding source".into(),
            ));
        }
        self.apply_below(x)
    }

    /// Map a polynomial coefficient-wise, keeping the variable.
    pub fn apply_poly(&self, p: &UniPoly) -> Result<UniPoly, FieldError> {
        p.map_coefficients(&self.target, |c| self.apply(c))
    }

    /// Composition `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &TowerEmbedding) -> Result<TowerEmbedding, FieldError> {
        if self.target != other.source {
            return Err(FieldError::TowerMismatch(
                "embedding composition requires matching middle tower".into(),
            ));
        }
        let images = self
            .gen_images
            .iter()
            .map(|img| other.apply(img))
            .collect::<Result<Vec<_>, _>>()?;
        TowerEmbedding::new(&self.source, &other.target, images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldTower {
        FieldTower::rationals()
    }

    fn sqrt2_tower() -> FieldTower {
        let base = q();
        let m = UniPoly::from_integers(&base, "a", &[-2, 0, 1]);
        base.extend_algebraic("a", m).expect("x^2 - 2 is irreducible")
    }

    #[test]
    fn test_rational_arithmetic() {
        let t = q();
        let half = t.from_rational(BigRational::new(BigInt::from(1), BigInt::from(2)));
        let third = t.from_rational(BigRational::new(BigInt::from(1), BigInt::from(3)));
        let sum = half.add(&third);
        assert_eq!(sum.as_rational(), Some(BigRational::new(BigInt::from(5), BigInt::from(6))));
        assert!(half.sub(&half).is_zero());
    }

    #[test]
    fn test_quadratic_extension_arithmetic() {
        let k = sqrt2_tower();
        let a = k.generator().expect("generator exists");
        // a * a = 2
        assert_eq!(a.mul(&a), k.from_integer(2));
        // (1 + a)(-1 + a) = 1
        let p = k.one().add(&a);
        let m = k.one().neg().add(&a);
        assert_eq!(p.mul(&m), k.one());
        // 1/a = a/2
        let inv = a.inv().expect("a is nonzero");
        assert_eq!(inv.mul(&a), k.one());
    }

    #[test]
    fn test_reducible_minpoly_rejected() {
        let t = q();
        let m = UniPoly::from_integers(&t, "a", &[-4, 0, 1]); // a^2 - 4 = (a-2)(a+2)
        match t.extend_algebraic("a", m) {
            Err(FieldError::ReducibleMinimalPolynomial) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn test_rational_function_field() {
        let ku = q().extend_transcendental("u").expect("fresh transcendental");
        let u = ku.generator().expect("generator exists");
        // (u^2 - 1)/(u - 1) = u + 1
        let num = u.mul(&u).sub(&ku.one());
        let den = u.sub(&ku.one());
        let val = num.div(&den).expect("nonzero denominator");
        assert_eq!(val, u.add(&ku.one()));
        // only one transcendental generator is allowed
        assert!(matches!(
            ku.extend_transcendental("v"),
            Err(FieldError::TranscendentalAlreadyPresent)
        ));
    }

    #[test]
    fn test_lift_and_restrict_roundtrip() {
        let k = sqrt2_tower();
        let ku = k.extend_transcendental("u").expect("fresh transcendental");
        let a = k.generator().expect("generator exists");
        let lifted = a.lift_to(&ku).expect("k is a prefix");
        let back = lifted.restrict_to(&k).expect("constant in u");
        assert_eq!(back, a);
        // u itself does not restrict to k
        let u = ku.generator().expect("generator exists");
        assert!(matches!(u.restrict_to(&k), Err(FieldError::NotInSubfield)));
    }

    #[test]
    fn test_tower_on_top_of_transcendental() {
        // Q(u) then adjoin a with a^2 = u.
        let ku = q().extend_transcendental("u").expect("fresh transcendental");
        let u = ku.generator().expect("generator exists");
        let m_coeffs = vec![u.neg(), ku.zero(), ku.one()];
        let m = UniPoly::from_coeffs(&ku, "a", m_coeffs);
        let top = ku.extend_algebraic("a", m).expect("x^2 - u is irreducible over Q(u)");
        let a = top.generator().expect("generator exists");
        let u_lift = u.lift_to(&top).expect("prefix");
        assert_eq!(a.mul(&a), u_lift);
        let inv = a.inv().expect("a is nonzero");
        assert_eq!(inv.mul(&a), top.one());
    }

    #[test]
    fn test_specialization() {
        let ku = q().extend_transcendental("u").expect("fresh transcendental");
        let u = ku.generator().expect("generator exists");
        let x = u.mul(&u).add(&ku.one()).div(&u).expect("u is nonzero"); // (u^2+1)/u
        let sp = Specialization::at(&ku, q().from_integer(2)).expect("u is topmost");
        assert_eq!(sp.apply(&x).expect("denominator nonzero"), q().from_rational(
            BigRational::new(BigInt::from(5), BigInt::from(2))
        ));
        let at_zero = Specialization::at(&ku, q().from_integer(0)).expect("u is topmost");
        assert!(matches!(at_zero.apply(&x), Err(FieldError::DenominatorVanishes)));
    }

    #[test]
    fn test_embedding_u_to_v_squared() {
        let ku = q().extend_transcendental("u").expect("fresh transcendental");
        let kv = q().extend_transcendental("v").expect("fresh transcendental");
        let v = kv.generator().expect("generator exists");
        let emb = TowerEmbedding::new(&ku, &kv, vec![v.mul(&v)]).expect("valid embedding");
        let u = ku.generator().expect("generator exists");
        let x = u.add(&ku.one());
        assert_eq!(emb.apply(&x).expect("polynomial image"), v.mul(&v).add(&kv.one()));
    }

    #[test]
    fn test_minpoly_image_verified() {
        // a |-> 1 does not satisfy a^2 = 2, so the embedding is rejected.
        let k = sqrt2_tower();
        let bad = TowerEmbedding::new(&k, &k, vec![k.one()]);
        assert!(matches!(bad, Err(FieldError::InvalidMinimalPolynomial(_))));
    }
}
