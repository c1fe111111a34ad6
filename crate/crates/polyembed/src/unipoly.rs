//! Dense univariate polynomials and rational functions over a field tower.
//!
//! A [`UniPoly`] stores its coefficients in ascending degree order with
//! trailing zeros trimmed, together with the coefficient tower and the
//! variable name. Arithmetic between polynomials requires identical
//! towers and variable names; mixing them is a programming error and
//! panics, while genuinely fallible operations return a [`PolyError`].

use std::fmt;

use num::BigRational;
use thiserror::Error;

use crate::fields::{FieldElement, FieldError, FieldTower};

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("exact division left a nonzero remainder")]
    NonzeroRemainder,
    #[error("{0}")]
    Incompatible(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A dense univariate polynomial over a field tower.
#[derive(Clone, PartialEq)]
pub struct UniPoly {
    tower: FieldTower,
    var: String,
    /// Ascending degree; empty means the zero polynomial; the last entry
    /// is nonzero otherwise.
    coeffs: Vec<FieldElement>,
}

impl UniPoly {
    pub fn zero(tower: &FieldTower, var: &str) -> Self {
        UniPoly { tower: tower.clone(), var: var.to_string(), coeffs: Vec::new() }
    }

    pub fn one(tower: &FieldTower, var: &str) -> Self {
        Self::constant(var, tower.one())
    }

    pub fn constant(var: &str, value: FieldElement) -> Self {
        let tower = value.tower().clone();
        let coeffs = if value.is_zero() { Vec::new() } else { vec![value] };
        UniPoly { tower, var: var.to_string(), coeffs }
    }

    pub fn variable(tower: &FieldTower, var: &str) -> Self {
        UniPoly {
            tower: tower.clone(),
            var: var.to_string(),
            coeffs: vec![tower.zero(), tower.one()],
        }
    }

    pub fn monomial(var: &str, coeff: FieldElement, exp: usize) -> Self {
        let tower = coeff.tower().clone();
        if coeff.is_zero() {
            return Self::zero(&tower, var);
        }
        let mut coeffs = vec![tower.zero(); exp];
        coeffs.push(coeff);
        UniPoly { tower, var: var.to_string(), coeffs }
    }

    pub fn from_coeffs(tower: &FieldTower, var: &str, coeffs: Vec<FieldElement>) -> Self {
        for c in &coeffs {
            assert!(
                c.tower() == tower,
                "coefficient tower mismatch while building polynomial in {var}"
            );
        }
        let mut p = UniPoly { tower: tower.clone(), var: var.to_string(), coeffs };
        p.trim();
        p
    }

    /// Polynomial with integer coefficients, ascending degree.
    pub fn from_integers(tower: &FieldTower, var: &str, coeffs: &[i64]) -> Self {
        let cs = coeffs.iter().map(|&c| tower.from_integer(c)).collect();
        Self::from_coeffs(tower, var, cs)
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_monic(&self) -> bool {
        matches!(self.coeffs.last(), Some(c) if c.is_one())
    }

    /// Coefficient of `x^i` (zero when `i` exceeds the degree).
    pub fn coefficient(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.tower.zero())
    }

    pub fn coefficients(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn leading_coefficient(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    /// The constant term.
    pub fn constant_term(&self) -> FieldElement {
        self.coefficient(0)
    }

    /// Same polynomial under a different variable name.
    pub fn with_var(&self, var: &str) -> UniPoly {
        UniPoly { tower: self.tower.clone(), var: var.to_string(), coeffs: self.coeffs.clone() }
    }

    fn check_compat(&self, other: &UniPoly, op: &str) {
        assert!(
            self.var == other.var && self.tower == other.tower,
            "polynomial {op} requires matching variable and tower (lhs {}, rhs {})",
            self.var,
            other.var
        );
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        self.check_compat(other, "addition");
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coefficient(i).add(&other.coefficient(i)));
        }
        let mut p = UniPoly { tower: self.tower.clone(), var: self.var.clone(), coeffs };
        p.trim();
        p
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.check_compat(other, "subtraction");
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coefficient(i).sub(&other.coefficient(i)));
        }
        let mut p = UniPoly { tower: self.tower.clone(), var: self.var.clone(), coeffs };
        p.trim();
        p
    }

    pub fn neg(&self) -> UniPoly {
        let coeffs = self.coeffs.iter().map(|c| c.neg()).collect();
        UniPoly { tower: self.tower.clone(), var: self.var.clone(), coeffs }
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        self.check_compat(other, "multiplication");
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.tower, &self.var);
        }
        let mut coeffs = vec![self.tower.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        let mut p = UniPoly { tower: self.tower.clone(), var: self.var.clone(), coeffs };
        p.trim();
        p
    }

    pub fn scale(&self, c: &FieldElement) -> UniPoly {
        assert!(c.tower() == &self.tower, "scalar tower mismatch in polynomial scaling");
        if c.is_zero() {
            return Self::zero(&self.tower, &self.var);
        }
        let coeffs = self.coeffs.iter().map(|a| a.mul(c)).collect();
        UniPoly { tower: self.tower.clone(), var: self.var.clone(), coeffs }
    }

    /// Multiply by `x^k`.
    pub fn mul_xpow(&self, k: usize) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![self.tower.zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        UniPoly { tower: self.tower.clone(), var: self.var.clone(), coeffs }
    }

    pub fn pow(&self, n: usize) -> UniPoly {
        let mut acc = Self::one(&self.tower, &self.var);
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

    /// Quotient and remainder with `deg r < deg d`.
    pub fn divmod(&self, d: &UniPoly) -> Result<(UniPoly, UniPoly), PolyError> {
        self.check_compat(d, "division");
        if d.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let dd = d.degree().expect("nonzero divisor");
        let lc_inv = d
            .leading_coefficient()
            .expect("nonzero divisor")
            .inv()
            .expect("nonzero leading coefficient is invertible");
        let mut rem = self.clone();
        let mut quot = Self::zero(&self.tower, &self.var);
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = rem.coefficient(rd).mul(&lc_inv);
            let shift = rd - dd;
            quot = quot.add(&UniPoly::monomial(&self.var, factor.clone(), shift));
            rem = rem.sub(&d.mul_xpow(shift).scale(&factor));
        }
        Ok((quot, rem))
    }

    pub fn rem(&self, d: &UniPoly) -> Result<UniPoly, PolyError> {
        Ok(self.divmod(d)?.1)
    }

    /// Division that must be exact.
    pub fn exact_div(&self, d: &UniPoly) -> Result<UniPoly, PolyError> {
        let (q, r) = self.divmod(d)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(PolyError::NonzeroRemainder)
        }
    }

    /// Monic normalization; the zero polynomial is returned unchanged.
    pub fn monic(&self) -> UniPoly {
        match self.leading_coefficient() {
            None => self.clone(),
            Some(lc) if lc.is_one() => self.clone(),
            Some(lc) => {
                let inv = lc.inv().expect("nonzero leading coefficient is invertible");
                self.scale(&inv)
            }
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        self.check_compat(other, "gcd");
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("remainder by nonzero polynomial");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns monic `g` and cofactors `(s, t)` with
    /// `s*self + t*other = g`.
    pub fn ext_gcd(&self, other: &UniPoly) -> (UniPoly, UniPoly, UniPoly) {
        self.check_compat(other, "extended gcd");
        let mut r0 = self.clone();
        let mut r1 = other.clone();
        let mut s0 = Self::one(&self.tower, &self.var);
        let mut s1 = Self::zero(&self.tower, &self.var);
        let mut t0 = Self::zero(&self.tower, &self.var);
        let mut t1 = Self::one(&self.tower, &self.var);
        while !r1.is_zero() {
            let (q, r) = r0.divmod(&r1).expect("division by nonzero polynomial");
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        match r0.leading_coefficient() {
            None => (r0, s0, t0),
            Some(lc) => {
                let inv = lc.inv().expect("nonzero leading coefficient is invertible");
                (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
            }
        }
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return Self::zero(&self.tower, &self.var);
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() - 1);
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            coeffs.push(c.mul(&self.tower.from_integer(i as i64)));
        }
        let mut p = UniPoly { tower: self.tower.clone(), var: self.var.clone(), coeffs };
        p.trim();
        p
    }

    /// Horner evaluation at a point of the same tower.
    pub fn evaluate(&self, x: &FieldElement) -> FieldElement {
        assert!(x.tower() == &self.tower, "evaluation point tower mismatch");
        let mut acc = self.tower.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Substitute a polynomial for the variable.
    pub fn compose(&self, inner: &UniPoly) -> UniPoly {
        assert!(inner.tower() == &self.tower, "composition tower mismatch");
        let mut acc = UniPoly::zero(&self.tower, inner.var());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&UniPoly::constant(inner.var(), c.clone()));
        }
        acc
    }

    /// Map every coefficient through `f` into a (possibly different)
    /// tower, keeping the variable name.
    pub fn map_coefficients<E>(
        &self,
        target: &FieldTower,
        mut f: impl FnMut(&FieldElement) -> Result<FieldElement, E>,
    ) -> Result<UniPoly, E> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(f(c)?);
        }
        let mut p = UniPoly { tower: target.clone(), var: self.var.clone(), coeffs };
        p.trim();
        Ok(p)
    }

    /// Lift the coefficients into an extension of the current tower.
    pub fn lift_to(&self, target: &FieldTower) -> Result<UniPoly, FieldError> {
        self.map_coefficients(target, |c| c.lift_to(target))
    }

    /// If every coefficient is rational, return the coefficient list.
    pub fn rational_coeffs(&self) -> Option<Vec<BigRational>> {
        self.coeffs.iter().map(|c| c.as_rational()).collect()
    }

    /// `Some((exp, coeff))` when the polynomial has a single term.
    pub fn monomial_form(&self) -> Option<(usize, FieldElement)> {
        let mut found = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if found.is_some() {
                return None;
            }
            found = Some((i, c.clone()));
        }
        found
    }

    /// Yun squarefree decomposition in characteristic zero: monic,
    /// pairwise coprime squarefree parts with multiplicities such that
    /// the monic normalization of `self` equals the product of
    /// `part^multiplicity`. Constants decompose into nothing.
    pub fn squarefree_decomposition(&self) -> Vec<(UniPoly, usize)> {
        let f = self.monic();
        if f.is_constant() {
            return Vec::new();
        }
        let df = f.derivative();
        let g = f.gcd(&df);
        let mut b = f.exact_div(&g).expect("gcd divides");
        let mut d = df.exact_div(&g).expect("gcd divides").sub(&b.derivative());
        let mut out = Vec::new();
        let mut i = 1usize;
        while !b.is_constant() {
            let a = b.gcd(&d);
            if !a.is_constant() {
                out.push((a.clone(), i));
            }
            b = b.exact_div(&a).expect("gcd divides");
            d = d.exact_div(&a).expect("gcd divides").sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Right composition factor of prescribed degree: find `(g, h)` with
    /// `self = g(h)`, `h` monic of degree `e` with zero constant term,
    /// and `g` in a fresh outer variable. Returns `None` when no such
    /// decomposition exists. Requires `e ≥ 1` and `e | deg self`.
    pub fn decompose_right(&self, e: usize) -> Result<Option<(UniPoly, UniPoly)>, PolyError> {
        let n = match self.degree() {
            None | Some(0) => return Ok(None),
            Some(n) => n,
        };
        if e == 0 || n % e != 0 {
            return Ok(None);
        }
        let m = n / e;
        let lc = self.leading_coefficient().expect("nonzero polynomial").clone();
        let fhat = self.monic();
        // Solve for the coefficients of h top-down: the x^(n-j) coefficient
        // of h^m pins b_(e-j) linearly once the higher ones are known.
        let mut h = UniPoly::monomial(&self.var, self.tower.one(), e);
        let m_elem = self.tower.from_integer(m as i64);
        let m_inv = m_elem.inv().expect("characteristic zero");
        for j in 1..e {
            let pw = h.pow(m);
            let b = fhat.coefficient(n - j).sub(&pw.coefficient(n - j)).mul(&m_inv);
            if !b.is_zero() {
                h = h.add(&UniPoly::monomial(&self.var, b, e - j));
            }
        }
        // h-adic digits of self; a decomposition exists exactly when all
        // digits are constants.
        let outer = if self.var == "y" { "z" } else { "y" };
        let mut digits = Vec::with_capacity(m + 1);
        let mut rest = self.clone();
        while !rest.is_zero() {
            let (q, r) = rest.divmod(&h)?;
            if !r.is_constant() {
                return Ok(None);
            }
            digits.push(r.constant_term());
            rest = q;
        }
        let g = UniPoly::from_coeffs(&self.tower, outer, digits);
        debug_assert_eq!(g.leading_coefficient(), Some(&lc));
        Ok(Some((g, h)))
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = c.to_string();
            let (sign, mag) = match cs.strip_prefix('-') {
                Some(rest) if !cs.contains(' ') => ("-", rest.to_string()),
                _ => ("+", cs),
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            first = false;
            let needs_parens =
                mag.contains('+') || mag.contains('-') || mag.contains(' ') || mag.contains('/');
            let coeff_is_one = mag == "1";
            match i {
                0 => {
                    if needs_parens {
                        write!(f, "({})", mag)?;
                    } else {
                        write!(f, "{}", mag)?;
                    }
                }
                _ => {
                    if !coeff_is_one {
                        if needs_parens {
                            write!(f, "({})*", mag)?;
                        } else {
                            write!(f, "{}*", mag)?;
                        }
                    }
                    write!(f, "{}", self.var)?;
                    if i > 1 {
                        write!(f, "^{}", i)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UniPoly({})", self)
    }
}

/// A quotient of two polynomials in canonical form: coprime numerator
/// and denominator with the denominator monic.
#[derive(Clone, PartialEq)]
pub struct RationalFunction {
    num: UniPoly,
    den: UniPoly,
}

impl RationalFunction {
    pub fn new(num: UniPoly, den: UniPoly) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_constant() {
            (num, den)
        } else {
            (num.exact_div(&g)?, den.exact_div(&g)?)
        };
        let lc_inv = den
            .leading_coefficient()
            .expect("nonzero denominator")
            .inv()
            .expect("nonzero leading coefficient is invertible");
        num = num.scale(&lc_inv);
        den = den.scale(&lc_inv);
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(p: UniPoly) -> Self {
        let den = UniPoly::one(p.tower(), p.var());
        RationalFunction { num: p, den }
    }

    pub fn num(&self) -> &UniPoly {
        &self.num
    }

    pub fn den(&self) -> &UniPoly {
        &self.den
    }

    pub fn tower(&self) -> &FieldTower {
        self.num.tower()
    }

    pub fn var(&self) -> &str {
        self.num.var()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_one()
    }

    /// Degree as a map: `max(deg num, deg den)`.
    pub fn map_degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Self::new(num, self.den.mul(&other.den))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        let num = self.num.mul(&other.den).sub(&other.num.mul(&self.den));
        Self::new(num, self.den.mul(&other.den))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        Self::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn inv(&self) -> Result<Self, PolyError> {
        if self.num.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    /// Evaluate at a field element; fails when the denominator vanishes.
    pub fn evaluate(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        let d = self.den.evaluate(x);
        if d.is_zero() {
            return Err(FieldError::DenominatorVanishes);
        }
        Ok(self.num.evaluate(x).mul(&d.inv()?))
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalFunction({})", self)
    }
}
