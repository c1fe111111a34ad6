//! Sparse multivariate polynomials over a field tower.
//!
//! Just enough multivariate arithmetic for derivations on small
//! polynomial rings: ring construction, exact arithmetic, partial
//! derivatives, substitution, and single-divisor exact division under
//! the lexicographic term order.

use std::collections::BTreeMap;
use std::fmt;

use crate::fields::{FieldElement, FieldTower};
use crate::unipoly::UniPoly;

/// A polynomial ring `k[x_1, …, x_n]`: coefficient tower plus an
/// ordered list of distinct variable names.
#[derive(Clone, PartialEq, Debug)]
pub struct MPolyRing {
    tower: FieldTower,
    vars: Vec<String>,
}

impl MPolyRing {
    pub fn new(tower: &FieldTower, vars: &[&str]) -> MPolyRing {
        let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        for (i, v) in vars.iter().enumerate() {
            assert!(!v.is_empty(), "empty variable name");
            assert!(!vars[..i].contains(v), "duplicate variable name {v}");
        }
        MPolyRing { tower: tower.clone(), vars }
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn zero(&self) -> MPoly {
        MPoly { ring: self.clone(), terms: BTreeMap::new() }
    }

    pub fn one(&self) -> MPoly {
        self.constant(self.tower.one())
    }

    pub fn constant(&self, c: FieldElement) -> MPoly {
        assert!(c.tower() == &self.tower, "constant tower mismatch");
        self.monomial(&vec![0; self.vars.len()], c)
    }

    pub fn var(&self, name: &str) -> MPoly {
        let idx = self
            .var_index(name)
            .unwrap_or_else(|| panic!("unknown variable {name}"));
        let mut exps = vec![0u32; self.vars.len()];
        exps[idx] = 1;
        self.monomial(&exps, self.tower.one())
    }

    pub fn monomial(&self, exps: &[u32], c: FieldElement) -> MPoly {
        assert_eq!(exps.len(), self.vars.len(), "exponent arity mismatch");
        assert!(c.tower() == &self.tower, "coefficient tower mismatch");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps.to_vec(), c);
        }
        MPoly { ring: self.clone(), terms }
    }

    /// Embed a univariate polynomial along its variable name; the
    /// polynomial must live over the same tower and its variable must
    /// be one of the ring's.
    pub fn from_unipoly(&self, p: &UniPoly) -> MPoly {
        assert!(p.tower() == &self.tower, "tower mismatch embedding {p}");
        let idx = self
            .var_index(p.var())
            .unwrap_or_else(|| panic!("unknown variable {} embedding {p}", p.var()));
        let mut acc = self.zero();
        for (i, c) in p.coefficients().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut exps = vec![0u32; self.vars.len()];
            exps[idx] = i as u32;
            acc = acc.add(&self.monomial(&exps, c.clone()));
        }
        acc
    }
}

/// A sparse polynomial: exponent vector → nonzero coefficient.
#[derive(Clone, PartialEq)]
pub struct MPoly {
    ring: MPolyRing,
    terms: BTreeMap<Vec<u32>, FieldElement>,
}

impl MPoly {
    pub fn ring(&self) -> &MPolyRing {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    /// The constant value when the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<FieldElement> {
        if !self.is_constant() {
            return None;
        }
        Some(
            self.terms
                .values()
                .next()
                .cloned()
                .unwrap_or_else(|| self.ring.tower.zero()),
        )
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as usize).sum()).max()
    }

    pub fn degree_in(&self, idx: usize) -> Option<usize> {
        self.terms.keys().map(|e| e[idx] as usize).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &FieldElement)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> FieldElement {
        self.terms.get(exps).cloned().unwrap_or_else(|| self.ring.tower.zero())
    }

    fn check_compat(&self, other: &MPoly, what: &str) {
        assert!(self.ring == other.ring, "ring mismatch in {what}");
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        self.check_compat(other, "addition");
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            match terms.get_mut(e) {
                Some(cur) => {
                    *cur = cur.add(c);
                    if cur.is_zero() {
                        terms.remove(e);
                    }
                }
                None => {
                    terms.insert(e.clone(), c.clone());
                }
            }
        }
        MPoly { ring: self.ring.clone(), terms }
    }

    pub fn neg(&self) -> MPoly {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect();
        MPoly { ring: self.ring.clone(), terms }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &FieldElement) -> MPoly {
        assert!(c.tower() == &self.ring.tower, "scalar tower mismatch");
        if c.is_zero() {
            return self.ring.zero();
        }
        let terms = self.terms.iter().map(|(e, a)| (e.clone(), a.mul(c))).collect();
        MPoly { ring: self.ring.clone(), terms }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        self.check_compat(other, "multiplication");
        let mut terms: BTreeMap<Vec<u32>, FieldElement> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = ca.mul(cb);
                match terms.get_mut(&e) {
                    Some(cur) => {
                        *cur = cur.add(&c);
                        if cur.is_zero() {
                            terms.remove(&e);
                        }
                    }
                    None => {
                        if !c.is_zero() {
                            terms.insert(e, c);
                        }
                    }
                }
            }
        }
        MPoly { ring: self.ring.clone(), terms }
    }

    pub fn powu(&self, n: u32) -> MPoly {
        let mut acc = self.ring.one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn partial(&self, idx: usize) -> MPoly {
        assert!(idx < self.ring.vars.len(), "variable index out of range");
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut de = e.clone();
            de[idx] -= 1;
            let dc = c.mul(&self.ring.tower.from_integer(e[idx] as i64));
            terms.insert(de, dc);
        }
        MPoly { ring: self.ring.clone(), terms }
    }

    /// Replace variable `idx` by `value` (from the same ring).
    pub fn substitute(&self, idx: usize, value: &MPoly) -> MPoly {
        self.check_compat(value, "substitution");
        let mut acc = self.ring.zero();
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let k = rest[idx];
            rest[idx] = 0;
            let term = self.ring.monomial(&rest, c.clone()).mul(&value.powu(k));
            acc = acc.add(&term);
        }
        acc
    }

    /// The polynomial as univariate in variable `idx`, when no other
    /// variable occurs.
    pub fn to_unipoly(&self, idx: usize) -> Option<UniPoly> {
        let mut coeffs =
            vec![self.ring.tower.zero(); self.degree_in(idx).map_or(0, |d| d + 1)];
        for (e, c) in &self.terms {
            for (j, &x) in e.iter().enumerate() {
                if j != idx && x != 0 {
                    return None;
                }
            }
            coeffs[e[idx] as usize] = c.clone();
        }
        Some(UniPoly::from_coeffs(&self.ring.tower, &self.ring.vars[idx], coeffs))
    }

    /// Leading term under the lexicographic order on exponent vectors.
    pub fn leading_term(&self) -> Option<(&Vec<u32>, &FieldElement)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide
    /// `self`. Single-divisor division under the lexicographic order:
    /// the remainder is zero exactly when the division is exact.
    pub fn exact_div(&self, d: &MPoly) -> Option<MPoly> {
        self.check_compat(d, "division");
        assert!(!d.is_zero(), "division by zero polynomial");
        let (de, dc) = d.leading_term().expect("nonzero divisor");
        let (de, dc) = (de.clone(), dc.clone());
        let dc_inv = dc.inv().expect("nonzero leading coefficient");
        let mut rem = self.clone();
        let mut quot = self.ring.zero();
        while let Some((re, rc)) = rem.leading_term().map(|(e, c)| (e.clone(), c.clone())) {
            let e: Vec<u32> = re
                .iter()
                .zip(&de)
                .map(|(x, y)| x.checked_sub(*y))
                .collect::<Option<_>>()?;
            let t = self.ring.monomial(&e, rc.mul(&dc_inv));
            quot = quot.add(&t);
            rem = rem.sub(&t.mul(d));
        }
        Some(quot)
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
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
            let mut monomial = String::new();
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if !monomial.is_empty() {
                    monomial.push('*');
                }
                monomial.push_str(&self.ring.vars[i]);
                if x > 1 {
                    monomial.push_str(&format!("^{x}"));
                }
            }
            if monomial.is_empty() {
                if needs_parens {
                    write!(f, "({})", mag)?;
                } else {
                    write!(f, "{}", mag)?;
                }
            } else {
                if mag != "1" {
                    if needs_parens {
                        write!(f, "({})*", mag)?;
                    } else {
                        write!(f, "{}*", mag)?;
                    }
                }
                write!(f, "{}", monomial)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldTower {
        FieldTower::rationals()
    }

    fn ring() -> MPolyRing {
        MPolyRing::new(&q(), &["x", "y"])
    }

    #[test]
    fn test_arithmetic_basics() {
        let r = ring();
        let x = r.var("x");
        let y = r.var("y");
        let p = x.add(&y).mul(&x.sub(&y));
        let expected = x.mul(&x).sub(&y.mul(&y));
        assert_eq!(p, expected);
        assert_eq!(p.total_degree(), Some(2));
        assert_eq!(p.degree_in(0), Some(2));
        assert!(p.sub(&p).is_zero());
        assert_eq!(r.zero().total_degree(), None);
    }

    #[test]
    fn test_partial_derivatives() {
        let r = ring();
        let x = r.var("x");
        let y = r.var("y");
        // f = x^2 y + 3 y^2
        let f = x.powu(2).mul(&y).add(&y.powu(2).scale(&q().from_integer(3)));
        let fx = f.partial(0);
        let fy = f.partial(1);
        assert_eq!(fx, x.mul(&y).scale(&q().from_integer(2)));
        assert_eq!(fy, x.powu(2).add(&y.scale(&q().from_integer(6))));
    }

    #[test]
    fn test_exact_division() {
        let r = ring();
        let x = r.var("x");
        let y = r.var("y");
        let d = x.add(&y);
        let p = d.mul(&d).mul(&x.sub(&y.scale(&q().from_integer(2))));
        let quot = p.exact_div(&d).unwrap();
        assert_eq!(quot.mul(&d), p);
        // x^2 + y^2 is not divisible by x + y
        let nd = x.powu(2).add(&y.powu(2));
        assert!(nd.exact_div(&d).is_none());
        // dividing by a constant always works
        let half = r.constant(q().from_integer(2));
        assert_eq!(p.exact_div(&half).unwrap().scale(&q().from_integer(2)), p);
    }

    #[test]
    fn test_substitute_and_unipoly_roundtrip() {
        let r = ring();
        let x = r.var("x");
        let y = r.var("y");
        let f = x.powu(2).add(&y.powu(3));
        // substitute y := x^2 gives x^2 + x^6
        let g = f.substitute(1, &x.powu(2));
        assert_eq!(g, x.powu(2).add(&x.powu(6)));
        let u = g.to_unipoly(0).unwrap();
        assert_eq!(u, UniPoly::from_integers(&q(), "x", &[0, 0, 1, 0, 0, 0, 1]));
        assert_eq!(r.from_unipoly(&u), g);
        assert!(f.to_unipoly(0).is_none());
    }

    #[test]
    fn test_display_readability() {
        let r = ring();
        let x = r.var("x");
        let y = r.var("y");
        let f = x
            .powu(2)
            .mul(&y)
            .scale(&q().from_integer(2))
            .sub(&y.powu(3))
            .add(&r.one());
        assert_eq!(f.to_string(), "2*x^2*y - y^3 + 1");
        assert_eq!(r.zero().to_string(), "0");
        assert_eq!(r.one().neg().to_string(), "-1");
    }
}
