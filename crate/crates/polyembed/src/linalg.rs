//! Incremental reduced row-echelon bases over a field tower.
//!
//! Rows are inserted one at a time; each insertion either extends the
//! basis or is reported as dependent together with the exact linear
//! combination that witnesses the dependency. Every row carries a
//! caller-supplied payload that is kept in sync under row operations,
//! so the payload of a basis row always expresses that row in terms of
//! the originally inserted data.

use std::collections::BTreeMap;

use crate::fields::FieldElement;

/// Data that transforms linearly along with its row.
pub(crate) trait Combine: Clone {
    fn scale_by(&mut self, c: &FieldElement);
    /// `self -= c * other`
    fn sub_scaled(&mut self, other: &Self, c: &FieldElement);
}

/// Formal linear combination of insertion indices; the payload to use
/// when the caller just wants dependency certificates.
pub(crate) type Combination = BTreeMap<usize, FieldElement>;

impl Combine for Combination {
    fn scale_by(&mut self, c: &FieldElement) {
        for v in self.values_mut() {
            *v = v.mul(c);
        }
    }

    fn sub_scaled(&mut self, other: &Self, c: &FieldElement) {
        for (k, v) in other {
            let delta = v.mul(c);
            match self.get_mut(k) {
                Some(cur) => {
                    *cur = cur.sub(&delta);
                    if cur.is_zero() {
                        self.remove(k);
                    }
                }
                None => {
                    if !delta.is_zero() {
                        self.insert(*k, delta.neg());
                    }
                }
            }
        }
    }
}

pub(crate) struct Row<P> {
    pub vec: Vec<FieldElement>,
    pub pivot: usize,
    pub payload: P,
}

pub(crate) enum Insertion<P> {
    /// The vector extended the basis.
    Added,
    /// The vector was dependent; the payload combination sums to zero.
    Dependent(P),
}

/// A reduced row-echelon basis: pivot entries are one, pivot columns are
/// zero in every other row, rows are kept ordered by pivot column.
pub(crate) struct Echelon<P> {
    width: usize,
    rows: Vec<Row<P>>,
}

impl<P: Combine> Echelon<P> {
    pub fn new(width: usize) -> Self {
        Echelon { width, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Rows in pivot order.
    pub fn rows(&self) -> &[Row<P>] {
        &self.rows
    }

    pub fn row_by_pivot(&self, pivot: usize) -> Option<&Row<P>> {
        self.rows.iter().find(|r| r.pivot == pivot)
    }

    pub fn insert(&mut self, mut vec: Vec<FieldElement>, mut payload: P) -> Insertion<P> {
        assert_eq!(vec.len(), self.width, "row width mismatch");
        for row in &self.rows {
            let c = vec[row.pivot].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in vec.iter_mut().zip(&row.vec) {
                if !y.is_zero() {
                    *x = x.sub(&y.mul(&c));
                }
            }
            payload.sub_scaled(&row.payload, &c);
        }
        let pivot = match vec.iter().position(|x| !x.is_zero()) {
            None => return Insertion::Dependent(payload),
            Some(p) => p,
        };
        let inv = vec[pivot].inv().expect("pivot entry is nonzero");
        for x in vec.iter_mut() {
            if !x.is_zero() {
                *x = x.mul(&inv);
            }
        }
        payload.scale_by(&inv);
        // clear the new pivot column from the existing rows
        for row in self.rows.iter_mut() {
            let c = row.vec[pivot].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in row.vec.iter_mut().zip(&vec) {
                if !y.is_zero() {
                    *x = x.sub(&y.mul(&c));
                }
            }
            row.payload.sub_scaled(&payload, &c);
        }
        let at = self.rows.partition_point(|r| r.pivot < pivot);
        self.rows.insert(at, Row { vec, pivot, payload });
        Insertion::Added
    }

    /// Express a vector in the span of the basis: returns the pivot and
    /// coefficient of each row used, or `None` when the vector is
    /// outside the span. The input is not inserted.
    pub fn express(&self, vec: &[FieldElement]) -> Option<Vec<(usize, FieldElement)>> {
        assert_eq!(vec.len(), self.width, "row width mismatch");
        let mut v: Vec<FieldElement> = vec.to_vec();
        let mut combo = Vec::new();
        for row in &self.rows {
            let c = v[row.pivot].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(&row.vec) {
                if !y.is_zero() {
                    *x = x.sub(&y.mul(&c));
                }
            }
            combo.push((row.pivot, c));
        }
        if v.iter().all(|x| x.is_zero()) {
            Some(combo)
        } else {
            None
        }
    }

}

/// A basis of the integer kernel `{a : sum a_i d_i = 0}` of a vector of
/// positive degrees, produced by unimodular column reduction; the basis
/// has `len - 1` vectors.
pub(crate) fn integer_kernel(degrees: &[i64]) -> Vec<Vec<i64>> {
    let m = degrees.len();
    if m <= 1 {
        return Vec::new();
    }
    for &d in degrees {
        assert!(d > 0, "degrees must be positive");
    }
    // Column-reduce (d_1 .. d_m) to (g, 0, .., 0), tracking the
    // unimodular transformation; kernel basis = columns 2..m.
    let mut u: Vec<Vec<i64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1 } else { 0 }).collect())
        .collect();
    let mut g = degrees[0];
    for i in 1..m {
        let d = degrees[i];
        let (gg, s, t) = ext_gcd_i64(g, d);
        // (c_0, c_i) -> (s c_0 + t c_i, -(d/gg) c_0 + (g/gg) c_i)
        let a = -(d / gg);
        let b = g / gg;
        for row in u.iter_mut() {
            let c0 = row[0];
            let ci = row[i];
            row[0] = s * c0 + t * ci;
            row[i] = a * c0 + b * ci;
        }
        g = gg;
    }
    (1..m).map(|j| u.iter().map(|row| row[j]).collect()).collect()
}

fn ext_gcd_i64(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return (a, 1, 0);
    }
    let (g, s, t) = ext_gcd_i64(b, a % b);
    (g, t, s - (a / b) * t)
}
