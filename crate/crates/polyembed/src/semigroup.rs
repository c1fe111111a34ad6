//! Numerical semigroups generated by sets of positive integers.
//!
//! A [`NumericalSemigroup`] records the additive closure of its
//! generators. With `d` the gcd of the generators, the semigroup lives
//! inside `d·N's multiples` and its normalization by `d` has finite
//! complement in `N`; the largest missing value is the Frobenius number
//! and everything from the conductor exponent onwards is realized.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SemigroupError {
    #[error("a semigroup needs at least one generator")]
    Empty,
    #[error("generators must be positive")]
    NonPositive,
    #[error("semigroup computation exceeded the internal bound")]
    BoundExceeded,
}

/// Internal cap on the normalized membership table.
const MEMBERSHIP_CAP: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct NumericalSemigroup {
    /// gcd of the generators.
    d: usize,
    /// Minimal generators of the normalized semigroup, ascending.
    minimal_generators: Vec<usize>,
    /// Membership of `0..len` in the normalized semigroup; beyond the
    /// table everything is a member.
    membership: Vec<bool>,
    /// Largest normalized non-member, `None` when the normalized
    /// semigroup is all of `N`.
    frobenius: Option<usize>,
}

impl NumericalSemigroup {
    pub fn from_generators(gens: &[usize]) -> Result<Self, SemigroupError> {
        if gens.is_empty() {
            return Err(SemigroupError::Empty);
        }
        if gens.contains(&0) {
            return Err(SemigroupError::NonPositive);
        }
        let mut d = 0usize;
        for &g in gens {
            d = gcd(d, g);
        }
        let mut normalized: Vec<usize> = gens.iter().map(|&g| g / d).collect();
        normalized.sort_unstable();
        normalized.dedup();

        let min_gen = normalized[0];
        // Reachability table with an early stop: once `min_gen`
        // consecutive members appear, every later value is a member.
        let mut membership = vec![true];
        let mut run = 0usize;
        let mut n = 1usize;
        let mut frobenius = None;
        loop {
            if n >= MEMBERSHIP_CAP {
                return Err(SemigroupError::BoundExceeded);
            }
            let hit = normalized.iter().any(|&g| g <= n && membership[n - g]);
            membership.push(hit);
            if hit {
                run += 1;
                if run >= min_gen {
                    break;
                }
            } else {
                run = 0;
                frobenius = Some(n);
            }
            n += 1;
        }

        // Minimal generators: members that are not a sum of two nonzero
        // members.
        let in_semigroup = |m: usize, table: &[bool]| -> bool {
            if m < table.len() {
                table[m]
            } else {
                true
            }
        };
        let mut minimal = Vec::new();
        'gens: for &g in &normalized {
            for a in 1..g {
                if in_semigroup(a, &membership) && in_semigroup(g - a, &membership) {
                    continue 'gens;
                }
            }
            minimal.push(g);
        }

        Ok(NumericalSemigroup { d, minimal_generators: minimal, membership, frobenius })
    }

    /// gcd of the generators.
    pub fn gcd(&self) -> usize {
        self.d
    }

    /// Minimal generators in the original (unnormalized) scale.
    pub fn minimal_generators(&self) -> Vec<usize> {
        self.minimal_generators.iter().map(|&g| g * self.d).collect()
    }

    /// Minimal generators of the normalized (gcd one) semigroup.
    pub fn minimal_generators_normalized(&self) -> &[usize] {
        &self.minimal_generators
    }

    /// Membership in the original scale.
    pub fn contains(&self, n: usize) -> bool {
        if !n.is_multiple_of(self.d) {
            return false;
        }
        let m = n / self.d;
        if m < self.membership.len() {
            self.membership[m]
        } else {
            true
        }
    }

    /// Largest normalized value missing from the semigroup.
    pub fn frobenius_normalized(&self) -> Option<usize> {
        self.frobenius
    }

    /// Smallest `c` such that every normalized value `>= c` is a member;
    /// zero exactly when the normalized semigroup is all of `N`.
    pub fn conductor_exponent(&self) -> usize {
        match self.frobenius {
            Some(f) => f + 1,
            None => 0,
        }
    }

    /// Normalized values missing from the semigroup, ascending.
    pub fn gaps_normalized(&self) -> Vec<usize> {
        (0..self.membership.len()).filter(|&m| !self.membership[m]).collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_two_three() {
        let s = NumericalSemigroup::from_generators(&[2, 3]).expect("valid generators");
        assert_eq!(s.gcd(), 1);
        assert_eq!(s.minimal_generators(), vec![2, 3]);
        assert_eq!(s.gaps_normalized(), vec![1]);
        assert_eq!(s.frobenius_normalized(), Some(1));
        assert_eq!(s.conductor_exponent(), 2);
        assert!(s.contains(0) && s.contains(2) && s.contains(5) && s.contains(100));
        assert!(!s.contains(1));
    }

    #[test]
    fn test_scaled_generators() {
        let s = NumericalSemigroup::from_generators(&[4, 6]).expect("valid generators");
        assert_eq!(s.gcd(), 2);
        assert_eq!(s.minimal_generators(), vec![4, 6]);
        assert_eq!(s.conductor_exponent(), 2); // normalized <2,3>
        assert!(s.contains(10)); // 4 + 6
        assert!(!s.contains(2)); // 1 is a gap of <2,3>
        assert!(!s.contains(7)); // odd
    }

    #[test]
    fn test_redundant_generator_removed() {
        let s = NumericalSemigroup::from_generators(&[2, 3, 4]).expect("valid generators");
        assert_eq!(s.minimal_generators(), vec![2, 3]);
    }

    #[test]
    fn test_mcnugget_frobenius() {
        let s = NumericalSemigroup::from_generators(&[6, 9, 20]).expect("valid generators");
        assert_eq!(s.frobenius_normalized(), Some(43));
        assert_eq!(s.conductor_exponent(), 44);
        assert_eq!(s.minimal_generators(), vec![6, 9, 20]);
    }

    #[test]
    fn test_whole_numbers() {
        let s = NumericalSemigroup::from_generators(&[1]).expect("valid generators");
        assert_eq!(s.conductor_exponent(), 0);
        assert_eq!(s.frobenius_normalized(), None);
        assert!(s.contains(1) && s.contains(7));
        let s5 = NumericalSemigroup::from_generators(&[5]).expect("valid generators");
        assert_eq!(s5.gcd(), 5);
        assert_eq!(s5.conductor_exponent(), 0);
        assert!(s5.contains(15) && !s5.contains(7));
    }

    #[test]
    fn test_brute_force_membership_agreement() {
        // oracle: direct enumeration of sums
        let gens = [5usize, 7, 9];
        let bound = 200usize;
        let mut table = vec![false; bound + 1];
        table[0] = true;
        for n in 1..=bound {
            table[n] = gens.iter().any(|&g| g <= n && table[n - g]);
        }
        let s = NumericalSemigroup::from_generators(&gens).expect("valid generators");
        for (n, &expected) in table.iter().enumerate() {
            assert_eq!(s.contains(n), expected, "membership mismatch at {n}");
        }
    }
}
