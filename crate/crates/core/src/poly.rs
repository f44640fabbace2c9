use std::cmp::Ordering;
use std::collections::BTreeMap;

use rug::Rational;

/// `coefficient * prod_v X_v^powers[v]`, with a strictly positive
/// coefficient and at least one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    coefficient: Rational,
    powers: BTreeMap<usize, u32>,
}

impl Monomial {
    /// Returns `None` for a zero coefficient; zero exponents are dropped.
    ///
    /// Panics on a negative coefficient.
    pub fn new(coefficient: Rational, powers: impl IntoIterator<Item = (usize, u32)>) -> Option<Self> {
        assert!(coefficient.cmp0() != Ordering::Less, "negative coefficient");
        if coefficient.cmp0() == Ordering::Equal {
            return None;
        }
        let mut map = BTreeMap::new();
        for (v, d) in powers {
            if d > 0 {
                *map.entry(v).or_insert(0) += d;
            }
        }
        Some(Monomial {
            coefficient,
            powers: map,
        })
    }

    pub fn coefficient(&self) -> &Rational {
        &self.coefficient
    }

    pub fn powers(&self) -> &BTreeMap<usize, u32> {
        &self.powers
    }

    pub fn degree(&self) -> u32 {
        self.powers.values().sum()
    }

    pub fn power_of(&self, var: usize) -> u32 {
        self.powers.get(&var).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.powers.is_empty()
    }

}

/// A polynomial with nonnegative rational coefficients: a constant plus
/// monomials with pairwise distinct exponent maps.
#[derive(Debug, Clone, Default)]
pub struct Polynomial {
    constant: Rational,
    monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn constant(c: Rational) -> Self {
        assert!(c.cmp0() != Ordering::Less, "negative constant");
        Polynomial {
            constant: c,
            monomials: Vec::new(),
        }
    }

    /// Builds a polynomial, folding constant monomials into the constant and
    /// merging monomials with equal exponent maps (first occurrence keeps its
    /// position).
    pub fn from_terms(constant: Rational, terms: impl IntoIterator<Item = Monomial>) -> Self {
        let mut p = Polynomial::constant(constant);
        for m in terms {
            p.push(m);
        }
        p
    }

    pub fn push(&mut self, m: Monomial) {
        if m.is_constant() {
            self.constant += m.coefficient;
            return;
        }
        match self.monomials.iter_mut().find(|x| x.powers == m.powers) {
            Some(existing) => existing.coefficient += m.coefficient,
            None => self.monomials.push(m),
        }
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn degree(&self) -> u32 {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Variables occurring in some monomial, ascending.
    pub fn variables(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.monomials.iter().flat_map(|m| m.powers.keys().copied()).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn mentions(&self, var: usize) -> bool {
        self.monomials.iter().any(|m| m.powers.contains_key(&var))
    }

    /// Drops every monomial mentioning a variable for which `drop` holds and
    /// renames the remaining variables through `rename`.
    pub(crate) fn retain_vars(&self, drop: impl Fn(usize) -> bool, rename: impl Fn(usize) -> usize) -> Polynomial {
        let monomials = self
            .monomials
            .iter()
            .filter(|m| !m.powers.keys().any(|&v| drop(v)))
            .map(|m| Monomial {
                coefficient: m.coefficient.clone(),
                powers: m.powers.iter().map(|(&v, &d)| (rename(v), d)).collect(),
            })
            .collect();
        Polynomial {
            constant: self.constant.clone(),
            monomials,
        }
    }

    /// Nonzero coefficients, constant first when nonzero.
    pub fn coefficients(&self) -> impl Iterator<Item = &Rational> {
        std::iter::once(&self.constant)
            .filter(|c| c.cmp0() != Ordering::Equal)
            .chain(self.monomials.iter().map(|m| &m.coefficient))
    }

    fn canonical(&self) -> Vec<(Vec<(usize, u32)>, &Rational)> {
        let mut v: Vec<_> = self
            .monomials
            .iter()
            .map(|m| (m.powers.iter().map(|(&a, &b)| (a, b)).collect::<Vec<_>>(), &m.coefficient))
            .collect();
        v.sort();
        v
    }
}

/// Equality ignores monomial order.
impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.constant == other.constant && self.canonical() == other.canonical()
    }
}

impl Eq for Polynomial {}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::from((p, q))
    }

    #[test]
    fn merging_and_zero_dropping() {
        let a = Monomial::new(r(1, 4), [(0, 1), (1, 1)]).unwrap();
        let b = Monomial::new(r(1, 4), [(1, 1), (0, 1)]).unwrap();
        let c = Monomial::new(r(1, 2), []).unwrap();
        assert!(Monomial::new(r(0, 1), [(0, 1)]).is_none());
        let p = Polynomial::from_terms(r(1, 4), [a, b, c]);
        assert_eq!(p.monomials().len(), 1);
        assert_eq!(p.monomials()[0].coefficient(), &r(1, 2));
        assert_eq!(p.constant_term(), &r(3, 4));
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn equality_is_order_insensitive() {
        let x = Monomial::new(r(1, 2), [(0, 2)]).unwrap();
        let y = Monomial::new(r(1, 3), [(1, 1)]).unwrap();
        let p = Polynomial::from_terms(r(0, 1), [x.clone(), y.clone()]);
        let q = Polynomial::from_terms(r(0, 1), [y, x]);
        assert_eq!(p, q);
    }

    #[test]
    fn repeated_variables_accumulate() {
        let m = Monomial::new(r(1, 1), [(2, 1), (2, 2)]).unwrap();
        assert_eq!(m.power_of(2), 3);
        assert_eq!(m.degree(), 3);
    }
}
