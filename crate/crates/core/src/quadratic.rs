//! Rewriting a system into an equivalent one of degree at most two.

use std::collections::BTreeSet;

use rug::Rational;
use serde::Serialize;

use crate::poly::{Monomial, Polynomial};
use crate::scalar::Scalar;
use crate::system::SppSystem;

/// An auxiliary variable standing for the product `X_left * X_right`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxProduct {
    /// Index of the auxiliary variable in the reduced system.
    pub var: usize,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticReduction {
    pub reduced: SppSystem,
    /// Number of variables of the input; they keep their indices.
    pub original_len: usize,
    /// In order of introduction. Factors only refer to earlier variables.
    pub lift: Vec<AuxProduct>,
}

impl QuadraticReduction {
    pub fn is_trivial(&self) -> bool {
        self.lift.is_empty()
    }

    /// Extends a vector over the original variables by the recorded products.
    pub fn lift<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.original_len, "dimension mismatch");
        let mut out = x.to_vec();
        for aux in &self.lift {
            debug_assert_eq!(aux.var, out.len());
            let v = out[aux.left].mul(&out[aux.right]);
            out.push(v);
        }
        out
    }

    /// Drops the auxiliary components.
    pub fn project<S: Clone>(&self, x: &[S]) -> Vec<S> {
        x[..self.original_len].to_vec()
    }
}

fn factors(m: &Monomial) -> Vec<usize> {
    m.powers()
        .iter()
        .flat_map(|(&v, &d)| std::iter::repeat_n(v, d as usize))
        .collect()
}

fn fresh_name(taken: &BTreeSet<String>, counter: &mut usize) -> String {
    loop {
        *counter += 1;
        let name = format!("Y{counter}");
        if !taken.contains(&name) {
            return name;
        }
    }
}

/// Repeatedly picks the leftmost monomial of highest degree (> 2), pairs its
/// highest-index factor with its lowest-index remaining factor and replaces
/// that pair by an auxiliary variable `Y = X_i * X_j`. An auxiliary is reused
/// when the same pair was introduced before.
pub fn reduce_to_quadratic(sys: &SppSystem) -> QuadraticReduction {
    let original_len = sys.len();
    let (mut names, mut equations) = sys.clone().into_parts();
    let mut taken: BTreeSet<String> = names.iter().cloned().collect();
    let mut counter = 0;
    let mut lift: Vec<AuxProduct> = Vec::new();

    loop {
        let mut best: Option<(usize, usize, u32)> = None;
        for (e, p) in equations.iter().enumerate() {
            for (k, m) in p.monomials().iter().enumerate() {
                let d = m.degree();
                if d > 2 && best.is_none_or(|b| d > b.2) {
                    best = Some((e, k, d));
                }
            }
        }
        let Some((e, k, _)) = best else { break };

        let mono = equations[e].monomials()[k].clone();
        let mut fs = factors(&mono);
        let hi = fs.pop().expect("degree > 2");
        let lo = fs.remove(0);
        let (left, right) = (lo.min(hi), lo.max(hi));
        let aux = match lift.iter().find(|a| a.left == left && a.right == right) {
            Some(a) => a.var,
            None => {
                let var = names.len();
                let name = fresh_name(&taken, &mut counter);
                taken.insert(name.clone());
                names.push(name);
                let product = Monomial::new(Rational::from(1), [(left, 1), (right, 1)]).expect("nonzero");
                equations.push(Polynomial::from_terms(Rational::new(), [product]));
                lift.push(AuxProduct { var, left, right });
                var
            }
        };
        fs.push(aux);
        let rewritten = Monomial::new(mono.coefficient().clone(), fs.into_iter().map(|v| (v, 1))).expect("nonzero");

        let old = &equations[e];
        let mut terms: Vec<Monomial> = old.monomials().to_vec();
        terms[k] = rewritten;
        equations[e] = Polynomial::from_terms(old.constant_term().clone(), terms);
    }

    QuadraticReduction {
        reduced: SppSystem::new(names, equations),
        original_len,
        lift,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::dsl::parse_system;
    use crate::scalar::{BinaryFloat, Field};

    #[test]
    fn quadratic_input_is_unchanged() {
        let bb = catalog::back_button();
        let r = reduce_to_quadratic(&bb);
        assert!(r.is_trivial());
        assert_eq!(r.reduced, bb);
    }

    #[test]
    fn cube_needs_one_auxiliary() {
        let r = reduce_to_quadratic(&parse_system("X = 0.5*X^3 + 0.25").unwrap());
        assert_eq!(r.reduced, parse_system("X = 0.5*Y1*X + 0.25\nY1 = X*X").unwrap());
        assert_eq!(r.lift, vec![AuxProduct { var: 1, left: 0, right: 0 }]);
    }

    #[test]
    fn fourth_power_needs_two() {
        let r = reduce_to_quadratic(&parse_system("X = 0.0625*X^4 + 0.5").unwrap());
        assert_eq!(r.lift.len(), 2);
        assert!(r.reduced.is_quadratic());
        assert_eq!(
            r.reduced,
            parse_system("X = 0.0625*X*Y2 + 0.5\nY1 = X*X\nY2 = X*Y1").unwrap()
        );
    }

    #[test]
    fn pairs_are_reused_and_names_avoid_clashes() {
        let r = reduce_to_quadratic(&parse_system("Y1 = 0.25*Y1^3 + 0.1\nZ = 0.25*Y1^3 + 0.5").unwrap());
        assert!(r.reduced.is_quadratic());
        assert!(!r.reduced.variables()[2..].contains(&"Y1".to_string()));
        // Y1*Y1 is introduced once and shared by both equations.
        let squares = r.lift.iter().filter(|a| a.left == 0 && a.right == 0).count();
        assert_eq!(squares, 1);
        assert_eq!(r.lift.len(), 1);
    }

    #[test]
    fn lift_maps_fixed_points_to_fixed_points() {
        let sys = parse_system("X = 0.25*X^3 + 0.25*X*Z^2 + 0.25\nZ = 0.5*X^2*Z + 0.25").unwrap();
        let r = reduce_to_quadratic(&sys);
        let f = BinaryFloat::new(128);
        // Kleene to (numerical) convergence on the original.
        let mut x = f.zeros(2);
        for _ in 0..400 {
            x = sys.eval(&f, &x).unwrap();
        }
        let y = r.lift(&x);
        let fy = r.reduced.eval(&f, &y).unwrap();
        for (a, b) in fy.iter().zip(&y) {
            assert!((a.to_f64() - b.to_f64()).abs() < 1e-12);
        }
    }
}
