//! Systems with coefficients converted into a concrete numeric field.
//!
//! The exact [`SppSystem`] keeps rational coefficients; the engines work on a
//! [`CompiledSystem`] whose coefficients live in the iteration field. This
//! also lets the decomposed Newton method substitute already-computed
//! (field-valued) approximations into upper components.

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};
use crate::system::SppSystem;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Clone> Matrix<S> {
    pub fn filled(rows: usize, cols: usize, value: S) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn mul_vec(&self, v: &[S], zero: &S) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(zero.clone(), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Term<S> {
    coeff: S,
    powers: Vec<(usize, u32)>,
}

#[derive(Debug, Clone)]
struct Row<S> {
    constant: S,
    terms: Vec<Term<S>>,
}

/// An SPP whose coefficients are elements of a numeric field.
#[derive(Debug, Clone)]
pub struct CompiledSystem<S> {
    rows: Vec<Row<S>>,
    zero: S,
    one: S,
}

fn pow<S: Scalar>(x: &S, d: u32) -> S {
    let mut acc = x.clone();
    for _ in 1..d {
        acc = acc.mul(x);
    }
    acc
}

impl<S: Scalar> CompiledSystem<S> {
    pub fn from_system<F: Field<Elem = S>>(sys: &SppSystem, field: &F) -> Self {
        let rows = sys
            .equations()
            .iter()
            .map(|p| Row {
                constant: field.from_rational(p.constant_term()),
                terms: p
                    .monomials()
                    .iter()
                    .map(|m| Term {
                        coeff: field.from_rational(m.coefficient()),
                        powers: m.powers().iter().map(|(&v, &d)| (v, d)).collect(),
                    })
                    .collect(),
            })
            .collect();
        CompiledSystem {
            rows,
            zero: field.zero(),
            one: field.one(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn zero(&self) -> &S {
        &self.zero
    }

    pub fn one(&self) -> &S {
        &self.one
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: len,
            });
        }
        Ok(())
    }

    fn term_value(&self, t: &Term<S>, x: &[S]) -> S {
        t.powers
            .iter()
            .fold(t.coeff.clone(), |acc, (v, d)| acc.mul(&pow(&x[*v], *d)))
    }

    pub fn eval_row(&self, i: usize, x: &[S]) -> S {
        let row = &self.rows[i];
        row.terms
            .iter()
            .fold(row.constant.clone(), |acc, t| acc.add(&self.term_value(t, x)))
    }

    pub fn eval(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.len(), "dimension mismatch");
        (0..self.len()).map(|i| self.eval_row(i, x)).collect()
    }

    /// Row `i` of the Jacobian at `x`.
    pub fn jacobian_row(&self, i: usize, x: &[S]) -> Vec<S> {
        let mut out = vec![self.zero.clone(); self.len()];
        for t in &self.rows[i].terms {
            for (k, &(v, d)) in t.powers.iter().enumerate() {
                // d * coeff * x_v^(d-1) * prod_{others} x_w^e
                let mut part = t.coeff.mul(&self.scalar_from_u32(d));
                if d > 1 {
                    part = part.mul(&pow(&x[v], d - 1));
                }
                for (k2, &(w, e)) in t.powers.iter().enumerate() {
                    if k2 != k {
                        part = part.mul(&pow(&x[w], e));
                    }
                }
                out[v] = out[v].add(&part);
            }
        }
        out
    }

    pub fn jacobian(&self, x: &[S]) -> Matrix<S> {
        assert_eq!(x.len(), self.len(), "dimension mismatch");
        Matrix::from_rows((0..self.len()).map(|i| self.jacobian_row(i, x)).collect())
    }

    fn scalar_from_u32(&self, d: u32) -> S {
        let mut acc = self.zero.clone();
        for _ in 0..d {
            acc = acc.add(&self.one);
        }
        acc
    }

    pub fn degree(&self) -> u32 {
        self.rows
            .iter()
            .flat_map(|r| r.terms.iter())
            .map(|t| t.powers.iter().map(|p| p.1).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn require_quadratic(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            let d = r.terms.iter().map(|t| t.powers.iter().map(|p| p.1).sum()).max().unwrap_or(0);
            if d > 2 {
                return Err(Error::NotQuadratic { equation: i, degree: d });
            }
        }
        Ok(())
    }

    /// Direct dependencies of component `i`, ascending.
    pub fn dependencies(&self, i: usize) -> Vec<usize> {
        let mut vs: Vec<usize> = self.rows[i]
            .terms
            .iter()
            .flat_map(|t| t.powers.iter().map(|p| p.0))
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Smallest nonzero coefficient (constants included).
    pub fn min_coefficient(&self) -> Option<S> {
        self.rows
            .iter()
            .flat_map(|r| std::iter::once(&r.constant).chain(r.terms.iter().map(|t| &t.coeff)))
            .filter(|c| !c.is_zero())
            .fold(None, |acc: Option<S>, c| match acc {
                Some(a) if a <= *c => Some(a),
                _ => Some(c.clone()),
            })
    }

    /// The subsystem over `keep` (in that order) with every other variable
    /// replaced by its value in `values`.
    pub fn restrict(&self, keep: &[usize], values: &[S]) -> CompiledSystem<S> {
        let mut index = vec![None; values.len().max(self.len())];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = Some(new);
        }
        let rows = keep
            .iter()
            .map(|&i| {
                let src = &self.rows[i];
                let mut constant = src.constant.clone();
                let mut terms: Vec<Term<S>> = Vec::new();
                for t in &src.terms {
                    let mut coeff = t.coeff.clone();
                    let mut powers = Vec::new();
                    for &(v, d) in &t.powers {
                        match index[v] {
                            Some(nv) => powers.push((nv, d)),
                            None => coeff = coeff.mul(&pow(&values[v], d)),
                        }
                    }
                    if coeff.is_zero() {
                        continue;
                    }
                    if powers.is_empty() {
                        constant = constant.add(&coeff);
                    } else if let Some(existing) = terms.iter_mut().find(|e| e.powers == powers) {
                        existing.coeff = existing.coeff.add(&coeff);
                    } else {
                        terms.push(Term { coeff, powers });
                    }
                }
                Row { constant, terms }
            })
            .collect();
        CompiledSystem {
            rows,
            zero: self.zero.clone(),
            one: self.one.clone(),
        }
    }

    /// `f_i` as a polynomial in `X_i` alone with the other variables fixed
    /// to `x`: returns `(a, b, c)` with `f_i = a X_i^2 + b X_i + c`.
    pub fn univariate(&self, i: usize, x: &[S]) -> Result<(S, S, S)> {
        let row = &self.rows[i];
        let mut coeffs = [self.zero.clone(), self.zero.clone(), row.constant.clone()];
        for t in &row.terms {
            let mut deg = 0;
            let mut val = t.coeff.clone();
            for &(v, d) in &t.powers {
                if v == i {
                    deg += d;
                } else {
                    val = val.mul(&pow(&x[v], d));
                }
            }
            if deg > 2 {
                return Err(Error::NotQuadratic { equation: i, degree: deg });
            }
            let slot = 2 - deg as usize;
            coeffs[slot] = coeffs[slot].add(&val);
        }
        let [a, b, c] = coeffs;
        Ok((a, b, c))
    }

    /// `f(0) ≻ 0`.
    pub fn constants_positive(&self) -> bool {
        self.rows.iter().all(|r| !r.constant.is_zero())
    }
}
