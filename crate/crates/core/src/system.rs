use std::cmp::Ordering;
use std::fmt;

use rug::Rational;

use crate::compiled::{CompiledSystem, Matrix};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::scalar::{bit_length, render_rational_decimal, Field};

/// A system of positive polynomials `X = f(X)`.
///
/// Variable order is the order of the equations; vectors and Jacobians use it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SppSystem {
    variables: Vec<String>,
    equations: Vec<Polynomial>,
}

/// Coefficient statistics used by the convergence thresholds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientStats {
    /// Smallest nonzero coefficient, constants included.
    pub c_min: Rational,
    /// Largest `max(bits(p), bits(q))` over coefficients `p/q` in lowest terms.
    pub m: u32,
    pub n: usize,
    pub max_degree: u32,
}

impl SppSystem {
    /// Panics if the lengths differ or a monomial references a variable
    /// index `>= n`.
    pub fn new(variables: Vec<String>, equations: Vec<Polynomial>) -> Self {
        assert_eq!(variables.len(), equations.len(), "one equation per variable");
        let n = variables.len();
        for eq in &equations {
            if let Some(&v) = eq.variables().last() {
                assert!(v < n, "variable index {v} out of range");
            }
        }
        SppSystem { variables, equations }
    }

    pub fn empty() -> Self {
        SppSystem::new(Vec::new(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    pub fn equation(&self, i: usize) -> &Polynomial {
        &self.equations[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub(crate) fn into_parts(self) -> (Vec<String>, Vec<Polynomial>) {
        (self.variables, self.equations)
    }

    pub fn degree(&self) -> u32 {
        self.equations.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn is_quadratic(&self) -> bool {
        self.degree() <= 2
    }

    pub fn require_quadratic(&self) -> Result<()> {
        match self.equations.iter().enumerate().find(|(_, p)| p.degree() > 2) {
            Some((i, p)) => Err(Error::NotQuadratic {
                equation: i,
                degree: p.degree(),
            }),
            None => Ok(()),
        }
    }

    /// `f(0) ≻ 0`: every equation has a positive constant term.
    pub fn constants_positive(&self) -> bool {
        self.equations.iter().all(|p| p.constant_term().cmp0() == Ordering::Greater)
    }

    /// `f(1) <= 1` componentwise, i.e. each equation's coefficients sum to at
    /// most one.
    pub fn bounded_by_one(&self) -> bool {
        self.equations.iter().all(|p| {
            let sum: Rational = p.coefficients().fold(Rational::new(), |acc, c| acc + c);
            sum <= 1
        })
    }

    /// Direct dependence: `i -> k` iff `f_i` mentions `X_k`.
    pub fn dependencies(&self, i: usize) -> Vec<usize> {
        self.equations[i].variables()
    }

    pub fn compile<F: Field>(&self, field: &F) -> CompiledSystem<F::Elem> {
        CompiledSystem::from_system(self, field)
    }

    /// `f(x)`, componentwise.
    pub fn eval<F: Field>(&self, field: &F, x: &[F::Elem]) -> Result<Vec<F::Elem>> {
        self.check_dim(x.len())?;
        Ok(self.compile(field).eval(x))
    }

    /// The Jacobian `f'(x)`, entry `(i, j) = ∂f_i/∂X_j (x)`.
    pub fn jacobian_at<F: Field>(&self, field: &F, x: &[F::Elem]) -> Result<Matrix<F::Elem>> {
        self.check_dim(x.len())?;
        Ok(self.compile(field).jacobian(x))
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: len,
            });
        }
        Ok(())
    }

    pub fn coefficient_stats(&self) -> Result<CoefficientStats> {
        if self.is_empty() {
            return Err(Error::EmptySystem);
        }
        let mut c_min: Option<&Rational> = None;
        let mut m = 0;
        for c in self.equations.iter().flat_map(Polynomial::coefficients) {
            if c_min.is_none_or(|cur| c < cur) {
                c_min = Some(c);
            }
            m = m.max(bit_length(c.numer())).max(bit_length(c.denom()));
        }
        let c_min = c_min.cloned().ok_or(Error::EmptySystem)?;
        Ok(CoefficientStats {
            c_min,
            m,
            n: self.len(),
            max_degree: self.degree(),
        })
    }

    /// Renders the system in the text DSL accepted by [`crate::dsl::parse_system`].
    pub fn to_dsl(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SppSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, eq) in self.variables.iter().zip(&self.equations) {
            write!(f, "{name} =")?;
            let mut first = true;
            let mut sep = |f: &mut fmt::Formatter<'_>| {
                let s = if first { " " } else { " + " };
                first = false;
                f.write_str(s)
            };
            for m in eq.monomials() {
                sep(f)?;
                let mut factors = Vec::new();
                if *m.coefficient() != 1 {
                    factors.push(render_rational_decimal(m.coefficient()));
                }
                for (&v, &d) in m.powers() {
                    if d == 1 {
                        factors.push(self.variables[v].clone());
                    } else {
                        factors.push(format!("{}^{d}", self.variables[v]));
                    }
                }
                f.write_str(&factors.join("*"))?;
            }
            if eq.constant_term().cmp0() != Ordering::Equal || eq.monomials().is_empty() {
                sep(f)?;
                f.write_str(&render_rational_decimal(eq.constant_term()))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
