//! Dense Gaussian elimination with partial pivoting over a [`Field`].

use serde::Serialize;

use crate::compiled::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

/// Pivot diagnostics of one solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveNote {
    pub min_pivot: f64,
    pub max_pivot: f64,
    /// `max_pivot / min_pivot`, a cheap stand-in for the condition number.
    pub pivot_ratio: f64,
}

/// Solves `a * x = b`. A pivot that is exactly zero, or below `2^(-bits/2)`
/// times the largest entry of `a` (at least 1) in float mode, is reported as
/// [`Error::SingularSystem`].
pub fn solve<F: Field>(field: &F, a: &Matrix<F::Elem>, b: &[F::Elem]) -> Result<(Vec<F::Elem>, SolveNote)> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "square matrix expected");
    assert_eq!(b.len(), n, "right-hand side length");
    let mut m = a.clone();
    let mut rhs = b.to_vec();

    let cutoff = field.noise_floor().map(|eps| {
        let scale = (0..n)
            .flat_map(|i| m.row(i).iter().map(Scalar::abs_val).collect::<Vec<_>>())
            .fold(field.one(), |acc, v| acc.max_of(&v));
        eps.mul(&scale)
    });

    let mut min_pivot = f64::INFINITY;
    let mut max_pivot: f64 = 0.0;
    for col in 0..n {
        let (p, pivot_abs) = (col..n)
            .map(|r| (r, m.get(r, col).abs_val()))
            .fold(None, |best: Option<(usize, F::Elem)>, (r, v)| match best {
                Some((_, ref bv)) if *bv >= v => best,
                _ => Some((r, v)),
            })
            .expect("nonempty column");
        let singular = pivot_abs.is_zero() || cutoff.as_ref().is_some_and(|c| pivot_abs < *c);
        if singular {
            return Err(Error::SingularSystem {
                column: col,
                pivot: m.get(p, col).render(),
            });
        }
        let pf = pivot_abs.to_f64();
        min_pivot = min_pivot.min(pf);
        max_pivot = max_pivot.max(pf);
        m.swap_rows(col, p);
        rhs.swap(col, p);

        let pivot = m.get(col, col).clone();
        for r in col + 1..n {
            let entry = m.get(r, col);
            if entry.is_zero() {
                continue;
            }
            let factor = entry.div(&pivot);
            for c in col..n {
                let v = m.get(r, c).sub(&factor.mul(m.get(col, c)));
                m.set(r, c, v);
            }
            rhs[r] = rhs[r].sub(&factor.mul(&rhs[col]));
        }
    }

    let mut x = field.zeros(n);
    for i in (0..n).rev() {
        let mut acc = rhs[i].clone();
        for (j, xj) in x.iter().enumerate().skip(i + 1) {
            acc = acc.sub(&m.get(i, j).mul(xj));
        }
        x[i] = acc.div(m.get(i, i));
    }
    let note = SolveNote {
        min_pivot: if n == 0 { 0.0 } else { min_pivot },
        max_pivot,
        pivot_ratio: if n == 0 { 1.0 } else { max_pivot / min_pivot },
    };
    Ok((x, note))
}

/// `Id - a`.
pub fn identity_minus<F: Field>(field: &F, a: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    let n = a.rows();
    let mut out = a.clone();
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j).neg();
            out.set(i, j, if i == j { field.one().add(&v) } else { v });
        }
    }
    out
}
