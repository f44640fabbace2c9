use rug::Integer;
use serde_json::{json, Value};

use crate::decompose::scc_decompose;
use crate::error::{Error, Result};
use crate::iterate::require_clean;
use crate::linalg::{identity_minus, solve};
use crate::scalar::{Field, Scalar};
use crate::system::SppSystem;

/// An approximation of a cone vector `d ≻ 0` with `f'(μf) d <= d`, taken at
/// an iterate below the least fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeVectorEstimate<S> {
    /// Normalized to `||d||∞ = 1`.
    pub vector: Vec<S>,
    /// `max_i max{0, (f'(x) d - d)_i}`.
    pub residual: S,
}

impl<S: Scalar> ConeVectorEstimate<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "vector": self.vector.iter().map(Scalar::render).collect::<Vec<_>>(),
            "residual": self.residual.render(),
        })
    }
}

/// Solves `(Id - f'(x)) d = 1` and normalizes.
pub fn cone_vector_estimate<F: Field>(sys: &SppSystem, field: &F, x: &[F::Elem]) -> Result<ConeVectorEstimate<F::Elem>> {
    require_clean(sys)?;
    sys.check_dim(x.len())?;
    let d = scc_decompose(sys);
    if !d.is_strongly_connected() {
        return Err(Error::NotStronglyConnected { sccs: d.len() });
    }
    let c = sys.compile(field);
    let jac = c.jacobian(x);
    let ones = vec![field.one(); sys.len()];
    let (raw, _) = solve(field, &identity_minus(field, &jac), &ones)?;
    let norm = raw.iter().fold(field.zero(), |acc, v| acc.max_of(&v.abs_val()));
    if norm.is_zero() {
        return Err(Error::SingularSystem {
            column: 0,
            pivot: norm.render(),
        });
    }
    let vector: Vec<F::Elem> = raw.iter().map(|v| v.div(&norm)).collect();
    let image = jac.mul_vec(&vector, &field.zero());
    let residual = image
        .iter()
        .zip(&vector)
        .fold(field.zero(), |acc, (a, b)| acc.max_of(&a.sub(b)));
    Ok(ConeVectorEstimate { vector, residual })
}

/// Iterations per valid bit for general systems: `n 2^n`, and the sharper
/// `(h + 1) 2^h` in terms of the height of the SCC DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateBound {
    pub n_times_2_pow_n: Integer,
    pub height_bound: Integer,
    pub height: usize,
}

pub fn general_rate_bound(sys: &SppSystem) -> RateBound {
    let n = sys.len();
    let h = scc_decompose(sys).height;
    RateBound {
        n_times_2_pow_n: Integer::from(n) << n as u32,
        height_bound: Integer::from(h + 1) << h as u32,
        height: h,
    }
}
