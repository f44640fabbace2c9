//! Certified enclosures of the least fixed point, convergence thresholds and
//! rate diagnostics.

mod decomposed;
mod diagnostics;
mod threshold;

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::Rational;
use serde_json::{json, Value};

pub use decomposed::{certify_newton, SccCertificate, SystemCertificate};
pub use diagnostics::{cone_vector_estimate, general_rate_bound, ConeVectorEstimate, RateBound};
pub use threshold::{threshold_estimate, threshold_syntactic, SyntacticMode, Threshold, ThresholdInputs, ThresholdKind};

use crate::decompose::scc_decompose;
use crate::error::{Error, Result};
use crate::iterate::require_clean;
use crate::scalar::{ceil_log2, render_rational_decimal, Field, Scalar};
use crate::system::SppSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Justification {
    /// The proximity bound for quadratic strongly connected systems.
    Proximity2,
    /// `f(1) <= 1`, so the all-ones vector bounds the least fixed point.
    KnownFixedPointAtOne,
    UserSupplied,
}

impl Justification {
    pub fn as_str(self) -> &'static str {
        match self {
            Justification::Proximity2 => "Proximity2",
            Justification::KnownFixedPointAtOne => "KnownFixedPointAtOne",
            Justification::UserSupplied => "UserSupplied",
        }
    }
}

/// Inputs of the proximity bound
/// `||ν^(k) - ν^(k-1)||∞ / (c_min min{ν^(k)_min, 1})^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertParams<S> {
    pub c_min: Rational,
    pub nu_min: S,
    pub n: usize,
    pub step_norm: S,
    /// The bound itself, rounded up.
    pub bound: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<S> {
    pub lower: Vec<S>,
    pub upper: Vec<S>,
    pub certified_bits: u32,
    pub justification: Justification,
    pub params: Option<CertParams<S>>,
}

impl<S: Scalar> Certificate<S> {
    pub fn to_json(&self) -> Value {
        let vec = |v: &[S]| Value::Array(v.iter().map(|x| Value::String(x.render())).collect());
        let params = match &self.params {
            Some(p) => json!({
                "c_min": render_rational_decimal(&p.c_min),
                "nu_min": p.nu_min.render(),
                "n": p.n,
                "step_norm": p.step_norm.render(),
                "bound": p.bound.render(),
            }),
            None => json!({}),
        };
        json!({
            "lower": vec(&self.lower),
            "upper": vec(&self.upper),
            "bits": self.certified_bits,
            "justification": self.justification.as_str(),
            "params": params,
        })
    }
}

/// Largest `i <= cap` with `(upper_j - lower_j) / lower_j <= 2^(-i)` for all
/// `j`; `cap` when the enclosure has zero width.
pub fn certified_bits<S: Scalar>(lower: &[S], upper: &[S], cap: u32) -> Result<u32> {
    if lower.len() != upper.len() {
        return Err(Error::DimensionMismatch {
            expected: lower.len(),
            actual: upper.len(),
        });
    }
    let mut worst = Rational::new();
    for (j, (l, u)) in lower.iter().zip(upper).enumerate() {
        let l = l.to_rational();
        if l.cmp0() != Ordering::Greater {
            return Err(Error::ZeroComponent(j));
        }
        let gap = u.to_rational() - &l;
        if gap.cmp0() == Ordering::Less {
            return Err(Error::NonPositiveBound(format!("upper bound below lower bound in component {j}")));
        }
        let rel = gap / l;
        if rel > worst {
            worst = rel;
        }
    }
    if worst.cmp0() == Ordering::Equal {
        return Ok(cap);
    }
    let bits = (-ceil_log2(&worst)).max(0);
    Ok(bits.min(cap as i64) as u32)
}

/// The proximity certificate from two consecutive Newton iterates of a
/// quadratic strongly connected system with `n` components and smallest
/// coefficient `c_min`. Computed exactly, upper bounds rounded up.
pub fn proximity2<F: Field>(
    field: &F,
    c_min: &Rational,
    n: usize,
    nu_prev: &[F::Elem],
    nu_curr: &[F::Elem],
) -> Result<Certificate<F::Elem>> {
    if nu_prev.len() != nu_curr.len() {
        return Err(Error::DimensionMismatch {
            expected: nu_curr.len(),
            actual: nu_prev.len(),
        });
    }
    let curr: Vec<Rational> = nu_curr.iter().map(Scalar::to_rational).collect();
    if let Some(j) = curr.iter().position(|v| v.cmp0() != Ordering::Greater) {
        return Err(Error::ZeroComponent(j));
    }
    let step = nu_prev
        .iter()
        .zip(&curr)
        .map(|(p, c)| (c - p.to_rational()).abs())
        .max()
        .unwrap_or_default();
    let nu_min = curr.iter().min().cloned().unwrap_or_default();
    let base = c_min * nu_min.clone().min(Rational::from(1));
    let denom = base.pow(n as u32);
    let bound = step.clone() / denom;
    let upper: Vec<F::Elem> = curr
        .iter()
        .map(|c| field.from_rational_up(&Rational::from(c + &bound)))
        .collect();
    let lower = nu_curr.to_vec();
    let bits = certified_bits(&lower, &upper, field.bits_cap())?;
    Ok(Certificate {
        lower,
        upper,
        certified_bits: bits,
        justification: Justification::Proximity2,
        params: Some(CertParams {
            c_min: c_min.clone(),
            nu_min: field.from_rational(&nu_min),
            n,
            step_norm: field.from_rational_up(&step),
            bound: field.from_rational_up(&bound),
        }),
    })
}

/// [`proximity2`] after checking that `sys` is quadratic, clean and strongly
/// connected.
pub fn upper_bound_scspp<F: Field>(
    sys: &SppSystem,
    field: &F,
    nu_prev: &[F::Elem],
    nu_curr: &[F::Elem],
) -> Result<Certificate<F::Elem>> {
    require_quadratic_scspp(sys)?;
    sys.check_dim(nu_prev.len())?;
    sys.check_dim(nu_curr.len())?;
    let stats = sys.coefficient_stats()?;
    proximity2(field, &stats.c_min, sys.len(), nu_prev, nu_curr)
}

/// Upper bound 1 for systems with `f(1) <= 1`.
pub fn known_fixed_point_at_one<F: Field>(sys: &SppSystem, field: &F, lower: &[F::Elem]) -> Result<Certificate<F::Elem>> {
    sys.check_dim(lower.len())?;
    if !sys.bounded_by_one() {
        return Err(Error::SideConditionUnmet("f(1) <= 1 does not hold".into()));
    }
    let upper = vec![field.one(); sys.len()];
    let bits = certified_bits(lower, &upper, field.bits_cap())?;
    Ok(Certificate {
        lower: lower.to_vec(),
        upper,
        certified_bits: bits,
        justification: Justification::KnownFixedPointAtOne,
        params: None,
    })
}

/// Wraps bounds obtained elsewhere; only the bit count is computed here.
pub fn user_supplied<F: Field>(field: &F, lower: Vec<F::Elem>, upper: Vec<F::Elem>) -> Result<Certificate<F::Elem>> {
    let bits = certified_bits(&lower, &upper, field.bits_cap())?;
    Ok(Certificate {
        lower,
        upper,
        certified_bits: bits,
        justification: Justification::UserSupplied,
        params: None,
    })
}

pub(crate) fn require_quadratic_scspp(sys: &SppSystem) -> Result<()> {
    require_clean(sys)?;
    sys.require_quadratic()?;
    let d = scc_decompose(sys);
    if !d.is_strongly_connected() {
        return Err(Error::NotStronglyConnected { sccs: d.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::iterate::{newton_run, StopRule};
    use crate::scalar::{pow2_rational, BinaryFloat, ExactRational, EXACT_BITS_CAP};

    fn q(p: i64, d: i64) -> Rational {
        Rational::from((p, d))
    }

    #[test]
    fn bit_counts() {
        assert_eq!(certified_bits(&[q(3, 4)], &[q(1, 1)], 99).unwrap(), 1);
        assert_eq!(certified_bits(&[q(3, 4)], &[q(3, 4)], 99).unwrap(), 99);
        assert_eq!(certified_bits(&[q(1, 1)], &[q(3, 1)], 99).unwrap(), 0);
        assert_eq!(certified_bits(&[q(0, 1)], &[q(1, 1)], 99), Err(Error::ZeroComponent(0)));
        assert!(certified_bits(&[q(1, 1)], &[q(1, 2)], 99).is_err());
    }

    #[test]
    fn back_button_at_ten() {
        let f = BinaryFloat::default();
        let bb = catalog::back_button();
        let t = newton_run(&bb, &f, &StopRule::iterations(10)).unwrap();
        let cert = upper_bound_scspp(&bb, &f, &t.iterates[9], &t.iterates[10]).unwrap();
        let p = cert.params.as_ref().unwrap();
        assert!(p.step_norm.to_f64() <= 2e-6);
        assert!(p.bound.to_f64() <= 0.00009);
        let upper: Vec<f64> = cert.upper.iter().map(Scalar::to_f64).collect();
        assert!(upper[0] <= 0.983 && upper[1] <= 0.974 && upper[2] <= 0.993);
        assert!(cert.certified_bits >= 13);
        let js = cert.to_json();
        assert_eq!(js["justification"], "Proximity2");
        assert_eq!(js["params"]["c_min"], "0.3");
    }

    #[test]
    fn critical_closed_form() {
        let e = ExactRational::default();
        let sys = catalog::critical();
        let t = newton_run(&sys, &e, &StopRule::iterations(20)).unwrap();
        let cert = upper_bound_scspp(&sys, &e, &t.iterates[19], &t.iterates[20]).unwrap();
        let lower = Rational::from(1) - pow2_rational(-20);
        let width = pow2_rational(-20) / (q(1, 2) * lower.clone());
        assert_eq!(cert.upper[0].clone() - cert.lower[0].clone(), width);
        assert!(cert.upper[0] >= 1);
    }

    #[test]
    fn zero_step_gives_the_cap() {
        let e = ExactRational::default();
        let sys = crate::dsl::parse_system("X = 0.5*X + 0.25").unwrap();
        let half = vec![q(1, 2)];
        let cert = upper_bound_scspp(&sys, &e, &half, &half).unwrap();
        assert_eq!(cert.certified_bits, EXACT_BITS_CAP);
        assert_eq!(upper_bound_scspp(&sys, &e, &half, &[q(0, 1)]).unwrap_err(), Error::ZeroComponent(0));
        let f = BinaryFloat::new(80);
        let half = vec![f.from_rational(&q(1, 2))];
        assert_eq!(upper_bound_scspp(&sys, &f, &half, &half).unwrap().certified_bits, 80);
    }

    #[test]
    fn bound_at_one() {
        let e = ExactRational::default();
        let bb = catalog::back_button();
        let cert = known_fixed_point_at_one(&bb, &e, &[q(1, 2), q(1, 2), q(3, 4)]).unwrap();
        assert_eq!(cert.certified_bits, 0);
        let cert = user_supplied(&e, vec![q(3, 4)], vec![q(1, 1)]).unwrap();
        assert_eq!(cert.justification, Justification::UserSupplied);
    }
}
