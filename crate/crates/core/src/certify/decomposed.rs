use rug::Rational;

use super::{certified_bits, Certificate};
use crate::decompose::scc_decompose;
use crate::error::Result;
use crate::iterate::{require_clean, run_newton_compiled, StopRule};
use crate::quadratic::reduce_to_quadratic;
use crate::scalar::{ExactRational, Field, Scalar};
use crate::system::SppSystem;

#[derive(Debug, Clone)]
pub struct SccCertificate<S> {
    /// Original variables of this SCC (auxiliaries projected out).
    pub variables: Vec<usize>,
    pub iterations: usize,
    /// Over `variables`, for the SCC with the deeper approximations
    /// substituted. `None` when no certificate could be formed.
    pub certificate: Option<Certificate<S>>,
    pub reached_target: bool,
}

/// Newton iteration with proximity certificates per SCC.
///
/// With a single SCC the certificate is an enclosure of the least fixed
/// point. With several SCCs each certificate only covers its SCC given the
/// (approximate) values substituted from deeper SCCs, so the assembled
/// enclosure is reported but flagged as not certified.
#[derive(Debug, Clone)]
pub struct SystemCertificate<S> {
    pub sccs: Vec<SccCertificate<S>>,
    pub lower: Vec<S>,
    /// Present when every SCC produced a certificate.
    pub upper: Option<Vec<S>>,
    pub composition_certified: bool,
    /// Valid bits of `lower` against `upper`.
    pub certified_bits: Option<u32>,
    pub reached_target: bool,
    /// Auxiliary variables introduced to make the system quadratic.
    pub auxiliaries: usize,
}

/// Runs Newton SCC by SCC (deepest first) on the quadratic normal form of
/// `sys` until every SCC certificate has `target_bits` valid bits or an SCC
/// exhausts `max_iters` steps.
pub fn certify_newton<F: Field>(
    sys: &SppSystem,
    field: &F,
    target_bits: u32,
    max_iters: usize,
) -> Result<SystemCertificate<F::Elem>> {
    require_clean(sys)?;
    let reduction = reduce_to_quadratic(sys);
    let rsys = &reduction.reduced;
    let n0 = reduction.original_len;
    let d = scc_decompose(rsys);
    let compiled = rsys.compile(field);
    let exact = rsys.compile(&ExactRational::default());
    let stop = StopRule::iterations(max_iters).with_target_bits(target_bits);

    let mut values = field.zeros(rsys.len());
    let mut uppers: Vec<Option<F::Elem>> = vec![None; rsys.len()];
    let mut per_scc = Vec::new();
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by_key(|&s| (std::cmp::Reverse(d.depth[s]), s));

    for s in order {
        let vars = &d.sccs[s].vars;
        let sub = compiled.restrict(vars, &values);
        let exact_values: Vec<Rational> = values.iter().map(Scalar::to_rational).collect();
        let c_min = exact
            .restrict(vars, &exact_values)
            .min_coefficient()
            .expect("clean systems have a nonzero coefficient in every equation");
        let trace = run_newton_compiled(field, &sub, &stop, Some(&c_min))?;
        for (v, x) in vars.iter().zip(trace.last()) {
            values[*v] = x.clone();
        }
        let cert = trace.certificate.clone();
        if let Some(c) = &cert {
            for (v, u) in vars.iter().zip(&c.upper) {
                uppers[*v] = Some(u.clone());
            }
        }
        let keep: Vec<usize> = (0..vars.len()).filter(|&k| vars[k] < n0).collect();
        if keep.is_empty() {
            continue;
        }
        let projected = match cert {
            Some(c) => Some(project(field, c, &keep)?),
            None => None,
        };
        per_scc.push(SccCertificate {
            variables: keep.iter().map(|&k| vars[k]).collect(),
            iterations: trace.steps(),
            reached_target: projected.as_ref().is_some_and(|c| c.certified_bits >= target_bits),
            certificate: projected,
        });
    }
    per_scc.sort_by_key(|c| c.variables[0]);

    let lower = reduction.project(&values);
    let upper: Option<Vec<F::Elem>> = uppers[..n0].iter().cloned().collect();
    let certified_bits = match &upper {
        Some(u) => certified_bits(&lower, u, field.bits_cap()).ok(),
        None => None,
    };
    Ok(SystemCertificate {
        reached_target: per_scc.iter().all(|c| c.reached_target),
        composition_certified: d.len() == 1 && upper.is_some(),
        sccs: per_scc,
        lower,
        upper,
        certified_bits,
        auxiliaries: reduction.lift.len(),
    })
}

fn project<F: Field>(field: &F, c: Certificate<F::Elem>, keep: &[usize]) -> Result<Certificate<F::Elem>> {
    let lower: Vec<F::Elem> = keep.iter().map(|&k| c.lower[k].clone()).collect();
    let upper: Vec<F::Elem> = keep.iter().map(|&k| c.upper[k].clone()).collect();
    let bits = certified_bits(&lower, &upper, field.bits_cap())?;
    Ok(Certificate {
        lower,
        upper,
        certified_bits: bits,
        ..c
    })
}
