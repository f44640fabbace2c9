use rug::Rational;

use super::{check_guard, clamp_negatives, require_clean, residual_norm, Driver, IterationTrace, Method, StopReason, StopRule};
use crate::certify::{proximity2, Certificate};
use crate::compiled::CompiledSystem;
use crate::decompose::scc_decompose;
use crate::error::{Error, Result};
use crate::linalg::{identity_minus, solve, SolveNote};
use crate::scalar::{Field, Scalar};
use crate::system::SppSystem;

/// `x + d` with `(Id - f'(x)) d = f(x) - x`.
pub fn newton_step<F: Field>(sys: &SppSystem, field: &F, x: &[F::Elem]) -> Result<Vec<F::Elem>> {
    sys.check_dim(x.len())?;
    let c = sys.compile(field);
    let fx = c.eval(x);
    Ok(step_compiled(field, &c, x, &fx)?.0)
}

pub(crate) fn step_compiled<F: Field>(
    field: &F,
    c: &CompiledSystem<F::Elem>,
    x: &[F::Elem],
    fx: &[F::Elem],
) -> Result<(Vec<F::Elem>, SolveNote)> {
    let a = identity_minus(field, &c.jacobian(x));
    let rhs: Vec<F::Elem> = fx.iter().zip(x).map(|(f, v)| f.sub(v)).collect();
    let (d, note) = solve(field, &a, &rhs)?;
    Ok((x.iter().zip(&d).map(|(v, dv)| v.add(dv)).collect(), note))
}

/// Newton iteration from zero.
///
/// Every step checks `ν^(k) <= f(ν^(k)) <= ν^(k+1)`; a violation beyond
/// rounding noise is reported as [`Error::DivergenceSuspected`], which is how
/// infeasible systems usually show up. With `target_certified_bits` set the
/// system must be quadratic and strongly connected, and each step is checked
/// against the proximity upper bound.
pub fn newton_run<F: Field>(sys: &SppSystem, field: &F, stop: &StopRule) -> Result<IterationTrace<F::Elem>> {
    require_clean(sys)?;
    let c_min = match stop.target_certified_bits {
        Some(_) => {
            sys.require_quadratic()?;
            let d = scc_decompose(sys);
            if !d.is_strongly_connected() {
                return Err(Error::NotStronglyConnected { sccs: d.len() });
            }
            Some(sys.coefficient_stats()?.c_min)
        }
        None => None,
    };
    let compiled = sys.compile(field);
    run_compiled(field, &compiled, stop, c_min.as_ref(), true)
}

/// The Newton loop on an already compiled system. `c_min` enables the
/// certified-bits criterion; `stop_at_fixed_point` ends the run early when
/// `f(x) = x` holds exactly.
pub(crate) fn run_compiled<F: Field>(
    field: &F,
    compiled: &CompiledSystem<F::Elem>,
    stop: &StopRule,
    c_min: Option<&Rational>,
    stop_at_fixed_point: bool,
) -> Result<IterationTrace<F::Elem>> {
    let driver = Driver::new(field, stop)?;
    let n = compiled.len();
    let mut x = field.zeros(n);
    let mut iterates: Vec<Vec<F::Elem>> = Vec::new();
    let mut residuals = Vec::new();
    let mut notes = Vec::new();
    let mut certificate: Option<Certificate<F::Elem>> = None;

    for k in 0.. {
        let fx = compiled.eval(&x);
        let r = residual_norm(compiled.zero(), &x, &fx);

        if let (Some(target), Some(c_min), Some(prev)) = (stop.target_certified_bits, c_min, iterates.last()) {
            match proximity2(field, c_min, n, prev, &x) {
                Ok(cert) => {
                    let done = cert.certified_bits >= target;
                    certificate = Some(cert);
                    if done {
                        iterates.push(x);
                        residuals.push(r);
                        return Ok(finish(iterates, residuals, notes, StopReason::TargetBits, certificate));
                    }
                }
                Err(Error::ZeroComponent(_)) => {}
                Err(e) => return Err(e),
            }
        }

        if let Some(i) = x.iter().zip(&fx).position(|(a, b)| !field.leq_noise(a, b)) {
            return Err(Error::DivergenceSuspected {
                iteration: k,
                reason: format!("f(x) < x in component {i}"),
            });
        }
        iterates.push(x);
        residuals.push(r);
        let reason = driver.should_stop(k, residuals.last().unwrap());
        match reason {
            Some(StopReason::FixedPoint) if !stop_at_fixed_point => {
                if stop.max_iters.is_some_and(|m| k >= m) {
                    return Ok(finish(iterates, residuals, notes, StopReason::MaxIters, certificate));
                }
            }
            Some(StopReason::FixedPoint) => {
                // The next iterate would repeat x, so the step norm is zero.
                let mut reason = StopReason::FixedPoint;
                if let (Some(target), Some(c_min)) = (stop.target_certified_bits, c_min) {
                    let x = iterates.last().unwrap();
                    if let Ok(cert) = proximity2(field, c_min, n, x, x) {
                        if cert.certified_bits >= target {
                            reason = StopReason::TargetBits;
                        }
                        certificate = Some(cert);
                    }
                }
                return Ok(finish(iterates, residuals, notes, reason, certificate));
            }
            Some(reason) => return Ok(finish(iterates, residuals, notes, reason, certificate)),
            None => {}
        }

        let cur = iterates.last().unwrap();
        let (mut next, note) = step_compiled(field, compiled, cur, &fx)?;
        notes.push(note);
        clamp_negatives(field, &mut next, k + 1)?;
        check_guard(&driver.guard, &next, k + 1)?;
        if let Some(i) = fx.iter().zip(&next).position(|(a, b)| !field.leq_noise(a, b)) {
            return Err(Error::DivergenceSuspected {
                iteration: k + 1,
                reason: format!("Newton step fell below f(x) in component {i}"),
            });
        }
        x = next;
    }
    unreachable!()
}

fn finish<S: Scalar>(
    iterates: Vec<Vec<S>>,
    residuals: Vec<S>,
    solver_notes: Vec<SolveNote>,
    stop_reason: StopReason,
    certificate: Option<Certificate<S>>,
) -> IterationTrace<S> {
    IterationTrace {
        method: Method::Newton,
        iterates,
        residuals,
        solver_notes,
        stop_reason,
        certificate,
    }
}
