//! Iteration engines: Kleene, Newton, decomposed Newton and the tangent
//! method. All of them start at the zero vector and are generic over a
//! [`Field`].

mod dnm;
mod kleene;
mod newton;
mod tangent;

use rug::Rational;
use serde::Serialize;

pub use dnm::{dnm_budget, dnm_run, DnmBudget, DnmResult};
pub use kleene::kleene_run;
pub use newton::{newton_run, newton_step};
pub(crate) use newton::run_compiled;
pub use tangent::{in_region, surface_height, tangent_run, tangent_step};

use crate::certify::Certificate;
use crate::clean::unclean_count;
use crate::compiled::CompiledSystem;
use crate::error::{Error, Result};
use crate::linalg::SolveNote;
use crate::scalar::{Field, Scalar};
use crate::system::SppSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kleene,
    Newton,
    Dnm,
    Tangent,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Kleene => "kleene",
            Method::Newton => "newton",
            Method::Dnm => "dnm",
            Method::Tangent => "tangent",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kleene" => Ok(Method::Kleene),
            "newton" => Ok(Method::Newton),
            "dnm" => Ok(Method::Dnm),
            "tangent" => Ok(Method::Tangent),
            other => Err(Error::InvalidStopRule(format!("unknown method `{other}`"))),
        }
    }
}

/// When to stop iterating. Whichever set criterion fires first wins.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopRule {
    pub max_iters: Option<usize>,
    /// Stop once `||f(x) - x||∞` drops below this.
    pub residual_below: Option<Rational>,
    /// Newton only: stop once the proximity certificate reaches this many
    /// valid bits.
    pub target_certified_bits: Option<u32>,
    /// Components above this signal divergence; defaults per field.
    pub divergence_guard: Option<Rational>,
}

impl StopRule {
    pub fn iterations(k: usize) -> Self {
        StopRule {
            max_iters: Some(k),
            ..StopRule::default()
        }
    }

    pub fn with_residual_below(mut self, tol: Rational) -> Self {
        self.residual_below = Some(tol);
        self
    }

    pub fn with_target_bits(mut self, bits: u32) -> Self {
        self.target_certified_bits = Some(bits);
        self
    }

    pub fn with_divergence_guard(mut self, guard: Rational) -> Self {
        self.divergence_guard = Some(guard);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters.is_none() && self.residual_below.is_none() && self.target_certified_bits.is_none() {
            return Err(Error::InvalidStopRule(
                "set at least one of max_iters, residual_below, target_certified_bits".into(),
            ));
        }
        if let Some(g) = &self.divergence_guard {
            if g.cmp0() != std::cmp::Ordering::Greater {
                return Err(Error::InvalidStopRule("divergence guard must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    ResidualBelow,
    TargetBits,
    /// `f(x) = x` held exactly (in the working field).
    FixedPoint,
}

/// Iterates `x^(0) = 0, x^(1), ...` of one engine.
#[derive(Debug, Clone)]
pub struct IterationTrace<S> {
    pub method: Method,
    pub iterates: Vec<Vec<S>>,
    /// `||f(x^(k)) - x^(k)||∞` for every iterate.
    pub residuals: Vec<S>,
    /// One entry per linear solve (Newton and tangent only).
    pub solver_notes: Vec<SolveNote>,
    pub stop_reason: StopReason,
    /// Set when the run stopped on `target_certified_bits`.
    pub certificate: Option<Certificate<S>>,
}

impl<S: Scalar> IterationTrace<S> {
    pub fn last(&self) -> &[S] {
        self.iterates.last().expect("trace holds x^(0)")
    }

    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last_residual(&self) -> &S {
        self.residuals.last().expect("trace holds x^(0)")
    }
}

pub(crate) fn require_clean(sys: &SppSystem) -> Result<()> {
    if sys.is_empty() {
        return Err(Error::EmptySystem);
    }
    match unclean_count(sys) {
        0 => Ok(()),
        k => Err(Error::NotClean(k)),
    }
}

pub(crate) fn residual_norm<S: Scalar>(zero: &S, x: &[S], fx: &[S]) -> S {
    x.iter()
        .zip(fx)
        .fold(zero.clone(), |acc, (a, b)| acc.max_of(&b.sub(a).abs_val()))
}

pub(crate) fn guard_value<F: Field>(field: &F, stop: &StopRule) -> F::Elem {
    let g = stop.divergence_guard.clone().unwrap_or_else(|| field.default_divergence_guard());
    field.from_rational(&g)
}

pub(crate) fn check_guard<S: Scalar>(guard: &S, x: &[S], iteration: usize) -> Result<()> {
    match x.iter().position(|v| v > guard) {
        Some(i) => Err(Error::DivergenceSuspected {
            iteration,
            reason: format!("component {i} exceeds the divergence guard"),
        }),
        None => Ok(()),
    }
}

/// Negative components are rounding noise when they are above `-2^(-bits/2)`
/// in float mode; they are clamped to zero. Anything else is an error.
pub(crate) fn clamp_negatives<F: Field>(field: &F, x: &mut [F::Elem], iteration: usize) -> Result<()> {
    let floor = field.noise_floor().map(|e| e.neg());
    for (i, v) in x.iter_mut().enumerate() {
        if v.sign() != std::cmp::Ordering::Less {
            continue;
        }
        match &floor {
            Some(f) if *v > *f => *v = field.zero(),
            _ => {
                return Err(Error::DivergenceSuspected {
                    iteration,
                    reason: format!("component {i} became negative ({})", v.render()),
                })
            }
        }
    }
    Ok(())
}

pub(crate) fn residual_tolerance<F: Field>(field: &F, stop: &StopRule) -> Option<F::Elem> {
    stop.residual_below.as_ref().map(|r| field.from_rational(r))
}

/// Shared bookkeeping of the single-sequence engines.
pub(crate) struct Driver<'a, F: Field> {
    pub stop: &'a StopRule,
    pub guard: F::Elem,
    pub tol: Option<F::Elem>,
}

impl<'a, F: Field> Driver<'a, F> {
    pub fn new(field: &F, stop: &'a StopRule) -> Result<Self> {
        stop.validate()?;
        Ok(Driver {
            stop,
            guard: guard_value(field, stop),
            tol: residual_tolerance(field, stop),
        })
    }

    /// Checks the iteration-count and residual criteria for iterate `k`.
    pub fn should_stop(&self, k: usize, residual: &F::Elem) -> Option<StopReason> {
        if residual.is_zero() {
            return Some(StopReason::FixedPoint);
        }
        if self.tol.as_ref().is_some_and(|t| residual < t) {
            return Some(StopReason::ResidualBelow);
        }
        if self.stop.max_iters.is_some_and(|m| k >= m) {
            return Some(StopReason::MaxIters);
        }
        None
    }
}

/// Newton on a compiled system, stopping at exact fixed points. `c_min`
/// enables the certified-bits criterion.
pub(crate) fn run_newton_compiled<F: Field>(
    field: &F,
    compiled: &CompiledSystem<F::Elem>,
    stop: &StopRule,
    c_min: Option<&Rational>,
) -> Result<IterationTrace<F::Elem>> {
    run_compiled(field, compiled, stop, c_min, true)
}
