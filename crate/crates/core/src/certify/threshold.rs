use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde_json::{json, Value};

use super::require_quadratic_scspp;
use crate::error::{Error, Result};
use crate::scalar::{ceil_log2, render_rational_decimal};
use crate::system::SppSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    Estimate,
    Syntactic4mn2n,
    Syntactic7mn,
    Syntactic2mnPlusM,
    EstimateWithMuMin,
}

impl ThresholdKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdKind::Estimate => "Estimate",
            ThresholdKind::Syntactic4mn2n => "Syntactic4mn2n",
            ThresholdKind::Syntactic7mn => "Syntactic7mn",
            ThresholdKind::Syntactic2mnPlusM => "Syntactic2mn_plus_m",
            ThresholdKind::EstimateWithMuMin => "EstimateWithMuMin",
        }
    }
}

/// Which syntactic threshold to evaluate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntacticMode {
    /// `4mn + ⌈3n max{0, -log μmin}⌉` for a lower bound `μmin` on every
    /// component of the least fixed point.
    WithMuMin(Rational),
    /// `4mn 2^n`.
    FourMnTwoN,
    /// `7mn`; needs `f(0) ≻ 0`.
    SevenMn,
    /// `2mn + m`; needs `f(0) ≻ 0` and `μmax <= 1`. The latter holds when
    /// `f(1) <= 1` or when the caller asserts it.
    TwoMnPlusM { assume_mu_max_le_one: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ThresholdInputs {
    pub m: Option<u32>,
    pub n: usize,
    pub c_min: Option<Rational>,
    pub mu_min: Option<Rational>,
    pub mu_max: Option<Rational>,
}

/// An iteration count `k_f` after which every further Newton step gains at
/// least one valid bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Threshold {
    pub kind: ThresholdKind,
    pub value: Integer,
    pub inputs: ThresholdInputs,
}

impl Threshold {
    pub fn to_json(&self) -> Value {
        let r = |v: &Option<Rational>| v.as_ref().map(render_rational_decimal);
        json!({
            "kind": self.kind.as_str(),
            "value": self.value.to_string(),
            "inputs": {
                "m": self.inputs.m,
                "n": self.inputs.n,
                "c_min": r(&self.inputs.c_min),
                "mu_min": r(&self.inputs.mu_min),
                "mu_max": r(&self.inputs.mu_max),
            },
        })
    }
}

fn positive(name: &str, v: &Rational) -> Result<()> {
    if v.cmp0() != Ordering::Greater {
        return Err(Error::NonPositiveBound(format!("{name} = {v}")));
    }
    Ok(())
}

/// `⌈log2(μmax / (μmin (c_min min{μmin, 1})^n))⌉`, clamped at 0, from a
/// lower bound on the smallest and an upper bound on the largest component
/// of the least fixed point.
pub fn threshold_estimate(sys: &SppSystem, mu_min_lb: &Rational, mu_max_ub: &Rational) -> Result<Threshold> {
    positive("mu_min", mu_min_lb)?;
    positive("mu_max", mu_max_ub)?;
    require_quadratic_scspp(sys)?;
    let stats = sys.coefficient_stats()?;
    let base = &stats.c_min * mu_min_lb.clone().min(Rational::from(1)) ;
    let denom = mu_min_lb * base.pow(stats.n as u32) ;
    let ratio = Rational::from(mu_max_ub / &denom);
    let value = Integer::from(ceil_log2(&ratio).max(0));
    Ok(Threshold {
        kind: ThresholdKind::Estimate,
        value,
        inputs: ThresholdInputs {
            m: None,
            n: stats.n,
            c_min: Some(stats.c_min),
            mu_min: Some(mu_min_lb.clone()),
            mu_max: Some(mu_max_ub.clone()),
        },
    })
}

/// Thresholds that depend only on the size of the coefficients.
pub fn threshold_syntactic(sys: &SppSystem, mode: &SyntacticMode) -> Result<Threshold> {
    require_quadratic_scspp(sys)?;
    let stats = sys.coefficient_stats()?;
    let m = Integer::from(stats.m);
    let n = Integer::from(stats.n);
    let mn = Integer::from(&m * &n);
    let mut inputs = ThresholdInputs {
        m: Some(stats.m),
        n: stats.n,
        ..ThresholdInputs::default()
    };
    let f0_positive = || {
        if sys.constants_positive() {
            Ok(())
        } else {
            Err(Error::SideConditionUnmet("f(0) ≻ 0 fails: some equation has no constant term".into()))
        }
    };
    let (kind, value) = match mode {
        SyntacticMode::WithMuMin(mu) => {
            positive("mu_min", mu)?;
            inputs.mu_min = Some(mu.clone());
            // ⌈3n log2(1/μ)⌉ = ⌈log2((1/μ)^(3n))⌉
            let extra = if *mu < 1 {
                let inv = Rational::from(mu.recip_ref()).pow(3 * stats.n as u32);
                ceil_log2(&inv)
            } else {
                0
            };
            (ThresholdKind::EstimateWithMuMin, Integer::from(4) * &mn + extra)
        }
        SyntacticMode::FourMnTwoN => {
            let two_n = Integer::from(1) << stats.n as u32;
            (ThresholdKind::Syntactic4mn2n, Integer::from(4) * &mn * two_n)
        }
        SyntacticMode::SevenMn => {
            f0_positive()?;
            (ThresholdKind::Syntactic7mn, Integer::from(7) * &mn)
        }
        SyntacticMode::TwoMnPlusM { assume_mu_max_le_one } => {
            f0_positive()?;
            if !assume_mu_max_le_one && !sys.bounded_by_one() {
                return Err(Error::SideConditionUnmet(
                    "μmax <= 1 not established: f(1) <= 1 fails and it was not asserted".into(),
                ));
            }
            inputs.mu_max = Some(Rational::from(1));
            (ThresholdKind::Syntactic2mnPlusM, Integer::from(2) * &mn + &m)
        }
    };
    Ok(Threshold { kind, value, inputs })
}
