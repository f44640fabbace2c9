use rayon::prelude::*;
use rug::Integer;

use super::newton::run_compiled;
use super::{require_clean, StopRule};
use crate::decompose::{scc_decompose, Decomposition};
use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::system::SppSystem;

#[derive(Debug, Clone)]
pub struct DnmResult<S> {
    /// The assembled approximation `ρ^(i)`.
    pub rho: Vec<S>,
    /// Newton steps executed per SCC id.
    pub steps_per_scc: Vec<usize>,
    pub total_steps: usize,
    pub decomposition: Decomposition,
}

/// Planned Newton steps `Σ_t |SCC(t)| i 2^t` and the bound `i w 2^(h+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnmBudget {
    pub exact: Integer,
    pub bound: Integer,
}

fn pow2(t: usize) -> Integer {
    Integer::from(1) << t as u32
}

pub fn dnm_budget(sys: &SppSystem, i: u64) -> DnmBudget {
    let d = scc_decompose(sys);
    budget_of(&d, i)
}

fn budget_of(d: &Decomposition, i: u64) -> DnmBudget {
    let exact = d.depth.iter().fold(Integer::new(), |acc, &t| acc + pow2(t) * i);
    let bound = if d.is_empty() {
        Integer::new()
    } else {
        pow2(d.height + 1) * i * d.width as u64
    };
    DnmBudget { exact, bound }
}

/// Decomposed Newton: deepest SCCs first, each SCC of depth `t` gets
/// `i 2^t` Newton steps from zero with the values of deeper SCCs substituted.
/// SCCs of equal depth are independent and run in parallel.
pub fn dnm_run<F: Field>(sys: &SppSystem, field: &F, i: u64) -> Result<DnmResult<F::Elem>> {
    if i == 0 {
        return Err(Error::InvalidStopRule("the DNM precision parameter must be at least 1".into()));
    }
    require_clean(sys)?;
    let d = scc_decompose(sys);
    let steps_for = |t: usize| -> Result<usize> {
        let s = pow2(t) * i;
        s.to_usize()
            .ok_or_else(|| Error::InvalidStopRule(format!("{s} Newton steps at depth {t} exceed the address space")))
    };
    let compiled = sys.compile(field);
    let mut values = field.zeros(sys.len());
    let mut steps_per_scc = vec![0; d.len()];

    for t in (0..=d.height).rev() {
        let steps = steps_for(t)?;
        let layer = d.at_depth(t);
        let results: Vec<_> = layer
            .par_iter()
            .map(|&s| {
                let vars = &d.sccs[s].vars;
                let sub = compiled.restrict(vars, &values);
                run_compiled(field, &sub, &StopRule::iterations(steps), None, false).map(|tr| (s, tr))
            })
            .collect::<Result<_>>()?;
        for (s, trace) in results {
            steps_per_scc[s] = trace.steps();
            for (v, x) in d.sccs[s].vars.iter().zip(trace.last()) {
                values[*v] = x.clone();
            }
        }
    }
    Ok(DnmResult {
        rho: values,
        total_steps: steps_per_scc.iter().sum(),
        steps_per_scc,
        decomposition: d,
    })
}
