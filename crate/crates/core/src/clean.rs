//! Removal of components that stay zero under Kleene iteration.

use std::cmp::Ordering;

use crate::poly::Polynomial;
use crate::system::SppSystem;

/// Result of [`clean`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cleaned {
    pub system: SppSystem,
    /// Original indices of the removed components, ascending.
    pub removed: Vec<usize>,
    /// Original index of every surviving component, in order.
    pub kept: Vec<usize>,
}

impl Cleaned {
    pub fn removed_names<'a>(&self, original: &'a SppSystem) -> Vec<&'a str> {
        self.removed.iter().map(|&i| original.variables()[i].as_str()).collect()
    }
}

/// `steps` Kleene steps from the all-false vector over the boolean
/// abstraction (positive coefficient ↦ true, product ↦ and, sum ↦ or).
pub fn boolean_kleene(sys: &SppSystem, steps: usize) -> Vec<bool> {
    let mut cur = vec![false; sys.len()];
    for _ in 0..steps {
        let next: Vec<bool> = sys.equations().iter().map(|p| positive_at(p, &cur)).collect();
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn positive_at(p: &Polynomial, x: &[bool]) -> bool {
    p.constant_term().cmp0() == Ordering::Greater || p.monomials().iter().any(|m| m.powers().keys().all(|&v| x[v]))
}

pub fn is_clean(sys: &SppSystem) -> bool {
    boolean_kleene(sys, sys.len()).into_iter().all(|b| b)
}

/// Number of components that stay zero.
pub fn unclean_count(sys: &SppSystem) -> usize {
    boolean_kleene(sys, sys.len()).into_iter().filter(|b| !b).count()
}

/// Removes every component that is still zero after `n` boolean Kleene
/// steps; monomials mentioning a removed variable are dropped.
pub fn clean(sys: &SppSystem) -> Cleaned {
    let alive = boolean_kleene(sys, sys.len());
    let mut rename = vec![usize::MAX; sys.len()];
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (i, &a) in alive.iter().enumerate() {
        if a {
            rename[i] = kept.len();
            kept.push(i);
        } else {
            removed.push(i);
        }
    }
    let variables = kept.iter().map(|&i| sys.variables()[i].clone()).collect();
    let equations = kept
        .iter()
        .map(|&i| sys.equation(i).retain_vars(|v| !alive[v], |v| rename[v]))
        .collect();
    Cleaned {
        system: SppSystem::new(variables, equations),
        removed,
        kept,
    }
}
