use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rug::Rational;
use serde::{Deserialize, Serialize};

use super::{identifier, probability};
use crate::clean::clean;
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::scalar::render_rational_decimal;
use crate::system::SppSystem;

/// `state symbol -> target push` with probability `prob`; `push` has at most
/// two symbols, the first one ends up on top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpdaRule {
    pub state: String,
    pub symbol: String,
    pub target: String,
    pub push: Vec<String>,
    pub prob: Rational,
}

/// Probabilistic pushdown automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ppda {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub rules: Vec<PpdaRule>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleJson {
    from: (String, String),
    to: (String, String),
    prob: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PpdaJson {
    states: Vec<String>,
    alphabet: Vec<String>,
    rules: Vec<RuleJson>,
}

/// The pushed word is a string of symbols: separated by whitespace if it
/// contains any, otherwise one symbol per character.
fn split_word(word: &str) -> Vec<String> {
    if word.chars().any(char::is_whitespace) {
        word.split_whitespace().map(str::to_string).collect()
    } else {
        word.chars().map(String::from).collect()
    }
}

impl Ppda {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PpdaJson = serde_json::from_str(text)?;
        let rules = raw
            .rules
            .into_iter()
            .map(|r| {
                let context = format!("rule {} {} -> {} {:?}", r.from.0, r.from.1, r.to.0, r.to.1);
                Ok(PpdaRule {
                    prob: probability(&r.prob, &context)?,
                    state: r.from.0,
                    symbol: r.from.1,
                    target: r.to.0,
                    push: split_word(&r.to.1),
                })
            })
            .collect::<Result<_>>()?;
        let ppda = Ppda {
            states: raw.states,
            alphabet: raw.alphabet,
            rules,
        };
        ppda.validate()?;
        Ok(ppda)
    }

    pub fn to_json(&self) -> String {
        let spaced = self.alphabet.iter().any(|s| s.chars().count() != 1);
        let raw = PpdaJson {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleJson {
                    from: (r.state.clone(), r.symbol.clone()),
                    to: (r.target.clone(), r.push.join(if spaced { " " } else { "" })),
                    prob: r.prob.to_string(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data")
    }

    pub fn validate(&self) -> Result<()> {
        let states: BTreeSet<&String> = self.states.iter().collect();
        let symbols: BTreeSet<&String> = self.alphabet.iter().collect();
        let mut mass: BTreeMap<(&String, &String), Rational> = BTreeMap::new();
        for r in &self.rules {
            let describe = || format!("{} {} -> {} {}", r.state, r.symbol, r.target, r.push.join(" "));
            if !states.contains(&r.state) || !states.contains(&r.target) {
                return Err(Error::InvalidRule(format!("unknown state in `{}`", describe())));
            }
            if !symbols.contains(&r.symbol) || r.push.iter().any(|s| !symbols.contains(s)) {
                return Err(Error::InvalidRule(format!("unknown stack symbol in `{}`", describe())));
            }
            if r.push.len() > 2 {
                return Err(Error::InvalidRule(format!("`{}` pushes more than two symbols", describe())));
            }
            if r.prob.cmp0() != Ordering::Greater || r.prob > 1 {
                return Err(Error::InvalidRule(format!("`{}` has probability {} outside (0, 1]", describe(), r.prob)));
            }
            *mass.entry((&r.state, &r.symbol)).or_default() += &r.prob;
        }
        for ((p, x), sum) in mass {
            if sum != 1 {
                return Err(Error::ProbabilityMassMismatch {
                    context: format!("{p} {x}"),
                    sum: render_rational_decimal(&sum),
                });
            }
        }
        Ok(())
    }
}

/// The termination probability `[p X q]`: from state `p` with `X` on top,
/// the probability of eventually emptying the stack in state `q`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Triple {
    pub from: String,
    pub symbol: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpdaTranslation {
    /// Cleaned termination system.
    pub system: SppSystem,
    /// The triple of every variable of `system`, in order.
    pub legend: Vec<Triple>,
    /// Triples whose variables were removed by cleaning (probability 0).
    pub removed: Vec<Triple>,
}

/// Builds the termination system
/// `[pXq] = Σ_{pX→rYZ} x Σ_t [rYt][tZq] + Σ_{pX→rY} x [rYq] + Σ_{pX→qε} x`
/// over all triples and cleans it.
pub fn ppda_to_spp(ppda: &Ppda) -> Result<PpdaTranslation> {
    ppda.validate()?;
    let ns = ppda.states.len();
    let na = ppda.alphabet.len();
    let st: BTreeMap<&String, usize> = ppda.states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let sy: BTreeMap<&String, usize> = ppda.alphabet.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let var = |p: usize, x: usize, q: usize| (p * na + x) * ns + q;

    let mut triples = Vec::with_capacity(ns * na * ns);
    let mut names = Vec::with_capacity(ns * na * ns);
    let mut taken = BTreeSet::new();
    for p in &ppda.states {
        for x in &ppda.alphabet {
            for q in &ppda.states {
                names.push(identifier(&format!("{p}_{x}_{q}"), "T", &mut taken));
                triples.push(Triple {
                    from: p.clone(),
                    symbol: x.clone(),
                    to: q.clone(),
                });
            }
        }
    }

    let mut equations = vec![Polynomial::default(); ns * na * ns];
    for r in &ppda.rules {
        let (p, x, target) = (st[&r.state], sy[&r.symbol], st[&r.target]);
        for q in 0..ns {
            let eq = &mut equations[var(p, x, q)];
            let mono = |powers: Vec<(usize, u32)>| Monomial::new(r.prob.clone(), powers).expect("positive probability");
            match r.push.as_slice() {
                [] if target == q => eq.push(mono(Vec::new())),
                [] => {}
                [y] => eq.push(mono(vec![(var(target, sy[y], q), 1)])),
                [y, z] => {
                    for t in 0..ns {
                        eq.push(mono(vec![(var(target, sy[y], t), 1), (var(t, sy[z], q), 1)]));
                    }
                }
                _ => unreachable!("validated"),
            }
        }
    }

    let full = SppSystem::new(names, equations);
    let cleaned = clean(&full);
    Ok(PpdaTranslation {
        legend: cleaned.kept.iter().map(|&i| triples[i].clone()).collect(),
        removed: cleaned.removed.iter().map(|&i| triples[i].clone()).collect(),
        system: cleaned.system,
    })
}

/// Every `(p, X)` that has rules has a pop rule `pX → qε` for every state
/// `q`. This literal reading is stronger than needed for `f(0) ≻ 0` on the
/// cleaned termination system when some `[pXq]` are zero anyway.
pub fn is_strict(ppda: &Ppda) -> bool {
    let heads: BTreeSet<(&String, &String)> = ppda.rules.iter().map(|r| (&r.state, &r.symbol)).collect();
    heads.into_iter().all(|(p, x)| {
        ppda.states.iter().all(|q| {
            ppda.rules
                .iter()
                .any(|r| &r.state == p && &r.symbol == x && &r.target == q && r.push.is_empty())
        })
    })
}
