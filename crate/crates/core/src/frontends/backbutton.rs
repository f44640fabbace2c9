use std::collections::{BTreeMap, BTreeSet};

use rug::Rational;
use serde::{Deserialize, Serialize};

use super::{identifier, probability, Ppda, PpdaRule};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::scalar::render_rational_decimal;
use crate::system::SppSystem;

/// Random surfing with a back button: on page `A` the surfer presses back
/// with probability `back[A]` or follows the link to `B` with probability
/// `links[A][B]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackButtonModel {
    pub pages: Vec<String>,
    pub back: BTreeMap<String, Rational>,
    pub links: BTreeMap<String, BTreeMap<String, Rational>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    pages: Vec<String>,
    back: BTreeMap<String, String>,
    #[serde(default)]
    links: BTreeMap<String, BTreeMap<String, String>>,
}

impl BackButtonModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ModelJson = serde_json::from_str(text)?;
        let back = raw
            .back
            .iter()
            .map(|(page, p)| Ok((page.clone(), probability(p, &format!("back[{page}]"))?)))
            .collect::<Result<_>>()?;
        let links = raw
            .links
            .iter()
            .map(|(from, row)| {
                let row = row
                    .iter()
                    .map(|(to, p)| Ok((to.clone(), probability(p, &format!("links[{from}][{to}]"))?)))
                    .collect::<Result<_>>()?;
                Ok((from.clone(), row))
            })
            .collect::<Result<_>>()?;
        let model = BackButtonModel {
            pages: raw.pages,
            back,
            links,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let raw = ModelJson {
            pages: self.pages.clone(),
            back: self.back.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
            links: self
                .links
                .iter()
                .map(|(a, row)| (a.clone(), row.iter().map(|(b, v)| (b.clone(), v.to_string())).collect()))
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data")
    }

    /// `b_A > 0` and `b_A + Σ_B ℓ_AB = 1` for every page, exactly.
    pub fn validate(&self) -> Result<()> {
        let known: BTreeSet<&String> = self.pages.iter().collect();
        if known.len() != self.pages.len() {
            return Err(Error::InvalidModel("duplicate page".into()));
        }
        if self.pages.is_empty() {
            return Err(Error::InvalidModel("no pages".into()));
        }
        for name in self.back.keys().chain(self.links.keys()) {
            if !known.contains(name) {
                return Err(Error::InvalidModel(format!("unknown page `{name}`")));
            }
        }
        for (from, row) in &self.links {
            if let Some(to) = row.keys().find(|t| !known.contains(t)) {
                return Err(Error::InvalidModel(format!("link {from} -> {to} targets an unknown page")));
            }
        }
        for page in &self.pages {
            let b = self.back.get(page).cloned().unwrap_or_default();
            if b.cmp0() != std::cmp::Ordering::Greater {
                return Err(Error::InvalidModel(format!("back probability of `{page}` must be positive")));
            }
            let sum = self
                .links
                .get(page)
                .into_iter()
                .flat_map(|row| row.values())
                .fold(b, |acc, p| acc + p);
            if sum != 1 {
                return Err(Error::ProbabilityMassMismatch {
                    context: format!("page `{page}`"),
                    sum: render_rational_decimal(&sum),
                });
            }
        }
        Ok(())
    }

    /// The single-state pPDA whose stack holds the history of visited pages.
    pub fn to_ppda(&self) -> Ppda {
        let mut rules = Vec::new();
        for page in &self.pages {
            rules.push(PpdaRule {
                state: "p".into(),
                symbol: page.clone(),
                target: "p".into(),
                push: Vec::new(),
                prob: self.back[page].clone(),
            });
            for to in self.ordered_links(page) {
                rules.push(PpdaRule {
                    state: "p".into(),
                    symbol: page.clone(),
                    target: "p".into(),
                    push: vec![to.0.clone(), page.clone()],
                    prob: to.1.clone(),
                });
            }
        }
        Ppda {
            states: vec!["p".into()],
            alphabet: self.pages.clone(),
            rules,
        }
    }

    /// Outgoing links of `page` in page order.
    fn ordered_links(&self, page: &str) -> Vec<(&String, &Rational)> {
        let Some(row) = self.links.get(page) else {
            return Vec::new();
        };
        self.pages
            .iter()
            .filter_map(|p| row.get(p).map(|v| (p, v)))
            .filter(|(_, v)| v.cmp0() == std::cmp::Ordering::Greater)
            .collect()
    }
}

/// `X_A = b_A + Σ_B ℓ_AB X_B X_A`, one variable per page. Page names that are
/// not identifiers are prefixed with `X`.
pub fn back_button_to_spp(model: &BackButtonModel) -> Result<SppSystem> {
    model.validate()?;
    let index: BTreeMap<&String, usize> = model.pages.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut taken = BTreeSet::new();
    let names = model.pages.iter().map(|p| identifier(p, "X", &mut taken)).collect();
    let equations = model
        .pages
        .iter()
        .map(|page| {
            let a = index[page];
            let terms = model
                .ordered_links(page)
                .into_iter()
                .filter_map(|(to, l)| Monomial::new(l.clone(), [(index[to], 1), (a, 1)]));
            Polynomial::from_terms(model.back[page].clone(), terms)
        })
        .collect();
    Ok(SppSystem::new(names, equations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::frontends::is_strict;

    const THREE_PAGES: &str = r#"{
        "pages": ["1", "2", "3"],
        "back": {"1": "0.6", "2": "0.3", "3": "0.7"},
        "links": {"1": {"2": "0.4"}, "2": {"1": "0.3", "3": "0.4"}, "3": {"1": "0.3"}}
    }"#;

    #[test]
    fn three_pages_give_the_reference_system() {
        let m = BackButtonModel::from_json(THREE_PAGES).unwrap();
        let sys = back_button_to_spp(&m).unwrap();
        assert_eq!(sys, catalog::back_button());
        assert!(is_strict(&m.to_ppda()));
        assert_eq!(BackButtonModel::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn single_page() {
        let m = BackButtonModel::from_json(r#"{"pages":["home"],"back":{"home":"1"}}"#).unwrap();
        assert_eq!(back_button_to_spp(&m).unwrap().to_dsl(), "home = 1\n");
    }

    #[test]
    fn mass_must_be_one() {
        let err = BackButtonModel::from_json(r#"{"pages":["a"],"back":{"a":"0.5"},"links":{"a":{"a":"0.4"}}}"#).unwrap_err();
        assert_eq!(
            err,
            Error::ProbabilityMassMismatch {
                context: "page `a`".into(),
                sum: "0.9".into()
            }
        );
        assert!(BackButtonModel::from_json(r#"{"pages":["a"],"back":{"a":"0"},"links":{"a":{"a":"1"}}}"#).is_err());
        assert!(BackButtonModel::from_json(r#"{"pages":["a"],"back":{"a":"1"},"links":{"a":{"b":"0"}}}"#).is_err());
    }
}
