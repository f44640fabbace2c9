//! Translations of stochastic models into their SPP systems.

mod backbutton;
mod ppda;

pub use backbutton::{back_button_to_spp, BackButtonModel};
pub use ppda::{is_strict, ppda_to_spp, Ppda, PpdaRule, PpdaTranslation, Triple};

use std::collections::BTreeSet;

use rug::Rational;

use crate::error::{Error, Result};
use crate::scalar::parse_rational;

/// A DSL-compatible identifier derived from `raw`, distinct from `taken`.
pub(crate) fn identifier(raw: &str, fallback_prefix: &str, taken: &mut BTreeSet<String>) -> String {
    let mut base: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if base.is_empty() || !base.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        base = format!("{fallback_prefix}{base}");
    }
    let mut name = base.clone();
    let mut k = 1;
    while taken.contains(&name) {
        k += 1;
        name = format!("{base}_{k}");
    }
    taken.insert(name.clone());
    name
}

pub(crate) fn probability(text: &str, context: &str) -> Result<Rational> {
    parse_rational(text).ok_or_else(|| Error::InvalidModel(format!("bad probability `{text}` for {context}")))
}
