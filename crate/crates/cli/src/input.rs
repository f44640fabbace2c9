//! Reading systems from DSL text or one of the JSON formats.

use std::fs;
use std::io::Read;
use std::path::Path;

use sppfix_core::frontends::Triple;
use sppfix_core::{back_button_to_spp, clean, parse_system, ppda_to_spp, system_from_json, BackButtonModel, Ppda, SppSystem};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Dsl,
    SystemJson,
    BackButton,
    Ppda,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Dsl => "dsl",
            Origin::SystemJson => "system-json",
            Origin::BackButton => "back-button",
            Origin::Ppda => "ppda",
        }
    }
}

/// A parsed system before cleaning.
pub struct Input {
    pub system: SppSystem,
    pub origin: Origin,
    /// For pPDA input: the triple behind each variable of `system`, followed
    /// by triples already known to have probability zero.
    pub legend: Vec<Triple>,
    pub zero_triples: Vec<Triple>,
}

/// The system after cleaning, with the names of the removed variables (whose
/// least fixed point component is zero).
pub struct Cleaned {
    pub system: SppSystem,
    pub removed: Vec<String>,
    pub input: Input,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::input(format!("stdin: {e}")))?;
        return Ok(text);
    }
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// `.json` files are tried as an SPP system, then as a back-button model,
/// then as a pPDA. Anything else (including `-` for stdin) is DSL text.
pub fn load(path: &Path) -> Result<Input, CliError> {
    let text = read_text(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let plain = |system, origin| Input {
        system,
        origin,
        legend: Vec::new(),
        zero_triples: Vec::new(),
    };
    if !is_json {
        let system = parse_system(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        return Ok(plain(system, Origin::Dsl));
    }
    let as_system = match system_from_json(&text) {
        Ok(system) => return Ok(plain(system, Origin::SystemJson)),
        Err(e) => e,
    };
    let as_model = match BackButtonModel::from_json(&text) {
        Ok(model) => {
            let system = back_button_to_spp(&model).map_err(|e| CliError::input(e.to_string()))?;
            return Ok(plain(system, Origin::BackButton));
        }
        Err(e) => e,
    };
    let as_ppda = match Ppda::from_json(&text) {
        Ok(ppda) => {
            let tr = ppda_to_spp(&ppda).map_err(|e| CliError::input(e.to_string()))?;
            return Ok(Input {
                system: tr.system,
                origin: Origin::Ppda,
                legend: tr.legend,
                zero_triples: tr.removed,
            });
        }
        Err(e) => e,
    };
    Err(CliError::input(format!(
        "{}: not a recognized JSON input\n  as system: {as_system}\n  as back-button model: {as_model}\n  as pPDA: {as_ppda}",
        path.display()
    )))
}

/// Loads and cleans; an empty result is an input error.
pub fn load_clean(path: &Path) -> Result<Cleaned, CliError> {
    let input = load(path)?;
    let c = clean(&input.system);
    if c.system.is_empty() {
        return Err(CliError::input("system empty after cleaning".into()));
    }
    let removed = c.removed.iter().map(|&i| input.system.variables()[i].clone()).collect();
    Ok(Cleaned {
        system: c.system,
        removed,
        input,
    })
}
