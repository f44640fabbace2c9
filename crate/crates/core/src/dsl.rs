//! Text and JSON formats for SPP systems.
//!
//! Text: one equation per line, `<Var> = <term> (+ <term>)*`, where a term is
//! a `*`-separated product of coefficients (`0.4`, `3/10`) and variables with
//! optional integer powers (`X^2`). `#` starts a comment. Variables are
//! numbered in the order of their defining equations.

use std::collections::{BTreeMap, HashMap};

use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::scalar::{parse_rational, render_rational_decimal};
use crate::system::SppSystem;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Eq,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
}

struct Lexer<'a> {
    line: usize,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(line: usize, src: &'a str) -> Self {
        Lexer {
            line,
            chars: src.char_indices().peekable(),
            src,
        }
    }

    fn err(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        while let Some(&(pos, c)) = self.chars.peek() {
            let col = pos + 1;
            if c.is_whitespace() {
                self.chars.next();
                continue;
            }
            if c == '#' {
                break;
            }
            let single = match c {
                '=' => Some(Tok::Eq),
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' => Some(Tok::Star),
                '^' => Some(Tok::Caret),
                '/' => Some(Tok::Slash),
                _ => None,
            };
            if let Some(t) = single {
                self.chars.next();
                out.push((col, t));
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = pos;
                let mut end = pos;
                while let Some(&(p, ch)) = self.chars.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        end = p + ch.len_utf8();
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                out.push((col, Tok::Ident(self.src[start..end].to_string())));
                continue;
            }
            if c.is_ascii_digit() || c == '.' {
                let start = pos;
                let mut end = pos;
                while let Some(&(p, ch)) = self.chars.peek() {
                    if ch.is_ascii_digit() || ch == '.' {
                        end = p + 1;
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                out.push((col, Tok::Number(self.src[start..end].to_string())));
                continue;
            }
            return Err(self.err(col, format!("unexpected character `{c}`")));
        }
        Ok(out)
    }
}

struct LineParser<'a> {
    line: usize,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
    vars: &'a HashMap<String, usize>,
}

impl LineParser<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.col(),
            message: message.into(),
        }
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn negative(&self) -> Error {
        Error::NegativeCoefficient {
            line: self.line,
            column: self.col(),
        }
    }

    fn number(&mut self, text: &str) -> Result<Rational> {
        let mut value = parse_rational(text).ok_or_else(|| self.err(format!("malformed number `{text}`")))?;
        if self.peek() == Some(&Tok::Slash) {
            self.bump();
            match self.bump() {
                Some(Tok::Number(d)) => {
                    let d = parse_rational(&d).ok_or_else(|| self.err(format!("malformed number `{d}`")))?;
                    if d == 0 {
                        return Err(self.err("division by zero"));
                    }
                    value /= d;
                }
                Some(Tok::Minus) => return Err(self.negative()),
                _ => return Err(self.err("expected a denominator after `/`")),
            }
        }
        Ok(value)
    }

    fn term(&mut self) -> Result<(Rational, Vec<(usize, u32)>)> {
        let mut coeff = Rational::from(1);
        let mut powers = Vec::new();
        loop {
            match self.bump() {
                Some(Tok::Number(text)) => coeff *= self.number(&text)?,
                Some(Tok::Ident(name)) => {
                    let idx = *self.vars.get(&name).ok_or(Error::UnknownVariable(name))?;
                    let mut d = 1;
                    if self.peek() == Some(&Tok::Caret) {
                        self.bump();
                        match self.bump() {
                            Some(Tok::Number(e)) => {
                                d = e.parse::<u32>().map_err(|_| {
                                    self.pos -= 1;
                                    self.err(format!("exponent must be a nonnegative integer, got `{e}`"))
                                })?;
                            }
                            _ => {
                                self.pos -= 1;
                                return Err(self.err("expected an integer exponent after `^`"));
                            }
                        }
                    }
                    powers.push((idx, d));
                }
                Some(Tok::Minus) => {
                    self.pos -= 1;
                    return Err(self.negative());
                }
                _ => {
                    self.pos = self.pos.saturating_sub(1);
                    return Err(self.err("expected a coefficient or a variable"));
                }
            }
            if self.peek() == Some(&Tok::Star) {
                self.bump();
            } else {
                return Ok((coeff, powers));
            }
        }
    }

    fn rhs(&mut self) -> Result<Polynomial> {
        let mut poly = Polynomial::default();
        loop {
            let (c, powers) = self.term()?;
            if let Some(m) = Monomial::new(c, powers) {
                poly.push(m);
            }
            match self.peek() {
                None => return Ok(poly),
                Some(Tok::Plus) => {
                    self.bump();
                }
                Some(Tok::Minus) => return Err(self.negative()),
                Some(_) => return Err(self.err("expected `+` or end of line")),
            }
        }
    }
}

/// Parses the text DSL.
pub fn parse_system(text: &str) -> Result<SppSystem> {
    let mut lines = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let toks = Lexer::new(line_no, raw).tokens()?;
        if toks.is_empty() {
            continue;
        }
        let name = match (&toks.first(), toks.get(1)) {
            (Some((_, Tok::Ident(name))), Some((_, Tok::Eq))) => name.clone(),
            (Some((col, _)), _) => {
                return Err(Error::Syntax {
                    line: line_no,
                    column: *col,
                    message: "expected `<Var> =`".into(),
                })
            }
            _ => unreachable!(),
        };
        if index.contains_key(&name) {
            return Err(Error::Syntax {
                line: line_no,
                column: toks[0].0,
                message: format!("variable `{name}` defined twice"),
            });
        }
        index.insert(name.clone(), names.len());
        names.push(name);
        lines.push((line_no, raw.len() + 1, toks));
    }
    let mut equations = Vec::with_capacity(lines.len());
    for (line, end_col, toks) in lines {
        let mut p = LineParser {
            line,
            toks,
            pos: 2,
            end_col,
            vars: &index,
        };
        if p.peek().is_none() {
            return Err(p.err("empty right-hand side"));
        }
        equations.push(p.rhs()?);
    }
    Ok(SppSystem::new(names, equations))
}

/// JSON mirror of the text format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub variables: Vec<String>,
    pub equations: Vec<Vec<TermJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    #[serde(default)]
    pub powers: BTreeMap<String, u32>,
}

impl From<&SppSystem> for SystemJson {
    fn from(sys: &SppSystem) -> Self {
        let names = sys.variables();
        let equations = sys
            .equations()
            .iter()
            .map(|p| {
                let mut terms: Vec<TermJson> = p
                    .monomials()
                    .iter()
                    .map(|m| TermJson {
                        coeff: render_rational_decimal(m.coefficient()),
                        powers: m.powers().iter().map(|(&v, &d)| (names[v].clone(), d)).collect(),
                    })
                    .collect();
                if *p.constant_term() != 0 || terms.is_empty() {
                    terms.push(TermJson {
                        coeff: render_rational_decimal(p.constant_term()),
                        powers: BTreeMap::new(),
                    });
                }
                terms
            })
            .collect();
        SystemJson {
            variables: names.to_vec(),
            equations,
        }
    }
}

impl TryFrom<&SystemJson> for SppSystem {
    type Error = Error;

    fn try_from(js: &SystemJson) -> Result<Self> {
        if js.variables.len() != js.equations.len() {
            return Err(Error::DimensionMismatch {
                expected: js.variables.len(),
                actual: js.equations.len(),
            });
        }
        let index: HashMap<&str, usize> = js.variables.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        if index.len() != js.variables.len() {
            return Err(Error::Json("duplicate variable name".into()));
        }
        let mut equations = Vec::new();
        for terms in &js.equations {
            let mut poly = Polynomial::default();
            for t in terms {
                if t.coeff.trim_start().starts_with('-') {
                    return Err(Error::NegativeCoefficient { line: 0, column: 0 });
                }
                let c = parse_rational(&t.coeff).ok_or_else(|| Error::Json(format!("bad coefficient `{}`", t.coeff)))?;
                let mut powers = Vec::new();
                for (name, &d) in &t.powers {
                    let v = *index.get(name.as_str()).ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                    powers.push((v, d));
                }
                if let Some(m) = Monomial::new(c, powers) {
                    poly.push(m);
                }
            }
            equations.push(poly);
        }
        Ok(SppSystem::new(js.variables.clone(), equations))
    }
}

pub fn system_to_json(sys: &SppSystem) -> String {
    serde_json::to_string_pretty(&SystemJson::from(sys)).expect("serializable")
}

pub fn system_from_json(text: &str) -> Result<SppSystem> {
    let js: SystemJson = serde_json::from_str(text)?;
    SppSystem::try_from(&js)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from((p, d))
    }

    const BACK_BUTTON: &str = "X1 = 0.4*X2*X1 + 0.6\nX2 = 0.3*X1*X2 + 0.4*X3*X2 + 0.3\nX3 = 0.3*X1*X3 + 0.7";

    #[test]
    fn parses_back_button() {
        let sys = parse_system(BACK_BUTTON).unwrap();
        assert_eq!(sys.variables(), ["X1", "X2", "X3"]);
        assert_eq!(sys.equation(0).constant_term(), &q(3, 5));
        assert_eq!(sys.equation(0).monomials()[0].coefficient(), &q(2, 5));
        assert_eq!(sys.equation(1).monomials().len(), 2);
        assert_eq!(sys.degree(), 2);
    }

    #[test]
    fn identity_equation() {
        let sys = parse_system("X = X").unwrap();
        assert_eq!(sys.len(), 1);
        assert_eq!(sys.equation(0).monomials()[0].coefficient(), &q(1, 1));
        assert_eq!(sys.equation(0).constant_term(), &q(0, 1));
    }

    #[test]
    fn rejects_negative_coefficients() {
        let err = parse_system("X1 = 0.5*X1^2 + 0.5 - 1").unwrap_err();
        assert_eq!(err, Error::NegativeCoefficient { line: 1, column: 21 });
        assert!(matches!(parse_system("X = -0.5*X"), Err(Error::NegativeCoefficient { .. })));
    }

    #[test]
    fn rejects_unknown_variables() {
        assert_eq!(parse_system("X = Y + 0.5"), Err(Error::UnknownVariable("Y".into())));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_system("X = 0.5\nY = 0.5 * * X") {
            Err(Error::Syntax { line: 2, column: 11, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_system("X 0.5"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_system("X = "), Err(Error::Syntax { .. })));
        assert!(matches!(parse_system("X = 1\nX = 2"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_system("X = 1/0"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_system("X = X^a"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn comments_fractions_and_order() {
        let sys = parse_system("# header\nB = 1/3*A + 2/3 # trailing\n\nA = A^2*B*1/4 + 0.75").unwrap();
        assert_eq!(sys.variables(), ["B", "A"]);
        let m = &sys.equation(1).monomials()[0];
        assert_eq!(m.coefficient(), &q(1, 4));
        assert_eq!(m.power_of(1), 2);
        assert_eq!(m.power_of(0), 1);
    }

    #[test]
    fn json_mirror_round_trip() {
        let sys = parse_system(BACK_BUTTON).unwrap();
        let text = system_to_json(&sys);
        assert!(text.contains("\"coeff\": \"0.4\""));
        assert_eq!(system_from_json(&text).unwrap(), sys);
        let js = r#"{"variables":["X1","X2"],"equations":[[{"coeff":"3/10","powers":{"X1":1,"X2":1}},{"coeff":"7/10"}],[{"coeff":"1"}]]}"#;
        let s = system_from_json(js).unwrap();
        assert_eq!(s.equation(0).constant_term(), &q(7, 10));
        assert!(matches!(
            system_from_json(r#"{"variables":["X"],"equations":[[{"coeff":"1","powers":{"Y":1}}]]}"#),
            Err(Error::UnknownVariable(_))
        ));
    }
}
