//! Reference systems used throughout the tests, benches and the CLI.

use rug::Rational;

use crate::dsl::parse_system;
use crate::poly::{Monomial, Polynomial};
use crate::system::SppSystem;

/// Revocation probabilities of a three-page back-button process.
pub const BACK_BUTTON_DSL: &str = "\
X1 = 0.4*X2*X1 + 0.6
X2 = 0.3*X1*X2 + 0.4*X3*X2 + 0.3
X3 = 0.3*X1*X3 + 0.7
";

/// Two quadrics: an ellipse (`X`) and a parabola (`Y`).
pub const ELLIPSE_PARABOLA_DSL: &str = "\
X = 0.5*X^2 + 0.25*Y^2 + 0.25
Y = 0.25*X + 0.25*X*Y + 0.25*Y^2 + 0.25
";

/// `X = 1/2 + 1/2 X^2`, least fixed point 1 with a singular Jacobian there.
pub const CRITICAL_DSL: &str = "X = 0.5*X^2 + 0.5\n";

pub fn back_button() -> SppSystem {
    parse_system(BACK_BUTTON_DSL).expect("valid")
}

pub fn ellipse_parabola() -> SppSystem {
    parse_system(ELLIPSE_PARABOLA_DSL).expect("valid")
}

pub fn critical() -> SppSystem {
    parse_system(CRITICAL_DSL).expect("valid")
}

/// The chain family where every bit of the last component costs `2^(n-1)`
/// Newton steps:
///
/// ```text
/// X1 = 1/2 + 1/2 X1^2
/// Xk = 1/4 X(k-1)^2 + 1/2 X(k-1) Xk + 1/4 Xk^2      (k = 2..n)
/// ```
///
/// Its only fixed point is the all-ones vector.
pub fn worst_case_family(n: usize) -> SppSystem {
    assert!(n >= 1);
    let q = |p: u32, d: u32| Rational::from((p, d));
    let mut equations = vec![Polynomial::from_terms(q(1, 2), Monomial::new(q(1, 2), [(0, 2)]))];
    for k in 1..n {
        equations.push(Polynomial::from_terms(
            Rational::new(),
            [
                Monomial::new(q(1, 4), [(k - 1, 2)]).unwrap(),
                Monomial::new(q(1, 2), [(k - 1, 1), (k, 1)]).unwrap(),
                Monomial::new(q(1, 4), [(k, 2)]).unwrap(),
            ],
        ));
    }
    let names = (1..=n).map(|i| format!("X{i}")).collect();
    SppSystem::new(names, equations)
}
