//! Least fixed points of systems of positive polynomials `X = f(X)`.
//!
//! The crate parses and analyses systems ([`SppSystem`], [`scc_decompose`],
//! [`clean`], [`reduce_to_quadratic`]), runs the iteration engines in
//! [`iterate`] over exact rationals or binary floats, and turns Newton
//! iterates into certified enclosures in [`certify`]. [`frontends`]
//! translates back-button processes and probabilistic pushdown automata.

pub mod catalog;
pub mod certify;
pub mod clean;
pub mod compiled;
pub mod decompose;
pub mod dsl;
pub mod error;
pub mod frontends;
pub mod iterate;
pub mod linalg;
pub mod poly;
pub mod quadratic;
pub mod scalar;
pub mod system;

pub use clean::{clean, is_clean, Cleaned};
pub use certify::{certified_bits, upper_bound_scspp, Certificate, Justification};
pub use compiled::{CompiledSystem, Matrix};
pub use decompose::{scc_decompose, Decomposition, Scc};
pub use dsl::{parse_system, system_from_json, system_to_json};
pub use frontends::{back_button_to_spp, is_strict, ppda_to_spp, BackButtonModel, Ppda};
pub use error::{Error, Result};
pub use iterate::{dnm_run, kleene_run, newton_run, newton_step, tangent_run, tangent_step, IterationTrace, Method, StopRule};
pub use poly::{Monomial, Polynomial};
pub use quadratic::{reduce_to_quadratic, AuxProduct, QuadraticReduction};
pub use scalar::{BinaryFloat, ExactRational, Field, Scalar, ScalarKind};
pub use system::{CoefficientStats, SppSystem};
