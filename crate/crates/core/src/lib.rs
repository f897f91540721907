//! Bilinear state-space realizations of generating functions of multiple
//! polylogarithms, their numerical evaluation on `(0, 1)`, and independent
//! nested-sum oracles for checking multiple zeta value identities.
//!
//! The pipeline is: parse a composition such as `2,1,{2},3`
//! ([`parse`]), build an exact realization with θ kept symbolic
//! ([`realize`]), check it coefficient-by-coefficient against the rational
//! series it should recognize ([`ratseries`]), then instantiate θ and
//! integrate ([`simulate`]). [`oracle`] and [`verify`] supply the ground truth
//! and the identity harness.

pub mod error;
pub mod oracle;
pub mod parse;
pub mod ratseries;
pub mod realize;
pub mod simulate;
pub mod theta;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
pub use parse::{parse_composition, CompositionSpec};
pub use ratseries::{coeff_pattern, coeff_repr, repr_equals_pattern, CoefficientReport, LinearRepresentation};
pub use realize::{build_general, build_periodic, instantiate, NumericRealization, Realization};
pub use theta::{Rational, ThetaMatrix, ThetaPoly};
pub use words::{Composition, GeneralizedComposition, Letter, Word};
