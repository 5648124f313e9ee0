//! Exact-arithmetic toolkit for finite ontological (hidden-variable) models.
//!
//! The library classifies properties of finite ontological models as ontic or
//! epistemic, decides determinism / parameter independence / locality, rewrites
//! local models into their canonical form over global outcome assignments,
//! decides local realizability of empirical tables by exact LP feasibility,
//! and checks preparation independence against no-preparation-signalling.
//!
//! All probabilities in the core modules are arbitrary-precision rationals;
//! every verdict is an exact predicate and every negative verdict carries a
//! witness. The only floating-point arithmetic lives in [`quantum`], which
//! rationalizes Born probabilities before they enter the exact core.

pub mod canonical;
pub mod cli;
pub mod empirical;
pub mod json;
pub mod numeric;
pub mod ontology;
pub mod preparation;
pub mod quantum;
pub mod scenario;

pub use numeric::{Distribution, Rational, SignedWeights};
pub use scenario::{Assignment, Context, MeasurementScenario, PreparationScenario};
