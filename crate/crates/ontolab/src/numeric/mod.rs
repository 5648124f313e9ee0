//! Exact rational arithmetic and finite probability distributions.
//!
//! Everything downstream (scenarios, models, LP feasibility) is built on the
//! two types here: [`Rational`], an arbitrary-precision fraction, and
//! [`Distribution`], a normalized weight map over a finite set. Equality of
//! distributions, delta detection and support overlap are exact predicates;
//! there are no tolerances anywhere in this module.

mod distribution;
mod rational;

pub use distribution::{Distribution, DistributionError, MixtureError, SignedWeights};
pub use rational::{ParseRationalError, Rational};
