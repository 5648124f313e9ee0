//! Preparation scenarios: joint ontic states, preparation independence,
//! no-preparation-signalling, and the steering incompatibility check.
//!
//! Preparation independence asks each joint ontic-state distribution to
//! factor into the product of its per-site marginals; the weaker
//! no-preparation-signalling condition only asks the per-site marginals to
//! be independent of the preparations chosen at the other sites. The
//! correlated pair `{00: 1/2, 11: 1/2}` separates the two.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::numeric::{Distribution, MixtureError, Rational};
use crate::scenario::{Assignment, PrepContext, PreparationScenario};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PreparationError {
    #[error("missing joint distribution for preparation context {0}")]
    MissingJointDist(PrepContext),
    #[error("joint state {state} in context {context} is not a total assignment of the sites")]
    JointStateDomainMismatch { context: PrepContext, state: Assignment },
    #[error("joint state {state} in context {context} uses an ontic state outside the scenario's space")]
    UnknownOnticState { context: PrepContext, state: Assignment },
    #[error("unknown preparation context {0}")]
    UnknownContext(PrepContext),
    #[error("unknown site {0:?}")]
    UnknownSite(String),
    #[error("stray joint distribution for {0}, not a declared preparation context")]
    StrayEntry(PrepContext),
}

/// An ontological theory over a preparation scenario: one joint ontic-state
/// distribution per preparation context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparationTheory {
    scenario: PreparationScenario,
    joint_dists: BTreeMap<PrepContext, Distribution<Assignment>>,
}

/// Preparation independence verdict: each joint distribution equals the
/// product of its own per-site marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreparationIndependence {
    Independent,
    Correlated {
        context: PrepContext,
        state: Assignment,
        joint_weight: Rational,
        product_weight: Rational,
    },
}

impl PreparationIndependence {
    pub fn holds(&self) -> bool {
        matches!(self, PreparationIndependence::Independent)
    }
}

/// No-preparation-signalling verdict: the marginal over a site's ontic
/// state agrees across all contexts choosing the same preparation there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoPreparationSignalling {
    Holds,
    Violated {
        site: String,
        preparation: String,
        context_a: PrepContext,
        context_b: PrepContext,
    },
}

impl NoPreparationSignalling {
    pub fn holds(&self) -> bool {
        matches!(self, NoPreparationSignalling::Holds)
    }
}

impl PreparationTheory {
    pub fn new(
        scenario: PreparationScenario,
        joint_dists: BTreeMap<PrepContext, Distribution<Assignment>>,
    ) -> Result<Self, PreparationError> {
        let sites: BTreeSet<&String> = scenario.sites().iter().collect();
        let lambda: BTreeSet<&String> = scenario.lambda().iter().collect();
        for context in scenario.contexts() {
            let dist = joint_dists
                .get(context)
                .ok_or_else(|| PreparationError::MissingJointDist(context.clone()))?;
            for (state, _) in dist.iter() {
                let domain: BTreeSet<&String> = state.iter().map(|(s, _)| s).collect();
                if domain != sites {
                    return Err(PreparationError::JointStateDomainMismatch {
                        context: context.clone(),
                        state: state.clone(),
                    });
                }
                if state.iter().any(|(_, l)| !lambda.contains(l)) {
                    return Err(PreparationError::UnknownOnticState {
                        context: context.clone(),
                        state: state.clone(),
                    });
                }
            }
        }
        if joint_dists.len() != scenario.contexts().len() {
            let stray = joint_dists
                .keys()
                .find(|c| !scenario.contexts().contains(c))
                .expect("length mismatch implies a stray key");
            return Err(PreparationError::StrayEntry(stray.clone()));
        }
        Ok(PreparationTheory {
            scenario,
            joint_dists,
        })
    }

    pub fn scenario(&self) -> &PreparationScenario {
        &self.scenario
    }

    pub fn joint_dist(&self, context: &PrepContext) -> Result<&Distribution<Assignment>, PreparationError> {
        self.joint_dists
            .get(context)
            .ok_or_else(|| PreparationError::UnknownContext(context.clone()))
    }

    /// The marginal distribution of the ontic state at `site` under the
    /// joint distribution for `context`.
    pub fn site_marginal(
        &self,
        context: &PrepContext,
        site: &str,
    ) -> Result<Distribution<String>, PreparationError> {
        if !self.scenario.sites().iter().any(|s| s == site) {
            return Err(PreparationError::UnknownSite(site.to_string()));
        }
        let dist = self.joint_dist(context)?;
        Ok(dist.map(|state| {
            state
                .value(site)
                .expect("joint states are total on the sites")
                .to_string()
        }))
    }

    /// Each joint distribution factors into the product of its per-site
    /// marginals, exactly.
    pub fn preparation_independence(&self) -> PreparationIndependence {
        for context in self.scenario.contexts() {
            let joint = &self.joint_dists[context];
            let marginals: BTreeMap<&String, Distribution<String>> = self
                .scenario
                .sites()
                .iter()
                .map(|site| {
                    (
                        site,
                        self.site_marginal(context, site)
                            .expect("sites and contexts are validated"),
                    )
                })
                .collect();
            for state in self.scenario.joint_states() {
                let product: Rational = state
                    .iter()
                    .map(|(site, l)| marginals[site].weight(&l.to_string()))
                    .product::<Rational>();
                let joint_weight = joint.weight(&state);
                if joint_weight != product {
                    return PreparationIndependence::Correlated {
                        context: context.clone(),
                        state,
                        joint_weight,
                        product_weight: product,
                    };
                }
            }
        }
        PreparationIndependence::Independent
    }

    /// The marginal over each site's ontic state depends only on the
    /// preparation chosen at that site.
    pub fn no_preparation_signalling(&self) -> NoPreparationSignalling {
        let contexts = self.scenario.contexts();
        for site in self.scenario.sites() {
            for (i, ctx_a) in contexts.iter().enumerate() {
                let prep_a = self
                    .scenario
                    .choice(ctx_a, site)
                    .expect("contexts are total on the sites");
                for ctx_b in &contexts[i + 1..] {
                    let prep_b = self
                        .scenario
                        .choice(ctx_b, site)
                        .expect("contexts are total on the sites");
                    if prep_a != prep_b {
                        continue;
                    }
                    let ma = self.site_marginal(ctx_a, site).expect("validated");
                    let mb = self.site_marginal(ctx_b, site).expect("validated");
                    if !ma.same_measure(&mb) {
                        return NoPreparationSignalling::Violated {
                            site: site.clone(),
                            preparation: prep_a.clone(),
                            context_a: ctx_a.clone(),
                            context_b: ctx_b.clone(),
                        };
                    }
                }
            }
        }
        NoPreparationSignalling::Holds
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SteeringError {
    #[error("ensemble {which} lists state {state:?} with no distribution")]
    UnknownState { which: &'static str, state: String },
    #[error("ensemble {which} is empty")]
    EmptyEnsemble { which: &'static str },
    #[error("ensemble {which}: {source}")]
    BadCoefficients {
        which: &'static str,
        source: MixtureError,
    },
}

/// Why the steering data is contradictory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SteeringContradiction {
    /// The two ensemble mixtures have disjoint supports, so equality is
    /// structurally impossible; this is forced whenever the listed states
    /// have pairwise disjoint supports and the ensembles share no state.
    MixtureEqualityImpossible,
    /// The mixtures differ on a concrete ontic state.
    MixturesDiffer {
        state: String,
        weight_a: Rational,
        weight_b: Rational,
    },
}

/// Verdict of the steering check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SteeringVerdict {
    /// The remote-preparation marginal is basis-independent: the two
    /// ensemble mixtures coincide exactly. `all_supports_disjoint` records
    /// whether the listed states were pairwise disjoint (an ontic
    /// wavefunction) or overlapping (the epistemic escape).
    Consistent { all_supports_disjoint: bool },
    Contradiction(SteeringContradiction),
}

impl SteeringVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, SteeringVerdict::Consistent { .. })
    }
}

/// Checks the steering scenario: two remotely prepared ensembles over the
/// given per-state ontic distributions must induce the same marginal on the
/// distant system. With pairwise disjoint supports and distinct ensembles
/// the mixtures cannot coincide, which is the incompatibility of steering
/// with an ontic wavefunction; overlapping supports can evade it.
pub fn steering_incompatibility(
    mu: &BTreeMap<String, Distribution<String>>,
    ensemble_a: &[(Rational, String)],
    ensemble_b: &[(Rational, String)],
) -> Result<SteeringVerdict, SteeringError> {
    let mix_a = ensemble_mixture(mu, ensemble_a, "1")?;
    let mix_b = ensemble_mixture(mu, ensemble_b, "2")?;

    let mut listed: Vec<&String> = ensemble_a
        .iter()
        .chain(ensemble_b)
        .map(|(_, label)| label)
        .collect();
    listed.sort();
    listed.dedup();
    let mut all_supports_disjoint = true;
    'outer: for (i, a) in listed.iter().enumerate() {
        for b in &listed[i + 1..] {
            if mu[*a].support_overlap(&mu[*b]).is_some() {
                all_supports_disjoint = false;
                break 'outer;
            }
        }
    }

    if mix_a.same_measure(&mix_b) {
        return Ok(SteeringVerdict::Consistent {
            all_supports_disjoint,
        });
    }
    if mix_a.support_overlap(&mix_b).is_none() {
        return Ok(SteeringVerdict::Contradiction(
            SteeringContradiction::MixtureEqualityImpossible,
        ));
    }
    let witness = mix_a
        .support()
        .chain(mix_b.support())
        .find(|s| mix_a.weight(s) != mix_b.weight(s))
        .expect("unequal measures differ somewhere on their supports")
        .clone();
    Ok(SteeringVerdict::Contradiction(
        SteeringContradiction::MixturesDiffer {
            weight_a: mix_a.weight(&witness),
            weight_b: mix_b.weight(&witness),
            state: witness,
        },
    ))
}

fn ensemble_mixture(
    mu: &BTreeMap<String, Distribution<String>>,
    ensemble: &[(Rational, String)],
    which: &'static str,
) -> Result<Distribution<String>, SteeringError> {
    if ensemble.is_empty() {
        return Err(SteeringError::EmptyEnsemble { which });
    }
    let components: Vec<(Rational, Distribution<String>)> = ensemble
        .iter()
        .map(|(c, label)| {
            mu.get(label)
                .map(|d| (c.clone(), d.clone()))
                .ok_or_else(|| SteeringError::UnknownState {
                    which,
                    state: label.clone(),
                })
        })
        .collect::<Result<_, _>>()?;
    Distribution::mixture(&components)
        .map_err(|source| SteeringError::BadCoefficients { which, source })
}
