//! Canonical form of local models.
//!
//! Every local model is operationally equivalent to a model whose ontic
//! states are global outcome assignments and whose responses are delta
//! products. The rewrite sends each original state to the global assignment
//! collecting its per-measurement certain outcomes, merges states with equal
//! assignments, and keeps only assignments that carry weight under some
//! preparation.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::numeric::Distribution;
use crate::ontology::{Classification, Locality, ObservableProperties, OntologicalModel};
use crate::scenario::Assignment;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("model is not local: {0:?}")]
pub struct NotLocalError(pub Locality);

/// A local model rewritten over global assignments, together with the
/// collapse map from the original ontic states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalModel {
    model: OntologicalModel,
    collapse: BTreeMap<String, Assignment>,
}

impl CanonicalModel {
    /// The underlying model; its ontic state labels are serialized global
    /// assignments and its responses are delta products.
    pub fn model(&self) -> &OntologicalModel {
        &self.model
    }

    /// The collapse map `c` from original states to global assignments.
    pub fn collapse(&self) -> &BTreeMap<String, Assignment> {
        &self.collapse
    }

    /// The live global assignments, i.e. those with positive weight under
    /// some preparation, with their weights per preparation.
    pub fn live_weights(&self) -> BTreeMap<String, BTreeMap<Assignment, crate::numeric::Rational>> {
        let mut out = BTreeMap::new();
        for prep in self.model.preparations() {
            let dist = self.model.prep_dist(prep).expect("preparation exists");
            let mut weights = BTreeMap::new();
            for (label, w) in dist.iter() {
                if w.is_positive() {
                    let assignment: Assignment =
                        label.parse().expect("canonical states are serialized assignments");
                    weights.insert(assignment, w.clone());
                }
            }
            out.insert(prep.clone(), weights);
        }
        out
    }
}

/// Rewrites a local model into canonical form. Non-local models are
/// rejected with the locality failure witness.
pub fn canonicalize(model: &OntologicalModel) -> Result<CanonicalModel, NotLocalError> {
    let locality = model.locality();
    if !locality.holds() {
        return Err(NotLocalError(locality));
    }
    let properties = match model.observable_properties() {
        ObservableProperties::Defined(p) => p,
        ObservableProperties::IllDefined(_) => {
            unreachable!("local models are parameter-independent")
        }
    };
    let generators: BTreeMap<&String, BTreeMap<String, String>> = properties
        .iter()
        .map(|(m, f)| {
            let generator = match f.classify() {
                Classification::Ontic { generator } => generator,
                Classification::Epistemic { .. } => {
                    unreachable!("local models have ontic observable properties")
                }
            };
            (m, generator)
        })
        .collect();

    // c(s)(m) = generator of f_m at s
    let collapse: BTreeMap<String, Assignment> = model
        .states()
        .iter()
        .map(|state| {
            let global = Assignment::new(
                model
                    .scenario()
                    .measurements()
                    .iter()
                    .map(|m| (m.clone(), generators[m][state].clone())),
            );
            (state.clone(), global)
        })
        .collect();

    // pushforward along c merges states with equal generators and sums
    // their weights
    let mut live: Vec<String> = Vec::new();
    let mut prep_dists: BTreeMap<String, Distribution<String>> = BTreeMap::new();
    for prep in model.preparations() {
        let original = model.prep_dist(prep).expect("preparation exists");
        let pushed = original.map(|state| collapse[state].to_string());
        for label in pushed.support() {
            if !live.contains(label) {
                live.push(label.clone());
            }
        }
        prep_dists.insert(prep.clone(), pushed.without_zeros());
    }
    live.sort();

    let mut responses = BTreeMap::new();
    for label in &live {
        let omega: Assignment = label.parse().expect("live labels are serialized assignments");
        for context in model.scenario().contexts() {
            let restricted = omega.restrict(context).expect("contexts are subsets of X");
            responses.insert(
                (label.clone(), context.clone()),
                Distribution::delta(restricted),
            );
        }
    }

    let canonical = OntologicalModel::new(
        model.scenario().clone(),
        model.preparations().to_vec(),
        live,
        prep_dists,
        responses,
    )
    .expect("canonical model is well-formed by construction");

    // operational equivalence is part of the contract: every table must
    // survive the rewrite exactly
    for prep in model.preparations() {
        for context in model.scenario().contexts() {
            let original = model.operational(prep, context).expect("valid pair");
            let rewritten = canonical.operational(prep, context).expect("valid pair");
            assert!(
                original.same_measure(&rewritten),
                "canonicalization changed the operational table at ({prep}, {context})"
            );
        }
    }

    Ok(CanonicalModel { model: canonical, collapse })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::numeric::Rational;
    use crate::scenario::MeasurementScenario;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// Deterministic model answering a fixed global assignment per state.
    fn deterministic_model(
        globals: &[(&str, &str)], // (state, serialized global assignment)
        prep: Distribution<String>,
    ) -> OntologicalModel {
        let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
        let mut responses = BTreeMap::new();
        for (state, global) in globals {
            let omega: Assignment = global.parse().unwrap();
            for ctx in scenario.contexts() {
                responses.insert(
                    (state.to_string(), ctx.clone()),
                    Distribution::delta(omega.restrict(ctx).unwrap()),
                );
            }
        }
        let mut prep_dists = BTreeMap::new();
        prep_dists.insert("p".to_string(), prep);
        OntologicalModel::new(
            scenario,
            vec!["p".into()],
            globals.iter().map(|(s, _)| s.to_string()).collect(),
            prep_dists,
            responses,
        )
        .unwrap()
    }

    #[test]
    fn single_state_model_collapses_to_one_live_assignment() {
        let omega = "a0:0,a1:1,b0:0,b1:1";
        let model = deterministic_model(&[("l", omega)], Distribution::delta("l".to_string()));
        let canonical = canonicalize(&model).unwrap();
        assert_eq!(canonical.model().states(), &[omega.to_string()]);
        let weights = &canonical.live_weights()["p"];
        assert_eq!(weights.len(), 1);
        assert_eq!(weights[&omega.parse().unwrap()], Rational::one());
        assert_eq!(canonical.collapse()["l"].to_string(), omega);
    }

    #[test]
    fn states_with_equal_generators_merge() {
        let omega = "a0:1,a1:0,b0:1,b1:0";
        let prep = Distribution::new(vec![
            ("l0".to_string(), r(1, 3)),
            ("l1".to_string(), r(2, 3)),
        ])
        .unwrap();
        let model = deterministic_model(&[("l0", omega), ("l1", omega)], prep);
        let canonical = canonicalize(&model).unwrap();
        assert_eq!(canonical.model().states().len(), 1);
        let weights = &canonical.live_weights()["p"];
        assert_eq!(weights[&omega.parse().unwrap()], Rational::one());
    }

    #[test]
    fn canonical_model_is_local_factorisable_and_idempotent() {
        let prep = Distribution::new(vec![
            ("l0".to_string(), r(1, 2)),
            ("l1".to_string(), r(1, 4)),
            ("l2".to_string(), r(1, 4)),
        ])
        .unwrap();
        let model = deterministic_model(
            &[
                ("l0", "a0:0,a1:0,b0:0,b1:0"),
                ("l1", "a0:1,a1:0,b0:1,b1:0"),
                ("l2", "a0:0,a1:1,b0:0,b1:1"),
            ],
            prep,
        );
        let canonical = canonicalize(&model).unwrap();
        assert!(canonical.model().locality().holds());
        assert!(canonical.model().factorisability().unwrap().holds());

        let again = canonicalize(canonical.model()).unwrap();
        assert_eq!(again.live_weights(), canonical.live_weights());
        assert_eq!(again.model().states(), canonical.model().states());
    }

    #[test]
    fn explicit_mixture_of_all_global_assignments_round_trips() {
        // states are the 16 global assignments themselves; canonicalization
        // must recover exactly the mixture weights
        let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
        let globals: Vec<Assignment> =
            scenario.event_sheaf(&scenario.global_context()).unwrap();
        let mut responses = BTreeMap::new();
        for omega in &globals {
            for ctx in scenario.contexts() {
                responses.insert(
                    (omega.to_string(), ctx.clone()),
                    Distribution::delta(omega.restrict(ctx).unwrap()),
                );
            }
        }
        // a skewed mixture: weight (k+1)/136 on the k-th assignment
        let total: i64 = (1..=16).sum();
        let mixture = Distribution::new(
            globals
                .iter()
                .enumerate()
                .map(|(k, omega)| (omega.to_string(), Rational::new(k as i64 + 1, total))),
        )
        .unwrap();
        let mut prep_dists = BTreeMap::new();
        prep_dists.insert("p".to_string(), mixture.clone());
        let model = OntologicalModel::new(
            scenario,
            vec!["p".into()],
            globals.iter().map(|g| g.to_string()).collect(),
            prep_dists,
            responses,
        )
        .unwrap();

        let canonical = canonicalize(&model).unwrap();
        let weights = &canonical.live_weights()["p"];
        assert_eq!(weights.len(), 16);
        for (omega, weight) in weights {
            assert_eq!(*weight, mixture.weight(&omega.to_string()));
        }
        // every state collapses to itself
        for (state, omega) in canonical.collapse() {
            assert_eq!(state, &omega.to_string());
        }
    }

    #[test]
    fn non_local_models_are_rejected_with_witness() {
        let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
        let mut responses = BTreeMap::new();
        for ctx in scenario.contexts() {
            let ms: Vec<&String> = ctx.iter().collect();
            let zeros = Assignment::new(ms.iter().map(|m| ((*m).clone(), "0".to_string())));
            let ones = Assignment::new(ms.iter().map(|m| ((*m).clone(), "1".to_string())));
            responses.insert(
                ("l".to_string(), ctx.clone()),
                Distribution::new(vec![(zeros, r(1, 2)), (ones, r(1, 2))]).unwrap(),
            );
        }
        let mut prep_dists = BTreeMap::new();
        prep_dists.insert("p".to_string(), Distribution::delta("l".to_string()));
        let model = OntologicalModel::new(
            scenario,
            vec!["p".into()],
            vec!["l".into()],
            prep_dists,
            responses,
        )
        .unwrap();
        let err = canonicalize(&model).unwrap_err();
        assert!(matches!(err.0, Locality::NotDeterministic { .. }));
    }
}
