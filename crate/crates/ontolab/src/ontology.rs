//! Ontological models and the ontic/epistemic classification.
//!
//! A property assigns to every ontic state a distribution over values; it is
//! ontic when every such distribution is a delta, epistemic otherwise.
//! Bayesian inversion turns a property into per-value posteriors over the
//! state space, and the support-overlap criterion decides onticity from
//! those posteriors alone. Ontological models add preparation distributions
//! and per-state response distributions, with determinism, parameter
//! independence, locality and factorisability as exact checks, each carrying
//! a witness on failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use thiserror::Error;

use crate::numeric::{Distribution, DistributionError, MixtureError, Rational};
use crate::scenario::{Assignment, Context, MeasurementScenario, ScenarioError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OntologyError {
    #[error("property is not total: no distribution for state {0:?}")]
    NotTotal(String),
    #[error("property maps unknown state {0:?}")]
    UnknownState(String),
    #[error("distribution for state {state:?} puts weight on a value outside the declared value set: {value:?}")]
    ValueOutsideRange { state: String, value: String },
    #[error("property has no states")]
    NoStates,
    #[error("property has no values")]
    NoValues,
    #[error("prior puts weight on unknown state {0:?}")]
    PriorOutsideLambda(String),
    #[error("prior lacks full support: state {0:?} has zero weight")]
    PriorNotFullSupport(String),
}

/// A `V`-valued property over a finite state space: a total map from states
/// to distributions over values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property<L: Ord, V: Ord> {
    states: Vec<L>,
    values: Vec<V>,
    map: BTreeMap<L, Distribution<V>>,
}

/// Verdict of the ontic/epistemic classification. Ontic properties carry
/// their generating function; epistemic ones carry a state compatible with
/// two distinct values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification<L: Ord, V: Ord> {
    Ontic { generator: BTreeMap<L, V> },
    Epistemic { state: L, value_a: V, value_b: V },
}

impl<L: Ord, V: Ord> Classification<L, V> {
    pub fn is_ontic(&self) -> bool {
        matches!(self, Classification::Ontic { .. })
    }
}

/// The posteriors over states obtained by Bayesian inversion, one per value
/// with positive total weight. Values whose total weight under the prior is
/// zero are reported as undefined rather than silently dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inversion<L: Ord, V: Ord> {
    pub posteriors: BTreeMap<V, Distribution<L>>,
    pub undefined: BTreeSet<V>,
    /// Total weight of each value under the prior (the normalizer of its
    /// posterior); zero exactly for the undefined values.
    pub normalizers: BTreeMap<V, Rational>,
}

/// Result of the support-overlap criterion for onticity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupportVerdict<L: Ord, V: Ord> {
    Disjoint,
    Overlap { state: L, value_a: V, value_b: V },
}

impl<L: Ord, V: Ord> SupportVerdict<L, V> {
    pub fn is_disjoint(&self) -> bool {
        matches!(self, SupportVerdict::Disjoint)
    }
}

impl<L, V> Property<L, V>
where
    L: Ord + Clone + Debug,
    V: Ord + Clone + Debug,
{
    pub fn new(
        states: Vec<L>,
        values: Vec<V>,
        map: BTreeMap<L, Distribution<V>>,
    ) -> Result<Self, OntologyError> {
        let mut states = states;
        states.sort();
        states.dedup();
        let mut values = values;
        values.sort();
        values.dedup();
        if states.is_empty() {
            return Err(OntologyError::NoStates);
        }
        if values.is_empty() {
            return Err(OntologyError::NoValues);
        }
        let value_set: BTreeSet<&V> = values.iter().collect();
        for state in map.keys() {
            if states.binary_search(state).is_err() {
                return Err(OntologyError::UnknownState(format!("{state:?}")));
            }
        }
        for state in &states {
            let dist = map
                .get(state)
                .ok_or_else(|| OntologyError::NotTotal(format!("{state:?}")))?;
            for (v, _) in dist.iter() {
                if !value_set.contains(v) {
                    return Err(OntologyError::ValueOutsideRange {
                        state: format!("{state:?}"),
                        value: format!("{v:?}"),
                    });
                }
            }
        }
        Ok(Property { states, values, map })
    }

    pub fn states(&self) -> &[L] {
        &self.states
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn distribution(&self, state: &L) -> &Distribution<V> {
        &self.map[state]
    }

    /// Ontic iff every per-state distribution is a delta.
    pub fn classify(&self) -> Classification<L, V> {
        let mut generator = BTreeMap::new();
        for state in &self.states {
            let dist = &self.map[state];
            match dist.as_delta() {
                Some(v) => {
                    generator.insert(state.clone(), v.clone());
                }
                None => {
                    let mut positives = dist.support();
                    let value_a = positives.next().expect("support is non-empty").clone();
                    let value_b = positives
                        .next()
                        .expect("non-delta distribution has a second supported value")
                        .clone();
                    return Classification::Epistemic {
                        state: state.clone(),
                        value_a,
                        value_b,
                    };
                }
            }
        }
        Classification::Ontic { generator }
    }

    /// Posterior distributions over states, one per value:
    /// `post_v(s) = f(s)(v) * prior(s) / sum_t f(t)(v) * prior(t)`.
    pub fn bayesian_inversion(
        &self,
        prior: &Distribution<L>,
    ) -> Result<Inversion<L, V>, OntologyError> {
        for (state, _) in prior.iter() {
            if self.states.binary_search(state).is_err() {
                return Err(OntologyError::PriorOutsideLambda(format!("{state:?}")));
            }
        }
        let mut posteriors = BTreeMap::new();
        let mut undefined = BTreeSet::new();
        let mut normalizers = BTreeMap::new();
        for v in &self.values {
            let joint: Vec<(L, Rational)> = self
                .states
                .iter()
                .map(|s| (s.clone(), self.map[s].weight(v) * prior.weight(s)))
                .collect();
            let normalizer: Rational = joint.iter().map(|(_, w)| w).sum();
            if normalizer.is_zero() {
                undefined.insert(v.clone());
            } else {
                let posterior = Distribution::new(
                    joint
                        .into_iter()
                        .map(|(s, w)| (s, w / &normalizer)),
                )
                .expect("posterior is normalized by construction");
                posteriors.insert(v.clone(), posterior);
            }
            normalizers.insert(v.clone(), normalizer);
        }
        Ok(Inversion {
            posteriors,
            undefined,
            normalizers,
        })
    }

    /// The support-overlap criterion: the property is ontic iff the defined
    /// posteriors have pairwise disjoint supports. Requires a full-support
    /// prior; the equivalence can fail on states the prior ignores.
    pub fn ontic_by_supports(
        &self,
        prior: &Distribution<L>,
    ) -> Result<SupportVerdict<L, V>, OntologyError> {
        for state in &self.states {
            if !prior.weight(state).is_positive() {
                return Err(OntologyError::PriorNotFullSupport(format!("{state:?}")));
            }
        }
        let inversion = self.bayesian_inversion(prior)?;
        let defined: Vec<(&V, &Distribution<L>)> = inversion.posteriors.iter().collect();
        for (i, (v, post_v)) in defined.iter().enumerate() {
            for (w, post_w) in defined.iter().skip(i + 1) {
                if let Some(state) = post_v.support_overlap(post_w) {
                    return Ok(SupportVerdict::Overlap {
                        state: state.clone(),
                        value_a: (*v).clone(),
                        value_b: (*w).clone(),
                    });
                }
            }
        }
        Ok(SupportVerdict::Disjoint)
    }

    /// The uniform prior over this property's state space.
    pub fn uniform_prior(&self) -> Distribution<L> {
        Distribution::uniform(self.states.iter().cloned()).expect("state space is non-empty")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Mixture(#[from] MixtureError),
    #[error("model has no preparations")]
    NoPreparations,
    #[error("model has no ontic states")]
    NoStates,
    #[error("no preparation distribution for {0:?}")]
    MissingPrepDist(String),
    #[error("preparation distribution for {prep:?} puts weight on unknown state {state:?}")]
    PrepDistOutsideLambda { prep: String, state: String },
    #[error("no response distribution for state {state:?} in context {context}")]
    MissingResponse { state: String, context: Context },
    #[error("response for state {state:?} in context {context} assigns weight to {assignment} whose domain is not the context")]
    ResponseDomainMismatch {
        state: String,
        context: Context,
        assignment: Assignment,
    },
    #[error("response for state {state:?} in context {context} uses unknown outcome in {assignment}")]
    UnknownOutcome {
        state: String,
        context: Context,
        assignment: Assignment,
    },
    #[error("unknown preparation {0:?}")]
    UnknownPreparation(String),
    #[error("context {0} is not part of the scenario's cover")]
    UnknownContext(Context),
    #[error("stray entry {0:?} outside the declared preparations or states")]
    StrayEntry(String),
}

/// A finite ontological (hidden variable) model: a distribution over ontic
/// states per preparation, and a response distribution over joint outcomes
/// per ontic state and context. Preparation distributions are keyed by the
/// preparation alone, so measurement-dependence of the ontic state (a
/// "lambda-dependent" model) is unrepresentable by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologicalModel {
    scenario: MeasurementScenario,
    preparations: Vec<String>,
    states: Vec<String>,
    prep_dists: BTreeMap<String, Distribution<String>>,
    responses: BTreeMap<(String, Context), Distribution<Assignment>>,
}

/// Determinism verdict: every response distribution is a delta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Determinism {
    Deterministic,
    Stochastic { state: String, context: Context },
}

impl Determinism {
    pub fn holds(&self) -> bool {
        matches!(self, Determinism::Deterministic)
    }
}

/// Witness of a context-dependent marginal: the marginal of `measurement`
/// at `state` differs between the two contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalDisagreement {
    pub measurement: String,
    pub state: String,
    pub context_a: Context,
    pub context_b: Context,
}

/// Result of extracting the observable properties `f_m`: defined iff the
/// per-measurement marginals agree across every context containing the
/// measurement, for every state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservableProperties {
    Defined(BTreeMap<String, Property<String, String>>),
    IllDefined(MarginalDisagreement),
}

impl ObservableProperties {
    pub fn is_defined(&self) -> bool {
        matches!(self, ObservableProperties::Defined(_))
    }
}

/// Locality/non-contextuality verdict with the failing conjunct on refusal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Locality {
    Local,
    NotDeterministic { state: String, context: Context },
    NotParameterIndependent(MarginalDisagreement),
}

impl Locality {
    pub fn holds(&self) -> bool {
        matches!(self, Locality::Local)
    }
}

/// Factorisability verdict: responses equal the product of their
/// single-measurement marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factorisability {
    Factorisable,
    NotFactorisable {
        state: String,
        context: Context,
        assignment: Assignment,
    },
}

impl Factorisability {
    pub fn holds(&self) -> bool {
        matches!(self, Factorisability::Factorisable)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("factorisability requires parameter independence; marginal for {measurement:?} at state {state:?} differs between {context_a} and {context_b}",
    measurement = .0.measurement, state = .0.state, context_a = .0.context_a, context_b = .0.context_b)]
pub struct NotParameterIndependentError(pub MarginalDisagreement);

impl OntologicalModel {
    pub fn new(
        scenario: MeasurementScenario,
        preparations: Vec<String>,
        states: Vec<String>,
        prep_dists: BTreeMap<String, Distribution<String>>,
        responses: BTreeMap<(String, Context), Distribution<Assignment>>,
    ) -> Result<Self, ModelError> {
        let mut preparations = preparations;
        preparations.sort();
        preparations.dedup();
        let mut states = states;
        states.sort();
        states.dedup();
        if preparations.is_empty() {
            return Err(ModelError::NoPreparations);
        }
        if states.is_empty() {
            return Err(ModelError::NoStates);
        }
        for prep in &preparations {
            let dist = prep_dists
                .get(prep)
                .ok_or_else(|| ModelError::MissingPrepDist(prep.clone()))?;
            for (state, _) in dist.iter() {
                if states.binary_search(state).is_err() {
                    return Err(ModelError::PrepDistOutsideLambda {
                        prep: prep.clone(),
                        state: state.clone(),
                    });
                }
            }
        }
        let outcome_set: BTreeSet<&String> = scenario.outcomes().iter().collect();
        for state in &states {
            for context in scenario.contexts() {
                let key = (state.clone(), context.clone());
                let dist = responses.get(&key).ok_or_else(|| ModelError::MissingResponse {
                    state: state.clone(),
                    context: context.clone(),
                })?;
                for (assignment, _) in dist.iter() {
                    if &assignment.domain() != context {
                        return Err(ModelError::ResponseDomainMismatch {
                            state: state.clone(),
                            context: context.clone(),
                            assignment: assignment.clone(),
                        });
                    }
                    if assignment.iter().any(|(_, o)| !outcome_set.contains(o)) {
                        return Err(ModelError::UnknownOutcome {
                            state: state.clone(),
                            context: context.clone(),
                            assignment: assignment.clone(),
                        });
                    }
                }
            }
        }
        // stray entries would silently disappear on re-serialization
        if prep_dists.len() != preparations.len() {
            let stray = prep_dists
                .keys()
                .find(|p| preparations.binary_search(p).is_err())
                .expect("length mismatch implies a stray key");
            return Err(ModelError::StrayEntry(stray.clone()));
        }
        if responses.len() != states.len() * scenario.contexts().len() {
            let stray = responses
                .keys()
                .find(|(s, c)| {
                    states.binary_search(s).is_err() || !scenario.contexts().contains(c)
                })
                .expect("length mismatch implies a stray key");
            return Err(ModelError::StrayEntry(format!("{}|{}", stray.0, stray.1)));
        }
        Ok(OntologicalModel {
            scenario,
            preparations,
            states,
            prep_dists,
            responses,
        })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn preparations(&self) -> &[String] {
        &self.preparations
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn prep_dist(&self, prep: &str) -> Result<&Distribution<String>, ModelError> {
        self.prep_dists
            .get(prep)
            .ok_or_else(|| ModelError::UnknownPreparation(prep.to_string()))
    }

    pub fn response(&self, state: &str, context: &Context) -> Result<&Distribution<Assignment>, ModelError> {
        self.responses
            .get(&(state.to_string(), context.clone()))
            .ok_or_else(|| ModelError::UnknownContext(context.clone()))
    }

    /// The operational table `h(o|m,p) = sum_s h(o|m,s) h(s|p)`, exactly.
    pub fn operational(
        &self,
        prep: &str,
        context: &Context,
    ) -> Result<Distribution<Assignment>, ModelError> {
        let prep_dist = self.prep_dist(prep)?;
        if !self.scenario.contexts().contains(context) {
            return Err(ModelError::UnknownContext(context.clone()));
        }
        let components: Vec<(Rational, Distribution<Assignment>)> = self
            .states
            .iter()
            .map(|state| {
                let response = self.responses[&(state.clone(), context.clone())].clone();
                (prep_dist.weight(state), response)
            })
            .collect();
        Ok(Distribution::mixture(&components)?)
    }

    /// Marginal of the response at `(state, context)` onto a sub-context.
    pub fn marginal_response(
        &self,
        state: &str,
        context: &Context,
        onto: &Context,
    ) -> Result<Distribution<Assignment>, ModelError> {
        if !onto.is_subset(context) {
            return Err(ModelError::UnknownContext(onto.clone()));
        }
        let response = self.response(state, context)?;
        Ok(response.map(|a| a.restrict(onto).expect("onto is a subset of the domain")))
    }

    /// Every response distribution is a delta.
    pub fn determinism(&self) -> Determinism {
        for state in &self.states {
            for context in self.scenario.contexts() {
                let response = &self.responses[&(state.clone(), context.clone())];
                if response.as_delta().is_none() {
                    return Determinism::Stochastic {
                        state: state.clone(),
                        context: context.clone(),
                    };
                }
            }
        }
        Determinism::Deterministic
    }

    /// Extracts the observable property `f_m(s)(o) = h(o|m,s)` of a single
    /// measurement, or the marginal-disagreement witness when the marginal
    /// is context-dependent.
    pub fn observable_property(
        &self,
        m: &str,
    ) -> Result<Result<Property<String, String>, MarginalDisagreement>, ModelError> {
        if !self.scenario.has_measurement(m) {
            return Err(ModelError::Scenario(ScenarioError::UnknownMeasurement(
                m.to_string(),
            )));
        }
        let single = Context::singleton(m);
        let contexts: Vec<&Context> = self.scenario.contexts_containing(m).collect();
        let mut map = BTreeMap::new();
        for state in &self.states {
            let first = self
                .marginal_response(state, contexts[0], &single)
                .expect("cover context contains m");
            for other in &contexts[1..] {
                let marginal = self
                    .marginal_response(state, other, &single)
                    .expect("cover context contains m");
                if !first.same_measure(&marginal) {
                    return Ok(Err(MarginalDisagreement {
                        measurement: m.to_string(),
                        state: state.clone(),
                        context_a: contexts[0].clone(),
                        context_b: (*other).clone(),
                    }));
                }
            }
            let outcome_dist = first.map(|a| {
                a.value(m).expect("marginal assignments are defined on m").to_string()
            });
            map.insert(state.clone(), outcome_dist);
        }
        let property = Property::new(
            self.states.clone(),
            self.scenario.outcomes().to_vec(),
            map,
        )
        .expect("marginals form a total property over the model's states");
        Ok(Ok(property))
    }

    /// Extracts the observable properties `f_m(s)(o) = h(o|m,s)` for every
    /// measurement whose marginal is context-independent; returns the first
    /// disagreement witness otherwise.
    pub fn observable_properties(&self) -> ObservableProperties {
        let mut properties = BTreeMap::new();
        for m in self.scenario.measurements() {
            match self.observable_property(m).expect("m is a scenario measurement") {
                Ok(property) => {
                    properties.insert(m.clone(), property);
                }
                Err(disagreement) => return ObservableProperties::IllDefined(disagreement),
            }
        }
        ObservableProperties::Defined(properties)
    }

    /// Parameter independence: all per-measurement marginals well-defined.
    pub fn parameter_independence(&self) -> ObservableProperties {
        self.observable_properties()
    }

    /// Locality/non-contextuality: deterministic and parameter-independent.
    ///
    /// Cross-checked against the equivalent formulation "all observable
    /// properties are defined and classify as ontic"; the two routes are
    /// computed independently and any disagreement panics.
    pub fn locality(&self) -> Locality {
        let determinism = self.determinism();
        let extraction = self.observable_properties();

        let direct = match (&determinism, &extraction) {
            (Determinism::Deterministic, ObservableProperties::Defined(_)) => Locality::Local,
            (Determinism::Stochastic { state, context }, _) => Locality::NotDeterministic {
                state: state.clone(),
                context: context.clone(),
            },
            (_, ObservableProperties::IllDefined(disagreement)) => {
                Locality::NotParameterIndependent(disagreement.clone())
            }
        };

        let via_properties = match &extraction {
            ObservableProperties::Defined(properties) => {
                properties.values().all(|f| f.classify().is_ontic())
            }
            ObservableProperties::IllDefined { .. } => false,
        };
        assert_eq!(
            direct.holds(),
            via_properties,
            "locality disagreement: deterministic+parameter-independent = {}, \
             all-observables-ontic = {}",
            direct.holds(),
            via_properties
        );
        direct
    }

    /// Factorisability: `h(o|m,s)` equals the product of its
    /// single-measurement marginals for every state, context and joint
    /// outcome. Requires parameter independence so the factors exist.
    pub fn factorisability(&self) -> Result<Factorisability, NotParameterIndependentError> {
        let properties = match self.observable_properties() {
            ObservableProperties::Defined(p) => p,
            ObservableProperties::IllDefined(disagreement) => {
                return Err(NotParameterIndependentError(disagreement))
            }
        };
        for state in &self.states {
            for context in self.scenario.contexts() {
                let response = &self.responses[&(state.clone(), context.clone())];
                for assignment in self
                    .scenario
                    .assignments(context)
                    .expect("cover contexts are subsets of the measurements")
                {
                    let mut product = Rational::one();
                    for (m, o) in assignment.iter() {
                        product *= properties[m].distribution(state).weight(o);
                    }
                    if response.weight(&assignment) != product {
                        return Ok(Factorisability::NotFactorisable {
                            state: state.clone(),
                            context: context.clone(),
                            assignment,
                        });
                    }
                }
            }
        }
        Ok(Factorisability::Factorisable)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn half_half(a: &str, b: &str) -> Distribution<String> {
        Distribution::new(vec![(a.to_string(), r(1, 2)), (b.to_string(), r(1, 2))]).unwrap()
    }

    /// The two-coin bag: states GG,GW,WG,WW; drawing one coin measures an
    /// epistemic colour property.
    fn fuzzy_coin_property() -> Property<String, String> {
        let mut map = BTreeMap::new();
        map.insert("GG".to_string(), Distribution::delta("G".to_string()));
        map.insert("GW".to_string(), half_half("G", "W"));
        map.insert("WG".to_string(), half_half("G", "W"));
        map.insert("WW".to_string(), Distribution::delta("W".to_string()));
        Property::new(
            vec!["GG".into(), "GW".into(), "WG".into(), "WW".into()],
            vec!["G".into(), "W".into()],
            map,
        )
        .unwrap()
    }

    #[test]
    fn fuzzy_coin_is_epistemic_with_witness() {
        let verdict = fuzzy_coin_property().classify();
        assert_eq!(
            verdict,
            Classification::Epistemic {
                state: "GW".into(),
                value_a: "G".into(),
                value_b: "W".into(),
            }
        );
    }

    #[test]
    fn function_induced_properties_are_ontic() {
        // a classical observable: parity of a three-point phase space
        let mut map = BTreeMap::new();
        map.insert("x0".to_string(), Distribution::delta("even".to_string()));
        map.insert("x1".to_string(), Distribution::delta("odd".to_string()));
        map.insert("x2".to_string(), Distribution::delta("even".to_string()));
        let f = Property::new(
            vec!["x0".into(), "x1".into(), "x2".into()],
            vec!["even".into(), "odd".into()],
            map,
        )
        .unwrap();
        match f.classify() {
            Classification::Ontic { generator } => {
                assert_eq!(generator[&"x0".to_string()], "even");
                assert_eq!(generator[&"x1".to_string()], "odd");
            }
            other => panic!("expected ontic, got {other:?}"),
        }
    }

    #[test]
    fn single_state_delta_is_ontic() {
        let mut map = BTreeMap::new();
        map.insert("l".to_string(), Distribution::delta("v".to_string()));
        let f = Property::new(vec!["l".into()], vec!["v".into()], map).unwrap();
        assert!(f.classify().is_ontic());
    }

    #[test]
    fn fuzzy_coin_inversion_matches_hand_evaluation() {
        // f(GG)(G)=1, f(GW)(G)=f(WG)(G)=1/2, f(WW)(G)=0 under the uniform
        // prior gives post_G = {GG:1/2, GW:1/4, WG:1/4, WW:0}.
        let f = fuzzy_coin_property();
        let inversion = f.bayesian_inversion(&f.uniform_prior()).unwrap();
        let post_g = &inversion.posteriors[&"G".to_string()];
        assert_eq!(post_g.weight(&"GG".to_string()), r(1, 2));
        assert_eq!(post_g.weight(&"GW".to_string()), r(1, 4));
        assert_eq!(post_g.weight(&"WG".to_string()), r(1, 4));
        assert_eq!(post_g.weight(&"WW".to_string()), r(0, 1));
        assert!(inversion.undefined.is_empty());
        assert_eq!(inversion.normalizers[&"G".to_string()], r(1, 2));
    }

    #[test]
    fn injective_generator_inverts_to_deltas() {
        let mut map = BTreeMap::new();
        map.insert("l0".to_string(), Distribution::delta("a".to_string()));
        map.insert("l1".to_string(), Distribution::delta("b".to_string()));
        let f = Property::new(
            vec!["l0".into(), "l1".into()],
            vec!["a".into(), "b".into()],
            map,
        )
        .unwrap();
        let inversion = f.bayesian_inversion(&f.uniform_prior()).unwrap();
        assert_eq!(
            inversion.posteriors[&"a".to_string()].as_delta(),
            Some(&"l0".to_string())
        );
        assert_eq!(
            inversion.posteriors[&"b".to_string()].as_delta(),
            Some(&"l1".to_string())
        );
    }

    #[test]
    fn zero_weight_value_is_reported_undefined() {
        let mut map = BTreeMap::new();
        map.insert("l0".to_string(), Distribution::delta("a".to_string()));
        map.insert("l1".to_string(), Distribution::delta("a".to_string()));
        let f = Property::new(
            vec!["l0".into(), "l1".into()],
            vec!["a".into(), "b".into()],
            map,
        )
        .unwrap();
        let inversion = f.bayesian_inversion(&f.uniform_prior()).unwrap();
        assert!(inversion.undefined.contains("b"));
        assert_eq!(inversion.normalizers[&"b".to_string()], Rational::zero());
        let post_a = &inversion.posteriors[&"a".to_string()];
        assert_eq!(post_a.weight(&"l0".to_string()), r(1, 2));
        assert_eq!(post_a.weight(&"l1".to_string()), r(1, 2));
    }

    #[test]
    fn support_criterion_finds_fuzzy_coin_overlap() {
        let f = fuzzy_coin_property();
        let verdict = f.ontic_by_supports(&f.uniform_prior()).unwrap();
        match verdict {
            SupportVerdict::Overlap { state, value_a, value_b } => {
                // GW (or WG) supports both colours
                assert!(state == "GW" || state == "WG");
                assert_eq!((value_a.as_str(), value_b.as_str()), ("G", "W"));
            }
            SupportVerdict::Disjoint => panic!("expected overlap"),
        }
    }

    #[test]
    fn support_criterion_accepts_ontic_property() {
        let mut map = BTreeMap::new();
        map.insert("l0".to_string(), Distribution::delta("a".to_string()));
        map.insert("l1".to_string(), Distribution::delta("a".to_string()));
        map.insert("l2".to_string(), Distribution::delta("b".to_string()));
        let f = Property::new(
            vec!["l0".into(), "l1".into(), "l2".into()],
            vec!["a".into(), "b".into()],
            map,
        )
        .unwrap();
        assert!(f.ontic_by_supports(&f.uniform_prior()).unwrap().is_disjoint());
    }

    #[test]
    fn support_criterion_witnesses_mixed_state() {
        let mut map = BTreeMap::new();
        map.insert("l0".to_string(), Distribution::delta("a".to_string()));
        map.insert("l1".to_string(), half_half("a", "b"));
        let f = Property::new(
            vec!["l0".into(), "l1".into()],
            vec!["a".into(), "b".into()],
            map,
        )
        .unwrap();
        assert_eq!(
            f.ontic_by_supports(&f.uniform_prior()).unwrap(),
            SupportVerdict::Overlap {
                state: "l1".into(),
                value_a: "a".into(),
                value_b: "b".into(),
            }
        );
    }

    #[test]
    fn support_criterion_rejects_partial_priors() {
        let f = fuzzy_coin_property();
        let partial = Distribution::new(vec![
            ("GG".to_string(), r(1, 2)),
            ("GW".to_string(), r(1, 2)),
        ])
        .unwrap();
        assert!(matches!(
            f.ontic_by_supports(&partial),
            Err(OntologyError::PriorNotFullSupport(_))
        ));
    }

    #[test]
    fn bayes_consistency() {
        // law of total probability: sum_v normalizer_v * post_v(s) = prior(s)
        let f = fuzzy_coin_property();
        let prior = Distribution::new(vec![
            ("GG".to_string(), r(1, 3)),
            ("GW".to_string(), r(1, 6)),
            ("WG".to_string(), r(1, 4)),
            ("WW".to_string(), r(1, 4)),
        ])
        .unwrap();
        let inversion = f.bayesian_inversion(&prior).unwrap();
        for state in f.states() {
            let total: Rational = f
                .values()
                .iter()
                .map(|v| {
                    let post = inversion
                        .posteriors
                        .get(v)
                        .map(|d| d.weight(state))
                        .unwrap_or_else(Rational::zero);
                    &inversion.normalizers[v] * &post
                })
                .sum();
            assert_eq!(total, prior.weight(state));
        }
    }

    // ---- ontological model checks -------------------------------------

    /// A one-preparation model on the (2,2,2) scenario built from explicit
    /// response distributions.
    fn model_with_responses(
        states: Vec<&str>,
        prep: Distribution<String>,
        response: impl Fn(&str, &Context) -> Distribution<Assignment>,
    ) -> OntologicalModel {
        let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
        let mut responses = BTreeMap::new();
        for s in &states {
            for ctx in scenario.contexts() {
                responses.insert((s.to_string(), ctx.clone()), response(s, ctx));
            }
        }
        let mut prep_dists = BTreeMap::new();
        prep_dists.insert("p".to_string(), prep);
        OntologicalModel::new(
            scenario,
            vec!["p".into()],
            states.into_iter().map(String::from).collect(),
            prep_dists,
            responses,
        )
        .unwrap()
    }

    /// Deterministic responses that answer 0 to every measurement.
    fn all_zero_response(_: &str, ctx: &Context) -> Distribution<Assignment> {
        Distribution::delta(Assignment::new(ctx.iter().map(|m| (m.clone(), "0".to_string()))))
    }

    #[test]
    fn deterministic_product_model_is_local_and_factorisable() {
        let model = model_with_responses(
            vec!["l"],
            Distribution::delta("l".to_string()),
            all_zero_response,
        );
        assert!(model.determinism().holds());
        assert!(model.observable_properties().is_defined());
        assert_eq!(model.locality(), Locality::Local);
        assert_eq!(
            model.factorisability().unwrap(),
            Factorisability::Factorisable
        );
    }

    #[test]
    fn correlated_response_is_not_factorisable() {
        // {00:1/2, 11:1/2} per context: uniform marginals, correlated joint
        let model = model_with_responses(
            vec!["l"],
            Distribution::delta("l".to_string()),
            |_, ctx| {
                let ms: Vec<&String> = ctx.iter().collect();
                let zeros = Assignment::new(ms.iter().map(|m| ((*m).clone(), "0".to_string())));
                let ones = Assignment::new(ms.iter().map(|m| ((*m).clone(), "1".to_string())));
                Distribution::new(vec![(zeros, r(1, 2)), (ones, r(1, 2))]).unwrap()
            },
        );
        assert!(model.observable_properties().is_defined());
        match model.factorisability().unwrap() {
            Factorisability::NotFactorisable { .. } => {}
            other => panic!("expected non-factorisable, got {other:?}"),
        }
        // stochastic responses also break locality
        assert!(matches!(model.locality(), Locality::NotDeterministic { .. }));
    }

    #[test]
    fn parameter_dependent_deterministic_model_detected() {
        // answer to a0 depends on whether b0 or b1 accompanies it
        let model = model_with_responses(
            vec!["l"],
            Distribution::delta("l".to_string()),
            |_, ctx| {
                let flip = ctx.contains("b1");
                Distribution::delta(Assignment::new(ctx.iter().map(|m| {
                    let o = if m.starts_with('a') && flip { "1" } else { "0" };
                    (m.clone(), o.to_string())
                })))
            },
        );
        assert!(model.determinism().holds());
        match model.locality() {
            Locality::NotParameterIndependent(d) => {
                assert!(d.measurement.starts_with('a'));
            }
            other => panic!("expected parameter dependence, got {other:?}"),
        }
        assert!(model.factorisability().is_err());
    }

    #[test]
    fn operational_probabilities_mix_over_states() {
        // uniform mixture of "all zeros" and "all ones" deterministic states
        let model = model_with_responses(
            vec!["z", "o"],
            half_half("z", "o"),
            |s, ctx| {
                let outcome = if s == "z" { "0" } else { "1" };
                Distribution::delta(Assignment::new(
                    ctx.iter().map(|m| (m.clone(), outcome.to_string())),
                ))
            },
        );
        let ctx = Context::new(["a0", "b0"]);
        let table = model.operational("p", &ctx).unwrap();
        let zeros: Assignment = "a0:0,b0:0".parse().unwrap();
        let ones: Assignment = "a0:1,b0:1".parse().unwrap();
        assert_eq!(table.weight(&zeros), r(1, 2));
        assert_eq!(table.weight(&ones), r(1, 2));
        assert_eq!(table.support_size(), 2);
    }

    #[test]
    fn operational_is_affine_in_preparations() {
        let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
        let mut responses = BTreeMap::new();
        for s in ["z", "o"] {
            for ctx in scenario.contexts() {
                let outcome = if s == "z" { "0" } else { "1" };
                responses.insert(
                    (s.to_string(), ctx.clone()),
                    Distribution::delta(Assignment::new(
                        ctx.iter().map(|m| (m.clone(), outcome.to_string())),
                    )),
                );
            }
        }
        let mut prep_dists = BTreeMap::new();
        prep_dists.insert("p0".to_string(), Distribution::delta("z".to_string()));
        prep_dists.insert("p1".to_string(), Distribution::delta("o".to_string()));
        prep_dists.insert("mix".to_string(), half_half("z", "o"));
        let model = OntologicalModel::new(
            scenario.clone(),
            vec!["p0".into(), "p1".into(), "mix".into()],
            vec!["z".into(), "o".into()],
            prep_dists,
            responses,
        )
        .unwrap();

        for ctx in scenario.contexts() {
            let t0 = model.operational("p0", ctx).unwrap();
            let t1 = model.operational("p1", ctx).unwrap();
            let tm = model.operational("mix", ctx).unwrap();
            let mixed = Distribution::mixture(&[(r(1, 2), t0), (r(1, 2), t1)]).unwrap();
            assert!(mixed.same_measure(&tm));
        }
    }

    #[test]
    fn delta_prep_gives_the_state_response() {
        let model = model_with_responses(
            vec!["l"],
            Distribution::delta("l".to_string()),
            all_zero_response,
        );
        let ctx = Context::new(["a1", "b1"]);
        let table = model.operational("p", &ctx).unwrap();
        assert_eq!(table, *model.response("l", &ctx).unwrap());
    }

    #[test]
    fn model_construction_rejects_stray_entries() {
        let model = model_with_responses(
            vec!["l"],
            Distribution::delta("l".to_string()),
            all_zero_response,
        );
        let scenario = model.scenario().clone();
        let mut responses: BTreeMap<(String, Context), Distribution<Assignment>> = scenario
            .contexts()
            .iter()
            .map(|ctx| (("l".to_string(), ctx.clone()), all_zero_response("l", ctx)))
            .collect();
        // an entry for a state that is not declared
        responses.insert(
            ("ghost".to_string(), scenario.contexts()[0].clone()),
            all_zero_response("ghost", &scenario.contexts()[0]),
        );
        let mut prep_dists = BTreeMap::new();
        prep_dists.insert("p".to_string(), Distribution::delta("l".to_string()));
        let err = OntologicalModel::new(
            scenario,
            vec!["p".into()],
            vec!["l".into()],
            prep_dists,
            responses,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::StrayEntry(_)));
    }

    #[test]
    fn model_construction_rejects_missing_pieces() {
        let scenario = MeasurementScenario::bell(1, 1, 2).unwrap();
        let ctx = scenario.contexts()[0].clone();
        let mut prep_dists = BTreeMap::new();
        prep_dists.insert("p".to_string(), Distribution::delta("l".to_string()));
        // missing response
        assert!(matches!(
            OntologicalModel::new(
                scenario.clone(),
                vec!["p".into()],
                vec!["l".into()],
                prep_dists.clone(),
                BTreeMap::new(),
            ),
            Err(ModelError::MissingResponse { .. })
        ));
        // response with wrong domain
        let mut bad = BTreeMap::new();
        bad.insert(
            ("l".to_string(), ctx),
            Distribution::delta(Assignment::new([("zz", "0")])),
        );
        assert!(matches!(
            OntologicalModel::new(
                scenario,
                vec!["p".into()],
                vec!["l".into()],
                prep_dists,
                bad,
            ),
            Err(ModelError::ResponseDomainMismatch { .. })
        ));
    }
}
