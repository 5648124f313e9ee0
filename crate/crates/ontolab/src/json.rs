//! JSON file formats for scenarios, properties, models, empirical tables,
//! preparation theories and steering inputs, plus the artifacts the CLI
//! emits (canonical models, realizations, certificates).
//!
//! Rationals serialize as `"p/q"` strings (or `"p"` for integers), never as
//! binary floats. Assignments serialize as `"m1:o1,m2:o2"` with measurements
//! sorted lexicographically; composite map keys use `|` between the two
//! components, e.g. `"<lambda>|<context>"` for response rows. Maps are
//! emitted with sorted keys, so emitted artifacts re-parse and re-emit
//! byte-identically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::empirical::{EmpiricalError, EmpiricalModel, InfeasibilityCertificate, LocalRealization};
use crate::canonical::CanonicalModel;
use crate::numeric::{Distribution, DistributionError, Rational, SignedWeights};
use crate::ontology::{ModelError, OntologicalModel, OntologyError, Property};
use crate::preparation::{PreparationError, PreparationTheory};
use crate::scenario::{
    Assignment, Context, MeasurementScenario, PrepContext, PreparationScenario, ScenarioError,
};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad composite key {key:?}: expected {expected}")]
    BadKey { key: String, expected: &'static str },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Empirical(#[from] EmpiricalError),
    #[error(transparent)]
    Preparation(#[from] PreparationError),
    #[error(transparent)]
    Quantum(#[from] crate::quantum::QuantumError),
}

fn split_key(key: &str, expected: &'static str) -> Result<(String, String), FileError> {
    key.split_once('|')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(|| FileError::BadKey {
            key: key.to_string(),
            expected,
        })
}

fn parse_dist<S, F>(map: &BTreeMap<String, Rational>, parse: F) -> Result<Distribution<S>, FileError>
where
    S: Ord + Clone + std::fmt::Debug,
    F: Fn(&str) -> Result<S, FileError>,
{
    let entries: Vec<(S, Rational)> = map
        .iter()
        .map(|(k, w)| Ok((parse(k)?, w.clone())))
        .collect::<Result<_, FileError>>()?;
    Ok(Distribution::new(entries)?)
}

fn dist_to_map<S>(dist: &Distribution<S>) -> BTreeMap<String, Rational>
where
    S: Ord + Clone + std::fmt::Debug + ToString,
{
    dist.iter().map(|(s, w)| (s.to_string(), w.clone())).collect()
}

// ---------------------------------------------------------------------------
// scenario

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub measurements: Vec<String>,
    pub outcomes: Vec<String>,
    pub contexts: Vec<Vec<String>>,
}

impl ScenarioFile {
    pub fn to_domain(&self) -> Result<MeasurementScenario, FileError> {
        Ok(MeasurementScenario::new(
            self.measurements.clone(),
            self.outcomes.clone(),
            self.contexts.iter().map(|c| Context::new(c.iter().cloned())),
        )?)
    }

    pub fn from_domain(scenario: &MeasurementScenario) -> Self {
        ScenarioFile {
            measurements: scenario.measurements().to_vec(),
            outcomes: scenario.outcomes().to_vec(),
            contexts: scenario
                .contexts()
                .iter()
                .map(|c| c.iter().cloned().collect())
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// property

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyFile {
    pub lambda: Vec<String>,
    pub values: Vec<String>,
    /// Per-state distributions over values.
    pub f: BTreeMap<String, BTreeMap<String, Rational>>,
    /// Optional prior over the states; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<BTreeMap<String, Rational>>,
}

impl PropertyFile {
    #[allow(clippy::type_complexity)]
    pub fn to_domain(
        &self,
    ) -> Result<(Property<String, String>, Option<Distribution<String>>), FileError> {
        let mut map = BTreeMap::new();
        for (state, weights) in &self.f {
            map.insert(state.clone(), parse_dist(weights, |v| Ok(v.to_string()))?);
        }
        let property = Property::new(self.lambda.clone(), self.values.clone(), map)?;
        let prior = match &self.prior {
            Some(weights) => Some(parse_dist(weights, |l| Ok(l.to_string()))?),
            None => None,
        };
        Ok((property, prior))
    }
}

// ---------------------------------------------------------------------------
// ontological model

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub scenario: ScenarioFile,
    pub preparations: Vec<String>,
    pub lambda: Vec<String>,
    /// Preparation label to distribution over `lambda`.
    pub prep_dists: BTreeMap<String, BTreeMap<String, Rational>>,
    /// `"<lambda>|<context>"` to distribution over assignments.
    pub response: BTreeMap<String, BTreeMap<String, Rational>>,
}

impl ModelFile {
    pub fn to_domain(&self) -> Result<OntologicalModel, FileError> {
        let scenario = self.scenario.to_domain()?;
        let mut prep_dists = BTreeMap::new();
        for (prep, weights) in &self.prep_dists {
            prep_dists.insert(prep.clone(), parse_dist(weights, |l| Ok(l.to_string()))?);
        }
        let mut responses = BTreeMap::new();
        for (key, weights) in &self.response {
            let (state, context) = split_key(key, "\"<lambda>|<context>\"")?;
            let context: Context = context.parse().map_err(FileError::Scenario)?;
            let dist = parse_dist(weights, |a| {
                a.parse::<Assignment>().map_err(FileError::Scenario)
            })?;
            responses.insert((state, context), dist);
        }
        Ok(OntologicalModel::new(
            scenario,
            self.preparations.clone(),
            self.lambda.clone(),
            prep_dists,
            responses,
        )?)
    }

    pub fn from_domain(model: &OntologicalModel) -> Self {
        let mut response = BTreeMap::new();
        for state in model.states() {
            for context in model.scenario().contexts() {
                let dist = model.response(state, context).expect("total response family");
                response.insert(format!("{state}|{context}"), dist_to_map(dist));
            }
        }
        ModelFile {
            scenario: ScenarioFile::from_domain(model.scenario()),
            preparations: model.preparations().to_vec(),
            lambda: model.states().to_vec(),
            prep_dists: model
                .preparations()
                .iter()
                .map(|p| {
                    let dist = model.prep_dist(p).expect("total preparation family");
                    (p.clone(), dist_to_map(dist))
                })
                .collect(),
            response,
        }
    }
}

// ---------------------------------------------------------------------------
// empirical model

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalFile {
    pub scenario: ScenarioFile,
    pub preparations: Vec<String>,
    /// `"<preparation>|<context>"` to distribution over assignments.
    pub tables: BTreeMap<String, BTreeMap<String, Rational>>,
}

impl EmpiricalFile {
    pub fn to_domain(&self) -> Result<EmpiricalModel, FileError> {
        let scenario = self.scenario.to_domain()?;
        let mut tables = BTreeMap::new();
        for (key, weights) in &self.tables {
            let (prep, context) = split_key(key, "\"<preparation>|<context>\"")?;
            let context: Context = context.parse().map_err(FileError::Scenario)?;
            let dist = parse_dist(weights, |a| {
                a.parse::<Assignment>().map_err(FileError::Scenario)
            })?;
            tables.insert((prep, context), dist);
        }
        Ok(EmpiricalModel::new(
            scenario,
            self.preparations.clone(),
            tables,
        )?)
    }

    pub fn from_domain(model: &EmpiricalModel) -> Self {
        let mut tables = BTreeMap::new();
        for prep in model.preparations() {
            for context in model.scenario().contexts() {
                let dist = model.table(prep, context).expect("total table family");
                tables.insert(format!("{prep}|{context}"), dist_to_map(dist));
            }
        }
        EmpiricalFile {
            scenario: ScenarioFile::from_domain(model.scenario()),
            preparations: model.preparations().to_vec(),
            tables,
        }
    }
}

// ---------------------------------------------------------------------------
// quantum (psi-complete) model specification

/// A pure state: either the name of a built-in (`ket0`, `ket1`, `ketplus`,
/// `ketminus`, `phi_plus`) or an amplitude vector of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Name(String),
    Amplitudes(Vec<[f64; 2]>),
}

impl StateSpec {
    pub fn to_state(&self) -> Result<crate::quantum::PureState, FileError> {
        use num_complex::Complex64;
        match self {
            StateSpec::Name(name) => Ok(crate::quantum::PureState::by_name(name)?),
            StateSpec::Amplitudes(pairs) => Ok(crate::quantum::PureState::new(
                pairs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
            )?),
        }
    }
}

/// A psi-complete model specified at the quantum level: ontic states are
/// pure states, responses come from the Born rule of per-context joint
/// projective measurements (eigenvectors labelled by joint outcomes).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumModelFile {
    pub scenario: ScenarioFile,
    /// State label to pure state.
    pub states: BTreeMap<String, StateSpec>,
    /// Preparation label to distribution over state labels.
    pub preparations: BTreeMap<String, BTreeMap<String, Rational>>,
    /// `"<context>"` to eigenvectors keyed by joint-outcome assignment.
    pub measurements: BTreeMap<String, BTreeMap<String, StateSpec>>,
}

impl QuantumModelFile {
    pub fn to_domain(&self) -> Result<OntologicalModel, FileError> {
        let scenario = self.scenario.to_domain()?;
        let states: Vec<(String, crate::quantum::PureState)> = self
            .states
            .iter()
            .map(|(label, spec)| Ok((label.clone(), spec.to_state()?)))
            .collect::<Result<_, FileError>>()?;
        let mut preparations = BTreeMap::new();
        for (prep, weights) in &self.preparations {
            preparations.insert(prep.clone(), parse_dist(weights, |l| Ok(l.to_string()))?);
        }
        let mut measurements = BTreeMap::new();
        for (key, eigenvectors) in &self.measurements {
            let context: Context = key.parse().map_err(FileError::Scenario)?;
            let eigenvectors: Vec<(Assignment, crate::quantum::PureState)> = eigenvectors
                .iter()
                .map(|(a, spec)| {
                    let assignment: Assignment = a.parse().map_err(FileError::Scenario)?;
                    Ok((assignment, spec.to_state()?))
                })
                .collect::<Result<_, FileError>>()?;
            measurements.insert(
                context.clone(),
                crate::quantum::JointMeasurement::new(context, eigenvectors)?,
            );
        }
        Ok(crate::quantum::psi_complete_model(
            &states,
            preparations,
            &scenario,
            &measurements,
        )?)
    }
}

/// A model input in either form: exact response tables or a quantum-level
/// psi-complete specification.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AnyModelFile {
    Exact(ModelFile),
    Quantum(QuantumModelFile),
}

impl AnyModelFile {
    pub fn to_domain(&self) -> Result<OntologicalModel, FileError> {
        match self {
            AnyModelFile::Exact(file) => file.to_domain(),
            AnyModelFile::Quantum(file) => file.to_domain(),
        }
    }
}

// ---------------------------------------------------------------------------
// preparation theory

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrepTheoryFile {
    pub sites: Vec<String>,
    /// Site to its preparation labels.
    pub preparations: BTreeMap<String, Vec<String>>,
    pub lambda: Vec<String>,
    /// One preparation per site, aligned with `sites`.
    pub prep_contexts: Vec<Vec<String>>,
    /// `"<p1>,<p2>,..."` (choices in site order) to distribution over joint
    /// states `"site1:l,site2:l"`.
    pub joint_dists: BTreeMap<String, BTreeMap<String, Rational>>,
}

impl PrepTheoryFile {
    pub fn to_domain(&self) -> Result<PreparationTheory, FileError> {
        let scenario = PreparationScenario::new(
            self.sites.clone(),
            self.preparations.clone(),
            self.lambda.clone(),
            self.prep_contexts
                .iter()
                .map(|c| PrepContext::new(c.iter().cloned()))
                .collect(),
        )?;
        let mut joint_dists = BTreeMap::new();
        for (key, weights) in &self.joint_dists {
            let context: PrepContext = key.parse().map_err(FileError::Scenario)?;
            let dist = parse_dist(weights, |a| {
                a.parse::<Assignment>().map_err(FileError::Scenario)
            })?;
            joint_dists.insert(context, dist);
        }
        Ok(PreparationTheory::new(scenario, joint_dists)?)
    }

    pub fn from_domain(theory: &PreparationTheory) -> Self {
        let scenario = theory.scenario();
        PrepTheoryFile {
            sites: scenario.sites().to_vec(),
            preparations: scenario.preparations().clone(),
            lambda: scenario.lambda().to_vec(),
            prep_contexts: scenario
                .contexts()
                .iter()
                .map(|c| c.choices().to_vec())
                .collect(),
            joint_dists: scenario
                .contexts()
                .iter()
                .map(|c| {
                    let dist = theory.joint_dist(c).expect("total joint family");
                    (c.to_string(), dist_to_map(dist))
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// steering input

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteeringFile {
    /// State label to distribution over the ontic space.
    pub mu: BTreeMap<String, BTreeMap<String, Rational>>,
    /// `(coefficient, state label)` pairs.
    pub ensemble1: Vec<(Rational, String)>,
    pub ensemble2: Vec<(Rational, String)>,
}

impl SteeringFile {
    #[allow(clippy::type_complexity)]
    pub fn to_domain(
        &self,
    ) -> Result<
        (
            BTreeMap<String, Distribution<String>>,
            Vec<(Rational, String)>,
            Vec<(Rational, String)>,
        ),
        FileError,
    > {
        let mut mu = BTreeMap::new();
        for (label, weights) in &self.mu {
            mu.insert(label.clone(), parse_dist(weights, |l| Ok(l.to_string()))?);
        }
        Ok((mu, self.ensemble1.clone(), self.ensemble2.clone()))
    }
}

// ---------------------------------------------------------------------------
// emitted artifacts

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalFile {
    pub model: ModelFile,
    /// Original ontic state to its global assignment, for auditability.
    pub collapse: BTreeMap<String, String>,
}

impl CanonicalFile {
    pub fn from_domain(canonical: &CanonicalModel) -> Self {
        CanonicalFile {
            model: ModelFile::from_domain(canonical.model()),
            collapse: canonical
                .collapse()
                .iter()
                .map(|(state, omega)| (state.clone(), omega.to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationFile {
    pub preparation: String,
    /// Global assignment to weight; non-negative, marginals reproduce the
    /// table exactly.
    pub weights: BTreeMap<String, Rational>,
}

impl RealizationFile {
    pub fn from_domain(realization: &LocalRealization) -> Self {
        RealizationFile {
            preparation: realization.preparation.clone(),
            weights: dist_to_map(&realization.weights),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub preparation: String,
    /// `"<context>|<assignment>"` to coefficient.
    pub coefficients: BTreeMap<String, Rational>,
    /// Pairing of the certificate with the table; strictly negative.
    pub table_pairing: Rational,
}

impl CertificateFile {
    pub fn from_domain(certificate: &InfeasibilityCertificate) -> Self {
        CertificateFile {
            preparation: certificate.preparation.clone(),
            coefficients: certificate
                .coefficients
                .iter()
                .map(|((context, assignment), c)| {
                    (format!("{context}|{assignment}"), c.clone())
                })
                .collect(),
            table_pairing: certificate.table_pairing.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasiFile {
    pub preparation: String,
    /// Global assignment to signed weight; weights sum to 1 and marginals
    /// reproduce the table exactly. Not unique in general.
    pub weights: BTreeMap<String, Rational>,
    pub negative_entries: usize,
}

impl QuasiFile {
    pub fn from_domain(preparation: &str, weights: &SignedWeights<Assignment>) -> Self {
        QuasiFile {
            preparation: preparation.to_string(),
            weights: weights
                .iter()
                .map(|(a, w)| (a.to_string(), w.clone()))
                .collect(),
            negative_entries: weights.iter().filter(|(_, w)| w.is_negative()).count(),
        }
    }
}

/// Deterministic pretty serialization used for every emitted artifact.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("artifacts serialize infallibly");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_file_round_trips_byte_stably() {
        let model = crate::quantum::epr_qubit_model();
        let file = ModelFile::from_domain(&model);
        let text = to_json_string(&file);
        let reparsed: ModelFile = serde_json::from_str(&text).unwrap();
        let model2 = reparsed.to_domain().unwrap();
        assert_eq!(model, model2);
        assert_eq!(to_json_string(&ModelFile::from_domain(&model2)), text);
    }

    #[test]
    fn empirical_file_round_trips() {
        let pr = EmpiricalModel::pr_box();
        let file = EmpiricalFile::from_domain(&pr);
        let text = to_json_string(&file);
        let reparsed: EmpiricalFile = serde_json::from_str(&text).unwrap();
        assert_eq!(reparsed.to_domain().unwrap(), pr);
        assert_eq!(to_json_string(&EmpiricalFile::from_domain(&pr)), text);
    }

    #[test]
    fn bad_composite_keys_are_rejected() {
        let file = EmpiricalFile {
            scenario: ScenarioFile {
                measurements: vec!["m".into()],
                outcomes: vec!["0".into()],
                contexts: vec![vec!["m".into()]],
            },
            preparations: vec!["p".into()],
            tables: BTreeMap::from([(
                "p-m".to_string(), // missing the | separator
                BTreeMap::from([("m:0".to_string(), Rational::one())]),
            )]),
        };
        assert!(matches!(
            file.to_domain(),
            Err(FileError::BadKey { .. })
        ));
    }

    #[test]
    fn quantum_model_file_builds_the_epr_model() {
        let text = r#"{
            "scenario": {
                "measurements": ["X", "Z"],
                "outcomes": ["0", "1"],
                "contexts": [["X"], ["Z"]]
            },
            "states": {
                "ket0": "ket0",
                "ket1": "ket1",
                "ketplus": [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]],
                "ketminus": "ketminus"
            },
            "preparations": {
                "prep_ket0": {"ket0": "1"},
                "prep_ket1": {"ket1": "1"},
                "prep_ketplus": {"ketplus": "1"},
                "prep_ketminus": {"ketminus": "1"}
            },
            "measurements": {
                "Z": {"Z:0": "ket0", "Z:1": "ket1"},
                "X": {"X:0": "ketplus", "X:1": "ketminus"}
            }
        }"#;
        let file: QuantumModelFile = serde_json::from_str(text).unwrap();
        let model = file.to_domain().unwrap();
        assert_eq!(model, crate::quantum::epr_qubit_model());

        // the dual-format entry point accepts both spellings
        let any: AnyModelFile = serde_json::from_str(text).unwrap();
        assert_eq!(any.to_domain().unwrap(), model);
        let exact_text = to_json_string(&ModelFile::from_domain(&model));
        let any: AnyModelFile = serde_json::from_str(&exact_text).unwrap();
        assert_eq!(any.to_domain().unwrap(), model);
    }

    #[test]
    fn quantum_model_file_rejects_bad_states() {
        let text = r#"{
            "scenario": {"measurements": ["Z"], "outcomes": ["0", "1"], "contexts": [["Z"]]},
            "states": {"s": [[1.0, 0.0], [1.0, 0.0]]},
            "preparations": {"p": {"s": "1"}},
            "measurements": {"Z": {"Z:0": "ket0", "Z:1": "ket1"}}
        }"#;
        let file: QuantumModelFile = serde_json::from_str(text).unwrap();
        assert!(matches!(
            file.to_domain(),
            Err(FileError::Quantum(crate::quantum::QuantumError::NotNormalized(_)))
        ));
    }

    #[test]
    fn rationals_in_files_are_strings() {
        let pr = EmpiricalModel::pr_box();
        let text = to_json_string(&EmpiricalFile::from_domain(&pr));
        assert!(text.contains("\"1/2\""));
        assert!(!text.contains("0.5"));
    }
}
