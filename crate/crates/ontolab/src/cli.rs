//! Command dispatch for the `ontolab` binary: loading JSON inputs, running
//! checks, and assembling machine-readable reports.
//!
//! Exit codes are a contract: 0 when the checked property holds (or the
//! demo/transformation succeeds), 1 when it fails (a witness or certificate
//! is part of the report), 2 on input errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical;
use crate::empirical::{
    LocalRealizability, NoSignalling, QuasiOutcome, DEFAULT_MAX_GLOBAL_ASSIGNMENTS,
};
use crate::json::{
    to_json_string, CanonicalFile, CertificateFile, EmpiricalFile, FileError, ModelFile,
    PrepTheoryFile, PropertyFile, QuantumModelFile, QuasiFile, RealizationFile, SteeringFile,
};
use crate::numeric::Distribution;
use crate::ontology::{
    Classification, Determinism, Factorisability, Locality, ObservableProperties, SupportVerdict,
};
use crate::preparation::{
    steering_incompatibility, NoPreparationSignalling, PreparationIndependence,
    SteeringContradiction, SteeringVerdict,
};
use crate::quantum;
use crate::scenario::Assignment;

/// Environment variable bounding `|E(X)|` materialization in the LP-backed
/// commands.
pub const MAX_GLOBAL_ASSIGNMENTS_ENV: &str = "ONTOLAB_MAX_GLOBAL_ASSIGNMENTS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    File {
        path: String,
        source: FileError,
    },
    #[error("unknown check {0:?}; expected one of: {}", CheckKind::names().join(", "))]
    UnknownCheck(String),
    #[error("unknown demo {0:?}; expected one of: epr, steering, prep-relaxation")]
    UnknownDemo(String),
    #[error("{0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// One command's result: the verdict, a machine-readable witness or
/// certificate payload, and timing.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputDigest>,
    pub verdict: String,
    pub holds: bool,
    pub details: Value,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.holds {
            0
        } else {
            1
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}: {}\n", self.command, self.verdict));
        if !self.details.is_null() {
            out.push_str(&serde_json::to_string_pretty(&self.details).expect("valid json"));
            out.push('\n');
        }
        out.push_str(&format!("elapsed: {} ms\n", self.elapsed_ms));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    ClassifyProperty,
    HsSupports,
    Deterministic,
    ParameterIndependent,
    Local,
    Factorisable,
    NoSignalling,
    LocalRealizable,
    QuasiDecompose,
    PrepIndependent,
    NoPrepSignalling,
    Steering,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        CheckKind::ClassifyProperty,
        CheckKind::HsSupports,
        CheckKind::Deterministic,
        CheckKind::ParameterIndependent,
        CheckKind::Local,
        CheckKind::Factorisable,
        CheckKind::NoSignalling,
        CheckKind::LocalRealizable,
        CheckKind::QuasiDecompose,
        CheckKind::PrepIndependent,
        CheckKind::NoPrepSignalling,
        CheckKind::Steering,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::ClassifyProperty => "classify-property",
            CheckKind::HsSupports => "hs-supports",
            CheckKind::Deterministic => "deterministic",
            CheckKind::ParameterIndependent => "parameter-independent",
            CheckKind::Local => "local",
            CheckKind::Factorisable => "factorisable",
            CheckKind::NoSignalling => "no-signalling",
            CheckKind::LocalRealizable => "local-realizable",
            CheckKind::QuasiDecompose => "quasi-decompose",
            CheckKind::PrepIndependent => "prep-independent",
            CheckKind::NoPrepSignalling => "no-prep-signalling",
            CheckKind::Steering => "steering",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| CliError::UnknownCheck(name.to_string()))
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|k| k.name()).collect()
    }
}

pub struct CliOptions {
    pub max_global_assignments: u128,
}

impl Default for CliOptions {
    fn default() -> Self {
        CliOptions {
            max_global_assignments: DEFAULT_MAX_GLOBAL_ASSIGNMENTS,
        }
    }
}

impl CliOptions {
    /// Reads the assignment bound from the environment, falling back to the
    /// default on absence or garbage.
    pub fn from_env() -> Self {
        let max_global_assignments = std::env::var(MAX_GLOBAL_ASSIGNMENTS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_MAX_GLOBAL_ASSIGNMENTS);
        CliOptions {
            max_global_assignments,
        }
    }
}

fn read_input(path: &Path) -> Result<(String, InputDigest), CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: hex_digest(&bytes),
    };
    let text = String::from_utf8_lossy(&bytes).into_owned();
    Ok((text, digest))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|source| CliError::File {
        path: path.display().to_string(),
        source: FileError::Json(source),
    })
}

fn domain_err(path: &Path) -> impl Fn(FileError) -> CliError + '_ {
    move |source| CliError::File {
        path: path.display().to_string(),
        source,
    }
}

/// Parses a model input in either form: exact response tables, or a
/// quantum-level psi-complete specification (detected by its `states`
/// field).
fn parse_model(text: &str, path: &Path) -> Result<crate::ontology::OntologicalModel, CliError> {
    let probe: Value = parse(text, path)?;
    if probe.get("states").is_some() {
        parse::<QuantumModelFile>(text, path)?
            .to_domain()
            .map_err(domain_err(path))
    } else {
        parse::<ModelFile>(text, path)?
            .to_domain()
            .map_err(domain_err(path))
    }
}

/// Runs one named check against one input file.
pub fn run_check(path: &Path, kind: CheckKind, options: &CliOptions) -> Result<Report, CliError> {
    let started = Instant::now();
    let (text, digest) = read_input(path)?;
    let (verdict, holds, details) = match kind {
        CheckKind::ClassifyProperty => {
            let file: PropertyFile = parse(&text, path)?;
            let (property, _) = file.to_domain().map_err(domain_err(path))?;
            match property.classify() {
                Classification::Ontic { generator } => (
                    "ontic".to_string(),
                    true,
                    json!({ "generator": generator }),
                ),
                Classification::Epistemic { state, value_a, value_b } => (
                    "epistemic".to_string(),
                    false,
                    json!({ "witness": { "state": state, "value_a": value_a, "value_b": value_b } }),
                ),
            }
        }
        CheckKind::HsSupports => {
            let file: PropertyFile = parse(&text, path)?;
            let (property, prior) = file.to_domain().map_err(domain_err(path))?;
            let prior = prior.unwrap_or_else(|| property.uniform_prior());
            let verdict = property
                .ontic_by_supports(&prior)
                .map_err(|e| CliError::Precondition(e.to_string()))?;
            match verdict {
                SupportVerdict::Disjoint => {
                    ("disjoint-supports".to_string(), true, Value::Null)
                }
                SupportVerdict::Overlap { state, value_a, value_b } => (
                    "overlapping-supports".to_string(),
                    false,
                    json!({ "witness": { "state": state, "value_a": value_a, "value_b": value_b } }),
                ),
            }
        }
        CheckKind::Deterministic => {
            let model = parse_model(&text, path)?;
            match model.determinism() {
                Determinism::Deterministic => ("deterministic".to_string(), true, Value::Null),
                Determinism::Stochastic { state, context } => (
                    "stochastic".to_string(),
                    false,
                    json!({ "witness": { "state": state, "context": context.to_string() } }),
                ),
            }
        }
        CheckKind::ParameterIndependent => {
            let model = parse_model(&text, path)?;
            match model.parameter_independence() {
                ObservableProperties::Defined(_) => {
                    ("parameter-independent".to_string(), true, Value::Null)
                }
                ObservableProperties::IllDefined(d) => (
                    "parameter-dependent".to_string(),
                    false,
                    json!({ "witness": disagreement_json(&d) }),
                ),
            }
        }
        CheckKind::Local => {
            let model = parse_model(&text, path)?;
            locality_report(&model.locality())
        }
        CheckKind::Factorisable => {
            let model = parse_model(&text, path)?;
            let verdict = model
                .factorisability()
                .map_err(|e| CliError::Precondition(e.to_string()))?;
            match verdict {
                Factorisability::Factorisable => ("factorisable".to_string(), true, Value::Null),
                Factorisability::NotFactorisable { state, context, assignment } => (
                    "not-factorisable".to_string(),
                    false,
                    json!({ "witness": {
                        "state": state,
                        "context": context.to_string(),
                        "assignment": assignment.to_string(),
                    } }),
                ),
            }
        }
        CheckKind::NoSignalling => {
            let model = parse::<EmpiricalFile>(&text, path)?
                .to_domain()
                .map_err(domain_err(path))?;
            match model.no_signalling() {
                NoSignalling::Holds => ("no-signalling".to_string(), true, Value::Null),
                NoSignalling::Violated(w) => (
                    "signalling".to_string(),
                    false,
                    json!({ "witness": {
                        "preparation": w.preparation,
                        "overlap": w.overlap.to_string(),
                        "context_a": w.context_a.to_string(),
                        "context_b": w.context_b.to_string(),
                    } }),
                ),
            }
        }
        CheckKind::LocalRealizable => {
            let model = parse::<EmpiricalFile>(&text, path)?
                .to_domain()
                .map_err(domain_err(path))?;
            realizability_report(&model, None, options)?
        }
        CheckKind::QuasiDecompose => {
            let model = parse::<EmpiricalFile>(&text, path)?
                .to_domain()
                .map_err(domain_err(path))?;
            let mut all_decomposed = true;
            let mut entries = BTreeMap::new();
            for prep in model.preparations().to_vec() {
                let outcome = model
                    .quasi_decomposition_with_limit(&prep, options.max_global_assignments)
                    .map_err(|e| CliError::Precondition(e.to_string()))?;
                match outcome {
                    QuasiOutcome::Decomposition(weights) => {
                        entries.insert(
                            prep.clone(),
                            serde_json::to_value(QuasiFile::from_domain(&prep, &weights))
                                .expect("serializable"),
                        );
                    }
                    QuasiOutcome::NotNoSignalling(w) => {
                        all_decomposed = false;
                        entries.insert(
                            prep.clone(),
                            json!({ "not_no_signalling": {
                                "overlap": w.overlap.to_string(),
                                "context_a": w.context_a.to_string(),
                                "context_b": w.context_b.to_string(),
                            } }),
                        );
                    }
                }
            }
            (
                if all_decomposed {
                    "decomposed".to_string()
                } else {
                    "not-no-signalling".to_string()
                },
                all_decomposed,
                json!({ "preparations": entries }),
            )
        }
        CheckKind::PrepIndependent => {
            let theory = parse::<PrepTheoryFile>(&text, path)?
                .to_domain()
                .map_err(domain_err(path))?;
            match theory.preparation_independence() {
                PreparationIndependence::Independent => {
                    ("preparation-independent".to_string(), true, Value::Null)
                }
                PreparationIndependence::Correlated {
                    context,
                    state,
                    joint_weight,
                    product_weight,
                } => (
                    "correlated".to_string(),
                    false,
                    json!({ "witness": {
                        "context": context.to_string(),
                        "state": state.to_string(),
                        "joint_weight": joint_weight,
                        "product_weight": product_weight,
                    } }),
                ),
            }
        }
        CheckKind::NoPrepSignalling => {
            let theory = parse::<PrepTheoryFile>(&text, path)?
                .to_domain()
                .map_err(domain_err(path))?;
            match theory.no_preparation_signalling() {
                NoPreparationSignalling::Holds => {
                    ("no-preparation-signalling".to_string(), true, Value::Null)
                }
                NoPreparationSignalling::Violated {
                    site,
                    preparation,
                    context_a,
                    context_b,
                } => (
                    "preparation-signalling".to_string(),
                    false,
                    json!({ "witness": {
                        "site": site,
                        "preparation": preparation,
                        "context_a": context_a.to_string(),
                        "context_b": context_b.to_string(),
                    } }),
                ),
            }
        }
        CheckKind::Steering => {
            let file: SteeringFile = parse(&text, path)?;
            let (mu, ensemble1, ensemble2) = file.to_domain().map_err(domain_err(path))?;
            let verdict = steering_incompatibility(&mu, &ensemble1, &ensemble2)
                .map_err(|e| CliError::Precondition(e.to_string()))?;
            steering_report(&verdict)
        }
    };
    Ok(Report {
        command: format!("check {}", kind.name()),
        input: Some(digest),
        verdict,
        holds,
        details,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

fn disagreement_json(d: &crate::ontology::MarginalDisagreement) -> Value {
    json!({
        "measurement": d.measurement,
        "state": d.state,
        "context_a": d.context_a.to_string(),
        "context_b": d.context_b.to_string(),
    })
}

fn locality_report(locality: &Locality) -> (String, bool, Value) {
    match locality {
        Locality::Local => ("local".to_string(), true, Value::Null),
        Locality::NotDeterministic { state, context } => (
            "not-local".to_string(),
            false,
            json!({ "reason": "not-deterministic",
                    "witness": { "state": state, "context": context.to_string() } }),
        ),
        Locality::NotParameterIndependent(d) => (
            "not-local".to_string(),
            false,
            json!({ "reason": "not-parameter-independent", "witness": disagreement_json(d) }),
        ),
    }
}

fn steering_report(verdict: &SteeringVerdict) -> (String, bool, Value) {
    match verdict {
        SteeringVerdict::Consistent { all_supports_disjoint } => (
            "consistent".to_string(),
            true,
            json!({ "all_supports_disjoint": all_supports_disjoint }),
        ),
        SteeringVerdict::Contradiction(SteeringContradiction::MixtureEqualityImpossible) => (
            "contradiction".to_string(),
            false,
            json!({ "reason": "mixture-equality-impossible" }),
        ),
        SteeringVerdict::Contradiction(SteeringContradiction::MixturesDiffer {
            state,
            weight_a,
            weight_b,
        }) => (
            "contradiction".to_string(),
            false,
            json!({ "reason": "mixtures-differ",
                    "witness": { "state": state, "weight_1": weight_a, "weight_2": weight_b } }),
        ),
    }
}

fn realizability_report(
    model: &crate::empirical::EmpiricalModel,
    prep: Option<&str>,
    options: &CliOptions,
) -> Result<(String, bool, Value), CliError> {
    let preps: Vec<String> = match prep {
        Some(p) => vec![p.to_string()],
        None => model.preparations().to_vec(),
    };
    let mut all_feasible = true;
    let mut entries = BTreeMap::new();
    for prep in preps {
        let outcome = model
            .local_realizability_with_limit(&prep, options.max_global_assignments)
            .map_err(|e| CliError::Precondition(e.to_string()))?;
        match outcome {
            LocalRealizability::Feasible(realization) => {
                entries.insert(
                    prep.clone(),
                    json!({ "feasible": true,
                            "realization": RealizationFile::from_domain(&realization) }),
                );
            }
            LocalRealizability::Infeasible(certificate) => {
                all_feasible = false;
                entries.insert(
                    prep.clone(),
                    json!({ "feasible": false,
                            "certificate": CertificateFile::from_domain(&certificate) }),
                );
            }
        }
    }
    Ok((
        if all_feasible {
            "locally-realizable".to_string()
        } else {
            "not-locally-realizable".to_string()
        },
        all_feasible,
        json!({ "preparations": entries }),
    ))
}

/// Canonicalizes a local model file, writing the canonical model and the
/// collapse map to `out` after verifying exact operational equivalence.
pub fn run_canonicalize(path: &Path, out: &Path, _options: &CliOptions) -> Result<Report, CliError> {
    let started = Instant::now();
    let (text, digest) = read_input(path)?;
    let model = parse_model(&text, path)?;
    let (verdict, holds, details) = match canonical::canonicalize(&model) {
        Ok(canonical) => {
            let file = CanonicalFile::from_domain(&canonical);
            fs::write(out, to_json_string(&file)).map_err(|source| CliError::Write {
                path: out.display().to_string(),
                source,
            })?;
            (
                "canonicalized".to_string(),
                true,
                json!({
                    "out": out.display().to_string(),
                    "live_assignments": canonical.model().states().len(),
                    "original_states": model.states().len(),
                }),
            )
        }
        Err(err) => {
            let (_, _, witness) = locality_report(&err.0);
            ("not-local".to_string(), false, witness)
        }
    };
    Ok(Report {
        command: "canonicalize".to_string(),
        input: Some(digest),
        verdict,
        holds,
        details,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

/// Decides local realizability of an empirical table file, for one
/// preparation or all of them.
pub fn run_localize(
    path: &Path,
    prep: Option<&str>,
    options: &CliOptions,
) -> Result<Report, CliError> {
    let started = Instant::now();
    let (text, digest) = read_input(path)?;
    let model = parse::<EmpiricalFile>(&text, path)?
        .to_domain()
        .map_err(domain_err(path))?;
    if let Some(p) = prep {
        if !model.preparations().iter().any(|q| q == p) {
            return Err(CliError::Precondition(format!("unknown preparation {p:?}")));
        }
    }
    let (verdict, holds, details) = realizability_report(&model, prep, options)?;
    Ok(Report {
        command: "localize".to_string(),
        input: Some(digest),
        verdict,
        holds,
        details,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoKind {
    Epr,
    Steering,
    PrepRelaxation,
}

impl DemoKind {
    pub fn from_name(name: &str) -> Result<Self, CliError> {
        match name {
            "epr" => Ok(DemoKind::Epr),
            "steering" => Ok(DemoKind::Steering),
            "prep-relaxation" => Ok(DemoKind::PrepRelaxation),
            other => Err(CliError::UnknownDemo(other.to_string())),
        }
    }
}

/// Runs a built-in demonstration. The report holds iff every expected
/// verdict was reached.
pub fn run_demo(kind: DemoKind) -> Report {
    let started = Instant::now();
    let (command, verdict, holds, details) = match kind {
        DemoKind::Epr => demo_epr(),
        DemoKind::Steering => demo_steering(),
        DemoKind::PrepRelaxation => demo_prep_relaxation(),
    };
    Report {
        command,
        input: None,
        verdict,
        holds,
        details,
        elapsed_ms: started.elapsed().as_millis(),
    }
}

/// The psi-complete single-qubit model over `{|0>,|1>,|+>,|->}` with Z and
/// X: both observables are epistemic, so the model cannot be local.
fn demo_epr() -> (String, String, bool, Value) {
    let model = quantum::epr_qubit_model();
    let mut classifications = BTreeMap::new();
    let mut all_epistemic = true;
    for m in ["Z", "X"] {
        let entry = match quantum::check_observable_epistemicity(&model, m)
            .expect("built-in model measurements exist")
        {
            Ok(Classification::Epistemic { state, value_a, value_b }) => {
                json!({ "classification": "epistemic",
                        "witness": { "state": state, "value_a": value_a, "value_b": value_b } })
            }
            Ok(Classification::Ontic { .. }) => {
                all_epistemic = false;
                json!({ "classification": "ontic" })
            }
            Err(d) => {
                all_epistemic = false;
                json!({ "classification": "ill-defined", "witness": disagreement_json(&d) })
            }
        };
        classifications.insert(m.to_string(), entry);
    }
    let locality = model.locality();
    let (_, _, locality_witness) = locality_report(&locality);
    let non_local_as_expected =
        matches!(locality, Locality::NotDeterministic { .. });
    let holds = all_epistemic && non_local_as_expected;
    (
        "demo epr".to_string(),
        "psi-complete model is non-local".to_string(),
        holds,
        json!({
            "observables": classifications,
            "locality": locality_witness,
        }),
    )
}

/// Steering ensembles of `phi_plus` against a pairwise-disjoint ontic
/// family: the two equal-mixture conditions cannot be met.
fn demo_steering() -> (String, String, bool, Value) {
    let ensembles = quantum::steering_ensembles();
    let mut mu = BTreeMap::new();
    for (i, name) in ["ket0", "ket1", "ketplus", "ketminus"].into_iter().enumerate() {
        mu.insert(name.to_string(), Distribution::delta(format!("l{i}")));
    }
    let verdict = steering_incompatibility(&mu, &ensembles.z_ensemble, &ensembles.x_ensemble)
        .expect("built-in ensembles are valid");
    let (verdict_name, _, witness) = steering_report(&verdict);
    let holds = matches!(
        verdict,
        SteeringVerdict::Contradiction(SteeringContradiction::MixtureEqualityImpossible)
    );
    (
        "demo steering".to_string(),
        format!("ontic wavefunction is incompatible with steering: {verdict_name}"),
        holds,
        json!({
            "ensemble_z": ensembles.z_ensemble,
            "ensemble_x": ensembles.x_ensemble,
            "mu": "pairwise-disjoint deltas",
            "result": witness,
        }),
    )
}

/// The correlated joint theory is no-preparation-signalling but not
/// preparation-independent; the product theory is both.
fn demo_prep_relaxation() -> (String, String, bool, Value) {
    let correlated = correlated_pair_theory();
    let product = product_pair_theory();

    let correlated_pi = correlated.preparation_independence();
    let correlated_nps = correlated.no_preparation_signalling();
    let product_pi = product.preparation_independence();
    let product_nps = product.no_preparation_signalling();

    let holds = !correlated_pi.holds()
        && correlated_nps.holds()
        && product_pi.holds()
        && product_nps.holds();
    let witness = match &correlated_pi {
        PreparationIndependence::Correlated {
            context,
            state,
            joint_weight,
            product_weight,
        } => json!({
            "context": context.to_string(),
            "state": state.to_string(),
            "joint_weight": joint_weight,
            "product_weight": product_weight,
        }),
        PreparationIndependence::Independent => Value::Null,
    };
    (
        "demo prep-relaxation".to_string(),
        "no-preparation-signalling is strictly weaker than preparation independence".to_string(),
        holds,
        json!({
            "correlated_theory": {
                "prep_independent": correlated_pi.holds(),
                "no_prep_signalling": correlated_nps.holds(),
                "witness": witness,
            },
            "product_theory": {
                "prep_independent": product_pi.holds(),
                "no_prep_signalling": product_nps.holds(),
            },
        }),
    )
}

/// The perfectly correlated two-site theory `{00: 1/2, 11: 1/2}` over the
/// 2x2 preparation contexts.
pub fn correlated_pair_theory() -> crate::preparation::PreparationTheory {
    use crate::numeric::Rational;
    use crate::preparation::PreparationTheory;
    use crate::scenario::{PrepContext, PreparationScenario};

    let mut preps = BTreeMap::new();
    preps.insert("A".to_string(), vec!["p0".to_string(), "p1".to_string()]);
    preps.insert("B".to_string(), vec!["q0".to_string(), "q1".to_string()]);
    let scenario = PreparationScenario::new(
        vec!["A".into(), "B".into()],
        preps,
        vec!["0".into(), "1".into()],
        vec![
            PrepContext::new(["p0", "q0"]),
            PrepContext::new(["p0", "q1"]),
            PrepContext::new(["p1", "q0"]),
            PrepContext::new(["p1", "q1"]),
        ],
    )
    .expect("built-in scenario is well-formed");
    let half = Rational::new(1, 2);
    let dist = Distribution::new(vec![
        ("A:0,B:0".parse::<Assignment>().unwrap(), half.clone()),
        ("A:1,B:1".parse::<Assignment>().unwrap(), half),
    ])
    .unwrap();
    let joint_dists = scenario
        .contexts()
        .iter()
        .map(|c| (c.clone(), dist.clone()))
        .collect();
    PreparationTheory::new(scenario, joint_dists).expect("built-in theory is well-formed")
}

/// A two-site product theory whose per-site factors depend only on the
/// local preparation.
pub fn product_pair_theory() -> crate::preparation::PreparationTheory {
    use crate::numeric::Rational;
    use crate::preparation::PreparationTheory;
    use crate::scenario::{PrepContext, PreparationScenario};

    let mut preps = BTreeMap::new();
    preps.insert("A".to_string(), vec!["p0".to_string(), "p1".to_string()]);
    preps.insert("B".to_string(), vec!["q0".to_string(), "q1".to_string()]);
    let scenario = PreparationScenario::new(
        vec!["A".into(), "B".into()],
        preps,
        vec!["0".into(), "1".into()],
        vec![
            PrepContext::new(["p0", "q0"]),
            PrepContext::new(["p0", "q1"]),
            PrepContext::new(["p1", "q0"]),
            PrepContext::new(["p1", "q1"]),
        ],
    )
    .expect("built-in scenario is well-formed");
    let factor = |one: i64, of: i64| {
        [
            Rational::new(one, of),
            Rational::one() - Rational::new(one, of),
        ]
    };
    let site_a = |p: &str| if p == "p0" { factor(1, 2) } else { factor(1, 3) };
    let site_b = |q: &str| if q == "q0" { factor(1, 1) } else { factor(1, 4) };
    let joint_dists = scenario
        .contexts()
        .iter()
        .map(|ctx| {
            let fa = site_a(&ctx.choices()[0]);
            let fb = site_b(&ctx.choices()[1]);
            let entries: Vec<(Assignment, Rational)> = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| {
                    (
                        format!("A:{i},B:{j}").parse::<Assignment>().unwrap(),
                        &fa[i] * &fb[j],
                    )
                })
                .filter(|(_, w)| !w.is_zero())
                .collect();
            (ctx.clone(), Distribution::new(entries).unwrap())
        })
        .collect();
    PreparationTheory::new(scenario, joint_dists).expect("built-in theory is well-formed")
}
