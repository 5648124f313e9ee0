//! Regenerates the JSON example files in this directory.
//!
//! ```sh
//! cargo run --example generate
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ontolab::cli::{correlated_pair_theory, product_pair_theory};
use ontolab::empirical::EmpiricalModel;
use ontolab::json::{
    to_json_string, EmpiricalFile, ModelFile, PrepTheoryFile, PropertyFile, QuantumModelFile,
    ScenarioFile, StateSpec, SteeringFile,
};
use ontolab::numeric::{Distribution, Rational};
use ontolab::quantum;
use ontolab::scenario::{Assignment, MeasurementScenario};

fn write(dir: &Path, name: &str, contents: String) {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap_or_else(|e| panic!("cannot write {}: {e}", path.display()));
    println!("wrote {}", path.display());
}

fn rational_map(pairs: &[(&str, Rational)]) -> BTreeMap<String, Rational> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let half = Rational::new(1, 2);

    // Example 2 of the classification: the two-coin bag. Drawing one coin
    // measures an epistemic colour property of the bag's state.
    let fuzzy_coins = PropertyFile {
        lambda: vec!["GG".into(), "GW".into(), "WG".into(), "WW".into()],
        values: vec!["G".into(), "W".into()],
        f: BTreeMap::from([
            ("GG".to_string(), rational_map(&[("G", Rational::one())])),
            (
                "GW".to_string(),
                rational_map(&[("G", half.clone()), ("W", half.clone())]),
            ),
            (
                "WG".to_string(),
                rational_map(&[("G", half.clone()), ("W", half.clone())]),
            ),
            ("WW".to_string(), rational_map(&[("W", Rational::one())])),
        ]),
        prior: None,
    };
    write(&dir, "fuzzy_coins.json", to_json_string(&fuzzy_coins));

    // The PR box and its half-visibility mixture with uniform noise (the
    // boundary of the local polytope along that line).
    let pr = EmpiricalModel::pr_box();
    write(&dir, "pr_box.json", to_json_string(&EmpiricalFile::from_domain(&pr)));
    let noisy = EmpiricalModel::noisy_pr_box(&half).unwrap();
    write(
        &dir,
        "noisy_pr_box_half.json",
        to_json_string(&EmpiricalFile::from_domain(&noisy)),
    );

    // Quantum CHSH correlations of phi_plus at the maximally violating
    // angles, assembled from rationalized correlators so the table stays
    // exactly no-signalling.
    let chsh = EmpiricalModel::from_correlators(&quantum::chsh_correlators()).unwrap();
    write(
        &dir,
        "chsh_quantum.json",
        to_json_string(&EmpiricalFile::from_domain(&chsh)),
    );

    // A signalling table: a0's marginal depends on Bob's setting.
    let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
    let mut tables = BTreeMap::new();
    for context in scenario.contexts() {
        let dist = if context.contains("a0") && context.contains("b1") {
            Distribution::uniform(scenario.assignments(context).unwrap()).unwrap()
        } else {
            Distribution::delta(Assignment::new(
                context.iter().map(|m| (m.clone(), "0".to_string())),
            ))
        };
        tables.insert(("p".to_string(), context.clone()), dist);
    }
    let signalling = EmpiricalModel::new(scenario, vec!["p".into()], tables).unwrap();
    write(
        &dir,
        "signalling_box.json",
        to_json_string(&EmpiricalFile::from_domain(&signalling)),
    );

    // psi-complete models: the single-qubit EPR demo and the Bell state on
    // the (2,2,2) scenario.
    write(
        &dir,
        "psi_complete_epr.json",
        to_json_string(&ModelFile::from_domain(&quantum::epr_qubit_model())),
    );
    write(
        &dir,
        "psi_complete_bell.json",
        to_json_string(&ModelFile::from_domain(&quantum::bell_psi_complete_model())),
    );

    // The same EPR model specified at the quantum level: built-in states by
    // name, one eigenvector spelled out as complex [re, im] pairs.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let epr_quantum = QuantumModelFile {
        scenario: ScenarioFile {
            measurements: vec!["X".into(), "Z".into()],
            outcomes: vec!["0".into(), "1".into()],
            contexts: vec![vec!["X".into()], vec!["Z".into()]],
        },
        states: BTreeMap::from([
            ("ket0".to_string(), StateSpec::Name("ket0".into())),
            ("ket1".to_string(), StateSpec::Name("ket1".into())),
            (
                "ketplus".to_string(),
                StateSpec::Amplitudes(vec![[h, 0.0], [h, 0.0]]),
            ),
            ("ketminus".to_string(), StateSpec::Name("ketminus".into())),
        ]),
        preparations: ["ket0", "ket1", "ketplus", "ketminus"]
            .into_iter()
            .map(|s| {
                (
                    format!("prep_{s}"),
                    rational_map(&[(s, Rational::one())]),
                )
            })
            .collect(),
        measurements: BTreeMap::from([
            (
                "Z".to_string(),
                BTreeMap::from([
                    ("Z:0".to_string(), StateSpec::Name("ket0".into())),
                    ("Z:1".to_string(), StateSpec::Name("ket1".into())),
                ]),
            ),
            (
                "X".to_string(),
                BTreeMap::from([
                    ("X:0".to_string(), StateSpec::Name("ketplus".into())),
                    ("X:1".to_string(), StateSpec::Name("ketminus".into())),
                ]),
            ),
        ]),
    };
    write(
        &dir,
        "psi_complete_epr_quantum.json",
        to_json_string(&epr_quantum),
    );

    // A local deterministic model, for canonicalization walkthroughs.
    let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
    let globals = ["a0:0,a1:0,b0:0,b1:0", "a0:1,a1:0,b0:1,b1:0", "a0:0,a1:0,b0:0,b1:0"];
    let mut responses = BTreeMap::new();
    for (i, global) in globals.iter().enumerate() {
        let omega: Assignment = global.parse().unwrap();
        for ctx in scenario.contexts() {
            responses.insert(
                (format!("l{i}"), ctx.clone()),
                Distribution::delta(omega.restrict(ctx).unwrap()),
            );
        }
    }
    let mut prep_dists = BTreeMap::new();
    prep_dists.insert(
        "p".to_string(),
        Distribution::new(vec![
            ("l0".to_string(), Rational::new(1, 2)),
            ("l1".to_string(), Rational::new(1, 3)),
            ("l2".to_string(), Rational::new(1, 6)),
        ])
        .unwrap(),
    );
    let local_model = ontolab::ontology::OntologicalModel::new(
        scenario,
        vec!["p".into()],
        (0..3).map(|i| format!("l{i}")).collect(),
        prep_dists,
        responses,
    )
    .unwrap();
    write(
        &dir,
        "local_deterministic.json",
        to_json_string(&ModelFile::from_domain(&local_model)),
    );

    // Preparation theories: the correlated pair separating preparation
    // independence from no-preparation-signalling, and a product theory.
    write(
        &dir,
        "correlated_preparation.json",
        to_json_string(&PrepTheoryFile::from_domain(&correlated_pair_theory())),
    );
    write(
        &dir,
        "product_preparation.json",
        to_json_string(&PrepTheoryFile::from_domain(&product_pair_theory())),
    );

    // Steering inputs: the pairwise-disjoint family (contradiction) and the
    // overlapping family with equal mixtures (consistent).
    let ensembles = quantum::steering_ensembles();
    let steering_disjoint = SteeringFile {
        mu: BTreeMap::from([
            ("ket0".to_string(), rational_map(&[("l0", Rational::one())])),
            ("ket1".to_string(), rational_map(&[("l1", Rational::one())])),
            ("ketplus".to_string(), rational_map(&[("l2", Rational::one())])),
            ("ketminus".to_string(), rational_map(&[("l3", Rational::one())])),
        ]),
        ensemble1: ensembles.z_ensemble.clone(),
        ensemble2: ensembles.x_ensemble.clone(),
    };
    write(&dir, "steering_disjoint.json", to_json_string(&steering_disjoint));

    let fifty = rational_map(&[("l0", half.clone()), ("l1", half.clone())]);
    let steering_overlapping = SteeringFile {
        mu: BTreeMap::from([
            ("ket0".to_string(), rational_map(&[("l0", Rational::one())])),
            ("ket1".to_string(), rational_map(&[("l1", Rational::one())])),
            ("ketplus".to_string(), fifty.clone()),
            ("ketminus".to_string(), fifty),
        ]),
        ensemble1: ensembles.z_ensemble,
        ensemble2: ensembles.x_ensemble,
    };
    write(
        &dir,
        "steering_overlapping.json",
        to_json_string(&steering_overlapping),
    );

    // A bare scenario file, showing the schema.
    write(
        &dir,
        "bell_222_scenario.json",
        to_json_string(&ScenarioFile::from_domain(
            &MeasurementScenario::bell(2, 2, 2).unwrap(),
        )),
    );
}
