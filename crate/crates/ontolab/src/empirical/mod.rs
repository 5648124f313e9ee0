//! Empirical models: operational tables, no-signalling, local realizability
//! via exact LP feasibility, and quasiprobability decompositions.
//!
//! Local realizability asks for non-negative weights over the global
//! outcome assignments whose context marginals reproduce the table exactly.
//! The LP is solved in exact rational arithmetic, so `Feasible` comes with a
//! realization and `Infeasible` with a separating functional that is
//! non-negative on every deterministic assignment and strictly negative on
//! the table. Allowing signed weights instead turns every no-signalling
//! table into a solvable linear system; that is the quasiprobability
//! decomposition.

mod lp;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::numeric::{Distribution, Rational, SignedWeights};
use crate::ontology::OntologicalModel;
use crate::scenario::{Assignment, Context, MeasurementScenario, ScenarioError};

use lp::{FeasibilitySystem, PhaseOneOutcome, Row};

/// Default bound on how many global assignments may be materialized by the
/// LP and quasiprobability solvers; overridable per call and through the
/// `ONTOLAB_MAX_GLOBAL_ASSIGNMENTS` environment variable in the CLI.
pub const DEFAULT_MAX_GLOBAL_ASSIGNMENTS: u128 = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmpiricalError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("empirical model has no preparations")]
    NoPreparations,
    #[error("missing table for preparation {prep:?} in context {context}")]
    MissingTable { prep: String, context: Context },
    #[error("table for preparation {prep:?} in context {context} assigns weight to {assignment} whose domain is not the context")]
    TableDomainMismatch {
        prep: String,
        context: Context,
        assignment: Assignment,
    },
    #[error("table for preparation {prep:?} in context {context} uses an unknown outcome in {assignment}")]
    UnknownOutcome {
        prep: String,
        context: Context,
        assignment: Assignment,
    },
    #[error("unknown preparation {0:?}")]
    UnknownPreparation(String),
    #[error("unknown context {0}")]
    UnknownContext(Context),
    #[error("{count} global assignments exceed the limit of {limit}; raise ONTOLAB_MAX_GLOBAL_ASSIGNMENTS to override")]
    TooManyGlobalAssignments { count: u128, limit: u128 },
    #[error("stray table entry {0:?} outside the declared preparations and contexts")]
    StrayEntry(String),
    #[error("visibility must lie in [0, 1], got {0}")]
    VisibilityOutOfRange(Rational),
    #[error("correlator must lie in [-1, 1], got {0}")]
    CorrelatorOutOfRange(Rational),
    #[error("marginal system has no signed solution; the table is not no-signalling")]
    SignedSystemInconsistent,
}

/// The observable face of a theory: a distribution over joint outcomes per
/// preparation and context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalModel {
    scenario: MeasurementScenario,
    preparations: Vec<String>,
    tables: BTreeMap<(String, Context), Distribution<Assignment>>,
}

/// No-signalling verdict: marginals on every shared subset of two contexts
/// agree, per preparation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoSignalling {
    Holds,
    Violated(SignallingWitness),
}

impl NoSignalling {
    pub fn holds(&self) -> bool {
        matches!(self, NoSignalling::Holds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignallingWitness {
    pub preparation: String,
    pub overlap: Context,
    pub context_a: Context,
    pub context_b: Context,
}

/// Non-negative weights over global assignments realizing a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRealization {
    pub preparation: String,
    pub weights: Distribution<Assignment>,
}

/// A rational separating functional over the table rows `(context, joint
/// outcome)`: pairing with the table is strictly negative while pairing
/// with the deterministic table of any global assignment is non-negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfeasibilityCertificate {
    pub preparation: String,
    pub coefficients: BTreeMap<(Context, Assignment), Rational>,
    /// The (negative) pairing of the certificate with the table.
    pub table_pairing: Rational,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertificateError {
    #[error("certificate pairs with the table to {0}, expected a negative value")]
    TablePairingNotNegative(Rational),
    #[error("certificate pairs negatively with the deterministic assignment {0}")]
    NegativeOnDeterministic(Assignment),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalRealizability {
    Feasible(LocalRealization),
    Infeasible(InfeasibilityCertificate),
}

impl LocalRealizability {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LocalRealizability::Feasible(_))
    }
}

/// Outcome of the quasiprobability decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuasiOutcome {
    /// Signed weights over global assignments whose marginals reproduce the
    /// table exactly. When a non-negative realization exists it is returned
    /// here unchanged.
    Decomposition(SignedWeights<Assignment>),
    NotNoSignalling(SignallingWitness),
}

impl EmpiricalModel {
    pub fn new(
        scenario: MeasurementScenario,
        preparations: Vec<String>,
        tables: BTreeMap<(String, Context), Distribution<Assignment>>,
    ) -> Result<Self, EmpiricalError> {
        let mut preparations = preparations;
        preparations.sort();
        preparations.dedup();
        if preparations.is_empty() {
            return Err(EmpiricalError::NoPreparations);
        }
        let outcomes: Vec<&String> = scenario.outcomes().iter().collect();
        for prep in &preparations {
            for context in scenario.contexts() {
                let key = (prep.clone(), context.clone());
                let table = tables.get(&key).ok_or_else(|| EmpiricalError::MissingTable {
                    prep: prep.clone(),
                    context: context.clone(),
                })?;
                for (assignment, _) in table.iter() {
                    if &assignment.domain() != context {
                        return Err(EmpiricalError::TableDomainMismatch {
                            prep: prep.clone(),
                            context: context.clone(),
                            assignment: assignment.clone(),
                        });
                    }
                    if assignment.iter().any(|(_, o)| !outcomes.contains(&o)) {
                        return Err(EmpiricalError::UnknownOutcome {
                            prep: prep.clone(),
                            context: context.clone(),
                            assignment: assignment.clone(),
                        });
                    }
                }
            }
        }
        if tables.len() != preparations.len() * scenario.contexts().len() {
            let stray = tables
                .keys()
                .find(|(p, c)| {
                    preparations.binary_search(p).is_err() || !scenario.contexts().contains(c)
                })
                .expect("length mismatch implies a stray key");
            return Err(EmpiricalError::StrayEntry(format!("{}|{}", stray.0, stray.1)));
        }
        Ok(EmpiricalModel {
            scenario,
            preparations,
            tables,
        })
    }

    /// The operational tables of an ontological model.
    pub fn from_ontological(model: &OntologicalModel) -> Self {
        let mut tables = BTreeMap::new();
        for prep in model.preparations() {
            for context in model.scenario().contexts() {
                let table = model
                    .operational(prep, context)
                    .expect("model provides every (preparation, context) pair");
                tables.insert((prep.clone(), context.clone()), table);
            }
        }
        EmpiricalModel {
            scenario: model.scenario().clone(),
            preparations: model.preparations().to_vec(),
            tables,
        }
    }

    /// The PR box on the (2,2,2) scenario: `a xor b = i*j` with probability
    /// one, uniformly split between the two satisfying joint outcomes.
    pub fn pr_box() -> Self {
        let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
        let half = Rational::new(1, 2);
        let mut tables = BTreeMap::new();
        for context in scenario.contexts() {
            let (a, b) = party_pair(context);
            let anticorrelate = a.ends_with('1') && b.ends_with('1');
            let entries: Vec<(Assignment, Rational)> = scenario
                .assignments(context)
                .unwrap()
                .filter(|assignment| {
                    let xor = assignment.value(&a) != assignment.value(&b);
                    xor == anticorrelate
                })
                .map(|assignment| (assignment, half.clone()))
                .collect();
            tables.insert(
                ("pr".to_string(), context.clone()),
                Distribution::new(entries).unwrap(),
            );
        }
        EmpiricalModel {
            scenario,
            preparations: vec!["pr".to_string()],
            tables,
        }
    }

    /// `v * PR + (1 - v) * uniform` on the (2,2,2) scenario.
    pub fn noisy_pr_box(visibility: &Rational) -> Result<Self, EmpiricalError> {
        if visibility.is_negative() || *visibility > Rational::one() {
            return Err(EmpiricalError::VisibilityOutOfRange(visibility.clone()));
        }
        let pr = Self::pr_box();
        let complement = Rational::one() - visibility;
        let mut tables = BTreeMap::new();
        for context in pr.scenario.contexts() {
            let uniform =
                Distribution::uniform(pr.scenario.assignments(context).unwrap()).unwrap();
            let noisy = Distribution::mixture(&[
                (visibility.clone(), pr.tables[&("pr".to_string(), context.clone())].clone()),
                (complement.clone(), uniform),
            ])
            .unwrap();
            tables.insert(("pr".to_string(), context.clone()), noisy);
        }
        Ok(EmpiricalModel {
            scenario: pr.scenario,
            preparations: pr.preparations,
            tables,
        })
    }

    /// A (2,2,2) table with uniform single-measurement marginals and the
    /// given correlators: `p(o|a_i,b_j) = (1 + s * E[i][j]) / 4` where `s`
    /// is +1 on equal outcomes and -1 otherwise. Exactly no-signalling by
    /// construction for any correlators in `[-1, 1]`.
    pub fn from_correlators(correlators: &[[Rational; 2]; 2]) -> Result<Self, EmpiricalError> {
        for row in correlators {
            for e in row {
                if e.abs() > Rational::one() {
                    return Err(EmpiricalError::CorrelatorOutOfRange(e.clone()));
                }
            }
        }
        let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
        let quarter = Rational::new(1, 4);
        let mut tables = BTreeMap::new();
        for context in scenario.contexts() {
            let (a, b) = party_pair(context);
            let i = a.trim_start_matches('a').parse::<usize>().unwrap();
            let j = b.trim_start_matches('b').parse::<usize>().unwrap();
            let e = &correlators[i][j];
            let entries: Vec<(Assignment, Rational)> = scenario
                .assignments(context)
                .unwrap()
                .map(|assignment| {
                    let equal = assignment.value(&a) == assignment.value(&b);
                    let signed = if equal { e.clone() } else { -e };
                    let weight = &quarter * (Rational::one() + signed);
                    (assignment, weight)
                })
                .collect();
            tables.insert(
                ("quantum".to_string(), context.clone()),
                Distribution::new(entries).unwrap(),
            );
        }
        Ok(EmpiricalModel {
            scenario,
            preparations: vec!["quantum".to_string()],
            tables,
        })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn preparations(&self) -> &[String] {
        &self.preparations
    }

    pub fn table(
        &self,
        prep: &str,
        context: &Context,
    ) -> Result<&Distribution<Assignment>, EmpiricalError> {
        if !self.preparations.iter().any(|p| p == prep) {
            return Err(EmpiricalError::UnknownPreparation(prep.to_string()));
        }
        self.tables
            .get(&(prep.to_string(), context.clone()))
            .ok_or_else(|| EmpiricalError::UnknownContext(context.clone()))
    }

    /// Marginal of the table at `(prep, context)` onto a sub-context.
    pub fn marginal(
        &self,
        prep: &str,
        context: &Context,
        onto: &Context,
    ) -> Result<Distribution<Assignment>, EmpiricalError> {
        let table = self.table(prep, context)?;
        if !onto.is_subset(context) {
            return Err(EmpiricalError::UnknownContext(onto.clone()));
        }
        Ok(table.map(|a| a.restrict(onto).expect("onto is a subset of the domain")))
    }

    /// Marginals on every shared subset of every pair of contexts agree,
    /// for every preparation.
    pub fn no_signalling(&self) -> NoSignalling {
        for prep in &self.preparations {
            let verdict = self
                .no_signalling_at(prep)
                .expect("preparations of the model are known");
            if let NoSignalling::Violated(w) = verdict {
                return NoSignalling::Violated(w);
            }
        }
        NoSignalling::Holds
    }

    /// The no-signalling check restricted to one preparation.
    pub fn no_signalling_at(&self, prep: &str) -> Result<NoSignalling, EmpiricalError> {
        if !self.preparations.iter().any(|p| p == prep) {
            return Err(EmpiricalError::UnknownPreparation(prep.to_string()));
        }
        let contexts = self.scenario.contexts();
        for (i, ctx_a) in contexts.iter().enumerate() {
            for ctx_b in &contexts[i + 1..] {
                let overlap = ctx_a.intersection(ctx_b);
                if overlap.is_empty() {
                    continue;
                }
                let ma = self
                    .marginal(prep, ctx_a, &overlap)
                    .expect("overlap is a subset of both contexts");
                let mb = self
                    .marginal(prep, ctx_b, &overlap)
                    .expect("overlap is a subset of both contexts");
                if !ma.same_measure(&mb) {
                    return Ok(NoSignalling::Violated(SignallingWitness {
                        preparation: prep.to_string(),
                        overlap,
                        context_a: ctx_a.clone(),
                        context_b: ctx_b.clone(),
                    }));
                }
            }
        }
        Ok(NoSignalling::Holds)
    }

    /// Enumerates the global assignments, guarding against blow-up.
    fn global_assignments(&self, limit: u128) -> Result<Vec<Assignment>, EmpiricalError> {
        let global = self.scenario.global_context();
        let count = self.scenario.assignment_count(&global);
        if count > limit {
            return Err(EmpiricalError::TooManyGlobalAssignments { count, limit });
        }
        Ok(self.scenario.event_sheaf(&global).expect("X is a subset of itself"))
    }

    /// The marginal-constraint system `A d = b` over global assignments for
    /// one preparation: one row per (context, joint outcome), one column per
    /// global assignment, with 1 where the assignment restricts to the
    /// outcome.
    fn marginal_system(
        &self,
        prep: &str,
        globals: &[Assignment],
    ) -> (FeasibilitySystem, Vec<(Context, Assignment)>) {
        let mut row_keys = Vec::new();
        let mut row_index: BTreeMap<(Context, Assignment), usize> = BTreeMap::new();
        let mut rows = Vec::new();
        for context in self.scenario.contexts() {
            let table = &self.tables[&(prep.to_string(), context.clone())];
            for assignment in self.scenario.assignments(context).expect("cover context") {
                let rhs = table.weight(&assignment);
                let key = (context.clone(), assignment);
                row_index.insert(key.clone(), rows.len());
                row_keys.push(key);
                rows.push(Row {
                    coefficients: Vec::new(),
                    rhs,
                });
            }
        }
        for (col, omega) in globals.iter().enumerate() {
            for context in self.scenario.contexts() {
                let restricted = omega.restrict(context).expect("context is a subset of X");
                let idx = row_index[&(context.clone(), restricted)];
                rows[idx].coefficients.push((col, Rational::one()));
            }
        }
        (
            FeasibilitySystem {
                columns: globals.len(),
                rows,
            },
            row_keys,
        )
    }

    /// Decides exactly whether non-negative weights over global assignments
    /// reproduce the table for `prep`. Uses the default assignment limit.
    pub fn local_realizability(&self, prep: &str) -> Result<LocalRealizability, EmpiricalError> {
        self.local_realizability_with_limit(prep, DEFAULT_MAX_GLOBAL_ASSIGNMENTS)
    }

    pub fn local_realizability_with_limit(
        &self,
        prep: &str,
        limit: u128,
    ) -> Result<LocalRealizability, EmpiricalError> {
        if !self.preparations.iter().any(|p| p == prep) {
            return Err(EmpiricalError::UnknownPreparation(prep.to_string()));
        }
        let globals = self.global_assignments(limit)?;
        let (system, row_keys) = self.marginal_system(prep, &globals);
        match lp::phase_one(&system) {
            PhaseOneOutcome::Feasible(solution) => {
                let weights = Distribution::new(
                    globals
                        .iter()
                        .zip(&solution)
                        .filter(|(_, w)| w.is_positive())
                        .map(|(omega, w)| (omega.clone(), w.clone())),
                )
                .expect("LP solutions are normalized by the context constraints");
                let realization = LocalRealization {
                    preparation: prep.to_string(),
                    weights,
                };
                assert!(
                    self.realizes(prep, &realization.weights),
                    "LP produced weights that fail to re-marginalize to the table"
                );
                Ok(LocalRealizability::Feasible(realization))
            }
            PhaseOneOutcome::Infeasible(cert) => {
                let coefficients: BTreeMap<(Context, Assignment), Rational> = row_keys
                    .into_iter()
                    .zip(cert)
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                let mut certificate = InfeasibilityCertificate {
                    preparation: prep.to_string(),
                    coefficients,
                    table_pairing: Rational::zero(),
                };
                certificate.table_pairing = self.certificate_table_pairing(prep, &certificate);
                certificate
                    .verify(self)
                    .expect("phase-one certificates satisfy the Farkas conditions");
                Ok(LocalRealizability::Infeasible(certificate))
            }
        }
    }

    /// Exact re-marginalization check of a candidate realization.
    pub fn realizes(&self, prep: &str, weights: &Distribution<Assignment>) -> bool {
        self.scenario.contexts().iter().all(|context| {
            let marginal = weights.map(|omega| {
                omega.restrict(context).expect("weights live on global assignments")
            });
            marginal.same_measure(&self.tables[&(prep.to_string(), context.clone())])
        })
    }

    fn certificate_table_pairing(
        &self,
        prep: &str,
        certificate: &InfeasibilityCertificate,
    ) -> Rational {
        certificate
            .coefficients
            .iter()
            .map(|((context, assignment), c)| {
                c * &self.tables[&(prep.to_string(), context.clone())].weight(assignment)
            })
            .sum()
    }

    /// Signed weights over global assignments reproducing the table for
    /// `prep`, when the table is no-signalling there; prefers a non-negative
    /// realization when one exists. The signed solution is the one produced
    /// by first-index pivoting and is not unique in general.
    pub fn quasi_decomposition(&self, prep: &str) -> Result<QuasiOutcome, EmpiricalError> {
        self.quasi_decomposition_with_limit(prep, DEFAULT_MAX_GLOBAL_ASSIGNMENTS)
    }

    pub fn quasi_decomposition_with_limit(
        &self,
        prep: &str,
        limit: u128,
    ) -> Result<QuasiOutcome, EmpiricalError> {
        if !self.preparations.iter().any(|p| p == prep) {
            return Err(EmpiricalError::UnknownPreparation(prep.to_string()));
        }
        if let NoSignalling::Violated(witness) = self.no_signalling_at(prep)? {
            return Ok(QuasiOutcome::NotNoSignalling(witness));
        }
        match self.local_realizability_with_limit(prep, limit)? {
            LocalRealizability::Feasible(realization) => {
                Ok(QuasiOutcome::Decomposition(realization.weights.into()))
            }
            LocalRealizability::Infeasible(_) => {
                let globals = self.global_assignments(limit)?;
                let (system, _) = self.marginal_system(prep, &globals);
                let solution =
                    lp::solve_exact(&system).ok_or(EmpiricalError::SignedSystemInconsistent)?;
                let weights = SignedWeights::new(
                    globals
                        .iter()
                        .zip(&solution)
                        .filter(|(_, w)| !w.is_zero())
                        .map(|(omega, w)| (omega.clone(), w.clone())),
                )
                .expect("signed solutions are normalized by the context constraints");
                for context in self.scenario.contexts() {
                    let marginal = weights
                        .map(|omega| omega.restrict(context).expect("global assignment"));
                    let table = &self.tables[&(prep.to_string(), context.clone())];
                    for assignment in self.scenario.assignments(context).expect("cover context") {
                        assert_eq!(
                            marginal.weight(&assignment),
                            table.weight(&assignment),
                            "signed decomposition failed to re-marginalize exactly"
                        );
                    }
                }
                Ok(QuasiOutcome::Decomposition(weights))
            }
        }
    }
}

impl InfeasibilityCertificate {
    /// Asserts certificate soundness against the model it separates:
    /// strictly negative pairing with the table, non-negative pairing with
    /// every deterministic global assignment.
    pub fn verify(&self, model: &EmpiricalModel) -> Result<(), CertificateError> {
        let table_pairing = model.certificate_table_pairing(&self.preparation, self);
        if !table_pairing.is_negative() {
            return Err(CertificateError::TablePairingNotNegative(table_pairing));
        }
        let global = model.scenario.global_context();
        for omega in model
            .scenario
            .assignments(&global)
            .expect("X is a subset of itself")
        {
            let pairing: Rational = self
                .coefficients
                .iter()
                .filter(|((context, assignment), _)| {
                    omega.restrict(context).expect("context is a subset of X") == *assignment
                })
                .map(|(_, c)| c)
                .sum();
            if pairing.is_negative() {
                return Err(CertificateError::NegativeOnDeterministic(omega));
            }
        }
        Ok(())
    }
}

fn party_pair(context: &Context) -> (String, String) {
    let mut iter = context.iter();
    let a = iter.next().expect("Bell contexts have two measurements").clone();
    let b = iter.next().expect("Bell contexts have two measurements").clone();
    (a, b)
}
