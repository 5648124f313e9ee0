//! Finite measurement scenarios and preparation scenarios.
//!
//! A measurement scenario fixes a set of measurements, a shared outcome set,
//! and a compatibility cover of contexts (sets of jointly performable
//! measurements). Joint outcomes are [`Assignment`]s, functions from a
//! measurement set to outcomes; enumeration order is stable across runs,
//! which downstream LP code relies on for reproducible variable ordering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("label {0:?} contains a reserved character (one of ',' ':' '|') or is empty")]
    BadLabel(String),
    #[error("scenario has no measurements")]
    NoMeasurements,
    #[error("scenario has no outcomes")]
    NoOutcomes,
    #[error("context {0} is empty")]
    EmptyContext(usize),
    #[error("context contains unknown measurement {0:?}")]
    UnknownMeasurement(String),
    #[error("measurement {0:?} appears in no context")]
    UnreachableMeasurement(String),
    #[error("measurement set {0} is not a subset of the scenario's measurements")]
    NotASubset(Context),
    #[error("Bell scenario arguments must all be at least 1")]
    BellZeroArgument,
    #[error("Bell scenarios with more than 26 parties are not supported")]
    BellTooManyParties,
    #[error("preparation scenario has no sites")]
    NoSites,
    #[error("site {0:?} has no preparations")]
    NoPreparations(String),
    #[error("preparation context {index} selects {got} preparations for {want} sites")]
    ContextArity { index: usize, got: usize, want: usize },
    #[error("preparation context {index} selects unknown preparation {prep:?} for site {site:?}")]
    UnknownPreparation { index: usize, site: String, prep: String },
    #[error("preparation scenario has no preparation contexts")]
    NoPrepContexts,
}

fn check_label(label: &str) -> Result<(), ScenarioError> {
    if label.is_empty() || label.contains([',', ':', '|']) {
        return Err(ScenarioError::BadLabel(label.to_string()));
    }
    Ok(())
}

fn check_unique<'a, I: IntoIterator<Item = &'a String>>(labels: I) -> Result<(), ScenarioError> {
    let mut seen = BTreeSet::new();
    for l in labels {
        check_label(l)?;
        if !seen.insert(l) {
            return Err(ScenarioError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// A set of jointly performable measurements. Serializes as the
/// comma-joined, lexicographically sorted label list, e.g. `"a0,b0"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context(BTreeSet<String>);

impl Context {
    pub fn new<I, T>(measurements: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        Context(measurements.into_iter().map(Into::into).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, m: &str) -> bool {
        self.0.contains(m)
    }

    pub fn is_subset(&self, other: &Context) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersection(&self, other: &Context) -> Context {
        Context(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.0.iter()
    }

    pub fn singleton(m: &str) -> Context {
        Context::new([m])
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for m in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Context {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(Context(BTreeSet::new()));
        }
        let mut set = BTreeSet::new();
        for part in s.split(',') {
            check_label(part)?;
            set.insert(part.to_string());
        }
        Ok(Context(set))
    }
}

impl Serialize for Context {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Context {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A joint outcome: a total function from a measurement set to outcomes.
/// Serializes as `"m1:o1,m2:o2"` with measurements sorted lexicographically.
///
/// The same structure serves as a joint ontic state in preparation
/// scenarios, mapping sites to ontic states.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Assignment(pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }

    pub fn empty() -> Self {
        Assignment(BTreeMap::new())
    }

    /// The measurement set this assignment is defined on.
    pub fn domain(&self) -> Context {
        Context(self.0.keys().cloned().collect())
    }

    pub fn value(&self, m: &str) -> Option<&str> {
        self.0.get(m).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.0.iter()
    }

    /// The restriction to a subset of the domain; the sheaf structure map.
    pub fn restrict(&self, to: &Context) -> Result<Assignment, ScenarioError> {
        if !to.is_subset(&self.domain()) {
            return Err(ScenarioError::NotASubset(to.clone()));
        }
        Ok(Assignment(
            to.iter()
                .map(|m| (m.clone(), self.0[m].clone()))
                .collect(),
        ))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, o) in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{m}:{o}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(Assignment::empty());
        }
        let mut map = BTreeMap::new();
        for part in s.split(',') {
            let (m, o) = part
                .split_once(':')
                .ok_or_else(|| ScenarioError::BadLabel(part.to_string()))?;
            check_label(m)?;
            check_label(o)?;
            if map.insert(m.to_string(), o.to_string()).is_some() {
                return Err(ScenarioError::DuplicateLabel(m.to_string()));
            }
        }
        Ok(Assignment(map))
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite measurement scenario: measurements, a shared outcome set, and a
/// cover of compatibility contexts.
///
/// Labels are canonicalized to sorted order at construction, so enumeration
/// order depends only on the scenario's value, never on input order. The
/// supplied cover need not be downward-closed; marginalization to arbitrary
/// sub-contexts is always available through [`Assignment::restrict`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementScenario {
    measurements: Vec<String>,
    outcomes: Vec<String>,
    contexts: Vec<Context>,
}

impl MeasurementScenario {
    pub fn new<M, O, C>(measurements: M, outcomes: O, contexts: C) -> Result<Self, ScenarioError>
    where
        M: IntoIterator<Item = String>,
        O: IntoIterator<Item = String>,
        C: IntoIterator<Item = Context>,
    {
        let mut measurements: Vec<String> = measurements.into_iter().collect();
        let mut outcomes: Vec<String> = outcomes.into_iter().collect();
        check_unique(&measurements)?;
        check_unique(&outcomes)?;
        measurements.sort();
        outcomes.sort();
        if measurements.is_empty() {
            return Err(ScenarioError::NoMeasurements);
        }
        if outcomes.is_empty() {
            return Err(ScenarioError::NoOutcomes);
        }

        let mut contexts: Vec<Context> = contexts.into_iter().collect();
        contexts.sort();
        contexts.dedup();
        let measurement_set: BTreeSet<&String> = measurements.iter().collect();
        let mut covered: BTreeSet<&String> = BTreeSet::new();
        for (i, ctx) in contexts.iter().enumerate() {
            if ctx.is_empty() {
                return Err(ScenarioError::EmptyContext(i));
            }
            for m in ctx.iter() {
                if !measurement_set.contains(m) {
                    return Err(ScenarioError::UnknownMeasurement(m.clone()));
                }
            }
        }
        for ctx in &contexts {
            covered.extend(ctx.iter());
        }
        for m in &measurements {
            if !covered.contains(m) {
                return Err(ScenarioError::UnreachableMeasurement(m.clone()));
            }
        }
        Ok(MeasurementScenario {
            measurements,
            outcomes,
            contexts,
        })
    }

    /// The `(n, k, l)` Bell scenario: `n` parties, `k` settings per party,
    /// `l` outcomes. Measurements are labelled `a0..`, `b0..` per party and
    /// the cover consists of the `k^n` one-setting-per-party contexts.
    pub fn bell(parties: usize, settings: usize, outcomes: usize) -> Result<Self, ScenarioError> {
        if parties == 0 || settings == 0 || outcomes == 0 {
            return Err(ScenarioError::BellZeroArgument);
        }
        if parties > 26 {
            return Err(ScenarioError::BellTooManyParties);
        }
        let party_label = |p: usize| char::from(b'a' + p as u8);
        let mut measurements = Vec::new();
        for p in 0..parties {
            for s in 0..settings {
                measurements.push(format!("{}{}", party_label(p), s));
            }
        }
        let outcome_labels: Vec<String> = (0..outcomes).map(|o| o.to_string()).collect();

        let mut contexts = Vec::new();
        let mut choice = vec![0usize; parties];
        loop {
            contexts.push(Context::new(
                (0..parties).map(|p| format!("{}{}", party_label(p), choice[p])),
            ));
            // odometer over per-party settings
            let mut p = parties;
            loop {
                if p == 0 {
                    break;
                }
                p -= 1;
                choice[p] += 1;
                if choice[p] < settings {
                    break;
                }
                choice[p] = 0;
            }
            if choice.iter().all(|&c| c == 0) {
                break;
            }
        }
        MeasurementScenario::new(measurements, outcome_labels, contexts)
    }

    pub fn measurements(&self) -> &[String] {
        &self.measurements
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn has_measurement(&self, m: &str) -> bool {
        self.measurements.binary_search_by(|x| x.as_str().cmp(m)).is_ok()
    }

    /// Contexts of the cover containing measurement `m`.
    pub fn contexts_containing<'a>(&'a self, m: &'a str) -> impl Iterator<Item = &'a Context> {
        self.contexts.iter().filter(move |c| c.contains(m))
    }

    /// The set of all measurements, as a context.
    pub fn global_context(&self) -> Context {
        Context::new(self.measurements.iter().cloned())
    }

    /// `|O|^|C|`, saturating at `u128::MAX`.
    pub fn assignment_count(&self, ctx: &Context) -> u128 {
        let base = self.outcomes.len() as u128;
        let mut count: u128 = 1;
        for _ in 0..ctx.len() {
            count = count.saturating_mul(base);
        }
        count
    }

    /// Streams the event sheaf at `C`: all `|O|^|C|` assignments `C -> O` in
    /// lexicographic order (measurements sorted, outcomes in sorted order,
    /// last measurement varying fastest).
    pub fn assignments<'a>(&'a self, ctx: &Context) -> Result<AssignmentIter<'a>, ScenarioError> {
        if !ctx.iter().all(|m| self.has_measurement(m)) {
            return Err(ScenarioError::NotASubset(ctx.clone()));
        }
        Ok(AssignmentIter {
            measurements: ctx.iter().cloned().collect(),
            outcomes: &self.outcomes,
            odometer: vec![0; ctx.len()],
            done: false,
        })
    }

    /// The event sheaf at `C`, materialized.
    pub fn event_sheaf(&self, ctx: &Context) -> Result<Vec<Assignment>, ScenarioError> {
        Ok(self.assignments(ctx)?.collect())
    }
}

/// Lexicographic odometer over assignments `C -> O`.
pub struct AssignmentIter<'a> {
    measurements: Vec<String>,
    outcomes: &'a [String],
    odometer: Vec<usize>,
    done: bool,
}

impl Iterator for AssignmentIter<'_> {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        if self.done {
            return None;
        }
        let current = Assignment(
            self.measurements
                .iter()
                .zip(&self.odometer)
                .map(|(m, &o)| (m.clone(), self.outcomes[o].clone()))
                .collect(),
        );
        // advance; the empty assignment is yielded exactly once
        let mut i = self.odometer.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.odometer[i] += 1;
            if self.odometer[i] < self.outcomes.len() {
                break;
            }
            self.odometer[i] = 0;
        }
        Some(current)
    }
}

/// One preparation choice per site, aligned with the scenario's site order.
/// Serializes as the comma-joined preparation labels, e.g. `"p0,q1"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrepContext(Vec<String>);

impl PrepContext {
    pub fn new<I, T>(preps: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        PrepContext(preps.into_iter().map(Into::into).collect())
    }

    pub fn choices(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for PrepContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join(","))
    }
}

impl FromStr for PrepContext {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<String> = s.split(',').map(str::to_string).collect();
        for p in &parts {
            check_label(p)?;
        }
        Ok(PrepContext(parts))
    }
}

impl Serialize for PrepContext {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PrepContext {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The dual of a measurement scenario: sites with per-site preparations,
/// preparation contexts choosing one preparation per site, and a shared
/// per-site ontic state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparationScenario {
    sites: Vec<String>,
    preparations: BTreeMap<String, Vec<String>>,
    lambda: Vec<String>,
    contexts: Vec<PrepContext>,
}

impl PreparationScenario {
    pub fn new(
        sites: Vec<String>,
        preparations: BTreeMap<String, Vec<String>>,
        lambda: Vec<String>,
        contexts: Vec<PrepContext>,
    ) -> Result<Self, ScenarioError> {
        check_unique(&sites)?;
        if sites.is_empty() {
            return Err(ScenarioError::NoSites);
        }
        let mut lambda = lambda;
        check_unique(&lambda)?;
        lambda.sort();
        if lambda.is_empty() {
            return Err(ScenarioError::NoOutcomes);
        }
        let mut preparations = preparations;
        for site in &sites {
            let preps = preparations
                .get_mut(site)
                .ok_or_else(|| ScenarioError::NoPreparations(site.clone()))?;
            check_unique(preps.iter())?;
            preps.sort();
            if preps.is_empty() {
                return Err(ScenarioError::NoPreparations(site.clone()));
            }
        }
        preparations.retain(|site, _| sites.contains(site));
        let mut contexts = contexts;
        contexts.sort();
        contexts.dedup();
        if contexts.is_empty() {
            return Err(ScenarioError::NoPrepContexts);
        }
        for (i, ctx) in contexts.iter().enumerate() {
            if ctx.len() != sites.len() {
                return Err(ScenarioError::ContextArity {
                    index: i,
                    got: ctx.len(),
                    want: sites.len(),
                });
            }
            for (site, prep) in sites.iter().zip(ctx.choices()) {
                if !preparations[site].contains(prep) {
                    return Err(ScenarioError::UnknownPreparation {
                        index: i,
                        site: site.clone(),
                        prep: prep.clone(),
                    });
                }
            }
        }
        Ok(PreparationScenario {
            sites,
            preparations,
            lambda,
            contexts,
        })
    }

    pub fn sites(&self) -> &[String] {
        &self.sites
    }

    pub fn site_preparations(&self, site: &str) -> &[String] {
        &self.preparations[site]
    }

    pub fn preparations(&self) -> &BTreeMap<String, Vec<String>> {
        &self.preparations
    }

    pub fn lambda(&self) -> &[String] {
        &self.lambda
    }

    pub fn contexts(&self) -> &[PrepContext] {
        &self.contexts
    }

    /// The preparation chosen at `site` by `ctx`.
    pub fn choice<'a>(&self, ctx: &'a PrepContext, site: &str) -> Option<&'a String> {
        self.sites
            .iter()
            .position(|s| s == site)
            .and_then(|i| ctx.choices().get(i))
    }

    /// All joint ontic states `sites -> lambda`, in lexicographic order.
    pub fn joint_states(&self) -> Vec<Assignment> {
        let mut states = vec![Assignment::empty()];
        for site in &self.sites {
            let mut next = Vec::with_capacity(states.len() * self.lambda.len());
            for st in &states {
                for l in &self.lambda {
                    let mut map = st.0.clone();
                    map.insert(site.clone(), l.clone());
                    next.push(Assignment(map));
                }
            }
            states = next;
        }
        states
    }
}
