//! Minimal finite-dimensional quantum backend: pure states, projective
//! measurements, the Born rule, psi-complete model construction, and the
//! steering ensembles of the two-qubit maximally entangled state.
//!
//! This is the only module that touches floating point. Amplitudes are
//! complex doubles with tolerance [`EPSILON`]; Born probabilities are
//! rationalized by continued-fraction approximation with denominators up to
//! [`MAX_DENOMINATOR`] and renormalized exactly before they enter the exact
//! core. For the built-in states (`ket0`, `ket1`, `ketplus`, `ketminus`,
//! `phi_plus`) every probability is exactly representable (0, 1/4, 1/2, 1)
//! and rationalization is lossless.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::numeric::{Distribution, Rational};
use crate::ontology::{Classification, MarginalDisagreement, ModelError, OntologicalModel};
use crate::scenario::{Assignment, Context, MeasurementScenario};

/// Tolerance for all floating-point checks (normalization, orthogonality,
/// density-matrix equality).
pub const EPSILON: f64 = 1e-9;

/// Denominator bound for rationalizing Born probabilities.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("state dimension {0} is unsupported (expected 2, 3 or 4)")]
    BadDimension(usize),
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("eigenvectors {0} and {1} are not orthogonal")]
    NotOrthogonal(usize, usize),
    #[error("measurement {label:?} has {got} eigenvectors for dimension {dim}")]
    IncompleteBasis { label: String, got: usize, dim: usize },
    #[error("dimension mismatch: state has {state}, measurement has {measurement}")]
    DimensionMismatch { state: usize, measurement: usize },
    #[error("Born probabilities sum to {0}, outside tolerance of 1; refusing to rationalize")]
    NonNormalizableRounding(f64),
    #[error("probability {0} is negative beyond tolerance")]
    NegativeProbability(f64),
    #[error("unknown built-in state {0:?}")]
    UnknownStateName(String),
    #[error("no joint measurement supplied for context {0}")]
    MissingJointMeasurement(Context),
    #[error("joint measurement for context {context} labels an eigenvector with {assignment}, not an assignment of the context")]
    EigenvectorLabelMismatch { context: Context, assignment: Assignment },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A pure state as a complex amplitude vector over a fixed orthonormal
/// basis, dimension 2 to 4.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        if !(2..=4).contains(&amplitudes.len()) {
            return Err(QuantumError::BadDimension(amplitudes.len()));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > EPSILON {
            return Err(QuantumError::NotNormalized(norm_sq));
        }
        Ok(PureState { amplitudes })
    }

    pub fn from_reals(amplitudes: &[f64]) -> Result<Self, QuantumError> {
        Self::new(amplitudes.iter().map(|&re| Complex64::new(re, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn ket0() -> Self {
        Self::from_reals(&[1.0, 0.0]).unwrap()
    }

    pub fn ket1() -> Self {
        Self::from_reals(&[0.0, 1.0]).unwrap()
    }

    pub fn ket_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_reals(&[h, h]).unwrap()
    }

    pub fn ket_minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_reals(&[h, -h]).unwrap()
    }

    /// The two-qubit maximally entangled state `(|00> + |11>) / sqrt(2)`.
    pub fn phi_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_reals(&[h, 0.0, 0.0, h]).unwrap()
    }

    /// Built-in states by name: `ket0`, `ket1`, `ketplus`, `ketminus`,
    /// `phi_plus`.
    pub fn by_name(name: &str) -> Result<Self, QuantumError> {
        match name {
            "ket0" => Ok(Self::ket0()),
            "ket1" => Ok(Self::ket1()),
            "ketplus" => Ok(Self::ket_plus()),
            "ketminus" => Ok(Self::ket_minus()),
            "phi_plus" => Ok(Self::phi_plus()),
            other => Err(QuantumError::UnknownStateName(other.to_string())),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Kronecker product, first factor major.
    pub fn tensor(&self, other: &PureState) -> Result<PureState, QuantumError> {
        let dim = self.dim() * other.dim();
        if dim > 4 {
            return Err(QuantumError::BadDimension(dim));
        }
        let mut amplitudes = Vec::with_capacity(dim);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PureState::new(amplitudes)
    }

    /// The density matrix `|psi><psi|`.
    pub fn density(&self) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        let mut rho = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            for (j, b) in self.amplitudes.iter().enumerate() {
                rho[i][j] = a * b.conj();
            }
        }
        rho
    }
}

/// A projective measurement: a complete orthonormal eigenbasis with an
/// outcome label per eigenvector. Repeated labels model degenerate
/// outcomes, whose probabilities add.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    label: String,
    eigenvectors: Vec<(String, PureState)>,
}

impl ProjectiveMeasurement {
    pub fn new(
        label: impl Into<String>,
        eigenvectors: Vec<(String, PureState)>,
    ) -> Result<Self, QuantumError> {
        let label = label.into();
        check_orthonormal_basis(&label, eigenvectors.iter().map(|(_, v)| v))?;
        Ok(ProjectiveMeasurement { label, eigenvectors })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eigenvectors(&self) -> &[(String, PureState)] {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors[0].1.dim()
    }

    /// The single-qubit measurement at Bloch angle `theta` in the x-z
    /// plane, outcomes `0` and `1`; `theta = 0` is the computational (Z)
    /// basis and `theta = pi/2` the X basis.
    pub fn qubit_angle(label: impl Into<String>, theta: f64) -> Self {
        let (sin, cos) = (theta / 2.0).sin_cos();
        let v0 = PureState::from_reals(&[cos, sin]).unwrap();
        let v1 = PureState::from_reals(&[-sin, cos]).unwrap();
        ProjectiveMeasurement::new(label, vec![("0".to_string(), v0), ("1".to_string(), v1)])
            .unwrap()
    }
}

fn check_orthonormal_basis<'a>(
    label: &str,
    vectors: impl Iterator<Item = &'a PureState> + Clone,
) -> Result<(), QuantumError> {
    let vs: Vec<&PureState> = vectors.collect();
    let dim = match vs.first() {
        Some(v) => v.dim(),
        None => {
            return Err(QuantumError::IncompleteBasis {
                label: label.to_string(),
                got: 0,
                dim: 0,
            })
        }
    };
    if vs.len() != dim {
        return Err(QuantumError::IncompleteBasis {
            label: label.to_string(),
            got: vs.len(),
            dim,
        });
    }
    for (i, v) in vs.iter().enumerate() {
        if v.dim() != dim {
            return Err(QuantumError::DimensionMismatch {
                state: v.dim(),
                measurement: dim,
            });
        }
        for (j, w) in vs.iter().enumerate().skip(i + 1) {
            if v.inner(w).norm() > EPSILON {
                return Err(QuantumError::NotOrthogonal(i, j));
            }
        }
    }
    Ok(())
}

/// A joint projective measurement for a context: eigenvectors labelled by
/// joint-outcome assignments on that context.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasurement {
    context: Context,
    eigenvectors: Vec<(Assignment, PureState)>,
}

impl JointMeasurement {
    pub fn new(
        context: Context,
        eigenvectors: Vec<(Assignment, PureState)>,
    ) -> Result<Self, QuantumError> {
        for (assignment, _) in &eigenvectors {
            if assignment.domain() != context {
                return Err(QuantumError::EigenvectorLabelMismatch {
                    context,
                    assignment: assignment.clone(),
                });
            }
        }
        check_orthonormal_basis(&context.to_string(), eigenvectors.iter().map(|(_, v)| v))?;
        Ok(JointMeasurement { context, eigenvectors })
    }

    /// The tensor product of two single-site measurements, eigenvectors
    /// labelled by the pair of outcomes.
    pub fn product(
        first: (&str, &ProjectiveMeasurement),
        second: (&str, &ProjectiveMeasurement),
    ) -> Result<Self, QuantumError> {
        let context = Context::new([first.0, second.0]);
        let mut eigenvectors = Vec::new();
        for (oa, va) in first.1.eigenvectors() {
            for (ob, vb) in second.1.eigenvectors() {
                let assignment =
                    Assignment::new([(first.0, oa.as_str()), (second.0, ob.as_str())]);
                eigenvectors.push((assignment, va.tensor(vb)?));
            }
        }
        JointMeasurement::new(context, eigenvectors)
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors[0].1.dim()
    }
}

/// Best rational approximation of `x` by continued fractions with
/// denominator at most [`MAX_DENOMINATOR`]. Exact for every probability the
/// built-in states produce.
pub fn rationalize(x: f64) -> Result<Rational, QuantumError> {
    if !x.is_finite() {
        return Err(QuantumError::NonNormalizableRounding(x));
    }
    if x < 0.0 {
        if x > -EPSILON {
            return Ok(Rational::zero());
        }
        return Err(QuantumError::NegativeProbability(x));
    }
    let mut remainder = x;
    let (mut h_prev, mut h) = (1i64, remainder.floor() as i64);
    let (mut k_prev, mut k) = (0i64, 1i64);
    let mut frac = remainder - remainder.floor();
    while frac > 1e-12 {
        remainder = 1.0 / frac;
        let a = remainder.floor();
        if a >= MAX_DENOMINATOR as f64 {
            break;
        }
        let a = a as i64;
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        if k_next > MAX_DENOMINATOR {
            break;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        frac = remainder - remainder.floor();
    }
    Ok(Rational::new(h, k))
}

/// Rationalizes a family of probabilities and renormalizes them exactly to
/// sum 1. The float total must already be 1 within tolerance.
fn rationalize_distribution<S: Ord + Clone + std::fmt::Debug>(
    pairs: Vec<(S, f64)>,
) -> Result<Distribution<S>, QuantumError> {
    let float_total: f64 = pairs.iter().map(|(_, p)| p).sum();
    if (float_total - 1.0).abs() > EPSILON {
        return Err(QuantumError::NonNormalizableRounding(float_total));
    }
    let rationalized: Vec<(S, Rational)> = pairs
        .into_iter()
        .map(|(s, p)| Ok((s, rationalize(p)?)))
        .collect::<Result<_, QuantumError>>()?;
    let total: Rational = rationalized.iter().map(|(_, p)| p).sum();
    if total.is_zero() {
        return Err(QuantumError::NonNormalizableRounding(0.0));
    }
    Ok(Distribution::new(
        rationalized.into_iter().map(|(s, p)| (s, p / &total)),
    )
    .expect("renormalized weights sum to one"))
}

/// Born rule for a single measurement: `p(o) = sum of |<v|psi>|^2` over the
/// eigenvectors labelled `o`, rationalized and exactly renormalized.
pub fn born(state: &PureState, m: &ProjectiveMeasurement) -> Result<Distribution<String>, QuantumError> {
    if state.dim() != m.dim() {
        return Err(QuantumError::DimensionMismatch {
            state: state.dim(),
            measurement: m.dim(),
        });
    }
    let mut probs: BTreeMap<String, f64> = BTreeMap::new();
    for (outcome, v) in m.eigenvectors() {
        *probs.entry(outcome.clone()).or_insert(0.0) += v.inner(state).norm_sqr();
    }
    rationalize_distribution(probs.into_iter().collect())
}

/// Born rule for a joint measurement, as a distribution over assignments.
pub fn born_joint(
    state: &PureState,
    m: &JointMeasurement,
) -> Result<Distribution<Assignment>, QuantumError> {
    if state.dim() != m.dim() {
        return Err(QuantumError::DimensionMismatch {
            state: state.dim(),
            measurement: m.dim(),
        });
    }
    let mut probs: BTreeMap<Assignment, f64> = BTreeMap::new();
    for (assignment, v) in &m.eigenvectors {
        *probs.entry(assignment.clone()).or_insert(0.0) += v.inner(state).norm_sqr();
    }
    rationalize_distribution(probs.into_iter().collect())
}

/// Builds the psi-complete model: the ontic states are the quantum states
/// themselves and every response is the Born rule of the context's joint
/// measurement.
pub fn psi_complete_model(
    states: &[(String, PureState)],
    preparations: BTreeMap<String, Distribution<String>>,
    scenario: &MeasurementScenario,
    measurements: &BTreeMap<Context, JointMeasurement>,
) -> Result<OntologicalModel, QuantumError> {
    let mut responses = BTreeMap::new();
    for context in scenario.contexts() {
        let joint = measurements
            .get(context)
            .ok_or_else(|| QuantumError::MissingJointMeasurement(context.clone()))?;
        for (label, state) in states {
            responses.insert((label.clone(), context.clone()), born_joint(state, joint)?);
        }
    }
    Ok(OntologicalModel::new(
        scenario.clone(),
        preparations.keys().cloned().collect(),
        states.iter().map(|(label, _)| label.clone()).collect(),
        preparations,
        responses,
    )?)
}

/// Classifies the observable property of one measurement of a model, if its
/// marginal is well-defined. For a psi-complete model and any non-trivial
/// measurement this is epistemic as soon as the state family contains a
/// state overlapping two eigenvectors.
pub fn check_observable_epistemicity(
    model: &OntologicalModel,
    measurement: &str,
) -> Result<Result<Classification<String, String>, MarginalDisagreement>, QuantumError> {
    let extraction = model
        .observable_property(measurement)
        .map_err(QuantumError::Model)?;
    Ok(extraction.map(|property| property.classify()))
}

/// The two steering ensembles of the second qubit of `phi_plus`: measuring
/// the first qubit in the computational basis prepares `{ket0, ket1}`, in
/// the `+/-` basis `{ketplus, ketminus}`, each with probability 1/2, and
/// the two ensembles have the same density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringEnsembles {
    pub z_ensemble: Vec<(Rational, String)>,
    pub x_ensemble: Vec<(Rational, String)>,
}

pub fn steering_ensembles() -> SteeringEnsembles {
    let phi = PureState::phi_plus();
    let z = ProjectiveMeasurement::qubit_angle("Z", 0.0);
    let x = ProjectiveMeasurement::qubit_angle("X", std::f64::consts::FRAC_PI_2);

    let build = |basis: &ProjectiveMeasurement, labels: [&str; 2]| -> Vec<(Rational, String)> {
        basis
            .eigenvectors()
            .iter()
            .zip(labels)
            .map(|((_, v), label)| {
                let (prob, remote) = remote_preparation(&phi, v);
                let expected = PureState::by_name(label).expect("built-in label");
                let fidelity = remote.inner(&expected).norm_sqr();
                assert!(
                    (fidelity - 1.0).abs() < EPSILON,
                    "remote state does not match {label}"
                );
                (
                    rationalize(prob).expect("first-qubit Born probabilities are clean"),
                    label.to_string(),
                )
            })
            .collect()
    };
    let z_ensemble = build(&z, ["ket0", "ket1"]);
    let x_ensemble = build(&x, ["ketplus", "ketminus"]);

    // both ensembles reduce to the same density matrix (I/2)
    let rho_z = ensemble_density(&z_ensemble);
    let rho_x = ensemble_density(&x_ensemble);
    for (row_z, row_x) in rho_z.iter().zip(&rho_x) {
        for (a, b) in row_z.iter().zip(row_x) {
            assert!((a - b).norm() < EPSILON, "steering ensembles differ as mixed states");
        }
    }

    SteeringEnsembles { z_ensemble, x_ensemble }
}

/// Projects the first qubit of `joint` onto `vector`; returns the outcome
/// probability and the normalized remote state of the second qubit.
fn remote_preparation(joint: &PureState, vector: &PureState) -> (f64, PureState) {
    assert_eq!(joint.dim(), 4);
    assert_eq!(vector.dim(), 2);
    let amps = joint.amplitudes();
    let v = vector.amplitudes();
    let mut remote = [Complex64::new(0.0, 0.0); 2];
    for j in 0..2 {
        remote[j] = v[0].conj() * amps[j] + v[1].conj() * amps[2 + j];
    }
    let prob: f64 = remote.iter().map(|a| a.norm_sqr()).sum();
    let norm = prob.sqrt();
    let normalized = PureState::new(remote.iter().map(|a| a / norm).collect())
        .expect("projected states are normalized");
    (prob, normalized)
}

fn ensemble_density(ensemble: &[(Rational, String)]) -> Vec<Vec<Complex64>> {
    let dim = 2;
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (coeff, label) in ensemble {
        let state = PureState::by_name(label).expect("built-in label");
        let c = coeff.to_f64();
        for (i, row) in state.density().iter().enumerate() {
            for (j, value) in row.iter().enumerate() {
                rho[i][j] += value * c;
            }
        }
    }
    rho
}

/// The single-qubit psi-complete model over `{ket0, ket1, ketplus,
/// ketminus}` with incompatible Z and X measurements, one delta preparation
/// per state.
pub fn epr_qubit_model() -> OntologicalModel {
    let scenario = MeasurementScenario::new(
        vec!["X".to_string(), "Z".to_string()],
        vec!["0".to_string(), "1".to_string()],
        vec![Context::singleton("X"), Context::singleton("Z")],
    )
    .unwrap();
    let z = ProjectiveMeasurement::qubit_angle("Z", 0.0);
    let x = ProjectiveMeasurement::qubit_angle("X", std::f64::consts::FRAC_PI_2);
    let to_joint = |m: &str, pm: &ProjectiveMeasurement| {
        let eigenvectors = pm
            .eigenvectors()
            .iter()
            .map(|(o, v)| (Assignment::new([(m, o.as_str())]), v.clone()))
            .collect();
        JointMeasurement::new(Context::singleton(m), eigenvectors).unwrap()
    };
    let mut measurements = BTreeMap::new();
    measurements.insert(Context::singleton("Z"), to_joint("Z", &z));
    measurements.insert(Context::singleton("X"), to_joint("X", &x));

    let states: Vec<(String, PureState)> = ["ket0", "ket1", "ketplus", "ketminus"]
        .into_iter()
        .map(|name| (name.to_string(), PureState::by_name(name).unwrap()))
        .collect();
    let preparations: BTreeMap<String, Distribution<String>> = states
        .iter()
        .map(|(label, _)| (format!("prep_{label}"), Distribution::delta(label.clone())))
        .collect();
    psi_complete_model(&states, preparations, &scenario, &measurements)
        .expect("built-in EPR model is well-formed")
}

/// The psi-complete model of the Bell state on the (2,2,2) scenario, with Z
/// and X measurements per site. All Born probabilities are exactly 0, 1/4
/// or 1/2, so the model is exact.
pub fn bell_psi_complete_model() -> OntologicalModel {
    let scenario = MeasurementScenario::bell(2, 2, 2).unwrap();
    let angle = |m: &str| -> f64 {
        if m.ends_with('0') {
            0.0
        } else {
            std::f64::consts::FRAC_PI_2
        }
    };
    let mut measurements = BTreeMap::new();
    for context in scenario.contexts() {
        let labels: Vec<&String> = context.iter().collect();
        let (a, b) = (labels[0].as_str(), labels[1].as_str());
        let ma = ProjectiveMeasurement::qubit_angle(a, angle(a));
        let mb = ProjectiveMeasurement::qubit_angle(b, angle(b));
        measurements.insert(
            context.clone(),
            JointMeasurement::product((a, &ma), (b, &mb)).unwrap(),
        );
    }
    let states = vec![("phi_plus".to_string(), PureState::phi_plus())];
    let mut preparations = BTreeMap::new();
    preparations.insert(
        "bell".to_string(),
        Distribution::delta("phi_plus".to_string()),
    );
    psi_complete_model(&states, preparations, &scenario, &measurements)
        .expect("built-in Bell model is well-formed")
}

/// The four CHSH correlators of `phi_plus` at the maximally violating
/// angles (a0=0, a1=pi/2, b0=pi/4, b1=-pi/4), computed by the Born rule and
/// rationalized. Indexed `[i][j]` for the context `{a_i, b_j}`.
pub fn chsh_correlators() -> [[Rational; 2]; 2] {
    use std::f64::consts::FRAC_PI_4;
    let phi = PureState::phi_plus();
    let a_angles = [0.0, 2.0 * FRAC_PI_4];
    let b_angles = [FRAC_PI_4, -FRAC_PI_4];
    let mut correlators =
        [[Rational::zero(), Rational::zero()], [Rational::zero(), Rational::zero()]];
    for (i, &ta) in a_angles.iter().enumerate() {
        for (j, &tb) in b_angles.iter().enumerate() {
            let a_label = format!("a{i}");
            let b_label = format!("b{j}");
            let ma = ProjectiveMeasurement::qubit_angle(&a_label, ta);
            let mb = ProjectiveMeasurement::qubit_angle(&b_label, tb);
            let joint = JointMeasurement::product((&a_label, &ma), (&b_label, &mb)).unwrap();
            let dist = born_joint(&phi, &joint).expect("dimensions match");
            let mut e = Rational::zero();
            for (assignment, p) in dist.iter() {
                let equal = assignment.value(&a_label) == assignment.value(&b_label);
                if equal {
                    e += p;
                } else {
                    e -= p;
                }
            }
            correlators[i][j] = e;
        }
    }
    correlators
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::Locality;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn rationalize_recovers_clean_fractions() {
        assert_eq!(rationalize(0.5).unwrap(), r(1, 2));
        assert_eq!(rationalize(0.25).unwrap(), r(1, 4));
        assert_eq!(rationalize(1.0).unwrap(), Rational::one());
        assert_eq!(rationalize(0.0).unwrap(), Rational::zero());
        assert_eq!(rationalize(1.0 / 3.0).unwrap(), r(1, 3));
        // slightly perturbed values still land on the nearby fraction
        assert_eq!(rationalize(0.5 + 1e-13).unwrap(), r(1, 2));
        assert_eq!(rationalize(-1e-12).unwrap(), Rational::zero());
        assert!(rationalize(-0.1).is_err());
    }

    #[test]
    fn born_on_plus_in_z_basis_is_even() {
        let z = ProjectiveMeasurement::qubit_angle("Z", 0.0);
        let d = born(&PureState::ket_plus(), &z).unwrap();
        assert_eq!(d.weight(&"0".to_string()), r(1, 2));
        assert_eq!(d.weight(&"1".to_string()), r(1, 2));
    }

    #[test]
    fn born_on_eigenstate_is_delta() {
        let z = ProjectiveMeasurement::qubit_angle("Z", 0.0);
        let d = born(&PureState::ket1(), &z).unwrap();
        assert_eq!(d.as_delta(), Some(&"1".to_string()));
    }

    #[test]
    fn born_joint_on_phi_plus_in_zz_is_correlated() {
        let za = ProjectiveMeasurement::qubit_angle("a0", 0.0);
        let zb = ProjectiveMeasurement::qubit_angle("b0", 0.0);
        let joint = JointMeasurement::product(("a0", &za), ("b0", &zb)).unwrap();
        let d = born_joint(&PureState::phi_plus(), &joint).unwrap();
        assert_eq!(d.weight(&"a0:0,b0:0".parse().unwrap()), r(1, 2));
        assert_eq!(d.weight(&"a0:1,b0:1".parse().unwrap()), r(1, 2));
        assert_eq!(d.weight(&"a0:0,b0:1".parse().unwrap()), Rational::zero());
    }

    #[test]
    fn degenerate_outcome_sums_to_identity() {
        // both eigenvectors share one outcome label: the trivial measurement
        let m = ProjectiveMeasurement::new(
            "trivial",
            vec![
                ("same".to_string(), PureState::ket0()),
                ("same".to_string(), PureState::ket1()),
            ],
        )
        .unwrap();
        let d = born(&PureState::ket_plus(), &m).unwrap();
        assert_eq!(d.as_delta(), Some(&"same".to_string()));
    }

    #[test]
    fn measurement_construction_rejects_bad_bases() {
        assert!(matches!(
            ProjectiveMeasurement::new(
                "bad",
                vec![
                    ("0".to_string(), PureState::ket0()),
                    ("1".to_string(), PureState::ket_plus()),
                ],
            ),
            Err(QuantumError::NotOrthogonal(..))
        ));
        assert!(matches!(
            ProjectiveMeasurement::new("short", vec![("0".to_string(), PureState::ket0())]),
            Err(QuantumError::IncompleteBasis { .. })
        ));
        assert!(PureState::from_reals(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let z = ProjectiveMeasurement::qubit_angle("Z", 0.0);
        assert!(matches!(
            born(&PureState::phi_plus(), &z),
            Err(QuantumError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigenstate_scenario_model_is_local() {
        // states {ket0, ket1} with only the Z measurement: deterministic
        let scenario = MeasurementScenario::new(
            vec!["Z".to_string()],
            vec!["0".to_string(), "1".to_string()],
            vec![Context::singleton("Z")],
        )
        .unwrap();
        let z = ProjectiveMeasurement::qubit_angle("Z", 0.0);
        let eigenvectors = z
            .eigenvectors()
            .iter()
            .map(|(o, v)| (Assignment::new([("Z", o.as_str())]), v.clone()))
            .collect();
        let mut measurements = BTreeMap::new();
        measurements.insert(
            Context::singleton("Z"),
            JointMeasurement::new(Context::singleton("Z"), eigenvectors).unwrap(),
        );
        let states = vec![
            ("ket0".to_string(), PureState::ket0()),
            ("ket1".to_string(), PureState::ket1()),
        ];
        let mut preparations = BTreeMap::new();
        preparations.insert("mix".to_string(), Distribution::uniform(["ket0".to_string(), "ket1".to_string()]).unwrap());
        let model = psi_complete_model(&states, preparations, &scenario, &measurements).unwrap();
        assert!(model.locality().holds());
    }

    #[test]
    fn epr_model_is_stochastic_and_epistemic() {
        let model = epr_qubit_model();
        assert!(!model.determinism().holds());
        assert!(matches!(model.locality(), Locality::NotDeterministic { .. }));
        for m in ["Z", "X"] {
            match check_observable_epistemicity(&model, m).unwrap() {
                Ok(Classification::Epistemic { state, .. }) => {
                    // the witnessing state overlaps both eigenvectors of m
                    let overlapping = if m == "Z" {
                        ["ketplus", "ketminus"]
                    } else {
                        ["ket0", "ket1"]
                    };
                    assert!(overlapping.contains(&state.as_str()));
                }
                other => panic!("expected epistemic classification for {m}, got {other:?}"),
            }
        }
    }

    #[test]
    fn z_over_eigenstates_only_is_ontic() {
        // epistemicity needs a state overlapping two eigenvectors; without
        // one the observable is ontic
        let scenario = MeasurementScenario::new(
            vec!["Z".to_string()],
            vec!["0".to_string(), "1".to_string()],
            vec![Context::singleton("Z")],
        )
        .unwrap();
        let z = ProjectiveMeasurement::qubit_angle("Z", 0.0);
        let eigenvectors = z
            .eigenvectors()
            .iter()
            .map(|(o, v)| (Assignment::new([("Z", o.as_str())]), v.clone()))
            .collect();
        let mut measurements = BTreeMap::new();
        measurements.insert(
            Context::singleton("Z"),
            JointMeasurement::new(Context::singleton("Z"), eigenvectors).unwrap(),
        );
        let states = vec![
            ("ket0".to_string(), PureState::ket0()),
            ("ket1".to_string(), PureState::ket1()),
        ];
        let mut preparations = BTreeMap::new();
        preparations.insert("p".to_string(), Distribution::delta("ket0".to_string()));
        let model = psi_complete_model(&states, preparations, &scenario, &measurements).unwrap();
        match check_observable_epistemicity(&model, "Z").unwrap() {
            Ok(c) => assert!(c.is_ontic()),
            Err(d) => panic!("marginal unexpectedly ill-defined: {d:?}"),
        }
    }

    #[test]
    fn bell_model_reproduces_quantum_tables_and_is_nonlocal() {
        let model = bell_psi_complete_model();
        assert!(matches!(model.locality(), Locality::NotDeterministic { .. }));
        // quantum marginals are context-independent, so extraction succeeds
        assert!(model.observable_properties().is_defined());
        // ZZ context: perfectly correlated; ZX context: uniform
        let zz = Context::new(["a0", "b0"]);
        let t = model.operational("bell", &zz).unwrap();
        assert_eq!(t.weight(&"a0:0,b0:0".parse().unwrap()), r(1, 2));
        let zx = Context::new(["a0", "b1"]);
        let t = model.operational("bell", &zx).unwrap();
        for (_, w) in t.iter() {
            assert_eq!(*w, r(1, 4));
        }
    }

    #[test]
    fn steering_ensembles_are_half_half() {
        let ensembles = steering_ensembles();
        for (c, _) in ensembles.z_ensemble.iter().chain(&ensembles.x_ensemble) {
            assert_eq!(*c, r(1, 2));
        }
        let z_labels: Vec<&str> =
            ensembles.z_ensemble.iter().map(|(_, l)| l.as_str()).collect();
        assert_eq!(z_labels, ["ket0", "ket1"]);
        let x_labels: Vec<&str> =
            ensembles.x_ensemble.iter().map(|(_, l)| l.as_str()).collect();
        assert_eq!(x_labels, ["ketplus", "ketminus"]);
    }

    #[test]
    fn nontrivial_observables_over_overlapping_states_are_epistemic() {
        // random measurement angle plus a state bounded away from both
        // eigenvectors: the observable property must come out epistemic
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let basis_angle = rng.gen_range(0.0..std::f64::consts::PI);
            let offset = rng.gen_range(0.3..std::f64::consts::PI - 0.3);
            let state_angle = basis_angle + offset;
            let overlapping = PureState::from_reals(&[
                (state_angle / 2.0).cos(),
                (state_angle / 2.0).sin(),
            ])
            .unwrap();

            let scenario = MeasurementScenario::new(
                vec!["M".to_string()],
                vec!["0".to_string(), "1".to_string()],
                vec![Context::singleton("M")],
            )
            .unwrap();
            let pm = ProjectiveMeasurement::qubit_angle("M", basis_angle);
            let eigenvectors = pm
                .eigenvectors()
                .iter()
                .map(|(o, v)| (Assignment::new([("M", o.as_str())]), v.clone()))
                .collect();
            let mut measurements = BTreeMap::new();
            measurements.insert(
                Context::singleton("M"),
                JointMeasurement::new(Context::singleton("M"), eigenvectors).unwrap(),
            );
            let states = vec![("psi".to_string(), overlapping)];
            let mut preparations = BTreeMap::new();
            preparations.insert("p".to_string(), Distribution::delta("psi".to_string()));
            let model =
                psi_complete_model(&states, preparations, &scenario, &measurements).unwrap();
            match check_observable_epistemicity(&model, "M").unwrap() {
                Ok(Classification::Epistemic { state, .. }) => assert_eq!(state, "psi"),
                other => panic!(
                    "expected epistemic at basis {basis_angle}, offset {offset}: {other:?}"
                ),
            }
        }
    }

    #[test]
    fn chsh_correlators_violate_the_classical_bound() {
        let e = chsh_correlators();
        let s = &e[0][0] + &e[0][1] + &e[1][0] - &e[1][1];
        // 2*sqrt(2) up to rationalization
        assert!(s > Rational::new(28, 10));
        assert!(s < Rational::new(29, 10));
        for row in &e {
            for value in row {
                assert!(value.abs() <= Rational::one());
            }
        }
    }
}
