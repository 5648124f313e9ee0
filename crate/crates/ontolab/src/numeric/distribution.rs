use std::collections::BTreeMap;
use std::fmt::Debug;

use thiserror::Error;

use super::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistributionError {
    #[error("weight of {element} is negative: {weight}")]
    NegativeWeight { element: String, weight: Rational },
    #[error("weights sum to {sum}, expected exactly 1")]
    NotNormalized { sum: Rational },
    #[error("distribution over the empty set")]
    Empty,
    #[error("duplicate element {element}")]
    DuplicateElement { element: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MixtureError {
    #[error("mixture coefficient is negative: {coefficient}")]
    NegativeCoefficient { coefficient: Rational },
    #[error("mixture coefficients sum to {sum}, expected exactly 1")]
    CoefficientSum { sum: Rational },
    #[error("mixture of zero components")]
    NoComponents,
}

/// A normalized map from a finite set to non-negative rationals.
///
/// Weights sum to exactly 1. Zero-weight entries may be stored but are
/// excluded from the support; all semantics (delta detection, overlap,
/// equality of marginals) are support-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Distribution<S: Ord> {
    weights: BTreeMap<S, Rational>,
}

impl<S: Ord + Clone + Debug> Distribution<S> {
    /// Builds a distribution from `(element, weight)` pairs, rejecting
    /// duplicates, negative weights, and any total other than exactly 1.
    pub fn new<I>(weights: I) -> Result<Self, DistributionError>
    where
        I: IntoIterator<Item = (S, Rational)>,
    {
        let mut map = BTreeMap::new();
        for (s, w) in weights {
            if w.is_negative() {
                return Err(DistributionError::NegativeWeight {
                    element: format!("{s:?}"),
                    weight: w,
                });
            }
            if map.insert(s.clone(), w).is_some() {
                return Err(DistributionError::DuplicateElement {
                    element: format!("{s:?}"),
                });
            }
        }
        if map.is_empty() {
            return Err(DistributionError::Empty);
        }
        let sum: Rational = map.values().sum();
        if !sum.is_one() {
            return Err(DistributionError::NotNormalized { sum });
        }
        Ok(Distribution { weights: map })
    }

    /// The point mass on `s`.
    pub fn delta(s: S) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(s, Rational::one());
        Distribution { weights }
    }

    /// The uniform distribution over the given elements.
    pub fn uniform<I>(elements: I) -> Result<Self, DistributionError>
    where
        I: IntoIterator<Item = S>,
    {
        let elements: Vec<S> = elements.into_iter().collect();
        if elements.is_empty() {
            return Err(DistributionError::Empty);
        }
        let n = elements.len() as i64;
        let w = Rational::new(1, n);
        Self::new(elements.into_iter().map(|s| (s, w.clone())))
    }

    /// The weight of `s`; zero when `s` is not stored.
    pub fn weight(&self, s: &S) -> Rational {
        self.weights.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    /// Stored entries, including any explicit zeros.
    pub fn iter(&self) -> impl Iterator<Item = (&S, &Rational)> {
        self.weights.iter()
    }

    /// Elements with strictly positive weight.
    pub fn support(&self) -> impl Iterator<Item = &S> {
        self.weights
            .iter()
            .filter(|(_, w)| w.is_positive())
            .map(|(s, _)| s)
    }

    pub fn support_size(&self) -> usize {
        self.support().count()
    }

    /// `Some(s)` iff the distribution is a delta function on `s`.
    pub fn as_delta(&self) -> Option<&S> {
        let mut sole = None;
        for (s, w) in &self.weights {
            if w.is_positive() {
                if sole.is_some() {
                    return None;
                }
                sole = Some(s);
            }
        }
        // sum == 1 guarantees the sole positive weight is exactly 1
        sole
    }

    /// Some element in the intersection of the two supports, or `None` when
    /// the supports are disjoint.
    pub fn support_overlap<'a>(&'a self, other: &'a Self) -> Option<&'a S> {
        self.support().find(|s| other.weight(s).is_positive())
    }

    /// Exact equality as probability measures: equal weight on every element
    /// of either support, ignoring stored zeros.
    pub fn same_measure(&self, other: &Self) -> bool {
        self.support().all(|s| self.weight(s) == other.weight(s))
            && other.support().all(|s| self.weight(s) == other.weight(s))
    }

    /// Pushforward along `f`: weights of elements with a common image sum.
    pub fn map<T, F>(&self, f: F) -> Distribution<T>
    where
        T: Ord + Clone + Debug,
        F: Fn(&S) -> T,
    {
        let mut weights: BTreeMap<T, Rational> = BTreeMap::new();
        for (s, w) in &self.weights {
            *weights.entry(f(s)).or_insert_with(Rational::zero) += w;
        }
        Distribution { weights }
    }

    /// Pointwise convex combination. Coefficients must be non-negative and
    /// sum to exactly 1; components with a zero coefficient contribute
    /// nothing, so the support of the result is the union of the supports of
    /// the components with positive coefficient.
    pub fn mixture(components: &[(Rational, Distribution<S>)]) -> Result<Self, MixtureError> {
        if components.is_empty() {
            return Err(MixtureError::NoComponents);
        }
        for (c, _) in components {
            if c.is_negative() {
                return Err(MixtureError::NegativeCoefficient {
                    coefficient: c.clone(),
                });
            }
        }
        let sum: Rational = components.iter().map(|(c, _)| c).sum();
        if !sum.is_one() {
            return Err(MixtureError::CoefficientSum { sum });
        }
        let mut weights: BTreeMap<S, Rational> = BTreeMap::new();
        for (c, d) in components {
            if c.is_zero() {
                continue;
            }
            for (s, w) in &d.weights {
                let term = c * w;
                *weights.entry(s.clone()).or_insert_with(Rational::zero) += term;
            }
        }
        Ok(Distribution { weights })
    }

    /// Same distribution with explicit zero entries removed.
    pub fn without_zeros(&self) -> Self {
        Distribution {
            weights: self
                .weights
                .iter()
                .filter(|(_, w)| w.is_positive())
                .map(|(s, w)| (s.clone(), w.clone()))
                .collect(),
        }
    }
}

/// A map from a finite set to rationals of any sign, summing to exactly 1.
/// The signed counterpart of [`Distribution`] used by quasiprobability
/// decompositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedWeights<S: Ord> {
    weights: BTreeMap<S, Rational>,
}

impl<S: Ord + Clone + Debug> SignedWeights<S> {
    pub fn new<I>(weights: I) -> Result<Self, DistributionError>
    where
        I: IntoIterator<Item = (S, Rational)>,
    {
        let mut map = BTreeMap::new();
        for (s, w) in weights {
            if map.insert(s.clone(), w).is_some() {
                return Err(DistributionError::DuplicateElement {
                    element: format!("{s:?}"),
                });
            }
        }
        if map.is_empty() {
            return Err(DistributionError::Empty);
        }
        let sum: Rational = map.values().sum();
        if !sum.is_one() {
            return Err(DistributionError::NotNormalized { sum });
        }
        Ok(SignedWeights { weights: map })
    }

    pub fn weight(&self, s: &S) -> Rational {
        self.weights.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &Rational)> {
        self.weights.iter()
    }

    pub fn has_negative_entry(&self) -> bool {
        self.weights.values().any(|w| w.is_negative())
    }

    /// Signed pushforward along `f`.
    pub fn map<T, F>(&self, f: F) -> SignedWeights<T>
    where
        T: Ord + Clone + Debug,
        F: Fn(&S) -> T,
    {
        let mut weights: BTreeMap<T, Rational> = BTreeMap::new();
        for (s, w) in &self.weights {
            *weights.entry(f(s)).or_insert_with(Rational::zero) += w;
        }
        SignedWeights { weights }
    }
}

impl<S: Ord + Clone + Debug> From<Distribution<S>> for SignedWeights<S> {
    fn from(d: Distribution<S>) -> Self {
        SignedWeights { weights: d.weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn dist(pairs: &[(&str, Rational)]) -> Distribution<String> {
        Distribution::new(pairs.iter().map(|(s, w)| (s.to_string(), w.clone()))).unwrap()
    }

    #[test]
    fn constructor_enforces_invariants() {
        assert!(matches!(
            Distribution::<String>::new(vec![]),
            Err(DistributionError::Empty)
        ));
        assert!(matches!(
            Distribution::new(vec![("a", r(1, 2))]),
            Err(DistributionError::NotNormalized { .. })
        ));
        assert!(matches!(
            Distribution::new(vec![("a", r(3, 2)), ("b", r(-1, 2))]),
            Err(DistributionError::NegativeWeight { .. })
        ));
        assert!(matches!(
            Distribution::new(vec![("a", r(1, 2)), ("a", r(1, 2))]),
            Err(DistributionError::DuplicateElement { .. })
        ));
    }

    #[test]
    fn delta_detection_is_support_based() {
        let d = dist(&[("a", r(1, 1)), ("b", r(0, 1))]);
        assert_eq!(d.as_delta(), Some(&"a".to_string()));
        assert_eq!(d.support_size(), 1);

        let half = dist(&[("a", r(1, 2)), ("b", r(1, 2))]);
        assert_eq!(half.as_delta(), None);
    }

    #[test]
    fn support_overlap_finds_a_witness() {
        let da = Distribution::delta("a");
        let db = Distribution::delta("b");
        assert_eq!(da.support_overlap(&db), None);

        let half = Distribution::new(vec![("a", r(1, 2)), ("b", r(1, 2))]).unwrap();
        assert_eq!(da.support_overlap(&half), Some(&"a"));

        let d1 = Distribution::new(vec![("a", r(1, 3)), ("b", r(2, 3))]).unwrap();
        let d2 = Distribution::new(vec![("b", r(1, 2)), ("c", r(1, 2))]).unwrap();
        assert_eq!(d1.support_overlap(&d2), Some(&"b"));
    }

    #[test]
    fn mixture_identity_and_symmetry() {
        let d = dist(&[("a", r(1, 3)), ("b", r(2, 3))]);
        let id = Distribution::mixture(&[(Rational::one(), d.clone())]).unwrap();
        assert_eq!(id, d);

        let even = Distribution::mixture(&[
            (r(1, 2), Distribution::delta("a")),
            (r(1, 2), Distribution::delta("b")),
        ])
        .unwrap();
        assert_eq!(even, Distribution::new(vec![("a", r(1, 2)), ("b", r(1, 2))]).unwrap());
    }

    #[test]
    fn mixture_pointwise_sum() {
        // 1/3·δa + 2/3·{a:1/2, b:1/2} = {a:2/3, b:1/3}
        let mixed = Distribution::mixture(&[
            (r(1, 3), Distribution::delta("a")),
            (
                r(2, 3),
                Distribution::new(vec![("a", r(1, 2)), ("b", r(1, 2))]).unwrap(),
            ),
        ])
        .unwrap();
        assert_eq!(mixed.weight(&"a"), r(2, 3));
        assert_eq!(mixed.weight(&"b"), r(1, 3));
    }

    #[test]
    fn mixture_rejects_bad_coefficients() {
        let d = Distribution::delta("a");
        assert!(matches!(
            Distribution::mixture(&[(r(1, 2), d.clone())]),
            Err(MixtureError::CoefficientSum { .. })
        ));
        assert!(matches!(
            Distribution::mixture(&[(r(3, 2), d.clone()), (r(-1, 2), d.clone())]),
            Err(MixtureError::NegativeCoefficient { .. })
        ));
        assert!(matches!(
            Distribution::<String>::mixture(&[]),
            Err(MixtureError::NoComponents)
        ));
    }

    #[test]
    fn zero_coefficient_components_do_not_contribute_support() {
        let mixed = Distribution::mixture(&[
            (Rational::one(), Distribution::delta("a")),
            (Rational::zero(), Distribution::delta("b")),
        ])
        .unwrap();
        assert_eq!(mixed.as_delta(), Some(&"a"));
        assert!(mixed.support().all(|s| *s == "a"));
    }

    #[test]
    fn same_measure_ignores_stored_zeros() {
        let a = dist(&[("x", r(1, 1))]);
        let b = dist(&[("x", r(1, 1)), ("y", r(0, 1))]);
        assert!(a.same_measure(&b));
        assert_ne!(a, b); // structural equality still sees the stored zero
    }

    #[test]
    fn signed_weights_sum_to_one() {
        let q = SignedWeights::new(vec![
            ("a", r(3, 2)),
            ("b", r(-1, 2)),
        ])
        .unwrap();
        assert!(q.has_negative_entry());
        assert!(matches!(
            SignedWeights::new(vec![("a", r(1, 2))]),
            Err(DistributionError::NotNormalized { .. })
        ));
    }
}
