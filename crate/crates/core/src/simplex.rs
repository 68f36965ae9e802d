//! Interior points of the probability simplex.

use rand::Rng;

use crate::{Error, Result};

/// Absolute tolerance on `sum(pi) = 1` at construction.
pub const SUM_TOL: f64 = 1e-9;

/// Smallest admissible component for externally supplied states. Keeps
/// initial conditions safely away from the simplex boundary.
pub const MIN_MASS: f64 = 1e-6;

/// A strategy-choice distribution: a point strictly inside the probability
/// simplex. Every component lies in `(0, 1)` and the components sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    pi: Vec<f64>,
}

impl PopulationState {
    /// Validates and wraps a distribution. Components must be finite, lie in
    /// `(0, 1)`, be at least [`MIN_MASS`], and sum to one within [`SUM_TOL`].
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.len() < 2 {
            return Err(Error::invalid("population state needs at least two strategies"));
        }
        if pi.iter().any(|v| !v.is_finite()) {
            return Err(Error::invariant("population state has non-finite components"));
        }
        if pi.iter().any(|&v| v < MIN_MASS || v >= 1.0) {
            return Err(Error::invariant(format!(
                "population state must be interior (every component in [{MIN_MASS:e}, 1))"
            )));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::invariant(format!(
                "population state sums to {sum}, expected 1 within {SUM_TOL:e}"
            )));
        }
        Ok(PopulationState { pi })
    }

    /// The uniform distribution over `n` strategies.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("population state needs at least two strategies"));
        }
        Ok(PopulationState { pi: vec![1.0 / n as f64; n] })
    }

    /// Draws a random interior point. Samples a flat Dirichlet and mixes in a
    /// sliver of the uniform distribution so the result respects [`MIN_MASS`].
    pub fn random_interior<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("population state needs at least two strategies"));
        }
        // Exponential draws normalized to the simplex = flat Dirichlet.
        let mut draws: Vec<f64> = (0..n)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let total: f64 = draws.iter().sum();
        let blend = 0.02;
        for d in &mut draws {
            *d = (1.0 - blend) * (*d / total) + blend / n as f64;
        }
        PopulationState::new(draws)
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pi
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.pi.clone()
    }

    /// Smallest component.
    pub fn min_mass(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance to another distribution of the same length.
    pub fn distance(&self, other: &PopulationState) -> f64 {
        self.pi
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl AsRef<[f64]> for PopulationState {
    fn as_ref(&self) -> &[f64] {
        &self.pi
    }
}

/// Euclidean projection of an arbitrary vector onto the probability simplex.
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    let _ = n;
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}
