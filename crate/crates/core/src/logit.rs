//! Logit choice dynamics.
//!
//! Agents revise strategies toward the Gibbs distribution of the current
//! perceived costs. With cost vector `tau`, the stationary choice map is
//!
//! ```text
//! q_k(tau) = exp(-beta * tau_k) / sum_l exp(-beta * tau_l)
//! ```
//!
//! and the population state follows `d(pi)/dt = eta * (q(tau) - pi)`.

use crate::simplex::PopulationState;
use crate::{Error, Result};

/// Revision rate `eta` and noise inverse-temperature `beta`, both positive,
/// plus the number of strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogitParams {
    pub eta: f64,
    pub beta: f64,
    pub n: usize,
}

impl LogitParams {
    pub fn new(eta: f64, beta: f64, n: usize) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid(format!("eta must be positive and finite, got {eta}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid(format!("beta must be positive and finite, got {beta}")));
        }
        if n < 2 {
            return Err(Error::invalid("logit dynamics need at least two strategies"));
        }
        Ok(LogitParams { eta, beta, n })
    }
}

/// A finite perceived-cost vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector {
    tau: Vec<f64>,
}

impl CostVector {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if tau.len() < 2 {
            return Err(Error::invalid("cost vector needs at least two strategies"));
        }
        if tau.iter().any(|v| !v.is_finite()) {
            return Err(Error::invariant("cost vector has non-finite components"));
        }
        Ok(CostVector { tau })
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.tau
    }
}

impl AsRef<[f64]> for CostVector {
    fn as_ref(&self) -> &[f64] {
        &self.tau
    }
}

/// Gibbs / softmax choice distribution over costs. The exponent is shifted by
/// `min(tau)` so large `beta * tau` cannot overflow; the shift cancels in the
/// normalization.
pub fn softmax_q(tau: &[f64], beta: f64) -> Vec<f64> {
    let shift = tau.iter().copied().fold(f64::INFINITY, f64::min);
    let mut q: Vec<f64> = tau.iter().map(|&t| (-beta * (t - shift)).exp()).collect();
    let z: f64 = q.iter().sum();
    for v in &mut q {
        *v /= z;
    }
    q
}

/// Right-hand side `eta * (q(tau) - pi)` of the revision dynamics.
pub fn logit_vector_field(params: &LogitParams, pi: &[f64], tau: &[f64]) -> Vec<f64> {
    debug_assert_eq!(pi.len(), tau.len());
    let q = softmax_q(tau, params.beta);
    pi.iter()
        .zip(&q)
        .map(|(&p, &qk)| params.eta * (qk - p))
        .collect()
}

/// Convenience wrapper taking typed state and costs.
pub fn logit_vector_field_state(
    params: &LogitParams,
    pi: &PopulationState,
    tau: &CostVector,
) -> Vec<f64> {
    logit_vector_field(params, pi.as_slice(), tau.as_slice())
}
