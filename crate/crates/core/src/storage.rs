//! Energy bookkeeping for the logit dynamics.
//!
//! The dynamics admit a storage function measuring how far the population sits
//! from the stationary choice distribution of the current costs:
//!
//! ```text
//! S(tau, pi) = eta * (g(pi) - min_w g(w)),
//! g(x) = x' tau + (1/beta) * sum_k x_k log x_k
//! ```
//!
//! with the minimum taken over the probability simplex. The inner minimum has
//! the closed form `-(1/beta) * log sum_l exp(-beta tau_l)`, which
//! [`storage_closed_form`] uses directly. [`storage_brute_force`] instead
//! solves the inner problem numerically (dense grid plus projected-gradient
//! polish) and exists to cross-check the closed form.

use crate::logit::LogitParams;
use crate::simplex::project_onto_simplex;
use crate::{Error, Result};

/// Floor applied inside `x log x` so boundary points evaluate cleanly.
const LOG_FLOOR: f64 = 1e-12;

/// One storage evaluation tagged with its abscissa (a time stamp for
/// trajectories, or a cost gap for radial probes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageSample {
    pub t: f64,
    pub value: f64,
}

impl StorageSample {
    /// Storage is nonnegative by construction; tiny negative values are
    /// rounding noise and anything worse is a bug upstream.
    pub fn new(t: f64, value: f64) -> Result<Self> {
        if !t.is_finite() || !value.is_finite() {
            return Err(Error::invariant("storage sample must be finite"));
        }
        if value < -1e-9 {
            return Err(Error::invariant(format!(
                "storage must be nonnegative, got {value}"
            )));
        }
        Ok(StorageSample { t, value: value.max(0.0) })
    }
}

fn entropy_sum(x: &[f64]) -> f64 {
    x.iter().map(|&p| p * p.max(LOG_FLOOR).ln()).sum()
}

/// `x' tau + (1/beta) sum_k x_k log x_k`, the objective of the inner minimum.
fn inner_objective(x: &[f64], tau: &[f64], beta: f64) -> f64 {
    let dot: f64 = x.iter().zip(tau).map(|(a, b)| a * b).sum();
    dot + entropy_sum(x) / beta
}

/// `log sum_l exp(-beta tau_l)`, shifted by `min(tau)` for overflow safety.
fn log_sum_exp_neg(tau: &[f64], beta: f64) -> f64 {
    let m = tau.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = tau.iter().map(|&t| (-beta * (t - m)).exp()).sum();
    sum.ln() - beta * m
}

/// Storage via the closed-form inner minimum.
pub fn storage_closed_form(params: &LogitParams, pi: &[f64], tau: &[f64]) -> f64 {
    let g_pi = inner_objective(pi, tau, params.beta);
    params.eta * (g_pi + log_sum_exp_neg(tau, params.beta) / params.beta)
}

/// Storage with the inner minimum found numerically: enumerate a dense simplex
/// grid (`resolution` subdivisions per edge, at least 50), then polish the best
/// grid point with projected gradient descent. Used as an independent oracle
/// for [`storage_closed_form`].
pub fn storage_brute_force(
    params: &LogitParams,
    pi: &[f64],
    tau: &[f64],
    resolution: usize,
) -> Result<f64> {
    if resolution < 50 {
        return Err(Error::invalid(format!(
            "grid resolution must be at least 50 per dimension, got {resolution}"
        )));
    }
    if pi.len() != tau.len() || pi.len() < 2 {
        return Err(Error::invalid("storage needs matching pi/tau of length >= 2"));
    }
    let beta = params.beta;
    let n = tau.len();

    // Grid pass: every composition of `resolution` into n parts.
    let mut best = vec![0.0; n];
    let mut best_val = f64::INFINITY;
    let mut counts = vec![0usize; n];
    enumerate_compositions(resolution, n, &mut counts, 0, &mut |c| {
        let w: Vec<f64> = c.iter().map(|&k| k as f64 / resolution as f64).collect();
        let val = inner_objective(&w, tau, beta);
        if val < best_val {
            best_val = val;
            best = w;
        }
    });

    // Polish pass: projected gradient with a backtracking safeguard. The
    // nominal step suits the objective's curvature scale but can overshoot
    // when the minimizer has tiny components, so shrink on non-descent.
    let mut w = best;
    let mut current = best_val;
    let nominal_step = 0.1 / beta;
    let mut stalled = 0;
    for _ in 0..2000 {
        let grad: Vec<f64> = w
            .iter()
            .zip(tau)
            .map(|(&x, &t)| t + (x.max(LOG_FLOOR).ln() + 1.0) / beta)
            .collect();
        let mut step = nominal_step;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = w.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
            let projected = project_onto_simplex(&trial);
            let val = inner_objective(&projected, tau, beta);
            if val <= current {
                let gain = current - val;
                w = projected;
                current = val;
                accepted = true;
                // Count consecutive essentially-flat steps before stopping.
                stalled = if gain <= 1e-15 * (1.0 + current.abs()) { stalled + 1 } else { 0 };
                break;
            }
            step *= 0.5;
        }
        if !accepted || stalled >= 5 {
            break;
        }
    }

    Ok(params.eta * (inner_objective(pi, tau, beta) - current))
}

fn enumerate_compositions(
    total: usize,
    parts: usize,
    scratch: &mut [usize],
    index: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if index == parts - 1 {
        scratch[index] = total;
        visit(scratch);
        return;
    }
    for k in 0..=total {
        scratch[index] = k;
        enumerate_compositions(total - k, parts, scratch, index + 1, visit);
    }
}

/// Lower bound certifying radial unboundedness in the cost spread:
/// `S >= eta * min_k(pi_k) * (max tau - min tau) + (eta/beta) * sum pi log pi`.
pub fn radial_lower_bound(params: &LogitParams, pi: &[f64], tau: &[f64]) -> f64 {
    let eps = pi.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tau.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tau.iter().copied().fold(f64::INFINITY, f64::min);
    params.eta * eps * (hi - lo) + params.eta * entropy_sum(pi) / params.beta
}

/// Evaluates storage along a family of ever-wider cost spreads
/// `tau(g) = (g/2, -g/2, 0, ..)`, returning one sample per gap with the gap as
/// abscissa. Storage must grow without bound along this ray.
pub fn radial_probe(params: &LogitParams, pi: &[f64], gaps: &[f64]) -> Result<Vec<StorageSample>> {
    if pi.len() < 2 {
        return Err(Error::invalid("radial probe needs at least two strategies"));
    }
    gaps.iter()
        .map(|&g| {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::invalid(format!("gap must be nonnegative, got {g}")));
            }
            let mut tau = vec![0.0; pi.len()];
            tau[0] = g / 2.0;
            tau[1] = -g / 2.0;
            StorageSample::new(g, storage_closed_form(params, pi, &tau))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logit::softmax_q;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn params(eta: f64, beta: f64, n: usize) -> LogitParams {
        LogitParams::new(eta, beta, n).unwrap()
    }

    #[test]
    fn matches_hand_computed_value() {
        // tau = 0 makes S = (eta/beta) * (sum pi log pi + log n).
        let p = params(1.0, 1.0, 2);
        let s = storage_closed_form(&p, &[0.8, 0.2], &[0.0, 0.0]);
        assert_abs_diff_eq!(s, 0.1927447571, epsilon = 1e-9);
    }

    #[test]
    fn vanishes_at_the_stationary_choice() {
        let p = params(1.3, 2.2, 3);
        let tau = [0.4, -0.6, 1.1];
        let q = softmax_q(&tau, p.beta);
        assert_abs_diff_eq!(storage_closed_form(&p, &q, &tau), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn scales_linearly_in_eta() {
        let tau = [0.2, -0.5, 0.9];
        let pi = [0.3, 0.3, 0.4];
        let s1 = storage_closed_form(&params(1.0, 1.5, 3), &pi, &tau);
        let s2 = storage_closed_form(&params(2.0, 1.5, 3), &pi, &tau);
        assert_abs_diff_eq!(s2, 2.0 * s1, epsilon = 1e-12);
    }

    #[test]
    fn brute_force_agrees_with_closed_form() {
        let p = params(1.0, 2.0, 3);
        let pi = [0.5, 0.2, 0.3];
        let tau = [1.0, -0.5, 0.25];
        let closed = storage_closed_form(&p, &pi, &tau);
        let brute = storage_brute_force(&p, &pi, &tau, 60).unwrap();
        assert_abs_diff_eq!(brute, closed, epsilon = 1e-6);
    }

    #[test]
    fn brute_force_rejects_coarse_grids() {
        let p = params(1.0, 1.0, 2);
        assert!(storage_brute_force(&p, &[0.5, 0.5], &[0.0, 0.0], 10).is_err());
    }

    #[test]
    fn sample_rejects_genuinely_negative_values() {
        assert!(StorageSample::new(0.0, -1e-3).is_err());
        let s = StorageSample::new(0.0, -1e-12).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn radial_probe_grows_and_respects_lower_bound() {
        let p = params(1.0, 1.0, 3);
        let pi = [0.2, 0.3, 0.5];
        let gaps = [0.0, 1.0, 5.0, 25.0, 125.0];
        let samples = radial_probe(&p, &pi, &gaps).unwrap();
        for s in &samples {
            let mut tau = [0.0; 3];
            tau[0] = s.t / 2.0;
            tau[1] = -s.t / 2.0;
            assert!(s.value >= radial_lower_bound(&p, &pi, &tau) - 1e-12);
        }
        for pair in samples.windows(2) {
            assert!(pair[1].value > pair[0].value);
        }
        // The bound itself diverges with the gap, so storage does too.
        assert!(samples.last().unwrap().value > 0.2 * 125.0 * 0.9);
    }

    #[test]
    fn brute_force_handles_minimizers_near_the_boundary() {
        // A large cost spread pushes the inner minimizer toward a vertex,
        // where the fixed-step polish would oscillate without backtracking.
        let p = params(1.0, 4.0, 3);
        let pi = [0.6, 0.3, 0.1];
        let tau = [8.0, 0.0, -8.0];
        let closed = storage_closed_form(&p, &pi, &tau);
        let brute = storage_brute_force(&p, &pi, &tau, 80).unwrap();
        assert_abs_diff_eq!(brute, closed, epsilon = 1e-6);
    }

    #[test]
    fn brute_force_matches_on_random_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let n = rng.random_range(2..=4usize);
            let p = params(
                [0.5, 1.0, 2.0][rng.random_range(0..3usize)],
                [0.5, 1.0, 2.0][rng.random_range(0..3usize)],
                n,
            );
            let pi = crate::simplex::PopulationState::random_interior(n, &mut rng).unwrap();
            let tau: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let closed = storage_closed_form(&p, pi.as_slice(), &tau);
            let brute = storage_brute_force(&p, pi.as_slice(), &tau, 60).unwrap();
            assert_abs_diff_eq!(brute, closed, epsilon = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn closed_form_is_nonnegative(
            raw in proptest::collection::vec(0.05f64..1.0, 2..5),
            tau_seed in proptest::collection::vec(-10.0f64..10.0, 5),
            eta in 0.1f64..4.0,
            beta in 0.1f64..4.0,
        ) {
            let total: f64 = raw.iter().sum();
            let pi: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let tau = &tau_seed[..pi.len()];
            let p = params(eta, beta, pi.len());
            let s = storage_closed_form(&p, &pi, tau);
            prop_assert!(s >= -1e-9, "storage {} negative", s);
        }
    }
}
