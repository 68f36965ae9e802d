//! Inducement mechanisms: cost-update laws that steer the population toward a
//! target distribution, plus the storage functions certifying their
//! input-strict passivity.
//!
//! Two laws are provided. The PI mechanism integrates the tracking error,
//!
//! ```text
//! d(mu)/dt = rho * (pi - target),   T = mu + kappa * (pi - target),
//! ```
//!
//! and conserves `1' T` because the error sums to zero. The saturated
//! mechanism clamps the integrator so it can never push costs up,
//!
//! ```text
//! d(mu)/dt = min{ rho * (pi - target), -alpha * mu },   mu(0) <= 0,
//! T = base_cost * 1 + mu + kappa * (pi - target),
//! ```
//!
//! which keeps `mu <= 0` and hence every `T_k < base_cost + kappa` — a
//! structural cost ceiling the multiplicative-bias analysis requires.
//!
//! The PI storage is quadratic in the tracking error. The saturated storage is
//! a Bregman divergence built from the running integrals of the bias weights,
//! evaluated through their convex conjugates ([`ConjugatePair`]).

use crate::bias::{AdditiveBias, MultiplicativeBias, ScalarFamily};
use crate::numeric::{invert_increasing, nested_antiderivatives, MonotoneCubic};
use crate::{Error, Result};

/// Tolerance on the saturated integrator's sign invariant during stepping.
/// Runge-Kutta substages may overshoot zero by integration noise.
const MU_SIGN_SLACK: f64 = 1e-9;

/// One mechanism evaluation: integrator rate, emitted costs, and which
/// components took the saturation branch (always `false` for the PI law).
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismOutput {
    pub mu_dot: Vec<f64>,
    pub cost: Vec<f64>,
    pub saturated: Vec<bool>,
}

/// Gains of the PI mechanism: integrator rate `rho` and proportional gain
/// `kappa`, both positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiGains {
    pub rho: f64,
    pub kappa: f64,
}

impl PiGains {
    pub fn new(rho: f64, kappa: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::invalid(format!("rho must be positive and finite, got {rho}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::invalid(format!("kappa must be positive and finite, got {kappa}")));
        }
        Ok(PiGains { rho, kappa })
    }

    /// Integrator rate and emitted costs at the current state.
    pub fn step(&self, pi: &[f64], target: &[f64], mu: &[f64]) -> MechanismOutput {
        let n = pi.len();
        let mut mu_dot = Vec::with_capacity(n);
        let mut cost = Vec::with_capacity(n);
        for k in 0..n {
            let err = pi[k] - target[k];
            mu_dot.push(self.rho * err);
            cost.push(mu[k] + self.kappa * err);
        }
        MechanismOutput { mu_dot, cost, saturated: vec![false; n] }
    }

    /// Quadratic tracking storage `(rho/2) * |pi - target|^2`. Its rate along
    /// closed-loop trajectories equals `dT/dt' dpi/dt - kappa |dpi/dt|^2`.
    pub fn storage(&self, pi: &[f64], target: &[f64]) -> f64 {
        0.5 * self.rho
            * pi.iter()
                .zip(target)
                .map(|(p, s)| (p - s) * (p - s))
                .sum::<f64>()
    }
}

/// Gains of the saturated mechanism. Beyond the PI gains it carries the
/// saturation rate `alpha` (required to exceed `1/(2 kappa)` so the storage
/// certificate closes) and the baseline cost level `base_cost > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturatedGains {
    pub rho: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub base_cost: f64,
}

impl SaturatedGains {
    pub fn new(rho: f64, kappa: f64, alpha: f64, base_cost: f64) -> Result<Self> {
        let pi_part = PiGains::new(rho, kappa)?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(format!("alpha must be positive and finite, got {alpha}")));
        }
        if 2.0 * alpha * kappa <= 1.0 {
            return Err(Error::invalid(format!(
                "saturation rate too small: need alpha > 1/(2 kappa) = {}, got {alpha}",
                1.0 / (2.0 * kappa)
            )));
        }
        if !(base_cost.is_finite() && base_cost > 0.0) {
            return Err(Error::invalid(format!(
                "base_cost must be positive and finite, got {base_cost}"
            )));
        }
        Ok(SaturatedGains { rho: pi_part.rho, kappa: pi_part.kappa, alpha, base_cost })
    }

    /// Structural ceiling on every emitted cost component: `base_cost + kappa`.
    pub fn cost_bound(&self) -> f64 {
        self.base_cost + self.kappa
    }

    /// Integrator rate, emitted costs, and saturation branches. Fails if the
    /// integrator state has drifted positive.
    pub fn step(&self, pi: &[f64], target: &[f64], mu: &[f64]) -> Result<MechanismOutput> {
        if let Some(bad) = mu.iter().find(|&&m| m > MU_SIGN_SLACK) {
            return Err(Error::invariant(format!(
                "saturated mechanism integrator must stay nonpositive, got {bad}"
            )));
        }
        let n = pi.len();
        let mut mu_dot = Vec::with_capacity(n);
        let mut cost = Vec::with_capacity(n);
        let mut saturated = Vec::with_capacity(n);
        for k in 0..n {
            let err = pi[k] - target[k];
            let tracking = self.rho * err;
            let decay = -self.alpha * mu[k];
            let sat = decay < tracking;
            mu_dot.push(if sat { decay } else { tracking });
            saturated.push(sat);
            cost.push(self.base_cost + mu[k] + self.kappa * err);
        }
        Ok(MechanismOutput { mu_dot, cost, saturated })
    }
}

/// Running integrals of one bias-weight curve `w` and their convex conjugate:
/// `grad_primitive = ∫_0^x w`, `primitive = ∫_0^x grad_primitive`, with the
/// conjugate taken over the share range `[0, 1]` (the primitive is infinite
/// outside it).
#[derive(Debug, Clone)]
pub struct ConjugatePair {
    family: ScalarFamily,
    cache: Option<PairCache>,
    grad_at_one: f64,
}

#[derive(Debug, Clone)]
struct PairCache {
    grad: MonotoneCubic,
    value: MonotoneCubic,
}

impl ConjugatePair {
    /// Builds the pair for one weight curve, using closed-form integrals when
    /// the shape admits them and cached quadrature otherwise. The curve must
    /// stay strictly positive on `[0, 1]` so the primitive is strictly convex.
    pub fn for_family(family: &ScalarFamily) -> Result<Self> {
        if family.exact_antiderivatives(0.0).is_some() {
            Self::build(family.clone(), None)
        } else {
            Self::with_quadrature(family, 2048)
        }
    }

    /// Forces the quadrature-cache construction regardless of shape. Exists so
    /// the closed forms and the quadrature path can cross-check each other.
    pub fn with_quadrature(family: &ScalarFamily, intervals: usize) -> Result<Self> {
        if intervals < 16 {
            return Err(Error::invalid("quadrature cache needs at least 16 intervals"));
        }
        let (grad_nodes, value_nodes) = nested_antiderivatives(|x| family.eval(x), intervals);
        let xs: Vec<f64> = (0..=intervals).map(|i| i as f64 / intervals as f64).collect();
        let cache = PairCache {
            grad: MonotoneCubic::new(xs.clone(), grad_nodes)?,
            value: MonotoneCubic::new(xs, value_nodes)?,
        };
        Self::build(family.clone(), Some(cache))
    }

    fn build(family: ScalarFamily, cache: Option<PairCache>) -> Result<Self> {
        let bounds = family.certified_bounds()?;
        if bounds.value_lo <= 0.0 {
            return Err(Error::invalid(
                "conjugate machinery needs a strictly positive weight curve",
            ));
        }
        let mut pair = ConjugatePair { family, cache, grad_at_one: 0.0 };
        pair.grad_at_one = pair.grad_primitive(1.0);
        Ok(pair)
    }

    /// First running integral `∫_0^x w`, the gradient of the primitive.
    /// Strictly increasing on `[0, 1]`; the argument is clamped to that range.
    pub fn grad_primitive(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match (&self.cache, self.family.exact_antiderivatives(x)) {
            (None, Some((g, _))) => g,
            (Some(c), _) => c.grad.eval(x),
            (None, None) => unreachable!("pair built without integrals"),
        }
    }

    /// Second running integral `∫_0^x ∫_0^p w`, the strictly convex primitive.
    pub fn primitive(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match (&self.cache, self.family.exact_antiderivatives(x)) {
            (None, Some((_, v))) => v,
            (Some(c), _) => c.value.eval(x),
            (None, None) => unreachable!("pair built without integrals"),
        }
    }

    /// Gradient of the conjugate: the share `x ∈ [0, 1]` whose primitive
    /// gradient matches `zeta`, clamped to the endpoints for out-of-range
    /// `zeta`. Inside the range this inverts `grad_primitive` to 1e-12.
    pub fn conjugate_grad(&self, zeta: f64) -> f64 {
        if zeta <= 0.0 {
            return 0.0;
        }
        if zeta >= self.grad_at_one {
            return 1.0;
        }
        invert_increasing(
            |x| self.grad_primitive(x),
            |x| self.family.eval(x),
            zeta,
            0.0,
            1.0,
            1e-12,
        )
    }

    /// Convex conjugate `max_x (zeta * x - primitive(x))` over `[0, 1]`.
    pub fn conjugate_value(&self, zeta: f64) -> f64 {
        let x = self.conjugate_grad(zeta);
        zeta * x - self.primitive(x)
    }
}

/// Builds one conjugate pair per strategy from a multiplicative bias.
pub fn conjugate_pairs(bias: &MultiplicativeBias) -> Result<Vec<ConjugatePair>> {
    (0..bias.n()).map(|k| ConjugatePair::for_family(bias.family(k))).collect()
}

/// Bregman-divergence storage of the saturated mechanism. For each strategy
/// the dual point is taken at `min{pi_k, target_k - (alpha/rho) mu_k}`; for
/// in-range shares that stays inside `[0, 1]`, but a drifted share outside
/// the interval is clamped and the event reported via the returned flag.
pub fn storage_u(
    gains: &SaturatedGains,
    pairs: &[ConjugatePair],
    pi: &[f64],
    target: &[f64],
    mu: &[f64],
) -> Result<(f64, bool)> {
    if pairs.len() != pi.len() || target.len() != pi.len() || mu.len() != pi.len() {
        return Err(Error::invalid("storage_u arguments must share one length"));
    }
    if let Some(bad) = mu.iter().find(|&&m| m > MU_SIGN_SLACK) {
        return Err(Error::invariant(format!(
            "saturated storage requires nonpositive integrator state, got {bad}"
        )));
    }
    let mut total = 0.0;
    let mut clamped = false;
    for k in 0..pi.len() {
        let raw = pi[k].min(target[k] - gains.alpha / gains.rho * mu[k]);
        let x = raw.clamp(0.0, 1.0);
        if x != raw {
            clamped = true;
        }
        // Bregman divergence of the primitive between the target share and x:
        // F(target) - F(x) - grad F(x) (target - x), nonnegative by convexity.
        let zeta = pairs[k].grad_primitive(x);
        total += gains.rho
            * (pairs[k].primitive(target[k]) - pairs[k].primitive(x) - zeta * (target[k] - x));
    }
    Ok((total, clamped))
}

/// A gain inequality guaranteeing inducement for a bias/mechanism pairing.
#[derive(Debug, Clone, Copy)]
pub enum GainCondition<'a> {
    /// PI mechanism against an additive bias: `kappa` must exceed the
    /// steepest bias slope.
    PiAdditive { gains: &'a PiGains, bias: &'a AdditiveBias },
    /// Saturated mechanism against a multiplicative bias:
    /// `kappa * w_lo > 2 v_hi (base_cost + kappa)` with the structural cost
    /// ceiling standing in for the run's cost bound.
    SaturatedMultiplicative { gains: &'a SaturatedGains, bias: &'a MultiplicativeBias },
}

/// Outcome of a gain-condition check. `margin = kappa - threshold`;
/// `Infeasible` means no `kappa` can ever satisfy the inequality.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GainVerdict {
    Satisfied { threshold: f64, margin: f64 },
    Violated { threshold: f64, margin: f64 },
    Infeasible,
}

impl GainVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, GainVerdict::Satisfied { .. })
    }

    fn from_margin(kappa: f64, threshold: f64) -> Self {
        let margin = kappa - threshold;
        if margin > 0.0 {
            GainVerdict::Satisfied { threshold, margin }
        } else {
            GainVerdict::Violated { threshold, margin }
        }
    }
}

/// Evaluates the strict gain inequality for the given pairing.
pub fn check_gain_condition(condition: &GainCondition) -> GainVerdict {
    match condition {
        GainCondition::PiAdditive { gains, bias } => {
            GainVerdict::from_margin(gains.kappa, bias.shortage_coefficient())
        }
        GainCondition::SaturatedMultiplicative { gains, bias } => {
            let c = bias.constants();
            // kappa * w_lo > 2 v_hi (base_cost + kappa) has a solution in
            // kappa only when w_lo > 2 v_hi.
            if c.value_lo <= 2.0 * c.slope_hi {
                return GainVerdict::Infeasible;
            }
            let threshold = 2.0 * c.slope_hi * gains.cost_bound() / c.value_lo;
            GainVerdict::from_margin(gains.kappa, threshold)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn affine_pair() -> ConjugatePair {
        ConjugatePair::for_family(&ScalarFamily::affine(2.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn pi_step_matches_hand_computed_example() {
        let g = PiGains::new(1.0, 2.0).unwrap();
        let out = g.step(&[0.6, 0.4], &[0.5, 0.5], &[0.0, 0.0]);
        assert_abs_diff_eq!(out.mu_dot[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(out.mu_dot[1], -0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(out.cost[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(out.cost[1], -0.2, epsilon = 1e-15);
        assert!(out.saturated.iter().all(|&s| !s));
        // At the target the mechanism is quiescent.
        let rest = g.step(&[0.5, 0.5], &[0.5, 0.5], &[0.3, -0.3]);
        assert_eq!(rest.mu_dot, vec![0.0, 0.0]);
        assert_eq!(rest.cost, vec![0.3, -0.3]);
    }

    #[test]
    fn pi_storage_matches_hand_computed_example() {
        let g = PiGains::new(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(g.storage(&[0.6, 0.4], &[0.5, 0.5]), 0.02, epsilon = 1e-15);
        assert_eq!(g.storage(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        let double = PiGains::new(4.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            double.storage(&[0.6, 0.4], &[0.5, 0.5]),
            0.04,
            epsilon = 1e-15
        );
    }

    #[test]
    fn saturated_step_picks_componentwise_minimum() {
        let g = SaturatedGains::new(1.0, 1.0, 1.0, 2.0).unwrap();
        let out = g.step(&[0.4, 0.6], &[0.5, 0.5], &[-1.0, 0.0]).unwrap();
        // First component: min{-0.1, 1.0} = -0.1 (tracking branch).
        assert_abs_diff_eq!(out.mu_dot[0], -0.1, epsilon = 1e-15);
        assert!(!out.saturated[0]);
        // Second: min{0.1, 0.0} = 0.0 (saturation branch).
        assert_abs_diff_eq!(out.mu_dot[1], 0.0, epsilon = 1e-15);
        assert!(out.saturated[1]);
    }

    #[test]
    fn saturated_costs_stay_below_structural_bound() {
        let g = SaturatedGains::new(1.0, 1.0, 1.0, 2.0).unwrap();
        let out = g.step(&[0.6, 0.4], &[0.5, 0.5], &[-0.5, 0.0]).unwrap();
        assert_abs_diff_eq!(out.cost[0], 1.6, epsilon = 1e-15);
        assert_abs_diff_eq!(out.cost[1], 1.9, epsilon = 1e-15);
        assert!(out.cost.iter().all(|&t| t < g.cost_bound()));
        assert_abs_diff_eq!(g.cost_bound(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn saturated_step_rejects_positive_integrator() {
        let g = SaturatedGains::new(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(g.step(&[0.5, 0.5], &[0.5, 0.5], &[0.1, 0.0]).is_err());
    }

    #[test]
    fn gain_structs_validate_parameters() {
        assert!(PiGains::new(0.0, 1.0).is_err());
        assert!(PiGains::new(1.0, 0.0).is_err());
        // alpha must exceed 1/(2 kappa) = 0.25.
        assert!(SaturatedGains::new(1.0, 2.0, 0.25, 1.0).is_err());
        assert!(SaturatedGains::new(1.0, 2.0, 0.26, 1.0).is_ok());
        assert!(SaturatedGains::new(1.0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn conjugate_matches_hand_computed_affine_values() {
        // w(x) = 2 - x: grad = 2x - x^2/2, primitive = x^2 - x^3/6.
        let pair = affine_pair();
        assert_abs_diff_eq!(pair.primitive(0.5), 11.0 / 48.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.grad_primitive(0.5), 0.875, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.conjugate_grad(0.875), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(pair.conjugate_value(0.875), 5.0 / 24.0, epsilon = 1e-10);
        // Degenerate and out-of-range duals clamp to the share endpoints.
        assert_eq!(pair.conjugate_grad(0.0), 0.0);
        assert_eq!(pair.conjugate_value(0.0), 0.0);
        assert_eq!(pair.conjugate_grad(5.0), 1.0);
        assert_abs_diff_eq!(pair.conjugate_value(5.0), 5.0 - pair.primitive(1.0), epsilon = 1e-12);
    }

    #[test]
    fn quadrature_cache_agrees_with_closed_forms() {
        let family = ScalarFamily::cubic(1.5, 0.3, 0.4).unwrap();
        let exact = ConjugatePair::for_family(&family).unwrap();
        let cached = ConjugatePair::with_quadrature(&family, 2048).unwrap();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert_abs_diff_eq!(cached.grad_primitive(x), exact.grad_primitive(x), epsilon = 1e-8);
            assert_abs_diff_eq!(cached.primitive(x), exact.primitive(x), epsilon = 1e-8);
            let zeta = exact.grad_primitive(x);
            assert_abs_diff_eq!(cached.conjugate_value(zeta), exact.conjugate_value(zeta), epsilon = 1e-7);
        }
    }

    #[test]
    fn primitive_curvature_recovers_the_weight_curve() {
        let family = ScalarFamily::tabulated(&[
            (0.0, 1.8),
            (0.3, 1.5),
            (0.6, 1.1),
            (1.0, 0.9),
        ])
        .unwrap();
        let pair = ConjugatePair::for_family(&family).unwrap();
        let h = 1e-5;
        for i in 1..20 {
            let x = i as f64 / 20.0;
            let curv = (pair.grad_primitive(x + h) - pair.grad_primitive(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(curv, family.eval(x), epsilon = 1e-5);
        }
    }

    #[test]
    fn storage_u_is_zero_at_target_and_positive_off_it() {
        let g = SaturatedGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let pairs = vec![affine_pair(), affine_pair()];
        let (at_target, clamped) =
            storage_u(&g, &pairs, &[0.5, 0.5], &[0.5, 0.5], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(at_target, 0.0, epsilon = 1e-12);
        assert!(!clamped);
        // Semi-definiteness: at the target the min picks the target share for
        // any nonpositive integrator state, so no energy is stored.
        let (at_target_mu, _) =
            storage_u(&g, &pairs, &[0.5, 0.5], &[0.5, 0.5], &[-0.2, 0.0]).unwrap();
        assert_abs_diff_eq!(at_target_mu, 0.0, epsilon = 1e-12);
        // A share below its target stores energy through the pi branch.
        let (off, _) = storage_u(&g, &pairs, &[0.6, 0.4], &[0.5, 0.5], &[0.0, 0.0]).unwrap();
        assert!(off > 1e-4);
        // In the saturated branch (rho (pi - target) > -alpha mu) the dual
        // point tracks the integrator, and deeper mu stores more energy.
        let (shallow, _) =
            storage_u(&g, &pairs, &[0.6, 0.4], &[0.3, 0.7], &[-0.1, 0.0]).unwrap();
        let (deep, _) = storage_u(&g, &pairs, &[0.6, 0.4], &[0.3, 0.7], &[-0.2, 0.0]).unwrap();
        assert!(shallow > 1e-4);
        assert!(deep > shallow);
    }

    #[test]
    fn storage_u_clamps_on_out_of_range_shares_and_rejects_positive_mu() {
        let g = SaturatedGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let pairs = vec![affine_pair(), affine_pair()];
        // A drifted share above one is clamped back into the domain of the
        // primitive and the event is flagged.
        let (value, clamped) =
            storage_u(&g, &pairs, &[1.05, 0.05], &[0.5, 0.5], &[-3.0, 0.0]).unwrap();
        assert!(clamped);
        assert!(value.is_finite() && value >= 0.0);
        // Positive integrator entries are rejected.
        assert!(storage_u(&g, &pairs, &[0.5, 0.5], &[0.5, 0.5], &[0.1, 0.0]).is_err());
    }

    #[test]
    fn gain_condition_matches_hand_computed_examples() {
        let bias = AdditiveBias::uniform(ScalarFamily::affine(1.0, 1.0).unwrap(), 2).unwrap();
        let gains = PiGains::new(1.0, 2.0).unwrap();
        match check_gain_condition(&GainCondition::PiAdditive { gains: &gains, bias: &bias }) {
            GainVerdict::Satisfied { threshold, margin } => {
                assert_abs_diff_eq!(threshold, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(margin, 1.0, epsilon = 1e-12);
            }
            other => panic!("expected satisfied, got {other:?}"),
        }

        // w(x) = 1.05 - 0.1 x: w_lo = 0.95, v_hi = 0.1; threshold 0.2(1+1)/0.95.
        let wbias =
            MultiplicativeBias::uniform(ScalarFamily::affine(1.05, 0.1).unwrap(), 2).unwrap();
        let sg = SaturatedGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
        match check_gain_condition(&GainCondition::SaturatedMultiplicative {
            gains: &sg,
            bias: &wbias,
        }) {
            GainVerdict::Satisfied { threshold, .. } => {
                assert_abs_diff_eq!(threshold, 0.4 / 0.95, epsilon = 1e-9);
            }
            other => panic!("expected satisfied, got {other:?}"),
        }

        // Steep weights make the inequality unsatisfiable for every kappa.
        let steep =
            MultiplicativeBias::uniform(ScalarFamily::affine(1.5, 1.0).unwrap(), 2).unwrap();
        let verdict = check_gain_condition(&GainCondition::SaturatedMultiplicative {
            gains: &sg,
            bias: &steep,
        });
        assert_eq!(verdict, GainVerdict::Infeasible);
    }

    proptest! {
        #[test]
        fn conjugate_round_trip(x in 0.001f64..0.999) {
            for family in [
                ScalarFamily::affine(2.0, 1.0).unwrap(),
                ScalarFamily::cubic(1.2, 0.4, 0.6).unwrap(),
                ScalarFamily::tabulated(&[(0.0, 1.6), (0.5, 1.2), (1.0, 1.0)]).unwrap(),
            ] {
                let pair = ConjugatePair::for_family(&family).unwrap();
                let x_back = pair.conjugate_grad(pair.grad_primitive(x));
                prop_assert!((x_back - x).abs() < 1e-8, "round trip {x} -> {x_back}");
            }
        }

        #[test]
        fn fenchel_young_inequality_holds(
            x in 0.0f64..1.0,
            zeta in -0.5f64..3.0,
        ) {
            let pair = affine_pair();
            let lhs = pair.primitive(x) + pair.conjugate_value(zeta);
            prop_assert!(lhs >= x * zeta - 1e-10);
        }

        #[test]
        fn fenchel_young_equality_at_matched_pairs(x in 0.0f64..1.0) {
            let pair = affine_pair();
            let zeta = pair.grad_primitive(x);
            let gap = pair.primitive(x) + pair.conjugate_value(zeta) - x * zeta;
            prop_assert!(gap.abs() < 1e-8);
        }
    }
}
