//! Closed-loop simulation of the biased revision dynamics.
//!
//! A [`Scenario`] wires together the logit dynamics, an optional conformity
//! bias, and either an exogenous cost signal (a *driven* run) or an inducement
//! mechanism steering toward a target distribution (a *regulated* run). The
//! integrator is fixed-step classical Runge-Kutta on the stacked state
//! `(pi, mu)`; the step is snapped so a whole number of equally spaced records
//! covers the horizon exactly.
//!
//! No simplex projection is applied: the dynamics preserve the simplex
//! analytically, so the recorded drift of `sum(pi)` is a direct measure of
//! integration quality. Drift beyond `1e-7`, loss of interiority, or a breach
//! of the saturated mechanism's sign/ceiling guarantees aborts the run with
//! the partial trajectory attached.

use rayon::prelude::*;

use crate::bias::{AdditiveBias, MultiplicativeBias};
use crate::certify;
use crate::logit::{logit_vector_field, LogitParams};
use crate::mechanism::{
    check_gain_condition, conjugate_pairs, storage_u, ConjugatePair, GainCondition, PiGains,
    SaturatedGains,
};
use crate::simplex::PopulationState;
use crate::storage::storage_closed_form;
use crate::{Error, Result};

/// Allowed simplex-sum drift at any recorded sample.
pub const SUM_DRIFT_TOL: f64 = 1e-7;

/// Allowed positive excursion of the saturated integrator at recorded samples.
const MU_RECORD_TOL: f64 = 1e-12;

/// How the perceived costs are distorted by the population state.
#[derive(Debug, Clone)]
pub enum BiasChoice {
    Unbiased,
    Additive(AdditiveBias),
    Multiplicative(MultiplicativeBias),
}

impl BiasChoice {
    fn apply(&self, cost: &[f64], pi: &[f64]) -> Vec<f64> {
        match self {
            BiasChoice::Unbiased => cost.to_vec(),
            BiasChoice::Additive(b) => b.apply(cost, pi),
            BiasChoice::Multiplicative(b) => b.apply(cost, pi),
        }
    }

    fn check_n(&self, n: usize) -> Result<()> {
        let bias_n = match self {
            BiasChoice::Unbiased => return Ok(()),
            BiasChoice::Additive(b) => b.n(),
            BiasChoice::Multiplicative(b) => b.n(),
        };
        if bias_n != n {
            return Err(Error::invalid(format!(
                "bias covers {bias_n} strategies but the scenario has {n}"
            )));
        }
        Ok(())
    }
}

/// Which cost-update law closes the loop, if any.
#[derive(Debug, Clone)]
pub enum MechanismChoice {
    None,
    Pi(PiGains),
    Saturated(SaturatedGains),
}

/// One sinusoidal component of a driven cost signal.
#[derive(Debug, Clone)]
pub struct Sinusoid {
    pub amplitude: Vec<f64>,
    pub angular_frequency: f64,
    pub phase: f64,
}

/// Exogenous cost signal for runs without a mechanism.
#[derive(Debug, Clone)]
pub enum CostInput {
    Constant(Vec<f64>),
    /// `base_k + sum_j amp_jk * sin(omega_j t + phase_j)`.
    SinusoidMix { base: Vec<f64>, terms: Vec<Sinusoid> },
}

impl CostInput {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            CostInput::Constant(v) => v.clone(),
            CostInput::SinusoidMix { base, terms } => {
                let mut out = base.clone();
                for s in terms {
                    let osc = (s.angular_frequency * t + s.phase).sin();
                    for (o, a) in out.iter_mut().zip(&s.amplitude) {
                        *o += a * osc;
                    }
                }
                out
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let check_len = |len: usize, what: &str| {
            if len != n {
                Err(Error::invalid(format!(
                    "cost input {what} has length {len}, expected {n}"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            CostInput::Constant(v) => {
                check_len(v.len(), "vector")?;
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("cost input must be finite"));
                }
            }
            CostInput::SinusoidMix { base, terms } => {
                check_len(base.len(), "base")?;
                if base.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("cost input must be finite"));
                }
                for s in terms {
                    check_len(s.amplitude.len(), "amplitude")?;
                    if s.amplitude.iter().any(|x| !x.is_finite())
                        || !s.angular_frequency.is_finite()
                        || !s.phase.is_finite()
                    {
                        return Err(Error::invalid("cost input must be finite"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A fully specified experiment: dynamics parameters, bias, drive or
/// mechanism, initial state, and the time grid.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: LogitParams,
    pub bias: BiasChoice,
    pub mechanism: MechanismChoice,
    /// Exogenous costs; required without a mechanism, forbidden with one.
    pub cost: Option<CostInput>,
    pub initial_pi: PopulationState,
    pub initial_mu: Vec<f64>,
    /// Inducement target; required with a mechanism, optional otherwise.
    pub target: Option<PopulationState>,
    pub horizon: f64,
    pub step: f64,
    pub record_interval: f64,
}

impl Scenario {
    /// A run forced by an exogenous cost signal. Step defaults to `1e-3/eta`,
    /// recording every 20 steps.
    pub fn driven(
        params: LogitParams,
        bias: BiasChoice,
        cost: CostInput,
        initial_pi: PopulationState,
        horizon: f64,
    ) -> Self {
        let step = 1e-3 / params.eta;
        Scenario {
            initial_mu: vec![0.0; params.n],
            params,
            bias,
            mechanism: MechanismChoice::None,
            cost: Some(cost),
            initial_pi,
            target: None,
            horizon,
            step,
            record_interval: 20.0 * step,
        }
    }

    /// A closed-loop run steered toward `target`. Step defaults to `1e-3/eta`,
    /// recording every 20 steps; the integrator starts at rest.
    pub fn regulated(
        params: LogitParams,
        bias: BiasChoice,
        mechanism: MechanismChoice,
        target: PopulationState,
        initial_pi: PopulationState,
        horizon: f64,
    ) -> Self {
        let step = 1e-3 / params.eta;
        Scenario {
            initial_mu: vec![0.0; params.n],
            params,
            bias,
            mechanism,
            cost: None,
            initial_pi,
            target: Some(target),
            horizon,
            step,
            record_interval: 20.0 * step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.params.n;
        if self.initial_pi.len() != n {
            return Err(Error::invalid(format!(
                "initial state has {} strategies, parameters say {n}",
                self.initial_pi.len()
            )));
        }
        if self.initial_mu.len() != n || self.initial_mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("initial integrator state must be finite, length n"));
        }
        self.bias.check_n(n)?;
        if let Some(t) = &self.target {
            if t.len() != n {
                return Err(Error::invalid("target length differs from strategy count"));
            }
        }
        if let Some(c) = &self.cost {
            c.validate(n)?;
        }
        match &self.mechanism {
            MechanismChoice::None => {
                if self.cost.is_none() {
                    return Err(Error::invalid("a run without a mechanism needs a cost input"));
                }
            }
            MechanismChoice::Pi(_) => {
                if self.cost.is_some() {
                    return Err(Error::invalid(
                        "regulated runs take costs from the mechanism, not a cost input",
                    ));
                }
                if self.target.is_none() {
                    return Err(Error::invalid("regulated runs need a target distribution"));
                }
                if matches!(self.bias, BiasChoice::Multiplicative(_)) {
                    return Err(Error::invalid(
                        "the PI mechanism pairs with unbiased or additive-bias dynamics",
                    ));
                }
            }
            MechanismChoice::Saturated(_) => {
                if self.cost.is_some() {
                    return Err(Error::invalid(
                        "regulated runs take costs from the mechanism, not a cost input",
                    ));
                }
                if self.target.is_none() {
                    return Err(Error::invalid("regulated runs need a target distribution"));
                }
                if !matches!(self.bias, BiasChoice::Multiplicative(_)) {
                    return Err(Error::invalid(
                        "the saturated mechanism pairs with multiplicative-bias dynamics",
                    ));
                }
                if self.initial_mu.iter().any(|&m| m > 0.0) {
                    return Err(Error::invalid(
                        "the saturated mechanism needs a nonpositive initial integrator state",
                    ));
                }
            }
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.step.is_finite() && self.step > 0.0 && self.step <= self.horizon) {
            return Err(Error::invalid(format!(
                "step must lie in (0, horizon], got {}",
                self.step
            )));
        }
        if !(self.record_interval.is_finite() && self.record_interval > 0.0) {
            return Err(Error::invalid("record interval must be positive"));
        }
        Ok(())
    }

    /// Gain-condition verdict for the scenario's bias/mechanism pairing.
    pub fn gain_condition(&self) -> Result<crate::mechanism::GainVerdict> {
        match (&self.mechanism, &self.bias) {
            (MechanismChoice::Pi(gains), BiasChoice::Additive(bias)) => {
                Ok(check_gain_condition(&GainCondition::PiAdditive { gains, bias }))
            }
            (MechanismChoice::Saturated(gains), BiasChoice::Multiplicative(bias)) => Ok(
                check_gain_condition(&GainCondition::SaturatedMultiplicative { gains, bias }),
            ),
            _ => Err(Error::invalid(
                "no gain condition applies: need PI + additive or saturated + multiplicative",
            )),
        }
    }

    /// Time grid snapped so `records * stride` integration steps of equal
    /// size land exactly on the horizon.
    fn grid(&self) -> (usize, usize, f64) {
        let stride = (self.record_interval / self.step).round().max(1.0) as usize;
        let records = (self.horizon / (stride as f64 * self.step)).round().max(1.0) as usize;
        let total_steps = records * stride;
        let step = self.horizon / total_steps as f64;
        (total_steps, stride, step)
    }
}

/// One recorded instant of a run. `y` is the weighted flow `W(pi) dpi/dt`
/// under a multiplicative bias and the raw flow `dpi/dt` otherwise;
/// `mech_storage` is the mechanism storage (PI tracking energy or saturated
/// Bregman energy, zero without a mechanism) and `lyapunov` its sum with the
/// dynamics storage.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub pi: Vec<f64>,
    pub tau: Vec<f64>,
    pub cost: Vec<f64>,
    pub mu: Vec<f64>,
    pub y: Vec<f64>,
    pub storage: f64,
    pub mech_storage: f64,
    pub lyapunov: f64,
    /// Saturated-storage dual argument left [0, 1] and was clamped here.
    pub clamped: bool,
    /// Per-component saturation branches (empty unless the saturated
    /// mechanism is active).
    pub branch: Vec<bool>,
}

/// A uniformly sampled run: the scenario that produced it, the record
/// spacing, and the samples.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub scenario: Scenario,
    pub dt: f64,
    pub samples: Vec<Sample>,
}

impl TrajectoryRecord {
    pub fn n(&self) -> usize {
        self.scenario.params.n
    }
}

struct Eval {
    pi_dot: Vec<f64>,
    mu_dot: Vec<f64>,
    cost: Vec<f64>,
    tau: Vec<f64>,
    saturated: Vec<bool>,
}

struct Engine<'a> {
    sc: &'a Scenario,
    target: Vec<f64>,
    pairs: Vec<ConjugatePair>,
}

impl Engine<'_> {
    fn eval(&self, t: f64, pi: &[f64], mu: &[f64]) -> Result<Eval> {
        let n = pi.len();
        let (cost, mu_dot, saturated) = match &self.sc.mechanism {
            MechanismChoice::None => (
                self.sc.cost.as_ref().expect("validated").eval(t),
                vec![0.0; n],
                Vec::new(),
            ),
            MechanismChoice::Pi(g) => {
                let out = g.step(pi, &self.target, mu);
                (out.cost, out.mu_dot, Vec::new())
            }
            MechanismChoice::Saturated(g) => {
                let out = g.step(pi, &self.target, mu)?;
                (out.cost, out.mu_dot, out.saturated)
            }
        };
        let tau = self.sc.bias.apply(&cost, pi);
        let pi_dot = logit_vector_field(&self.sc.params, pi, &tau);
        Ok(Eval { pi_dot, mu_dot, cost, tau, saturated })
    }

    fn sample(&self, t: f64, pi: &[f64], mu: &[f64]) -> Result<Sample> {
        let ev = self.eval(t, pi, mu)?;
        let y = match &self.sc.bias {
            BiasChoice::Multiplicative(b) => b
                .weights(pi)
                .iter()
                .zip(&ev.pi_dot)
                .map(|(w, d)| w * d)
                .collect(),
            _ => ev.pi_dot.clone(),
        };
        let storage = storage_closed_form(&self.sc.params, pi, &ev.tau);
        let (mech_storage, clamped) = match &self.sc.mechanism {
            MechanismChoice::None => (0.0, false),
            MechanismChoice::Pi(g) => (g.storage(pi, &self.target), false),
            MechanismChoice::Saturated(g) => storage_u(g, &self.pairs, pi, &self.target, mu)?,
        };
        Ok(Sample {
            t,
            pi: pi.to_vec(),
            tau: ev.tau,
            cost: ev.cost,
            mu: mu.to_vec(),
            y,
            storage,
            mech_storage,
            lyapunov: storage + mech_storage,
            clamped,
            branch: ev.saturated,
        })
    }
}

fn check_sample(sc: &Scenario, s: &Sample) -> std::result::Result<(), String> {
    if s.pi.iter().any(|v| !v.is_finite()) || s.mu.iter().any(|v| !v.is_finite()) {
        return Err("state became non-finite".into());
    }
    let sum: f64 = s.pi.iter().sum();
    if (sum - 1.0).abs() > SUM_DRIFT_TOL {
        return Err(format!("simplex sum drifted to {sum}"));
    }
    if s.pi.iter().any(|&v| v <= 0.0 || v >= 1.0) {
        return Err("population state left the interior of the simplex".into());
    }
    if let MechanismChoice::Saturated(g) = &sc.mechanism {
        if let Some(bad) = s.mu.iter().find(|&&m| m > MU_RECORD_TOL) {
            return Err(format!("saturated integrator went positive: {bad}"));
        }
        let bound = g.cost_bound();
        if let Some(bad) = s.cost.iter().find(|&&t| t >= bound) {
            return Err(format!("cost {bad} reached the structural bound {bound}"));
        }
    }
    Ok(())
}

/// Integrates the scenario and records a uniformly sampled trajectory.
///
/// The run aborts — returning the partial record inside the error — if any
/// recorded sample breaches an invariant: non-finite state, simplex-sum drift
/// beyond `1e-7`, loss of interiority, or (saturated mechanism) a positive
/// integrator component or a cost at its structural ceiling.
pub fn run(scenario: &Scenario) -> Result<TrajectoryRecord> {
    scenario.validate()?;
    let (total_steps, stride, h) = scenario.grid();
    let target = scenario.target.as_ref().map(|t| t.to_vec()).unwrap_or_default();
    let pairs = match (&scenario.mechanism, &scenario.bias) {
        (MechanismChoice::Saturated(_), BiasChoice::Multiplicative(b)) => conjugate_pairs(b)?,
        _ => Vec::new(),
    };
    let engine = Engine { sc: scenario, target, pairs };

    let mut pi = scenario.initial_pi.to_vec();
    let mut mu = scenario.initial_mu.clone();
    let n = pi.len();
    let records = total_steps / stride;
    let mut samples: Vec<Sample> = Vec::with_capacity(records + 1);
    let dt = stride as f64 * h;

    let abort = |samples: Vec<Sample>, t: f64, reason: String| Error::AbortedRun {
        t,
        reason,
        partial: Box::new(TrajectoryRecord {
            scenario: scenario.clone(),
            dt,
            samples,
        }),
    };

    for step_idx in 0..=total_steps {
        let t = step_idx as f64 * h;
        if step_idx % stride == 0 {
            let s = match engine.sample(t, &pi, &mu) {
                Ok(s) => s,
                Err(Error::InvariantViolation(msg)) => return Err(abort(samples, t, msg)),
                Err(e) => return Err(e),
            };
            if let Err(reason) = check_sample(scenario, &s) {
                samples.push(s);
                return Err(abort(samples, t, reason));
            }
            samples.push(s);
        }
        if step_idx == total_steps {
            break;
        }

        // Classical fourth-order Runge-Kutta on the stacked state (pi, mu).
        let stage = |e: Result<Eval>| match e {
            Ok(ev) => Ok(ev),
            Err(Error::InvariantViolation(msg)) => Err(msg),
            Err(other) => Err(other.to_string()),
        };
        let half = 0.5 * h;
        let k1 = match stage(engine.eval(t, &pi, &mu)) {
            Ok(e) => e,
            Err(m) => return Err(abort(samples, t, m)),
        };
        let (p2, m2) = advance(&pi, &mu, &k1, half);
        let k2 = match stage(engine.eval(t + half, &p2, &m2)) {
            Ok(e) => e,
            Err(m) => return Err(abort(samples, t, m)),
        };
        let (p3, m3) = advance(&pi, &mu, &k2, half);
        let k3 = match stage(engine.eval(t + half, &p3, &m3)) {
            Ok(e) => e,
            Err(m) => return Err(abort(samples, t, m)),
        };
        let (p4, m4) = advance(&pi, &mu, &k3, h);
        let k4 = match stage(engine.eval(t + h, &p4, &m4)) {
            Ok(e) => e,
            Err(m) => return Err(abort(samples, t, m)),
        };
        for i in 0..n {
            pi[i] += h / 6.0
                * (k1.pi_dot[i] + 2.0 * k2.pi_dot[i] + 2.0 * k3.pi_dot[i] + k4.pi_dot[i]);
            mu[i] += h / 6.0
                * (k1.mu_dot[i] + 2.0 * k2.mu_dot[i] + 2.0 * k3.mu_dot[i] + k4.mu_dot[i]);
        }
    }

    Ok(TrajectoryRecord { scenario: scenario.clone(), dt, samples })
}

fn advance(pi: &[f64], mu: &[f64], k: &Eval, h: f64) -> (Vec<f64>, Vec<f64>) {
    let p = pi.iter().zip(&k.pi_dot).map(|(x, d)| x + h * d).collect();
    let m = mu.iter().zip(&k.mu_dot).map(|(x, d)| x + h * d).collect();
    (p, m)
}

/// Trailing-window convergence test: the run converged when every sample in
/// the final `window` time units lies within `epsilon` of the target. Returns
/// the earliest time from which the distance stays below `epsilon`.
pub fn detect_convergence(
    traj: &TrajectoryRecord,
    epsilon: f64,
    window: f64,
) -> Result<(bool, Option<f64>)> {
    if !(epsilon > 0.0 && window >= 0.0) {
        return Err(Error::invalid("convergence needs epsilon > 0 and window >= 0"));
    }
    let target = traj
        .scenario
        .target
        .as_ref()
        .ok_or_else(|| Error::invalid("convergence detection needs a scenario target"))?
        .to_vec();
    let last = traj
        .samples
        .last()
        .ok_or_else(|| Error::invalid("convergence detection needs a nonempty trajectory"))?;
    let dist = |s: &Sample| -> f64 {
        s.pi.iter()
            .zip(&target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let cutoff = last.t - window;
    let converged = traj
        .samples
        .iter()
        .filter(|s| s.t >= cutoff)
        .all(|s| dist(s) < epsilon);
    if !converged {
        return Ok((false, None));
    }
    // Earliest sample after the last excursion above epsilon.
    let mut time = traj.samples[0].t;
    for (i, s) in traj.samples.iter().enumerate() {
        if dist(s) >= epsilon {
            time = traj.samples.get(i + 1).map(|s| s.t).unwrap_or(last.t);
        }
    }
    Ok((converged, Some(time)))
}

/// One row of a gain sweep.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub kappa: f64,
    /// Strict gain inequality verdict, when one applies to the pairing.
    pub gain_satisfied: Option<bool>,
    pub converged: bool,
    pub convergence_time: Option<f64>,
    /// Most negative certificate residual across all applicable certificates.
    pub worst_residual: Option<f64>,
    pub aborted: bool,
    pub error: Option<String>,
}

/// Reruns `base` once per `kappa`, in parallel, reporting convergence and the
/// worst certificate residual for each gain. Rows for gains that fail
/// validation (or abort) carry the error instead of results.
pub fn gain_sweep(
    base: &Scenario,
    kappas: &[f64],
    epsilon: f64,
    window: f64,
) -> Result<Vec<SweepRow>> {
    if matches!(base.mechanism, MechanismChoice::None) {
        return Err(Error::invalid("gain sweeps need a scenario with a mechanism"));
    }
    base.validate()?;
    Ok(kappas
        .par_iter()
        .map(|&kappa| sweep_row(base, kappa, epsilon, window))
        .collect())
}

fn sweep_row(base: &Scenario, kappa: f64, epsilon: f64, window: f64) -> SweepRow {
    let mut row = SweepRow {
        kappa,
        gain_satisfied: None,
        converged: false,
        convergence_time: None,
        worst_residual: None,
        aborted: false,
        error: None,
    };
    let mut sc = base.clone();
    sc.mechanism = match &base.mechanism {
        MechanismChoice::Pi(g) => match PiGains::new(g.rho, kappa) {
            Ok(g) => MechanismChoice::Pi(g),
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        },
        MechanismChoice::Saturated(g) => {
            match SaturatedGains::new(g.rho, kappa, g.alpha, g.base_cost) {
                Ok(g) => MechanismChoice::Saturated(g),
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            }
        }
        MechanismChoice::None => unreachable!("checked by gain_sweep"),
    };
    row.gain_satisfied = sc.gain_condition().ok().map(|v| v.is_satisfied());
    let traj = match run(&sc) {
        Ok(t) => t,
        Err(Error::AbortedRun { t, reason, .. }) => {
            row.aborted = true;
            row.error = Some(format!("aborted at t = {t}: {reason}"));
            return row;
        }
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    match detect_convergence(&traj, epsilon, window) {
        Ok((converged, time)) => {
            row.converged = converged;
            row.convergence_time = time;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    match certify::certify_all(&traj) {
        Ok(reports) => {
            row.worst_residual = reports
                .iter()
                .map(|r| r.worst_residual)
                .fold(None, |acc: Option<f64>, r| {
                    Some(acc.map_or(r, |a| a.min(r)))
                });
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}
