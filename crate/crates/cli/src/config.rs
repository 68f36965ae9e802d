//! JSON experiment configuration: schema, validation, and conversion into a
//! library [`Scenario`]. Unknown keys are rejected everywhere so typos fail
//! loudly instead of silently running a different experiment.

use std::path::Path;

use popdyn::bias::{AdditiveBias, MultiplicativeBias, ScalarFamily};
use popdyn::logit::LogitParams;
use popdyn::mechanism::{PiGains, SaturatedGains};
use popdyn::sim::{BiasChoice, CostInput, MechanismChoice, Scenario, Sinusoid};
use popdyn::simplex::PopulationState;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub eta: f64,
    pub beta: f64,
    pub strategies: usize,
    pub bias: BiasConfig,
    #[serde(default)]
    pub mechanism: MechanismConfig,
    /// Target distribution; required with a mechanism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    /// Exogenous cost signal; required without a mechanism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostConfig>,
    pub initial_pi: Vec<f64>,
    /// Defaults to zeros.
    #[serde(default)]
    pub initial_mu: Option<Vec<f64>>,
    pub horizon: f64,
    /// Integrator step; defaults to `1e-3 / eta`.
    #[serde(default)]
    pub step: Option<f64>,
    /// Sample spacing of the recorded trajectory; defaults to `20 * step`.
    #[serde(default)]
    pub record_interval: Option<f64>,
    /// Convergence test used in summaries; defaults to epsilon 1e-3 over the
    /// final tenth of the horizon.
    #[serde(default)]
    pub convergence: Option<ConvergenceConfig>,
    /// Gain sweep specification; required by the sweep command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

/// One scalar curve on [0, 1]: a bias summand `b_k` or weight `w_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    Affine {
        offset: f64,
        slope: f64,
    },
    /// `b0 - c1 x - c2 (3 x^2 - 2 x^3)`.
    Cubic {
        b0: f64,
        c1: f64,
        c2: f64,
    },
    /// Monotone interpolation of sampled points, inline or from a
    /// two-column CSV (x, value) resolved relative to the config file.
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<(f64, f64)>>,
    },
}

impl CurveConfig {
    fn build(&self, base_dir: &Path) -> anyhow::Result<ScalarFamily> {
        let family = match self {
            CurveConfig::Affine { offset, slope } => ScalarFamily::affine(*offset, *slope)?,
            CurveConfig::Cubic { b0, c1, c2 } => ScalarFamily::cubic(*b0, *c1, *c2)?,
            CurveConfig::Tabulated { path, points } => match (path, points) {
                (Some(path), None) => {
                    ScalarFamily::tabulated_from_csv(&base_dir.join(path))?
                }
                (None, Some(points)) => ScalarFamily::tabulated(points)?,
                _ => anyhow::bail!(
                    "a tabulated curve needs exactly one of \"path\" or \"points\""
                ),
            },
        };
        Ok(family)
    }
}

/// `curves` holds either one curve shared by all strategies or one per
/// strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum BiasConfig {
    None,
    Additive { curves: Vec<CurveConfig> },
    Multiplicative { curves: Vec<CurveConfig> },
}

impl BiasConfig {
    fn build(&self, n: usize, base_dir: &Path) -> anyhow::Result<BiasChoice> {
        let expand = |curves: &Vec<CurveConfig>| -> anyhow::Result<Vec<ScalarFamily>> {
            let families: Vec<ScalarFamily> = curves
                .iter()
                .map(|c| c.build(base_dir))
                .collect::<anyhow::Result<_>>()?;
            match families.len() {
                1 => Ok(vec![families[0].clone(); n]),
                len if len == n => Ok(families),
                len => anyhow::bail!(
                    "expected 1 shared curve or {n} per-strategy curves, got {len}"
                ),
            }
        };
        Ok(match self {
            BiasConfig::None => BiasChoice::Unbiased,
            BiasConfig::Additive { curves } => {
                BiasChoice::Additive(AdditiveBias::new(expand(curves)?)?)
            }
            BiasConfig::Multiplicative { curves } => {
                BiasChoice::Multiplicative(MultiplicativeBias::new(expand(curves)?)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MechanismConfig {
    None,
    Pi { rho: f64, kappa: f64 },
    Saturated { rho: f64, kappa: f64, alpha: f64, base_cost: f64 },
}

impl Default for MechanismConfig {
    fn default() -> Self {
        MechanismConfig::None
    }
}

impl MechanismConfig {
    fn build(&self) -> anyhow::Result<MechanismChoice> {
        Ok(match self {
            MechanismConfig::None => MechanismChoice::None,
            MechanismConfig::Pi { rho, kappa } => {
                MechanismChoice::Pi(PiGains::new(*rho, *kappa)?)
            }
            MechanismConfig::Saturated { rho, kappa, alpha, base_cost } => {
                MechanismChoice::Saturated(SaturatedGains::new(*rho, *kappa, *alpha, *base_cost)?)
            }
        })
    }

}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidConfig {
    pub amplitude: Vec<f64>,
    pub angular_frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostConfig {
    Constant { values: Vec<f64> },
    Sinusoids { base: Vec<f64>, terms: Vec<SinusoidConfig> },
}

impl CostConfig {
    fn build(&self) -> CostInput {
        match self {
            CostConfig::Constant { values } => CostInput::Constant(values.clone()),
            CostConfig::Sinusoids { base, terms } => CostInput::SinusoidMix {
                base: base.clone(),
                terms: terms
                    .iter()
                    .map(|t| Sinusoid {
                        amplitude: t.amplitude.clone(),
                        angular_frequency: t.angular_frequency,
                        phase: t.phase,
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub epsilon: f64,
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kappas: Vec<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub window: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))?;
        cfg.materialize();
        Ok(cfg)
    }

    /// Fills every defaulted field so a serialized config round-trips to an
    /// identical document.
    pub fn materialize(&mut self) {
        let step = self.step.unwrap_or(1e-3 / self.eta);
        self.step = Some(step);
        self.record_interval = Some(self.record_interval.unwrap_or(20.0 * step));
        self.initial_mu = Some(
            self.initial_mu
                .clone()
                .unwrap_or_else(|| vec![0.0; self.strategies]),
        );
        self.convergence = Some(self.convergence.clone().unwrap_or(ConvergenceConfig {
            epsilon: 1e-3,
            window: 0.1 * self.horizon,
        }));
        if let Some(sweep) = &mut self.sweep {
            let conv = self.convergence.as_ref().expect("materialized above");
            sweep.epsilon = Some(sweep.epsilon.unwrap_or(conv.epsilon));
            sweep.window = Some(sweep.window.unwrap_or(conv.window));
        }
    }

    /// Builds the library scenario; `base_dir` anchors relative curve paths.
    pub fn to_scenario(&self, base_dir: &Path) -> anyhow::Result<Scenario> {
        let params = LogitParams::new(self.eta, self.beta, self.strategies)?;
        let bias = self.bias.build(self.strategies, base_dir)?;
        let mechanism = self.mechanism.build()?;
        let target = self
            .target
            .as_ref()
            .map(|t| PopulationState::new(t.clone()))
            .transpose()?;
        let initial_pi = PopulationState::new(self.initial_pi.clone())?;
        let scenario = Scenario {
            params,
            bias,
            mechanism,
            cost: self.cost.as_ref().map(|c| c.build()),
            initial_pi,
            initial_mu: self
                .initial_mu
                .clone()
                .unwrap_or_else(|| vec![0.0; self.strategies]),
            target,
            horizon: self.horizon,
            step: self.step.unwrap_or(1e-3 / self.eta),
            record_interval: self
                .record_interval
                .unwrap_or(20.0 * self.step.unwrap_or(1e-3 / self.eta)),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn convergence_settings(&self) -> (f64, f64) {
        match &self.convergence {
            Some(c) => (c.epsilon, c.window),
            None => (1e-3, 0.1 * self.horizon),
        }
    }
}
