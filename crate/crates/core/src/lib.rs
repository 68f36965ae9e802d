//! Population dynamics under conformity bias, with passivity-based inducement.
//!
//! The crate simulates a population of decision makers choosing among `n`
//! strategies. The population state `pi` relaxes toward a softmax of the
//! negated perceived costs (logit dynamics). Perceived costs may be distorted
//! by a conformity bias, either additive (`tau = T + B(pi)`) or multiplicative
//! (`tau = W(pi) * T`), and a controller ("mechanism") may shape the actual
//! cost `T` to steer the population to a target distribution.
//!
//! Alongside the simulator, [`certify`] checks the energy inequalities that
//! justify the design — storage-function decay, passivity-shortage bounds, and
//! Lyapunov monotonicity — numerically along recorded trajectories.
//!
//! Organization:
//! - [`simplex`]: interior probability-simplex states.
//! - [`logit`]: the softmax steady-state map and the relaxation vector field.
//! - [`storage`]: the logit block's storage function (closed form, an
//!   independent brute-force evaluation, and a radial growth probe).
//! - [`bias`]: additive and multiplicative conformity-bias families with
//!   verified bound constants.
//! - [`mechanism`]: the PI inducement mechanism, its saturated variant with a
//!   bounded cost guarantee, and the convex-conjugate machinery behind the
//!   saturated mechanism's storage function.
//! - [`sim`]: closed-loop RK4 integration, trajectory recording, convergence
//!   detection, and gain sweeps.
//! - [`certify`]: certificate reports for every inequality, computed by finite
//!   differences over recorded trajectories.

pub mod bias;
pub mod certify;
mod error;
pub mod logit;
pub mod mechanism;
pub mod numeric;
pub mod sim;
pub mod simplex;
pub mod storage;

pub use bias::{AdditiveBias, MultiplicativeBias, ScalarFamily};
pub use certify::{CertificateId, CertificateReport, CertificateVerdict};
pub use error::Error;
pub use logit::{logit_vector_field, softmax_q, CostVector, LogitParams};
pub use mechanism::{
    check_gain_condition, ConjugatePair, GainVerdict, PiGains, SaturatedGains,
};
pub use sim::{
    detect_convergence, gain_sweep, run, BiasChoice, CostInput, MechanismChoice, Sample, Scenario,
    SweepRow, TrajectoryRecord,
};
pub use simplex::PopulationState;
pub use storage::{storage_closed_form, StorageSample};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
