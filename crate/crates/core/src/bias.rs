//! Conformity-bias models.
//!
//! A bias distorts how agents perceive the intrinsic strategy costs `T` as a
//! function of the current adoption shares. Both supported shapes act
//! componentwise through scalar curves of one strategy's share:
//!
//! * additive: `tau_k = T_k + b_k(pi_k)` with each `b_k` strictly decreasing,
//! * multiplicative: `tau_k = w_k(pi_k) * T_k` with each `w_k` positive and
//!   nonincreasing.
//!
//! Popular strategies therefore look cheaper than they are. At construction
//! the curves are sampled densely over `[0, 1]` to certify the range and slope
//! constants the passivity analysis leans on; for the analytic shapes the
//! sampled constants are cross-checked against the exact ones.

use std::path::Path;

use crate::numeric::MonotoneCubic;
use crate::{Error, Result};

/// Dense-sampling subdivisions used to certify curve constants. Odd midpoint
/// included so interior slope extrema of smooth curves are hit exactly.
const SAMPLE_INTERVALS: usize = 10_000;

/// Certified constants of a family of scalar curves over `[0, 1]`:
/// values lie in `[value_lo, value_hi]` and derivatives in
/// `[-slope_hi, -slope_lo]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasConstants {
    pub value_lo: f64,
    pub value_hi: f64,
    pub slope_lo: f64,
    pub slope_hi: f64,
}

#[derive(Debug, Clone)]
enum FamilyKind {
    Affine { offset: f64, slope: f64 },
    Cubic { b0: f64, c1: f64, c2: f64 },
    Tabulated(MonotoneCubic),
}

/// One scalar curve `[0, 1] -> R`, nonincreasing by construction.
#[derive(Debug, Clone)]
pub struct ScalarFamily {
    kind: FamilyKind,
}

impl ScalarFamily {
    /// `f(x) = offset - slope * x` with `slope >= 0`.
    pub fn affine(offset: f64, slope: f64) -> Result<Self> {
        if !(offset.is_finite() && slope.is_finite() && slope >= 0.0) {
            return Err(Error::invalid(format!(
                "affine curve needs finite offset and nonnegative slope, got ({offset}, {slope})"
            )));
        }
        Ok(ScalarFamily { kind: FamilyKind::Affine { offset, slope } })
    }

    /// `f(x) = b0 - c1 x - c2 (3x^2 - 2x^3)` with `c1, c2 >= 0`. The slope
    /// magnitude ranges from `c1` at the endpoints to `c1 + 1.5 c2` at the
    /// midpoint.
    pub fn cubic(b0: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(b0.is_finite() && c1.is_finite() && c2.is_finite() && c1 >= 0.0 && c2 >= 0.0) {
            return Err(Error::invalid(format!(
                "cubic curve needs finite coefficients with c1, c2 >= 0, got ({b0}, {c1}, {c2})"
            )));
        }
        Ok(ScalarFamily { kind: FamilyKind::Cubic { b0, c1, c2 } })
    }

    /// Monotone-cubic interpolant through `(x, y)` nodes. The nodes must cover
    /// `[0, 1]` and descend.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let curve = MonotoneCubic::new(xs, ys)?;
        if curve.lo() > 0.0 || curve.hi() < 1.0 {
            return Err(Error::invalid(format!(
                "tabulated curve must cover [0, 1], got [{}, {}]",
                curve.lo(),
                curve.hi()
            )));
        }
        Ok(ScalarFamily { kind: FamilyKind::Tabulated(curve) })
    }

    /// Loads a tabulated curve from a two-column `x,y` file. Lines starting
    /// with `#` are skipped, as is an optional non-numeric header row.
    pub fn tabulated_from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let display = path.display().to_string();
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(xs), Some(ys)) = (cols.next(), cols.next()) else {
                return Err(Error::Parse {
                    path: display,
                    line: idx + 1,
                    message: "expected two comma-separated columns".into(),
                });
            };
            match (xs.parse::<f64>(), ys.parse::<f64>()) {
                (Ok(x), Ok(y)) => points.push((x, y)),
                _ if points.is_empty() => continue, // header row
                _ => {
                    return Err(Error::Parse {
                        path: display,
                        line: idx + 1,
                        message: format!("could not parse '{line}' as numbers"),
                    });
                }
            }
        }
        if points.len() < 2 {
            return Err(Error::Parse {
                path: display,
                line: text.lines().count(),
                message: "need at least two data rows".into(),
            });
        }
        ScalarFamily::tabulated(&points)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            FamilyKind::Affine { offset, slope } => offset - slope * x,
            FamilyKind::Cubic { b0, c1, c2 } => b0 - c1 * x - c2 * (3.0 * x * x - 2.0 * x * x * x),
            FamilyKind::Tabulated(curve) => curve.eval(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match &self.kind {
            FamilyKind::Affine { slope, .. } => -slope,
            FamilyKind::Cubic { c1, c2, .. } => -c1 - 6.0 * c2 * x * (1.0 - x),
            FamilyKind::Tabulated(curve) => curve.derivative(x),
        }
    }

    /// Closed-form running integrals `(∫_0^x f, ∫_0^x ∫_0^p f)` for shapes
    /// that admit one; the tabulated shape falls back to quadrature.
    pub(crate) fn exact_antiderivatives(&self, x: f64) -> Option<(f64, f64)> {
        match self.kind {
            FamilyKind::Affine { offset, slope } => Some((
                offset * x - 0.5 * slope * x * x,
                0.5 * offset * x * x - slope * x * x * x / 6.0,
            )),
            FamilyKind::Cubic { b0, c1, c2 } => {
                let x2 = x * x;
                let x3 = x2 * x;
                let x4 = x3 * x;
                let x5 = x4 * x;
                Some((
                    b0 * x - 0.5 * c1 * x2 - c2 * (x3 - 0.5 * x4),
                    0.5 * b0 * x2 - c1 * x3 / 6.0 - c2 * (0.25 * x4 - 0.1 * x5),
                ))
            }
            FamilyKind::Tabulated(_) => None,
        }
    }

    fn analytic_bounds(&self) -> Option<BiasConstants> {
        match self.kind {
            FamilyKind::Affine { offset, slope } => Some(BiasConstants {
                value_lo: offset - slope,
                value_hi: offset,
                slope_lo: slope,
                slope_hi: slope,
            }),
            FamilyKind::Cubic { b0, c1, c2 } => Some(BiasConstants {
                value_lo: b0 - c1 - c2,
                value_hi: b0,
                slope_lo: c1,
                slope_hi: c1 + 1.5 * c2,
            }),
            FamilyKind::Tabulated(_) => None,
        }
    }

    /// Certified constants over `[0, 1]`: sampled densely, cross-checked
    /// against the exact values for analytic shapes, and required to describe
    /// a nonincreasing curve.
    pub(crate) fn certified_bounds(&self) -> Result<BiasConstants> {
        let mut value_lo = f64::INFINITY;
        let mut value_hi = f64::NEG_INFINITY;
        let mut deriv_lo = f64::INFINITY;
        let mut deriv_hi = f64::NEG_INFINITY;
        for i in 0..=SAMPLE_INTERVALS {
            let x = i as f64 / SAMPLE_INTERVALS as f64;
            let v = self.eval(x);
            let d = self.deriv(x);
            if !v.is_finite() || !d.is_finite() {
                return Err(Error::invariant(format!("curve not finite at x = {x}")));
            }
            value_lo = value_lo.min(v);
            value_hi = value_hi.max(v);
            deriv_lo = deriv_lo.min(d);
            deriv_hi = deriv_hi.max(d);
        }
        if deriv_hi > 1e-9 {
            return Err(Error::invariant(format!(
                "curve must be nonincreasing on [0, 1]; max slope {deriv_hi}"
            )));
        }
        let sampled = BiasConstants {
            value_lo,
            value_hi,
            slope_lo: -deriv_hi.min(0.0),
            slope_hi: -deriv_lo,
        };
        if let Some(exact) = self.analytic_bounds() {
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-7 * (1.0 + a.abs().max(b.abs()));
            if !(close(sampled.value_lo, exact.value_lo)
                && close(sampled.value_hi, exact.value_hi)
                && close(sampled.slope_lo, exact.slope_lo)
                && close(sampled.slope_hi, exact.slope_hi))
            {
                return Err(Error::invariant(format!(
                    "sampled constants {sampled:?} disagree with exact {exact:?}"
                )));
            }
            return Ok(exact);
        }
        Ok(sampled)
    }
}

fn aggregate_bounds(families: &[ScalarFamily]) -> Result<BiasConstants> {
    if families.is_empty() {
        return Err(Error::invalid("bias needs at least one curve"));
    }
    let mut agg = BiasConstants {
        value_lo: f64::INFINITY,
        value_hi: f64::NEG_INFINITY,
        slope_lo: f64::INFINITY,
        slope_hi: 0.0,
    };
    for f in families {
        let b = f.certified_bounds()?;
        agg.value_lo = agg.value_lo.min(b.value_lo);
        agg.value_hi = agg.value_hi.max(b.value_hi);
        agg.slope_lo = agg.slope_lo.min(b.slope_lo);
        agg.slope_hi = agg.slope_hi.max(b.slope_hi);
    }
    Ok(agg)
}

/// Additive conformity bias `tau = T + b(pi)`, one strictly decreasing curve
/// per strategy.
#[derive(Debug, Clone)]
pub struct AdditiveBias {
    families: Vec<ScalarFamily>,
    constants: BiasConstants,
}

impl AdditiveBias {
    pub fn new(families: Vec<ScalarFamily>) -> Result<Self> {
        let constants = aggregate_bounds(&families)?;
        if constants.slope_lo <= 0.0 {
            return Err(Error::invalid(
                "additive bias curves must be strictly decreasing on [0, 1]",
            ));
        }
        Ok(AdditiveBias { families, constants })
    }

    /// Replicates one curve across `n` strategies.
    pub fn uniform(family: ScalarFamily, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("bias needs at least two strategies"));
        }
        AdditiveBias::new(vec![family; n])
    }

    pub fn n(&self) -> usize {
        self.families.len()
    }

    pub fn constants(&self) -> BiasConstants {
        self.constants
    }

    /// `b_k(pi_k)` componentwise.
    pub fn evaluate(&self, pi: &[f64]) -> Vec<f64> {
        self.families.iter().zip(pi).map(|(f, &p)| f.eval(p)).collect()
    }

    /// Diagonal of the bias Jacobian, `b_k'(pi_k)`.
    pub fn jacobian_diag(&self, pi: &[f64]) -> Vec<f64> {
        self.families.iter().zip(pi).map(|(f, &p)| f.deriv(p)).collect()
    }

    /// Perceived costs `T_k + b_k(pi_k)`.
    pub fn apply(&self, cost: &[f64], pi: &[f64]) -> Vec<f64> {
        self.families
            .iter()
            .zip(pi)
            .zip(cost)
            .map(|((f, &p), &t)| t + f.eval(p))
            .collect()
    }

    /// Excess-supply rate coefficient: the dissipation shortfall is at most
    /// `slope_hi * |d(pi)/dt|^2`.
    pub fn shortage_coefficient(&self) -> f64 {
        self.constants.slope_hi
    }
}

/// Multiplicative conformity bias `tau = W(pi) T` with positive, nonincreasing
/// diagonal weights `w_k(pi_k)`.
#[derive(Debug, Clone)]
pub struct MultiplicativeBias {
    families: Vec<ScalarFamily>,
    constants: BiasConstants,
}

impl MultiplicativeBias {
    pub fn new(families: Vec<ScalarFamily>) -> Result<Self> {
        let constants = aggregate_bounds(&families)?;
        if constants.value_lo <= 0.0 {
            return Err(Error::invalid(
                "multiplicative bias weights must stay positive on [0, 1]",
            ));
        }
        if constants.slope_lo <= 0.0 {
            return Err(Error::invalid(
                "multiplicative bias weights must be strictly decreasing on [0, 1]",
            ));
        }
        Ok(MultiplicativeBias { families, constants })
    }

    pub fn uniform(family: ScalarFamily, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("bias needs at least two strategies"));
        }
        MultiplicativeBias::new(vec![family; n])
    }

    pub fn n(&self) -> usize {
        self.families.len()
    }

    pub fn constants(&self) -> BiasConstants {
        self.constants
    }

    /// Per-strategy curve, used by the inducement machinery that integrates
    /// the weights.
    pub fn family(&self, k: usize) -> &ScalarFamily {
        &self.families[k]
    }

    /// `w_k(pi_k)` componentwise.
    pub fn weights(&self, pi: &[f64]) -> Vec<f64> {
        self.families.iter().zip(pi).map(|(f, &p)| f.eval(p)).collect()
    }

    /// Diagonal of the weight Jacobian, `w_k'(pi_k)`.
    pub fn weight_jacobian_diag(&self, pi: &[f64]) -> Vec<f64> {
        self.families.iter().zip(pi).map(|(f, &p)| f.deriv(p)).collect()
    }

    /// Perceived costs `w_k(pi_k) * T_k`.
    pub fn apply(&self, cost: &[f64], pi: &[f64]) -> Vec<f64> {
        self.families
            .iter()
            .zip(pi)
            .zip(cost)
            .map(|((f, &p), &t)| f.eval(p) * t)
            .collect()
    }

    /// Diagonal of the cost-coupling map `-W'(pi) diag(T)`.
    pub fn phi_diag(&self, cost: &[f64], pi: &[f64]) -> Vec<f64> {
        self.families
            .iter()
            .zip(pi)
            .zip(cost)
            .map(|((f, &p), &t)| -f.deriv(p) * t)
            .collect()
    }

    /// Excess-supply rate coefficient under a cost bound `t_max > 0`: the
    /// dissipation shortfall is at most `slope_hi * t_max / value_lo^2` times
    /// the squared weighted flow.
    pub fn shortage_coefficient(&self, t_max: f64) -> Result<f64> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::invalid(format!(
                "multiplicative shortage needs a positive cost bound, got {t_max}"
            )));
        }
        Ok(self.constants.slope_hi * t_max / (self.constants.value_lo * self.constants.value_lo))
    }
}
