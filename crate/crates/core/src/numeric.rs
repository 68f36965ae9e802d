//! Small numerical building blocks: monotone cubic interpolation, safeguarded
//! Newton inversion, and cumulative quadrature.

use crate::{Error, Result};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
///
/// Preserves the monotonicity of the data: if `ys` is nondecreasing
/// (nonincreasing) the interpolant is too, so it is safe for strictly
/// monotone curves like bias functions and their primitives.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::invalid("interpolation nodes and values differ in length"));
        }
        if xs.len() < 2 {
            return Err(Error::invalid("interpolation needs at least two nodes"));
        }
        if xs.iter().any(|v| !v.is_finite()) || ys.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("interpolation data must be finite"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("interpolation abscissae must be strictly increasing"));
        }
        let slopes = fritsch_carlson_slopes(&xs, &ys);
        Ok(MonotoneCubic { xs, ys, slopes })
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn segment(&self, x: f64) -> usize {
        // Clamped evaluation: outside the data range we use the end segments.
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    /// Value of the interpolant; clamps `x` to the data range.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.lo(), self.hi());
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// Derivative of the interpolant; clamps `x` to the data range.
    pub fn derivative(&self, x: f64) -> f64 {
        let x = x.clamp(self.lo(), self.hi());
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let dh00 = (6.0 * t * t - 6.0 * t) / h;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = (-6.0 * t * t + 6.0 * t) / h;
        let dh11 = 3.0 * t * t - 2.0 * t;
        dh00 * self.ys[i] + dh10 * self.slopes[i] + dh01 * self.ys[i + 1] + dh11 * self.slopes[i + 1]
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

fn fritsch_carlson_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut m = vec![0.0; n];

    m[0] = endpoint_slope(h[0], h.get(1).copied().unwrap_or(h[0]), d[0], d.get(1).copied().unwrap_or(d[0]));
    m[n - 1] = endpoint_slope(
        h[n - 2],
        if n >= 3 { h[n - 3] } else { h[n - 2] },
        d[n - 2],
        if n >= 3 { d[n - 3] } else { d[n - 2] },
    );
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Solve `f(x) = target` for a strictly increasing `f` on `[lo, hi]` with
/// safeguarded Newton steps (bisection fallback). `df` must be positive on
/// the bracket.
pub fn invert_increasing(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    target: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> f64 {
    let mut a = lo;
    let mut b = hi;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x) - target;
        if fx.abs() == 0.0 {
            return x;
        }
        if fx > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !next.is_finite() || next <= a || next >= b {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= tol {
            return next;
        }
        x = next;
    }
    x
}

/// Cumulative integral of `f` over `[lo, hi]` on `intervals + 1` uniform
/// nodes, one Simpson rule per interval. Returns node values of the running
/// integral starting at 0.
pub fn cumulative_integral(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> Vec<f64> {
    let h = (hi - lo) / intervals as f64;
    let mut out = Vec::with_capacity(intervals + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..intervals {
        let a = lo + i as f64 * h;
        let b = a + h;
        acc += h / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
        out.push(acc);
    }
    out
}

/// Node values of the first and second running antiderivatives of `w` on
/// `[0, 1]`: `g(x) = ∫_0^x w` and `G(x) = ∫_0^x g`, both on `intervals + 1`
/// uniform nodes.
pub fn nested_antiderivatives(
    w: impl Fn(f64) -> f64,
    intervals: usize,
) -> (Vec<f64>, Vec<f64>) {
    let fine = cumulative_integral(&w, 0.0, 1.0, 2 * intervals);
    let h = 1.0 / intervals as f64;
    let grad: Vec<f64> = (0..=intervals).map(|i| fine[2 * i]).collect();
    let mut second = Vec::with_capacity(intervals + 1);
    second.push(0.0);
    let mut acc = 0.0;
    for i in 0..intervals {
        acc += h / 6.0 * (fine[2 * i] + 4.0 * fine[2 * i + 1] + fine[2 * i + 2]);
        second.push(acc);
    }
    (grad, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn interpolates_monotone_data_exactly_at_nodes() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 1.0 - 0.5 * x * x).collect();
        let c = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_abs_diff_eq!(c.eval(*x), *y, epsilon = 1e-14);
        }
        // Stays within the data range between nodes (monotone decreasing data).
        let mut prev = c.eval(0.0);
        for i in 1..=1000 {
            let v = c.eval(i as f64 / 1000.0);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn interpolant_derivative_tracks_smooth_function() {
        let xs: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x * x * x).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for i in 0..=50 {
            let x = 0.01 + 0.98 * i as f64 / 50.0;
            assert_abs_diff_eq!(c.derivative(x), 3.0 * x * x, epsilon = 1e-3);
        }
    }

    #[test]
    fn rejects_unsorted_nodes() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn newton_inverts_quadratic_primitive() {
        // f(x) = 2x - x^2/2 is the running integral of 2 - x.
        let f = |x: f64| 2.0 * x - 0.5 * x * x;
        let df = |x: f64| 2.0 - x;
        let x = invert_increasing(f, df, 0.875, 0.0, 1.0, 1e-14);
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cumulative_integral_matches_closed_form() {
        let nodes = cumulative_integral(|x| x * x, 0.0, 1.0, 64);
        for (i, v) in nodes.iter().enumerate() {
            let x = i as f64 / 64.0;
            assert_abs_diff_eq!(*v, x * x * x / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn nested_antiderivatives_match_closed_forms() {
        // w(x) = 2 - x: g = 2x - x^2/2, G = x^2 - x^3/6.
        let (g, big_g) = nested_antiderivatives(|x| 2.0 - x, 256);
        for i in 0..=256 {
            let x = i as f64 / 256.0;
            assert_abs_diff_eq!(g[i], 2.0 * x - 0.5 * x * x, epsilon = 1e-12);
            assert_abs_diff_eq!(big_g[i], x * x - x * x * x / 6.0, epsilon = 1e-12);
        }
    }
}
