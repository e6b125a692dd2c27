//! Unimprovability diagnostics: the ratio functional
//! `Y[C,β,Δ](ξ, X, p) = ‖ξ‖_p / (C·p/(p−Δ)·β^p·‖X‖_p)` and its supremum `U`
//! over the exponential witness pair, for which `Y = (p−Δ)/p` exactly (both
//! norms are `Γ^{1/p}(p+1)` and cancel), so `U(1,1,Δ) = 1` in the limit.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::log_spaced;
use crate::quadrature::{moment_from_tail, QuadratureConfig};
use crate::tail::TailFunction;

/// `‖ξ‖_p / (C·p·(p−Δ)^{-1}·β^p·‖X‖_p)`.
pub fn y_functional(
    xi_norm_p: f64,
    x_norm_p: f64,
    c: f64,
    beta: f64,
    delta: f64,
    p: f64,
) -> Result<f64> {
    if !(p > delta) {
        return Err(Error::Domain(format!("Y needs p > Delta, got p = {p}, Delta = {delta}")));
    }
    if !(xi_norm_p > 0.0 && x_norm_p > 0.0 && c > 0.0 && beta > 0.0) {
        return Err(Error::Domain("Y inputs must be positive".into()));
    }
    Ok(xi_norm_p / (c * p / (p - delta) * beta.powf(p) * x_norm_p))
}

/// Supremum of `Y` over the exponential pair `ξ = X` with `C = β = 1` across
/// `p_grid`; `Y` is increasing in `p`, so the supremum sits at the largest
/// grid point.
pub fn u_estimate(delta: f64, p_grid: &[f64], cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    if p_grid.is_empty() {
        return Err(Error::Domain("p_grid must be non-empty".into()));
    }
    let mut sup = f64::NEG_INFINITY;
    let mut attained = f64::NAN;
    for &p in p_grid {
        let n = moment_from_tail(&TailFunction::Exponential, p, cfg)?;
        let y = y_functional(n.value, n.value, 1.0, 1.0, delta, p)?;
        if y > sup {
            sup = y;
            attained = p;
        }
    }
    Ok((sup, attained))
}

/// Scan record for the unimprovability experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SharpnessReport {
    pub delta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub beta: f64,
    pub p_grid: Vec<f64>,
    pub y_values: Vec<f64>,
    pub sup_y: f64,
    pub attained_p: f64,
    /// The closed-form limit of `(p−Δ)/p` as `p → ∞`; stated, not
    /// extrapolated.
    pub analytic_limit: f64,
}

/// Evaluates `Y` on the exponential pair over a log grid `(Δ, p_max]` and
/// returns the full scan. `C` and `β` rescale the ratio without changing its
/// monotonicity.
pub fn sharpness_scan(
    delta: f64,
    c: f64,
    beta: f64,
    p_max: f64,
    n_points: usize,
    cfg: &QuadratureConfig,
) -> Result<SharpnessReport> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("Delta must be positive, got {delta}")));
    }
    if !(p_max > delta + 1e-6) || n_points < 2 {
        return Err(Error::Domain(format!(
            "need p_max > Delta and at least two points, got p_max = {p_max}, n = {n_points}"
        )));
    }
    let lo = (delta * 1.05).max(1.0 + 1e-6).min(p_max * 0.5);
    let p_grid = log_spaced(lo, p_max, n_points);
    let mut y_values = Vec::with_capacity(p_grid.len());
    let mut sup_y = f64::NEG_INFINITY;
    let mut attained_p = f64::NAN;
    for &p in &p_grid {
        let n = moment_from_tail(&TailFunction::Exponential, p, cfg)?;
        let y = y_functional(n.value, n.value, c, beta, delta, p)?;
        if y > sup_y {
            sup_y = y;
            attained_p = p;
        }
        y_values.push(y);
    }
    Ok(SharpnessReport {
        delta,
        c,
        beta,
        p_grid,
        y_values,
        sup_y,
        attained_p,
        analytic_limit: 1.0,
    })
}

impl SharpnessReport {
    /// Writes the scan as CSV with columns `p,Y`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "p,Y")?;
        for (p, y) in self.p_grid.iter().zip(&self.y_values) {
            writeln!(f, "{},{}", crate::report::sig9(*p), crate::report::sig9(*y))?;
        }
        Ok(())
    }
}
