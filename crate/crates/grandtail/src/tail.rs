//! Tail-function models of non-negative random variables.
//!
//! A random variable τ ≥ 0 is represented by its tail `T(t) = P(τ > t)`,
//! a nonincreasing, right-continuous function with `T(0) = 1` (for the
//! analytic presets) that decays to 0. Everything downstream — moments,
//! Doob bounds, GLS norms, sampling — is computed from the tail alone.

use std::f64::consts::E;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slowly varying factor `L(p)` used by the heavy-tail presets and the
/// `p^{1/m} L(p)` generating functions. Strictly positive on `[1, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlowlyVarying {
    /// `L ≡ 1`.
    One,
    /// `L(p) = [ln(p + 1)]^r`.
    LogPower { r: f64 },
}

impl SlowlyVarying {
    pub fn eval(&self, p: f64) -> f64 {
        match self {
            SlowlyVarying::One => 1.0,
            SlowlyVarying::LogPower { r } => (p + 1.0).ln().powf(*r),
        }
    }
}

/// Default absolute tolerance for quantile bisection.
pub const QUANTILE_TOL: f64 = 1e-12;
/// Default iteration cap for quantile bisection.
pub const QUANTILE_MAX_ITER: usize = 200;

/// A non-negative random variable given by its tail function.
///
/// The heavy-tail presets (`PowerLog`, `LogSquare`) are defined by their
/// formulas only for `t ≥ e`; they are extended by the constant 1 on
/// `[0, e)` and the formula value is clamped to `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailFunction {
    /// `T(t) = e^{-t}` — the standard exponential witness pair.
    Exponential,
    /// `T(t) = t^{-beta} (ln t)^gamma L(ln t)` for `t ≥ e`; `beta > 1`,
    /// `gamma > -1`.
    PowerLog {
        beta: f64,
        gamma: f64,
        l: SlowlyVarying,
    },
    /// `T(t) = exp(-0.5 ln²t / gamma)` for `t ≥ e`; `gamma > 0`.
    LogSquare { gamma: f64 },
    /// `T(t) = exp(-c t²)`; `c > 0`.
    Subgaussian { c: f64 },
    /// Right-continuous step function through `(t_i, T_i)` points with
    /// strictly increasing `t_i` and nonincreasing `T_i ∈ [0, 1]`;
    /// `T(t) = 1` below the first point and stays at the last value beyond
    /// the last point.
    EmpiricalTable { points: Vec<(f64, f64)> },
    /// Tail of `k·τ`: evaluates as `inner(t / k)`; `k > 0`.
    Scaled {
        inner: Box<TailFunction>,
        factor: f64,
    },
}

impl TailFunction {
    pub fn exponential() -> Self {
        TailFunction::Exponential
    }

    pub fn power_log(beta: f64, gamma: f64, l: SlowlyVarying) -> Result<Self> {
        if !(beta > 1.0) {
            return Err(Error::Domain(format!("PowerLog requires beta > 1, got {beta}")));
        }
        if !(gamma > -1.0) {
            return Err(Error::Domain(format!("PowerLog requires gamma > -1, got {gamma}")));
        }
        Ok(TailFunction::PowerLog { beta, gamma, l })
    }

    pub fn log_square(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Domain(format!("LogSquare requires gamma > 0, got {gamma}")));
        }
        Ok(TailFunction::LogSquare { gamma })
    }

    pub fn subgaussian(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Domain(format!("Subgaussian requires c > 0, got {c}")));
        }
        Ok(TailFunction::Subgaussian { c })
    }

    pub fn scaled(inner: TailFunction, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Domain(format!("scale factor must be positive, got {factor}")));
        }
        Ok(TailFunction::Scaled {
            inner: Box::new(inner),
            factor,
        })
    }

    /// Tail of the deterministic unit `X ≡ 1`: a step from 1 to 0 at `t = 1`.
    pub fn unit_point() -> Self {
        TailFunction::EmpiricalTable {
            points: vec![(1.0, 0.0)],
        }
    }

    /// Tail of the zero variable `τ ≡ 0`.
    pub fn zero() -> Self {
        TailFunction::EmpiricalTable {
            points: vec![(0.0, 0.0)],
        }
    }

    pub fn empirical(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("empirical table must be non-empty".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Domain("empirical t-values must be strictly increasing".into()));
            }
            if w[1].1 > w[0].1 {
                return Err(Error::Domain("empirical tail values must be nonincreasing".into()));
            }
        }
        for &(t, v) in &points {
            if t < 0.0 || !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("invalid empirical point ({t}, {v})")));
            }
        }
        Ok(TailFunction::EmpiricalTable { points })
    }

    /// Loads a two-column CSV `t,tail` (optional header) into an empirical
    /// table. Rejects non-monotone data.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (a, b) = match (parts.next(), parts.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Config(format!("line {}: expected two columns", i + 1))),
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(t), Ok(v)) => points.push((t, v)),
                _ if i == 0 => continue, // header row
                _ => return Err(Error::Config(format!("line {}: cannot parse '{line}'", i + 1))),
            }
        }
        TailFunction::empirical(points)
    }

    /// Re-checks the constructor invariants; used after deserializing.
    pub fn validate(&self) -> Result<()> {
        match self {
            TailFunction::Exponential => Ok(()),
            TailFunction::PowerLog { beta, gamma, l } => {
                TailFunction::power_log(*beta, *gamma, l.clone()).map(|_| ())
            }
            TailFunction::LogSquare { gamma } => TailFunction::log_square(*gamma).map(|_| ()),
            TailFunction::Subgaussian { c } => TailFunction::subgaussian(*c).map(|_| ()),
            TailFunction::EmpiricalTable { points } => {
                TailFunction::empirical(points.clone()).map(|_| ())
            }
            TailFunction::Scaled { inner, factor } => {
                if !(*factor > 0.0) || !factor.is_finite() {
                    return Err(Error::Domain(format!(
                        "scale factor must be positive, got {factor}"
                    )));
                }
                inner.validate()
            }
        }
    }

    /// `T(t)` for `t ≥ 0`.
    ///
    /// ```
    /// use grandtail::TailFunction;
    /// let t = TailFunction::Exponential;
    /// assert!((t.eval(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    /// assert_eq!(t.eval(0.0).unwrap(), 1.0);
    /// ```
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("tail argument must be >= 0, got {t}")));
        }
        Ok(self.eval_raw(t))
    }

    /// Evaluation without the domain check; callers guarantee `t ≥ 0`.
    pub(crate) fn eval_raw(&self, t: f64) -> f64 {
        match self {
            TailFunction::Exponential => (-t).exp(),
            TailFunction::PowerLog { beta, gamma, l } => {
                if t < E {
                    1.0
                } else {
                    let lt = t.ln();
                    (t.powf(-beta) * lt.powf(*gamma) * l.eval(lt)).clamp(0.0, 1.0)
                }
            }
            TailFunction::LogSquare { gamma } => {
                if t < E {
                    1.0
                } else {
                    let lt = t.ln();
                    (-0.5 * lt * lt / gamma).exp()
                }
            }
            TailFunction::Subgaussian { c } => (-c * t * t).exp(),
            TailFunction::EmpiricalTable { points } => {
                // right-continuous step: value of the last point with t_i <= t
                match points.partition_point(|&(ti, _)| ti <= t) {
                    0 => 1.0,
                    k => points[k - 1].1,
                }
            }
            TailFunction::Scaled { inner, factor } => inner.eval_raw(t / factor),
        }
    }

    /// Generalized inverse `inf { t ≥ 0 : T(t) ≤ q }` for `q ∈ (0, 1]`.
    ///
    /// Analytic for the presets, bisection (`QUANTILE_TOL`, `QUANTILE_MAX_ITER`)
    /// otherwise.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        self.quantile_with(q, QUANTILE_TOL, QUANTILE_MAX_ITER)
    }

    pub fn quantile_with(&self, q: f64, tol: f64, max_iter: usize) -> Result<f64> {
        if q.is_nan() || q > 1.0 {
            return Err(Error::Domain(format!("quantile level must lie in (0, 1], got {q}")));
        }
        if q <= 0.0 {
            return Err(Error::UnboundedQuantile(q));
        }
        if q >= 1.0 {
            return Ok(0.0);
        }
        match self {
            TailFunction::Exponential => Ok(-q.ln()),
            TailFunction::Subgaussian { c } => Ok((-q.ln() / c).sqrt()),
            TailFunction::LogSquare { gamma } => {
                let at_e = (-0.5 / gamma).exp();
                if q >= at_e {
                    Ok(E)
                } else {
                    Ok((2.0 * gamma * (1.0 / q).ln()).sqrt().exp())
                }
            }
            TailFunction::Scaled { inner, factor } => {
                Ok(factor * inner.quantile_with(q, tol, max_iter)?)
            }
            TailFunction::EmpiricalTable { points } => {
                match points.iter().find(|&&(_, v)| v <= q) {
                    Some(&(t, _)) => Ok(t),
                    None => Err(Error::Divergent(format!(
                        "empirical tail never drops to q = {q}"
                    ))),
                }
            }
            TailFunction::PowerLog { .. } => self.quantile_bisect(q, tol, max_iter),
        }
    }

    fn quantile_bisect(&self, q: f64, tol: f64, max_iter: usize) -> Result<f64> {
        // Find a bracket [lo, hi] with T(lo) > q >= T(hi) by doubling.
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut iters = 0usize;
        while self.eval_raw(hi) > q {
            lo = hi;
            hi *= 2.0;
            iters += 1;
            if iters > 2100 {
                return Err(Error::Divergent(format!("tail never drops to q = {q}")));
            }
        }
        for _ in 0..max_iter {
            if hi - lo <= tol || (hi - lo) <= tol * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.eval_raw(mid) > q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// `ln T(e^s)` computed without leaving log scale, so deep-tail
    /// evaluations neither overflow `e^s` nor underflow `T`.
    pub(crate) fn ln_tail_at_ln(&self, s: f64) -> f64 {
        match self {
            TailFunction::Exponential => -s.exp(),
            TailFunction::PowerLog { beta, gamma, l } => {
                if s < 1.0 {
                    0.0
                } else {
                    (-beta * s + gamma * s.ln() + l.eval(s).ln()).min(0.0)
                }
            }
            TailFunction::LogSquare { gamma } => {
                if s < 1.0 {
                    0.0
                } else {
                    -0.5 * s * s / gamma
                }
            }
            TailFunction::Subgaussian { c } => -c * (2.0 * s).exp(),
            TailFunction::EmpiricalTable { .. } => self.eval_raw(s.exp()).ln(),
            TailFunction::Scaled { inner, factor } => inner.ln_tail_at_ln(s - factor.ln()),
        }
    }

    /// Innermost `beta` when the variable is (a scaling of) a `PowerLog`
    /// tail; the p-th moment diverges for `p ≥ beta`.
    pub(crate) fn power_log_beta(&self) -> Option<f64> {
        match self {
            TailFunction::PowerLog { beta, .. } => Some(*beta),
            TailFunction::Scaled { inner, .. } => inner.power_log_beta(),
            _ => None,
        }
    }

    /// True when `T` is nonincreasing along `grid` (grid assumed sorted).
    pub fn is_nonincreasing_on(&self, grid: &[f64]) -> bool {
        grid.windows(2)
            .all(|w| self.eval_raw(w[0]) >= self.eval_raw(w[1]) - 1e-15)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::log_spaced;

    #[test]
    fn exponential_values() {
        let t = TailFunction::Exponential;
        assert!((t.eval(1.0).unwrap() - 0.36787944117144233).abs() < 1e-15);
        assert_eq!(t.eval(0.0).unwrap(), 1.0);
        assert!((t.quantile(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(t.quantile(1.0).unwrap(), 0.0);
    }

    #[test]
    fn log_square_at_threshold() {
        let t = TailFunction::log_square(1.0).unwrap();
        assert!((t.eval(E).unwrap() - (-0.5f64).exp()).abs() < 1e-12);
        assert_eq!(t.eval(1.0).unwrap(), 1.0);
        // invert exp(-ln²t / (2γ)) at q = e^{-1}, γ = 2 → t = e²
        let t2 = TailFunction::log_square(2.0).unwrap();
        let x = t2.quantile((-1.0f64).exp()).unwrap();
        assert!((x - E * E).abs() < 1e-9, "got {x}");
        // round trip
        assert!((t2.eval(x).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn presets_start_at_one() {
        for t in [
            TailFunction::Exponential,
            TailFunction::power_log(2.0, 0.0, SlowlyVarying::One).unwrap(),
            TailFunction::log_square(1.0).unwrap(),
            TailFunction::subgaussian(1.0).unwrap(),
        ] {
            assert_eq!(t.eval(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(TailFunction::Exponential.eval(-0.1).is_err());
        assert!(matches!(
            TailFunction::Exponential.quantile(0.0),
            Err(Error::UnboundedQuantile(_))
        ));
        assert!(TailFunction::Exponential.quantile(1.5).is_err());
    }

    #[test]
    fn monotone_on_log_grid() {
        let grid = log_spaced(1e-3, 1e6, 1000);
        for t in [
            TailFunction::Exponential,
            TailFunction::power_log(2.0, 1.0, SlowlyVarying::One).unwrap(),
            TailFunction::power_log(3.0, 0.0, SlowlyVarying::LogPower { r: 1.0 }).unwrap(),
            TailFunction::log_square(2.0).unwrap(),
            TailFunction::subgaussian(0.5).unwrap(),
        ] {
            assert!(t.is_nonincreasing_on(&grid), "{t:?} not monotone");
        }
    }

    #[test]
    fn scaled_evaluates_inner_at_t_over_k() {
        let t = TailFunction::scaled(TailFunction::Exponential, 2.0).unwrap();
        assert!((t.eval(2.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let q = t.quantile(0.25).unwrap();
        let q0 = TailFunction::Exponential.quantile(0.25).unwrap();
        assert!((q - 2.0 * q0).abs() <= 1e-10 * q.abs());
    }

    #[test]
    fn empirical_step_semantics() {
        let t = TailFunction::empirical(vec![(1.0, 0.6), (2.0, 0.2), (3.0, 0.0)]).unwrap();
        assert_eq!(t.eval(0.5).unwrap(), 1.0);
        assert_eq!(t.eval(1.0).unwrap(), 0.6);
        assert_eq!(t.eval(1.5).unwrap(), 0.6);
        assert_eq!(t.eval(2.0).unwrap(), 0.2);
        assert_eq!(t.eval(10.0).unwrap(), 0.0);
        assert_eq!(t.quantile(0.6).unwrap(), 1.0);
        assert_eq!(t.quantile(0.5).unwrap(), 2.0);
    }

    #[test]
    fn empirical_rejects_non_monotone() {
        assert!(TailFunction::empirical(vec![(1.0, 0.2), (2.0, 0.5)]).is_err());
        assert!(TailFunction::empirical(vec![(2.0, 0.5), (1.0, 0.2)]).is_err());
    }

    #[test]
    fn unit_point_is_step_at_one() {
        let x = TailFunction::unit_point();
        assert_eq!(x.eval(0.999).unwrap(), 1.0);
        assert_eq!(x.eval(1.0).unwrap(), 0.0);
        assert_eq!(x.quantile(0.5).unwrap(), 1.0);
    }

    #[test]
    fn constructor_guards() {
        assert!(TailFunction::power_log(1.0, 0.0, SlowlyVarying::One).is_err());
        assert!(TailFunction::power_log(2.0, -1.0, SlowlyVarying::One).is_err());
        assert!(TailFunction::log_square(0.0).is_err());
        assert!(TailFunction::subgaussian(-1.0).is_err());
        assert!(TailFunction::scaled(TailFunction::Exponential, 0.0).is_err());
    }
}
