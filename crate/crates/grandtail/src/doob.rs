//! The Doob-type bound pipeline: admissible hypothesis constants, the
//! `K_p(θ) = ‖κ_p(ξ)‖_θ` norms, the tightest `v` constant, the two-parameter
//! Hölder bound and its grid optimization, plus the closed-form and
//! multivariate bounds.
//!
//! The hypothesis is `h(t)·P(ξ > βt) ≤ C·E[X·1{ξ > t}]` for all `t ≥ 0`.
//! From it, for `p > 1` and any feasible pair `(θ, r)`,
//!
//! `‖ξ‖_p ≤ [C·v(θ,p,r)·β^p]^{1/(p-r)} · ‖X‖_{α(θ)}^{1/(p-r)}`,
//!
//! where `α(θ) = θ/(θ-1)` and `v = p·K_p(θ)/‖ξ‖_p^r` (the derivation's factor
//! `p` is folded into `v`, which makes the classical `C·p/(p-1)·β^p·‖X‖_p`
//! bound a realized grid candidate for `h(t) = t`).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{linear_spaced, log_spaced};
use crate::quadrature::{
    kappa_p, log_line_integral, log_moment, moment_from_tail, raw_norm, truncated_mean,
    QuadratureConfig,
};
use crate::tail::TailFunction;

/// The hypothesis weight `h(t)`: either the power family `t^Δ` (closed forms
/// available throughout) or an arbitrary strictly increasing positive
/// function.
#[derive(Clone)]
pub enum HSpec {
    Power { delta: f64 },
    General { f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl HSpec {
    pub fn power(delta: f64) -> Self {
        HSpec::Power { delta }
    }

    pub fn general(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        HSpec::General { f: Arc::new(f) }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            HSpec::Power { delta } => t.powf(*delta),
            HSpec::General { f } => f(t),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            HSpec::Power { delta } => format!("t^{delta}"),
            HSpec::General { .. } => "general".to_string(),
        }
    }
}

impl fmt::Debug for HSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HSpec({})", self.describe())
    }
}

/// The hypothesis triple `(h, β, C)`.
#[derive(Debug, Clone)]
pub struct DoobHypothesis {
    pub h: HSpec,
    pub beta: f64,
    pub c: f64,
}

impl DoobHypothesis {
    pub fn new(h: HSpec, beta: f64, c: f64) -> Result<Self> {
        if !(beta > 0.0) || !(c > 0.0) {
            return Err(Error::Domain(format!(
                "hypothesis requires beta > 0 and C > 0, got beta = {beta}, C = {c}"
            )));
        }
        if let HSpec::Power { delta } = h {
            if !(delta > 0.0) {
                return Err(Error::Domain(format!(
                    "power h requires Delta > 0, got {delta}"
                )));
            }
        }
        Ok(DoobHypothesis { h, beta, c })
    }
}

/// How the pair `(ξ, X)` is coupled when evaluating `E[X·1{ξ > t}]`.
#[derive(Debug, Clone)]
pub enum Coupling {
    /// `X = ξ`: the denominator is the truncated mean `E[ξ·1{ξ > t}]`.
    Identical,
    /// `X` independent of `ξ` with the given tail: the denominator factors
    /// as `T_ξ(t)·E X`.
    Independent(TailFunction),
}

/// Result of the smallest-admissible-constant search.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibleC {
    pub c_min: f64,
    pub argmax_t: f64,
    /// Set when the ratio is still growing without deceleration at the end
    /// of the grid: no finite constant is admissible.
    pub divergent: bool,
}

/// Smallest constant `C` such that `h(t)·P(ξ > βt) ≤ C·E[X·1{ξ > t}]` over
/// `t_grid`, i.e. the grid supremum of the ratio of the two sides.
pub fn min_admissible_c(
    t_xi: &TailFunction,
    coupling: &Coupling,
    h: &HSpec,
    beta: f64,
    t_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<AdmissibleC> {
    if t_grid.is_empty() {
        return Err(Error::Domain("t_grid must be non-empty".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let x_mean = match coupling {
        Coupling::Identical => None,
        Coupling::Independent(t_x) => {
            let m = moment_from_tail(t_x, 1.0, cfg)?;
            if m.divergent {
                return Err(Error::Divergent("E X diverges".into()));
            }
            Some(m.value)
        }
    };
    let mut ratios = Vec::with_capacity(t_grid.len());
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for &t in t_grid {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!(
                "t_grid must be strictly positive and finite, got {t}"
            )));
        }
        let num = h.eval(t) * t_xi.eval_raw(beta * t);
        let den = match (coupling, x_mean) {
            (Coupling::Identical, _) => truncated_mean(t_xi, t, cfg)?.value,
            (_, Some(ex)) => t_xi.eval_raw(t) * ex,
            _ => unreachable!(),
        };
        if den <= 0.0 {
            if num > 0.0 {
                return Err(Error::InfeasibleHypothesis(format!(
                    "h(t)·P(xi > beta t) = {num} > 0 with E[X·1{{xi > t}}] = 0 at t = {t}"
                )));
            }
            // 0/0: both sides vanish, the point carries no information
            continue;
        }
        let r = num / den;
        if r > best.0 {
            best = (r, t);
        }
        ratios.push(r);
    }
    Ok(AdmissibleC {
        c_min: best.0.max(0.0),
        argmax_t: best.1,
        divergent: trend_divergent(&ratios, 1e-6),
    })
}

/// True when the last increments of `values` are material (above
/// `floor`·|last value|) and not decelerating — the grid supremum is still
/// climbing toward the boundary with no sign of a finite limit.
pub(crate) fn trend_divergent(values: &[f64], floor: f64) -> bool {
    let n = values.len();
    if n < 2 {
        return false;
    }
    let last = values[n - 1];
    let d2 = values[n - 1] - values[n - 2];
    if d2 <= floor * last.abs().max(f64::MIN_POSITIVE) {
        return false;
    }
    if n < 3 {
        return true;
    }
    let d1 = values[n - 2] - values[n - 3];
    if d1 <= 0.0 {
        return true;
    }
    // geometric deceleration extrapolates to a finite supremum
    d2 / d1 >= 0.995
}

/// `K_p(θ)` with its log and divergence flag.
#[derive(Debug, Clone, Copy)]
pub struct KpNorm {
    pub value: f64,
    pub log_value: f64,
    pub divergent: bool,
}

/// `K_p(θ) = ‖κ_p(ξ)‖_θ`. For power `h = t^Δ` this is the closed form
/// `‖ξ‖_{θ(p-Δ)}^{p-Δ}/(p-Δ)`; for general `h` the tail of `κ_p(ξ)` is
/// obtained by the change of variables `T_{κ_p(ξ)}(u) = T_ξ(κ_p^{-1}(u))`.
pub fn k_p_norm(
    t_xi: &TailFunction,
    h: &HSpec,
    p: f64,
    theta: f64,
    cfg: &QuadratureConfig,
) -> Result<KpNorm> {
    if !(theta >= 1.0) {
        return Err(Error::Domain(format!("theta must be >= 1, got {theta}")));
    }
    match h {
        HSpec::Power { delta } => {
            if p <= *delta {
                return Err(Error::NonIntegrable(format!(
                    "K_p with h = t^{delta} needs p > {delta}, got p = {p}"
                )));
            }
            let q = theta * (p - delta);
            let est = log_moment(t_xi, q, cfg)?;
            let log_value = est.log_value / theta - (p - delta).ln();
            Ok(KpNorm {
                value: log_value.exp(),
                log_value,
                divergent: est.divergent,
            })
        }
        HSpec::General { .. } => k_p_norm_general(t_xi, h, p, theta, cfg),
    }
}

fn k_p_norm_general(
    t_xi: &TailFunction,
    h: &HSpec,
    p: f64,
    theta: f64,
    cfg: &QuadratureConfig,
) -> Result<KpNorm> {
    let u_top = match t_xi.quantile(cfg.eps_tail) {
        Ok(u) if u > 0.0 => u,
        Ok(_) => {
            return Ok(KpNorm {
                value: 0.0,
                log_value: f64::NEG_INFINITY,
                divergent: false,
            })
        }
        Err(Error::Divergent(_)) => {
            return Ok(KpNorm {
                value: f64::INFINITY,
                log_value: f64::INFINITY,
                divergent: true,
            })
        }
        Err(e) => return Err(e),
    };
    // cumulative table of kappa_p on a log grid of x; kappa is strictly
    // increasing, so its inverse is a table lookup with log-log interpolation
    let n = 257;
    let x_lo = u_top * 1e-12;
    let xs = log_spaced(x_lo, u_top, n);
    let mut kappas = Vec::with_capacity(n);
    let mut acc = kappa_p(h, p, xs[0], cfg)?;
    kappas.push(acc);
    for i in 1..n {
        acc += kappa_segment(h, p, xs[i - 1], xs[i], cfg);
        kappas.push(acc);
    }
    let log_x: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let log_k: Vec<f64> = kappas.iter().map(|k| k.ln()).collect();
    let t_xi = t_xi.clone();
    // ln T_{κ_p(ξ)} at ln u: invert kappa by log-log interpolation on the
    // table (with extrapolation beyond its ends), then take the tail in log
    // scale so deep evaluations cannot underflow
    let ln_tail_of_kappa = move |lu: f64| -> f64 {
        let i = match log_k.partition_point(|&v| v < lu) {
            0 => 1,
            i if i >= log_k.len() => log_k.len() - 1,
            i => i,
        };
        let t = (lu - log_k[i - 1]) / (log_k[i] - log_k[i - 1]);
        let lx = log_x[i - 1] + t * (log_x[i] - log_x[i - 1]);
        t_xi.ln_tail_at_ln(lx)
    };
    let g = move |s: f64| theta * s + ln_tail_of_kappa(s);
    let b0 = kappas[n - 1].ln();
    let est = log_line_integral(&g, b0 - 3.0, b0, true, true, cfg);
    let log_e = theta.ln() + est.log_value;
    let log_value = log_e / theta;
    Ok(KpNorm {
        value: log_value.exp(),
        log_value,
        divergent: est.divergent,
    })
}

fn kappa_segment(h: &HSpec, p: f64, a: f64, b: f64, cfg: &QuadratureConfig) -> f64 {
    // difference of closed forms when available, otherwise a short adaptive pass
    match h {
        HSpec::Power { delta } => (b.powf(p - delta) - a.powf(p - delta)) / (p - delta),
        HSpec::General { f } => {
            let f = f.clone();
            let integrand = move |t: f64| t.powf(p - 1.0) / f(t);
            let n = 8;
            let mut sum = 0.0;
            for i in 0..n {
                let pa = a * (b / a).powf(i as f64 / n as f64);
                let pb = a * (b / a).powf((i + 1) as f64 / n as f64);
                let mut budget = (cfg.max_subdiv / 16) as isize;
                let rough = crate::quadrature::gk15_value(&integrand, pa, pb);
                let tol = (cfg.rel_tol * rough.abs()).max(1e-300);
                sum += crate::quadrature::adaptive_value(&integrand, pa, pb, tol, &mut budget);
            }
            sum
        }
    }
}

/// The tightest constant in `K_p(θ) ≤ v·‖ξ‖_p^r` for the given instance,
/// with the derivation's factor `p` absorbed: `v = p·K_p(θ)/‖ξ‖_p^r`.
pub fn fit_v(
    t_xi: &TailFunction,
    h: &HSpec,
    p: f64,
    theta: f64,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(r >= 1.0 && r < p) {
        return Err(Error::Domain(format!("need 1 <= r < p, got r = {r}, p = {p}")));
    }
    let kp = k_p_norm(t_xi, h, p, theta, cfg)?;
    if kp.divergent {
        return Err(Error::Divergent(format!("K_p({theta}) diverges")));
    }
    let xi = raw_norm(t_xi, p, cfg)?;
    if xi.divergent {
        return Err(Error::Divergent(format!("‖xi‖_{p} diverges")));
    }
    Ok((p.ln() + kp.log_value - r * xi.log_norm).exp())
}

/// One evaluated point of the `(θ, r)` search space.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCandidate {
    pub theta: f64,
    pub alpha: f64,
    pub r: f64,
    pub v: f64,
    pub bound: f64,
}

/// `[C·v·β^p]^{1/(p-r)} · ‖X‖_α^{1/(p-r)}`.
pub fn theorem_bound(c: f64, beta: f64, p: f64, r: f64, v: f64, x_norm_alpha: f64) -> Result<f64> {
    if !(p > r) {
        return Err(Error::Domain(format!("theorem bound needs p > r, got p = {p}, r = {r}")));
    }
    if !(c > 0.0 && beta > 0.0 && v > 0.0 && x_norm_alpha > 0.0) {
        return Err(Error::Domain("theorem bound inputs must be positive".into()));
    }
    Ok(((c.ln() + v.ln() + p * beta.ln() + x_norm_alpha.ln()) / (p - r)).exp())
}

/// Default `θ` search grid: 64 log-spaced points on (1, 20].
pub fn default_theta_grid() -> Vec<f64> {
    log_spaced(1.05, 20.0, 64)
}

/// Default `r` search grid: 64 linear points on [1, p − 10⁻³].
pub fn default_r_grid(p: f64) -> Vec<f64> {
    let hi = p - 1e-3;
    if hi <= 1.0 {
        vec![1.0]
    } else {
        linear_spaced(1.0, hi, 64)
    }
}

/// Minimizes the two-parameter Hölder bound over all feasible `(θ, r)` grid
/// pairs. Candidates with divergent `K_p(θ)` or `‖X‖_{α(θ)}` lie outside the
/// feasibility sets and are skipped; ties are broken toward the smallest `θ`,
/// then the smallest `r`.
///
/// On the exponential pair with `h(t) = t` and `C = β = 1` the optimum sits
/// within a couple of percent of the closed-form value `2√2` at `p = 2`:
///
/// ```
/// use grandtail::quadrature::QuadratureConfig;
/// use grandtail::{
///     default_r_grid, default_theta_grid, optimize_bound, Coupling, DoobHypothesis, HSpec,
///     TailFunction,
/// };
///
/// let cfg = QuadratureConfig::default();
/// let hyp = DoobHypothesis::new(HSpec::power(1.0), 1.0, 1.0).unwrap();
/// let cand = optimize_bound(
///     &TailFunction::Exponential,
///     &Coupling::Identical,
///     &hyp,
///     2.0,
///     &default_theta_grid(),
///     &default_r_grid(2.0),
///     &cfg,
/// )
/// .unwrap();
/// assert!(cand.bound <= 2.0 * 2f64.sqrt() * 1.02);
/// ```
pub fn optimize_bound(
    t_xi: &TailFunction,
    coupling: &Coupling,
    hyp: &DoobHypothesis,
    p: f64,
    theta_grid: &[f64],
    r_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<BoundCandidate> {
    if theta_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::Domain("search grids must be non-empty".into()));
    }
    if !(p > 1.0) {
        return Err(Error::Domain(format!("optimization requires p > 1, got {p}")));
    }
    let xi = raw_norm(t_xi, p, cfg)?;
    if xi.divergent {
        return Err(Error::EmptySearchSpace(format!("‖xi‖_{p} diverges")));
    }
    let t_x = match coupling {
        Coupling::Identical => t_xi,
        Coupling::Independent(t) => t,
    };
    let log_c = hyp.c.ln();
    let log_beta_p = p * hyp.beta.ln();
    let mut best: Option<BoundCandidate> = None;
    for &theta in theta_grid {
        if !(theta > 1.0) {
            continue;
        }
        let alpha = theta / (theta - 1.0);
        let x_norm = match raw_norm(t_x, alpha, cfg) {
            Ok(m) if !m.divergent => m,
            _ => continue, // alpha outside the feasibility set
        };
        let kp = match k_p_norm(t_xi, &hyp.h, p, theta, cfg) {
            Ok(k) if !k.divergent => k,
            _ => continue, // theta outside Θ
        };
        for &r in r_grid {
            if !(r >= 1.0 && r < p) {
                continue;
            }
            let log_v = p.ln() + kp.log_value - r * xi.log_norm;
            let log_bound = (log_c + log_v + log_beta_p + x_norm.log_norm) / (p - r);
            let better = match &best {
                None => true,
                Some(b) => log_bound < b.bound.ln(),
            };
            if better {
                best = Some(BoundCandidate {
                    theta,
                    alpha,
                    r,
                    v: log_v.exp(),
                    bound: log_bound.exp(),
                });
            }
        }
    }
    best.ok_or_else(|| {
        Error::EmptySearchSpace("no feasible (theta, r) candidate on the grids".into())
    })
}

/// The closed-form bound `C·p/(p-Δ)·β^p·‖X‖_p` (classical Doob for Δ = 1).
///
/// ```
/// use grandtail::closed_form_bound;
/// let b = closed_form_bound(1.0, 1.0, 1.0, 2.0, 2f64.sqrt()).unwrap();
/// assert!((b - 2.0 * 2f64.sqrt()).abs() < 1e-12);
/// ```
pub fn closed_form_bound(c: f64, beta: f64, delta: f64, p: f64, x_norm_p: f64) -> Result<f64> {
    if !(p > delta && delta > 0.0) {
        return Err(Error::Domain(format!("closed form needs p > Delta > 0, got p = {p}, Delta = {delta}")));
    }
    Ok(c * p / (p - delta) * beta.powf(p) * x_norm_p)
}

/// The two-parameter bound evaluated at the natural candidate `θ = p/(p-Δ)`,
/// `r = p-Δ`: `[C·p·β^p/(p-Δ)]^{1/Δ}·‖X‖_{p/Δ}^{1/Δ}`. For `Δ = 1` it
/// coincides with the closed form; for `Δ > 1` the two differ in general and
/// are reported side by side.
pub fn derived_form_bound(
    c: f64,
    beta: f64,
    delta: f64,
    p: f64,
    x_norm_p_over_delta: f64,
) -> Result<f64> {
    if !(p > delta && delta > 0.0) {
        return Err(Error::Domain(format!("derived form needs p > Delta > 0, got p = {p}, Delta = {delta}")));
    }
    Ok((c * p * beta.powf(p) / (p - delta)).powf(1.0 / delta) * x_norm_p_over_delta.powf(1.0 / delta))
}

/// `C·p/(p-Δ)·d^{1/p}·β^p·‖X‖_p` — the d-dimensional bound; equals the
/// univariate closed form exactly at `d = 1`.
pub fn multivariate_bound(
    c: f64,
    beta: f64,
    delta: f64,
    p: f64,
    d: usize,
    x_norm_p: f64,
) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain("dimension d must be >= 1".into()));
    }
    if !(p > delta.max(1.0)) {
        return Err(Error::Domain(format!("multivariate bound needs p > max(1, Delta), got p = {p}, Delta = {delta}")));
    }
    Ok(closed_form_bound(c, beta, delta, p, x_norm_p)? * (d as f64).powf(1.0 / p))
}

/// `[Σ_j ‖ξ_j‖_p^p]^{1/p}` — the vector p-norm built from component norms.
pub fn vector_p_norm(component_norms: &[f64], p: f64) -> Result<f64> {
    if component_norms.is_empty() {
        return Err(Error::Domain("vector_p_norm of an empty vector".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("vector_p_norm needs p >= 1, got {p}")));
    }
    if component_norms.iter().any(|&x| x < 0.0) {
        return Err(Error::Domain("component norms must be non-negative".into()));
    }
    Ok(component_norms.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `(Σ_j |t_j|^s)^{1/s}`, `s ≥ 1`.
pub fn l_s_norm(vector: &[f64], s: f64) -> Result<f64> {
    if vector.is_empty() {
        return Err(Error::Domain("l_s_norm of an empty vector".into()));
    }
    if !(s >= 1.0) {
        return Err(Error::Domain(format!("l_s_norm needs s >= 1, got {s}")));
    }
    Ok(vector.iter().map(|x| x.abs().powf(s)).sum::<f64>().powf(1.0 / s))
}

/// JSON record for one bound computation.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub schema: String,
    pub p: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub beta: f64,
    pub delta_or_h: String,
    pub candidate: CandidateRecord,
    pub bound: f64,
    pub closed_form: Option<f64>,
    pub derived_form: Option<f64>,
    pub actual_norm_if_known: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRecord {
    pub theta: f64,
    pub alpha: f64,
    pub r: f64,
    pub v: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::log_spaced;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn exp_tail() -> TailFunction {
        TailFunction::Exponential
    }

    #[test]
    fn admissible_c_exponential_identity() {
        // ratio is t/(t+1), bounded by 1 and attained at the grid end
        let grid = log_spaced(1e-2, 1e3, 200);
        let a = min_admissible_c(
            &exp_tail(),
            &Coupling::Identical,
            &HSpec::power(1.0),
            1.0,
            &grid,
            &cfg(),
        )
        .unwrap();
        assert!(a.c_min <= 1.0);
        // the tail underflows past t ≈ 745; the supremum sits at the last
        // informative grid point and is within 1.5e-3 of 1
        assert!(a.c_min > 0.9985, "got {}", a.c_min);
        assert!((a.c_min - a.argmax_t / (a.argmax_t + 1.0)).abs() < 1e-9);
        assert!(!a.divergent);
    }

    #[test]
    fn admissible_c_beta_two() {
        // oracle: fine grid search on the closed-form ratio t e^{-t}/(t+1)
        let grid = log_spaced(1e-3, 50.0, 400);
        let a = min_admissible_c(
            &exp_tail(),
            &Coupling::Identical,
            &HSpec::power(1.0),
            2.0,
            &grid,
            &cfg(),
        )
        .unwrap();
        let oracle = (0..200_000)
            .map(|i| {
                let t = 1e-3 + (10.0 - 1e-3) * i as f64 / 199_999.0;
                t * (-t).exp() / (t + 1.0)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((a.c_min - oracle).abs() < 1e-3, "{} vs {oracle}", a.c_min);
        assert!((a.c_min - 0.206).abs() < 2e-3);
        assert!((a.argmax_t - 0.618).abs() < 0.05);
        assert!(!a.divergent);
    }

    #[test]
    fn admissible_c_quadratic_h_diverges() {
        // ratio t²/(t+1) is unbounded
        let grid = log_spaced(1e-2, 1e3, 200);
        let a = min_admissible_c(
            &exp_tail(),
            &Coupling::Identical,
            &HSpec::power(2.0),
            1.0,
            &grid,
            &cfg(),
        )
        .unwrap();
        assert!(a.divergent);
    }

    #[test]
    fn admissible_c_independent_coupling() {
        // X ≡ 1 independent: denominator is T_ξ(t)·1, ratio = h(t)·T(βt)/T(t)
        let grid = log_spaced(0.1, 5.0, 50);
        let a = min_admissible_c(
            &exp_tail(),
            &Coupling::Independent(TailFunction::unit_point()),
            &HSpec::power(1.0),
            1.0,
            &grid,
            &cfg(),
        )
        .unwrap();
        assert!((a.c_min - 5.0).abs() < 1e-9, "ratio is t, sup = 5: {}", a.c_min);
    }

    #[test]
    fn k_p_closed_forms() {
        let c = cfg();
        // Exponential, h = t, p = 2: K_2(θ) = ‖ξ‖_θ
        let k2 = k_p_norm(&exp_tail(), &HSpec::power(1.0), 2.0, 2.0, &c).unwrap();
        assert!((k2.value - 2f64.sqrt()).abs() < 1e-6, "got {}", k2.value);
        let k1 = k_p_norm(&exp_tail(), &HSpec::power(1.0), 2.0, 1.0, &c).unwrap();
        assert!((k1.value - 1.0).abs() < 1e-6, "got {}", k1.value);
        // κ₂ is the identity for Δ = 1: K equals the plain moment for any tail
        let t = TailFunction::log_square(1.0).unwrap();
        let k = k_p_norm(&t, &HSpec::power(1.0), 2.0, 3.0, &c).unwrap();
        let m = moment_from_tail(&t, 3.0, &c).unwrap();
        assert!((k.value - m.value).abs() < 1e-8 * m.value);
        // p <= Δ rejected
        assert!(k_p_norm(&exp_tail(), &HSpec::power(2.0), 1.5, 2.0, &c).is_err());
    }

    #[test]
    fn k_p_general_matches_closed_form() {
        let c = cfg();
        for (delta, p, theta) in [(1.0, 2.5, 2.0), (1.5, 3.0, 1.5), (1.0, 2.0, 3.0)] {
            let general = HSpec::general(move |t: f64| t.powf(delta));
            let kg = k_p_norm(&exp_tail(), &general, p, theta, &c).unwrap();
            let kc = k_p_norm(&exp_tail(), &HSpec::power(delta), p, theta, &c).unwrap();
            assert!(
                (kg.value - kc.value).abs() <= 1e-6 * kc.value,
                "delta={delta} p={p} theta={theta}: {} vs {}",
                kg.value,
                kc.value
            );
        }
    }

    #[test]
    fn fit_v_examples() {
        let c = cfg();
        // classical coefficient p/(p-1) at p = 2
        let v = fit_v(&exp_tail(), &HSpec::power(1.0), 2.0, 2.0, 1.0, &c).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "got {v}");
        // Δ = 2, p = 3, θ = 3, r = 1: the norm factors cancel, v = p/(p-Δ)
        let v = fit_v(&exp_tail(), &HSpec::power(2.0), 3.0, 3.0, 1.0, &c).unwrap();
        assert!((v - 3.0).abs() < 1e-6, "got {v}");
        // numeric oracle on the definition: Δ=1, p=3, θ=1.5, r=2 gives
        // v = 3·‖ξ²/2‖_{1.5}/‖ξ‖₃² = 3/2 for the exponential
        let v = fit_v(&exp_tail(), &HSpec::power(1.0), 3.0, 1.5, 2.0, &c).unwrap();
        assert!((v - 1.5).abs() < 1e-6, "got {v}");
        assert!(fit_v(&exp_tail(), &HSpec::power(1.0), 2.0, 2.0, 2.5, &c).is_err());
    }

    #[test]
    fn theorem_bound_substitution() {
        let s2 = 2f64.sqrt();
        let b = theorem_bound(1.0, 1.0, 2.0, 1.0, 2.0, s2).unwrap();
        assert!((b - 2.0 * s2).abs() < 1e-12);
        let b = theorem_bound(1.0, 1.0, 2.0, 1.0, 2.0, 1.0).unwrap();
        assert!((b - 2.0).abs() < 1e-12);
        let b = theorem_bound(1.0, 2.0, 2.0, 1.0, 2.0, s2).unwrap();
        assert!((b - 8.0 * s2).abs() < 1e-12);
        assert!(theorem_bound(1.0, 1.0, 2.0, 2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn optimize_recovers_classical_bound() {
        let c = cfg();
        let hyp = DoobHypothesis::new(HSpec::power(1.0), 1.0, 1.0).unwrap();
        let best = optimize_bound(
            &exp_tail(),
            &Coupling::Identical,
            &hyp,
            2.0,
            &default_theta_grid(),
            &default_r_grid(2.0),
            &c,
        )
        .unwrap();
        let classical = 2.0 * 2f64.sqrt();
        assert!(best.bound <= classical * 1.02, "bound {}", best.bound);
        assert!(best.bound >= 2f64.sqrt(), "must dominate the true norm");
        assert!((best.theta - 2.0).abs() < 0.2, "theta {}", best.theta);
        assert!((best.r - 1.0).abs() < 0.1, "r {}", best.r);
        assert!((1.0 / best.theta + 1.0 / best.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimize_singleton_equals_theorem_bound() {
        let c = cfg();
        let hyp = DoobHypothesis::new(HSpec::power(1.0), 1.0, 1.0).unwrap();
        let best = optimize_bound(
            &exp_tail(),
            &Coupling::Identical,
            &hyp,
            2.0,
            &[2.0],
            &[1.0],
            &c,
        )
        .unwrap();
        let v = fit_v(&exp_tail(), &HSpec::power(1.0), 2.0, 2.0, 1.0, &c).unwrap();
        let x_norm = moment_from_tail(&exp_tail(), 2.0, &c).unwrap().value;
        let direct = theorem_bound(1.0, 1.0, 2.0, 1.0, v, x_norm).unwrap();
        assert!((best.bound - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn optimize_is_infimum_over_rescan() {
        let c = cfg();
        let hyp = DoobHypothesis::new(HSpec::power(1.0), 1.0, 1.0).unwrap();
        let thetas: Vec<f64> = log_spaced(1.2, 10.0, 12);
        let rs = vec![1.0, 1.3, 1.7];
        let best = optimize_bound(
            &exp_tail(),
            &Coupling::Identical,
            &hyp,
            2.5,
            &thetas,
            &rs,
            &c,
        )
        .unwrap();
        for &theta in &thetas {
            let alpha = theta / (theta - 1.0);
            let x = moment_from_tail(&exp_tail(), alpha, &c).unwrap();
            for &r in &rs {
                let v = fit_v(&exp_tail(), &HSpec::power(1.0), 2.5, theta, r, &c).unwrap();
                let b = theorem_bound(1.0, 1.0, 2.5, r, v, x.value).unwrap();
                assert!(
                    best.bound <= b * (1.0 + 1e-9),
                    "candidate theta={theta} r={r} beats the optimum: {b} < {}",
                    best.bound
                );
            }
        }
    }

    #[test]
    fn optimize_with_natural_candidate_meets_closed_form() {
        let c = cfg();
        let p = 2.0;
        let delta = 1.0;
        let hyp = DoobHypothesis::new(HSpec::power(delta), 1.0, 1.0).unwrap();
        let theta_star = p / (p - delta);
        let mut thetas = default_theta_grid();
        thetas.push(theta_star);
        thetas.sort_by(f64::total_cmp);
        let mut rs = default_r_grid(p);
        rs.push(p - delta);
        rs.sort_by(f64::total_cmp);
        let best =
            optimize_bound(&exp_tail(), &Coupling::Identical, &hyp, p, &thetas, &rs, &c).unwrap();
        let x_norm = moment_from_tail(&exp_tail(), p, &c).unwrap().value;
        let closed = closed_form_bound(1.0, 1.0, delta, p, x_norm).unwrap();
        assert!(best.bound <= closed * (1.0 + 1e-9), "{} vs {closed}", best.bound);
    }

    #[test]
    fn optimize_validity_fractional_delta() {
        let c = cfg();
        let hyp = DoobHypothesis::new(HSpec::power(1.5), 1.0, 1.0).unwrap();
        let best = optimize_bound(
            &exp_tail(),
            &Coupling::Identical,
            &hyp,
            3.0,
            &default_theta_grid(),
            &default_r_grid(3.0),
            &c,
        )
        .unwrap();
        let actual = 6f64.powf(1.0 / 3.0); // Γ(4)^{1/3}
        assert!(best.bound >= actual, "{} < {actual}", best.bound);
    }

    #[test]
    fn optimize_empty_search_space() {
        let c = cfg();
        let hyp = DoobHypothesis::new(HSpec::power(1.0), 1.0, 1.0).unwrap();
        // θ = 1 is skipped (not > 1), so nothing is feasible
        let err = optimize_bound(
            &exp_tail(),
            &Coupling::Identical,
            &hyp,
            2.0,
            &[1.0],
            &[1.0],
            &c,
        );
        assert!(matches!(err, Err(Error::EmptySearchSpace(_))));
    }

    #[test]
    fn closed_form_values() {
        let s2 = 2f64.sqrt();
        let b = closed_form_bound(1.0, 1.0, 1.0, 2.0, s2).unwrap();
        assert!((b - 2.0 * s2).abs() < 1e-12);
        let b = closed_form_bound(1.0, 1.0, 1.5, 3.0, 6f64.powf(1.0 / 3.0)).unwrap();
        assert!((b - 2.0 * 6f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let b = closed_form_bound(1.0, 2.0, 1.0, 2.0, s2).unwrap();
        assert!((b - 8.0 * s2).abs() < 1e-12);
        assert!(closed_form_bound(1.0, 1.0, 2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn derived_form_matches_closed_form_at_delta_one() {
        let b1 = closed_form_bound(1.3, 1.2, 1.0, 2.5, 0.7).unwrap();
        let b2 = derived_form_bound(1.3, 1.2, 1.0, 2.5, 0.7).unwrap();
        assert!((b1 - b2).abs() < 1e-12 * b1);
    }

    #[test]
    fn multivariate_values() {
        let s2 = 2f64.sqrt();
        // d = 1 equals the univariate closed form bit-for-bit
        let uni = closed_form_bound(1.0, 1.0, 1.0, 2.0, s2).unwrap();
        let d1 = multivariate_bound(1.0, 1.0, 1.0, 2.0, 1, s2).unwrap();
        assert_eq!(uni, d1);
        let d3 = multivariate_bound(1.0, 1.0, 1.0, 2.0, 3, s2).unwrap();
        assert!((d3 - 2.0 * 6f64.sqrt()).abs() < 1e-12);
        let d4 = multivariate_bound(1.0, 1.0, 1.0, 2.0, 4, s2).unwrap();
        assert!((d4 - 4.0 * s2).abs() < 1e-12);
        assert!(multivariate_bound(1.0, 1.0, 1.0, 0.9, 2, 1.0).is_err());
    }

    #[test]
    fn vector_norms() {
        let s2 = 2f64.sqrt();
        let v = vector_p_norm(&[s2, s2, s2], 2.0).unwrap();
        assert!((v - 6f64.sqrt()).abs() < 1e-12);
        let v = vector_p_norm(&[0.37], 5.0).unwrap();
        assert!((v - 0.37).abs() < 1e-15);
        let v = l_s_norm(&[3.0, 4.0], 2.0).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
        assert!(vector_p_norm(&[], 2.0).is_err());
        assert!(l_s_norm(&[1.0], 0.5).is_err());
    }

    #[test]
    fn hypothesis_guards() {
        assert!(DoobHypothesis::new(HSpec::power(0.0), 1.0, 1.0).is_err());
        assert!(DoobHypothesis::new(HSpec::power(1.0), 0.0, 1.0).is_err());
        assert!(DoobHypothesis::new(HSpec::power(1.0), 1.0, -1.0).is_err());
    }
}
