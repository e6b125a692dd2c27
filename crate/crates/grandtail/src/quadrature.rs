//! Improper-integral engines for tail-based moments, the κ_p integral, and
//! truncated expectations.
//!
//! All tail moments are computed as `E τ^p = p ∫₀^∞ t^{p-1} T(t) dt` after
//! the substitution `t = e^s`, which turns the integral into
//! `p ∫ exp(p·s + ln T(e^s)) ds` over the whole line. The integrand is then
//! handled in log scale (so `E τ^p` may exceed the `f64` range while the
//! norm `‖τ‖_p` stays representable), integrated by adaptive Gauss–Kronrod
//! panels on a base window and extended left and right by doubling segments
//! until the increments become negligible. A segment budget that runs out
//! while increments are still material raises the divergence flag.

use serde::{Deserialize, Serialize};

use crate::doob::HSpec;
use crate::error::{Error, Result};
use crate::tail::TailFunction;

/// Tolerances and truncation controls for the integral engines.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Relative tolerance on each integral.
    pub rel_tol: f64,
    /// Absolute floor below which contributions are ignored.
    pub abs_tol: f64,
    /// Tail truncation quantile: the base integration window ends where
    /// `T(t)` has decayed to this level (doubling extension continues past it).
    pub eps_tail: f64,
    /// Cap on adaptive subdivisions per integral.
    pub max_subdiv: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            eps_tail: 1e-14,
            max_subdiv: 10_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.eps_tail > 0.0) {
            return Err(Error::Config("tolerances must be strictly positive".into()));
        }
        if self.eps_tail >= 1.0 {
            return Err(Error::Config("eps_tail must be < 1".into()));
        }
        if self.max_subdiv == 0 {
            return Err(Error::Config("max_subdiv must be positive".into()));
        }
        Ok(())
    }
}

/// A moment computed from a tail, with its divergence flag.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    /// `‖τ‖_p = (E τ^p)^{1/p}`.
    pub value: f64,
    /// `ln ‖τ‖_p`; finite even when `E τ^p` overflows `f64`.
    pub log_norm: f64,
    /// Set when the convergence heuristic failed: the doubling extension
    /// exhausted its budget with the partial sums still growing.
    pub divergent: bool,
}

pub(crate) struct LogEstimate {
    pub log_value: f64,
    pub divergent: bool,
}

// 15-point Kronrod nodes (positive half) with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = WGK[7] * fc;
    let mut res_g = WG[3] * fc;
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = h * x;
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        res_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            res_g += WG[(j - 1) / 2] * (f1 + f2);
        }
    }
    (res_k * h, ((res_k - res_g) * h).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32, budget: &mut isize) -> f64 {
    let (v, e) = gk15(f, a, b);
    *budget -= 1;
    // the relative criterion stops refinement once a panel is resolved to
    // near machine precision, even when the requested absolute tolerance
    // (sized from a rough whole-interval estimate) is unattainably small
    if e <= tol || e <= 1e-13 * v.abs() || depth >= 40 || *budget <= 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth + 1, budget) + adaptive(f, m, b, 0.5 * tol, depth + 1, budget)
}

pub(crate) fn gk15_value(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    gk15(f, a, b).0
}

pub(crate) fn adaptive_value(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, budget: &mut isize) -> f64 {
    adaptive(f, a, b, tol, 0, budget)
}

pub(crate) fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln ∫_a^b exp(g(s)) ds` over one segment: the integrand is rescaled by its
/// sampled maximum, split into `n` panels, and each panel refined adaptively.
fn log_segment(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    n: usize,
    cfg: &QuadratureConfig,
    budget: &mut isize,
) -> f64 {
    if !(b > a) {
        return f64::NEG_INFINITY;
    }
    let samples = 8 * n + 1;
    let mut m = f64::NEG_INFINITY;
    for i in 0..samples {
        let s = a + (b - a) * i as f64 / (samples - 1) as f64;
        let v = g(s);
        if v > m {
            m = v;
        }
    }
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let f = |s: f64| (g(s) - m).exp();
    // rough pass to size the per-panel tolerance
    let mut rough = 0.0;
    for i in 0..n {
        let pa = a + (b - a) * i as f64 / n as f64;
        let pb = a + (b - a) * (i + 1) as f64 / n as f64;
        rough += gk15(&f, pa, pb).0;
    }
    // Floor the tolerance at a small absolute level: when the rough pass sees
    // only a thin boundary layer (rough ≈ 0) the segment is negligible and
    // must not consume the refinement budget chasing it to machine precision.
    let tol = (cfg.rel_tol * rough.abs()).max(cfg.abs_tol * 1e-6) / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let pa = a + (b - a) * i as f64 / n as f64;
        let pb = a + (b - a) * (i + 1) as f64 / n as f64;
        sum += adaptive(&f, pa, pb, tol, 0, budget);
    }
    if sum <= 0.0 {
        f64::NEG_INFINITY
    } else {
        m + sum.ln()
    }
}

/// `ln ∫ exp(g(s)) ds` over `[a0, b0]`, optionally extended toward −∞ and +∞
/// by doubling segments. Extension stops after two consecutive negligible
/// increments; exhausting the segment budget with a material increment sets
/// the divergence flag.
pub(crate) fn log_line_integral(
    g: &dyn Fn(f64) -> f64,
    a0: f64,
    b0: f64,
    extend_left: bool,
    extend_right: bool,
    cfg: &QuadratureConfig,
) -> LogEstimate {
    // Each segment gets its own refinement budget: a hard-to-resolve but
    // negligible segment must not starve the segment carrying the peak.
    let mut budget = cfg.max_subdiv as isize;
    let mut total = log_segment(g, a0, b0, 24, cfg, &mut budget);
    let mut divergent = false;

    let mut extend = |sign: f64, from: f64, total: &mut f64| {
        let mut small = 0u32;
        let mut offset = 0.0f64;
        let mut len = 1.0f64;
        for k in 0..60 {
            let (a, b) = if sign > 0.0 {
                (from + offset, from + offset + len)
            } else {
                (from - offset - len, from - offset)
            };
            budget = cfg.max_subdiv as isize;
            let seg = log_segment(g, a, b, 8, cfg, &mut budget);
            let rel = if seg == f64::NEG_INFINITY {
                0.0
            } else {
                let new_total = logaddexp(*total, seg);
                let r = (seg - new_total).exp();
                *total = new_total;
                r
            };
            if rel < cfg.rel_tol {
                small += 1;
            } else {
                small = 0;
            }
            if small >= 2 {
                return false;
            }
            if k == 59 && rel > 1e-3 {
                return true;
            }
            offset += len;
            len *= 2.0;
        }
        false
    };

    if extend_right && extend(1.0, b0, &mut total) {
        divergent = true;
    }
    if extend_left && extend(-1.0, a0, &mut total) {
        divergent = true;
    }
    LogEstimate {
        log_value: total,
        divergent,
    }
}

/// `ln E τ^q` for any exponent `q > 0` (the public norm entry point restricts
/// to `q ≥ 1`; smaller exponents are needed internally by the `K_p` closed
/// form).
pub(crate) fn log_moment(tail: &TailFunction, q: f64, cfg: &QuadratureConfig) -> Result<LogEstimate> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!("moment exponent must be positive, got {q}")));
    }
    if let Some(beta) = tail.power_log_beta() {
        // t^{q-1}·t^{-beta} fails to decay for q >= beta
        if q >= beta {
            return Ok(LogEstimate {
                log_value: f64::INFINITY,
                divergent: true,
            });
        }
    }
    if let TailFunction::Scaled { inner, factor } = tail {
        // exact homogeneity: E (k·τ)^q = k^q E τ^q
        let est = log_moment(inner, q, cfg)?;
        return Ok(LogEstimate {
            log_value: est.log_value + q * factor.ln(),
            divergent: est.divergent,
        });
    }
    let u0 = match tail.quantile(cfg.eps_tail) {
        Ok(u) => u,
        // tail never reaches eps_tail: the moment cannot be finite
        Err(Error::Divergent(_)) => {
            return Ok(LogEstimate {
                log_value: f64::INFINITY,
                divergent: true,
            })
        }
        Err(e) => return Err(e),
    };
    if u0 <= 0.0 {
        // essentially the zero variable
        return Ok(LogEstimate {
            log_value: f64::NEG_INFINITY,
            divergent: false,
        });
    }
    let g = move |s: f64| q * s + tail.ln_tail_at_ln(s);
    let b0 = u0.ln();
    let est = log_line_integral(&g, b0 - 3.0, b0, true, true, cfg);
    Ok(LogEstimate {
        log_value: q.ln() + est.log_value,
        divergent: est.divergent,
    })
}

/// Internal norm for any positive exponent; used by the `K_p(θ)` closed form.
pub(crate) fn raw_norm(tail: &TailFunction, q: f64, cfg: &QuadratureConfig) -> Result<MomentEstimate> {
    let est = log_moment(tail, q, cfg)?;
    let log_norm = est.log_value / q;
    Ok(MomentEstimate {
        value: log_norm.exp(),
        log_norm,
        divergent: est.divergent,
    })
}

/// The Lebesgue–Riesz norm `‖τ‖_p = [p ∫₀^∞ t^{p-1} T(t) dt]^{1/p}`, `p ≥ 1`.
///
/// ```
/// use grandtail::{moment_from_tail, QuadratureConfig, TailFunction};
/// let cfg = QuadratureConfig::default();
/// let m = moment_from_tail(&TailFunction::Exponential, 2.0, &cfg).unwrap();
/// assert!((m.value - 2f64.sqrt()).abs() < 1e-7); // Γ(3)^{1/2}
/// assert!(!m.divergent);
/// ```
pub fn moment_from_tail(tail: &TailFunction, p: f64, cfg: &QuadratureConfig) -> Result<MomentEstimate> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("moment order must be >= 1, got {p}")));
    }
    raw_norm(tail, p, cfg)
}

/// `κ_p(x) = ∫₀^x t^{p-1} / h(t) dt` — closed form `x^{p-Δ}/(p-Δ)` for power
/// `h`, numeric with a singularity split at `t = min(x, 1)` otherwise.
pub fn kappa_p(h: &HSpec, p: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("kappa_p requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    match h {
        HSpec::Power { delta } => {
            if p <= *delta {
                return Err(Error::NonIntegrable(format!(
                    "kappa_p with h = t^{delta} needs p > {delta}, got p = {p}"
                )));
            }
            Ok(x.powf(p - delta) / (p - delta))
        }
        HSpec::General { f, .. } => {
            // probe the power-law exponent of h near 0: t^{p-1}/h integrates
            // at the origin only when that exponent stays below p
            let (t1, t2) = (1e-6, 1e-9);
            let (h1, h2) = (f(t1), f(t2));
            if h1 > 0.0 && h2 > 0.0 {
                let slope = (h1.ln() - h2.ln()) / (t1.ln() - t2.ln());
                if slope >= p - 1e-9 {
                    return Err(Error::NonIntegrable(format!(
                        "kappa_p integrand behaves like t^({:.3}) near 0 with p = {p}",
                        p - 1.0 - slope
                    )));
                }
            }
            let split = x.min(1.0);
            let hf = f.clone();
            let g = move |s: f64| {
                let h = hf(s.exp());
                if h > 0.0 {
                    p * s - h.ln()
                } else {
                    // h underflowed: the true integrand is enormous there,
                    // but the slope probe above already rejected the
                    // non-integrable regimes, so this region is negligible
                    f64::NEG_INFINITY
                }
            };
            let ls = split.ln();
            let lower = log_line_integral(&g, ls - 3.0, ls, true, false, cfg);
            if lower.divergent {
                return Err(Error::NonIntegrable(
                    "kappa_p integrand is not integrable at 0".into(),
                ));
            }
            let mut total = lower.log_value.exp();
            if x > split {
                let hf = f.clone();
                let integrand = move |t: f64| t.powf(p - 1.0) / hf(t);
                let mut budget = cfg.max_subdiv as isize;
                let rough = gk15(&integrand, split, x).0;
                let tol = (cfg.rel_tol * rough.abs()).max(cfg.abs_tol);
                total += adaptive(&integrand, split, x, tol, 0, &mut budget);
            }
            Ok(total)
        }
    }
}

/// Truncated expectation `E[τ·1{τ > t}] = t·T(t) + ∫_t^∞ T(s) ds`.
pub fn truncated_mean(tail: &TailFunction, t: f64, cfg: &QuadratureConfig) -> Result<MomentEstimate> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::Domain(format!("truncation point must be >= 0, got {t}")));
    }
    if t == 0.0 {
        // E[τ·1{τ > 0}] = E τ = ‖τ‖₁ for a non-negative variable
        return moment_from_tail(tail, 1.0, cfg);
    }
    if let Some(beta) = tail.power_log_beta() {
        if beta <= 1.0 {
            return Ok(MomentEstimate {
                value: f64::INFINITY,
                log_norm: f64::INFINITY,
                divergent: true,
            });
        }
    }
    let head = t * tail.eval_raw(t);
    let u0 = tail.quantile(cfg.eps_tail).unwrap_or(t);
    let g = move |s: f64| s + tail.ln_tail_at_ln(s);
    let a0 = t.ln();
    let b0 = (a0 + 2.0).max(u0.ln());
    let est = log_line_integral(&g, a0, b0, false, true, cfg);
    let value = head + est.log_value.exp();
    Ok(MomentEstimate {
        value,
        log_norm: value.ln(),
        divergent: est.divergent,
    })
}
