//! Tail-based moment machinery for non-negative random variables: Doob-type
//! maximal-inequality bounds, Grand Lebesgue Space norms, sharpness
//! diagnostics, and Monte Carlo verification.
//!
//! A variable `τ ≥ 0` is modelled by its tail `T(t) = P(τ > t)` alone; all
//! norms are computed by log-domain adaptive quadrature from
//! `E τ^p = p ∫₀^∞ t^{p-1} T(t) dt`, which keeps `‖τ‖_p` representable even
//! when the raw moment overflows `f64`.
//!
//! ```
//! use grandtail::{moment_from_tail, QuadratureConfig, TailFunction};
//!
//! let cfg = QuadratureConfig::default();
//! let norm = moment_from_tail(&TailFunction::Exponential, 2.0, &cfg).unwrap();
//! assert!((norm.value - 2f64.sqrt()).abs() < 1e-7); // Γ(3)^{1/2} = √2
//! ```

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN along with
// out-of-range values, which `x <= 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod doob;
pub mod error;
pub mod gls;
pub mod grid;
pub mod montecarlo;
pub mod quadrature;
pub mod report;
pub mod sharpness;
pub mod tail;

pub use doob::{
    closed_form_bound, default_r_grid, default_theta_grid, derived_form_bound, fit_v, k_p_norm,
    l_s_norm, min_admissible_c, multivariate_bound, optimize_bound, theorem_bound, vector_p_norm,
    AdmissibleC, BoundCandidate, BoundReport, Coupling, DoobHypothesis, HSpec, KpNorm,
};
pub use error::{Error, Result};
pub use gls::{
    check_limit_condition, check_slowly_varying, default_p_grid, eval_psi, gls_norm,
    heavy_tail_moment_rate, membership_from_tail, moment_rate_with_exponent, transform_inequality,
    tail_from_gls, young_fenchel, Convergence, GeneratingFunction, GlsNorm, LimitCondition,
    Membership, TransformReport, RateReport, Verdict,
};
pub use montecarlo::{
    empirical_moment, empirical_tail, sample, verify_bound, verify_hypothesis, BoundCheck,
    HypothesisReport, SampleSet, Violation,
};
pub use quadrature::{
    kappa_p, moment_from_tail, truncated_mean, MomentEstimate, QuadratureConfig,
};
pub use sharpness::{sharpness_scan, u_estimate, y_functional, SharpnessReport};
pub use tail::{SlowlyVarying, TailFunction};
