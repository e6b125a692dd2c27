//! Seeded Monte Carlo: inverse-transform sampling from tail models and
//! empirical verification of the hypothesis inequality and computed bounds.
//!
//! Sampling is chunked with a counter-based stream per chunk, so the output
//! is reproducible and order-independent under parallel generation.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::doob::HSpec;
use crate::error::{Error, Result};
use crate::tail::TailFunction;

const CHUNK: usize = 65_536;

/// A reproducible draw from a tail model.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub descriptor: TailFunction,
    pub seed: u64,
    pub n: usize,
    pub values: Vec<f64>,
}

/// Inverse-transform sampling: chunk `i` draws from the ChaCha stream
/// `(seed, i)`, maps uniforms `u ∈ [0, 1)` to `q = 1 − u ∈ (0, 1]`, and
/// evaluates the generalized inverse of the tail.
///
/// The chunked streams make a draw a pure function of `(tail, n, seed)`, and
/// a prefix of a longer run is identical to a shorter run:
///
/// ```
/// use grandtail::{sample, TailFunction};
///
/// let a = sample(&TailFunction::Exponential, 1000, 42).unwrap();
/// let b = sample(&TailFunction::Exponential, 1000, 42).unwrap();
/// assert_eq!(a.values, b.values);
/// ```
pub fn sample(tail: &TailFunction, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(n);
    let chunks = n.div_ceil(CHUNK);
    for chunk in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        let take = CHUNK.min(n - chunk * CHUNK);
        for _ in 0..take {
            let q = 1.0 - rng.random::<f64>();
            values.push(tail.quantile(q)?);
        }
    }
    Ok(SampleSet {
        descriptor: tail.clone(),
        seed,
        n,
        values,
    })
}

/// `(mean of values^p)^{1/p}`.
pub fn empirical_moment(s: &SampleSet, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("moment order must be >= 1, got {p}")));
    }
    let m = s.values.iter().map(|v| v.powf(p)).sum::<f64>() / s.n as f64;
    Ok(m.powf(1.0 / p))
}

/// Fraction of values strictly greater than `t`.
pub fn empirical_tail(s: &SampleSet, t: f64) -> f64 {
    s.values.iter().filter(|&&v| v > t).count() as f64 / s.n as f64
}

/// One grid point where the empirical hypothesis inequality failed beyond
/// statistical slack.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Per-grid-point verdicts for `h(t)·P(ξ > βt) ≤ C·E[X·1{ξ > t}]`.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
    /// Grid points where both sides were empirically zero: no information.
    pub uninformative: Vec<f64>,
}

/// Empirical check of the hypothesis on paired samples `(ξ_i, X_i)`. The
/// slack is 3 empirical standard errors of the right-hand side, so sampling
/// noise is not reported as a violation.
pub fn verify_hypothesis(
    xi: &[f64],
    x: &[f64],
    h: &HSpec,
    beta: f64,
    c: f64,
    t_grid: &[f64],
) -> Result<HypothesisReport> {
    if xi.len() != x.len() || xi.is_empty() {
        return Err(Error::Domain("paired samples must be non-empty and of equal length".into()));
    }
    if !(beta > 0.0 && c > 0.0) {
        return Err(Error::Domain("beta and C must be positive".into()));
    }
    let n = xi.len() as f64;
    let mut violations = Vec::new();
    let mut uninformative = Vec::new();
    for &t in t_grid {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("t_grid must be strictly positive and finite, got {t}")));
        }
        let lhs = h.eval(t) * xi.iter().filter(|&&v| v > beta * t).count() as f64 / n;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for (&xi_i, &x_i) in xi.iter().zip(x) {
            let w = if xi_i > t { x_i } else { 0.0 };
            sum += w;
            sum_sq += w * w;
        }
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        let rhs = c * mean;
        let slack = 3.0 * c * (var / n).sqrt();
        if rhs == 0.0 && lhs == 0.0 {
            uninformative.push(t);
        } else if lhs > rhs + slack {
            violations.push(Violation { t, lhs, rhs, slack });
        }
    }
    Ok(HypothesisReport {
        checked: t_grid.len(),
        violations,
        uninformative,
    })
}

/// Empirical validity check of a computed norm bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub empirical_norm: f64,
    pub standard_error: f64,
    pub holds: bool,
}

/// `holds` when the empirical p-norm does not exceed the bound by more than
/// 3 delta-method standard errors of the estimate.
pub fn verify_bound(s: &SampleSet, p: f64, bound: f64) -> Result<BoundCheck> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("moment order must be >= 1, got {p}")));
    }
    if !(bound > 0.0) {
        return Err(Error::Domain(format!("bound must be positive, got {bound}")));
    }
    let n = s.n as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &v in &s.values {
        let w = v.powf(p);
        sum += w;
        sum_sq += w * w;
    }
    let m = sum / n;
    let var = (sum_sq / n - m * m).max(0.0);
    let norm = m.powf(1.0 / p);
    // delta method: d(m^{1/p})/dm = m^{1/p-1}/p
    let se = if m > 0.0 {
        m.powf(1.0 / p - 1.0) / p * (var / n).sqrt()
    } else {
        0.0
    };
    Ok(BoundCheck {
        empirical_norm: norm,
        standard_error: se,
        holds: norm <= bound + 3.0 * se,
    })
}

impl SampleSet {
    /// Writes the draw as single-column CSV with a `value` header.
    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "value")?;
        for v in &self.values {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }

    /// Reads a single-column CSV (optional `value` header) of non-negative
    /// reals.
    pub fn import_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
        let text = std::fs::read_to_string(path)?;
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.parse::<f64>().is_err()) {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Config(format!("line {}: cannot parse '{line}'", i + 1)))?;
            if v < 0.0 {
                return Err(Error::Config(format!("line {}: negative value {v}", i + 1)));
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::Config("no samples in file".into()));
        }
        Ok(values)
    }
}
