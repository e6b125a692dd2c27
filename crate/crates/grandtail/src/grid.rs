//! Grid helpers used by the search and verification routines.

/// `n` logarithmically spaced points on `[a, b]`, endpoints included.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2, "log_spaced needs 0 < a < b, n >= 2");
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` linearly spaced points on `[a, b]`, endpoints included.
pub fn linear_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(b > a && n >= 2, "linear_spaced needs a < b, n >= 2");
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}
