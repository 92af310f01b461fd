//! Binomial helpers.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

/// Standard deviation of a binomial proportion with success probability `p`.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `|observed − expected| / σ`; zero when both agree exactly, infinite when
/// they differ with `σ = 0`.
pub fn sigma_distance(observed: f64, expected: f64, sigma: f64) -> f64 {
    let d = (observed - expected).abs();
    if d == 0.0 {
        0.0
    } else if sigma == 0.0 {
        f64::INFINITY
    } else {
        d / sigma
    }
}
