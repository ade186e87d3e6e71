//! Small numeric kernels shared across modules.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Largest finite-or-infinite value; `-inf` for an empty slice or all `-inf`.
pub fn max_value(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `ln Σ exp(xᵢ)`, stable for arguments spanning any range. Returns `-inf`
/// when every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = max_value(values);
    if !m.is_finite() {
        return m;
    }
    m + compensated_sum(values.iter().map(|&v| (v - m).exp())).ln()
}

/// Sample mean and unbiased sample variance.
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss = compensated_sum(values.iter().map(|&v| (v - mean) * (v - mean)));
    (mean, ss / (n - 1.0))
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Two-sided Gaussian tail `P(|X| > alpha)` for `X ~ N(0, 1)`.
pub fn two_sided_tail(alpha: f64) -> f64 {
    libm::erfc(alpha / std::f64::consts::SQRT_2)
}
