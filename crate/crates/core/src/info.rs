//! Scalar information measures and numeric helpers shared across modules.
//!
//! Everything here works in nats. Convert with [`to_bits`] at the output layer.

use libm::erfc;

/// Converts a quantity in nats to bits.
pub fn to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// `-p ln p` with the `0 ln 0 = 0` convention.
#[inline]
pub fn neg_xlogx(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// Shannon entropy of a probability vector, nats.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().copied().map(neg_xlogx).sum()
}

/// Binary entropy H₂(p), nats.
pub fn binary_entropy(p: f64) -> f64 {
    neg_xlogx(p) + neg_xlogx(1.0 - p)
}

/// Binary KL divergence D₂(a‖b), nats.
pub fn binary_kl(a: f64, b: f64) -> f64 {
    let term = |x: f64, y: f64| if x > 0.0 { x * (x / y).ln() } else { 0.0 };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

/// Binary convolution t ∗ p = t(1−p) + (1−t)p.
pub fn binary_convolution(t: f64, p: f64) -> f64 {
    t * (1.0 - p) + (1.0 - t) * p
}

/// Numerically stable `ln Σ exp(xᵢ)`; returns −∞ for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Standard normal CDF Φ(z).
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Gaussian tail Q(z) = 1 − Φ(z), accurate in the upper tail.
pub fn q_function(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Probability that N(mean, sigma²) falls in `[lo, hi)`.
///
/// Uses whichever tail keeps the subtraction well conditioned.
pub fn normal_interval(lo: f64, hi: f64, mean: f64, sigma: f64) -> f64 {
    let a = (lo - mean) / sigma;
    let b = (hi - mean) / sigma;
    if a >= 0.0 {
        q_function(a) - q_function(b)
    } else if b <= 0.0 {
        normal_cdf(b) - normal_cdf(a)
    } else {
        // Both tails are below ½, so the complement loses nothing.
        1.0 - (q_function(b) + normal_cdf(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn binary_entropy_at_tenth() {
        // 1 − H₂(0.1) in bits
        assert_abs_diff_eq!(1.0 - to_bits(binary_entropy(0.1)), 0.531004406410719, epsilon = 1e-12);
    }

    #[test]
    fn binary_kl_half_vs_fifth() {
        // 0.5 ln(0.5/0.2) + 0.5 ln(0.5/0.8) = 0.5 ln(25/16)
        let expected = 0.5 * (25.0f64 / 16.0).ln();
        assert_abs_diff_eq!(binary_kl(0.5, 0.2), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(to_bits(binary_kl(0.5, 0.2)), 0.321928094887362, epsilon = 1e-12);
    }

    #[test]
    fn log_sum_exp_handles_large_offsets() {
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert_abs_diff_eq!(v, -1000.0 + 2f64.ln(), epsilon = 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn q_function_values() {
        assert_abs_diff_eq!(q_function(0.5), 0.308537538725987, epsilon = 1e-12);
        assert_abs_diff_eq!(q_function(-0.5), 0.691462461274013, epsilon = 1e-12);
        assert_abs_diff_eq!(normal_interval(-1.0, 1.0, 0.0, 1.0), 0.682689492137086, epsilon = 1e-12);
    }
}
