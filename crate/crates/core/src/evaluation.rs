//! Clustering evaluation: normalized mutual information and relative k error.

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};

/// NMI with natural-log entropies and arithmetic-mean normalisation,
/// `I(T;P) / ((H(T) + H(P)) / 2)`. Two constant labelings score 1.
pub fn nmi(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(invalid("labels", "at least one label is required"));
    }
    let n = truth.len() as f64;
    let mut t_counts: HashMap<usize, f64> = HashMap::new();
    let mut p_counts: HashMap<usize, f64> = HashMap::new();
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    for (&t, &p) in truth.iter().zip(predicted) {
        *t_counts.entry(t).or_default() += 1.0;
        *p_counts.entry(p).or_default() += 1.0;
        *joint.entry((t, p)).or_default() += 1.0;
    }
    let entropy = |counts: &HashMap<usize, f64>| -> f64 {
        counts.values().map(|&c| -(c / n) * (c / n).ln()).sum()
    };
    let h_t = entropy(&t_counts);
    let h_p = entropy(&p_counts);
    if h_t == 0.0 && h_p == 0.0 {
        return Ok(1.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(t, p), &c)| (c / n) * (c * n / (t_counts[&t] * p_counts[&p])).ln())
        .sum();
    Ok((mi / (0.5 * (h_t + h_p))).clamp(0.0, 1.0))
}

/// `|k_est − k_true| / k_true`.
pub fn relative_k_error(k_est: usize, k_true: usize) -> Result<f64> {
    if k_true == 0 {
        return Err(invalid("k_true", "must be at least 1"));
    }
    Ok(k_est.abs_diff(k_true) as f64 / k_true as f64)
}
