//! Deterministic summation and guarded floating-point comparisons.

use crate::{ATOL, RTOL};

/// Pairwise summation with a fixed association order.
///
/// The rounding error grows like O(log n) ulps instead of O(n) for a running
/// sum, and the result depends only on the slice contents, so repeated runs
/// are bit-identical.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Comparison slack at the given magnitude: `ATOL + RTOL * |scale|`.
pub fn slack(scale: f64) -> f64 {
    ATOL + RTOL * scale.abs()
}

/// `lhs <= rhs` up to the crate comparison convention at magnitude `scale`.
///
/// Inequalities that hold exactly in real arithmetic are checked this way so
/// that rounding in the evaluation of either side cannot flip the verdict.
pub fn leq_with_slack(lhs: f64, rhs: f64, scale: f64) -> bool {
    lhs <= rhs + slack(scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_handles_small_slices() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[3.5]), 3.5);
        assert_eq!(pairwise_sum(&[1.0, 2.0]), 3.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0]), 10.0);
    }

    #[test]
    fn pairwise_sum_is_deterministic() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 2654435761u64 % 997) as f64).sin()).collect();
        let a = pairwise_sum(&xs);
        let b = pairwise_sum(&xs);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn pairwise_sum_matches_exact_integer_sums() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn slack_scales_with_magnitude() {
        assert!(leq_with_slack(1.0, 1.0, 1.0));
        assert!(leq_with_slack(1.0 + 1e-10, 1.0, 1.0));
        assert!(!leq_with_slack(1.1, 1.0, 1.0));
    }
}
