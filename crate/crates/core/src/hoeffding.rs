//! Tail bounds for weighted sums of independent `±1` variables.

/// `exp(−margin² / (c · Σ w²))`.
///
/// With no randomness left (`Σ w² = 0`) the sum is deterministic and the
/// threshold estimate is exact, so the bound is 0.
pub fn tail_bound(margin: f64, sum_sq: f64, c: f64) -> f64 {
    if sum_sq <= 0.0 {
        return 0.0;
    }
    (-(margin * margin) / (c * sum_sq)).exp()
}

/// The estimator bound used throughout, `exp(−Ψ² / (4 Σ w²))`.
pub fn estimator_bound(psi: f64, sum_sq: f64) -> f64 {
    tail_bound(psi, sum_sq, 4.0)
}

/// Hoeffding's inequality for `Σ w_j X_j` with `X_j ∈ [−1, 1]`:
/// `P(|Σ w_j X_j − E| ≥ t) ≤ exp(−t² / (2 Σ w²))` per tail.
pub fn hoeffding_one_sided(t: f64, sum_sq: f64) -> f64 {
    tail_bound(t, sum_sq, 2.0)
}

/// `4 √(ln n)`.
pub fn ambiguity_threshold(n: usize) -> f64 {
    4.0 * (n as f64).ln().sqrt()
}

/// `n^{-5/4}`.
pub fn non_ambiguous_error(n: usize) -> f64 {
    (n as f64).powf(-1.25)
}
