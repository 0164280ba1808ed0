//! Euclidean projection onto the probability simplex
//! `{ζ : ζ ≥ 0, Σζ = 1}` by sort-then-threshold.

/// Returns `argmin_{ζ ∈ S_D} ‖ζ − y‖₂`. An empty input yields an empty output.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut out = y.to_vec();
    let mut scratch = Vec::with_capacity(y.len());
    project_simplex_in_place(&mut out, &mut scratch);
    out
}

/// In-place variant; `scratch` is reused to avoid allocating per call.
pub fn project_simplex_in_place(y: &mut [f64], scratch: &mut Vec<f64>) {
    if y.is_empty() {
        return;
    }
    let theta = simplex_threshold(y, scratch);
    for v in y.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// The threshold θ with `Σ max(y_i − θ, 0) = 1`.
pub fn simplex_threshold(y: &[f64], scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend_from_slice(y);
    scratch.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = scratch[0] - 1.0;
    for (j, &u) in scratch.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    theta
}
