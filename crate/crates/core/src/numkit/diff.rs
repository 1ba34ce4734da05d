use crate::error::{Error, Result};

/// Central-difference gradient `(f(x + h eᵢ) − f(x − h eᵢ)) / 2h`.
pub fn finite_diff_grad(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            let mut at = x.to_vec();
            at[i] += if up.is_finite() { -h } else { h };
            return Err(Error::NonFiniteEvaluation(at));
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}
