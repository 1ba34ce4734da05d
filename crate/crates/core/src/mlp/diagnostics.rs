use crate::numkit::{dot, Matrix};
use crate::{Error, Result};

use super::{mlp_forward, MlpSpec};

/// ⟨p1, p2⟩ / (‖p1‖·‖p2‖), clamped to [−1, 1].
pub fn cosine_similarity(p1: &[f64], p2: &[f64]) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::DimensionMismatch(format!("lengths {} and {}", p1.len(), p2.len())));
    }
    let n1 = dot(p1, p1).sqrt();
    let n2 = dot(p2, p2).sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(p1, p2) / (n1 * n2)).clamp(-1.0, 1.0))
}

/// Mean squared error over all points and outputs.
pub fn mse_loss(spec: &MlpSpec, params: &[f64], x: &Matrix, y: &Matrix) -> Result<f64> {
    let out = mlp_forward(spec, params, x)?;
    if out.shape() != y.shape() {
        return Err(Error::DimensionMismatch(format!("targets {:?}, outputs {:?}", y.shape(), out.shape())));
    }
    let sq: f64 = out.as_slice().iter().zip(y.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sq / out.as_slice().len().max(1) as f64)
}

/// Training loss along the line `p2 + (p1 − p2)·t` for `steps` evenly spaced
/// `t` in `range`.
pub fn interpolate_loss(
    spec: &MlpSpec,
    p1: &[f64],
    p2: &[f64],
    x: &Matrix,
    y: &Matrix,
    steps: usize,
    range: (f64, f64),
) -> Result<Vec<(f64, f64)>> {
    if steps < 2 {
        return Err(Error::InvalidConfig(format!("interpolation needs at least 2 steps, got {steps}")));
    }
    spec.check_params(p1)?;
    spec.check_params(p2)?;
    let (lo, hi) = range;
    let mut theta = vec![0.0; p1.len()];
    (0..steps)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
            for ((th, a), b) in theta.iter_mut().zip(p1).zip(p2) {
                *th = b + (a - b) * t;
            }
            Ok((t, mse_loss(spec, &theta, x, y)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{mlp_init, Activation};
    use crate::numkit::rng_from_seed;

    #[test]
    fn cosine_cases() {
        assert!((cosine_similarity(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((cosine_similarity(&[1.0, 2.0], &[-1.0, -2.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(cosine_similarity(&[0.0, 0.0], &[0.0, 1.0]), Err(Error::ZeroNorm)));
    }

    #[test]
    fn interpolation_endpoints() {
        let spec = MlpSpec::new(2, vec![8], 1, Activation::Tanh);
        let mut rng = rng_from_seed(4);
        let p1 = mlp_init(&spec, &mut rng);
        let p2 = mlp_init(&spec, &mut rng);
        let x = Matrix::from_fn(10, 2, |i, j| ((i * 3 + j) % 7) as f64 / 7.0);
        let y = Matrix::from_fn(10, 1, |i, _| i as f64 / 10.0);
        let curve = interpolate_loss(&spec, &p1, &p2, &x, &y, 5, (0.0, 1.0)).unwrap();
        assert_eq!(curve[0].1, mse_loss(&spec, &p2, &x, &y).unwrap());
        assert_eq!(curve[4].1, mse_loss(&spec, &p1, &x, &y).unwrap());
        let flat = interpolate_loss(&spec, &p1, &p1, &x, &y, 6, (-0.5, 1.5)).unwrap();
        assert!(flat.iter().all(|&(_, l)| (l - flat[0].1).abs() < 1e-12));
        assert!(interpolate_loss(&spec, &p1, &p2, &x, &y, 1, (0.0, 1.0)).is_err());
    }
}
