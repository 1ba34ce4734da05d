use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// The generator used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// An independent stream derived from `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64-style combination of two seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn standard_normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `count` draws of `mean + L z` with `z` standard normal, one per row.
pub fn mvn_sample(mean: &[f64], chol: &Matrix, count: usize, rng: &mut Rng) -> Result<Matrix> {
    let d = mean.len();
    if chol.rows() != d || chol.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "mvn_sample: mean of length {d} with factor {}x{}",
            chol.rows(),
            chol.cols()
        )));
    }
    let mut out = Matrix::zeros(count, d);
    let mut z = vec![0.0; d];
    for s in 0..count {
        z.iter_mut().for_each(|v| *v = standard_normal(rng));
        let row = out.row_mut(s);
        for i in 0..d {
            let li = &chol.row(i)[..=i];
            row[i] = mean[i] + li.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    Ok(out)
}
