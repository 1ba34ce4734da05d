//! Sobol low-discrepancy points using the Joe–Kuo `new-joe-kuo-6` direction
//! numbers (first 1000 dimensions), with optional digital-shift scrambling.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng as _, RngCore};

use super::matrix::Matrix;
use super::random::{rng_from_seed, Rng};
use crate::error::{Error, Result};

const BITS: usize = 32;
const JOE_KUO: &str = include_str!("new-joe-kuo-6.1000");

/// Number of dimensions covered by the embedded direction-number table.
pub const SOBOL_MAX_DIM: usize = 1000;

fn direction_table() -> &'static [[u32; BITS]] {
    static TABLE: OnceLock<Vec<[u32; BITS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(SOBOL_MAX_DIM);
        let mut first = [0u32; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1 << (31 - k);
        }
        table.push(first);
        for line in JOE_KUO.lines().skip(1) {
            let fields: Vec<u32> = line.split_whitespace().map(|t| t.parse().expect("direction table")).collect();
            let (s, a, m) = (fields[1] as usize, fields[2], &fields[3..]);
            let mut v = [0u32; BITS];
            for k in 0..s.min(BITS) {
                v[k] = m[k] << (31 - k);
            }
            for k in s..BITS {
                let mut x = v[k - s] ^ (v[k - s] >> s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        x ^= v[k - j];
                    }
                }
                v[k] = x;
            }
            table.push(v);
        }
        table
    })
}

/// `count` Sobol points in `[0,1]^dim`, skipping the initial zero point.
///
/// `seed == 0` gives the plain deterministic sequence; any other seed
/// applies a random digital shift per coordinate.
pub fn sobol_points(dim: usize, count: usize, seed: u64) -> Result<Matrix> {
    if dim > SOBOL_MAX_DIM {
        return Err(Error::DimTooLarge { requested: dim, available: SOBOL_MAX_DIM });
    }
    Ok(generate(dim, count, seed))
}

fn generate(dim: usize, count: usize, seed: u64) -> Matrix {
    let table = direction_table();
    let shifts: Vec<u32> = if seed == 0 {
        vec![0; dim]
    } else {
        let mut rng = rng_from_seed(seed);
        (0..dim).map(|_| rng.next_u32()).collect()
    };
    let mut out = Matrix::zeros(count, dim);
    let mut state = vec![0u32; dim];
    let scale = 1.0 / 4_294_967_296.0;
    for i in 1..=count {
        let c = (i as u64).trailing_zeros() as usize;
        let row = out.row_mut(i - 1);
        for d in 0..dim {
            state[d] ^= table[d][c.min(BITS - 1)];
            row[d] = f64::from(state[d] ^ shifts[d]) * scale;
        }
    }
    out
}

/// Sobol points with a seeded Latin-hypercube fallback for coordinates
/// beyond the direction-number table.
#[derive(Clone, Debug)]
pub struct SobolDraw {
    pub points: Matrix,
    /// Number of trailing coordinates filled by Latin-hypercube sampling.
    pub fallback_dims: usize,
}

pub fn sobol_points_or_lhs(dim: usize, count: usize, seed: u64) -> SobolDraw {
    if dim <= SOBOL_MAX_DIM {
        return SobolDraw { points: generate(dim, count, seed), fallback_dims: 0 };
    }
    let head = generate(SOBOL_MAX_DIM, count, seed);
    let extra = dim - SOBOL_MAX_DIM;
    let mut rng = rng_from_seed(seed ^ 0x5851_F42D_4C95_7F2D);
    let tail = latin_hypercube(extra, count, &mut rng);
    let points = Matrix::from_fn(count, dim, |i, j| {
        if j < SOBOL_MAX_DIM {
            head[(i, j)]
        } else {
            tail[(i, j - SOBOL_MAX_DIM)]
        }
    });
    SobolDraw { points, fallback_dims: extra }
}

/// Latin-hypercube sample: each coordinate has exactly one point per
/// stratum `[k/count, (k+1)/count)`.
pub fn latin_hypercube(dim: usize, count: usize, rng: &mut Rng) -> Matrix {
    let mut out = Matrix::zeros(count, dim);
    let mut perm: Vec<usize> = (0..count).collect();
    for d in 0..dim {
        perm.shuffle(rng);
        for (i, &p) in perm.iter().enumerate() {
            out[(i, d)] = (p as f64 + rng.random::<f64>()) / count as f64;
        }
    }
    out
}
