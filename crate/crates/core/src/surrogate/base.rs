use rand::{Rng as _, RngCore};

use crate::numkit::{normal_quantile, sobol_points_or_lhs, standard_normal, Rng};

/// Common random numbers for one acquisition maximization: a standard
/// normal per (draw, batch position, objective) and a uniform per draw for
/// picking weight samples.
#[derive(Clone, Debug)]
pub struct BaseSamples {
    samples: usize,
    positions: usize,
    outputs: usize,
    normals: Vec<f64>,
    uniforms: Vec<f64>,
}

impl BaseSamples {
    pub fn iid(samples: usize, positions: usize, outputs: usize, rng: &mut Rng) -> Self {
        let normals = (0..samples * positions * outputs).map(|_| standard_normal(rng)).collect();
        let uniforms = (0..samples).map(|_| rng.random::<f64>()).collect();
        BaseSamples { samples, positions, outputs, normals, uniforms }
    }

    /// Randomly shifted Sobol points pushed through the normal quantile.
    pub fn sobol(samples: usize, positions: usize, outputs: usize, rng: &mut Rng) -> Self {
        let width = positions * outputs;
        let points = sobol_points_or_lhs(width + 1, samples, rng.next_u64() | 1).points;
        let mut normals = Vec::with_capacity(samples * width);
        let mut uniforms = Vec::with_capacity(samples);
        for s in 0..samples {
            let row = points.row(s);
            normals.extend(row[..width].iter().map(|&u| normal_quantile(u.clamp(1e-12, 1.0 - 1e-12))));
            uniforms.push(row[width]);
        }
        BaseSamples { samples, positions, outputs, normals, uniforms }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn normal(&self, s: usize, position: usize, k: usize) -> f64 {
        self.normals[(s * self.positions + position) * self.outputs + k]
    }

    #[inline]
    pub fn uniform(&self, s: usize) -> f64 {
        self.uniforms[s]
    }

    /// Index in `0..count` for each draw.
    pub fn member_indices(&self, count: usize) -> Vec<usize> {
        self.uniforms.iter().map(|u| ((u * count as f64) as usize).min(count - 1)).collect()
    }
}
