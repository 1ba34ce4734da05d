use serde::{Deserialize, Serialize};

use crate::numkit::Matrix;
use crate::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matern52Hypers {
    /// One shared lengthscale, or one per input dimension.
    pub lengthscales: Vec<f64>,
    pub outputscale: f64,
}

impl Matern52Hypers {
    pub fn shared(lengthscale: f64, outputscale: f64) -> Self {
        Matern52Hypers { lengthscales: vec![lengthscale], outputscale }
    }

    fn scaled_sq_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.lengthscales.len() == 1 {
            let inv = 1.0 / self.lengthscales[0];
            a.iter().zip(b).map(|(x, y)| ((x - y) * inv).powi(2)).sum()
        } else {
            a.iter().zip(b).zip(&self.lengthscales).map(|((x, y), l)| ((x - y) / l).powi(2)).sum()
        }
    }
}

/// s·(1 + √5 r + 5r²/3)·exp(−√5 r) as a function of the scaled distance r.
#[inline]
pub fn matern52_profile(r: f64, outputscale: f64) -> f64 {
    let sr = SQRT5 * r;
    outputscale * (1.0 + sr + sr * sr / 3.0) * (-sr).exp()
}

/// −(1/r)·∂k/∂r, finite at r = 0: s·(5/3)(1 + √5 r)·exp(−√5 r).
#[inline]
pub(crate) fn matern52_radial(r: f64, outputscale: f64) -> f64 {
    let sr = SQRT5 * r;
    outputscale * (5.0 / 3.0) * (1.0 + sr) * (-sr).exp()
}

pub fn matern52(x: &[f64], y: &[f64], hypers: &Matern52Hypers) -> f64 {
    matern52_profile(hypers.scaled_sq_dist(x, y).sqrt(), hypers.outputscale)
}

/// Covariance of an infinitely wide ReLU network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IbnnKernelSpec {
    pub depth: usize,
    pub weight_variance: f64,
    pub bias_variance: f64,
}

impl Default for IbnnKernelSpec {
    fn default() -> Self {
        IbnnKernelSpec { depth: 3, weight_variance: 10.0, bias_variance: 1.3 }
    }
}

impl IbnnKernelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || !(self.weight_variance > 0.0) || !(self.bias_variance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "i-BNN kernel needs depth >= 1 and positive variances, got {self:?}"
            )));
        }
        Ok(())
    }

    /// One step of the arc-cosine recursion.
    #[inline]
    fn step(&self, kab: f64, kaa: f64, kbb: f64) -> f64 {
        let norm = (kaa * kbb).sqrt();
        let cos = (kab / norm).clamp(-1.0, 1.0);
        let theta = cos.acos();
        let j = theta.sin() + (std::f64::consts::PI - theta) * cos;
        self.bias_variance + self.weight_variance / (2.0 * std::f64::consts::PI) * norm * j
    }

    #[inline]
    fn diag_step(&self, kaa: f64) -> f64 {
        self.bias_variance + 0.5 * self.weight_variance * kaa
    }

    fn base(&self, dot: f64, dim: usize) -> f64 {
        self.bias_variance + self.weight_variance * dot / dim as f64
    }

    fn recurse(&self, mut kab: f64, mut kaa: f64, mut kbb: f64) -> f64 {
        for _ in 0..self.depth {
            kab = self.step(kab, kaa, kbb);
            kaa = self.diag_step(kaa);
            kbb = self.diag_step(kbb);
        }
        kab
    }
}

pub fn nngp_kernel(x: &[f64], y: &[f64], spec: &IbnnKernelSpec) -> f64 {
    let d = x.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    spec.recurse(spec.base(dot(x, y), d), spec.base(dot(x, x), d), spec.base(dot(y, y), d))
}

/// Covariance function over (possibly feature-mapped) inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Matern52(Matern52Hypers),
    Nngp(IbnnKernelSpec),
    /// `variance · ⟨a, b⟩`.
    Linear { variance: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Matern52(h) => matern52(a, b, h),
            Kernel::Nngp(spec) => nngp_kernel(a, b, spec),
            Kernel::Linear { variance } => variance * crate::numkit::dot(a, b),
        }
    }

    pub fn diag(&self, a: &Matrix) -> Vec<f64> {
        match self {
            Kernel::Matern52(h) => vec![h.outputscale; a.rows()],
            _ => a.row_iter().map(|r| self.eval(r, r)).collect(),
        }
    }

    pub fn matrix(&self, a: &Matrix, b: &Matrix) -> Matrix {
        assert_eq!(a.cols(), b.cols(), "kernel inputs must share a dimension");
        match self {
            Kernel::Matern52(h) => {
                let mut k = Matrix::zeros(a.rows(), b.rows());
                for i in 0..a.rows() {
                    let ai = a.row(i);
                    for (j, out) in k.row_mut(i).iter_mut().enumerate() {
                        *out = matern52(ai, b.row(j), h);
                    }
                }
                k
            }
            Kernel::Nngp(spec) => {
                let d = a.cols();
                let mut k = a.matmul_nt(b);
                let da: Vec<f64> = a.row_iter().map(|r| spec.base(crate::numkit::dot(r, r), d)).collect();
                let db: Vec<f64> = b.row_iter().map(|r| spec.base(crate::numkit::dot(r, r), d)).collect();
                for i in 0..a.rows() {
                    for (j, out) in k.row_mut(i).iter_mut().enumerate() {
                        *out = spec.recurse(spec.base(*out, d), da[i], db[j]);
                    }
                }
                k
            }
            Kernel::Linear { variance } => {
                let mut k = a.matmul_nt(b);
                k.scale(*variance);
                k
            }
        }
    }

    /// Symmetric Gram matrix of `a` with itself.
    pub fn gram(&self, a: &Matrix) -> Matrix {
        let mut k = self.matrix(a, a);
        let n = k.rows();
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (k[(i, j)] + k[(j, i)]);
                k[(i, j)] = avg;
                k[(j, i)] = avg;
            }
        }
        k
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Matern52(_) => "matern52",
            Kernel::Nngp(_) => "nngp",
            Kernel::Linear { .. } => "linear",
        }
    }
}
