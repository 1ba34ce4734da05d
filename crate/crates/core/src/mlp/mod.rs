//! Fully-connected networks over a flat parameter vector.
//!
//! Parameters are laid out layer by layer: the weight matrix of each layer
//! (output-major, row-major) followed by its bias.

mod checkpoint;
mod diagnostics;
mod network;

use std::fmt;
use std::ops::{Deref, DerefMut};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::numkit::{Matrix, Rng};
use crate::{Error, Result};

pub use checkpoint::{read_params, write_params};
pub use diagnostics::{cosine_similarity, interpolate_loss, mse_loss};
pub use network::{log_joint_and_grad, mlp_forward, Network, OutputJacobian, Tape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation value `a = σ(z)`.
    #[inline]
    pub fn derivative_at(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_widths: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
    pub prior_variance: f64,
    pub likelihood_variance: f64,
}

/// Position of one affine layer inside a [`ParamVector`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
    pub offset: usize,
}

impl LayerShape {
    pub fn weight_range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.inputs * self.outputs
    }

    pub fn bias_range(&self) -> std::ops::Range<usize> {
        let start = self.offset + self.inputs * self.outputs;
        start..start + self.outputs
    }

    pub fn len(&self) -> usize {
        (self.inputs + 1) * self.outputs
    }

    pub fn is_empty(&self) -> bool {
        self.outputs == 0
    }
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden_widths: Vec<usize>, output_dim: usize, activation: Activation) -> Self {
        MlpSpec {
            input_dim,
            hidden_widths,
            output_dim,
            activation,
            prior_variance: 1.0,
            likelihood_variance: 1.0,
        }
    }

    pub fn with_variances(mut self, prior_variance: f64, likelihood_variance: f64) -> Self {
        self.prior_variance = prior_variance;
        self.likelihood_variance = likelihood_variance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidConfig(format!(
                "network widths must be at least 1 (input {}, hidden {:?}, output {})",
                self.input_dim, self.hidden_widths, self.output_dim
            )));
        }
        for (name, v) in [("prior_variance", self.prior_variance), ("likelihood_variance", self.likelihood_variance)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.hidden_widths.len()
    }

    pub fn layers(&self) -> Vec<LayerShape> {
        let mut sizes = Vec::with_capacity(self.hidden_widths.len() + 2);
        sizes.push(self.input_dim);
        sizes.extend_from_slice(&self.hidden_widths);
        sizes.push(self.output_dim);
        let mut offset = 0;
        sizes
            .windows(2)
            .map(|w| {
                let shape = LayerShape { inputs: w[0], outputs: w[1], offset };
                offset += shape.len();
                shape
            })
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers().iter().map(LayerShape::len).sum()
    }

    /// FNV-1a hash of the architecture, used to tag checkpoints.
    pub fn fingerprint(&self) -> u64 {
        let text = format!(
            "{}|{:?}|{}|{}|{:e}|{:e}",
            self.input_dim,
            self.hidden_widths,
            self.output_dim,
            self.activation,
            self.prior_variance,
            self.likelihood_variance
        );
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<()> {
        let p = self.num_params();
        if params.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "parameter vector has length {}, network expects {p}",
                params.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        crate::numkit::dot(&self.0, &self.0).sqrt()
    }

    /// Layer-shaped copies: one (weights `outputs×inputs`, bias) pair per layer.
    pub fn unflatten(&self, spec: &MlpSpec) -> Result<Vec<(Matrix, Vec<f64>)>> {
        spec.check_params(&self.0)?;
        Ok(spec
            .layers()
            .iter()
            .map(|l| {
                let w = Matrix::from_vec(l.outputs, l.inputs, self.0[l.weight_range()].to_vec());
                (w, self.0[l.bias_range()].to_vec())
            })
            .collect())
    }

    pub fn flatten(spec: &MlpSpec, layers: &[(Matrix, Vec<f64>)]) -> Result<Self> {
        let shapes = spec.layers();
        if shapes.len() != layers.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} layers given, network has {}",
                layers.len(),
                shapes.len()
            )));
        }
        let mut out = Vec::with_capacity(spec.num_params());
        for (shape, (w, b)) in shapes.iter().zip(layers) {
            if w.shape() != (shape.outputs, shape.inputs) || b.len() != shape.outputs {
                return Err(Error::DimensionMismatch(format!(
                    "layer expects {}x{} weights and {} biases, got {:?} and {}",
                    shape.outputs,
                    shape.inputs,
                    shape.outputs,
                    w.shape(),
                    b.len()
                )));
            }
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b);
        }
        Ok(ParamVector(out))
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

/// Prior draw: every weight and bias i.i.d. N(0, σ_p²).
pub fn mlp_init(spec: &MlpSpec, rng: &mut Rng) -> ParamVector {
    let normal = Normal::new(0.0, spec.prior_variance.sqrt()).expect("prior variance is validated positive");
    ParamVector((0..spec.num_params()).map(|_| normal.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rng_from_seed;

    #[test]
    fn parameter_count_matches_layers() {
        let spec = MlpSpec::new(3, vec![4, 5], 2, Activation::Tanh);
        assert_eq!(spec.num_params(), 4 * 3 + 4 + 5 * 4 + 5 + 2 * 5 + 2);
        let layers = spec.layers();
        assert_eq!(layers[1].offset, 16);
        assert_eq!(layers[2].bias_range(), 51..53);
    }

    #[test]
    fn init_variance() {
        let spec = MlpSpec::new(1, vec![], 1, Activation::Tanh).with_variances(10.0, 1.0);
        let mut rng = rng_from_seed(3);
        let draws: Vec<f64> = (0..100_000).map(|_| mlp_init(&spec, &mut rng)[0]).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!((9.7..=10.3).contains(&var), "{var}");
    }

    #[test]
    fn tiny_prior_gives_tiny_init() {
        let spec = MlpSpec::new(2, vec![8], 1, Activation::Relu).with_variances(1e-12, 1.0);
        let p = mlp_init(&spec, &mut rng_from_seed(0));
        assert_eq!(p.len(), spec.num_params());
        assert!(p.iter().all(|x| x.abs() < 1e-4));
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(MlpSpec::new(0, vec![], 1, Activation::Tanh).validate().is_err());
        assert!(MlpSpec::new(1, vec![0], 1, Activation::Tanh).validate().is_err());
        assert!(MlpSpec::new(1, vec![], 1, Activation::Tanh).with_variances(0.0, 1.0).validate().is_err());
        assert!(MlpSpec::new(1, vec![3], 1, Activation::Tanh).validate().is_ok());
    }

    #[test]
    fn fingerprint_distinguishes_architectures() {
        let a = MlpSpec::new(2, vec![8], 1, Activation::Tanh);
        let b = MlpSpec::new(2, vec![8], 1, Activation::Relu);
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
    }
}
