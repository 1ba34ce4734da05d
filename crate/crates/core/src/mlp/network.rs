use crate::numkit::{gemm, Matrix};
use crate::{Error, Result};

use super::{Activation, LayerShape, MlpSpec, ParamVector};

/// Layer plan for a parameter vector. Hidden layers are always activated;
/// the last layer is affine unless built with [`Network::with_final_activation`].
#[derive(Clone, Debug)]
pub struct Network {
    layers: Vec<LayerShape>,
    activation: Activation,
    activate_last: bool,
    num_params: usize,
}

/// Activations recorded by a forward pass: `acts[0]` is the input and
/// `acts[l + 1]` the output of layer `l`.
#[derive(Clone, Debug)]
pub struct Tape {
    acts: Vec<Matrix>,
}

impl Tape {
    pub fn output(&self) -> &Matrix {
        self.acts.last().expect("tape holds at least the input")
    }

    pub fn into_output(mut self) -> Matrix {
        self.acts.pop().expect("tape holds at least the input")
    }
}

impl Network {
    pub fn new(spec: &MlpSpec) -> Self {
        let layers = spec.layers();
        let num_params = layers.iter().map(LayerShape::len).sum();
        Network { layers, activation: spec.activation, activate_last: false, num_params }
    }

    /// Every layer, including the last, passes through the activation.
    pub fn with_final_activation(spec: &MlpSpec) -> Self {
        Network { activate_last: true, ..Network::new(spec) }
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    fn activated(&self, layer: usize) -> bool {
        self.activate_last || layer + 1 < self.layers.len()
    }

    fn check(&self, params: &[f64], x: &Matrix) -> Result<()> {
        if params.len() != self.num_params {
            return Err(Error::DimensionMismatch(format!(
                "parameter vector has length {}, network expects {}",
                params.len(),
                self.num_params
            )));
        }
        if x.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "inputs have {} columns, network expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn layer_forward(&self, l: usize, params: &[f64], input: &Matrix) -> Matrix {
        let shape = &self.layers[l];
        let n = input.rows();
        let mut out = Matrix::zeros(n, shape.outputs);
        let w = &params[shape.weight_range()];
        let b = &params[shape.bias_range()];
        gemm(
            n, shape.inputs, shape.outputs,
            input.as_slice(), shape.inputs as isize, 1,
            w, 1, shape.inputs as isize,
            out.as_mut_slice(),
        );
        let act = self.activated(l).then_some(self.activation);
        for row in out.as_mut_slice().chunks_exact_mut(shape.outputs) {
            for (z, bias) in row.iter_mut().zip(b) {
                *z += bias;
                if let Some(a) = act {
                    *z = a.apply(*z);
                }
            }
        }
        out
    }

    pub fn forward(&self, params: &[f64], x: &Matrix) -> Result<Matrix> {
        self.check(params, x)?;
        let mut h = self.layer_forward(0, params, x);
        for l in 1..self.layers.len() {
            h = self.layer_forward(l, params, &h);
        }
        Ok(h)
    }

    pub fn forward_tape(&self, params: &[f64], x: &Matrix) -> Result<Tape> {
        self.check(params, x)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for l in 0..self.layers.len() {
            let next = self.layer_forward(l, params, &acts[l]);
            acts.push(next);
        }
        Ok(Tape { acts })
    }

    /// Reverse pass: given ∂L/∂output, writes ∂L/∂θ into `grad` and
    /// returns ∂L/∂input when `want_input` is set.
    pub fn backward(
        &self,
        params: &[f64],
        tape: &Tape,
        d_out: &Matrix,
        grad: &mut [f64],
        want_input: bool,
    ) -> Option<Matrix> {
        assert_eq!(grad.len(), self.num_params, "gradient buffer length");
        assert_eq!(d_out.shape(), tape.output().shape(), "output gradient shape");
        let n = d_out.rows();
        let mut delta = d_out.clone();
        for l in (0..self.layers.len()).rev() {
            let shape = &self.layers[l];
            if self.activated(l) {
                for (d, a) in delta.as_mut_slice().iter_mut().zip(tape.acts[l + 1].as_slice()) {
                    *d *= self.activation.derivative_at(*a);
                }
            }
            let input = &tape.acts[l];
            gemm(
                shape.outputs, n, shape.inputs,
                delta.as_slice(), 1, shape.outputs as isize,
                input.as_slice(), shape.inputs as isize, 1,
                &mut grad[shape.weight_range()],
            );
            let db = &mut grad[shape.bias_range()];
            db.iter_mut().for_each(|v| *v = 0.0);
            for row in delta.as_slice().chunks_exact(shape.outputs) {
                for (acc, d) in db.iter_mut().zip(row) {
                    *acc += d;
                }
            }
            if l == 0 && !want_input {
                return None;
            }
            let mut prev = Matrix::zeros(n, shape.inputs);
            gemm(
                n, shape.outputs, shape.inputs,
                delta.as_slice(), shape.outputs as isize, 1,
                &params[shape.weight_range()], shape.inputs as isize, 1,
                prev.as_mut_slice(),
            );
            delta = prev;
        }
        Some(delta)
    }

    /// Forward-mode tangent of the outputs along parameter direction `v`.
    pub fn tangent(&self, params: &[f64], tape: &Tape, v: &[f64]) -> Matrix {
        assert_eq!(v.len(), self.num_params, "tangent direction length");
        let n = tape.acts[0].rows();
        let mut t = Matrix::zeros(n, self.input_dim());
        for (l, shape) in self.layers.iter().enumerate() {
            let mut dz = Matrix::zeros(n, shape.outputs);
            let mut from_input = Matrix::zeros(n, shape.outputs);
            gemm(
                n, shape.inputs, shape.outputs,
                t.as_slice(), shape.inputs as isize, 1,
                &params[shape.weight_range()], 1, shape.inputs as isize,
                dz.as_mut_slice(),
            );
            gemm(
                n, shape.inputs, shape.outputs,
                tape.acts[l].as_slice(), shape.inputs as isize, 1,
                &v[shape.weight_range()], 1, shape.inputs as isize,
                from_input.as_mut_slice(),
            );
            let db = &v[shape.bias_range()];
            let act = self.activated(l).then_some(self.activation);
            let post = tape.acts[l + 1].as_slice();
            for (i, (z, extra)) in dz.as_mut_slice().iter_mut().zip(from_input.as_slice()).enumerate() {
                *z += extra + db[i % shape.outputs];
                if let Some(a) = act {
                    *z *= a.derivative_at(post[i]);
                }
            }
            t = dz;
        }
        t
    }
}

pub fn mlp_forward(spec: &MlpSpec, params: &[f64], x: &Matrix) -> Result<Matrix> {
    Network::new(spec).forward(params, x)
}

/// Unnormalized log posterior −Σ wᵢ‖yᵢ − h(xᵢ)‖²/(2σ²) − ‖θ‖²/(2σ_p²) and its gradient.
pub fn log_joint_and_grad(
    spec: &MlpSpec,
    params: &[f64],
    x: &Matrix,
    y: &Matrix,
    weights: Option<&[f64]>,
) -> Result<(f64, ParamVector)> {
    let net = Network::new(spec);
    if y.shape() != (x.rows(), spec.output_dim) {
        return Err(Error::DimensionMismatch(format!(
            "targets are {:?}, expected {}x{}",
            y.shape(),
            x.rows(),
            spec.output_dim
        )));
    }
    if let Some(w) = weights {
        if w.len() != x.rows() {
            return Err(Error::DimensionMismatch(format!("{} weights for {} points", w.len(), x.rows())));
        }
    }
    let tape = net.forward_tape(params, x)?;
    let m = spec.output_dim;
    let inv_lik = 1.0 / spec.likelihood_variance;
    let mut d_out = Matrix::zeros(x.rows(), m);
    let mut lik = 0.0;
    for (i, ((h, t), d)) in tape
        .output()
        .as_slice()
        .chunks_exact(m)
        .zip(y.as_slice().chunks_exact(m))
        .zip(d_out.as_mut_slice().chunks_exact_mut(m))
        .enumerate()
    {
        let w = weights.map_or(1.0, |w| w[i]);
        let mut sq = 0.0;
        for k in 0..m {
            let r = t[k] - h[k];
            sq += r * r;
            d[k] = w * r * inv_lik;
        }
        lik -= 0.5 * w * sq * inv_lik;
    }
    let inv_prior = 1.0 / spec.prior_variance;
    let value = lik - 0.5 * inv_prior * crate::numkit::dot(params, params);
    if !value.is_finite() {
        return Err(Error::NonFiniteLoss);
    }
    let mut grad = vec![0.0; params.len()];
    net.backward(params, &tape, &d_out, &mut grad, false);
    for (g, p) in grad.iter_mut().zip(params) {
        *g -= inv_prior * p;
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteLoss);
    }
    Ok((value, ParamVector(grad)))
}

/// Parameter Jacobian of one network output at one input.
pub struct OutputJacobian {
    net: Network,
    params: Vec<f64>,
    tape: Tape,
    output: usize,
}

impl OutputJacobian {
    pub fn new(spec: &MlpSpec, params: &[f64], x: &[f64], output: usize) -> Result<Self> {
        if output >= spec.output_dim {
            return Err(Error::DimensionMismatch(format!(
                "output index {output} out of range for {} outputs",
                spec.output_dim
            )));
        }
        let net = Network::new(spec);
        let tape = net.forward_tape(params, &Matrix::from_vec(1, x.len(), x.to_vec()))?;
        Ok(OutputJacobian { net, params: params.to_vec(), tape, output })
    }

    /// Switches to another output of the same network and input.
    pub fn set_output(&mut self, output: usize) {
        assert!(output < self.net.output_dim(), "output index out of range");
        self.output = output;
    }

    pub fn value(&self) -> f64 {
        self.tape.output()[(0, self.output)]
    }

    /// J·v by one forward tangent pass.
    pub fn jvp(&self, v: &[f64]) -> f64 {
        self.net.tangent(&self.params, &self.tape, v)[(0, self.output)]
    }

    /// Jᵀ·u by one reverse pass.
    pub fn vjp(&self, u: f64) -> ParamVector {
        let mut d_out = Matrix::zeros(1, self.net.output_dim());
        d_out[(0, self.output)] = u;
        let mut grad = vec![0.0; self.net.num_params()];
        self.net.backward(&self.params, &self.tape, &d_out, &mut grad, false);
        ParamVector(grad)
    }

    pub fn gradient(&self) -> ParamVector {
        self.vjp(1.0)
    }
}
