use crate::numkit::Matrix;

/// S×q×m tensor of joint latent-function draws, indexed `[sample][point][output]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorDraws {
    samples: usize,
    points: usize,
    outputs: usize,
    data: Vec<f64>,
}

impl PosteriorDraws {
    pub fn zeros(samples: usize, points: usize, outputs: usize) -> Self {
        PosteriorDraws { samples, points, outputs, data: vec![0.0; samples * points * outputs] }
    }

    pub fn from_vec(samples: usize, points: usize, outputs: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), samples * points * outputs, "draw tensor length");
        PosteriorDraws { samples, points, outputs, data }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn get(&self, s: usize, j: usize, k: usize) -> f64 {
        self.data[(s * self.points + j) * self.outputs + k]
    }

    #[inline]
    pub fn set(&mut self, s: usize, j: usize, k: usize, v: f64) {
        self.data[(s * self.points + j) * self.outputs + k] = v;
    }

    /// The q×m block of one joint draw.
    pub fn sample(&self, s: usize) -> &[f64] {
        let len = self.points * self.outputs;
        &self.data[s * len..(s + 1) * len]
    }

    /// S×q matrix of draws for one output.
    pub fn objective(&self, k: usize) -> Matrix {
        Matrix::from_fn(self.samples, self.points, |s, j| self.get(s, j, k))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Mean over samples for every (point, output).
    pub fn mean(&self) -> Matrix {
        let mut m = Matrix::zeros(self.points, self.outputs);
        for s in 0..self.samples {
            for (acc, v) in m.as_mut_slice().iter_mut().zip(self.sample(s)) {
                *acc += v;
            }
        }
        m.scale(1.0 / self.samples.max(1) as f64);
        m
    }
}
