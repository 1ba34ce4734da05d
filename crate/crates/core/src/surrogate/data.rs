use crate::numkit::Matrix;
use crate::{Error, Result};

/// Observations in raw units together with the input box.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Matrix,
    pub bounds: Vec<(f64, f64)>,
}

impl Dataset {
    pub fn new(bounds: Vec<(f64, f64)>, outputs: usize) -> Result<Self> {
        check_bounds(&bounds)?;
        Ok(Dataset { x: Matrix::zeros(0, bounds.len()), y: Matrix::zeros(0, outputs), bounds })
    }

    pub fn with_data(x: Matrix, y: Matrix, bounds: Vec<(f64, f64)>) -> Result<Self> {
        check_bounds(&bounds)?;
        if x.rows() != y.rows() || x.cols() != bounds.len() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} inputs, {:?} outputs for {} bounds",
                x.shape(),
                y.shape(),
                bounds.len()
            )));
        }
        Ok(Dataset { x, y, bounds })
    }

    pub fn push(&mut self, x: &[f64], y: &[f64]) {
        self.x.push_row(x);
        self.y.push_row(y);
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn outputs(&self) -> usize {
        self.y.cols()
    }
}

pub(crate) fn check_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    for (dim, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::DegenerateBounds { dim, lo, hi });
        }
    }
    Ok(())
}

/// Inputs mapped to the unit cube, outputs standardized per objective.
#[derive(Clone, Debug, PartialEq)]
pub struct Transform {
    pub bounds: Vec<(f64, f64)>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Transform {
    pub fn fit(data: &Dataset) -> Result<Self> {
        check_bounds(&data.bounds)?;
        if data.is_empty() {
            return Err(Error::DimensionMismatch("cannot standardize an empty dataset".into()));
        }
        let n = data.len() as f64;
        let (mut mean, mut std) = (Vec::new(), Vec::new());
        for k in 0..data.outputs() {
            let col = data.y.column(k);
            let mu = col.iter().sum::<f64>() / n;
            let var = if data.len() > 1 { col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            let sd = var.sqrt();
            mean.push(mu);
            std.push(if sd > 1e-12 * mu.abs().max(1.0) { sd } else { 1.0 });
        }
        Ok(Transform { bounds: data.bounds.clone(), mean, std })
    }

    pub fn inputs(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.rows(), x.cols(), |i, j| {
            let (lo, hi) = self.bounds[j];
            (x[(i, j)] - lo) / (hi - lo)
        })
    }

    pub fn raw_inputs(&self, u: &Matrix) -> Matrix {
        Matrix::from_fn(u.rows(), u.cols(), |i, j| {
            let (lo, hi) = self.bounds[j];
            lo + u[(i, j)] * (hi - lo)
        })
    }

    pub fn outputs(&self, y: &Matrix) -> Matrix {
        Matrix::from_fn(y.rows(), y.cols(), |i, k| (y[(i, k)] - self.mean[k]) / self.std[k])
    }

    #[inline]
    pub fn raw_output(&self, v: f64, k: usize) -> f64 {
        self.mean[k] + self.std[k] * v
    }

    /// Rejects queries outside the box, allowing rounding slack.
    pub fn check_inputs(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.bounds.len() {
            return Err(Error::DimensionMismatch(format!("{}-d query for a {}-d box", x.cols(), self.bounds.len())));
        }
        for row in x.row_iter() {
            for (dim, (&value, &(lo, hi))) in row.iter().zip(&self.bounds).enumerate() {
                let slack = 1e-9 * (hi - lo);
                if !(value >= lo - slack && value <= hi + slack) {
                    return Err(Error::OutOfBounds { dim, value, lo, hi });
                }
            }
        }
        Ok(())
    }
}

/// Unit-cube inputs, standardized outputs and the transform that maps back.
pub fn normalize(data: &Dataset) -> Result<(Matrix, Matrix, Transform)> {
    let t = Transform::fit(data)?;
    Ok((t.inputs(&data.x), t.outputs(&data.y), t))
}
