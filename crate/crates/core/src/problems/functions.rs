//! Benchmark formulas in their usual (mostly minimization) form.

use std::f64::consts::PI;

/// Branin on [−5, 10] × [0, 15]; minimum 0.397887 at (−π, 12.275), (π, 2.275), (9.42478, 2.475).
pub fn branin(x1: f64, x2: f64) -> f64 {
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

/// Currin exponential on [0, 1]².
pub fn currin(x1: f64, x2: f64) -> f64 {
    let factor = if x2 > 0.0 { 1.0 - (-1.0 / (2.0 * x2)).exp() } else { 1.0 };
    let num = 2300.0 * x1.powi(3) + 1900.0 * x1 * x1 + 2092.0 * x1 + 60.0;
    let den = 100.0 * x1.powi(3) + 500.0 * x1 * x1 + 4.0 * x1 + 20.0;
    factor * num / den
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

/// Six-dimensional Hartmann on [0, 1]⁶; minimum −3.32237.
pub fn hartmann6(x: &[f64]) -> f64 {
    -(0..4)
        .map(|i| {
            let inner: f64 = (0..6).map(|j| HARTMANN_A[i][j] * (x[j] - HARTMANN_P[i][j]).powi(2)).sum();
            HARTMANN_ALPHA[i] * (-inner).exp()
        })
        .sum::<f64>()
}

/// Ackley with a = 20, b = 0.2, c = 2π; minimum 0 at the origin.
pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = (x.iter().map(|v| v * v).sum::<f64>() / d).sqrt();
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    let value = -20.0 * (-0.2 * sq).exp_m1() + (std::f64::consts::E - cs.exp());
    value.max(0.0)
}

/// DTLZ1 with `m` objectives on [0, 1]^d; the Pareto front is Σ fᵢ = 0.5.
pub fn dtlz1(x: &[f64], m: usize) -> Vec<f64> {
    let k = x.len() - m + 1;
    let tail = &x[m - 1..];
    let g = 100.0 * (k as f64 + tail.iter().map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos()).sum::<f64>());
    (0..m)
        .map(|i| {
            let mut f = 0.5 * (1.0 + g);
            f *= x[..m - 1 - i].iter().product::<f64>();
            if i > 0 {
                f *= 1.0 - x[m - 1 - i];
            }
            f
        })
        .collect()
}

/// DTLZ5 with `m` objectives on [0, 1]^d; its front is a degenerate curve.
pub fn dtlz5(x: &[f64], m: usize) -> Vec<f64> {
    let tail = &x[m - 1..];
    let g: f64 = tail.iter().map(|v| (v - 0.5).powi(2)).sum();
    let theta: Vec<f64> = (0..m - 1)
        .map(|i| if i == 0 { x[0] * PI / 2.0 } else { PI / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x[i]) })
        .collect();
    (0..m)
        .map(|i| {
            let mut f = 1.0 + g;
            f *= theta[..m - 1 - i].iter().map(|t| t.cos()).product::<f64>();
            if i > 0 {
                f *= theta[m - 1 - i].sin();
            }
            f
        })
        .collect()
}

/// Σ over blocks of four of Π (x_j − c_j).
pub fn polynomial(x: &[f64], c: &[f64]) -> f64 {
    x.chunks(4).zip(c.chunks(4)).map(|(xb, cb)| xb.iter().zip(cb).map(|(a, b)| a - b).product::<f64>()).sum()
}

/// Amplitude 0.8 inside |x| ≤ 2, 0.15 outside, on a slight downward trend.
pub fn nonstationary_1d(x: f64) -> f64 {
    let amplitude = if x.abs() <= 2.0 { 0.8 } else { 0.15 };
    amplitude * (3.0 * x).sin() - 0.05 * x
}
