use crate::numkit::Matrix;

/// Nondominated objective vectors (maximization) that strictly dominate the
/// reference point.
#[derive(Clone, Debug, PartialEq)]
pub struct ParetoState {
    pub points: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
}

impl ParetoState {
    pub fn empty(reference: Vec<f64>) -> Self {
        ParetoState { points: Vec::new(), reference }
    }

    pub fn hypervolume(&self) -> f64 {
        hypervolume(&self.points, &self.reference)
    }

    /// Adds `p` unless it is weakly dominated, dropping members it dominates.
    pub fn insert(&mut self, p: &[f64]) -> bool {
        if !beats_reference(p, &self.reference) || self.points.iter().any(|q| weakly_dominates(q, p)) {
            return false;
        }
        self.points.retain(|q| !weakly_dominates(p, q));
        self.points.push(p.to_vec());
        true
    }
}

/// `a ≥ b` in every coordinate.
#[inline]
pub fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// `a ≥ b` everywhere and `a > b` somewhere.
#[inline]
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    weakly_dominates(a, b) && a.iter().zip(b).any(|(x, y)| x > y)
}

#[inline]
fn beats_reference(p: &[f64], r: &[f64]) -> bool {
    p.iter().zip(r).all(|(x, y)| x > y)
}

/// Nondominated rows of `y` that strictly dominate `reference`; duplicates kept once.
pub fn pareto_front(y: &Matrix, reference: &[f64]) -> ParetoState {
    let mut state = ParetoState::empty(reference.to_vec());
    for row in y.row_iter() {
        state.insert(row);
    }
    state
}

fn nondominated(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if out.iter().any(|q| weakly_dominates(q, &p)) {
            continue;
        }
        out.retain(|q| !weakly_dominates(&p, q));
        out.push(p);
    }
    out
}

fn box_volume(p: &[f64], r: &[f64]) -> f64 {
    p.iter().zip(r).map(|(x, y)| x - y).product()
}

/// Volume dominated by `points` above `reference`. Two objectives use a
/// sweep; more use the exclusive-volume recursion.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    if reference.len() == 2 {
        hypervolume_2d(points, reference)
    } else {
        hypervolume_wfg(points, reference)
    }
}

/// Sort by the first objective descending and add one rectangle per step.
pub fn hypervolume_2d(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let mut pts: Vec<&Vec<f64>> = points.iter().filter(|p| beats_reference(p, reference)).collect();
    pts.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let mut level = reference[1];
    let mut total = 0.0;
    for p in pts {
        if p[1] > level {
            total += (p[0] - reference[0]) * (p[1] - level);
            level = p[1];
        }
    }
    total
}

/// Exclusive-volume recursion: HV(S) = Σᵢ [vol(pᵢ) − HV(limit(pᵢ, pᵢ₊₁..))].
pub fn hypervolume_wfg(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let pts = nondominated(points.iter().filter(|p| beats_reference(p, reference)).cloned().collect());
    wfg(pts, reference)
}

fn wfg(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    match pts.len() {
        0 => return 0.0,
        1 => return box_volume(&pts[0], r),
        _ => {}
    }
    let last = r.len() - 1;
    pts.sort_by(|a, b| b[last].total_cmp(&a[last]));
    let mut total = 0.0;
    for i in 0..pts.len() {
        let p = &pts[i];
        let limited: Vec<Vec<f64>> =
            pts[i + 1..].iter().map(|q| q.iter().zip(p).map(|(a, b)| a.min(*b)).collect()).collect();
        total += box_volume(p, r) - wfg(nondominated(limited), r);
    }
    total
}
