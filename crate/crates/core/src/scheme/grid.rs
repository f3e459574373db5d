use std::sync::Arc;

use crate::error::{Error, Result};

/// Offsets closer than this (in units of the spacing) to a node snap onto it.
pub(crate) const SNAP: f64 = 1e-9;

/// Largest supported grid dimension.
pub const MAX_GRID_DIM: usize = 3;

/// Uniform tensor grid on a box in `ℝ^d`, `d ≤ 3`.
///
/// Nodes are stored with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
    h: Vec<f64>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        let d = lo.len();
        let mut problems = Vec::new();
        if d == 0 || d > MAX_GRID_DIM {
            problems.push(format!("grid dimension must be in 1..={MAX_GRID_DIM}, got {d}"));
        }
        if hi.len() != d || n.len() != d {
            problems.push("lo, hi and n must have the same length".to_string());
        }
        for a in 0..d.min(hi.len()).min(n.len()) {
            if !(lo[a] < hi[a]) || !lo[a].is_finite() || !hi[a].is_finite() {
                problems.push(format!("axis {a}: need finite lo < hi, got [{}, {}]", lo[a], hi[a]));
            }
            if n[a] < 2 {
                problems.push(format!("axis {a}: need at least 2 nodes, got {}", n[a]));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let h = (0..d).map(|a| (hi[a] - lo[a]) / (n[a] - 1) as f64).collect();
        let mut strides = vec![1; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * n[a + 1];
        }
        Ok(Self { lo, hi, n, h, strides })
    }

    /// One-dimensional grid with `n` nodes on `[lo, hi]`.
    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(vec![lo], vec![hi], vec![n])
    }

    /// Grid with spacing exactly `h` on every axis, a node at `center`, and at
    /// least `half_width` of room on each side.
    pub fn centered(center: &[f64], half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(half_width > 0.0) {
            return Err(Error::arg("centered grid needs positive spacing and half-width"));
        }
        let m = (half_width / h).ceil().max(1.0) as usize;
        let lo = center.iter().map(|c| c - m as f64 * h).collect();
        let hi = center.iter().map(|c| c + m as f64 * h).collect();
        Self::new(lo, hi, vec![2 * m + 1; center.len()])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    /// Largest spacing over the axes.
    pub fn max_spacing(&self) -> f64 {
        self.h.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_GRID_DIM] {
        let mut out = [0; MAX_GRID_DIM];
        let mut rest = flat;
        for (o, &stride) in out.iter_mut().zip(&self.strides) {
            *o = rest / stride;
            rest %= stride;
        }
        out
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.n[axis] {
            self.hi[axis]
        } else {
            self.lo[axis] + i as f64 * self.h[axis]
        }
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mi = self.multi_index(flat);
        (0..self.dim()).map(|a| self.coordinate(a, mi[a])).collect()
    }

    /// Distance from node `flat` to the nearest face of the box.
    pub fn distance_to_boundary(&self, flat: usize) -> f64 {
        let mi = self.multi_index(flat);
        (0..self.dim())
            .map(|a| {
                let x = self.coordinate(a, mi[a]);
                (x - self.lo[a]).min(self.hi[a] - x)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Multilinear interpolation of nodal `values` at `x`; outside the box
    /// the value at the nearest boundary point is used (clamp-constant).
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let d = self.dim();
        let mut base = [0usize; MAX_GRID_DIM];
        let mut theta = [0.0; MAX_GRID_DIM];
        for a in 0..d {
            let s = (x[a] - self.lo[a]) / self.h[a];
            let last = self.n[a] - 1;
            if !(s > 0.0) {
                base[a] = 0;
            } else if s >= last as f64 {
                base[a] = last;
            } else {
                let (k, t) = split_offset(s);
                base[a] = (k as usize).min(last);
                theta[a] = if base[a] == last { 0.0 } else { t };
            }
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = 0;
            for a in 0..d {
                let up = (corner >> a) & 1 == 1;
                let wa = if up { theta[a] } else { 1.0 - theta[a] };
                if wa == 0.0 {
                    w = 0.0;
                    break;
                }
                w *= wa;
                idx += (base[a] + usize::from(up)) * self.strides[a];
            }
            if w != 0.0 {
                acc += w * values[idx];
            }
        }
        acc
    }
}

/// Splits a real offset (in grid units) into `floor` and fractional part,
/// snapping fractions within [`SNAP`] of a node.
pub(crate) fn split_offset(s: f64) -> (isize, f64) {
    let k = s.floor();
    let t = s - k;
    if t < SNAP {
        (k as isize, 0.0)
    } else if t > 1.0 - SNAP {
        (k as isize + 1, 0.0)
    } else {
        (k as isize, t)
    }
}

/// Values of a function on every node of a grid at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
    time: f64,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::arg(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!(
                "non-finite value at node {i} ({:?})",
                grid.node(i)
            )));
        }
        Ok(Self { grid, values, time })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F>(grid: Arc<Grid>, time: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self::new(grid, values, time)
    }

    pub fn constant(grid: Arc<Grid>, time: f64, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n], time)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn interpolate(&self, x: &[f64]) -> f64 {
        self.grid.interpolate(&self.values, x)
    }

    /// Pointwise map keeping the grid and time stamp.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            Arc::clone(&self.grid),
            self.values.iter().map(|&v| f(v)).collect(),
            self.time,
        )
    }

    /// Nodewise combination with another function on the same grid.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::arg("grid functions live on different grids"));
        }
        Self::new(
            Arc::clone(&self.grid),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            self.time,
        )
    }

    pub(crate) fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::line(1.0, 0.0, 10).is_err());
        assert!(Grid::line(0.0, 1.0, 1).is_err());
        assert!(Grid::new(vec![0.0; 4], vec![1.0; 4], vec![3; 4]).is_err());
    }

    #[test]
    fn centered_grid_has_node_at_center() {
        let g = Grid::centered(&[0.3], 1.0, 0.01).unwrap();
        let mid = g.len() / 2;
        assert!((g.node(mid)[0] - 0.3).abs() < 1e-12);
        assert!((g.spacing()[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn linear_functions_interpolate_exactly() {
        let g = Arc::new(Grid::new(vec![-1.0, 0.0], vec![1.0, 2.0], vec![21, 11]).unwrap());
        let f = GridFunction::from_fn(Arc::clone(&g), 0.0, |x| 2.0 * x[0] - x[1] + 0.5).unwrap();
        for x in [[0.033, 1.41], [-0.97, 0.02], [0.5, 1.999]] {
            let want = 2.0 * x[0] - x[1] + 0.5;
            assert!((f.interpolate(&x) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn clamps_outside_the_box() {
        let g = Arc::new(Grid::line(0.0, 1.0, 11).unwrap());
        let f = GridFunction::from_fn(Arc::clone(&g), 0.0, |x| x[0] * x[0]).unwrap();
        assert_eq!(f.interpolate(&[-5.0]), 0.0);
        assert_eq!(f.interpolate(&[7.0]), 1.0);
    }

    #[test]
    fn interpolation_does_not_overshoot() {
        let g = Arc::new(Grid::line(-1.0, 1.0, 9).unwrap());
        let f = GridFunction::from_fn(Arc::clone(&g), 0.0, |x| if x[0] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        for k in 0..200 {
            let x = -1.2 + 2.4 * k as f64 / 199.0;
            let v = f.interpolate(&[x]);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = Arc::new(Grid::line(0.0, 1.0, 3).unwrap());
        assert!(GridFunction::new(g, vec![0.0, f64::NAN, 1.0], 0.0).is_err());
    }
}
