use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use super::grid::{split_offset, Grid, GridFunction, MAX_GRID_DIM};
use crate::error::{Error, Result};
use crate::uncertainty::UncertaintySet;

/// Rule for evaluating a grid function outside its box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extrapolation {
    /// Value at the nearest boundary point.
    #[default]
    ClampConstant,
}

/// Time step, horizon and spatial grid for the grid backend.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    delta: f64,
    horizon: f64,
    grid: Arc<Grid>,
    extrapolation: Extrapolation,
}

impl SchemeConfig {
    /// `delta` must lie in `(0, 1]` and `horizon ≥ delta`.
    pub fn new(delta: f64, horizon: f64, grid: Grid) -> Result<Self> {
        let mut problems = Vec::new();
        if !(delta > 0.0 && delta <= 1.0) {
            problems.push(format!("time step must lie in (0, 1], got {delta}"));
        }
        if !(horizon >= delta) || !horizon.is_finite() {
            problems.push(format!("horizon {horizon} must be finite and at least the time step {delta}"));
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Ok(Self {
            delta,
            horizon,
            grid: Arc::new(grid),
            extrapolation: Extrapolation::ClampConstant,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    /// Number of completed steps `⌊T/Δ⌋`.
    pub fn n_steps(&self) -> usize {
        steps_in(self.horizon, self.delta)
    }
}

pub(crate) fn steps_in(horizon: f64, delta: f64) -> usize {
    (horizon / delta + 1e-9).floor() as usize
}

#[derive(Debug, Clone, Copy)]
struct Shift {
    k: [isize; MAX_GRID_DIM],
    theta: [f64; MAX_GRID_DIM],
}

/// Per-measure grid shifts `√Δ x + Δ y` expressed in grid units.
#[derive(Debug, Clone)]
pub(crate) struct ShiftTable {
    measures: Vec<Vec<(Shift, f64)>>,
}

impl ShiftTable {
    pub(crate) fn new(u: &UncertaintySet, grid: &Grid, delta: f64) -> Result<Self> {
        if u.dim() != grid.dim() {
            return Err(Error::Configuration(format!(
                "family has dimension {} but the grid has dimension {}",
                u.dim(),
                grid.dim()
            )));
        }
        let sq = delta.sqrt();
        let mut measures = Vec::with_capacity(u.measures().len());
        for (mi, m) in u.measures().iter().enumerate() {
            let mut shifts = Vec::with_capacity(m.atoms().len());
            for (ai, a) in m.atoms().iter().enumerate() {
                let mut s = Shift {
                    k: [0; MAX_GRID_DIM],
                    theta: [0.0; MAX_GRID_DIM],
                };
                for ax in 0..grid.dim() {
                    let d = sq * a.x[ax] + delta * a.y[ax];
                    if !d.is_finite() {
                        return Err(Error::Evaluation(format!(
                            "non-finite shift at measure {mi} atom {ai}"
                        )));
                    }
                    let (k, t) = split_offset(d / grid.spacing()[ax]);
                    s.k[ax] = k;
                    s.theta[ax] = t;
                }
                if a.p > 0.0 {
                    shifts.push((s, a.p));
                }
            }
            measures.push(shifts);
        }
        Ok(Self { measures })
    }

    /// `S(Δ)ψ` at the node with multi-index `mi`.
    fn apply_at(&self, grid: &Grid, values: &[f64], mi: &[usize; MAX_GRID_DIM]) -> f64 {
        let d = grid.dim();
        let shape = grid.shape();
        let strides = grid.strides();
        let mut best = f64::NEG_INFINITY;
        for shifts in &self.measures {
            let mut acc = 0.0;
            for (s, p) in shifts {
                let mut v = 0.0;
                for corner in 0..(1usize << d) {
                    let mut w = 1.0;
                    let mut idx = 0;
                    for a in 0..d {
                        let up = (corner >> a) & 1 == 1;
                        let wa = if up { s.theta[a] } else { 1.0 - s.theta[a] };
                        if wa == 0.0 {
                            w = 0.0;
                            break;
                        }
                        w *= wa;
                        let j = mi[a] as isize + s.k[a] + isize::from(up);
                        let j = j.clamp(0, shape[a] as isize - 1) as usize;
                        idx += j * strides[a];
                    }
                    if w != 0.0 {
                        v += w * values[idx];
                    }
                }
                acc += p * v;
            }
            if acc > best {
                best = acc;
            }
        }
        best
    }

    fn apply_1d(&self, values: &[f64], i: usize) -> f64 {
        let last = values.len() as isize - 1;
        let mut best = f64::NEG_INFINITY;
        for shifts in &self.measures {
            let mut acc = 0.0;
            for (s, p) in shifts {
                let j = i as isize + s.k[0];
                let t = s.theta[0];
                let v0 = values[j.clamp(0, last) as usize];
                let v = if t == 0.0 {
                    v0
                } else {
                    (1.0 - t) * v0 + t * values[(j + 1).clamp(0, last) as usize]
                };
                acc += p * v;
            }
            if acc > best {
                best = acc;
            }
        }
        best
    }

    pub(crate) fn apply_node(&self, grid: &Grid, values: &[f64], flat: usize) -> f64 {
        if grid.dim() == 1 {
            self.apply_1d(values, flat)
        } else {
            self.apply_at(grid, values, &grid.multi_index(flat))
        }
    }

    pub(crate) fn apply(&self, grid: &Grid, values: &[f64]) -> Vec<f64> {
        (0..values.len())
            .into_par_iter()
            .with_min_len(512)
            .map(|i| self.apply_node(grid, values, i))
            .collect()
    }
}

fn check_grid(cfg: &SchemeConfig, psi: &GridFunction) -> Result<()> {
    if psi.grid().as_ref() != cfg.grid().as_ref() {
        return Err(Error::arg("grid function does not live on the configured grid"));
    }
    Ok(())
}

/// `S(Δ)ψ(x) = Ê[ψ(x + √Δ X + Δ Y)]` at every node, with multilinear
/// interpolation and clamp-constant extrapolation.
pub fn forward_operator(u: &UncertaintySet, cfg: &SchemeConfig, psi: &GridFunction) -> Result<GridFunction> {
    check_grid(cfg, psi)?;
    let table = ShiftTable::new(u, cfg.grid(), cfg.delta())?;
    let out = table.apply(cfg.grid(), psi.values());
    GridFunction::new(Arc::clone(cfg.grid()), out, psi.time() + cfg.delta())
}

/// `S(Δ, x, p, v) = (p − S(Δ)v(x)) / Δ` at node index `node`.
pub fn scheme_residual(
    u: &UncertaintySet,
    cfg: &SchemeConfig,
    node: usize,
    p: f64,
    v: &GridFunction,
) -> Result<f64> {
    check_grid(cfg, v)?;
    if node >= cfg.grid().len() {
        return Err(Error::arg(format!("node {node} is outside the grid")));
    }
    let table = ShiftTable::new(u, cfg.grid(), cfg.delta())?;
    let s = table.apply_node(cfg.grid(), v.values(), node);
    Ok((p - s) / cfg.delta())
}

/// Residual `S(Δ, x, current(x), previous)` at every node.
pub fn residuals(
    u: &UncertaintySet,
    cfg: &SchemeConfig,
    current: &GridFunction,
    previous: &GridFunction,
) -> Result<Vec<f64>> {
    check_grid(cfg, current)?;
    check_grid(cfg, previous)?;
    let table = ShiftTable::new(u, cfg.grid(), cfg.delta())?;
    let s = table.apply(cfg.grid(), previous.values());
    Ok(current
        .values()
        .iter()
        .zip(s)
        .map(|(p, sv)| (p - sv) / cfg.delta())
        .collect())
}

/// Scheme solution on a grid: one snapshot per completed time step.
#[derive(Debug, Clone)]
pub struct GridSolution {
    delta: f64,
    horizon: f64,
    steps: Vec<GridFunction>,
}

impl GridSolution {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Snapshots at `t = 0, Δ, 2Δ, …`.
    pub fn steps(&self) -> &[GridFunction] {
        &self.steps
    }

    pub fn final_step(&self) -> &GridFunction {
        self.steps.last().expect("solution always holds the initial step")
    }

    /// Piecewise constant in time: `u^Δ(t) = u^Δ(nΔ)` for `t ∈ [nΔ, (n+1)Δ)`,
    /// frozen at the last completed step beyond it.
    pub fn at(&self, t: f64) -> &GridFunction {
        let n = if t <= 0.0 { 0 } else { steps_in(t, self.delta) };
        &self.steps[n.min(self.steps.len() - 1)]
    }

    pub fn value_at(&self, t: f64, x: &[f64]) -> f64 {
        self.at(t).interpolate(x)
    }

    /// Writes every snapshot as CSV rows `t,x_1..x_d,value`.
    pub fn write_steps_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_steps(&mut w).map_err(|e| Error::io(path, e))
    }

    pub fn write_steps<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        let grid = self.steps[0].grid();
        let d = grid.dim();
        let mut header = String::from("t");
        for a in 1..=d {
            header.push_str(&format!(",x_{a}"));
        }
        writeln!(w, "{header},value")?;
        for s in &self.steps {
            for (i, v) in s.values().iter().enumerate() {
                write!(w, "{}", s.time())?;
                for x in grid.node(i) {
                    write!(w, ",{x}")?;
                }
                writeln!(w, ",{v}")?;
            }
        }
        w.flush()
    }
}

/// Runs the recursion `u^Δ(nΔ) = S(Δ) u^Δ((n−1)Δ)` from `u^Δ(0) = φ` on the grid.
///
/// Requires `X` to have no mean uncertainty.
pub fn solve_grid<F>(u: &UncertaintySet, cfg: &SchemeConfig, phi: F) -> Result<GridSolution>
where
    F: Fn(&[f64]) -> f64,
{
    if !u.no_mean_uncertainty() {
        return Err(Error::Configuration(
            "X has mean uncertainty: every measure must satisfy E[X] = 0".into(),
        ));
    }
    let table = ShiftTable::new(u, cfg.grid(), cfg.delta())?;
    let grid = Arc::clone(cfg.grid());
    let init = GridFunction::from_fn(Arc::clone(&grid), 0.0, &phi)?;
    solve_from(&table, cfg, init)
}

pub(crate) fn solve_from(table: &ShiftTable, cfg: &SchemeConfig, init: GridFunction) -> Result<GridSolution> {
    let n = cfg.n_steps();
    let mut steps = Vec::with_capacity(n + 1);
    steps.push(init);
    for k in 1..=n {
        let prev = &steps[k - 1];
        let next = table.apply(cfg.grid(), prev.values());
        steps.push(GridFunction::new(Arc::clone(cfg.grid()), next, k as f64 * cfg.delta())?);
    }
    Ok(GridSolution {
        delta: cfg.delta(),
        horizon: cfg.horizon(),
        steps,
    })
}

/// Builds a solution from caller-supplied snapshots (used to check candidate
/// sub/super solutions).
pub fn solution_from_steps(delta: f64, steps: Vec<GridFunction>) -> Result<GridSolution> {
    if steps.is_empty() {
        return Err(Error::arg("a solution needs at least the initial step"));
    }
    let horizon = delta * (steps.len() - 1) as f64;
    let steps = steps
        .into_iter()
        .enumerate()
        .map(|(k, s)| s.with_time(k as f64 * delta))
        .collect();
    Ok(GridSolution { delta, horizon, steps })
}
