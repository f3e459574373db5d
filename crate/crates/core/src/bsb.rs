//! European pricing under volatility uncertainty.
//!
//! In `x = ln s` and reversed time, `v(t, x) = u(T − t, eˣ) e^{rt}` solves a
//! G-equation whose family has `X = ±σ` (probability ½) and `Y = r − ½X²` for
//! `σ ∈ [σ̲, σ̄]`. The continuum of volatilities is replaced by a uniform grid
//! including both endpoints. With `σ̲ = σ̄` the scheme is a binomial tree and
//! is evaluated exactly on the lattice.

use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::{ExperimentResult, ExperimentRow};
use crate::error::{Error, Result};
use crate::oracles::{fine_grid_reference, FineGridOptions, ReferenceSolution};
use crate::scheme::{
    solve_from, solve_lattice, steps_in, Grid, GridFunction, GridSolution, SchemeConfig, ShiftTable,
};
use crate::uncertainty::{builtin, UncertaintySet};

/// Default number of volatilities in the grid over `[σ̲, σ̄]`.
pub const DEFAULT_N_SIGMA: usize = 33;

/// Payoff `Φ(s)` of a European claim. Only payoffs that are bounded below and
/// Lipschitz in `ln s` are representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payoff {
    /// `(K − s)⁺`
    Put { strike: f64 },
    /// `min((s − K)⁺, cap)`
    CappedCall { strike: f64, cap: f64 },
}

impl Payoff {
    /// Builds a call; an uncapped call is rejected because its payoff grows
    /// like `eˣ` and is not Hölder continuous in `x`.
    pub fn call(strike: f64, cap: Option<f64>) -> Result<Self> {
        match cap {
            Some(cap) if cap > 0.0 && cap.is_finite() => Ok(Payoff::CappedCall { strike, cap }),
            Some(cap) => Err(Error::arg(format!("call cap must be positive and finite, got {cap}"))),
            None => Err(Error::Unsupported(
                "uncapped calls are not allowed: initial data must be bounded from below and Hölder continuous in log-price; pass a cap".into(),
            )),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Payoff::Put { strike } => (strike - s).max(0.0),
            Payoff::CappedCall { strike, cap } => (s - strike).max(0.0).min(cap),
        }
    }

    /// Lipschitz constant of `x ↦ Φ(eˣ)`.
    pub fn c_phi(&self) -> f64 {
        match *self {
            Payoff::Put { strike } => strike,
            Payoff::CappedCall { strike, cap } => strike + cap,
        }
    }

    fn strike(&self) -> f64 {
        match *self {
            Payoff::Put { strike } | Payoff::CappedCall { strike, .. } => strike,
        }
    }
}

/// Payoff kind as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayoffKind {
    Put,
    CappedCall,
}

impl FromStr for PayoffKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "put" => Ok(PayoffKind::Put),
            "capped-call" => Ok(PayoffKind::CappedCall),
            "call" => Err(Error::Unsupported(
                "uncapped calls are not allowed: use capped-call with --cap".into(),
            )),
            other => Err(Error::arg(format!("unknown payoff `{other}` (put, capped-call)"))),
        }
    }
}

/// A pricing problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BsbSpec {
    pub r: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub maturity: f64,
    pub payoff: Payoff,
    pub n_sigma: usize,
    pub delta: f64,
}

impl BsbSpec {
    pub fn new(
        r: f64,
        sigma_lo: f64,
        sigma_hi: f64,
        maturity: f64,
        payoff: Payoff,
        n_sigma: usize,
        delta: f64,
    ) -> Result<Self> {
        let mut problems = Vec::new();
        if !(sigma_lo > 0.0 && sigma_lo <= sigma_hi && sigma_hi.is_finite()) {
            problems.push(format!("need 0 < sigma_lo <= sigma_hi, got [{sigma_lo}, {sigma_hi}]"));
        }
        if n_sigma == 0 {
            problems.push("n_sigma must be at least 1".into());
        }
        if n_sigma == 1 && sigma_lo != sigma_hi {
            problems.push("n_sigma = 1 requires sigma_lo = sigma_hi".into());
        }
        if !(maturity > 0.0) || !maturity.is_finite() {
            problems.push(format!("maturity must be positive, got {maturity}"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            problems.push(format!("time step must lie in (0, 1), got {delta}"));
        }
        if !r.is_finite() {
            problems.push(format!("rate must be finite, got {r}"));
        }
        if !(payoff.strike() >= 0.0) {
            problems.push(format!("strike must be nonnegative, got {}", payoff.strike()));
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Ok(Self {
            r,
            sigma_lo,
            sigma_hi,
            maturity,
            payoff,
            n_sigma,
            delta,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma_lo == self.sigma_hi
    }

    pub fn sigmas(&self) -> Vec<f64> {
        if self.is_degenerate() {
            vec![self.sigma_lo]
        } else {
            builtin::sigma_grid(self.sigma_lo, self.sigma_hi, self.n_sigma)
        }
    }

    /// The family `{X = ±σ, Y = r − ½σ²}` over the volatility grid.
    pub fn family(&self) -> Result<UncertaintySet> {
        builtin::bsb(self.r, &self.sigmas())
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.r, self.sigma_lo, self.sigma_hi, self.maturity, self.payoff, self.n_sigma, delta)
    }

    /// Number of completed steps `⌊T/Δ⌋`.
    pub fn n_steps(&self) -> usize {
        steps_in(self.maturity, self.delta)
    }
}

/// Log-space initial-value problem for one spot price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogProblem {
    pub x0: f64,
    pub payoff: Payoff,
    pub r: f64,
    pub maturity: f64,
}

impl LogProblem {
    /// `φ(x) = Φ(eˣ)`.
    pub fn phi(&self, x: f64) -> f64 {
        self.payoff.eval(x.exp())
    }

    /// `u(T − t, eˣ) = v(t, x) e^{−rt}`; at `t = T` this is today's price.
    pub fn price_from(&self, v: f64, t: f64) -> f64 {
        v * (-self.r * t).exp()
    }
}

pub fn bsb_transform(spec: &BsbSpec, s0: f64) -> Result<LogProblem> {
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::arg(format!("spot price must be positive, got {s0}")));
    }
    Ok(LogProblem {
        x0: s0.ln(),
        payoff: spec.payoff,
        r: spec.r,
        maturity: spec.maturity,
    })
}

/// Grid spacing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Fixed(f64),
    /// `h = κΔ`; keeps the accumulated interpolation error `O(Δ)` in rate
    /// studies.
    PerStep(f64),
}

impl Spacing {
    pub fn at(&self, delta: f64) -> f64 {
        match *self {
            Spacing::Fixed(h) => h,
            Spacing::PerStep(k) => k * delta,
        }
    }
}

/// Spatial discretisation of the grid path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsbGridOptions {
    pub spacing: Spacing,
    /// Defaults to `T·max|r − ½σ²| + 6√T·σ̄` plus a small margin.
    pub half_width: Option<f64>,
}

impl Default for BsbGridOptions {
    fn default() -> Self {
        Self {
            spacing: Spacing::Fixed(2.5e-3),
            half_width: None,
        }
    }
}

fn half_width(spec: &BsbSpec, opts: &BsbGridOptions) -> f64 {
    opts.half_width.unwrap_or_else(|| {
        let drift = spec
            .sigmas()
            .iter()
            .map(|s| (spec.r - 0.5 * s * s).abs())
            .fold(0.0, f64::max);
        spec.maturity * drift + 6.0 * spec.maturity.sqrt() * spec.sigma_hi + 1e-3
    })
}

/// One step `v(t) = max_σ ½[v(t−Δ, x + μ_σΔ + σ√Δ) + v(t−Δ, x + μ_σΔ − σ√Δ)]`,
/// with `μ_σ = r − ½σ²`, evaluated by coordinate lookup on `v_prev`.
pub fn bsb_step(spec: &BsbSpec, v_prev: &GridFunction) -> Result<GridFunction> {
    let grid = v_prev.grid();
    if grid.dim() != 1 {
        return Err(Error::arg("the pricer works on one-dimensional grids"));
    }
    let sigmas = spec.sigmas();
    let sq = spec.delta.sqrt();
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.coordinate(0, i);
            let mut best = f64::NEG_INFINITY;
            for &s in &sigmas {
                let c = x + (spec.r - 0.5 * s * s) * spec.delta;
                let v = 0.5 * v_prev.interpolate(&[c + s * sq]) + 0.5 * v_prev.interpolate(&[c - s * sq]);
                if v > best {
                    best = v;
                }
            }
            best
        })
        .collect();
    GridFunction::new(Arc::clone(grid), out, v_prev.time() + spec.delta)
}

/// Price today together with how it was obtained.
#[derive(Debug, Clone)]
pub struct BsbPrice {
    pub price: f64,
    /// `"lattice"` for a single volatility, `"grid"` otherwise.
    pub method: &'static str,
    pub steps: usize,
    /// Grid snapshots in log space (grid path only).
    pub solution: Option<GridSolution>,
}

/// `u(0, s0)` with default grid options.
pub fn bsb_price(spec: &BsbSpec, s0: f64) -> Result<f64> {
    bsb_price_with(spec, s0, &BsbGridOptions::default()).map(|p| p.price)
}

/// Runs `⌊T/Δ⌋` steps from `φ(x) = Φ(eˣ)`, evaluates at `ln s0` and discounts
/// by `e^{−rT}`. A single volatility is priced exactly on the lattice.
pub fn bsb_price_with(spec: &BsbSpec, s0: f64, opts: &BsbGridOptions) -> Result<BsbPrice> {
    let prob = bsb_transform(spec, s0)?;
    let u = spec.family()?;
    let n = spec.n_steps();
    if spec.is_degenerate() {
        let v = solve_lattice(&u, spec.delta, n, &[prob.x0], |x| prob.phi(x[0]), None)?.value;
        return Ok(BsbPrice {
            price: prob.price_from(v, spec.maturity),
            method: "lattice",
            steps: n,
            solution: None,
        });
    }
    let grid = Grid::centered(&[prob.x0], half_width(spec, opts), opts.spacing.at(spec.delta))?;
    let cfg = SchemeConfig::new(spec.delta, spec.maturity, grid)?;
    let table = ShiftTable::new(&u, cfg.grid(), spec.delta)?;
    let init = GridFunction::from_fn(Arc::clone(cfg.grid()), 0.0, |x| prob.phi(x[0]))?;
    let sol = solve_from(&table, &cfg, init)?;
    let v = sol.final_step().interpolate(&[prob.x0]);
    Ok(BsbPrice {
        price: prob.price_from(v, spec.maturity),
        method: "grid",
        steps: n,
        solution: Some(sol),
    })
}

/// Reference price from [`fine_grid_reference`] on the log-space problem.
pub fn bsb_reference(spec: &BsbSpec, s0: f64, opts: FineGridOptions) -> Result<ReferenceSolution> {
    let prob = bsb_transform(spec, s0)?;
    let u = spec.family()?;
    let mut r = fine_grid_reference(&u, |x| prob.phi(x[0]), spec.maturity, &[prob.x0], opts)?;
    let disc = (-spec.r * spec.maturity).exp();
    r.value *= disc;
    r.accuracy *= disc;
    Ok(r)
}

/// Price errors against `reference` for each time step in `deltas`.
///
/// Passes when errors decrease strictly as `Δ` shrinks and the fitted slope
/// is at least `0.25 − 0.15`.
pub fn bsb_rate_experiment(
    spec: &BsbSpec,
    s0: f64,
    deltas: &[f64],
    reference: &ReferenceSolution,
    opts: &BsbGridOptions,
) -> Result<ExperimentResult> {
    let rows = deltas
        .iter()
        .map(|&d| {
            let p = bsb_price_with(&spec.with_delta(d)?, s0, opts)?.price;
            Ok(ExperimentRow::new(d, (p - reference.value).abs(), None))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut res = ExperimentResult::from_rows(rows);
    res.passed = res.monotone_decrease()
        && res.fitted_slope >= 0.25 - crate::analysis::SLOPE_TOLERANCE;
    res.notes.push(format!(
        "reference {} (accuracy {:e}, {})",
        reference.value, reference.accuracy, reference.resolution
    ));
    Ok(res)
}
