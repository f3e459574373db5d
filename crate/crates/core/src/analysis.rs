//! Executable checks: sublinear-expectation axioms, the discrete comparison
//! principle, regularity moduli of scheme solutions and convergence-rate fits.

use crate::error::{Error, Result};
use crate::scheme::{residuals, GridSolution, SchemeConfig};
use crate::uncertainty::{sublinear_expect, UncertaintySet};

/// A fitted slope may fall this far below its target and still pass.
pub const SLOPE_TOLERANCE: f64 = 0.15;

/// Errors at or below this are excluded from log-log fits.
pub const FIT_FLOOR: f64 = 1e-14;

/// Slack in the comparison-principle conclusion and its preconditions.
pub const COMPARISON_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    pub resolution: f64,
    pub error: f64,
    pub bound: Option<f64>,
}

impl ExperimentRow {
    pub fn new(resolution: f64, error: f64, bound: Option<f64>) -> Self {
        Self { resolution, error, bound }
    }

    /// `None` when the row carries no bound.
    pub fn within_bound(&self) -> Option<bool> {
        self.bound.map(|b| self.error <= b)
    }
}

/// Table of `(resolution, error, bound)` rows with a log-log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Sorted by decreasing resolution.
    pub rows: Vec<ExperimentRow>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl ExperimentResult {
    /// Sorts the rows and fits a slope when at least two errors exceed
    /// [`FIT_FLOOR`]; otherwise the slope is reported as 0 with a note.
    /// `passed` starts as "every bound holds".
    pub fn from_rows(mut rows: Vec<ExperimentRow>) -> Self {
        rows.sort_by(|a, b| b.resolution.total_cmp(&a.resolution));
        let mut notes = Vec::new();
        let (fitted_slope, fitted_intercept) = match loglog_fit(&rows) {
            Some(fit) => fit,
            None => {
                notes.push(format!("fewer than two errors above {FIT_FLOOR:e}; no slope fitted"));
                (0.0, 0.0)
            }
        };
        let passed = rows.iter().all(|r| r.within_bound() != Some(false));
        Self {
            rows,
            fitted_slope,
            fitted_intercept,
            passed,
            notes,
        }
    }

    pub fn bounds_hold(&self) -> bool {
        self.rows.iter().all(|r| r.within_bound() != Some(false))
    }

    /// Errors strictly decrease as the resolution decreases.
    pub fn monotone_decrease(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    /// `resolution,error,bound,passed` block; `bound` and `passed` are empty
    /// for rows without a bound.
    pub fn csv_block(&self) -> String {
        let mut out = String::from("resolution,error,bound,passed\n");
        for r in &self.rows {
            let bound = r.bound.map(|b| b.to_string()).unwrap_or_default();
            let ok = r.within_bound().map(|b| b.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", r.resolution, r.error, bound, ok));
        }
        out
    }

    pub fn verdict(&self, name: &str) -> String {
        format!(
            "{name}: {} (slope {:.4}, {} rows)",
            if self.passed { "PASS" } else { "FAIL" },
            self.fitted_slope,
            self.rows.len()
        )
    }
}

/// Least-squares `(slope, intercept)` of `log error` on `log resolution` over
/// rows with error above [`FIT_FLOOR`].
pub fn loglog_fit(rows: &[ExperimentRow]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > FIT_FLOOR && r.resolution > 0.0)
        .map(|r| (r.resolution.ln(), r.error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fits the convergence order of `(resolution, error)` pairs.
///
/// Passes when the slope is at least `target − SLOPE_TOLERANCE` and, for a
/// positive target, the errors actually shrink (slope > 0).
pub fn fit_rate(pairs: &[(f64, f64)], target: f64) -> Result<ExperimentResult> {
    let usable = pairs.iter().filter(|p| p.1 > FIT_FLOOR && p.0 > 0.0).count();
    if usable < 3 {
        return Err(Error::arg(format!(
            "a rate fit needs at least 3 pairs with positive resolution and error above {FIT_FLOOR:e}, got {usable}"
        )));
    }
    let mut seen: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    seen.sort_by(f64::total_cmp);
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::arg("resolutions must be distinct"));
    }
    if pairs.iter().any(|p| !(p.1 >= 0.0)) {
        return Err(Error::arg("errors must be nonnegative"));
    }
    let mut res = ExperimentResult::from_rows(pairs.iter().map(|&(h, e)| ExperimentRow::new(h, e, None)).collect());
    res.passed = res.fitted_slope >= target - SLOPE_TOLERANCE && (target <= 0.0 || res.fitted_slope > 0.0);
    Ok(res)
}

/// Largest violations of the four defining properties of `Ê` observed on
/// one family and a pair of atom functions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxiomReport {
    /// `(Ê[f] − Ê[max(f, g)])⁺`
    pub monotonicity: f64,
    /// `|Ê[f + c] − Ê[f] − c|`
    pub constant_preserving: f64,
    /// `(Ê[f + g] − Ê[f] − Ê[g])⁺`
    pub subadditivity: f64,
    /// `|Ê[λf] − λÊ[f]|`
    pub homogeneity: f64,
}

impl AxiomReport {
    pub fn worst(&self) -> f64 {
        self.monotonicity
            .max(self.constant_preserving)
            .max(self.subadditivity)
            .max(self.homogeneity)
    }
}

/// Evaluates the axioms for `f`, `g`, a constant `c` and `λ ≥ 0`.
pub fn check_axioms<F, G>(u: &UncertaintySet, f: F, g: G, c: f64, lambda: f64) -> Result<AxiomReport>
where
    F: Fn(&[f64], &[f64]) -> f64,
    G: Fn(&[f64], &[f64]) -> f64,
{
    if !(lambda >= 0.0) {
        return Err(Error::arg(format!("homogeneity needs λ ≥ 0, got {lambda}")));
    }
    let ef = sublinear_expect(u, &f)?;
    let eg = sublinear_expect(u, &g)?;
    let emax = sublinear_expect(u, |x, y| f(x, y).max(g(x, y)))?;
    let eshift = sublinear_expect(u, |x, y| f(x, y) + c)?;
    let esum = sublinear_expect(u, |x, y| f(x, y) + g(x, y))?;
    let escaled = sublinear_expect(u, |x, y| lambda * f(x, y))?;
    Ok(AxiomReport {
        monotonicity: (ef - emax).max(0.0),
        constant_preserving: (eshift - ef - c).abs(),
        subadditivity: (esum - ef - eg).max(0.0),
        homogeneity: (escaled - lambda * ef).abs(),
    })
}

/// Outcome of a discrete comparison-principle check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub holds: bool,
    /// Largest `v̲ − v̄ − (initial gap + nΔ·forcing gap)` over all nodes and steps.
    pub max_violation: f64,
    /// `sup (v̲ − v̄)⁺` over the initial step.
    pub initial_gap: f64,
    /// `sup (h₁ − h₂)⁺` over steps `≥ 1`.
    pub forcing_gap: f64,
}

/// Checks `v̲ − v̄ ≤ sup_{t<Δ}(v̲ − v̄)⁺ + t·sup(h₁ − h₂)⁺` on every node of
/// every step.
///
/// `h1` and `h2` hold one nodal array per step `1..=N`. The hypotheses
/// `S(Δ, x, v̲, v̲(t−Δ)) ≤ h₁` and `S(Δ, x, v̄, v̄(t−Δ)) ≥ h₂` are verified
/// first; if they fail the result is [`Error::Precondition`].
pub fn check_comparison(
    u: &UncertaintySet,
    cfg: &SchemeConfig,
    v_under: &GridSolution,
    v_over: &GridSolution,
    h1: &[Vec<f64>],
    h2: &[Vec<f64>],
) -> Result<ComparisonReport> {
    let n = v_under.steps().len();
    if v_over.steps().len() != n || h1.len() + 1 != n || h2.len() + 1 != n {
        return Err(Error::arg(format!(
            "need matching step counts: {} and {} snapshots, {} and {} forcing arrays",
            n,
            v_over.steps().len(),
            h1.len(),
            h2.len()
        )));
    }
    let nodes = cfg.grid().len();
    if h1.iter().chain(h2).any(|h| h.len() != nodes) {
        return Err(Error::arg("forcing arrays must have one value per grid node"));
    }
    let delta = cfg.delta();
    let sub = v_under.steps();
    let sup = v_over.steps();
    for k in 1..n {
        let r_under = residuals(u, cfg, &sub[k], &sub[k - 1])?;
        let r_over = residuals(u, cfg, &sup[k], &sup[k - 1])?;
        for i in 0..nodes {
            if r_under[i] > h1[k - 1][i] + COMPARISON_SLACK {
                return Err(Error::Precondition(format!(
                    "subsolution residual {} exceeds h1 = {} at step {k}, node {i}",
                    r_under[i],
                    h1[k - 1][i]
                )));
            }
            if r_over[i] < h2[k - 1][i] - COMPARISON_SLACK {
                return Err(Error::Precondition(format!(
                    "supersolution residual {} is below h2 = {} at step {k}, node {i}",
                    r_over[i],
                    h2[k - 1][i]
                )));
            }
        }
    }
    let initial_gap = sub[0]
        .values()
        .iter()
        .zip(sup[0].values())
        .map(|(a, b)| (a - b).max(0.0))
        .fold(0.0, f64::max);
    let forcing_gap = h1
        .iter()
        .zip(h2)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).max(0.0)))
        .fold(0.0, f64::max);
    let mut max_violation = f64::NEG_INFINITY;
    for k in 0..n {
        let allowed = initial_gap + k as f64 * delta * forcing_gap;
        for (a, b) in sub[k].values().iter().zip(sup[k].values()) {
            max_violation = max_violation.max(a - b - allowed);
        }
    }
    Ok(ComparisonReport {
        holds: max_violation <= COMPARISON_SLACK,
        max_violation,
        initial_gap,
        forcing_gap,
    })
}

/// Which regularity estimate [`estimate_modulus`] measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulusKind {
    /// `|u^Δ(t,x) − u^Δ(t,y)| ≤ C_φ|x − y|^β`
    Space,
    /// `|u^Δ(s,x) − u^Δ(t,x)| ≤ √3 C_φ K₀(|s − t|^{β/2} + Δ^{β/2})`
    Time { k0: f64 },
    /// `|u^Δ(s,x) − u^Δ(t,x)| ≤ C_φ M_Y¹(|s − t| + Δ)` when `X ≡ 0` and `β = 1`.
    TimeNoVolatility { m_y1: f64 },
}

/// Measured modulus multiplier against the stated constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusReport {
    /// Smallest multiplier consistent with every scanned pair.
    pub measured: f64,
    pub stated: f64,
    /// Additive allowance for interpolation error.
    pub slack: f64,
    /// Every scanned pair satisfies `|Δu| ≤ stated · rate + slack`.
    pub passed: bool,
}

/// Scans interior node pairs of `series` and measures the modulus of `kind`.
///
/// Only nodes at distance at least `margin` from the grid boundary are used.
/// Space pairs are taken along each axis at offsets `1, 2, 4, …` nodes.
pub fn estimate_modulus(
    series: &GridSolution,
    kind: ModulusKind,
    c_phi: f64,
    beta: f64,
    margin: f64,
    slack: f64,
) -> Result<ModulusReport> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::arg(format!("beta must lie in (0, 1], got {beta}")));
    }
    let steps = series.steps();
    let grid = steps[0].grid();
    let interior: Vec<usize> = (0..grid.len()).filter(|&i| grid.distance_to_boundary(i) >= margin).collect();
    let delta = series.delta();
    let mut measured: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    let stated = match kind {
        ModulusKind::Space => c_phi,
        ModulusKind::Time { k0 } => 3f64.sqrt() * c_phi * k0,
        ModulusKind::TimeNoVolatility { m_y1 } => {
            if beta != 1.0 {
                return Err(Error::arg("the no-volatility time modulus needs beta = 1"));
            }
            c_phi * m_y1
        }
    };
    let mut record = |diff: f64, rate: f64| {
        if rate > 0.0 {
            measured = measured.max(diff / rate);
        }
        worst_excess = worst_excess.max(diff - stated * rate - slack);
    };
    match kind {
        ModulusKind::Space => {
            let shape = grid.shape();
            let strides = strides_of(shape);
            for s in steps {
                let v = s.values();
                for &i in &interior {
                    let mi = grid.multi_index(i);
                    for a in 0..grid.dim() {
                        let mut off = 1;
                        while mi[a] + off < shape[a] {
                            let j = i + off * strides[a];
                            if grid.distance_to_boundary(j) >= margin {
                                let dist = off as f64 * grid.spacing()[a];
                                record((v[i] - v[j]).abs(), dist.powf(beta));
                            }
                            off *= 2;
                        }
                    }
                }
            }
        }
        ModulusKind::Time { .. } | ModulusKind::TimeNoVolatility { .. } => {
            for (m, sm) in steps.iter().enumerate() {
                for (k, sk) in steps.iter().enumerate().skip(m + 1) {
                    let gap = (k - m) as f64 * delta;
                    let rate = match kind {
                        ModulusKind::TimeNoVolatility { .. } => gap + delta,
                        _ => gap.powf(beta / 2.0) + delta.powf(beta / 2.0),
                    };
                    for &i in &interior {
                        record((sm.values()[i] - sk.values()[i]).abs(), rate);
                    }
                }
            }
        }
    }
    Ok(ModulusReport {
        measured,
        stated,
        slack,
        passed: worst_excess <= 0.0 || interior.is_empty(),
    })
}

fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{solve_grid, Grid};
    use crate::uncertainty::builtin::*;

    #[test]
    fn exact_rates() {
        let pairs: Vec<(f64, f64)> = (1..=6).map(|k| (2f64.powi(-k), 2f64.powi(-k))).collect();
        let r = fit_rate(&pairs, 1.0).unwrap();
        assert!((r.fitted_slope - 1.0).abs() < 1e-12);
        assert!(r.passed);
        assert!(r.rows.windows(2).all(|w| w[0].resolution > w[1].resolution));
    }

    #[test]
    fn noisy_square_root_rate() {
        let noise = [0.01, -0.01, 0.005, -0.007, 0.0, 0.009, -0.003];
        let pairs: Vec<(f64, f64)> = noise
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let h = 2f64.powi(-(k as i32) - 1);
                (h, h.sqrt() * (1.0 + e))
            })
            .collect();
        let r = fit_rate(&pairs, 0.5).unwrap();
        assert!((0.45..=0.55).contains(&r.fitted_slope));
    }

    #[test]
    fn constant_errors_fail() {
        let pairs = [(0.5, 0.1), (0.25, 0.1), (0.125, 0.1)];
        let r = fit_rate(&pairs, 0.1).unwrap();
        assert!(r.fitted_slope.abs() < 1e-12);
        assert!(!r.passed);
    }

    #[test]
    fn too_few_pairs() {
        assert!(fit_rate(&[(0.5, 0.1), (0.25, 0.05)], 1.0).is_err());
        assert!(fit_rate(&[(0.5, 0.1), (0.5, 0.05), (0.25, 0.01)], 1.0).is_err());
    }

    #[test]
    fn csv_block_layout() {
        let r = ExperimentResult::from_rows(vec![
            ExperimentRow::new(0.25, 0.1, Some(0.2)),
            ExperimentRow::new(0.5, 0.3, None),
        ]);
        assert_eq!(r.csv_block(), "resolution,error,bound,passed\n0.5,0.3,,\n0.25,0.1,0.2,true\n");
        assert!(r.verdict("demo").starts_with("demo: PASS"));
    }

    #[test]
    fn axioms_on_a_family() {
        let u = bsb(0.05, &[0.1, 0.2, 0.3]).unwrap();
        let r = check_axioms(&u, |x, y| x[0].sin() + y[0], |x, _| x[0] * x[0] - 0.3, 1.7, 2.5).unwrap();
        assert!(r.worst() <= 1e-12);
    }

    fn setup() -> (UncertaintySet, SchemeConfig) {
        let u = pm_sigma(&[0.2, 0.4]).unwrap();
        let cfg = SchemeConfig::new(0.1, 1.0, Grid::line(-3.0, 3.0, 121).unwrap()).unwrap();
        (u, cfg)
    }

    #[test]
    fn comparison_equality_and_shift() {
        let (u, cfg) = setup();
        let s = solve_grid(&u, &cfg, |x| x[0].max(0.0)).unwrap();
        let zeros = vec![vec![0.0; cfg.grid().len()]; cfg.n_steps()];
        let r = check_comparison(&u, &cfg, &s, &s, &zeros, &zeros).unwrap();
        assert!(r.holds && r.max_violation <= 1e-9);
        let shifted = solve_grid(&u, &cfg, |x| x[0].max(0.0) + 0.3).unwrap();
        let r = check_comparison(&u, &cfg, &s, &shifted, &zeros, &zeros).unwrap();
        assert!(r.holds);
        let r = check_comparison(&u, &cfg, &shifted, &s, &zeros, &zeros).unwrap();
        assert!(r.holds && (r.initial_gap - 0.3).abs() < 1e-12);
    }

    #[test]
    fn comparison_precondition_is_reported() {
        let (u, cfg) = setup();
        let s = solve_grid(&u, &cfg, |x| x[0].max(0.0)).unwrap();
        let zeros = vec![vec![0.0; cfg.grid().len()]; cfg.n_steps()];
        let minus = vec![vec![-1.0; cfg.grid().len()]; cfg.n_steps()];
        match check_comparison(&u, &cfg, &s, &s, &minus, &zeros) {
            Err(Error::Precondition(_)) => {}
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn moduli_of_constant_data_vanish() {
        let (u, cfg) = setup();
        let s = solve_grid(&u, &cfg, |_| 2.0).unwrap();
        let space = estimate_modulus(&s, ModulusKind::Space, 1.0, 1.0, 0.5, 0.0).unwrap();
        let time = estimate_modulus(&s, ModulusKind::Time { k0: 1.0 }, 1.0, 1.0, 0.5, 0.0).unwrap();
        assert_eq!(space.measured, 0.0);
        assert_eq!(time.measured, 0.0);
    }

    #[test]
    fn lipschitz_data_keeps_its_constant() {
        let (u, cfg) = setup();
        let s = solve_grid(&u, &cfg, |x| (1.0 - x[0].exp()).max(0.0)).unwrap();
        let h = cfg.grid().spacing()[0];
        let r = estimate_modulus(&s, ModulusKind::Space, 1.0, 1.0, 1.0, 2.0 * h).unwrap();
        assert!(r.passed, "{r:?}");
        let k0 = (0.5f64).exp() * 0.4;
        let t = estimate_modulus(&s, ModulusKind::Time { k0 }, 1.0, 1.0, 1.0, 2.0 * h).unwrap();
        assert!(t.passed, "{t:?}");
    }
}
