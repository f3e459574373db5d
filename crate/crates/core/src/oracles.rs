//! Independent reference computations.
//!
//! Every reference value carries the method that produced it and an accuracy
//! estimate; none of them is treated as exact ground truth.

use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::clt::ThetaSet;
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::scheme::{solve_from, steps_in, Grid, GridFunction, SchemeConfig, ShiftTable};
use crate::testfn::normal_pdf;
use crate::uncertainty::UncertaintySet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMethod {
    ClosedFormBs,
    ClassicalNormal,
    FineGridGheat,
    BruteForceTree,
    MaximalSup,
}

impl std::fmt::Display for ReferenceMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReferenceMethod::ClosedFormBs => "closed_form_bs",
            ReferenceMethod::ClassicalNormal => "classical_normal",
            ReferenceMethod::FineGridGheat => "fine_grid_gheat",
            ReferenceMethod::BruteForceTree => "brute_force_tree",
            ReferenceMethod::MaximalSup => "maximal_sup",
        })
    }
}

/// A reference value with its provenance and estimated accuracy.
///
/// For the G-heat references this approximates `u(t, x) = Ẽ[φ(x + √t ξ + t ζ)]`
/// with `(ξ, ζ)` G-distributed; the pair itself is never constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub value: f64,
    pub method: ReferenceMethod,
    /// Human-readable description of the discretisation used.
    pub resolution: String,
    /// Estimated absolute accuracy, always positive.
    pub accuracy: f64,
    pub warning: Option<String>,
}

impl ReferenceSolution {
    fn new(value: f64, method: ReferenceMethod, resolution: String, accuracy: f64) -> Self {
        let floor = f64::EPSILON * value.abs().max(1.0);
        Self {
            value,
            method,
            resolution,
            accuracy: accuracy.max(floor),
            warning: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Put,
    Call,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal is valid")
}

/// Black–Scholes price of a European put. `T = 0` gives the intrinsic value.
pub fn bs_closed_form(r: f64, sigma: f64, t: f64, strike: f64, s0: f64, kind: OptionKind) -> Result<f64> {
    if kind != OptionKind::Put {
        return Err(Error::Unsupported("only puts have a closed-form reference".into()));
    }
    if !(sigma > 0.0) || !(t >= 0.0) || !(s0 > 0.0) || !(strike >= 0.0) {
        return Err(Error::arg(format!(
            "need sigma > 0, T >= 0, s0 > 0 and K >= 0, got sigma={sigma}, T={t}, s0={s0}, K={strike}"
        )));
    }
    if t == 0.0 || strike == 0.0 {
        return Ok((strike - s0).max(0.0));
    }
    let n = std_normal();
    let sq = sigma * t.sqrt();
    let d1 = ((s0 / strike).ln() + (r + 0.5 * sigma * sigma) * t) / sq;
    let d2 = d1 - sq;
    Ok(strike * (-r * t).exp() * n.cdf(-d2) - s0 * n.cdf(-d1))
}

/// Binomial tree for `ln S` with moves `(r − σ²/2)Δ ± σ√Δ` at probability ½,
/// `⌊T/Δ⌋` steps, discounted at `e^{−r n Δ}`.
pub fn crr_price(r: f64, sigma: f64, t: f64, delta: f64, s0: f64, payoff: impl Fn(f64) -> f64) -> Result<f64> {
    if !(sigma > 0.0) || !(delta > 0.0) || !(t >= 0.0) || !(s0 > 0.0) {
        return Err(Error::arg("CRR tree needs sigma > 0, delta > 0, T >= 0 and s0 > 0"));
    }
    let n = steps_in(t, delta);
    let drift = (r - 0.5 * sigma * sigma) * delta;
    let up = sigma * delta.sqrt();
    let x0 = s0.ln();
    // node j after m steps: j up-moves and m − j down-moves
    let mut v: Vec<f64> = (0..=n)
        .map(|j| {
            let x = x0 + n as f64 * drift + (2.0 * j as f64 - n as f64) * up;
            payoff(x.exp())
        })
        .collect();
    for m in (0..n).rev() {
        for j in 0..=m {
            v[j] = 0.5 * (v[j] + v[j + 1]);
        }
    }
    Ok(v[0] * (-r * n as f64 * delta).exp())
}

/// `E[φ(σZ)]` for a standard normal `Z`, by adaptive quadrature.
pub fn classical_normal(sigma: f64, phi: impl Fn(f64) -> f64) -> Result<ReferenceSolution> {
    if !(sigma >= 0.0) {
        return Err(Error::arg(format!("sigma must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(ReferenceSolution::new(phi(0.0), ReferenceMethod::ClassicalNormal, "exact".into(), 0.0));
    }
    let r = integrate(|z| phi(sigma * z) * normal_pdf(z), -12.0, 12.0, 1e-12)?;
    Ok(ReferenceSolution::new(
        r.value,
        ReferenceMethod::ClassicalNormal,
        "adaptive Simpson on [-12, 12]".into(),
        r.error + 1e-15,
    ))
}

/// Largest number of full paths [`brute_force_tree`] will enumerate.
pub const TREE_PATH_CAP: u64 = 1_000_000;

/// Unrolls the scheme over full, non-recombined paths: at every node the
/// maximum over measures of the weighted child values.
pub fn brute_force_tree<F>(u: &UncertaintySet, delta: f64, n: usize, x0: &[f64], phi: F) -> Result<ReferenceSolution>
where
    F: Fn(&[f64]) -> f64,
{
    if n > 4 {
        return Err(Error::Resource(format!("brute-force tree is limited to 4 steps, got {n}")));
    }
    let atoms: u64 = u.measures().iter().map(|m| m.atoms().len() as u64).sum();
    let paths = atoms.saturating_pow(n as u32);
    if paths > TREE_PATH_CAP {
        return Err(Error::Resource(format!("{paths} paths exceed the cap of {TREE_PATH_CAP}")));
    }
    if x0.len() != u.dim() {
        return Err(Error::arg("base point dimension does not match the family"));
    }
    let sq = delta.sqrt();
    fn rec<F: Fn(&[f64]) -> f64>(u: &UncertaintySet, sq: f64, delta: f64, m: usize, x: &[f64], phi: &F) -> f64 {
        if m == 0 {
            return phi(x);
        }
        let mut best = f64::NEG_INFINITY;
        for meas in u.measures() {
            let mut acc = 0.0;
            for a in meas.atoms() {
                let next: Vec<f64> = x.iter().enumerate().map(|(i, xi)| xi + sq * a.x[i] + delta * a.y[i]).collect();
                acc += a.p * rec(u, sq, delta, m - 1, &next, phi);
            }
            best = best.max(acc);
        }
        best
    }
    let value = rec(u, sq, delta, n, x0, &phi);
    if !value.is_finite() {
        return Err(Error::Evaluation("brute-force tree produced a non-finite value".into()));
    }
    Ok(ReferenceSolution::new(
        value,
        ReferenceMethod::BruteForceTree,
        format!("{n} steps, {paths} paths"),
        f64::EPSILON * value.abs().max(1.0) * 8.0,
    ))
}

/// Discretisation of [`fine_grid_reference`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineGridOptions {
    /// Finest time step; the coarser solves use `2Δ` and `4Δ`.
    pub delta_ref: f64,
    /// Spatial steps are refined with the time step: at step `Δ` the target
    /// spacing is `h_per_delta · Δ`, so the interpolation error stays `O(Δ)`
    /// and is removed by the extrapolation. The actual spacing is the largest
    /// value not above the target that divides the smallest nonzero
    /// displacement component.
    pub h_per_delta: f64,
    /// Standard deviations of room on each side beyond the drift.
    pub safety: f64,
}

impl Default for FineGridOptions {
    fn default() -> Self {
        Self {
            delta_ref: 1.0 / 4096.0,
            h_per_delta: 1.0,
            safety: 6.0,
        }
    }
}

pub(crate) fn aligned_spacing(u: &UncertaintySet, delta: f64, h_target: f64) -> f64 {
    let sq = delta.sqrt();
    let mut s = f64::INFINITY;
    for m in u.measures() {
        for a in m.atoms() {
            for (x, y) in a.x.iter().zip(&a.y) {
                let d = (sq * x + delta * y).abs();
                if d > 1e-14 {
                    s = s.min(d);
                }
            }
        }
    }
    if !s.is_finite() {
        return h_target;
    }
    s / (s / h_target).ceil()
}

/// One grid solve of the scheme on a grid centred at `x_eval`; returns the
/// value at `(t, x_eval)`.
pub(crate) fn grid_value<F>(
    u: &UncertaintySet,
    delta: f64,
    t: f64,
    x_eval: &[f64],
    h: f64,
    half_width: f64,
    phi: F,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let grid = Grid::centered(x_eval, half_width, h)?;
    let cfg = SchemeConfig::new(delta, t.max(delta), grid)?;
    let table = ShiftTable::new(u, cfg.grid(), delta)?;
    let init = GridFunction::from_fn(Arc::clone(cfg.grid()), 0.0, &phi)?;
    let sol = solve_from(&table, &cfg, init)?;
    let step = if t < delta { &sol.steps()[0] } else { sol.final_step() };
    Ok(step.interpolate(x_eval))
}

/// Half-width of a grid whose reachable region around `x_eval` stays interior.
pub(crate) fn safe_half_width(u: &UncertaintySet, t: f64, safety: f64) -> f64 {
    t * u.max_abs_y() + safety * t.sqrt() * u.max_abs_x() + 1e-3
}

/// Approximates `u(t, x)` by grid solves at `Δ_ref·{4, 2, 1}` followed by
/// first-order Richardson extrapolation.
///
/// The accuracy is `|R₂ − R₁|`, the change of the extrapolant. If the three raw
/// values are not monotone in `Δ` the accuracy is inflated to include the raw
/// spread and a warning is attached.
pub fn fine_grid_reference<F>(
    u: &UncertaintySet,
    phi: F,
    t_eval: f64,
    x_eval: &[f64],
    opts: FineGridOptions,
) -> Result<ReferenceSolution>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !u.no_mean_uncertainty() {
        return Err(Error::Configuration("X has mean uncertainty".into()));
    }
    if !(t_eval > 0.0) {
        return Ok(ReferenceSolution::new(
            phi(x_eval),
            ReferenceMethod::FineGridGheat,
            "t = 0".into(),
            0.0,
        ));
    }
    // make 4Δ_ref divide t exactly
    let coarse_steps = (t_eval / (4.0 * opts.delta_ref)).ceil().max(1.0);
    let d1 = t_eval / (4.0 * coarse_steps);
    let half = safe_half_width(u, t_eval, opts.safety);
    let mut vals = [0.0; 3];
    let mut hs = [0.0; 3];
    for (k, mult) in [4.0, 2.0, 1.0].into_iter().enumerate() {
        let delta = d1 * mult;
        let h = aligned_spacing(u, delta, opts.h_per_delta * delta);
        hs[k] = h;
        vals[k] = grid_value(u, delta, t_eval, x_eval, h, half, &phi)?;
    }
    let [a, b, c] = vals;
    let r1 = 2.0 * b - a;
    let r2 = 2.0 * c - b;
    let mut accuracy = (r2 - r1).abs();
    let mut warning = None;
    if (b - a) * (c - b) < 0.0 {
        accuracy += (c - a).abs().max((c - b).abs());
        warning = Some(format!("non-monotone refinement sequence {a}, {b}, {c}"));
        log::warn!("fine grid reference: non-monotone refinement sequence {a}, {b}, {c}");
    }
    let mut out = ReferenceSolution::new(
        r2,
        ReferenceMethod::FineGridGheat,
        format!(
            "delta = {:e}, {:e}, {:e}; h = {:e}, {:e}, {:e}; half-width {half}",
            4.0 * d1,
            2.0 * d1,
            d1,
            hs[0],
            hs[1],
            hs[2]
        ),
        accuracy,
    );
    out.warning = warning;
    Ok(out)
}

/// Points per axis of the dense sampling in [`maximal_sup`].
pub fn maximal_sup_points(d: usize) -> usize {
    match d {
        1 => 1 << 14,
        2 => 1 << 8,
        _ => 1 << 5,
    }
}

/// `max_{θ ∈ Θ} φ(θ)`: exact over a point cloud, dense sampling plus one
/// local refinement pass over a box.
pub fn maximal_sup<F>(theta: &ThetaSet, phi: F) -> Result<ReferenceSolution>
where
    F: Fn(&[f64]) -> f64,
{
    match theta {
        ThetaSet::Points(points) => {
            if points.is_empty() {
                return Err(Error::arg("Θ is empty"));
            }
            let v = points.iter().map(|p| phi(p)).fold(f64::NEG_INFINITY, f64::max);
            Ok(ReferenceSolution::new(v, ReferenceMethod::MaximalSup, format!("{} points", points.len()), 0.0))
        }
        ThetaSet::Box { lo, hi } => {
            let d = lo.len();
            let n = maximal_sup_points(d);
            let sample = |lo: &[f64], hi: &[f64], n: usize| -> (f64, Vec<f64>) {
                let total = n.pow(d as u32);
                let mut best = (f64::NEG_INFINITY, lo.to_vec());
                for flat in 0..total {
                    let mut rest = flat;
                    let p: Vec<f64> = (0..d)
                        .map(|a| {
                            let i = rest % n;
                            rest /= n;
                            if n == 1 {
                                lo[a]
                            } else {
                                lo[a] + (hi[a] - lo[a]) * i as f64 / (n - 1) as f64
                            }
                        })
                        .collect();
                    let v = phi(&p);
                    if v > best.0 {
                        best = (v, p);
                    }
                }
                best
            };
            let (v0, p0) = sample(lo, hi, n);
            let cell: Vec<f64> = (0..d).map(|a| (hi[a] - lo[a]) / (n - 1) as f64).collect();
            let rlo: Vec<f64> = (0..d).map(|a| (p0[a] - cell[a]).max(lo[a])).collect();
            let rhi: Vec<f64> = (0..d).map(|a| (p0[a] + cell[a]).min(hi[a])).collect();
            let (v1, _) = sample(&rlo, &rhi, if d == 1 { 1025 } else { 33 });
            let value = v0.max(v1);
            let fine_cell = cell.iter().fold(0.0f64, |m, c| m.max(*c)) / if d == 1 { 512.0 } else { 16.0 };
            Ok(ReferenceSolution::new(
                value,
                ReferenceMethod::MaximalSup,
                format!("{n} points per axis, one refinement pass"),
                (value - v0).abs().max(fine_cell * fine_cell),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::solve_lattice;
    use crate::uncertainty::builtin::*;

    #[test]
    fn black_scholes_put() {
        let v = bs_closed_form(0.05, 0.2, 1.0, 1.0, 1.0, OptionKind::Put).unwrap();
        // e^{-0.05} Φ(−0.15) − Φ(−0.35)
        assert!((v - 0.055735260222569669).abs() < 1e-12, "{v}");
        assert!((bs_closed_form(0.05, 0.2, 0.0, 1.2, 1.0, OptionKind::Put).unwrap() - 0.2).abs() < 1e-15);
        assert!(bs_closed_form(0.05, 0.2, 1.0, 1e-9, 1.0, OptionKind::Put).unwrap() < 1e-12);
        assert!(bs_closed_form(0.05, 0.2, 1.0, 1.0, 1.0, OptionKind::Call).is_err());
    }

    #[test]
    fn crr_converges_to_black_scholes() {
        let bs = bs_closed_form(0.05, 0.2, 1.0, 1.0, 1.0, OptionKind::Put).unwrap();
        let crr = crr_price(0.05, 0.2, 1.0, 1e-3, 1.0, |s| (1.0 - s).max(0.0)).unwrap();
        assert!((crr - bs).abs() < 5e-4);
    }

    #[test]
    fn classical_normal_moments() {
        let r = classical_normal(0.3, |x| x.max(0.0)).unwrap();
        assert!((r.value - 0.3 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        let r = classical_normal(2.0, |x| x * x).unwrap();
        assert!((r.value - 4.0).abs() < 1e-10);
    }

    #[test]
    fn tree_matches_lattice() {
        let u = bsb(0.05, &[0.1, 0.3]).unwrap();
        let phi = |x: &[f64]| (x[0].sin() + 0.3 * x[0] * x[0]).max(-0.2);
        for n in 1..=3 {
            let tree = brute_force_tree(&u, 0.2, n, &[0.1], phi).unwrap();
            let lat = solve_lattice(&u, 0.2, n, &[0.1], phi, None).unwrap();
            assert!((tree.value - lat.value).abs() < 1e-12);
        }
        let z = zero().unwrap();
        assert_eq!(brute_force_tree(&z, 0.3, 4, &[0.7], |x| x[0]).unwrap().value, 0.7);
        assert!(brute_force_tree(&u, 0.2, 5, &[0.0], phi).is_err());
    }

    #[test]
    fn deterministic_transport_is_exact() {
        let u = deterministic(0.3).unwrap();
        let r = fine_grid_reference(&u, |x| x[0].sin(), 1.0, &[0.2], FineGridOptions::default()).unwrap();
        assert!((r.value - 0.5f64.sin()).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn heat_moment_identity() {
        let u = pm_sigma(&[0.3]).unwrap();
        let r = fine_grid_reference(&u, |x| x[0] * x[0], 1.0, &[0.0], FineGridOptions::default()).unwrap();
        assert!((r.value - 0.09).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn convex_payoff_reduces_to_upper_volatility() {
        let u = pm_sigma(&[0.1, 0.3]).unwrap();
        let r = fine_grid_reference(&u, |x| x[0].max(0.0), 1.0, &[0.0], FineGridOptions::default()).unwrap();
        let want = classical_normal(0.3, |x| x.max(0.0)).unwrap().value;
        assert!((r.value - want).abs() < 2e-4, "{r:?} vs {want}");
        assert!(r.accuracy <= 2e-4);
    }

    #[test]
    fn maximal_sup_values() {
        let single = ThetaSet::Points(vec![vec![0.4]]);
        assert_eq!(maximal_sup(&single, |x| x[0] * 2.0).unwrap().value, 0.8);
        let unit = ThetaSet::interval(0.0, 1.0).unwrap();
        assert_eq!(maximal_sup(&unit, |x| x[0]).unwrap().value, 1.0);
        let sym = ThetaSet::interval(-1.0, 1.0).unwrap();
        let r = maximal_sup(&sym, |x| -(x[0] - 0.3).powi(2)).unwrap();
        assert!(r.value.abs() < 1e-7 && r.value <= 0.0);
    }
}
