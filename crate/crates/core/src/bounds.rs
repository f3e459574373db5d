//! Explicit error constants and consistency-error measurements.

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::testfn::{PsiNorms, SmoothTestFunction};
use crate::uncertainty::{g_function, sublinear_expect, MomentReport, UncertaintySet};

/// Leading factor of the explicit CLT constant.
pub const EXPLICIT_FACTOR: f64 = 2124.0;

/// Published upper bound `10³/e` on the mollifier constant in one dimension.
pub fn c_rho_published_bound() -> f64 {
    1e3 / std::f64::consts::E
}

/// All explicit constants together with the inputs they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub c_phi: f64,
    pub beta: f64,
    pub horizon: f64,
    pub moments: MomentReport,
    pub k0: f64,
    pub k_alpha: f64,
    pub k1: f64,
    /// Only available in one dimension.
    pub c_rho: Option<f64>,
    pub c_lb: Option<f64>,
    pub c_ub: Option<f64>,
    pub c_explicit: f64,
    /// The explicit formula is stated for `d = 1` and `T = 1`.
    pub c_explicit_applicable: bool,
}

impl BoundsReport {
    /// `(key, value)` pairs in display order; unavailable constants are skipped.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let m = &self.moments;
        let mut out = vec![
            ("c_phi", self.c_phi),
            ("beta", self.beta),
            ("T", self.horizon),
            ("alpha", m.alpha),
            ("m_x2", m.m_x2),
            ("m_x3", m.m_x3),
            ("m_x4", m.m_x4),
            ("m_x_2plusalpha", m.m_x_2plusalpha),
            ("m_y1", m.m_y1),
            ("m_y2", m.m_y2),
            ("sigma_lower_sq", m.sigma_lower_sq),
            ("k0", self.k0),
            ("k_alpha", self.k_alpha),
            ("k1", self.k1),
        ];
        for (k, v) in [("c_rho", self.c_rho), ("c_lb", self.c_lb), ("c_ub", self.c_ub)] {
            if let Some(v) = v {
                out.push((k, v));
            }
        }
        out.push(("c_explicit", self.c_explicit));
        out.push(("c_explicit_applicable", f64::from(u8::from(self.c_explicit_applicable))));
        out
    }
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries = self.entries();
        let w = entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in entries {
            writeln!(f, "{k:<w$} = {v}")?;
        }
        if !self.c_explicit_applicable {
            writeln!(f, "# c_explicit is only established for d = 1 and T = 1")?;
        }
        Ok(())
    }
}

/// `K₀`, `K_α`, `K₁`, `C_LB`, `C_UB` and the explicit CLT constant.
pub fn compute_constants(moments: &MomentReport, c_phi: f64, beta: f64, horizon: f64) -> Result<BoundsReport> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::arg(format!("beta must lie in (0, 1], got {beta}")));
    }
    if !(c_phi > 0.0) || !c_phi.is_finite() {
        return Err(Error::arg(format!("C_phi must be positive and finite, got {c_phi}")));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::arg(format!("T must be positive and finite, got {horizon}")));
    }
    let m = moments;
    let k0 = (0.5 * beta * horizon).exp() * (m.m_x2.powf(0.5 * beta) + m.m_y2.powf(0.5 * beta));
    let k_alpha = 1.0 + m.m_y1 + m.m_y2 + m.m_x2 + m.m_x_2plusalpha;
    let k1 = 1.0 + m.m_y1 + m.m_y2 + m.m_x2 + m.m_x3;
    let c_rho = if m.dimension == 1 { Some(compute_c_rho(1)?) } else { None };
    let c_lb = c_rho.map(|cr| c_phi * (1.0 + k0) * (4.0 + k1 * cr * horizon));
    let c_ub = c_lb.map(|c| 2.0 * 3f64.sqrt() * c);
    let c_explicit = EXPLICIT_FACTOR
        * c_phi
        * (1.0 + m.m_x3.powf(beta / 3.0) + m.m_y2.powf(0.5 * beta))
        * (1.0 + m.m_x3.powf(2.0 / 3.0) + m.m_x3 + m.m_y2.sqrt() + m.m_y2);
    Ok(BoundsReport {
        c_phi,
        beta,
        horizon,
        moments: *m,
        k0,
        k_alpha,
        k1,
        c_rho,
        c_lb,
        c_ub,
        c_explicit,
        c_explicit_applicable: m.dimension == 1 && horizon == 1.0,
    })
}

/// Detailed result of the mollifier-constant computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CRhoReport {
    pub value: f64,
    /// Normalizing constant `K`.
    pub k: f64,
    /// `∫ |f^{(j)}|` over `(−1, 1)` for `j = 0..=3`, `f(x) = exp(−1/(1−x²))`.
    pub bump_integrals: [f64; 4],
    /// Mass of `ρ` by a two-dimensional quadrature independent of the product form.
    pub mass: f64,
    /// Same value at a 100× tighter quadrature tolerance.
    pub refined_value: f64,
}

static C_RHO: OnceLock<std::result::Result<CRhoReport, String>> = OnceLock::new();

/// `C_ρ = ‖D³ρ‖₁ + ‖D²ρ‖₁ + ‖∂²ₜρ‖₁ + ‖∂ₜD²ρ‖₁ + ‖∂ₜDρ‖₁` for the standard
/// bump mollifier on `(−1, 0) × (−1, 1)`. Only `d = 1` is supported.
pub fn compute_c_rho(d: usize) -> Result<f64> {
    c_rho_report(d).map(|r| r.value)
}

/// [`compute_c_rho`] with its intermediate quantities. Cached after the first call.
pub fn c_rho_report(d: usize) -> Result<CRhoReport> {
    if d != 1 {
        return Err(Error::Unsupported(format!("C_rho is only computed in one dimension, got d = {d}")));
    }
    C_RHO
        .get_or_init(|| c_rho_uncached().map_err(|e| e.to_string()))
        .clone()
        .map_err(|message| Error::Numerical { message, achieved: f64::NAN })
}

fn bump_derivative(k: usize, x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 5e-3 {
        return 0.0;
    }
    let f = (-1.0 / s).exp();
    let g1 = -2.0 * x / (s * s);
    let g2 = -(2.0 + 6.0 * x * x) / (s * s * s);
    let g3 = -24.0 * x * (1.0 + x * x) / (s * s * s * s);
    match k {
        0 => f,
        1 => g1 * f,
        2 => (g2 + g1 * g1) * f,
        3 => (g3 + 3.0 * g1 * g2 + g1 * g1 * g1) * f,
        _ => unreachable!("only derivatives up to order 3 are needed"),
    }
}

fn bump_integrals(tol: f64) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = integrate(|x| bump_derivative(k, x).abs(), -1.0, 1.0, tol)?.value;
    }
    Ok(out)
}

// ρ(t, x) = K f(x) f(2t + 1): the time factor on (−1, 0) contributes
// 2^{j−1} ∫|f^{(j)}| for its j-th derivative.
fn c_rho_from(a: &[f64; 4]) -> (f64, f64) {
    let k = 2.0 / (a[0] * a[0]);
    let time = |j: i32| 2f64.powi(j - 1) * a[j as usize];
    let value = k
        * (a[3] * time(0) + a[2] * time(0) + a[0] * time(2) + a[2] * time(1) + a[1] * time(1));
    (value, k)
}

fn c_rho_uncached() -> Result<CRhoReport> {
    let a = bump_integrals(1e-6)?;
    let (value, k) = c_rho_from(&a);
    let refined = bump_integrals(1e-8)?;
    let (refined_value, _) = c_rho_from(&refined);
    let inner = |t: f64| -> f64 {
        let ft = bump_derivative(0, 2.0 * t + 1.0);
        if ft == 0.0 {
            return 0.0;
        }
        integrate(|x| k * bump_derivative(0, x) * ft, -1.0, 1.0, 1e-11)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    let mass = integrate(inner, -1.0, 0.0, 1e-11)?.value;
    Ok(CRhoReport {
        value,
        k,
        bump_integrals: a,
        mass,
        refined_value,
    })
}

/// `E(Δ, ψ) = max_x |(S(Δ)ψ(x) − ψ(x))/Δ − G(Dψ(x), D²ψ(x))|` over `points`,
/// with `S(Δ)ψ` evaluated exactly on the atoms.
pub fn consistency_error(
    u: &UncertaintySet,
    delta: f64,
    psi: &dyn SmoothTestFunction,
    points: &[Vec<f64>],
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::arg(format!("time step must be positive, got {delta}")));
    }
    if psi.dim() != u.dim() {
        return Err(Error::arg(format!(
            "test function has dimension {} but the family has dimension {}",
            psi.dim(),
            u.dim()
        )));
    }
    let sq = delta.sqrt();
    let errs: Vec<Result<f64>> = points
        .par_iter()
        .map(|x| {
            let grad = psi
                .gradient(x)
                .ok_or_else(|| Error::arg(format!("test function `{}` has no gradient", psi.name())))?;
            let hess = psi
                .hessian(x)
                .ok_or_else(|| Error::arg(format!("test function `{}` has no Hessian", psi.name())))?;
            let base = psi.value(x);
            let s = sublinear_expect(u, |ax, ay| {
                let shifted: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .map(|(i, xi)| xi + sq * ax[i] + delta * ay[i])
                    .collect();
                psi.value(&shifted) - base
            })?;
            let g = g_function(u, &grad, &hess)?;
            Ok((s / delta - g).abs())
        })
        .collect();
    let mut worst: f64 = 0.0;
    for e in errs {
        worst = worst.max(e?);
    }
    Ok(worst)
}

/// Which published right-hand side [`consistency_bound`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    /// `Δ^{α/2}[D²ψ]_α M_X^{2+α} + √Δ|D²ψ|₀(M_X² + M_Y²)`
    Prop51I,
    /// `√Δ|D³ψ|₀ M_X³ + √Δ|D²ψ|₀(M_X² + M_Y²)`
    Prop51II,
    /// Space-time bound for `C^{1+α/2, 2+α}` test functions, constant `K_α`.
    Prop52IIIA,
    /// Space-time bound for smooth test functions, constant `K₁`.
    Prop52IIIB,
    /// `Δ(M_X⁴|D⁴ψ|₀ + ¼(M_X⁴ + M_Y²)|D³ψ|₀ + ½M_Y²|D²ψ|₀)` for families with
    /// `Y = r − ½X²` and vanishing odd moments of `X`.
    Appendix,
}

impl std::str::FromStr for BoundVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "prop51_i" => BoundVariant::Prop51I,
            "prop51_ii" => BoundVariant::Prop51II,
            "prop52_iii_a" => BoundVariant::Prop52IIIA,
            "prop52_iii_b" => BoundVariant::Prop52IIIB,
            "appendix" => BoundVariant::Appendix,
            other => return Err(Error::arg(format!("unknown bound variant `{other}`"))),
        })
    }
}

fn need(v: Option<f64>, what: &str, variant: BoundVariant) -> Result<f64> {
    v.ok_or_else(|| Error::arg(format!("bound {variant:?} needs {what}")))
}

/// Right-hand side of the selected consistency bound. The Hölder exponent is
/// `moments.alpha`.
pub fn consistency_bound(m: &MomentReport, n: &PsiNorms, delta: f64, variant: BoundVariant) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::arg(format!("time step must be positive, got {delta}")));
    }
    let sq = delta.sqrt();
    let alpha = m.alpha;
    let k_alpha = 1.0 + m.m_y1 + m.m_y2 + m.m_x2 + m.m_x_2plusalpha;
    let k1 = 1.0 + m.m_y1 + m.m_y2 + m.m_x2 + m.m_x3;
    let v = variant;
    Ok(match variant {
        BoundVariant::Prop51I => {
            delta.powf(alpha / 2.0) * need(n.d2_holder, "[D²ψ]_α", v)? * m.m_x_2plusalpha
                + sq * need(n.d2, "|D²ψ|₀", v)? * (m.m_x2 + m.m_y2)
        }
        BoundVariant::Prop51II => {
            sq * need(n.d3, "|D³ψ|₀", v)? * m.m_x3 + sq * need(n.d2, "|D²ψ|₀", v)? * (m.m_x2 + m.m_y2)
        }
        BoundVariant::Prop52IIIA => {
            k_alpha
                * (delta.powf(alpha / 2.0) * (need(n.d2_holder, "[D²ψ]_α", v)? + need(n.dt_holder, "[∂ₜψ]_α", v)?)
                    + sq * need(n.d2, "|D²ψ|₀", v)?
                    + delta * (need(n.dt_d2, "|∂ₜD²ψ|₀", v)? + need(n.dt_d1, "|∂ₜDψ|₀", v)?))
        }
        BoundVariant::Prop52IIIB => {
            k1 * (sq * (need(n.d3, "|D³ψ|₀", v)? + need(n.d2, "|D²ψ|₀", v)?)
                + delta
                    * (need(n.dt2, "|∂²ₜψ|₀", v)?
                        + need(n.dt_d2, "|∂ₜD²ψ|₀", v)?
                        + need(n.dt_d1, "|∂ₜDψ|₀", v)?))
        }
        BoundVariant::Appendix => {
            delta
                * (m.m_x4 * need(n.d4, "|D⁴ψ|₀", v)?
                    + 0.25 * (m.m_x4 + m.m_y2) * need(n.d3, "|D³ψ|₀", v)?
                    + 0.5 * m.m_y2 * need(n.d2, "|D²ψ|₀", v)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::{Affine, GaussianBump, HalfSquare, Sine};
    use crate::uncertainty::builtin::*;

    fn report(m_x2: f64, m_x3: f64, m_y2: f64) -> MomentReport {
        MomentReport {
            m_x2,
            m_x3,
            m_y2,
            ..MomentReport::zero(1)
        }
    }

    #[test]
    fn k0_at_unit_moments() {
        let r = compute_constants(&report(1.0, 1.0, 0.0), 1.0, 1.0, 1.0).unwrap();
        assert!((r.k0 - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn explicit_constant() {
        let r = compute_constants(&report(1.0, 1.0, 0.0), 1.0, 1.0, 1.0).unwrap();
        assert!((r.c_explicit - 12744.0).abs() < 1e-9);
        assert!(r.c_explicit_applicable);
    }

    #[test]
    fn zero_moments() {
        let r = compute_constants(&MomentReport::zero(1), 1.0, 1.0, 1.0).unwrap();
        assert_eq!(r.k0, 0.0);
        assert_eq!(r.k1, 1.0);
    }

    #[test]
    fn upper_constant_is_scaled_lower_constant() {
        let r = compute_constants(&report(0.09, 0.027, 0.01), 2.0, 0.5, 2.0).unwrap();
        let (lb, ub) = (r.c_lb.unwrap(), r.c_ub.unwrap());
        assert!((ub - 2.0 * 3f64.sqrt() * lb).abs() <= 1e-12 * ub);
        assert!(!r.c_explicit_applicable);
    }

    #[test]
    fn beta_range() {
        assert!(compute_constants(&MomentReport::zero(1), 1.0, 0.0, 1.0).is_err());
        assert!(compute_constants(&MomentReport::zero(1), 1.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn c_rho_matches_frozen_value() {
        let r = c_rho_report(1).unwrap();
        assert!((r.value - 145.585795341797).abs() < 1e-4);
        assert!((r.k - 10.14556302).abs() < 1e-7);
        assert!((r.mass - 1.0).abs() < 1e-8);
        assert!(((r.value - r.refined_value) / r.value).abs() < 1e-4);
        assert!(r.value < c_rho_published_bound());
        assert!(compute_c_rho(2).is_err());
    }

    #[test]
    fn affine_and_quadratic_are_exact() {
        let u = pm_sigma(&[0.1, 0.3]).unwrap();
        let pts: Vec<Vec<f64>> = (-10..=10).map(|k| vec![0.3 * k as f64]).collect();
        let aff = Affine {
            slope: vec![1.7],
            intercept: -0.2,
        };
        assert!(consistency_error(&u, 0.1, &aff, &pts).unwrap() < 1e-12);
        assert!(consistency_error(&u, 0.1, &HalfSquare, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn sine_respects_first_order_bound() {
        let u = pm_sigma(&[0.1, 0.3]).unwrap();
        let m = u.validate();
        let pts: Vec<Vec<f64>> = (0..400).map(|k| vec![-6.0 + 12.0 * k as f64 / 399.0]).collect();
        for k in 2..=10 {
            let delta = 2f64.powi(-k);
            let e = consistency_error(&u, delta, &Sine, &pts).unwrap();
            let b = consistency_bound(&m, &Sine.norms(), delta, BoundVariant::Prop51II).unwrap();
            assert!(e <= b, "delta {delta}: {e} > {b}");
        }
    }

    #[test]
    fn bound_arithmetic() {
        let m = report(1.0, 1.0, 0.0);
        let n = PsiNorms::stationary(Some(1.0), Some(1.0), None);
        let b = consistency_bound(&m, &n, 0.01, BoundVariant::Prop51II).unwrap();
        assert!((b - 0.2).abs() < 1e-15);
        let zero = PsiNorms::stationary(Some(0.0), Some(0.0), Some(0.0));
        assert_eq!(consistency_bound(&m, &zero, 0.01, BoundVariant::Appendix).unwrap(), 0.0);
        assert!(consistency_bound(&m, &n, 0.01, BoundVariant::Appendix).is_err());
        // with α = 1 the Hölder variant has the same shape with [D²ψ]₁ for |D³ψ|₀
        let mut m1 = m;
        m1.m_x_2plusalpha = m.m_x3;
        let mut h = n;
        h.d2_holder = Some(1.0);
        let bi = consistency_bound(&m1, &h, 0.01, BoundVariant::Prop51I).unwrap();
        assert!((bi - b).abs() < 1e-15);
    }

    #[test]
    fn appendix_rate_on_the_bsb_family() {
        let u = bsb(0.05, &sigma_grid(0.1, 0.3, 9)).unwrap();
        let m = u.validate();
        let pts: Vec<Vec<f64>> = (0..300).map(|k| vec![-5.0 + 10.0 * k as f64 / 299.0]).collect();
        for k in 3..=8 {
            let delta = 2f64.powi(-k);
            let e = consistency_error(&u, delta, &GaussianBump, &pts).unwrap();
            let b = consistency_bound(&m, &GaussianBump.norms(), delta, BoundVariant::Appendix).unwrap();
            assert!(e <= b, "delta {delta}: {e} > {b}");
        }
    }
}
