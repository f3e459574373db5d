//! Adaptive Simpson quadrature on bounded intervals.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Richardson-style estimate `Σ |S₂ − S₁| / 15` over accepted panels.
    pub error: f64,
}

const PANELS: usize = 64;
const MAX_DEPTH: u32 = 48;

/// `∫_a^b f` to relative tolerance `rel_tol`.
///
/// The interval is cut into fixed panels, each refined adaptively. Fails with
/// [`Error::Numerical`] if the recursion depth is exhausted before the
/// requested accuracy is reached.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Integral> {
    if !(b > a) {
        return Err(Error::arg(format!("integration interval [{a}, {b}] is empty")));
    }
    // scale from a fine composite rule so the tolerance is relative to |∫f|
    let n = 4096;
    let w = (b - a) / n as f64;
    let scale: f64 = (0..n).map(|i| f(a + (i as f64 + 0.5) * w).abs() * w).sum();
    let abs_tol = rel_tol * scale.max(f64::MIN_POSITIVE);

    let mut value = 0.0;
    let mut error = 0.0;
    let mut exhausted = false;
    let pw = (b - a) / PANELS as f64;
    for p in 0..PANELS {
        let lo = a + p as f64 * pw;
        let hi = if p + 1 == PANELS { b } else { lo + pw };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        let (v, e) = simpson(
            &f,
            Panel { lo, hi, flo, fmid, fhi, whole },
            abs_tol / PANELS as f64,
            MAX_DEPTH,
            &mut exhausted,
        );
        value += v;
        error += e;
    }
    if !value.is_finite() {
        return Err(Error::Numerical {
            message: "integrand produced a non-finite value".into(),
            achieved: f64::INFINITY,
        });
    }
    let achieved = error / value.abs().max(f64::MIN_POSITIVE);
    if exhausted && error > abs_tol {
        return Err(Error::Numerical {
            message: format!("adaptive Simpson did not converge on [{a}, {b}]"),
            achieved,
        });
    }
    Ok(Integral { value, error })
}

struct Panel {
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
}

fn simpson<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32, exhausted: &mut bool) -> (f64, f64) {
    let mid = 0.5 * (p.lo + p.hi);
    let lm = 0.5 * (p.lo + mid);
    let rm = 0.5 * (mid + p.hi);
    let (flm, frm) = (f(lm), f(rm));
    let left = (mid - p.lo) / 6.0 * (p.flo + 4.0 * flm + p.fmid);
    let right = (p.hi - mid) / 6.0 * (p.fmid + 4.0 * frm + p.fhi);
    let diff = left + right - p.whole;
    if diff.abs() <= 15.0 * tol || depth == 0 {
        if depth == 0 && diff.abs() > 15.0 * tol {
            *exhausted = true;
        }
        return (left + right + diff / 15.0, diff.abs() / 15.0);
    }
    let (lv, le) = simpson(
        f,
        Panel { lo: p.lo, hi: mid, flo: p.flo, fmid: flm, fhi: p.fmid, whole: left },
        0.5 * tol,
        depth - 1,
        exhausted,
    );
    let (rv, re) = simpson(
        f,
        Panel { lo: mid, hi: p.hi, flo: p.fmid, fmid: frm, fhi: p.fhi, whole: right },
        0.5 * tol,
        depth - 1,
        exhausted,
    );
    (lv + rv, le + re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_transcendentals() {
        let r = integrate(|x| x * x * x - x, 0.0, 2.0, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn kinked_integrand() {
        let r = integrate(|x: f64| (x - 0.3).abs(), -1.0, 1.0, 1e-9).unwrap();
        assert!((r.value - (1.3f64.powi(2) + 0.7f64.powi(2)) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_interval_is_rejected() {
        assert!(integrate(|x| x, 1.0, 1.0, 1e-6).is_err());
    }
}
