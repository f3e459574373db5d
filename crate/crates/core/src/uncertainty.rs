//! Sublinear expectations represented as maxima over finite families of
//! discrete joint laws of the pair `(X, Y)`.
//!
//! Every expectation in this module is exact: a family is a finite list of
//! finitely supported measures and `Ê[f]` is the largest of the weighted atom
//! sums. Continuum families (e.g. a volatility interval) are discretised by the
//! caller; see [`builtin`].

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a measure.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Tolerance used for the componentwise zero-mean test of `X`.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// One realisation of `(X, Y)` with its probability weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: f64,
}

impl Atom {
    pub fn new(x: Vec<f64>, y: Vec<f64>, p: f64) -> Self {
        Self { x, y, p }
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(x: f64, y: f64, p: f64) -> Self {
        Self {
            x: vec![x],
            y: vec![y],
            p,
        }
    }
}

/// A finitely supported probability measure on `ℝ^d × ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    /// Builds a measure without checking it; [`UncertaintySet::new`] validates.
    pub fn new(atoms: Vec<Atom>) -> Self {
        Self { atoms }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.p).sum()
    }

    /// Linear expectation of `f(x, y)` under this measure.
    pub fn expect<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64], &[f64]) -> f64,
    {
        self.atoms.iter().map(|a| a.p * f(&a.x, &a.y)).sum()
    }

    fn mean_x(&self, dim: usize) -> Vec<f64> {
        let mut m = vec![0.0; dim];
        for a in &self.atoms {
            for (mi, xi) in m.iter_mut().zip(&a.x) {
                *mi += a.p * xi;
            }
        }
        m
    }

    /// Componentwise mean of `Y` under this measure.
    pub fn mean_y(&self) -> Vec<f64> {
        let dim = self.atoms.first().map_or(0, |a| a.y.len());
        let mut m = vec![0.0; dim];
        for a in &self.atoms {
            for (mi, yi) in m.iter_mut().zip(&a.y) {
                *mi += a.p * yi;
            }
        }
        m
    }
}

/// A finite, validated family of discrete measures sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintySet {
    measures: Vec<DiscreteMeasure>,
    dim: usize,
    no_mean_uncertainty: bool,
}

impl UncertaintySet {
    /// Validates and builds a family.
    ///
    /// Measures whose mass is within [`WEIGHT_TOLERANCE`] of one are
    /// renormalised, except that masses within a few ulps of one are kept as
    /// given so that rebuilding a family leaves it unchanged; anything further
    /// off is rejected. All violations are
    /// collected into a single [`Error::Validation`].
    pub fn new(measures: Vec<DiscreteMeasure>) -> Result<Self> {
        let mut problems = Vec::new();
        if measures.is_empty() {
            problems.push("family has no measures".to_string());
        }
        let dim = measures
            .iter()
            .flat_map(|m| m.atoms.first())
            .map(|a| a.x.len())
            .next()
            .unwrap_or(0);
        if dim == 0 && !measures.is_empty() {
            problems.push("dimension must be positive".to_string());
        }
        let mut measures = measures;
        for (mi, m) in measures.iter_mut().enumerate() {
            if m.atoms.is_empty() {
                problems.push(format!("measure {mi} has no atoms"));
                continue;
            }
            for (ai, a) in m.atoms.iter().enumerate() {
                if a.x.len() != dim || a.y.len() != dim {
                    problems.push(format!(
                        "measure {mi} atom {ai}: dimension mismatch (x has {}, y has {}, expected {dim})",
                        a.x.len(),
                        a.y.len()
                    ));
                }
                if !(a.p >= 0.0) || !a.p.is_finite() {
                    problems.push(format!("measure {mi} atom {ai}: weight {} is not a nonnegative number", a.p));
                }
                if a.x.iter().chain(&a.y).any(|v| !v.is_finite()) {
                    problems.push(format!("measure {mi} atom {ai}: non-finite coordinate"));
                }
            }
            let mass = m.total_mass();
            if (mass - 1.0).abs() > WEIGHT_TOLERANCE {
                problems.push(format!("measure {mi}: weights sum to {mass}, not 1"));
            } else if (mass - 1.0).abs() > 8.0 * f64::EPSILON {
                for a in &mut m.atoms {
                    a.p /= mass;
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let no_mean_uncertainty = measures
            .iter()
            .all(|m| m.mean_x(dim).iter().all(|v| v.abs() <= MEAN_TOLERANCE));
        Ok(Self {
            measures,
            dim,
            no_mean_uncertainty,
        })
    }

    pub fn measures(&self) -> &[DiscreteMeasure] {
        &self.measures
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True iff every measure has `E[X] = 0`, so that `Ê[X] = Ê[-X] = 0`.
    pub fn no_mean_uncertainty(&self) -> bool {
        self.no_mean_uncertainty
    }

    /// Returns a new family with `other`'s measures appended.
    pub fn extended(&self, other: &UncertaintySet) -> Result<Self> {
        let mut measures = self.measures.clone();
        measures.extend(other.measures.iter().cloned());
        Self::new(measures)
    }

    pub fn max_abs_x(&self) -> f64 {
        self.fold_atoms(|a| norm(&a.x))
    }

    pub fn max_abs_y(&self) -> f64 {
        self.fold_atoms(|a| norm(&a.y))
    }

    fn fold_atoms(&self, f: impl Fn(&Atom) -> f64) -> f64 {
        self.measures
            .iter()
            .flat_map(|m| &m.atoms)
            .map(f)
            .fold(0.0, f64::max)
    }

    /// Moments and flags needed by the error constants, with `α = 1`.
    pub fn validate(&self) -> MomentReport {
        self.moment_report(1.0)
    }

    /// Like [`validate`](Self::validate) with a caller-supplied Hölder exponent
    /// `α` for `M_X^{2+α}`.
    pub fn moment_report(&self, alpha: f64) -> MomentReport {
        let lin = |f: &dyn Fn(&Atom) -> f64| -> f64 {
            self.measures
                .iter()
                .map(|m| m.atoms.iter().map(|a| a.p * f(a)).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let nx = |a: &Atom| norm(&a.x);
        let ny = |a: &Atom| norm(&a.y);
        MomentReport {
            dimension: self.dim,
            alpha,
            m_x2: lin(&|a| nx(a).powi(2)),
            m_x3: lin(&|a| nx(a).powi(3)),
            m_x4: lin(&|a| nx(a).powi(4)),
            m_x_2plusalpha: lin(&|a| nx(a).powf(2.0 + alpha)),
            m_y1: lin(&|a| ny(a)),
            m_y2: lin(&|a| ny(a).powi(2)),
            sigma_lower_sq: -lin(&|a| -nx(a).powi(2)),
            no_mean_uncertainty: self.no_mean_uncertainty,
        }
    }

    /// Parses the plain-text measure file format.
    ///
    /// ```text
    /// d=1 measures=2
    /// 0 0.1 0 0.5
    /// 0 -0.1 0 0.5
    /// 1 0.3 0 0.5
    /// 1 -0.3 0 0.5
    /// ```
    /// Each data line is `measure_index x_1..x_d y_1..y_d p`. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn from_measure_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: "empty measure file".into(),
        })?;
        let mut dim = None;
        let mut count = None;
        for tok in header.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| Error::Parse {
                line: hline,
                message: format!("expected key=value, found `{tok}`"),
            })?;
            let parsed: usize = v.parse().map_err(|_| Error::Parse {
                line: hline,
                message: format!("`{v}` is not a nonnegative integer"),
            })?;
            match k {
                "d" => dim = Some(parsed),
                "measures" => count = Some(parsed),
                _ => {
                    return Err(Error::Parse {
                        line: hline,
                        message: format!("unknown header key `{k}`"),
                    })
                }
            }
        }
        let (dim, count) = match (dim, count) {
            (Some(d), Some(c)) if d > 0 => (d, c),
            _ => {
                return Err(Error::Parse {
                    line: hline,
                    message: "header must be `d=<int> measures=<int>` with d > 0".into(),
                })
            }
        };
        let mut atoms: Vec<Vec<Atom>> = vec![Vec::new(); count];
        for (ln, line) in lines {
            let nums: Vec<&str> = line.split_whitespace().collect();
            if nums.len() != 2 * dim + 2 {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("expected {} fields, found {}", 2 * dim + 2, nums.len()),
                });
            }
            let idx: usize = nums[0].parse().map_err(|_| Error::Parse {
                line: ln,
                message: format!("bad measure index `{}`", nums[0]),
            })?;
            if idx >= count {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("measure index {idx} out of range (measures={count})"),
                });
            }
            let vals = nums[1..]
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        line: ln,
                        message: format!("`{s}` is not a number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            atoms[idx].push(Atom::new(
                vals[..dim].to_vec(),
                vals[dim..2 * dim].to_vec(),
                vals[2 * dim],
            ));
        }
        Self::new(atoms.into_iter().map(DiscreteMeasure::new).collect())
    }

    /// Serialises to the measure file format; floats round-trip exactly.
    pub fn to_measure_string(&self) -> String {
        let mut out = format!("d={} measures={}\n", self.dim, self.measures.len());
        for (mi, m) in self.measures.iter().enumerate() {
            for a in &m.atoms {
                let _ = write!(out, "{mi}");
                for v in a.x.iter().chain(&a.y) {
                    let _ = write!(out, " {v}");
                }
                let _ = writeln!(out, " {}", a.p);
            }
        }
        out
    }

    pub fn read_measure_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_measure_str(&text)
    }

    pub fn write_measure_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_measure_string()).map_err(|e| Error::io(path, e))
    }
}

/// Moments of `X` and `Y` under the sublinear expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub dimension: usize,
    /// Exponent used for `m_x_2plusalpha`.
    pub alpha: f64,
    pub m_x2: f64,
    pub m_x3: f64,
    pub m_x4: f64,
    pub m_x_2plusalpha: f64,
    pub m_y1: f64,
    pub m_y2: f64,
    /// `σ̲² = -Ê[-|X|²]`.
    pub sigma_lower_sq: f64,
    pub no_mean_uncertainty: bool,
}

impl MomentReport {
    /// Report for `X ≡ 0`, `Y ≡ 0`.
    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension,
            alpha: 1.0,
            m_x2: 0.0,
            m_x3: 0.0,
            m_x4: 0.0,
            m_x_2plusalpha: 0.0,
            m_y1: 0.0,
            m_y2: 0.0,
            sigma_lower_sq: 0.0,
            no_mean_uncertainty: true,
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    if v.len() == 1 {
        v[0].abs()
    } else {
        v.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// `Ê[f(X, Y)]`: the largest linear expectation over the family.
///
/// Ties go to the first measure in family order.
pub fn sublinear_expect<F>(u: &UncertaintySet, f: F) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    sublinear_expect_argmax(u, f).map(|(v, _)| v)
}

/// Same as [`sublinear_expect`] but also returns the index of the maximising measure.
pub fn sublinear_expect_argmax<F>(u: &UncertaintySet, f: F) -> Result<(f64, usize)>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (mi, m) in u.measures.iter().enumerate() {
        let mut acc = 0.0;
        for (ai, a) in m.atoms.iter().enumerate() {
            let v = f(&a.x, &a.y);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!(
                    "non-finite value {v} at measure {mi} atom {ai} (x={:?}, y={:?})",
                    a.x, a.y
                )));
            }
            acc += a.p * v;
        }
        if acc > best {
            best = acc;
            arg = mi;
        }
    }
    Ok((best, arg))
}

/// Which component a moment refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    X,
    Y,
}

/// `Ê[|X|^p]` or `Ê[|Y|^p]`.
pub fn moment(u: &UncertaintySet, which: Component, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::arg(format!("moment order must be positive, got {p}")));
    }
    sublinear_expect(u, |x, y| match which {
        Component::X => norm(x).powf(p),
        Component::Y => norm(y).powf(p),
    })
}

/// `G(p, A) = Ê[⟨p, Y⟩ + ½⟨AX, X⟩]`; `a` is the row-major `d × d` matrix.
pub fn g_function(u: &UncertaintySet, p: &[f64], a: &[f64]) -> Result<f64> {
    let d = u.dim;
    if p.len() != d || a.len() != d * d {
        return Err(Error::arg(format!(
            "G expects p of length {d} and a {d}x{d} matrix"
        )));
    }
    for i in 0..d {
        for j in 0..i {
            if (a[i * d + j] - a[j * d + i]).abs() > 1e-12 {
                return Err(Error::arg(format!("matrix is not symmetric at ({i},{j})")));
            }
        }
    }
    sublinear_expect(u, |x, y| {
        let lin: f64 = p.iter().zip(y).map(|(pi, yi)| pi * yi).sum();
        let mut quad = 0.0;
        for i in 0..d {
            for j in 0..d {
                quad += a[i * d + j] * x[i] * x[j];
            }
        }
        lin + 0.5 * quad
    })
}

/// Ready-made one-dimensional families covering the standard experiments.
pub mod builtin {
    use super::*;

    /// Uniform grid of `n` points on `[lo, hi]`, both endpoints included.
    pub fn sigma_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![lo];
        }
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    /// One measure per `σ`, each with atoms `X = ±σ` w.p. ½ and `Y = 0`.
    pub fn pm_sigma(sigmas: &[f64]) -> Result<UncertaintySet> {
        UncertaintySet::new(
            sigmas
                .iter()
                .map(|&s| {
                    DiscreteMeasure::new(vec![Atom::scalar(s, 0.0, 0.5), Atom::scalar(-s, 0.0, 0.5)])
                })
                .collect(),
        )
    }

    /// Volatility-uncertainty family: `X = ±σ` w.p. ½ and `Y = r − ½X²`, for
    /// each `σ` of the grid.
    pub fn bsb(r: f64, sigmas: &[f64]) -> Result<UncertaintySet> {
        UncertaintySet::new(
            sigmas
                .iter()
                .map(|&s| {
                    let y = r - 0.5 * s * s;
                    DiscreteMeasure::new(vec![Atom::scalar(s, y, 0.5), Atom::scalar(-s, y, 0.5)])
                })
                .collect(),
        )
    }

    /// Mean-uncertainty family with `X ≡ 0`: for each `θ` in `means`, a
    /// measure with `Y = θ ± spread` w.p. ½.
    pub fn lln_box(means: &[f64], spread: f64) -> Result<UncertaintySet> {
        UncertaintySet::new(
            means
                .iter()
                .map(|&m| {
                    DiscreteMeasure::new(vec![
                        Atom::scalar(0.0, m - spread, 0.5),
                        Atom::scalar(0.0, m + spread, 0.5),
                    ])
                })
                .collect(),
        )
    }

    /// `X ≡ 0`, `Y ≡ q`.
    pub fn deterministic(q: f64) -> Result<UncertaintySet> {
        UncertaintySet::new(vec![DiscreteMeasure::new(vec![Atom::scalar(0.0, q, 1.0)])])
    }

    /// `X ≡ 0`, `Y ≡ 0`.
    pub fn zero() -> Result<UncertaintySet> {
        deterministic(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;

    fn relu(x: f64) -> f64 {
        x.max(0.0)
    }

    #[test]
    fn constant_is_preserved() {
        let u = pm_sigma(&[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(sublinear_expect(&u, |_, _| 3.25).unwrap(), 3.25);
    }

    #[test]
    fn symmetric_two_point_second_moment() {
        let u = pm_sigma(&[1.0]).unwrap();
        assert_eq!(sublinear_expect(&u, |x, _| x[0] * x[0]).unwrap(), 1.0);
    }

    #[test]
    fn max_over_three_sigmas() {
        let u = pm_sigma(&[0.1, 0.2, 0.3]).unwrap();
        // brute force: each measure gives σ², the largest is 0.09
        let brute = [0.1f64, 0.2, 0.3]
            .iter()
            .map(|s| 0.5 * s * s + 0.5 * s * s)
            .fold(f64::NEG_INFINITY, f64::max);
        let v = sublinear_expect(&u, |x, _| x[0] * x[0]).unwrap();
        assert!((v - brute).abs() < 1e-15);
        assert!((v - 0.09).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_first_on_ties() {
        let u = pm_sigma(&[0.2, 0.2]).unwrap();
        let (_, arg) = sublinear_expect_argmax(&u, |x, _| x[0] * x[0]).unwrap();
        assert_eq!(arg, 0);
    }

    #[test]
    fn non_finite_value_names_the_atom() {
        let u = pm_sigma(&[0.1, 0.3]).unwrap();
        let err = sublinear_expect(&u, |x, _| if x[0] < -0.2 { f64::NAN } else { 0.0 }).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("measure 1 atom 1"), "{msg}");
    }

    #[test]
    fn moments_of_families() {
        assert_eq!(moment(&zero().unwrap(), Component::X, 2.0).unwrap(), 0.0);
        let u = pm_sigma(&[0.1, 0.3]).unwrap();
        assert!((moment(&u, Component::X, 2.0).unwrap() - 0.09).abs() < 1e-15);
        let b = bsb(0.05, &[0.1, 0.3]).unwrap();
        // |r − σ²/2| for σ = 0.1, 0.3: 0.045 and 0.005
        assert!((moment(&b, Component::Y, 1.0).unwrap() - 0.045).abs() < 1e-15);
        assert!(moment(&u, Component::X, 0.0).is_err());
        assert!(moment(&u, Component::X, -1.0).is_err());
    }

    #[test]
    fn g_function_values() {
        let sig = sigma_grid(0.1, 0.3, 33);
        let u = bsb(0.05, &sig).unwrap();
        assert_eq!(g_function(&u, &[0.0], &[0.0]).unwrap(), 0.0);
        // brute force over the σ grid of (r − σ²/2)p + σ²A/2
        let brute = |p: f64, a: f64| {
            sig.iter()
                .map(|s| (0.05 - 0.5 * s * s) * p + 0.5 * s * s * a)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let g01 = g_function(&u, &[0.0], &[1.0]).unwrap();
        assert!((g01 - brute(0.0, 1.0)).abs() < 1e-15);
        assert!((g01 - 0.045).abs() < 1e-15);
        let g10 = g_function(&u, &[1.0], &[0.0]).unwrap();
        assert!((g10 - brute(1.0, 0.0)).abs() < 1e-15);
        assert!((g10 - 0.045).abs() < 1e-15);
    }

    #[test]
    fn g_rejects_asymmetric_matrix() {
        let u = UncertaintySet::new(vec![DiscreteMeasure::new(vec![Atom::new(
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            1.0,
        )])])
        .unwrap();
        assert!(g_function(&u, &[0.0, 0.0], &[1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(g_function(&u, &[0.0, 0.0], &[1.0, 0.5, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn validate_reports_moments_and_flags() {
        let r = pm_sigma(&[0.1, 0.3]).unwrap().validate();
        assert!(r.no_mean_uncertainty);
        assert!((r.m_x2 - 0.09).abs() < 1e-15);
        assert!((r.sigma_lower_sq - 0.01).abs() < 1e-15);
        assert!(r.m_y1 <= r.m_y2.sqrt() + 1e-15);

        let one = UncertaintySet::new(vec![DiscreteMeasure::new(vec![Atom::scalar(1.0, 0.0, 1.0)])]).unwrap();
        assert!(!one.no_mean_uncertainty());

        let r = deterministic(-0.7).unwrap().validate();
        assert_eq!(r.m_x3, 0.0);
        assert!((r.m_y1 - 0.7).abs() < 1e-15);
    }

    #[test]
    fn validation_lists_every_violation() {
        let bad = vec![
            DiscreteMeasure::new(vec![Atom::scalar(1.0, 0.0, 0.3)]),
            DiscreteMeasure::new(vec![Atom::new(vec![1.0, 2.0], vec![0.0, 0.0], 1.0)]),
            DiscreteMeasure::new(vec![]),
        ];
        match UncertaintySet::new(bad) {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("expected validation error, got {other:?}"),
        }
        assert!(matches!(UncertaintySet::new(vec![]), Err(Error::Validation(_))));
    }

    #[test]
    fn near_unit_mass_is_renormalised() {
        let m = DiscreteMeasure::new(vec![
            Atom::scalar(1.0, 0.0, 0.5 + 2e-13),
            Atom::scalar(-1.0, 0.0, 0.5),
        ]);
        let u = UncertaintySet::new(vec![m]).unwrap();
        assert!((u.measures()[0].total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measure_file_round_trip() {
        let u = bsb(0.05, &[0.1, 0.2 + 1e-17, 0.3]).unwrap();
        let text = u.to_measure_string();
        assert!(text.starts_with("d=1 measures=3\n"));
        let back = UncertaintySet::from_measure_str(&text).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn measure_file_errors() {
        assert!(UncertaintySet::from_measure_str("").is_err());
        assert!(UncertaintySet::from_measure_str("d=1 measures=1\n0 1 0\n").is_err());
        assert!(UncertaintySet::from_measure_str("d=1 measures=1\n3 1 0 1\n").is_err());
        let ok = UncertaintySet::from_measure_str("# comment\nd=1 measures=1\n\n0 1 0 0.5\n0 -1 0 0.5\n").unwrap();
        assert!((sublinear_expect(&ok, |x, _| relu(x[0])).unwrap() - 0.5).abs() < 1e-15);
    }
}
