//! Smooth test functions with analytic derivatives, and builtin initial data.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Sup-norms and Hölder seminorms of a test function that the consistency
/// bounds may ask for. `None` means "not supplied".
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PsiNorms {
    /// `|D²ψ|₀`
    pub d2: Option<f64>,
    /// `|D³ψ|₀`
    pub d3: Option<f64>,
    /// `|D⁴ψ|₀`
    pub d4: Option<f64>,
    /// `[D²ψ]_{C^α}` for the exponent carried by the moment report.
    pub d2_holder: Option<f64>,
    /// `[∂_t ψ]_{C^{α/2,α}}`
    pub dt_holder: Option<f64>,
    /// `|∂²_t ψ|₀`
    pub dt2: Option<f64>,
    /// `|∂_t D²ψ|₀`
    pub dt_d2: Option<f64>,
    /// `|∂_t Dψ|₀`
    pub dt_d1: Option<f64>,
}

impl PsiNorms {
    /// Norms of a time-independent function: every time derivative vanishes.
    pub fn stationary(d2: Option<f64>, d3: Option<f64>, d4: Option<f64>) -> Self {
        Self {
            d2,
            d3,
            d4,
            d2_holder: None,
            dt_holder: Some(0.0),
            dt2: Some(0.0),
            dt_d2: Some(0.0),
            dt_d1: Some(0.0),
        }
    }
}

/// A function on `ℝ^d` that can report its gradient and Hessian.
///
/// The default derivative methods return `None`; consumers that need them
/// fail with an argument error.
pub trait SmoothTestFunction: Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Row-major `d × d` Hessian.
    fn hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn norms(&self) -> PsiNorms {
        PsiNorms::default()
    }
}

/// `exp(−x²/2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianBump;

impl SmoothTestFunction for GaussianBump {
    fn name(&self) -> &str {
        "gaussian-bump"
    }
    fn value(&self, x: &[f64]) -> f64 {
        (-0.5 * x[0] * x[0]).exp()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![-x[0] * self.value(x)])
    }
    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![(x[0] * x[0] - 1.0) * self.value(x)])
    }
    fn norms(&self) -> PsiNorms {
        // |D³| peaks at x² = 3 − √6, |D²| and |D⁴| at x = 0
        let s6 = 6f64.sqrt();
        let x2 = 3.0 - s6;
        let d3 = x2.sqrt() * s6 * (-0.5 * x2).exp();
        PsiNorms::stationary(Some(1.0), Some(d3), Some(3.0))
    }
}

/// `sin x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sine;

impl SmoothTestFunction for Sine {
    fn name(&self) -> &str {
        "sin"
    }
    fn value(&self, x: &[f64]) -> f64 {
        x[0].sin()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![x[0].cos()])
    }
    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![-x[0].sin()])
    }
    fn norms(&self) -> PsiNorms {
        let mut n = PsiNorms::stationary(Some(1.0), Some(1.0), Some(1.0));
        n.d2_holder = Some(1.0);
        n
    }
}

/// Centered cubic B-spline supported on `[−2, 2]`; `D²` is Lipschitz with
/// constant 3, so `|D³ψ|₀ = 3` in the a.e. sense and `D⁴` is unbounded.
#[derive(Debug, Clone, Copy, Default)]
pub struct CubicSpline;

impl SmoothTestFunction for CubicSpline {
    fn name(&self) -> &str {
        "cubic-spline"
    }
    fn value(&self, x: &[f64]) -> f64 {
        let a = x[0].abs();
        if a <= 1.0 {
            2.0 / 3.0 - a * a + 0.5 * a * a * a
        } else if a < 2.0 {
            (2.0 - a).powi(3) / 6.0
        } else {
            0.0
        }
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (a, s) = (x[0].abs(), x[0].signum());
        Some(vec![if a <= 1.0 {
            -2.0 * x[0] + 1.5 * x[0] * a
        } else if a < 2.0 {
            -s * 0.5 * (2.0 - a).powi(2)
        } else {
            0.0
        }])
    }
    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        let a = x[0].abs();
        Some(vec![if a <= 1.0 {
            -2.0 + 3.0 * a
        } else if a < 2.0 {
            2.0 - a
        } else {
            0.0
        }])
    }
    fn norms(&self) -> PsiNorms {
        PsiNorms::stationary(Some(2.0), Some(3.0), None)
    }
}

/// `½ x²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfSquare;

impl SmoothTestFunction for HalfSquare {
    fn name(&self) -> &str {
        "half-square"
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x[0] * x[0]
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![x[0]])
    }
    fn hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![1.0])
    }
    fn norms(&self) -> PsiNorms {
        PsiNorms::stationary(Some(1.0), Some(0.0), Some(0.0))
    }
}

/// `⟨a, x⟩ + b` on `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub slope: Vec<f64>,
    pub intercept: f64,
}

impl SmoothTestFunction for Affine {
    fn name(&self) -> &str {
        "affine"
    }
    fn dim(&self) -> usize {
        self.slope.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.intercept
    }
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(self.slope.clone())
    }
    fn hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.slope.len().pow(2)])
    }
    fn norms(&self) -> PsiNorms {
        PsiNorms::stationary(Some(0.0), Some(0.0), Some(0.0))
    }
}

/// Builtin one-dimensional initial data `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `x⁺`
    Relu,
    /// `min(x⁺, 1)`
    CappedRelu,
    /// `|x|`
    Abs,
    /// `x²` (lower bounded but not globally Hölder)
    Square,
    /// `(K − eˣ)⁺`
    LogPut { strike: f64 },
    Constant(f64),
}

impl InitialData {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialData::Relu => x.max(0.0),
            InitialData::CappedRelu => x.clamp(0.0, 1.0),
            InitialData::Abs => x.abs(),
            InitialData::Square => x * x,
            InitialData::LogPut { strike } => (strike - x.exp()).max(0.0),
            InitialData::Constant(c) => c,
        }
    }

    /// `(C_φ, β)` with `|φ(x) − φ(y)| ≤ C_φ|x − y|^β`, when one exists.
    pub fn holder(&self) -> Option<(f64, f64)> {
        match *self {
            InitialData::Relu | InitialData::CappedRelu | InitialData::Abs => Some((1.0, 1.0)),
            InitialData::Square => None,
            InitialData::LogPut { strike } => Some((strike, 1.0)),
            InitialData::Constant(_) => Some((0.0, 1.0)),
        }
    }

    pub fn lower_bound(&self) -> f64 {
        match *self {
            InitialData::Constant(c) => c,
            _ => 0.0,
        }
    }

    pub fn as_fn(self) -> impl Fn(&[f64]) -> f64 + Sync + Copy {
        move |x: &[f64]| self.eval(x[0])
    }
}

impl FromStr for InitialData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "relu" => InitialData::Relu,
            "capped-relu" => InitialData::CappedRelu,
            "abs" => InitialData::Abs,
            "square" => InitialData::Square,
            "log-put" => InitialData::LogPut { strike: 1.0 },
            "zero" => InitialData::Constant(0.0),
            other => {
                return Err(Error::arg(format!(
                    "unknown initial data `{other}` (expected relu, capped-relu, abs, square, log-put, zero)"
                )))
            }
        })
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}
