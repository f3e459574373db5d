//! Consistency error of the scheme on smooth test functions.

use gscheme::bounds::{consistency_bound, consistency_error, BoundVariant};
use gscheme::testfn::{CubicSpline, GaussianBump, Sine, SmoothTestFunction};
use gscheme::uncertainty::builtin;

fn main() -> gscheme::Result<()> {
    let u = builtin::bsb(0.05, &builtin::sigma_grid(0.1, 0.3, 33))?;
    let m = u.validate();
    let points: Vec<Vec<f64>> = (0..=160).map(|i| vec![-4.0 + 0.05 * i as f64]).collect();
    let psis: [&dyn SmoothTestFunction; 3] = [&GaussianBump, &Sine, &CubicSpline];

    for psi in psis {
        println!("{}", psi.name());
        for k in 2..=10 {
            let delta = 0.5f64.powi(k);
            let e = consistency_error(&u, delta, psi, &points)?;
            let b = consistency_bound(&m, &psi.norms(), delta, BoundVariant::Prop51II)?;
            println!("  Δ = 2^-{k:<2} error {e:.3e}  bound {b:.3e}");
        }
    }
    Ok(())
}
