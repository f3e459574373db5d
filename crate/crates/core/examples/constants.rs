//! Explicit constants of the error bounds.

use gscheme::bounds::{c_rho_published_bound, c_rho_report, compute_constants};
use gscheme::uncertainty::builtin;

fn main() -> gscheme::Result<()> {
    let u = builtin::pm_sigma(&[0.1, 0.3])?;
    let report = compute_constants(&u.validate(), 1.0, 1.0, 1.0)?;
    for (key, value) in report.entries() {
        println!("{key:>22} = {value}");
    }

    let rho = c_rho_report(1)?;
    println!("C_ρ = {:.6} (refined {:.6}, mollifier mass {:.12})", rho.value, rho.refined_value, rho.mass);
    println!("published bound 1000/e = {:.6}", c_rho_published_bound());
    Ok(())
}
