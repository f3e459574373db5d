//! Convergence of Ê[φ(S_n/√n)] to the G-normal expectation.

use gscheme::clt::clt_experiment;
use gscheme::oracles::{fine_grid_reference, FineGridOptions};
use gscheme::testfn::InitialData;
use gscheme::uncertainty::builtin;

fn main() -> gscheme::Result<()> {
    let u = builtin::pm_sigma(&[0.1, 0.3])?;
    let phi = InitialData::CappedRelu;
    let (c_phi, beta) = phi.holder().expect("capped relu is Lipschitz");

    let reference = fine_grid_reference(&u, phi.as_fn(), 1.0, &[0.0], FineGridOptions::default())?;
    println!("G-normal reference {:.10} ± {:.1e}", reference.value, reference.accuracy);

    let res = clt_experiment(&u, phi.as_fn(), c_phi, beta, &[2, 4, 8, 16, 32, 64], Some(&reference))?;
    print!("{}", res.csv_block());
    for note in &res.notes {
        println!("# {note}");
    }
    println!("{}", res.verdict("clt"));
    Ok(())
}
