//! The scheme on the exact lattice and on an interpolating grid.

use gscheme::testfn::InitialData;
use gscheme::uncertainty::builtin;
use gscheme::{solve_grid, solve_lattice, Grid, SchemeConfig};

fn main() -> gscheme::Result<()> {
    let u = builtin::pm_sigma(&[0.1, 0.3])?;
    let phi = InitialData::CappedRelu;
    let delta = 1.0 / 64.0;
    let xs = [-0.2, 0.0, 0.2];

    let cfg = SchemeConfig::new(delta, 1.0, Grid::line(-3.0, 3.0, 2401)?)?;
    let grid = solve_grid(&u, &cfg, phi.as_fn())?;

    println!("{:>6} {:>14} {:>14} {:>10}", "x", "lattice", "grid", "gap");
    for x in xs {
        let exact = solve_lattice(&u, delta, cfg.n_steps(), &[x], phi.as_fn(), None)?.value;
        let approx = grid.value_at(1.0, &[x]);
        println!("{x:>6} {exact:>14.10} {approx:>14.10} {:>10.2e}", (exact - approx).abs());
    }

    let mid = grid.value_at(0.5, &[0.0]);
    println!("u(0.5, 0) = {mid:.10}");
    Ok(())
}
