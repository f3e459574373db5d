//! Discrete comparison between a sub- and a supersolution.

use gscheme::analysis::check_comparison;
use gscheme::scheme::solution_from_steps;
use gscheme::uncertainty::builtin;
use gscheme::{forward_operator, Grid, GridFunction, SchemeConfig};

fn main() -> gscheme::Result<()> {
    let u = builtin::pm_sigma(&[0.1, 0.3])?;
    let delta = 0.1;
    let cfg = SchemeConfig::new(delta, 1.0, Grid::line(-2.0, 2.0, 201)?)?;
    let nodes = cfg.grid().len();
    let h1 = vec![vec![-0.1; nodes]; cfg.n_steps()];
    let h2 = vec![vec![0.2; nodes]; cfg.n_steps()];

    let march = |start: GridFunction, h: &[Vec<f64>]| -> gscheme::Result<_> {
        let mut steps = vec![start];
        for hk in h {
            let s = forward_operator(&u, &cfg, steps.last().unwrap())?;
            let v = s.values().iter().zip(hk).map(|(a, f)| a + delta * f).collect();
            steps.push(GridFunction::new(cfg.grid().clone(), v, 0.0)?);
        }
        solution_from_steps(delta, steps)
    };
    let under = march(GridFunction::from_fn(cfg.grid().clone(), 0.0, |x| x[0].sin() - 0.05)?, &h1)?;
    let over = march(GridFunction::from_fn(cfg.grid().clone(), 0.0, |x| x[0].sin())?, &h2)?;

    let r = check_comparison(&u, &cfg, &under, &over, &h1, &h2)?;
    println!("comparison holds: {} (max violation {:.3e})", r.holds, r.max_violation);
    Ok(())
}
