mod common;

use std::sync::Arc;

use gscheme::analysis::{estimate_modulus, ModulusKind};
use gscheme::bounds::compute_constants;
use gscheme::scheme::{forward_operator, scheme_residual, solve_grid, solve_lattice, Grid, GridFunction, SchemeConfig};
use gscheme::UncertaintySet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_family, Wave};

fn setup(seed: u64, nodes: usize) -> (UncertaintySet, SchemeConfig, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=3);
    let u = random_family(&mut rng, 1, m, 3, 1.0, 1.0, true);
    let delta = rng.gen_range(0.01..0.5);
    let cfg = SchemeConfig::new(delta, 1.0, Grid::line(-3.0, 3.0, nodes).unwrap()).unwrap();
    (u, cfg, rng)
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_operator_is_monotone(seed in any::<u64>()) {
        let (u, cfg, mut rng) = setup(seed, 121);
        let g = Arc::clone(cfg.grid());
        let v = random_values(&mut rng, g.len());
        let w: Vec<f64> = v.iter().map(|x| x + rng.gen_range(0.0..0.5)).collect();
        let sv = forward_operator(&u, &cfg, &GridFunction::new(g.clone(), v, 0.0).unwrap()).unwrap();
        let sw = forward_operator(&u, &cfg, &GridFunction::new(g, w, 0.0).unwrap()).unwrap();
        for (a, b) in sv.values().iter().zip(sw.values()) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn residual_is_concave(seed in any::<u64>(), lambda in 0.0..=1.0f64) {
        let (u, cfg, mut rng) = setup(seed, 61);
        let g = Arc::clone(cfg.grid());
        let v1 = random_values(&mut rng, g.len());
        let v2 = random_values(&mut rng, g.len());
        let mix: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let (p1, p2): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let f1 = GridFunction::new(g.clone(), v1, 0.0).unwrap();
        let f2 = GridFunction::new(g.clone(), v2, 0.0).unwrap();
        let fm = GridFunction::new(g.clone(), mix, 0.0).unwrap();
        for node in (0..g.len()).step_by(7) {
            let lhs = scheme_residual(&u, &cfg, node, lambda * p1 + (1.0 - lambda) * p2, &fm).unwrap();
            let rhs = lambda * scheme_residual(&u, &cfg, node, p1, &f1).unwrap()
                + (1.0 - lambda) * scheme_residual(&u, &cfg, node, p2, &f2).unwrap();
            prop_assert!(lhs >= rhs - 1e-9 / cfg.delta(), "{lhs} < {rhs}");
        }
    }

    #[test]
    fn solutions_stay_above_the_initial_minimum(seed in any::<u64>()) {
        let (u, cfg, mut rng) = setup(seed, 241);
        let w = Wave::random(&mut rng);
        let sol = solve_grid(&u, &cfg, |x| w.eval(x[0])).unwrap();
        let lo = sol.steps()[0].min();
        for s in sol.steps() {
            prop_assert!(s.min() >= lo - 1e-12);
        }
        let n = cfg.n_steps().min(4);
        let lat = solve_lattice(&u, cfg.delta(), n, &[0.2], |x| w.eval(x[0]), None).unwrap();
        let reach = n as f64 * (cfg.delta().sqrt() * u.max_abs_x() + cfg.delta() * u.max_abs_y());
        let samples = 20_000;
        let sampled_min = (0..=samples)
            .map(|i| w.eval(0.2 - reach + 2.0 * reach * i as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min);
        // sampling overestimates the minimum by at most Lipschitz × half a cell
        let lip = w.a.abs() * w.b + w.e.abs();
        prop_assert!(lat.value >= sampled_min - lip * reach / samples as f64 - 1e-12);
    }

    #[test]
    fn piecewise_constant_in_time(seed in any::<u64>(), frac in 0.0..0.999f64) {
        let (u, cfg, mut rng) = setup(seed, 61);
        let w = Wave::random(&mut rng);
        let sol = solve_grid(&u, &cfg, |x| w.eval(x[0])).unwrap();
        let n = rng.gen_range(0..=cfg.n_steps());
        let t0 = n as f64 * cfg.delta();
        let t1 = t0 + frac * cfg.delta();
        prop_assert_eq!(sol.at(t0).values(), sol.at(t1).values());
    }

    #[test]
    fn space_modulus_of_lipschitz_data(seed in any::<u64>()) {
        let (u, cfg, _) = setup(seed, 301);
        let sol = solve_grid(&u, &cfg, |x| x[0].abs().min(1.0)).unwrap();
        let h = cfg.grid().max_spacing();
        let r = estimate_modulus(&sol, ModulusKind::Space, 1.0, 1.0, 1.0, 2.0 * h).unwrap();
        prop_assert!(r.passed, "{r:?}");
    }

    #[test]
    fn time_modulus_of_lipschitz_data(seed in any::<u64>()) {
        let (u, cfg, _) = setup(seed, 301);
        let sol = solve_grid(&u, &cfg, |x| x[0].abs().min(1.0)).unwrap();
        let k0 = compute_constants(&u.validate(), 1.0, 1.0, 1.0).unwrap().k0;
        let h = cfg.grid().max_spacing();
        let r = estimate_modulus(&sol, ModulusKind::Time { k0 }, 1.0, 1.0, 1.0, 2.0 * h).unwrap();
        prop_assert!(r.passed, "{r:?}");
    }
}

#[test]
fn grid_approaches_lattice() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let m = rng.gen_range(1..=3);
        let u = random_family(&mut rng, 1, m, 3, 1.0, 0.5, true);
        let delta = rng.gen_range(0.05..0.3);
        let n = rng.gen_range(1..=5);
        let w = Wave::random(&mut rng);
        let exact = solve_lattice(&u, delta, n, &[0.1], |x| w.eval(x[0]), None).unwrap().value;
        let errs: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&h| {
                let grid = Grid::centered(&[0.1], 4.0, h).unwrap();
                let cfg = SchemeConfig::new(delta, n as f64 * delta, grid).unwrap();
                let sol = solve_grid(&u, &cfg, |x| w.eval(x[0])).unwrap();
                (sol.final_step().interpolate(&[0.1]) - exact).abs()
            })
            .collect();
        // bounded by C h with C fitted on the coarsest spacing
        let c = errs[0] / 4e-3;
        for (e, h) in errs.iter().zip([4e-3, 2e-3, 1e-3]) {
            assert!(*e <= c * h + 1e-12, "{errs:?}");
        }
        assert!(errs[2] < 1e-3);
    }
}
