mod common;

use gscheme::analysis::check_axioms;
use gscheme::{g_function, sublinear_expect, UncertaintySet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_family, Wave};

fn family(seed: u64, d: usize, m: usize) -> UncertaintySet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_family(&mut rng, d, m, 4, 2.0, 2.0, false)
}

fn wave(seed: u64) -> Wave {
    Wave::random(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed))
}

proptest! {
    #[test]
    fn axioms_hold(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=4, c in -10.0..10.0f64, lambda in 0.0..10.0f64) {
        let u = family(seed, d, m);
        let w = wave(seed);
        let f = |x: &[f64], y: &[f64]| w.eval(x.iter().sum::<f64>() - y.iter().sum::<f64>());
        let g = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let r = check_axioms(&u, f, g, c, lambda).unwrap();
        prop_assert!(r.worst() <= 1e-12, "{r:?}");
    }

    #[test]
    fn monotone_in_the_integrand(seed in any::<u64>(), d in 1usize..=3, shift in 0.0..1.0f64) {
        let u = family(seed, d, 3);
        let w = wave(seed);
        let f = |x: &[f64], _: &[f64]| w.eval(x[0]);
        let g = |x: &[f64], y: &[f64]| w.eval(x[0]) + shift * (1.0 + y[0].sin());
        prop_assert!(sublinear_expect(&u, f).unwrap() <= sublinear_expect(&u, g).unwrap());
    }

    #[test]
    fn growing_the_family_never_decreases(seed in any::<u64>(), d in 1usize..=2) {
        let u = family(seed, d, 2);
        let more = u.extended(&family(seed.wrapping_add(1), d, 2)).unwrap();
        let w = wave(seed);
        let f = |x: &[f64], y: &[f64]| w.eval(x[0] + y[0]);
        prop_assert!(sublinear_expect(&more, f).unwrap() >= sublinear_expect(&u, f).unwrap());
    }

    #[test]
    fn equals_the_largest_weighted_sum(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=5) {
        let u = family(seed, d, m);
        let w = wave(seed);
        let f = |x: &[f64], y: &[f64]| w.eval(x[0] * y[0] + x.len() as f64);
        let mut best = f64::NEG_INFINITY;
        for meas in u.measures() {
            let mut s = 0.0;
            for a in meas.atoms() {
                s += a.p * f(&a.x, &a.y);
            }
            best = best.max(s);
        }
        let e = sublinear_expect(&u, f).unwrap();
        prop_assert!((e - best).abs() <= 1e-14 * best.abs().max(1.0));
    }

    #[test]
    fn g_is_sublinear_in_its_arguments(seed in any::<u64>(), lambda in 0.0..5.0f64) {
        let u = family(seed, 2, 3);
        let p = [0.3, -1.1];
        let a = [1.0, 0.2, 0.2, -0.5];
        let q = [-0.7, 0.4];
        let b = [0.1, 0.0, 0.0, 2.0];
        let sum_p: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x + y).collect();
        let sum_a: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let g = |p: &[f64], a: &[f64]| g_function(&u, p, a).unwrap();
        prop_assert!(g(&sum_p, &sum_a) <= g(&p, &a) + g(&q, &b) + 1e-12);
        let sp: Vec<f64> = p.iter().map(|x| lambda * x).collect();
        let sa: Vec<f64> = a.iter().map(|x| lambda * x).collect();
        prop_assert!((g(&sp, &sa) - lambda * g(&p, &a)).abs() <= 1e-12 * (1.0 + lambda));
    }
}
