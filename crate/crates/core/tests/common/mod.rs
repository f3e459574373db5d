#![allow(dead_code)]

use gscheme::{Atom, DiscreteMeasure, UncertaintySet};
use rand::Rng;

/// Random probability vector of length `k` summing to one.
pub fn weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s).collect()
}

/// Family of `m` measures with up to `max_atoms` atoms each in dimension `d`.
/// With `centred`, every measure has `E[X] = 0`.
pub fn random_family<R: Rng>(
    rng: &mut R,
    d: usize,
    m: usize,
    max_atoms: usize,
    x_scale: f64,
    y_scale: f64,
    centred: bool,
) -> UncertaintySet {
    let measures = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=max_atoms);
            let p = weights(rng, k);
            let mut xs: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| rng.gen_range(-x_scale..=x_scale)).collect())
                .collect();
            if centred {
                for a in 0..d {
                    let mean: f64 = xs.iter().zip(&p).map(|(x, w)| w * x[a]).sum();
                    for x in &mut xs {
                        x[a] -= mean;
                    }
                }
            }
            DiscreteMeasure::new(
                xs.into_iter()
                    .zip(p)
                    .map(|(x, w)| {
                        let y = (0..d).map(|_| rng.gen_range(-y_scale..=y_scale)).collect();
                        Atom::new(x, y, w)
                    })
                    .collect(),
            )
        })
        .collect();
    UncertaintySet::new(measures).expect("random family is valid")
}

/// Smooth one-dimensional test function `a sin(bx + c) + e·exp(−x²)`.
#[derive(Debug, Clone, Copy)]
pub struct Wave {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
}

impl Wave {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Self {
            a: rng.gen_range(-1.0..1.0),
            b: rng.gen_range(0.5..3.0),
            c: rng.gen_range(0.0..6.3),
            e: rng.gen_range(-1.0..1.0),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.a * (self.b * x + self.c).sin() + self.e * (-x * x).exp()
    }
}
