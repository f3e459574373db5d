//! Exact evaluation of the scheme on the recombining set of reachable points.
//!
//! A point reached after `m` steps is `x0 + Σ_j k_j d_j` where `d_j` runs over
//! the distinct per-step displacements `√Δ x + Δ y` and `k` is a multiset of
//! size `m`. Values are propagated backward over these multisets with no
//! spatial interpolation.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::uncertainty::UncertaintySet;

/// Default cap on the number of terminal multisets.
pub const DEFAULT_NODE_CAP: u64 = 2_000_000;

/// Terminal layer of the lattice together with its geometry.
#[derive(Debug, Clone)]
pub struct LatticeState {
    pub x0: Vec<f64>,
    /// Distinct per-step displacements, indexed like the multiset keys.
    pub displacements: Vec<Vec<f64>>,
    /// Multiset key (count of each displacement) → value.
    pub values: HashMap<Vec<u32>, f64>,
    pub step: usize,
}

impl LatticeState {
    /// Spatial point represented by `key`.
    pub fn position(&self, key: &[u32]) -> Vec<f64> {
        position(&self.x0, &self.displacements, key)
    }
}

#[derive(Debug, Clone)]
pub struct LatticeSolution {
    /// `u^Δ(nΔ, x0)`.
    pub value: f64,
    pub terminal: LatticeState,
}

/// Number of multisets of size `n` drawn from `k` kinds, `C(n+k−1, n)`,
/// saturating at `u128::MAX`.
pub fn multiset_count(n: usize, k: usize) -> u128 {
    if k == 0 {
        return u128::from(n == 0);
    }
    let r = (k - 1).min(n) as u128;
    let top = (n + k - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..r {
        c = match c.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

fn position(x0: &[f64], disp: &[Vec<f64>], key: &[u32]) -> Vec<f64> {
    let mut x = x0.to_vec();
    for (j, &k) in key.iter().enumerate() {
        if k > 0 {
            for (xa, da) in x.iter_mut().zip(&disp[j]) {
                *xa += f64::from(k) * da;
            }
        }
    }
    x
}

/// All multisets of size `m` over `k` kinds, as count vectors.
fn compositions(m: u32, k: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, slot: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot + 1 == cur.len() {
            cur[slot] = rest;
            out.push(cur.clone());
            return;
        }
        for c in (0..=rest).rev() {
            cur[slot] = c;
            rec(rest - c, slot + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; k];
    rec(m, 0, &mut cur, &mut out);
    out
}

/// Per measure, `(displacement index, weight)` pairs.
type MeasureWeights = Vec<Vec<(usize, f64)>>;

/// Distinct displacements and the weights each measure puts on them.
pub(crate) fn displacement_table(u: &UncertaintySet, delta: f64) -> (Vec<Vec<f64>>, MeasureWeights) {
    let sq = delta.sqrt();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut disp: Vec<Vec<f64>> = Vec::new();
    let mut per_measure = Vec::with_capacity(u.measures().len());
    for m in u.measures() {
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for a in m.atoms() {
            if a.p == 0.0 {
                continue;
            }
            let d: Vec<f64> = a.x.iter().zip(&a.y).map(|(x, y)| sq * x + delta * y).collect();
            let bits: Vec<u64> = d.iter().map(|v| (v + 0.0).to_bits()).collect();
            let j = *index.entry(bits).or_insert_with(|| {
                disp.push(d);
                disp.len() - 1
            });
            match merged.iter_mut().find(|(i, _)| *i == j) {
                Some(e) => e.1 += a.p,
                None => merged.push((j, a.p)),
            }
        }
        per_measure.push(merged);
    }
    (disp, per_measure)
}

/// Exact scheme value `u^Δ(nΔ, x0)` by backward recursion over the lattice.
///
/// `cap` bounds the number of terminal multisets (default
/// [`DEFAULT_NODE_CAP`]); larger problems should use the grid backend.
pub fn solve_lattice<F>(
    u: &UncertaintySet,
    delta: f64,
    n_steps: usize,
    x0: &[f64],
    phi: F,
    cap: Option<u64>,
) -> Result<LatticeSolution>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::arg(format!("time step must be positive, got {delta}")));
    }
    if x0.len() != u.dim() {
        return Err(Error::arg(format!(
            "base point has dimension {} but the family has dimension {}",
            x0.len(),
            u.dim()
        )));
    }
    let (disp, per_measure) = displacement_table(u, delta);
    let k = disp.len();
    let cap = cap.unwrap_or(DEFAULT_NODE_CAP);
    let count = multiset_count(n_steps, k);
    if count > u128::from(cap) {
        return Err(Error::Resource(format!(
            "lattice needs {count} terminal nodes ({k} distinct displacements, {n_steps} steps), cap is {cap}; use the grid backend"
        )));
    }

    let terminal_keys = compositions(n_steps as u32, k);
    let mut values: Vec<f64> = terminal_keys
        .par_iter()
        .map(|key| phi(&position(x0, &disp, key)))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!(
            "initial data is not finite at {:?}",
            position(x0, &disp, &terminal_keys[i])
        )));
    }
    let terminal = LatticeState {
        x0: x0.to_vec(),
        displacements: disp.clone(),
        values: terminal_keys.iter().cloned().zip(values.iter().copied()).collect(),
        step: n_steps,
    };

    let mut next_index: HashMap<Vec<u32>, usize> =
        terminal_keys.into_iter().enumerate().map(|(i, key)| (key, i)).collect();
    for m in (0..n_steps).rev() {
        let keys = compositions(m as u32, k);
        let level: Vec<f64> = keys
            .par_iter()
            .map(|key| {
                let mut child = key.clone();
                let mut best = f64::NEG_INFINITY;
                for atoms in &per_measure {
                    let mut acc = 0.0;
                    for &(j, p) in atoms {
                        child[j] += 1;
                        acc += p * values[next_index[&child]];
                        child[j] -= 1;
                    }
                    if acc > best {
                        best = acc;
                    }
                }
                best
            })
            .collect();
        next_index = keys.into_iter().enumerate().map(|(i, key)| (key, i)).collect();
        values = level;
    }
    Ok(LatticeSolution {
        value: values[0],
        terminal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::builtin::*;
    use crate::uncertainty::sublinear_expect;

    #[test]
    fn multiset_counts() {
        assert_eq!(multiset_count(3, 2), 4);
        assert_eq!(multiset_count(2, 3), 6);
        assert_eq!(multiset_count(0, 5), 1);
        assert_eq!(multiset_count(64, 4), 47905);
        assert_eq!(compositions(3, 3).len(), 10);
    }

    #[test]
    fn one_step_is_a_single_expectation() {
        let u = bsb(0.05, &[0.1, 0.2, 0.3]).unwrap();
        let phi = |x: &[f64]| (1.0 - x[0].exp()).max(0.0);
        let delta: f64 = 0.04;
        let direct = sublinear_expect(&u, |x, y| phi(&[0.1 + delta.sqrt() * x[0] + delta * y[0]])).unwrap();
        let lat = solve_lattice(&u, delta, 1, &[0.1], phi, None).unwrap();
        assert!((lat.value - direct).abs() < 1e-15);
    }

    #[test]
    fn two_steps_against_hand_enumeration() {
        // D = {+a, −a}: three recombined points x0+2a, x0, x0−2a
        let u = pm_sigma(&[0.5]).unwrap();
        let phi = |x: &[f64]| x[0].powi(3) + x[0].abs();
        let a = 0.5 * 0.25f64.sqrt();
        let x0 = 0.1;
        let want = 0.25 * phi(&[x0 + 2.0 * a]) + 0.5 * phi(&[x0]) + 0.25 * phi(&[x0 - 2.0 * a]);
        let lat = solve_lattice(&u, 0.25, 2, &[x0], phi, None).unwrap();
        assert!((lat.value - want).abs() < 1e-14);
        assert_eq!(lat.terminal.values.len(), 3);
    }

    #[test]
    fn terminal_layer_size_matches_multiset_count() {
        let u = pm_sigma(&[0.1, 0.3]).unwrap();
        let lat = solve_lattice(&u, 0.1, 5, &[0.0], |x| x[0], None).unwrap();
        assert_eq!(lat.terminal.values.len() as u128, multiset_count(5, 4));
        for (key, v) in &lat.terminal.values {
            assert_eq!(*v, lat.terminal.position(key)[0]);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let u = pm_sigma(&[0.1, 0.2, 0.3]).unwrap();
        match solve_lattice(&u, 0.01, 100, &[0.0], |x| x[0], Some(1000)) {
            Err(Error::Resource(msg)) => assert!(msg.contains("grid backend")),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_shift() {
        let u = deterministic(0.7).unwrap();
        let lat = solve_lattice(&u, 0.1, 10, &[0.0], |x| x[0] * x[0], None).unwrap();
        assert!((lat.value - 0.49).abs() < 1e-12);
    }
}
