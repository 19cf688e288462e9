#![allow(dead_code)]

use coopnet::generators::rng;
use coopnet::{InfluenceMatrix, Instance, Outcome};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    rng(seed)
}

/// Non-negative, row-normalized matrix with a positive diagonal and about
/// `density` of the off-diagonal entries nonzero.
pub fn random_wbar(rng: &mut ChaCha8Rng, n: usize, density: f64) -> InfluenceMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, w) in row.iter_mut().enumerate() {
            if i == j || rng.random::<f64>() < density {
                *w = rng.random::<f64>() + 0.05;
            }
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|w| *w /= s);
    }
    InfluenceMatrix::from_rows(&rows).unwrap()
}

/// Random weights normalized to sum to one.
pub fn random_weights(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.1).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s).collect()
}

pub fn random_outcomes(rng: &mut ChaCha8Rng, n: usize, m: usize, balanced: bool) -> Vec<Outcome> {
    let p: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..0.95)).collect();
    let base = if balanced { m.div_ceil(2) } else { m };
    let weights = random_weights(rng, base);
    let mut out = Vec::new();
    for w in weights {
        let label = if rng.random::<bool>() { 1i8 } else { -1 };
        let preds: Vec<i8> = p
            .iter()
            .map(|&pi| if rng.random::<f64>() < pi { label } else { -label })
            .collect();
        if balanced {
            out.push(Outcome::new(w / 2.0, -label, preds.iter().map(|x| -x).collect()));
            out.push(Outcome::new(w / 2.0, label, preds));
        } else {
            out.push(Outcome::new(w, label, preds));
        }
    }
    out
}

pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, density: f64) -> Instance {
    let w = random_wbar(rng, n, density);
    Instance::new(w, random_outcomes(rng, n, m, false)).unwrap()
}

pub fn random_err(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..0.6)).collect()
}

/// `k` distinct indices from `0..n`, excluding `skip`.
pub fn random_subset(rng: &mut ChaCha8Rng, n: usize, k: usize, skip: &[usize]) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).filter(|j| !skip.contains(j)).collect();
    let mut out = Vec::new();
    for _ in 0..k.min(pool.len()) {
        let t = rng.random_range(0..pool.len());
        out.push(pool.swap_remove(t));
    }
    out
}
