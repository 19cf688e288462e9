//! Shared greedy loop, selection traces, and exhaustive search.

use std::fmt::Write as _;
use std::time::Instant;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub agent: usize,
    pub marginal: f64,
    pub cumulative: f64,
    #[serde(skip)]
    pub micros: u128,
}

/// Ordered record of a greedy run.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GreedyTrace {
    pub selections: Vec<Selection>,
}

impl GreedyTrace {
    pub fn selected(&self) -> Vec<usize> {
        self.selections.iter().map(|s| s.agent).collect()
    }

    pub fn total(&self) -> f64 {
        self.selections.last().map_or(0.0, |s| s.cumulative)
    }

    pub fn marginals(&self) -> Vec<f64> {
        self.selections.iter().map(|s| s.marginal).collect()
    }

    /// `step,chosen,marginal,cumulative` with 1-based steps.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,chosen,marginal,cumulative\n");
        for (t, s) in self.selections.iter().enumerate() {
            writeln!(out, "{},{},{},{}", t + 1, s.agent, s.marginal, s.cumulative).unwrap();
        }
        out
    }
}

/// Index of the largest value among unmasked entries; ties go to the
/// smallest index.
pub fn argmax(values: &[f64], skip: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (u, &v) in values.iter().enumerate() {
        if skip[u] {
            continue;
        }
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(u),
        }
    }
    best
}

/// Runs `k` greedy steps. `gains(S)` returns the marginal gain of every
/// agent given the current selection; entries for selected agents are
/// ignored.
pub fn run_greedy<F>(n: usize, k: usize, mut gains: F) -> Result<GreedyTrace>
where
    F: FnMut(&[usize]) -> Result<Vec<f64>>,
{
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut chosen = vec![false; n];
    let mut s = Vec::with_capacity(k);
    let mut trace = GreedyTrace::default();
    let mut cumulative = 0.0;
    for _ in 0..k {
        let start = Instant::now();
        let g = gains(&s)?;
        let u = argmax(&g, &chosen).expect("k <= n leaves a candidate");
        chosen[u] = true;
        s.push(u);
        cumulative += g[u];
        trace.selections.push(Selection {
            agent: u,
            marginal: g[u],
            cumulative,
            micros: start.elapsed().as_micros(),
        });
    }
    Ok(trace)
}

/// Number of `k`-subsets of `n`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// Maximizes `f` over all `k`-subsets in lexicographic order; the first
/// maximizer wins ties.
pub fn brute_force_max<F>(n: usize, k: usize, mut f: F) -> Result<(Vec<usize>, f64)>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    if k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let count = binomial(n, k);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::CombinatorialBlowup {
            count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for s in (0..n).combinations(k) {
        let v = f(&s)?;
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((s, v));
        }
    }
    Ok(best.expect("at least one subset"))
}
