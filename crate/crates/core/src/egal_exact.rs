//! Exact egalitarian greedy over a tabular instance and its brute-force
//! reference.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greedy::{brute_force_max, run_greedy, GreedyTrace};
use crate::instance::{Instance, InterventionPlan};

/// `G(S ∪ {u}) − G(S)`: mass of `(i, a)` with `Z(i,a) < 0`, `W̄_iu ≠ 0`,
/// `u` wrong on `a`, and every `j ∈ S` with `W̄_ij ≠ 0` right on `a`.
pub fn delta_gain_exact(instance: &Instance, s: &[usize], u: usize) -> Result<f64> {
    let n = instance.n();
    if u >= n {
        return Err(Error::IndexOutOfRange { index: u, len: n });
    }
    if let Some(&j) = s.iter().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    if s.contains(&u) {
        return Err(Error::AlreadySelected(u));
    }
    let w = instance.wbar();
    let mut total = 0.0;
    for (a, o) in instance.outcomes().iter().enumerate() {
        if o.is_correct(u) {
            continue;
        }
        let z = instance.correctness(a)?;
        let count = (0..n)
            .filter(|&i| {
                z[i] < 0.0
                    && w.get(i, u) != 0.0
                    && s.iter().all(|&j| w.get(i, j) == 0.0 || o.is_correct(j))
            })
            .count();
        total += o.weight * count as f64;
    }
    Ok(total)
}

/// Greedy maximization of the egalitarian gain. `covered[a][i]` tracks
/// pairs already fixed by the current selection, so each step costs
/// `O(|Ω| n²)`.
pub fn greedy_egal_exact(instance: &Instance, k: usize, phi: f64) -> Result<(InterventionPlan, GreedyTrace)> {
    let n = instance.n();
    InterventionPlan::empty(phi).validate(n)?;
    let w = instance.wbar();
    let outcomes = instance.outcomes();
    let faulty: Vec<Vec<bool>> = (0..outcomes.len())
        .map(|a| instance.correctness(a).map(|z| z.iter().map(|v| *v < 0.0).collect()))
        .collect::<Result<_>>()?;
    let mut open = faulty.clone();
    let mut applied = 0usize;
    let trace = run_greedy(n, k, |s| {
        for &j in &s[applied..] {
            for (a, o) in outcomes.iter().enumerate() {
                if !o.is_correct(j) {
                    for (i, slot) in open[a].iter_mut().enumerate() {
                        if w.get(i, j) != 0.0 {
                            *slot = false;
                        }
                    }
                }
            }
        }
        applied = s.len();
        let open = &open;
        Ok((0..n)
            .into_par_iter()
            .map(|u| {
                outcomes
                    .iter()
                    .enumerate()
                    .filter(|(_, o)| !o.is_correct(u))
                    .map(|(a, o)| {
                        let c = (0..n).filter(|&i| open[a][i] && w.get(i, u) != 0.0).count();
                        o.weight * c as f64
                    })
                    .sum()
            })
            .collect())
    })?;
    Ok((InterventionPlan::new(trace.selected(), phi), trace))
}

/// Exhaustive optimum over all `k`-subsets; ties go to the
/// lexicographically smallest subset.
pub fn brute_force_opt_egal(instance: &Instance, k: usize, phi: f64) -> Result<(Vec<usize>, f64)> {
    InterventionPlan::empty(phi).validate(instance.n())?;
    brute_force_max(instance.n(), k, |s| {
        instance.gain_egal_direct(&InterventionPlan::new(s.to_vec(), phi))
    })
}
