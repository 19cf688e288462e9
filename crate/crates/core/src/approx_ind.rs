//! Egalitarian greedy from error rates alone, for independent agents.
//!
//! Each agent is correct with probability `1 − err_j` independently of the
//! others and of the label. The marginal gain of `u` at row `i` is
//! estimated by thresholding the expected margin `Ψ_i(S, u)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greedy::{run_greedy, GreedyTrace};
use crate::hoeffding::{ambiguity_threshold, estimator_bound};
use crate::instance::{Instance, InterventionPlan, Outcome};
use crate::matrix::InfluenceMatrix;

pub const ORACLE_MAX_AGENTS: usize = 20;
pub const EXPAND_MAX_AGENTS: usize = 16;

/// Per-agent error rates and the positive-label prior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependentModel {
    pub err: Vec<f64>,
    pub prior_pos: f64,
}

impl IndependentModel {
    pub fn new(err: Vec<f64>, prior_pos: f64) -> Result<Self> {
        check_rates(&err)?;
        if !(0.0..=1.0).contains(&prior_pos) {
            return Err(Error::InvalidParameter(format!(
                "label prior {prior_pos} outside [0, 1]"
            )));
        }
        Ok(Self { err, prior_pos })
    }

    /// The full outcome table (`2ⁿ` correctness patterns per label) as an
    /// instance; zero-probability outcomes are dropped.
    pub fn expand(&self, wbar: &InfluenceMatrix) -> Result<Instance> {
        let n = self.err.len();
        if wbar.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: wbar.n(),
            });
        }
        if n > EXPAND_MAX_AGENTS {
            return Err(Error::EnumerationGuard {
                agents: n,
                limit: EXPAND_MAX_AGENTS,
            });
        }
        let mut outcomes = Vec::new();
        for (label, prior) in [(1i8, self.prior_pos), (-1i8, 1.0 - self.prior_pos)] {
            if prior <= 0.0 {
                continue;
            }
            for mask in 0u32..(1 << n) {
                let mut weight = prior;
                let mut preds = Vec::with_capacity(n);
                for j in 0..n {
                    let wrong = mask >> j & 1 == 1;
                    weight *= if wrong { self.err[j] } else { 1.0 - self.err[j] };
                    preds.push(if wrong { -label } else { label });
                }
                if weight > 0.0 {
                    outcomes.push(Outcome::new(weight, label, preds));
                }
            }
        }
        renormalize(&mut outcomes);
        Instance::new(wbar.clone(), outcomes)
    }
}

/// Rescales weights so they sum to one to within the validation tolerance.
pub(crate) fn renormalize(outcomes: &mut [Outcome]) {
    let total = crate::instance::neumaier_sum(outcomes.iter().map(|o| o.weight));
    for o in outcomes.iter_mut() {
        o.weight /= total;
    }
}

pub(crate) fn check_rates(err: &[f64]) -> Result<()> {
    if let Some(e) = err.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::InvalidParameter(format!("error rate {e} outside [0, 1]")));
    }
    Ok(())
}

/// `W̄`, error rates, and the row caches `r_i = Σ_j W̄_ij (1 − 2 err_j)` and
/// `q_i = Σ_j W̄_ij²`.
#[derive(Debug, Clone)]
pub struct PsiContext {
    wbar: InfluenceMatrix,
    err: Vec<f64>,
    r: Vec<f64>,
    q: Vec<f64>,
}

impl PsiContext {
    pub fn new(wbar: &InfluenceMatrix, err: &[f64]) -> Result<Self> {
        let n = wbar.n();
        if err.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: err.len(),
            });
        }
        check_rates(err)?;
        let r = (0..n)
            .map(|i| (0..n).map(|j| wbar.get(i, j) * (1.0 - 2.0 * err[j])).sum())
            .collect();
        let q = (0..n)
            .map(|i| (0..n).map(|j| wbar.get(i, j).powi(2)).sum())
            .collect();
        Ok(Self {
            wbar: wbar.clone(),
            err: err.to_vec(),
            r,
            q,
        })
    }

    pub fn n(&self) -> usize {
        self.wbar.n()
    }

    pub fn wbar(&self) -> &InfluenceMatrix {
        &self.wbar
    }

    pub fn err(&self) -> &[f64] {
        &self.err
    }

    pub fn row_margin(&self, i: usize) -> f64 {
        self.r[i]
    }

    pub fn row_sq(&self, i: usize) -> f64 {
        self.q[i]
    }

    /// `Σ_{j∈S} W̄_ij err_j` and `∏_{j∈S, W̄_ij≠0} (1 − err_j)`, folded in
    /// the order of `s`.
    pub fn selection_terms(&self, i: usize, s: &[usize]) -> (f64, f64) {
        let mut t = 0.0;
        let mut prod = 1.0;
        for &j in s {
            let w = self.wbar.get(i, j);
            t += w * self.err[j];
            if w != 0.0 {
                prod *= 1.0 - self.err[j];
            }
        }
        (t, prod)
    }

    fn psi_from(&self, i: usize, u: usize, t: f64) -> f64 {
        self.r[i] - 2.0 * self.wbar.get(i, u) * (1.0 - self.err[u]) + 2.0 * t
    }

    /// `Ψ_i(S, u) = −W̄_iu + Σ_{j∈S} W̄_ij + Σ_{j∉S∪{u}} W̄_ij (1 − 2 err_j)`,
    /// from the row cache in `O(|S|)`.
    pub fn psi(&self, i: usize, s: &[usize], u: usize) -> f64 {
        let (t, _) = self.selection_terms(i, s);
        self.psi_from(i, u, t)
    }

    /// `Ψ_i(u) = Σ_j W̄_ij (1 − 2 err_j) − 2 err_u W̄_iu`.
    pub fn psi_single(&self, i: usize, u: usize) -> f64 {
        self.r[i] - 2.0 * self.err[u] * self.wbar.get(i, u)
    }

    /// `ΔĜ_i` given precomputed selection terms.
    pub(crate) fn term(&self, i: usize, u: usize, t: f64, prod: f64) -> f64 {
        if self.wbar.get(i, u) != 0.0 && self.psi_from(i, u, t) < 0.0 {
            self.err[u] * prod
        } else {
            0.0
        }
    }

    /// `ΔĜ_i(S, u) = 1(Ψ_i(S,u) < 0) · err_u · ∏_{j∈S, W̄_ij≠0} (1 − err_j)`,
    /// zero when `W̄_iu = 0`.
    pub fn approx_delta_gain_row(&self, i: usize, s: &[usize], u: usize) -> f64 {
        let (t, prod) = self.selection_terms(i, s);
        self.term(i, u, t, prod)
    }

    /// Estimator error bound `exp(−Ψ_i(S,u)² / (4 Σ_j W̄_ij²))`.
    pub fn row_bound(&self, i: usize, s: &[usize], u: usize) -> f64 {
        estimator_bound(self.psi(i, s, u), self.q[i])
    }
}

fn check_candidate(n: usize, s: &[usize], u: usize) -> Result<()> {
    if u >= n {
        return Err(Error::IndexOutOfRange { index: u, len: n });
    }
    if let Some(&j) = s.iter().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    if s.contains(&u) {
        return Err(Error::AlreadySelected(u));
    }
    Ok(())
}

/// `Σ_{i: W̄_iu≠0} ΔĜ_i(S, u)`.
pub fn approx_delta_gain_ind(ctx: &PsiContext, s: &[usize], u: usize) -> Result<f64> {
    check_candidate(ctx.n(), s, u)?;
    Ok((0..ctx.n()).map(|i| ctx.approx_delta_gain_row(i, s, u)).sum())
}

/// Greedy selection on estimated gains with cached selection terms.
pub fn greedy_egal_appx_ind(wbar: &InfluenceMatrix, err: &[f64], k: usize) -> Result<(InterventionPlan, GreedyTrace)> {
    let ctx = PsiContext::new(wbar, err)?;
    let n = ctx.n();
    let mut t = vec![0.0; n];
    let mut prod = vec![1.0; n];
    let mut applied = 0usize;
    let trace = run_greedy(n, k, |s| {
        for &j in &s[applied..] {
            for i in 0..n {
                let w = ctx.wbar.get(i, j);
                t[i] += w * ctx.err[j];
                if w != 0.0 {
                    prod[i] *= 1.0 - ctx.err[j];
                }
            }
        }
        applied = s.len();
        let (t, prod, ctx) = (&t, &prod, &ctx);
        Ok((0..n)
            .into_par_iter()
            .map(|u| (0..n).map(|i| ctx.term(i, u, t[i], prod[i])).sum())
            .collect())
    })?;
    Ok((InterventionPlan::new(trace.selected(), 1.0), trace))
}

/// Exact `ΔG_i(S, u)` for independent agents: the probability that `i` is
/// faulty, `u` is wrong, and every `j ∈ S` with `W̄_ij ≠ 0` is right.
///
/// Correctness `Z_i = Σ_j W̄_ij c_j` depends only on the pattern
/// `c_j = y ŷ_j`, so the label prior cancels. Returns 0 when `W̄_iu = 0`.
pub fn delta_gain_ind_oracle(wbar: &InfluenceMatrix, err: &[f64], s: &[usize], u: usize, i: usize) -> Result<f64> {
    let n = wbar.n();
    if err.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: err.len(),
        });
    }
    if n > ORACLE_MAX_AGENTS {
        return Err(Error::EnumerationGuard {
            agents: n,
            limit: ORACLE_MAX_AGENTS,
        });
    }
    check_candidate(n, s, u)?;
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    if wbar.get(i, u) == 0.0 {
        return Ok(0.0);
    }
    let row = wbar.row(i);
    // fixed[j]: Some(c) when agent j's correctness is pinned by the event
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    let mut base = err[u];
    fixed[u] = Some(-1.0);
    for &j in s {
        if row[j] != 0.0 {
            fixed[j] = Some(1.0);
            base *= 1.0 - err[j];
        }
    }
    if base == 0.0 {
        return Ok(0.0);
    }
    let p_faulty = enumerate_faulty(&row, &fixed, err, 0, 0.0);
    Ok(base * p_faulty)
}

/// Probability that `Σ_j row_j c_j < 0` summing in index order, with free
/// agents independent and correct w.p. `1 − err_j`.
pub(crate) fn enumerate_faulty(row: &[f64], fixed: &[Option<f64>], err: &[f64], j: usize, acc: f64) -> f64 {
    if j == row.len() {
        return if acc < 0.0 { 1.0 } else { 0.0 };
    }
    let w = row[j];
    match fixed[j] {
        Some(c) => enumerate_faulty(row, fixed, err, j + 1, acc + w * c),
        None if w == 0.0 => enumerate_faulty(row, fixed, err, j + 1, acc + w),
        None => {
            let mut p = 0.0;
            if err[j] < 1.0 {
                p += (1.0 - err[j]) * enumerate_faulty(row, fixed, err, j + 1, acc + w);
            }
            if err[j] > 0.0 {
                p += err[j] * enumerate_faulty(row, fixed, err, j + 1, acc - w);
            }
            p
        }
    }
}

/// Per-agent ambiguity diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbiguityReport {
    pub statistic: Vec<f64>,
    pub threshold: Vec<f64>,
    pub ambiguous: Vec<bool>,
    /// `min_u Σ_i exp(−Ψ_i(u)² / (4 Σ_j W̄_ij²))` (or its group analogue).
    pub delta: f64,
}

impl AmbiguityReport {
    pub fn ambiguous_count(&self) -> usize {
        self.ambiguous.iter().filter(|a| **a).count()
    }
}

/// `|⟨W_i⁺, E⁺⟩ − ⟨W_i⁻, E⁻⟩| / ‖W_i‖₂` over the agents where `mask` is
/// true; `None` for an all-zero restricted row.
pub(crate) fn dot_statistic(row: &[f64], err: &[f64], mask: impl Fn(usize) -> bool) -> Option<f64> {
    let mut pos = 0.0;
    let mut neg = 0.0;
    let mut norm_sq = 0.0;
    for (j, (&w, &e)) in row.iter().zip(err).enumerate() {
        if !mask(j) {
            continue;
        }
        norm_sq += w * w;
        if e <= 0.5 {
            pos += w * (1.0 - 2.0 * e);
        } else {
            neg += w * (2.0 * e - 1.0);
        }
    }
    (norm_sq > 0.0).then(|| (pos - neg).abs() / norm_sq.sqrt())
}

pub fn ambiguity_report(wbar: &InfluenceMatrix, err: &[f64]) -> Result<AmbiguityReport> {
    let ctx = PsiContext::new(wbar, err)?;
    let n = ctx.n();
    if n < 2 {
        return Err(Error::InvalidParameter("ambiguity needs at least two agents".into()));
    }
    let tau = ambiguity_threshold(n);
    let mut statistic = Vec::with_capacity(n);
    let mut ambiguous = Vec::with_capacity(n);
    for i in 0..n {
        match dot_statistic(&wbar.row(i), err, |_| true) {
            Some(s) => {
                statistic.push(s);
                ambiguous.push(s <= tau);
            }
            None => {
                statistic.push(0.0);
                ambiguous.push(true);
            }
        }
    }
    let delta = (0..n)
        .map(|u| {
            (0..n)
                .map(|i| estimator_bound(ctx.psi_single(i, u), ctx.q[i]))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(AmbiguityReport {
        statistic,
        threshold: vec![tau; n],
        ambiguous,
        delta,
    })
}
