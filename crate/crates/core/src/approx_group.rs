//! Egalitarian greedy under the Red/Blue/White group model.
//!
//! With probability `ρ` a single group decision fixes every colored agent:
//! Red agents are wrong together with probability `err_R` and Blue agents
//! always disagree with Red. Whites, and everyone in the remaining `1 − ρ`
//! mass, predict individually with `err_indv`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx_ind::{
    check_rates, delta_gain_ind_oracle, dot_statistic, enumerate_faulty, renormalize,
    AmbiguityReport, PsiContext,
};
use crate::error::{Error, Result};
use crate::greedy::{run_greedy, GreedyTrace};
use crate::hoeffding::{ambiguity_threshold, estimator_bound};
use crate::instance::{Instance, InterventionPlan, Outcome, FORMAT_VERSION};
use crate::matrix::InfluenceMatrix;

pub const GROUP_ORACLE_MAX_AGENTS: usize = 18;
pub const GROUP_EXPAND_MAX_AGENTS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "R")]
    Red,
    #[serde(rename = "B")]
    Blue,
    #[serde(rename = "W")]
    White,
}

impl Color {
    pub fn opposite(self) -> Self {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
            Color::White => Color::White,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStructure {
    pub colors: Vec<Color>,
    pub rho: f64,
    pub err_indv: Vec<f64>,
    pub err_r: f64,
    pub prior_pos: f64,
}

#[derive(Serialize, Deserialize)]
struct GroupFile {
    format_version: u32,
    colors: Vec<Color>,
    rho: f64,
    err_indv: Vec<f64>,
    #[serde(rename = "err_R")]
    err_r: f64,
    #[serde(default = "half")]
    prior_pos: f64,
}

fn half() -> f64 {
    0.5
}

impl GroupStructure {
    pub fn new(colors: Vec<Color>, rho: f64, err_indv: Vec<f64>, err_r: f64) -> Result<Self> {
        let g = Self {
            colors,
            rho,
            err_indv,
            err_r,
            prior_pos: 0.5,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_prior(mut self, prior_pos: f64) -> Result<Self> {
        self.prior_pos = prior_pos;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.colors.len() != self.err_indv.len() {
            return Err(Error::DimensionMismatch {
                expected: self.colors.len(),
                found: self.err_indv.len(),
            });
        }
        check_rates(&self.err_indv)?;
        for (name, v) in [("rho", self.rho), ("err_R", self.err_r), ("prior_pos", self.prior_pos)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    /// `err(B) = 1 − err(R)`.
    pub fn err_b(&self) -> f64 {
        1.0 - self.err_r
    }

    /// Group error rate of a colored agent.
    pub fn group_err(&self, c: Color) -> f64 {
        match c {
            Color::Red => self.err_r,
            Color::Blue => self.err_b(),
            Color::White => f64::NAN,
        }
    }

    /// Marginal error rate of each agent under the mixture.
    pub fn marginal_err(&self) -> Vec<f64> {
        self.colors
            .iter()
            .zip(&self.err_indv)
            .map(|(&c, &e)| match c {
                Color::White => e,
                c => self.rho * self.group_err(c) + (1.0 - self.rho) * e,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&GroupFile {
            format_version: FORMAT_VERSION,
            colors: self.colors.clone(),
            rho: self.rho,
            err_indv: self.err_indv.clone(),
            err_r: self.err_r,
            prior_pos: self.prior_pos,
        })?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let f: GroupFile = serde_json::from_str(text)?;
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {}",
                f.format_version
            )));
        }
        Self::new(f.colors, f.rho, f.err_indv, f.err_r)?.with_prior(f.prior_pos)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Exact outcome table of the mixture; zero-probability outcomes are
    /// dropped.
    pub fn expand(&self, wbar: &InfluenceMatrix) -> Result<Instance> {
        let n = self.n();
        if wbar.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: wbar.n(),
            });
        }
        if n > GROUP_EXPAND_MAX_AGENTS {
            return Err(Error::EnumerationGuard {
                agents: n,
                limit: GROUP_EXPAND_MAX_AGENTS,
            });
        }
        let whites: Vec<usize> = (0..n).filter(|&j| self.colors[j] == Color::White).collect();
        let mut outcomes = Vec::new();
        for (label, prior) in [(1i8, self.prior_pos), (-1i8, 1.0 - self.prior_pos)] {
            if prior <= 0.0 {
                continue;
            }
            if self.rho > 0.0 {
                for (red_wrong, p_g) in [(false, 1.0 - self.err_r), (true, self.err_r)] {
                    for mask in 0u32..(1 << whites.len()) {
                        let mut weight = prior * self.rho * p_g;
                        let mut wrong = vec![false; n];
                        for (b, &j) in whites.iter().enumerate() {
                            wrong[j] = mask >> b & 1 == 1;
                            weight *= if wrong[j] { self.err_indv[j] } else { 1.0 - self.err_indv[j] };
                        }
                        for (w, c) in wrong.iter_mut().zip(&self.colors) {
                            match c {
                                Color::Red => *w = red_wrong,
                                Color::Blue => *w = !red_wrong,
                                Color::White => {}
                            }
                        }
                        push_outcome(&mut outcomes, weight, label, &wrong);
                    }
                }
            }
            if self.rho < 1.0 {
                for mask in 0u32..(1 << n) {
                    let mut weight = prior * (1.0 - self.rho);
                    let wrong: Vec<bool> = (0..n).map(|j| mask >> j & 1 == 1).collect();
                    for (&bad, &e) in wrong.iter().zip(&self.err_indv) {
                        weight *= if bad { e } else { 1.0 - e };
                    }
                    push_outcome(&mut outcomes, weight, label, &wrong);
                }
            }
        }
        renormalize(&mut outcomes);
        Instance::new(wbar.clone(), outcomes)
    }
}

fn push_outcome(outcomes: &mut Vec<Outcome>, weight: f64, label: i8, wrong: &[bool]) {
    if weight > 0.0 {
        let preds = wrong.iter().map(|&w| if w { -label } else { label }).collect();
        outcomes.push(Outcome::new(weight, label, preds));
    }
}

/// Row caches for the group estimators. For a color class `C`,
/// `plus_C = Σ_{j∈C} 2 W̄_ij err_j` and `minus_C = Σ_{j∈C} W̄_ij (2 − 2 err_j)`
/// turn `Ψ_i(X, Y)` into `r_i + plus_X − minus_Y`.
#[derive(Debug, Clone)]
pub struct GroupPsiContext {
    ind: PsiContext,
    group: GroupStructure,
    w_red: Vec<f64>,
    w_blue: Vec<f64>,
    plus: [Vec<f64>; 2],
    minus: [Vec<f64>; 2],
    r_white: Vec<f64>,
    q_white: Vec<f64>,
}

fn slot(c: Color) -> usize {
    match c {
        Color::Red => 0,
        Color::Blue => 1,
        Color::White => unreachable!("white has no group slot"),
    }
}

/// Color content of `S_i = {j ∈ S : W̄_ij ≠ 0}` with white-restricted sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RowSelection {
    has_red: bool,
    has_blue: bool,
    /// `Σ_{j∈S} W̄_ij err_indv_j` over all of `S`.
    t: f64,
    /// `∏_{j∈S_i} (1 − err_indv_j)`.
    prod: f64,
    /// `Σ_{j∈S_i∩W} W̄_ij err_indv_j`.
    t_white: f64,
    /// `∏_{j∈S_i∩W} (1 − err_indv_j)`.
    prod_white: f64,
}

impl Default for RowSelection {
    fn default() -> Self {
        Self {
            has_red: false,
            has_blue: false,
            t: 0.0,
            prod: 1.0,
            t_white: 0.0,
            prod_white: 1.0,
        }
    }
}

impl GroupPsiContext {
    pub fn new(wbar: &InfluenceMatrix, group: &GroupStructure) -> Result<Self> {
        let n = wbar.n();
        if group.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: group.n(),
            });
        }
        let ind = PsiContext::new(wbar, &group.err_indv)?;
        let e = &group.err_indv;
        let sum_over = |c: Color, f: &dyn Fn(usize) -> f64| -> f64 {
            (0..n).filter(|&j| group.colors[j] == c).map(f).sum()
        };
        let mut w_red = vec![0.0; n];
        let mut w_blue = vec![0.0; n];
        let mut plus = [vec![0.0; n], vec![0.0; n]];
        let mut minus = [vec![0.0; n], vec![0.0; n]];
        let mut r_white = vec![0.0; n];
        let mut q_white = vec![0.0; n];
        for i in 0..n {
            let w = |j: usize| wbar.get(i, j);
            w_red[i] = sum_over(Color::Red, &w);
            w_blue[i] = sum_over(Color::Blue, &w);
            for c in [Color::Red, Color::Blue] {
                plus[slot(c)][i] = sum_over(c, &|j| 2.0 * w(j) * e[j]);
                minus[slot(c)][i] = sum_over(c, &|j| w(j) * (2.0 - 2.0 * e[j]));
            }
            r_white[i] = sum_over(Color::White, &|j| w(j) * (1.0 - 2.0 * e[j]));
            q_white[i] = sum_over(Color::White, &|j| w(j) * w(j));
        }
        Ok(Self {
            ind,
            group: group.clone(),
            w_red,
            w_blue,
            plus,
            minus,
            r_white,
            q_white,
        })
    }

    pub fn n(&self) -> usize {
        self.ind.n()
    }

    pub fn ind(&self) -> &PsiContext {
        &self.ind
    }

    pub fn group(&self) -> &GroupStructure {
        &self.group
    }

    fn w(&self, i: usize, j: usize) -> f64 {
        self.ind.wbar().get(i, j)
    }

    /// `W̄_i(X)` for a color class.
    pub fn color_mass(&self, i: usize, c: Color) -> f64 {
        match c {
            Color::Red => self.w_red[i],
            Color::Blue => self.w_blue[i],
            Color::White => (0..self.n())
                .filter(|&j| self.group.colors[j] == Color::White)
                .map(|j| self.w(i, j))
                .sum(),
        }
    }

    /// `ΔW̄_i = |W̄_i(R) − W̄_i(B)|`.
    pub fn delta_w(&self, i: usize) -> f64 {
        (self.w_red[i] - self.w_blue[i]).abs()
    }

    /// `Σ_{j∈W} W̄_ij²`.
    pub fn white_sq(&self, i: usize) -> f64 {
        self.q_white[i]
    }

    /// `Ψ_i^W(u) = Σ_{j∈W} W̄_ij (1 − 2 err_j) − 2 err_u W̄_iu`.
    pub fn psi_white(&self, i: usize, u: usize) -> f64 {
        self.r_white[i] - 2.0 * self.group.err_indv[u] * self.w(i, u)
    }

    /// `Ψ_i(X, Y) = Σ_{j∉X∪Y} W̄_ij (1 − 2 err_j) + W̄_i(X) − W̄_i(Y)`.
    pub fn psi_xy(&self, i: usize, x: &[usize], y: &[usize]) -> Result<f64> {
        let n = self.n();
        let mut side = vec![0i8; n];
        for &j in x {
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, len: n });
            }
            side[j] = 1;
        }
        for &j in y {
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, len: n });
            }
            if side[j] == 1 {
                return Err(Error::OverlappingSets(j));
            }
            side[j] = -1;
        }
        let e = &self.group.err_indv;
        Ok((0..n)
            .map(|j| {
                let w = self.w(i, j);
                match side[j] {
                    1 => w,
                    -1 => -w,
                    _ => w * (1.0 - 2.0 * e[j]),
                }
            })
            .sum())
    }

    /// `1(Ψ_i(X, Y) < 0)`.
    pub fn gamma_hat(&self, i: usize, x: &[usize], y: &[usize]) -> Result<f64> {
        Ok(if self.psi_xy(i, x, y)? < 0.0 { 1.0 } else { 0.0 })
    }

    /// `Ψ_i(C ∪ S_i, C̄ ∪ {u})` from the caches; `u` is `None` when it is
    /// already inside `C̄`.
    fn psi_group(&self, i: usize, c: Color, t_white: f64, u: Option<usize>) -> f64 {
        let mut psi = self.ind.row_margin(i) + self.plus[slot(c)][i] + 2.0 * t_white
            - self.minus[slot(c.opposite())][i];
        if let Some(u) = u {
            psi -= self.w(i, u) * (2.0 - 2.0 * self.group.err_indv[u]);
        }
        psi
    }

    pub(crate) fn row_selection(&self, i: usize, s: &[usize]) -> RowSelection {
        let mut rs = RowSelection::default();
        for &j in s {
            self.extend(&mut rs, i, j);
        }
        rs
    }

    fn extend(&self, rs: &mut RowSelection, i: usize, j: usize) {
        let w = self.w(i, j);
        let e = self.group.err_indv[j];
        rs.t += w * e;
        if w == 0.0 {
            return;
        }
        rs.prod *= 1.0 - e;
        match self.group.colors[j] {
            Color::Red => rs.has_red = true,
            Color::Blue => rs.has_blue = true,
            Color::White => {
                rs.t_white += w * e;
                rs.prod_white *= 1.0 - e;
            }
        }
    }

    /// Group-branch estimate `ΔĜ_i^gr(S, u)`.
    pub(crate) fn group_term(&self, i: usize, u: usize, rs: &RowSelection) -> f64 {
        if self.w(i, u) == 0.0 {
            return 0.0;
        }
        let ind = |psi: f64| if psi < 0.0 { 1.0 } else { 0.0 };
        let cu = self.group.colors[u];
        let eu = self.group.err_indv[u];
        let pw = rs.prod_white;
        let mono = match (rs.has_red, rs.has_blue) {
            (true, true) => return 0.0,
            (true, false) => Some(Color::Red),
            (false, true) => Some(Color::Blue),
            (false, false) => None,
        };
        match mono {
            Some(c) => {
                let cbar = c.opposite();
                let err_cbar = self.group.group_err(cbar);
                if cu == c {
                    0.0
                } else if cu == cbar {
                    err_cbar * pw * ind(self.psi_group(i, c, rs.t_white, None))
                } else {
                    eu * err_cbar * pw * ind(self.psi_group(i, c, rs.t_white, Some(u)))
                }
            }
            None => match cu {
                Color::White => {
                    let red_right = self.group.err_b() * ind(self.psi_group(i, Color::Red, rs.t_white, Some(u)));
                    let red_wrong = self.group.err_r * ind(self.psi_group(i, Color::Blue, rs.t_white, Some(u)));
                    eu * pw * (red_right + red_wrong)
                }
                c => {
                    let good = c.opposite();
                    self.group.group_err(c) * pw * ind(self.psi_group(i, good, rs.t_white, None))
                }
            },
        }
    }

    /// `ρ ΔĜ_i^gr + (1 − ρ) ΔĜ_i^indv`.
    pub(crate) fn mixed_term(&self, i: usize, u: usize, rs: &RowSelection) -> f64 {
        let rho = self.group.rho;
        let indv = self.ind.term(i, u, rs.t, rs.prod);
        if rho == 0.0 {
            return indv;
        }
        rho * self.group_term(i, u, rs) + (1.0 - rho) * indv
    }

    /// Per-row mixture estimate.
    pub fn approx_delta_gain_row(&self, i: usize, s: &[usize], u: usize) -> f64 {
        self.mixed_term(i, u, &self.row_selection(i, s))
    }

    /// Group-branch estimate only.
    pub fn approx_group_row(&self, i: usize, s: &[usize], u: usize) -> f64 {
        self.group_term(i, u, &self.row_selection(i, s))
    }

    /// `ρ exp(−(Ψ_i^W(u) − ΔW̄_i)² / (4 Σ_{j∈W} W̄_ij²)) +
    /// (1 − ρ) exp(−Ψ_i(u)² / (4 Σ_j W̄_ij²))`.
    pub fn row_bound(&self, i: usize, u: usize) -> f64 {
        let rho = self.group.rho;
        let gr = estimator_bound(self.psi_white(i, u) - self.delta_w(i), self.q_white[i]);
        let indv = estimator_bound(self.ind.psi_single(i, u), self.ind.row_sq(i));
        rho * gr + (1.0 - rho) * indv
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

/// `Σ_{i: W̄_iu≠0} ρ ΔĜ_i^gr(S,u) + (1 − ρ) ΔĜ_i^indv(S,u)`.
pub fn approx_delta_gain_group(ctx: &GroupPsiContext, s: &[usize], u: usize) -> Result<f64> {
    check_candidate(ctx.n(), s, u)?;
    Ok((0..ctx.n()).map(|i| ctx.approx_delta_gain_row(i, s, u)).sum())
}

pub fn greedy_egal_appx_group(wbar: &InfluenceMatrix, group: &GroupStructure, k: usize) -> Result<(InterventionPlan, GreedyTrace)> {
    let ctx = GroupPsiContext::new(wbar, group)?;
    let n = ctx.n();
    let mut rows = vec![RowSelection::default(); n];
    let mut applied = 0usize;
    let trace = run_greedy(n, k, |s| {
        for &j in &s[applied..] {
            for (i, rs) in rows.iter_mut().enumerate() {
                ctx.extend(rs, i, j);
            }
        }
        applied = s.len();
        let (rows, ctx) = (&rows, &ctx);
        Ok((0..n)
            .into_par_iter()
            .map(|u| (0..n).map(|i| ctx.mixed_term(i, u, &rows[i])).sum())
            .collect())
    })?;
    Ok((InterventionPlan::new(trace.selected(), 1.0), trace))
}

/// Exact group-branch probability of the marginal-gain event at row `i`.
pub fn delta_gain_group_branch_oracle(wbar: &InfluenceMatrix, group: &GroupStructure, s: &[usize], u: usize, i: usize) -> Result<f64> {
    let n = wbar.n();
    if group.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: group.n(),
        });
    }
    check_candidate(n, s, u)?;
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let whites = group.colors.iter().filter(|c| **c == Color::White).count();
    if whites > GROUP_ORACLE_MAX_AGENTS {
        return Err(Error::EnumerationGuard {
            agents: whites,
            limit: GROUP_ORACLE_MAX_AGENTS,
        });
    }
    if wbar.get(i, u) == 0.0 {
        return Ok(0.0);
    }
    let row = wbar.row(i);
    let mut total = 0.0;
    for (red_wrong, p_g) in [(false, 1.0 - group.err_r), (true, group.err_r)] {
        if p_g == 0.0 {
            continue;
        }
        let mut fixed: Vec<Option<f64>> = vec![None; n];
        for (f, c) in fixed.iter_mut().zip(&group.colors) {
            match c {
                Color::Red => *f = Some(if red_wrong { -1.0 } else { 1.0 }),
                Color::Blue => *f = Some(if red_wrong { 1.0 } else { -1.0 }),
                Color::White => {}
            }
        }
        let mut base = p_g;
        let mut possible = true;
        let mut pin = |j: usize, c: f64, fixed: &mut Vec<Option<f64>>| match fixed[j] {
            Some(v) => possible &= v == c,
            None => {
                fixed[j] = Some(c);
                base *= if c > 0.0 { 1.0 - group.err_indv[j] } else { group.err_indv[j] };
            }
        };
        pin(u, -1.0, &mut fixed);
        for &j in s {
            if row[j] != 0.0 {
                pin(j, 1.0, &mut fixed);
            }
        }
        if !possible || base == 0.0 {
            continue;
        }
        total += base * enumerate_faulty(&row, &fixed, &group.err_indv, 0, 0.0);
    }
    Ok(total)
}

/// Exact mixture `ρ E^gr + (1 − ρ) E^indv` of the marginal-gain event.
pub fn delta_gain_group_oracle(wbar: &InfluenceMatrix, group: &GroupStructure, s: &[usize], u: usize, i: usize) -> Result<f64> {
    let n = wbar.n();
    let gr = if group.rho > 0.0 {
        delta_gain_group_branch_oracle(wbar, group, s, u, i)?
    } else {
        0.0
    };
    let indv = if group.rho < 1.0 {
        if n > GROUP_ORACLE_MAX_AGENTS {
            return Err(Error::EnumerationGuard {
                agents: n,
                limit: GROUP_ORACLE_MAX_AGENTS,
            });
        }
        delta_gain_ind_oracle(wbar, &group.err_indv, s, u, i)?
    } else {
        0.0
    };
    Ok(group.rho * gr + (1.0 - group.rho) * indv)
}

/// W-ambiguity flags: the dot statistic over white agents against
/// `4 √(ln n) + ΔW̄_i`, plus the mixture bound minimized over candidates.
pub fn w_ambiguity_report(wbar: &InfluenceMatrix, group: &GroupStructure) -> Result<AmbiguityReport> {
    let ctx = GroupPsiContext::new(wbar, group)?;
    let n = ctx.n();
    if n < 2 {
        return Err(Error::InvalidParameter("ambiguity needs at least two agents".into()));
    }
    let tau = ambiguity_threshold(n);
    let mut statistic = Vec::with_capacity(n);
    let mut threshold = Vec::with_capacity(n);
    let mut ambiguous = Vec::with_capacity(n);
    for i in 0..n {
        let th = tau + ctx.delta_w(i);
        threshold.push(th);
        match dot_statistic(&wbar.row(i), &group.err_indv, |j| group.colors[j] == Color::White) {
            Some(s) => {
                statistic.push(s);
                ambiguous.push(s <= th);
            }
            None => {
                statistic.push(0.0);
                ambiguous.push(true);
            }
        }
    }
    let delta = (0..n)
        .map(|u| (0..n).map(|i| ctx.row_bound(i, u)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok(AmbiguityReport {
        statistic,
        threshold,
        ambiguous,
        delta,
    })
}
