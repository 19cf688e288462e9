//! Seeded graph, instance, and group-model generators, the adversarial
//! fixture, and an edge-list loader.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx_group::{Color, GroupStructure};
use crate::dynamics::fj_finite_steps;
use crate::error::{Error, Result};
use crate::instance::{Instance, Outcome};
use crate::matrix::InfluenceMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GraphModel {
    /// Each undirected pair present with probability `p`.
    Er { p: f64 },
    /// Preferential attachment with `m` edges per new node.
    Pa { m: usize },
    /// Ring lattice joining each node to `k / 2` neighbors per side, each
    /// edge rewired with probability `p`.
    Ws { k: usize, p: f64 },
    /// Dense uniform weights with a fraction `sparsity` zeroed, rows summing
    /// to one. Used directly as `W̄`.
    RandomW { sparsity: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub model: GraphModel,
    pub n: usize,
    pub seed: u64,
}

impl GraphSpec {
    pub fn new(model: GraphModel, n: usize, seed: u64) -> Self {
        Self { model, n, seed }
    }

    /// Experiment defaults at size `n`.
    pub fn er(n: usize, seed: u64) -> Self {
        Self::new(GraphModel::Er { p: 0.005 }, n, seed)
    }

    pub fn pa(n: usize, seed: u64) -> Self {
        Self::new(GraphModel::Pa { m: 5 }, n, seed)
    }

    pub fn ws(n: usize, seed: u64) -> Self {
        Self::new(GraphModel::Ws { k: 5, p: 0.25 }, n, seed)
    }

    pub fn random_w(n: usize, seed: u64) -> Self {
        Self::new(GraphModel::RandomW { sparsity: 0.95 }, n, seed)
    }

    pub fn tag(&self) -> &'static str {
        match self.model {
            GraphModel::Er { .. } => "ER",
            GraphModel::Pa { .. } => "PA",
            GraphModel::Ws { .. } => "WS",
            GraphModel::RandomW { .. } => "RandomW",
        }
    }
}

fn probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

/// 0/1 adjacency for graph models, normalized weights for `RandomW`.
pub fn gen_graph(spec: &GraphSpec) -> Result<InfluenceMatrix> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut rng = rng(spec.seed);
    let mut a = DMatrix::zeros(n, n);
    match spec.model {
        GraphModel::Er { p } => {
            probability("p", p)?;
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random::<f64>() < p {
                        link(&mut a, i, j);
                    }
                }
            }
        }
        GraphModel::Pa { m } => {
            if m == 0 || m >= n {
                return Err(Error::InvalidParameter(format!("PA needs 1 <= m < n, got m = {m}")));
            }
            // endpoint list: sampling from it is sampling by degree
            let mut ends: Vec<usize> = Vec::new();
            for i in 0..m {
                for j in (i + 1)..m {
                    link(&mut a, i, j);
                    ends.extend([i, j]);
                }
            }
            for v in m..n {
                let mut targets: Vec<usize> = Vec::with_capacity(m);
                while targets.len() < m {
                    let t = if ends.is_empty() {
                        rng.random_range(0..v)
                    } else {
                        ends[rng.random_range(0..ends.len())]
                    };
                    if !targets.contains(&t) {
                        targets.push(t);
                    }
                }
                for t in targets {
                    link(&mut a, v, t);
                    ends.extend([v, t]);
                }
            }
        }
        GraphModel::Ws { k, p } => {
            probability("p", p)?;
            if k < 2 || k >= n {
                return Err(Error::InvalidParameter(format!(
                    "WS needs 2 <= k < n, got k = {k}"
                )));
            }
            for j in 1..=k / 2 {
                for u in 0..n {
                    link(&mut a, u, (u + j) % n);
                }
            }
            for j in 1..=k / 2 {
                for u in 0..n {
                    let v = (u + j) % n;
                    if a[(u, v)] == 0.0 || rng.random::<f64>() >= p {
                        continue;
                    }
                    let degree = (0..n).filter(|&x| a[(u, x)] != 0.0).count();
                    if degree >= n - 1 {
                        continue;
                    }
                    let w = loop {
                        let w = rng.random_range(0..n);
                        if w != u && a[(u, w)] == 0.0 {
                            break w;
                        }
                    };
                    a[(u, v)] = 0.0;
                    a[(v, u)] = 0.0;
                    link(&mut a, u, w);
                }
            }
        }
        GraphModel::RandomW { sparsity } => {
            probability("sparsity", sparsity)?;
            for i in 0..n {
                for j in 0..n {
                    let keep = rng.random::<f64>() >= sparsity;
                    let v = 1.0 - rng.random::<f64>();
                    if keep {
                        a[(i, j)] = v;
                    }
                }
                if (0..n).all(|j| a[(i, j)] == 0.0) {
                    let j = rng.random_range(0..n);
                    a[(i, j)] = 1.0 - rng.random::<f64>();
                }
                let s: f64 = a.row(i).sum();
                for j in 0..n {
                    a[(i, j)] /= s;
                }
            }
        }
    }
    InfluenceMatrix::new(a)
}

fn link(a: &mut DMatrix<f64>, i: usize, j: usize) {
    a[(i, j)] = 1.0;
    a[(j, i)] = 1.0;
}

/// Step count of the finite FJ map used to turn graphs into `W̄`.
pub const FJ_STEPS: usize = 3;

/// `W̄` for a spec: three FJ steps on graph models, the weights themselves
/// for `RandomW`.
pub fn gen_wbar(spec: &GraphSpec) -> Result<InfluenceMatrix> {
    let w = gen_graph(spec)?;
    match spec.model {
        GraphModel::RandomW { .. } => Ok(w),
        _ => fj_finite_steps(w.as_dmatrix(), None, FJ_STEPS),
    }
}

/// Number of undirected edges in a symmetric 0/1 adjacency matrix.
pub fn edge_count(adj: &InfluenceMatrix) -> usize {
    let n = adj.n();
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| adj.get(i, j) != 0.0)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub omega_size: usize,
    /// Range of the per-agent probability of predicting `+1`.
    pub p_range: (f64, f64),
    pub prior_pos: f64,
    /// Adds the mirrored outcome `(−y, −ŷ)` for every sampled one, which
    /// makes per-class error rates equal.
    pub class_balanced: bool,
    pub seed: u64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            omega_size: 3,
            p_range: (0.3, 0.9),
            prior_pos: 0.5,
            class_balanced: false,
            seed: 0,
        }
    }
}

impl InstanceSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn balanced(mut self) -> Self {
        self.class_balanced = true;
        self
    }
}

/// Samples an outcome table for `wbar`: `ŷ_i(a) = +1` with probability
/// `p_i ~ U[p_range]`, labels from the prior, uniform weights.
pub fn gen_instance(wbar: &InfluenceMatrix, spec: &InstanceSpec) -> Result<Instance> {
    let (lo, hi) = spec.p_range;
    probability("p_range.0", lo)?;
    probability("p_range.1", hi)?;
    probability("prior_pos", spec.prior_pos)?;
    if lo > hi {
        return Err(Error::InvalidParameter("p_range must be increasing".into()));
    }
    if spec.omega_size == 0 {
        return Err(Error::InvalidParameter("omega_size must be positive".into()));
    }
    let n = wbar.n();
    let mut rng = rng(spec.seed);
    let p: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    let copies = if spec.class_balanced { 2 } else { 1 };
    let weight = 1.0 / (spec.omega_size * copies) as f64;
    let mut outcomes = Vec::with_capacity(spec.omega_size * copies);
    for _ in 0..spec.omega_size {
        let label: i8 = if rng.random::<f64>() < spec.prior_pos { 1 } else { -1 };
        let preds: Vec<i8> = p
            .iter()
            .map(|&pi| if rng.random::<f64>() < pi { 1 } else { -1 })
            .collect();
        if spec.class_balanced {
            outcomes.push(Outcome::new(weight, -label, preds.iter().map(|v| -v).collect()));
        }
        outcomes.push(Outcome::new(weight, label, preds));
    }
    Instance::new(wbar.clone(), outcomes)
}

/// Samples `omega_size` outcomes from the group model.
pub fn gen_group_instance(wbar: &InfluenceMatrix, group: &GroupStructure, omega_size: usize, seed: u64) -> Result<Instance> {
    let n = wbar.n();
    if group.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: group.n(),
        });
    }
    if omega_size == 0 {
        return Err(Error::InvalidParameter("omega_size must be positive".into()));
    }
    let mut rng = rng(seed);
    let weight = 1.0 / omega_size as f64;
    let mut outcomes = Vec::with_capacity(omega_size);
    for _ in 0..omega_size {
        let label: i8 = if rng.random::<f64>() < group.prior_pos { 1 } else { -1 };
        let grouped = rng.random::<f64>() < group.rho;
        let red_wrong = rng.random::<f64>() < group.err_r;
        let preds = (0..n)
            .map(|j| {
                let wrong = match (grouped, group.colors[j]) {
                    (true, Color::Red) => red_wrong,
                    (true, Color::Blue) => !red_wrong,
                    _ => rng.random::<f64>() < group.err_indv[j],
                };
                if wrong {
                    -label
                } else {
                    label
                }
            })
            .collect();
        outcomes.push(Outcome::new(weight, label, preds));
    }
    Instance::new(wbar.clone(), outcomes)
}

/// A random group structure: `red` and `blue` agents chosen uniformly,
/// individual error rates from `err_range`.
pub fn random_group(n: usize, red: usize, blue: usize, rho: f64, err_r: f64, err_range: (f64, f64), seed: u64) -> Result<GroupStructure> {
    if red + blue > n {
        return Err(Error::InvalidParameter(format!(
            "{red} red + {blue} blue agents exceed n = {n}"
        )));
    }
    let mut rng = rng(seed);
    let mut colors = vec![Color::White; n];
    let picked = sample(&mut rng, n, red + blue).into_vec();
    for (t, j) in picked.into_iter().enumerate() {
        colors[j] = if t < red { Color::Red } else { Color::Blue };
    }
    let (lo, hi) = err_range;
    let err = (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    GroupStructure::new(colors, rho, err, err_r)
}

/// Agent indices of the adversarial fixture.
pub mod fixture {
    pub const U1: usize = 0;
    pub const U2: usize = 1;
    pub const U3: usize = 2;
    pub const U4: usize = 3;

    /// `v_j` for `j ∈ 1..=2n`.
    pub fn v(j: usize) -> usize {
        3 + j
    }
}

/// Two networks with the same `W̄` and error rates but different optimal
/// interventions. `v_1..v_n` listen to `u1, u2`, `v_{n+1}..v_{2n}` to
/// `u3, u4`. In variant 1 `u1 = −u2` and `u3 = u4`; variant 2 swaps.
pub fn adversarial_fixture(n: usize, variant: u8) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if variant != 1 && variant != 2 {
        return Err(Error::InvalidParameter(format!("variant {variant} is not 1 or 2")));
    }
    use fixture::*;
    let size = 4 + 2 * n;
    let mut w = DMatrix::identity(size, size);
    for j in 1..=2 * n {
        let (a, b) = if j <= n { (U1, U2) } else { (U3, U4) };
        w[(v(j), a)] = 1.0;
        w[(v(j), b)] = 1.0;
    }
    let wbar = InfluenceMatrix::new(w)?;
    let mut outcomes = Vec::with_capacity(4);
    for c1 in [1i8, -1] {
        for c2 in [1i8, -1] {
            let mut preds = vec![1i8; size];
            preds[U1] = c1;
            preds[U3] = c2;
            if variant == 1 {
                preds[U2] = -c1;
                preds[U4] = c2;
            } else {
                preds[U2] = c1;
                preds[U4] = -c2;
            }
            outcomes.push(Outcome::new(0.25, 1, preds));
        }
    }
    Instance::new(wbar, outcomes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexBase {
    Zero,
    One,
    /// 1-based unless some index is 0.
    Auto,
}

/// Parses `u v [w]` lines separated by whitespace or commas; `#` starts a
/// comment. Undirected lists are mirrored.
pub fn load_edge_list(text: &str, base: IndexBase, undirected: bool) -> Result<InfluenceMatrix> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse(format!(
                "line {}: expected `u v [w]`, got `{line}`",
                lineno + 1
            )));
        }
        let idx = |f: &str| {
            f.parse::<usize>()
                .map_err(|e| Error::Parse(format!("line {}: `{f}`: {e}", lineno + 1)))
        };
        let w = match fields.get(2) {
            Some(f) => f
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: `{f}`: {e}", lineno + 1)))?,
            None => 1.0,
        };
        edges.push((idx(fields[0])?, idx(fields[1])?, w));
    }
    let min = edges.iter().map(|e| e.0.min(e.1)).min();
    let offset = match base {
        IndexBase::Zero => 0,
        IndexBase::One => 1,
        IndexBase::Auto => usize::from(min != Some(0)),
    };
    if offset == 1 && min == Some(0) {
        return Err(Error::Parse("index 0 in a 1-based edge list".into()));
    }
    let n = edges.iter().map(|e| e.0.max(e.1) + 1 - offset).max().unwrap_or(0);
    let mut a = DMatrix::zeros(n, n);
    for (u, v, w) in edges {
        let (u, v) = (u - offset, v - offset);
        a[(u, v)] = w;
        if undirected {
            a[(v, u)] = w;
        }
    }
    InfluenceMatrix::new(a)
}
