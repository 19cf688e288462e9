//! Baselines, the accuracy metric, and k-sweeps.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::top_k;
use crate::approx_ind::greedy_egal_appx_ind;
use crate::egal_exact::greedy_egal_exact;
use crate::error::{Error, Result};
use crate::generators::{gen_instance, gen_wbar, rng, GraphSpec, InstanceSpec};
use crate::instance::{Instance, InterventionPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Random,
    Degree,
    ErrRate,
    DegXErr,
    Appx,
    Egal,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Random,
        Method::Degree,
        Method::ErrRate,
        Method::DegXErr,
        Method::Appx,
        Method::Egal,
    ];

    pub const BASELINES: [Method; 4] = [Method::Random, Method::Degree, Method::ErrRate, Method::DegXErr];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "Random",
            Method::Degree => "Degree",
            Method::ErrRate => "ErrRate",
            Method::DegXErr => "DegXErr",
            Method::Appx => "Appx",
            Method::Egal => "Egal",
        }
    }

    /// Whether the method sees only `W̄` and the error rates.
    pub fn rates_only(self) -> bool {
        !matches!(self, Method::Egal | Method::Random)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

/// Number of nonzero off-diagonal entries in column `j` of `W̄`.
pub fn in_degree(instance: &Instance) -> Vec<f64> {
    let w = instance.wbar();
    let n = w.n();
    (0..n)
        .map(|j| (0..n).filter(|&i| i != j && w.get(i, j) != 0.0).count() as f64)
        .collect()
}

/// The method's first `k` picks, in order.
pub fn select(method: Method, instance: &Instance, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = instance.n();
    if k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let err = || instance.error_profile().err;
    match method {
        Method::Random => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng(seed));
            order.truncate(k);
            Ok(order)
        }
        Method::Degree => top_k(&in_degree(instance), k),
        Method::ErrRate => top_k(&err(), k),
        Method::DegXErr => {
            let scores: Vec<f64> = in_degree(instance).iter().zip(err()).map(|(d, e)| d * e).collect();
            top_k(&scores, k)
        }
        Method::Appx => Ok(greedy_egal_appx_ind(instance.wbar(), &err(), k)?.0.s),
        Method::Egal => Ok(greedy_egal_exact(instance, k, 1.0)?.0.s),
    }
}

/// `G^egal(S) / Z^f`, or 1 when nothing is faulty.
pub fn accuracy(instance: &Instance, plan: &InterventionPlan) -> Result<f64> {
    let faulty = instance.faulty_mass();
    if faulty == 0.0 {
        return Ok(1.0);
    }
    Ok(instance.gain_egal_direct(plan)? / faulty)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: Method,
    pub seed: u64,
    pub k: usize,
    pub gain: f64,
    pub acc: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SweepOptions {
    pub phi: f64,
    /// Record per-k selection time; rows are otherwise byte-reproducible
    /// with `wall_ms = 0`.
    pub timing: bool,
}

impl SweepOptions {
    pub fn new() -> Self {
        Self { phi: 1.0, timing: false }
    }
}

/// Acc for `k = 1..=k_max` for each method, rows grouped by method in the
/// given order.
pub fn sweep(instance: &Instance, methods: &[Method], k_max: usize, seed: u64, opts: SweepOptions) -> Result<Vec<SweepRow>> {
    let n = instance.n();
    if k_max == 0 || k_max > n {
        return Err(Error::KOutOfRange { k: k_max, n });
    }
    let per_method: Vec<Result<Vec<SweepRow>>> = methods
        .par_iter()
        .map(|&method| {
            let full = if opts.timing {
                None
            } else {
                Some(select(method, instance, k_max, seed)?)
            };
            (1..=k_max)
                .map(|k| {
                    let (s, wall_ms) = match &full {
                        Some(full) => (full[..k].to_vec(), 0.0),
                        None => {
                            let start = Instant::now();
                            let s = select(method, instance, k, seed)?;
                            (s, start.elapsed().as_secs_f64() * 1e3)
                        }
                    };
                    let plan = InterventionPlan::new(s, opts.phi);
                    let gain = instance.gain_egal_direct(&plan)?;
                    let acc = accuracy(instance, &plan)?;
                    Ok(SweepRow {
                        method,
                        seed,
                        k,
                        gain,
                        acc,
                        wall_ms,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_method {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Smallest `k` with `Acc > tau`.
pub fn k_at(rows: &[SweepRow], method: Method, seed: u64, tau: f64) -> Option<usize> {
    rows.iter()
        .filter(|r| r.method == method && r.seed == seed && r.acc > tau)
        .map(|r| r.k)
        .min()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub seed: u64,
    pub k_max: usize,
    pub acc_at_k_max: f64,
    pub k_at_90: Option<usize>,
    pub k_at_75: Option<usize>,
}

pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, u64)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.method, r.seed)) {
            keys.push((r.method, r.seed));
        }
    }
    keys.into_iter()
        .map(|(method, seed)| {
            let last = rows
                .iter()
                .filter(|r| r.method == method && r.seed == seed)
                .max_by_key(|r| r.k)
                .expect("key came from rows");
            SummaryRow {
                method,
                seed,
                k_max: last.k,
                acc_at_k_max: last.acc,
                k_at_90: k_at(rows, method, seed, 0.9),
                k_at_75: k_at(rows, method, seed, 0.75),
            }
        })
        .collect()
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("method,seed,k,gain,acc,wall_ms\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{},{}", r.method, r.seed, r.k, r.gain, r.acc, r.wall_ms).unwrap();
    }
    out
}

pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    let fmt_k = |k: Option<usize>, k_max: usize| k.map_or(format!(">{k_max}"), |k| k.to_string());
    let mut out = String::from("method,seed,k_max,acc_at_k_max,k_at_acc_gt_90,k_at_acc_gt_75\n");
    for s in summary {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.method,
            s.seed,
            s.k_max,
            s.acc_at_k_max,
            fmt_k(s.k_at_90, s.k_max),
            fmt_k(s.k_at_75, s.k_max)
        )
        .unwrap();
    }
    out
}

/// `⌈log₂ n⌉`.
pub fn default_k(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()) as usize
}

/// Generates one `(W̄, instance)` per seed from the experiment defaults and
/// sweeps every method on each.
pub fn sweep_dataset(graph: impl Fn(u64) -> GraphSpec + Sync, seeds: &[u64], methods: &[Method], k_max: usize, opts: SweepOptions) -> Result<Vec<SweepRow>> {
    let per_seed: Vec<Result<Vec<SweepRow>>> = seeds
        .par_iter()
        .map(|&seed| {
            let wbar = gen_wbar(&graph(seed))?;
            let instance = gen_instance(&wbar, &InstanceSpec::with_seed(seed))?;
            sweep(&instance, methods, k_max, seed, opts)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}
