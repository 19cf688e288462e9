//! Command line front end.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use crate::aggregate::{gain_agg_closed, influence_scores, select_top_k_agg};
use crate::approx_group::{greedy_egal_appx_group, w_ambiguity_report, GroupStructure};
use crate::approx_ind::{ambiguity_report, greedy_egal_appx_ind};
use crate::dynamics::{Dynamics, DynamicsSpec};
use crate::egal_exact::{brute_force_opt_egal, greedy_egal_exact};
use crate::error::{Error, Result};
use crate::generators::{
    adversarial_fixture, gen_graph, gen_group_instance, gen_instance, gen_wbar, load_edge_list,
    random_group, GraphModel, GraphSpec, IndexBase, InstanceSpec,
};
use crate::greedy::GreedyTrace;
use crate::harness::{
    accuracy, default_k, rows_to_csv, summarize, summary_to_csv, sweep, sweep_dataset, Method,
    SweepOptions,
};
use crate::instance::{Instance, InterventionPlan};
use crate::matrix::InfluenceMatrix;

#[derive(Debug, Parser)]
#[command(name = "coopnet", version, about = "Targeted interventions for networks of cooperating classifiers")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph (0/1 adjacency) or RandomW weights.
    GenGraph(GraphArgs),
    /// Sample an instance for a graph model or a given W̄.
    GenInstance(GenInstanceArgs),
    /// Generate a group structure, or sample an instance from one.
    GenGroup(GenGroupArgs),
    /// Compute W̄ for an opinion-dynamics model.
    Weights(WeightsArgs),
    /// Select an intervention set.
    Optimize(OptimizeArgs),
    /// Evaluate a given intervention set.
    Evaluate(EvaluateArgs),
    /// Accuracy sweeps over k for several methods.
    Sweep(SweepArgs),
    /// Built-in instances.
    Fixture(FixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Er,
    Pa,
    Ws,
    RandomW,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// ER edge probability or WS rewiring probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// PA edges per new node.
    #[arg(long)]
    pub m: Option<usize>,
    /// WS ring neighbors.
    #[arg(long)]
    pub k_ring: Option<usize>,
    /// RandomW zero fraction.
    #[arg(long)]
    pub sparsity: Option<f64>,
    /// Emit W̄ (three finite FJ steps) instead of the raw graph.
    #[arg(long)]
    pub wbar: bool,
}

impl GraphArgs {
    fn spec(&self, seed: u64) -> GraphSpec {
        let model = match self.model {
            ModelName::Er => GraphModel::Er {
                p: self.p.unwrap_or(0.005),
            },
            ModelName::Pa => GraphModel::Pa { m: self.m.unwrap_or(5) },
            ModelName::Ws => GraphModel::Ws {
                k: self.k_ring.unwrap_or(5),
                p: self.p.unwrap_or(0.25),
            },
            ModelName::RandomW => GraphModel::RandomW {
                sparsity: self.sparsity.unwrap_or(0.95),
            },
        };
        GraphSpec::new(model, self.n, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    Zero,
    One,
    Auto,
}

#[derive(Debug, Args)]
pub struct WbarSource {
    /// W̄ as dense or triplet CSV.
    #[arg(long, conflicts_with_all = ["model", "edges"])]
    pub wbar: Option<PathBuf>,
    /// Edge list `u v [w]`; converted with three finite FJ steps.
    #[arg(long, conflicts_with = "model")]
    pub edges: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BaseArg::Auto)]
    pub index_base: BaseArg,
    /// Graph model with experiment defaults.
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
}

impl WbarSource {
    fn load(&self, seed: u64) -> Result<InfluenceMatrix> {
        if let Some(p) = &self.wbar {
            return InfluenceMatrix::load(p);
        }
        if let Some(p) = &self.edges {
            let base = match self.index_base {
                BaseArg::Zero => IndexBase::Zero,
                BaseArg::One => IndexBase::One,
                BaseArg::Auto => IndexBase::Auto,
            };
            let w = load_edge_list(&std::fs::read_to_string(p)?, base, true)?;
            return crate::dynamics::fj_finite_steps(w.as_dmatrix(), None, crate::generators::FJ_STEPS);
        }
        let model = self
            .model
            .ok_or_else(|| Error::InvalidParameter("one of --wbar, --edges, --model is required".into()))?;
        gen_wbar(&default_spec(model, self.n, seed))
    }
}

fn default_spec(model: ModelName, n: usize, seed: u64) -> GraphSpec {
    match model {
        ModelName::Er => GraphSpec::er(n, seed),
        ModelName::Pa => GraphSpec::pa(n, seed),
        ModelName::Ws => GraphSpec::ws(n, seed),
        ModelName::RandomW => GraphSpec::random_w(n, seed),
    }
}

#[derive(Debug, Args)]
pub struct GenInstanceArgs {
    #[command(flatten)]
    pub source: WbarSource,
    #[arg(long, default_value_t = 3)]
    pub omega: usize,
    #[arg(long, default_value_t = 0.3)]
    pub p_lo: f64,
    #[arg(long, default_value_t = 0.9)]
    pub p_hi: f64,
    #[arg(long, default_value_t = 0.5)]
    pub prior: f64,
    /// Mirror every outcome so per-class error rates agree.
    #[arg(long)]
    pub balanced: bool,
}

#[derive(Debug, Args)]
pub struct GenGroupArgs {
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub red: usize,
    #[arg(long, default_value_t = 0)]
    pub blue: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.3)]
    pub err_r: f64,
    #[arg(long, default_value_t = 0.1)]
    pub err_lo: f64,
    #[arg(long, default_value_t = 0.7)]
    pub err_hi: f64,
    /// Sample an instance from this group structure instead.
    #[arg(long)]
    pub group: Option<PathBuf>,
    /// W̄ for sampling.
    #[arg(long, requires = "group")]
    pub wbar: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub omega: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DynamicsName {
    Degroot,
    Fj,
    Product,
    FjFinite,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long, value_enum)]
    pub dynamics: DynamicsName,
    /// Base weights; repeat for product factors in time order.
    #[arg(long = "w", required = true)]
    pub w: Vec<PathBuf>,
    /// Stubbornness vector for finite FJ.
    #[arg(long)]
    pub alpha: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: usize,
    /// Emit sparse `i,j,w` triplets.
    #[arg(long)]
    pub triplets: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Agg,
    Egal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptMethod {
    Exact,
    Brute,
    AppxInd,
    AppxGroup,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = Objective::Egal)]
    pub objective: Objective,
    #[arg(long, value_enum, default_value_t = OptMethod::Exact)]
    pub method: OptMethod,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// W̄ for rate-only methods without an instance.
    #[arg(long)]
    pub wbar: Option<PathBuf>,
    /// Error rates (comma or newline separated) for appx-ind.
    #[arg(long)]
    pub err: Option<PathBuf>,
    /// Take error rates from the instance (default when --err is absent).
    #[arg(long)]
    pub from_instance: bool,
    #[arg(long)]
    pub group: Option<PathBuf>,
    /// Also write the greedy trace CSV here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Comma-separated agent indices.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub set: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep one instance file instead of generated datasets.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelName::Pa)]
    pub dataset: ModelName,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "Random,Degree,ErrRate,DegXErr,Appx,Egal")]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    /// Record wall time per row.
    #[arg(long)]
    pub timing: bool,
    /// Also write the per-seed summary CSV here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[command(subcommand)]
    pub kind: FixtureKind,
}

#[derive(Debug, Subcommand)]
pub enum FixtureKind {
    /// Two networks with equal W̄ and error rates but different optima.
    Adversarial {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        variant: u8,
    },
}

/// Parses process arguments, runs, and exits with the error's code.
pub fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out = Output {
        path: cli.out.as_deref(),
        format: cli.format,
    };
    match &cli.command {
        Command::GenGraph(a) => {
            let spec = a.spec(cli.seed);
            let w = if a.wbar { gen_wbar(&spec)? } else { gen_graph(&spec)? };
            out.matrix(&w, false)
        }
        Command::GenInstance(a) => {
            let wbar = a.source.load(cli.seed)?;
            let spec = InstanceSpec {
                omega_size: a.omega,
                p_range: (a.p_lo, a.p_hi),
                prior_pos: a.prior,
                class_balanced: a.balanced,
                seed: cli.seed,
            };
            out.instance(&gen_instance(&wbar, &spec)?)
        }
        Command::GenGroup(a) => match &a.group {
            Some(g) => {
                let group = GroupStructure::load(g)?;
                let wbar_path = a
                    .wbar
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("--wbar is required with --group".into()))?;
                let wbar = InfluenceMatrix::load(wbar_path)?;
                out.instance(&gen_group_instance(&wbar, &group, a.omega, cli.seed)?)
            }
            None => {
                let g = random_group(a.n, a.red, a.blue, a.rho, a.err_r, (a.err_lo, a.err_hi), cli.seed)?;
                out.text(&g.to_json()?)
            }
        },
        Command::Weights(a) => {
            let ws = a
                .w
                .iter()
                .map(|p| InfluenceMatrix::load(p).map(InfluenceMatrix::into_dmatrix))
                .collect::<Result<Vec<DMatrix<f64>>>>()?;
            let single = || -> Result<DMatrix<f64>> {
                match ws.as_slice() {
                    [w] => Ok(w.clone()),
                    _ => Err(Error::InvalidParameter("exactly one --w is required".into())),
                }
            };
            let dynamics = match a.dynamics {
                DynamicsName::Degroot => Dynamics::DeGroot { w: single()? },
                DynamicsName::Fj => Dynamics::Fj { w: single()? },
                DynamicsName::Product => Dynamics::FiniteProduct { factors: ws.clone() },
                DynamicsName::FjFinite => Dynamics::FjFiniteSteps {
                    w: single()?,
                    alpha: a.alpha.as_ref().map(read_vector).transpose()?,
                    steps: a.steps,
                },
            };
            let spec = DynamicsSpec::new(dynamics).with_tolerance(a.tol).with_max_iter(a.max_iter);
            out.matrix(&spec.influence_matrix()?, a.triplets)
        }
        Command::Optimize(a) => optimize(a, &out),
        Command::Evaluate(a) => {
            let inst = Instance::load(&a.instance)?;
            let plan = InterventionPlan::new(a.set.clone(), a.phi);
            let report = json!({
                "S": plan.s,
                "phi": plan.phi,
                "gain_agg": inst.gain_agg_direct(&plan)?,
                "gain_egal": inst.gain_egal_direct(&plan)?,
                "faulty_mass": inst.faulty_mass(),
                "acc": accuracy(&inst, &plan)?,
            });
            match out.format {
                Format::Json => out.json(&report),
                Format::Csv => out.text(&format!(
                    "gain_agg,gain_egal,faulty_mass,acc\n{},{},{},{}\n",
                    report["gain_agg"], report["gain_egal"], report["faulty_mass"], report["acc"]
                )),
            }
        }
        Command::Sweep(a) => {
            let methods = a
                .methods
                .iter()
                .map(|m| m.parse())
                .collect::<Result<Vec<Method>>>()?;
            let opts = SweepOptions {
                phi: a.phi,
                timing: a.timing,
            };
            let rows = match &a.instance {
                Some(p) => {
                    let inst = Instance::load(p)?;
                    let k_max = a.k_max.unwrap_or_else(|| default_k(inst.n()));
                    sweep(&inst, &methods, k_max, cli.seed, opts)?
                }
                None => {
                    let seeds: Vec<u64> = (cli.seed..cli.seed + a.seeds).collect();
                    let k_max = a.k_max.unwrap_or_else(|| default_k(a.n));
                    let (model, n) = (a.dataset, a.n);
                    sweep_dataset(|s| default_spec(model, n, s), &seeds, &methods, k_max, opts)?
                }
            };
            let summary = summarize(&rows);
            if let Some(p) = &a.summary {
                std::fs::write(p, summary_to_csv(&summary))?;
            }
            match out.format {
                Format::Csv => out.text(&rows_to_csv(&rows)),
                Format::Json => out.json(&json!({ "rows": rows, "summary": summary })),
            }
        }
        Command::Fixture(FixtureArgs {
            kind: FixtureKind::Adversarial { n, variant },
        }) => out.instance(&adversarial_fixture(*n, *variant)?),
    }
}

fn optimize(a: &OptimizeArgs, out: &Output) -> Result<()> {
    let instance = a.instance.as_ref().map(Instance::load).transpose()?;
    let wbar = match (&a.wbar, &instance) {
        (Some(p), _) => InfluenceMatrix::load(p)?,
        (None, Some(inst)) => inst.wbar().clone(),
        (None, None) => {
            return Err(Error::InvalidParameter("--instance or --wbar is required".into()));
        }
    };
    let need_instance = || {
        instance
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("--instance is required for this method".into()))
    };
    let err = match (&a.err, &instance) {
        (Some(p), _) if !a.from_instance => Some(read_vector(p)?),
        (_, Some(inst)) => Some(inst.error_profile().err),
        _ => None,
    };
    let need_err = || {
        err.clone()
            .ok_or_else(|| Error::InvalidParameter("--err or --instance is required".into()))
    };
    if a.objective == Objective::Agg {
        let err = need_err()?;
        let s = select_top_k_agg(&wbar, &err, a.k)?;
        let gain_direct = match &instance {
            Some(inst) => Some(inst.gain_agg_direct(&InterventionPlan::new(s.clone(), a.phi))?),
            None => None,
        };
        return out.json(&json!({
            "S": s,
            "scores": influence_scores(&wbar, &err)?,
            "gain_closed": gain_agg_closed(&wbar, &err, &s, a.phi)?,
            "gain_direct": gain_direct,
        }));
    }
    let (s, trace, extra): (Vec<usize>, Option<GreedyTrace>, serde_json::Value) = match a.method {
        OptMethod::Exact => {
            let (plan, trace) = greedy_egal_exact(need_instance()?, a.k, a.phi)?;
            (plan.s, Some(trace), json!({}))
        }
        OptMethod::Brute => {
            let (s, opt) = brute_force_opt_egal(need_instance()?, a.k, a.phi)?;
            (s, None, json!({ "opt": opt }))
        }
        OptMethod::AppxInd => {
            let err = need_err()?;
            let (plan, trace) = greedy_egal_appx_ind(&wbar, &err, a.k)?;
            let amb = ambiguity_report(&wbar, &err)?;
            (plan.s, Some(trace), json!({ "ambiguity": amb }))
        }
        OptMethod::AppxGroup => {
            let path = a
                .group
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--group is required for appx-group".into()))?;
            let group = GroupStructure::load(path)?;
            let (plan, trace) = greedy_egal_appx_group(&wbar, &group, a.k)?;
            let amb = w_ambiguity_report(&wbar, &group)?;
            (plan.s, Some(trace), json!({ "ambiguity": amb }))
        }
    };
    if let (Some(p), Some(t)) = (&a.trace, &trace) {
        std::fs::write(p, t.to_csv())?;
    }
    let plan = InterventionPlan::new(s, a.phi);
    let (gain, acc) = match &instance {
        Some(inst) => (Some(inst.gain_egal_direct(&plan)?), Some(accuracy(inst, &plan)?)),
        None => (None, None),
    };
    let mut report = json!({
        "S": plan.s,
        "phi": plan.phi,
        "gain_egal": gain,
        "acc": acc,
        "trace": trace.map(|t| t.selections),
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (report.as_object_mut(), extra) {
        obj.extend(more);
    }
    out.json(&report)
}

/// Reads reals separated by commas, whitespace, or newlines.
fn read_vector(path: &PathBuf) -> Result<Vec<f64>> {
    std::fs::read_to_string(path)?
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("`{f}`: {e}"))))
        .collect()
}

struct Output<'a> {
    path: Option<&'a Path>,
    format: Format,
}

impl Output<'_> {
    fn text(&self, s: &str) -> Result<()> {
        match self.path {
            Some(p) => std::fs::write(p, s)?,
            None => std::io::stdout().lock().write_all(s.as_bytes())?,
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.text(&s)
    }

    fn matrix(&self, w: &InfluenceMatrix, triplets: bool) -> Result<()> {
        match self.format {
            Format::Json => self.json(&json!({ "n": w.n(), "rows": w.rows() })),
            Format::Csv if triplets => self.text(&w.to_triplet_csv()),
            Format::Csv => self.text(&w.to_dense_csv()),
        }
    }

    /// With an output path, `W̄` goes to a sibling CSV referenced by name.
    fn instance(&self, inst: &Instance) -> Result<()> {
        match self.path {
            Some(p) => {
                let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
                let csv_name = format!("{stem}.wbar.csv");
                let csv_path = p.with_file_name(&csv_name);
                inst.wbar().save(&csv_path)?;
                self.text(&inst.to_json_with_path(&csv_name)?)
            }
            None => self.text(&inst.to_json_inline()?),
        }
    }
}
