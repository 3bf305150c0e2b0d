// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! `relcut` command-line front end. Every subcommand prints one JSON
//! document; see `docs/json-schema.md` for the fields.

mod json;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use relcut::bounds::{grid_verify_appendix, GridReport};
use relcut::cutstore::HashTable;
use relcut::estimator::Method;
use relcut::oracle::Oracle;
use relcut::pipeline::{estimate_unreliability, Branch, BranchEvidence, PipelineConfig};
use relcut::rca::{enumerate_alpha_cuts, reconstruct, run_tree_with, RcaKind, ReplaySpec, DEFAULT_C_ENUM};
use relcut::{corpus, log_log_slope, Error, MultiGraph, StreamKey};

const SCHEMA_VERSION: u32 = 1;
const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser)]
#[command(name = "relcut", version, about = "All-terminal unreliability estimation for multigraphs")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "RELCUT_THREADS")]
    threads: Option<usize>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the probability that the graph disconnects.
    Estimate(EstimateArgs),
    /// Exact minimum cut.
    Mincut(GraphArg),
    /// Enumerate the cuts of weight at most alpha times the minimum cut.
    Cuts(CutsArgs),
    /// Exact brute-force quantities for small graphs.
    Oracle(OracleArgs),
    /// Check the bound-function inequalities on a parameter grid.
    VerifyBounds(VerifyArgs),
    /// Timing and scaling measurements.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GraphArg {
    /// Graph file, or `@name` for a built-in graph such as `@c6`, `@k4`,
    /// `@odd5x3` or `@dumbbell`.
    #[arg(long)]
    graph: String,
}

#[derive(Clone, Copy, Debug)]
enum Seed {
    Fixed(u64),
    Random,
}

impl FromStr for Seed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "random" {
            return Ok(Seed::Random);
        }
        s.parse().map(Seed::Fixed).map_err(|_| format!("expected an integer or `random`, found `{s}`"))
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Seed::Fixed(s) => write!(f, "{s}"),
            Seed::Random => f.write_str("random"),
        }
    }
}

impl Seed {
    fn resolve(self) -> u64 {
        match self {
            Seed::Fixed(s) => s,
            Seed::Random => rand::random(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ForceBranch {
    Mc,
    Cuts,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Independent edge failure probability.
    #[arg(long)]
    p: f64,
    /// Target relative error.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = Seed::Fixed(DEFAULT_SEED), value_parser = Seed::from_str)]
    seed: Seed,
    /// Gate exponent: the gate draws phi * n^k samples.
    #[arg(long, default_value_t = 2.5)]
    k: f64,
    #[arg(long, default_value_t = 4.0)]
    phi: f64,
    /// Estimator trials are lambda / eps^2.
    #[arg(long, default_value_t = 64.0)]
    lambda: f64,
    /// Cut-branch RCA runs are c_pipe * n^3 / eps^2.
    #[arg(long, default_value_t = 1.0)]
    c_pipe: f64,
    /// Monte-Carlo sample budget is c_mc * n^k / eps^2.
    #[arg(long, default_value_t = 64.0)]
    c_mc: f64,
    #[arg(long, value_enum)]
    force_branch: Option<ForceBranch>,
}

#[derive(Args)]
struct CutsArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = Seed::Fixed(DEFAULT_SEED), value_parser = Seed::from_str)]
    seed: Seed,
    #[arg(long, default_value_t = DEFAULT_C_ENUM)]
    c_enum: f64,
    /// Also write the collection in the binary format.
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OracleWhat {
    ExactU,
    Zbar,
    AlphaCuts,
    AllCuts,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, value_enum)]
    what: OracleWhat,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0.001)]
    grid_step: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchWhat {
    /// RCA2 tree sizes on cycles.
    Rca2,
    /// End-to-end estimates on the built-in corpus against the oracle.
    Corpus,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "rca2")]
    what: BenchWhat,
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 64, 128, 256])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = Seed::Fixed(DEFAULT_SEED), value_parser = Seed::from_str)]
    seed: Seed,
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::VertexOutOfRange(_)
            | Error::SelfLoop(_)
            | Error::DuplicateEdge(..)
            | Error::Disconnected
            | Error::Format(_) => 1,
            Error::NoMinCut(_) | Error::ReconstructMismatch(_) | Error::EmptyCollection => 3,
            _ => 2,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 1, msg: format!("{}: {e}", path.display()) }
}

fn load_graph(arg: &GraphArg) -> Result<MultiGraph, Failure> {
    if let Some(name) = arg.graph.strip_prefix('@') {
        return corpus::named(name).map_err(|e| Failure { code: 1, msg: e.to_string() });
    }
    let path = Path::new(&arg.graph);
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    MultiGraph::parse(&text).map_err(|e| Failure { code: 1, msg: format!("{}: {e}", path.display()) })
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    schema_version: u32,
    command: &'static str,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct EstimateOut {
    estimate: f64,
    rel_std: f64,
    method: Method,
    branch_evidence: BranchEvidence,
    n: usize,
    m: u64,
    c: u64,
    p: f64,
    eps: f64,
    delta: f64,
    rho: f64,
    alpha_star_max: Option<f64>,
    beta_diag: Option<f64>,
    alpha_used: Option<f64>,
    rca_runs: Option<u64>,
    collection_size: Option<usize>,
    weight_histogram: Option<Vec<(u64, u64)>>,
    trials: u64,
    aborts: u64,
    rel_var_per_trial: f64,
    seed: u64,
    wall_time_ms: u64,
}

fn cmd_estimate(a: &EstimateArgs) -> Result<EstimateOut, Failure> {
    let g = load_graph(&a.graph)?;
    let seed = a.seed.resolve();
    let config = PipelineConfig {
        k: a.k,
        phi: a.phi,
        lambda: a.lambda,
        c_pipe: a.c_pipe,
        c_mc: a.c_mc,
        force_branch: a.force_branch.map(|b| match b {
            ForceBranch::Mc => Branch::MonteCarlo,
            ForceBranch::Cuts => Branch::CutEnumeration,
        }),
        ..PipelineConfig::default()
    };
    let start = Instant::now();
    let r = estimate_unreliability(&g, a.p, a.eps, StreamKey::from_seed(seed), &config)?;
    let wall_time_ms = start.elapsed().as_millis() as u64;
    let cuts = r.cuts.as_ref();
    Ok(EstimateOut {
        estimate: r.estimate.value,
        rel_std: r.estimate.rel_std,
        method: r.estimate.method,
        branch_evidence: r.evidence,
        n: r.params.n,
        m: r.params.m,
        c: r.params.c,
        p: a.p,
        eps: a.eps,
        delta: r.params.delta,
        rho: r.params.rho,
        alpha_star_max: r.params.alpha_star_max,
        beta_diag: r.params.beta_diag,
        alpha_used: cuts.map(|c| c.alpha),
        rca_runs: cuts.map(|c| c.rca_runs),
        collection_size: cuts.map(|c| c.collection_size),
        weight_histogram: cuts.map(|c| c.weight_histogram.clone()),
        trials: r.estimate.trials,
        aborts: r.estimate.aborts,
        rel_var_per_trial: r.estimate.rel_var_per_trial,
        seed,
        wall_time_ms,
    })
}

#[derive(Serialize)]
struct MincutOut {
    c: u64,
    shore: Vec<usize>,
    n: usize,
    m: u64,
}

fn cmd_mincut(a: &GraphArg) -> Result<MincutOut, Failure> {
    let g = load_graph(a)?;
    let (c, cut) = g.min_cut()?;
    Ok(MincutOut { c, shore: cut.shore.iter().collect(), n: g.n(), m: g.m() })
}

#[derive(Serialize)]
struct CutOut {
    id: u64,
    weight: u64,
    shore: Vec<usize>,
}

#[derive(Serialize)]
struct CutsOut {
    c: u64,
    alpha: f64,
    count: usize,
    hash_bits: u32,
    kind: &'static str,
    weight_histogram: Vec<(u64, u64)>,
    records: Vec<CutOut>,
    seed: u64,
}

fn cmd_cuts(a: &CutsArgs) -> Result<CutsOut, Failure> {
    let g = load_graph(&a.graph)?;
    let seed = a.seed.resolve();
    let (c, _) = g.min_cut()?;
    let coll = enumerate_alpha_cuts(&g, a.alpha, StreamKey::from_seed(seed), a.c_enum)?;
    let mut records = Vec::with_capacity(coll.len());
    for r in coll.records() {
        let cut = reconstruct(r, &g, &coll.replay, &coll.table)?;
        records.push(CutOut { id: r.id, weight: r.weight, shore: cut.shore.iter().collect() });
    }
    if let Some(path) = &a.save {
        let file = std::fs::File::create(path).map_err(|e| io_failure(path, e))?;
        coll.write_to(std::io::BufWriter::new(file)).map_err(|e| io_failure(path, e))?;
    }
    Ok(CutsOut {
        c,
        alpha: a.alpha,
        count: coll.len(),
        hash_bits: coll.table.bits(),
        kind: match coll.replay.kind {
            RcaKind::Halving => "halving",
            RcaKind::Rca2 => "rca2",
        },
        weight_histogram: coll.weight_histogram(),
        records,
        seed,
    })
}

#[derive(Serialize)]
struct OracleCut {
    weight: u64,
    shore: Vec<usize>,
}

#[derive(Serialize)]
struct OracleOut {
    what: OracleWhat,
    p: Option<f64>,
    value: Option<f64>,
    cuts: Option<Vec<OracleCut>>,
}

fn cmd_oracle(a: &OracleArgs) -> Result<OracleOut, Failure> {
    let g = load_graph(&a.graph)?;
    let oracle = Oracle::default();
    let need_p = || a.p.ok_or_else(|| Failure { code: 2, msg: "--p is required for this query".into() });
    let listed = |cuts: Vec<relcut::Cut>| {
        cuts.into_iter().map(|c| OracleCut { weight: c.weight, shore: c.shore.iter().collect() }).collect()
    };
    let (value, cuts) = match a.what {
        OracleWhat::ExactU => (Some(oracle.exact_u(&g, need_p()?)?), None),
        OracleWhat::Zbar => (Some(oracle.zbar(&g, need_p()?)?), None),
        OracleWhat::AlphaCuts => (None, Some(listed(oracle.alpha_cuts(&g, a.alpha)?))),
        OracleWhat::AllCuts => (None, Some(listed(oracle.all_cuts(&g)?))),
    };
    Ok(OracleOut { what: a.what, p: a.p, value, cuts })
}

#[derive(Serialize)]
struct VerifyOut {
    #[serde(flatten)]
    report: GridReport,
    wall_time_ms: u64,
}

fn cmd_verify(a: &VerifyArgs) -> Result<VerifyOut, Failure> {
    let start = Instant::now();
    let report = grid_verify_appendix(a.grid_step)?;
    Ok(VerifyOut { report, wall_time_ms: start.elapsed().as_millis() as u64 })
}

#[derive(Serialize)]
struct Rca2Point {
    n: usize,
    node_count: u64,
    leaves: u64,
    wall_time_ms: u64,
}

#[derive(Serialize)]
struct CorpusPoint {
    graph: &'static str,
    exact: f64,
    estimate: f64,
    rel_error: f64,
    method: Method,
    wall_time_ms: u64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum BenchOut {
    Rca2 { alpha: f64, points: Vec<Rca2Point>, node_count_slope: f64 },
    Corpus { p: f64, eps: f64, seed: u64, points: Vec<CorpusPoint> },
}

fn cmd_bench(a: &BenchArgs) -> Result<BenchOut, Failure> {
    let seed = a.seed.resolve();
    match a.what {
        BenchWhat::Rca2 => {
            let spec = ReplaySpec::new(RcaKind::Rca2, a.alpha, 2)?;
            let mut points = Vec::new();
            for &n in &a.sizes {
                let g = MultiGraph::cycle(n);
                let table = HashTable::new(n, 1 << 30, 3.0, StreamKey::from_seed(seed))?;
                let start = Instant::now();
                let mut leaves = 0;
                let node_count = run_tree_with(&g, &spec, StreamKey::from_seed(seed).child(1), &table, &mut |_| leaves += 1)?;
                points.push(Rca2Point { n, node_count, leaves, wall_time_ms: start.elapsed().as_millis() as u64 });
            }
            let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.node_count as f64)).collect();
            let node_count_slope = if xy.len() >= 2 { log_log_slope(&xy) } else { f64::NAN };
            Ok(BenchOut::Rca2 { alpha: a.alpha, points, node_count_slope })
        }
        BenchWhat::Corpus => {
            let oracle = Oracle::default();
            let mut points = Vec::new();
            for (name, g) in corpus::small() {
                let exact = oracle.exact_u(&g, a.p)?;
                let start = Instant::now();
                let r = estimate_unreliability(&g, a.p, a.eps, StreamKey::from_seed(seed), &PipelineConfig::default())?;
                points.push(CorpusPoint {
                    graph: name,
                    exact,
                    estimate: r.estimate.value,
                    rel_error: (r.estimate.value - exact).abs() / exact,
                    method: r.estimate.method,
                    wall_time_ms: start.elapsed().as_millis() as u64,
                });
            }
            Ok(BenchOut::Corpus { p: a.p, eps: a.eps, seed, points })
        }
    }
}

fn render<T: Serialize>(command: &'static str, body: T) -> Result<String, Failure> {
    json::to_string(&Envelope { schema_version: SCHEMA_VERSION, command, body })
        .map_err(|e| Failure { code: 3, msg: format!("serializing output: {e}") })
}

fn run(cli: &Cli) -> Result<String, Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure { code: 2, msg: format!("thread pool: {e}") })?;
    }
    match &cli.command {
        Command::Estimate(a) => render("estimate", cmd_estimate(a)?),
        Command::Mincut(a) => render("mincut", cmd_mincut(a)?),
        Command::Cuts(a) => render("cuts", cmd_cuts(a)?),
        Command::Oracle(a) => render("oracle", cmd_oracle(a)?),
        Command::VerifyBounds(a) => render("verify-bounds", cmd_verify(a)?),
        Command::Bench(a) => render("bench", cmd_bench(a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| io_failure(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("relcut: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
