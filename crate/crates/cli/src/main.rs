use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dicount::containers::{family_size_bound, kw_check_hypothesis, kw_family, KWConfig};
use dicount::counting::{count_acyclic, count_bruteforce, count_propagate_limited, log2_big};
use dicount::density::{is_r_locally_dense, Frame, Params};
use dicount::encode::{encode_with, fingerprint_degree_report, EncodeInput, Line5Rule};
use dicount::io::{
    parse_graph, parse_orientation, read_to_string, write_atomic, write_digraph, write_graph, write_orientation,
};
use dicount::keylemma::{estimate_dense_case, estimate_sparse_case, Budget};
use dicount::sampling::{sample_extension, sample_gnp, sample_orientation};
use dicount::sweep::{run_sweep, theorem_bound_check, to_csv, Method, SweepSpec};
use dicount::{Error, Graph, Orientation, Result, Seed, VertexSet};

#[derive(Parser)]
#[command(name = "dicount", version, about = "Count and analyse orientations without directed k-cycles")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the main result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format for tabular results.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMethod {
    Propagate,
    Bruteforce,
    Acyclic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    I,
    Ii,
}

#[derive(Clone, Copy, ValueEnum)]
enum Line5 {
    Set,
    Degree,
}

#[derive(Subcommand)]
enum Command {
    /// Sample G(n, p), or G(A, H, p) with --extend, optionally oriented.
    Sample {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: f64,
        /// Edge list of H; A is every vertex outside V(H) listed by --a.
        #[arg(long)]
        extend: Option<PathBuf>,
        #[arg(long, value_parser = parse_vertices)]
        a: Option<Vec<usize>>,
        /// Emit a uniformly random orientation instead of the graph.
        #[arg(long)]
        orient: bool,
    },
    /// Exact number of orientations with no directed k-cycle.
    Count {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "propagate")]
        method: CountMethod,
        #[arg(long, default_value_t = u64::MAX)]
        node_limit: u64,
    },
    /// Check whether an orientation is r-locally dense.
    Density {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = dicount::density::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Run the fingerprint/container encoder on one extension.
    Encode {
        /// `key = value` lines giving r, a, b and x (vertex lists).
        #[arg(long)]
        frame: PathBuf,
        /// Orientation of G on A ∪ V(H).
        #[arg(long)]
        orientation: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "set")]
        line5: Line5,
    },
    /// Graph containers for the independent sets of a graph.
    Kw {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        q: usize,
        #[arg(long = "R")]
        r: f64,
        /// List every container (needs at most 20 vertices).
        #[arg(long)]
        enumerate: bool,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// Monte Carlo estimate for one of the two extension bounds.
    VerifyKeyLemma {
        #[arg(long, value_enum)]
        case: Case,
        /// Orientation on the full ground set; H is everything outside A.
        #[arg(long)]
        input: PathBuf,
        /// `key = value` lines giving a (and for case i also r, b, x).
        #[arg(long)]
        frame: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        #[arg(long, default_value_t = 1 << 20)]
        extension_limit: u64,
    },
    /// Exact counts over a grid of (n, p, k, seed).
    Sweep(SweepArgs),
    /// Sweep, then compare every count with the closed-form upper bound.
    BoundCheck(SweepArgs),
}

#[derive(Args)]
struct ParamArgs {
    /// Forbidden cycle length; ℓ = k - 2.
    #[arg(long)]
    k: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = Params::DEFAULT_ALPHA_SCALE, conflicts_with = "alpha")]
    alpha_scale: f64,
    /// Set α directly instead of through --alpha-scale.
    #[arg(long)]
    alpha: Option<f64>,
}

impl ParamArgs {
    fn params(&self, n: usize) -> Result<Params> {
        if self.k < 3 {
            return Err(Error::Precondition(format!("k = {} below 3", self.k)));
        }
        match self.alpha {
            Some(a) => Params::with_alpha(self.k - 2, self.p, n, a),
            None => Params::new(self.k - 2, self.p, n, self.alpha_scale),
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    max_edges: Option<usize>,
    #[arg(long)]
    node_limit: Option<u64>,
}

impl SweepArgs {
    fn spec(&self, global: &Global) -> Result<SweepSpec> {
        let mut spec = SweepSpec::default();
        if let Some(path) = &self.config {
            spec.apply_config(&read_to_string(path)?)?;
        }
        if let Some(v) = &self.n {
            spec.n_values = v.clone();
        }
        if let Some(v) = &self.p {
            spec.p_values = v.clone();
        }
        if let Some(v) = &self.k {
            spec.k_values = v.clone();
        }
        if let Some(v) = self.seeds {
            spec.seeds_per_cell = v;
        }
        if let Some(m) = &self.method {
            spec.method = m.parse::<Method>()?;
        }
        if let Some(v) = self.max_edges {
            spec.max_edges = v;
        }
        if let Some(v) = self.node_limit {
            spec.node_limit = v;
        }
        if global.seed != 0 || self.config.is_none() {
            spec.base_seed = global.seed;
        }
        if global.output.is_some() {
            spec.output_path.clone_from(&global.output);
        }
        Ok(spec)
    }
}

fn parse_vertices(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for tok in s.split([',', ' ']).map(str::trim).filter(|t| !t.is_empty()) {
        let bad = || format!("bad vertex list element {tok:?}");
        match tok.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi): (usize, usize) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
                out.extend(lo..=hi);
            }
            None => out.push(tok.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

/// Vertex sets and `r` read from a frame file.
struct FrameSets {
    r: Option<usize>,
    a: Vec<usize>,
    b: Vec<usize>,
    x: Vec<usize>,
}

fn parse_frame_file(text: &str) -> Result<FrameSets> {
    let mut f = FrameSets { r: None, a: Vec::new(), b: Vec::new(), x: Vec::new() };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(Error::Parse { line, msg: "expected `key = value`".into() })?;
        let list = || parse_vertices(value).map_err(|msg| Error::Parse { line, msg });
        match key.trim().to_ascii_lowercase().as_str() {
            "r" => f.r = Some(value.trim().parse().map_err(|_| Error::Parse { line, msg: "bad r".into() })?),
            "a" => f.a = list()?,
            "b" => f.b = list()?,
            "x" => f.x = list()?,
            other => return Err(Error::Parse { line, msg: format!("unknown key {other:?}") }),
        }
    }
    Ok(f)
}

fn vertex_set(n: usize, items: Vec<usize>) -> Result<VertexSet> {
    match items.iter().find(|&&v| v >= n) {
        Some(v) => Err(Error::Precondition(format!("vertex {v} outside the ground set 0..{n}"))),
        None => Ok(VertexSet::from_iter_n(n, items)),
    }
}

fn emit(global: &Global, bytes: &[u8]) -> Result<()> {
    match &global.output {
        Some(path) => write_atomic(path, bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(global: &Global, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    emit(global, &bytes)
}

fn read_graph(path: &Path) -> Result<Graph> {
    parse_graph(&read_to_string(path)?)
}

fn read_orientation(path: &Path) -> Result<Orientation> {
    parse_orientation(&read_to_string(path)?)
}

#[derive(Serialize)]
struct CountReport {
    k: usize,
    method: &'static str,
    vertices: usize,
    edge_count: usize,
    count: String,
    log_count: f64,
    log2_count: f64,
    nodes_explored: u64,
    runtime_ms: f64,
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let seed = Seed(g.seed);
    match cli.command {
        Command::Sample { n, p, extend, a, orient } => {
            let graph = match extend {
                Some(path) => {
                    let base = read_graph(&path)?;
                    let a = vertex_set(base.n(), a.unwrap_or_default())?;
                    let h = base.induced(&a.complement());
                    sample_extension(&a, &h, p, seed)?
                }
                None => {
                    let n = n.ok_or(Error::Precondition("--n is required without --extend".into()))?;
                    sample_gnp(n, p, seed)?
                }
            };
            let body = if orient {
                write_orientation(&sample_orientation(&graph, seed.split(1)))
            } else {
                write_graph(&graph)
            };
            let header = format!("# sample n={} p={p} seed={}\n", graph.n(), seed.0);
            emit(g, (header + &body).as_bytes())
        }
        Command::Count { input, k, method, node_limit } => {
            let graph = read_graph(&input)?;
            let started = std::time::Instant::now();
            let (name, count, nodes) = match method {
                CountMethod::Propagate => {
                    let r = count_propagate_limited(&graph, k, node_limit)?;
                    ("propagate", r.count, r.nodes_explored)
                }
                CountMethod::Bruteforce => {
                    let r = count_bruteforce(&graph, k)?;
                    ("bruteforce", r.count, r.nodes_explored)
                }
                CountMethod::Acyclic => ("acyclic", count_acyclic(&graph)?, 0),
            };
            let log2 = log2_big(&count);
            let report = CountReport {
                k,
                method: name,
                vertices: graph.vertices().len(),
                edge_count: graph.edge_count(),
                count: count.to_str_radix(10),
                log_count: log2 * std::f64::consts::LN_2,
                log2_count: log2,
                nodes_explored: nodes,
                runtime_ms: started.elapsed().as_secs_f64() * 1e3,
            };
            if g.format == Some(Format::Csv) {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.serialize(&report)?;
                return emit(g, &w.into_inner().map_err(|e| Error::Io(e.into_error()))?);
            }
            emit_json(g, &report)
        }
        Command::Density { input, r, params, budget } => {
            let o = read_orientation(&input)?;
            let params = params.params(o.vertices().len())?;
            let verdict = is_r_locally_dense(&o, r, &params, budget, seed)?;
            #[derive(Serialize)]
            struct Out<'a> {
                params: Params,
                outside_regime: bool,
                rounding: &'static str,
                verdict: &'a dicount::density::DensityVerdict,
            }
            emit_json(
                g,
                &Out {
                    params,
                    outside_regime: params.outside_regime(),
                    rounding: "|A'| = ceil(alpha), |B| in [ceil(r alpha), ceil(l alpha)], |X| <= floor((l+1-r) alpha)",
                    verdict: &verdict,
                },
            )
        }
        Command::Encode { frame, orientation, params, line5 } => {
            let o = read_orientation(&orientation)?;
            let sets = parse_frame_file(&read_to_string(&frame)?)?;
            let n = o.n();
            let params = params.params(o.vertices().len())?;
            let a = vertex_set(n, sets.a)?;
            let h = o.base().induced(&o.vertices().difference(&a));
            let frame = Frame {
                a: a.clone(),
                h,
                b: vertex_set(n, sets.b)?,
                x: vertex_set(n, sets.x)?,
                r: sets.r.ok_or(Error::Parse { line: 0, msg: "frame file lacks r".into() })?,
            };
            let rule = match line5 {
                Line5::Set => Line5Rule::SetCardinality,
                Line5::Degree => Line5Rule::DegreeSum,
            };
            let out = encode_with(&EncodeInput::from_orientation(frame, o), &params, rule)?;
            let dir = g.output.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)?;
            write_atomic(dir.join("fingerprint.arcs"), write_digraph(&out.fingerprint).as_bytes())?;
            write_atomic(dir.join("container.arcs"), write_digraph(&out.container).as_bytes())?;
            let mut trace = Vec::new();
            for step in &out.trace {
                trace.extend(serde_json::to_vec(step)?);
                trace.push(b'\n');
            }
            write_atomic(dir.join("trace.jsonl"), &trace)?;
            #[derive(Serialize)]
            struct Summary {
                l: i64,
                trivial: bool,
                line5: Line5Rule,
                fingerprint_arcs: usize,
                container_arcs: usize,
                antiparallel_pairs: usize,
                fingerprint_degrees: std::collections::BTreeMap<usize, usize>,
                degree_bound: f64,
            }
            let summary = Summary {
                l: out.l,
                trivial: out.trivial,
                line5: out.line5,
                fingerprint_arcs: out.fingerprint.arc_count(),
                container_arcs: out.container.arc_count(),
                antiparallel_pairs: out.container.antiparallel_pairs(),
                fingerprint_degrees: fingerprint_degree_report(&out, &a),
                degree_bound: dicount::encode::fingerprint_degree_bound(&params),
            };
            let mut bytes = serde_json::to_vec_pretty(&summary)?;
            bytes.push(b'\n');
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
        Command::Kw { input, beta, q, r, enumerate, budget } => {
            let graph = read_graph(&input)?;
            let cfg = KWConfig::new(beta, q, r)?;
            let hyp = kw_check_hypothesis(&graph, &cfg, budget, seed);
            eprintln!(
                "hypothesis {} ({} sets, {}), R admissible: {}",
                if hyp.holds { "holds" } else { "fails" },
                hyp.sets_checked,
                if hyp.exhaustive { "exhaustive" } else { "sampled" },
                cfg.admissible_for(graph.vertices().len())
            );
            if !enumerate {
                return emit_json(g, &hyp);
            }
            let fam = kw_family(&graph, &cfg)?;
            eprintln!(
                "{} containers for {} independent sets; bound {}",
                fam.containers.len(),
                fam.fingerprints.len(),
                family_size_bound(graph.vertices().len(), q)
            );
            let mut text = String::new();
            for c in &fam.containers {
                text.push_str(&dicount::io::write_vertex_set(c));
                text.push('\n');
            }
            emit(g, text.as_bytes())
        }
        Command::VerifyKeyLemma { case, input, frame, params, trials, extension_limit } => {
            let o = read_orientation(&input)?;
            let sets = parse_frame_file(&read_to_string(&frame)?)?;
            let n = o.n();
            let a = vertex_set(n, sets.a)?;
            let h = o.induced(&a.complement());
            let params = params.params(o.vertices().len())?;
            let budget = Budget { extensions: extension_limit, ..Budget::default() };
            let report = match case {
                Case::I => {
                    let frame = Frame {
                        a,
                        h: h.base().clone(),
                        b: vertex_set(n, sets.b)?,
                        x: vertex_set(n, sets.x)?,
                        r: sets.r.ok_or(Error::Parse { line: 0, msg: "frame file lacks r".into() })?,
                    };
                    estimate_sparse_case(&h, &frame, &params, trials, seed, budget)?
                }
                Case::Ii => estimate_dense_case(&h, &a, &params, trials, seed, budget)?,
            };
            let mut bytes = Vec::new();
            for t in &report.trials {
                bytes.extend(serde_json::to_vec(t)?);
                bytes.push(b'\n');
            }
            let mut summary = report.clone();
            summary.trials.clear();
            bytes.extend(serde_json::to_vec(&summary)?);
            bytes.push(b'\n');
            emit(g, &bytes)
        }
        Command::Sweep(args) => {
            let spec = args.spec(g)?;
            let outcome = run_sweep(&spec)?;
            let bytes = match g.format.unwrap_or(Format::Csv) {
                Format::Csv => to_csv(&outcome)?,
                Format::Json => {
                    let mut b = serde_json::to_vec_pretty(&outcome)?;
                    b.push(b'\n');
                    b
                }
            };
            // a config file may name the output when --output is absent
            match &spec.output_path {
                Some(path) => write_atomic(path, &bytes),
                None => emit(g, &bytes),
            }
        }
        Command::BoundCheck(args) => {
            let spec = args.spec(g)?;
            let report = if spec.cardinality() == 0 {
                theorem_bound_check(&[])
            } else {
                theorem_bound_check(&run_sweep(&spec)?.rows)
            };
            eprintln!("{} rows, {} violations", report.rows.len(), report.violations);
            match g.format.unwrap_or(Format::Json) {
                Format::Json => emit_json(g, &report),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for r in &report.rows {
                        w.serialize(r)?;
                    }
                    emit(g, &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                }
            }
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) | Error::Parse { .. } => 2,
        Error::Budget(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
