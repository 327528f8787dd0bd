//! Parameter sweeps of exact counts over seeded `G(n, p)`, their CSV/JSON
//! output, and the slack check against the closed-form upper bound.
//!
//! # Config files
//!
//! One `key = value` pair per line; `#` starts a comment; blank lines are
//! ignored. List values are comma separated.
//!
//! | key          | value                         |
//! |--------------|-------------------------------|
//! | `n`          | list of vertex counts         |
//! | `p`          | list of edge probabilities    |
//! | `k`          | list of cycle lengths (≥ 3)   |
//! | `seeds`      | samples per cell              |
//! | `seed`       | base seed                     |
//! | `method`     | `propagate` or `bruteforce`   |
//! | `output`     | output path                   |
//! | `max_edges`  | skip graphs with more edges   |
//! | `node_limit` | skip counts needing more nodes |

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::counting::{count_bruteforce, count_propagate_limited, BRUTE_FORCE_EDGE_LIMIT};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::sampling::{sample_gnp, Seed};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Propagate,
    Bruteforce,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s {
            "propagate" => Ok(Method::Propagate),
            "bruteforce" | "brute" => Ok(Method::Bruteforce),
            other => Err(Error::pre(format!("unknown counting method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub n_values: Vec<usize>,
    pub p_values: Vec<f64>,
    pub k_values: Vec<usize>,
    pub seeds_per_cell: u64,
    pub method: Method,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    pub base_seed: u64,
    pub max_edges: usize,
    pub node_limit: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            n_values: Vec::new(),
            p_values: Vec::new(),
            k_values: vec![3],
            seeds_per_cell: 1,
            method: Method::Propagate,
            output_path: None,
            base_seed: 0,
            max_edges: 80,
            node_limit: 20_000_000,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, line: usize) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Parse { line, msg: format!("bad list element {s:?}") }))
        .collect()
}

fn parse_one<T: std::str::FromStr>(value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse { line, msg: format!("bad value {value:?}") })
}

impl SweepSpec {
    /// Overrides fields with the pairs found in a config file.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Parse { line, msg: "expected `key = value`".into() });
            };
            let value = value.trim();
            match key.trim() {
                "n" => self.n_values = parse_list(value, line)?,
                "p" => self.p_values = parse_list(value, line)?,
                "k" => self.k_values = parse_list(value, line)?,
                "seeds" => self.seeds_per_cell = parse_one(value, line)?,
                "seed" => self.base_seed = parse_one(value, line)?,
                "method" => {
                    self.method =
                        value.parse().map_err(|_| Error::Parse { line, msg: format!("unknown method {value:?}") })?
                }
                "output" => self.output_path = Some(PathBuf::from(value)),
                "max_edges" => self.max_edges = parse_one(value, line)?,
                "node_limit" => self.node_limit = parse_one(value, line)?,
                other => return Err(Error::Parse { line, msg: format!("unknown key {other:?}") }),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.p_values.is_empty() || self.k_values.is_empty() {
            return Err(Error::pre("n, p and k lists must be non-empty"));
        }
        if self.seeds_per_cell == 0 {
            return Err(Error::pre("seeds per cell must be at least 1"));
        }
        if let Some(p) = self.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::pre(format!("probability {p} outside [0, 1]")));
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k < 3) {
            return Err(Error::pre(format!("cycle length {k} below 3")));
        }
        Ok(())
    }

    /// Number of rows the spec asks for, skips included.
    pub fn cardinality(&self) -> usize {
        self.n_values.len() * self.p_values.len() * self.k_values.len() * self.seeds_per_cell as usize
    }

    /// SHA-256 of the canonical JSON form (the output path excluded).
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Seed of the `s`-th sample of every cell; shared across cells so graphs
    /// for increasing `p` are nested.
    pub fn sample_seed(&self, s: u64) -> Seed {
        Seed(self.base_seed).split(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub seed: u64,
    pub edge_count: usize,
    /// Decimal digits of the exact count.
    pub count: String,
    /// Natural logarithm of the count.
    pub log_count: f64,
    pub log2_count: f64,
    /// `n / p^{1/(k-2)}`.
    pub predictor: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    EdgeBudget,
    NodeBudget,
    ConstraintBudget,
    BruteForceLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkipRecord {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub seed: u64,
    pub edge_count: usize,
    pub reason: SkipReason,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub tool_version: String,
    pub spec_hash: String,
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkipRecord>,
}

pub fn predictor(n: usize, p: f64, k: usize) -> f64 {
    n as f64 / p.powf(1.0 / (k - 2) as f64)
}

enum Job {
    Row(SweepRow),
    Skip(SkipRecord),
}

/// One row per `(n, p, k, sample)` in spec order, infeasible cells skipped.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let mut cells = Vec::with_capacity(spec.cardinality());
    for &n in &spec.n_values {
        for &p in &spec.p_values {
            for &k in &spec.k_values {
                for s in 0..spec.seeds_per_cell {
                    cells.push((n, p, k, spec.sample_seed(s)));
                }
            }
        }
    }
    let jobs: Vec<Job> =
        cells.into_par_iter().map(|(n, p, k, seed)| run_cell(spec, n, p, k, seed)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for job in jobs {
        match job {
            Job::Row(r) => rows.push(r),
            Job::Skip(s) => {
                warn!("skipped n={} p={} k={} seed={}: {:?} ({})", s.n, s.p, s.k, s.seed, s.reason, s.detail);
                skipped.push(s)
            }
        }
    }
    Ok(SweepOutcome { tool_version: TOOL_VERSION.to_string(), spec_hash: spec.hash(), rows, skipped })
}

fn run_cell(spec: &SweepSpec, n: usize, p: f64, k: usize, seed: Seed) -> Result<Job> {
    let g = sample_gnp(n, p, seed)?;
    let m = g.edge_count();
    let skip = |reason, detail: String| Job::Skip(SkipRecord { n, p, k, seed: seed.0, edge_count: m, reason, detail });
    if m > spec.max_edges {
        return Ok(skip(SkipReason::EdgeBudget, format!("{m} edges exceed {}", spec.max_edges)));
    }
    let started = Instant::now();
    let result = match spec.method {
        Method::Propagate => count_propagate_limited(&g, k, spec.node_limit),
        Method::Bruteforce if m > BRUTE_FORCE_EDGE_LIMIT => {
            return Ok(skip(SkipReason::BruteForceLimit, format!("{m} edges exceed {BRUTE_FORCE_EDGE_LIMIT}")))
        }
        Method::Bruteforce => count_bruteforce(&g, k),
    };
    let r = match result {
        Ok(r) => r,
        Err(Error::Budget(msg)) => {
            let reason = if msg.contains("-cycles") { SkipReason::ConstraintBudget } else { SkipReason::NodeBudget };
            return Ok(skip(reason, msg));
        }
        Err(e) => return Err(e),
    };
    Ok(Job::Row(SweepRow {
        n,
        p,
        k,
        seed: seed.0,
        edge_count: m,
        count: r.count.to_str_radix(10),
        log_count: r.ln_count(),
        log2_count: r.log2_count,
        predictor: predictor(n, p, k),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    }))
}

/// CSV text: a `#` metadata block, a header, then one line per row.
pub fn to_csv(outcome: &SweepOutcome) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    buf.extend_from_slice(format!("# tool: dicount {}\n", outcome.tool_version).as_bytes());
    buf.extend_from_slice(format!("# spec_sha256: {}\n", outcome.spec_hash).as_bytes());
    buf.extend_from_slice(format!("# rows: {}\n# skipped: {}\n", outcome.rows.len(), outcome.skipped.len()).as_bytes());
    for s in &outcome.skipped {
        buf.extend_from_slice(
            format!("# skip n={} p={} k={} seed={} reason={:?}\n", s.n, s.p, s.k, s.seed, s.reason).as_bytes(),
        );
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in &outcome.rows {
            w.serialize(row)?;
        }
        if outcome.rows.is_empty() {
            w.write_record([
                "n",
                "p",
                "k",
                "seed",
                "edge_count",
                "count",
                "log_count",
                "log2_count",
                "predictor",
                "runtime_ms",
            ])?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn write_csv(outcome: &SweepOutcome, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &to_csv(outcome)?)
}

pub fn write_json(outcome: &SweepOutcome, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &serde_json::to_vec_pretty(outcome)?)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub seed: u64,
    pub log_count: f64,
    /// `13 ℓ n (ln n)² / p^{1/ℓ}` with `ℓ = k - 2`.
    pub log_bound: f64,
    /// `log_count / log_bound`.
    pub slack_ratio: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub violations: usize,
}

pub fn log_theorem_bound(n: usize, p: f64, k: usize) -> f64 {
    let ell = (k - 2) as f64;
    let ln = (n as f64).ln();
    13.0 * ell * n as f64 * ln * ln / p.powf(1.0 / ell)
}

pub fn theorem_bound_check(rows: &[SweepRow]) -> BoundReport {
    let rows: Vec<BoundRow> = rows
        .iter()
        .map(|r| {
            let log_bound = log_theorem_bound(r.n, r.p, r.k);
            BoundRow {
                n: r.n,
                p: r.p,
                k: r.k,
                seed: r.seed,
                log_count: r.log_count,
                log_bound,
                slack_ratio: r.log_count / log_bound,
                ok: r.log_count <= log_bound,
            }
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.ok).count();
    BoundReport { rows, violations }
}

/// Sweeps `spec` and checks every row; a spec with no cells gives an empty report.
pub fn run_theorem_bound_check(spec: &SweepSpec) -> Result<BoundReport> {
    if spec.cardinality() == 0 {
        return Ok(BoundReport { rows: Vec::new(), violations: 0 });
    }
    Ok(theorem_bound_check(&run_sweep(spec)?.rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: &[usize], p: &[f64], k: &[usize], seeds: u64) -> SweepSpec {
        SweepSpec {
            n_values: n.to_vec(),
            p_values: p.to_vec(),
            k_values: k.to_vec(),
            seeds_per_cell: seeds,
            ..SweepSpec::default()
        }
    }

    #[test]
    fn tiny_cells() {
        let out = run_sweep(&spec(&[3], &[1.0], &[3], 1)).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].count, "6");
        let out = run_sweep(&spec(&[4], &[1.0], &[3], 1)).unwrap();
        assert_eq!(out.rows[0].count, "24");
        assert!((out.rows[0].log_count - 24f64.ln()).abs() < 1e-12);
        assert!((out.rows[0].predictor - 4.0).abs() < 1e-12);
    }

    #[test]
    fn skips_are_recorded() {
        let mut s = spec(&[9], &[1.0], &[3], 2);
        s.max_edges = 10;
        let out = run_sweep(&s).unwrap();
        assert!(out.rows.is_empty());
        assert_eq!(out.skipped.len(), 2);
        assert_eq!(out.skipped[0].reason, SkipReason::EdgeBudget);
        s.max_edges = 100;
        s.node_limit = 5;
        let out = run_sweep(&s).unwrap();
        assert_eq!(out.skipped[0].reason, SkipReason::NodeBudget);
    }

    #[test]
    fn csv_round_trip_and_determinism() {
        let s = spec(&[5, 6], &[0.4, 0.8], &[3, 4], 2);
        let a = run_sweep(&s).unwrap();
        let b = run_sweep(&s).unwrap();
        assert_eq!(a.rows.len(), 16);
        let strip = |o: &SweepOutcome| {
            let mut o = o.clone();
            o.rows.iter_mut().for_each(|r| r.runtime_ms = 0.0);
            to_csv(&o).unwrap()
        };
        assert_eq!(strip(&a), strip(&b));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_csv(&a, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), a.rows.len());
        for (x, y) in back.iter().zip(&a.rows) {
            assert_eq!((x.n, x.k, x.seed, &x.count), (y.n, y.k, y.seed, &y.count));
            assert_eq!(x.log_count, y.log_count);
        }
    }

    #[test]
    fn config_parsing() {
        let mut s = SweepSpec::default();
        s.apply_config("# demo\nn = 8, 9\np=0.5\nk = 3,4\nseeds = 3\nmethod = bruteforce\n\nseed = 7\n").unwrap();
        assert_eq!(s.n_values, vec![8, 9]);
        assert_eq!(s.k_values, vec![3, 4]);
        assert_eq!((s.seeds_per_cell, s.base_seed, s.method), (3, 7, Method::Bruteforce));
        let err = SweepSpec::default().apply_config("n = 3\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(SweepSpec::default().apply_config("n 3").is_err());
    }

    #[test]
    fn validation_and_hash() {
        assert!(run_sweep(&spec(&[], &[0.5], &[3], 1)).is_err());
        assert!(run_sweep(&spec(&[4], &[0.5], &[2], 1)).is_err());
        assert!(run_sweep(&spec(&[4], &[0.5], &[3], 0)).is_err());
        let a = spec(&[4], &[0.5], &[3], 1);
        let mut b = a.clone();
        b.output_path = Some("x.csv".into());
        assert_eq!(a.hash(), b.hash());
        b.base_seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn bound_check_examples() {
        let rep = run_theorem_bound_check(&spec(&[3], &[0.5], &[3], 1)).unwrap();
        assert_eq!(rep.violations, 0);
        let r = &rep.rows[0];
        assert!(r.log_count <= r.log_bound);
        assert!((r.log_bound - 13.0 * 3.0 * 3f64.ln().powi(2) / 0.5).abs() < 1e-9);
        let empty = run_theorem_bound_check(&SweepSpec::default()).unwrap();
        assert!(empty.rows.is_empty());
    }
}
