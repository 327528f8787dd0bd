//! Exact counts of orientations with no directed `k`-cycle.

mod brute;
mod propagate;

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dir, Graph, Orientation};

pub use propagate::{DEFAULT_CACHE_WORDS, MAX_CONSTRAINTS};

/// Largest edge count the exhaustive counters accept.
pub const BRUTE_FORCE_EDGE_LIMIT: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    #[serde(serialize_with = "ser_decimal")]
    pub count: BigUint,
    /// `log2(count)`, or `-inf` when the count is zero.
    pub log2_count: f64,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

fn ser_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

impl CountResult {
    fn new(count: BigUint, nodes_explored: u64, started: Instant) -> Self {
        CountResult { log2_count: log2_big(&count), count, nodes_explored, elapsed: started.elapsed() }
    }

    /// Natural logarithm of the count.
    pub fn ln_count(&self) -> f64 {
        self.log2_count * std::f64::consts::LN_2
    }
}

/// `log2(x)` accurate to double precision for arbitrarily large `x`.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return (x.iter_u64_digits().next().unwrap_or(0) as f64).log2();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    (top.iter_u64_digits().next().unwrap() as f64).log2() + shift as f64
}

fn check_budget(g: &Graph) -> Result<()> {
    let m = g.edge_count();
    if m > BRUTE_FORCE_EDGE_LIMIT {
        return Err(Error::budget(format!(
            "{m} edges exceed the exhaustive limit of {BRUTE_FORCE_EDGE_LIMIT}; use the propagation counter"
        )));
    }
    Ok(())
}

/// `D(G, C_k)` by checking every one of the `2^e(G)` orientations.
pub fn count_bruteforce(g: &Graph, k: usize) -> Result<CountResult> {
    check_budget(g)?;
    let started = Instant::now();
    let c = brute::Compact::new(g);
    let hits = brute::count_orientations(&c, |out| !brute::has_cycle(out, k));
    Ok(CountResult::new(BigUint::from(hits), 1u64 << c.edges.len(), started))
}

/// Number of acyclic orientations, by exhaustive enumeration.
pub fn count_acyclic(g: &Graph) -> Result<BigUint> {
    check_budget(g)?;
    let c = brute::Compact::new(g);
    Ok(BigUint::from(brute::count_orientations(&c, brute::is_acyclic)))
}

/// `D(G, C_k)` by branching on edges with forced-edge propagation.
pub fn count_propagate(g: &Graph, k: usize) -> Result<CountResult> {
    count_extensions(&Orientation::unset(g.clone()), k)
}

/// As [`count_propagate`], refusing with a budget error after `node_limit`
/// branch nodes.
pub fn count_propagate_limited(g: &Graph, k: usize, node_limit: u64) -> Result<CountResult> {
    count_extensions_limited(&Orientation::unset(g.clone()), k, node_limit)
}

/// Number of `C_k`-free complete orientations agreeing with every set edge of
/// `partial`.
pub fn count_extensions(partial: &Orientation, k: usize) -> Result<CountResult> {
    count_extensions_limited(partial, k, u64::MAX)
}

pub fn count_extensions_limited(partial: &Orientation, k: usize, node_limit: u64) -> Result<CountResult> {
    let started = Instant::now();
    let f = propagate::CycleConstraints::build(partial.base(), k)?;
    let mut solver = propagate::Solver::new(&f);
    let fixed: Vec<(usize, Dir)> = partial.dirs().iter().copied().enumerate().collect();
    let count = if solver.fix(&fixed) { solver.count(node_limit)? } else { BigUint::zero() };
    Ok(CountResult::new(count, solver.nodes, started))
}

/// Visits every `C_k`-free complete orientation extending `partial`. Refuses
/// with a budget error once more than `limit` orientations have been seen.
pub fn for_each_free_extension(
    partial: &Orientation,
    k: usize,
    limit: u64,
    mut visit: impl FnMut(&Orientation),
) -> Result<u64> {
    let f = propagate::CycleConstraints::build(partial.base(), k)?;
    let mut solver = propagate::Solver::new(&f);
    let fixed: Vec<(usize, Dir)> = partial.dirs().iter().copied().enumerate().collect();
    if !solver.fix(&fixed) {
        return Ok(0);
    }
    let base = partial.base().clone();
    solver.for_each_model(limit, &mut |dirs| {
        let o = Orientation::from_dirs(base.clone(), dirs.to_vec()).expect("one direction per edge");
        visit(&o);
    })
}

/// Number of directed `k`-cycles in the complete bidirection of `g`, i.e. the
/// constraints the propagation counter works with.
pub fn directed_cycle_count(g: &Graph, k: usize) -> Result<usize> {
    Ok(propagate::CycleConstraints::build(g, k)?.constraint_count())
}
