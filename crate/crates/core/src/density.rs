//! Local-density checks: the parameter bundle, `r`-locally-dense orientations,
//! `r`-frames and `(r, B, X)`-sparse extensions.
//!
//! The set-size scale `α = alpha_scale · ln(n) / p` is rarely an integer.
//! Derived sizes are rounded as follows (see [`Params`]):
//!
//! | quantity      | value             | rounding |
//! |---------------|-------------------|----------|
//! | `|A'|`        | `α`               | up       |
//! | `|A|` (frame) | `α / 2`           | up       |
//! | `|B|` min     | `r α`             | up       |
//! | `|B|` max     | `ℓ α`             | up       |
//! | `|X|` max     | `(ℓ + 1 - r) α`   | down     |
//!
//! Rounding treats values within `1e-9` of an integer as that integer.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Digraph, Graph, Orientation, VertexSet};
use crate::sampling::Seed;

const ROUND_EPS: f64 = 1e-9;

/// Default number of work units before the density check switches to sampling.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

fn round_up(x: f64) -> usize {
    (x - ROUND_EPS).ceil().max(0.0) as usize
}

fn round_down(x: f64) -> usize {
    (x + ROUND_EPS).floor().max(0.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    /// `ℓ = k - 2`.
    pub ell: usize,
    pub p: f64,
    pub n: usize,
    pub alpha_scale: f64,
    /// `alpha_scale · ln(n) / p`.
    pub alpha: f64,
}

impl Params {
    pub const DEFAULT_ALPHA_SCALE: f64 = 64.0;

    pub fn new(ell: usize, p: f64, n: usize, alpha_scale: f64) -> Result<Params> {
        if ell == 0 {
            return Err(Error::pre("ell must be at least 1"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::pre(format!("p = {p} must lie in (0, 1]")));
        }
        if n < 2 {
            return Err(Error::pre("n must be at least 2 so that ln(n) > 0"));
        }
        if !(alpha_scale > 0.0 && alpha_scale.is_finite()) {
            return Err(Error::pre("alpha_scale must be positive"));
        }
        let alpha = alpha_scale * (n as f64).ln() / p;
        Ok(Params { ell, p, n, alpha_scale, alpha })
    }

    /// Parameters with `alpha_scale` chosen so that `α` equals `alpha`.
    pub fn with_alpha(ell: usize, p: f64, n: usize, alpha: f64) -> Result<Params> {
        if n < 2 || !(p > 0.0 && p <= 1.0) {
            return Params::new(ell, p, n, 1.0);
        }
        let mut params = Params::new(ell, p, n, alpha * p / (n as f64).ln())?;
        params.alpha = alpha;
        Ok(params)
    }

    /// Forbidden cycle length `ℓ + 2`.
    pub fn k(&self) -> usize {
        self.ell + 2
    }

    /// Set when `p > (2^7 ℓ)^{-ℓ}`, outside the regime of the counting theorem.
    pub fn outside_regime(&self) -> bool {
        self.p > (128.0 * self.ell as f64).powi(-(self.ell as i32))
    }

    pub fn a_prime_size(&self) -> usize {
        round_up(self.alpha)
    }

    pub fn frame_a_size(&self) -> usize {
        round_up(self.alpha / 2.0)
    }

    pub fn b_min(&self, r: usize) -> usize {
        round_up(r as f64 * self.alpha)
    }

    pub fn b_max(&self) -> usize {
        round_up(self.ell as f64 * self.alpha)
    }

    pub fn x_max(&self, r: usize) -> usize {
        round_down((self.ell + 1 - r) as f64 * self.alpha)
    }

    /// `p^{(ℓ - r + 1)/ℓ}`.
    pub fn density_factor(&self, r: usize) -> f64 {
        self.p.powf((self.ell + 1 - r) as f64 / self.ell as f64)
    }

    /// `p^{-1/ℓ}`.
    pub fn inverse_root(&self) -> f64 {
        self.p.powf(-1.0 / self.ell as f64)
    }

    fn check_r(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.ell {
            return Err(Error::pre(format!("r = {r} outside [1, {}]", self.ell)));
        }
        Ok(())
    }

    pub fn sizes(&self, r: usize) -> DensitySizes {
        DensitySizes { a_prime: self.a_prime_size(), b_min: self.b_min(r), b_max: self.b_max(), x_max: self.x_max(r) }
    }
}

/// Rounded set sizes used by a density check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DensitySizes {
    pub a_prime: usize,
    pub b_min: usize,
    pub b_max: usize,
    pub x_max: usize,
}

/// A triple `(A', B, X)` on which the density inequality fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub a_prime: VertexSet,
    pub b: VertexSet,
    pub x: VertexSet,
    /// `e↔` between `A'` and `B` in `(o \ X)^r`.
    pub edges: usize,
    /// `½ p^{(ℓ-r+1)/ℓ} |A'| |B|`.
    pub required: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityVerdict {
    pub dense: bool,
    pub witness: Option<Witness>,
    /// `(X, A')` pairs examined exhaustively, or triples drawn when sampling.
    pub pairs_checked: u64,
    pub exhaustive: bool,
    pub sizes: DensitySizes,
}

fn required_edges(params: &Params, r: usize, a: usize, b: usize) -> f64 {
    0.5 * params.density_factor(r) * a as f64 * b as f64
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Sizes of `X` that must be enumerated: for `|B| = s` the worst `X` is as large
/// as allowed, `min(x_max, |V| - |A'| - s)`. Removing vertices only removes
/// paths, so smaller `X` never yield fewer edges. For `r = 1` the set `X`
/// does not affect edges between `A'` and `B` at all.
fn x_plan(v: usize, r: usize, sz: &DensitySizes) -> Vec<(usize, Vec<usize>)> {
    let mut plan: Vec<(usize, Vec<usize>)> = Vec::new();
    let top = sz.b_max.min(v.saturating_sub(sz.a_prime));
    for s in sz.b_min..=top {
        let x = if r == 1 { 0 } else { sz.x_max.min(v - sz.a_prime - s) };
        match plan.iter_mut().find(|(xs, _)| *xs == x) {
            Some((_, ss)) => ss.push(s),
            None => plan.push((x, vec![s])),
        }
    }
    plan
}

fn exhaustive_work(v: usize, plan: &[(usize, Vec<usize>)], a: usize) -> u128 {
    plan.iter().map(|(x, _)| binom(v, *x).saturating_mul(binom(v - x, a))).fold(0u128, u128::saturating_add)
}

/// Whether `o` is `r`-locally dense: every pairwise disjoint `A', B, X` with
/// admissible sizes has `e↔_{(o\X)^r}(A', B) ≥ ½ p^{(ℓ-r+1)/ℓ} |A'| |B|`.
///
/// Exact when the exhaustive work fits in `budget`; otherwise `budget`
/// random triples are tested and a `dense` answer is only probabilistic.
pub fn is_r_locally_dense(
    o: &Orientation,
    r: usize,
    params: &Params,
    budget: u64,
    seed: Seed,
) -> Result<DensityVerdict> {
    params.check_r(r)?;
    if !o.is_complete() {
        return Err(Error::pre("orientation must be complete"));
    }
    let sizes = params.sizes(r);
    let v = o.vertices().len();
    let vacuous = DensityVerdict { dense: true, witness: None, pairs_checked: 0, exhaustive: true, sizes };
    if sizes.a_prime + sizes.b_min > v || sizes.b_min > sizes.b_max {
        return Ok(vacuous);
    }
    let plan = x_plan(v, r, &sizes);
    if exhaustive_work(v, &plan, sizes.a_prime) <= budget as u128 {
        Ok(exhaustive(o, r, params, sizes, &plan))
    } else {
        Ok(sampled(o, r, params, sizes, budget, seed))
    }
}

fn exhaustive(
    o: &Orientation,
    r: usize,
    params: &Params,
    sizes: DensitySizes,
    plan: &[(usize, Vec<usize>)],
) -> DensityVerdict {
    let verts = o.vertices().to_vec();
    let n = o.n();
    let d = o.to_digraph();
    let mut checked = 0u64;
    for (x_size, b_sizes) in plan {
        for x in verts.iter().copied().combinations(*x_size) {
            let x = VertexSet::from_iter_n(n, x);
            let power = d.remove_vertices(&x).power(r).expect("r >= 1");
            let rest: Vec<usize> = verts.iter().copied().filter(|w| !x.contains(*w)).collect();
            for a_prime in rest.iter().copied().combinations(sizes.a_prime) {
                checked += 1;
                let a_set = VertexSet::from_iter_n(n, a_prime.iter().copied());
                let mut degs: Vec<(usize, usize)> = rest
                    .iter()
                    .filter(|w| !a_set.contains(**w))
                    .map(|&w| {
                        (
                            power.out_neighbors(w).intersection_count(&a_set)
                                + power.in_neighbors(w).intersection_count(&a_set),
                            w,
                        )
                    })
                    .collect();
                degs.sort_unstable();
                let mut prefix = 0usize;
                let mut taken = 0usize;
                for &s in b_sizes {
                    if s > degs.len() {
                        break;
                    }
                    while taken < s {
                        prefix += degs[taken].0;
                        taken += 1;
                    }
                    let required = required_edges(params, r, sizes.a_prime, s);
                    if (prefix as f64) < required {
                        let b = VertexSet::from_iter_n(n, degs[..s].iter().map(|&(_, w)| w));
                        let witness = Witness { a_prime: a_set, b, x, edges: prefix, required };
                        return DensityVerdict {
                            dense: false,
                            witness: Some(witness),
                            pairs_checked: checked,
                            exhaustive: true,
                            sizes,
                        };
                    }
                }
            }
        }
    }
    DensityVerdict { dense: true, witness: None, pairs_checked: checked, exhaustive: true, sizes }
}

const SAMPLE_CHUNKS: u64 = 16;

fn sampled(o: &Orientation, r: usize, params: &Params, sizes: DensitySizes, budget: u64, seed: Seed) -> DensityVerdict {
    let verts = o.vertices().to_vec();
    let n = o.n();
    let v = verts.len();
    let d = o.to_digraph();
    let per_chunk = budget.div_ceil(SAMPLE_CHUNKS);
    let found: Vec<Option<Witness>> = (0..SAMPLE_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let todo = per_chunk.min(budget.saturating_sub(chunk * per_chunk));
            let mut rng = seed.split(chunk).rng();
            let mut pool = verts.clone();
            for _ in 0..todo {
                let s_top = sizes.b_max.min(v - sizes.a_prime);
                let s = rng.gen_range(sizes.b_min..=s_top);
                let x_top = sizes.x_max.min(v - sizes.a_prime - s);
                let x = rng.gen_range(0..=x_top);
                pool.shuffle(&mut rng);
                let a_set = VertexSet::from_iter_n(n, pool[..sizes.a_prime].iter().copied());
                let b = VertexSet::from_iter_n(n, pool[sizes.a_prime..sizes.a_prime + s].iter().copied());
                let xs = VertexSet::from_iter_n(n, pool[sizes.a_prime + s..sizes.a_prime + s + x].iter().copied());
                let edges = triple_edges(&d, r, &a_set, &b, &xs);
                let required = required_edges(params, r, sizes.a_prime, s);
                if (edges as f64) < required {
                    return Some(Witness { a_prime: a_set, b, x: xs, edges, required });
                }
            }
            None
        })
        .collect();
    let witness = found.into_iter().flatten().next();
    DensityVerdict { dense: witness.is_none(), witness, pairs_checked: budget, exhaustive: false, sizes }
}

fn triple_edges(d: &Digraph, r: usize, a: &VertexSet, b: &VertexSet, x: &VertexSet) -> usize {
    let power = d.remove_vertices(x).power(r).expect("r >= 1");
    power.bidir_edge_count(a, b).expect("disjoint by construction")
}

/// Recomputes a witness from scratch. Returns `true` when it really violates
/// the density inequality for `o`.
pub fn witness_holds(o: &Orientation, r: usize, params: &Params, w: &Witness) -> Result<bool> {
    params.check_r(r)?;
    let sizes = params.sizes(r);
    let disjoint = w.a_prime.is_disjoint(&w.b) && w.a_prime.is_disjoint(&w.x) && w.b.is_disjoint(&w.x);
    let inside = w.a_prime.union(&w.b).union(&w.x).is_subset(o.vertices());
    let sized = w.a_prime.len() == sizes.a_prime
        && (sizes.b_min..=sizes.b_max).contains(&w.b.len())
        && w.x.len() <= sizes.x_max;
    if !(disjoint && inside && sized) {
        return Ok(false);
    }
    let edges = triple_edges(&o.to_digraph(), r, &w.a_prime, &w.b, &w.x);
    Ok((edges as f64) < required_edges(params, r, w.a_prime.len(), w.b.len()))
}

/// An `r`-frame `(A, H, B, X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub a: VertexSet,
    pub h: Graph,
    pub b: VertexSet,
    pub x: VertexSet,
    pub r: usize,
}

impl Frame {
    /// Vertex set `A ∪ V(H)` of the extensions this frame describes.
    pub fn ground_vertices(&self) -> VertexSet {
        self.a.union(self.h.vertices())
    }
}

pub fn validate_frame(f: &Frame, params: &Params) -> bool {
    frame_problem(f, params).is_none()
}

/// First violated frame condition, if any.
pub fn frame_problem(f: &Frame, params: &Params) -> Option<String> {
    let n = f.h.n();
    if f.a.ground() != n || f.b.ground() != n || f.x.ground() != n {
        return Some("frame sets live on different ground sets".into());
    }
    if f.r == 0 || f.r > params.ell {
        return Some(format!("r = {} outside [1, {}]", f.r, params.ell));
    }
    let vh = f.h.vertices();
    if !f.a.is_disjoint(vh) {
        return Some("A meets V(H)".into());
    }
    if !f.b.is_subset(vh) || !f.x.is_subset(vh) {
        return Some("B and X must lie in V(H)".into());
    }
    if !f.b.is_disjoint(&f.x) {
        return Some("B meets X".into());
    }
    if f.a.len() != params.frame_a_size() {
        return Some(format!("|A| = {} but α/2 rounds to {}", f.a.len(), params.frame_a_size()));
    }
    let (lo, hi) = (params.b_min(f.r), params.b_max());
    if f.b.len() < lo || f.b.len() > hi {
        return Some(format!("|B| = {} outside [{lo}, {hi}]", f.b.len()));
    }
    if f.x.len() > params.x_max(f.r) {
        return Some(format!("|X| = {} exceeds {}", f.x.len(), params.x_max(f.r)));
    }
    None
}

/// Whether every `a ∈ A` has `d↔_{(o\X)^r}(a, B) ≤ p^{(ℓ-r+1)/ℓ} |B|`.
pub fn is_sparse_extension(o: &Orientation, f: &Frame, params: &Params) -> Result<bool> {
    if let Some(problem) = frame_problem(f, params) {
        return Err(Error::pre(format!("invalid frame: {problem}")));
    }
    if !o.is_complete() {
        return Err(Error::pre("orientation must be complete"));
    }
    if o.vertices() != &f.ground_vertices() {
        return Err(Error::pre("orientation must live on A ∪ V(H)"));
    }
    if o.base().induced(f.h.vertices()) != f.h {
        return Err(Error::pre("orientation does not restrict to H on V(H)"));
    }
    let power = o.to_digraph().remove_vertices(&f.x).power(f.r)?;
    let limit = params.density_factor(f.r) * f.b.len() as f64;
    for a in f.a.iter() {
        if power.bidir_degree(a, &f.b)? as f64 > limit {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCheck {
    /// `E[c^{|S_p|}] = (1 - p + pc)^{|S|}`.
    pub exact: f64,
    /// `e^{c p |S|}`.
    pub bound: f64,
    pub ok: bool,
}

/// Closed-form `E[c^{|S_p|}]` for a `p`-random subset of an `s`-set, against
/// the bound `e^{cps}`. The comparison is done on logarithms so it stays
/// meaningful when either side overflows.
pub fn moment_bound_check(set_size: u64, p: f64, c: f64) -> Result<MomentCheck> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::pre(format!("probability {p} outside [0, 1]")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::pre("c must be a finite nonnegative number"));
    }
    let s = set_size as f64;
    let log_bound = c * p * s;
    let base = 1.0 - p + p * c;
    let log_exact = if set_size == 0 {
        0.0
    } else if base == 0.0 {
        f64::NEG_INFINITY
    } else {
        s * (p * (c - 1.0)).ln_1p()
    };
    Ok(MomentCheck { exact: log_exact.exp(), bound: log_bound.exp(), ok: log_exact <= log_bound })
}
