//! Graph containers for independent sets via the max-degree fingerprint
//! procedure, and the edge-averaging check on power digraphs.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::density::Params;
use crate::error::{Error, Result};
use crate::graph::{Graph, Orientation, VertexSet};
use crate::sampling::Seed;

/// Largest vertex count for which subsets or independent sets are enumerated.
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KWConfig {
    pub beta: f64,
    pub q: usize,
    /// Size threshold `R`.
    pub r: f64,
}

impl KWConfig {
    pub fn new(beta: f64, q: usize, r: f64) -> Result<KWConfig> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::pre(format!("beta = {beta} outside [0, 1]")));
        }
        if !r.is_finite() {
            return Err(Error::pre("R must be finite"));
        }
        Ok(KWConfig { beta, q, r })
    }

    /// `R ≥ e^{-βq} n` for a graph on `n` vertices.
    pub fn admissible_for(&self, n: usize) -> bool {
        self.r >= (-self.beta * self.q as f64).exp() * n as f64 - 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisVerdict {
    pub holds: bool,
    /// A set `U` with `|U| ≥ R` and `e(G[U]) < β C(|U|, 2)`.
    pub witness: Option<VertexSet>,
    pub sets_checked: u64,
    pub exhaustive: bool,
}

/// Edge threshold `β C(m, 2)`, nudged down so products like `0.2 · 15` that
/// land a rounding error above an integer do not reject an exact count.
fn sparse_threshold(beta: f64, m: usize) -> f64 {
    beta * choose2(m) - 1e-9
}

fn choose2(m: usize) -> f64 {
    (m * m.saturating_sub(1)) as f64 / 2.0
}

fn min_size(cfg: &KWConfig) -> usize {
    (cfg.r - 1e-9).ceil().max(0.0) as usize
}

/// Whether every `U ⊆ V(g)` with `|U| ≥ R` spans at least `β C(|U|, 2)` edges.
/// Exhaustive up to [`EXHAUSTIVE_LIMIT`] vertices; otherwise `budget` random
/// sets are tried.
pub fn kw_check_hypothesis(g: &Graph, cfg: &KWConfig, budget: u64, seed: Seed) -> HypothesisVerdict {
    let verts = g.vertices().to_vec();
    let m = verts.len();
    let lo = min_size(cfg);
    if m <= EXHAUSTIVE_LIMIT {
        let adj: Vec<u32> = verts
            .iter()
            .map(|&v| {
                verts.iter().enumerate().filter(|(_, &w)| g.has_edge(v, w)).fold(0u32, |acc, (j, _)| acc | 1 << j)
            })
            .collect();
        let mut checked = 0u64;
        for mask in 0u32..(1u64 << m) as u32 {
            let size = mask.count_ones() as usize;
            if size < lo {
                continue;
            }
            checked += 1;
            let mut twice = 0u32;
            let mut bits = mask;
            while bits != 0 {
                let j = bits.trailing_zeros();
                bits &= bits - 1;
                twice += (adj[j as usize] & mask).count_ones();
            }
            if (twice as f64 / 2.0) < sparse_threshold(cfg.beta, size) {
                let witness = VertexSet::from_iter_n(g.n(), (0..m).filter(|j| mask >> j & 1 == 1).map(|j| verts[j]));
                return HypothesisVerdict {
                    holds: false,
                    witness: Some(witness),
                    sets_checked: checked,
                    exhaustive: true,
                };
            }
        }
        return HypothesisVerdict { holds: true, witness: None, sets_checked: checked, exhaustive: true };
    }
    let mut rng = seed.rng();
    let mut pool = verts;
    for t in 0..budget {
        let size = rng.gen_range(lo.min(m)..=m);
        pool.shuffle(&mut rng);
        let u = VertexSet::from_iter_n(g.n(), pool[..size].iter().copied());
        if (g.edges_within(&u) as f64) < sparse_threshold(cfg.beta, size) {
            return HypothesisVerdict { holds: false, witness: Some(u), sets_checked: t + 1, exhaustive: false };
        }
    }
    HypothesisVerdict { holds: true, witness: None, sets_checked: budget, exhaustive: false }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub s: VertexSet,
    pub container: VertexSet,
}

/// Max-degree fingerprint of the independent set `i`.
///
/// The size guarantee `|container| ≤ R + q` needs [`KWConfig::admissible_for`]
/// and [`kw_check_hypothesis`]; neither is enforced here.
pub fn kw_fingerprint(g: &Graph, i: &VertexSet, cfg: &KWConfig) -> Result<Fingerprint> {
    if !i.is_subset(g.vertices()) {
        return Err(Error::pre("I must be a subset of V(g)"));
    }
    if let Some((u, v)) = g.edges().into_iter().find(|&(u, v)| i.contains(u) && i.contains(v)) {
        return Err(Error::pre(format!("I is not independent: {u}{v} is an edge")));
    }
    Ok(run(g, cfg, |u| i.contains(u)))
}

/// Reconstructs the container from `g`, `S` and the configuration alone.
pub fn kw_replay(g: &Graph, s: &VertexSet, cfg: &KWConfig) -> VertexSet {
    run(g, cfg, |u| s.contains(u)).container
}

fn run(g: &Graph, cfg: &KWConfig, in_i: impl Fn(usize) -> bool) -> Fingerprint {
    let mut u = g.vertices().clone();
    let mut s = VertexSet::empty(g.n());
    while s.len() < cfg.q && (u.len() as f64) > cfg.r {
        let Some(top) = u
            .iter()
            .map(|v| (g.neighbors(v).intersection_count(&u), v))
            .max_by_key(|&(d, v)| (d, std::cmp::Reverse(v)))
        else {
            break;
        };
        let v = top.1;
        u.remove(v);
        if in_i(v) {
            s.insert(v);
            u.difference_with(g.neighbors(v));
        }
    }
    let container = s.union(&u);
    Fingerprint { s, container }
}

/// Calls `visit` on every independent set of `g` (including `∅`).
pub fn for_each_independent_set(g: &Graph, mut visit: impl FnMut(&VertexSet)) -> Result<()> {
    let verts = g.vertices().to_vec();
    if verts.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::budget(format!(
            "{} vertices exceed the enumeration limit of {EXHAUSTIVE_LIMIT}",
            verts.len()
        )));
    }
    let mut cur = VertexSet::empty(g.n());
    fn rec(g: &Graph, verts: &[usize], cur: &mut VertexSet, visit: &mut dyn FnMut(&VertexSet)) {
        let Some((&v, rest)) = verts.split_first() else {
            visit(cur);
            return;
        };
        rec(g, rest, cur, visit);
        if g.neighbors(v).is_disjoint(cur) {
            cur.insert(v);
            rec(g, rest, cur, visit);
            cur.remove(v);
        }
    }
    rec(g, &verts, &mut cur, &mut visit);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainerFamily {
    pub containers: Vec<VertexSet>,
    /// `(I, S, index into containers)` for every independent set `I`.
    pub fingerprints: Vec<(VertexSet, VertexSet, usize)>,
}

/// Containers of every independent set of `g`, in order of first appearance.
pub fn kw_family(g: &Graph, cfg: &KWConfig) -> Result<ContainerFamily> {
    let mut index: HashMap<VertexSet, usize> = HashMap::new();
    let mut containers = Vec::new();
    let mut fingerprints = Vec::new();
    for_each_independent_set(g, |i| {
        let fp = run(g, cfg, |u| i.contains(u));
        let idx = *index.entry(fp.container.clone()).or_insert_with(|| {
            containers.push(fp.container.clone());
            containers.len() - 1
        });
        fingerprints.push((i.clone(), fp.s, idx));
    })?;
    Ok(ContainerFamily { containers, fingerprints })
}

/// The family built on `g[within]` only, e.g. a neighbourhood `N_G(a)`.
pub fn kw_family_within(g: &Graph, within: &VertexSet, cfg: &KWConfig) -> Result<ContainerFamily> {
    kw_family(&g.induced(within), cfg)
}

/// `Σ_{i ≤ q} C(n, i)`, saturating.
pub fn family_size_bound(n: usize, q: usize) -> u128 {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for i in 0..=q.min(n) {
        total = total.saturating_add(term);
        term = term.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragingCheck {
    /// Edges of `(o \ X)^ℓ[U]`, an antiparallel pair counted once.
    pub lhs: usize,
    /// `p^{1/ℓ} C(|U|, 2) / (2ℓ + 2)`.
    pub rhs: f64,
    pub ok: bool,
}

/// Edge count of the `ℓ`-th power on `U` after deleting `X`, against the
/// averaging lower bound. Only meaningful for `ℓ`-locally-dense `o`.
pub fn averaging_check(o: &Orientation, u: &VertexSet, x: &VertexSet, params: &Params) -> Result<AveragingCheck> {
    if !u.is_disjoint(x) {
        return Err(Error::pre("U and X must be disjoint"));
    }
    if !u.union(x).is_subset(o.vertices()) {
        return Err(Error::pre("U and X must lie in V(o)"));
    }
    let need = ((params.ell + 1) as f64 * params.alpha - 1e-9).ceil() as usize;
    if u.len() < need {
        return Err(Error::pre(format!("|U| = {} below (ℓ+1)α = {need}", u.len())));
    }
    if x.len() > params.a_prime_size() {
        return Err(Error::pre(format!("|X| = {} above α = {}", x.len(), params.a_prime_size())));
    }
    let power = o.to_digraph().remove_vertices(x).power(params.ell)?;
    let lhs = power.induced(u).underlying().edge_count();
    let rhs = params.p.powf(1.0 / params.ell as f64) * choose2(u.len()) / (2 * params.ell + 2) as f64;
    Ok(AveragingCheck { lhs, rhs, ok: lhs as f64 >= rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_gnp, sample_orientation};

    fn path4() -> Graph {
        Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)])
    }

    #[test]
    fn hypothesis_examples() {
        let cfg = KWConfig::new(1.0, 3, 2.0).unwrap();
        assert!(kw_check_hypothesis(&Graph::complete(7), &cfg, 0, Seed(0)).holds);
        let v = kw_check_hypothesis(&Graph::empty(7), &KWConfig::new(0.1, 3, 5.0).unwrap(), 0, Seed(0));
        assert!(!v.holds && v.exhaustive);
        assert!(v.witness.unwrap().len() >= 5);
    }

    #[test]
    fn hypothesis_matches_recount() {
        let g = sample_gnp(16, 0.5, Seed(11)).unwrap();
        let cfg = KWConfig::new(0.2, 4, 8.0).unwrap();
        let fast = kw_check_hypothesis(&g, &cfg, 0, Seed(0));
        let mut slow = true;
        for mask in 0u32..1 << 16 {
            if mask.count_ones() < 8 {
                continue;
            }
            let u = VertexSet::from_iter_n(16, (0..16).filter(|j| mask >> j & 1 == 1));
            let e = g.edges().iter().filter(|&&(a, b)| u.contains(a) && u.contains(b)).count();
            if (e as f64) < 0.2 * choose2(u.len()) {
                slow = false;
                break;
            }
        }
        assert_eq!(fast.holds, slow);
    }

    #[test]
    fn empty_set_and_vacuous_deletion() {
        let cfg = KWConfig::new(0.0, 2, 4.0).unwrap();
        let fp = kw_fingerprint(&Graph::empty(4), &VertexSet::empty(4), &cfg).unwrap();
        assert!(fp.s.is_empty());
        assert_eq!(fp.container, VertexSet::full(4));
        let g = path4();
        let cfg = KWConfig::new(1.0 / 3.0, 2, 2.0).unwrap();
        let fp = kw_fingerprint(&g, &VertexSet::empty(4), &cfg).unwrap();
        assert!(fp.s.is_empty() && fp.container.len() <= 2);
        assert!(kw_fingerprint(&g, &VertexSet::from_iter_n(4, [0, 1]), &cfg).is_err());
    }

    #[test]
    fn path_family() {
        let g = path4();
        let cfg = KWConfig::new(1.0 / 3.0, 2, 2.0).unwrap();
        let fam = kw_family(&g, &cfg).unwrap();
        assert_eq!(fam.fingerprints.len(), 8);
        for (i, s, idx) in &fam.fingerprints {
            let c = &fam.containers[*idx];
            assert!(i.is_subset(c));
            assert!(c.len() as f64 <= cfg.r + cfg.q as f64);
            assert_eq!(&kw_replay(&g, s, &cfg), c);
        }
        assert!(fam.containers.len() as u128 <= family_size_bound(4, 2));
    }

    #[test]
    fn complete_graph_family() {
        let g = Graph::complete(6);
        let cfg = KWConfig::new(1.0, 1, 1.0).unwrap();
        let fam = kw_family(&g, &cfg).unwrap();
        assert_eq!(fam.fingerprints.len(), 7);
        assert!(fam.containers.len() <= 7);
    }

    #[test]
    fn within_mode_uses_induced_graph() {
        let g = Graph::complete(6);
        let within = VertexSet::from_iter_n(6, [1, 3, 5]);
        let fam = kw_family_within(&g, &within, &KWConfig::new(1.0, 1, 1.0).unwrap()).unwrap();
        assert!(fam.containers.iter().all(|c| c.is_subset(&within)));
        assert_eq!(fam.fingerprints.len(), 4);
    }

    #[test]
    fn admissibility() {
        assert!(!KWConfig::new(0.1, 1, 1.0).unwrap().admissible_for(6));
        assert!(KWConfig::new(1.0, 2, 1.0).unwrap().admissible_for(6));
        assert!(KWConfig::new(1.5, 1, 1.0).is_err());
    }

    #[test]
    fn family_bound_values() {
        assert_eq!(family_size_bound(4, 2), 1 + 4 + 6);
        assert_eq!(family_size_bound(3, 9), 8);
    }

    #[test]
    fn averaging_examples() {
        let params = Params::with_alpha(1, 0.5, 8, 2.0).unwrap();
        let g = Graph::complete(8);
        let o = sample_orientation(&g, Seed(1));
        let u = VertexSet::from_iter_n(8, 0..5);
        let r = averaging_check(&o, &u, &VertexSet::empty(8), &params).unwrap();
        assert_eq!(r.lhs, 10);
        assert!(r.ok);
        let e = Orientation::unset(Graph::empty(8));
        let r = averaging_check(&e, &u, &VertexSet::empty(8), &params).unwrap();
        assert_eq!(r.lhs, 0);
        assert!(!r.ok);
        let small = VertexSet::from_iter_n(8, 0..3);
        assert!(averaging_check(&o, &small, &VertexSet::empty(8), &params).is_err());
        assert!(averaging_check(&o, &u, &VertexSet::from_iter_n(8, [4]), &params).is_err());
    }
}
