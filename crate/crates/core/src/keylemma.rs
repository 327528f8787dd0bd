//! Monte Carlo estimates of the expected number of admissible extensions of a
//! fixed oriented graph `H`, against the two closed-form bounds, plus the
//! minimal-fingerprint independence property.

use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{count_extensions, for_each_free_extension};
use crate::density::{frame_problem, is_r_locally_dense, is_sparse_extension, Frame, Params};
use crate::error::{Error, Result};
use crate::graph::{Digraph, Graph, Orientation, VertexSet};
use crate::sampling::{sample_extension, Seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyLemmaCase {
    LocallySparseI,
    LocallyDenseIi,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub edge_count: usize,
    /// `C_{ℓ+2}`-free extensions visited.
    pub free_extensions: u64,
    /// Extensions that also meet the density conditions of the case.
    pub admissible: u64,
    /// The sampled graph is not 1-locally dense, so nothing can be admissible.
    pub not_one_dense: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyLemmaReport {
    pub case: KeyLemmaCase,
    pub sample_mean: f64,
    /// May be `inf`; compare on the log scale.
    pub paper_bound: f64,
    pub log_paper_bound: f64,
    pub within_bound: bool,
    pub samples: u64,
    /// Trials in which no extension was admissible.
    pub zero_trials: u64,
    pub params_used: Params,
    /// `4(ℓ+2) p^{-1/ℓ} (ln n)²`, the per-vertex exponent of the induction.
    pub log_z: f64,
    pub trials: Vec<TrialRecord>,
}

/// Work limits for one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Free extensions enumerated per trial.
    pub extensions: u64,
    /// Work units of each exhaustive density check.
    pub density: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { extensions: 1 << 20, density: crate::density::DEFAULT_BUDGET }
    }
}

/// `9 α p^{-1/ℓ} ln n`.
pub fn log_sparse_bound(params: &Params) -> f64 {
    9.0 * params.alpha * params.inverse_root() * (params.n as f64).ln()
}

/// `α (ℓ+2) p^{-1/ℓ} (ln n)²`.
pub fn log_dense_bound(params: &Params) -> f64 {
    params.alpha * (params.ell + 2) as f64 * params.inverse_root() * (params.n as f64).ln().powi(2)
}

pub fn log_z(params: &Params) -> f64 {
    4.0 * (params.ell + 2) as f64 * params.inverse_root() * (params.n as f64).ln().powi(2)
}

fn exact_dense(o: &Orientation, r: usize, params: &Params, budget: u64) -> Result<bool> {
    let v = is_r_locally_dense(o, r, params, budget, Seed(0))?;
    if !v.exhaustive {
        return Err(Error::budget(format!("exhaustive {r}-local density check exceeds {budget} work units")));
    }
    Ok(v.dense)
}

fn check_h(h_orient: &Orientation, a: &VertexSet) -> Result<()> {
    if !h_orient.is_complete() {
        return Err(Error::pre("the orientation of H must be complete"));
    }
    if a.ground() != h_orient.n() || !a.is_disjoint(h_orient.vertices()) {
        return Err(Error::pre("A must be disjoint from V(H) on the same ground set"));
    }
    Ok(())
}

fn fixed_h(g: &Graph, h_orient: &Orientation) -> Orientation {
    let mut partial = Orientation::unset(g.clone());
    for (u, v) in h_orient.arcs() {
        partial.set_arc(u, v).expect("H is an induced subgraph of g");
    }
    partial
}

/// Runs `trials` independent samples of `G(A, H, p)` and counts, per sample,
/// the free extensions of `h_orient` accepted by `accept`.
#[allow(clippy::too_many_arguments)]
fn estimate(
    case: KeyLemmaCase,
    h_orient: &Orientation,
    a: &VertexSet,
    params: &Params,
    trials: u64,
    seed: Seed,
    budget: Budget,
    accept: &(dyn Fn(&Orientation) -> Result<bool> + Sync),
) -> Result<KeyLemmaReport> {
    let k = params.k();
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed.split(t);
            let g = sample_extension(a, h_orient.base(), params.p, s)?;
            let partial = fixed_h(&g, h_orient);
            let mut rec = TrialRecord {
                trial: t,
                seed: s.0,
                edge_count: g.edge_count(),
                free_extensions: 0,
                admissible: 0,
                not_one_dense: false,
            };
            // 1-local density ignores directions, so any orientation of g decides it
            let any = crate::sampling::sample_orientation(&g, s);
            if !exact_dense(&any, 1, params, budget.density)? {
                rec.not_one_dense = true;
                return Ok(rec);
            }
            let mut failure = None;
            rec.free_extensions = for_each_free_extension(&partial, k, budget.extensions, |o| {
                if failure.is_some() {
                    return;
                }
                match accept(o) {
                    Ok(true) => rec.admissible += 1,
                    Ok(false) => {}
                    Err(e) => failure = Some(e),
                }
            })?;
            match failure {
                Some(e) => Err(e),
                None => Ok(rec),
            }
        })
        .collect::<Result<_>>()?;
    let samples = records.len() as u64;
    let sample_mean =
        if samples == 0 { 0.0 } else { records.iter().map(|r| r.admissible as f64).sum::<f64>() / samples as f64 };
    let log_paper_bound = match case {
        KeyLemmaCase::LocallySparseI => log_sparse_bound(params),
        KeyLemmaCase::LocallyDenseIi => log_dense_bound(params),
    };
    Ok(KeyLemmaReport {
        case,
        sample_mean,
        paper_bound: log_paper_bound.exp(),
        log_paper_bound,
        within_bound: sample_mean.ln() <= log_paper_bound,
        samples,
        zero_trials: records.iter().filter(|r| r.admissible == 0).count() as u64,
        params_used: *params,
        log_z: log_z(params),
        trials: records,
    })
}

/// Mean number of `(r-1)`-locally-dense, `(r, B, X)`-sparse, `C_{ℓ+2}`-free
/// extensions of `h_orient` to `G(A, H, p)`.
pub fn estimate_sparse_case(
    h_orient: &Orientation,
    frame: &Frame,
    params: &Params,
    trials: u64,
    seed: Seed,
    budget: Budget,
) -> Result<KeyLemmaReport> {
    if let Some(problem) = frame_problem(frame, params) {
        return Err(Error::pre(format!("invalid frame: {problem}")));
    }
    if frame.r < 2 {
        return Err(Error::pre("the locally sparse case needs r >= 2"));
    }
    if h_orient.base() != &frame.h {
        return Err(Error::pre("h_orient must orient the frame's H"));
    }
    check_h(h_orient, &frame.a)?;
    let accept = |o: &Orientation| -> Result<bool> {
        if frame.r > 2 && !exact_dense(o, frame.r - 1, params, budget.density)? {
            return Ok(false);
        }
        is_sparse_extension(o, frame, params)
    };
    estimate(KeyLemmaCase::LocallySparseI, h_orient, &frame.a, params, trials, seed, budget, &accept)
}

/// Mean number of `ℓ`-locally-dense, `C_{ℓ+2}`-free extensions of `h_orient`
/// to `G(A, H, p)`.
pub fn estimate_dense_case(
    h_orient: &Orientation,
    a: &VertexSet,
    params: &Params,
    trials: u64,
    seed: Seed,
    budget: Budget,
) -> Result<KeyLemmaReport> {
    check_h(h_orient, a)?;
    let accept = |o: &Orientation| -> Result<bool> {
        if params.ell == 1 {
            return Ok(true);
        }
        exact_dense(o, params.ell, params, budget.density)
    };
    estimate(KeyLemmaCase::LocallyDenseIi, h_orient, a, params, trials, seed, budget, &accept)
}

/// A set of arcs of `o` outside `V(H)` that, together with the arcs of `H`,
/// pins `o` down as the only `C_k`-free orientation of its graph. Arcs are
/// dropped greedily in lexicographic order while uniqueness survives, so no
/// single arc of the result can be removed.
pub fn minimal_fingerprint(o: &Orientation, h_vertices: &VertexSet, k: usize) -> Result<Vec<(usize, usize)>> {
    if !o.is_complete() {
        return Err(Error::pre("orientation must be complete"));
    }
    let mut partial = Orientation::unset(o.base().clone());
    for (u, v) in o.arcs() {
        partial.set_arc(u, v)?;
    }
    if count_extensions(&partial, k)?.count != 1u32.into() {
        return Err(Error::pre(format!("orientation contains a directed {k}-cycle")));
    }
    let mut kept = Vec::new();
    for (u, v) in o.base().edges() {
        if h_vertices.contains(u) && h_vertices.contains(v) {
            continue;
        }
        let i = partial.edge_index(u, v).expect("edge of the base graph");
        let saved = partial.dirs()[i];
        let mut trial = Orientation::from_dirs(
            partial.base().clone(),
            partial
                .dirs()
                .iter()
                .enumerate()
                .map(|(j, &d)| if j == i { crate::graph::Dir::Unset } else { d })
                .collect(),
        )?;
        if count_extensions(&trial, k)?.count == 1u32.into() {
            partial = std::mem::replace(&mut trial, partial);
        } else {
            kept.push(if saved == crate::graph::Dir::Forward { (u, v) } else { (v, u) });
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// Whether `T⁺_a = {v : av ∈ T}` and `T⁻_a = {v : va ∈ T}` are independent in
/// `H^ℓ` for every `a ∈ A`.
pub fn fingerprint_sets_independent(
    t: &[(usize, usize)],
    h_orient: &Orientation,
    a: &VertexSet,
    ell: usize,
) -> Result<bool> {
    let power: Digraph = h_orient.to_digraph().power(ell)?;
    let n = h_orient.n();
    for x in a.iter() {
        let plus = VertexSet::from_iter_n(n, t.iter().filter(|&&(u, _)| u == x).map(|&(_, v)| v));
        let minus = VertexSet::from_iter_n(n, t.iter().filter(|&&(_, v)| v == x).map(|&(u, _)| u));
        for side in [plus, minus] {
            let side = side.intersection(h_orient.vertices());
            if side.iter().any(|y| !power.out_neighbors(y).is_disjoint(&side)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_gnp, sample_orientation};

    fn small_h(n: usize, h_size: usize, seed: u64) -> Orientation {
        let hv = VertexSet::from_iter_n(n, n - h_size..n);
        let h = sample_gnp(n, 0.6, Seed(seed)).unwrap().induced(&hv);
        // a transitive orientation has no directed cycle at all
        let arcs: Vec<_> = h.edges();
        let mut o = Orientation::unset(h);
        for (u, v) in arcs {
            o.set_arc(u, v).unwrap();
        }
        o
    }

    #[test]
    fn bound_formulas() {
        let p = Params::with_alpha(2, 0.25, 20, 4.0).unwrap();
        let ln = 20f64.ln();
        assert!((log_sparse_bound(&p) - 9.0 * 4.0 * 2.0 * ln).abs() < 1e-9);
        assert!((log_dense_bound(&p) - 4.0 * 4.0 * 2.0 * ln * ln).abs() < 1e-9);
        assert!((log_z(&p) - 4.0 * 4.0 * 2.0 * ln * ln).abs() < 1e-9);
    }

    #[test]
    fn dense_case_without_a_counts_h() {
        let n = 8;
        let h = small_h(n, 8, 2);
        let params = Params::with_alpha(1, 0.5, n, 2.0).unwrap();
        let r = estimate_dense_case(&h, &VertexSet::empty(n), &params, 3, Seed(1), Budget::default()).unwrap();
        assert!(r.sample_mean <= 1.0);
        assert!(r.within_bound);
        assert!(r.trials.iter().all(|t| t.not_one_dense || t.free_extensions == 1));
    }

    #[test]
    fn dense_case_full_extension_matches_brute_force() {
        // p = 1: G is fixed, so every trial sees the same count
        let n = 8;
        let h = small_h(n, 6, 5);
        let a = VertexSet::from_iter_n(n, [0, 1]);
        let params = Params::with_alpha(1, 1.0, n, 2.0).unwrap();
        let r = estimate_dense_case(&h, &a, &params, 2, Seed(4), Budget::default()).unwrap();
        let g = sample_extension(&a, h.base(), 1.0, Seed(0)).unwrap();
        let new: Vec<_> = g.edges().into_iter().filter(|&(u, v)| a.contains(u) || a.contains(v)).collect();
        let mut brute = 0u64;
        let one_dense =
            is_r_locally_dense(&sample_orientation(&g, Seed(0)), 1, &params, u64::MAX, Seed(0)).unwrap().dense;
        for mask in 0u32..1 << new.len() {
            let mut d = Digraph::empty_on(g.vertices().clone());
            for (u, v) in h.arcs() {
                d.add_arc(u, v);
            }
            for (j, &(u, v)) in new.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    d.add_arc(v, u);
                } else {
                    d.add_arc(u, v);
                }
            }
            if one_dense && !d.has_directed_cycle(3) {
                brute += 1;
            }
        }
        assert_eq!(r.sample_mean, brute as f64);
    }

    #[test]
    fn sparse_case_zero_density_extension() {
        // p tiny: almost surely no new edges, so the only extension is H itself
        let n = 16;
        let h = small_h(n, 14, 8);
        let params = Params::with_alpha(2, 1e-9, n, 2.0).unwrap();
        let frame = Frame {
            a: VertexSet::from_iter_n(n, [0]),
            h: h.base().clone(),
            b: VertexSet::from_iter_n(n, 2..6),
            x: VertexSet::empty(n),
            r: 2,
        };
        let r = estimate_sparse_case(&h, &frame, &params, 4, Seed(3), Budget::default()).unwrap();
        assert!(r.sample_mean <= 1.0 && r.within_bound);
        let mut bad = frame.clone();
        bad.b = VertexSet::from_iter_n(n, 2..12);
        assert!(estimate_sparse_case(&h, &bad, &params, 1, Seed(3), Budget::default()).is_err());
    }

    #[test]
    fn minimal_fingerprint_is_independent_in_power() {
        let n = 9;
        for seed in 0..6 {
            let h = small_h(n, 7, seed);
            let a = VertexSet::from_iter_n(n, [0, 1]);
            let g = sample_extension(&a, h.base(), 0.7, Seed(seed)).unwrap();
            let mut found = None;
            for_each_free_extension(&fixed_h(&g, &h), 3, 1 << 16, |o| {
                if found.is_none() {
                    found = Some(o.clone());
                }
            })
            .unwrap();
            let Some(o) = found else { continue };
            let t = minimal_fingerprint(&o, h.vertices(), 3).unwrap();
            assert!(t.iter().all(|&(u, v)| o.has_arc(u, v)));
            assert!(fingerprint_sets_independent(&t, &h, &a, 1).unwrap());
            // pinning: T plus H admits only o
            let mut partial = fixed_h(&g, &h);
            for &(u, v) in &t {
                partial.set_arc(u, v).unwrap();
            }
            assert_eq!(count_extensions(&partial, 3).unwrap().count, 1u32.into());
        }
    }
}
