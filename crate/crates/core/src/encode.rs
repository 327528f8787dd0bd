//! The fingerprint/container encoder for `C_{ℓ+2}`-free extensions of an
//! oriented graph `H`, and checks of its guarantees.
//!
//! For every `a ∈ A` the encoder walks `L = |V(H)| - |B| - |X| - ⌈α⌉` vertices
//! of `V(H)`, each time guessing the orientation of `{a, v}` that would extend
//! most `(r-1)`-paths of `H \ X` ending or starting in the current `B`. Correct
//! guesses go into the fingerprint `T`; `T` alone determines the container `C`.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{frame_problem, Frame, Params};
use crate::error::{Error, Result};
use crate::graph::{Digraph, Graph, Orientation, VertexSet};

/// How the majority test on `(r-1)`-power neighbours is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum Line5Rule {
    /// `|N⁺ ∩ B| ≥ ½ |(N⁺ ∪ N⁻) ∩ B|`; a vertex in both counts once on the right.
    #[default]
    SetCardinality,
    /// `|N⁺ ∩ B| ≥ ½ (|N⁺ ∩ B| + |N⁻ ∩ B|)`.
    DegreeSum,
}

#[derive(Debug, Clone)]
pub struct EncodeInput {
    pub frame: Frame,
    /// Complete orientation of `frame.h`.
    pub h_orient: Orientation,
    /// `V(g) = A ∪ V(H)` and `g[V(H)] = H`.
    pub g: Graph,
    /// Complete orientation of `g` extending `h_orient`.
    pub g_orient: Orientation,
}

impl EncodeInput {
    /// Builds an input from an orientation of `g`, taking `g` and `h_orient` from it.
    pub fn from_orientation(frame: Frame, g_orient: Orientation) -> EncodeInput {
        let h_orient = g_orient.induced(frame.h.vertices());
        EncodeInput { g: g_orient.base().clone(), frame, h_orient, g_orient }
    }

    fn check(&self, params: &Params) -> Result<()> {
        let f = &self.frame;
        if let Some(problem) = frame_problem(f, params) {
            return Err(Error::pre(format!("invalid frame: {problem}")));
        }
        if f.r < 2 {
            return Err(Error::pre("the encoder needs r >= 2"));
        }
        if self.h_orient.base() != &f.h || !self.h_orient.is_complete() {
            return Err(Error::pre("h_orient must be a complete orientation of H"));
        }
        if self.g_orient.base() != &self.g || !self.g_orient.is_complete() {
            return Err(Error::pre("g_orient must be a complete orientation of g"));
        }
        if self.g.vertices() != &f.ground_vertices() {
            return Err(Error::pre("g must live on A ∪ V(H)"));
        }
        if self.g.induced(f.h.vertices()) != f.h {
            return Err(Error::pre("g[V(H)] differs from H"));
        }
        if !self.g_orient.extends(&self.h_orient) {
            return Err(Error::pre("g_orient does not extend h_orient"));
        }
        Ok(())
    }
}

/// One iteration of the inner loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub a: usize,
    pub i: usize,
    pub v: usize,
    /// The guessed arc `e_i`.
    pub e: (usize, usize),
    /// Whether `e_i` was an arc of the input (it then went into `T`).
    pub in_g: bool,
    pub n_plus: usize,
    pub n_minus: usize,
    /// `|(N⁺ ∪ N⁻) ∩ B_{i-1}|`.
    pub n_union: usize,
    pub b_before: usize,
    pub b_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodeOutput {
    pub fingerprint: Digraph,
    pub container: Digraph,
    pub trace: Vec<TraceStep>,
    /// Loop length; negative values mean the trivial container was returned.
    pub l: i64,
    pub trivial: bool,
    pub line5: Line5Rule,
}

/// `|V(H)| - |B| - |X| - ⌈α⌉`.
pub fn loop_length(f: &Frame, params: &Params) -> i64 {
    f.h.vertices().len() as i64 - f.b.len() as i64 - f.x.len() as i64 - params.a_prime_size() as i64
}

/// What the encoder needs to know about the input: is `(u, v)` an arc?
trait ArcOracle: Sync {
    fn arc(&self, u: usize, v: usize) -> bool;
}

impl ArcOracle for Orientation {
    fn arc(&self, u: usize, v: usize) -> bool {
        self.has_arc(u, v)
    }
}

impl ArcOracle for Digraph {
    fn arc(&self, u: usize, v: usize) -> bool {
        self.has_arc(u, v)
    }
}

pub fn encode(input: &EncodeInput, params: &Params) -> Result<EncodeOutput> {
    encode_with(input, params, Line5Rule::default())
}

pub fn encode_with(input: &EncodeInput, params: &Params, line5: Line5Rule) -> Result<EncodeOutput> {
    input.check(params)?;
    run(&input.frame, &input.h_orient, params, line5, &input.g_orient)
}

/// Rebuilds the container from the fingerprint alone: every membership test
/// is answered by `T`.
pub fn replay_container(
    frame: &Frame,
    h_orient: &Orientation,
    t: &Digraph,
    params: &Params,
    line5: Line5Rule,
) -> Result<Digraph> {
    Ok(run(frame, h_orient, params, line5, t)?.container)
}

fn run(
    f: &Frame,
    h_orient: &Orientation,
    params: &Params,
    line5: Line5Rule,
    input: &dyn ArcOracle,
) -> Result<EncodeOutput> {
    let n = f.h.n();
    let ground = f.ground_vertices();
    let mut t = Digraph::empty_on(ground.clone());
    let mut c = Digraph::empty_on(ground);
    let l = loop_length(f, params);
    if l < 0 {
        for a in f.a.iter() {
            for v in f.h.vertices().iter() {
                c.add_arc(a, v);
                c.add_arc(v, a);
            }
        }
        return Ok(EncodeOutput { fingerprint: t, container: c, trace: Vec::new(), l, trivial: true, line5 });
    }
    let power = h_orient.to_digraph().remove_vertices(&f.x).power(f.r - 1)?;
    let candidates: Vec<usize> = f.h.vertices().difference(&f.b).difference(&f.x).to_vec();
    let per_a: Vec<Vec<TraceStep>> =
        f.a.to_vec().into_par_iter().map(|a| walk(a, l as usize, &f.b, &candidates, &power, line5, input, n)).collect();
    let mut trace = Vec::new();
    for (a, steps) in f.a.iter().zip(per_a) {
        let mut chosen = VertexSet::empty(n);
        for s in &steps {
            chosen.insert(s.v);
            if s.in_g {
                t.add_arc(s.e.0, s.e.1);
                c.add_arc(s.e.0, s.e.1);
            } else {
                c.add_arc(s.e.1, s.e.0);
            }
        }
        for v in f.h.vertices().difference(&chosen).iter() {
            c.add_arc(a, v);
            c.add_arc(v, a);
        }
        trace.extend(steps);
    }
    Ok(EncodeOutput { fingerprint: t, container: c, trace, l, trivial: false, line5 })
}

#[allow(clippy::too_many_arguments)]
fn walk(
    a: usize,
    l: usize,
    b: &VertexSet,
    candidates: &[usize],
    power: &Digraph,
    line5: Line5Rule,
    input: &dyn ArcOracle,
    n: usize,
) -> Vec<TraceStep> {
    let mut b_cur = b.clone();
    let mut used = VertexSet::empty(n);
    let mut steps = Vec::with_capacity(l);
    for i in 1..=l {
        let bidir = |v: usize| {
            power.out_neighbors(v).intersection_count(&b_cur) + power.in_neighbors(v).intersection_count(&b_cur)
        };
        // candidates are sorted, so the first maximum is the smallest label
        let mut best: Option<(usize, usize)> = None;
        for &v in candidates.iter().filter(|&&v| !used.contains(v)) {
            let d = bidir(v);
            if best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, v));
            }
        }
        let Some((_, v)) = best else { break };
        used.insert(v);
        let n_plus = power.out_neighbors(v).intersection_count(&b_cur);
        let n_minus = power.in_neighbors(v).intersection_count(&b_cur);
        let nbhd = power.out_neighbors(v).union(power.in_neighbors(v));
        let n_union = nbhd.intersection_count(&b_cur);
        let total = match line5 {
            Line5Rule::SetCardinality => n_union,
            Line5Rule::DegreeSum => n_plus + n_minus,
        };
        let e = if 2 * n_plus >= total { (a, v) } else { (v, a) };
        let in_g = input.arc(e.0, e.1);
        let b_before = b_cur.len();
        if in_g {
            b_cur.difference_with(&nbhd);
        }
        steps.push(TraceStep { a, i, v, e, in_g, n_plus, n_minus, n_union, b_before, b_after: b_cur.len() });
    }
    steps
}

/// Whether `T(in1) = T(in2)` implies `C(in1) = C(in2)`.
pub fn verify_t_determines_c(in1: &EncodeInput, in2: &EncodeInput, params: &Params) -> Result<bool> {
    if in1.frame != in2.frame || in1.h_orient != in2.h_orient {
        return Err(Error::pre("inputs must share the frame and the orientation of H"));
    }
    let o1 = encode(in1, params)?;
    let o2 = encode(in2, params)?;
    Ok(o1.fingerprint != o2.fingerprint || o1.container == o2.container)
}

/// Fingerprint degree `d_T(a)` of every `a ∈ A`.
pub fn fingerprint_degree_report(out: &EncodeOutput, a: &VertexSet) -> BTreeMap<usize, usize> {
    let t = &out.fingerprint;
    a.iter().map(|v| (v, t.out_neighbors(v).len() + t.in_neighbors(v).len())).collect()
}

/// `4 p^{-1/ℓ}`.
pub fn fingerprint_degree_bound(params: &Params) -> f64 {
    4.0 * params.inverse_root()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FamilyStats {
    pub distinct_c: usize,
    pub max_antiparallel: usize,
}

pub fn container_family_stats(outputs: &[EncodeOutput]) -> FamilyStats {
    let distinct: HashSet<&Digraph> = outputs.iter().map(|o| &o.container).collect();
    let max_antiparallel = outputs.iter().map(|o| o.container.antiparallel_pairs()).max().unwrap_or(0);
    FamilyStats { distinct_c: distinct.len(), max_antiparallel }
}

/// `ℓ ⌈α⌉²`.
pub fn antiparallel_bound(params: &Params) -> usize {
    params.ell * params.a_prime_size().pow(2)
}

/// `ln` of `exp(4 ⌈α⌉ p^{-1/ℓ} ln n)`.
pub fn log_family_bound(params: &Params) -> f64 {
    4.0 * params.a_prime_size() as f64 * params.inverse_root() * (params.n as f64).ln()
}
