//! Branch-and-propagate counter.
//!
//! Each directed `k`-cycle of the complete bidirection of `G` is a constraint
//! "not every arc of this cycle is chosen". Fixing an edge direction can leave a
//! cycle with all arcs but one chosen; the last edge is then forced the other
//! way, which is the forced-edge rule: `u→v` is impossible as soon as the
//! partial orientation has a simple `(k-1)`-path from `v` to `u`. A constraint
//! whose arcs are all chosen is a conflict and prunes the branch.
//!
//! Live constraints (no arc yet contradicted) split the unset edges into
//! independent components. Components are counted separately, and results
//! are cached under the exact residual constraint set.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{Dir, Graph};

const UNSET: u8 = 2;

/// Upper limit on enumerated cycle constraints.
pub const MAX_CONSTRAINTS: usize = 4_000_000;
/// Cache size, in stored `u32` words, after which the cache is flushed.
pub const DEFAULT_CACHE_WORDS: usize = 16 << 20;

#[derive(Clone, Copy, Debug)]
struct Lit {
    var: u32,
    /// Direction (0 = forward, 1 = backward) that puts the edge on the cycle.
    val: u8,
}

/// The directed `k`-cycles of a graph as constraints over its edges.
pub(crate) struct CycleConstraints {
    pub edges: Vec<(usize, usize)>,
    clauses: Vec<Vec<Lit>>,
    occ: Vec<Vec<(u32, u8)>>,
}

impl CycleConstraints {
    pub fn build(g: &Graph, k: usize) -> Result<CycleConstraints> {
        let edges = g.edges();
        let mut index = HashMap::with_capacity(edges.len());
        for (i, &e) in edges.iter().enumerate() {
            index.insert(e, i as u32);
        }
        let mut clauses = Vec::new();
        if k >= 3 && k <= g.vertices().len() {
            let mut path = Vec::with_capacity(k);
            for root in g.vertices().iter() {
                path.clear();
                path.push(root);
                collect_cycles(g, k, &mut path, &index, &mut clauses)?;
            }
        }
        let mut occ = vec![Vec::new(); edges.len()];
        for (c, clause) in clauses.iter().enumerate() {
            for lit in clause {
                occ[lit.var as usize].push((c as u32, lit.val));
            }
        }
        Ok(CycleConstraints { edges, clauses, occ })
    }

    pub fn var_count(&self) -> usize {
        self.edges.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.clauses.len()
    }
}

fn arc_lit(index: &HashMap<(usize, usize), u32>, from: usize, to: usize) -> Lit {
    let var = index[&(from.min(to), from.max(to))];
    Lit { var, val: if from < to { 0 } else { 1 } }
}

// Directed cycles rooted at their smallest vertex; both traversal directions
// of an undirected cycle are distinct constraints.
fn collect_cycles(
    g: &Graph,
    k: usize,
    path: &mut Vec<usize>,
    index: &HashMap<(usize, usize), u32>,
    out: &mut Vec<Vec<Lit>>,
) -> Result<()> {
    let root = path[0];
    let cur = *path.last().unwrap();
    if path.len() == k {
        if g.has_edge(cur, root) {
            let mut lits: Vec<Lit> = path.windows(2).map(|w| arc_lit(index, w[0], w[1])).collect();
            lits.push(arc_lit(index, cur, root));
            out.push(lits);
            if out.len() > MAX_CONSTRAINTS {
                return Err(Error::budget(format!("more than {MAX_CONSTRAINTS} directed {k}-cycles")));
            }
        }
        return Ok(());
    }
    for next in g.neighbors(cur).iter() {
        if next <= root || path.contains(&next) {
            continue;
        }
        path.push(next);
        collect_cycles(g, k, path, index, out)?;
        path.pop();
    }
    Ok(())
}

pub(crate) struct Solver<'a> {
    f: &'a CycleConstraints,
    assign: Vec<u8>,
    n_true: Vec<u32>,
    n_false: Vec<u32>,
    trail: Vec<u32>,
    queue: Vec<(u32, u8)>,
    cache: HashMap<Vec<u32>, BigUint>,
    cache_words: usize,
    cache_limit: usize,
    pub nodes: u64,
    node_limit: u64,
    exceeded: bool,
}

impl<'a> Solver<'a> {
    pub fn new(f: &'a CycleConstraints) -> Self {
        Solver {
            f,
            assign: vec![UNSET; f.var_count()],
            n_true: vec![0; f.clauses.len()],
            n_false: vec![0; f.clauses.len()],
            trail: Vec::new(),
            queue: Vec::new(),
            cache: HashMap::new(),
            cache_words: 0,
            cache_limit: DEFAULT_CACHE_WORDS,
            nodes: 0,
            node_limit: u64::MAX,
            exceeded: false,
        }
    }

    /// Applies fixed directions (by edge index). Returns `false` on conflict.
    pub fn fix(&mut self, fixed: &[(usize, Dir)]) -> bool {
        for &(var, dir) in fixed {
            let val = match dir {
                Dir::Forward => 0,
                Dir::Backward => 1,
                Dir::Unset => continue,
            };
            if !self.assign_and_propagate(var as u32, val) {
                return false;
            }
        }
        true
    }

    /// Number of completions of the current partial assignment, giving up
    /// after `node_limit` branch nodes.
    pub fn count(&mut self, node_limit: u64) -> Result<BigUint> {
        self.node_limit = node_limit;
        let vars: Vec<u32> = (0..self.f.var_count() as u32).collect();
        let clauses: Vec<u32> = (0..self.f.clauses.len() as u32).collect();
        let total = self.count_rest(&vars, &clauses);
        if self.exceeded {
            return Err(Error::budget(format!("search exceeded {node_limit} branch nodes")));
        }
        Ok(total)
    }

    /// Calls `visit` on each completion (as directions per edge), up to `limit`.
    pub fn for_each_model(&mut self, limit: u64, visit: &mut dyn FnMut(&[Dir])) -> Result<u64> {
        let mut seen = 0;
        self.enumerate(limit, &mut seen, visit)?;
        Ok(seen)
    }

    fn enumerate(&mut self, limit: u64, seen: &mut u64, visit: &mut dyn FnMut(&[Dir])) -> Result<()> {
        let Some(var) = self.assign.iter().position(|&a| a == UNSET) else {
            *seen += 1;
            if *seen > limit {
                return Err(Error::budget(format!("more than {limit} orientations to enumerate")));
            }
            let dirs: Vec<Dir> =
                self.assign.iter().map(|&a| if a == 0 { Dir::Forward } else { Dir::Backward }).collect();
            visit(&dirs);
            return Ok(());
        };
        for val in 0..2 {
            let mark = self.trail.len();
            self.nodes += 1;
            if self.assign_and_propagate(var as u32, val) {
                let r = self.enumerate(limit, seen, visit);
                if r.is_err() {
                    self.undo(mark);
                    return r;
                }
            }
            self.undo(mark);
        }
        Ok(())
    }

    fn assign_and_propagate(&mut self, var: u32, val: u8) -> bool {
        self.queue.clear();
        self.queue.push((var, val));
        while let Some((x, v)) = self.queue.pop() {
            let cur = self.assign[x as usize];
            if cur != UNSET {
                if cur != v {
                    self.queue.clear();
                    return false;
                }
                continue;
            }
            self.assign[x as usize] = v;
            self.trail.push(x);
            for &(c, lv) in &self.f.occ[x as usize] {
                if lv == v {
                    self.n_true[c as usize] += 1;
                } else {
                    self.n_false[c as usize] += 1;
                }
            }
            for &(c, _) in &self.f.occ[x as usize] {
                let c = c as usize;
                if self.n_false[c] != 0 {
                    continue;
                }
                let len = self.f.clauses[c].len() as u32;
                if self.n_true[c] == len {
                    self.queue.clear();
                    return false;
                }
                if self.n_true[c] + 1 == len {
                    let lit = self.f.clauses[c]
                        .iter()
                        .find(|l| self.assign[l.var as usize] == UNSET)
                        .expect("one unset literal");
                    self.queue.push((lit.var, 1 - lit.val));
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let x = self.trail.pop().unwrap() as usize;
            let v = self.assign[x];
            for &(c, lv) in &self.f.occ[x] {
                if lv == v {
                    self.n_true[c as usize] -= 1;
                } else {
                    self.n_false[c as usize] -= 1;
                }
            }
            self.assign[x] = UNSET;
        }
    }

    fn is_live(&self, c: u32) -> bool {
        self.n_false[c as usize] == 0
    }

    // Splits what is left of a component into independent pieces.
    fn count_rest(&mut self, vars: &[u32], clauses: &[u32]) -> BigUint {
        let live: Vec<u32> = clauses.iter().copied().filter(|&c| self.is_live(c)).collect();
        let unset: Vec<u32> = vars.iter().copied().filter(|&x| self.assign[x as usize] == UNSET).collect();
        if unset.is_empty() {
            return BigUint::one();
        }
        // union-find over the unset variables, linked through live clauses
        let mut slot = HashMap::with_capacity(unset.len());
        for (i, &x) in unset.iter().enumerate() {
            slot.insert(x, i);
        }
        let mut parent: Vec<usize> = (0..unset.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut constrained = vec![false; unset.len()];
        for &c in &live {
            let mut first = None;
            for lit in &self.f.clauses[c as usize] {
                if let Some(&i) = slot.get(&lit.var) {
                    constrained[i] = true;
                    match first {
                        None => first = Some(i),
                        Some(j) => {
                            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                            parent[a] = b;
                        }
                    }
                }
            }
        }
        let free = constrained.iter().filter(|&&b| !b).count();
        let mut groups: HashMap<usize, (Vec<u32>, Vec<u32>)> = HashMap::new();
        for (i, &x) in unset.iter().enumerate() {
            if constrained[i] {
                let r = find(&mut parent, i);
                groups.entry(r).or_default().0.push(x);
            }
        }
        for &c in &live {
            let lit = self.f.clauses[c as usize]
                .iter()
                .find(|l| self.assign[l.var as usize] == UNSET)
                .expect("live clause has an unset literal");
            let r = find(&mut parent, slot[&lit.var]);
            groups.get_mut(&r).expect("group exists").1.push(c);
        }
        let mut comps: Vec<(Vec<u32>, Vec<u32>)> = groups.into_values().collect();
        comps.sort_by_key(|(v, _)| v[0]);

        let mut total = BigUint::one() << free;
        for (cv, cc) in comps {
            let sub = self.count_component(&cv, &cc);
            if sub.is_zero() {
                return sub;
            }
            total *= sub;
        }
        total
    }

    fn residual_key(&self, clauses: &[u32]) -> Vec<u32> {
        let mut rows: Vec<Vec<u32>> = clauses
            .iter()
            .map(|&c| {
                let mut lits: Vec<u32> = self.f.clauses[c as usize]
                    .iter()
                    .filter(|l| self.assign[l.var as usize] == UNSET)
                    .map(|l| l.var * 2 + l.val as u32)
                    .collect();
                lits.sort_unstable();
                lits
            })
            .collect();
        rows.sort_unstable();
        rows.dedup();
        let mut key = Vec::with_capacity(rows.iter().map(|r| r.len() + 1).sum());
        for r in rows {
            key.push(r.len() as u32);
            key.extend(r);
        }
        key
    }

    // Branches on the edge lying on the most live partial cycles, a cycle with
    // `t` arcs already chosen weighing `4^t`; ties go to the smallest edge.
    fn pick_branch(&self, vars: &[u32]) -> u32 {
        let mut best = (0usize, vars[0]);
        for &x in vars {
            let score: usize = self.f.occ[x as usize]
                .iter()
                .filter(|&&(c, _)| self.is_live(c))
                .map(|&(c, _)| 1usize << (2 * self.n_true[c as usize]))
                .sum();
            if score > best.0 || (score == best.0 && x < best.1) {
                best = (score, x);
            }
        }
        best.1
    }

    fn count_component(&mut self, vars: &[u32], clauses: &[u32]) -> BigUint {
        let key = self.residual_key(clauses);
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        if self.nodes >= self.node_limit {
            self.exceeded = true;
        }
        if self.exceeded {
            return BigUint::zero();
        }
        let var = self.pick_branch(vars);
        let mut total = BigUint::zero();
        for val in 0..2 {
            let mark = self.trail.len();
            self.nodes += 1;
            if self.assign_and_propagate(var, val) {
                total += self.count_rest(vars, clauses);
            }
            self.undo(mark);
        }
        if self.exceeded {
            return total;
        }
        if self.cache_words + key.len() > self.cache_limit {
            self.cache.clear();
            self.cache_words = 0;
        }
        self.cache_words += key.len() + 8;
        self.cache.insert(key, total.clone());
        total
    }
}
