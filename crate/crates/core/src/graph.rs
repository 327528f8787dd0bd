//! Undirected graphs, digraphs and orientations over a labeled ground set `[n]`.
//!
//! Every object carries the ground size `n` and its own vertex set, so deleting
//! vertices keeps the original labels. Objects built over the same ground set
//! can be compared and combined without any index translation.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A subset of the ground set `[n]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(FixedBitSet);

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        VertexSet(bits)
    }

    /// Builds a set from labels; labels must be `< n`.
    pub fn from_iter_n(n: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for v in items {
            s.insert(v);
        }
        s
    }

    pub fn ground(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, v: usize) {
        self.0.insert(v);
    }

    pub fn remove(&mut self, v: usize) {
        self.0.set(v, false);
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(v)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.0.union_with(&other.0);
        s
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.0.intersect_with(&other.0);
        s
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.0.difference_with(&other.0);
        s
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        self.0.difference_with(&other.0);
    }

    pub fn intersection_count(&self, other: &VertexSet) -> usize {
        self.0.intersection_count(&other.0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// `[n] \ self`.
    pub fn complement(&self) -> VertexSet {
        let mut s = self.clone();
        s.0.toggle_range(..);
        s
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Simple undirected graph on a subset of `[n]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    vertices: VertexSet,
    adj: Vec<VertexSet>,
}

impl Graph {
    /// Edgeless graph on all of `[n]`.
    pub fn empty(n: usize) -> Self {
        Self::empty_on(VertexSet::full(n))
    }

    /// Edgeless graph on the given vertex set.
    pub fn empty_on(vertices: VertexSet) -> Self {
        let n = vertices.ground();
        Graph { n, vertices, adj: vec![VertexSet::empty(n); n] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    /// Adds `{u, v}`. Loops and endpoints outside the vertex set are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v || !self.vertices.contains(u) || !self.vertices.contains(v) {
            return;
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj[u].remove(v);
        self.adj[v].remove(u);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in self.vertices.iter() {
            out.extend(self.adj[u].iter().filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }

    /// Number of edges with both endpoints in `s`.
    pub fn edges_within(&self, s: &VertexSet) -> usize {
        s.iter().map(|u| self.adj[u].intersection_count(s)).sum::<usize>() / 2
    }

    /// Induced subgraph on `V \ x`, labels preserved.
    pub fn remove_vertices(&self, x: &VertexSet) -> Graph {
        let keep = self.vertices.difference(x);
        self.induced(&keep)
    }

    /// Induced subgraph on `vertices ∩ s`, labels preserved.
    pub fn induced(&self, s: &VertexSet) -> Graph {
        let keep = self.vertices.intersection(s);
        let adj = (0..self.n)
            .map(|v| if keep.contains(v) { self.adj[v].intersection(&keep) } else { VertexSet::empty(self.n) })
            .collect();
        Graph { n: self.n, vertices: keep, adj }
    }

    /// Same graph with a larger vertex set (new vertices are isolated).
    pub fn with_vertices(&self, extra: &VertexSet) -> Graph {
        let mut g = self.clone();
        g.vertices.union_with(extra);
        g
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("vertices", &self.vertices)
            .field("edges", &self.edges())
            .finish()
    }
}

/// Directed graph without self-arcs. Antiparallel pairs are allowed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    n: usize,
    vertices: VertexSet,
    out: Vec<VertexSet>,
    inn: Vec<VertexSet>,
}

impl Digraph {
    pub fn empty(n: usize) -> Self {
        Self::empty_on(VertexSet::full(n))
    }

    pub fn empty_on(vertices: VertexSet) -> Self {
        let n = vertices.ground();
        Digraph { n, vertices, out: vec![VertexSet::empty(n); n], inn: vec![VertexSet::empty(n); n] }
    }

    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut d = Self::empty(n);
        for (u, v) in arcs {
            d.add_arc(u, v);
        }
        d
    }

    /// Every ordered pair of distinct vertices is an arc.
    pub fn complete_bidirected(n: usize) -> Self {
        let mut d = Self::empty(n);
        for u in 0..n {
            for v in 0..n {
                d.add_arc(u, v);
            }
        }
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn add_arc(&mut self, u: usize, v: usize) {
        if u == v || !self.vertices.contains(u) || !self.vertices.contains(v) {
            return;
        }
        self.out[u].insert(v);
        self.inn[v].insert(u);
    }

    pub fn remove_arc(&mut self, u: usize, v: usize) {
        self.out[u].remove(v);
        self.inn[v].remove(u);
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u].contains(v)
    }

    pub fn out_neighbors(&self, v: usize) -> &VertexSet {
        &self.out[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &VertexSet {
        &self.inn[v]
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(VertexSet::len).sum()
    }

    /// Arcs in lexicographic order of `(tail, head)`.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.arc_count());
        for u in 0..self.n {
            out.extend(self.out[u].iter().map(|v| (u, v)));
        }
        out
    }

    /// Number of unordered pairs `{u, v}` with both `u→v` and `v→u`.
    pub fn antiparallel_pairs(&self) -> usize {
        (0..self.n).map(|u| self.out[u].iter().filter(|&v| v > u && self.out[v].contains(u)).count()).sum()
    }

    pub fn reverse(&self) -> Digraph {
        Digraph { n: self.n, vertices: self.vertices.clone(), out: self.inn.clone(), inn: self.out.clone() }
    }

    /// Underlying undirected graph.
    pub fn underlying(&self) -> Graph {
        let mut g = Graph::empty_on(self.vertices.clone());
        for (u, v) in self.arcs() {
            g.add_edge(u, v);
        }
        g
    }

    pub fn is_subgraph_of(&self, other: &Digraph) -> bool {
        self.out.iter().zip(&other.out).all(|(a, b)| a.is_subset(b))
    }

    pub fn remove_vertices(&self, x: &VertexSet) -> Digraph {
        let keep = self.vertices.difference(x);
        self.induced(&keep)
    }

    pub fn induced(&self, s: &VertexSet) -> Digraph {
        let keep = self.vertices.intersection(s);
        let restrict = |rows: &[VertexSet]| -> Vec<VertexSet> {
            (0..self.n)
                .map(|v| if keep.contains(v) { rows[v].intersection(&keep) } else { VertexSet::empty(self.n) })
                .collect()
        };
        Digraph { n: self.n, out: restrict(&self.out), inn: restrict(&self.inn), vertices: keep }
    }

    /// `d↔(a, B)`: arcs between `a` and `B` in either direction. Antiparallel
    /// pairs count twice.
    pub fn bidir_degree(&self, a: usize, b: &VertexSet) -> Result<usize> {
        if b.contains(a) {
            return Err(Error::pre(format!("vertex {a} belongs to the target set")));
        }
        Ok(self.out[a].intersection_count(b) + self.inn[a].intersection_count(b))
    }

    /// `e↔(A, B)` for disjoint `A`, `B`.
    pub fn bidir_edge_count(&self, a: &VertexSet, b: &VertexSet) -> Result<usize> {
        if !a.is_disjoint(b) {
            return Err(Error::pre("sets must be disjoint"));
        }
        Ok(a.iter().map(|v| self.out[v].intersection_count(b) + self.inn[v].intersection_count(b)).sum())
    }

    /// Digraph with `u→v` iff there is a simple directed path with exactly `r`
    /// arcs from `u` to `v`.
    pub fn power(&self, r: usize) -> Result<Digraph> {
        if r == 0 {
            return Err(Error::pre("power digraph needs r >= 1"));
        }
        if r == 1 {
            return Ok(self.clone());
        }
        let mut res = Digraph::empty_on(self.vertices.clone());
        let mut visited = VertexSet::empty(self.n);
        for u in self.vertices.iter() {
            let mut reach = VertexSet::empty(self.n);
            visited.insert(u);
            self.extend_paths(u, r, &mut visited, &mut reach);
            visited.remove(u);
            for v in reach.iter() {
                res.add_arc(u, v);
            }
        }
        Ok(res)
    }

    // `remaining` arcs still to be taken from `cur`.
    fn extend_paths(&self, cur: usize, remaining: usize, visited: &mut VertexSet, reach: &mut VertexSet) {
        if remaining == 1 {
            reach.union_with(&self.out[cur].difference(visited));
            return;
        }
        for next in self.out[cur].iter() {
            if visited.contains(next) {
                continue;
            }
            visited.insert(next);
            self.extend_paths(next, remaining - 1, visited, reach);
            visited.remove(next);
        }
    }

    /// Whether the digraph contains a simple directed cycle with exactly `k`
    /// arcs. Each cycle is searched once, rooted at its smallest vertex.
    pub fn has_directed_cycle(&self, k: usize) -> bool {
        if k < 2 || k > self.vertices.len() {
            return false;
        }
        let mut visited = VertexSet::empty(self.n);
        for root in self.vertices.iter() {
            visited.insert(root);
            let found = self.close_cycle(root, root, k - 1, &mut visited);
            visited.remove(root);
            if found {
                return true;
            }
        }
        false
    }

    fn close_cycle(&self, root: usize, cur: usize, remaining: usize, visited: &mut VertexSet) -> bool {
        if remaining == 0 {
            return self.out[cur].contains(root);
        }
        for next in self.out[cur].iter() {
            if next <= root || visited.contains(next) {
                continue;
            }
            visited.insert(next);
            let found = self.close_cycle(root, next, remaining - 1, visited);
            visited.remove(next);
            if found {
                return true;
            }
        }
        false
    }
}

impl Serialize for Digraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Digraph", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("vertices", &self.vertices)?;
        st.serialize_field("arcs", &self.arcs())?;
        st.end()
    }
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Digraph")
            .field("n", &self.n)
            .field("vertices", &self.vertices)
            .field("arcs", &self.arcs())
            .finish()
    }
}

/// Direction of an edge `{u, v}` with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    /// `u → v`
    Forward,
    /// `v → u`
    Backward,
    Unset,
}

/// An undirected graph together with a (possibly partial) direction per edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Orientation {
    base: Graph,
    edges: Vec<(usize, usize)>,
    dir: Vec<Dir>,
}

impl Orientation {
    pub fn unset(base: Graph) -> Self {
        let edges = base.edges();
        let dir = vec![Dir::Unset; edges.len()];
        Orientation { base, edges, dir }
    }

    /// Complete orientation from one direction per edge, in `base.edges()` order.
    pub fn from_dirs(base: Graph, dir: Vec<Dir>) -> Result<Self> {
        let edges = base.edges();
        if dir.len() != edges.len() {
            return Err(Error::pre(format!("expected {} directions, got {}", edges.len(), dir.len())));
        }
        Ok(Orientation { base, edges, dir })
    }

    /// Orientation whose base is the underlying graph of `d`. Fails if `d`
    /// has an antiparallel pair.
    pub fn from_digraph(d: &Digraph) -> Result<Self> {
        if d.antiparallel_pairs() > 0 {
            return Err(Error::pre("digraph has antiparallel arcs; not an orientation"));
        }
        let mut o = Orientation::unset(d.underlying());
        for (u, v) in d.arcs() {
            o.set_arc(u, v)?;
        }
        Ok(o)
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn vertices(&self) -> &VertexSet {
        self.base.vertices()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn dirs(&self) -> &[Dir] {
        &self.dir
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    /// Directs the edge `{u, v}` as `u → v`.
    pub fn set_arc(&mut self, u: usize, v: usize) -> Result<()> {
        let idx = self
            .edge_index(u, v)
            .ok_or_else(|| Error::pre(format!("{{{u}, {v}}} is not an edge of the base graph")))?;
        self.dir[idx] = if u < v { Dir::Forward } else { Dir::Backward };
        Ok(())
    }

    /// Whether the edge `{u, v}` is present and directed `u → v`.
    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        match self.edge_index(u, v) {
            Some(i) => match self.dir[i] {
                Dir::Forward => u < v,
                Dir::Backward => u > v,
                Dir::Unset => false,
            },
            None => false,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.dir.iter().all(|d| *d != Dir::Unset)
    }

    /// Directed arcs of all set edges.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().zip(&self.dir).filter_map(|(&(u, v), d)| match d {
            Dir::Forward => Some((u, v)),
            Dir::Backward => Some((v, u)),
            Dir::Unset => None,
        })
    }

    pub fn to_digraph(&self) -> Digraph {
        let mut d = Digraph::empty_on(self.base.vertices().clone());
        for (u, v) in self.arcs() {
            d.add_arc(u, v);
        }
        d
    }

    /// Restriction to the subgraph induced by `s` (labels preserved).
    pub fn induced(&self, s: &VertexSet) -> Orientation {
        let base = self.base.induced(s);
        let mut o = Orientation::unset(base);
        for (i, &(u, v)) in o.edges.clone().iter().enumerate() {
            let j = self.edge_index(u, v).expect("induced edge exists in parent");
            o.dir[i] = self.dir[j];
        }
        o
    }

    pub fn remove_vertices(&self, x: &VertexSet) -> Orientation {
        self.induced(&self.vertices().difference(x))
    }

    /// Whether every set edge of `other` is present with the same direction here.
    pub fn extends(&self, other: &Orientation) -> bool {
        other.arcs().all(|(u, v)| self.has_arc(u, v))
    }
}
