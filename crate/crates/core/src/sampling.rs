//! Seeded samplers for `G(n, p)`, `G(A, H, p)` and uniform random orientations.
//!
//! Every random bit is a pure function of `(seed, stream, pair index)`: the
//! pair `{u, v}` (`u < v`) of the ground set `[n]` has index
//! `u(2n - u - 1)/2 + (v - u - 1)`, i.e. pairs are numbered lexicographically,
//! and its uniform draw is the SplitMix64 finalizer applied to a mix of the
//! three inputs. Samples therefore do not depend on iteration order or thread
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dir, Graph, Orientation, VertexSet};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const EDGE_STREAM: u64 = 1;
const ORIENT_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    /// Child seed for job `i`; used wherever work is split across trials or threads.
    pub fn split(self, i: u64) -> Seed {
        Seed(mix64(self.0 ^ mix64(i.wrapping_add(GOLDEN))))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` for one `(seed, stream, index)` triple.
pub fn counter_uniform(seed: Seed, stream: u64, index: u64) -> f64 {
    let x = mix64(seed.0 ^ mix64(stream.wrapping_mul(GOLDEN) ^ mix64(index.wrapping_add(GOLDEN))));
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Lexicographic index of the pair `{u, v}` within `C([n], 2)`.
pub fn pair_index(n: usize, u: usize, v: usize) -> u64 {
    let (u, v) = (u.min(v) as u64, u.max(v) as u64);
    let n = n as u64;
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::pre(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn edge_present(n: usize, u: usize, v: usize, p: f64, seed: Seed) -> bool {
    counter_uniform(seed, EDGE_STREAM, pair_index(n, u, v)) < p
}

/// Erdős–Rényi `G(n, p)`.
pub fn sample_gnp(n: usize, p: f64, seed: Seed) -> Result<Graph> {
    check_p(p)?;
    let rows: Vec<Vec<usize>> =
        (0..n).into_par_iter().map(|u| (u + 1..n).filter(|&v| edge_present(n, u, v, p, seed)).collect()).collect();
    let mut g = Graph::empty(n);
    for (u, row) in rows.into_iter().enumerate() {
        for v in row {
            g.add_edge(u, v);
        }
    }
    Ok(g)
}

/// `G(A, H, p)`: keeps `h` exactly and adds every pair touching `A` with
/// probability `p`.
pub fn sample_extension(a: &VertexSet, h: &Graph, p: f64, seed: Seed) -> Result<Graph> {
    check_p(p)?;
    if a.ground() != h.n() {
        return Err(Error::pre("A and H live on different ground sets"));
    }
    if !a.is_disjoint(h.vertices()) {
        return Err(Error::pre("A must be disjoint from V(H)"));
    }
    let n = h.n();
    let all = a.union(h.vertices());
    let mut g = h.with_vertices(a);
    for x in a.iter() {
        for y in all.iter() {
            if y == x || (a.contains(y) && y < x) {
                continue;
            }
            if edge_present(n, x, y, p, seed) {
                g.add_edge(x, y);
            }
        }
    }
    Ok(g)
}

/// Complete orientation with an independent fair direction per edge.
pub fn sample_orientation(g: &Graph, seed: Seed) -> Orientation {
    let n = g.n();
    let dirs =
        g.edges()
            .into_iter()
            .map(|(u, v)| {
                if counter_uniform(seed, ORIENT_STREAM, pair_index(n, u, v)) < 0.5 {
                    Dir::Forward
                } else {
                    Dir::Backward
                }
            })
            .collect();
    Orientation::from_dirs(g.clone(), dirs).expect("one direction per edge")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_is_lexicographic() {
        let n = 6;
        let mut expect = 0;
        for u in 0..n {
            for v in u + 1..n {
                assert_eq!(pair_index(n, u, v), expect);
                assert_eq!(pair_index(n, v, u), expect);
                expect += 1;
            }
        }
    }

    #[test]
    fn gnp_extremes() {
        assert_eq!(sample_gnp(9, 0.0, Seed(3)).unwrap().edge_count(), 0);
        assert_eq!(sample_gnp(9, 1.0, Seed(3)).unwrap(), Graph::complete(9));
        assert!(sample_gnp(4, 1.5, Seed(0)).is_err());
        assert!(sample_gnp(4, -0.1, Seed(0)).is_err());
    }

    #[test]
    fn gnp_is_deterministic() {
        let a = sample_gnp(30, 0.4, Seed(77)).unwrap();
        let b = sample_gnp(30, 0.4, Seed(77)).unwrap();
        let c = sample_gnp(30, 0.4, Seed(78)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn extension_examples() {
        let h = Graph::from_edges(6, [(0, 1), (1, 2)]).induced(&VertexSet::from_iter_n(6, [0, 1, 2]));
        let none = VertexSet::empty(6);
        assert_eq!(sample_extension(&none, &h, 0.7, Seed(1)).unwrap(), h);

        let a = VertexSet::from_iter_n(6, [3, 4]);
        let g0 = sample_extension(&a, &h, 0.0, Seed(1)).unwrap();
        assert_eq!(g0.edges(), h.edges());
        assert_eq!(g0.vertices().len(), 5);

        let g1 = sample_extension(&a, &h, 1.0, Seed(1)).unwrap();
        // h's 2 edges + 2·3 bipartite + 1 inside A
        assert_eq!(g1.edge_count(), 2 + 6 + 1);
        assert!(!g1.has_edge(0, 2));
        assert!(!g1.vertices().contains(5));

        let overlap = VertexSet::from_iter_n(6, [2, 3]);
        assert!(sample_extension(&overlap, &h, 0.5, Seed(1)).is_err());
    }

    #[test]
    fn orientation_examples() {
        let empty = sample_orientation(&Graph::empty(4), Seed(9));
        assert!(empty.edges().is_empty());
        let e = Graph::from_edges(2, [(0, 1)]);
        let o1 = sample_orientation(&e, Seed(5));
        assert!(o1.is_complete());
        assert_eq!(o1, sample_orientation(&e, Seed(5)));
        let dirs: std::collections::HashSet<_> = (0..64).map(|s| sample_orientation(&e, Seed(s)).dirs()[0]).collect();
        assert_eq!(dirs.len(), 2);
    }
}
