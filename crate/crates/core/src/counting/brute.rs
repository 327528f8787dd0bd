//! Exhaustive enumeration over all `2^m` orientations, Gray-code ordered so
//! each step flips a single edge in the adjacency masks.

use rayon::prelude::*;

use crate::graph::Graph;

/// Edges relabeled onto the non-isolated vertices, so masks fit in a `u64`.
pub(super) struct Compact {
    pub nv: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Compact {
    pub fn new(g: &Graph) -> Compact {
        let used: Vec<usize> = g.vertices().iter().filter(|&v| g.degree(v) > 0).collect();
        let mut label = vec![usize::MAX; g.n()];
        for (i, &v) in used.iter().enumerate() {
            label[v] = i;
        }
        let edges = g.edges().into_iter().map(|(u, v)| (label[u], label[v])).collect();
        Compact { nv: used.len(), edges }
    }
}

/// Counts assignments (bit `i` set = edge `i` reversed) whose digraph is
/// accepted by `ok`.
pub(super) fn count_orientations<F>(c: &Compact, ok: F) -> u128
where
    F: Fn(&[u64]) -> bool + Sync,
{
    let m = c.edges.len();
    let high_bits = m.min(6);
    let low_bits = m - high_bits;
    (0u64..1 << high_bits)
        .into_par_iter()
        .map(|high| {
            let mut out = vec![0u64; c.nv];
            for (i, &(u, v)) in c.edges.iter().enumerate() {
                let reversed = i >= low_bits && (high >> (i - low_bits)) & 1 == 1;
                if reversed {
                    out[v] |= 1 << u;
                } else {
                    out[u] |= 1 << v;
                }
            }
            let mut hits = ok(&out) as u128;
            for j in 1u64..1 << low_bits {
                let (u, v) = c.edges[j.trailing_zeros() as usize];
                // flip the edge's direction
                out[u] ^= 1 << v;
                out[v] ^= 1 << u;
                hits += ok(&out) as u128;
            }
            hits
        })
        .sum()
}

/// Simple directed cycle with exactly `k` arcs, rooted at its smallest vertex.
pub(super) fn has_cycle(out: &[u64], k: usize) -> bool {
    let nv = out.len();
    if k < 2 || k > nv {
        return false;
    }
    for root in 0..nv {
        let above = if root + 1 >= 64 { 0 } else { !0u64 << (root + 1) };
        let into_root = (0..nv).filter(|&w| out[w] >> root & 1 == 1).fold(0u64, |acc, w| acc | 1 << w) & above;
        if into_root == 0 || out[root] & above == 0 {
            continue;
        }
        if extend(out, root, 0, k, 1 << root, above, into_root) {
            return true;
        }
    }
    false
}

fn extend(out: &[u64], cur: usize, taken: usize, k: usize, visited: u64, above: u64, into_root: u64) -> bool {
    let mut cand = out[cur] & above & !visited;
    if taken + 1 == k - 1 {
        // next vertex must also close back to the root
        return cand & into_root != 0;
    }
    while cand != 0 {
        let next = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        if extend(out, next, taken + 1, k, visited | 1 << next, above, into_root) {
            return true;
        }
    }
    false
}

pub(super) fn is_acyclic(out: &[u64]) -> bool {
    let mut remaining: u64 = if out.len() >= 64 { !0 } else { (1u64 << out.len()) - 1 };
    while remaining != 0 {
        let mut bits = remaining;
        let mut progressed = false;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if out[v] & remaining == 0 {
                remaining &= !(1 << v);
                progressed = true;
            }
        }
        if !progressed {
            return false;
        }
    }
    true
}
