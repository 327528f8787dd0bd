use dicount::containers::{kw_family, kw_fingerprint, kw_replay, KWConfig};
use dicount::counting::{count_acyclic, count_propagate};
use dicount::density::{is_r_locally_dense, moment_bound_check, witness_holds, Frame, Params};
use dicount::encode::{encode, replay_container, EncodeInput, Line5Rule};
use dicount::sampling::{sample_extension, sample_gnp, sample_orientation};
use dicount::sweep::{run_sweep, to_csv, SweepSpec};
use dicount::{Digraph, Graph, Seed, VertexSet};
use num_bigint::BigUint;
use proptest::prelude::*;

/// Adjacency matrix has a simple directed cycle through exactly `k` vertices.
fn oracle_has_cycle(adj: &[Vec<bool>], k: usize) -> bool {
    fn walk(adj: &[Vec<bool>], path: &mut Vec<usize>, k: usize) -> bool {
        let last = *path.last().unwrap();
        if path.len() == k {
            return adj[last][path[0]];
        }
        for v in path[0] + 1..adj.len() {
            if adj[last][v] && !path.contains(&v) {
                path.push(v);
                if walk(adj, path, k) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    k >= 2 && (0..adj.len()).any(|s| walk(adj, &mut vec![s], k))
}

fn oracle_count(n: usize, edges: &[(usize, usize)], k: usize) -> u64 {
    let m = edges.len();
    (0..1u64 << m)
        .filter(|mask| {
            let mut adj = vec![vec![false; n]; n];
            for (i, &(u, v)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    adj[u][v] = true;
                } else {
                    adj[v][u] = true;
                }
            }
            !oracle_has_cycle(&adj, k)
        })
        .count() as u64
}

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            Graph::from_edges(n, pairs.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e))
        })
    })
}

fn digraph_strategy(max_n: usize) -> impl Strategy<Value = Digraph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let arcs = (0..n).flat_map(|u| (0..n).map(move |v| (u, v)));
            Digraph::from_arcs(n, arcs.zip(bits).filter(|((u, v), b)| *b && u != v).map(|(e, _)| e))
        })
    })
}

fn adjacency(d: &Digraph) -> Vec<Vec<bool>> {
    (0..d.n()).map(|u| (0..d.n()).map(|v| d.has_arc(u, v)).collect()).collect()
}

#[test]
fn power_one_is_identity_on_all_small_digraphs() {
    for n in 1..=4usize {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).filter(|(u, v)| u != v).collect();
        for mask in 0..1u32 << pairs.len() {
            let d =
                Digraph::from_arcs(n, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e));
            assert_eq!(d.power(1).unwrap(), d);
        }
    }
}

#[test]
fn cycle_detection_matches_oracle_on_all_four_vertex_digraphs() {
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|u| (0..4).map(move |v| (u, v))).filter(|(u, v)| u != v).collect();
    for mask in 0..1u32 << pairs.len() {
        let d = Digraph::from_arcs(4, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e));
        let adj = adjacency(&d);
        for k in 2..=4 {
            assert_eq!(d.has_directed_cycle(k), oracle_has_cycle(&adj, k), "{d:?} k={k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cycle_detection_matches_oracle(d in digraph_strategy(5), k in 3usize..=5) {
        prop_assert_eq!(d.has_directed_cycle(k), oracle_has_cycle(&adjacency(&d), k));
    }

    #[test]
    fn power_arcs_are_walks(d in digraph_strategy(6), r in 1usize..=4) {
        let n = d.n();
        let adj = adjacency(&d);
        // boolean matrix power: walks of exactly r arcs
        let mut reach: Vec<Vec<bool>> = adj.clone();
        for _ in 1..r {
            reach = (0..n).map(|u| (0..n).map(|v| (0..n).any(|w| reach[u][w] && adj[w][v])).collect()).collect();
        }
        for (u, v) in d.power(r).unwrap().arcs() {
            prop_assert!(reach[u][v]);
        }
    }

    #[test]
    fn bidir_edge_count_is_reverse_symmetric(d in digraph_strategy(7), split in any::<u64>()) {
        let n = d.n();
        let a = VertexSet::from_iter_n(n, (0..n).filter(|v| split >> v & 1 == 1));
        let b = a.complement();
        prop_assert_eq!(d.bidir_edge_count(&a, &b).unwrap(), d.reverse().bidir_edge_count(&b, &a).unwrap());
    }

    #[test]
    fn sampling_is_deterministic_and_extends(n in 2usize..16, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = sample_gnp(n, p, Seed(seed)).unwrap();
        prop_assert_eq!(&g, &sample_gnp(n, p, Seed(seed)).unwrap());
        let a = VertexSet::from_iter_n(n, 0..n / 2);
        let h = g.induced(&a.complement());
        let ext = sample_extension(&a, &h, p, Seed(seed ^ 1)).unwrap();
        prop_assert_eq!(ext.induced(h.vertices()), h);
    }

    #[test]
    fn count_matches_oracle(g in graph_strategy(6), k in 3usize..=5) {
        prop_assume!(g.edge_count() <= 12);
        let edges = g.edges();
        let expected = oracle_count(g.n(), &edges, k);
        prop_assert_eq!(count_propagate(&g, k).unwrap().count, BigUint::from(expected));
    }

    #[test]
    fn adding_an_edge_at_most_doubles(g in graph_strategy(8), k in 3usize..=5, pick in any::<u64>()) {
        let missing: Vec<(usize, usize)> =
            (0..g.n()).flat_map(|u| (u + 1..g.n()).map(move |v| (u, v))).filter(|&(u, v)| !g.has_edge(u, v)).collect();
        prop_assume!(!missing.is_empty());
        let (u, v) = missing[pick as usize % missing.len()];
        let mut plus = g.clone();
        plus.add_edge(u, v);
        let d = count_propagate(&g, k).unwrap().count;
        let d_plus = count_propagate(&plus, k).unwrap().count;
        prop_assert!(d_plus <= d * 2u32);
    }

    #[test]
    fn count_is_sandwiched(g in graph_strategy(8), k in 3usize..=6) {
        let d = count_propagate(&g, k).unwrap().count;
        let all = BigUint::from(1u32) << g.edge_count();
        prop_assert!(count_acyclic(&g).unwrap() <= d);
        prop_assert!(d <= all);
        if k > g.n() {
            prop_assert_eq!(d, all);
        }
    }

    #[test]
    fn moment_bound_never_fails(s in 0u64..2000, p in 0.0f64..=1.0, c in 0.0f64..50.0) {
        prop_assert!(moment_bound_check(s, p, c).unwrap().ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_density_ignores_orientation(n in 6usize..12, p in 0.2f64..0.95, seed in any::<u64>()) {
        let g = sample_gnp(n, p, Seed(seed)).unwrap();
        let params = Params::with_alpha(2, p, n, 2.0).unwrap();
        let v1 = is_r_locally_dense(&sample_orientation(&g, Seed(seed ^ 5)), 1, &params, u64::MAX, Seed(0)).unwrap();
        let v2 = is_r_locally_dense(&sample_orientation(&g, Seed(seed ^ 9)), 1, &params, u64::MAX, Seed(0)).unwrap();
        prop_assert!(v1.exhaustive && v2.exhaustive);
        prop_assert_eq!(v1.dense, v2.dense);
    }

    #[test]
    fn sampled_witnesses_certify_sparsity(n in 10usize..18, p in 0.2f64..0.9, seed in any::<u64>(), r in 1usize..=2) {
        let g = sample_gnp(n, p, Seed(seed)).unwrap();
        let o = sample_orientation(&g, Seed(seed ^ 3));
        let params = Params::with_alpha(2, p, n, 2.0).unwrap();
        let v = is_r_locally_dense(&o, r, &params, 200, Seed(seed)).unwrap();
        prop_assert_eq!(v.dense, v.witness.is_none());
        if let Some(w) = &v.witness {
            prop_assert!(witness_holds(&o, r, &params, w).unwrap());
        }
    }

    #[test]
    fn encode_invariants(h_size in 16usize..24, p in 0.05f64..0.9, seed in any::<u64>(), degree_sum in any::<bool>()) {
        let n = 2 + h_size;
        let params = Params::with_alpha(2, 0.5, n, 4.0).unwrap();
        let h = sample_gnp(n, 0.5, Seed(seed)).unwrap().induced(&VertexSet::from_iter_n(n, 2..n));
        let frame = Frame {
            a: VertexSet::from_iter_n(n, [0, 1]),
            h: h.clone(),
            b: VertexSet::from_iter_n(n, 2..10),
            x: VertexSet::from_iter_n(n, 10..12),
            r: 2,
        };
        let g = sample_extension(&frame.a, &h, p, Seed(seed ^ 1)).unwrap();
        let h_orient = sample_orientation(&h, Seed(seed ^ 2));
        let mut o = sample_orientation(&g, Seed(seed ^ 3));
        for (u, v) in h_orient.arcs() {
            o.set_arc(u, v).unwrap();
        }
        let input = EncodeInput::from_orientation(frame.clone(), o.clone());
        let rule = if degree_sum { Line5Rule::DegreeSum } else { Line5Rule::SetCardinality };
        let out = dicount::encode::encode_with(&input, &params, rule).unwrap();
        for (u, v) in o.arcs().filter(|&(u, v)| frame.a.contains(u) != frame.a.contains(v)) {
            prop_assert!(out.container.has_arc(u, v));
        }
        for (u, v) in out.fingerprint.arcs() {
            prop_assert!(o.has_arc(u, v));
        }
        prop_assert_eq!(out.container.antiparallel_pairs(), 2 * (h_size - out.l as usize));
        for a in frame.a.iter() {
            let steps: Vec<_> = out.trace.iter().filter(|s| s.a == a).collect();
            prop_assert!(steps.windows(2).all(|w| w[1].b_before == w[0].b_after));
            prop_assert!(steps.iter().all(|s| s.b_after <= s.b_before));
        }
        prop_assert_eq!(replay_container(&frame, &h_orient, &out.fingerprint, &params, rule).unwrap(), out.container.clone());
        if !degree_sum {
            prop_assert_eq!(out, encode(&input, &params).unwrap());
        }
    }

    #[test]
    fn kw_replay_and_containment(g in graph_strategy(7), beta in 0.0f64..0.6, q in 0usize..4, r in 0.0f64..5.0) {
        let cfg = KWConfig::new(beta, q, r).unwrap();
        let fam = kw_family(&g, &cfg).unwrap();
        for (i, s, idx) in &fam.fingerprints {
            let fp = kw_fingerprint(&g, i, &cfg).unwrap();
            prop_assert_eq!(&fp.s, s);
            prop_assert!(s.is_subset(i));
            prop_assert!(s.len() <= q);
            prop_assert_eq!(&kw_replay(&g, s, &cfg), &fam.containers[*idx]);
            prop_assert!(i.is_subset(&fam.containers[*idx]));
        }
    }

    #[test]
    fn kw_coverage_grows_with_q(g in graph_strategy(7), beta in 0.0f64..0.6, q in 0usize..4, r in 0.0f64..5.0) {
        let small = kw_family(&g, &KWConfig::new(beta, q, r).unwrap()).unwrap();
        let large = kw_family(&g, &KWConfig::new(beta, q + 1, r).unwrap()).unwrap();
        let covered = |fam: &dicount::containers::ContainerFamily| {
            fam.fingerprints.iter().filter(|(i, _, idx)| i.is_subset(&fam.containers[*idx])).count()
        };
        prop_assert!(covered(&large) >= covered(&small));
    }
}

#[test]
fn sweep_rows_account_for_every_cell() {
    let spec = SweepSpec {
        n_values: vec![6, 9],
        p_values: vec![0.4, 0.8],
        k_values: vec![3, 4],
        seeds_per_cell: 2,
        max_edges: 20,
        ..SweepSpec::default()
    };
    let out = run_sweep(&spec).unwrap();
    assert_eq!(out.rows.len() + out.skipped.len(), spec.cardinality());
    for row in &out.rows {
        let count: BigUint = row.count.parse().unwrap();
        assert!(count <= BigUint::from(1u32) << row.edge_count);
    }
}

#[test]
fn sweep_csv_is_reproducible_apart_from_timing() {
    let spec = SweepSpec {
        n_values: vec![7, 8],
        p_values: vec![0.5],
        k_values: vec![3],
        seeds_per_cell: 3,
        ..SweepSpec::default()
    };
    let strip = |bytes: Vec<u8>| -> Vec<String> {
        String::from_utf8(bytes)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
            .collect()
    };
    let a = strip(to_csv(&run_sweep(&spec).unwrap()).unwrap());
    let b = strip(to_csv(&run_sweep(&spec).unwrap()).unwrap());
    assert_eq!(a, b);
}
