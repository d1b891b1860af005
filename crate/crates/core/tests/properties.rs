use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sperner_core::chain::{
    boundary_chain, boundary_standard_chain, flow, standard_chain, Chain, Label, Labeling, Ring,
};
use sperner_core::complex::{OrientedSimplex, Simplex, SkeletonGraph, Vertex};
use sperner_core::grid::{points, vertex_id};
use sperner_core::instances::{random_manifold, random_oriented_manifold, regular_subdivision};
use sperner_core::separation::{
    best_separation, iterated_separation_number, validate_separation, SeparatorStrategy,
};

fn ring() -> impl Strategy<Value = Ring> {
    prop_oneof![Just(Ring::Z), Just(Ring::Z2)]
}

/// Distinct vertices drawn from `0..pool`, in a random order.
fn ordering(dim: usize, pool: u32) -> impl Strategy<Value = Vec<Vertex>> {
    Just((0..pool).collect::<Vec<Vertex>>())
        .prop_shuffle()
        .prop_map(move |v| v[..=dim].to_vec())
}

fn chain(dim: usize) -> impl Strategy<Value = (Ring, Vec<(Vec<Vertex>, i64)>)> {
    (
        ring(),
        prop::collection::vec((ordering(dim, dim as u32 + 4), -3i64..=3), 0..30),
    )
}

fn build(ring: Ring, dim: usize, terms: &[(Vec<Vertex>, i64)]) -> Chain {
    let mut c = Chain::zero(ring, dim);
    for (o, k) in terms {
        c.add_term(&OrientedSimplex::from_ordering(o).unwrap(), *k).unwrap();
    }
    c
}

fn labeling(dim: usize, labels: &[Label]) -> Labeling {
    labels
        .iter()
        .enumerate()
        .map(|(v, &l)| (v as Vertex, l % (dim as Label + 1)))
        .collect()
}

fn graph(n: usize, bits: &[bool]) -> SkeletonGraph {
    let mut edges = Vec::new();
    let mut k = 0;
    for u in 0..n as Vertex {
        for v in u + 1..n as Vertex {
            if bits[k] {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    SkeletonGraph::new(0..n as Vertex, edges)
}

fn random_graph(max: usize) -> impl Strategy<Value = SkeletonGraph> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| graph(n, &bits))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boundary_squared_vanishes((dim, (r, terms)) in (2usize..=5).prop_flat_map(|d| (Just(d), chain(d)))) {
        let c = build(r, dim, &terms);
        prop_assert!(boundary_chain(&boundary_chain(&c).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn flow_conserved_on_chains((r, terms) in chain(2), labels in prop::collection::vec(0u32..3, 6)) {
        let c = build(r, 2, &terms);
        let l = labeling(2, &labels);
        let lhs = flow(&c, &l).unwrap();
        let rhs = r.alternate(2, flow(&boundary_chain(&c).unwrap(), &l).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn flow_conserved_in_dimension_three((r, terms) in chain(3), labels in prop::collection::vec(0u32..4, 7)) {
        let c = build(r, 3, &terms);
        let l = labeling(3, &labels);
        let lhs = flow(&c, &l).unwrap();
        let rhs = r.alternate(3, flow(&boundary_chain(&c).unwrap(), &l).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn flow_is_additive(
        (r, a) in chain(2),
        b in prop::collection::vec((ordering(2, 6), -3i64..=3), 0..30),
        labels in prop::collection::vec(0u32..3, 6),
    ) {
        let (x, y) = (build(r, 2, &a), build(r, 2, &b));
        let l = labeling(2, &labels);
        let sum = flow(&x.add(&y).unwrap(), &l).unwrap();
        prop_assert_eq!(sum, r.reduce(flow(&x, &l).unwrap() + flow(&y, &l).unwrap()));
        prop_assert_eq!(flow(&x.neg(), &l).unwrap(), r.reduce(-flow(&x, &l).unwrap()));
    }

    #[test]
    fn boundary_of_standard_chain(seed in any::<u64>(), dim in 2usize..=3, size in 1usize..40, oriented in any::<bool>()) {
        let (m, r) = if oriented {
            (random_oriented_manifold(seed, dim, size).unwrap(), Ring::Z)
        } else {
            (random_manifold(seed, dim, size).unwrap().unoriented(), Ring::Z2)
        };
        let direct = boundary_standard_chain(&m, r).unwrap();
        let derived = boundary_chain(&standard_chain(&m, r).unwrap()).unwrap();
        prop_assert_eq!(direct, derived);
    }

    #[test]
    fn orientation_cancels_on_interior_ridges(seed in any::<u64>(), dim in 2usize..=3, size in 1usize..40) {
        let m = random_oriented_manifold(seed, dim, size).unwrap();
        let mut seen: BTreeMap<Simplex, Vec<OrientedSimplex>> = BTreeMap::new();
        for f in m.oriented_facets() {
            for r in f.induced_faces().unwrap() {
                seen.entry(r.base.clone()).or_default().push(r);
            }
        }
        for faces in seen.values() {
            prop_assert!(faces.len() <= 2);
            if let [a, b] = faces.as_slice() {
                prop_assert_eq!(a.sign, -b.sign);
            }
        }
        prop_assert!(m.unoriented().oriented().is_ok());
    }

    #[test]
    fn faces_have_binomial_count(vs in prop::collection::btree_set(0u32..50, 1..8)) {
        let s = Simplex::new(vs.iter().copied()).unwrap();
        let d = s.dim();
        for k in 0..=d {
            let faces = s.faces(k).unwrap();
            let want = (0..=k).fold(1usize, |acc, i| acc * (d + 1 - i) / (i + 1));
            prop_assert_eq!(faces.len(), want);
            prop_assert!(faces.iter().all(|f| f.vertices().iter().all(|&v| s.contains(v))));
        }
    }

    #[test]
    fn opposite_orientation_flips_faces(o in ordering(4, 9)) {
        let s = OrientedSimplex::from_ordering(&o).unwrap();
        let a = s.induced_faces().unwrap();
        let b = s.opposite().induced_faces().unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.base, &y.base);
            prop_assert_eq!(x.sign, -y.sign);
        }
    }

    #[test]
    fn strategies_return_valid_separations(g in random_graph(11)) {
        for strategy in [SeparatorStrategy::BfsLevel, SeparatorStrategy::Exact { cap: 12 }] {
            let sep = best_separation(&g, &strategy);
            prop_assert!(validate_separation(&g, &sep.a(), &sep.c()).is_ok());
        }
    }

    #[test]
    fn grid_line_is_valid_on_subgrids(m in 3u32..=14, keep in prop::collection::vec(any::<bool>(), 120)) {
        let verts: BTreeSet<Vertex> = points(m)
            .enumerate()
            .filter(|(k, _)| keep[k % keep.len()])
            .map(|(_, p)| vertex_id(m, p))
            .collect();
        let g = regular_subdivision(m).unwrap().skeleton().induced(&verts);
        let sep = best_separation(&g, &SeparatorStrategy::GridLine { m });
        prop_assert!(validate_separation(&g, &sep.a(), &sep.c()).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn separation_number_is_monotone(g in random_graph(8), drop in prop::collection::vec(any::<bool>(), 8)) {
        let keep: BTreeSet<Vertex> = g.vertices().iter().copied().filter(|&v| !drop[v as usize]).collect();
        let h = g.induced(&keep);
        let sg = iterated_separation_number(&g, 12).unwrap().value;
        let sh = iterated_separation_number(&h, 12).unwrap().value;
        prop_assert!(sh <= sg, "s(H) = {} > s(G) = {}", sh, sg);
    }
}

#[test]
fn separation_number_is_monotone_exhaustively_to_five_vertices() {
    for n in 1..=5usize {
        let e = n * (n - 1) / 2;
        for mask in 0u32..(1 << e) {
            let bits: Vec<bool> = (0..e).map(|k| mask >> k & 1 == 1).collect();
            let g = graph(n, &bits);
            let sg = iterated_separation_number(&g, 12).unwrap().value;
            for sub in 0u32..(1 << n) {
                let keep: BTreeSet<Vertex> = (0..n as Vertex).filter(|&v| sub >> v & 1 == 1).collect();
                let sh = iterated_separation_number(&g.induced(&keep), 12).unwrap().value;
                assert!(sh <= sg, "n={n} mask={mask:b} sub={sub:b}");
            }
        }
    }
}
