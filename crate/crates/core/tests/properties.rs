use proptest::prelude::*;

use treeflow::generators::{coalescent_tree, gw_conditioned, CoalescentKind, CoalescentSpec, Offspring};
use treeflow::metrics::{hausdorff, kr_distance, kr_distance_lp_oracle, prohorov, prohorov_brute, FiniteAtomMeasure};
use treeflow::oracle::{
    capacity, capacity_variational, expected_hitting, green_kernel, heat_kernel, heat_kernel_matrix, occupation_rhs,
};
use treeflow::parallel::Execution;
use treeflow::tree::{
    branch_closure, check_four_point, epsilon_net, length_measure, lower_mass, project_psi, restrict,
};
use treeflow::walk::batch_simulate;
use treeflow::{RootedMetricTree, SpeedMeasure, StopRule, WalkChain};

const TOL: f64 = 1e-9;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Recursive tree rooted at 0 with edge lengths in [0.1, 2) and masses in
/// [0.05, 1).
fn weighted_tree(max_n: usize) -> impl Strategy<Value = (RootedMetricTree, SpeedMeasure)> {
    (2..=max_n).prop_flat_map(|n| {
        (
            proptest::collection::vec((any::<prop::sample::Index>(), 0.1f64..2.0), n - 1),
            proptest::collection::vec(0.05f64..1.0, n),
        )
            .prop_map(move |(edges, mass)| {
                let mut parent = vec![0; n];
                let mut len = vec![0.0; n];
                for (i, (p, l)) in edges.into_iter().enumerate() {
                    parent[i + 1] = p.index(i + 1);
                    len[i + 1] = l;
                }
                (
                    RootedMetricTree::new(parent, len, 0).unwrap(),
                    SpeedMeasure::new(mass).unwrap(),
                )
            })
    })
}

fn line_measure(max_atoms: usize) -> impl Strategy<Value = FiniteAtomMeasure<i32>> {
    proptest::collection::vec((-8i32..8, 0.01f64..1.0), 1..=max_atoms).prop_map(|a| FiniteAtomMeasure::new(a).unwrap())
}

fn line(a: &i32, b: &i32) -> f64 {
    f64::from((a - b).abs()) * 0.25
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_metric_and_branch_points((t, _) in weighted_tree(12)) {
        prop_assert!(check_four_point(&t).passed());
        let n = t.vertex_count();
        for x in 0..n {
            prop_assert_eq!(t.distance(x, x), 0.0);
            for y in 0..n {
                prop_assert!(close(t.distance(x, y), t.distance(y, x), 1e-12));
                for z in 0..n {
                    let c = t.branch_point(x, y, z);
                    for p in [t.branch_point(y, x, z), t.branch_point(z, y, x), t.branch_point(x, z, y)] {
                        prop_assert_eq!(c, p);
                    }
                    prop_assert!(t.distance(x, z) <= t.distance(x, y) + t.distance(y, z) + TOL);
                    prop_assert!((t.distance(x, y) - t.distance(x, c) - t.distance(c, y)).abs() <= TOL);
                    prop_assert!((t.distance(x, z) - t.distance(x, c) - t.distance(c, z)).abs() <= TOL);
                    prop_assert!((t.distance(y, z) - t.distance(y, c) - t.distance(c, z)).abs() <= TOL);
                }
            }
        }
    }

    #[test]
    fn length_measure_telescopes((t, _) in weighted_tree(12)) {
        let lm = length_measure(&t);
        for a in t.vertices() {
            let mut sum = 0.0;
            let mut v = a;
            while !t.is_root(v) {
                sum += lm.mass(v);
                v = t.parent(v);
            }
            prop_assert!(close(sum, t.distance(t.root(), a), 1e-12));
        }
    }

    #[test]
    fn projections_compose((t, _) in weighted_tree(12), picks in proptest::collection::vec(any::<bool>(), 12)) {
        let n = t.vertex_count();
        let big: Vec<usize> = (0..n).filter(|&v| v == 0 || picks[v]).collect();
        let small: Vec<usize> = big.iter().copied().filter(|&v| v == 0 || v % 2 == 0).collect();
        let pb = project_psi(&t, &big).unwrap();
        let ps = project_psi(&t, &small).unwrap();
        for x in 0..n {
            prop_assert_eq!(ps.map[x], ps.map[pb.map[x]]);
        }
    }

    #[test]
    fn branch_closure_is_idempotent((t, _) in weighted_tree(12), picks in proptest::collection::vec(any::<bool>(), 12)) {
        let set: Vec<usize> = (0..t.vertex_count()).filter(|&v| v == 0 || picks[v]).collect();
        let once = branch_closure(&t, &set).unwrap();
        let twice = branch_closure(&t, &once).unwrap();
        prop_assert_eq!(&once, &twice);
        for &v in &set {
            prop_assert!(once.contains(&v));
        }
    }

    #[test]
    fn epsilon_net_is_dense((t, _) in weighted_tree(12), eps in 0.05f64..2.0) {
        let net = epsilon_net(&t, eps, None).unwrap();
        let p = project_psi(&t, &net).unwrap();
        prop_assert!(p.branch_closed);
        for x in t.vertices() {
            prop_assert!(t.distance(x, p.map[x]) <= eps + TOL);
        }
    }

    #[test]
    fn lower_mass_grows_with_delta((t, nu) in weighted_tree(10), d in 0.05f64..2.0, extra in 0.0f64..2.0) {
        let a = lower_mass(&t, &nu, d, None).unwrap().value;
        let b = lower_mass(&t, &nu, d + extra, None).unwrap().value;
        prop_assert!(a <= b + TOL);
    }

    #[test]
    fn restriction_mass_grows_with_radius((t, nu) in weighted_tree(12), r in 0.1f64..4.0, extra in 0.0f64..4.0) {
        let (_, a, _) = restrict(&t, &nu, r).unwrap();
        let (_, b, _) = restrict(&t, &nu, r + extra).unwrap();
        prop_assert!(a.total() <= b.total() + TOL);
    }

    #[test]
    fn detailed_balance((t, nu) in weighted_tree(12)) {
        let chain = WalkChain::new(&t, &nu).unwrap();
        for a in 0..chain.state_count() {
            for &(b, rate) in chain.rates(a) {
                let back = chain.rates(b).iter().find(|x| x.0 == a).map_or(0.0, |x| x.1);
                prop_assert!(close(chain.mass(a) * rate, chain.mass(b) * back, 1e-12));
            }
        }
    }

    #[test]
    fn occupation_formula_and_hitting_bound((t, nu) in weighted_tree(10)) {
        let chain = WalkChain::new(&t, &nu).unwrap();
        let ones = vec![1.0; t.vertex_count()];
        for y in t.vertices() {
            let h = expected_hitting(&chain, &[y]).unwrap();
            for x in t.vertices() {
                let rhs = occupation_rhs(&t, &nu, x, y, &ones).unwrap();
                prop_assert!(close(h[chain.state(x).unwrap()], rhs, 1e-9));
                prop_assert!(rhs <= 2.0 * nu.total() * t.distance(x, y) + TOL);
            }
        }
    }

    #[test]
    fn green_kernel_and_capacity((t, _) in weighted_tree(10)) {
        let n = t.vertex_count();
        for z in 0..n {
            for x in 0..n {
                for y in 0..n {
                    let g = green_kernel(&t, x, y, z).unwrap();
                    prop_assert!(close(g, green_kernel(&t, y, x, z).unwrap(), 1e-12));
                }
                if x != z {
                    prop_assert!(close(capacity(&t, x, z).unwrap(), capacity_variational(&t, x, z).unwrap(), 1e-9));
                }
            }
        }
    }

    #[test]
    fn heat_kernel_mass_symmetry_semigroup((t, nu) in weighted_tree(7), s in 0.05f64..2.0, u in 0.05f64..2.0) {
        let chain = WalkChain::new(&t, &nu).unwrap();
        let n = chain.state_count();
        let qs = heat_kernel_matrix(&chain, s).unwrap();
        let qu = heat_kernel_matrix(&chain, u).unwrap();
        let qsu = heat_kernel_matrix(&chain, s + u).unwrap();
        for x in 0..n {
            let hk = heat_kernel(&chain, x, s).unwrap();
            prop_assert!(close(hk.law(&chain).iter().sum::<f64>(), 1.0, 1e-10));
            prop_assert!(hk.l2_norm_sq <= hk.bound);
            for y in 0..n {
                prop_assert!(close(qs[x][y], qs[y][x], 1e-10));
                let ck: f64 = (0..n).map(|z| qs[x][z] * qu[z][y] * chain.mass(z)).sum();
                prop_assert!(close(qsu[x][y], ck, 1e-8));
            }
        }
    }

    #[test]
    fn measure_distances_are_metrics(a in line_measure(6), b in line_measure(6), c in line_measure(6)) {
        let (pab, pba) = (prohorov(&a, &b, line), prohorov(&b, &a, line));
        prop_assert!((pab - pba).abs() <= TOL);
        prop_assert!(pab <= prohorov(&a, &c, line) + prohorov(&c, &b, line) + TOL);
        prop_assert!(prohorov(&a, &a, line) <= TOL);
        let (kab, kba) = (kr_distance(&a, &b, line), kr_distance(&b, &a, line));
        prop_assert!((kab - kba).abs() <= TOL);
        prop_assert!(kab <= kr_distance(&a, &c, line) + kr_distance(&c, &b, line) + TOL);
        prop_assert!(kr_distance(&a, &a, line) <= TOL);
    }

    #[test]
    fn prohorov_matches_brute_force(a in line_measure(2), b in line_measure(2)) {
        prop_assert!((prohorov(&a, &b, line) - prohorov_brute(&a, &b, line)).abs() <= TOL);
    }

    #[test]
    fn kr_matches_lp_oracle(
        pts in proptest::sample::subsequence((-6i32..=6).collect::<Vec<_>>(), 1..=3),
        wa in proptest::collection::vec(0.0f64..1.0, 3),
        wb in proptest::collection::vec(0.0f64..1.0, 3),
    ) {
        let a = FiniteAtomMeasure::new(pts.iter().zip(&wa).map(|(&p, &w)| (p, w))).unwrap();
        let b = FiniteAtomMeasure::new(pts.iter().zip(&wb).map(|(&p, &w)| (p, w))).unwrap();
        prop_assert!((kr_distance(&a, &b, line) - kr_distance_lp_oracle(&a, &b, line)).abs() <= TOL);
    }

    #[test]
    fn hausdorff_vanishes_on_equal_sets(a in proptest::collection::btree_set(-8i32..8, 1..6), b in proptest::collection::btree_set(-8i32..8, 1..6)) {
        let (va, vb): (Vec<i32>, Vec<i32>) = (a.iter().copied().collect(), b.iter().copied().collect());
        let h = hausdorff(&va, &vb, line).unwrap();
        prop_assert_eq!(h == 0.0, a == b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn batches_agree_across_execution((t, nu) in weighted_tree(10), seed in any::<u64>()) {
        let chain = WalkChain::new(&t, &nu).unwrap();
        let stop = StopRule::horizon(2.0);
        let seq = batch_simulate(&chain, t.root(), &stop, 64, seed, Execution::Sequential).unwrap();
        let par = batch_simulate(&chain, t.root(), &stop, 64, seed, Execution::Parallel).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn generated_trees_are_trees(seed in any::<u64>(), n in 2usize..40) {
        let gw = gw_conditioned(Offspring::Geometric, n, seed).unwrap();
        prop_assert!(check_four_point(&gw.tree).passed());
        prop_assert!(close(gw.measure.total(), (n - 1) as f64 / n as f64, 1e-12));

        let spec = CoalescentSpec { kind: CoalescentKind::Beta { a: 1.0, b: 1.0 }, n_leaves: n.min(20) };
        let ct = coalescent_tree(&spec, seed).unwrap();
        prop_assert!(check_four_point(&ct.tree).passed());
        let d = |i: usize, j: usize| ct.tree.distance(ct.leaves[i], ct.leaves[j]);
        let diam = ct.tree.diameter();
        for i in 0..ct.leaves.len() {
            for j in 0..ct.leaves.len() {
                for k in 0..ct.leaves.len() {
                    prop_assert!(d(i, j) <= d(i, k).max(d(k, j)) + 1e-12 * diam);
                }
            }
        }
    }
}
