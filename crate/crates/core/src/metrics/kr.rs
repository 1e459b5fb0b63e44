use super::flow::Network;
use super::FiniteAtomMeasure;
use crate::linalg::solve_dense;
use crate::tree::{RootedMetricTree, Vertex};

/// Signed difference `μ - ν` on the union of the supports.
fn signed_difference<P: Ord + Clone>(mu: &FiniteAtomMeasure<P>, nu: &FiniteAtomMeasure<P>) -> Vec<(P, f64)> {
    let mut diff = std::collections::BTreeMap::new();
    for (p, m) in mu.atoms() {
        *diff.entry(p.clone()).or_insert(0.0) += m;
    }
    for (p, m) in nu.atoms() {
        *diff.entry(p.clone()).or_insert(0.0) -= m;
    }
    diff.into_iter().collect()
}

/// Runs the transport problem on a network whose first nodes carry the
/// signed masses `s`; node `ground` absorbs or supplies mass at unit cost
/// per unit (arcs to and from it must already be present).
fn transport_cost(mut g: Network, s: &[f64], ground: usize) -> f64 {
    let src = g.add_node();
    let sink = g.add_node();
    let supply: f64 = s.iter().filter(|x| **x > 0.0).sum();
    let demand: f64 = -s.iter().filter(|x| **x < 0.0).sum::<f64>();
    for (i, &x) in s.iter().enumerate() {
        if x > 0.0 {
            g.add_arc(src, i, x, 0.0);
        } else if x < 0.0 {
            g.add_arc(i, sink, -x, 0.0);
        }
    }
    if supply > demand {
        g.add_arc(ground, sink, supply - demand, 0.0);
    } else if demand > supply {
        g.add_arc(src, ground, demand - supply, 0.0);
    }
    let amount = supply.max(demand);
    if amount == 0.0 {
        return 0.0;
    }
    g.min_cost_flow(src, sink, amount).1
}

/// Kantorovich–Rubinshtein distance: the supremum of `∫ f d(μ - ν)` over
/// `f` with Lipschitz constant and sup-norm at most 1. Computed through the
/// dual transport problem, in which moving mass costs `min(d, 2)` and
/// creating or destroying it costs 1 per unit.
pub fn kr_distance<P: Ord + Clone>(
    mu: &FiniteAtomMeasure<P>,
    nu: &FiniteAtomMeasure<P>,
    metric: impl Fn(&P, &P) -> f64,
) -> f64 {
    let diff = signed_difference(mu, nu);
    let k = diff.len();
    let ground = k;
    let mut g = Network::new(k + 1);
    for i in 0..k {
        g.add_arc(i, ground, f64::INFINITY, 1.0);
        g.add_arc(ground, i, f64::INFINITY, 1.0);
        if diff[i].1 <= 0.0 {
            continue;
        }
        for j in 0..k {
            if diff[j].1 < 0.0 {
                let d = metric(&diff[i].0, &diff[j].0);
                if d < 2.0 {
                    g.add_arc(i, j, f64::INFINITY, d);
                }
            }
        }
    }
    let s: Vec<f64> = diff.iter().map(|x| x.1).collect();
    transport_cost(g, &s, ground).max(0.0)
}

/// [`kr_distance`] for measures on the vertices of `t`, solved on the tree
/// itself plus a ground vertex joined to every vertex at cost 1. Shortest
/// paths in that network realise `min(r, 2)`, and the network is sparse.
pub fn kr_distance_tree(t: &RootedMetricTree, mu: &FiniteAtomMeasure<Vertex>, nu: &FiniteAtomMeasure<Vertex>) -> f64 {
    let n = t.vertex_count();
    let ground = n;
    let mut g = Network::new(n + 1);
    for (v, p, l) in t.edges() {
        g.add_arc(v, p, f64::INFINITY, l);
        g.add_arc(p, v, f64::INFINITY, l);
    }
    for v in 0..n {
        g.add_arc(v, ground, f64::INFINITY, 1.0);
        g.add_arc(ground, v, f64::INFINITY, 1.0);
    }
    let mut s = vec![0.0; n];
    for (p, m) in mu.atoms() {
        s[*p] += m;
    }
    for (p, m) in nu.atoms() {
        s[*p] -= m;
    }
    transport_cost(g, &s, ground).max(0.0)
}

/// Reference value from the primal linear program, by enumerating every
/// vertex of `{f : f_i - f_j <= d_ij, |f_i| <= 1}`. At most 3 points.
pub fn kr_distance_lp_oracle<P: Ord + Clone>(
    mu: &FiniteAtomMeasure<P>,
    nu: &FiniteAtomMeasure<P>,
    metric: impl Fn(&P, &P) -> f64,
) -> f64 {
    let diff = signed_difference(mu, nu);
    let k = diff.len();
    assert!(k <= 3, "vertex enumeration is only meant for tiny supports");
    if k == 0 {
        return 0.0;
    }
    // constraints a·f <= b
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        cons.push((e.clone(), 1.0));
        e[i] = -1.0;
        cons.push((e, 1.0));
        for j in 0..k {
            if i != j {
                let mut a = vec![0.0; k];
                a[i] = 1.0;
                a[j] = -1.0;
                cons.push((a, metric(&diff[i].0, &diff[j].0)));
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut choice = vec![0usize; k];
    fn next(choice: &mut [usize], m: usize) -> bool {
        // increasing index combinations
        let k = choice.len();
        for i in (0..k).rev() {
            if choice[i] < m - (k - i) {
                choice[i] += 1;
                for j in i + 1..k {
                    choice[j] = choice[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    for (i, c) in choice.iter_mut().enumerate() {
        *c = i;
    }
    loop {
        let a: Vec<Vec<f64>> = choice.iter().map(|&c| cons[c].0.clone()).collect();
        let b: Vec<f64> = choice.iter().map(|&c| cons[c].1).collect();
        if let Ok(f) = solve_dense(a, b) {
            let ok = cons
                .iter()
                .all(|(a, b)| a.iter().zip(&f).map(|(x, y)| x * y).sum::<f64>() <= b + 1e-12);
            if ok {
                let val: f64 = diff.iter().zip(&f).map(|(d, x)| d.1 * x).sum();
                best = best.max(val);
            }
        }
        if !next(&mut choice, cons.len()) {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(atoms: &[(i64, f64)]) -> FiniteAtomMeasure<i64> {
        FiniteAtomMeasure::new(atoms.iter().copied()).unwrap()
    }

    fn d(a: &i64, b: &i64) -> f64 {
        (a - b).abs() as f64 / 4.0
    }

    #[test]
    fn dirac_pairs() {
        for k in 0..14 {
            let (a, b) = (m(&[(0, 1.0)]), m(&[(k, 1.0)]));
            assert_relative_eq!(kr_distance(&a, &b, d), (k as f64 / 4.0).min(2.0), epsilon = 1e-12);
            assert_relative_eq!(
                kr_distance_lp_oracle(&a, &b, d),
                (k as f64 / 4.0).min(2.0),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn unequal_mass() {
        let (a, b) = (m(&[(0, 1.0)]), m(&[(1, 0.25)]));
        // move 0.25 at cost 0.25 each, destroy 0.75
        assert_relative_eq!(kr_distance(&a, &b, d), 0.25 * 0.25 + 0.75, epsilon = 1e-12);
        assert_relative_eq!(kr_distance_lp_oracle(&a, &b, d), 0.25 * 0.25 + 0.75, epsilon = 1e-12);
        assert_eq!(kr_distance(&a, &a, d), 0.0);
    }

    #[test]
    fn tree_network_agrees() {
        let t = RootedMetricTree::new(vec![0, 0, 1, 1, 0], vec![0.0, 0.5, 0.75, 1.5, 2.5], 0).unwrap();
        let a = FiniteAtomMeasure::new([(2, 0.5), (3, 0.25), (4, 0.5)]).unwrap();
        let b = FiniteAtomMeasure::new([(0, 0.7), (3, 0.1), (2, 0.05)]).unwrap();
        let dense = kr_distance(&a, &b, |x, y| t.distance(*x, *y));
        assert_relative_eq!(kr_distance_tree(&t, &a, &b), dense, epsilon = 1e-12);
    }
}
