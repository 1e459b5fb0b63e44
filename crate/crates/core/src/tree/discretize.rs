//! Restriction to root balls and discrete approximation: branch closure,
//! nets and the root-ward projection `ψ`.

use std::collections::BTreeSet;

use super::{RootedMetricTree, SpeedMeasure, Vertex};
use crate::error::{Error, Result};

/// Tree induced on a vertex set containing the root: each vertex hangs from
/// its nearest strict ancestor in the set. Returns the tree (vertices
/// relabelled `0..k` in the order of `subset`'s sorted ids) and the map
/// new id -> old id. For branch-closed sets the induced metric equals the
/// ambient one.
pub fn induced_subtree(t: &RootedMetricTree, subset: &[Vertex]) -> Result<(RootedMetricTree, Vec<Vertex>)> {
    let set: BTreeSet<Vertex> = subset.iter().copied().collect();
    for &v in &set {
        t.check_vertex(v)?;
    }
    if !set.contains(&t.root()) {
        return Err(Error::InvalidArgument("subset must contain the root".into()));
    }
    let old: Vec<Vertex> = set.iter().copied().collect();
    let mut new_id = vec![usize::MAX; t.vertex_count()];
    for (i, &v) in old.iter().enumerate() {
        new_id[v] = i;
    }
    let mut parent = vec![0; old.len()];
    let mut length = vec![0.0; old.len()];
    for (i, &v) in old.iter().enumerate() {
        if v == t.root() {
            parent[i] = i;
            continue;
        }
        let mut a = t.parent(v);
        while new_id[a] == usize::MAX {
            a = t.parent(a);
        }
        parent[i] = new_id[a];
        length[i] = t.height(v) - t.height(a);
    }
    let root = new_id[t.root()];
    Ok((RootedMetricTree::new(parent, length, root)?, old))
}

/// Restriction to the closed ball `B̄(ρ, R)`: the induced subtree, the
/// restricted measure on it, and the map new id -> old id.
pub fn restrict(
    t: &RootedMetricTree,
    nu: &SpeedMeasure,
    radius: f64,
) -> Result<(RootedMetricTree, SpeedMeasure, Vec<Vertex>)> {
    nu.matches(t)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let keep: Vec<Vertex> = t.vertices().filter(|&v| t.height(v) <= radius).collect();
    let (sub, map) = induced_subtree(t, &keep)?;
    let mass = map.iter().map(|&v| nu.mass(v)).collect();
    Ok((sub, SpeedMeasure::new_allow_zero(mass)?, map))
}

/// Smallest superset of `subset` closed under branch points. With the root
/// in the set, the branch points of all triples are exactly the pairwise
/// LCAs, and those are generated by LCAs of preorder-adjacent members.
pub fn branch_closure(t: &RootedMetricTree, subset: &[Vertex]) -> Result<Vec<Vertex>> {
    for &v in subset {
        t.check_vertex(v)?;
    }
    if subset.is_empty() {
        return Err(Error::InvalidArgument("branch closure of an empty set".into()));
    }
    let mut members: Vec<Vertex> = subset.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if !members.contains(&t.root()) {
        return Err(Error::InvalidArgument("subset must contain the root".into()));
    }
    members.sort_by_key(|&v| t.preorder_index(v));
    let mut out: BTreeSet<Vertex> = members.iter().copied().collect();
    for w in members.windows(2) {
        out.insert(t.lca(w[0], w[1]));
    }
    Ok(out.into_iter().collect())
}

/// Greedy net of the open root ball `B(ρ, R)` (`None` for the whole tree).
///
/// The coverage of a vertex is its distance to the nearest member on
/// `[ρ, x]`. Repeatedly the worst-covered vertex (lowest id on ties) is
/// covered by adding its ancestor closest to the root that is still within
/// `eps`, and the set is branch-closed again. The result contains the root,
/// is branch-closed, and every ball vertex `x` satisfies
/// `r(x, ψ(x)) <= eps`, so it is in particular `eps`-dense.
pub fn epsilon_net(t: &RootedMetricTree, eps: f64, radius: Option<f64>) -> Result<Vec<Vertex>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let in_ball = |v: Vertex| radius.is_none_or(|r| t.height(v) < r);
    let mut member = vec![false; t.vertex_count()];
    member[t.root()] = true;
    let mut members = vec![t.root()];
    let mut cover = vec![0.0; t.vertex_count()];
    loop {
        for &v in t.preorder() {
            cover[v] = if member[v] {
                0.0
            } else {
                cover[t.parent(v)] + t.edge_length(v)
            };
        }
        let worst = t
            .vertices()
            .filter(|&v| in_ball(v))
            .fold(None::<Vertex>, |best, v| match best {
                Some(b) if cover[b] >= cover[v] => Some(b),
                _ => Some(v),
            });
        let Some(x) = worst else { break };
        if cover[x] <= eps {
            break;
        }
        let mut a = x;
        while !t.is_root(a) && t.height(x) - t.height(t.parent(a)) <= eps {
            a = t.parent(a);
        }
        // deepest LCA of the new point with current members
        let b = members
            .iter()
            .map(|&s| t.lca(a, s))
            .max_by_key(|&c| t.depth(c))
            .expect("root is a member");
        for v in [a, b] {
            if !member[v] {
                member[v] = true;
                members.push(v);
            }
        }
    }
    members.sort_unstable();
    Ok(members)
}

/// The root-ward projection onto a vertex subset.
#[derive(Debug, Clone)]
pub struct Projection {
    /// `map[x]` = the member of the subset on `[ρ, x]` farthest from the root.
    pub map: Vec<Vertex>,
    pub branch_closed: bool,
}

impl Projection {
    /// Pushforward of `nu` restricted to the open root ball of the given
    /// radius (whole tree for `None`).
    pub fn pushforward(&self, t: &RootedMetricTree, nu: &SpeedMeasure, radius: Option<f64>) -> SpeedMeasure {
        let mut mass = vec![0.0; self.map.len()];
        for v in t.vertices() {
            if radius.is_none_or(|r| t.height(v) < r) {
                mass[self.map[v]] += nu.mass(v);
            }
        }
        SpeedMeasure::new_allow_zero(mass).expect("sums of finite masses")
    }
}

pub fn project_psi(t: &RootedMetricTree, subset: &[Vertex]) -> Result<Projection> {
    let mut member = vec![false; t.vertex_count()];
    for &v in subset {
        t.check_vertex(v)?;
        member[v] = true;
    }
    if !member[t.root()] {
        return Err(Error::InvalidArgument("subset must contain the root".into()));
    }
    let mut map = vec![t.root(); t.vertex_count()];
    for &v in t.preorder() {
        map[v] = if member[v] { v } else { map[t.parent(v)] };
    }
    let closure = branch_closure(t, subset)?;
    let branch_closed = closure.len() == member.iter().filter(|&&m| m).count();
    Ok(Projection { map, branch_closed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::tests::binary;

    fn y_tree() -> RootedMetricTree {
        // 0 -- 1 (center) -- 2, 1 -- 3
        RootedMetricTree::new(vec![0, 0, 1, 1], vec![0.0, 1.0, 1.0, 1.0], 0).unwrap()
    }

    fn brute_closure(t: &RootedMetricTree, s: &[Vertex]) -> Vec<Vertex> {
        let mut out: BTreeSet<Vertex> = s.iter().copied().collect();
        for &a in s {
            for &b in s {
                for &c in s {
                    out.insert(t.branch_point(a, b, c));
                }
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn restrict_binary() {
        let t = binary(4);
        let nu = SpeedMeasure::new(t.vertices().map(|v| 1.0 + v as f64).collect()).unwrap();
        let (sub, m, map) = restrict(&t, &nu, 2.0).unwrap();
        assert_eq!(sub.vertex_count(), 7);
        let direct: f64 = t
            .vertices()
            .filter(|&v| t.distance(0, v) <= 2.0)
            .map(|v| nu.mass(v))
            .sum();
        assert_eq!(m.total(), direct);
        for a in sub.vertices() {
            for b in sub.vertices() {
                assert_eq!(sub.distance(a, b), t.distance(map[a], map[b]));
            }
        }
        let (same, m2, _) = restrict(&t, &nu, 100.0).unwrap();
        assert_eq!(same.vertex_count(), t.vertex_count());
        assert_eq!(m2, nu);
    }

    #[test]
    fn closure_examples() {
        let t = y_tree();
        assert_eq!(branch_closure(&t, &[0, 2, 3]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(brute_closure(&t, &[0, 2, 3]), vec![0, 1, 2, 3]);
        let all: Vec<_> = t.vertices().collect();
        assert_eq!(branch_closure(&t, &all).unwrap(), all);
        let b = binary(4);
        let s = vec![0, 7, 8, 13, 30];
        assert_eq!(branch_closure(&b, &s).unwrap(), brute_closure(&b, &s));
    }

    #[test]
    fn net_examples() {
        let p = RootedMetricTree::path(&[1.0; 10]).unwrap();
        assert_eq!(epsilon_net(&p, 100.0, None).unwrap(), vec![0]);
        let net = epsilon_net(&p, 1.0, None).unwrap();
        assert!(net.len() >= 5);
        for v in p.vertices() {
            assert!(net.iter().any(|&s| p.distance(v, s) <= 1.0));
        }
        assert_eq!(branch_closure(&p, &net).unwrap(), net);
    }

    #[test]
    fn net_covers_side_branch_through_ancestors() {
        // 0 -(1)- 1, 1 -(0.1)- 2, 1 -(0.1)- 3: a plain 0.25-net {0, 2} would
        // project 3 onto the root.
        let t = RootedMetricTree::new(vec![0, 0, 1, 1], vec![0.0, 1.0, 0.1, 0.1], 0).unwrap();
        let net = epsilon_net(&t, 0.25, None).unwrap();
        let psi = project_psi(&t, &net).unwrap();
        for v in t.vertices() {
            assert!(t.distance(v, psi.map[v]) <= 0.25);
        }
    }

    #[test]
    fn projection_examples() {
        let p = RootedMetricTree::path(&[1.0, 1.0]).unwrap();
        let nu = SpeedMeasure::uniform(3, 1.0);
        let psi = project_psi(&p, &[0, 2]).unwrap();
        assert_eq!(psi.map, vec![0, 0, 2]);
        assert_eq!(psi.pushforward(&p, &nu, None).masses(), &[2.0, 0.0, 1.0]);
        let id = project_psi(&p, &[0, 1, 2]).unwrap();
        assert_eq!(id.map, vec![0, 1, 2]);
        assert!(id.branch_closed);
        let y = y_tree();
        assert!(!project_psi(&y, &[0, 2, 3]).unwrap().branch_closed);
    }
}
