use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::tree::{RootedMetricTree, SpeedMeasure, Vertex, GEOM_TOL};
use crate::walk::WalkChain;

/// Green kernel of the walk killed at `z`: the expected time spent at `y`
/// per unit mass before `τ_z`, started from `x`, is `2 r(z, c(x, y, z))`.
pub fn green_kernel(t: &RootedMetricTree, x: Vertex, y: Vertex, z: Vertex) -> Result<f64> {
    let c = t.try_branch_point(x, y, z)?;
    Ok(2.0 * t.distance(z, c))
}

/// `cap_{z}(y) = 1 / (2 r(y, z))`.
pub fn capacity(t: &RootedMetricTree, y: Vertex, z: Vertex) -> Result<f64> {
    let d = t.try_distance(y, z)?;
    if y == z {
        return Err(Error::InvalidArgument("capacity needs two distinct vertices".into()));
    }
    Ok(1.0 / (2.0 * d))
}

/// Minimal tree energy over functions with `f(y) = 1` and `f(z) = 0`.
pub fn capacity_variational(t: &RootedMetricTree, y: Vertex, z: Vertex) -> Result<f64> {
    t.check_vertex(y)?;
    t.check_vertex(z)?;
    if y == z {
        return Err(Error::InvalidArgument("capacity needs two distinct vertices".into()));
    }
    let f = harmonic_extension(t, &[y, z], &[1.0, 0.0])?;
    Ok(tree_energy(t, &f))
}

/// `E(f, f) = ½ Σ_edges (Δf)² / ℓ`, with `f` indexed by vertex.
pub fn tree_energy(t: &RootedMetricTree, f: &[f64]) -> f64 {
    assert_eq!(f.len(), t.vertex_count());
    0.5 * t.edges().map(|(v, p, l)| (f[v] - f[p]).powi(2) / l).sum::<f64>()
}

/// Right-hand side of the occupation-time formula,
/// `2 Σ_z r(y, c(x, y, z)) f(z) ν({z})`, with `f` indexed by vertex.
pub fn occupation_rhs(t: &RootedMetricTree, nu: &SpeedMeasure, x: Vertex, y: Vertex, f: &[f64]) -> Result<f64> {
    nu.matches(t)?;
    t.check_vertex(x)?;
    t.check_vertex(y)?;
    if f.len() != t.vertex_count() {
        return Err(Error::InvalidArgument("f must have one value per vertex".into()));
    }
    Ok(2.0
        * t.vertices()
            .filter(|&z| nu.mass(z) != 0.0 && f[z] != 0.0)
            .map(|z| t.distance(y, t.branch_point(x, y, z)) * f[z] * nu.mass(z))
            .sum::<f64>())
}

/// `E^x[τ_A]` for every state `x`, by first-step analysis:
/// `Σ_v c(x,v)/2 (h(x) - h(v)) = m(x)` off `A`, `h = 0` on `A`.
pub fn expected_hitting(chain: &WalkChain, target: &[Vertex]) -> Result<Vec<f64>> {
    if target.is_empty() {
        return Err(Error::InvalidArgument("target set is empty".into()));
    }
    let n = chain.state_count();
    let mut in_target = vec![false; n];
    for &v in target {
        in_target[chain.try_state(v)?] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&s| !in_target[s]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &s) in free.iter().enumerate() {
        index[s] = i;
    }
    let mut a = SparseMatrix::new(free.len());
    let mut b = vec![0.0; free.len()];
    for (i, &s) in free.iter().enumerate() {
        b[i] = chain.mass(s);
        for &(w, c) in chain.conductances(s) {
            a.add(i, i, 0.5 * c);
            if !in_target[w] {
                a.add(i, index[w], -0.5 * c);
            }
        }
    }
    let sol = if free.is_empty() { Vec::new() } else { a.solve(&b)? };
    Ok((0..n).map(|s| if in_target[s] { 0.0 } else { sol[index[s]] }).collect())
}

/// `E^x[τ_A]` from any vertex, averaging over the entry law when `x`
/// carries no mass.
pub fn expected_hitting_from(chain: &WalkChain, x: Vertex, target: &[Vertex]) -> Result<f64> {
    let h = expected_hitting(chain, target)?;
    Ok(chain.entry_law(x)?.into_iter().map(|(s, p)| p * h[s]).sum())
}

/// Natural-scale hitting probability `P^x{τ_a < τ_b} = r(x, b) / r(a, b)`
/// for `x` on the segment `[a, b]`.
pub fn hitting_prob(t: &RootedMetricTree, x: Vertex, a: Vertex, b: Vertex) -> Result<f64> {
    let ab = t.try_distance(a, b)?;
    t.check_vertex(x)?;
    if a == b {
        return Err(Error::InvalidArgument("segment endpoints coincide".into()));
    }
    if (t.distance(a, x) + t.distance(x, b) - ab).abs() > GEOM_TOL {
        return Err(Error::InvalidArgument(format!(
            "vertex {x} is not on the segment [{a}, {b}]"
        )));
    }
    Ok(t.distance(x, b) / ab)
}

/// The same probability from the harmonic system of the chain (the
/// endpoints must be states).
pub fn hitting_prob_harmonic(chain: &WalkChain, x: Vertex, a: Vertex, b: Vertex) -> Result<f64> {
    if a == b {
        return Err(Error::InvalidArgument("segment endpoints coincide".into()));
    }
    let sa = chain.try_state(a)?;
    let sb = chain.try_state(b)?;
    let h = harmonic_on_chain(chain, &[(sa, 1.0), (sb, 0.0)])?;
    Ok(chain.entry_law(x)?.into_iter().map(|(s, p)| p * h[s]).sum())
}

/// Solves `Ωh = 0` off the given states with prescribed boundary values;
/// the result is indexed by state.
pub fn harmonic_on_chain(chain: &WalkChain, boundary: &[(usize, f64)]) -> Result<Vec<f64>> {
    let n = chain.state_count();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for &(s, v) in boundary {
        if s >= n {
            return Err(Error::InvalidArgument(format!("unknown state {s}")));
        }
        fixed[s] = Some(v);
    }
    if boundary.is_empty() {
        return Err(Error::InvalidArgument("boundary is empty".into()));
    }
    solve_laplace(n, &fixed, |s| chain.conductances(s).to_vec())
}

/// Energy-minimising extension of boundary values to all vertices, using
/// conductances `1/ℓ` on the edges; indexed by vertex.
pub fn harmonic_extension(t: &RootedMetricTree, boundary: &[Vertex], values: &[f64]) -> Result<Vec<f64>> {
    if boundary.is_empty() {
        return Err(Error::InvalidArgument("boundary is empty".into()));
    }
    if boundary.len() != values.len() {
        return Err(Error::InvalidArgument(
            "one value per boundary vertex is required".into(),
        ));
    }
    let n = t.vertex_count();
    let mut fixed = vec![None; n];
    for (&v, &x) in boundary.iter().zip(values) {
        t.check_vertex(v)?;
        fixed[v] = Some(x);
    }
    solve_laplace(n, &fixed, |u| {
        t.neighbors(u).map(|w| (w, 1.0 / t.distance(u, w))).collect()
    })
}

fn solve_laplace(n: usize, fixed: &[Option<f64>], adj: impl Fn(usize) -> Vec<(usize, f64)>) -> Result<Vec<f64>> {
    let free: Vec<usize> = (0..n).filter(|&u| fixed[u].is_none()).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &u) in free.iter().enumerate() {
        index[u] = i;
    }
    let mut a = SparseMatrix::new(free.len());
    let mut b = vec![0.0; free.len()];
    for (i, &u) in free.iter().enumerate() {
        for (w, c) in adj(u) {
            a.add(i, i, c);
            match fixed[w] {
                Some(x) => b[i] += c * x,
                None => a.add(i, index[w], -c),
            }
        }
    }
    let sol = if free.is_empty() { Vec::new() } else { a.solve(&b)? };
    Ok((0..n).map(|u| fixed[u].unwrap_or_else(|| sol[index[u]])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_path(k: usize) -> RootedMetricTree {
        RootedMetricTree::path(&vec![1.0; k]).unwrap()
    }

    #[test]
    fn green_kernel_values() {
        let t = unit_path(2);
        assert_eq!(green_kernel(&t, 0, 1, 0).unwrap(), 0.0);
        assert_eq!(green_kernel(&t, 0, 1, 2).unwrap(), 2.0);
        assert_eq!(green_kernel(&t, 1, 0, 2).unwrap(), 2.0);
        assert_eq!(green_kernel(&t, 2, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn capacities() {
        let t = unit_path(3);
        assert_eq!(capacity(&t, 0, 1).unwrap(), 0.5);
        assert_relative_eq!(capacity(&t, 0, 3).unwrap(), 1.0 / 6.0);
        assert_relative_eq!(capacity_variational(&t, 0, 3).unwrap(), 1.0 / 6.0, epsilon = 1e-14);
        assert_relative_eq!(capacity_variational(&t, 3, 0).unwrap(), 1.0 / 6.0, epsilon = 1e-14);
        assert!(capacity(&t, 1, 1).is_err());
    }

    #[test]
    fn path_hitting_time() {
        let t = unit_path(2);
        let nu = SpeedMeasure::uniform(3, 1.0);
        assert_eq!(occupation_rhs(&t, &nu, 0, 2, &[1.0; 3]).unwrap(), 6.0);
        assert_eq!(occupation_rhs(&t, &nu, 2, 2, &[1.0; 3]).unwrap(), 0.0);
        let chain = WalkChain::new(&t, &nu).unwrap();
        let h = expected_hitting(&chain, &[2]).unwrap();
        assert_relative_eq!(h[0], 6.0, epsilon = 1e-12);
        assert_eq!(h[2], 0.0);
    }

    #[test]
    fn two_state_hitting_time() {
        let t = unit_path(1);
        let chain = WalkChain::new(&t, &SpeedMeasure::new(vec![1.0, 0.1]).unwrap()).unwrap();
        assert_relative_eq!(expected_hitting(&chain, &[1]).unwrap()[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn natural_scale() {
        let t = RootedMetricTree::path(&[1.0, 3.0]).unwrap();
        assert_eq!(hitting_prob(&t, 0, 0, 2).unwrap(), 1.0);
        assert_relative_eq!(hitting_prob(&t, 1, 0, 2).unwrap(), 0.75);
        let chain = WalkChain::new(&t, &SpeedMeasure::new(vec![0.3, 2.0, 1.0]).unwrap()).unwrap();
        assert_relative_eq!(hitting_prob_harmonic(&chain, 1, 0, 2).unwrap(), 0.75, epsilon = 1e-12);
        let mid = unit_path(2);
        assert_relative_eq!(hitting_prob(&mid, 1, 0, 2).unwrap(), 0.5);
        let y = RootedMetricTree::new(vec![0, 0, 0], vec![0.0, 1.0, 1.0], 0).unwrap();
        assert!(hitting_prob(&y, 0, 1, 1).is_err());
        let bent = RootedMetricTree::new(vec![0, 0, 1], vec![0.0, 1.0, 1.0], 0).unwrap();
        assert!(hitting_prob(&bent, 0, 1, 2).is_err());
    }

    #[test]
    fn zero_mass_start_uses_entry_law() {
        let t = RootedMetricTree::path(&[1.0, 3.0]).unwrap();
        let chain = WalkChain::new(&t, &SpeedMeasure::new_allow_zero(vec![1.0, 0.0, 1.0]).unwrap()).unwrap();
        assert_relative_eq!(hitting_prob_harmonic(&chain, 1, 0, 2).unwrap(), 0.75, epsilon = 1e-12);
        let e = expected_hitting_from(&chain, 1, &[2]).unwrap();
        let nu = chain.measure();
        let rhs = occupation_rhs(&t, nu, 1, 2, &[1.0; 3]).unwrap();
        assert_relative_eq!(e, rhs, epsilon = 1e-12);
    }

    #[test]
    fn harmonic_extension_interpolates() {
        let t = unit_path(2);
        assert_eq!(
            harmonic_extension(&t, &[0, 2], &[0.0, 1.0]).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        let all = harmonic_extension(&t, &[0, 1, 2], &[3.0, -1.0, 2.0]).unwrap();
        assert_eq!(all, vec![3.0, -1.0, 2.0]);
        assert!(harmonic_extension(&t, &[], &[]).is_err());
    }
}
