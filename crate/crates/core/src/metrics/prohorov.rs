use super::flow::Network;
use super::FiniteAtomMeasure;

/// Largest transport between the two measures using only pairs at distance
/// at most `eps`.
fn coupled_mass<P>(mu: &[(P, f64)], nu: &[(P, f64)], d: &[Vec<f64>], eps: f64) -> f64 {
    let (a, b) = (mu.len(), nu.len());
    let (s, t) = (a + b, a + b + 1);
    let mut g = Network::new(a + b + 2);
    for (i, atom) in mu.iter().enumerate() {
        g.add_arc(s, i, atom.1, 0.0);
    }
    for (j, atom) in nu.iter().enumerate() {
        g.add_arc(a + j, t, atom.1, 0.0);
    }
    for (i, row) in d.iter().enumerate() {
        for (j, &dij) in row.iter().enumerate() {
            if dij <= eps {
                g.add_arc(i, a + j, f64::INFINITY, 0.0);
            }
        }
    }
    g.max_flow(s, t)
}

fn breakpoints(d: &[Vec<f64>]) -> Vec<f64> {
    let mut ds: Vec<f64> = d.iter().flatten().copied().chain([0.0]).collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    ds
}

/// Prohorov distance `inf{ε > 0 : μ(A) <= ν(A^ε) + ε and ν(A) <= μ(A^ε) + ε ∀A}`.
///
/// For a given `ε` the largest violation over sets `A` equals
/// `max(μ(E), ν(E)) - F(ε)` where `F(ε)` is the maximum flow over pairs at
/// distance `<= ε`. That violation is a step function of `ε` with jumps at
/// pairwise distances, so the infimum is found exactly by bisection over
/// the sorted distances.
pub fn prohorov<P>(mu: &FiniteAtomMeasure<P>, nu: &FiniteAtomMeasure<P>, metric: impl Fn(&P, &P) -> f64) -> f64 {
    let (ma, na) = (mu.atoms(), nu.atoms());
    let big = mu.total().max(nu.total());
    if ma.is_empty() || na.is_empty() {
        return big;
    }
    let d: Vec<Vec<f64>> = ma
        .iter()
        .map(|x| na.iter().map(|y| metric(&x.0, &y.0)).collect())
        .collect();
    let ds = breakpoints(&d);
    let gap = |k: usize| {
        let g = big - coupled_mass(ma, na, &d, ds[k]);
        // flow round-off
        if g <= 1e-12 * big.max(1.0) {
            0.0
        } else {
            g
        }
    };
    // first breakpoint with d_k >= gap_k (gap is nonincreasing, d increasing)
    let last = ds.len() - 1;
    if ds[last] < gap(last) {
        return gap(last);
    }
    let (mut lo, mut hi) = (0usize, last);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ds[mid] >= gap(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if lo == 0 {
        return ds[0];
    }
    ds[lo].min(gap(lo - 1))
}

/// Reference implementation straight from the definition: enumerates all
/// subsets of both supports. Only for a handful of atoms.
pub fn prohorov_brute<P>(mu: &FiniteAtomMeasure<P>, nu: &FiniteAtomMeasure<P>, metric: impl Fn(&P, &P) -> f64) -> f64 {
    let (ma, na) = (mu.atoms(), nu.atoms());
    assert!(ma.len() <= 12 && na.len() <= 12, "brute force is exponential");
    let d: Vec<Vec<f64>> = ma
        .iter()
        .map(|x| na.iter().map(|y| metric(&x.0, &y.0)).collect())
        .collect();
    let dt: Vec<Vec<f64>> = (0..na.len())
        .map(|j| (0..ma.len()).map(|i| d[i][j]).collect())
        .collect();
    // worst excess of one side over the closed eps-neighbourhood on the other
    let excess = |from: &[(P, f64)], to: &[(P, f64)], dist: &[Vec<f64>], eps: f64| {
        let mut worst = 0.0f64;
        for bits in 0u32..(1 << from.len()) {
            let a: f64 = (0..from.len()).filter(|&i| bits >> i & 1 == 1).map(|i| from[i].1).sum();
            let near: f64 = (0..to.len())
                .filter(|&j| (0..from.len()).any(|i| bits >> i & 1 == 1 && dist[i][j] <= eps))
                .map(|j| to[j].1)
                .sum();
            worst = worst.max(a - near);
        }
        worst
    };
    let feasible = |eps: f64| excess(ma, na, &d, eps) <= eps && excess(na, ma, &dt, eps) <= eps;
    let ds = breakpoints(&d);
    let mut candidates: Vec<f64> = ds.clone();
    for &e in &ds {
        candidates.push(excess(ma, na, &d, e));
        candidates.push(excess(na, ma, &dt, e));
    }
    candidates.push(mu.total().max(nu.total()));
    candidates
        .into_iter()
        .filter(|&e| e >= 0.0 && feasible(e))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn m(atoms: &[(i64, f64)]) -> FiniteAtomMeasure<i64> {
        FiniteAtomMeasure::new(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn dirac_pairs() {
        let d = |a: &i64, b: &i64| (a - b).abs() as f64 / 4.0;
        for k in 0..12 {
            let p = prohorov(&m(&[(0, 1.0)]), &m(&[(k, 1.0)]), d);
            assert_relative_eq!(p, (k as f64 / 4.0).min(1.0));
            assert_relative_eq!(prohorov_brute(&m(&[(0, 1.0)]), &m(&[(k, 1.0)]), d), p);
        }
    }

    #[test]
    fn identical_measures() {
        let a = FiniteAtomMeasure::new([(0.5f64.to_bits(), 0.3), (2.0f64.to_bits(), 0.7)]).unwrap();
        let d = |x: &u64, y: &u64| line(&f64::from_bits(*x), &f64::from_bits(*y));
        assert_eq!(prohorov(&a, &a, d), 0.0);
    }

    #[test]
    fn mass_mismatch() {
        let d = |a: &i64, b: &i64| (a - b).abs() as f64;
        // same point, masses 1 and 1.25: gap 0.25
        assert_relative_eq!(prohorov(&m(&[(0, 1.0)]), &m(&[(0, 1.25)]), d), 0.25);
        assert_relative_eq!(prohorov_brute(&m(&[(0, 1.0)]), &m(&[(0, 1.25)]), d), 0.25);
        assert_eq!(prohorov(&m(&[]), &m(&[(0, 0.5)]), d), 0.5);
    }
}
