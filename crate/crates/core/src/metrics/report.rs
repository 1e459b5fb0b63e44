use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{empirical_law, hausdorff, kr_distance, kr_distance_tree, prohorov, FiniteAtomMeasure};
use crate::error::{Error, Result};
use crate::tree::{RootedMetricTree, SpeedMeasure, Vertex};
use crate::walk::Snapshots;

/// Radii closer than this to an atom height are flagged: restriction is
/// discontinuous there.
const RADIUS_FLAG_TOL: f64 = 1e-9;

/// A point set with a measure on it, both inside a common ambient tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Space {
    pub points: Vec<Vertex>,
    pub measure: FiniteAtomMeasure<Vertex>,
}

impl Space {
    pub fn new(points: Vec<Vertex>, measure: FiniteAtomMeasure<Vertex>) -> Self {
        Self { points, measure }
    }

    /// The vertices of `t` mapped through `embed`, with `nu` pushed along.
    pub fn embedded(t: &RootedMetricTree, nu: &SpeedMeasure, embed: &[Vertex]) -> Self {
        let mut points: Vec<Vertex> = t.vertices().map(|v| embed[v]).collect();
        points.sort_unstable();
        points.dedup();
        Self {
            points,
            measure: FiniteAtomMeasure::from_speed_measure(nu, Some(embed)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub radius: f64,
    pub prohorov: f64,
    pub hausdorff: f64,
    pub kr: f64,
    /// `m^R_δ` of the level's measure, one entry per δ of the report grid.
    pub m_delta: Vec<f64>,
    pub m_delta_min: f64,
    /// Some atom sits within `1e-9` of the radius.
    pub near_atom: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub radii: Vec<f64>,
    pub deltas: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,radius,prohorov,hausdorff,kr,m_delta_min\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.level, r.radius, r.prohorov, r.hausdorff, r.kr, r.m_delta_min
            )
            .unwrap();
        }
        out
    }

    pub fn rows_at(&self, radius: f64) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.radius == radius)
    }
}

/// `inf ν(B̄(x, δ))` over points `x` of the space with `r(ρ, x) < R`.
fn local_mass(t: &RootedMetricTree, space: &Space, delta: f64, radius: f64) -> f64 {
    space
        .points
        .iter()
        .filter(|&&x| t.height(x) < radius)
        .map(|&x| {
            space
                .measure
                .atoms()
                .iter()
                .filter(|a| t.distance(x, a.0) <= delta)
                .map(|a| a.1)
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Per level and radius: Prohorov and KR distances between the measures
/// restricted to `B̄(ρ, R)`, the Hausdorff distance between the restricted
/// point sets, and the local mass bounds `m^R_δ` over `deltas`.
pub fn gh_vague_report(
    t: &RootedMetricTree,
    sequence: &[Space],
    limit: &Space,
    radii: &[f64],
    deltas: &[f64],
) -> Result<ConvergenceReport> {
    if radii.iter().any(|r| !(*r > 0.0)) || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidArgument("radii and deltas must be positive".into()));
    }
    let d = |a: &Vertex, b: &Vertex| t.distance(*a, *b);
    let ball = |s: &Space, r: f64| -> (Vec<Vertex>, FiniteAtomMeasure<Vertex>) {
        (
            s.points.iter().copied().filter(|&v| t.height(v) <= r).collect(),
            s.measure.restrict(|&v| t.height(v) <= r),
        )
    };
    let near = |s: &Space, r: f64| s.measure.points().any(|&v| (t.height(v) - r).abs() <= RADIUS_FLAG_TOL);
    let mut rows = Vec::new();
    for (level, s) in sequence.iter().enumerate() {
        for &r in radii {
            let (pa, ma) = ball(s, r);
            let (pb, mb) = ball(limit, r);
            let hausdorff = if pa.is_empty() && pb.is_empty() {
                0.0
            } else {
                hausdorff(&pa, &pb, d)
                    .map_err(|_| Error::InvalidArgument(format!("radius {r} leaves one of the point sets empty")))?
            };
            let m_delta: Vec<f64> = deltas.iter().map(|&dl| local_mass(t, s, dl, r)).collect();
            rows.push(ConvergenceRow {
                level,
                radius: r,
                prohorov: prohorov(&ma, &mb, d),
                hausdorff,
                kr: kr_distance_tree(t, &ma, &mb),
                m_delta_min: m_delta.iter().copied().fold(f64::INFINITY, f64::min) + 0.0,
                m_delta,
                near_atom: near(s, r) || near(limit, r),
            });
        }
    }
    Ok(ConvergenceReport {
        radii: radii.to_vec(),
        deltas: deltas.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FddReport {
    pub times: Vec<f64>,
    /// KR distance of the one-time empirical laws.
    pub per_time: Vec<f64>,
    /// KR distance of the joint laws of snapshot vectors under the max
    /// metric over coordinates, when requested.
    pub joint: Option<f64>,
}

/// Compares two ensembles sampled on the same time grid and embedded in
/// `t` (positions must already be ambient vertices).
pub fn fdd_compare(t: &RootedMetricTree, a: &Snapshots, b: &Snapshots, joint: bool) -> Result<FddReport> {
    if a.times != b.times {
        return Err(Error::InvalidArgument("ensembles use different time grids".into()));
    }
    let mut per_time = Vec::with_capacity(a.times.len());
    for i in 0..a.times.len() {
        let la = empirical_law(&a.at(i))?;
        let lb = empirical_law(&b.at(i))?;
        per_time.push(kr_distance_tree(t, &la, &lb));
    }
    let joint = if joint {
        let la = empirical_law(&a.positions)?;
        let lb = empirical_law(&b.positions)?;
        Some(kr_distance(&la, &lb, |x, y| {
            x.iter().zip(y).map(|(&p, &q)| t.distance(p, q)).fold(0.0, f64::max)
        }))
    } else {
        None
    };
    Ok(FddReport {
        times: a.times.clone(),
        per_time,
        joint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialBoundTable {
    pub deltas: Vec<f64>,
    pub kappas: Vec<f64>,
    /// `values[i][j] = inf_x δ_j^{-κ_i} ν(B(x, δ_j))`.
    pub values: Vec<Vec<f64>>,
    pub threshold: f64,
    /// Largest κ whose row stays at or above the threshold on the δ grid.
    pub largest_kappa: Option<f64>,
}

/// Volume-growth diagnostic over the open balls `B(x, δ)`.
pub fn polynomial_lower_bound(
    t: &RootedMetricTree,
    nu: &SpeedMeasure,
    deltas: &[f64],
    kappas: &[f64],
    threshold: f64,
) -> Result<PolynomialBoundTable> {
    nu.matches(t)?;
    if deltas.is_empty() || kappas.is_empty() {
        return Err(Error::InvalidArgument("delta and kappa grids must be nonempty".into()));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidArgument("deltas must be positive".into()));
    }
    let inf_mass: Vec<f64> = deltas
        .iter()
        .map(|&dl| {
            t.vertices()
                .map(|x| nu.measure_of(t.vertices().filter(|&y| t.distance(x, y) < dl)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let values: Vec<Vec<f64>> = kappas
        .iter()
        .map(|&k| deltas.iter().zip(&inf_mass).map(|(&dl, &m)| dl.powf(-k) * m).collect())
        .collect();
    let largest_kappa = kappas
        .iter()
        .zip(&values)
        .filter(|(_, row)| row.iter().all(|&v| v >= threshold))
        .map(|(&k, _)| k)
        .fold(None, |acc: Option<f64>, k| Some(acc.map_or(k, |a| a.max(k))));
    Ok(PolynomialBoundTable {
        deltas: deltas.to_vec(),
        kappas: kappas.to_vec(),
        values,
        threshold,
        largest_kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_sequence_is_zero() {
        let t = RootedMetricTree::path(&[1.0, 1.0, 1.0]).unwrap();
        let nu = SpeedMeasure::uniform(4, 0.25);
        let s = Space::embedded(&t, &nu, &[0, 1, 2, 3]);
        let r = gh_vague_report(&t, &[s.clone(), s.clone()], &s, &[0.5, 1.5, 10.0], &[0.5]).unwrap();
        assert_eq!(r.rows.len(), 6);
        for row in &r.rows {
            assert_eq!((row.prohorov, row.hausdorff, row.kr), (0.0, 0.0, 0.0));
        }
        assert_relative_eq!(r.rows[2].m_delta_min, 0.25);
        assert!(r
            .to_csv()
            .starts_with("level,radius,prohorov,hausdorff,kr,m_delta_min\n"));
    }

    #[test]
    fn two_point_flags_mass_bound() {
        // ν_n = δ_0 + δ_1 / n against δ_0 on the unit edge
        let t = RootedMetricTree::path(&[1.0]).unwrap();
        let limit = Space::new(vec![0, 1], FiniteAtomMeasure::new([(0, 1.0)]).unwrap());
        let seq: Vec<Space> = [2.0, 8.0, 32.0]
            .iter()
            .map(|&n| Space::new(vec![0, 1], FiniteAtomMeasure::new([(0, 1.0), (1, 1.0 / n)]).unwrap()))
            .collect();
        let r = gh_vague_report(&t, &seq, &limit, &[2.0], &[0.5]).unwrap();
        let p: Vec<f64> = r.rows.iter().map(|x| x.prohorov).collect();
        let m: Vec<f64> = r.rows.iter().map(|x| x.m_delta_min).collect();
        assert_relative_eq!(p[0], 0.5);
        assert_relative_eq!(p[2], 1.0 / 32.0);
        assert_relative_eq!(m[1], 1.0 / 8.0);
        assert!(!r.rows[0].near_atom);
    }

    #[test]
    fn flags_radius_at_atom() {
        let t = RootedMetricTree::path(&[1.0]).unwrap();
        let s = Space::new(vec![0, 1], FiniteAtomMeasure::new([(0, 1.0), (1, 1.0)]).unwrap());
        let r = gh_vague_report(&t, std::slice::from_ref(&s), &s, &[1.0], &[0.5]).unwrap();
        assert!(r.rows[0].near_atom);
    }

    #[test]
    fn polynomial_table() {
        let t = RootedMetricTree::path(&[1.0; 6]).unwrap();
        let nu = SpeedMeasure::uniform(7, 1.0);
        let tab = polynomial_lower_bound(&t, &nu, &[0.5, 1.5], &[0.0, 1.0, 8.0], 0.9).unwrap();
        assert_eq!(tab.values[0], vec![1.0, 2.0]);
        assert_eq!(tab.largest_kappa, Some(1.0));
    }
}
