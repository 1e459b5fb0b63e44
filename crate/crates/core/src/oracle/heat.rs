use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::walk::WalkChain;

/// Truncation threshold for the Poisson tail in uniformization.
pub const POISSON_TAIL: f64 = 1e-12;

const UNIFORMIZATION_FACTOR: f64 = 1.1;
const EXHAUSTIVE_SET_LIMIT: usize = 14;

/// Time-`t` law of the walk started in a state, as a density against `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelResult {
    /// `q_t(x, y) = P_t(x, y) / ν({y})`, indexed by state.
    pub density: Vec<f64>,
    /// `Σ_y q_t(x, y)² ν({y})`.
    pub l2_norm_sq: f64,
    /// `ν(T)^{-1} + diam(T) / t`.
    pub bound: f64,
    /// `1 + bound`.
    pub gamma_t: f64,
}

impl HeatKernelResult {
    /// `P_t(x, ·)`, indexed by state.
    pub fn law(&self, chain: &WalkChain) -> Vec<f64> {
        self.density.iter().zip(chain.masses()).map(|(q, m)| q * m).collect()
    }
}

/// Row `x` of `P_t` by uniformization: `Σ_k Poisson(Λt; k) (I + Q/Λ)^k`
/// with `Λ = 1.1 × max exit rate`, cut when the remaining Poisson mass is
/// provably below [`POISSON_TAIL`].
fn transition_row(chain: &WalkChain, x: usize, time: f64) -> Vec<f64> {
    let n = chain.state_count();
    let lambda = UNIFORMIZATION_FACTOR * chain.max_total_rate();
    let mut row = vec![0.0; n];
    if lambda == 0.0 {
        row[x] = 1.0;
        return row;
    }
    let a = lambda * time;
    let log_weight = |k: f64| -a + k * a.ln() - ln_gamma(k + 1.0);
    let mut v = vec![0.0; n];
    v[x] = 1.0;
    let mut next = vec![0.0; n];
    let mut k = 0usize;
    loop {
        let w = log_weight(k as f64).exp();
        for (r, p) in row.iter_mut().zip(&v) {
            *r += w * p;
        }
        let kf = (k + 1) as f64;
        if kf + 1.0 > a {
            // tail from k+1 on is at most w_{k+1} / (1 - a/(k+2))
            let tail = log_weight(kf).exp() / (1.0 - a / (kf + 1.0));
            if tail < POISSON_TAIL {
                break;
            }
        }
        // v <- v (I + Q/Λ)
        next.iter_mut().for_each(|e| *e = 0.0);
        for (s, &p) in v.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            next[s] += p * (1.0 - chain.total_rate(s) / lambda);
            for &(w, r) in chain.rates(s) {
                next[w] += p * r / lambda;
            }
        }
        std::mem::swap(&mut v, &mut next);
        k += 1;
    }
    row
}

/// Heat kernel from state `x` at time `t > 0`.
pub fn heat_kernel(chain: &WalkChain, x: usize, time: f64) -> Result<HeatKernelResult> {
    if !(time > 0.0) {
        return Err(Error::InvalidArgument(format!("time must be positive, got {time}")));
    }
    if x >= chain.state_count() {
        return Err(Error::InvalidArgument(format!("unknown state {x}")));
    }
    let row = transition_row(chain, x, time);
    let density: Vec<f64> = row.iter().zip(chain.masses()).map(|(p, m)| p / m).collect();
    let l2_norm_sq = density.iter().zip(chain.masses()).map(|(q, m)| q * q * m).sum();
    let bound = 1.0 / chain.total_mass() + chain.tree().diameter() / time;
    Ok(HeatKernelResult {
        density,
        l2_norm_sq,
        bound,
        gamma_t: 1.0 + bound,
    })
}

/// All densities `q_t(x, y)`, rows indexed by the starting state.
pub fn heat_kernel_matrix(chain: &WalkChain, time: f64) -> Result<Vec<Vec<f64>>> {
    (0..chain.state_count())
        .map(|x| heat_kernel(chain, x, time).map(|h| h.density))
        .collect()
}

/// Largest value of `P{X_t ∈ A} - γ_t √ν(A)` over state sets `A`: every
/// nonempty subset for small chains, otherwise singletons and the prefixes
/// of states sorted by decreasing density. Returns the excess and the set.
pub fn set_bound_worst(chain: &WalkChain, hk: &HeatKernelResult) -> (f64, Vec<usize>) {
    let n = chain.state_count();
    let law = hk.law(chain);
    let m = chain.masses();
    let excess = |set: &[usize]| {
        let p: f64 = set.iter().map(|&s| law[s]).sum();
        let mass: f64 = set.iter().map(|&s| m[s]).sum();
        p - hk.gamma_t * mass.sqrt()
    };
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut consider = |set: Vec<usize>| {
        let e = excess(&set);
        if e > best.0 {
            best = (e, set);
        }
    };
    if n <= EXHAUSTIVE_SET_LIMIT {
        for bits in 1u32..(1 << n) {
            consider((0..n).filter(|&s| bits >> s & 1 == 1).collect());
        }
    } else {
        for s in 0..n {
            consider(vec![s]);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| hk.density[b].total_cmp(&hk.density[a]).then(a.cmp(&b)));
        for k in 1..=n {
            consider(order[..k].to_vec());
        }
    }
    best
}
