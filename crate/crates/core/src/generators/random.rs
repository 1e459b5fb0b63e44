use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::tree::{RootedMetricTree, SpeedMeasure};

/// Random recursive tree on `n` vertices rooted at 0: vertex `i` hangs from
/// a uniform earlier vertex, with edge length uniform in `[lo, hi)`.
pub fn random_tree(n: usize, lo: f64, hi: f64, seed: u64) -> Result<RootedMetricTree> {
    if n == 0 {
        return Err(Error::InvalidArgument("tree needs at least one vertex".into()));
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("need 0 < lo < hi, got [{lo}, {hi})")));
    }
    let mut r = rng::stream(seed);
    let mut parent = vec![0; n];
    let mut len = vec![0.0; n];
    for v in 1..n {
        parent[v] = r.random_range(0..v);
        len[v] = r.random_range(lo..hi);
    }
    RootedMetricTree::new(parent, len, 0)
}

/// Independent masses uniform in `[lo, hi)` on `n` vertices.
pub fn random_measure(n: usize, lo: f64, hi: f64, seed: u64) -> Result<SpeedMeasure> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("need 0 < lo < hi, got [{lo}, {hi})")));
    }
    let mut r = rng::stream(seed);
    SpeedMeasure::new((0..n).map(|_| r.random_range(lo..hi)).collect())
}
