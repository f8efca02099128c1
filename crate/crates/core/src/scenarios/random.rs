//! Seeded generators for random instances. The same seed always yields the
//! same instance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::rational;
use crate::space::{DiscreteMeasure, FiniteMetricMeasureSpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points on a small integer lattice in the plane with the `ℓ¹` metric,
/// so every distance and cost is an exact small integer.
pub fn lattice_space(rng: &mut ChaCha8Rng, n: usize) -> Result<FiniteMetricMeasureSpace> {
    let mut cells: Vec<(i64, i64)> = (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).collect();
    cells.shuffle(rng);
    let pts = &cells[..n];
    let ids = (0..n).map(|i| format!("q{i}")).collect();
    let dist =
        pts.iter().map(|a| pts.iter().map(|b| ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as f64).collect()).collect();
    FiniteMetricMeasureSpace::from_dense(ids, vec![1.0; n], dist)
}

/// `n` uniform points in the unit square with the Euclidean metric.
pub fn planar_space(rng: &mut ChaCha8Rng, n: usize) -> Result<FiniteMetricMeasureSpace> {
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let ids = (0..n).map(|i| format!("q{i}")).collect();
    let dist = pts.iter().map(|a| pts.iter().map(|b| (a[0] - b[0]).hypot(a[1] - b[1])).collect()).collect();
    Ok(FiniteMetricMeasureSpace::from_dense(ids, vec![1.0; n], dist)?.with_coords(pts))
}

/// Probability measure on `k` distinct random points with integer relative
/// masses in `1..=max_mass`, exact.
pub fn measure(
    rng: &mut ChaCha8Rng,
    space: &FiniteMetricMeasureSpace,
    k: usize,
    max_mass: i64,
) -> Result<DiscreteMeasure> {
    let mut pts: Vec<usize> = (0..space.len()).collect();
    pts.shuffle(rng);
    let masses: Vec<_> = pts[..k].iter().map(|&p| (p, rational::from_int(rng.gen_range(1..=max_mass)))).collect();
    DiscreteMeasure::weighted_on(space, &masses)
}

/// `count` index pairs `(p, q)` drawn uniformly from `0..n`.
pub fn pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(usize, usize)> {
    (0..count).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = lattice_space(&mut rng(7), 5).unwrap();
        let b = lattice_space(&mut rng(7), 5).unwrap();
        assert_eq!(a.dense_rows(), b.dense_rows());
        let mu = measure(&mut rng(3), &a, 3, 4).unwrap();
        assert!(mu.is_probability());
        assert_eq!(mu.support().len(), 3);
        assert_eq!(pairs(&mut rng(1), 10, 4), pairs(&mut rng(1), 10, 4));
    }
}
