//! Grid approximation of the two-sided cusp `{|x| ≤ 1/2, |y| ≤ x²}` with the
//! intrinsic metric of the sup norm.
//!
//! With pitch `h = 1/N`, the grid point `(i, j)` stands for `(i/N, j/N)` and
//! lies in the cusp iff `2|i| ≤ N` and `N|j| ≤ i²`, an exact integer test.
//! Axis and diagonal moves have sup-norm length `h` and are kept only when the
//! whole segment stays inside the cusp.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::space::{from_weighted_graph, DiscreteMeasure, FiniteMetricMeasureSpace};

#[derive(Clone, Debug)]
pub struct CuspGrid {
    pub space: FiniteMetricMeasureSpace,
    /// `N = 1/h`.
    pub denominator: i64,
    /// Integer coordinates of every point.
    pub cells: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
}

impl CuspGrid {
    pub fn h(&self) -> f64 {
        1.0 / self.denominator as f64
    }

    pub fn point(&self, i: i64, j: i64) -> Option<usize> {
        self.index.get(&(i, j)).copied()
    }

    pub fn origin(&self) -> usize {
        self.index[&(0, 0)]
    }

    /// Sup-norm distance in the ambient plane.
    pub fn ambient_distance(&self, p: usize, q: usize) -> f64 {
        let (a, b) = (self.cells[p], self.cells[q]);
        (a.0 - b.0).abs().max((a.1 - b.1).abs()) as f64 / self.denominator as f64
    }
}

pub(super) fn point_id(i: i64, j: i64) -> String {
    format!("p{i}_{j}")
}

/// `N` with `N·h = 1`, requiring `h ≤ 1/16`.
pub(super) fn grid_denominator(h: f64) -> Result<i64> {
    if !(h > 0.0 && h <= 1.0 / 16.0) {
        return Err(Error::Parameter(format!("cusp grid step must lie in (0, 1/16], got {h}")));
    }
    let n = (1.0 / h).round();
    if (n * h - 1.0).abs() > 1e-12 || n > 1e6 {
        return Err(Error::Parameter(format!("cusp grid step must be 1/N for an integer N, got {h}")));
    }
    Ok(n as i64)
}

fn inside(n: i64, i: i64, j: i64) -> bool {
    2 * i.abs() <= n && n * j.abs() <= i * i
}

/// Whether the segment between two grid points stays in the cusp.
fn segment_inside(n: i64, a: (i64, i64), b: (i64, i64)) -> bool {
    let (di, dj) = ((b.0 - a.0) as f64, (b.1 - a.1) as f64);
    let nf = n as f64;
    // g(τ) = X(τ)² - s·N·Y(τ) must stay nonnegative for both signs s
    [1.0, -1.0].into_iter().all(|s| {
        let g = |tau: f64| {
            let x = a.0 as f64 + tau * di;
            let y = a.1 as f64 + tau * dj;
            x * x - s * nf * y
        };
        let mut ok = g(0.0) >= 0.0 && g(1.0) >= 0.0;
        if di != 0.0 {
            let tau = (s * nf * dj / (2.0 * di) - a.0 as f64) / di;
            if tau > 0.0 && tau < 1.0 {
                ok &= g(tau) >= 0.0;
            }
        }
        ok
    })
}

/// The whole cusp at pitch `grid_h`.
pub fn build_cusp(grid_h: f64) -> Result<CuspGrid> {
    let n = grid_denominator(grid_h)?;
    build(n, n / 2)
}

/// The part of the cusp with `|x| ≤ half_width`.
pub fn build_cusp_window(grid_h: f64, half_width: f64) -> Result<CuspGrid> {
    let n = grid_denominator(grid_h)?;
    if !(half_width > 0.0) {
        return Err(Error::Parameter(format!("window half-width must be positive, got {half_width}")));
    }
    let cols = ((half_width * n as f64) + 1e-9).floor() as i64;
    build(n, cols.min(n / 2).max(1))
}

/// Refinement ladder at the origin. Level `k` (from 1) has scale `λ = 4·2^k`,
/// pitch `grid_h / 4^k` and window half-width `2/λ`, so `λ·pitch` halves from
/// one level to the next while the window stays a fixed multiple of the ball.
pub fn cusp_refinement(grid_h: f64, levels: u32) -> Result<Vec<(f64, CuspGrid)>> {
    grid_denominator(grid_h)?;
    (1..=levels as i32)
        .map(|k| {
            let lambda = 4.0 * 2f64.powi(k);
            Ok((lambda, build_cusp_window(grid_h / 4f64.powi(k), 2.0 / lambda)?))
        })
        .collect()
}

fn build(n: i64, cols: i64) -> Result<CuspGrid> {
    let mut cells = Vec::new();
    for i in -cols..=cols {
        let rows = i * i / n;
        for j in -rows..=rows {
            debug_assert!(inside(n, i, j));
            cells.push((i, j));
        }
    }
    let index: HashMap<(i64, i64), usize> = cells.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let h = 1.0 / n as f64;
    let adj: Vec<Vec<(usize, f64)>> = cells
        .iter()
        .map(|&(i, j)| {
            let mut out = Vec::with_capacity(8);
            for di in -1..=1 {
                for dj in -1..=1 {
                    if (di, dj) == (0, 0) {
                        continue;
                    }
                    if let Some(&q) = index.get(&(i + di, j + dj)) {
                        if segment_inside(n, (i, j), (i + di, j + dj)) {
                            out.push((q, h));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let ids = cells.iter().map(|&(i, j)| point_id(i, j)).collect();
    let space = from_weighted_graph(ids, vec![h * h; cells.len()], adj, Some(h), Execution::Parallel)?
        .with_coords(cells.iter().map(|&(i, j)| [i as f64 * h, j as f64 * h]).collect());
    Ok(CuspGrid { space, denominator: n, cells, index })
}

/// Index of the grid point nearest to `(x, y)` if it lies in the grid.
pub fn cusp_point(grid: &CuspGrid, x: f64, y: f64) -> Result<usize> {
    let n = grid.denominator as f64;
    let (i, j) = ((x * n).round() as i64, (y * n).round() as i64);
    grid.point(i, j).ok_or_else(|| Error::UnknownPoint(format!("({x}, {y})")))
}

/// Three sources in the column `x = 1/4` and three targets in the column
/// `x = 1/2`, all at intrinsic distance `1/4`: uniform measures with constant
/// cost, so every permutation is an optimal map.
pub fn ac_multiplicity_instance(grid: &CuspGrid) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let n = grid.denominator;
    if n % 4 != 0 {
        return Err(Error::Parameter(format!("grid denominator {n} must be divisible by 4")));
    }
    let column = |i: i64| -> Result<Vec<usize>> {
        (-1..=1).map(|j| grid.point(i, j).ok_or_else(|| Error::UnknownPoint(point_id(i, j)))).collect()
    };
    let (src, dst) = (column(n / 4)?, column(n / 2)?);
    Ok((DiscreteMeasure::uniform_on(&grid.space, &src)?, DiscreteMeasure::uniform_on(&grid.space, &dst)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_and_axis_distance() {
        let g = build_cusp(1.0 / 32.0).unwrap();
        assert!(g.cells.iter().all(|&(i, j)| inside(32, i, j)));
        let (a, b) = (cusp_point(&g, -0.25, 0.0).unwrap(), cusp_point(&g, 0.25, 0.0).unwrap());
        assert_eq!(g.space.dist(a, b), 0.5);
        let (p, q) = (cusp_point(&g, 0.25, 1.0 / 16.0).unwrap(), cusp_point(&g, 0.25, -1.0 / 16.0).unwrap());
        assert!((g.space.dist(p, q) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn intrinsic_dominates_ambient() {
        let g = build_cusp(1.0 / 16.0).unwrap();
        for p in 0..g.space.len() {
            for q in 0..g.space.len() {
                assert!(g.space.dist(p, q) + 1e-12 >= g.ambient_distance(p, q));
            }
        }
    }

    #[test]
    fn segment_test_rejects_leaving_chords() {
        // chord from (-1, 0) to (1, 0) through the pinch is fine, a vertical
        // chord above the boundary is not
        assert!(segment_inside(16, (-1, 0), (1, 0)));
        assert!(!segment_inside(16, (4, 1), (4, 2)));
    }

    #[test]
    fn step_validation() {
        assert!(build_cusp(1.0 / 8.0).is_err());
        assert!(build_cusp(0.03).is_err());
        let w = build_cusp_window(1.0 / 64.0, 0.125).unwrap();
        assert!(w.cells.iter().all(|&(i, _)| i.abs() <= 8));
    }
}
