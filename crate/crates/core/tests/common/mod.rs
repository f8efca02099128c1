//! Brute-force oracles shared by the integration tests. None of them calls
//! into the solver, vertex search or GH machinery of the library.

#![allow(dead_code)]

use mmsot_core::rational::{self, Rational};
use mmsot_core::{DiscreteMeasure, FiniteMetricMeasureSpace};
use num_traits::{Num, Zero};

/// Basic solution on the cell set `cells` (`m + n - 1` cells), if the cells
/// form a spanning tree of the bipartite row/column graph.
fn basic_solution<T: Num + Clone + PartialOrd>(
    m: usize,
    n: usize,
    cells: &[usize],
    a: &[T],
    b: &[T],
) -> Option<Vec<T>> {
    let mut row_left = a.to_vec();
    let mut col_left = b.to_vec();
    let mut x = vec![T::zero(); m * n];
    let mut open = cells.to_vec();
    let mut row_open = vec![0usize; m];
    let mut col_open = vec![0usize; n];
    for &c in &open {
        row_open[c / n] += 1;
        col_open[c % n] += 1;
    }
    if row_open.contains(&0) || col_open.contains(&0) {
        return None;
    }
    while !open.is_empty() {
        // peel a cell whose row or column has no other open cell
        let k = open.iter().position(|&c| row_open[c / n] == 1 || col_open[c % n] == 1)?;
        let c = open.swap_remove(k);
        let (i, j) = (c / n, c % n);
        let v = if row_open[i] == 1 { row_left[i].clone() } else { col_left[j].clone() };
        row_left[i] = row_left[i].clone() - v.clone();
        col_left[j] = col_left[j].clone() - v.clone();
        row_open[i] -= 1;
        col_open[j] -= 1;
        x[c] = v;
    }
    Some(x)
}

fn combinations(total: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, total: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for c in start..total {
            if total - c < k - cur.len() {
                break;
            }
            cur.push(c);
            rec(c + 1, total, k, cur, f);
            cur.pop();
        }
    }
    rec(0, total, k, &mut Vec::new(), f);
}

/// All vertices of the transportation polytope `{x ≥ 0 : row sums a, column
/// sums b}`, found as basic feasible solutions over every candidate basis.
/// Entries below `-tol` are infeasible; duplicates are removed.
pub fn polytope_vertices<T: Num + Clone + PartialOrd>(a: &[T], b: &[T], tol: &T) -> Vec<Vec<T>> {
    let (m, n) = (a.len(), b.len());
    let mut out: Vec<Vec<T>> = Vec::new();
    let neg = T::zero() - tol.clone();
    combinations(m * n, m + n - 1, &mut |cells| {
        if let Some(x) = basic_solution(m, n, cells, a, b) {
            if x.iter().all(|v| *v >= neg) {
                let close = |p: &Vec<T>| {
                    p.iter().zip(&x).all(|(u, v)| {
                        let d = if u > v { u.clone() - v.clone() } else { v.clone() - u.clone() };
                        d <= *tol
                    })
                };
                if !out.iter().any(close) {
                    out.push(x);
                }
            }
        }
    });
    out
}

pub fn dot<T: Num + Clone>(x: &[T], c: &[T]) -> T {
    x.iter().zip(c).fold(T::zero(), |acc, (u, v)| acc + u.clone() * v.clone())
}

/// Minimum cost over all polytope vertices, in floating point.
pub fn brute_force_min(cost: &[f64], a: &[f64], b: &[f64]) -> f64 {
    polytope_vertices(a, b, &1e-12).iter().map(|x| dot(x, cost)).fold(f64::INFINITY, f64::min)
}

/// Exact optimal vertices and the optimal value.
pub fn brute_force_exact(cost: &[Rational], a: &[Rational], b: &[Rational]) -> (Rational, Vec<Vec<Rational>>) {
    let verts = polytope_vertices(a, b, &Rational::zero());
    let best = verts.iter().map(|x| dot(x, cost)).min().expect("nonempty polytope");
    let optimal = verts.into_iter().filter(|x| dot(x, cost) == best).collect();
    (best, optimal)
}

/// Float cost matrix over the supports of `mu0` and `mu1`.
pub fn cost_matrix(space: &FiniteMetricMeasureSpace, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Vec<f64> {
    let (s, t) = (mu0.support(), mu1.support());
    s.iter().flat_map(|&x| t.iter().map(move |&y| space.dist(x, y).powi(2))).collect()
}

/// Exact cost matrix, converting each distance exactly before squaring.
pub fn exact_cost_matrix(space: &FiniteMetricMeasureSpace, sources: &[usize], targets: &[usize]) -> Vec<Rational> {
    sources
        .iter()
        .flat_map(|&x| {
            targets.iter().map(move |&y| {
                let d = rational::from_f64(space.dist(x, y));
                &d * &d
            })
        })
        .collect()
}

pub fn support_weights(mu: &DiscreteMeasure) -> Vec<f64> {
    mu.support().iter().map(|&p| mu.weight(p)).collect()
}

pub fn support_exact(mu: &DiscreteMeasure) -> Vec<Rational> {
    let e = mu.exact_or_converted();
    mu.support().iter().map(|&p| e[p].clone()).collect()
}

/// Half the least distortion over every correspondence, by enumerating all
/// relations. Practical only for spaces of at most 3 or 4 points.
pub fn brute_force_gh(dx: &[Vec<f64>], dy: &[Vec<f64>]) -> f64 {
    let (m, n) = (dx.len(), dy.len());
    let k = m * n;
    assert!(k <= 16, "relation enumeration is exponential");
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << k) {
        let pairs: Vec<(usize, usize)> = (0..k).filter(|c| mask >> c & 1 == 1).map(|c| (c / n, c % n)).collect();
        let covers_x = (0..m).all(|i| pairs.iter().any(|p| p.0 == i));
        let covers_y = (0..n).all(|j| pairs.iter().any(|p| p.1 == j));
        if !covers_x || !covers_y {
            continue;
        }
        let mut dis: f64 = 0.0;
        for &(a, b) in &pairs {
            for &(c, d) in &pairs {
                dis = dis.max((dx[a][c] - dy[b][d]).abs());
            }
        }
        best = best.min(dis);
    }
    best / 2.0
}

/// All-pairs shortest paths by Floyd–Warshall over the space's one-step
/// neighbours, with edge lengths read from the metric.
pub fn floyd_warshall(space: &FiniteMetricMeasureSpace) -> Vec<Vec<f64>> {
    let n = space.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for p in 0..n {
        d[p][p] = 0.0;
        for &q in space.neighbors(p) {
            d[p][q] = d[p][q].min(space.dist(p, q));
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}
