//! Transportation simplex on the complete bipartite support, generic over the
//! scalar field so the same pivoting runs in `f64` and in exact rationals.
//!
//! Bases are spanning trees on the `m + n` row/column nodes. Entering and
//! leaving variables follow Bland's rule (smallest cell index), which makes
//! the exact variant terminate on degenerate problems.

use std::collections::VecDeque;
use std::fmt::Debug;

use num_traits::{Num, Signed};

use crate::rational::Rational;

pub(crate) trait Scalar: Clone + Debug + PartialOrd + Num + Signed {
    /// Reduced costs below `-tolerance(scale)` are improving.
    fn tolerance(scale: &Self) -> Self;
}

impl Scalar for f64 {
    fn tolerance(scale: &Self) -> Self {
        1e-12 * (1.0 + scale.abs())
    }
}

impl Scalar for Rational {
    fn tolerance(_: &Self) -> Self {
        num_traits::Zero::zero()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Problem<T> {
    pub m: usize,
    pub n: usize,
    /// Row-major `m × n`.
    pub cost: Vec<T>,
    pub supply: Vec<T>,
    pub demand: Vec<T>,
}

#[derive(Clone, Debug)]
pub(crate) struct Solution<T> {
    pub x: Vec<T>,
    pub basis: Vec<usize>,
    pub u: Vec<T>,
    pub v: Vec<T>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub iterations: usize,
}

impl<T: Scalar> Solution<T> {
    #[cfg(test)]
    pub fn cost(&self, p: &Problem<T>) -> T {
        self.x.iter().zip(&p.cost).fold(T::zero(), |acc, (x, c)| acc + x.clone() * c.clone())
    }

    /// Reduced cost `c - u - v` of every cell.
    pub fn reduced_costs(&self, p: &Problem<T>) -> Vec<T> {
        (0..p.m * p.n)
            .map(|c| {
                let (i, j) = (c / p.n, c % p.n);
                p.cost[c].clone() - self.u[i].clone() - self.v[j].clone()
            })
            .collect()
    }
}

impl<T: Scalar> Problem<T> {
    fn scale(&self) -> T {
        self.cost.iter().fold(T::zero(), |acc, c| if c.abs() > acc { c.abs() } else { acc })
    }

    /// North-west corner rule: `m + n - 1` basic cells forming a spanning tree.
    fn northwest(&self) -> (Vec<T>, Vec<usize>) {
        let (m, n) = (self.m, self.n);
        let mut x = vec![T::zero(); m * n];
        let mut basis = Vec::with_capacity(m + n - 1);
        let mut a = self.supply.clone();
        let mut b = self.demand.clone();
        let (mut i, mut j) = (0, 0);
        loop {
            let q = if a[i] < b[j] { a[i].clone() } else { b[j].clone() };
            x[i * n + j] = q.clone();
            basis.push(i * n + j);
            a[i] = a[i].clone() - q.clone();
            b[j] = b[j].clone() - q;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && a[i] <= b[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        (x, basis)
    }

    /// Basic-variable values for a spanning-tree basis, by leaf peeling.
    fn tree_values(&self, basis: &[usize]) -> Option<Vec<T>> {
        let (m, n) = (self.m, self.n);
        if basis.len() != m + n - 1 {
            return None;
        }
        let mut residual: Vec<T> = self.supply.iter().chain(&self.demand).cloned().collect();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); m + n];
        for &c in basis {
            incident[c / n].push(c);
            incident[m + c % n].push(c);
        }
        let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
        let mut used = vec![false; m * n];
        let mut x = vec![T::zero(); m * n];
        let mut queue: VecDeque<usize> = (0..m + n).filter(|&v| degree[v] == 1).collect();
        let mut assigned = 0;
        while let Some(node) = queue.pop_front() {
            if degree[node] != 1 {
                continue;
            }
            let Some(&cell) = incident[node].iter().find(|&&c| !used[c]) else { continue };
            used[cell] = true;
            assigned += 1;
            let (i, j) = (cell / n, cell % n);
            let other = if node < m { m + j } else { i };
            let val = residual[node].clone();
            x[cell] = val.clone();
            residual[node] = T::zero();
            residual[other] = residual[other].clone() - val;
            degree[node] -= 1;
            degree[other] -= 1;
            if degree[other] == 1 {
                queue.push_back(other);
            }
        }
        (assigned == basis.len()).then_some(x)
    }

    fn potentials(&self, basis: &[usize]) -> (Vec<T>, Vec<T>) {
        let (m, n) = (self.m, self.n);
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); m + n];
        for &c in basis {
            incident[c / n].push(c);
            incident[m + c % n].push(c);
        }
        let mut val: Vec<Option<T>> = vec![None; m + n];
        val[0] = Some(T::zero());
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            let here = val[node].clone().unwrap();
            for &c in &incident[node] {
                let (i, j) = (c / n, c % n);
                let other = if node < m { m + j } else { i };
                if val[other].is_none() {
                    val[other] = Some(self.cost[c].clone() - here.clone());
                    queue.push_back(other);
                }
            }
        }
        let val: Vec<T> = val.into_iter().map(|v| v.unwrap_or_else(T::zero)).collect();
        (val[..m].to_vec(), val[m..].to_vec())
    }

    /// Cells on the tree path from row `i` to column `j`, starting at row `i`.
    fn tree_path(&self, basis: &[usize], i: usize, j: usize) -> Vec<usize> {
        let (m, n) = (self.m, self.n);
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); m + n];
        for &c in basis {
            incident[c / n].push(c);
            incident[m + c % n].push(c);
        }
        let mut parent: Vec<Option<usize>> = vec![None; m + n];
        let mut seen = vec![false; m + n];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        let goal = m + j;
        while let Some(node) = queue.pop_front() {
            if node == goal {
                break;
            }
            for &c in &incident[node] {
                let other = if node < m { m + c % n } else { c / n };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = Some(c);
                    queue.push_back(other);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = goal;
        while node != i {
            let c = parent[node].expect("basis is a spanning tree");
            path.push(c);
            node = if node < m { m + c % n } else { c / n };
        }
        path.reverse();
        path
    }

    /// Runs the simplex from `warm` (if it is a feasible basis) or from the
    /// north-west corner. Returns `None` when the iteration cap is hit.
    pub fn solve(&self, warm: Option<&[usize]>, max_iterations: usize) -> Option<Solution<T>> {
        let n = self.n;
        let tol = T::tolerance(&self.scale());
        let neg_tol = T::zero() - tol.clone();
        let (mut x, mut basis) = match warm.and_then(|b| {
            let vals = self.tree_values(b)?;
            vals.iter().all(|v| *v >= neg_tol).then(|| (vals, b.to_vec()))
        }) {
            Some((vals, b)) => (vals.into_iter().map(|v| if v < T::zero() { T::zero() } else { v }).collect(), b),
            None => self.northwest(),
        };
        let mut in_basis = vec![false; self.m * n];
        for &c in &basis {
            in_basis[c] = true;
        }
        let mut iterations = 0;
        loop {
            let (u, v) = self.potentials(&basis);
            let entering = (0..self.m * n)
                .find(|&c| !in_basis[c] && self.cost[c].clone() - u[c / n].clone() - v[c % n].clone() < neg_tol);
            let Some(enter) = entering else {
                return Some(Solution { x, basis, u, v, iterations });
            };
            if iterations >= max_iterations {
                return None;
            }
            iterations += 1;
            let path = self.tree_path(&basis, enter / n, enter % n);
            // odd positions (0-based even) lose mass
            let minus: Vec<usize> = path.iter().step_by(2).copied().collect();
            let plus: Vec<usize> = path.iter().skip(1).step_by(2).copied().collect();
            let theta = minus
                .iter()
                .map(|&c| x[c].clone())
                .fold(None, |acc: Option<T>, v| match acc {
                    Some(a) if a <= v => Some(a),
                    _ => Some(v),
                })
                .expect("cycle has a decreasing cell");
            let leave = *minus.iter().filter(|&&c| x[c] <= theta).min().unwrap();
            for &c in &minus {
                x[c] = x[c].clone() - theta.clone();
            }
            for &c in &plus {
                x[c] = x[c].clone() + theta.clone();
            }
            x[enter] = theta;
            x[leave] = T::zero();
            in_basis[leave] = false;
            in_basis[enter] = true;
            let pos = basis.iter().position(|&c| c == leave).unwrap();
            basis[pos] = enter;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{from_int, ratio};

    #[test]
    fn two_by_two_monotone() {
        // line: sources {0,1}, targets {2,3}
        let p = Problem { m: 2, n: 2, cost: vec![4.0, 9.0, 1.0, 4.0], supply: vec![0.5, 0.5], demand: vec![0.5, 0.5] };
        let s = p.solve(None, 1000).unwrap();
        assert_eq!(s.cost(&p), 4.0);
        assert_eq!(s.x, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn exact_degenerate_ties() {
        let c = [ratio(25, 16), ratio(9, 4), ratio(49, 16)];
        let p = Problem {
            m: 3,
            n: 2,
            cost: vec![c[0].clone(), c[0].clone(), c[1].clone(), c[1].clone(), c[2].clone(), c[2].clone()],
            supply: vec![ratio(1, 3); 3],
            demand: vec![ratio(1, 2); 2],
        };
        let s = p.solve(None, 1000).unwrap();
        assert_eq!(s.cost(&p), ratio(55, 24));
        let sum: Rational = s.x.iter().cloned().fold(from_int(0), |a, b| a + b);
        assert_eq!(sum, from_int(1));
    }

    #[test]
    fn warm_start_reused_when_feasible() {
        let p = Problem { m: 2, n: 2, cost: vec![4.0, 9.0, 1.0, 4.0], supply: vec![0.5, 0.5], demand: vec![0.5, 0.5] };
        let s = p.solve(Some(&[0, 3, 1]), 1000).unwrap();
        assert_eq!(s.iterations, 0);
        assert_eq!(s.x, vec![0.5, 0.0, 0.0, 0.5]);
    }
}
