//! c-cyclical monotonicity of a finite set of pairs under `c = d²`.
//!
//! Permuting destinations along a cycle `a₁ → a₂ → … → a₁` changes the cost by
//! `Σ w(aᵢ, aᵢ₊₁)` with `w(a, b) = d²(x_a, y_b) − d²(x_a, y_a)`, so a set is
//! monotone up to cycle length `L` iff this weighted digraph has no negative
//! cycle of length at most `L`. The search is a walk-length dynamic program.

use crate::space::FiniteMetricMeasureSpace;

use super::sq_cost;

/// Minimal strict decrease for a reported violation.
pub const TOL_VIOLATION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Monotone,
    Violated,
}

/// Pairs `(x_i, y_i)` and a cyclic permutation `τ` that lowers the cost.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleWitness {
    pub pairs: Vec<(usize, usize)>,
    /// `permutation[i]` is the index of the pair whose target `x_i` receives.
    pub permutation: Vec<usize>,
    pub original_cost: f64,
    pub permuted_cost: f64,
}

impl CycleWitness {
    pub fn decrease(&self) -> f64 {
        self.original_cost - self.permuted_cost
    }

    /// Re-evaluates both sums from the metric and checks the strict decrease.
    pub fn verify(&self, space: &FiniteMetricMeasureSpace) -> bool {
        let orig: f64 = self.pairs.iter().map(|&(x, y)| sq_cost(space, x, y)).sum();
        let perm: f64 = self
            .pairs
            .iter()
            .enumerate()
            .map(|(i, &(x, _))| sq_cost(space, x, self.pairs[self.permutation[i]].1))
            .sum();
        orig > perm + TOL_VIOLATION
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityCertificate {
    pub verdict: Verdict,
    pub witness: Option<CycleWitness>,
    pub max_cycle: usize,
}

impl MonotonicityCertificate {
    pub fn is_monotone(&self) -> bool {
        self.verdict == Verdict::Monotone
    }
}

/// `min(5, |pairs|)`, at least 2.
pub fn default_max_cycle(pairs: usize) -> usize {
    pairs.clamp(2, 5)
}

/// Checks every permutation cycle of length at most `max_cycle`.
pub fn check_c_monotone(
    space: &FiniteMetricMeasureSpace,
    support_pairs: &[(usize, usize)],
    max_cycle: usize,
) -> MonotonicityCertificate {
    let max_cycle = max_cycle.max(2);
    let k = support_pairs.len();
    let monotone = MonotonicityCertificate { verdict: Verdict::Monotone, witness: None, max_cycle };
    if k < 2 {
        return monotone;
    }
    let own: Vec<f64> = support_pairs.iter().map(|&(x, y)| sq_cost(space, x, y)).collect();
    let w: Vec<f64> = (0..k * k)
        .map(|c| {
            let (a, b) = (c / k, c % k);
            sq_cost(space, support_pairs[a].0, support_pairs[b].1) - own[a]
        })
        .collect();
    let len = max_cycle.min(k);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for start in 0..k {
        // dist[l][v]: lightest walk start → v with l steps; parent for reconstruction
        let mut dist = vec![vec![f64::INFINITY; k]; len + 1];
        let mut parent = vec![vec![usize::MAX; k]; len + 1];
        dist[0][start] = 0.0;
        for l in 1..=len {
            for u in 0..k {
                let du = dist[l - 1][u];
                if !du.is_finite() {
                    continue;
                }
                for v in 0..k {
                    if u == v {
                        continue;
                    }
                    let cand = du + w[u * k + v];
                    if cand < dist[l][v] {
                        dist[l][v] = cand;
                        parent[l][v] = u;
                    }
                }
            }
            if dist[l][start] < -TOL_VIOLATION {
                let mut walk = vec![start];
                let mut v = start;
                for step in (1..=l).rev() {
                    v = parent[step][v];
                    walk.push(v);
                }
                walk.reverse();
                if let Some(cycle) = most_negative_simple_cycle(&walk, &w, k) {
                    if best.as_ref().is_none_or(|(weight, _)| cycle.0 < *weight) {
                        best = Some(cycle);
                    }
                }
            }
        }
    }
    match best {
        Some((weight, cycle)) if weight < -TOL_VIOLATION => {
            let pairs: Vec<(usize, usize)> = cycle.iter().map(|&a| support_pairs[a]).collect();
            let m = pairs.len();
            let permutation: Vec<usize> = (0..m).map(|i| (i + 1) % m).collect();
            let original_cost: f64 = cycle.iter().map(|&a| own[a]).sum();
            let permuted_cost: f64 = (0..m).map(|i| sq_cost(space, pairs[i].0, pairs[permutation[i]].1)).sum();
            MonotonicityCertificate {
                verdict: Verdict::Violated,
                witness: Some(CycleWitness { pairs, permutation, original_cost, permuted_cost }),
                max_cycle,
            }
        }
        _ => monotone,
    }
}

/// Splits a closed walk into simple cycles and returns the lightest one.
fn most_negative_simple_cycle(walk: &[usize], w: &[f64], k: usize) -> Option<(f64, Vec<usize>)> {
    let mut stack: Vec<usize> = Vec::new();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for &v in walk {
        if let Some(pos) = stack.iter().position(|&u| u == v) {
            let cycle: Vec<usize> = stack[pos..].to_vec();
            stack.truncate(pos);
            if cycle.len() >= 2 {
                let weight: f64 = (0..cycle.len()).map(|i| w[cycle[i] * k + cycle[(i + 1) % cycle.len()]]).sum();
                if best.as_ref().is_none_or(|(b, _)| weight < *b) {
                    best = Some((weight, cycle));
                }
            }
        }
        stack.push(v);
    }
    best
}
