//! The optimal face of the transportation polytope.
//!
//! With exact optimal potentials `(u, v)`, the optimal face is the set of
//! feasible plans supported on the tight cells `E = {c : d² − u − v = 0}`.
//! Its edges at a vertex `x` are alternating cycles that add mass on cells of
//! `E` and remove it from cells of `supp x`; walking every such cycle as far as
//! feasibility allows and keeping the plans with forest support visits every
//! vertex of the face.

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::space::{DiscreteMeasure, FiniteMetricMeasureSpace};

use super::{solve_w2_with, ExactMode, SolveOptions, TransportPlan};

/// Largest support (on either side) accepted by [`enumerate_optimal_vertices`].
pub const MAX_VERTEX_SUPPORT: usize = 12;

/// Cycle-search steps allowed per visited vertex before flagging truncation.
const CYCLE_BUDGET: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct VertexEnumeration {
    /// Distinct optimal vertices, sorted by their exact couplings.
    pub vertices: Vec<TransportPlan>,
    pub truncated: bool,
}

impl VertexEnumeration {
    /// Exactly one vertex and nothing left unexplored.
    pub fn is_unique(&self) -> bool {
        self.vertices.len() == 1 && !self.truncated
    }
}

/// Uniqueness of the optimal plan, decided without enumerating vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Uniqueness {
    pub plan: TransportPlan,
    /// A different optimal plan, when one exists.
    pub alternative: Option<TransportPlan>,
}

impl Uniqueness {
    pub fn is_unique(&self) -> bool {
        self.alternative.is_none()
    }
}

struct Face {
    m: usize,
    n: usize,
    tight: Vec<bool>,
}

fn optimal_face(
    space: &FiniteMetricMeasureSpace,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
) -> Result<(TransportPlan, Face)> {
    let sol = solve_w2_with(space, mu0, mu1, SolveOptions { exact: ExactMode::Always, max_iterations: None })?;
    let plan = sol.plan;
    let cert = plan.certificate().expect("solver attaches a certificate");
    let (u, v) = (cert.exact_u.as_ref().unwrap(), cert.exact_v.as_ref().unwrap());
    let (m, n) = (plan.rows(), plan.cols());
    let tight = (0..m * n)
        .map(|c| {
            let (i, j) = (c / n, c % n);
            (super::sq_cost_exact(space, plan.sources()[i], plan.targets()[j]) - &u[i] - &v[j]).is_zero()
        })
        .collect();
    Ok((plan, Face { m, n, tight }))
}

fn is_forest(m: usize, n: usize, cells: impl Iterator<Item = usize>) -> bool {
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for c in cells {
        let (a, b) = (find(&mut parent, c / n), find(&mut parent, m + c % n));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Alternating cycles from column `col` back to row `row`: `−` steps leave a
/// column through a support cell, `+` steps leave a row through a tight cell.
/// Calls `visit` with the cells of each cycle (excluding the entering cell), in
/// order `−, +, −, …, −`. Returns false when the step budget ran out.
fn for_each_cycle(
    face: &Face,
    x: &[Rational],
    row: usize,
    col: usize,
    budget: &mut usize,
    visit: &mut dyn FnMut(&[usize]),
) -> bool {
    let (m, n) = (face.m, face.n);
    let mut used_row = vec![false; m];
    let mut used_col = vec![false; n];
    used_row[row] = true;
    used_col[col] = true;
    let mut path = Vec::new();
    fn from_col(
        face: &Face,
        x: &[Rational],
        target_row: usize,
        c: usize,
        used_row: &mut [bool],
        used_col: &mut [bool],
        path: &mut Vec<usize>,
        budget: &mut usize,
        visit: &mut dyn FnMut(&[usize]),
    ) -> bool {
        let n = face.n;
        for r in 0..face.m {
            let cell = r * n + c;
            if !x[cell].is_positive() {
                continue;
            }
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            if r == target_row {
                path.push(cell);
                visit(path);
                path.pop();
                continue;
            }
            if used_row[r] {
                continue;
            }
            used_row[r] = true;
            path.push(cell);
            for c2 in 0..n {
                let cell2 = r * n + c2;
                if used_col[c2] || !face.tight[cell2] {
                    continue;
                }
                used_col[c2] = true;
                path.push(cell2);
                let ok = from_col(face, x, target_row, c2, used_row, used_col, path, budget, visit);
                path.pop();
                used_col[c2] = false;
                if !ok {
                    return false;
                }
            }
            path.pop();
            used_row[r] = false;
        }
        true
    }
    from_col(face, x, row, col, &mut used_row, &mut used_col, &mut path, budget, visit)
}

fn apply_cycle(x: &[Rational], enter: usize, cycle: &[usize]) -> Vec<Rational> {
    let theta = cycle.iter().step_by(2).map(|&c| &x[c]).min().unwrap().clone();
    let mut y = x.to_vec();
    y[enter] += &theta;
    for (k, &c) in cycle.iter().enumerate() {
        if k % 2 == 0 {
            y[c] -= &theta;
        } else {
            y[c] += &theta;
        }
    }
    y
}

fn check_support_sizes(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, limit: usize) -> Result<()> {
    let (a, b) = (mu0.support().len(), mu1.support().len());
    if a > limit || b > limit {
        return Err(Error::SizeLimit(format!("supports of sizes {a} and {b} exceed {limit}")));
    }
    Ok(())
}

/// All vertices of the optimal face, up to `max_vertices`.
pub fn enumerate_optimal_vertices(
    space: &FiniteMetricMeasureSpace,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    max_vertices: usize,
) -> Result<VertexEnumeration> {
    check_support_sizes(mu0, mu1, MAX_VERTEX_SUPPORT)?;
    let (plan, face) = optimal_face(space, mu0, mu1)?;
    let (m, n) = (face.m, face.n);
    let start = plan.exact_or_converted();
    let mut seen: HashSet<Vec<Rational>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let mut truncated = false;
    while let Some(x) = queue.pop_front() {
        if found.len() >= max_vertices {
            truncated = true;
            break;
        }
        found.insert(x.clone());
        let mut budget = CYCLE_BUDGET;
        for enter in 0..m * n {
            if !face.tight[enter] || x[enter].is_positive() {
                continue;
            }
            let mut next = Vec::new();
            let complete = for_each_cycle(&face, &x, enter / n, enter % n, &mut budget, &mut |cycle| {
                let y = apply_cycle(&x, enter, cycle);
                if is_forest(m, n, (0..m * n).filter(|&c| y[c].is_positive())) {
                    next.push(y);
                }
            });
            for y in next {
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
            if !complete {
                truncated = true;
                break;
            }
        }
    }
    if !queue.is_empty() {
        truncated = true;
    }
    let certificate = plan.certificate().cloned();
    let vertices = found
        .into_iter()
        .map(|x| {
            let p = TransportPlan::from_exact(space, plan.sources().to_vec(), plan.targets().to_vec(), x)?;
            Ok(match &certificate {
                Some(c) => p.with_certificate(c.clone()),
                None => p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VertexEnumeration { vertices, truncated })
}

/// Decides whether the optimal plan is unique by searching, for each tight
/// cell outside the optimal support, for an alternating cycle through it.
/// Polynomial in the support sizes, so it applies well beyond the
/// enumeration limit.
pub fn plan_uniqueness(
    space: &FiniteMetricMeasureSpace,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
) -> Result<Uniqueness> {
    let (plan, face) = optimal_face(space, mu0, mu1)?;
    let (m, n) = (face.m, face.n);
    let x = plan.exact_or_converted();
    for enter in 0..m * n {
        if !face.tight[enter] || x[enter].is_positive() {
            continue;
        }
        let (row, col) = (enter / n, enter % n);
        // breadth-first search col → … → row over (− support, + tight) steps
        let mut prev_row: Vec<Option<(usize, usize)>> = vec![None; m];
        let mut prev_col: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen_col = vec![false; n];
        let mut seen_row = vec![false; m];
        seen_col[col] = true;
        let mut queue = VecDeque::from([col]);
        while let Some(c) = queue.pop_front() {
            for r in 0..m {
                let cell = r * n + c;
                if seen_row[r] || !x[cell].is_positive() {
                    continue;
                }
                seen_row[r] = true;
                prev_row[r] = Some((c, cell));
                if r == row {
                    break;
                }
                for c2 in 0..n {
                    let cell2 = r * n + c2;
                    if !seen_col[c2] && face.tight[cell2] {
                        seen_col[c2] = true;
                        prev_col[c2] = Some((r, cell2));
                        queue.push_back(c2);
                    }
                }
            }
            if seen_row[row] {
                break;
            }
        }
        if !seen_row[row] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut r = row;
        loop {
            let (c, cell) = prev_row[r].unwrap();
            cycle.push(cell);
            if c == col {
                break;
            }
            let (r2, cell2) = prev_col[c].unwrap();
            cycle.push(cell2);
            r = r2;
        }
        cycle.reverse();
        let y = apply_cycle(&x, enter, &cycle);
        let mut alt = TransportPlan::from_exact(space, plan.sources().to_vec(), plan.targets().to_vec(), y)?;
        if let Some(c) = plan.certificate() {
            alt = alt.with_certificate(c.clone());
        }
        return Ok(Uniqueness { plan, alternative: Some(alt) });
    }
    Ok(Uniqueness { plan, alternative: None })
}
