//! Splitting a non-deterministic plan into two sub-plans with a common first
//! marginal and mutually singular second marginals.
//!
//! With `σ¹ = σ|_{X×B}` and `σ² = σ|_{X×(X∖B)}`, each source row of `σᵏ` is
//! rescaled by `min(ρ¹, ρ²)/ρᵏ`, where `ρᵏ` is the row-marginal density of
//! `σᵏ` against the reference weights. The reference weights cancel in the
//! ratio, so only row masses are needed.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{mutually_singular, DiscreteMeasure, FiniteMetricMeasureSpace};

use super::{solve_w2, TransportPlan, TOL_CERTIFICATE};

/// The open ball `{y : d(center, y) < radius}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, space: &FiniteMetricMeasureSpace, y: usize) -> bool {
        space.dist(self.center, y) < self.radius
    }
}

/// The verified postconditions of a split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitReport {
    /// Largest gap between the two first marginals.
    pub first_marginal_gap: f64,
    pub second_marginals_singular: bool,
    pub dominated: bool,
    /// Normalized part cost minus the optimal cost for its marginals.
    pub first_optimality_gap: f64,
    pub second_optimality_gap: f64,
}

impl SplitReport {
    pub fn all_hold(&self) -> bool {
        self.first_marginal_gap <= 1e-12
            && self.second_marginals_singular
            && self.dominated
            && self.first_optimality_gap.abs() <= TOL_CERTIFICATE
            && self.second_optimality_gap.abs() <= TOL_CERTIFICATE
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitPlan {
    /// Reweighted restriction to targets inside the ball.
    pub inside: TransportPlan,
    /// Reweighted restriction to targets outside the ball.
    pub outside: TransportPlan,
    pub report: SplitReport,
}

/// Splits `plan` along `ball` and verifies the postconditions.
pub fn split_plan(space: &FiniteMetricMeasureSpace, plan: &TransportPlan, ball: Ball) -> Result<SplitPlan> {
    space.check_index(ball.center)?;
    let (m, n) = (plan.rows(), plan.cols());
    let x = plan.exact_or_converted();
    let inside: Vec<bool> = plan.targets().iter().map(|&y| ball.contains(space, y)).collect();
    let mut first = vec![Rational::zero(); m * n];
    let mut second = vec![Rational::zero(); m * n];
    let mut splitting = false;
    for i in 0..m {
        let row = &x[i * n..(i + 1) * n];
        let a1 = rational::sum(row.iter().zip(&inside).filter(|(_, &b)| b).map(|(v, _)| v));
        let a2 = rational::sum(row.iter().zip(&inside).filter(|(_, &b)| !b).map(|(v, _)| v));
        if !a1.is_positive() || !a2.is_positive() {
            continue;
        }
        splitting = true;
        let low = if a1 < a2 { a1.clone() } else { a2.clone() };
        for j in 0..n {
            let c = i * n + j;
            if inside[j] {
                first[c] = &x[c] * &low / &a1;
            } else {
                second[c] = &x[c] * &low / &a2;
            }
        }
    }
    if !splitting {
        return Err(Error::AlreadyMapLike);
    }
    let exact = plan.is_exact();
    let inside_plan = TransportPlan::from_exact(space, plan.sources().to_vec(), plan.targets().to_vec(), first)?;
    let outside_plan = TransportPlan::from_exact(space, plan.sources().to_vec(), plan.targets().to_vec(), second)?;
    let report = verify(space, plan, &inside_plan, &outside_plan, exact)?;
    Ok(SplitPlan { inside: inside_plan, outside: outside_plan, report })
}

fn verify(
    space: &FiniteMetricMeasureSpace,
    plan: &TransportPlan,
    p1: &TransportPlan,
    p2: &TransportPlan,
    exact: bool,
) -> Result<SplitReport> {
    let (a1, b1) = p1.marginals(space)?;
    let (a2, b2) = p2.marginals(space)?;
    let first_marginal_gap = a1
        .exact()
        .unwrap()
        .iter()
        .zip(a2.exact().unwrap())
        .map(|(p, q)| rational::to_f64(&(p - q).abs()))
        .fold(0.0, f64::max);
    let base = plan.exact_or_converted();
    let dominated = p1
        .exact_coupling()
        .unwrap()
        .iter()
        .zip(p2.exact_coupling().unwrap())
        .zip(&base)
        .all(|((s1, s2), s)| s1 <= s && s2 <= s);
    Ok(SplitReport {
        first_marginal_gap,
        second_marginals_singular: mutually_singular(&b1, &b2),
        dominated,
        first_optimality_gap: optimality_gap(space, p1, &a1, &b1, exact)?,
        second_optimality_gap: optimality_gap(space, p2, &a2, &b2, exact)?,
    })
}

/// Cost of the normalized part minus the optimum for its normalized marginals.
fn optimality_gap(
    space: &FiniteMetricMeasureSpace,
    part: &TransportPlan,
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    exact: bool,
) -> Result<f64> {
    let total = rational::sum(part.exact_coupling().unwrap());
    let scale = |mu: &DiscreteMeasure| {
        DiscreteMeasure::from_exact(space, mu.exact().unwrap().iter().map(|w| w / &total).collect())
    };
    let (na, nb) = (scale(a)?, scale(b)?);
    let sol = solve_w2(space, &na, &nb)?;
    let part_cost = part.exact_cost().unwrap() / &total;
    let gap = match (exact, sol.w2_squared_exact()) {
        (true, Some(opt)) => rational::to_f64(&(part_cost - opt)),
        _ => rational::to_f64(&part_cost) - sol.w2_squared(),
    };
    Ok(gap)
}
