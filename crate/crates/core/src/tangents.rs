//! Blow-ups `(X, λd, x)`, Gromov–Hausdorff distortion of correspondences, and
//! the defect of a rescaled ball from a line segment.
//!
//! The interval defect only considers signed radial coordinates
//! `p ↦ ±λ d(x, p)`, with one sign per branch (connected component of the
//! ball minus the basepoint). Within a branch the distortion does not depend
//! on the signs, so the search runs over branch sign vectors only.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::space::{FiniteMetricMeasureSpace, TOL_METRIC};

/// A defect at or below this value counts toward a line tangent.
pub const THETA_LINE: f64 = 0.05;
/// A defect at or above this value at every scale is an obstruction.
pub const THETA_OBSTRUCT: f64 = 0.1;
/// Exhaustive sign search up to this many branches.
pub const MAX_EXACT_BRANCHES: usize = 12;
/// Size limit of the exact GH search.
pub const MAX_GH_POINTS: usize = 7;

/// The closed ball `B(x, R/λ)` with metric `λd`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointedRescaledSpace {
    /// Indices into the base space, ascending.
    pub points: Vec<usize>,
    /// Position of the basepoint within `points`.
    pub basepoint: usize,
    pub scale: f64,
    pub radius: f64,
    /// Rescaled distances among `points`.
    pub dist: Vec<Vec<f64>>,
    /// Local neighbour lists inherited from the base space.
    pub neighbors: Vec<Vec<usize>>,
    /// The ball contains only the basepoint although the space has more points.
    pub degenerate: bool,
}

impl PointedRescaledSpace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// A pointed space given directly by a distance matrix and adjacency.
    pub fn from_parts(dist: Vec<Vec<f64>>, neighbors: Vec<Vec<usize>>, basepoint: usize, radius: f64) -> Result<Self> {
        let n = dist.len();
        if basepoint >= n || neighbors.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::Structure("pointed space parts have inconsistent sizes".into()));
        }
        Ok(PointedRescaledSpace {
            points: (0..n).collect(),
            basepoint,
            scale: 1.0,
            radius,
            dist,
            neighbors,
            degenerate: false,
        })
    }

    /// Rescaled distances from the basepoint.
    pub fn radial(&self) -> Vec<f64> {
        self.dist[self.basepoint].clone()
    }
}

/// Points within original distance `R/λ` of `x`, with distances scaled by `λ`.
pub fn rescale_ball(
    space: &FiniteMetricMeasureSpace,
    x: usize,
    lambda: f64,
    radius: f64,
) -> Result<PointedRescaledSpace> {
    space.check_index(x)?;
    if !(lambda > 0.0) || !(radius > 0.0) {
        return Err(Error::Parameter(format!("need λ > 0 and R > 0, got λ = {lambda}, R = {radius}")));
    }
    let reach = radius / lambda;
    let points: Vec<usize> =
        (0..space.len()).filter(|&p| space.dist(x, p) <= reach * (1.0 + 1e-12) + TOL_METRIC * reach).collect();
    let basepoint = points.binary_search(&x).expect("basepoint lies in its own ball");
    let mut local = vec![usize::MAX; space.len()];
    for (k, &p) in points.iter().enumerate() {
        local[p] = k;
    }
    let dist = points.iter().map(|&a| points.iter().map(|&b| lambda * space.dist(a, b)).collect()).collect();
    let neighbors = points
        .iter()
        .map(|&p| space.neighbors(p).iter().filter(|&&q| local[q] != usize::MAX).map(|&q| local[q]).collect())
        .collect();
    let degenerate = points.len() == 1 && space.len() > 1;
    Ok(PointedRescaledSpace { points, basepoint, scale: lambda, radius, dist, neighbors, degenerate })
}

/// A relation between two finite spaces, surjective onto both.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
    pub distortion: f64,
}

impl Correspondence {
    pub fn new(dx: &[Vec<f64>], dy: &[Vec<f64>], mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        pairs.dedup();
        let covers_x = (0..dx.len()).all(|a| pairs.iter().any(|&(p, _)| p == a));
        let covers_y = (0..dy.len()).all(|b| pairs.iter().any(|&(_, q)| q == b));
        if !covers_x || !covers_y {
            return Err(Error::Structure("relation is not surjective onto both spaces".into()));
        }
        let distortion = distortion(dx, dy, &pairs);
        Ok(Correspondence { pairs, distortion })
    }
}

fn distortion(dx: &[Vec<f64>], dy: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    let mut worst: f64 = 0.0;
    for &(a, b) in pairs {
        for &(c, d) in pairs {
            worst = worst.max((dx[a][c] - dy[b][d]).abs());
        }
    }
    worst
}

/// Exact GH distance, `½ min distortion`, with an optimal correspondence.
pub fn gh_distance_exact(
    x: &FiniteMetricMeasureSpace,
    y: &FiniteMetricMeasureSpace,
    max_points: usize,
) -> Result<(f64, Correspondence)> {
    gh_distance_matrices(&x.dense_rows(), &y.dense_rows(), max_points)
}

/// [`gh_distance_exact`] on bare distance matrices.
pub fn gh_distance_matrices(dx: &[Vec<f64>], dy: &[Vec<f64>], max_points: usize) -> Result<(f64, Correspondence)> {
    let limit = max_points.min(MAX_GH_POINTS);
    if dx.len() > limit || dy.len() > limit {
        return Err(Error::SizeLimit(format!(
            "exact GH search handles at most {limit} points per space (got {} and {}); use interval_defect \
             or a heuristic defect for larger spaces",
            dx.len(),
            dy.len()
        )));
    }
    if dx.is_empty() || dy.is_empty() {
        return Err(Error::Structure("GH distance needs nonempty spaces".into()));
    }
    let mut candidates: Vec<f64> = vec![0.0];
    for a in 0..dx.len() {
        for c in 0..dx.len() {
            for b in 0..dy.len() {
                for d in 0..dy.len() {
                    candidates.push((dx[a][c] - dy[b][d]).abs());
                }
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // the largest candidate is always feasible (the full relation)
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut best = feasible(dx, dy, candidates[hi]).expect("full relation is feasible");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match feasible(dx, dy, candidates[mid]) {
            Some(pairs) => {
                best = pairs;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    let corr = Correspondence::new(dx, dy, best)?;
    // the candidate value, not the witness's recomputed distortion, keeps the result symmetric in (X, Y)
    Ok((candidates[lo] / 2.0, corr))
}

/// A correspondence of distortion at most `delta`, if one exists: a map
/// `f: X → Y` first, then a preimage for every point of `Y` it misses.
fn feasible(dx: &[Vec<f64>], dy: &[Vec<f64>], delta: f64) -> Option<Vec<(usize, usize)>> {
    let tol = delta + 1e-12;
    let ok =
        |pairs: &[(usize, usize)], a: usize, b: usize| pairs.iter().all(|&(c, d)| (dx[a][c] - dy[b][d]).abs() <= tol);
    fn cover(
        dx: &[Vec<f64>],
        dy: &[Vec<f64>],
        pairs: &mut Vec<(usize, usize)>,
        ok: &dyn Fn(&[(usize, usize)], usize, usize) -> bool,
    ) -> bool {
        let Some(b) = (0..dy.len()).find(|&b| !pairs.iter().any(|&(_, q)| q == b)) else { return true };
        for a in 0..dx.len() {
            if ok(pairs, a, b) {
                pairs.push((a, b));
                if cover(dx, dy, pairs, ok) {
                    return true;
                }
                pairs.pop();
            }
        }
        false
    }
    fn assign(
        dx: &[Vec<f64>],
        dy: &[Vec<f64>],
        a: usize,
        pairs: &mut Vec<(usize, usize)>,
        ok: &dyn Fn(&[(usize, usize)], usize, usize) -> bool,
    ) -> bool {
        if a == dx.len() {
            return cover(dx, dy, pairs, ok);
        }
        for b in 0..dy.len() {
            if ok(pairs, a, b) {
                pairs.push((a, b));
                if assign(dx, dy, a + 1, pairs, ok) {
                    return true;
                }
                pairs.pop();
            }
        }
        false
    }
    let mut pairs = Vec::new();
    assign(dx, dy, 0, &mut pairs, &ok).then_some(pairs)
}

/// Result of the line-segment defect search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalDefect {
    pub epsilon: f64,
    pub distortion: f64,
    pub density_gap: f64,
    /// Sign per branch in the best assignment.
    pub signs: Vec<i8>,
    /// Branch index of every ball point (the basepoint has none).
    pub branch_of: Vec<Option<usize>>,
    pub exhaustive: bool,
}

impl IntervalDefect {
    pub fn branches(&self) -> usize {
        self.signs.len()
    }
}

fn branch_labels(pointed: &PointedRescaledSpace) -> (Vec<Option<usize>>, usize) {
    let n = pointed.len();
    let mut label = vec![None; n];
    let mut count = 0;
    for s in 0..n {
        if s == pointed.basepoint || label[s].is_some() {
            continue;
        }
        label[s] = Some(count);
        let mut stack = vec![s];
        while let Some(p) = stack.pop() {
            for &q in &pointed.neighbors[p] {
                if q != pointed.basepoint && label[q].is_none() {
                    label[q] = Some(count);
                    stack.push(q);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Largest distance from a point of `[-r, r]` to the sorted image.
fn density_gap(sorted: &[f64], r: f64) -> f64 {
    let mut gap = (sorted[0] + r).max(r - sorted[sorted.len() - 1]);
    for w in sorted.windows(2) {
        gap = gap.max((w[1] - w[0]) / 2.0);
    }
    gap.max(0.0)
}

/// Smallest `ε` for which some branch-signed radial coordinate is a
/// `(1, ε)`-quasi-isometry from the pointed ball onto `[-r, r]`.
pub fn interval_defect(pointed: &PointedRescaledSpace, r: f64) -> Result<IntervalDefect> {
    if pointed.degenerate {
        return Err(Error::DegenerateBall);
    }
    let n = pointed.len();
    let radial = pointed.radial();
    let (branch_of, count) = branch_labels(pointed);
    if count == 0 {
        return Ok(IntervalDefect {
            epsilon: r,
            distortion: 0.0,
            density_gap: r,
            signs: Vec::new(),
            branch_of,
            exhaustive: true,
        });
    }
    let mut intra: f64 = 0.0;
    let mut same = vec![0.0f64; count * count];
    let mut opp = vec![0.0f64; count * count];
    for p in 0..n {
        let Some(bp) = branch_of[p] else { continue };
        for q in p + 1..n {
            let Some(bq) = branch_of[q] else { continue };
            let d = pointed.dist[p][q];
            let s = (d - (radial[p] - radial[q]).abs()).abs();
            if bp == bq {
                intra = intra.max(s);
            } else {
                let o = (d - radial[p] - radial[q]).abs();
                let (a, b) = (bp.min(bq), bp.max(bq));
                same[a * count + b] = same[a * count + b].max(s);
                opp[a * count + b] = opp[a * count + b].max(o);
            }
        }
    }
    let mut per_branch: Vec<Vec<f64>> = vec![Vec::new(); count];
    for p in 0..n {
        if let Some(b) = branch_of[p] {
            per_branch[b].push(radial[p]);
        }
    }
    let evaluate = |signs: &[i8]| -> (f64, f64) {
        let mut dist = intra;
        for a in 0..count {
            for b in a + 1..count {
                let v = if signs[a] == signs[b] { same[a * count + b] } else { opp[a * count + b] };
                dist = dist.max(v);
            }
        }
        let mut image: Vec<f64> = vec![0.0];
        for (b, rs) in per_branch.iter().enumerate() {
            image.extend(rs.iter().map(|&v| f64::from(signs[b]) * v));
        }
        image.sort_by(f64::total_cmp);
        (dist, density_gap(&image, r))
    };
    let score = |signs: &[i8]| {
        let (d, g) = evaluate(signs);
        d.max(g)
    };
    let exhaustive = count <= MAX_EXACT_BRANCHES;
    let best_signs: Vec<i8> = if exhaustive {
        // the first branch is fixed to + (global flip is an isometry of the model)
        (0..1u32 << (count - 1))
            .map(|mask| (0..count).map(|b| if b > 0 && mask >> (b - 1) & 1 == 1 { -1 } else { 1 }).collect::<Vec<i8>>())
            .min_by(|a, b| score(a).total_cmp(&score(b)))
            .unwrap()
    } else {
        let mut signs = vec![1i8; count];
        let mut current = score(&signs);
        loop {
            let mut improved = false;
            for b in 1..count {
                signs[b] = -signs[b];
                let s = score(&signs);
                if s < current {
                    current = s;
                    improved = true;
                } else {
                    signs[b] = -signs[b];
                }
            }
            if !improved {
                break;
            }
        }
        signs
    };
    let (distortion, gap) = evaluate(&best_signs);
    Ok(IntervalDefect {
        epsilon: distortion.max(gap),
        distortion,
        density_gap: gap,
        signs: best_signs,
        branch_of,
        exhaustive,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TangentVerdict {
    #[serde(rename = "line-tangent-consistent")]
    LineTangentConsistent,
    #[serde(rename = "obstructed")]
    Obstructed,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl fmt::Display for TangentVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TangentVerdict::LineTangentConsistent => "line-tangent-consistent",
            TangentVerdict::Obstructed => "obstructed",
            TangentVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectPoint {
    pub lambda: f64,
    pub epsilon_hat: f64,
    pub branches: usize,
    /// Ball contained only the basepoint; `epsilon_hat` is then `R`.
    pub degenerate: bool,
    /// Rescaled grid spacing small enough to resolve `θ_line`.
    pub resolvable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectCurve {
    pub radius: f64,
    pub points: Vec<DefectPoint>,
    pub verdict: TangentVerdict,
}

fn resolvable(lambda: f64, h: Option<f64>) -> bool {
    h.is_none_or(|h| lambda * h <= 2.0 * THETA_LINE + 1e-12)
}

fn defect_point(space: &FiniteMetricMeasureSpace, x: usize, lambda: f64, radius: f64) -> Result<DefectPoint> {
    let ball = rescale_ball(space, x, lambda, radius)?;
    if ball.degenerate {
        return Ok(DefectPoint { lambda, epsilon_hat: radius, branches: 0, degenerate: true, resolvable: false });
    }
    let d = interval_defect(&ball, radius)?;
    Ok(DefectPoint {
        lambda,
        epsilon_hat: d.epsilon,
        branches: d.branches(),
        degenerate: false,
        resolvable: resolvable(lambda, space.grid_step()),
    })
}

/// Verdict from the resolvable, non-degenerate points in schedule order.
pub fn classify(points: &[DefectPoint]) -> TangentVerdict {
    let used: Vec<f64> = points.iter().filter(|p| p.resolvable && !p.degenerate).map(|p| p.epsilon_hat).collect();
    let Some(&last) = used.last() else { return TangentVerdict::Inconclusive };
    if used.iter().all(|&e| e >= THETA_OBSTRUCT) {
        TangentVerdict::Obstructed
    } else if last <= THETA_LINE {
        // a nonempty tail of the schedule lies below θ_line
        TangentVerdict::LineTangentConsistent
    } else {
        TangentVerdict::Inconclusive
    }
}

/// `ε̂(λ)` over an increasing schedule on one space.
pub fn tangent_line_test(
    space: &FiniteMetricMeasureSpace,
    x: usize,
    schedule: &[f64],
    radius: f64,
    exec: Execution,
) -> Result<DefectCurve> {
    space.check_index(x)?;
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("scale schedule must be strictly increasing".into()));
    }
    let points =
        exec::map(exec, schedule, |&l| defect_point(space, x, l, radius)).into_iter().collect::<Result<Vec<_>>>()?;
    let verdict = classify(&points);
    Ok(DefectCurve { radius, points, verdict })
}

/// One scale of a refinement test: its own (finer) space and basepoint.
pub struct RefinementLevel<'a> {
    pub lambda: f64,
    pub space: &'a FiniteMetricMeasureSpace,
    pub basepoint: usize,
}

/// `ε̂(λ_k)` where each scale is evaluated on its own discretization.
pub fn tangent_refinement_test(levels: &[RefinementLevel<'_>], radius: f64, exec: Execution) -> Result<DefectCurve> {
    if levels.windows(2).any(|w| w[1].lambda <= w[0].lambda) {
        return Err(Error::Parameter("scale schedule must be strictly increasing".into()));
    }
    let points = exec::map(exec, levels, |l| defect_point(l.space, l.basepoint, l.lambda, radius))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let verdict = classify(&points);
    Ok(DefectCurve { radius, points, verdict })
}
