//! Discrete geodesics: shortest point-chains built from one-step neighbours.

use crate::error::{Error, Result};
use crate::space::FiniteMetricMeasureSpace;

/// Relative minimality tolerance for chains.
pub const TOL_GEO: f64 = 1e-6;

fn tol_for(length: f64) -> f64 {
    (TOL_GEO * length).max(1e-12)
}

/// A length-minimizing chain `p_0, ..., p_k` with cumulative arclengths.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPath {
    points: Vec<usize>,
    arclength: Vec<f64>,
}

impl GeodesicPath {
    /// Builds a chain from consecutive points, computing arclengths.
    pub fn from_points(space: &FiniteMetricMeasureSpace, points: Vec<usize>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Structure("empty geodesic".into()));
        }
        for &p in &points {
            space.check_index(p)?;
        }
        let mut arclength = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        arclength.push(0.0);
        for w in points.windows(2) {
            acc += space.dist(w[0], w[1]);
            arclength.push(acc);
        }
        Ok(GeodesicPath { points, arclength })
    }

    pub fn constant(point: usize) -> Self {
        GeodesicPath { points: vec![point], arclength: vec![0.0] }
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn arclengths(&self) -> &[f64] {
        &self.arclength
    }

    pub fn start(&self) -> usize {
        self.points[0]
    }

    pub fn end(&self) -> usize {
        *self.points.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        *self.arclength.last().unwrap()
    }

    /// Whether consecutive steps sum to the endpoint distance within tolerance.
    pub fn is_minimal(&self, space: &FiniteMetricMeasureSpace) -> bool {
        let d = space.dist(self.start(), self.end());
        (self.length() - d).abs() <= tol_for(d.max(self.length()))
    }

    fn position(&self, t: f64) -> usize {
        let k = self.points.len() - 1;
        if t <= 0.0 {
            return 0;
        }
        if t >= 1.0 {
            return k;
        }
        let target = t * self.length();
        // nearest arclength; ties go to the earlier point
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (i, &a) in self.arclength.iter().enumerate() {
            let gap = (a - target).abs();
            if gap < best_gap - 1e-15 {
                best = i;
                best_gap = gap;
            }
        }
        best
    }
}

/// Geodesics found between two points, possibly truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSet {
    pub paths: Vec<GeodesicPath>,
    pub truncated: bool,
}

/// All distinct shortest point-chains from `u` to `v`, in lexicographic order
/// of point indices, up to `max_count`.
pub fn enumerate_geodesics(
    space: &FiniteMetricMeasureSpace,
    u: usize,
    v: usize,
    max_count: usize,
) -> Result<GeodesicSet> {
    space.check_index(u)?;
    space.check_index(v)?;
    if u == v {
        return Ok(GeodesicSet { paths: vec![GeodesicPath::constant(u)], truncated: false });
    }
    let total = space.dist(u, v);
    let tol = tol_for(total);
    let mut out = Vec::new();
    let mut truncated = false;
    let mut chain = vec![u];
    extend_chains(space, v, total, tol, 0.0, &mut chain, &mut out, max_count, &mut truncated);
    if out.is_empty() && !truncated {
        return Err(Error::NoGeodesic(u, v));
    }
    let paths = out.into_iter().map(|pts| GeodesicPath::from_points(space, pts)).collect::<Result<Vec<_>>>()?;
    Ok(GeodesicSet { paths, truncated })
}

#[allow(clippy::too_many_arguments)]
fn extend_chains(
    space: &FiniteMetricMeasureSpace,
    target: usize,
    total: f64,
    tol: f64,
    travelled: f64,
    chain: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    max_count: usize,
    truncated: &mut bool,
) {
    if *truncated {
        return;
    }
    let p = *chain.last().unwrap();
    if p == target {
        if out.len() >= max_count {
            *truncated = true;
            return;
        }
        out.push(chain.clone());
        return;
    }
    for &q in space.neighbors(p) {
        let step = space.dist(p, q);
        if step <= 0.0 {
            continue;
        }
        let reached = travelled + step;
        if reached + space.dist(q, target) <= total + tol && !chain.contains(&q) {
            chain.push(q);
            extend_chains(space, target, total, tol, reached, chain, out, max_count, truncated);
            chain.pop();
            if *truncated {
                return;
            }
        }
    }
}

/// Point of `γ` nearest to arclength `t·L`; exact endpoints at `t = 0, 1`.
pub fn evaluate(gamma: &GeodesicPath, t: f64) -> Result<usize> {
    check_time(t)?;
    Ok(gamma.points[gamma.position(t)])
}

fn check_time(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("time {t} outside [0,1]")));
    }
    Ok(())
}

/// Sub-chain between the evaluations at `s` and `t`, reparametrized to `[0,1]`.
pub fn restrict(gamma: &GeodesicPath, s: f64, t: f64) -> Result<GeodesicPath> {
    check_time(s)?;
    check_time(t)?;
    if s >= t {
        return Err(Error::Parameter(format!("restriction needs s < t, got s={s}, t={t}")));
    }
    let a = gamma.position(s);
    let b = gamma.position(t);
    let base = gamma.arclength[a];
    Ok(GeodesicPath {
        points: gamma.points[a..=b].to_vec(),
        arclength: gamma.arclength[a..=b].iter().map(|x| x - base).collect(),
    })
}

/// Two equal-length geodesics with distinct endpoints that agree on an
/// initial segment of positive length and then separate.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchConfiguration {
    pub basepoint: usize,
    pub alpha: GeodesicPath,
    pub beta: GeodesicPath,
    /// Number of leading points the two chains share (at least 2).
    pub shared_prefix: usize,
}

impl BranchConfiguration {
    /// Last shared point, where the two chains separate.
    pub fn branch_point(&self) -> usize {
        self.alpha.points()[self.shared_prefix - 1]
    }
}

const BRANCH_GEODESIC_CAP: usize = 64;

/// Searches for a branching pair near `x`. Chains may start at `x` itself or
/// at another ball point and pass through `x`, so that the shared initial
/// segment has positive length. Endpoints lie in the closed ball `B(x, radius)`.
/// Chains starting at `x` are preferred; ties are broken by the smallest
/// endpoint indices, then the smallest start.
pub fn find_branching(space: &FiniteMetricMeasureSpace, x: usize, radius: f64) -> Result<Option<BranchConfiguration>> {
    space.check_index(x)?;
    if radius <= 0.0 {
        return Err(Error::Parameter(format!("radius must be positive, got {radius}")));
    }
    let ball = space.closed_ball(x, radius);
    let mut best: Option<((usize, usize, usize, usize), BranchConfiguration)> = None;
    for &w in &ball {
        let mut chains: Vec<GeodesicPath> = Vec::new();
        for &e in &ball {
            if e == w {
                continue;
            }
            let set = enumerate_geodesics(space, w, e, BRANCH_GEODESIC_CAP)?;
            chains.extend(set.paths.into_iter().filter(|g| w == x || g.points[1..].contains(&x)));
        }
        for (i, a) in chains.iter().enumerate() {
            for b in &chains[i + 1..] {
                if a.end() == b.end() || a.points[1] != b.points[1] {
                    continue;
                }
                let la = a.length();
                if (la - b.length()).abs() > tol_for(la) {
                    continue;
                }
                let shared = a.points.iter().zip(&b.points).take_while(|(p, q)| p == q).count();
                let (alpha, beta) = if a.end() < b.end() { (a, b) } else { (b, a) };
                if w != x && !alpha.points[..shared].contains(&x) {
                    continue;
                }
                let key = (usize::from(w != x), alpha.end(), beta.end(), w);
                if best.as_ref().is_none_or(|(k, _)| key < *k) {
                    best = Some((
                        key,
                        BranchConfiguration {
                            basepoint: x,
                            alpha: alpha.clone(),
                            beta: beta.clone(),
                            shared_prefix: shared,
                        },
                    ));
                }
            }
        }
    }
    Ok(best.map(|(_, c)| c))
}
