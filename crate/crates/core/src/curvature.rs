//! Ball-mass ratio curves, distance binning around a basepoint, geodesic
//! contraction of sets, and the scaling test for empty annular bins.
//!
//! Annulus measures `m_r` are realized as binned masses: bin `k` collects the
//! points whose distance to the basepoint falls in `[k·w, (k+1)·w)`, with the
//! outermost bin closed so every point lands in exactly one bin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{enumerate_geodesics, evaluate};
use crate::space::FiniteMetricMeasureSpace;

/// Tolerance for ratio monotonicity, before discretization slack.
pub const TOL_BG: f64 = 1e-9;

/// Geodesics followed per source point when contracting a set.
const CONTRACTION_GEODESICS: usize = 256;

/// Guard against `d / w` landing just below an integer.
const BIN_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileKind {
    /// `w(r) = 2r`.
    Linear,
    /// `w(r) = c · r^exponent`.
    Power {
        c: f64,
        exponent: f64,
    },
    Constant {
        value: f64,
    },
    /// Piecewise-linear through `(radii[k], values[k])`, constant beyond the ends.
    Tabulated {
        radii: Vec<f64>,
        values: Vec<f64>,
    },
}

/// A comparison function `w` on `(0, domain)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonProfile {
    pub kind: ProfileKind,
    pub domain: f64,
}

impl ComparisonProfile {
    pub fn linear(domain: f64) -> Self {
        ComparisonProfile { kind: ProfileKind::Linear, domain }
    }

    pub fn power(c: f64, exponent: f64, domain: f64) -> Self {
        ComparisonProfile { kind: ProfileKind::Power { c, exponent }, domain }
    }

    pub fn constant(value: f64, domain: f64) -> Self {
        ComparisonProfile { kind: ProfileKind::Constant { value }, domain }
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>, domain: f64) -> Result<Self> {
        if radii.len() != values.len() || radii.is_empty() {
            return Err(Error::Parameter("tabulated profile needs matching, nonempty radii and values".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("tabulated radii must be strictly increasing".into()));
        }
        Ok(ComparisonProfile { kind: ProfileKind::Tabulated { radii, values }, domain })
    }

    /// `w(r)`; an error when the value is not strictly positive.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let w = match &self.kind {
            ProfileKind::Linear => 2.0 * r,
            ProfileKind::Power { c, exponent } => c * r.powf(*exponent),
            ProfileKind::Constant { value } => *value,
            ProfileKind::Tabulated { radii, values } => interpolate(radii, values, r),
        };
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::Parameter(format!("comparison profile w({r}) = {w} is not positive")));
        }
        Ok(w)
    }

    /// Largest difference quotient on the tabulation grid (or on `grid` for
    /// closed-form kinds); finite means the profile passes the regularity check.
    pub fn max_difference_quotient(&self, grid: &[f64]) -> Result<f64> {
        let pts: Vec<f64> = match &self.kind {
            ProfileKind::Tabulated { radii, .. } => radii.clone(),
            _ => grid.to_vec(),
        };
        let mut worst: f64 = 0.0;
        for w in pts.windows(2) {
            let q = (self.eval(w[1])? - self.eval(w[0])?) / (w[1] - w[0]);
            worst = worst.max(q.abs());
        }
        Ok(worst)
    }
}

fn interpolate(radii: &[f64], values: &[f64], r: f64) -> f64 {
    if r <= radii[0] {
        return values[0];
    }
    let last = radii.len() - 1;
    if r >= radii[last] {
        return values[last];
    }
    let k = radii.partition_point(|&x| x <= r) - 1;
    let t = (r - radii[k]) / (radii[k + 1] - radii[k]);
    values[k] + t * (values[k + 1] - values[k])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioPoint {
    pub r: f64,
    pub ball_mass: f64,
    pub w: f64,
    pub ratio: f64,
    /// Allowed increase into this radius: `h` times the density bound, over `w`.
    pub slack: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BgVerdict {
    Nonincreasing,
    Fails,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioCurve {
    pub basepoint: usize,
    pub points: Vec<RatioPoint>,
    pub verdict: BgVerdict,
    /// Index of the first radius where the ratio rose beyond tolerance.
    pub first_violation: Option<usize>,
}

/// `r ↦ m(B(x₀, r)) / w(r)` over closed balls, with a monotonicity verdict.
/// The slack covers one grid step of mass, so radii should be grid multiples.
pub fn bg_ratio_curve(
    space: &FiniteMetricMeasureSpace,
    x0: usize,
    profile: &ComparisonProfile,
    radii: &[f64],
) -> Result<RatioCurve> {
    space.check_index(x0)?;
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("radii must be strictly increasing".into()));
    }
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && r < profile.domain)) {
        return Err(Error::Parameter(format!("radius {r} outside (0, {})", profile.domain)));
    }
    let h = space.grid_step().unwrap_or(0.0);
    // largest point mass per unit grid length
    let density = if h > 0.0 { (0..space.len()).map(|p| space.weight(p)).fold(0.0, f64::max) / h } else { 0.0 };
    let d: Vec<f64> = (0..space.len()).map(|p| space.dist(x0, p)).collect();
    let mut points = Vec::with_capacity(radii.len());
    for &r in radii {
        let w = profile.eval(r)?;
        let ball_mass: f64 = (0..space.len()).filter(|&p| d[p] <= r).map(|p| space.weight(p)).sum();
        points.push(RatioPoint { r, ball_mass, w, ratio: ball_mass / w, slack: h * density / w });
    }
    let first_violation = (1..points.len()).find(|&k| points[k].ratio > points[k - 1].ratio + TOL_BG + points[k].slack);
    let verdict = if first_violation.is_some() { BgVerdict::Fails } else { BgVerdict::Nonincreasing };
    Ok(RatioCurve { basepoint: x0, points, verdict, first_violation })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarBin {
    pub lo: f64,
    pub hi: f64,
    pub points: Vec<usize>,
    pub mass: f64,
    /// `mass / bin_width`.
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarDecomposition {
    pub basepoint: usize,
    pub bin_width: f64,
    pub bins: Vec<PolarBin>,
}

impl PolarDecomposition {
    /// `Σ_bins Σ_{p ∈ bin} f(p) · m(p)`.
    pub fn integrate(&self, space: &FiniteMetricMeasureSpace, f: impl Fn(usize) -> f64) -> f64 {
        self.bins.iter().flat_map(|b| b.points.iter()).map(|&p| f(p) * space.weight(p)).sum()
    }

    pub fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.bins.iter().map(|b| b.lo).collect();
        if let Some(b) = self.bins.last() {
            e.push(b.hi);
        }
        e
    }

    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.mass).sum()
    }

    /// Index of the bin holding distance `r`, if within range.
    pub fn bin_of(&self, r: f64) -> Option<usize> {
        bin_index(r, self.bin_width, self.bins.len())
    }
}

fn bin_index(r: f64, width: f64, bins: usize) -> Option<usize> {
    if r < 0.0 || bins == 0 {
        return None;
    }
    let k = (r / width + BIN_EPS).floor() as usize;
    if k < bins {
        Some(k)
    } else if k == bins && r <= bins as f64 * width + BIN_EPS * width {
        Some(bins - 1)
    } else {
        None
    }
}

/// Bins all points by distance to `x0`; bins run from 0 to the largest distance.
pub fn polar_decompose(space: &FiniteMetricMeasureSpace, x0: usize, bin_width: f64) -> Result<PolarDecomposition> {
    space.check_index(x0)?;
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(Error::Parameter(format!("bin width must be positive, got {bin_width}")));
    }
    let d: Vec<f64> = (0..space.len()).map(|p| space.dist(x0, p)).collect();
    let r_max = d.iter().copied().fold(0.0, f64::max);
    let count = ((r_max / bin_width - BIN_EPS).ceil() as usize).max(1);
    let mut bins: Vec<PolarBin> = (0..count)
        .map(|k| PolarBin {
            lo: k as f64 * bin_width,
            hi: (k + 1) as f64 * bin_width,
            points: Vec::new(),
            mass: 0.0,
            density: 0.0,
        })
        .collect();
    for p in 0..space.len() {
        let k = bin_index(d[p], bin_width, count).unwrap_or(count - 1);
        bins[k].points.push(p);
        bins[k].mass += space.weight(p);
    }
    for b in &mut bins {
        b.density = b.mass / bin_width;
    }
    Ok(PolarDecomposition { basepoint: x0, bin_width, bins })
}

/// One row of the two-ball annulus profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoBallBin {
    pub lo: f64,
    pub hi: f64,
    pub annulus_mass: f64,
    pub ball_y_mass: f64,
    pub ball_z_mass: f64,
}

impl TwoBallBin {
    pub fn both_positive(&self) -> bool {
        self.ball_y_mass > 0.0 && self.ball_z_mass > 0.0
    }
}

/// Per-bin masses of `m_r`, `m_r(B(y, radius))` and `m_r(B(z, radius))` around `x0`.
pub fn two_ball_profile(
    space: &FiniteMetricMeasureSpace,
    x0: usize,
    y: usize,
    z: usize,
    radius: f64,
    bin_width: f64,
) -> Result<Vec<TwoBallBin>> {
    space.check_index(y)?;
    space.check_index(z)?;
    let polar = polar_decompose(space, x0, bin_width)?;
    Ok(polar
        .bins
        .iter()
        .map(|b| {
            let in_ball = |c: usize| -> f64 {
                b.points.iter().filter(|&&p| space.dist(c, p) < radius).map(|&p| space.weight(p)).sum()
            };
            TwoBallBin { lo: b.lo, hi: b.hi, annulus_mass: b.mass, ball_y_mass: in_ball(y), ball_z_mass: in_ball(z) }
        })
        .collect())
}

/// Total width of the bins where both balls carry annulus mass.
pub fn joint_positive_length(profile: &[TwoBallBin]) -> f64 {
    profile.iter().filter(|b| b.both_positive()).map(|b| b.hi - b.lo).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contraction {
    pub t: f64,
    /// Points `γ_t` over all geodesics from `A` to `x`, ascending.
    pub points: Vec<usize>,
    pub mass: f64,
    /// Image points carrying no reference mass.
    pub zero_mass_points: Vec<usize>,
}

impl Contraction {
    pub fn is_positive(&self) -> bool {
        self.mass > 0.0
    }
}

/// The discrete contraction `A_{t,x}` for each `t` in `t_grid`.
pub fn nondegeneracy_check(
    space: &FiniteMetricMeasureSpace,
    a: &[usize],
    x: usize,
    t_grid: &[f64],
) -> Result<Vec<Contraction>> {
    if a.is_empty() {
        return Err(Error::Parameter("set A is empty".into()));
    }
    space.check_index(x)?;
    for &p in a {
        space.check_index(p)?;
    }
    if a.iter().map(|&p| space.weight(p)).sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateRestriction);
    }
    if let Some(t) = t_grid.iter().find(|&&t| !(0.0..1.0).contains(&t)) {
        return Err(Error::Parameter(format!("contraction time {t} outside [0, 1)")));
    }
    let mut geodesics = Vec::new();
    for &p in a {
        geodesics.extend(enumerate_geodesics(space, p, x, CONTRACTION_GEODESICS)?.paths);
    }
    t_grid
        .iter()
        .map(|&t| {
            let mut points = geodesics.iter().map(|g| evaluate(g, t)).collect::<Result<Vec<_>>>()?;
            points.sort_unstable();
            points.dedup();
            let mass = points.iter().map(|&p| space.weight(p)).sum();
            let zero_mass_points = points.iter().copied().filter(|&p| space.weight(p) == 0.0).collect();
            Ok(Contraction { t, points, mass, zero_mass_points })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Leak {
    pub t: f64,
    /// Length of `((1/t)E ∩ (l − r₀, l)) ∖ E`.
    pub length: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub l: f64,
    pub r0: f64,
    pub bin_width: f64,
    /// Bins `[lo, hi)` over `(l − r₀, l)` with their ball mass.
    pub bins: Vec<(f64, f64, f64)>,
    /// Bins with no mass inside `B(y, r₀)`.
    pub empty_bins: Vec<usize>,
    pub leaks: Vec<Leak>,
}

impl ScalingReport {
    pub fn consistent(&self) -> bool {
        self.leaks.iter().all(|l| l.consistent)
    }
}

/// Bins `(l − r₀, l)` by distance from `x`, collects the set `E` of bins with
/// no mass in `B(y, r₀)`, and for each `t` measures how much of `(1/t)E`
/// falls outside `E`. Leaks up to two bin widths count as consistent.
pub fn scaling_leak_check(
    space: &FiniteMetricMeasureSpace,
    x: usize,
    y: usize,
    r0: f64,
    t_grid: &[f64],
    bin_width: f64,
) -> Result<ScalingReport> {
    space.check_index(x)?;
    space.check_index(y)?;
    let l = space.dist(x, y);
    if !(r0 > 0.0 && r0 < l) {
        return Err(Error::Parameter(format!("need 0 < r0 < d(x, y) = {l}, got r0 = {r0}")));
    }
    if !(bin_width > 0.0) {
        return Err(Error::Parameter(format!("bin width must be positive, got {bin_width}")));
    }
    if let Some(t) = t_grid.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::Parameter(format!("scaling factor {t} outside (0, 1]")));
    }
    let lo = l - r0;
    let count = ((r0 / bin_width - BIN_EPS).ceil() as usize).max(1);
    let mut mass = vec![0.0; count];
    for p in 0..space.len() {
        let r = space.dist(x, p);
        if r <= lo || r >= l || space.dist(y, p) >= r0 {
            continue;
        }
        if let Some(k) = bin_index(r - lo, bin_width, count) {
            mass[k] += space.weight(p);
        }
    }
    let bins: Vec<(f64, f64, f64)> =
        (0..count).map(|k| (lo + k as f64 * bin_width, (lo + (k + 1) as f64 * bin_width).min(l), mass[k])).collect();
    let empty_bins: Vec<usize> = (0..count).filter(|&k| mass[k] == 0.0).collect();
    let e: Vec<(f64, f64)> = merge(empty_bins.iter().map(|&k| (bins[k].0, bins[k].1)).collect());
    let leaks = t_grid
        .iter()
        .map(|&t| {
            let length = if t == 1.0 {
                0.0
            } else {
                let scaled: Vec<(f64, f64)> = e
                    .iter()
                    .map(|&(a, b)| (a / t, b / t))
                    .map(|(a, b)| (a.max(lo), b.min(l)))
                    .filter(|(a, b)| a < b)
                    .collect();
                difference_length(&merge(scaled), &e)
            };
            Leak { t, length, consistent: length <= 2.0 * bin_width + BIN_EPS }
        })
        .collect();
    Ok(ScalingReport { l, r0, bin_width, bins, empty_bins, leaks })
}

fn merge(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in intervals {
        match out.last_mut() {
            Some(last) if a <= last.1 + 1e-12 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Length of `A ∖ B` for merged interval lists.
fn difference_length(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for &(s, e) in a {
        let mut covered = 0.0;
        for &(p, q) in b {
            let (lo, hi) = (s.max(p), e.min(q));
            if lo < hi {
                covered += hi - lo;
            }
        }
        total += (e - s - covered).max(0.0);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{from_metric_graph, MetricGraph};

    fn interval(h: f64) -> FiniteMetricMeasureSpace {
        let g = MetricGraph::new(vec!["0".into(), "1".into()], vec![(0, 1, 1.0)], h).unwrap();
        from_metric_graph(&g).unwrap()
    }

    fn point_at(s: &FiniteMetricMeasureSpace, r: f64) -> usize {
        (0..s.len()).min_by(|&a, &b| (s.dist(0, a) - r).abs().total_cmp(&(s.dist(0, b) - r).abs())).unwrap()
    }

    #[test]
    fn linear_profile_on_interval() {
        let s = interval(1.0 / 64.0);
        let mid = point_at(&s, 0.5);
        let radii: Vec<f64> = (1..32).map(|k| k as f64 / 64.0).collect();
        let c = bg_ratio_curve(&s, mid, &ComparisonProfile::linear(1.0), &radii).unwrap();
        assert_eq!(c.verdict, BgVerdict::Nonincreasing);
        for p in &c.points {
            assert!((p.ratio - 1.0).abs() <= 1.0 / 64.0 / p.w + 1e-12);
        }
        let sat = bg_ratio_curve(&s, mid, &ComparisonProfile::linear(1.0), &[0.6, 0.7]).unwrap();
        assert!((sat.points[0].ratio - 1.0 / 1.2).abs() < 1e-12);
        assert!(sat.points[1].ratio < sat.points[0].ratio);
    }

    #[test]
    fn constant_profile_fails() {
        let s = interval(1.0 / 64.0);
        let mid = point_at(&s, 0.5);
        let c = bg_ratio_curve(&s, mid, &ComparisonProfile::constant(1.0, 1.0), &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(c.verdict, BgVerdict::Fails);
        assert_eq!(c.first_violation, Some(1));
    }

    #[test]
    fn nonpositive_profile_rejected() {
        let s = interval(0.25);
        let p = ComparisonProfile::power(-1.0, 1.0, 1.0);
        assert!(bg_ratio_curve(&s, 0, &p, &[0.5]).is_err());
    }

    #[test]
    fn polar_quarters() {
        let s = interval(1.0 / 64.0);
        let pd = polar_decompose(&s, 0, 0.25).unwrap();
        assert_eq!(pd.bins.len(), 4);
        for b in &pd.bins {
            assert!((b.mass - 0.25).abs() <= 1.0 / 64.0);
        }
        assert!((pd.integrate(&s, |_| 1.0) - s.total_weight()).abs() < 1e-12);
    }

    #[test]
    fn contraction_of_interval_segment() {
        let s = interval(1.0 / 8.0);
        let a: Vec<usize> = (0..s.len()).filter(|&p| (0.5..=0.75).contains(&s.dist(0, p))).collect();
        let res = nondegeneracy_check(&s, &a, 0, &[0.0, 0.5]).unwrap();
        assert_eq!(res[0].points.len(), a.len());
        let radii: Vec<f64> = res[1].points.iter().map(|&p| s.dist(0, p)).collect();
        assert_eq!(radii.first().copied(), Some(0.25));
        assert_eq!(radii.last().copied(), Some(0.375));
        assert!(res[1].is_positive());
    }

    #[test]
    fn identity_scaling_has_no_leak() {
        let s = interval(1.0 / 64.0);
        let y = point_at(&s, 0.75);
        let r = scaling_leak_check(&s, 0, y, 0.25, &[1.0, 0.9], 1.0 / 32.0).unwrap();
        assert!(r.empty_bins.is_empty());
        assert!(r.leaks.iter().all(|l| l.length == 0.0 && l.consistent));
    }

    #[test]
    fn interval_ops() {
        assert_eq!(merge(vec![(0.5, 0.6), (0.1, 0.2), (0.2, 0.3)]), vec![(0.1, 0.3), (0.5, 0.6)]);
        assert!((difference_length(&[(0.0, 1.0)], &[(0.25, 0.5)]) - 0.75).abs() < 1e-15);
    }
}
