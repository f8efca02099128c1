//! Segment `[-1, 0]` glued at the origin to a planar sector carrying a
//! mixture of Bernoulli product measures.
//!
//! A word `x ∈ {0,1}ⁿ` with `k` ones sits at radius `ι(x) = Σ xᵢ 2⁻ⁱ` and
//! angle `k/n - 1/2`. Its reference weight is `∫₀¹ tᵏ(1-t)ⁿ⁻ᵏ dt =
//! k!(n-k)!/(n+1)!`, so the fan weights sum to one exactly. The all-zero word
//! sits at the origin and shares that point with the segment.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{DiscreteMeasure, FiniteMetricMeasureSpace, Metric, SegmentSectorPoint};

pub const MAX_DEPTH: u32 = 14;
pub const DEFAULT_DEPTH: u32 = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct FanAtom {
    /// Point index in the space.
    pub point: usize,
    /// Bits of the word, `x₁` most significant.
    pub word: u32,
    pub ones: u32,
    /// `ι(x)`, a dyadic rational.
    pub radius: Rational,
    /// `k/n`.
    pub mean: Rational,
    /// `k!(n-k)!/(n+1)!`.
    pub weight: Rational,
}

#[derive(Clone, Debug)]
pub struct FanScenario {
    pub space: FiniteMetricMeasureSpace,
    pub depth: u32,
    /// Segment points ordered from the origin outwards (`s = 0, -h, ...`).
    pub segment: Vec<usize>,
    /// Fan atoms ordered by word.
    pub atoms: Vec<FanAtom>,
    /// Exact reference weights of every point.
    pub exact_weights: Vec<Rational>,
}

impl FanScenario {
    /// Radii computed independently as float sums `Σ xᵢ 2⁻ⁱ`.
    pub fn float_radii(&self) -> Vec<f64> {
        (0..self.atoms.len() as u32)
            .map(|w| (1..=self.depth).filter(|i| w >> (self.depth - i) & 1 == 1).map(|i| 0.5f64.powi(i as i32)).sum())
            .collect()
    }

    /// Whether all fan radii are pairwise distinct, checked exactly.
    pub fn radii_distinct(&self) -> bool {
        let mut r: Vec<&Rational> = self.atoms.iter().map(|a| &a.radius).collect();
        r.sort();
        r.windows(2).all(|w| w[0] < w[1])
    }

    /// Uniform measure on segment points `s = -h, ..., -count·h`.
    pub fn segment_measure(&self, count: usize) -> Result<DiscreteMeasure> {
        if count == 0 || count >= self.segment.len() {
            return Err(Error::Parameter(format!(
                "segment has {} points off the origin, asked for {count}",
                self.segment.len() - 1
            )));
        }
        DiscreteMeasure::uniform_on(&self.space, &self.segment[1..=count])
    }

    /// `count` atoms with `ones` ones, evenly spaced in radius order.
    pub fn level_atoms(&self, ones: u32, count: usize) -> Result<Vec<usize>> {
        let mut level: Vec<&FanAtom> = self.atoms.iter().filter(|a| a.ones == ones).collect();
        level.sort_by(|a, b| a.radius.cmp(&b.radius));
        if count == 0 || count > level.len() {
            return Err(Error::Parameter(format!("level {ones} has {} atoms, asked for {count}", level.len())));
        }
        Ok((0..count).map(|i| level[i * level.len() / count].point).collect())
    }

    /// `m̃` restricted to `points` and normalized, in exact arithmetic.
    pub fn fan_measure_on(&self, points: &[usize]) -> Result<DiscreteMeasure> {
        let masses: Vec<(usize, Rational)> = points.iter().map(|&p| (p, self.exact_weights[p].clone())).collect();
        DiscreteMeasure::weighted_on(&self.space, &masses)
    }

    /// Radius of a fan point or minus the coordinate of a segment point.
    pub fn radial_coordinate(&self, p: usize) -> f64 {
        match &self.space.metric() {
            Metric::SegmentSector(pts) => match pts[p] {
                SegmentSectorPoint::Segment(s) => s,
                SegmentSectorPoint::Sector { radius, .. } => radius,
            },
            Metric::Dense { .. } => unreachable!("fan spaces use the closed-form metric"),
        }
    }
}

/// Builds the fan at depth `n` with segment step at most `segment_h`.
pub fn build_fan(depth: u32, segment_h: f64) -> Result<FanScenario> {
    if depth > MAX_DEPTH {
        return Err(Error::Parameter(format!("fan depth {depth} exceeds {MAX_DEPTH}")));
    }
    if depth == 0 {
        return Err(Error::Parameter("fan depth must be at least 1".into()));
    }
    if !(segment_h > 0.0 && segment_h <= 1.0) {
        return Err(Error::Parameter(format!("segment step must lie in (0, 1], got {segment_h}")));
    }
    let pieces = ((1.0 / segment_h) - 1e-9).ceil().max(1.0) as usize;
    let piece = rational::ratio(1, pieces as i64);
    let mut ids = Vec::new();
    let mut points = Vec::new();
    let mut exact_weights = Vec::new();
    let mut labels = Vec::new();
    let mut coords = Vec::new();
    for j in 0..=pieces {
        let s = -(j as f64) / pieces as f64;
        ids.push(format!("s{j}"));
        points.push(SegmentSectorPoint::Segment(s));
        coords.push([s, 0.0]);
        labels.push(Some(format!("segment {s}")));
        let share = if j == 0 || j == pieces { &piece / rational::from_int(2) } else { piece.clone() };
        exact_weights.push(share);
    }
    let segment: Vec<usize> = (0..=pieces).collect();
    let n = depth;
    let denom = rational::factorial(n + 1);
    let scale = Rational::from_integer(num_bigint::BigInt::one() << n);
    let mut atoms = Vec::with_capacity(1 << n);
    for word in 0..(1u32 << n) {
        let ones = word.count_ones();
        let weight = Rational::new(rational::factorial(ones) * rational::factorial(n - ones), denom.clone());
        let radius = Rational::from_integer(word.into()) / &scale;
        let mean = rational::ratio(ones as i64, n as i64);
        let point = if word == 0 {
            exact_weights[0] += &weight;
            labels[0] = Some("segment 0, fan origin".into());
            0
        } else {
            let t = rational::to_f64(&radius);
            let theta = rational::to_f64(&mean) - 0.5;
            let (x, y) = (t * theta.cos(), t * theta.sin());
            ids.push(format!("f{word:0width$b}", width = n as usize));
            points.push(SegmentSectorPoint::Sector { x, y, radius: t });
            coords.push([x, y]);
            labels.push(Some(format!("fan k={ones}")));
            exact_weights.push(weight.clone());
            points.len() - 1
        };
        atoms.push(FanAtom { point, word, ones, radius, mean, weight });
    }
    let weights = exact_weights.iter().map(rational::to_f64).collect();
    let space = FiniteMetricMeasureSpace::from_metric(ids, weights, Metric::SegmentSector(points))?
        .with_labels(labels)
        .with_coords(coords)
        .with_grid_step(1.0 / pieces as f64);
    Ok(FanScenario { space, depth, segment, atoms, exact_weights })
}

/// `μ_t({x : pred(k(x))})` for the depth-`n` Bernoulli product, exactly.
pub fn bernoulli_mass(depth: u32, t: &Rational, pred: impl Fn(u32) -> bool) -> Rational {
    let s = Rational::one() - t;
    let pow = |b: &Rational, e: u32| (0..e).fold(Rational::one(), |acc, _| acc * b);
    (0..=depth).filter(|&k| pred(k)).fold(Rational::zero(), |acc, k| {
        acc + Rational::from_integer(rational::binomial(depth, k)) * pow(t, k) * pow(&s, depth - k)
    })
}

/// `μ_t({x : |k/n - 1/2| ≤ delta})`, exactly.
pub fn concentration_mass(depth: u32, t: &Rational, delta: &Rational) -> Rational {
    let half = rational::ratio(1, 2);
    let n = rational::from_int(depth as i64);
    bernoulli_mass(depth, t, |k| {
        let dev = rational::from_int(k as i64) / &n - &half;
        (if dev < Rational::zero() { -dev } else { dev }) <= *delta
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_two_atoms() {
        let f = build_fan(2, 0.5).unwrap();
        let radii: Vec<f64> = f.atoms.iter().map(|a| rational::to_f64(&a.radius)).collect();
        assert_eq!(radii, vec![0.0, 0.25, 0.5, 0.75]);
        let w: Vec<Rational> = f.atoms.iter().map(|a| a.weight.clone()).collect();
        assert_eq!(w, vec![rational::ratio(1, 3), rational::ratio(1, 6), rational::ratio(1, 6), rational::ratio(1, 3)]);
        // segment s0, s1, s2 plus three off-origin atoms
        assert_eq!(f.space.len(), 6);
        assert_eq!(rational::sum(&f.exact_weights), rational::from_int(2));
    }

    #[test]
    fn radial_distances() {
        let f = build_fan(3, 0.25).unwrap();
        let atom = f.atoms.iter().find(|a| a.word == 0b101).unwrap();
        let seg = f.segment[2];
        assert!((f.space.dist(seg, atom.point) - (0.625 + 0.5)).abs() < 1e-15);
        assert_eq!(f.space.dist(0, atom.point), 0.625);
        assert!(f.radii_distinct());
    }

    #[test]
    fn concentration_depth_twelve() {
        let m = concentration_mass(12, &rational::ratio(1, 2), &rational::ratio(3, 10));
        assert_eq!(m, rational::from_int(1) - rational::ratio(158, 4096));
        let total = bernoulli_mass(7, &rational::ratio(1, 3), |_| true);
        assert_eq!(total, rational::from_int(1));
    }

    #[test]
    fn depth_limit() {
        assert!(build_fan(15, 0.1).is_err());
        assert!(build_fan(4, 0.0).is_err());
    }
}
