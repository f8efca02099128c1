//! Deterministic builders for the model spaces and the transport gadgets
//! evaluated on them.
//!
//! Every builder is a pure function of its parameters. [`ScenarioSpec`] names a
//! builder together with its parameters and a seed, and [`ScenarioManifest`] is
//! the serializable record written next to a built space.

mod cusp;
mod fan;
mod gadgets;
pub mod random;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{from_metric_graph, FiniteMetricMeasureSpace, MetricGraph};

pub use cusp::{ac_multiplicity_instance, build_cusp, build_cusp_window, cusp_point, cusp_refinement, CuspGrid};
pub use fan::{bernoulli_mass, build_fan, concentration_mass, FanAtom, FanScenario, DEFAULT_DEPTH, MAX_DEPTH};
pub use gadgets::{
    assess_gadget, branch_witnesses, build_gadget, tripod_branch_instance, BranchWitness, Gadget, GadgetAssessment,
    Phenomenon, GADGET_NAMES,
};

/// Tolerance for locating a point by its distances.
const TOL_LOCATE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Interval,
    Circle,
    Polyline,
    Tripod,
    Fan,
    Cusp,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Interval,
        ScenarioKind::Circle,
        ScenarioKind::Polyline,
        ScenarioKind::Tripod,
        ScenarioKind::Fan,
        ScenarioKind::Cusp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Interval => "interval",
            ScenarioKind::Circle => "circle",
            ScenarioKind::Polyline => "polyline",
            ScenarioKind::Tripod => "tripod",
            ScenarioKind::Fan => "fan",
            ScenarioKind::Cusp => "cusp",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// A named builder with its parameters.
///
/// `lengths` means: interval `[length]`, circle `[circumference]`, tripod
/// `[leg A, leg B, leg C]`, polyline flattened vertex coordinates `[x0, y0,
/// x1, y1, ...]`. `h` is the subdivision step (segment step for the fan, grid
/// pitch for the cusp).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub lengths: Vec<f64>,
    pub depth: Option<u32>,
    pub h: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Documented default parameters for each builder.
    pub fn default_for(kind: ScenarioKind) -> Self {
        let (lengths, depth, h) = match kind {
            ScenarioKind::Interval => (vec![1.0], None, 1.0 / 64.0),
            ScenarioKind::Circle => (vec![4.0], None, 1.0 / 16.0),
            ScenarioKind::Polyline => (DEFAULT_POLYLINE.iter().flat_map(|p| [p[0], p[1]]).collect(), None, 1.0 / 256.0),
            ScenarioKind::Tripod => (vec![1.0, 1.0, 1.0], None, 1.0 / 64.0),
            ScenarioKind::Fan => (Vec::new(), Some(DEFAULT_DEPTH), 1.0 / 20.0),
            ScenarioKind::Cusp => (Vec::new(), None, 1.0 / 32.0),
        };
        ScenarioSpec { kind, lengths, depth, h, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Parameter(format!("step h must be positive, got {}", self.h)));
        }
        if self.lengths.iter().any(|l| !l.is_finite()) {
            return Err(Error::Parameter("lengths must be finite".into()));
        }
        let positive = |want: usize| {
            if self.lengths.len() != want || self.lengths.iter().any(|&l| l <= 0.0) {
                Err(Error::Parameter(format!("{} expects {want} positive length(s)", self.kind)))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ScenarioKind::Interval | ScenarioKind::Circle => positive(1),
            ScenarioKind::Tripod => positive(3),
            ScenarioKind::Polyline => {
                if self.lengths.len() < 4 || !self.lengths.len().is_multiple_of(2) {
                    return Err(Error::Parameter("polyline expects at least two (x, y) vertices".into()));
                }
                Ok(())
            }
            ScenarioKind::Fan => match self.depth {
                Some(n) if n > MAX_DEPTH => Err(Error::Parameter(format!("fan depth {n} exceeds {MAX_DEPTH}"))),
                _ => Ok(()),
            },
            ScenarioKind::Cusp => cusp::grid_denominator(self.h).map(|_| ()),
        }
    }

    /// Builds the space. The fan and cusp carry more structure; see
    /// [`build_fan`] and [`build_cusp`].
    pub fn build(&self) -> Result<FiniteMetricMeasureSpace> {
        self.validate()?;
        match self.kind {
            ScenarioKind::Interval => build_interval(self.lengths[0], self.h),
            ScenarioKind::Circle => build_circle(self.lengths[0], self.h),
            ScenarioKind::Polyline => {
                let vertices: Vec<[f64; 2]> = self.lengths.chunks(2).map(|c| [c[0], c[1]]).collect();
                build_polyline(&vertices, self.h)
            }
            ScenarioKind::Tripod => build_tripod([self.lengths[0], self.lengths[1], self.lengths[2]], self.h),
            ScenarioKind::Fan => Ok(build_fan(self.depth.unwrap_or(DEFAULT_DEPTH), self.h)?.space),
            ScenarioKind::Cusp => Ok(build_cusp(self.h)?.space),
        }
    }

    /// Id of the point the scenario is centred on.
    pub fn basepoint_id(&self) -> String {
        match self.kind {
            ScenarioKind::Interval => {
                let pieces = ((self.lengths[0] / self.h) - 1e-9).ceil().max(1.0) as usize;
                if pieces >= 2 {
                    format!("a~b#{}", pieces / 2)
                } else {
                    "a".into()
                }
            }
            ScenarioKind::Circle => "v0".into(),
            ScenarioKind::Polyline => "p1".into(),
            ScenarioKind::Tripod => "o".into(),
            ScenarioKind::Fan => "s0".into(),
            ScenarioKind::Cusp => cusp::point_id(0, 0),
        }
    }

    pub fn manifest(&self, space: &FiniteMetricMeasureSpace, notes: Vec<String>) -> ScenarioManifest {
        let mut parameters = BTreeMap::new();
        if !self.lengths.is_empty() {
            parameters.insert("lengths".to_string(), serde_json::json!(self.lengths));
        }
        if let Some(n) = self.depth {
            parameters.insert("depth".to_string(), serde_json::json!(n));
        }
        parameters.insert("h".to_string(), serde_json::json!(self.h));
        parameters.insert("seed".to_string(), serde_json::json!(self.seed));
        ScenarioManifest {
            name: self.kind.to_string(),
            parameters,
            points: space.len(),
            measure_points: space.measure_points(false).len(),
            basepoint: self.basepoint_id(),
            notes,
        }
    }
}

/// Serializable description of a built scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub name: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub points: usize,
    pub measure_points: usize,
    pub basepoint: String,
    pub notes: Vec<String>,
}

/// Corner path used by the default polyline: four unit edges.
pub const DEFAULT_POLYLINE: [[f64; 2]; 5] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [2.0, 1.0], [2.0, 2.0]];

/// `[0, length]` subdivided at step at most `h`; endpoints `a` and `b`.
pub fn build_interval(length: f64, h: f64) -> Result<FiniteMetricMeasureSpace> {
    let g = MetricGraph::new(vec!["a".into(), "b".into()], vec![(0, 1, length)], h)?;
    from_metric_graph(&g)
}

/// Circle of the given circumference as a 4-cycle `v0..v3` of equal arcs.
pub fn build_circle(circumference: f64, h: f64) -> Result<FiniteMetricMeasureSpace> {
    let arc = circumference / 4.0;
    let vertices = (0..4).map(|i| format!("v{i}")).collect();
    let g = MetricGraph::new(vertices, (0..4).map(|i| (i, (i + 1) % 4, arc)).collect(), h.min(arc))?;
    from_metric_graph(&g)
}

/// Planar polyline `p0, p1, ...` with Euclidean edge lengths and its
/// arclength metric.
pub fn build_polyline(vertices: &[[f64; 2]], h: f64) -> Result<FiniteMetricMeasureSpace> {
    if vertices.len() < 2 {
        return Err(Error::Parameter("polyline needs at least two vertices".into()));
    }
    let edges: Vec<(usize, usize, f64)> = vertices
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i, i + 1, (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])))
        .collect();
    let shortest = edges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
    let ids = (0..vertices.len()).map(|i| format!("p{i}")).collect();
    let g = MetricGraph::new(ids, edges, h.min(shortest))?.with_coords(vertices.to_vec())?;
    from_metric_graph(&g)
}

/// Hub `o` with legs to the leaves `A`, `B`, `C`.
pub fn build_tripod(legs: [f64; 3], h: f64) -> Result<FiniteMetricMeasureSpace> {
    if legs.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Parameter(format!("tripod legs must be positive, got {legs:?}")));
    }
    let shortest = legs.iter().copied().fold(f64::INFINITY, f64::min);
    if h > shortest * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!("step h = {h} exceeds the shortest leg {shortest}")));
    }
    let ids = ["o", "A", "B", "C"].map(String::from).to_vec();
    let coords =
        vec![[0.0, 0.0], [legs[0], 0.0], [-0.5 * legs[1], 0.866 * legs[1]], [-0.5 * legs[2], -0.866 * legs[2]]];
    let g = MetricGraph::new(ids, vec![(0, 1, legs[0]), (0, 2, legs[1]), (0, 3, legs[2])], h)?.with_coords(coords)?;
    from_metric_graph(&g)
}

/// Point of a tripod on `leg` (`'A'`, `'B'` or `'C'`) at arclength `s` from the hub.
pub fn tripod_point(space: &FiniteMetricMeasureSpace, leg: char, s: f64) -> Result<usize> {
    let hub = space.index_of("o")?;
    let leaf = space.index_of(&leg.to_string())?;
    let length = space.dist(hub, leaf);
    (0..space.len())
        .find(|&p| {
            (space.dist(hub, p) - s).abs() <= TOL_LOCATE && (space.dist(leaf, p) - (length - s)).abs() <= TOL_LOCATE
        })
        .ok_or_else(|| Error::UnknownPoint(format!("{leg}@{s}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tripod_sizes_and_distances() {
        let t = build_tripod([1.0, 1.0, 1.0], 0.25).unwrap();
        assert_eq!(t.len(), 13);
        let (a, b) = (t.index_of("A").unwrap(), t.index_of("B").unwrap());
        assert_eq!(t.dist(a, b), 2.0);
        assert_eq!(build_tripod([1.0, 1.0, 1.0], 1.0).unwrap().len(), 4);
        let long = build_tripod([2.0, 1.0, 1.0], 0.5).unwrap();
        assert_eq!(long.dist(long.index_of("A").unwrap(), long.index_of("B").unwrap()), 3.0);
        assert!(build_tripod([1.0, 1.0, 1.0], 2.0).is_err());
    }

    #[test]
    fn tripod_point_lookup() {
        let t = build_tripod([1.0, 1.0, 1.0], 0.25).unwrap();
        let p = tripod_point(&t, 'C', 0.5).unwrap();
        assert_eq!(t.id(p), "o~C#2");
        assert_eq!(tripod_point(&t, 'A', 0.0).unwrap(), t.index_of("o").unwrap());
        assert!(tripod_point(&t, 'B', 0.3).is_err());
    }

    #[test]
    fn spec_roundtrip_and_defaults() {
        for kind in ScenarioKind::ALL {
            assert_eq!(kind.name().parse::<ScenarioKind>().unwrap(), kind);
            let spec = ScenarioSpec::default_for(kind);
            spec.validate().unwrap();
        }
        assert!(matches!("moebius".parse::<ScenarioKind>(), Err(Error::UnknownScenario(_))));
        let spec = ScenarioSpec::default_for(ScenarioKind::Interval);
        let s = spec.build().unwrap();
        assert_eq!(s.index_of(&spec.basepoint_id()).map(|p| s.dist(0, p)).unwrap(), 0.5);
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioSpec>(&json).unwrap(), spec);
    }

    #[test]
    fn polyline_is_an_interval() {
        let s = build_polyline(&DEFAULT_POLYLINE, 0.25).unwrap();
        let (a, b) = (s.index_of("p0").unwrap(), s.index_of("p4").unwrap());
        assert_eq!(s.dist(a, b), 4.0);
        assert_eq!(s.len(), 17);
    }

    #[test]
    fn circle_antipodes() {
        let s = build_circle(4.0, 0.5).unwrap();
        assert_eq!(s.len(), 8);
        let (a, b) = (s.index_of("v0").unwrap(), s.index_of("v2").unwrap());
        assert_eq!(s.dist(a, b), 2.0);
    }
}
