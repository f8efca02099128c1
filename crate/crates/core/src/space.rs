//! Finite metric measure spaces, metric graphs and discrete measures.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::OnceLock;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::rational::{self, Rational};

/// Tolerance for the metric axioms.
pub const TOL_METRIC: f64 = 1e-9;
/// Tolerance for "total mass equals one".
pub const TOL_PROBABILITY: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Diagonal { i: usize, value: f64 },
    ZeroOffDiagonal { i: usize, j: usize },
    Negative { i: usize, j: usize, value: f64 },
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },
    Triangle { a: usize, b: usize, c: usize, excess: f64 },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks symmetry, the zero diagonal and the triangle inequality of a square
/// matrix, listing every violation beyond [`TOL_METRIC`].
pub fn validate_metric(dist: &[Vec<f64>]) -> Result<ValidationReport> {
    let n = dist.len();
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Structure(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(Error::Structure(format!("non-finite entry at ({i},{j})")));
        }
    }
    Ok(validate_with(n, |i, j| dist[i][j], Execution::Parallel))
}

pub(crate) fn validate_with<F>(n: usize, d: F, exec: Execution) -> ValidationReport
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    let rows = exec::map_range(exec, n, |a| {
        let mut out = Vec::new();
        let daa = d(a, a);
        if daa.abs() > TOL_METRIC {
            out.push(Violation::Diagonal { i: a, value: daa });
        }
        for b in 0..n {
            if b == a {
                continue;
            }
            let dab = d(a, b);
            if dab < -TOL_METRIC {
                out.push(Violation::Negative { i: a, j: b, value: dab });
            }
            if b > a {
                let dba = d(b, a);
                if (dab - dba).abs() > TOL_METRIC {
                    out.push(Violation::Asymmetric { i: a, j: b, dij: dab, dji: dba });
                }
                if dab.abs() <= TOL_METRIC {
                    out.push(Violation::ZeroOffDiagonal { i: a, j: b });
                }
                for c in (0..n).filter(|&c| c != a && c != b) {
                    let excess = dab - (d(a, c) + d(c, b));
                    if excess > TOL_METRIC {
                        out.push(Violation::Triangle { a, b, c, excess });
                    }
                }
            }
        }
        out
    });
    ValidationReport { violations: rows.into_iter().flatten().collect() }
}

/// A point of the segment-plus-sector model: a segment on the negative real
/// axis glued at the origin to a convex planar sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentSectorPoint {
    /// Coordinate `s <= 0` on the segment.
    Segment(f64),
    /// Planar point of the sector at distance `radius` from the origin.
    Sector { x: f64, y: f64, radius: f64 },
}

impl SegmentSectorPoint {
    fn distance(&self, other: &Self) -> f64 {
        use SegmentSectorPoint::*;
        match (*self, *other) {
            (Segment(s), Segment(t)) => (s - t).abs(),
            (Segment(s), Sector { radius, .. }) | (Sector { radius, .. }, Segment(s)) => radius - s,
            (Sector { x: x1, y: y1, .. }, Sector { x: x2, y: y2, .. }) => (x1 - x2).hypot(y1 - y2),
        }
    }
}

/// Distance storage.
#[derive(Clone, Debug)]
pub enum Metric {
    Dense {
        n: usize,
        data: Vec<f64>,
    },
    /// Closed-form length metric of a segment glued to a convex sector.
    SegmentSector(Vec<SegmentSectorPoint>),
}

impl Metric {
    pub fn len(&self) -> usize {
        match self {
            Metric::Dense { n, .. } => *n,
            Metric::SegmentSector(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            Metric::Dense { n, data } => data[i * n + j],
            Metric::SegmentSector(p) => {
                if i == j {
                    0.0
                } else {
                    p[i].distance(&p[j])
                }
            }
        }
    }
}

/// A finite metric measure space: exact distances plus nonnegative reference
/// weights. Points with zero weight must be flagged auxiliary.
#[derive(Clone, Debug)]
pub struct FiniteMetricMeasureSpace {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    labels: Vec<Option<String>>,
    coords: Option<Vec<[f64; 2]>>,
    weights: Vec<f64>,
    auxiliary: Vec<bool>,
    metric: Metric,
    graph_neighbors: Option<Vec<Vec<usize>>>,
    derived_neighbors: OnceLock<Vec<Vec<usize>>>,
    grid_step: Option<f64>,
}

impl FiniteMetricMeasureSpace {
    /// Builds a space from a dense distance matrix, validating the metric.
    pub fn from_dense(ids: Vec<String>, weights: Vec<f64>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let report = validate_metric(&dist)?;
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidMetric(format!("{} violation(s), first: {v:?}", report.violations.len())));
        }
        let n = dist.len();
        let data = dist.into_iter().flatten().collect();
        Self::from_metric(ids, weights, Metric::Dense { n, data })
    }

    /// Builds a space from an already-validated metric.
    pub fn from_metric(ids: Vec<String>, weights: Vec<f64>, metric: Metric) -> Result<Self> {
        let n = metric.len();
        if ids.len() != n || weights.len() != n {
            return Err(Error::Structure(format!("{} ids and {} weights for {n} points", ids.len(), weights.len())));
        }
        if n == 0 {
            return Err(Error::Structure("empty space".into()));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Structure(format!("duplicate point id `{id}`")));
            }
        }
        let mut space = FiniteMetricMeasureSpace {
            ids,
            index,
            labels: vec![None; n],
            coords: None,
            weights: Vec::new(),
            auxiliary: vec![false; n],
            metric,
            graph_neighbors: None,
            derived_neighbors: OnceLock::new(),
            grid_step: None,
        };
        space.set_weights(weights)?;
        Ok(space)
    }

    fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::Structure(format!(
                    "reference weight of `{}` must be finite and nonnegative, got {w}",
                    self.ids[i]
                )));
            }
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::Structure("reference weights are all zero".into()));
        }
        self.weights = weights;
        self.check_auxiliary()
    }

    fn check_auxiliary(&self) -> Result<()> {
        for i in 0..self.len() {
            if self.weights[i] == 0.0 && !self.auxiliary[i] {
                return Err(Error::Structure(format!(
                    "point `{}` has zero reference weight but is not flagged auxiliary",
                    self.ids[i]
                )));
            }
        }
        Ok(())
    }

    /// Flags auxiliary points (zero-weight geometry points).
    pub fn with_auxiliary(mut self, auxiliary: Vec<bool>) -> Result<Self> {
        if auxiliary.len() != self.len() {
            return Err(Error::Structure("auxiliary flags length mismatch".into()));
        }
        self.auxiliary = auxiliary;
        self.check_auxiliary()?;
        Ok(self)
    }

    /// Replaces the reference weights; zero weights must already be flagged auxiliary.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Structure("weights length mismatch".into()));
        }
        self.set_weights(weights)?;
        Ok(self)
    }

    /// Sets weights and marks every zero-weight point auxiliary.
    pub fn with_weights_auxiliary_zeros(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Structure("weights length mismatch".into()));
        }
        self.auxiliary = weights.iter().map(|&w| w == 0.0).collect();
        self.set_weights(weights)?;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<Option<String>>) -> Self {
        assert_eq!(labels.len(), self.len());
        self.labels = labels;
        self
    }

    pub fn with_coords(mut self, coords: Vec<[f64; 2]>) -> Self {
        assert_eq!(coords.len(), self.len());
        self.coords = Some(coords);
        self
    }

    pub(crate) fn with_graph(mut self, neighbors: Vec<Vec<usize>>, grid_step: Option<f64>) -> Self {
        self.graph_neighbors = Some(neighbors);
        self.grid_step = grid_step;
        self
    }

    pub fn with_grid_step(mut self, h: f64) -> Self {
        self.grid_step = Some(h);
        self
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels[i].as_deref()
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.dist(i, j)
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_auxiliary(&self, i: usize) -> bool {
        self.auxiliary[i]
    }

    pub fn auxiliary_flags(&self) -> &[bool] {
        &self.auxiliary
    }

    /// Grid spacing of the discretization, when the space came from one.
    pub fn grid_step(&self) -> Option<f64> {
        self.grid_step
    }

    pub fn has_graph(&self) -> bool {
        self.graph_neighbors.is_some()
    }

    /// Points admitted to measure-side checks: auxiliary points are excluded
    /// unless `include_auxiliary` is set.
    pub fn measure_points(&self, include_auxiliary: bool) -> Vec<usize> {
        (0..self.len()).filter(|&i| include_auxiliary || !self.auxiliary[i]).collect()
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::PointOutOfRange(i))
        }
    }

    /// One-step neighbours used to build discrete geodesics: the graph
    /// adjacency when the space was built from a graph, otherwise pairs with no
    /// third point metrically between them.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        if let Some(g) = &self.graph_neighbors {
            return &g[i];
        }
        &self.derived_neighbors.get_or_init(|| derive_neighbors(self))[i]
    }

    /// Closed ball `{p : d(x,p) <= r}` (with metric tolerance), ascending indices.
    pub fn closed_ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.dist(x, p) <= r + TOL_METRIC).collect()
    }

    /// Open ball `{p : d(x,p) < r}` (with metric tolerance).
    pub fn open_ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.dist(x, p) < r - TOL_METRIC).collect()
    }

    /// Dense rows of the distance matrix.
    pub fn dense_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| (0..self.len()).map(|j| self.dist(i, j)).collect()).collect()
    }

    /// Re-runs the metric axiom check over the stored metric.
    pub fn validate(&self) -> ValidationReport {
        validate_with(self.len(), |i, j| self.dist(i, j), Execution::Parallel)
    }

    /// Sub-space on `points` (order kept) with the induced metric and weights.
    pub fn subspace(&self, points: &[usize]) -> Result<Self> {
        for &p in points {
            self.check_index(p)?;
        }
        let k = points.len();
        let mut data = Vec::with_capacity(k * k);
        for &a in points {
            for &b in points {
                data.push(self.dist(a, b));
            }
        }
        let ids = points.iter().map(|&p| self.ids[p].clone()).collect();
        let weights: Vec<f64> = points.iter().map(|&p| self.weights[p]).collect();
        let mut sub = FiniteMetricMeasureSpace::from_metric(
            ids,
            weights.iter().map(|&w| if w > 0.0 { w } else { 1.0 }).collect(),
            Metric::Dense { n: k, data },
        )?;
        sub.auxiliary = points.iter().map(|&p| self.auxiliary[p]).collect();
        sub.weights = weights;
        sub.labels = points.iter().map(|&p| self.labels[p].clone()).collect();
        sub.coords = self.coords.as_ref().map(|c| points.iter().map(|&p| c[p]).collect());
        Ok(sub)
    }
}

fn derive_neighbors(space: &FiniteMetricMeasureSpace) -> Vec<Vec<usize>> {
    let n = space.len();
    exec::map_range(Execution::Parallel, n, |p| {
        (0..n)
            .filter(|&q| {
                q != p
                    && !(0..n).any(|r| {
                        r != p && r != q && space.dist(p, r) + space.dist(r, q) <= space.dist(p, q) + TOL_METRIC
                    })
            })
            .collect()
    })
}

/// Metric graph: vertices, positive-length edges, and a subdivision step.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    pub vertices: Vec<String>,
    pub coords: Option<Vec<[f64; 2]>>,
    pub edges: Vec<(usize, usize, f64)>,
    pub h: f64,
}

impl MetricGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize, f64)>, h: f64) -> Result<Self> {
        let g = MetricGraph { vertices, coords: None, edges, h };
        g.check()?;
        Ok(g)
    }

    pub fn with_coords(mut self, coords: Vec<[f64; 2]>) -> Result<Self> {
        if coords.len() != self.vertices.len() {
            return Err(Error::Structure("vertex coordinates length mismatch".into()));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    /// Graph without subdivision (step equal to the shortest edge).
    pub fn unsubdivided(vertices: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let h = edges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        let h = if h.is_finite() { h } else { 1.0 };
        Self::new(vertices, edges, h)
    }

    fn check(&self) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::Structure("graph has no vertices".into()));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Parameter(format!("step h must be positive, got {}", self.h)));
        }
        for &(u, v, len) in &self.edges {
            if u >= self.vertices.len() || v >= self.vertices.len() {
                return Err(Error::Structure(format!("edge ({u},{v}) references a missing vertex")));
            }
            if u == v {
                return Err(Error::Structure(format!("self-loop at vertex {u}")));
            }
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::Structure(format!("edge ({u},{v}) has non-positive length {len}")));
            }
            if self.h > len * (1.0 + 1e-12) {
                return Err(Error::Parameter(format!("step h = {} exceeds edge length {len}", self.h)));
            }
        }
        Ok(())
    }
}

/// Subdivides every edge at spacing at most `h` and takes the shortest-path
/// metric. Reference weights are each point's share of total edge length.
pub fn from_metric_graph(graph: &MetricGraph) -> Result<FiniteMetricMeasureSpace> {
    from_metric_graph_with(graph, Execution::Parallel)
}

pub fn from_metric_graph_with(graph: &MetricGraph, exec: Execution) -> Result<FiniteMetricMeasureSpace> {
    graph.check()?;
    let mut ids = graph.vertices.clone();
    let mut weights = vec![0.0; ids.len()];
    let mut coords = graph.coords.clone();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ids.len()];
    let mut max_piece: f64 = 0.0;
    for (e, &(u, v, len)) in graph.edges.iter().enumerate() {
        let pieces = ((len / graph.h) - 1e-9).ceil().max(1.0) as usize;
        let piece = len / pieces as f64;
        max_piece = max_piece.max(piece);
        let mut prev = u;
        for k in 1..=pieces {
            let next = if k == pieces {
                v
            } else {
                let id = format!("{}~{}#{}", graph.vertices[u], graph.vertices[v], k);
                let id = if ids.contains(&id) { format!("{id}@{e}") } else { id };
                ids.push(id);
                weights.push(0.0);
                adj.push(Vec::new());
                if let Some(c) = coords.as_mut() {
                    let t = k as f64 / pieces as f64;
                    let (a, b) = (c[u], c[v]);
                    c.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                }
                ids.len() - 1
            };
            adj[prev].push((next, piece));
            adj[next].push((prev, piece));
            weights[prev] += piece / 2.0;
            weights[next] += piece / 2.0;
            prev = next;
        }
    }
    let n = ids.len();
    let rows = exec::map_range(exec, n, |s| dijkstra(&adj, s));
    if rows.iter().any(|r| r.iter().any(|d| !d.is_finite())) {
        return Err(Error::Disconnected);
    }
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    let mut neighbors: Vec<Vec<usize>> = adj
        .iter()
        .map(|a| {
            let mut v: Vec<usize> = a.iter().map(|&(q, _)| q).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    neighbors.shrink_to_fit();
    // isolated vertex in a one-vertex graph carries unit weight
    if n == 1 {
        weights[0] = 1.0;
    }
    let aux: Vec<bool> = weights.iter().map(|&w| w == 0.0).collect();
    let mut space = FiniteMetricMeasureSpace::from_metric(
        ids,
        weights.iter().map(|&w| if w > 0.0 { w } else { 1.0 }).collect(),
        Metric::Dense { n, data },
    )?
    .with_graph(neighbors, Some(if max_piece > 0.0 { max_piece } else { graph.h }));
    space.auxiliary = aux;
    space.weights = weights;
    if let Some(c) = coords {
        space.coords = Some(c);
    }
    Ok(space)
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths over a weighted adjacency list.
pub(crate) fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem(0.0, source));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    dist
}

/// Shortest-path metric of an explicit weighted graph on `ids`, keeping the
/// graph adjacency for geodesic construction.
pub fn from_weighted_graph(
    ids: Vec<String>,
    weights: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
    grid_step: Option<f64>,
    exec: Execution,
) -> Result<FiniteMetricMeasureSpace> {
    let n = ids.len();
    if adj.len() != n {
        return Err(Error::Structure("adjacency length mismatch".into()));
    }
    let rows = exec::map_range(exec, n, |s| dijkstra(&adj, s));
    if rows.iter().any(|r| r.iter().any(|d| !d.is_finite())) {
        return Err(Error::Disconnected);
    }
    let data = rows.into_iter().flatten().collect();
    let neighbors = adj
        .iter()
        .map(|a| {
            let mut v: Vec<usize> = a.iter().map(|&(q, _)| q).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let space = FiniteMetricMeasureSpace::from_metric(ids, vec![1.0; n], Metric::Dense { n, data })?
        .with_graph(neighbors, grid_step)
        .with_weights_auxiliary_zeros(weights)?;
    Ok(space)
}

/// Probability (or sub-probability) weights over the points of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
    exact: Option<Vec<Rational>>,
    ac: bool,
}

impl DiscreteMeasure {
    pub fn from_weights(space: &FiniteMetricMeasureSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::Structure(format!(
                "measure has {} weights, space has {} points",
                weights.len(),
                space.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Structure(format!("measure weight {w} is negative or non-finite")));
        }
        let ac = is_ac(space, &weights);
        Ok(DiscreteMeasure { weights, exact: None, ac })
    }

    pub fn from_exact(space: &FiniteMetricMeasureSpace, exact: Vec<Rational>) -> Result<Self> {
        if exact.len() != space.len() {
            return Err(Error::Structure("exact weights length mismatch".into()));
        }
        if exact.iter().any(|w| w.is_negative()) {
            return Err(Error::Structure("negative exact weight".into()));
        }
        let weights: Vec<f64> = exact.iter().map(rational::to_f64).collect();
        let ac = is_ac(space, &weights);
        Ok(DiscreteMeasure { weights, exact: Some(exact), ac })
    }

    pub fn dirac(space: &FiniteMetricMeasureSpace, point: usize) -> Result<Self> {
        space.check_index(point)?;
        let mut exact = vec![Rational::zero(); space.len()];
        exact[point] = rational::from_int(1);
        Self::from_exact(space, exact)
    }

    /// Uniform probability on the listed points (exact weights `1/k`).
    pub fn uniform_on(space: &FiniteMetricMeasureSpace, points: &[usize]) -> Result<Self> {
        Self::weighted_on(space, &points.iter().map(|&p| (p, rational::from_int(1))).collect::<Vec<_>>())
    }

    /// Normalized measure with the given relative exact masses.
    pub fn weighted_on(space: &FiniteMetricMeasureSpace, masses: &[(usize, Rational)]) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Structure("empty support".into()));
        }
        let total = rational::sum(masses.iter().map(|(_, m)| m));
        if !total.is_positive() {
            return Err(Error::Structure("support has zero total mass".into()));
        }
        let mut exact = vec![Rational::zero(); space.len()];
        for (p, m) in masses {
            space.check_index(*p)?;
            exact[*p] += m / &total;
        }
        Self::from_exact(space, exact)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    /// Exact weights, converting binary floats exactly when none were given.
    pub fn exact_or_converted(&self) -> Vec<Rational> {
        match &self.exact {
            Some(e) => e.clone(),
            None => self.weights.iter().map(|&w| rational::from_f64(w)).collect(),
        }
    }

    /// Points of positive mass, ascending.
    pub fn support(&self) -> Vec<usize> {
        match &self.exact {
            Some(e) => (0..e.len()).filter(|&i| e[i].is_positive()).collect(),
            None => (0..self.weights.len()).filter(|&i| self.weights[i] > 0.0).collect(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        match &self.exact {
            Some(e) => {
                let s = rational::sum(e);
                (rational::to_f64(&s) - 1.0).abs() <= TOL_PROBABILITY
            }
            None => (self.total_mass() - 1.0).abs() <= TOL_PROBABILITY,
        }
    }

    /// Whether the weights vanish wherever the reference weights vanish.
    pub fn is_absolutely_continuous(&self) -> bool {
        self.ac
    }

    /// Restriction of this measure to `subset`, renormalized.
    pub fn restrict_normalized(&self, space: &FiniteMetricMeasureSpace, subset: &[usize]) -> Result<Self> {
        let e = self.exact_or_converted();
        let masses: Vec<(usize, Rational)> = subset.iter().map(|&p| (p, e[p].clone())).collect();
        Self::weighted_on(space, &masses).map_err(|_| Error::DegenerateRestriction)
    }
}

fn is_ac(space: &FiniteMetricMeasureSpace, weights: &[f64]) -> bool {
    weights.iter().zip(space.weights()).all(|(&w, &r)| w == 0.0 || r > 0.0)
}

/// `m|subset / m(subset)`; exact in rational arithmetic.
pub fn restrict_and_normalize(space: &FiniteMetricMeasureSpace, subset: &[usize]) -> Result<DiscreteMeasure> {
    let mut seen = vec![false; space.len()];
    let mut masses = Vec::new();
    for &p in subset {
        space.check_index(p)?;
        if !seen[p] {
            seen[p] = true;
            masses.push((p, rational::from_f64(space.weight(p))));
        }
    }
    let total = rational::sum(masses.iter().map(|(_, m)| m));
    if !total.is_positive() {
        return Err(Error::DegenerateRestriction);
    }
    DiscreteMeasure::weighted_on(space, &masses)
}

/// True iff the supports are disjoint.
pub fn mutually_singular(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> bool {
    debug_assert_eq!(mu.len(), nu.len());
    let a = mu.support();
    let b = nu.support();
    let mut i = 0;
    let mut j = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Equal => return false,
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
        }
    }
    true
}
