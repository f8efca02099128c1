//! Text formats: space and measure JSON, plan and report CSVs, certificate and
//! geodesic JSON.
//!
//! Exact rationals are written as `"p/q"` strings. Every writer is
//! deterministic, so re-running a command reproduces its files byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::curvature::{RatioCurve, TwoBallBin};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rational::{self, Rational};
use crate::space::{from_weighted_graph, DiscreteMeasure, FiniteMetricMeasureSpace};
use crate::tangents::{DefectCurve, DefectPoint, THETA_LINE, THETA_OBSTRUCT};
use crate::transport::{DynamicalPlan, TransportPlan, W2Solution};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    points: Vec<PointRecord>,
    #[serde(default)]
    edges: Option<Vec<(PointRef, PointRef, f64)>>,
    #[serde(default)]
    dist: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    grid_step: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<[f64; 2]>,
}

/// An edge endpoint given by id or by position in `points`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PointRef {
    Index(usize),
    Id(String),
}

fn json_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
    Error::Parse(format!("line {}, column {}: {msg}", e.line(), e.column()))
}

/// 1-based line of the first occurrence of `needle`, if any.
fn line_of(text: &str, needle: &str) -> Option<usize> {
    text.find(needle).map(|at| text[..at].matches('\n').count() + 1)
}

fn point_error(text: &str, id: &str, msg: String) -> Error {
    match line_of(text, &format!("\"{id}\"")) {
        Some(line) => Error::Parse(format!("line {line}: point `{id}`: {msg}")),
        None => Error::Parse(format!("point `{id}`: {msg}")),
    }
}

/// Parses the space format `{"points": [...], "edges" | "dist": ...}`.
pub fn read_space_json(text: &str) -> Result<FiniteMetricMeasureSpace> {
    let file: SpaceFile = serde_json::from_str(text).map_err(json_error)?;
    let n = file.points.len();
    if n == 0 {
        return Err(Error::Parse("space has no points".into()));
    }
    for p in &file.points {
        if !p.weight.is_finite() || p.weight < 0.0 {
            return Err(point_error(text, &p.id, format!("weight {} must be nonnegative", p.weight)));
        }
    }
    let ids: Vec<String> = file.points.iter().map(|p| p.id.clone()).collect();
    let weights: Vec<f64> = file.points.iter().map(|p| p.weight).collect();
    let space = match (file.edges, file.dist) {
        (Some(edges), None) => {
            let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
            let resolve = |r: &PointRef, k: usize| -> Result<usize> {
                match r {
                    PointRef::Index(i) if *i < n => Ok(*i),
                    PointRef::Index(i) => Err(Error::Parse(format!("edge {k}: point index {i} out of range"))),
                    PointRef::Id(s) => index
                        .get(s.as_str())
                        .copied()
                        .ok_or_else(|| Error::Parse(format!("edge {k}: unknown point `{s}`"))),
                }
            };
            let mut adj = vec![Vec::new(); n];
            for (k, (u, v, len)) in edges.iter().enumerate() {
                let (u, v) = (resolve(u, k)?, resolve(v, k)?);
                if !len.is_finite() || *len <= 0.0 {
                    return Err(Error::Parse(format!("edge {k}: length {len} must be positive")));
                }
                adj[u].push((v, *len));
                adj[v].push((u, *len));
            }
            from_weighted_graph(ids, weights, adj, file.grid_step, Execution::Parallel)?
        }
        (None, Some(dist)) => {
            if dist.len() != n || dist.iter().any(|r| r.len() != n) {
                return Err(Error::Parse(format!("dist must be a {n}×{n} matrix")));
            }
            for (i, row) in dist.iter().enumerate() {
                if let Some(j) = row.iter().position(|d| !d.is_finite() || *d < 0.0) {
                    return Err(Error::Parse(format!("dist[{i}][{j}] = {} must be nonnegative", row[j])));
                }
            }
            let s =
                FiniteMetricMeasureSpace::from_dense(ids, vec![1.0; n], dist)?.with_weights_auxiliary_zeros(weights)?;
            match file.grid_step {
                Some(h) => s.with_grid_step(h),
                None => s,
            }
        }
        _ => return Err(Error::Parse("exactly one of \"edges\" and \"dist\" is required".into())),
    };
    let space = space.with_labels(file.points.iter().map(|p| p.label.clone()).collect());
    if file.points.iter().all(|p| p.coords.is_some()) {
        Ok(space.with_coords(file.points.iter().map(|p| p.coords.unwrap()).collect()))
    } else {
        Ok(space)
    }
}

/// Writes the space, as graph edges when it carries a graph and as a dense
/// matrix otherwise. One point, edge or row per line.
pub fn write_space_json(space: &FiniteMetricMeasureSpace) -> String {
    let n = space.len();
    let mut out = String::from("{\n  \"points\": [\n");
    for i in 0..n {
        let rec = PointRecord {
            id: space.id(i).to_string(),
            label: space.label(i).map(String::from),
            weight: space.weight(i),
            coords: space.coords().map(|c| c[i]),
        };
        let sep = if i + 1 < n { "," } else { "" };
        out.push_str(&format!("    {}{sep}\n", serde_json::to_string(&rec).unwrap()));
    }
    out.push_str("  ],\n");
    if space.has_graph() {
        let mut edges = Vec::new();
        for p in 0..n {
            for &q in space.neighbors(p) {
                if p < q {
                    edges.push(serde_json::to_string(&(space.id(p), space.id(q), space.dist(p, q))).unwrap());
                }
            }
        }
        out.push_str("  \"edges\": [\n");
        for (k, e) in edges.iter().enumerate() {
            let sep = if k + 1 < edges.len() { "," } else { "" };
            out.push_str(&format!("    {e}{sep}\n"));
        }
        out.push_str("  ]");
    } else {
        out.push_str("  \"dist\": [\n");
        for p in 0..n {
            let row: Vec<f64> = (0..n).map(|q| space.dist(p, q)).collect();
            let sep = if p + 1 < n { "," } else { "" };
            out.push_str(&format!("    {}{sep}\n", serde_json::to_string(&row).unwrap()));
        }
        out.push_str("  ]");
    }
    if let Some(h) = space.grid_step() {
        out.push_str(&format!(",\n  \"grid_step\": {}", serde_json::to_string(&h).unwrap()));
    }
    out.push_str("\n}\n");
    out
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    weights: BTreeMap<String, Value>,
}

/// Parses `{"weights": {"id": 0.25 | "1/4", ...}}`; unlisted points get zero.
/// The measure is exact when every value is a string.
pub fn read_measure_json(space: &FiniteMetricMeasureSpace, text: &str) -> Result<DiscreteMeasure> {
    let file: MeasureFile = serde_json::from_str(text).map_err(json_error)?;
    let all_exact = file.weights.values().all(Value::is_string);
    let mut exact = vec![Rational::from_integer(0.into()); space.len()];
    let mut weights = vec![0.0; space.len()];
    for (id, v) in &file.weights {
        let p = space.index_of(id)?;
        let w = match v {
            Value::String(s) => rational::parse(s).map_err(|e| point_error(text, id, e.to_string()))?,
            Value::Number(x) => rational::from_f64(x.as_f64().unwrap_or(f64::NAN)),
            _ => return Err(point_error(text, id, "weight must be a number or a \"p/q\" string".into())),
        };
        if !rational::is_nonnegative(&w) {
            return Err(point_error(text, id, format!("weight {} is negative", rational::format(&w))));
        }
        weights[p] = match v {
            Value::Number(x) => x.as_f64().unwrap_or(f64::NAN),
            _ => rational::to_f64(&w),
        };
        exact[p] = w;
    }
    if all_exact {
        DiscreteMeasure::from_exact(space, exact)
    } else {
        DiscreteMeasure::from_weights(space, weights)
    }
}

pub fn write_measure_json(space: &FiniteMetricMeasureSpace, mu: &DiscreteMeasure) -> String {
    let weights: BTreeMap<&str, Value> = mu
        .support()
        .into_iter()
        .map(|p| {
            let v = match mu.exact() {
                Some(e) => Value::String(rational::format(&e[p])),
                None => serde_json::json!(mu.weight(p)),
            };
            (space.id(p), v)
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "weights": weights })).unwrap() + "\n"
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse(format!("line {}: {e}", p.line())),
        None => Error::Parse(e.to_string()),
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Rows `source_id,target_id,mass,squared_cost` over the cells with mass.
pub fn write_plan_csv(space: &FiniteMetricMeasureSpace, plan: &TransportPlan) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source_id", "target_id", "mass", "squared_cost"]).map_err(csv_error)?;
    let n = plan.cols();
    for (i, j) in plan.support_cells() {
        let (x, y) = (plan.sources()[i], plan.targets()[j]);
        let d = rational::from_f64(space.dist(x, y));
        let (mass, cost) = match plan.exact_coupling() {
            Some(e) => (rational::format(&e[i * n + j]), rational::format(&(&d * &d))),
            None => (plan.mass(i, j).to_string(), (space.dist(x, y) * space.dist(x, y)).to_string()),
        };
        w.write_record([space.id(x), space.id(y), &mass, &cost]).map_err(csv_error)?;
    }
    into_string(w)
}

/// Reads a plan CSV back; exact when every mass is written as a rational.
pub fn read_plan_csv(space: &FiniteMetricMeasureSpace, text: &str) -> Result<TransportPlan> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().collect::<Vec<_>>() != ["source_id", "target_id", "mass", "squared_cost"] {
        return Err(Error::Parse("line 1: expected header source_id,target_id,mass,squared_cost".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let x = space.index_of(&rec[0])?;
        let y = space.index_of(&rec[1])?;
        let exact = !rec[2].contains(['.', 'e', 'E']);
        let m = rational::parse(&rec[2]).map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        if !rational::is_nonnegative(&m) {
            return Err(Error::Parse(format!("line {line}: negative mass")));
        }
        rows.push((x, y, m, exact));
    }
    let mut sources: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let mut targets: Vec<usize> = rows.iter().map(|r| r.1).collect();
    sources.sort_unstable();
    sources.dedup();
    targets.sort_unstable();
    targets.dedup();
    let n = targets.len();
    let cell = |x: usize, y: usize| sources.binary_search(&x).unwrap() * n + targets.binary_search(&y).unwrap();
    if rows.iter().all(|r| r.3) {
        let mut e = vec![Rational::from_integer(0.into()); sources.len() * n];
        for (x, y, m, _) in rows {
            e[cell(x, y)] += m;
        }
        TransportPlan::from_exact(space, sources.clone(), targets.clone(), e)
    } else {
        let mut c = vec![0.0; sources.len() * n];
        for (x, y, m, _) in rows {
            c[cell(x, y)] += rational::to_f64(&m);
        }
        TransportPlan::from_coupling(space, sources.clone(), targets.clone(), c)
    }
}

/// Certificate block: optimal value and dual potentials keyed by point id.
pub fn write_certificate_json(space: &FiniteMetricMeasureSpace, sol: &W2Solution) -> String {
    let plan = &sol.plan;
    let keyed = |pts: &[usize], f: &dyn Fn(usize) -> Value| -> BTreeMap<String, Value> {
        pts.iter().enumerate().map(|(k, &p)| (space.id(p).to_string(), f(k))).collect()
    };
    let mut doc = serde_json::Map::new();
    doc.insert("w2".into(), serde_json::json!(sol.w2));
    doc.insert("w2_squared".into(), serde_json::json!(sol.w2_squared()));
    if let Some(c) = sol.w2_squared_exact() {
        doc.insert("w2_squared_exact".into(), Value::String(rational::format(c)));
    }
    if let Some(cert) = plan.certificate() {
        doc.insert("exact".into(), Value::Bool(cert.is_exact()));
        doc.insert("dual_margin".into(), serde_json::json!(cert.dual_margin));
        doc.insert("slackness".into(), serde_json::json!(cert.slackness));
        doc.insert("certifies".into(), Value::Bool(cert.certifies()));
        let (u, v): (Box<dyn Fn(usize) -> Value>, Box<dyn Fn(usize) -> Value>) = match (&cert.exact_u, &cert.exact_v) {
            (Some(eu), Some(ev)) => (
                Box::new(move |k| Value::String(rational::format(&eu[k]))),
                Box::new(move |k| Value::String(rational::format(&ev[k]))),
            ),
            _ => (Box::new(|k| serde_json::json!(cert.u[k])), Box::new(|k| serde_json::json!(cert.v[k]))),
        };
        doc.insert("u".into(), serde_json::to_value(keyed(plan.sources(), &*u)).unwrap());
        doc.insert("v".into(), serde_json::to_value(keyed(plan.targets(), &*v)).unwrap());
    }
    serde_json::to_string_pretty(&Value::Object(doc)).unwrap() + "\n"
}

#[derive(Serialize)]
struct GeodesicRecord<'a> {
    source: &'a str,
    target: &'a str,
    mass: Value,
    length: f64,
    path: Vec<&'a str>,
}

/// Sidecar listing each lifted geodesic as an ordered id list.
pub fn write_geodesics_json(space: &FiniteMetricMeasureSpace, plan: &DynamicalPlan) -> String {
    let records: Vec<GeodesicRecord> = plan
        .paths
        .iter()
        .map(|w| GeodesicRecord {
            source: space.id(w.path.start()),
            target: space.id(w.path.end()),
            mass: match &w.exact_mass {
                Some(m) => Value::String(rational::format(m)),
                None => serde_json::json!(w.mass),
            },
            length: w.path.length(),
            path: w.path.points().iter().map(|&p| space.id(p)).collect(),
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "geodesics": records })).unwrap() + "\n"
}

/// Rows `r,ball_mass,w(r),ratio`.
pub fn write_ratio_csv(curve: &RatioCurve) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r", "ball_mass", "w(r)", "ratio"]).map_err(csv_error)?;
    for p in &curve.points {
        w.write_record([p.r, p.ball_mass, p.w, p.ratio].map(|v| v.to_string())).map_err(csv_error)?;
    }
    into_string(w)
}

/// Rows `bin_lo,bin_hi,annulus_mass,ball_y_mass,ball_z_mass`.
pub fn write_two_ball_csv(bins: &[TwoBallBin]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_lo", "bin_hi", "annulus_mass", "ball_y_mass", "ball_z_mass"]).map_err(csv_error)?;
    for b in bins {
        w.write_record([b.lo, b.hi, b.annulus_mass, b.ball_y_mass, b.ball_z_mass].map(|v| v.to_string()))
            .map_err(csv_error)?;
    }
    into_string(w)
}

/// Per-scale status: unusable points are marked, usable ones are placed
/// against the two thresholds.
pub fn point_status(p: &DefectPoint) -> &'static str {
    if p.degenerate {
        "degenerate"
    } else if !p.resolvable {
        "unresolved"
    } else if p.epsilon_hat <= THETA_LINE {
        "line"
    } else if p.epsilon_hat >= THETA_OBSTRUCT {
        "obstructed"
    } else {
        "between"
    }
}

/// Rows `lambda,epsilon_hat,verdict`, the verdict being [`point_status`].
pub fn write_defect_csv(curve: &DefectCurve) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "epsilon_hat", "verdict"]).map_err(csv_error)?;
    for p in &curve.points {
        w.write_record([p.lambda.to_string(), p.epsilon_hat.to_string(), point_status(p).to_string()])
            .map_err(csv_error)?;
    }
    into_string(w)
}
