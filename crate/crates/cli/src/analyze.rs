use std::path::{Path, PathBuf};

use clap::Args;
use mmsot_core::curvature::{bg_ratio_curve, polar_decompose, BgVerdict, ComparisonProfile, RatioCurve};
use mmsot_core::exec::Execution;
use mmsot_core::io;
use mmsot_core::tangents::{
    gh_distance_exact, tangent_line_test, DefectCurve, MAX_GH_POINTS, THETA_LINE, THETA_OBSTRUCT,
};
use mmsot_core::{Error, FiniteMetricMeasureSpace};
use serde_json::json;

use crate::svg::Plot;
use crate::{in_file, parse_number, read_file, CliError, CliResult, Output};

pub(crate) const DEFAULT_SCHEDULE: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

#[derive(Debug, Args)]
pub struct TangentArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Basepoint id.
    #[arg(long)]
    pub point: String,
    /// Increasing scale factors, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub schedule: Option<Vec<f64>>,
    /// Radius of the rescaled ball.
    #[arg(long, default_value_t = 1.0, value_parser = parse_number)]
    pub radius: f64,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Basepoint id.
    #[arg(long)]
    pub point: String,
    /// `linear`, `constant:V` or `power:C:E`.
    #[arg(long, default_value = "linear")]
    pub profile: String,
    /// Profile domain; defaults to the largest distance from the point.
    #[arg(long, value_parser = parse_number)]
    pub domain: Option<f64>,
    /// Radii, comma separated; defaults to grid-step multiples inside the domain.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub radii: Option<Vec<f64>>,
    /// Width of the polar distance bins; defaults to the grid step.
    #[arg(long, value_parser = parse_number)]
    pub bin_width: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GhArgs {
    /// First space file.
    #[arg(long)]
    pub x: PathBuf,
    /// Second space file.
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, default_value_t = MAX_GH_POINTS)]
    pub max_points: usize,
}

fn load_space(path: &Path) -> CliResult<FiniteMetricMeasureSpace> {
    in_file(path, io::read_space_json(&read_file(path)?))
}

pub(crate) fn defect_plot(curve: &DefectCurve, title: &str) -> String {
    let pts = curve.points.iter().filter(|p| !p.degenerate).map(|p| (p.lambda, p.epsilon_hat)).collect();
    Plot::new(title, "scale λ", "interval defect ε̂")
        .series("ε̂(λ)", pts)
        .hline(THETA_LINE, "line threshold")
        .hline(THETA_OBSTRUCT, "obstruction threshold")
        .log_x()
        .render()
}

pub(crate) fn ratio_plot(curves: &[(&str, &RatioCurve)], title: &str) -> String {
    curves
        .iter()
        .fold(Plot::new(title, "radius r", "m(B(x, r)) / w(r)"), |plot, (name, c)| {
            plot.series(name, c.points.iter().map(|p| (p.r, p.ratio)).collect())
        })
        .render()
}

pub(crate) fn defect_lines(curve: &DefectCurve) -> Vec<String> {
    let mut lines: Vec<String> = curve
        .points
        .iter()
        .map(|p| format!("λ = {}: ε̂ = {:.6} ({})", p.lambda, p.epsilon_hat, io::point_status(p)))
        .collect();
    let degenerate: Vec<String> = curve.points.iter().filter(|p| p.degenerate).map(|p| p.lambda.to_string()).collect();
    if degenerate.is_empty() {
        lines.push(format!("verdict: {}", curve.verdict));
    } else {
        lines.push(format!("verdict: {} (degenerate ball at λ = {})", curve.verdict, degenerate.join(", ")));
    }
    lines
}

pub fn tangent(args: &TangentArgs, out: &mut Output) -> CliResult<Vec<String>> {
    let space = load_space(&args.space)?;
    let x = space.index_of(&args.point)?;
    let schedule = args.schedule.clone().unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec());
    let curve = tangent_line_test(&space, x, &schedule, args.radius, Execution::Parallel)?;
    out.write("defect.csv", &io::write_defect_csv(&curve)?)?;
    out.plot("defect.svg", || defect_plot(&curve, &format!("interval defect at {}", args.point)))?;
    Ok(defect_lines(&curve))
}

fn parse_profile(spec: &str, domain: f64) -> CliResult<ComparisonProfile> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| parse_number(s).map_err(|e| CliError::Usage(format!("profile `{spec}`: {e}")));
    match parts.as_slice() {
        ["linear"] => Ok(ComparisonProfile::linear(domain)),
        ["constant", v] => Ok(ComparisonProfile::constant(num(v)?, domain)),
        ["power", c, e] => Ok(ComparisonProfile::power(num(c)?, num(e)?, domain)),
        _ => Err(CliError::Usage(format!("unknown profile `{spec}`; expected linear, constant:V or power:C:E"))),
    }
}

/// Grid-step multiples strictly inside `(0, domain)`, or the distinct
/// distances from `x` when the space has no grid step.
pub(crate) fn default_radii(space: &FiniteMetricMeasureSpace, x: usize, domain: f64) -> Vec<f64> {
    match space.grid_step() {
        Some(h) => (1..).map(|k| k as f64 * h).take_while(|&r| r < domain - 1e-12).collect(),
        None => {
            let mut d: Vec<f64> =
                (0..space.len()).map(|p| space.dist(x, p)).filter(|&r| r > 0.0 && r < domain).collect();
            d.sort_by(f64::total_cmp);
            d.dedup();
            d
        }
    }
}

pub(crate) fn eccentricity(space: &FiniteMetricMeasureSpace, x: usize) -> f64 {
    (0..space.len()).map(|p| space.dist(x, p)).fold(0.0, f64::max)
}

pub fn curvature(args: &CurvatureArgs, out: &mut Output) -> CliResult<Vec<String>> {
    let space = load_space(&args.space)?;
    let x = space.index_of(&args.point)?;
    let domain = args.domain.unwrap_or_else(|| eccentricity(&space, x));
    let profile = parse_profile(&args.profile, domain)?;
    let radii = args.radii.clone().unwrap_or_else(|| default_radii(&space, x, domain));
    if radii.is_empty() {
        return Err(Error::Parameter("no radii inside the profile domain".into()).into());
    }
    let curve = bg_ratio_curve(&space, x, &profile, &radii)?;
    out.write("ratio.csv", &io::write_ratio_csv(&curve)?)?;
    let width = args.bin_width.or(space.grid_step()).unwrap_or(domain / 16.0);
    let polar = polar_decompose(&space, x, width)?;
    let mut csv = String::from("lo,hi,points,mass,density\n");
    for b in &polar.bins {
        csv.push_str(&format!("{},{},{},{},{}\n", b.lo, b.hi, b.points.len(), b.mass, b.density));
    }
    out.write("polar.csv", &csv)?;
    out.plot("ratio.svg", || {
        ratio_plot(&[(args.profile.as_str(), &curve)], &format!("ball-mass ratio at {}", args.point))
    })?;
    let mut lines = vec![format!("radii: {} in (0, {domain})", radii.len())];
    lines.push(match (curve.verdict, curve.first_violation) {
        (BgVerdict::Fails, Some(k)) => format!("verdict: fails (ratio rises at r = {})", curve.points[k].r),
        (v, _) => format!("verdict: {}", serde_json::to_value(v).unwrap().as_str().unwrap_or_default()),
    });
    lines.push(format!("polar bins: {} of width {width}, total mass {:.12}", polar.bins.len(), polar.total_mass()));
    Ok(lines)
}

pub fn gh(args: &GhArgs, out: &mut Output) -> CliResult<Vec<String>> {
    let x = load_space(&args.x)?;
    let y = load_space(&args.y)?;
    let (value, corr) = gh_distance_exact(&x, &y, args.max_points)?;
    let pairs: Vec<[&str; 2]> = corr.pairs.iter().map(|&(a, b)| [x.id(a), y.id(b)]).collect();
    let doc = json!({ "gh": value, "distortion": corr.distortion, "correspondence": pairs });
    out.write("gh.json", &(serde_json::to_string_pretty(&doc).map_err(Error::from)? + "\n"))?;
    let mut lines = vec![format!("gh = {value}"), format!("distortion = {}", corr.distortion)];
    lines.push(format!(
        "correspondence: {}",
        pairs.iter().map(|[a, b]| format!("({a}, {b})")).collect::<Vec<_>>().join(", ")
    ));
    Ok(lines)
}
