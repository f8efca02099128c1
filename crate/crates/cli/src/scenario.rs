use clap::Args;
use mmsot_core::curvature::{bg_ratio_curve, BgVerdict, ComparisonProfile, RatioCurve};
use mmsot_core::exec::Execution;
use mmsot_core::geodesy::find_branching;
use mmsot_core::io;
use mmsot_core::rational;
use mmsot_core::scenarios::{
    ac_multiplicity_instance, assess_gadget, build_cusp, build_fan, build_gadget, concentration_mass, cusp_refinement,
    random, tripod_branch_instance, ScenarioKind, ScenarioSpec,
};
use mmsot_core::tangents::{tangent_line_test, tangent_refinement_test, DefectCurve, RefinementLevel, TangentVerdict};
use mmsot_core::transport::{
    enumerate_optimal_vertices, is_induced_by_map, plan_uniqueness, solve_w2, split_plan, Ball, MapTest, TOL_MASS,
};
use mmsot_core::{Error, FiniteMetricMeasureSpace};

use crate::analyze::{default_radii, defect_lines, defect_plot, eccentricity, ratio_plot, DEFAULT_SCHEDULE};
use crate::report::table;
use crate::svg::Plot;
use crate::{exact_and_decimal, parse_number, CliError, CliResult, Finding, Output, Report};

/// Largest space written out as `space.json`.
const MAX_EXPORT_POINTS: usize = 2000;
/// Cap on enumerated optimal vertices.
const MAX_VERTICES: usize = 1000;
/// Default number of cusp refinement levels.
const CUSP_LEVELS: u32 = 4;
/// Random pairs in the cusp distance check.
const CUSP_PAIRS: usize = 100;
/// Atoms in the fan transport instance.
const FAN_ATOMS: usize = 20;

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// interval, circle, polyline, tripod, fan or cusp.
    pub name: String,
    /// Tripod transport gadget: mild1d_branch, micro1d_two_diracs or mcp_annulus.
    #[arg(long)]
    pub gadget: Option<String>,
    /// Fan word length, or the number of cusp refinement levels.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Subdivision step (grid pitch for the cusp).
    #[arg(long, visible_alias = "grid", value_parser = parse_number)]
    pub h: Option<f64>,
    /// Builder lengths, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub lengths: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: &ScenarioArgs, out: &mut Output) -> CliResult<Vec<String>> {
    let kind: ScenarioKind = args.name.parse()?;
    if args.gadget.is_some() && kind != ScenarioKind::Tripod {
        return Err(CliError::Usage(format!("--gadget applies to the tripod, not the {kind}")));
    }
    let mut spec = ScenarioSpec::default_for(kind);
    if let Some(h) = args.h {
        spec.h = h;
    }
    if let Some(l) = &args.lengths {
        spec.lengths = l.clone();
    }
    if kind == ScenarioKind::Fan {
        spec.depth = args.depth.or(spec.depth);
    }
    spec.seed = args.seed;
    spec.validate()?;

    let mut report = Report::new(format!("scenario {kind}"));
    report.param("name", kind);
    if !spec.lengths.is_empty() {
        report.param("lengths", format!("{:?}", spec.lengths));
    }
    report.param("h", spec.h);
    report.param("seed", spec.seed);

    let (space, notes) = match kind {
        ScenarioKind::Interval | ScenarioKind::Circle => smooth(&spec, &mut report, out)?,
        ScenarioKind::Polyline => polyline(&spec, &mut report, out)?,
        ScenarioKind::Tripod => match &args.gadget {
            Some(name) => gadget(name, &mut report, out)?,
            None => tripod(&spec, &mut report, out)?,
        },
        ScenarioKind::Fan => fan(&spec, &mut report, out)?,
        ScenarioKind::Cusp => cusp(&spec, args.depth.unwrap_or(CUSP_LEVELS), &mut report, out)?,
    };

    let manifest = spec.manifest(&space, notes);
    out.write("manifest.json", &(serde_json::to_string_pretty(&manifest).map_err(Error::from)? + "\n"))?;
    if space.len() <= MAX_EXPORT_POINTS {
        out.write("space.json", &io::write_space_json(&space))?;
    }
    out.write("report.md", &report.render())?;
    Ok(report.summary())
}

fn verdict_name(v: BgVerdict) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn ratio_rows(curve: &RatioCurve) -> Vec<Vec<String>> {
    curve
        .points
        .iter()
        .map(|p| vec![p.r.to_string(), format!("{:.6}", p.ball_mass), format!("{:.6}", p.ratio)])
        .collect()
}

fn defect_section(curve: &DefectCurve) -> String {
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| vec![p.lambda.to_string(), format!("{:.6}", p.epsilon_hat), io::point_status(p).to_string()])
        .collect();
    table(&["λ", "ε̂", "status"], &rows)
}

/// Ratio curves for the linear and constant profiles plus the tangent test.
fn smooth(
    spec: &ScenarioSpec,
    report: &mut Report,
    out: &mut Output,
) -> CliResult<(FiniteMetricMeasureSpace, Vec<String>)> {
    let space = spec.build()?;
    let x = space.index_of(&spec.basepoint_id())?;
    let reach = eccentricity(&space, x);
    let radii = default_radii(&space, x, reach);
    let linear = bg_ratio_curve(&space, x, &ComparisonProfile::linear(reach), &radii)?;
    let constant = bg_ratio_curve(&space, x, &ComparisonProfile::constant(1.0, reach), &radii)?;
    report.param("basepoint", space.id(x));
    report.param("radii", format!("{} multiples of h below {reach}", radii.len()));
    report.finding(Finding::new(
        "ball-mass ratio against w(r) = r is nonincreasing",
        linear.verdict == BgVerdict::Nonincreasing,
        verdict_name(linear.verdict),
    ));
    report.finding(Finding::new(
        "ball-mass ratio against a constant profile is not",
        constant.verdict == BgVerdict::Fails,
        match constant.first_violation {
            Some(k) => format!("rises at r = {}", constant.points[k].r),
            None => verdict_name(constant.verdict),
        },
    ));
    out.write("ratio.csv", &io::write_ratio_csv(&linear)?)?;
    out.plot("ratio.svg", || {
        ratio_plot(&[("w(r) = r", &linear), ("w(r) = 1", &constant)], &format!("{} at {}", spec.kind, space.id(x)))
    })?;
    report.section("Ratio curve, w(r) = r", table(&["r", "m(B(x, r))", "ratio"], &ratio_rows(&linear)));

    let schedule: Vec<f64> = DEFAULT_SCHEDULE.iter().copied().filter(|&l| l * spec.h <= 0.1).collect();
    let curve = tangent_line_test(&space, x, &schedule, 1.0, Execution::Parallel)?;
    report.finding(Finding::new(
        "the basepoint looks like a line at small scales",
        curve.verdict == TangentVerdict::LineTangentConsistent,
        curve.verdict.to_string(),
    ));
    out.write("defect.csv", &io::write_defect_csv(&curve)?)?;
    report.section("Interval defect", defect_section(&curve));
    Ok((space, Vec::new()))
}

fn polyline(
    spec: &ScenarioSpec,
    report: &mut Report,
    out: &mut Output,
) -> CliResult<(FiniteMetricMeasureSpace, Vec<String>)> {
    let space = spec.build()?;
    let x = space.index_of(&spec.basepoint_id())?;
    let curve = tangent_line_test(&space, x, &DEFAULT_SCHEDULE, 1.0, Execution::Parallel)?;
    let reached =
        curve.points.iter().find(|p| p.resolvable && !p.degenerate && p.epsilon_hat <= 0.05).map(|p| p.lambda);
    report.param("basepoint", space.id(x));
    report.finding(Finding::new(
        "the corner is line-tangent consistent",
        curve.verdict == TangentVerdict::LineTangentConsistent,
        match reached {
            Some(l) => format!("{}; ε̂ ≤ 0.05 from λ = {l}", curve.verdict),
            None => curve.verdict.to_string(),
        },
    ));
    out.write("defect.csv", &io::write_defect_csv(&curve)?)?;
    out.plot("defect.svg", || defect_plot(&curve, &format!("interval defect at {}", space.id(x))))?;
    report.section("Interval defect", defect_section(&curve));
    Ok((space, Vec::new()))
}

fn tripod(
    spec: &ScenarioSpec,
    report: &mut Report,
    out: &mut Output,
) -> CliResult<(FiniteMetricMeasureSpace, Vec<String>)> {
    let space = spec.build()?;
    let hub = space.index_of("o")?;
    let shortest = spec.lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let branching = find_branching(&space, hub, shortest)?;
    report.finding(Finding::new(
        "geodesics from the hub branch",
        branching.is_some(),
        match &branching {
            Some(b) => format!(
                "{} → {} and {} → {} share {} points, separating at {}",
                space.id(b.alpha.start()),
                space.id(b.alpha.end()),
                space.id(b.beta.start()),
                space.id(b.beta.end()),
                b.shared_prefix,
                space.id(b.branch_point())
            ),
            None => "no branching pair found".into(),
        },
    ));

    let schedule: Vec<f64> = DEFAULT_SCHEDULE.iter().copied().filter(|&l| l * spec.h <= 0.1).collect();
    let curve = tangent_line_test(&space, hub, &schedule, 1.0, Execution::Parallel)?;
    report.finding(Finding::new(
        "the hub has no line tangent",
        curve.verdict == TangentVerdict::Obstructed,
        curve.verdict.to_string(),
    ));
    out.write("defect.csv", &io::write_defect_csv(&curve)?)?;
    out.plot("defect.svg", || defect_plot(&curve, "interval defect at the hub"))?;
    report.section("Interval defect at the hub", defect_section(&curve));

    // the branch instance lives on its own unit tripod with step 1/4
    let (bspace, mu0, mu1) = tripod_branch_instance()?;
    let sol = solve_w2(&bspace, &mu0, &mu1)?;
    let cost = sol.w2_squared_exact().map(exact_and_decimal).unwrap_or_else(|| sol.w2_squared().to_string());
    let verts = enumerate_optimal_vertices(&bspace, &mu0, &mu1, MAX_VERTICES)?;
    let maps = verts.vertices.iter().filter(|v| is_induced_by_map(v, TOL_MASS).is_map()).count();
    report.finding(Finding::new(
        "leg A to ½δ_B + ½δ_C has no optimal map",
        maps == 0 && !verts.truncated,
        format!("W2² = {cost}; {maps} of {} optimal vertices map-induced", verts.vertices.len()),
    ));
    let leaf = bspace.index_of("B")?;
    let split = split_plan(&bspace, &sol.plan, Ball { center: leaf, radius: 0.5 })?;
    report.finding(Finding::new(
        "splitting at leaf B keeps both parts optimal",
        split.report.all_hold(),
        format!(
            "marginal gap {:.1e}, optimality gaps {:.1e} and {:.1e}",
            split.report.first_marginal_gap, split.report.first_optimality_gap, split.report.second_optimality_gap
        ),
    ));
    out.write("plan.csv", &io::write_plan_csv(&bspace, &sol.plan)?)?;
    Ok((space, vec!["plan.csv holds the branch instance on the unit tripod with step 1/4".into()]))
}

fn gadget(name: &str, report: &mut Report, out: &mut Output) -> CliResult<(FiniteMetricMeasureSpace, Vec<String>)> {
    let g = build_gadget(name)?;
    let a = assess_gadget(&g)?;
    report.param("gadget", g.name);
    report.param("phenomenon", a.phenomenon);
    report.param("W2²", &a.w2_squared);
    report.param("optimal vertices", a.vertices);
    for f in &a.findings {
        report.finding(Finding::new(f.claim.clone(), f.holds, f.detail.clone()));
    }
    let sol = solve_w2(&g.space, &g.mu0, &g.mu1)?;
    out.write("mu0.json", &io::write_measure_json(&g.space, &g.mu0))?;
    out.write("mu1.json", &io::write_measure_json(&g.space, &g.mu1))?;
    out.write("plan.csv", &io::write_plan_csv(&g.space, &sol.plan)?)?;
    Ok((g.space, vec![format!("gadget {} on the unit tripod with step 1/8", g.name)]))
}

fn fan(
    spec: &ScenarioSpec,
    report: &mut Report,
    out: &mut Output,
) -> CliResult<(FiniteMetricMeasureSpace, Vec<String>)> {
    let depth = spec.depth.unwrap_or(mmsot_core::scenarios::DEFAULT_DEPTH);
    let fan = build_fan(depth, spec.h)?;
    report.param("depth", depth);
    let total = rational::sum(fan.atoms.iter().map(|a| &a.weight));
    report.finding(Finding::new(
        "fan reference weights sum to one",
        total == rational::from_int(1),
        format!("Σ = {}", rational::format(&total)),
    ));
    report.finding(Finding::new(
        "fan radii are pairwise distinct",
        fan.radii_distinct(),
        format!("{} atoms", fan.atoms.len()),
    ));
    let (half, delta) = (rational::ratio(1, 2), rational::ratio(3, 10));
    let conc = concentration_mass(depth, &half, &delta);
    report.finding(Finding::new(
        "Bernoulli(1/2) mass within 3/10 of the mean is at least 19/20",
        conc >= rational::ratio(19, 20),
        exact_and_decimal(&conc),
    ));

    let level = depth / 2;
    let count = FAN_ATOMS.min(fan.atoms.iter().filter(|a| a.ones == level).count()).min(fan.segment.len() - 1);
    let mu0 = fan.segment_measure(count)?;
    let atoms = fan.level_atoms(level, count)?;
    let mu1 = fan.fan_measure_on(&atoms)?;
    let sol = solve_w2(&fan.space, &mu0, &mu1)?;
    let unique = plan_uniqueness(&fan.space, &mu0, &mu1)?.is_unique();
    let mut pairs = match is_induced_by_map(&sol.plan, TOL_MASS) {
        MapTest::Map(pairs) => pairs,
        MapTest::Split { .. } => Vec::new(),
    };
    pairs.sort_by(|a, b| fan.radial_coordinate(a.0).total_cmp(&fan.radial_coordinate(b.0)));
    let monotone = pairs.windows(2).all(|w| fan.radial_coordinate(w[0].1) < fan.radial_coordinate(w[1].1));
    report.finding(Finding::new(
        format!("segment to level {level} has a unique optimal map, monotone in radius"),
        unique && pairs.len() == count && monotone,
        format!("{count} atoms; unique: {unique}, map: {}, monotone: {monotone}", pairs.len() == count),
    ));
    out.write("plan.csv", &io::write_plan_csv(&fan.space, &sol.plan)?)?;
    let pts: Vec<(f64, f64)> =
        pairs.iter().map(|&(s, t)| (-fan.radial_coordinate(s), fan.radial_coordinate(t))).collect();
    out.plot("fan_map.svg", || {
        Plot::new("optimal map from the segment into the fan", "distance from the origin", "fan radius")
            .series("T", pts)
            .render()
    })?;
    Ok((fan.space, vec![format!("plan.csv sends {count} segment points to level {level}")]))
}

fn cusp(
    spec: &ScenarioSpec,
    levels: u32,
    report: &mut Report,
    out: &mut Output,
) -> CliResult<(FiniteMetricMeasureSpace, Vec<String>)> {
    let grid = build_cusp(spec.h)?;
    let h = grid.h();
    report.param("refinement levels", levels);
    let coords = grid.space.coords().ok_or_else(|| Error::Structure("cusp grid without coordinates".into()))?;
    let pairs = random::pairs(&mut random::rng(spec.seed), grid.space.len(), CUSP_PAIRS);
    let (mut worst, mut lowest) = (0f64, f64::INFINITY);
    for (p, q) in pairs {
        let ambient = (coords[p][0] - coords[q][0]).abs().max((coords[p][1] - coords[q][1]).abs());
        let excess = (grid.space.dist(p, q) - ambient) / h;
        worst = worst.max(excess);
        lowest = lowest.min(excess);
    }
    // float noise below zero prints as -0
    let lowest = if lowest > -1e-9 { lowest.max(0.0) } else { lowest };
    report.finding(Finding::new(
        "grid distances exceed the ambient sup distance by at most 4h",
        worst <= 4.0 && lowest >= 0.0,
        format!("excess in [{lowest:.3}, {worst:.3}]·h over {CUSP_PAIRS} pairs"),
    ));

    match ac_multiplicity_instance(&grid) {
        Ok((mu0, mu1)) => {
            let verts = enumerate_optimal_vertices(&grid.space, &mu0, &mu1, MAX_VERTICES)?;
            let maps = verts.vertices.iter().filter(|v| is_induced_by_map(v, TOL_MASS).is_map()).count();
            report.finding(Finding::new(
                "uniform measures admit several optimal maps",
                verts.vertices.len() >= 2 && maps == verts.vertices.len(),
                format!("{} optimal vertices, {maps} map-induced", verts.vertices.len()),
            ));
        }
        Err(Error::Parameter(why)) => report.finding(Finding::new(
            "uniform measures admit several optimal maps",
            false,
            format!("not built: {why}"),
        )),
        Err(e) => return Err(e.into()),
    }

    let ladder = cusp_refinement(spec.h, levels)?;
    let steps: Vec<RefinementLevel> =
        ladder.iter().map(|(l, g)| RefinementLevel { lambda: *l, space: &g.space, basepoint: g.origin() }).collect();
    let curve = tangent_refinement_test(&steps, 1.0, Execution::Parallel)?;
    let eps: Vec<f64> = curve.points.iter().map(|p| p.epsilon_hat).collect();
    report.finding(Finding::new(
        "interval defect at the tip decreases under refinement",
        eps.len() >= 2 && eps.windows(2).all(|w| w[1] < w[0]),
        defect_lines(&curve).join("; "),
    ));
    out.write("defect.csv", &io::write_defect_csv(&curve)?)?;
    out.plot("defect.svg", || defect_plot(&curve, "interval defect at the cusp tip"))?;
    report.section("Interval defect under refinement", defect_section(&curve));
    Ok((grid.space, vec![format!("level k uses pitch h/4^k inside a window of half-width 2/λ_k, λ_k = 4·2^k")]))
}
