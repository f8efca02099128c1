use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mmsot_core::io;
use mmsot_core::transport::{
    is_induced_by_map, lift_to_dynamical, solve_w2_with, ExactMode, MapTest, SelectionPolicy, SolveOptions, TOL_MASS,
};

use crate::{exact_and_decimal, in_file, read_file, CliResult, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Exact {
    Auto,
    Always,
    Never,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Space file (JSON).
    #[arg(long)]
    pub space: PathBuf,
    /// Source measure file (JSON).
    #[arg(long)]
    pub mu0: PathBuf,
    /// Target measure file (JSON).
    #[arg(long)]
    pub mu1: PathBuf,
    /// When to solve in rational arithmetic.
    #[arg(long, value_enum, default_value_t = Exact::Auto)]
    pub exact: Exact,
    /// Skip lifting the plan to geodesics.
    #[arg(long)]
    pub no_geodesics: bool,
}

pub fn run(args: &SolveArgs, out: &mut Output) -> CliResult<Vec<String>> {
    let space = in_file(&args.space, io::read_space_json(&read_file(&args.space)?))?;
    let mu0 = in_file(&args.mu0, io::read_measure_json(&space, &read_file(&args.mu0)?))?;
    let mu1 = in_file(&args.mu1, io::read_measure_json(&space, &read_file(&args.mu1)?))?;
    let exact = match args.exact {
        Exact::Auto => ExactMode::Auto,
        Exact::Always => ExactMode::Always,
        Exact::Never => ExactMode::Never,
    };
    let sol = solve_w2_with(&space, &mu0, &mu1, SolveOptions { exact, max_iterations: None })?;

    let mut lines = vec![format!("w2 = {}", sol.w2)];
    lines.push(match sol.w2_squared_exact() {
        Some(c) => format!("W2^2 = {}", exact_and_decimal(c)),
        None => format!("W2^2 = {}", sol.w2_squared()),
    });
    lines.push(match is_induced_by_map(&sol.plan, TOL_MASS) {
        MapTest::Map(_) => "plan: induced by a map".to_string(),
        MapTest::Split { source, targets } => {
            format!("plan: not induced by a map (`{}` splits over {} targets)", space.id(source), targets.len())
        }
    });
    if let Some(c) = sol.plan.certificate() {
        lines.push(format!(
            "certificate: {} duals, margin {:.3e}, slackness {:.3e}, {}",
            if c.is_exact() { "exact" } else { "float" },
            c.dual_margin,
            c.slackness,
            if c.certifies() { "certifies optimality" } else { "does not certify" }
        ));
    }

    out.write("plan.csv", &io::write_plan_csv(&space, &sol.plan)?)?;
    out.write("certificate.json", &io::write_certificate_json(&space, &sol))?;
    if !args.no_geodesics {
        let lifted = lift_to_dynamical(&space, &sol.plan, SelectionPolicy::Canonical)?;
        out.write("geodesics.json", &io::write_geodesics_json(&space, &lifted[0]))?;
    }
    Ok(lines)
}
