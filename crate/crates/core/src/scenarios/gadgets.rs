//! Transport gadgets on the tripod: measure pairs whose optimal plans split
//! mass across two branches, and the checks that confirm it.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational;
use crate::space::{restrict_and_normalize, DiscreteMeasure, FiniteMetricMeasureSpace};
use crate::transport::{
    check_c_monotone, enumerate_optimal_vertices, is_induced_by_map, product_plan, solve_w2, CycleWitness, TOL_MASS,
};

use super::{build_tripod, tripod_point};

pub const GADGET_NAMES: [&str; 3] = ["mild1d_branch", "micro1d_two_diracs", "mcp_annulus"];

/// Vertex cap used when assessing a gadget.
const MAX_VERTICES: usize = 100_000;
/// Cap on candidate maps examined for branch witnesses.
const MAX_MAPS: usize = 1 << 16;
const TOL_LOCATE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phenomenon {
    NoMongeMap,
    ProductPlanOptimal,
    NoMongeMapToAcTarget,
}

impl fmt::Display for Phenomenon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phenomenon::NoMongeMap => "no-monge-map",
            Phenomenon::ProductPlanOptimal => "product-plan-optimal",
            Phenomenon::NoMongeMapToAcTarget => "no-monge-map-to-ac-target",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Gadget {
    pub name: &'static str,
    pub space: FiniteMetricMeasureSpace,
    pub mu0: DiscreteMeasure,
    pub mu1: DiscreteMeasure,
    pub phenomenon: Phenomenon,
}

fn tripod_points(space: &FiniteMetricMeasureSpace, leg: char, arclengths: &[f64]) -> Result<Vec<usize>> {
    arclengths.iter().map(|&s| tripod_point(space, leg, s)).collect()
}

/// Uniform thirds on leg `A` at `1/4, 1/2, 3/4` sent to `½δ_B + ½δ_C`.
pub fn tripod_branch_instance() -> Result<(FiniteMetricMeasureSpace, DiscreteMeasure, DiscreteMeasure)> {
    let space = build_tripod([1.0, 1.0, 1.0], 0.25)?;
    let mu0 = DiscreteMeasure::uniform_on(&space, &tripod_points(&space, 'A', &[0.25, 0.5, 0.75])?)?;
    let leaves = [space.index_of("B")?, space.index_of("C")?];
    let mu1 = DiscreteMeasure::uniform_on(&space, &leaves)?;
    Ok((space, mu0, mu1))
}

/// Builds one of [`GADGET_NAMES`] on the tripod with legs `1` and step `1/8`.
pub fn build_gadget(name: &str) -> Result<Gadget> {
    let space = build_tripod([1.0, 1.0, 1.0], 0.125)?;
    let (name, mu0, mu1, phenomenon) = match name {
        "mild1d_branch" => {
            let src = tripod_points(&space, 'C', &[0.25, 0.375, 0.5, 0.625])?;
            let range = [0.5, 0.625, 0.75];
            let mut dst = tripod_points(&space, 'A', &range)?;
            dst.extend(tripod_points(&space, 'B', &range)?);
            let mu0 = DiscreteMeasure::uniform_on(&space, &src)?;
            let mu1 = DiscreteMeasure::uniform_on(&space, &dst)?;
            ("mild1d_branch", mu0, mu1, Phenomenon::NoMongeMap)
        }
        "micro1d_two_diracs" => {
            let z = tripod_point(&space, 'C', 0.5)?;
            let mu0 = restrict_and_normalize(&space, &space.open_ball(z, 0.25))?;
            let mu1 = DiscreteMeasure::uniform_on(&space, &[space.index_of("A")?, space.index_of("B")?])?;
            ("micro1d_two_diracs", mu0, mu1, Phenomenon::ProductPlanOptimal)
        }
        "mcp_annulus" => {
            let (y, z) = (tripod_point(&space, 'A', 0.75)?, tripod_point(&space, 'B', 0.75)?);
            let r0 = 0.2;
            let mut target = space.open_ball(y, r0);
            target.extend(space.open_ball(z, r0));
            let x = tripod_point(&space, 'C', 0.5)?;
            let mu0 = restrict_and_normalize(&space, &space.open_ball(x, r0))?;
            let mu1 = restrict_and_normalize(&space, &target)?;
            ("mcp_annulus", mu0, mu1, Phenomenon::NoMongeMapToAcTarget)
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(Gadget { name, space, mu0, mu1, phenomenon })
}

/// A map-like candidate support and the 2-cycle that breaks its monotonicity.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchWitness {
    /// `(x, T(x))` over the source support.
    pub map: Vec<(usize, usize)>,
    pub witness: Option<CycleWitness>,
}

/// Enumerates maps `T` from the source support into the target support that
/// send two sources `x₁ ≠ x₂` to distinct targets equidistant from every
/// source, and some source between `x₁` and `x₂` elsewhere. Each candidate
/// support is checked for a violating 2-cycle.
pub fn branch_witnesses(
    space: &FiniteMetricMeasureSpace,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
) -> Result<Vec<BranchWitness>> {
    let src = mu0.support();
    let dst = mu1.support();
    let total = (dst.len() as f64).powi(src.len() as i32);
    if total > MAX_MAPS as f64 {
        return Err(Error::SizeLimit(format!("{total} candidate maps exceed {MAX_MAPS}")));
    }
    let tied =
        |a: usize, b: usize| a != b && src.iter().all(|&x| (space.dist(x, a) - space.dist(x, b)).abs() <= TOL_LOCATE);
    let between =
        |p: usize, q: usize, r: usize| (space.dist(p, q) + space.dist(q, r) - space.dist(p, r)).abs() <= TOL_LOCATE;
    let structured = |t: &[usize]| {
        (0..src.len()).any(|a| {
            (0..src.len()).any(|b| {
                a != b
                    && tied(t[a], t[b])
                    && (0..src.len())
                        .any(|c| c != a && c != b && between(src[a], src[c], src[b]) && t[c] != t[a] && t[c] != t[b])
            })
        })
    };
    let mut out = Vec::new();
    let mut choice = vec![0usize; src.len()];
    loop {
        let t: Vec<usize> = choice.iter().map(|&k| dst[k]).collect();
        if structured(&t) {
            let map: Vec<(usize, usize)> = src.iter().copied().zip(t).collect();
            let witness = check_c_monotone(space, &map, 2).witness;
            out.push(BranchWitness { map, witness });
        }
        let mut k = src.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < dst.len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub claim: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GadgetAssessment {
    pub gadget: String,
    pub phenomenon: Phenomenon,
    /// Exact optimal cost as `p/q`.
    pub w2_squared: String,
    pub vertices: usize,
    pub findings: Vec<Finding>,
}

impl GadgetAssessment {
    pub fn holds(&self) -> bool {
        self.findings.iter().all(|f| f.holds)
    }
}

/// Runs the checks attached to the gadget's phenomenon.
pub fn assess_gadget(g: &Gadget) -> Result<GadgetAssessment> {
    let sol = solve_w2(&g.space, &g.mu0, &g.mu1)?;
    let cost = sol.w2_squared_exact().cloned().unwrap_or_else(|| rational::from_f64(sol.w2_squared()));
    let vertices = enumerate_optimal_vertices(&g.space, &g.mu0, &g.mu1, MAX_VERTICES)?;
    let mut findings = Vec::new();
    let maps = vertices.vertices.iter().filter(|v| is_induced_by_map(v, TOL_MASS).is_map()).count();
    let no_map = Finding {
        claim: "no optimal vertex is induced by a map".into(),
        holds: maps == 0 && !vertices.truncated && !is_induced_by_map(&sol.plan, TOL_MASS).is_map(),
        detail: format!("{maps} of {} vertices are map-induced", vertices.vertices.len()),
    };
    match g.phenomenon {
        Phenomenon::NoMongeMap => {
            findings.push(no_map);
            let candidates = branch_witnesses(&g.space, &g.mu0, &g.mu1)?;
            let broken = candidates.iter().filter(|c| c.witness.as_ref().is_some_and(|w| w.verify(&g.space))).count();
            findings.push(Finding {
                claim: "every branch-splitting map candidate has a violating 2-cycle".into(),
                holds: !candidates.is_empty() && broken == candidates.len(),
                detail: format!("{broken} of {} candidates", candidates.len()),
            });
        }
        Phenomenon::ProductPlanOptimal => {
            let product = product_plan(&g.space, &g.mu0, &g.mu1)?;
            let pc = product.exact_cost().cloned().unwrap_or_else(|| rational::from_f64(product.cost()));
            findings.push(Finding {
                claim: "product plan cost equals the optimum exactly".into(),
                holds: pc == cost,
                detail: format!("product {} vs optimum {}", rational::format(&pc), rational::format(&cost)),
            });
            findings.push(Finding {
                claim: "optimal plan is not unique".into(),
                holds: vertices.vertices.len() > 1,
                detail: format!("{} optimal vertices", vertices.vertices.len()),
            });
        }
        Phenomenon::NoMongeMapToAcTarget => {
            findings.push(Finding {
                claim: "target is absolutely continuous".into(),
                holds: g.mu1.is_absolutely_continuous(),
                detail: format!("{} target atoms", g.mu1.support().len()),
            });
            findings.push(no_map);
        }
    }
    Ok(GadgetAssessment {
        gadget: g.name.to_string(),
        phenomenon: g.phenomenon,
        w2_squared: rational::format(&cost),
        vertices: vertices.vertices.len(),
        findings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_gadgets_hold() {
        for name in GADGET_NAMES {
            let g = build_gadget(name).unwrap();
            let a = assess_gadget(&g).unwrap();
            assert!(a.holds(), "{name}: {:?}", a.findings);
        }
        assert!(matches!(build_gadget("nope"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn branch_instance_cost() {
        let (s, a, b) = tripod_branch_instance().unwrap();
        let sol = solve_w2(&s, &a, &b).unwrap();
        assert_eq!(sol.w2_squared_exact().unwrap(), &rational::ratio(6875, 3000));
        // only two targets, so no candidate sends a middle source elsewhere
        assert!(branch_witnesses(&s, &a, &b).unwrap().is_empty());
    }
}
