//! Lifting couplings to measures on discrete geodesics.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geodesy::{enumerate_geodesics, evaluate, GeodesicPath};
use crate::rational::Rational;
use crate::space::FiniteMetricMeasureSpace;

use super::TransportPlan;

/// Geodesics examined per coupled pair.
const GEODESICS_PER_PAIR: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionPolicy {
    /// The lexicographically smallest geodesic for every pair.
    Canonical,
    /// One dynamical plan per combination of geodesic choices, up to `max_plans`.
    EnumerateAll { max_plans: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGeodesic {
    pub path: GeodesicPath,
    pub mass: f64,
    pub exact_mass: Option<Rational>,
}

/// A finitely supported measure on geodesics.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicalPlan {
    pub paths: Vec<WeightedGeodesic>,
    sources: Vec<usize>,
    targets: Vec<usize>,
}

impl DynamicalPlan {
    /// `(e₀, e₁)#π` over the original plan's rows and columns.
    pub fn induced_coupling(&self, space: &FiniteMetricMeasureSpace) -> Result<TransportPlan> {
        let n = self.targets.len();
        let row = |p: usize| self.sources.iter().position(|&s| s == p).unwrap();
        let col = |p: usize| self.targets.iter().position(|&t| t == p).unwrap();
        if self.paths.iter().all(|w| w.exact_mass.is_some()) {
            let mut exact = vec![Rational::zero(); self.sources.len() * n];
            for w in &self.paths {
                exact[row(w.path.start()) * n + col(w.path.end())] += w.exact_mass.as_ref().unwrap();
            }
            TransportPlan::from_exact(space, self.sources.clone(), self.targets.clone(), exact)
        } else {
            let mut coupling = vec![0.0; self.sources.len() * n];
            for w in &self.paths {
                coupling[row(w.path.start()) * n + col(w.path.end())] += w.mass;
            }
            TransportPlan::from_coupling(space, self.sources.clone(), self.targets.clone(), coupling)
        }
    }

    /// `(e_t)#π` as weights over all points of the space.
    pub fn marginal_at(&self, space: &FiniteMetricMeasureSpace, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; space.len()];
        for w in &self.paths {
            out[evaluate(&w.path, t)?] += w.mass;
        }
        Ok(out)
    }

    pub fn total_mass(&self) -> f64 {
        self.paths.iter().map(|w| w.mass).sum()
    }
}

/// Attaches geodesics to every cell of `plan` carrying mass.
pub fn lift_to_dynamical(
    space: &FiniteMetricMeasureSpace,
    plan: &TransportPlan,
    policy: SelectionPolicy,
) -> Result<Vec<DynamicalPlan>> {
    let n = plan.cols();
    let exact = plan.exact_coupling();
    let mut cells = Vec::new();
    for (i, j) in plan.support_cells() {
        let (x, y) = (plan.sources()[i], plan.targets()[j]);
        let set = enumerate_geodesics(space, x, y, GEODESICS_PER_PAIR)?;
        if set.paths.is_empty() {
            return Err(Error::NoGeodesic(x, y));
        }
        let mass = plan.mass(i, j);
        let exact_mass = exact.map(|e| e[i * n + j].clone());
        cells.push((set.paths, mass, exact_mass));
    }
    let build = |choice: &[usize]| DynamicalPlan {
        paths: cells
            .iter()
            .zip(choice)
            .map(|((paths, mass, exact_mass), &k)| WeightedGeodesic {
                path: paths[k].clone(),
                mass: *mass,
                exact_mass: exact_mass.clone(),
            })
            .collect(),
        sources: plan.sources().to_vec(),
        targets: plan.targets().to_vec(),
    };
    match policy {
        SelectionPolicy::Canonical => Ok(vec![build(&vec![0; cells.len()])]),
        SelectionPolicy::EnumerateAll { max_plans } => {
            let mut out = Vec::new();
            let mut choice = vec![0usize; cells.len()];
            // odometer over the cartesian product of choices
            'outer: loop {
                if out.len() >= max_plans {
                    break;
                }
                out.push(build(&choice));
                for k in (0..cells.len()).rev() {
                    choice[k] += 1;
                    if choice[k] < cells[k].0.len() {
                        continue 'outer;
                    }
                    choice[k] = 0;
                }
                break;
            }
            Ok(out)
        }
    }
}
