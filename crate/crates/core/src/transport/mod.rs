//! Exact quadratic Kantorovich problems between discrete measures.
//!
//! Plans are stored on the supports of the two marginals: row `i` is the
//! `i`-th support point of the source measure, column `j` the `j`-th support
//! point of the target. Costs are `d²` evaluated from the space's metric;
//! whenever rational arithmetic is used, each distance is converted exactly
//! from its binary value before squaring.

mod dynamical;
mod monotone;
pub(crate) mod simplex;
mod split;
mod vertices;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::rational::{self, Rational};
use crate::space::{DiscreteMeasure, FiniteMetricMeasureSpace};

use simplex::Problem;

pub use dynamical::{lift_to_dynamical, DynamicalPlan, SelectionPolicy, WeightedGeodesic};
pub use monotone::{check_c_monotone, default_max_cycle, CycleWitness, MonotonicityCertificate, Verdict};
pub use split::{split_plan, Ball, SplitPlan, SplitReport};
pub use vertices::{enumerate_optimal_vertices, plan_uniqueness, Uniqueness, VertexEnumeration, MAX_VERTEX_SUPPORT};

/// Marginal tolerance for plan invariants.
pub const TOL_MARGINAL: f64 = 1e-10;
/// Complementary-slackness tolerance for float certificates.
pub const TOL_CERTIFICATE: f64 = 1e-9;
/// Default mass threshold for map detection.
pub const TOL_MASS: f64 = 1e-12;

/// Dual potentials `(u, v)` with `u_i + v_j ≤ d²(x_i, y_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub exact_u: Option<Vec<Rational>>,
    pub exact_v: Option<Vec<Rational>>,
    /// Minimum reduced cost `d² - u - v` over all cells.
    pub dual_margin: f64,
    /// Maximum reduced cost over cells carrying mass.
    pub slackness: f64,
}

impl DualCertificate {
    pub fn is_exact(&self) -> bool {
        self.exact_u.is_some()
    }

    pub fn certifies(&self) -> bool {
        self.dual_margin >= -TOL_CERTIFICATE && self.slackness <= TOL_CERTIFICATE
    }
}

/// A coupling between two discrete measures, stored on their supports.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    sources: Vec<usize>,
    targets: Vec<usize>,
    coupling: Vec<f64>,
    exact: Option<Vec<Rational>>,
    cost: f64,
    exact_cost: Option<Rational>,
    certificate: Option<DualCertificate>,
}

pub(crate) fn sq_cost(space: &FiniteMetricMeasureSpace, i: usize, j: usize) -> f64 {
    let d = space.dist(i, j);
    d * d
}

pub(crate) fn sq_cost_exact(space: &FiniteMetricMeasureSpace, i: usize, j: usize) -> Rational {
    let d = rational::from_f64(space.dist(i, j));
    &d * &d
}

impl TransportPlan {
    /// Plan from a dense float coupling over the given source and target points.
    pub fn from_coupling(
        space: &FiniteMetricMeasureSpace,
        sources: Vec<usize>,
        targets: Vec<usize>,
        coupling: Vec<f64>,
    ) -> Result<Self> {
        check_shape(space, &sources, &targets, coupling.len())?;
        if coupling.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Structure("coupling entries must be finite and nonnegative".into()));
        }
        let n = targets.len();
        let cost = coupling.iter().enumerate().map(|(c, m)| m * sq_cost(space, sources[c / n], targets[c % n])).sum();
        Ok(TransportPlan { sources, targets, coupling, exact: None, cost, exact_cost: None, certificate: None })
    }

    /// Plan from an exact coupling; float values and cost are derived from it.
    pub fn from_exact(
        space: &FiniteMetricMeasureSpace,
        sources: Vec<usize>,
        targets: Vec<usize>,
        exact: Vec<Rational>,
    ) -> Result<Self> {
        check_shape(space, &sources, &targets, exact.len())?;
        if exact.iter().any(Signed::is_negative) {
            return Err(Error::Structure("coupling entries must be nonnegative".into()));
        }
        let n = targets.len();
        let mut exact_cost = Rational::zero();
        for (c, m) in exact.iter().enumerate() {
            if !m.is_zero() {
                exact_cost += m * sq_cost_exact(space, sources[c / n], targets[c % n]);
            }
        }
        let coupling = exact.iter().map(rational::to_f64).collect();
        Ok(TransportPlan {
            sources,
            targets,
            coupling,
            exact: Some(exact),
            cost: rational::to_f64(&exact_cost),
            exact_cost: Some(exact_cost),
            certificate: None,
        })
    }

    pub(crate) fn with_certificate(mut self, certificate: DualCertificate) -> Self {
        self.certificate = Some(certificate);
        self
    }

    /// The same coupling with the certificate slot cleared.
    pub fn without_certificate(mut self) -> Self {
        self.certificate = None;
        self
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn rows(&self) -> usize {
        self.sources.len()
    }

    pub fn cols(&self) -> usize {
        self.targets.len()
    }

    /// Mass on cell `(row, col)`.
    pub fn mass(&self, row: usize, col: usize) -> f64 {
        self.coupling[row * self.targets.len() + col]
    }

    pub fn exact_mass(&self, row: usize, col: usize) -> Option<&Rational> {
        self.exact.as_ref().map(|e| &e[row * self.targets.len() + col])
    }

    /// Row-major coupling over `sources × targets`.
    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    pub fn exact_coupling(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    /// Exact coupling, converting binary floats exactly when none is stored.
    pub fn exact_or_converted(&self) -> Vec<Rational> {
        match &self.exact {
            Some(e) => e.clone(),
            None => self.coupling.iter().map(|&m| rational::from_f64(m)).collect(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// `Σ coupling · d²`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn exact_cost(&self) -> Option<&Rational> {
        self.exact_cost.as_ref()
    }

    pub fn certificate(&self) -> Option<&DualCertificate> {
        self.certificate.as_ref()
    }

    fn positive(&self, c: usize) -> bool {
        match &self.exact {
            Some(e) => e[c].is_positive(),
            None => self.coupling[c] > 0.0,
        }
    }

    /// `(source point, target point, mass)` for every cell carrying mass.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let n = self.targets.len();
        (0..self.coupling.len())
            .filter(|&c| self.positive(c))
            .map(|c| (self.sources[c / n], self.targets[c % n], self.coupling[c]))
            .collect()
    }

    /// Cells carrying mass, as `(row, col)`.
    pub fn support_cells(&self) -> Vec<(usize, usize)> {
        let n = self.targets.len();
        (0..self.coupling.len()).filter(|&c| self.positive(c)).map(|c| (c / n, c % n)).collect()
    }

    /// Point pairs `(x, y)` carrying mass.
    pub fn support_pairs(&self) -> Vec<(usize, usize)> {
        self.entries().into_iter().map(|(x, y, _)| (x, y)).collect()
    }

    pub fn row_masses(&self) -> Vec<f64> {
        let n = self.targets.len();
        (0..self.sources.len()).map(|i| self.coupling[i * n..(i + 1) * n].iter().sum()).collect()
    }

    pub fn col_masses(&self) -> Vec<f64> {
        let n = self.targets.len();
        (0..n).map(|j| (0..self.sources.len()).map(|i| self.coupling[i * n + j]).sum()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.coupling.iter().sum()
    }

    /// First and second marginals as measures on the whole space.
    pub fn marginals(&self, space: &FiniteMetricMeasureSpace) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        let n = self.targets.len();
        let e = self.exact_or_converted();
        let mut a = vec![Rational::zero(); space.len()];
        let mut b = vec![Rational::zero(); space.len()];
        for (c, m) in e.iter().enumerate() {
            a[self.sources[c / n]] += m;
            b[self.targets[c % n]] += m;
        }
        Ok((DiscreteMeasure::from_exact(space, a)?, DiscreteMeasure::from_exact(space, b)?))
    }

    /// Whether row and column sums match the given measures within `1e-10`.
    pub fn has_marginals(&self, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> bool {
        let rows = self.row_masses();
        let cols = self.col_masses();
        let mut row_mass = vec![0.0; mu0.len()];
        let mut col_mass = vec![0.0; mu1.len()];
        for (i, &p) in self.sources.iter().enumerate() {
            row_mass[p] += rows[i];
        }
        for (j, &p) in self.targets.iter().enumerate() {
            col_mass[p] += cols[j];
        }
        row_mass.iter().zip(mu0.weights()).all(|(a, b)| (a - b).abs() <= TOL_MARGINAL)
            && col_mass.iter().zip(mu1.weights()).all(|(a, b)| (a - b).abs() <= TOL_MARGINAL)
    }
}

fn check_shape(space: &FiniteMetricMeasureSpace, sources: &[usize], targets: &[usize], cells: usize) -> Result<()> {
    for &p in sources.iter().chain(targets) {
        space.check_index(p)?;
    }
    if cells != sources.len() * targets.len() {
        return Err(Error::Structure(format!(
            "coupling has {cells} cells, expected {}×{}",
            sources.len(),
            targets.len()
        )));
    }
    Ok(())
}

/// When the solver switches to rational arithmetic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExactMode {
    /// Exact when the measures carry exact weights, or when the float
    /// certificate is within `1e-9` of a tie or the iteration cap is hit.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub exact: ExactMode,
    /// Pivot cap per run; `None` scales with the problem size.
    pub max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { exact: ExactMode::Auto, max_iterations: None }
    }
}

/// An optimal plan together with `W₂ = √cost`.
#[derive(Clone, Debug, PartialEq)]
pub struct W2Solution {
    pub plan: TransportPlan,
    pub w2: f64,
}

impl W2Solution {
    pub fn w2_squared(&self) -> f64 {
        self.plan.cost()
    }

    pub fn w2_squared_exact(&self) -> Option<&Rational> {
        self.plan.exact_cost()
    }
}

/// Optimal quadratic coupling between `mu0` and `mu1`, with dual certificate.
pub fn solve_w2(space: &FiniteMetricMeasureSpace, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<W2Solution> {
    solve_w2_with(space, mu0, mu1, SolveOptions::default())
}

pub fn solve_w2_with(
    space: &FiniteMetricMeasureSpace,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    options: SolveOptions,
) -> Result<W2Solution> {
    if mu0.len() != space.len() || mu1.len() != space.len() {
        return Err(Error::Structure("measure does not match the space".into()));
    }
    let (m0, m1) = (mu0.total_mass(), mu1.total_mass());
    if (m0 - m1).abs() > 1e-12 * m0.max(m1).max(1.0) || m0 <= 0.0 {
        return Err(Error::MassMismatch { source_mass: m0, target_mass: m1 });
    }
    let sources = mu0.support();
    let targets = mu1.support();
    let plan = solve_supports(space, &sources, &targets, mu0, mu1, options)?;
    let w2 = plan.cost().max(0.0).sqrt();
    Ok(W2Solution { plan, w2 })
}

/// Independent solves, run concurrently under [`Execution::Parallel`].
pub fn solve_batch(
    space: &FiniteMetricMeasureSpace,
    pairs: &[(DiscreteMeasure, DiscreteMeasure)],
    exec: Execution,
) -> Vec<Result<W2Solution>> {
    exec::map(exec, pairs, |(a, b)| solve_w2(space, a, b))
}

fn default_cap(m: usize, n: usize) -> usize {
    1000 + 50 * (m + n) * (m + n)
}

fn solve_supports(
    space: &FiniteMetricMeasureSpace,
    sources: &[usize],
    targets: &[usize],
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    options: SolveOptions,
) -> Result<TransportPlan> {
    let (m, n) = (sources.len(), targets.len());
    let cap = options.max_iterations.unwrap_or_else(|| default_cap(m, n));
    let mut warm: Option<Vec<usize>> = None;
    if options.exact != ExactMode::Always {
        let mut supply: Vec<f64> = sources.iter().map(|&p| mu0.weight(p)).collect();
        let mut demand: Vec<f64> = targets.iter().map(|&p| mu1.weight(p)).collect();
        balance_f64(&mut supply, &mut demand);
        let cost: Vec<f64> = (0..m * n).map(|c| sq_cost(space, sources[c / n], targets[c % n])).collect();
        let problem = Problem { m, n, cost, supply, demand };
        if let Some(sol) = problem.solve(None, cap) {
            let reduced = sol.reduced_costs(&problem);
            let mut in_basis = vec![false; m * n];
            for &c in &sol.basis {
                in_basis[c] = true;
            }
            let margin = (0..m * n).filter(|&c| !in_basis[c]).map(|c| reduced[c]).fold(f64::INFINITY, f64::min);
            let want_exact = match options.exact {
                ExactMode::Never => false,
                _ => mu0.exact().is_some() && mu1.exact().is_some() || margin < TOL_CERTIFICATE,
            };
            if !want_exact {
                let slackness = (0..m * n).filter(|&c| sol.x[c] > 0.0).map(|c| reduced[c].abs()).fold(0.0, f64::max);
                let certificate = DualCertificate {
                    dual_margin: reduced.iter().copied().fold(f64::INFINITY, f64::min),
                    slackness,
                    u: sol.u.clone(),
                    v: sol.v.clone(),
                    exact_u: None,
                    exact_v: None,
                };
                let x: Vec<f64> = sol.x.iter().map(|&v| v.max(0.0)).collect();
                return Ok(TransportPlan::from_coupling(space, sources.to_vec(), targets.to_vec(), x)?
                    .with_certificate(certificate));
            }
            warm = Some(sol.basis);
        } else if options.exact == ExactMode::Never {
            return Err(Error::Parameter("simplex iteration cap reached".into()));
        }
    }
    solve_exact(space, sources, targets, mu0, mu1, warm.as_deref(), cap)
}

fn balance_f64(supply: &mut [f64], demand: &mut [f64]) {
    let diff = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
    if let Some(j) = (0..demand.len()).max_by(|&a, &b| demand[a].total_cmp(&demand[b])) {
        demand[j] = (demand[j] + diff).max(0.0);
    }
}

fn balance_exact(supply: &[Rational], demand: &mut [Rational]) {
    let diff = rational::sum(supply) - rational::sum(demand.iter());
    if diff.is_zero() {
        return;
    }
    if let Some(j) = (0..demand.len()).max_by(|&a, &b| demand[a].cmp(&demand[b])) {
        demand[j] += diff;
        if demand[j].is_negative() {
            demand[j] = Rational::zero();
        }
    }
}

pub(crate) fn exact_cost_matrix(
    space: &FiniteMetricMeasureSpace,
    sources: &[usize],
    targets: &[usize],
) -> Vec<Rational> {
    let n = targets.len();
    (0..sources.len() * n).map(|c| sq_cost_exact(space, sources[c / n], targets[c % n])).collect()
}

fn solve_exact(
    space: &FiniteMetricMeasureSpace,
    sources: &[usize],
    targets: &[usize],
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    warm: Option<&[usize]>,
    cap: usize,
) -> Result<TransportPlan> {
    let (m, n) = (sources.len(), targets.len());
    let e0 = mu0.exact_or_converted();
    let e1 = mu1.exact_or_converted();
    let supply: Vec<Rational> = sources.iter().map(|&p| e0[p].clone()).collect();
    let mut demand: Vec<Rational> = targets.iter().map(|&p| e1[p].clone()).collect();
    balance_exact(&supply, &mut demand);
    let problem = Problem { m, n, cost: exact_cost_matrix(space, sources, targets), supply, demand };
    // Bland's rule terminates, so the exact run gets a generous cap.
    let sol = problem
        .solve(warm, cap.saturating_mul(20))
        .ok_or_else(|| Error::Parameter("exact simplex iteration cap reached".into()))?;
    let reduced = sol.reduced_costs(&problem);
    let dual_margin = reduced.iter().min().cloned().unwrap_or_else(Rational::zero);
    let slackness =
        (0..m * n).filter(|&c| sol.x[c].is_positive()).map(|c| reduced[c].abs()).max().unwrap_or_else(Rational::zero);
    let certificate = DualCertificate {
        u: sol.u.iter().map(rational::to_f64).collect(),
        v: sol.v.iter().map(rational::to_f64).collect(),
        dual_margin: rational::to_f64(&dual_margin),
        slackness: rational::to_f64(&slackness),
        exact_u: Some(sol.u),
        exact_v: Some(sol.v),
    };
    Ok(TransportPlan::from_exact(space, sources.to_vec(), targets.to_vec(), sol.x)?.with_certificate(certificate))
}

/// Outcome of the map test.
#[derive(Clone, Debug, PartialEq)]
pub enum MapTest {
    /// `(x, T(x))` for every source row carrying mass.
    Map(Vec<(usize, usize)>),
    /// A source row sending mass to at least two targets.
    Split { source: usize, targets: Vec<usize> },
}

impl MapTest {
    pub fn is_map(&self) -> bool {
        matches!(self, MapTest::Map(_))
    }
}

/// Whether every row carrying more than `tol_mass` has a single destination.
pub fn is_induced_by_map(plan: &TransportPlan, tol_mass: f64) -> MapTest {
    let mut map = Vec::new();
    for (i, &x) in plan.sources().iter().enumerate() {
        let row_mass: f64 = (0..plan.cols()).map(|j| plan.mass(i, j)).sum();
        if row_mass <= tol_mass {
            continue;
        }
        let dest: Vec<usize> =
            (0..plan.cols()).filter(|&j| plan.mass(i, j) > tol_mass).map(|j| plan.targets()[j]).collect();
        if dest.len() == 1 {
            map.push((x, dest[0]));
        } else {
            return MapTest::Split { source: x, targets: dest };
        }
    }
    MapTest::Map(map)
}

/// `μ₀ ⊗ μ₁`, exact when both measures are.
pub fn product_plan(
    space: &FiniteMetricMeasureSpace,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
) -> Result<TransportPlan> {
    let sources = mu0.support();
    let targets = mu1.support();
    match (mu0.exact(), mu1.exact()) {
        (Some(a), Some(b)) => {
            let exact = sources.iter().flat_map(|&i| targets.iter().map(move |&j| &a[i] * &b[j])).collect();
            TransportPlan::from_exact(space, sources, targets, exact)
        }
        _ => {
            let coupling =
                sources.iter().flat_map(|&i| targets.iter().map(move |&j| mu0.weight(i) * mu1.weight(j))).collect();
            TransportPlan::from_coupling(space, sources, targets, coupling)
        }
    }
}
