//! Worked examples with hand-checkable values, one test per operation.

mod common;

use mmsot_core::curvature::{
    bg_ratio_curve, nondegeneracy_check, polar_decompose, scaling_leak_check, ComparisonProfile,
};
use mmsot_core::geodesy::{enumerate_geodesics, evaluate, find_branching, restrict};
use mmsot_core::rational::{self, Rational};
use mmsot_core::scenarios::{
    build_circle, build_cusp, build_fan, build_interval, build_tripod, cusp_point, tripod_point,
};
use mmsot_core::space::{from_metric_graph, mutually_singular, restrict_and_normalize, validate_metric, Violation};
use mmsot_core::tangents::{gh_distance_matrices, interval_defect, rescale_ball, PointedRescaledSpace};
use mmsot_core::transport::{
    check_c_monotone, enumerate_optimal_vertices, is_induced_by_map, lift_to_dynamical, product_plan, solve_w2,
    split_plan, Ball, SelectionPolicy, TOL_MASS,
};
use mmsot_core::{DiscreteMeasure, Error, FiniteMetricMeasureSpace, MetricGraph};

use common::*;

fn line(points: &[f64]) -> FiniteMetricMeasureSpace {
    let ids = (0..points.len()).map(|i| format!("x{i}")).collect();
    let dist = points.iter().map(|a| points.iter().map(|b| (a - b).abs()).collect()).collect();
    FiniteMetricMeasureSpace::from_dense(ids, vec![1.0; points.len()], dist).unwrap()
}

fn id(s: &FiniteMetricMeasureSpace, name: &str) -> usize {
    s.index_of(name).unwrap()
}

#[test]
fn metric_validation() {
    assert!(validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap().is_valid());
    let asym = validate_metric(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
    assert!(asym.violations.iter().any(|v| matches!(v, Violation::Asymmetric { i: 0, j: 1, .. })));
    let tri = validate_metric(&[vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]]).unwrap();
    assert!(tri.violations.iter().any(|v| matches!(v, Violation::Triangle { .. })));
    assert!(validate_metric(&[vec![0.0, 1.0]]).is_err());
}

#[test]
fn metric_graph_distances() {
    let edge = MetricGraph::new(vec!["a".into(), "b".into()], vec![(0, 1, 1.0)], 0.5).unwrap();
    let s = from_metric_graph(&edge).unwrap();
    assert_eq!(s.len(), 3);
    assert_eq!(s.dist(id(&s, "a"), id(&s, "b")), 1.0);

    let tripod = build_tripod([1.0, 1.0, 1.0], 1.0).unwrap();
    let paths = floyd_warshall(&tripod);
    assert_eq!(tripod.len(), 4);
    for (u, v, d) in [("A", "B", 2.0), ("B", "C", 2.0), ("o", "A", 1.0)] {
        assert_eq!(tripod.dist(id(&tripod, u), id(&tripod, v)), d);
        assert_eq!(paths[id(&tripod, u)][id(&tripod, v)], d);
    }
    let circle = build_circle(4.0, 1.0).unwrap();
    assert_eq!(circle.dist(id(&circle, "v0"), id(&circle, "v2")), 2.0);
    assert_eq!(floyd_warshall(&circle)[id(&circle, "v0")][id(&circle, "v2")], 2.0);

    let disconnected = MetricGraph::new(vec!["a".into(), "b".into(), "c".into()], vec![(0, 1, 1.0)], 1.0).unwrap();
    assert!(from_metric_graph(&disconnected).is_err());
}

#[test]
fn restriction_and_singularity() {
    let s = build_tripod([1.0, 1.0, 1.0], 0.25).unwrap();
    let leg: Vec<usize> = [0.25, 0.5, 0.75].iter().map(|&t| tripod_point(&s, 'A', t).unwrap()).collect();
    let mu = restrict_and_normalize(&s, &leg).unwrap();
    for &p in &leg {
        assert_eq!(mu.exact().unwrap()[p], rational::ratio(1, 3));
    }
    let all: Vec<usize> = (0..s.len()).collect();
    assert!(restrict_and_normalize(&s, &all).unwrap().is_probability());

    let w = FiniteMetricMeasureSpace::from_dense(
        vec!["p".into(), "q".into()],
        vec![2.0, 1.0],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
    )
    .unwrap();
    let nu = restrict_and_normalize(&w, &[0, 1]).unwrap();
    assert!((nu.weight(0) - 2.0 / 3.0).abs() < 1e-15 && (nu.weight(1) - 1.0 / 3.0).abs() < 1e-15);

    let mut weights = s.weights().to_vec();
    for &p in &leg {
        weights[p] = 0.0;
    }
    let holes = s.clone().with_weights_auxiliary_zeros(weights).unwrap();
    assert!(matches!(restrict_and_normalize(&holes, &leg), Err(Error::DegenerateRestriction)));

    let three = line(&[0.0, 1.0, 2.0]);
    let a = DiscreteMeasure::dirac(&three, 0).unwrap();
    let b = DiscreteMeasure::dirac(&three, 1).unwrap();
    assert!(mutually_singular(&a, &b));
    assert!(!mutually_singular(&a, &a));
    let half = DiscreteMeasure::uniform_on(&three, &[0, 1]).unwrap();
    assert!(mutually_singular(&half, &DiscreteMeasure::dirac(&three, 2).unwrap()));
}

#[test]
fn geodesic_enumeration_and_evaluation() {
    let path = build_interval(1.0, 0.25).unwrap();
    let (a, b) = (id(&path, "a"), id(&path, "b"));
    let set = enumerate_geodesics(&path, a, b, 10).unwrap();
    assert_eq!(set.paths.len(), 1);
    let g = &set.paths[0];
    assert_eq!(evaluate(g, 0.0).unwrap(), a);
    assert_eq!(evaluate(g, 1.0).unwrap(), b);
    assert_eq!(path.dist(a, evaluate(g, 0.5).unwrap()), 0.5);
    assert_eq!(restrict(g, 0.0, 0.5).unwrap().length(), 0.5);
    assert!(evaluate(g, 1.5).is_err());
    assert!(restrict(g, 0.5, 0.5).is_err());

    let circle = build_circle(4.0, 1.0).unwrap();
    let round = enumerate_geodesics(&circle, id(&circle, "v0"), id(&circle, "v2"), 10).unwrap();
    assert_eq!(round.paths.len(), 2);
    assert!(round.paths.iter().all(|g| g.length() == 2.0));
    assert_eq!(restrict(&round.paths[0], 0.25, 0.75).unwrap().length(), 1.0);

    let tripod = build_tripod([1.0, 1.0, 1.0], 1.0).unwrap();
    let leaves = enumerate_geodesics(&tripod, id(&tripod, "A"), id(&tripod, "B"), 10).unwrap();
    assert_eq!(leaves.paths.len(), 1);
    assert_eq!(leaves.paths[0].length(), 2.0);
    assert!(leaves.paths[0].points().contains(&id(&tripod, "o")));
}

#[test]
fn branching_search() {
    let path = build_interval(1.0, 0.25).unwrap();
    assert!(find_branching(&path, id(&path, "a~b#2"), 0.5).unwrap().is_none());

    let tripod = build_tripod([1.0, 1.0, 1.0], 1.0).unwrap();
    let hub = id(&tripod, "o");
    let found = find_branching(&tripod, hub, 1.0).unwrap().expect("hub branches");
    assert_eq!(found.alpha.length(), found.beta.length());
    assert_ne!(found.alpha.end(), found.beta.end());
    assert_eq!(found.branch_point(), hub);

    let fine = build_tripod([1.0, 1.0, 1.0], 0.5).unwrap();
    let c = tripod_point(&fine, 'C', 0.5).unwrap();
    let found = find_branching(&fine, c, 1.5).unwrap().expect("branches through the hub");
    assert_eq!(found.branch_point(), id(&fine, "o"));
    let ends = [found.alpha.end(), found.beta.end()];
    let on_leg =
        |leg: char| ends.iter().any(|&e| (0..=2).any(|k| tripod_point(&fine, leg, k as f64 * 0.5).ok() == Some(e)));
    assert!(on_leg('A') || on_leg('B'));
}

#[test]
fn quadratic_cost_examples() {
    let s = line(&[0.0, 3.0]);
    let sol = solve_w2(&s, &DiscreteMeasure::dirac(&s, 0).unwrap(), &DiscreteMeasure::dirac(&s, 1).unwrap()).unwrap();
    assert_eq!(sol.w2, 3.0);

    let (space, mu0, mu1) = mmsot_core::scenarios::tripod_branch_instance().unwrap();
    let sol = solve_w2(&space, &mu0, &mu1).unwrap();
    let expected = (1.25f64.powi(2) + 1.5f64.powi(2) + 1.75f64.powi(2)) / 3.0;
    assert!((sol.w2_squared() - expected).abs() < 1e-12);
    let (oracle, _) = brute_force_exact(
        &exact_cost_matrix(&space, &mu0.support(), &mu1.support()),
        &support_exact(&mu0),
        &support_exact(&mu1),
    );
    assert_eq!(sol.w2_squared_exact().unwrap(), &oracle);
    // cost is constant over the polytope, so every vertex is optimal
    let verts = enumerate_optimal_vertices(&space, &mu0, &mu1, 100).unwrap();
    assert_eq!(
        verts.vertices.len(),
        polytope_vertices(&support_exact(&mu0), &support_exact(&mu1), &Rational::from_integer(0.into())).len()
    );
    assert!(!is_induced_by_map(&sol.plan, TOL_MASS).is_map());

    let same = solve_w2(&space, &mu0, &mu0).unwrap();
    assert_eq!(same.w2, 0.0);
    assert!(is_induced_by_map(&same.plan, TOL_MASS).is_map());
}

#[test]
fn monotonicity_examples() {
    let s = line(&[0.0, 1.0]);
    assert!(check_c_monotone(&s, &[(0, 0), (1, 1)], 2).is_monotone());
    let crossed = check_c_monotone(&s, &[(0, 1), (1, 0)], 2);
    let w = crossed.witness.expect("swap lowers cost");
    assert!((w.decrease() - 2.0).abs() < 1e-12);
    assert!(check_c_monotone(&s, &[(0, 1)], 2).is_monotone());
}

#[test]
fn uniqueness_and_products() {
    let s = line(&[0.0, 1.0, 2.0, 3.0]);
    let d = |p| DiscreteMeasure::dirac(&s, p).unwrap();
    assert_eq!(enumerate_optimal_vertices(&s, &d(0), &d(1), 10).unwrap().vertices.len(), 1);
    let a = DiscreteMeasure::uniform_on(&s, &[0, 1]).unwrap();
    let b = DiscreteMeasure::uniform_on(&s, &[2, 3]).unwrap();
    let verts = enumerate_optimal_vertices(&s, &a, &b, 10).unwrap();
    assert!(verts.is_unique());
    assert_eq!(verts.vertices[0].exact_cost().unwrap(), &rational::from_int(4));

    let product = product_plan(&s, &a, &b).unwrap();
    assert!(product.exact_coupling().unwrap().iter().all(|x| *x == rational::ratio(1, 4)));
    assert!(!is_induced_by_map(&product, TOL_MASS).is_map());
    let dirac = product_plan(&s, &d(0), &d(3)).unwrap();
    assert_eq!(dirac.support_cells().len(), 1);

    let g = mmsot_core::scenarios::build_gadget("micro1d_two_diracs").unwrap();
    let pc = product_plan(&g.space, &g.mu0, &g.mu1).unwrap();
    let opt = solve_w2(&g.space, &g.mu0, &g.mu1).unwrap();
    assert_eq!(pc.exact_cost(), opt.w2_squared_exact());
}

#[test]
fn dynamical_lifting() {
    let circle = build_circle(4.0, 1.0).unwrap();
    let (u, v) = (id(&circle, "v0"), id(&circle, "v2"));
    let plan =
        solve_w2(&circle, &DiscreteMeasure::dirac(&circle, u).unwrap(), &DiscreteMeasure::dirac(&circle, v).unwrap())
            .unwrap()
            .plan;
    let canonical = lift_to_dynamical(&circle, &plan, SelectionPolicy::Canonical).unwrap();
    let again = lift_to_dynamical(&circle, &plan, SelectionPolicy::Canonical).unwrap();
    assert_eq!(canonical, again);
    assert_eq!(canonical.len(), 1);
    let all = lift_to_dynamical(&circle, &plan, SelectionPolicy::EnumerateAll { max_plans: 10 }).unwrap();
    assert_eq!(all.len(), 2);

    let mu = DiscreteMeasure::uniform_on(&circle, &[u, v]).unwrap();
    let identity = solve_w2(&circle, &mu, &mu).unwrap().plan;
    let lifted = lift_to_dynamical(&circle, &identity, SelectionPolicy::Canonical).unwrap();
    assert!(lifted[0].paths.iter().all(|w| w.path.length() == 0.0));
}

#[test]
fn splitting_examples() {
    let s = line(&[0.0, 1.0, 2.0, 3.0]);
    let a = DiscreteMeasure::uniform_on(&s, &[0, 1]).unwrap();
    let b = DiscreteMeasure::uniform_on(&s, &[2, 3]).unwrap();
    let product = product_plan(&s, &a, &b).unwrap();
    let split = split_plan(&s, &product, Ball { center: 2, radius: 0.5 }).unwrap();
    let quarter = rational::ratio(1, 4);
    let p1 = split.inside.exact_coupling().unwrap();
    let p2 = split.outside.exact_coupling().unwrap();
    // rows are (x0, x1), columns (x2, x3)
    assert_eq!(p1, [quarter.clone(), rational::from_int(0), quarter.clone(), rational::from_int(0)]);
    assert_eq!(p2, [rational::from_int(0), quarter.clone(), rational::from_int(0), quarter]);
    assert_eq!(split.report.first_marginal_gap, 0.0);

    let map = solve_w2(&s, &a, &b).unwrap().plan;
    assert!(matches!(split_plan(&s, &map, Ball { center: 2, radius: 0.5 }), Err(Error::AlreadyMapLike)));

    let (space, mu0, mu1) = mmsot_core::scenarios::tripod_branch_instance().unwrap();
    let plan = solve_w2(&space, &mu0, &mu1).unwrap().plan;
    let (leaf_b, leaf_c) = (id(&space, "B"), id(&space, "C"));
    let split = split_plan(&space, &plan, Ball { center: leaf_b, radius: 1.0 }).unwrap();
    assert!(split.report.all_hold());
    let targets = |p: &mmsot_core::transport::TransportPlan| -> Vec<usize> {
        p.support_cells().iter().map(|&(_, j)| p.targets()[j]).collect()
    };
    assert!(targets(&split.inside).iter().all(|&t| t == leaf_b));
    assert!(targets(&split.outside).iter().all(|&t| t == leaf_c));
}

#[test]
fn ratio_curve_examples() {
    let s = build_interval(1.0, 1.0 / 64.0).unwrap();
    let mid = id(&s, "a~b#32");
    let h = 1.0 / 64.0;
    let radii = [0.1, 0.2, 0.3, 0.4, 0.5];
    let curve = bg_ratio_curve(&s, mid, &ComparisonProfile::linear(1.0), &radii).unwrap();
    for p in &curve.points {
        assert!((p.ratio - 1.0).abs() <= h / p.w + 1e-12, "r = {}", p.r);
    }
    let far = bg_ratio_curve(&s, mid, &ComparisonProfile::linear(1.0), &[0.6, 0.7]).unwrap();
    assert!((far.points[0].ratio - 1.0 / 1.2).abs() < 1e-12);
    assert!(far.points[1].ratio < far.points[0].ratio);
}

#[test]
fn polar_bins() {
    let s = build_interval(1.0, 1.0 / 64.0).unwrap();
    let polar = polar_decompose(&s, id(&s, "a"), 0.25).unwrap();
    assert_eq!(polar.bins.len(), 4);
    assert!(polar.bins.iter().all(|b| (b.mass - 0.25).abs() <= 1.0 / 64.0));
    assert!((polar.integrate(&s, |_| 1.0) - s.total_weight()).abs() < 1e-12);

    let atom = line(&[0.0, 0.3]).with_weights_auxiliary_zeros(vec![0.0, 1.0]).unwrap();
    let polar = polar_decompose(&atom, 0, 0.25).unwrap();
    let k = polar.bin_of(0.3).unwrap();
    assert_eq!((polar.bins[k].lo, polar.bins[k].mass), (0.25, 1.0));

    let tripod = build_tripod([1.0, 1.0, 1.0], 0.25).unwrap();
    let polar = polar_decompose(&tripod, id(&tripod, "o"), 0.5).unwrap();
    let far = &polar.bins[1];
    for leg in ['A', 'B', 'C'] {
        assert!(far.points.contains(&tripod_point(&tripod, leg, 0.75).unwrap()));
    }
}

#[test]
fn contraction_examples() {
    let s = build_interval(1.0, 1.0 / 16.0).unwrap();
    let x = id(&s, "a");
    let a: Vec<usize> = (0..s.len()).filter(|&p| (0.5..=0.75).contains(&s.dist(x, p))).collect();
    let checks = nondegeneracy_check(&s, &a, x, &[0.0, 0.5]).unwrap();
    assert!(checks.iter().all(|c| c.is_positive()));
    let mut identity = checks[0].points.clone();
    identity.sort_unstable();
    assert_eq!(identity, a);
    let mut radii: Vec<f64> = checks[1].points.iter().map(|&p| s.dist(x, p)).collect();
    radii.sort_by(f64::total_cmp);
    assert_eq!(radii.first().copied(), Some(0.25));
    assert_eq!(radii.last().copied(), Some(0.375));
}

#[test]
fn scaling_leak_examples() {
    let s = build_interval(1.0, 1.0 / 64.0).unwrap();
    let (x, y) = (id(&s, "a"), id(&s, "b"));
    let report = scaling_leak_check(&s, x, y, 0.25, &[0.5, 0.8, 1.0], 1.0 / 32.0).unwrap();
    assert!(report.empty_bins.is_empty());
    assert!(report.leaks.iter().all(|l| l.length == 0.0));
    assert!(report.consistent());
}

#[test]
fn rescaled_balls() {
    let s = build_interval(1.0, 1.0 / 64.0).unwrap();
    let mid = id(&s, "a~b#32");
    let one = rescale_ball(&s, mid, 1.0, 0.25).unwrap();
    assert_eq!(one.len(), s.closed_ball(mid, 0.25).len());
    let ten = rescale_ball(&s, mid, 10.0, 1.0).unwrap();
    let original: Vec<f64> = ten.points.iter().map(|&p| s.dist(mid, p)).collect();
    assert!(original.iter().all(|&d| d <= 0.1 + 1e-12));
    assert!((ten.radial().iter().copied().fold(0.0, f64::max) - 1.0).abs() <= 10.0 / 64.0);

    // the star looks the same at every scale on a matching grid
    let coarse = build_tripod([1.0, 1.0, 1.0], 0.25).unwrap();
    let fine = build_tripod([1.0, 1.0, 1.0], 0.125).unwrap();
    let a = rescale_ball(&coarse, id(&coarse, "o"), 1.0, 1.0).unwrap();
    let b = rescale_ball(&fine, id(&fine, "o"), 2.0, 1.0).unwrap();
    let sorted = |p: &PointedRescaledSpace| {
        let mut d: Vec<f64> = p.dist.iter().flatten().copied().collect();
        d.sort_by(f64::total_cmp);
        d
    };
    assert_eq!(sorted(&a), sorted(&b));
}

#[test]
fn gh_examples() {
    let tri = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]];
    let perm = vec![vec![0.0, 1.5, 1.0], vec![1.5, 0.0, 2.0], vec![1.0, 2.0, 0.0]];
    assert_eq!(gh_distance_matrices(&tri, &perm, 7).unwrap().0, 0.0);
    let point = vec![vec![0.0]];
    let pair = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
    let (v, _) = gh_distance_matrices(&point, &pair, 7).unwrap();
    assert_eq!(v, 1.0);
    assert_eq!(v, brute_force_gh(&point, &pair));

    let segment = line(&[-1.0, -0.5, 0.0, 0.5, 1.0]).dense_rows();
    let star = build_tripod([1.0, 1.0, 1.0], 1.0).unwrap();
    let star = star.subspace(&[0, 1, 2, 3]).unwrap().dense_rows();
    assert!(gh_distance_matrices(&segment, &star, 7).unwrap().0 > 0.0);
}

#[test]
fn interval_defect_examples() {
    let s = build_interval(1.0, 1.0 / 256.0).unwrap();
    let mid = id(&s, "a~b#128");
    for lambda in [2.0, 4.0, 8.0] {
        let d = interval_defect(&rescale_ball(&s, mid, lambda, 1.0).unwrap(), 1.0).unwrap();
        assert!(d.epsilon <= 2.0 * lambda / 256.0 + 1e-12, "λ = {lambda}: {}", d.epsilon);
    }
    let tripod = build_tripod([1.0, 1.0, 1.0], 1.0 / 64.0).unwrap();
    let star = interval_defect(&rescale_ball(&tripod, id(&tripod, "o"), 1.0, 1.0).unwrap(), 1.0).unwrap();
    assert!(star.exhaustive && star.epsilon >= 0.5);
    let single = PointedRescaledSpace::from_parts(vec![vec![0.0]], vec![vec![]], 0, 1.0).unwrap();
    assert_eq!(interval_defect(&single, 1.0).unwrap().epsilon, 1.0);
}

#[test]
fn tripod_builder() {
    let s = build_tripod([1.0, 1.0, 1.0], 0.25).unwrap();
    assert_eq!(s.len(), 13);
    assert_eq!(s.dist(id(&s, "A"), id(&s, "C")), 2.0);
    assert_eq!(build_tripod([1.0, 1.0, 1.0], 1.0).unwrap().len(), 4);
    let long = build_tripod([2.0, 1.0, 1.0], 0.5).unwrap();
    assert_eq!(long.dist(id(&long, "A"), id(&long, "B")), 3.0);
}

#[test]
fn fan_depth_two() {
    let fan = build_fan(2, 0.5).unwrap();
    assert_eq!(fan.atoms.len(), 4);
    let mut rows: Vec<(Rational, Rational, Rational)> =
        fan.atoms.iter().map(|a| (a.radius.clone(), a.mean.clone(), a.weight.clone())).collect();
    rows.sort();
    let r = rational::ratio;
    // k ones: weight k!(2-k)!/3!, computed here per atom independently
    let beta = |k: i64| {
        let f = |n: i64| (1..=n).product::<i64>();
        r(f(k) * f(2 - k), f(3))
    };
    assert_eq!(
        rows,
        vec![
            (r(0, 1), r(0, 1), beta(0)),
            (r(1, 4), r(1, 2), beta(1)),
            (r(1, 2), r(1, 2), beta(1)),
            (r(3, 4), r(1, 1), beta(2)),
        ]
    );
    assert_eq!(rational::sum(rows.iter().map(|t| &t.2)), r(1, 1));
    assert!(fan.radii_distinct());
}

#[test]
fn cusp_distances() {
    let g = build_cusp(1.0 / 32.0).unwrap();
    let (p, q) = (cusp_point(&g, -0.25, 0.0).unwrap(), cusp_point(&g, 0.25, 0.0).unwrap());
    assert_eq!(g.space.dist(p, q), 0.5);
    assert_eq!(g.ambient_distance(p, q), 0.5);
    let (u, v) = (cusp_point(&g, 0.25, 0.0625).unwrap(), cusp_point(&g, 0.25, -0.0625).unwrap());
    assert_eq!(g.ambient_distance(u, v), 0.125);
    assert!((g.space.dist(u, v) - 0.125).abs() <= g.h());
    for a in 0..g.space.len() {
        for b in 0..g.space.len() {
            assert!(g.space.dist(a, b) >= g.ambient_distance(a, b) - 1e-12);
        }
    }
}
