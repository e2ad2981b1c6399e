mod common;

use proptest::prelude::*;

use common::{random_scenario, rng, ScenarioShape};
use safe_kernel::engine::{simulate, write_csv, Scenario};
use safe_kernel::geometry::{kernel_guaranteed_nonempty, safe_kernel, trimmed_box, Point, PointSet, Tolerances};
use safe_kernel::graph::{is_r_robust, is_rs_robust, AttackModel, Network, RobustnessOptions};
use safe_kernel::oracle::{audit_trajectory, hull_membership, sorted_trim_interval, Status};

const TOL: f64 = 1e-6;

/// `m` points in dimension `d`, either on a small lattice (degenerate) or
/// continuous.
fn points(d: usize, m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PointSet> {
    let lattice = prop::collection::vec(prop::collection::vec((0i32..=3).prop_map(f64::from), d), m.clone());
    let real = prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), m);
    prop_oneof![lattice, real].prop_map(|rows| PointSet::from_rows(&rows).unwrap())
}

fn graph(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Network> {
    n.prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        prop::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .zip(bits)
                .filter(|(_, b)| *b)
                .map(|(e, _)| e)
                .collect();
            Network::new(n, &edges).unwrap()
        })
    })
}

fn inside(kernel_vertex: &Point, other: &safe_kernel::geometry::Polytope) -> bool {
    other.contains(kernel_vertex, TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn helly_bound_gives_nonempty_kernel(d in 1usize..=2, n in 0usize..=1, seed in any::<u64>()) {
        let m = n * (d + 1) + 1;
        prop_assert!(kernel_guaranteed_nonempty(m, n, d));
        let mut r = rng(seed);
        let a = common::random_points(&mut r, d, m);
        let k = safe_kernel(&a, n, &Tolerances::default()).unwrap();
        prop_assert!(!k.is_empty());
    }

    #[test]
    fn kernel_shrinks_as_more_points_are_removed(a in (1usize..=2).prop_flat_map(|d| points(d, 4..=7))) {
        let tol = Tolerances::default();
        let k1 = safe_kernel(&a, 1, &tol).unwrap();
        let k2 = safe_kernel(&a, 2, &tol).unwrap();
        if !k2.is_empty() {
            prop_assert!(!k1.is_empty());
            for v in k2.vertices() {
                prop_assert!(inside(v, &k1), "{v:?} not in the n = 1 kernel");
            }
        }
    }

    #[test]
    fn kernel_inside_trimmed_box(a in (1usize..=2).prop_flat_map(|d| points(d, 5..=8)), n in 1usize..=2) {
        prop_assume!(a.cardinality() > 2 * n);
        let tol = Tolerances::default();
        let k = safe_kernel(&a, n, &tol).unwrap();
        let b = trimmed_box(&a, n, &tol).unwrap();
        for v in k.vertices() {
            prop_assert!(inside(v, &b));
        }
    }

    #[test]
    fn scalar_kernel_is_trim_interval(a in points(1, 3..=8), n in 1usize..=3) {
        prop_assume!(a.cardinality() > 2 * n);
        let k = safe_kernel(&a, n, &Tolerances::default()).unwrap();
        let values: Vec<f64> = a.iter().map(|p| p.coords()[0]).collect();
        let (lo, hi) = sorted_trim_interval(&values, n).unwrap();
        let got: Vec<f64> = k.vertices().iter().map(|v| v.coords()[0]).collect();
        let want = if lo == hi { vec![lo] } else { vec![lo, hi] };
        prop_assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-9, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn vertices_and_halfspaces_agree(a in (1usize..=3).prop_flat_map(|d| points(d, 3..=7)), n in 0usize..=1) {
        let k = safe_kernel(&a, n, &Tolerances::default()).unwrap();
        for v in k.vertices() {
            for h in k.halfspaces() {
                prop_assert!(h.violation(v.coords()) <= TOL);
            }
            prop_assert!(hull_membership(a.points(), v, TOL).unwrap().is_some());
        }
    }

    #[test]
    fn robustness_is_monotone(g in graph(2..=6), r in 1usize..=3, s in 1usize..=3) {
        let opts = RobustnessOptions::default();
        let rs = is_rs_robust(&g, r, s, &opts).unwrap().verdict;
        let plain = is_r_robust(&g, r, &opts).unwrap().verdict;
        prop_assert_eq!(is_rs_robust(&g, r, 1, &opts).unwrap().verdict, plain);
        if rs {
            prop_assert!(plain);
            if s > 1 {
                prop_assert!(is_rs_robust(&g, r, s - 1, &opts).unwrap().verdict);
            }
            if r > 1 {
                prop_assert!(is_rs_robust(&g, r - 1, s, &opts).unwrap().verdict);
            }
        }
    }
}

fn small_scenario(seed: u64, dim: usize, model: AttackModel) -> Scenario {
    let mut r = rng(seed);
    let need = (dim + 1) + 1;
    let shape = ScenarioShape {
        nodes: need + 2,
        dim,
        f: 1,
        model,
        faulty: 1,
        scale: 100.0,
        max_rounds: 15,
        edge_prob: 0.5,
    };
    Scenario::from_file(random_scenario(&mut r, shape, seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn runs_are_reproducible(seed in any::<u64>(), dim in 1usize..=2) {
        let s = small_scenario(seed, dim, AttackModel::Total);
        let csv = |s: &Scenario| {
            let mut out = Vec::new();
            write_csv(&simulate(s).unwrap(), &mut out).unwrap();
            out
        };
        prop_assert_eq!(csv(&s), csv(&s));
    }

    #[test]
    fn audit_accepts_runs_and_rejects_tampering(seed in any::<u64>(), dim in 1usize..=2, local in any::<bool>()) {
        let model = if local { AttackModel::Local } else { AttackModel::Total };
        let s = small_scenario(seed, dim, model);
        let mut traj = simulate(&s).unwrap();
        let report = audit_trajectory(&traj, &s).unwrap();
        prop_assert_eq!(report.validity.status, Status::Pass);
        prop_assert!(report.solver_errors.is_empty());

        // One benign state pushed past every initial state.
        let node = traj.benign_nodes()[0];
        let k = 1.min(traj.rounds.len() - 1);
        let far: Vec<f64> = (0..dim).map(|_| 1e3).collect();
        traj.rounds[k].states[node] = Point::new(far).unwrap();
        let report = audit_trajectory(&traj, &s).unwrap();
        prop_assert_eq!(report.validity.status, Status::Fail);
        prop_assert!(!report.passed);
    }
}
