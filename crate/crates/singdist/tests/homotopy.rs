use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use singdist::homotopy::univariate::roots;
use singdist::homotopy::{
    monodromy_solve, parameter_sweep, total_degree_solve, track_set, Executor, Family, MonodromySettings,
    TrackerSettings,
};
use singdist::polynomials::{MultiPoly, ParameterizedSystem};
use singdist::scalar::C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn has_point(points: &[Vec<C64>], p: &[f64]) -> bool {
    points
        .iter()
        .any(|x| x.iter().zip(p).all(|(a, &b)| (a - c(b)).norm() < 1e-9))
}

/// x² = p0, y = p1·x: two roots for generic parameters.
fn two_root_family() -> Family {
    let (x, y, p0, p1) = (MultiPoly::var(0), MultiPoly::var(1), MultiPoly::var(2), MultiPoly::var(3));
    let eqs = vec![&(&x * &x) - &p0, &y - &(&p1 * &x)];
    Family::new(ParameterizedSystem::new(eqs, names("x", 2), names("p", 2)).unwrap(), vec![0, 1], vec![])
}

#[test]
fn total_degree_finds_all_intersections() {
    let (x, y) = (MultiPoly::var(0), MultiPoly::var(1));
    let circle = &(&(&x * &x) + &(&y * &y)) - &MultiPoly::constant(c(5.0));
    let hyperbola = &(&x * &y) - &MultiPoly::constant(c(2.0));
    let sys = ParameterizedSystem::new(vec![circle, hyperbola], names("x", 2), vec![]).unwrap();
    let set = total_degree_solve(&sys, &TrackerSettings::default(), C64::from_polar(1.0, 0.7), 100, &Executor::new(2))
        .unwrap();
    assert_eq!(set.len(), 4);
    let pts: Vec<Vec<C64>> = set.points.iter().map(|s| s.x.clone()).collect();
    for p in [[1.0, 2.0], [2.0, 1.0], [-1.0, -2.0], [-2.0, -1.0]] {
        assert!(has_point(&pts, &p), "missing {p:?}");
    }
}

#[test]
fn univariate_roots_of_a_cubic() {
    // (z − 1)(z − 2)(z − 3) = z³ − 6z² + 11z − 6
    let mut r: Vec<f64> = roots(&[c(-6.0), c(11.0), c(-6.0), c(1.0)]).iter().map(|z| z.re).collect();
    r.sort_by(f64::total_cmp);
    for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn monodromy_then_track_to_real_parameters() {
    let fam = two_root_family();
    let base = vec![C64::new(0.3, 1.1), C64::new(-0.7, 0.4)];
    let x0 = base[0].sqrt();
    let start = vec![x0, base[1] * x0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let exec = Executor::new(1);
    let (set, _) = monodromy_solve(&fam, &base, start, Some(2), &MonodromySettings::default(), &mut rng, &exec).unwrap();
    assert_eq!(set.len(), 2);
    let starts: Vec<Vec<C64>> = set.points.iter().map(|s| s.x.clone()).collect();
    let target = vec![c(4.0), c(0.5)];
    let out = track_set(&fam, &base, &target, C64::from_polar(1.0, 1.3), &starts, &TrackerSettings::default(), &exec);
    assert_eq!(out.n_failed, 0);
    let pts: Vec<Vec<C64>> = out.solutions.points.iter().map(|s| s.x.clone()).collect();
    assert!(has_point(&pts, &[2.0, 1.0]) && has_point(&pts, &[-2.0, -1.0]));
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let fam = two_root_family();
    let base = vec![C64::new(0.3, 1.1), C64::new(-0.7, 0.4)];
    let x0 = base[0].sqrt();
    let starts = vec![vec![x0, base[1] * x0], vec![-x0, -base[1] * x0]];
    let targets: Vec<Vec<C64>> = (1..6).map(|k| vec![c(k as f64), c(0.1 * k as f64)]).collect();
    let run = |w| parameter_sweep(&fam, &base, &starts, &targets, &TrackerSettings::default(), 11, &Executor::new(w));
    let (a, b) = (run(1), run(3));
    for (t, (oa, ob)) in a.iter().zip(&b).enumerate() {
        assert_eq!(oa.solutions.len(), 2, "target {t}");
        let xa: Vec<_> = oa.paths.iter().map(|p| p.endpoint.clone()).collect();
        let xb: Vec<_> = ob.paths.iter().map(|p| p.endpoint.clone()).collect();
        assert_eq!(xa, xb, "target {t}");
    }
}
