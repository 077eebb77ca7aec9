use singdist::lagrangian::{
    build_rrr_system, build_system, build_system_variants, pedal_projection, pose_independent_distance, BranchKind,
    LagrangianError,
};
use singdist::metrics::extrinsic_dist2;
use singdist::model::{pose_config_real, DesignParams, Interpretation, MotionSpec, Side};
use singdist::varieties::collinearity;

use Side::{BarTriangle as Bar, Plate, Rigid};

fn example() -> (DesignParams, MotionSpec) {
    let d = DesignParams::new(11.0, 5.0, 7.0, 3.0, 1.0, 2.0);
    let m = MotionSpec {
        a0: [5.5, 1.5],
        a1: [0.0, -1.5],
        b1: [-3.0, 0.0],
        v: 0.0,
        w: std::f64::consts::TAU,
        n: 90,
        phase: 0.0,
    };
    (d, m)
}

#[test]
fn unknown_counts() {
    let cases = [
        (Interpretation::new(Rigid, Rigid), BranchKind::SingVariety, 11),
        (Interpretation::new(Plate, Rigid), BranchKind::SingVariety, 12),
        (Interpretation::new(Rigid, Bar), BranchKind::SingVariety, 12),
        (Interpretation::new(Bar, Bar), BranchKind::SingVariety, 13),
        (Interpretation::new(Bar, Rigid), BranchKind::CollinearityP, 12),
        (Interpretation::new(Bar, Plate), BranchKind::CollinearityP, 13),
        (Interpretation::new(Plate, Plate), BranchKind::SingPointCase1, 10),
        (Interpretation::new(Plate, Rigid), BranchKind::SingPointCase1, 8),
        (Interpretation::new(Rigid, Plate), BranchKind::SingPointCase1, 8),
        (Interpretation::new(Rigid, Rigid), BranchKind::SingPointCase1, 6),
        (Interpretation::new(Bar, Rigid), BranchKind::CollapsedP, 7),
        (Interpretation::new(Rigid, Bar), BranchKind::CollapsedB, 7),
        (Interpretation::Preliminary, BranchKind::Preliminary, 13),
    ];
    for (interp, branch, n) in cases {
        let sys = build_system(interp, branch).unwrap();
        assert_eq!(sys.n_unknowns(), n, "{interp} {branch}");
        assert_eq!(sys.system().equations().len(), n);
    }
    assert_eq!(build_rrr_system(BranchKind::RRRParallel).unwrap().n_unknowns(), 19);
    assert_eq!(build_rrr_system(BranchKind::RRRLeg(2)).unwrap().n_unknowns(), 19);
    assert_eq!(
        build_system_variants(Interpretation::new(Rigid, Rigid), BranchKind::SingPointCase1).unwrap().len(),
        2
    );
}

#[test]
fn bar_bar_roster() {
    let sys = build_system(Interpretation::new(Bar, Bar), BranchKind::SingVariety).unwrap();
    let mut names: Vec<&str> = sys.system().unknowns().iter().map(|s| s.as_str()).collect();
    names.sort();
    let mut want = vec!["lambda"];
    let coords: Vec<String> = (1..=6).flat_map(|i| [format!("c{i}"), format!("d{i}")]).collect();
    want.extend(coords.iter().map(|s| s.as_str()));
    want.sort();
    assert_eq!(names, want);
}

#[test]
fn incompatible_branches_rejected() {
    let e = build_system(Interpretation::new(Plate, Plate), BranchKind::CollinearityP).unwrap_err();
    assert!(matches!(e, LagrangianError::IncompatibleBranch { .. }));
    assert!(build_system(Interpretation::new(Bar, Plate), BranchKind::SingPointCase1).is_err());
    assert!(build_system(Interpretation::new(Bar, Plate), BranchKind::CollapsedP).is_err());
}

#[test]
fn pedal_points_reproduce_regression_example() {
    let (d, m) = example();
    let k = pose_config_real(&d, &m, std::f64::consts::FRAC_PI_2);
    let want = [
        [1.5195164, 1.7968665],
        [2.3515667, 4.5449419],
        [1.6289168, 2.1581914],
    ];
    for (interp, dist) in [
        (Interpretation::new(Bar, Plate), 0.5195729),
        (Interpretation::new(Bar, Bar), 0.46807561),
    ] {
        let kp = pedal_projection(interp, BranchKind::CollinearityP, &k).unwrap();
        for (i, w) in want.iter().enumerate() {
            let p = kp.k(4 + i);
            assert!((p[0] - w[0]).abs() < 1e-6 && (p[1] - w[1]).abs() < 1e-6, "{interp}: {p:?} vs {w:?}");
            let line = 0.9570920262 * p[0] - 0.2897841482 * p[1] - 0.9336136247;
            assert!(line.abs() < 1e-6);
        }
        assert!(collinearity(kp.k(4), kp.k(5), kp.k(6)).abs() < 1e-9);
        let dd = extrinsic_dist2(interp, &k, &kp).sqrt();
        assert!((dd - dist).abs() < 1e-6, "{interp}: {dd}");
        let closed = pose_independent_distance(interp, BranchKind::CollinearityP, &d).unwrap();
        assert!((closed - dist).abs() < 1e-6, "{interp}: closed form {closed}");
    }
}
