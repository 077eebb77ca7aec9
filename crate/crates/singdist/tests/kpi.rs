use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use singdist::homotopy::{Executor, TrackerSettings};
use singdist::kpi::{
    angle_gap, control_numbers, incircle_radius, manipulability, motion_frame, orientation_distance,
    position_distance, transmission_indices, KpiError,
};
use singdist::model::{pose_config_real, Configuration, DesignParams, MotionSpec};
use singdist::scalar::Pt;

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

fn cfg(pts: [Pt<f64>; 6]) -> Configuration<f64> {
    Configuration::new(pts.to_vec()).unwrap()
}

fn random_config(rng: &mut ChaCha8Rng) -> Configuration<f64> {
    let pts: Vec<Pt<f64>> = (0..6).map(|_| [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]).collect();
    Configuration::new(pts).unwrap()
}

fn scaled(k: &Configuration<f64>, s: f64) -> Configuration<f64> {
    k.map(|v| v * s)
}

/// Raw singularity polynomial by explicit cofactor expansion along the first row.
fn v_cofactor(k: &Configuration<f64>) -> f64 {
    let mut rows = [[0.0; 3]; 3];
    for i in 0..3 {
        let b = k.k(i + 1);
        let p = k.k(i + 4);
        let (dx, dy) = (p[0] - b[0], p[1] - b[1]);
        rows[0][i] = dx;
        rows[1][i] = dy;
        rows[2][i] = b[0] * dy - b[1] * dx;
    }
    let m = |r1: usize, c1: usize, r2: usize, c2: usize| rows[r1][c1] * rows[r2][c2] - rows[r1][c2] * rows[r2][c1];
    rows[0][0] * m(1, 1, 2, 2) - rows[0][1] * m(1, 0, 2, 2) + rows[0][2] * m(1, 0, 2, 1)
}

#[test]
fn manipulability_singular_and_cofactor_oracle() {
    let (d, m) = example();
    let (m0, v0) = manipulability(&pose_config_real(&d, &m, 0.0)).unwrap();
    assert!(m0 < 1e-12 && v0.abs() < 1e-10, "{m0} {v0}");

    let k = pose_config_real(&d, &m, 0.8471710528);
    let (mk, vk) = manipulability(&k).unwrap();
    let lens: f64 = (0..3)
        .map(|i| {
            let (b, p) = (k.k(i + 1), k.k(i + 4));
            (p[0] - b[0]).hypot(p[1] - b[1])
        })
        .product();
    let oracle = v_cofactor(&k);
    assert!((vk - oracle).abs() <= 1e-10 * oracle.abs(), "{vk} {oracle}");
    assert!(mk > 0.0);
    assert!((mk - oracle.abs() / lens).abs() <= 1e-10 * mk, "{mk}");
}

#[test]
fn manipulability_scales_linearly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let k = random_config(&mut rng);
        let s = rng.gen_range(0.2..5.0);
        let (a, _) = manipulability(&k).unwrap();
        let (b, _) = manipulability(&scaled(&k, s)).unwrap();
        assert!((b - s * a).abs() <= 1e-9 * (1.0 + b), "{a} {b} {s}");
    }
    let (d, m) = example();
    let (z, _) = manipulability(&scaled(&pose_config_real(&d, &m, 0.0), 3.0)).unwrap();
    assert!(z < 1e-11);
}

#[test]
fn zero_leg_is_rejected() {
    let k = cfg([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [2.0, 0.0], [0.0, 3.0]]);
    assert_eq!(manipulability(&k), Err(KpiError::ZeroLegLength(1)));
}

#[test]
fn incircle_cases() {
    // Three legs through the origin.
    let k = cfg([[1.0, 0.0], [0.0, 2.0], [-1.0, -1.0], [2.0, 0.0], [0.0, 3.0], [-2.0, -2.0]]);
    assert!(incircle_radius(&k).unwrap() < 1e-14);

    // Legs along the sides of an equilateral triangle of side a.
    let a = 3.0;
    let v = [[0.0, 0.0], [a, 0.0], [a / 2.0, a * 3f64.sqrt() / 2.0]];
    let k = cfg([v[0], v[1], v[2], v[1], v[2], v[0]]);
    let r = incircle_radius(&k).unwrap();
    assert!((r - a / (2.0 * 3f64.sqrt())).abs() < 1e-12, "{r}");

    // Two horizontal legs at heights 0 and 4, one oblique.
    let k = cfg([[0.0, 0.0], [0.0, 4.0], [0.0, -1.0], [5.0, 0.0], [3.0, 4.0], [1.0, 1.0]]);
    assert!((incircle_radius(&k).unwrap() - 2.0).abs() < 1e-12);

    // All horizontal at heights 0, 1, 5.
    let k = cfg([[0.0, 0.0], [0.0, 1.0], [0.0, 5.0], [1.0, 0.0], [2.0, 1.0], [-3.0, 5.0]]);
    match incircle_radius(&k) {
        Err(KpiError::AllParallel { radius }) => assert!((radius - 2.5).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

/// Pressure angles from the inverse instantaneous kinematics: the platform
/// twist produced by unit rate on one leg only.
fn pressure_oracle(k: &Configuration<f64>, moving_platform: bool) -> [f64; 3] {
    let kk = if moving_platform { k.clone() } else { k.swapped_roles() };
    let mut a = nalgebra::Matrix3::zeros();
    let mut u = [[0.0; 2]; 3];
    for i in 0..3 {
        let (b, p) = (kk.k(i + 1), kk.k(i + 4));
        let l = (p[0] - b[0]).hypot(p[1] - b[1]);
        u[i] = [(p[0] - b[0]) / l, (p[1] - b[1]) / l];
        // ρ̇ = u · (v + ω J p)
        a[(i, 0)] = u[i][0] * -p[1] + u[i][1] * p[0];
        a[(i, 1)] = u[i][0];
        a[(i, 2)] = u[i][1];
    }
    let inv = a.try_inverse().unwrap();
    let mut out = [0.0; 3];
    for i in 0..3 {
        let tw = inv.column(i);
        let p = kk.k(i + 4);
        let vel = [tw[1] - tw[0] * p[1], tw[2] + tw[0] * p[0]];
        let c = (u[i][0] * vel[0] + u[i][1] * vel[1]).abs() / vel[0].hypot(vel[1]);
        out[i] = c.min(1.0).acos();
    }
    out
}

#[test]
fn transmission_matches_instantaneous_kinematics() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let k = random_config(&mut rng);
        let (ti, mti, ds, mds) = transmission_indices(&k).unwrap();
        let al = pressure_oracle(&k, true);
        let be = pressure_oracle(&k, false);
        let half = std::f64::consts::FRAC_PI_2;
        let ti_o = al.iter().map(|a| a.cos()).fold(1.0, f64::min);
        let ds_o = 1.0 - al.iter().cloned().fold(0.0, f64::max) / half;
        let mean: Vec<f64> = (0..3).map(|i| (al[i] + be[i]) / 2.0).collect();
        let mti_o = mean.iter().map(|a| a.cos()).fold(1.0, f64::min);
        let mds_o = 1.0 - mean.iter().cloned().fold(0.0, f64::max) / half;
        for (x, y) in [(ti, ti_o), (ds, ds_o), (mti, mti_o), (mds, mds_o)] {
            assert!((x - y).abs() < 1e-7, "{x} {y}");
            assert!((0.0..=1.0).contains(&x));
        }
    }
}

#[test]
fn transmission_extremes() {
    let (d, m) = example();
    let (ti, _, ds, _) = transmission_indices(&pose_config_real(&d, &m, 0.0)).unwrap();
    assert!(ti < 1e-6 && ds < 1e-6, "{ti} {ds}");

    // Platform anchors at the feet of the altitudes of the line triangle.
    let (a, b, c) = ([0.0, 0.0], [6.0, 0.0], [2.0, 5.0]);
    let foot = |p: Pt<f64>, q: Pt<f64>, r: Pt<f64>| {
        let d = [r[0] - q[0], r[1] - q[1]];
        let s = ((p[0] - q[0]) * d[0] + (p[1] - q[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1]);
        [q[0] + s * d[0], q[1] + s * d[1]]
    };
    let k = cfg([a, b, c, foot(c, a, b), foot(a, b, c), foot(b, c, a)]);
    let (ti, _, ds, _) = transmission_indices(&k).unwrap();
    assert!((ti - 1.0).abs() < 1e-12 && (ds - 1.0).abs() < 1e-7, "{ti} {ds}");
}

#[test]
fn modified_indices_survive_role_swap() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ti_changed = 0;
    for _ in 0..100 {
        let k = random_config(&mut rng);
        let (ti, mti, _, mds) = transmission_indices(&k).unwrap();
        let (ti2, mti2, _, mds2) = transmission_indices(&k.swapped_roles()).unwrap();
        assert!((mti - mti2).abs() <= 1e-12 && (mds - mds2).abs() <= 1e-12);
        if (ti - ti2).abs() > 1e-6 {
            ti_changed += 1;
        }
    }
    assert!(ti_changed > 50);
}

/// Passive joint rates per unit prismatic rate by central differences of
/// finitely displaced platforms.
fn control_oracle(k: &Configuration<f64>) -> (f64, f64) {
    let h = 1e-6;
    let moved = |tw: [f64; 3], s: f64| -> ([f64; 3], [f64; 6]) {
        let (sn, cs) = (tw[0] * s).sin_cos();
        let mut rho = [0.0; 3];
        let mut ang = [0.0; 6];
        for i in 0..3 {
            let b = k.k(i + 1);
            let p = k.k(i + 4);
            let q = [cs * p[0] - sn * p[1] + tw[1] * s, sn * p[0] + cs * p[1] + tw[2] * s];
            let d = [q[0] - b[0], q[1] - b[1]];
            rho[i] = d[0].hypot(d[1]);
            let leg = d[1].atan2(d[0]);
            ang[i] = leg;
            ang[i + 3] = leg - tw[0] * s;
        }
        (rho, ang)
    };
    let mut r = nalgebra::Matrix3::zeros();
    let mut th = nalgebra::SMatrix::<f64, 6, 3>::zeros();
    for c in 0..3 {
        let mut tw = [0.0; 3];
        tw[c] = 1.0;
        let (rp, ap) = moved(tw, h);
        let (rm, am) = moved(tw, -h);
        for i in 0..3 {
            r[(i, c)] = (rp[i] - rm[i]) / (2.0 * h);
        }
        for i in 0..6 {
            th[(i, c)] = (ap[i] - am[i]) / (2.0 * h);
        }
    }
    let g = th * r.try_inverse().unwrap();
    let e = (g.transpose() * g).symmetric_eigenvalues();
    ((e.min() / e.max()).sqrt(), (1.0 / e.max()).sqrt())
}

#[test]
fn control_numbers_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let k = random_config(&mut rng);
        let (cn, mcn) = control_numbers(&k).unwrap();
        let (cn_o, mcn_o) = control_oracle(&k);
        assert!((cn - cn_o).abs() < 1e-5 * (1.0 + cn_o), "{cn} {cn_o}");
        assert!((mcn - mcn_o).abs() < 1e-5 * (1.0 + mcn_o), "{mcn} {mcn_o}");
    }
}

#[test]
fn control_numbers_range_and_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let k = random_config(&mut rng);
        let (cn, mcn) = control_numbers(&k).unwrap();
        assert!((0.0..=1.0).contains(&cn) && mcn > 0.0);
        let s = rng.gen_range(0.2..5.0);
        let (cn2, mcn2) = control_numbers(&scaled(&k, s)).unwrap();
        assert!((cn2 - cn).abs() < 1e-8 * (1.0 + cn.abs() / 1e-3), "{cn} {cn2}");
        // Joint rates per unit leg rate carry an inverse length.
        assert!((mcn2 - s * mcn).abs() < 1e-8 * mcn2, "{mcn} {mcn2} {s}");
    }
}

#[test]
fn control_number_vanishes_towards_singular_pose() {
    let (d, m) = example();
    let poses = m.poses();
    let tail: Vec<f64> = poses[poses.len() - 5..]
        .iter()
        .map(|&phi| control_numbers(&pose_config_real(&d, &m, phi)).map_or(0.0, |c| c.0))
        .collect();
    assert!(tail.windows(2).all(|w| w[1] < w[0]), "{tail:?}");
    assert!(tail[4] < 1e-3);
}

/// Nearest sign change of `V` on a 10⁻⁴ grid of orientations.
fn orientation_grid(d: &DesignParams, pos: Pt<f64>, zeta0: f64) -> f64 {
    let v = |z: f64| {
        let (s, c) = z.sin_cos();
        let mut pts: Vec<Pt<f64>> = d.base_points().to_vec();
        for p in d.platform_points() {
            pts.push([c * p[0] - s * p[1] + pos[0], s * p[0] + c * p[1] + pos[1]]);
        }
        singdist::varieties::singularity_polynomial(&Configuration::new(pts).unwrap())
    };
    let n = (std::f64::consts::TAU / 1e-4) as usize;
    let mut best = f64::INFINITY;
    let mut prev = (-std::f64::consts::PI, v(-std::f64::consts::PI));
    for i in 1..=n {
        let z = -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / n as f64;
        let vz = v(z);
        if vz == 0.0 || vz.signum() != prev.1.signum() {
            best = best.min(angle_gap(zeta0, (z + prev.0) / 2.0));
        }
        prev = (z, vz);
    }
    best
}

#[test]
fn orientation_distance_matches_grid() {
    let (d, m) = example();
    let (pos, zeta) = motion_frame(&m, 0.0);
    assert!(orientation_distance(&d, pos, zeta).unwrap() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..10 {
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let (pos, zeta) = motion_frame(&m, phi);
        let got = orientation_distance(&d, pos, zeta).unwrap();
        let grid = orientation_grid(&d, pos, zeta);
        assert!((got - grid).abs() < 1e-3, "phi {phi}: {got} vs {grid}");
        assert!((0.0..=std::f64::consts::PI).contains(&got));
    }
}

/// Nearest sign change of `V(x, y; ζ)` along 3600 rays from `pos`.
fn position_grid(d: &DesignParams, pos: Pt<f64>, zeta: f64) -> f64 {
    let (s, c) = zeta.sin_cos();
    let v = |x: f64, y: f64| {
        let mut pts: Vec<Pt<f64>> = d.base_points().to_vec();
        for p in d.platform_points() {
            pts.push([c * p[0] - s * p[1] + x, s * p[0] + c * p[1] + y]);
        }
        singdist::varieties::singularity_polynomial(&Configuration::new(pts).unwrap())
    };
    let v0 = v(pos[0], pos[1]);
    let mut best = f64::INFINITY;
    for k in 0..3600 {
        let th = std::f64::consts::TAU * k as f64 / 3600.0;
        let (dy, dx) = th.sin_cos();
        let at = |r: f64| v(pos[0] + r * dx, pos[1] + r * dy);
        let mut r = 0.0;
        while r < best.min(30.0) {
            let r2 = r + 1e-2;
            if at(r2).signum() != v0.signum() {
                let (mut lo, mut hi) = (r, r2);
                for _ in 0..40 {
                    let mid = (lo + hi) / 2.0;
                    if at(mid).signum() == v0.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                best = best.min(hi);
                break;
            }
            r = r2;
        }
    }
    best
}

#[test]
fn position_distance_matches_grid() {
    let (d, m) = example();
    let exec = Executor::new(1);
    let s = TrackerSettings::default();
    let (pos, zeta) = motion_frame(&m, 0.0);
    assert!(position_distance(&d, pos, zeta, &s, &exec).unwrap() < 1e-7);
    for phi in [0.8471710528, 2.0, 4.0] {
        let (pos, zeta) = motion_frame(&m, phi);
        let got = position_distance(&d, pos, zeta, &s, &exec).unwrap();
        let grid = position_grid(&d, pos, zeta);
        assert!((got - grid).abs() < 1e-3, "phi {phi}: {got} vs {grid}");
    }
}
