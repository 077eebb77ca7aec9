//! End-effector independent closeness indices of 3-RPR configurations, and the
//! orientation-/position-workspace distances used for comparison.

use nalgebra::{Matrix3, SMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homotopy::{keyed_gamma, total_degree_solve, univariate, Executor, HomotopyError, TrackerSettings};
use crate::model::{pose_config_real, Configuration, DesignParams, MotionSpec};
use crate::polynomials::{MultiPoly, ParameterizedSystem, PolyError};
use crate::scalar::{cross, Pt, C64};
use crate::varieties::singularity_polynomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KpiError {
    #[error("leg {0} has zero length")]
    ZeroLegLength(usize),
    #[error("all three carrier lines are parallel (strip radius {radius})")]
    AllParallel { radius: f64 },
    #[error("pose is singular")]
    SingularPose,
    #[error("the fixed-orientation singularity locus has no real point")]
    EmptyLocus,
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// All indices at one pose. Undefined entries are NaN.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpiVector {
    pub m: f64,
    pub ir: f64,
    pub v_raw: f64,
    pub ti: f64,
    pub mti: f64,
    pub ds: f64,
    pub mds: f64,
    pub cn: f64,
    pub mcn: f64,
    pub orientation_dist: f64,
    pub position_dist: f64,
}

impl KpiVector {
    pub const FIELDS: [&'static str; 11] = [
        "M",
        "IR",
        "V_raw",
        "TI",
        "MTI",
        "DS",
        "MDS",
        "CN",
        "MCN",
        "orientation_dist",
        "position_dist",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.m,
            self.ir,
            self.v_raw,
            self.ti,
            self.mti,
            self.ds,
            self.mds,
            self.cn,
            self.mcn,
            self.orientation_dist,
            self.position_dist,
        ]
    }
}

struct Leg {
    base: Pt<f64>,
    anchor: Pt<f64>,
    /// Unit direction base → platform anchor.
    u: Pt<f64>,
    len: f64,
}

fn legs(k: &Configuration<f64>) -> Result<[Leg; 3], KpiError> {
    let leg = |i: usize| {
        let (b, p) = (*k.k(i + 1), *k.k(i + 4));
        let d = [p[0] - b[0], p[1] - b[1]];
        let len = d[0].hypot(d[1]);
        if len == 0.0 {
            return Err(KpiError::ZeroLegLength(i + 1));
        }
        Ok(Leg {
            base: b,
            anchor: p,
            u: [d[0] / len, d[1] / len],
            len,
        })
    };
    Ok([leg(0)?, leg(1)?, leg(2)?])
}

/// `|det Ĵ|` with unit Plücker rows `(u_i ; b_i × u_i)`, together with the raw
/// singularity polynomial `V(K)`.
pub fn manipulability(k: &Configuration<f64>) -> Result<(f64, f64), KpiError> {
    let l = legs(k)?;
    let j = Matrix3::from_fn(|r, c| match c {
        0 => l[r].u[0],
        1 => l[r].u[1],
        _ => cross(&l[r].base, &l[r].u),
    });
    Ok((j.determinant().abs(), singularity_polynomial(k)))
}

const PARALLEL_TOL: f64 = 1e-12;

/// Line `n·x = c` with unit normal `n`.
fn carrier(l: &Leg) -> ([f64; 2], f64) {
    let n = [-l.u[1], l.u[0]];
    (n, n[0] * l.base[0] + n[1] * l.base[1])
}

fn intersect(a: &([f64; 2], f64), b: &([f64; 2], f64)) -> Option<Pt<f64>> {
    let det = a.0[0] * b.0[1] - a.0[1] * b.0[0];
    if det.abs() < PARALLEL_TOL {
        return None;
    }
    Some([(a.1 * b.0[1] - b.1 * a.0[1]) / det, (a.0[0] * b.1 - b.0[0] * a.1) / det])
}

fn strip_width(a: &([f64; 2], f64), b: &([f64; 2], f64)) -> f64 {
    // Parallel unit normals are equal up to sign.
    let s = if a.0[0] * b.0[0] + a.0[1] * b.0[1] >= 0.0 { 1.0 } else { -1.0 };
    (a.1 - s * b.1).abs()
}

/// Radius of the incircle of the triangle cut out by the three carrier lines.
///
/// Two parallel lines give the circle inscribed in their strip (half the strip
/// width); three parallel lines give half the widest strip, reported as
/// [`KpiError::AllParallel`].
pub fn incircle_radius(k: &Configuration<f64>) -> Result<f64, KpiError> {
    let l = legs(k)?;
    let lines = [carrier(&l[0]), carrier(&l[1]), carrier(&l[2])];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let v: Vec<Option<Pt<f64>>> = pairs.iter().map(|&(a, b)| intersect(&lines[a], &lines[b])).collect();
    match v.iter().filter(|p| p.is_none()).count() {
        0 => {
            let (a, b, c) = (v[0].unwrap(), v[1].unwrap(), v[2].unwrap());
            let dist = |p: Pt<f64>, q: Pt<f64>| (p[0] - q[0]).hypot(p[1] - q[1]);
            let perimeter = dist(a, b) + dist(b, c) + dist(a, c);
            if perimeter == 0.0 {
                return Ok(0.0);
            }
            let area2 = ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
            Ok(area2 / perimeter)
        }
        3 => {
            let w = pairs
                .iter()
                .map(|&(a, b)| strip_width(&lines[a], &lines[b]))
                .fold(0.0, f64::max);
            Err(KpiError::AllParallel { radius: w / 2.0 })
        }
        _ => {
            let (a, b) = pairs[v.iter().position(|p| p.is_none()).expect("one parallel pair")];
            Ok(strip_width(&lines[a], &lines[b]) / 2.0)
        }
    }
}

/// Pressure angle of the anchor `x` of leg `i` (on the moving side) for the
/// instantaneous motion that keeps the other two legs at fixed length.
fn pressure_angle(l: &[Leg; 3], i: usize, x: Pt<f64>, scale: f64) -> Result<f64, KpiError> {
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    let vel = match intersect(&carrier(&l[j]), &carrier(&l[k])) {
        // Instantaneous translation normal to the two parallel legs.
        None => [-l[j].u[1], l[j].u[0]],
        Some(q) => {
            let r = [x[0] - q[0], x[1] - q[1]];
            if r[0].hypot(r[1]) <= 1e-12 * scale {
                return Err(KpiError::SingularPose);
            }
            [-r[1], r[0]]
        }
    };
    let c = (l[i].u[0] * vel[0] + l[i].u[1] * vel[1]).abs() / vel[0].hypot(vel[1]);
    Ok(c.min(1.0).acos())
}

/// `(TI, MTI, DS, MDS)` from the pressure angles `α_i` (platform moving) and
/// `β_i` (base moving).
pub fn transmission_indices(k: &Configuration<f64>) -> Result<(f64, f64, f64, f64), KpiError> {
    let l = legs(k)?;
    let scale = 1.0 + k.max_abs();
    let mut alpha = [0.0; 3];
    let mut beta = [0.0; 3];
    for i in 0..3 {
        alpha[i] = pressure_angle(&l, i, l[i].anchor, scale)?;
        beta[i] = pressure_angle(&l, i, l[i].base, scale)?;
    }
    let half = std::f64::consts::FRAC_PI_2;
    let amax = alpha.iter().cloned().fold(0.0, f64::max);
    let mean: Vec<f64> = (0..3).map(|i| (alpha[i] + beta[i]) / 2.0).collect();
    let mmax = mean.iter().cloned().fold(0.0, f64::max);
    let ti = alpha.iter().map(|a| a.cos()).fold(1.0, f64::min);
    let mti = mean.iter().map(|a| a.cos()).fold(1.0, f64::min);
    Ok((ti.max(0.0), mti.max(0.0), 1.0 - amax / half, 1.0 - mmax / half))
}

/// `(CN, MCN)` from the extreme eigenvalues `μ±` of the quadratic form
/// `|θ̇|²` on the unit sphere of prismatic rates, `θ̇` being the six passive
/// revolute rates (three base joints, three platform joints).
pub fn control_numbers(k: &Configuration<f64>) -> Result<(f64, f64), KpiError> {
    let l = legs(k)?;
    // Platform twist (ω, v): ṗ = v + ω J p with J(x, y) = (−y, x).
    let jp = |p: Pt<f64>| [-p[1], p[0]];
    let a = Matrix3::from_fn(|r, c| match c {
        0 => l[r].u[0] * jp(l[r].anchor)[0] + l[r].u[1] * jp(l[r].anchor)[1],
        _ => l[r].u[c - 1],
    });
    let a_inv = a.try_inverse().ok_or(KpiError::SingularPose)?;
    let mut b = SMatrix::<f64, 6, 3>::zeros();
    for (r, leg) in l.iter().enumerate() {
        // Leg angle rate (u × ṗ) / ℓ.
        let row = [
            cross(&leg.u, &jp(leg.anchor)) / leg.len,
            -leg.u[1] / leg.len,
            leg.u[0] / leg.len,
        ];
        for c in 0..3 {
            b[(r, c)] = row[c];
            b[(r + 3, c)] = row[c];
        }
        b[(r + 3, 0)] -= 1.0;
    }
    let g = b * a_inv;
    let eig = (g.transpose() * g).symmetric_eigenvalues();
    let (lo, hi) = (eig.min().max(0.0), eig.max());
    if !hi.is_finite() || hi <= 0.0 {
        return Err(KpiError::SingularPose);
    }
    Ok(((lo / hi).sqrt(), (1.0 / hi).sqrt()))
}

fn platform_at(design: &DesignParams, position: Pt<f64>, zeta: f64) -> Configuration<f64> {
    let (s, c) = zeta.sin_cos();
    let mut pts: Vec<Pt<f64>> = design.base_points().to_vec();
    for p in design.platform_points() {
        pts.push([c * p[0] - s * p[1] + position[0], s * p[0] + c * p[1] + position[1]]);
    }
    Configuration::new(pts).expect("six points")
}

/// Shorter-arc distance between two angles, in `[0, π]`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Distance `|ζ0 − ζ|` (shorter arc) to the nearest singular orientation with
/// the platform origin held at `position`.
///
/// `V` is a trigonometric polynomial of order three in `ζ`; its coefficients
/// come from eight samples, and the real roots from the tan-half substitution.
pub fn orientation_distance(design: &DesignParams, position: Pt<f64>, zeta0: f64) -> Result<f64, KpiError> {
    const N: usize = 8;
    let samples: Vec<f64> = (0..N)
        .map(|m| singularity_polynomial(&platform_at(design, position, std::f64::consts::TAU * m as f64 / N as f64)))
        .collect();
    // c[k + 3] is the coefficient of e^{ikζ}, k = −3..3.
    let coef: Vec<C64> = (-3i32..=3)
        .map(|k| {
            samples
                .iter()
                .enumerate()
                .map(|(m, v)| C64::from_polar(*v, -std::f64::consts::TAU * (k * m as i32) as f64 / N as f64))
                .sum::<C64>()
                / N as f64
        })
        .collect();
    let v_at = |z: f64| -> (f64, f64) {
        let mut v = C64::new(0.0, 0.0);
        let mut dv = C64::new(0.0, 0.0);
        for (idx, c) in coef.iter().enumerate() {
            let k = idx as f64 - 3.0;
            let e = C64::from_polar(1.0, k * z);
            v += c * e;
            dv += c * e * C64::new(0.0, k);
        }
        (v.re, dv.re)
    };
    // (1 + u²)³ e^{ikζ} = (1 + iu)^{3+k} (1 − iu)^{3−k}.
    let mut poly = vec![C64::new(0.0, 0.0); 7];
    for (idx, c) in coef.iter().enumerate() {
        let term = binomial_product(idx, 6 - idx);
        for (d, t) in term.iter().enumerate() {
            poly[d] += c * t;
        }
    }
    let scale = coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut candidates: Vec<f64> = univariate::roots(&poly)
        .into_iter()
        .filter(|u| u.im.abs() <= 1e-6 * (1.0 + u.norm()))
        .map(|u| 2.0 * u.re.atan())
        .collect();
    // Degree drop in u: a root at ζ = π.
    if poly[6].norm() <= 1e-9 * scale {
        candidates.push(std::f64::consts::PI);
    }
    let mut best: Option<f64> = None;
    for mut z in candidates {
        for _ in 0..4 {
            let (v, dv) = v_at(z);
            if dv.abs() > 0.0 && (v / dv).is_finite() && (v / dv).abs() < 0.1 {
                z -= v / dv;
            }
        }
        if v_at(z).0.abs() <= 1e-8 * scale {
            let gap = angle_gap(zeta0, z);
            best = Some(best.map_or(gap, |b: f64| b.min(gap)));
        }
    }
    best.ok_or(KpiError::EmptyLocus)
}

/// Coefficients in `u` of `(1 + iu)^p (1 − iu)^q`.
fn binomial_product(p: usize, q: usize) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    let mul = |poly: &[C64], lin: C64| {
        let mut r = vec![C64::new(0.0, 0.0); poly.len() + 1];
        for (d, c) in poly.iter().enumerate() {
            r[d] += c;
            r[d + 1] += c * lin;
        }
        r
    };
    for _ in 0..p {
        out = mul(&out, C64::new(0.0, 1.0));
    }
    for _ in 0..q {
        out = mul(&out, C64::new(0.0, -1.0));
    }
    out
}

/// Euclidean distance from `position` to the fixed-orientation singularity
/// locus `V(x, y; ζ0) = 0`, from the critical points of
/// `(x − x0)² + (y − y0)² + λ V` (total-degree homotopy).
pub fn position_distance(
    design: &DesignParams,
    position: Pt<f64>,
    zeta0: f64,
    settings: &TrackerSettings,
    exec: &Executor,
) -> Result<f64, KpiError> {
    let (s, c) = zeta0.sin_cos();
    let cst = |v: f64| MultiPoly::constant(C64::new(v, 0.0));
    let (x, y, lambda) = (MultiPoly::var(0), MultiPoly::var(1), MultiPoly::var(2));
    let mut pts: Vec<Pt<MultiPoly>> = design.base_points().iter().map(|b| [cst(b[0]), cst(b[1])]).collect();
    for p in design.platform_points() {
        pts.push([cst(c * p[0] - s * p[1]) + x.clone(), cst(s * p[0] + c * p[1]) + y.clone()]);
    }
    let v = singularity_polynomial(&Configuration::new(pts).expect("six points"));
    if v.is_zero() {
        return Ok(0.0);
    }
    let eqs = vec![
        (x.clone() - cst(position[0])).scale(C64::new(2.0, 0.0)) + lambda.clone() * v.derivative(0),
        (y.clone() - cst(position[1])).scale(C64::new(2.0, 0.0)) + lambda * v.derivative(1),
        v,
    ];
    let sys = ParameterizedSystem::new(eqs, vec!["x".into(), "y".into(), "lambda".into()], vec![])?;
    let key = [C64::new(position[0], position[1]), C64::new(zeta0, 0.0)];
    let sols = total_degree_solve(&sys, settings, keyed_gamma(0, &key), 1 << 12, exec)?;
    let scale = 1.0 + position[0].abs() + position[1].abs();
    sols.points
        .iter()
        .filter(|s| s.x[0].im.abs() <= 1e-6 * scale && s.x[1].im.abs() <= 1e-6 * scale)
        .map(|s| (s.x[0].re - position[0]).hypot(s.x[1].re - position[1]))
        .min_by(f64::total_cmp)
        .ok_or(KpiError::EmptyLocus)
}

/// Platform origin and orientation `ζ = φ + phase` of the motion at `φ`.
pub fn motion_frame(motion: &MotionSpec, phi: f64) -> (Pt<f64>, f64) {
    let (s, c) = phi.sin_cos();
    let t = [
        motion.a0[0] + motion.a1[0] * c + motion.b1[0] * s,
        motion.a0[1] + motion.a1[1] * c + motion.b1[1] * s,
    ];
    (t, phi + motion.phase)
}

/// All indices at pose `φ` of `motion`.
///
/// Exactly singular poses take the limiting values: `CN = MCN = 0`, and
/// pressure angles of `π/2`.
pub fn kpi_at(
    design: &DesignParams,
    motion: &MotionSpec,
    phi: f64,
    settings: &TrackerSettings,
    exec: &Executor,
) -> Result<KpiVector, KpiError> {
    let k = pose_config_real(design, motion, phi);
    let (m, v_raw) = manipulability(&k)?;
    let ir = match incircle_radius(&k) {
        Ok(r) | Err(KpiError::AllParallel { radius: r }) => r,
        Err(e) => return Err(e),
    };
    let (ti, mti, ds, mds) = match transmission_indices(&k) {
        Ok(t) => t,
        Err(KpiError::SingularPose) => (0.0, 0.0, 0.0, 0.0),
        Err(e) => return Err(e),
    };
    let (cn, mcn) = match control_numbers(&k) {
        Ok(t) => t,
        Err(KpiError::SingularPose) => (0.0, 0.0),
        Err(e) => return Err(e),
    };
    let (pos, zeta) = motion_frame(motion, phi);
    let orientation_dist = orientation_distance(design, pos, zeta).unwrap_or(f64::NAN);
    let position_dist = position_distance(design, pos, zeta, settings, exec).unwrap_or(f64::NAN);
    Ok(KpiVector {
        m,
        ir,
        v_raw,
        ti,
        mti,
        ds,
        mds,
        cn,
        mcn,
        orientation_dist,
        position_dist,
    })
}

/// Indices at every pose of `motion`, in pose order; parallel per pose.
pub fn kpi_sweep(
    design: &DesignParams,
    motion: &MotionSpec,
    settings: &TrackerSettings,
    exec: &Executor,
) -> Result<Vec<(f64, KpiVector)>, KpiError> {
    let serial = Executor::new(1);
    exec.map(&motion.poses(), |&phi| kpi_at(design, motion, phi, settings, &serial).map(|v| (phi, v)))
        .into_iter()
        .collect()
}

/// Plot-layer scaling: `M` and `V_raw` min–max scaled to `[0, 1]` over the
/// sweep, `CN` multiplied by five. Other fields are unchanged.
pub fn plot_scaled(rows: &[(f64, KpiVector)]) -> Vec<(f64, KpiVector)> {
    let range = |f: fn(&KpiVector) -> f64| {
        let vals = rows.iter().map(|(_, v)| f(v)).filter(|v| v.is_finite());
        vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (m_lo, m_hi) = range(|v| v.m);
    let (v_lo, v_hi) = range(|v| v.v_raw);
    let unit = |x: f64, lo: f64, hi: f64| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 };
    rows.iter()
        .map(|(phi, v)| {
            let mut s = *v;
            s.m = unit(v.m, m_lo, m_hi);
            s.v_raw = unit(v.v_raw, v_lo, v_hi);
            s.cn = 5.0 * v.cn;
            (*phi, s)
        })
        .collect()
}
