//! Manipulator geometry, interpretations, configurations and one-parametric motions.
//!
//! The fixed frame is normalized so that `k1 = (0,0)` and `k2 = (x2,0)`; the
//! platform frame so that `p4 = (0,0)` and `p5 = (x5,0)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Pt, Ring, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("architecture singular: {0} anchor points collapse to a single point")]
    ArchitectureSingular(&'static str),
    #[error("configuration arity {0} is neither 6 nor 9")]
    ArityMismatch(usize),
    #[error("invalid motion: {0}")]
    InvalidMotion(String),
    #[error("configuration has nonzero imaginary parts")]
    NotReal,
    #[error("unknown interpretation `{0}`")]
    UnknownInterpretation(String),
}

/// Structural reading of the base or the platform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    /// Deformable triangular plate.
    Plate,
    /// Three pin-jointed bars.
    BarTriangle,
    /// Rigid body.
    Rigid,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Plate => "plate",
            Side::BarTriangle => "bar",
            Side::Rigid => "rigid",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Side::Plate => "▲",
            Side::BarTriangle => "△",
            Side::Rigid => "▭",
        }
    }

    fn parse(s: &str) -> Option<Side> {
        match s {
            "plate" | "▲" => Some(Side::Plate),
            "bar" | "△" => Some(Side::BarTriangle),
            "rigid" | "▭" => Some(Side::Rigid),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Interpretation {
    Pair { platform: Side, base: Side },
    /// Mean squared displacement of the six anchor points.
    Preliminary,
}

impl Interpretation {
    pub const fn new(platform: Side, base: Side) -> Self {
        Interpretation::Pair { platform, base }
    }

    /// The nine pairs, rigid-rigid first, then the mixed rigid cases, then the affine ones.
    pub fn all9() -> [Interpretation; 9] {
        use Side::*;
        [
            Self::new(Rigid, Rigid),
            Self::new(Plate, Rigid),
            Self::new(BarTriangle, Rigid),
            Self::new(Rigid, Plate),
            Self::new(Rigid, BarTriangle),
            Self::new(Plate, Plate),
            Self::new(BarTriangle, Plate),
            Self::new(Plate, BarTriangle),
            Self::new(BarTriangle, BarTriangle),
        ]
    }

    pub fn platform(self) -> Option<Side> {
        match self {
            Interpretation::Pair { platform, .. } => Some(platform),
            Interpretation::Preliminary => None,
        }
    }

    pub fn base(self) -> Option<Side> {
        match self {
            Interpretation::Pair { base, .. } => Some(base),
            Interpretation::Preliminary => None,
        }
    }

    /// Same interpretation with the roles of platform and base exchanged.
    pub fn mirrored(self) -> Self {
        match self {
            Interpretation::Pair { platform, base } => Interpretation::Pair {
                platform: base,
                base: platform,
            },
            Interpretation::Preliminary => Interpretation::Preliminary,
        }
    }

    /// Stable ASCII label `platform-base`, e.g. `bar-rigid`.
    pub fn label(self) -> String {
        match self {
            Interpretation::Pair { platform, base } => {
                format!("{}-{}", platform.label(), base.label())
            }
            Interpretation::Preliminary => "preliminary".to_string(),
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Interpretation {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "preliminary" {
            return Ok(Interpretation::Preliminary);
        }
        let err = || ModelError::UnknownInterpretation(s.to_string());
        let (p, b) = s.split_once('-').ok_or_else(err)?;
        Ok(Interpretation::new(
            Side::parse(p).ok_or_else(err)?,
            Side::parse(b).ok_or_else(err)?,
        ))
    }
}

/// Normalized design: base `k1=(0,0), k2=(x2,0), k3=(x3,y3)`,
/// platform `p4=(0,0), p5=(x5,0), p6=(x6,y6)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub x2: f64,
    pub x3: f64,
    pub y3: f64,
    pub x5: f64,
    pub x6: f64,
    pub y6: f64,
}

impl DesignParams {
    pub fn new(x2: f64, x3: f64, y3: f64, x5: f64, x6: f64, y6: f64) -> Self {
        DesignParams {
            x2,
            x3,
            y3,
            x5,
            x6,
            y6,
        }
    }

    pub fn base_points(&self) -> [Pt<f64>; 3] {
        [[0.0, 0.0], [self.x2, 0.0], [self.x3, self.y3]]
    }

    pub fn platform_points(&self) -> [Pt<f64>; 3] {
        [[0.0, 0.0], [self.x5, 0.0], [self.x6, self.y6]]
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            base: self.base_points(),
            platform: self.platform_points(),
        }
    }

    /// Rejects collapsed anchor triples and non-canonical labelings.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.x2 == 0.0 && self.x3 == 0.0 && self.y3 == 0.0 {
            return Err(ModelError::ArchitectureSingular("base"));
        }
        if self.x5 == 0.0 && self.x6 == 0.0 && self.y6 == 0.0 {
            return Err(ModelError::ArchitectureSingular("platform"));
        }
        let all = [self.x2, self.x3, self.y3, self.x5, self.x6, self.y6];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidMotion("non-finite design parameter".into()));
        }
        Ok(())
    }

    pub fn is_canonical(&self) -> bool {
        self.x2 != 0.0 && self.x5 != 0.0
    }

    /// Exchanges the roles of base and platform.
    pub fn mirrored(&self) -> Self {
        DesignParams::new(self.x5, self.x6, self.y6, self.x2, self.x3, self.y3)
    }
}

/// Unnormalized anchor geometry: base points in the fixed frame and platform
/// points in the moving frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub base: [Pt<f64>; 3],
    pub platform: [Pt<f64>; 3],
}

/// Result of [`relabel_canonical`]: the normalized design plus the frame changes
/// needed to carry a motion along.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Relabeling {
    pub design: DesignParams,
    /// New leg `i` is old leg `permutation[i]`.
    pub permutation: [usize; 3],
    pub base_origin: Pt<f64>,
    pub base_angle: f64,
    pub platform_origin: Pt<f64>,
    pub platform_angle: f64,
}

fn rot(a: f64, p: Pt<f64>) -> Pt<f64> {
    let (s, c) = a.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

fn same(a: Pt<f64>, b: Pt<f64>) -> bool {
    a[0] == b[0] && a[1] == b[1]
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Relabels legs so that the first two anchors differ on both base and platform,
/// then normalizes both frames. The lexicographically first valid permutation wins.
pub fn relabel_canonical(geometry: &Geometry) -> Result<Relabeling, ModelError> {
    let b = geometry.base;
    let p = geometry.platform;
    if same(b[0], b[1]) && same(b[1], b[2]) {
        return Err(ModelError::ArchitectureSingular("base"));
    }
    if same(p[0], p[1]) && same(p[1], p[2]) {
        return Err(ModelError::ArchitectureSingular("platform"));
    }
    let perm = PERMUTATIONS
        .iter()
        .copied()
        .find(|q| !same(b[q[0]], b[q[1]]) && !same(p[q[0]], p[q[1]]))
        .ok_or(ModelError::ArchitectureSingular("base and platform"))?;
    let frame = |pts: [Pt<f64>; 3]| {
        let o = pts[perm[0]];
        let d = [pts[perm[1]][0] - o[0], pts[perm[1]][1] - o[1]];
        let ang = d[1].atan2(d[0]);
        let local: Vec<Pt<f64>> = perm
            .iter()
            .map(|&i| {
                let q = rot(-ang, [pts[i][0] - o[0], pts[i][1] - o[1]]);
                [q[0], q[1]]
            })
            .collect();
        (o, ang, local)
    };
    let (bo, ba, bl) = frame(b);
    let (po, pa, pl) = frame(p);
    // The second point lies on the positive x-axis by construction; clean rounding noise.
    let design = DesignParams::new(bl[1][0], bl[2][0], bl[2][1], pl[1][0], pl[2][0], pl[2][1]);
    Ok(Relabeling {
        design,
        permutation: perm,
        base_origin: bo,
        base_angle: ba,
        platform_origin: po,
        platform_angle: pa,
    })
}

impl Relabeling {
    /// Re-expresses a motion of the original geometry in the normalized frames.
    pub fn transform_motion(&self, m: &MotionSpec) -> MotionSpec {
        let o = self.platform_origin;
        let jo = [-o[1], o[0]];
        let beta = self.base_angle;
        let a0 = rot(-beta, [m.a0[0] - self.base_origin[0], m.a0[1] - self.base_origin[1]]);
        let a1 = rot(-beta, [m.a1[0] + o[0], m.a1[1] + o[1]]);
        let b1 = rot(-beta, [m.b1[0] + jo[0], m.b1[1] + jo[1]]);
        MotionSpec {
            a0,
            a1,
            b1,
            phase: m.phase + self.platform_angle - beta,
            ..*m
        }
    }
}

/// Platform rotation by `φ + phase` and translation `a0 + a1 cos φ + b1 sin φ`,
/// sampled at `n` equally spaced values of `φ ∈ [v, w]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionSpec {
    pub a0: Pt<f64>,
    pub a1: Pt<f64>,
    pub b1: Pt<f64>,
    pub v: f64,
    pub w: f64,
    pub n: usize,
    #[serde(default)]
    pub phase: f64,
}

impl MotionSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 2 {
            return Err(ModelError::InvalidMotion(format!("n = {} < 2", self.n)));
        }
        if !(self.v < self.w) {
            return Err(ModelError::InvalidMotion(format!(
                "interval [{}, {}] is empty",
                self.v, self.w
            )));
        }
        Ok(())
    }

    pub fn poses(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| self.v + (self.w - self.v) * k as f64 / (n - 1) as f64)
            .collect()
    }

    /// Pose `φ = v − (v − w)(1 − α)` for a (possibly complex) path parameter `α`.
    pub fn pose_at(&self, alpha: C64) -> C64 {
        C64::new(self.v, 0.0) - (C64::new(1.0, 0.0) - alpha) * (self.v - self.w)
    }
}

/// Configuration of 6 (3-RPR) or 9 (3-RRR) labeled points over a ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration<T> {
    points: Vec<Pt<T>>,
}

impl<T: Clone> Configuration<T> {
    pub fn new(points: Vec<Pt<T>>) -> Result<Self, ModelError> {
        match points.len() {
            6 | 9 => Ok(Configuration { points }),
            n => Err(ModelError::ArityMismatch(n)),
        }
    }

    /// Builds from the flat coordinate list `c1, d1, c2, d2, ...`.
    pub fn from_flat(coords: &[T]) -> Result<Self, ModelError> {
        if coords.len() % 2 != 0 {
            return Err(ModelError::ArityMismatch(coords.len()));
        }
        Self::new(
            coords
                .chunks(2)
                .map(|c| [c[0].clone(), c[1].clone()])
                .collect(),
        )
    }

    pub fn arity(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Pt<T>] {
        &self.points
    }

    /// 1-based anchor access: `k(1)` is `k1`.
    pub fn k(&self, i: usize) -> &Pt<T> {
        &self.points[i - 1]
    }

    pub fn flat(&self) -> Vec<T> {
        self.points
            .iter()
            .flat_map(|p| [p[0].clone(), p[1].clone()])
            .collect()
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Configuration<U> {
        Configuration {
            points: self.points.iter().map(|p| [f(&p[0]), f(&p[1])]).collect(),
        }
    }
}

impl<T: Ring> Configuration<T> {
    /// Swaps base and platform anchors (3-RPR only).
    pub fn swapped_roles(&self) -> Self {
        assert_eq!(self.arity(), 6);
        let mut pts = self.points[3..].to_vec();
        pts.extend_from_slice(&self.points[..3]);
        Configuration { points: pts }
    }
}

impl Configuration<f64> {
    pub fn to_complex(&self) -> Configuration<C64> {
        self.map(|&v| C64::new(v, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| [p[0].abs(), p[1].abs()])
            .fold(0.0, f64::max)
    }

    pub fn max_displacement(&self, other: &Configuration<f64>) -> f64 {
        self.points
            .iter()
            .zip(other.points.iter())
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }
}

impl Configuration<C64> {
    /// Exact conversion; fails if any imaginary part is nonzero.
    pub fn to_real(&self) -> Result<Configuration<f64>, ModelError> {
        if self.points.iter().any(|p| p[0].im != 0.0 || p[1].im != 0.0) {
            return Err(ModelError::NotReal);
        }
        Ok(self.map(|v| v.re))
    }

    pub fn re(&self) -> Configuration<f64> {
        self.map(|v| v.re)
    }
}

/// Moving-platform pose; complex during seeding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose(pub C64);

impl From<f64> for Pose {
    fn from(phi: f64) -> Self {
        Pose(C64::new(phi, 0.0))
    }
}

impl From<C64> for Pose {
    fn from(phi: C64) -> Self {
        Pose(phi)
    }
}

/// `k1..k3` from the design, `k_{j} = R(φ) p_j + t(φ)` for `j = 4..6`.
pub fn pose_config(design: &DesignParams, motion: &MotionSpec, phi: impl Into<Pose>) -> Configuration<C64> {
    let phi = phi.into().0;
    let ang = phi + motion.phase;
    let (s, c) = (ang.sin(), ang.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    let t = [
        motion.a0[0] + motion.a1[0] * cp + motion.b1[0] * sp,
        motion.a0[1] + motion.a1[1] * cp + motion.b1[1] * sp,
    ];
    let mut pts: Vec<Pt<C64>> = design
        .base_points()
        .iter()
        .map(|b| [C64::new(b[0], 0.0), C64::new(b[1], 0.0)])
        .collect();
    for p in design.platform_points() {
        pts.push([c * p[0] - s * p[1] + t[0], s * p[0] + c * p[1] + t[1]]);
    }
    Configuration { points: pts }
}

/// Real-pose convenience wrapper around [`pose_config`].
pub fn pose_config_real(design: &DesignParams, motion: &MotionSpec, phi: f64) -> Configuration<f64> {
    pose_config(design, motion, phi)
        .to_real()
        .unwrap_or_else(|_| unreachable!("real pose yields a real configuration"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (DesignParams, MotionSpec) {
        (
            DesignParams::new(11.0, 5.0, 7.0, 3.0, 1.0, 2.0),
            MotionSpec {
                a0: [5.5, 1.5],
                a1: [0.0, -1.5],
                b1: [-3.0, 0.0],
                v: 0.0,
                w: 2.0 * std::f64::consts::PI,
                n: 90,
                phase: 0.0,
            },
        )
    }

    #[test]
    fn pose_at_zero() {
        let (d, m) = example();
        let k = pose_config_real(&d, &m, 0.0);
        assert_eq!(k.k(4), &[5.5, 0.0]);
        assert_eq!(k.k(5), &[8.5, 0.0]);
        assert_eq!(k.k(6), &[6.5, 2.0]);
        assert_eq!(k.k(2), &[11.0, 0.0]);
    }

    #[test]
    fn complex_pose_has_imaginary_parts() {
        let (d, m) = example();
        let k = pose_config(&d, &m, C64::new(1.0, 0.5));
        assert!(k.to_real().is_err());
        assert!(k.k(4)[0].im.abs() > 1e-3);
    }

    #[test]
    fn relabel_keeps_canonical_design() {
        let (d, _) = example();
        let r = relabel_canonical(&d.geometry()).unwrap();
        assert_eq!(r.permutation, [0, 1, 2]);
        assert_eq!(r.design, d);
    }

    #[test]
    fn relabel_moves_distinct_pair_first() {
        let g = Geometry {
            base: [[1.0, 1.0], [1.0, 1.0], [4.0, 5.0]],
            platform: [[0.0, 0.0], [2.0, 0.0], [0.5, 1.0]],
        };
        let r = relabel_canonical(&g).unwrap();
        assert_eq!(r.permutation, [0, 2, 1]);
        assert!(r.design.is_canonical());
        assert!((r.design.x2 - 5.0).abs() < 1e-12);
        let again = relabel_canonical(&r.design.geometry()).unwrap();
        assert_eq!(again.permutation, [0, 1, 2]);
        assert_eq!(again.design, r.design);
    }

    #[test]
    fn collapsed_base_rejected() {
        let g = Geometry {
            base: [[2.0, 3.0]; 3],
            platform: [[0.0, 0.0], [2.0, 0.0], [0.5, 1.0]],
        };
        assert_eq!(
            relabel_canonical(&g),
            Err(ModelError::ArchitectureSingular("base"))
        );
        assert!(DesignParams::new(0.0, 0.0, 0.0, 1.0, 2.0, 3.0).validate().is_err());
    }

    #[test]
    fn arity_checked() {
        assert_eq!(
            Configuration::<f64>::new(vec![[0.0, 0.0]; 7]).unwrap_err(),
            ModelError::ArityMismatch(7)
        );
    }

    #[test]
    fn interpretation_labels_round_trip() {
        for i in Interpretation::all9() {
            assert_eq!(i.label().parse::<Interpretation>().unwrap(), i);
        }
        assert_eq!(
            "preliminary".parse::<Interpretation>().unwrap(),
            Interpretation::Preliminary
        );
    }

    #[test]
    fn motion_validation() {
        let (_, mut m) = example();
        assert!(m.validate().is_ok());
        m.w = m.v;
        assert!(m.validate().is_err());
        m.w = 1.0;
        m.n = 1;
        assert!(m.validate().is_err());
    }
}
