//! Critical-point systems of the constrained distance minimizations, and the
//! closed-form collinearity branches.

mod closed_form;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homotopy::Family;
use crate::metrics::{extrinsic_dist2, rrr_dist2};
use crate::model::{Configuration, Interpretation, Side};
use crate::polynomials::{MultiPoly, ParameterizedSystem, PolyError};
use crate::scalar::{Pt, Ring, C64};
use crate::varieties::{collinearity, pbr_point, side_condition, singularity_polynomial};

pub use closed_form::{
    complete_minimizer, pedal_projection, pedal_projection_candidates, pose_independent_distance,
    regression_line, ClosedFormError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BranchKind {
    /// Closest point on `V = 0`.
    SingVariety,
    /// Closest configuration with collinear platform anchors.
    CollinearityP,
    /// Closest configuration with collinear base anchors.
    CollinearityB,
    /// Closest configuration with all six anchors on one line.
    SingPointCase1,
    /// Platform anchors collapsed to one point.
    CollapsedP,
    /// Base anchors collapsed to one point.
    CollapsedB,
    /// Point-pair metric on `V = 0`.
    Preliminary,
    /// 3-RRR parallel singularity.
    RRRParallel,
    /// 3-RRR leg singularity of leg `i`.
    RRRLeg(u8),
}

impl BranchKind {
    pub fn label(self) -> String {
        match self {
            BranchKind::SingVariety => "sing-variety".into(),
            BranchKind::CollinearityP => "collinear-platform".into(),
            BranchKind::CollinearityB => "collinear-base".into(),
            BranchKind::SingPointCase1 => "collinear-all".into(),
            BranchKind::CollapsedP => "collapsed-platform".into(),
            BranchKind::CollapsedB => "collapsed-base".into(),
            BranchKind::Preliminary => "preliminary".into(),
            BranchKind::RRRParallel => "rrr-parallel".into(),
            BranchKind::RRRLeg(i) => format!("rrr-leg{i}"),
        }
    }

    pub fn parse(s: &str) -> Option<BranchKind> {
        Some(match s {
            "sing-variety" => BranchKind::SingVariety,
            "collinear-platform" => BranchKind::CollinearityP,
            "collinear-base" => BranchKind::CollinearityB,
            "collinear-all" => BranchKind::SingPointCase1,
            "collapsed-platform" => BranchKind::CollapsedP,
            "collapsed-base" => BranchKind::CollapsedB,
            "preliminary" => BranchKind::Preliminary,
            "rrr-parallel" => BranchKind::RRRParallel,
            "rrr-leg1" => BranchKind::RRRLeg(1),
            "rrr-leg2" => BranchKind::RRRLeg(2),
            "rrr-leg3" => BranchKind::RRRLeg(3),
            _ => return None,
        })
    }
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LagrangianError {
    #[error("branch {branch} is not compatible with interpretation {interp}")]
    IncompatibleBranch { interp: Interpretation, branch: BranchKind },
    #[error("branch {0} is not a 3-RRR branch")]
    NotRrr(BranchKind),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Whether `branch` is defined for `interp` (3-RRR branches never are).
pub fn branch_compatible(interp: Interpretation, branch: BranchKind) -> bool {
    use Side::*;
    match interp {
        Interpretation::Preliminary => {
            matches!(branch, BranchKind::SingVariety | BranchKind::Preliminary)
        }
        Interpretation::Pair { platform, base } => match branch {
            BranchKind::SingVariety => true,
            BranchKind::CollinearityP => platform == BarTriangle,
            BranchKind::CollinearityB => base == BarTriangle,
            BranchKind::CollapsedP => platform == BarTriangle && base == Rigid,
            BranchKind::CollapsedB => base == BarTriangle && platform == Rigid,
            BranchKind::SingPointCase1 => platform != BarTriangle && base != BarTriangle,
            _ => false,
        },
    }
}

/// Generic finite root count of each family.
///
/// The point-pair family and the 3-RRR leg families have no tabulated count;
/// their values (50 and 2) are the stable monodromy results over independent
/// random sources.
pub fn expected_count(interp: Option<Interpretation>, branch: BranchKind) -> Option<usize> {
    use Side::*;
    let rigid = |s: Side| s == Rigid;
    match (interp, branch) {
        (Some(Interpretation::Preliminary), BranchKind::SingVariety | BranchKind::Preliminary) => Some(50),
        (Some(Interpretation::Pair { platform, base }), b) => match b {
            BranchKind::SingVariety => Some(match (rigid(platform), rigid(base)) {
                (true, true) => 88,
                (false, false) => 50,
                _ => 80,
            }),
            BranchKind::CollinearityP => Some(if rigid(base) { 8 } else { 2 }),
            BranchKind::CollinearityB => Some(if rigid(platform) { 8 } else { 2 }),
            BranchKind::SingPointCase1 => Some(8),
            BranchKind::CollapsedP | BranchKind::CollapsedB => Some(2),
            _ => None,
        },
        (None, BranchKind::RRRParallel) => Some(50),
        (None, BranchKind::RRRLeg(1..=3)) => Some(2),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarKind {
    Unknown,
    Multiplier,
    LinParam,
    ShapeParam,
}

/// Variable registry that assigns provisional indices and reorders at the end
/// (unknowns first, multipliers after them, then parameters).
struct Registry {
    names: Vec<String>,
    kinds: Vec<VarKind>,
}

impl Registry {
    fn new() -> Self {
        Registry {
            names: Vec::new(),
            kinds: Vec::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, kind: VarKind) -> MultiPoly {
        self.names.push(name.into());
        self.kinds.push(kind);
        MultiPoly::var(self.names.len() - 1)
    }

    fn point(&mut self, c: &str, d: &str) -> Pt<MultiPoly> {
        [self.add(c, VarKind::Unknown), self.add(d, VarKind::Unknown)]
    }

    /// Final ordering: `map[old] = new`.
    fn order(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let pick = |ks: &[VarKind]| -> Vec<usize> {
            (0..self.kinds.len()).filter(|&i| ks.contains(&self.kinds[i])).collect()
        };
        let unknowns = pick(&[VarKind::Unknown]);
        let mults = pick(&[VarKind::Multiplier]);
        let params = pick(&[VarKind::LinParam, VarKind::ShapeParam]);
        let mut all = unknowns;
        let n_primal = all.len();
        all.extend(mults);
        let n_unknowns = all.len();
        all.extend(params);
        let mut map = vec![0; all.len()];
        for (new, &old) in all.iter().enumerate() {
            map[old] = new;
        }
        (map, all, vec![n_primal, n_unknowns])
    }
}

/// Reference configuration as linear parameters `C1, D1, …`.
fn reference(reg: &mut Registry, points: usize) -> Configuration<MultiPoly> {
    let pts: Vec<Pt<MultiPoly>> = (1..=points)
        .map(|i| {
            [
                reg.add(format!("C{i}"), VarKind::LinParam),
                reg.add(format!("D{i}"), VarKind::LinParam),
            ]
        })
        .collect();
    Configuration::new(pts).expect("6 or 9 points")
}

/// Assembled critical-point system for one `(interpretation, branch)`.
#[derive(Clone, Debug)]
pub struct CriticalSystem {
    pub interp: Option<Interpretation>,
    pub branch: BranchKind,
    /// `+1`/`−1` for the two rigid-rigid collinear-all systems, `0` otherwise.
    pub variant: i8,
    pub family: Family,
    /// Candidate configuration coordinates `c1, d1, …` in terms of unknowns and parameters.
    pub candidate: Vec<MultiPoly>,
    pub expected_count: Option<usize>,
}

/// Numeric anchor-triple shape: `(x_a, x_b, y_b)` local coordinates of the second
/// and third anchors, first anchor at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriShape {
    pub xa: C64,
    pub xb: C64,
    pub yb: C64,
}

impl TriShape {
    pub fn real(xa: f64, xb: f64, yb: f64) -> Self {
        TriShape {
            xa: C64::new(xa, 0.0),
            xb: C64::new(xb, 0.0),
            yb: C64::new(yb, 0.0),
        }
    }

    /// Local shape of a (possibly complex) anchor triple.
    pub fn from_points(a: &Pt<C64>, b: &Pt<C64>, c: &Pt<C64>) -> Self {
        let e = [b[0] - a[0], b[1] - a[1]];
        let f = [c[0] - a[0], c[1] - a[1]];
        let len2 = e[0] * e[0] + e[1] * e[1];
        let xa = len2.sqrt();
        // f = (xb/xa) e + (yb/xa) J e
        let al = (f[0] * e[0] + f[1] * e[1]) / len2;
        let be = (f[1] * e[0] - f[0] * e[1]) / len2;
        TriShape {
            xa,
            xb: al * xa,
            yb: be * xa,
        }
    }
}

/// Shapes of base and platform used to fill shape parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shapes {
    pub base: TriShape,
    pub platform: TriShape,
}

impl Shapes {
    pub fn from_design(d: &crate::model::DesignParams) -> Self {
        Shapes {
            base: TriShape::real(d.x2, d.x3, d.y3),
            platform: TriShape::real(d.x5, d.x6, d.y6),
        }
    }

    pub fn from_configuration(k: &Configuration<C64>) -> Self {
        Shapes {
            base: TriShape::from_points(k.k(1), k.k(2), k.k(3)),
            platform: TriShape::from_points(k.k(4), k.k(5), k.k(6)),
        }
    }
}

impl CriticalSystem {
    pub fn system(&self) -> &ParameterizedSystem {
        &self.family.system
    }

    pub fn n_unknowns(&self) -> usize {
        self.family.n_unknowns()
    }

    /// Parameter vector for reference configuration `k` and anchor shapes.
    pub fn params_for(&self, k: &Configuration<C64>, shapes: &Shapes) -> Vec<C64> {
        let flat = k.flat();
        self.system()
            .parameters()
            .iter()
            .map(|name| {
                let idx = |s: &str| s.parse::<usize>().expect("numbered reference parameter");
                if let Some(i) = name.strip_prefix('C') {
                    return flat[2 * (idx(i) - 1)];
                }
                if let Some(i) = name.strip_prefix('D') {
                    return flat[2 * (idx(i) - 1) + 1];
                }
                let (b, p) = (shapes.base, shapes.platform);
                match name.as_str() {
                    "aB" => b.xb / b.xa,
                    "bB" => b.yb / b.xa,
                    "LB" => b.xa * b.xa,
                    "aP" => p.xb / p.xa,
                    "bP" => p.yb / p.xa,
                    "LP" => p.xa * p.xa,
                    "XB2" => b.xa,
                    "XB3" => b.xb,
                    "XP5" => p.xa,
                    "XP6" => p.xb,
                    other => unreachable!("unregistered parameter {other}"),
                }
            })
            .collect()
    }

    /// Candidate configuration at unknowns `x` and parameters `p`.
    pub fn reconstruct(&self, x: &[C64], p: &[C64]) -> Configuration<C64> {
        let mut z = x.to_vec();
        z.extend_from_slice(p);
        let flat: Vec<C64> = self
            .candidate
            .iter()
            .map(|c| c.evaluate(&z).expect("candidate uses registered variables"))
            .collect();
        Configuration::from_flat(&flat).expect("6 or 9 points")
    }

    /// Squared distance of `kp` from `k` in this system's metric.
    pub fn dist2(&self, k: &Configuration<f64>, kp: &Configuration<f64>) -> f64 {
        match self.interp {
            Some(i) => extrinsic_dist2(i, k, kp),
            None => rrr_dist2(k, kp),
        }
    }

    /// Value of the branch's defining constraint at `kp`, relative to the
    /// configuration's coordinate scale.
    pub fn constraint_residual(&self, kp: &Configuration<f64>) -> f64 {
        let s = kp.max_abs().max(1.0);
        let (v, deg) = match self.branch {
            BranchKind::SingVariety | BranchKind::Preliminary | BranchKind::RRRParallel => {
                (singularity_polynomial(kp), 4)
            }
            BranchKind::CollinearityP => (collinearity(kp.k(4), kp.k(5), kp.k(6)), 2),
            BranchKind::CollinearityB => (collinearity(kp.k(1), kp.k(2), kp.k(3)), 2),
            BranchKind::RRRLeg(i) => {
                let i = i as usize;
                (collinearity(kp.k(i + 6), kp.k(i), kp.k(i + 3)), 2)
            }
            BranchKind::SingPointCase1 => {
                let a = kp.k(1);
                let worst = (2..=6)
                    .map(|j| {
                        let far = (2..=6)
                            .max_by(|&u, &w| {
                                let du = (kp.k(u)[0] - a[0]).hypot(kp.k(u)[1] - a[1]);
                                let dw = (kp.k(w)[0] - a[0]).hypot(kp.k(w)[1] - a[1]);
                                du.total_cmp(&dw)
                            })
                            .unwrap_or(2);
                        collinearity(a, kp.k(far), kp.k(j)).abs()
                    })
                    .fold(0.0, f64::max);
                (worst, 2)
            }
            BranchKind::CollapsedP | BranchKind::CollapsedB => {
                let o = if self.branch == BranchKind::CollapsedP { 4 } else { 1 };
                let spread = (1..3)
                    .map(|j| (kp.k(o + j)[0] - kp.k(o)[0]).hypot(kp.k(o + j)[1] - kp.k(o)[1]))
                    .fold(0.0, f64::max);
                (spread, 1)
            }
        };
        v.abs() / s.powi(deg)
    }

    /// Plain-text dump of the system.
    pub fn dump(&self) -> String {
        let head = match self.interp {
            Some(i) => format!("# {} / {}", i.label(), self.branch.label()),
            None => format!("# 3-RRR / {}", self.branch.label()),
        };
        format!("{head}\n{}", self.system().dump())
    }
}

/// Structural pieces contributed by one side (base or platform) of the candidate.
struct SideSpec {
    points: Vec<Pt<MultiPoly>>,
    /// `(multiplier name, side condition)` appended to the Lagrangian.
    conditions: Vec<(String, MultiPoly)>,
}

/// Free, rigid (point-based representation) or collapsed anchor triple.
#[derive(Clone, Copy, PartialEq)]
enum SideMode {
    Free,
    Rigid,
    Collapsed,
}

fn side_points(reg: &mut Registry, base: bool, mode: SideMode) -> SideSpec {
    let (o, tag, mult) = if base { (1, "B", "mu") } else { (4, "P", "kappa") };
    let name = |s: &str, i: usize| format!("{s}{}", o + i);
    match mode {
        SideMode::Free => SideSpec {
            points: (0..3).map(|i| reg.point(&name("c", i), &name("d", i))).collect(),
            conditions: Vec::new(),
        },
        SideMode::Rigid => {
            let a = reg.point(&name("c", 0), &name("d", 0));
            let b = reg.point(&name("c", 1), &name("d", 1));
            let al = reg.add(format!("a{tag}"), VarKind::ShapeParam);
            let be = reg.add(format!("b{tag}"), VarKind::ShapeParam);
            let len2 = reg.add(format!("L{tag}"), VarKind::LinParam);
            let c = pbr_point(&a, &b, al, be);
            let cond = side_condition(&a, &b, len2);
            SideSpec {
                points: vec![a, b, c],
                conditions: vec![(mult.to_string(), cond)],
            }
        }
        SideMode::Collapsed => {
            let p = reg.point("c", "d");
            SideSpec {
                points: vec![p.clone(), p.clone(), p],
                conditions: Vec::new(),
            }
        }
    }
}

fn mode_for(side: Side) -> SideMode {
    if side == Side::Rigid {
        SideMode::Rigid
    } else {
        SideMode::Free
    }
}

/// Turns `L = D² + Σ multiplier·constraint` into the square system of its partials.
fn finish(
    mut reg: Registry,
    interp: Option<Interpretation>,
    branch: BranchKind,
    variant: i8,
    k: &Configuration<MultiPoly>,
    kp: &Configuration<MultiPoly>,
    constraints: Vec<(String, MultiPoly)>,
) -> Result<CriticalSystem, LagrangianError> {
    let mut lag = match interp {
        Some(i) => extrinsic_dist2(i, k, kp),
        None => rrr_dist2(k, kp),
    };
    for (name, g) in constraints {
        let m = reg.add(name, VarKind::Multiplier);
        lag = lag + m * g;
    }
    let (map, order, counts) = reg.order();
    let n = counts[1];
    let lag = lag.remap(&map);
    let equations: Vec<MultiPoly> = (0..n).map(|j| lag.derivative(j)).collect();
    let unknowns: Vec<String> = order[..n].iter().map(|&i| reg.names[i].clone()).collect();
    let params: Vec<String> = order[n..].iter().map(|&i| reg.names[i].clone()).collect();
    let linear: Vec<usize> = order[n..]
        .iter()
        .enumerate()
        .filter(|(_, &i)| reg.kinds[i] == VarKind::LinParam)
        .map(|(j, _)| j)
        .collect();
    let multipliers: Vec<usize> = (counts[0]..n).collect();
    let candidate: Vec<MultiPoly> = kp.flat().iter().map(|c| c.remap(&map)).collect();
    let system = ParameterizedSystem::new(equations, unknowns, params)?;
    Ok(CriticalSystem {
        interp,
        branch,
        variant,
        family: Family::new(system, linear, multipliers),
        candidate,
        expected_count: expected_count(interp, branch),
    })
}

/// Builds the critical-point system of `branch` under `interp`.
///
/// For the rigid-rigid collinear-all branch this returns the `+` variant; see
/// [`build_system_variants`].
pub fn build_system(interp: Interpretation, branch: BranchKind) -> Result<CriticalSystem, LagrangianError> {
    Ok(build_system_variants(interp, branch)?.remove(0))
}

/// All systems of a branch; two for the rigid-rigid collinear-all branch, one otherwise.
pub fn build_system_variants(
    interp: Interpretation,
    branch: BranchKind,
) -> Result<Vec<CriticalSystem>, LagrangianError> {
    if !branch_compatible(interp, branch) {
        return Err(LagrangianError::IncompatibleBranch { interp, branch });
    }
    let (platform, base) = match interp {
        Interpretation::Pair { platform, base } => (platform, base),
        Interpretation::Preliminary => (Side::Plate, Side::Plate),
    };
    let branch = if branch == BranchKind::Preliminary {
        BranchKind::SingVariety
    } else {
        branch
    };
    match branch {
        BranchKind::SingVariety | BranchKind::CollinearityP | BranchKind::CollinearityB => {
            let mut reg = Registry::new();
            let k = reference(&mut reg, 6);
            let b = side_points(&mut reg, true, mode_for(base));
            let p = side_points(&mut reg, false, mode_for(platform));
            let mut pts = b.points;
            pts.extend(p.points);
            let kp = Configuration::new(pts).expect("six points");
            let main = match branch {
                BranchKind::SingVariety => singularity_polynomial(&kp),
                BranchKind::CollinearityP => collinearity(kp.k(4), kp.k(5), kp.k(6)),
                _ => collinearity(kp.k(1), kp.k(2), kp.k(3)),
            };
            let mut cons = vec![("lambda".to_string(), main)];
            cons.extend(b.conditions);
            cons.extend(p.conditions);
            Ok(vec![finish(reg, Some(interp), branch, 0, &k, &kp, cons)?])
        }
        BranchKind::CollapsedP | BranchKind::CollapsedB => {
            let mut reg = Registry::new();
            let k = reference(&mut reg, 6);
            let (bm, pm) = if branch == BranchKind::CollapsedP {
                (mode_for(base), SideMode::Collapsed)
            } else {
                (SideMode::Collapsed, mode_for(platform))
            };
            let b = side_points(&mut reg, true, bm);
            let p = side_points(&mut reg, false, pm);
            let mut pts = b.points;
            pts.extend(p.points);
            let kp = Configuration::new(pts).expect("six points");
            let mut cons = b.conditions;
            cons.extend(p.conditions);
            Ok(vec![finish(reg, Some(interp), branch, 0, &k, &kp, cons)?])
        }
        BranchKind::SingPointCase1 => {
            let variants: &[i8] = if base == Side::Rigid && platform == Side::Rigid {
                &[1, -1]
            } else {
                &[0]
            };
            variants
                .iter()
                .map(|&v| case1_system(interp, base, platform, v))
                .collect()
        }
        _ => Err(LagrangianError::IncompatibleBranch { interp, branch }),
    }
}

/// All six anchors on the line through `(a, b)` with direction `(e0² − e1², 2e0e1)`.
fn case1_system(
    interp: Interpretation,
    base: Side,
    platform: Side,
    variant: i8,
) -> Result<CriticalSystem, LagrangianError> {
    let mut reg = Registry::new();
    let k = reference(&mut reg, 6);
    let a = reg.add("a", VarKind::Unknown);
    let b = reg.add("b", VarKind::Unknown);
    let mut delta: Vec<Option<MultiPoly>> = vec![None; 5];
    if base == Side::Rigid {
        delta[0] = Some(reg.add("XB2", VarKind::ShapeParam));
        delta[1] = Some(reg.add("XB3", VarKind::ShapeParam));
    } else {
        delta[0] = Some(reg.add("delta1", VarKind::Unknown));
        delta[1] = Some(reg.add("delta2", VarKind::Unknown));
    }
    let d3 = reg.add("delta3", VarKind::Unknown);
    delta[2] = Some(d3.clone());
    if platform == Side::Rigid {
        let sign = MultiPoly::from_f64(if variant < 0 { -1.0 } else { 1.0 });
        let x5 = reg.add("XP5", VarKind::ShapeParam);
        let x6 = reg.add("XP6", VarKind::ShapeParam);
        delta[3] = Some(d3.clone() + sign.clone() * x5);
        delta[4] = Some(d3 + sign * x6);
    } else {
        delta[3] = Some(reg.add("delta4", VarKind::Unknown));
        delta[4] = Some(reg.add("delta5", VarKind::Unknown));
    }
    let e0 = reg.add("e0", VarKind::Unknown);
    let e1 = reg.add("e1", VarKind::Unknown);
    let u = [
        e0.clone() * e0.clone() - e1.clone() * e1.clone(),
        MultiPoly::from_f64(2.0) * e0.clone() * e1.clone(),
    ];
    let mut pts: Vec<Pt<MultiPoly>> = vec![[a.clone(), b.clone()]];
    for d in delta.into_iter().map(|d| d.expect("all deltas set")) {
        pts.push([a.clone() + d.clone() * u[0].clone(), b.clone() + d * u[1].clone()]);
    }
    let kp = Configuration::new(pts).expect("six points");
    let norm = e0.clone() * e0 + e1.clone() * e1 - MultiPoly::from_f64(1.0);
    finish(
        reg,
        Some(interp),
        BranchKind::SingPointCase1,
        variant,
        &k,
        &kp,
        vec![("lambda".into(), norm)],
    )
}

/// 3-RRR systems: nine free points, plate base `k7..k9` and platform `k4..k6`,
/// elbows `k1..k3`.
pub fn build_rrr_system(branch: BranchKind) -> Result<CriticalSystem, LagrangianError> {
    let mut reg = Registry::new();
    let k = reference(&mut reg, 9);
    let pts: Vec<Pt<MultiPoly>> = (1..=9)
        .map(|i| reg.point(&format!("c{i}"), &format!("d{i}")))
        .collect();
    let kp = Configuration::new(pts).expect("nine points");
    let g = match branch {
        BranchKind::RRRParallel => singularity_polynomial(&kp),
        BranchKind::RRRLeg(i @ 1..=3) => {
            let i = i as usize;
            collinearity(kp.k(i + 6), kp.k(i), kp.k(i + 3))
        }
        other => return Err(LagrangianError::NotRrr(other)),
    };
    finish(reg, None, branch, 0, &k, &kp, vec![("lambda".into(), g)])
}
