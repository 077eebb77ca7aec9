//! Predictor–corrector path tracking from `t = 1` to `t = 0`.

use serde::{Deserialize, Serialize};

use crate::polynomials::{CompiledSystem, EvalWorkspace};
use crate::scalar::C64;

use super::linalg::{lu_solve, norm2, norm_inf};
use super::TrackerSettings;

/// A square homotopy `H(x, t)` in `dim` unknowns.
pub trait Homotopy: Sync {
    fn dim(&self) -> usize;

    /// Fills `h = H(x,t)`, `hx = ∂H/∂x` (row-major) and `ht = ∂H/∂t`.
    fn eval(&self, x: &[C64], t: f64, h: &mut [C64], hx: &mut [C64], ht: &mut [C64], ws: &mut Workspace);

    /// Scaled residual of the target system `H(·, 0)`.
    fn target_residual(&self, x: &[C64], ws: &mut Workspace) -> f64;
}

/// Per-thread scratch space.
#[derive(Default, Clone, Debug)]
pub struct Workspace {
    pub(crate) eval: EvalWorkspace,
    pub(crate) z: Vec<C64>,
    pub(crate) vals: Vec<C64>,
    pub(crate) jac: Vec<C64>,
    /// Scratch for [`ProjectiveHomotopy`]: inner `h`, `hx`, `ht` and `x/x0`.
    pub(crate) proj: [Vec<C64>; 4],
}

/// Straight-line parameter homotopy with a γ detour:
/// `p(t) = end + τ(t)(start − end)`, `τ(t) = γt / (1 + (γ − 1)t)`.
pub struct ParameterHomotopy<'a> {
    pub system: &'a CompiledSystem,
    pub n_unknowns: usize,
    pub start: &'a [C64],
    pub end: &'a [C64],
    pub gamma: C64,
}

impl ParameterHomotopy<'_> {
    fn tau(&self, t: f64) -> (C64, C64) {
        let one = C64::new(1.0, 0.0);
        let den = one + (self.gamma - one) * t;
        (self.gamma * t / den, self.gamma / (den * den))
    }

    fn fill_z(&self, x: &[C64], t: f64, ws: &mut Workspace) -> C64 {
        let n = self.n_unknowns;
        let (tau, dtau) = self.tau(t);
        ws.z.clear();
        ws.z.extend_from_slice(x);
        ws.z.extend(
            self.start
                .iter()
                .zip(self.end)
                .map(|(s, e)| if t == 0.0 { *e } else { e + tau * (s - e) }),
        );
        debug_assert_eq!(ws.z.len(), n + self.start.len());
        dtau
    }
}

impl Homotopy for ParameterHomotopy<'_> {
    fn dim(&self) -> usize {
        self.n_unknowns
    }

    fn eval(&self, x: &[C64], t: f64, h: &mut [C64], hx: &mut [C64], ht: &mut [C64], ws: &mut Workspace) {
        let n = self.n_unknowns;
        let nv = self.system.nvars();
        let dtau = self.fill_z(x, t, ws);
        ws.vals.resize(n, C64::new(0.0, 0.0));
        ws.jac.resize(n * nv, C64::new(0.0, 0.0));
        let Workspace { eval, z, vals, jac, .. } = ws;
        self.system.eval_with_jacobian(z, vals, jac, eval);
        h.copy_from_slice(&vals[..n]);
        for i in 0..n {
            let row = &jac[i * nv..(i + 1) * nv];
            hx[i * n..(i + 1) * n].copy_from_slice(&row[..n]);
            let mut s = C64::new(0.0, 0.0);
            for (j, (a, b)) in self.start.iter().zip(self.end).enumerate() {
                s += row[n + j] * (a - b);
            }
            ht[i] = s * dtau;
        }
    }

    fn target_residual(&self, x: &[C64], ws: &mut Workspace) -> f64 {
        self.fill_z(x, 0.0, ws);
        let Workspace { eval, z, .. } = ws;
        self.system.scaled_residual(z, eval)
    }
}

/// Homogenization of `inner` on the affine chart `c · (x0, x) = 1`:
/// `x0^{d_i} H_i(x/x0, t)` together with the chart equation.
///
/// Paths heading to infinity in affine space end at finite points with
/// `x0 = 0`.
pub struct ProjectiveHomotopy<'a, H: ?Sized> {
    pub inner: &'a H,
    /// Degree of each equation in the unknowns.
    pub degrees: &'a [u32],
    pub chart: &'a [C64],
}

impl<H: Homotopy + ?Sized> ProjectiveHomotopy<'_, H> {
    /// Chart point over the affine point `x`.
    pub fn lift(&self, x: &[C64]) -> Vec<C64> {
        let mut z = Vec::with_capacity(x.len() + 1);
        z.push(C64::new(1.0, 0.0));
        z.extend_from_slice(x);
        let s: C64 = self.chart.iter().zip(&z).map(|(c, v)| c * v).sum();
        z.iter().map(|v| v / s).collect()
    }
}

impl<H: Homotopy + ?Sized> Homotopy for ProjectiveHomotopy<'_, H> {
    fn dim(&self) -> usize {
        self.inner.dim() + 1
    }

    fn eval(&self, x: &[C64], t: f64, h: &mut [C64], hx: &mut [C64], ht: &mut [C64], ws: &mut Workspace) {
        let n = self.inner.dim();
        let m = n + 1;
        let [mut ih, mut ihx, mut iht, mut y] = std::mem::take(&mut ws.proj);
        ih.resize(n, C64::new(0.0, 0.0));
        ihx.resize(n * n, C64::new(0.0, 0.0));
        iht.resize(n, C64::new(0.0, 0.0));
        let x0 = x[0];
        y.clear();
        y.extend(x[1..].iter().map(|v| v / x0));
        self.inner.eval(&y, t, &mut ih, &mut ihx, &mut iht, ws);
        for i in 0..n {
            let d = self.degrees[i] as i32;
            let pd = x0.powi(d);
            let pd1 = x0.powi(d - 1);
            h[i] = pd * ih[i];
            ht[i] = pd * iht[i];
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                let a = ihx[i * n + j];
                hx[i * m + j + 1] = pd1 * a;
                s += a * y[j];
            }
            hx[i * m] = pd1 * (ih[i] * d as f64 - s);
        }
        h[n] = self.chart.iter().zip(x).map(|(c, v)| c * v).sum::<C64>() - 1.0;
        ht[n] = C64::new(0.0, 0.0);
        hx[n * m..].copy_from_slice(self.chart);
        ws.proj = [ih, ihx, iht, y];
    }

    fn target_residual(&self, x: &[C64], ws: &mut Workspace) -> f64 {
        let y: Vec<C64> = x[1..].iter().map(|v| v / x[0]).collect();
        self.inner.target_residual(&y, ws)
    }
}

/// Relative size of `x0` below which a projective endpoint lies at infinity.
const AT_INFINITY: f64 = 1e-8;

/// Tracks the affine start point `x0` of `inner` in projective space and maps
/// the endpoint back; endpoints with vanishing `x0` are reported as diverged.
pub fn track_projective<H: Homotopy + ?Sized>(
    inner: &H,
    degrees: &[u32],
    chart: &[C64],
    x0: &[C64],
    s: &TrackerSettings,
    ws: &mut Workspace,
) -> PathResult {
    let hom = ProjectiveHomotopy { inner, degrees, chart };
    let r = track(&hom, &hom.lift(x0), s, ws);
    let w = r.endpoint[0];
    let at_infinity = w.norm() <= AT_INFINITY * norm_inf(&r.endpoint);
    let y: Vec<C64> = r.endpoint[1..].iter().map(|v| v / w).collect();
    match r.status {
        PathStatus::Converged | PathStatus::StepFailure if at_infinity && r.t < s.endgame_start => PathResult {
            endpoint: y,
            status: PathStatus::Diverged,
            residual: f64::INFINITY,
            ..r
        },
        PathStatus::Converged => {
            let (y, residual) = refine(inner, &y, s.final_newton_iters.min(3), ws);
            let ok = residual < s.tol_during_endgame && y.iter().all(|v| v.re.is_finite() && v.im.is_finite());
            PathResult {
                endpoint: y,
                status: if ok { PathStatus::Converged } else { PathStatus::StepFailure },
                residual,
                ..r
            }
        }
        _ => PathResult { endpoint: y, ..r },
    }
}

/// `(1 − t) F(x) + γ t G(x)` with `G_i = x_i^{d_i} − 1`.
pub struct TotalDegreeHomotopy<'a> {
    pub system: &'a CompiledSystem,
    pub degrees: Vec<u32>,
    pub gamma: C64,
}

impl Homotopy for TotalDegreeHomotopy<'_> {
    fn dim(&self) -> usize {
        self.degrees.len()
    }

    fn eval(&self, x: &[C64], t: f64, h: &mut [C64], hx: &mut [C64], ht: &mut [C64], ws: &mut Workspace) {
        let n = self.dim();
        ws.vals.resize(n, C64::new(0.0, 0.0));
        ws.jac.resize(n * n, C64::new(0.0, 0.0));
        let Workspace { eval, vals, jac, .. } = ws;
        self.system.eval_with_jacobian(x, vals, jac, eval);
        let s = 1.0 - t;
        for i in 0..n {
            let d = self.degrees[i];
            let xd1 = x[i].powu(d - 1);
            let g = xd1 * x[i] - 1.0;
            h[i] = vals[i] * s + self.gamma * g * t;
            for j in 0..n {
                hx[i * n + j] = jac[i * n + j] * s;
            }
            hx[i * n + i] += self.gamma * t * (d as f64) * xd1;
            ht[i] = self.gamma * g - vals[i];
        }
    }

    fn target_residual(&self, x: &[C64], ws: &mut Workspace) -> f64 {
        self.system.scaled_residual(x, &mut ws.eval)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathStatus {
    Converged,
    Diverged,
    StepFailure,
}

#[derive(Clone, Debug)]
pub struct PathResult {
    pub endpoint: Vec<C64>,
    pub status: PathStatus,
    pub residual: f64,
    pub condition: f64,
    pub steps: usize,
    /// Path parameter reached (`0` on success).
    pub t: f64,
}

struct Buffers {
    h: Vec<C64>,
    hx: Vec<C64>,
    ht: Vec<C64>,
}

impl Buffers {
    fn new(n: usize) -> Self {
        Buffers {
            h: vec![C64::new(0.0, 0.0); n],
            hx: vec![C64::new(0.0, 0.0); n * n],
            ht: vec![C64::new(0.0, 0.0); n],
        }
    }
}

/// Tangent `dx/dt = −Hx⁻¹ Ht`.
fn tangent<H: Homotopy + ?Sized>(
    hom: &H,
    x: &[C64],
    t: f64,
    b: &mut Buffers,
    ws: &mut Workspace,
) -> Option<Vec<C64>> {
    let n = hom.dim();
    hom.eval(x, t, &mut b.h, &mut b.hx, &mut b.ht, ws);
    let mut rhs: Vec<C64> = b.ht.iter().map(|v| -v).collect();
    lu_solve(&mut b.hx, n, &mut rhs).ok()?;
    if rhs.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Some(rhs)
    } else {
        None
    }
}

fn rk4<H: Homotopy + ?Sized>(
    hom: &H,
    x: &[C64],
    t: f64,
    step: f64,
    b: &mut Buffers,
    ws: &mut Workspace,
) -> Option<Vec<C64>> {
    let axpy = |a: f64, k: &[C64]| -> Vec<C64> { x.iter().zip(k).map(|(xi, ki)| xi - ki * a).collect() };
    let k1 = tangent(hom, x, t, b, ws)?;
    let k2 = tangent(hom, &axpy(step / 2.0, &k1), t - step / 2.0, b, ws)?;
    let k3 = tangent(hom, &axpy(step / 2.0, &k2), t - step / 2.0, b, ws)?;
    let k4 = tangent(hom, &axpy(step, &k3), t - step, b, ws)?;
    Some(
        (0..x.len())
            .map(|i| x[i] - (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (step / 6.0))
            .collect(),
    )
}

/// Newton at fixed `t`; `Some((x, cond))` if the update norm falls below
/// `tol·(1+‖x‖)` within `max_iters` with contracting updates and a first
/// update no larger than `first_tol·(1+‖x‖)`.
#[allow(clippy::too_many_arguments)]
fn correct<H: Homotopy + ?Sized>(
    hom: &H,
    x0: Vec<C64>,
    t: f64,
    tol: f64,
    first_tol: f64,
    max_iters: usize,
    b: &mut Buffers,
    ws: &mut Workspace,
) -> Option<(Vec<C64>, f64)> {
    let n = hom.dim();
    let mut x = x0;
    let mut prev = f64::INFINITY;
    for it in 0..max_iters {
        hom.eval(&x, t, &mut b.h, &mut b.hx, &mut b.ht, ws);
        let mut dx: Vec<C64> = b.h.iter().map(|v| -v).collect();
        let cond = lu_solve(&mut b.hx, n, &mut dx).ok()?;
        let dn = norm2(&dx);
        if !dn.is_finite() {
            return None;
        }
        if dn > 0.25 * prev {
            // Stalled at the rounding floor, which grows with the conditioning.
            let floor = 100.0 * tol.max(f64::EPSILON * cond);
            return (prev <= floor * (1.0 + norm2(&x))).then_some((x, cond));
        }
        if it == 0 && dn > first_tol * (1.0 + norm2(&x)) {
            return None;
        }
        for i in 0..n {
            x[i] += dx[i];
        }
        if dn <= tol * (1.0 + norm2(&x)) {
            return Some((x, cond));
        }
        prev = dn;
    }
    None
}

const DIVERGENCE_SLOPE: f64 = 0.1;
const DIVERGENCE_COND: f64 = 1e10;

/// Whether `‖x‖` has grown tenfold since entering the endgame, or grows like a
/// negative power of `t` over the last two checkpoints and the failure point.
/// Paths converging to a finite singular endpoint flatten out instead.
fn power_law_growth(checkpoints: &[(f64, f64)], last: (f64, f64)) -> bool {
    let n = checkpoints.len();
    if n >= 1 && last.1 > 10.0 * checkpoints[0].1 {
        return true;
    }
    if n < 2 || last.0 <= 0.0 || last.0 >= checkpoints[n - 1].0 {
        return false;
    }
    let slope = |a: (f64, f64), b: (f64, f64)| (b.1 / a.1).ln() / (a.0 / b.0).ln();
    slope(checkpoints[n - 2], checkpoints[n - 1]) > DIVERGENCE_SLOPE && slope(checkpoints[n - 1], last) > DIVERGENCE_SLOPE
}

/// Tracks one path of `hom` from `x0` at `t = 1` to `t = 0`.
pub fn track<H: Homotopy + ?Sized>(hom: &H, x0: &[C64], s: &TrackerSettings, ws: &mut Workspace) -> PathResult {
    let n = hom.dim();
    let mut b = Buffers::new(n);
    let mut x = x0.to_vec();
    let mut t = 1.0;
    let mut step = s.initial_step;
    let mut streak = 0;
    let mut steps = 0;
    let mut cond = 1.0;
    // (t, ‖x‖) on first crossing each power of ten below the endgame start.
    let mut checkpoints: Vec<(f64, f64)> = Vec::new();
    let fail = |x: Vec<C64>, status, steps, cond, t| PathResult {
        endpoint: x,
        status,
        residual: f64::INFINITY,
        condition: cond,
        steps,
        t,
    };
    while t > 0.0 {
        if steps >= s.max_steps {
            return fail(x, PathStatus::StepFailure, steps, cond, t);
        }
        steps += 1;
        let h = step.min(t);
        let t_new = if h >= t { 0.0 } else { t - h };
        let tol = if t_new < s.endgame_start {
            s.tol_during_endgame
        } else {
            s.tol_before_endgame
        };
        let ok = rk4(hom, &x, t, h, &mut b, ws)
            .and_then(|xp| correct(hom, xp, t_new, tol, s.max_predictor_error, s.max_newton_iters, &mut b, ws));
        match ok {
            Some((xc, c)) => {
                x = xc;
                t = t_new;
                cond = c;
                streak += 1;
                if streak >= 3 {
                    step = (step * 2.0).min(s.max_step);
                    streak = 0;
                }
                if norm_inf(&x) > s.divergence_bound {
                    return fail(x, PathStatus::Diverged, steps, cond, t);
                }
                let next = checkpoints.last().map_or(s.endgame_start, |c| c.0 / 10.0);
                if t > 0.0 && t < next {
                    checkpoints.push((t, norm_inf(&x).max(1.0)));
                }
            }
            None => {
                streak = 0;
                step /= 2.0;
                if step < s.min_step {
                    let nx = norm_inf(&x);
                    let growing = cond > DIVERGENCE_COND && power_law_growth(&checkpoints, (t, nx.max(1.0)));
                    if t < s.endgame_start && (nx > s.divergence_bound.sqrt() || growing) {
                        return fail(x, PathStatus::Diverged, steps, cond, t);
                    }
                    return fail(x, PathStatus::StepFailure, steps, cond, t);
                }
            }
        }
    }
    // Polish at the target.
    for _ in 0..s.final_newton_iters {
        hom.eval(&x, 0.0, &mut b.h, &mut b.hx, &mut b.ht, ws);
        let mut dx: Vec<C64> = b.h.iter().map(|v| -v).collect();
        match lu_solve(&mut b.hx, n, &mut dx) {
            Ok(c) => cond = c,
            Err(_) => break,
        }
        let dn = norm2(&dx);
        if !dn.is_finite() {
            break;
        }
        for i in 0..n {
            x[i] += dx[i];
        }
        if dn <= 1e-15 * (1.0 + norm2(&x)) {
            break;
        }
    }
    let residual = hom.target_residual(&x, ws);
    let status = if residual < s.tol_during_endgame && x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        PathStatus::Converged
    } else {
        PathStatus::StepFailure
    };
    PathResult {
        endpoint: x,
        status,
        residual,
        condition: cond,
        steps,
        t: 0.0,
    }
}

/// Newton refinement on the target system; returns the point and its scaled residual.
pub fn refine<H: Homotopy + ?Sized>(hom: &H, x0: &[C64], iters: usize, ws: &mut Workspace) -> (Vec<C64>, f64) {
    let (x, r, _) = refine_conditioned(hom, x0, iters, ws);
    (x, r)
}

/// [`refine`] that also returns the Jacobian condition estimate of the last step.
pub fn refine_conditioned<H: Homotopy + ?Sized>(
    hom: &H,
    x0: &[C64],
    iters: usize,
    ws: &mut Workspace,
) -> (Vec<C64>, f64, f64) {
    let n = hom.dim();
    let mut b = Buffers::new(n);
    let mut x = x0.to_vec();
    let mut cond = 1.0;
    for _ in 0..iters {
        hom.eval(&x, 0.0, &mut b.h, &mut b.hx, &mut b.ht, ws);
        let mut dx: Vec<C64> = b.h.iter().map(|v| -v).collect();
        match lu_solve(&mut b.hx, n, &mut dx) {
            Ok(c) => cond = c,
            Err(_) => break,
        }
        let dn = norm2(&dx);
        if !dn.is_finite() {
            break;
        }
        for i in 0..n {
            x[i] += dx[i];
        }
        if dn <= 1e-15 * (1.0 + norm2(&x)) {
            break;
        }
    }
    let r = hom.target_residual(&x, ws);
    (x, r, cond)
}
