//! Direct integration of the piecewise system and the Green-operator
//! fixed-point check.
//!
//! A shot leaves `(0, v0)`, runs the nonlinear system across `[0, (1−h)/2]`,
//! the exact linear propagator across the window, and the nonlinear system
//! again up to `x = 1`. Integration restarts at each interface.

use std::fmt::Write as _;

use crate::error::{domain, Result};
use crate::model::{
    acceleration, PhaseState, PositiveSolution, ProblemParams, Regime, Symmetry, TrajectoryArc,
};
use crate::ode::{integrate, Next, StepControl};
use crate::roots::{brent, RootConfig};
use crate::scalar::{snap_unit, Scalar};

/// Runge–Kutta tolerances and sampling density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig<T> {
    pub rk_abs_tol: T,
    pub rk_rel_tol: T,
    pub max_step: T,
    /// Record uniformly spaced samples along each arc.
    pub dense_output: bool,
    /// Samples per arc when `dense_output` is set.
    pub samples_per_arc: usize,
    /// End each arc at the first zero of `u` instead of its nominal end.
    pub stop_at_zero: bool,
}

impl<T: Scalar> Default for FlowConfig<T> {
    fn default() -> Self {
        let tol = T::lit(1e-11).max(T::lit(16.0) * T::epsilon());
        Self {
            rk_abs_tol: tol,
            rk_rel_tol: tol,
            max_step: T::lit(1.0 / 64.0),
            dense_output: true,
            samples_per_arc: 2001,
            stop_at_zero: false,
        }
    }
}

impl<T: Scalar> FlowConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            rk_abs_tol: tol,
            rk_rel_tol: tol,
            ..Self::default()
        }
    }

    /// Same tolerances, no samples.
    pub fn terminal_only(&self) -> Self {
        Self {
            dense_output: false,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rk_abs_tol > T::zero()
            && self.rk_rel_tol > T::zero()
            && self.max_step > T::zero())
        {
            return domain("flow tolerances and max_step must be positive");
        }
        if self.dense_output && self.samples_per_arc < 2 {
            return domain("at least two samples per arc are needed");
        }
        Ok(())
    }

    fn control(&self) -> StepControl<T> {
        StepControl {
            abs_tol: self.rk_abs_tol,
            rel_tol: self.rk_rel_tol,
            max_step: self.max_step,
        }
    }
}

/// Integration direction of [`nonlinear_flow`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    /// The reversed flow: `x` decreases by `delta_x`.
    Backward,
}

/// Result of flowing one arc.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowOutput<T> {
    pub end: PhaseState<T>,
    /// Samples in increasing `x`, including both ends. Empty without dense
    /// output.
    pub samples: Vec<PhaseState<T>>,
    /// First abscissa, in the direction of integration, where `u` drops
    /// from positive to non-positive.
    pub first_zero: Option<T>,
}

fn nonlinear_rhs<T: Scalar>(lambda: T, p: T) -> impl Fn(T, &[T; 2]) -> [T; 2] {
    move |_x, y| [y[1], acceleration(y[0], lambda, p, Regime::Nonlinear)]
}

/// Advances `start` by `delta_x ≥ 0` along `u' = v, v' = −λu − |u|^{p−1}u`.
pub fn nonlinear_flow<T: Scalar>(
    start: PhaseState<T>,
    delta_x: T,
    lambda: T,
    p: T,
    cfg: &FlowConfig<T>,
    direction: Direction,
) -> Result<FlowOutput<T>> {
    cfg.validate()?;
    if !(delta_x >= T::zero()) || !delta_x.is_finite() {
        return domain(format!("flow length must be non-negative, got {delta_x}"));
    }
    let sign = match direction {
        Direction::Forward => T::one(),
        Direction::Backward => -T::one(),
    };
    let x_end = start.x + sign * delta_x;
    let n = if cfg.dense_output {
        cfg.samples_per_arc
    } else {
        0
    };
    let grid_x = |k: usize| -> T {
        if k + 1 == n {
            x_end
        } else {
            snap_unit(start.x + sign * delta_x * T::count(k) / T::count(n - 1))
        }
    };

    let mut samples = Vec::with_capacity(n);
    let mut next = 0usize;
    if n > 0 {
        samples.push(start);
        next = 1;
    }
    let mut first_zero: Option<T> = None;
    let mut last_sign = start.u.signum() * T::lit(if start.u == T::zero() { 0.0 } else { 1.0 });

    if delta_x > T::zero() {
        let (x_stop, end) = integrate(
            nonlinear_rhs(lambda, p),
            start.x,
            [start.u, start.v],
            x_end,
            &cfg.control(),
            |step| {
                let (xa, xb) = (step.x0, step.x1());
                // Samples falling inside this step (the last one is the end state).
                while next < n.saturating_sub(1) {
                    let x = grid_x(next);
                    if (x - xb) * sign > T::zero() {
                        break;
                    }
                    let y = step.eval(x);
                    samples.push(PhaseState::new(x, y[0], y[1]));
                    next += 1;
                }
                if first_zero.is_none() {
                    // Probe a few interior points so a dip and recovery
                    // inside one step is still seen.
                    let mut prev_x = xa;
                    for j in 1..=4 {
                        let x = if j == 4 {
                            xb
                        } else {
                            xa + step.h * T::count(j) / T::lit(4.0)
                        };
                        let u = step.eval(x)[0];
                        if last_sign > T::zero() && u <= T::zero() {
                            let z =
                                brent(|s| Ok(step.eval(s)[0]), prev_x, x, &RootConfig::default())
                                    .unwrap_or(x);
                            first_zero = Some(z);
                            if cfg.stop_at_zero {
                                return Ok(Next::Stop(z, step.eval(z)));
                            }
                            break;
                        }
                        if u != T::zero() {
                            last_sign = u.signum();
                        }
                        prev_x = x;
                    }
                }
                Ok(Next::Continue)
            },
        )?;
        let end = PhaseState::new(x_stop, end[0], end[1]);
        if n > 0 {
            samples.push(end);
        }
        if direction == Direction::Backward {
            samples.reverse();
        }
        return Ok(FlowOutput {
            end,
            samples,
            first_zero,
        });
    }
    if n > 0 {
        samples.clear();
        samples.push(start);
    }
    Ok(FlowOutput {
        end: start,
        samples,
        first_zero,
    })
}

/// Exact propagator of `u' = v, v' = −λu` over a signed `delta_x`.
pub fn linear_flow<T: Scalar>(start: PhaseState<T>, delta_x: T, lambda: T) -> PhaseState<T> {
    let (u0, v0) = (start.u, start.v);
    let x = start.x + delta_x;
    if lambda > T::zero() {
        let w = lambda.sqrt();
        let (s, c) = (w * delta_x).sin_cos();
        PhaseState::new(x, u0 * c + v0 / w * s, -u0 * w * s + v0 * c)
    } else if lambda < T::zero() {
        let w = (-lambda).sqrt();
        let (s, c) = ((w * delta_x).sinh(), (w * delta_x).cosh());
        PhaseState::new(x, u0 * c + v0 / w * s, u0 * w * s + v0 * c)
    } else {
        PhaseState::new(x, u0 + v0 * delta_x, v0)
    }
}

/// Outcome of a single shot.
#[derive(Clone, Debug, PartialEq)]
pub struct Shot<T> {
    /// The three-arc trajectory with its diagnostics. It is a positive
    /// solution only if `positive` holds and `shoot_residual` is small.
    pub candidate: PositiveSolution<T>,
    pub terminal: PhaseState<T>,
    /// Location of the first zero of `u` in `(0, 1)`, if any.
    pub first_zero: Option<T>,
    /// `u > 0` on `(0, 1 − 1e−6)`.
    pub positive: bool,
}

/// Interior zeros closer than this to `x = 1` count as the boundary zero.
const BOUNDARY_ZONE: f64 = 1e-6;

/// Terminal state of the shot from `(0, v0)` and the first interior zero,
/// without recording samples. This is the residual map of the scans.
pub fn shoot_terminal<T: Scalar>(
    v0: T,
    params: &ProblemParams<T>,
    cfg: &FlowConfig<T>,
) -> Result<(PhaseState<T>, Option<T>)> {
    let cfg = FlowConfig {
        stop_at_zero: false,
        ..cfg.terminal_only()
    };
    let (lam, p) = (params.lambda(), params.p());
    let (left, right) = (params.left_interface(), params.right_interface());
    let a = nonlinear_flow(
        PhaseState::new(T::zero(), T::zero(), v0),
        left,
        lam,
        p,
        &cfg,
        Direction::Forward,
    )?;
    let mid_start = a.end;
    let mut mid = linear_flow(mid_start, right - left, lam);
    mid.x = right;
    let mut zero = a.first_zero;
    if zero.is_none() {
        zero = linear_zero(&mid_start, right - left, lam);
    }
    let b = nonlinear_flow(mid, T::one() - right, lam, p, &cfg, Direction::Forward)?;
    if zero.is_none() {
        zero = b.first_zero;
    }
    let mut end = b.end;
    end.x = T::one();
    Ok((end, zero))
}

/// Boundary residual used by the scans, together with the first interior
/// zero. It is `u(1)` when `u > 0` on `(0, 1)`, and `−|v(z)|(1 − z)` when `u`
/// first vanishes at `z < 1`; the two agree to first order as `z → 1`, so
/// the map is continuous across every positive solution. The shot stops at
/// the first zero, which keeps runaway negative excursions cheap.
pub fn boundary_residual<T: Scalar>(
    v0: T,
    params: &ProblemParams<T>,
    cfg: &FlowConfig<T>,
) -> Result<(T, Option<T>)> {
    let cfg = FlowConfig {
        stop_at_zero: true,
        ..cfg.terminal_only()
    };
    let (lam, p) = (params.lambda(), params.p());
    let (left, right) = (params.left_interface(), params.right_interface());
    let at_zero = |s: PhaseState<T>| Ok((-(s.v.abs()) * (T::one() - s.x), Some(s.x)));
    let a = nonlinear_flow(
        PhaseState::new(T::zero(), T::zero(), v0),
        left,
        lam,
        p,
        &cfg,
        Direction::Forward,
    )?;
    if a.first_zero.is_some() {
        return at_zero(a.end);
    }
    if let Some(z) = linear_zero(&a.end, right - left, lam) {
        let mut s = linear_flow(a.end, z - left, lam);
        s.x = z;
        return at_zero(s);
    }
    let mut mid = linear_flow(a.end, right - left, lam);
    mid.x = right;
    let b = nonlinear_flow(mid, T::one() - right, lam, p, &cfg, Direction::Forward)?;
    if b.first_zero.is_some() {
        return at_zero(b.end);
    }
    Ok((b.end.u, None))
}

/// First zero of `u` along the linear propagator from `start` within
/// `(0, width]`, found by sampling and bracketing.
fn linear_zero<T: Scalar>(start: &PhaseState<T>, width: T, lambda: T) -> Option<T> {
    if !(start.u > T::zero()) {
        return None;
    }
    let n = 64;
    let mut prev = T::zero();
    for k in 1..=n {
        let dx = width * T::count(k) / T::count(n);
        if linear_flow(*start, dx, lambda).u <= T::zero() {
            let z = brent(
                |s| Ok(linear_flow(*start, s, lambda).u),
                prev,
                dx,
                &RootConfig::default(),
            )
            .unwrap_or(dx);
            return Some(start.x + z);
        }
        prev = dx;
    }
    None
}

/// Shoots from `(0, v0)` and assembles the three arcs and diagnostics.
pub fn shoot<T: Scalar>(v0: T, params: &ProblemParams<T>, cfg: &FlowConfig<T>) -> Result<Shot<T>> {
    if !(v0 > T::zero()) || !v0.is_finite() {
        return domain(format!("initial slope must be positive, got {v0}"));
    }
    let cfg = FlowConfig {
        dense_output: true,
        stop_at_zero: false,
        ..*cfg
    };
    cfg.validate()?;
    let (lam, p) = (params.lambda(), params.p());
    let (left, right) = (params.left_interface(), params.right_interface());

    let a = nonlinear_flow(
        PhaseState::new(T::zero(), T::zero(), v0),
        left,
        lam,
        p,
        &cfg,
        Direction::Forward,
    )?;
    let mid_start = a.end;
    let n = cfg.samples_per_arc;
    let width = right - left;
    let mid_samples: Vec<PhaseState<T>> = (0..n)
        .map(|k| {
            let x = if k + 1 == n {
                right
            } else {
                snap_unit(left + width * T::count(k) / T::count(n - 1))
            };
            let mut s = linear_flow(mid_start, x - left, lam);
            s.x = x;
            s
        })
        .collect();
    let mid_end = mid_samples[n - 1];
    let b = nonlinear_flow(mid_end, T::one() - right, lam, p, &cfg, Direction::Forward)?;

    let mut first_zero = a.first_zero;
    if first_zero.is_none() {
        first_zero = linear_zero(&mid_start, width, lam);
    }
    if first_zero.is_none() {
        first_zero = b.first_zero;
    }
    let mut last = b.samples;
    let last_len = last.len();
    last[last_len - 1].x = T::one();
    let terminal = last[last_len - 1];

    let arcs = [
        TrajectoryArc::new(Regime::Nonlinear, a.samples)?,
        TrajectoryArc::new(Regime::Linear, mid_samples)?,
        TrajectoryArc::new(Regime::Nonlinear, last)?,
    ];
    let positive = first_zero.is_none_or(|z| z >= T::one() - T::lit(BOUNDARY_ZONE));
    let candidate = assemble(*params, v0, arcs)?;
    Ok(Shot {
        candidate,
        terminal,
        first_zero,
        positive,
    })
}

/// Builds a [`PositiveSolution`] from arcs: locates the maximum, classifies
/// symmetry and evaluates both residuals.
pub(crate) fn assemble<T: Scalar>(
    params: ProblemParams<T>,
    v0: T,
    arcs: [TrajectoryArc<T>; 3],
) -> Result<PositiveSolution<T>> {
    let terminal = *arcs[2].last();
    let mut sol = PositiveSolution {
        params,
        v0,
        arcs,
        r_max: T::zero(),
        x_max: T::zero(),
        symmetry: Symmetry::Symmetric,
        shoot_residual: terminal.u.abs(),
        fixed_point_residual: T::zero(),
    };
    let (x_max, r_max) = locate_max(&sol);
    sol.x_max = x_max;
    sol.r_max = r_max;
    sol.symmetry = classify(&sol);
    sol.fixed_point_residual = fixed_point_residual(&sol);
    Ok(sol)
}

/// Relative tolerance of the symmetry classification.
pub(crate) fn symmetry_tolerance<T: Scalar>(r_max: T) -> T {
    T::lit(1e-6) * r_max.max(T::one())
}

fn classify<T: Scalar>(sol: &PositiveSolution<T>) -> Symmetry {
    if sol.symmetry_defect() <= symmetry_tolerance(sol.r_max) {
        Symmetry::Symmetric
    } else if sol.x_max < T::lit(0.5) {
        Symmetry::AsymmetricLeft
    } else {
        Symmetry::AsymmetricRight
    }
}

/// Largest sample, refined to the nearby zero of `v` when there is one.
fn locate_max<T: Scalar>(sol: &PositiveSolution<T>) -> (T, T) {
    let (lam, p) = (sol.params.lambda(), sol.params.p());
    let mut best: Option<(usize, usize)> = None;
    let mut best_u = T::neg_infinity();
    for (ai, arc) in sol.arcs.iter().enumerate() {
        for (si, s) in arc.samples.iter().enumerate() {
            if s.u > best_u {
                best_u = s.u;
                best = Some((ai, si));
            }
        }
    }
    let Some((ai, si)) = best else {
        return (T::zero(), T::zero());
    };
    let arc = &sol.arcs[ai];
    let s = &arc.samples;
    let mut x_best = s[si].x;
    let mut u_best = s[si].u;
    for (i, j) in [(si.saturating_sub(1), si), (si, (si + 1).min(s.len() - 1))] {
        if i == j {
            continue;
        }
        if s[i].v > T::zero() && s[j].v < T::zero() {
            let cfg = RootConfig::default();
            if let Ok(x) = brent(|x| Ok(arc.interpolate(x, lam, p).v), s[i].x, s[j].x, &cfg) {
                // Snapped so that the mirror image has an exact x_max too.
                let x = snap_unit(x).max(s[i].x).min(s[j].x);
                let u = arc.interpolate(x, lam, p).u;
                if u > u_best {
                    x_best = x;
                    u_best = u;
                }
            }
        }
    }
    (x_best, u_best)
}

/// `𝒦f(x) = ∫₀ˣ(y−x)f(y)dy − x∫₀¹(y−1)f(y)dy`, the solution operator of
/// `−w'' = f`, `w(0) = w(1) = 0`, on a sampled `f`.
///
/// `grid` must be non-decreasing from 0 to 1. A repeated abscissa marks a
/// jump of `f`; the interpolation never straddles one. On each interval the
/// cubic through the four nearest samples of the same piece is integrated
/// exactly.
pub fn green_apply<T: Scalar>(f: &[T], grid: &[T]) -> Result<Vec<T>> {
    if f.len() != grid.len() || grid.len() < 2 {
        return domain("green_apply needs matching sample and grid lengths (at least 2)");
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return domain("green_apply grid must be non-decreasing");
    }
    if f.iter().any(|v| !v.is_finite()) {
        return domain("green_apply needs finite samples");
    }
    let n = grid.len();
    let mut a = vec![T::zero(); n];
    let mut b = vec![T::zero(); n];
    // Piece boundaries: [start, end] inclusive index ranges.
    let mut start = 0usize;
    let gauss_x = [-(T::lit(0.6)).sqrt(), T::zero(), T::lit(0.6).sqrt()];
    let gauss_w = [T::lit(5.0 / 9.0), T::lit(8.0 / 9.0), T::lit(5.0 / 9.0)];
    let half = T::lit(0.5);
    for i in 0..n - 1 {
        if grid[i + 1] == grid[i] {
            a[i + 1] = a[i];
            b[i + 1] = b[i];
            start = i + 1;
            continue;
        }
        let mut end = i + 1;
        while end + 1 < n && grid[end + 1] != grid[end] && end < i + 2 {
            end += 1;
        }
        // Stencil of up to four points within the current piece.
        let lo = i.saturating_sub(1).max(start);
        let hi = (lo + 3).min(end);
        let lo = hi.saturating_sub(3).max(start);
        let nodes = &grid[lo..=hi];
        let vals = &f[lo..=hi];
        let (x0, x1) = (grid[i], grid[i + 1]);
        let hw = half * (x1 - x0);
        let mid = half * (x0 + x1);
        let (mut da, mut db) = (T::zero(), T::zero());
        for k in 0..3 {
            let y = mid + hw * gauss_x[k];
            let fy = lagrange(nodes, vals, y);
            da = da + gauss_w[k] * fy;
            db = db + gauss_w[k] * y * fy;
        }
        a[i + 1] = a[i] + hw * da;
        b[i + 1] = b[i] + hw * db;
    }
    let (a1, b1) = (a[n - 1], b[n - 1]);
    Ok((0..n)
        .map(|i| b[i] - grid[i] * a[i] - grid[i] * (b1 - a1))
        .collect())
}

fn lagrange<T: Scalar>(nodes: &[T], vals: &[T], x: T) -> T {
    let mut sum = T::zero();
    for (j, (&xj, &fj)) in nodes.iter().zip(vals).enumerate() {
        let mut l = T::one();
        for (m, &xm) in nodes.iter().enumerate() {
            if m != j {
                l = l * (x - xm) / (xj - xm);
            }
        }
        sum = sum + l * fj;
    }
    sum
}

/// `sup |u − 𝒦(λu + a_h uᵖ)|` over the stored samples.
pub fn fixed_point_residual<T: Scalar>(sol: &PositiveSolution<T>) -> T {
    let (lam, p) = (sol.params.lambda(), sol.params.p());
    let mut grid = Vec::new();
    let mut f = Vec::new();
    let mut u = Vec::new();
    for (regime, s) in sol.samples() {
        grid.push(s.x);
        f.push(-acceleration(s.u, lam, p, regime));
        u.push(s.u);
    }
    match green_apply(&f, &grid) {
        Ok(k) => u
            .iter()
            .zip(&k)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max),
        Err(_) => T::infinity(),
    }
}

/// Trajectory as CSV with columns `x,u,v,regime`; interface states appear
/// once per adjoining arc.
pub fn trajectory_csv<T: Scalar>(sol: &PositiveSolution<T>) -> String {
    let mut out = String::from("x,u,v,regime\n");
    for (regime, s) in sol.samples() {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{}",
            s.x.to_f64_lossy(),
            s.u.to_f64_lossy(),
            s.v.to_f64_lossy(),
            regime.as_str()
        );
    }
    out
}
