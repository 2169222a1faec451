//! Shooting scan for every positive solution.
//!
//! The boundary residual (`u(1)`, or `−|v(z)|(1 − z)` after an interior zero
//! `z`) is sampled over `v0` on a mixed geometric/linear grid, sign changes
//! are refined with Brent, and each root is shot with dense output, verified
//! and classified. Local minima of `|r|` without a sign change are zoomed
//! into: for strongly hyperbolic windows (`λ ≪ 0`) a root can be far
//! narrower than any feasible grid spacing and shows up only as a dip.

use crate::model::{PositiveSolution, ProblemParams, Symmetry};
use crate::roots::{brent_with_values, RootConfig};
use crate::shooting::{boundary_residual, shoot};

use super::{symmetric_slope, verify, SolverConfig};

/// Scan settings. `v0_max = None` means ten times the symmetric slope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanConfig {
    pub v0_max: Option<f64>,
    /// Grid size, at least 100.
    pub n_scan: usize,
    pub solver: SolverConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            v0_max: None,
            n_scan: 400,
            solver: SolverConfig::default(),
        }
    }
}

/// Shots whose first zero comes before this are far from any positive
/// solution.
const EARLY_ZERO: f64 = 0.99;
/// Relative `v0` distance under which two roots are the same solution.
const SAME_ROOT: f64 = 1e-7;
/// Refinement target for `|u(1)|`, relative to `max(1, ‖u‖∞)`.
const REFINE_TOL: f64 = 1e-9;

/// Every verified positive solution the scan over `(0, v0_max]` brackets,
/// sorted by `v0`. Never fails: invalid input or `λ ≥ π²` gives an empty
/// list.
pub fn find_all_positive(
    params: &ProblemParams<f64>,
    v0_max: f64,
    n_scan: usize,
) -> Vec<PositiveSolution<f64>> {
    find_all_positive_with(
        params,
        &ScanConfig {
            v0_max: Some(v0_max),
            n_scan,
            ..ScanConfig::default()
        },
    )
}

pub fn find_all_positive_with(
    params: &ProblemParams<f64>,
    cfg: &ScanConfig,
) -> Vec<PositiveSolution<f64>> {
    if params.require_solvable().is_err() {
        return Vec::new();
    }
    let v0_max = match cfg.v0_max {
        Some(v) => v,
        None => match symmetric_slope(params, &cfg.solver) {
            Ok(v) => 10.0 * v,
            Err(_) => return Vec::new(),
        },
    };
    if !(v0_max > 0.0 && v0_max.is_finite()) {
        return Vec::new();
    }
    let scanner = Scanner { params, cfg: *cfg };
    let tight = Scanner {
        params,
        cfg: ScanConfig {
            solver: cfg.solver.tightened(),
            ..*cfg
        },
    };
    let grid = scan_grid(v0_max, cfg.n_scan.max(100));
    let samples: Vec<Sample> = grid.iter().filter_map(|&v| scanner.sample(v)).collect();

    let mut roots = Vec::new();
    for w in samples.windows(2) {
        scanner.bracket(&w[0], &w[1], &mut roots);
    }
    for k in 1..samples.len().saturating_sub(1) {
        let (a, b, c) = (&samples[k - 1], &samples[k], &samples[k + 1]);
        let dip = b.r.abs() < a.r.abs()
            && b.r.abs() < c.r.abs()
            && a.r.signum() == b.r.signum()
            && b.r.signum() == c.r.signum();
        if dip {
            if let Some(v0) = scanner.zoom(a.v0, c.v0, b.r.signum()) {
                roots.push(v0);
            }
        }
    }

    // Roots of strongly hyperbolic problems can crowd within a relative
    // 1e−5 of one another; probe log-spaced offsets around each.
    let first_pass = roots.clone();
    for &v0 in &first_pass {
        scanner.satellites(v0, &mut roots);
    }

    let mut found: Vec<PositiveSolution<f64>> = Vec::new();
    for v0 in roots {
        // Roots that fail verification may have been placed by integration
        // noise amplified through the window; they get one more refinement
        // at the tighter tolerance.
        if let Some(sol) = scanner.solution(v0).or_else(|| tight.local_root(v0)) {
            insert_unique(&mut found, sol);
        }
    }

    // Every asymmetric solution comes with its mirror image, whose slope at
    // 0 is minus the original slope at 1.
    let mut k = 0;
    while k < found.len() {
        if !found[k].symmetry.is_symmetric() {
            let target = -found[k].terminal().v;
            if !found.iter().any(|s| same_root(s.v0, target)) {
                if let Some(sol) = scanner
                    .local_root(target)
                    .or_else(|| tight.local_root(target))
                {
                    insert_unique(&mut found, sol);
                }
            }
        }
        k += 1;
    }
    found.sort_by(|a, b| a.v0.total_cmp(&b.v0));
    found
}

struct Sample {
    v0: f64,
    r: f64,
    early: bool,
}

struct Scanner<'a> {
    params: &'a ProblemParams<f64>,
    cfg: ScanConfig,
}

impl Scanner<'_> {
    fn residual(&self, v0: f64) -> crate::Result<f64> {
        Ok(boundary_residual(v0, self.params, &self.cfg.solver.flow)?.0)
    }

    fn sample(&self, v0: f64) -> Option<Sample> {
        let (r, zero) = boundary_residual(v0, self.params, &self.cfg.solver.flow).ok()?;
        Some(Sample {
            v0,
            r,
            early: zero.is_some_and(|z| z < EARLY_ZERO),
        })
    }

    fn bracket(&self, a: &Sample, b: &Sample, roots: &mut Vec<f64>) {
        if a.early && b.early {
            return;
        }
        if a.r == 0.0 {
            roots.push(a.v0);
            return;
        }
        if a.r.signum() == b.r.signum() {
            return;
        }
        if let Ok(v0) = self.refine(a.v0, a.r, b.v0, b.r) {
            roots.push(v0);
        }
    }

    /// Golden-section search for the minimum of `|r|` on `[a, b]`. Returns
    /// a root as soon as a sample of the opposite sign turns up, or the
    /// minimizer itself once the interval is exhausted: near strongly
    /// hyperbolic windows a root can be narrower than any feasible grid
    /// spacing, and `|r|` only shows it as a sharp dip.
    fn zoom(&self, a: f64, b: f64, sign: f64) -> Option<f64> {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (a, b);
        let f = |v: f64| self.residual(v).ok();
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c)?, f(d)?);
        for _ in 0..200 {
            for (x, fx) in [(c, fc), (d, fd)] {
                if fx.signum() != sign {
                    // Bracket against whichever end keeps the original sign.
                    let (lo, flo) = if fc.signum() == sign {
                        (c, fc)
                    } else if fd.signum() == sign {
                        (d, fd)
                    } else {
                        (a, f(a)?)
                    };
                    let (l, r, fl, fr) = if lo < x {
                        (lo, x, flo, fx)
                    } else {
                        (x, lo, fx, flo)
                    };
                    return self.refine(l, fl, r, fr).ok();
                }
            }
            if b - a <= 4.0 * f64::EPSILON * b {
                break;
            }
            if fc.abs() < fd.abs() {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d)?;
            }
        }
        Some(if fc.abs() < fd.abs() { c } else { d })
    }

    /// Samples at offsets `±v0·10^{−2−k/4}` and zooms into dips or brackets
    /// sign changes among them, each side ordered by distance.
    fn satellites(&self, v0: f64, roots: &mut Vec<f64>) {
        for side in [-1.0, 1.0] {
            let probes: Vec<Sample> = (0..=48)
                .rev()
                .filter_map(|k| self.sample(v0 + side * v0 * 10f64.powf(-2.0 - k as f64 / 4.0)))
                .filter(|s| s.v0 > 0.0)
                .collect();
            for w in probes.windows(2) {
                let (a, b) = if w[0].v0 < w[1].v0 {
                    (&w[0], &w[1])
                } else {
                    (&w[1], &w[0])
                };
                self.bracket(a, b, roots);
            }
            for w in probes.windows(3) {
                let (a, b, c) = (&w[0], &w[1], &w[2]);
                if b.r.abs() < a.r.abs()
                    && b.r.abs() < c.r.abs()
                    && a.r.signum() == b.r.signum()
                    && b.r.signum() == c.r.signum()
                {
                    let (lo, hi) = if a.v0 < c.v0 {
                        (a.v0, c.v0)
                    } else {
                        (c.v0, a.v0)
                    };
                    if let Some(r) = self.zoom(lo, hi, b.r.signum()) {
                        roots.push(r);
                    }
                }
            }
        }
    }

    fn refine(&self, a: f64, fa: f64, b: f64, fb: f64) -> crate::Result<f64> {
        let cfg = RootConfig {
            x_tol: 4.0 * f64::EPSILON * b.abs(),
            f_tol: 1e-2 * REFINE_TOL,
            max_iter: 200,
        };
        brent_with_values(|v| self.residual(v), a, fa, b, fb, &cfg)
    }

    /// Shoots the refined root with samples and verifies it.
    fn solution(&self, v0: f64) -> Option<PositiveSolution<f64>> {
        let shot = shoot(v0, self.params, &self.cfg.solver.flow).ok()?;
        if !shot.positive {
            return None;
        }
        let sol = shot.candidate;
        verify(&sol).ok()?;
        Some(sol)
    }

    /// Looks for a root near `v0` by widening a bracket around it.
    fn local_root(&self, v0: f64) -> Option<PositiveSolution<f64>> {
        if !(v0 > 0.0) {
            return None;
        }
        let f0 = self.residual(v0).ok()?;
        let mut width = 1e-9 * v0;
        while width < 1e-2 * v0 {
            for (a, b) in [(v0 - width, v0), (v0, v0 + width)] {
                if a <= 0.0 {
                    continue;
                }
                let (fa, fb) = if a == v0 {
                    (f0, self.residual(b).ok()?)
                } else {
                    (self.residual(a).ok()?, f0)
                };
                if fa.signum() != fb.signum() {
                    let root = self.refine(a, fa, b, fb).ok()?;
                    return self.solution(root);
                }
            }
            width *= 4.0;
        }
        None
    }
}

fn same_root(a: f64, b: f64) -> bool {
    (a - b).abs() <= SAME_ROOT * a.abs().max(b.abs())
}

fn insert_unique(found: &mut Vec<PositiveSolution<f64>>, sol: PositiveSolution<f64>) {
    match found.iter_mut().find(|s| same_root(s.v0, sol.v0)) {
        Some(existing) => {
            if sol.shoot_residual < existing.shoot_residual {
                *existing = sol;
            }
        }
        None => found.push(sol),
    }
}

/// `n` slopes in `(0, v0_max]`: half geometric over six decades, half
/// uniform, merged.
fn scan_grid(v0_max: f64, n: usize) -> Vec<f64> {
    let n_geo = n / 2;
    let n_lin = n - n_geo;
    let lo = v0_max * 1e-6;
    let mut g: Vec<f64> = (0..n_geo)
        .map(|k| lo * (v0_max / lo).powf(k as f64 / (n_geo - 1) as f64))
        .chain((1..=n_lin).map(|k| v0_max * k as f64 / n_lin as f64))
        .collect();
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| same_root(*a, *b));
    g
}

/// Number of solutions of each symmetry class.
pub fn count_by_symmetry(sols: &[PositiveSolution<f64>]) -> (usize, usize) {
    let sym = sols
        .iter()
        .filter(|s| s.symmetry == Symmetry::Symmetric)
        .count();
    (sym, sols.len() - sym)
}
