//! Parameter studies built on the solvers: bifurcation sweeps in `λ`,
//! blow-up as the window closes the interval, metasolution sequences, and
//! empirical thresholds.
//!
//! Thresholds computed here are estimates at a stated resolution.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{domain, Error, Result};
use crate::export::{num, residuals_exceed};
use crate::model::{PositiveSolution, ProblemParams, Symmetry};
use crate::roots::{brent, RootConfig};
use crate::shooting::{shoot, shoot_terminal};
use crate::solvers::{
    find_all_positive_with, solve_matching_with, solve_symmetric_with, symmetric_amplitude, verify,
    ScanConfig, SolverConfig,
};

/// One verified solution on a branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub h: f64,
    pub r_max: f64,
    pub v0: f64,
    pub symmetry: Symmetry,
    pub shoot_residual: f64,
    pub fixed_point_residual: f64,
}

impl From<&PositiveSolution<f64>> for BranchPoint {
    fn from(s: &PositiveSolution<f64>) -> Self {
        Self {
            lambda: s.params.lambda(),
            h: s.params.h(),
            r_max: s.r_max,
            v0: s.v0,
            symmetry: s.symmetry,
            shoot_residual: s.shoot_residual,
            fixed_point_residual: s.fixed_point_residual,
        }
    }
}

/// A sweep's points and the grid values where solving failed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub points: Vec<BranchPoint>,
    pub failures: Vec<(f64, String)>,
}

impl Sweep {
    pub fn symmetric(&self) -> impl Iterator<Item = &BranchPoint> {
        self.points
            .iter()
            .filter(|b| b.symmetry == Symmetry::Symmetric)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    /// Also scan for asymmetric solutions at every grid point.
    pub asymmetric: bool,
    pub scan: ScanConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            asymmetric: true,
            scan: ScanConfig::default(),
        }
    }
}

/// Solves the symmetric branch at every `λ` of the grid and appends the
/// asymmetric solutions the scan finds. Points come out sorted by `λ` (then
/// `v0`); failures are recorded and the sweep goes on.
pub fn sweep_lambda(p: f64, h: f64, lambda_grid: &[f64]) -> Sweep {
    sweep_lambda_with(p, h, lambda_grid, &SweepConfig::default())
}

pub fn sweep_lambda_with(p: f64, h: f64, lambda_grid: &[f64], cfg: &SweepConfig) -> Sweep {
    let mut grid = lambda_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut out = Sweep::default();
    let mut previous: Option<f64> = None;
    for lam in grid {
        let params =
            match ProblemParams::new(lam, p, h).and_then(|q| q.require_solvable().map(|_| q)) {
                Ok(q) => q,
                Err(e) => {
                    out.failures.push((lam, e.to_string()));
                    continue;
                }
            };
        let sym = solve_symmetric_with(&params, &cfg.scan.solver).or_else(|e| match previous {
            Some(v0) => warm_start(&params, v0, &cfg.scan.solver).map_err(|_| e),
            None => Err(e),
        });
        match sym {
            Ok(s) => {
                previous = Some(s.v0);
                out.points.push(BranchPoint::from(&s));
                if cfg.asymmetric {
                    let scan = ScanConfig {
                        v0_max: Some(10.0 * s.v0),
                        ..cfg.scan
                    };
                    for a in find_all_positive_with(&params, &scan) {
                        if !a.symmetry.is_symmetric() {
                            out.points.push(BranchPoint::from(&a));
                        }
                    }
                }
            }
            Err(e) => out.failures.push((lam, e.to_string())),
        }
    }
    out.points
        .sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.v0.total_cmp(&b.v0)));
    out
}

/// Shooting fallback seeded by the previous branch point: brackets `u(1)`
/// around `v0` and refines.
fn warm_start(
    params: &ProblemParams<f64>,
    v0: f64,
    cfg: &SolverConfig,
) -> Result<PositiveSolution<f64>> {
    let flow = cfg.flow.terminal_only();
    let f = |v: f64| Ok(shoot_terminal(v, params, &flow)?.0.u);
    let mut width = 1e-3 * v0;
    while width < 4.0 * v0 {
        for (a, b) in [((v0 - width).max(1e-3 * v0), v0), (v0, v0 + width)] {
            let (fa, fb) = (f(a)?, f(b)?);
            if fa.signum() != fb.signum() {
                let root = brent(
                    f,
                    a,
                    b,
                    &RootConfig {
                        x_tol: 1e-15 * b,
                        ..RootConfig::default()
                    },
                )?;
                let sol = shoot(root, params, &cfg.flow)?.candidate;
                verify(&sol)?;
                if sol.symmetry == Symmetry::Symmetric {
                    return Ok(sol);
                }
            }
        }
        width *= 2.0;
    }
    Err(Error::RootFinding(format!(
        "no symmetric root near the warm start v0 = {v0}"
    )))
}

/// Empirical pitchfork location: the `λ` below which the scan finds at
/// least three solutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PitchforkEstimate {
    pub lambda: f64,
    /// Width of the final bracket.
    pub resolution: f64,
    pub count_below: usize,
    pub count_above: usize,
}

/// Bisection on "the scan finds ≥ 3 solutions" over `[lambda_lo, lambda_hi]`
/// down to `resolution`.
pub fn estimate_pitchfork(
    p: f64,
    h: f64,
    lambda_lo: f64,
    lambda_hi: f64,
    resolution: f64,
) -> Result<PitchforkEstimate> {
    estimate_pitchfork_with(
        p,
        h,
        lambda_lo,
        lambda_hi,
        resolution,
        &ScanConfig::default(),
    )
}

pub fn estimate_pitchfork_with(
    p: f64,
    h: f64,
    lambda_lo: f64,
    lambda_hi: f64,
    resolution: f64,
    scan: &ScanConfig,
) -> Result<PitchforkEstimate> {
    if !(lambda_lo < lambda_hi && lambda_hi < PI * PI) {
        return domain(format!(
            "need lambda_lo < lambda_hi < pi^2, got [{lambda_lo}, {lambda_hi}]"
        ));
    }
    if !(resolution > 0.0) {
        return domain("resolution must be positive");
    }
    let count = |lam: f64| -> Result<usize> {
        let params = ProblemParams::new(lam, p, h)?;
        Ok(find_all_positive_with(&params, scan).len())
    };
    let (mut lo, mut hi) = (lambda_lo, lambda_hi);
    let (mut c_lo, mut c_hi) = (count(lo)?, count(hi)?);
    if !(c_lo >= 3 && c_hi < 3) {
        return Err(Error::RootFinding(format!(
            "no change in solution count over [{lo}, {hi}]: {c_lo} and {c_hi} solutions"
        )));
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        let c = count(mid)?;
        if c >= 3 {
            lo = mid;
            c_lo = c;
        } else {
            hi = mid;
            c_hi = c;
        }
    }
    Ok(PitchforkEstimate {
        lambda: 0.5 * (lo + hi),
        resolution: hi - lo,
        count_below: c_lo,
        count_above: c_hi,
    })
}

/// Symmetric solutions sampled at fixed points as `h` grows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupTable {
    pub lambda: f64,
    pub p: f64,
    pub h_grid: Vec<f64>,
    pub x_probes: Vec<f64>,
    /// `values[i][j] = u_{h_i}(x_j)`.
    pub values: Vec<Vec<f64>>,
    pub r_max: Vec<f64>,
    /// First `h` that failed, with the reason; rows stop before it.
    pub failure: Option<(f64, String)>,
}

pub fn blowup_study(lambda: f64, p: f64, h_grid: &[f64], x_probes: &[f64]) -> Result<BlowupTable> {
    blowup_study_with(lambda, p, h_grid, x_probes, &SolverConfig::default())
}

pub fn blowup_study_with(
    lambda: f64,
    p: f64,
    h_grid: &[f64],
    x_probes: &[f64],
    cfg: &SolverConfig,
) -> Result<BlowupTable> {
    if !(lambda < PI * PI) {
        return Err(Error::NoSolution(format!(
            "lambda = {lambda} is not below pi^2"
        )));
    }
    if h_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("h grid must be strictly increasing");
    }
    if x_probes.iter().any(|x| !(*x >= 0.0 && *x <= 1.0)) {
        return domain("probes must lie in [0, 1]");
    }
    let mut table = BlowupTable {
        lambda,
        p,
        h_grid: Vec::new(),
        x_probes: x_probes.to_vec(),
        values: Vec::new(),
        r_max: Vec::new(),
        failure: None,
    };
    for &h in h_grid {
        let sol = ProblemParams::new(lambda, p, h).and_then(|q| solve_symmetric_with(&q, cfg));
        match sol {
            Ok(s) => {
                table.h_grid.push(h);
                table
                    .values
                    .push(x_probes.iter().map(|&x| s.eval(x).u).collect());
                table.r_max.push(s.r_max);
            }
            Err(e) => {
                table.failure = Some((h, e.to_string()));
                break;
            }
        }
    }
    Ok(table)
}

/// One step of a metasolution sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub n: usize,
    pub h: f64,
    pub lambda: f64,
    pub r_max: f64,
    /// `sup_x |u(x) − α sin(πx)|` over the trajectory samples.
    pub sup_error: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub alpha: f64,
    pub p: f64,
    pub rows: Vec<SequenceRow>,
    /// Why the sequence stopped early, if it did.
    pub failure: Option<String>,
}

/// For `n = 1..=n_max`, picks `h_n ∈ (1 − 1/n, 1)` (increasing in `n`, as
/// small as possible) so
/// that amplitude `α` is reached at some `λ_n ∈ (π² − 1/n, π²)`, finds
/// `λ_n` by bisection on `‖u‖∞ − α`, and measures the distance to
/// `α sin(πx)`.
pub fn metasolution_sequence(alpha: f64, p: f64, n_max: usize) -> Result<Sequence> {
    metasolution_sequence_with(alpha, p, n_max, &SolverConfig::default())
}

pub fn metasolution_sequence_with(
    alpha: f64,
    p: f64,
    n_max: usize,
    cfg: &SolverConfig,
) -> Result<Sequence> {
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let pi2 = PI * PI;
    let mut seq = Sequence {
        alpha,
        p,
        ..Sequence::default()
    };
    let mut h_prev = 0.0_f64;
    for n in 1..=n_max {
        match sequence_step(alpha, p, n, h_prev, pi2, cfg) {
            Ok(row) => {
                h_prev = row.h;
                seq.rows.push(row);
            }
            Err(e) => {
                seq.failure = Some(format!("n = {n}: {e}"));
                break;
            }
        }
    }
    Ok(seq)
}

fn sequence_step(
    alpha: f64,
    p: f64,
    n: usize,
    h_prev: f64,
    pi2: f64,
    cfg: &SolverConfig,
) -> Result<SequenceRow> {
    let lam_lo = pi2 - 1.0 / n as f64;
    let amp = |lam: f64, h: f64| symmetric_amplitude(&ProblemParams::new(lam, p, h)?, cfg);
    // Start from the widest admissible window, h = n/(n+1), and close it
    // further only until the amplitude at the left end exceeds α. Closing it
    // more than needed pushes λ_n against π², where ‖u‖∞ is too sensitive to
    // λ for a 1e−8 amplitude match.
    let mut gap = (1.0 / (n + 1) as f64).min(0.999 * (1.0 - h_prev));
    let mut h = 1.0 - gap;
    while amp(lam_lo, h)? <= alpha {
        gap *= 0.5;
        h = 1.0 - gap;
        if gap < 1e-12 {
            return Err(Error::RootFinding(format!(
                "amplitude {alpha} not reached at lambda = {lam_lo} for any h below 1 - 1e-12"
            )));
        }
    }
    // The amplitude vanishes at π²; stop just short of it.
    let lam_hi = pi2 * (1.0 - 1e-15);
    let f = |lam: f64| Ok(amp(lam, h)? - alpha);
    let lam = brent(
        f,
        lam_lo,
        lam_hi,
        &RootConfig {
            x_tol: 1e-15,
            f_tol: 1e-11 * alpha,
            max_iter: 300,
        },
    )?;
    let sol = solve_symmetric_with(&ProblemParams::new(lam, p, h)?, cfg)?;
    let sup_error = sol
        .samples()
        .map(|(_, s)| (s.u - alpha * (PI * s.x).sin()).abs())
        .fold(0.0, f64::max);
    Ok(SequenceRow {
        n,
        h,
        lambda: lam,
        r_max: sol.r_max,
        sup_error,
    })
}

/// Doubling search for the least tested `R` at which the matching system
/// solves, with a sanity check at `2R` and `4R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinREstimate {
    /// Least tested `R` that succeeded.
    pub r: f64,
    /// Every tested `R` and whether it succeeded.
    pub tested: Vec<(f64, bool)>,
    /// Tested `R > r` that failed.
    pub violations: Vec<f64>,
}

pub const MIN_R_START: f64 = 1.0;
pub const MIN_R_CAP: f64 = 1e9;

pub fn estimate_min_r(lambda: f64, p: f64, epsilon: f64) -> Result<MinREstimate> {
    estimate_min_r_with(lambda, p, epsilon, &SolverConfig::default())
}

pub fn estimate_min_r_with(
    lambda: f64,
    p: f64,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<MinREstimate> {
    if !(lambda > PI * PI / 4.0 && lambda < PI * PI) {
        return domain(format!("need pi^2/4 < lambda < pi^2, got {lambda}"));
    }
    let ok = |r: f64| solve_matching_with(lambda, p, r, epsilon, cfg).is_ok();
    let mut tested = Vec::new();
    let mut r = MIN_R_START;
    loop {
        let success = ok(r);
        tested.push((r, success));
        if success {
            break;
        }
        r *= 2.0;
        if r > MIN_R_CAP {
            return Err(Error::NoSolution(format!(
                "matching failed for every tested R up to {MIN_R_CAP:e}"
            )));
        }
    }
    let mut violations = Vec::new();
    for k in 1..=2 {
        let big = r * f64::from(1u32 << k);
        let success = ok(big);
        tested.push((big, success));
        if !success {
            violations.push(big);
        }
    }
    Ok(MinREstimate {
        r,
        tested,
        violations,
    })
}

/// Columns `lambda,h,r_max,v0,symmetry,shoot_residual,fixed_point_residual,warn`.
pub fn branch_csv(points: &[BranchPoint]) -> String {
    let mut out =
        String::from("lambda,h,r_max,v0,symmetry,shoot_residual,fixed_point_residual,warn\n");
    for b in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(b.lambda),
            num(b.h),
            num(b.r_max),
            num(b.v0),
            b.symmetry.as_str(),
            num(b.shoot_residual),
            num(b.fixed_point_residual),
            residuals_exceed(b.shoot_residual, b.fixed_point_residual, b.r_max)
        );
    }
    out
}

/// Columns `h,r_max,u(x_1),…`, one row per `h`.
pub fn blowup_csv(t: &BlowupTable) -> String {
    let mut out = String::from("h,r_max");
    for x in &t.x_probes {
        let _ = write!(out, ",u({x})");
    }
    out.push('\n');
    for (i, h) in t.h_grid.iter().enumerate() {
        out.push_str(&num(*h));
        out.push(',');
        out.push_str(&num(t.r_max[i]));
        for v in &t.values[i] {
            out.push(',');
            out.push_str(&num(*v));
        }
        out.push('\n');
    }
    out
}

/// Columns `n,h,lambda,r_max,sup_error`.
pub fn sequence_csv(s: &Sequence) -> String {
    let mut out = String::from("n,h,lambda,r_max,sup_error\n");
    for r in &s.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            num(r.h),
            num(r.lambda),
            num(r.r_max),
            num(r.sup_error)
        );
    }
    out
}
