use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use mnlab::continuation::{
    blowup_csv, blowup_study_with, branch_csv, estimate_pitchfork_with, metasolution_sequence_with,
    sequence_csv, sweep_lambda_with, BranchPoint, PitchforkEstimate, SweepConfig,
};
use mnlab::export::{num, SolutionRecord};
use mnlab::shooting::trajectory_csv;
use mnlab::solvers::{
    find_all_positive_with, matching_to_solution_with, phi_landscape_adaptive_with, reflect,
    solve_matching_with, solve_symmetric_with, MatchingSolution, PhiLandscape, ScanConfig,
    SolverConfig,
};
use mnlab::timemaps::TimeMaps;
use mnlab::{Params, Regime, Solution, Symmetry};

use crate::output::{csv_field, CliError, CliResult, Format, Sink};
use crate::plot::{Plot, Series, PALETTE};
use crate::{BlowupArgs, LandscapeArgs, PitchforkArgs, SequenceArgs, SolveArgs, SweepArgs};

pub struct Context {
    pub cfg: SolverConfig,
    pub pool: rayon::ThreadPool,
    pub sink: Sink,
}

fn solvable(lambda: f64, p: f64, h: f64) -> CliResult<Params> {
    let params = Params::new(lambda, p, h)?;
    params.require_solvable()?;
    Ok(params)
}

/// Asymmetric solutions with `0 < λ ≤ π²/4` lie outside the range where
/// their existence is established; they are reported but marked.
fn exploratory(s: &Solution) -> bool {
    let lam = s.params.lambda();
    !s.symmetry.is_symmetric() && lam > 0.0 && lam <= PI * PI / 4.0
}

#[derive(Serialize)]
struct Record {
    #[serde(flatten)]
    record: SolutionRecord,
    exploratory: bool,
}

const SOLUTION_HEADER: &str =
    "lambda,p,h,v0,r_max,x_max,symmetry,shoot_residual,fixed_point_residual,\
shoot_threshold,fixed_point_threshold,warn,exploratory,samples\n";

fn solutions_csv(records: &[Record]) -> String {
    let mut out = String::from(SOLUTION_HEADER);
    for Record {
        record: r,
        exploratory,
    } in records
    {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            num(r.params.lambda),
            num(r.params.p),
            num(r.params.h),
            num(r.v0),
            num(r.r_max),
            num(r.x_max),
            r.symmetry.as_str(),
            num(r.residuals.shoot),
            num(r.residuals.fixed_point),
            num(r.residuals.shoot_threshold),
            num(r.residuals.fixed_point_threshold),
            r.warn,
            exploratory,
            csv_field(r.samples.as_deref().unwrap_or(""))
        );
    }
    out
}

fn phase_plot(s: &Solution) -> Plot {
    let mut plot = Plot::new(
        format!(
            "phase plane: lambda = {}, h = {}, {}",
            s.params.lambda(),
            s.params.h(),
            s.symmetry.as_str()
        ),
        "u",
        "u'",
    );
    let names = [
        "left arc (nonlinear)",
        "window (linear)",
        "right arc (nonlinear)",
    ];
    for (k, arc) in s.arcs.iter().enumerate() {
        let color = match arc.regime {
            Regime::Nonlinear => PALETTE[if k == 0 { 0 } else { 7 }],
            Regime::Linear => PALETTE[1],
        };
        plot.series.push(Series::line(
            names[k],
            color,
            arc.samples.iter().map(|st| (st.u, st.v)).collect(),
        ));
    }
    plot
}

fn profile_plot(sols: &[Solution]) -> Plot {
    let mut plot = Plot::new("solution profiles", "x", "u");
    for (i, s) in sols.iter().enumerate() {
        let pts = s.samples().map(|(_, st)| (st.x, st.u)).collect();
        plot.series.push(Series::line(
            format!("{} v0={:.4}", s.symmetry.as_str(), s.v0),
            PALETTE[i % PALETTE.len()],
            pts,
        ));
    }
    plot
}

fn emit_solutions(ctx: &Context, sols: &[Solution], trajectories: bool) -> CliResult {
    let mut records = Vec::with_capacity(sols.len());
    for (i, s) in sols.iter().enumerate() {
        let samples = if trajectories {
            Some(
                ctx.sink
                    .file(&format!("trajectory_{i}.csv"), &trajectory_csv(s))?,
            )
        } else {
            None
        };
        ctx.sink.svg(&format!("phase_{i}.svg"), &phase_plot(s))?;
        records.push(Record {
            record: SolutionRecord::new(s, samples),
            exploratory: exploratory(s),
        });
    }
    ctx.sink.svg("profiles.svg", &profile_plot(sols))?;
    for r in records.iter().filter(|r| r.record.warn) {
        eprintln!(
            "warning: {} solution with v0 = {} exceeds a residual threshold",
            r.record.symmetry.as_str(),
            num(r.record.v0)
        );
    }
    ctx.sink
        .table("solutions", || solutions_csv(&records), &records)
}

pub fn solve(ctx: &Context, a: &SolveArgs) -> CliResult {
    if a.matching {
        return solve_matching_pair(ctx, a);
    }
    let h =
        a.h.ok_or_else(|| CliError::Usage("--h is required".into()))?;
    let params = solvable(a.lambda, a.p, h)?;
    let sols = if a.all {
        if a.n_scan < 100 {
            return Err(CliError::Usage(format!(
                "--n-scan must be at least 100, got {}",
                a.n_scan
            )));
        }
        if let Some(v) = a.v0_max {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!(
                    "--v0-max must be positive, got {v}"
                )));
            }
        }
        let scan = ScanConfig {
            v0_max: a.v0_max,
            n_scan: a.n_scan,
            solver: ctx.cfg,
        };
        let all = ctx.pool.install(|| find_all_positive_with(&params, &scan));
        if all.is_empty() {
            return Err(CliError::Numerical(
                "the slope scan found no positive solution".into(),
            ));
        }
        all
    } else {
        vec![solve_symmetric_with(&params, &ctx.cfg)?]
    };
    emit_solutions(ctx, &sols, a.trajectory)
}

const MATCHING_HEADER: &str = "theta0,theta1,h,R,s_hat,matching_residual,shoot_residual,epsilon\n";

fn matching_csv(m: &MatchingSolution) -> String {
    format!(
        "{MATCHING_HEADER}{},{},{},{},{},{},{},{}\n",
        num(m.theta0),
        num(m.theta1),
        num(m.h),
        num(m.r),
        num(m.s_hat),
        num(m.matching_residual),
        m.shoot_residual.map(num).unwrap_or_default(),
        num(m.epsilon)
    )
}

fn solve_matching_pair(ctx: &Context, a: &SolveArgs) -> CliResult {
    let r =
        a.r.ok_or_else(|| CliError::Usage("--match needs --R".into()))?;
    if !(a.lambda > 0.0 && a.lambda < PI * PI) {
        return Err(CliError::Usage(format!(
            "--match needs 0 < lambda < pi^2, got {}",
            a.lambda
        )));
    }
    let mut m = solve_matching_with(a.lambda, a.p, r, a.epsilon, &ctx.cfg)?;
    let sol = matching_to_solution_with(&m, a.lambda, a.p, &ctx.cfg)?;
    m.shoot_residual = Some(sol.shoot_residual);
    let mut pair = vec![sol.clone(), reflect(&sol)];
    pair.sort_by(|x, y| x.v0.total_cmp(&y.v0));
    ctx.sink.table("matching", || matching_csv(&m), &m)?;
    emit_solutions(ctx, &pair, a.trajectory)
}

fn lambda_grid(a: &SweepArgs) -> CliResult<Vec<f64>> {
    if !a.lambda.is_empty() {
        return Ok(a.lambda.clone());
    }
    match (a.lambda_min, a.lambda_max) {
        (Some(lo), Some(hi)) => {
            if !(lo < hi) || a.steps < 2 {
                return Err(CliError::Usage(
                    "need --lambda-min < --lambda-max and --steps >= 2".into(),
                ));
            }
            let n = a.steps - 1;
            Ok((0..=n)
                .map(|i| lo + (hi - lo) * i as f64 / n as f64)
                .collect())
        }
        _ => Err(CliError::Usage(
            "give --lambda or both --lambda-min and --lambda-max".into(),
        )),
    }
}

#[derive(Serialize)]
struct Failure {
    h: f64,
    lambda: f64,
    message: String,
}

#[derive(Serialize)]
struct SweepOut<'a> {
    p: f64,
    points: &'a [BranchPoint],
    failures: &'a [Failure],
}

pub fn sweep(ctx: &Context, a: &SweepArgs) -> CliResult {
    let grid = lambda_grid(a)?;
    for &h in &a.h {
        Params::new(0.0, a.p, h)?;
    }
    if grid.iter().any(|l| !l.is_finite()) {
        return Err(CliError::Usage("lambda values must be finite".into()));
    }
    let cfg = SweepConfig {
        asymmetric: !a.symmetric_only,
        scan: ScanConfig {
            solver: ctx.cfg,
            ..ScanConfig::default()
        },
    };
    // One job per h; results are collected in argument order.
    let sweeps: Vec<_> = ctx.pool.install(|| {
        a.h.par_iter()
            .map(|&h| sweep_lambda_with(a.p, h, &grid, &cfg))
            .collect()
    });
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (&h, s) in a.h.iter().zip(sweeps) {
        points.extend(s.points);
        for (lambda, message) in s.failures {
            eprintln!("warning: h = {h}, lambda = {lambda}: {message}");
            failures.push(Failure { h, lambda, message });
        }
    }
    if points.is_empty() {
        return Err(CliError::Numerical(
            "no grid point produced a solution".into(),
        ));
    }

    let mut plot = Plot::new(
        format!("bifurcation diagram, p = {}", a.p),
        "lambda",
        "max u",
    );
    plot.log_y = true;
    for (k, &h) in a.h.iter().enumerate() {
        for (sym, label) in [(true, "symmetric"), (false, "asymmetric")] {
            let pts: Vec<_> = points
                .iter()
                .filter(|b| b.h == h && (b.symmetry == Symmetry::Symmetric) == sym)
                .map(|b| (b.lambda, b.r_max))
                .collect();
            if !pts.is_empty() {
                let color = PALETTE[(2 * k + usize::from(!sym)) % PALETTE.len()];
                plot.series
                    .push(Series::markers(format!("h={h} {label}"), color, pts));
            }
        }
    }
    ctx.sink.svg("bifurcation.svg", &plot)?;
    let out = SweepOut {
        p: a.p,
        points: &points,
        failures: &failures,
    };
    ctx.sink.table("sweep", || branch_csv(&points), &out)
}

pub fn blowup(ctx: &Context, a: &BlowupArgs) -> CliResult {
    for &h in &a.h {
        solvable(a.lambda, a.p, h)?;
    }
    let t = blowup_study_with(a.lambda, a.p, &a.h, &a.probes, &ctx.cfg)?;
    if let Some((h, msg)) = &t.failure {
        eprintln!("warning: stopped at h = {h}: {msg}");
    }
    if t.h_grid.is_empty() {
        return Err(CliError::Numerical("no h value produced a solution".into()));
    }
    let mut plot = Plot::new(format!("blow-up at lambda = {}", a.lambda), "h", "u");
    plot.log_y = true;
    plot.series.push(Series::line(
        "max u",
        PALETTE[0],
        t.h_grid
            .iter()
            .copied()
            .zip(t.r_max.iter().copied())
            .collect(),
    ));
    for (j, x) in t.x_probes.iter().enumerate() {
        let pts = t
            .h_grid
            .iter()
            .zip(&t.values)
            .map(|(&h, row)| (h, row[j]))
            .collect();
        plot.series.push(Series::markers(
            format!("u({x})"),
            PALETTE[(j + 1) % PALETTE.len()],
            pts,
        ));
    }
    ctx.sink.svg("blowup.svg", &plot)?;
    ctx.sink.table("blowup", || blowup_csv(&t), &t)
}

pub fn sequence(ctx: &Context, a: &SequenceArgs) -> CliResult {
    let s = metasolution_sequence_with(a.alpha, a.p, a.n, &ctx.cfg)?;
    if let Some(msg) = &s.failure {
        eprintln!("warning: sequence stopped: {msg}");
    }
    if s.rows.is_empty() {
        return Err(CliError::Numerical(
            "no term of the sequence could be computed".into(),
        ));
    }
    let mut plot = Plot::new(
        format!("metasolution sequence, alpha = {}", a.alpha),
        "n",
        "lambda_n",
    );
    plot.series.push(Series::line(
        "lambda_n",
        PALETTE[0],
        s.rows.iter().map(|r| (r.n as f64, r.lambda)).collect(),
    ));
    let last = s.rows.last().map_or(1.0, |r| r.n as f64);
    plot.series.push(Series::line(
        "pi^2",
        PALETTE[1],
        vec![(1.0, PI * PI), (last, PI * PI)],
    ));
    ctx.sink.svg("sequence.svg", &plot)?;
    ctx.sink.table("sequence", || sequence_csv(&s), &s)
}

#[derive(Serialize)]
struct Curve {
    #[serde(rename = "R")]
    r: f64,
    /// `decreasing` or `interior_max`, read off the samples.
    shape: &'static str,
    theta: Vec<f64>,
    phi: Vec<f64>,
    landmarks: Option<PhiLandscape>,
    note: Option<String>,
}

fn landscape_csv(curves: &[Curve]) -> String {
    let mut out = String::from("R,theta,phi\n");
    for c in curves {
        for (t, f) in c.theta.iter().zip(&c.phi) {
            let _ = writeln!(out, "{},{},{}", num(c.r), num(*t), num(*f));
        }
    }
    out
}

fn landscape_summary_csv(curves: &[Curve]) -> String {
    let mut out = String::from("R,shape,epsilon,theta_m,phi_m,theta_M,phi_M,theta_bar,note\n");
    for c in curves {
        let cols = match &c.landmarks {
            Some(l) => [
                l.epsilon,
                l.theta_m,
                l.phi_m,
                l.theta_peak,
                l.phi_peak,
                l.theta_bar,
            ]
            .map(num)
            .join(","),
            None => ",,,,,".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{cols},{}",
            num(c.r),
            c.shape,
            csv_field(c.note.as_deref().unwrap_or(""))
        );
    }
    out
}

pub fn landscape(ctx: &Context, a: &LandscapeArgs) -> CliResult {
    if !(a.lambda > 0.0 && a.lambda < PI * PI) {
        return Err(CliError::Usage(format!(
            "landscape needs 0 < lambda < pi^2, got {}",
            a.lambda
        )));
    }
    if a.points < 3 {
        return Err(CliError::Usage("--points must be at least 3".into()));
    }
    if let Some(r) = a.r.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(CliError::Usage(format!(
            "--R values must be positive, got {r}"
        )));
    }
    let n = a.points - 1;
    let thetas: Vec<f64> = (0..=n).map(|i| FRAC_PI_2 * i as f64 / n as f64).collect();
    let cfg = ctx.cfg;
    let maps = TimeMaps::new(cfg.quad);
    let results: Vec<CliResult<Curve>> = ctx.pool.install(|| {
        a.r.par_iter()
            .map(|&r| {
                let curve = maps.phi_curve(r, &thetas, a.lambda, a.p)?;
                let phi: Vec<f64> = curve.iter().map(|c| c.value).collect();
                let top = phi
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, v)| if *v > phi[best] { i } else { best });
                let (landmarks, note) =
                    match phi_landscape_adaptive_with(r, a.lambda, a.p, a.epsilon, &cfg) {
                        Ok(l) => (Some(l), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                Ok(Curve {
                    r,
                    shape: if top == 0 {
                        "decreasing"
                    } else {
                        "interior_max"
                    },
                    theta: thetas.clone(),
                    phi,
                    landmarks,
                    note,
                })
            })
            .collect()
    });
    let curves = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let mut plot = Plot::new(
        format!("phi(R, theta), lambda = {}, p = {}", a.lambda, a.p),
        "theta",
        "phi",
    );
    for (k, c) in curves.iter().enumerate() {
        let pts = c.theta.iter().copied().zip(c.phi.iter().copied()).collect();
        plot.series.push(Series::line(
            format!("R = {}", c.r),
            PALETTE[k % PALETTE.len()],
            pts,
        ));
    }
    ctx.sink.svg("landscape.svg", &plot)?;
    ctx.sink
        .table("landscape", || landscape_csv(&curves), &curves)?;
    // JSON curves already carry their landmarks.
    if ctx.sink.format == Format::Csv {
        ctx.sink
            .extra_csv("landscape_summary", &landscape_summary_csv(&curves))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PitchforkRow {
    h: f64,
    estimate: Option<PitchforkEstimate>,
    note: Option<String>,
}

fn pitchfork_csv(rows: &[PitchforkRow]) -> String {
    let mut out = String::from("h,lambda,resolution,count_below,count_above,note\n");
    for r in rows {
        let cols = match &r.estimate {
            Some(e) => format!(
                "{},{},{},{}",
                num(e.lambda),
                num(e.resolution),
                e.count_below,
                e.count_above
            ),
            None => ",,,".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{cols},{}",
            num(r.h),
            csv_field(r.note.as_deref().unwrap_or(""))
        );
    }
    out
}

pub fn pitchfork(ctx: &Context, a: &PitchforkArgs) -> CliResult {
    if !(a.lambda_lo < a.lambda_hi && a.lambda_hi < PI * PI && a.resolution > 0.0) {
        return Err(CliError::Usage(
            "need --lambda-lo < --lambda-hi < pi^2 and a positive --resolution".into(),
        ));
    }
    for &h in &a.h {
        Params::new(0.0, a.p, h)?;
    }
    let scan = ScanConfig {
        solver: ctx.cfg,
        ..ScanConfig::default()
    };
    let rows: Vec<PitchforkRow> = ctx.pool.install(|| {
        a.h.par_iter()
            .map(|&h| {
                match estimate_pitchfork_with(a.p, h, a.lambda_lo, a.lambda_hi, a.resolution, &scan)
                {
                    Ok(e) => PitchforkRow {
                        h,
                        estimate: Some(e),
                        note: None,
                    },
                    Err(e) => PitchforkRow {
                        h,
                        estimate: None,
                        note: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    for r in &rows {
        if let Some(n) = &r.note {
            eprintln!("warning: h = {}: {n}", r.h);
        }
    }
    if rows.iter().all(|r| r.estimate.is_none()) {
        return Err(CliError::Numerical(
            "no pitchfork estimate succeeded".into(),
        ));
    }
    let mut plot = Plot::new(format!("symmetry breaking, p = {}", a.p), "h", "lambda");
    plot.series.push(Series::line(
        "estimated pitchfork",
        PALETTE[0],
        rows.iter()
            .filter_map(|r| r.estimate.map(|e| (r.h, e.lambda)))
            .collect(),
    ));
    ctx.sink.svg("pitchfork.svg", &plot)?;
    ctx.sink.table("pitchfork", || pitchfork_csv(&rows), &rows)
}
