//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Run with `cargo test -p mnlab --test acceptance`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use mnlab::continuation::{blowup_study, metasolution_sequence};
use mnlab::solvers::{
    find_all_positive_with, matching_to_solution, solve_matching, solve_symmetric, ScanConfig,
};
use mnlab::timemaps::{
    connection_amplitudes, homoclinic_crossing, phi, phi_dtheta, time_l_hyperbolic, time_n_full,
    time_n_rotated, TimeMaps,
};
use mnlab::{Params, Solution, Symmetry};
use rand::{rngs::StdRng, Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Solutions accepted by any criterion, for the lower-bound and energy
/// checks.
#[derive(Default)]
struct Pool {
    solutions: Vec<Solution>,
}

fn phi_anchor() -> Outcome {
    let start = Instant::now();
    let n = 501;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n {
        let theta = 0.05 * k as f64 / (n - 1) as f64;
        match phi(300.0, theta, 6.0, 3.0) {
            Ok(v) => {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Err(e) => return outcome(false, format!("phi failed at theta = {theta}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    let pass = lo >= 0.15106 && hi <= 0.15132 && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "phi(300, [0, 0.05]) in [{lo:.10}, {hi:.10}], target [0.15106, 0.15132], {elapsed:.2?}"
        ),
    )
}

fn small_amplitude_limits() -> Outcome {
    let mut worst: Vec<String> = Vec::new();
    let mut pass = true;
    let mut e1: f64 = 0.0;
    for theta in [0.0, 0.3, 1.0] {
        match phi(1e-10, theta, 6.0, 3.0) {
            Ok(v) => e1 = e1.max((v - (PI - 2.0 * theta)).abs()),
            Err(e) => return outcome(false, format!("phi: {e}")),
        }
    }
    pass &= e1 < 1e-4;
    worst.push(format!("phi {e1:.2e}"));
    let mut e2: f64 = 0.0;
    for lam in [1.0_f64, 4.0] {
        match time_n_full(lam, 3.0, 1e-10) {
            Ok(v) => e2 = e2.max((v - PI / (2.0 * lam.sqrt())).abs()),
            Err(e) => return outcome(false, format!("T_N: {e}")),
        }
    }
    pass &= e2 < 1e-4;
    worst.push(format!("T_N {e2:.2e}"));
    let (lam, h) = (4.0_f64, 0.3);
    let e3 = match time_n_rotated(lam, 3.0, 1e-10, h * lam.sqrt() / 2.0) {
        Ok(v) => (v - (PI / lam.sqrt() - h) / 2.0).abs(),
        Err(e) => return outcome(false, format!("rotated T_N: {e}")),
    };
    pass &= e3 < 1e-5;
    worst.push(format!("T_N(l,0,u_l) {e3:.2e}"));
    outcome(pass, format!("errors: {}", worst.join(", ")))
}

fn derivative_anchor() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for r in [20.0, 300.0] {
        let at_top = phi_dtheta(r, FRAC_PI_2, 6.0, 3.0);
        pass &= at_top == Ok(-2.0);
        let theta = FRAC_PI_2 - 1e-4;
        let d = 1e-6;
        let fd = match (phi(r, theta + d, 6.0, 3.0), phi(r, theta - d, 6.0, 3.0)) {
            (Ok(a), Ok(b)) => (a - b) / (2.0 * d),
            _ => return outcome(false, "phi failed near pi/2"),
        };
        let an = match phi_dtheta(r, theta, 6.0, 3.0) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("phi_dtheta: {e}")),
        };
        pass &= (fd - an).abs() < 1e-3;
        notes.push(format!(
            "R={r}: dphi(pi/2)={:?}, |fd-an|={:.2e}",
            at_top.ok(),
            (fd - an).abs()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn closed_form_duality() -> Outcome {
    let maps = TimeMaps::<f64>::default();
    let mut rng = StdRng::seed_from_u64(20_240_611);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let lam = -rng.gen_range(0.1..50.0);
        let u_plus = rng.gen_range(0.01..10.0);
        let u_l = u_plus * rng.gen_range(1.001..20.0);
        let closed = time_l_hyperbolic(lam, u_plus, u_l);
        let quad = maps.time_l_hyperbolic_quadrature(lam, u_plus, u_l);
        match (closed, quad) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
            (a, b) => {
                return outcome(
                    false,
                    format!("failure at ({lam}, {u_plus}, {u_l}): {a:?} {b:?}"),
                )
            }
        }
    }
    outcome(
        worst < 1e-10,
        format!("max |closed - quadrature| = {worst:.2e} over 20 triples"),
    )
}

const GRID_LAMBDA: [f64; 5] = [-5.0, -1.0, 0.0, 3.0, 9.0];
const GRID_H: [f64; 3] = [0.2, 0.5, 0.8];

fn dual_method(pool: &mut Pool, scans: &mut Vec<(f64, f64, Vec<Solution>)>) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut worst_dv: f64 = 0.0;
    let mut worst_shoot: f64 = 0.0;
    let mut worst_fp: f64 = 0.0;
    let mut notes = Vec::new();
    for &lam in &GRID_LAMBDA {
        for &h in &GRID_H {
            let params = Params::new(lam, 3.0, h).expect("valid grid point");
            let sym = match solve_symmetric(&params) {
                Ok(s) => s,
                Err(e) => {
                    pass = false;
                    notes.push(format!("time maps failed at ({lam}, {h}): {e}"));
                    continue;
                }
            };
            let all = find_all_positive_with(&params, &ScanConfig::default());
            let shot: Vec<&Solution> = all
                .iter()
                .filter(|s| s.symmetry == Symmetry::Symmetric)
                .collect();
            match shot.first() {
                Some(s) => {
                    let dv = (s.v0 - sym.v0).abs();
                    worst_dv = worst_dv.max(dv);
                    pass &= dv < 1e-7;
                }
                None => {
                    pass = false;
                    notes.push(format!("no symmetric root in the scan at ({lam}, {h})"));
                }
            }
            for s in std::iter::once(&sym).chain(all.iter()) {
                worst_shoot = worst_shoot.max(s.shoot_residual);
                worst_fp = worst_fp.max(s.fixed_point_residual);
            }
            pool.solutions.push(sym);
            pool.solutions.extend(all.iter().cloned());
            scans.push((lam, h, all));
        }
    }
    let elapsed = start.elapsed();
    pass &= worst_shoot < 1e-7 && worst_fp < 1e-6 && elapsed < Duration::from_secs(60);
    notes.insert(
        0,
        format!("max |dv0| = {worst_dv:.2e}, max shoot = {worst_shoot:.2e}, max fixed point = {worst_fp:.2e}, {elapsed:.2?}"),
    );
    outcome(pass, notes.join("; "))
}

fn uniqueness(scans: &[(f64, f64, Vec<Solution>)]) -> Outcome {
    let bad: Vec<String> = scans
        .iter()
        .filter(|(_, _, all)| {
            all.iter()
                .filter(|s| s.symmetry == Symmetry::Symmetric)
                .count()
                != 1
        })
        .map(|(l, h, all)| {
            format!(
                "({l}, {h}): {} symmetric",
                all.iter()
                    .filter(|s| s.symmetry == Symmetry::Symmetric)
                    .count()
            )
        })
        .collect();
    let counts: Vec<usize> = scans.iter().map(|(_, _, a)| a.len()).collect();
    outcome(
        bad.is_empty() && scans.len() == GRID_LAMBDA.len() * GRID_H.len(),
        if bad.is_empty() {
            format!(
                "one symmetric solution at each of {} points (total counts {counts:?})",
                scans.len()
            )
        } else {
            bad.join(", ")
        },
    )
}

fn paired(all: &[Solution]) -> (bool, f64) {
    let mut worst: f64 = 0.0;
    for s in all.iter().filter(|s| !s.symmetry.is_symmetric()) {
        let mirror = -s.terminal().v;
        let best = all
            .iter()
            .map(|t| (t.v0 - mirror).abs())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    (worst < 1e-7, worst)
}

fn multiplicity_negative(pool: &mut Pool) -> Outcome {
    let ladder = [-1.0, -2.0, -5.0, -10.0, -20.0, -50.0];
    let mut ok = Vec::new();
    let mut notes = Vec::new();
    for &lam in &ladder {
        let params = Params::new(lam, 3.0, 0.5).expect("valid");
        let all = find_all_positive_with(&params, &ScanConfig::default());
        let (pairs, worst) = paired(&all);
        ok.push(all.len() >= 3 && pairs);
        notes.push(format!("{lam}: {} sols, pair gap {worst:.1e}", all.len()));
        pool.solutions.extend(all);
    }
    // λ* is the largest ladder value from which every more negative one
    // passes.
    let star = (0..ladder.len())
        .find(|&i| ok[i..].iter().all(|&b| b))
        .map(|i| ladder[i]);
    outcome(
        star.is_some(),
        format!("lambda* = {star:?}; {}", notes.join(", ")),
    )
}

fn multiplicity_positive(pool: &mut Pool) -> Outcome {
    let m = match solve_matching(6.0, 3.0, 300.0, 0.05) {
        Ok(m) => m,
        Err(e) => return outcome(false, format!("matching failed: {e}")),
    };
    let (e_sum, e_phi) = match m.residuals(6.0, 3.0) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("residuals: {e}")),
    };
    let sol = match matching_to_solution(&m, 6.0, 3.0) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("reconstruction failed: {e}")),
    };
    let mut pass = m.theta0 != m.theta1
        && e_sum < 1e-9
        && e_phi < 1e-9
        && sol.shoot_residual < 1e-6
        && m.h > 0.9
        && m.h < 1.0;
    let mut hs = vec![m.h];
    for r in [3000.0, 30000.0] {
        match solve_matching(6.0, 3.0, r, 0.05) {
            Ok(mm) => hs.push(mm.h),
            Err(e) => return outcome(false, format!("matching at R = {r}: {e}")),
        }
    }
    pass &= hs.windows(2).all(|w| w[1] > w[0]) && hs.iter().all(|&h| h < 1.0);
    pool.solutions.push(sol.clone());
    outcome(
        pass,
        format!(
            "theta = ({:.6}, {:.6}), residuals ({e_sum:.1e}, {e_phi:.1e}), shoot {:.1e}, h(R=300,3e3,3e4) = {:?}",
            m.theta0, m.theta1, sol.shoot_residual, hs
        ),
    )
}

fn blowup() -> Outcome {
    let hs = [0.5, 0.9, 0.99, 0.999];
    let mut pass = true;
    let mut notes = Vec::new();
    for lam in [0.0, -5.0] {
        match blowup_study(lam, 3.0, &hs, &[0.5]) {
            Ok(t) if t.failure.is_none() => {
                let col: Vec<f64> = t.values.iter().map(|r| r[0]).collect();
                let inc = col.windows(2).all(|w| w[1] > w[0]);
                let factor = col[3] / col[0];
                pass &= inc && factor > 10.0;
                notes.push(format!("lambda={lam}: u(0.5) = {col:.4?}"));
            }
            Ok(t) => {
                pass = false;
                notes.push(format!("lambda={lam}: stopped at {:?}", t.failure));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("lambda={lam}: {e}"));
            }
        }
    }
    outcome(pass, notes.join("; "))
}

fn metasolutions() -> Outcome {
    let s = match metasolution_sequence(1.0, 3.0, 8) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let rows = &s.rows;
    let mut pass = s.failure.is_none() && rows.len() == 8;
    pass &= rows
        .windows(2)
        .all(|w| w[1].lambda > w[0].lambda && w[1].h > w[0].h && w[1].sup_error < w[0].sup_error);
    pass &= rows
        .iter()
        .all(|r| r.lambda < PI * PI && r.h < 1.0 && (r.r_max - 1.0).abs() < 1e-8);
    let last = rows.last().map(|r| r.sup_error).unwrap_or(f64::NAN);
    pass &= last < 0.05;
    let amp = rows
        .iter()
        .map(|r| (r.r_max - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        pass,
        format!(
            "lambda_8 = {:.12}, h_8 = {:.6}, max |r_max - 1| = {amp:.1e}, sup errors {:?}",
            rows.last().map(|r| r.lambda).unwrap_or(f64::NAN),
            rows.last().map(|r| r.h).unwrap_or(f64::NAN),
            rows.iter()
                .map(|r| format!("{:.2e}", r.sup_error))
                .collect::<Vec<_>>()
        ),
    )
    .with_failure(s.failure)
}

impl Outcome {
    fn with_failure(mut self, f: Option<String>) -> Self {
        if let Some(f) = f {
            self.detail.push_str(&format!("; stopped: {f}"));
        }
        self
    }
}

fn lower_bounds(pool: &Pool) -> Outcome {
    let mut pass = true;
    let mut checked = 0;
    for s in pool.solutions.iter().filter(|s| s.params.lambda() < 0.0) {
        let bound = (-s.params.lambda()).powf(1.0 / (s.params.p() - 1.0));
        pass &= s.r_max >= bound;
        checked += 1;
    }
    let mut constructions = 0;
    for &lam in &[-50.0, -20.0, -10.0, -5.0, -2.0, -1.0] {
        for &h in &GRID_H {
            match (
                connection_amplitudes(lam, 3.0, h),
                homoclinic_crossing(lam, 3.0),
            ) {
                (Ok((u0, u1)), Ok(u_ho)) => {
                    pass &= u0 > u1 && u1 >= u_ho;
                    constructions += 1;
                }
                _ => pass = false,
            }
        }
    }
    outcome(
        pass,
        format!("{checked} solutions with lambda < 0, {constructions} amplitude pairs"),
    )
}

fn energy(pool: &Pool) -> Outcome {
    let worst = pool
        .solutions
        .iter()
        .map(|s| s.energy_drift())
        .fold(0.0, f64::max);
    outcome(
        worst < 1e-9,
        format!(
            "max relative drift {worst:.2e} over {} trajectories",
            pool.solutions.len()
        ),
    )
}

fn main() {
    let mut pool = Pool::default();
    let mut scans = Vec::new();
    // Evaluated in order: later criteria reuse solutions from earlier ones.
    let results: Vec<(&str, Outcome)> = vec![
        ("1 phi anchor", phi_anchor()),
        ("2 small-amplitude limits", small_amplitude_limits()),
        ("3 derivative anchor", derivative_anchor()),
        ("4 closed form vs quadrature", closed_form_duality()),
        (
            "5 dual-method equivalence",
            dual_method(&mut pool, &mut scans),
        ),
        ("6 uniqueness of the symmetric solution", uniqueness(&scans)),
        (
            "7 multiplicity, lambda < 0",
            multiplicity_negative(&mut pool),
        ),
        (
            "8 multiplicity, lambda > 0",
            multiplicity_positive(&mut pool),
        ),
        ("9 blow-up", blowup()),
        ("10 metasolution sequence", metasolutions()),
        ("11 lower bounds", lower_bounds(&pool)),
        ("12 energy conservation", energy(&pool)),
    ];

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
