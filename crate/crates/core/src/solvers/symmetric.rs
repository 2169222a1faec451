//! The symmetric solution from the time maps.
//!
//! * `λ < 0`: the solution climbs to `u0` in the nonlinear interval, comes
//!   back down to `u_l` at the interface and dips to its minimum `u_l/C` at
//!   `x = 1/2` along a hyperbolic orbit. `u0` solves
//!   `T_N(u0) + T_N(u0, u_l) = (1−h)/2`.
//! * `λ = 0`: `u` is constant on the window, so `T_N(0, u0) = (1−h)/2`,
//!   solved in closed form by homogeneity.
//! * `0 < λ < π²`: the window rotates the phase point by `h√λ/2` on each
//!   side of the maximum; `u_l` solves the rotated time map equation.

use crate::error::{domain, Error, Result};
use crate::model::{PositiveSolution, ProblemParams, Symmetry};
use crate::roots::{brent, RootConfig};
use crate::shooting::shoot;
use crate::timemaps::{homoclinic_crossing, linear_gate_ratio, TimeMaps};

use super::{verify, SolverConfig};

/// The unique symmetric positive solution, verified by shooting and by the
/// fixed-point residual.
pub fn solve_symmetric(params: &ProblemParams<f64>) -> Result<PositiveSolution<f64>> {
    solve_symmetric_with(params, &SolverConfig::default())
}

pub fn solve_symmetric_with(
    params: &ProblemParams<f64>,
    cfg: &SolverConfig,
) -> Result<PositiveSolution<f64>> {
    let v0 = symmetric_slope(params, cfg)?;
    match check(v0, params, cfg) {
        Err(Error::Verification { .. }) => check(v0, params, &cfg.tightened()),
        other => other,
    }
}

fn check(
    v0: f64,
    params: &ProblemParams<f64>,
    cfg: &SolverConfig,
) -> Result<PositiveSolution<f64>> {
    let shot = shoot(v0, params, &cfg.flow)?;
    if !shot.positive {
        return Err(Error::Verification {
            what: "first interior zero of the symmetric shot",
            value: shot.first_zero.unwrap_or(f64::NAN),
            threshold: 1.0,
        });
    }
    let mut sol = shot.candidate;
    verify(&sol)?;
    if sol.symmetry != Symmetry::Symmetric {
        return Err(Error::Verification {
            what: "symmetry defect",
            value: sol.symmetry_defect(),
            threshold: crate::shooting::symmetry_tolerance(sol.r_max),
        });
    }
    sol.symmetry = Symmetry::Symmetric;
    Ok(sol)
}

/// Initial slope `u'(0)` of the symmetric solution, from the time maps only.
pub fn symmetric_slope(params: &ProblemParams<f64>, cfg: &SolverConfig) -> Result<f64> {
    if params.require_solvable().is_err() {
        return Err(Error::NoSolution(format!(
            "lambda = {} is not below pi^2; only the trivial solution exists",
            params.lambda()
        )));
    }
    let maps = cfg.maps();
    let (lam, p, h) = (params.lambda(), params.p(), params.h());
    let target = (1.0 - h) / 2.0;
    let q = p + 1.0;
    if lam < 0.0 {
        let u0 = negative_amplitude(&maps, lam, p, h, target)?;
        Ok((lam * u0 * u0 + 2.0 * u0.powf(q) / q).sqrt())
    } else if lam == 0.0 {
        let t1 = maps.time_n_full(0.0, p, 1.0)?;
        let u0 = (t1 / target).powf(2.0 / (p - 1.0));
        Ok((2.0 * u0.powf(q) / q).sqrt())
    } else {
        let theta = h * lam.sqrt() / 2.0;
        let u_l = positive_gate_amplitude(&maps, lam, p, theta, target)?;
        let sec = 1.0 / theta.cos();
        Ok((lam * u_l * u_l * sec * sec + 2.0 * u_l.powf(q) / q).sqrt())
    }
}

/// `‖u‖∞` of the symmetric solution from the time maps alone: `u0` for
/// `λ ≤ 0`, where the maximum sits in the nonlinear intervals, and the
/// window amplitude `u_l secθ` for `λ > 0`, where it sits at `x = 1/2`.
pub fn symmetric_amplitude(params: &ProblemParams<f64>, cfg: &SolverConfig) -> Result<f64> {
    let v0 = symmetric_slope(params, cfg)?;
    let (lam, p, h) = (params.lambda(), params.p(), params.h());
    let q = p + 1.0;
    if lam <= 0.0 {
        // Turning point of the nonlinear orbit with energy v0²/2.
        let e = 0.5 * v0 * v0;
        let f = |u: f64| Ok(lam * u * u / 2.0 + u.powf(q) / q - e);
        let mut hi = (q * e).powf(1.0 / q).max(1.0);
        while f(hi)? < 0.0 {
            hi *= 2.0;
        }
        brent(
            f,
            0.0,
            hi,
            &RootConfig {
                x_tol: 1e-15 * hi,
                ..RootConfig::default()
            },
        )
    } else {
        let theta = h * lam.sqrt() / 2.0;
        let u_l = positive_gate_amplitude(&cfg.maps(), lam, p, theta, (1.0 - h) / 2.0)?;
        Ok(u_l / theta.cos())
    }
}

/// Interface amplitude `u_l < u0` on the nonlinear orbit through `(u0, 0)`
/// that the hyperbolic window connects to its mirror image in time `h`.
fn gate_amplitude(lam: f64, p: f64, c: f64, u0: f64) -> Result<f64> {
    let q = p + 1.0;
    let energy = lam * u0 * u0 / 2.0 + u0.powf(q) / q;
    let f = |u: f64| Ok(lam * u * u / (2.0 * c * c) + u.powf(q) / q - energy);
    brent(
        f,
        0.0,
        u0,
        &RootConfig {
            x_tol: 1e-15 * u0,
            ..RootConfig::default()
        },
    )
}

fn negative_amplitude(maps: &TimeMaps<f64>, lam: f64, p: f64, h: f64, target: f64) -> Result<f64> {
    let u_ho = homoclinic_crossing(lam, p)?;
    let c = linear_gate_ratio(lam, h)?;
    let f = |u0: f64| -> Result<f64> {
        let u_l = gate_amplitude(lam, p, c, u0)?;
        Ok(maps.time_n_full(lam, p, u0)? + maps.time_n_partial(lam, p, u0, u_l)? - target)
    };
    let lo = u_ho * (1.0 + 1e-12);
    if f(lo)? <= 0.0 {
        return domain(format!(
            "time map at the homoclinic level is already below (1-h)/2 for lambda = {lam}"
        ));
    }
    let mut hi = 2.0 * u_ho;
    let mut fhi = f(hi)?;
    while fhi > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::RootFinding(
                "symmetric amplitude exceeds the overflow guard 1e12".into(),
            ));
        }
        fhi = f(hi)?;
    }
    brent(
        f,
        lo,
        hi,
        &RootConfig {
            x_tol: 1e-14 * hi,
            ..RootConfig::default()
        },
    )
}

fn positive_gate_amplitude(
    maps: &TimeMaps<f64>,
    lam: f64,
    p: f64,
    theta: f64,
    target: f64,
) -> Result<f64> {
    // Decreasing in u_l from (π/√λ − h)/2 at 0 to 0 at infinity; bracket in
    // log u_l.
    let f = |t: f64| Ok(maps.time_n_rotated(lam, p, t.exp(), theta)? - target);
    let mut lo = -20.0_f64;
    while f(lo)? <= 0.0 {
        lo -= 20.0;
        if lo < -600.0 {
            return Err(Error::RootFinding(
                "symmetric amplitude below the representable range".into(),
            ));
        }
    }
    let mut hi = 0.0_f64;
    while f(hi)? > 0.0 {
        hi += 5.0;
        if hi > 12.0 * std::f64::consts::LN_10 {
            return Err(Error::RootFinding(
                "symmetric amplitude exceeds the overflow guard 1e12".into(),
            ));
        }
    }
    let t = brent(
        f,
        lo,
        hi,
        &RootConfig {
            x_tol: 1e-15,
            ..RootConfig::default()
        },
    )?;
    Ok(t.exp())
}
