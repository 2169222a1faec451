//! Asymmetric solutions for `π²/4 < λ < π²` whose maximum `R` sits inside
//! the window.
//!
//! Across the window the phase point rotates rigidly on the circle of
//! radius `R` (in `(u, v/√λ)`), entering at angle `−θ₀` and leaving at `θ₁`.
//! Each outer arc then takes the time `φ(R, θᵢ)/(2√λ)` to reach `u = 0`, so
//! a solution needs
//!
//! ```text
//! θ₀ + θ₁ = h√λ,   φ(R, θ₀) = φ(R, θ₁) = (1 − h)√λ.
//! ```
//!
//! Climbing the landscape from `(θ_m, θ̄)` to the peak along equal levels
//! turns this into one equation `g(s) = √λ` in the climbing parameter.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::model::{PhaseState, PositiveSolution, ProblemParams};
use crate::roots::{brent, RootConfig};
use crate::shooting::{nonlinear_flow, shoot, shoot_terminal, Direction};

use super::{landscape, verify, SolverConfig};

/// A root of the matching system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingSolution {
    pub theta0: f64,
    pub theta1: f64,
    pub h: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// Climbing parameter in `(0, 1)`.
    pub s_hat: f64,
    /// `max(|θ₀ + θ₁ − h√λ|, |φ(R, θ₀) − (1−h)√λ|, |φ(R, θ₁) − (1−h)√λ|)`.
    pub matching_residual: f64,
    /// `|u(1)|` of the reconstructed shot, once [`matching_to_solution`] ran.
    pub shoot_residual: Option<f64>,
    /// The `ε` the landscape was finally built with.
    pub epsilon: f64,
}

impl MatchingSolution {
    /// The mirror solution `(θ₀, θ₁) → (θ₁, θ₀)`.
    pub fn swapped(&self) -> Self {
        Self {
            theta0: self.theta1,
            theta1: self.theta0,
            shoot_residual: None,
            ..*self
        }
    }

    /// Residuals of the two matching equations, recomputed from scratch.
    pub fn residuals(&self, lambda: f64, p: f64) -> Result<(f64, f64)> {
        let sl = lambda.sqrt();
        let sum = (self.theta0 + self.theta1 - self.h * sl).abs();
        let target = (1.0 - self.h) * sl;
        let maps = SolverConfig::default().maps();
        let e0 = (maps.phi(self.r, self.theta0, lambda, p)? - target).abs();
        let e1 = (maps.phi(self.r, self.theta1, lambda, p)? - target).abs();
        Ok((sum, e0.max(e1)))
    }
}

/// Solves the matching system at amplitude `R`, starting the landscape at
/// `ε` and adapting it if the monotone middle check fails.
pub fn solve_matching(lambda: f64, p: f64, r: f64, epsilon: f64) -> Result<MatchingSolution> {
    solve_matching_with(lambda, p, r, epsilon, &SolverConfig::default())
}

pub fn solve_matching_with(
    lambda: f64,
    p: f64,
    r: f64,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<MatchingSolution> {
    if !(lambda > PI * PI / 4.0 && lambda < PI * PI) {
        return domain(format!(
            "matching needs pi^2/4 < lambda < pi^2, got {lambda}"
        ));
    }
    let maps = cfg.maps();
    let l = landscape::adaptive(&maps, r, lambda, p, epsilon)?;
    let target = lambda.sqrt();
    let level = |s: f64| l.phi_m + s * (l.phi_peak - l.phi_m);
    let g = |s: f64| -> Result<f64> {
        let (a, b) = landscape::climb(&maps, &l, level(s), lambda, p)?;
        Ok(a + b + level(s) - target)
    };
    let g0 = l.theta_m + l.theta_bar + l.phi_m - target;
    let g1 = 2.0 * l.theta_peak + l.phi_peak - target;
    if !(g0 < 0.0 && g1 > 0.0) {
        return Err(Error::MatchingBracket {
            g_start: g0 + target,
            g_end: g1 + target,
            target,
        });
    }
    let s_hat = brent(
        g,
        0.0,
        1.0,
        &RootConfig {
            x_tol: 1e-15,
            f_tol: 1e-12,
            max_iter: 300,
        },
    )?;
    let lev = level(s_hat);
    let (theta0, theta1) = landscape::climb(&maps, &l, lev, lambda, p)?;
    let h = 1.0 - lev / target;
    let mut m = MatchingSolution {
        theta0,
        theta1,
        h,
        r,
        s_hat,
        matching_residual: 0.0,
        shoot_residual: None,
        epsilon: l.epsilon,
    };
    let (e_sum, e_phi) = m.residuals(lambda, p)?;
    m.matching_residual = e_sum.max(e_phi);
    if !(m.matching_residual < 1e-9) {
        return Err(Error::Verification {
            what: "matching residual",
            value: m.matching_residual,
            threshold: 1e-9,
        });
    }
    Ok(m)
}

/// Rebuilds the solution: the state `(R cos θ₀, √λ R sin θ₀)` at the left
/// interface is flowed back to `x = 0` for `v0`, polished by a few secant
/// steps on `u(1)`, then shot forward and
/// checked (`|u(1)| < 1e−6`, maximum inside the window, `‖u‖∞` within 0.1%
/// of `R`).
pub fn matching_to_solution(
    m: &MatchingSolution,
    lambda: f64,
    p: f64,
) -> Result<PositiveSolution<f64>> {
    matching_to_solution_with(m, lambda, p, &SolverConfig::default())
}

pub fn matching_to_solution_with(
    m: &MatchingSolution,
    lambda: f64,
    p: f64,
    cfg: &SolverConfig,
) -> Result<PositiveSolution<f64>> {
    let params = ProblemParams::new(lambda, p, m.h)?;
    let left = params.left_interface();
    let (sn, c) = m.theta0.sin_cos();
    let start = PhaseState::new(left, m.r * c, lambda.sqrt() * m.r * sn);
    let back = nonlinear_flow(
        start,
        left,
        lambda,
        p,
        &cfg.flow.terminal_only(),
        Direction::Backward,
    )?;
    let v0 = polish(back.end.v, &params, cfg)?;
    let shot = shoot(v0, &params, &cfg.flow)?;
    let sol = shot.candidate;
    if !shot.positive {
        return Err(Error::Verification {
            what: "first interior zero of the reconstructed shot",
            value: shot.first_zero.unwrap_or(f64::NAN),
            threshold: 1.0,
        });
    }
    if !(sol.shoot_residual < 1e-6) {
        return Err(Error::Verification {
            what: "shoot residual of the reconstructed solution",
            value: sol.shoot_residual,
            threshold: 1e-6,
        });
    }
    if !(sol.x_max >= left && sol.x_max <= params.right_interface()) {
        return Err(Error::Verification {
            what: "maximum location outside the window",
            value: sol.x_max,
            threshold: left,
        });
    }
    let amp = (sol.r_max - m.r).abs() / m.r;
    if !(amp < 1e-3) {
        return Err(Error::Verification {
            what: "relative amplitude mismatch with R",
            value: amp,
            threshold: 1e-3,
        });
    }
    verify(&sol)?;
    Ok(sol)
}

/// A few secant steps on `u(1)` from the reconstructed slope. At large `R`
/// the slope is of order `R^{(p+1)/2}`, so the backward flow alone leaves
/// `|u(1)|` at the level of `v0` times the integrator tolerance.
fn polish(v0: f64, params: &ProblemParams<f64>, cfg: &SolverConfig) -> Result<f64> {
    let flow = cfg.flow.terminal_only();
    let res = |v: f64| -> Result<f64> { Ok(shoot_terminal(v, params, &flow)?.0.u) };
    let (mut a, mut fa) = (v0, res(v0)?);
    let (mut b, mut fb) = (v0 * (1.0 + 1e-9), res(v0 * (1.0 + 1e-9))?);
    let (mut best, mut f_best) = if fb.abs() < fa.abs() {
        (b, fb)
    } else {
        (a, fa)
    };
    for _ in 0..8 {
        if fb == fa || f_best == 0.0 {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        // Stay close to the constructed slope.
        if !(c > 0.0) || (c - v0).abs() > 1e-4 * v0 {
            break;
        }
        let fc = res(c)?;
        if fc.abs() < f_best.abs() {
            best = c;
            f_best = fc;
        }
        (a, fa, b, fb) = (b, fb, c, fc);
    }
    Ok(best)
}
