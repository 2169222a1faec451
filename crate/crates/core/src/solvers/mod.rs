//! Construction of positive solutions.
//!
//! * [`solve_symmetric`]: the unique symmetric solution from the time maps.
//! * [`find_all_positive`]: every positive solution a shooting scan can
//!   bracket, classified and paired with its mirror image.
//! * [`phi_landscape`], [`climb_pair`], [`solve_matching`],
//!   [`matching_to_solution`]: asymmetric solutions for `π²/4 < λ < π²`
//!   whose maximum lies in the linear window.

mod landscape;
mod matching;
mod scan;
mod symmetric;

use crate::error::{Error, Result};
use crate::model::{PhaseState, PositiveSolution, TrajectoryArc};
use crate::quadrature::QuadratureConfig;
use crate::shooting::FlowConfig;
use crate::timemaps::TimeMaps;

pub use landscape::{
    climb_pair, phi_landscape, phi_landscape_adaptive, phi_landscape_adaptive_with, PhiLandscape,
};
pub use matching::{
    matching_to_solution, matching_to_solution_with, solve_matching, solve_matching_with,
    MatchingSolution,
};
pub use scan::{count_by_symmetry, find_all_positive, find_all_positive_with, ScanConfig};
pub use symmetric::{solve_symmetric, solve_symmetric_with, symmetric_amplitude, symmetric_slope};

/// Acceptance threshold on `|u(1)|`, relative to `max(1, ‖u‖∞)`.
pub const SHOOT_TOL: f64 = 1e-7;
/// Acceptance threshold on the fixed-point defect, relative to `max(1, ‖u‖∞)`.
pub const FIXED_POINT_TOL: f64 = 1e-6;

/// Tolerances shared by the solvers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolverConfig {
    pub quad: QuadratureConfig<f64>,
    pub flow: FlowConfig<f64>,
}

/// Integrator tolerance of [`SolverConfig::tightened`].
pub const TIGHT_RK_TOL: f64 = 1e-13;

impl SolverConfig {
    pub(crate) fn maps(&self) -> TimeMaps<f64> {
        TimeMaps::new(self.quad)
    }

    /// Same settings with the integrator tolerance lowered to
    /// [`TIGHT_RK_TOL`]. Used as a retry where the linear window is strongly
    /// hyperbolic (`λ ≪ 0`) and amplifies the integration error.
    pub fn tightened(&self) -> Self {
        Self {
            flow: FlowConfig {
                rk_abs_tol: self.flow.rk_abs_tol.min(TIGHT_RK_TOL),
                rk_rel_tol: self.flow.rk_rel_tol.min(TIGHT_RK_TOL),
                ..self.flow
            },
            ..*self
        }
    }
}

/// `max(1, ‖u‖∞)`: residual thresholds grow with the amplitude because the
/// integrator's error does.
pub fn residual_scale(r_max: f64) -> f64 {
    r_max.max(1.0)
}

/// Checks both residuals and positivity against the default thresholds.
pub fn verify(sol: &PositiveSolution<f64>) -> Result<()> {
    let scale = residual_scale(sol.r_max);
    if !(sol.v0 > 0.0) {
        return Err(Error::Verification {
            what: "initial slope",
            value: sol.v0,
            threshold: 0.0,
        });
    }
    if !(sol.interior_min() > 0.0) {
        return Err(Error::Verification {
            what: "interior minimum (must be positive)",
            value: sol.interior_min(),
            threshold: 0.0,
        });
    }
    if !(sol.shoot_residual < SHOOT_TOL * scale) {
        return Err(Error::Verification {
            what: "shoot residual",
            value: sol.shoot_residual,
            threshold: SHOOT_TOL * scale,
        });
    }
    if !(sol.fixed_point_residual < FIXED_POINT_TOL * scale) {
        return Err(Error::Verification {
            what: "fixed-point residual",
            value: sol.fixed_point_residual,
            threshold: FIXED_POINT_TOL * scale,
        });
    }
    Ok(())
}

/// The mirror image `x ↦ 1 − x`. Residuals carry over unchanged: the
/// boundary defect of the image sits at `x = 0` instead of `x = 1`.
pub fn reflect(sol: &PositiveSolution<f64>) -> PositiveSolution<f64> {
    let mirror = |arc: &TrajectoryArc<f64>| {
        let samples: Vec<PhaseState<f64>> = arc
            .samples
            .iter()
            .rev()
            .map(|s| PhaseState::new(1.0 - s.x, s.u, -s.v))
            .collect();
        TrajectoryArc {
            regime: arc.regime,
            x_start: 1.0 - arc.x_end,
            x_end: 1.0 - arc.x_start,
            samples,
        }
    };
    PositiveSolution {
        params: sol.params,
        v0: -sol.terminal().v,
        arcs: [
            mirror(&sol.arcs[2]),
            mirror(&sol.arcs[1]),
            mirror(&sol.arcs[0]),
        ],
        r_max: sol.r_max,
        x_max: 1.0 - sol.x_max,
        symmetry: sol.symmetry.reflected(),
        shoot_residual: sol.shoot_residual,
        fixed_point_residual: sol.fixed_point_residual,
    }
}
