//! Positive solutions of `−u'' = λu + a_h(x)uᵖ`, `u(0) = u(1) = 0`, where the
//! weight `a_h` vanishes on a central window of width `h` and equals one
//! outside it.
//!
//! The crate builds solutions two independent ways and checks one against
//! the other:
//!
//! * time maps: singular integrals giving the time of flight along level
//!   sets of the two autonomous systems, solved for amplitudes
//!   ([`timemaps`], [`solvers`]);
//! * shooting: adaptive Runge–Kutta through the nonlinear pieces and exact
//!   propagators through the window, scanned over the initial slope
//!   ([`shooting`]).
//!
//! Every solution is finally checked against the Green-operator fixed point
//! `u = 𝒦(λu + a uᵖ)`.
//!
//! The numerical kernels are generic over [`Scalar`] (`f32`, `f64`); the
//! solver and continuation layers are `f64`. The aliases below name the
//! `f64` instantiations.

// `!(x > 0.0)` style guards reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod error;
pub mod export;
pub mod model;
mod ode;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod shooting;
pub mod solvers;
pub mod timemaps;

pub use error::{Error, Result};
pub use model::{
    energy_linear, energy_nonlinear, weight, EnergyValue, PhaseState, PositiveSolution,
    ProblemParams, Regime, Symmetry, TrajectoryArc,
};
pub use quadrature::{beta_integral, integrate_endpoint_singular, QuadratureConfig};
pub use scalar::Scalar;
pub use shooting::FlowConfig;

pub type Params = ProblemParams<f64>;
pub type State = PhaseState<f64>;
pub type Arc = TrajectoryArc<f64>;
pub type Solution = PositiveSolution<f64>;
pub type Energy = EnergyValue<f64>;
pub type QuadConfig = QuadratureConfig<f64>;
pub type Flow = FlowConfig<f64>;
