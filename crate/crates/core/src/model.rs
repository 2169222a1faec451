//! Problem definition: parameters, the piecewise-constant weight, energies,
//! and the trajectory/solution containers every other module passes around.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{snap_unit, Scalar};

/// The triple `(λ, p, h)` identifying one instance of the problem
/// `−u'' = λu + a_h(x)uᵖ`, `u(0) = u(1) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams<T> {
    lambda: T,
    p: T,
    h: T,
}

impl<T: Scalar> ProblemParams<T> {
    /// Validates `p > 1` and `0 < h < 1`. Any finite `λ` is accepted here;
    /// solvers additionally call [`ProblemParams::require_solvable`].
    pub fn new(lambda: T, p: T, h: T) -> Result<Self> {
        if !lambda.is_finite() {
            return domain(format!("lambda must be finite, got {lambda}"));
        }
        if !(p > T::one()) || !p.is_finite() {
            return domain(format!("exponent p must satisfy p > 1, got {p}"));
        }
        if !(h > T::zero() && h < T::one()) {
            return domain(format!("window width h must lie in (0, 1), got {h}"));
        }
        Ok(Self { lambda, p, h })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::new(lambda, self.p, self.h)
    }

    pub fn with_h(&self, h: T) -> Result<Self> {
        Self::new(self.lambda, self.p, h)
    }

    /// Positive solutions exist only for `λ < π²`.
    pub fn require_solvable(&self) -> Result<()> {
        let pi2 = T::PI() * T::PI();
        if self.lambda < pi2 {
            Ok(())
        } else {
            domain(format!(
                "lambda = {} must be below pi^2 = {} for a positive solution",
                self.lambda, pi2
            ))
        }
    }

    /// Left interface `(1 − h)/2`, snapped so that the right interface is
    /// its exact mirror image.
    pub fn left_interface(&self) -> T {
        snap_unit((T::one() - self.h) / T::lit(2.0))
    }

    /// Right interface `(1 + h)/2 = 1 − left_interface()` exactly.
    pub fn right_interface(&self) -> T {
        T::one() - self.left_interface()
    }

    /// Width of each nonlinear interval.
    pub fn outer_width(&self) -> T {
        self.left_interface()
    }

    /// Width of the linear window between the interfaces.
    pub fn window_width(&self) -> T {
        self.right_interface() - self.left_interface()
    }
}

/// The Moore–Nehari weight `a_h`: 1 on `[0,(1−h)/2] ∪ [(1+h)/2,1]`, 0 on the
/// open window between. Interface points belong to the closed outer intervals.
pub fn weight<T: Scalar>(x: T, params: &ProblemParams<T>) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return domain(format!("weight evaluated outside [0, 1] at x = {x}"));
    }
    if x <= params.left_interface() || x >= params.right_interface() {
        Ok(T::one())
    } else {
        Ok(T::zero())
    }
}

/// Which autonomous system governs an arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `u' = v, v' = −λu − uᵖ` (weight 1).
    Nonlinear,
    /// `u' = v, v' = −λu` (weight 0).
    Linear,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Nonlinear => "nonlinear",
            Regime::Linear => "linear",
        }
    }

    pub fn weight<T: Scalar>(self) -> T {
        match self {
            Regime::Nonlinear => T::one(),
            Regime::Linear => T::zero(),
        }
    }
}

/// A point `(x, u, u')` on a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState<T> {
    pub x: T,
    pub u: T,
    pub v: T,
}

impl<T: Scalar> PhaseState<T> {
    pub fn new(x: T, u: T, v: T) -> Self {
        Self { x, u, v }
    }
}

/// `½v² + (λ/2)u² + u^{p+1}/(p+1)`, conserved along nonlinear arcs.
pub fn energy_nonlinear<T: Scalar>(u: T, v: T, params: &ProblemParams<T>) -> T {
    energy_nonlinear_raw(u, v, params.lambda(), params.p())
}

pub(crate) fn energy_nonlinear_raw<T: Scalar>(u: T, v: T, lambda: T, p: T) -> T {
    let half = T::lit(0.5);
    let q = p + T::one();
    half * v * v + half * lambda * u * u + u.abs().powf(q) / q
}

/// `½v² + (λ/2)u²`, conserved along linear arcs.
pub fn energy_linear<T: Scalar>(u: T, v: T, lambda: T) -> T {
    let half = T::lit(0.5);
    half * v * v + half * lambda * u * u
}

/// An energy value tagged with the system it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue<T> {
    pub value: T,
    pub regime: Regime,
}

impl<T: Scalar> EnergyValue<T> {
    pub fn of(regime: Regime, state: &PhaseState<T>, lambda: T, p: T) -> Self {
        let value = match regime {
            Regime::Nonlinear => energy_nonlinear_raw(state.u, state.v, lambda, p),
            Regime::Linear => energy_linear(state.u, state.v, lambda),
        };
        Self { value, regime }
    }

    /// Sum of the magnitudes of the individual terms, the scale against
    /// which drift is measured (the energy itself may vanish).
    pub fn scale(regime: Regime, state: &PhaseState<T>, lambda: T, p: T) -> T {
        let half = T::lit(0.5);
        let q = p + T::one();
        let mut s = half * state.v * state.v + half * lambda.abs() * state.u * state.u;
        if regime == Regime::Nonlinear {
            s = s + state.u.abs().powf(q) / q;
        }
        s
    }
}

/// The right-hand side `v' = −λu − a·|u|^{p−1}u` (odd extension below zero).
#[inline]
pub(crate) fn acceleration<T: Scalar>(u: T, lambda: T, p: T, regime: Regime) -> T {
    match regime {
        Regime::Nonlinear => -lambda * u - u.abs().powf(p - T::one()) * u,
        Regime::Linear => -lambda * u,
    }
}

/// One of the three pieces of a trajectory, governed by a single regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryArc<T> {
    pub regime: Regime,
    pub x_start: T,
    pub x_end: T,
    pub samples: Vec<PhaseState<T>>,
}

impl<T: Scalar> TrajectoryArc<T> {
    /// Checks ordering of the samples and that they span `[x_start, x_end]`.
    pub fn new(regime: Regime, samples: Vec<PhaseState<T>>) -> Result<Self> {
        if samples.len() < 2 {
            return domain("an arc needs at least two samples");
        }
        if samples.windows(2).any(|w| !(w[1].x > w[0].x)) {
            return domain("arc samples must be strictly increasing in x");
        }
        let x_start = samples[0].x;
        let x_end = samples[samples.len() - 1].x;
        Ok(Self {
            regime,
            x_start,
            x_end,
            samples,
        })
    }

    pub fn first(&self) -> &PhaseState<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &PhaseState<T> {
        &self.samples[self.samples.len() - 1]
    }

    /// Largest relative deviation of the regime energy from its value at
    /// the first sample.
    pub fn energy_drift(&self, lambda: T, p: T) -> T {
        let first = self.first();
        let e0 = EnergyValue::of(self.regime, first, lambda, p).value;
        let scale = EnergyValue::scale(self.regime, first, lambda, p).max(T::min_positive_value());
        self.samples
            .iter()
            .map(|s| (EnergyValue::of(self.regime, s, lambda, p).value - e0).abs() / scale)
            .fold(T::zero(), T::max)
    }

    /// Quintic Hermite interpolation of `(u, v)` using `u'' = −λu − a uᵖ`
    /// at the bracketing samples. `x` must lie within the arc.
    pub fn interpolate(&self, x: T, lambda: T, p: T) -> PhaseState<T> {
        let s = &self.samples;
        let idx = match s.binary_search_by(|q| q.x.partial_cmp(&x).expect("finite abscissa")) {
            Ok(i) => return s[i],
            Err(i) => i.clamp(1, s.len() - 1),
        };
        let (a, b) = (&s[idx - 1], &s[idx]);
        let h = b.x - a.x;
        let t = (x - a.x) / h;
        let acc_a = acceleration(a.u, lambda, p, self.regime);
        let acc_b = acceleration(b.u, lambda, p, self.regime);
        let (u, du) = quintic_hermite(t, h, [a.u, a.v, acc_a], [b.u, b.v, acc_b]);
        PhaseState::new(x, u, du)
    }
}

/// Quintic Hermite on `[0, 1]` scaled by `h`; returns value and derivative.
fn quintic_hermite<T: Scalar>(t: T, h: T, left: [T; 3], right: [T; 3]) -> (T, T) {
    let c = |x: f64| T::lit(x);
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h00 = T::one() - c(10.0) * t3 + c(15.0) * t4 - c(6.0) * t5;
    let h10 = t - c(6.0) * t3 + c(8.0) * t4 - c(3.0) * t5;
    let h20 = c(0.5) * t2 - c(1.5) * t3 + c(1.5) * t4 - c(0.5) * t5;
    let h01 = c(10.0) * t3 - c(15.0) * t4 + c(6.0) * t5;
    let h11 = -c(4.0) * t3 + c(7.0) * t4 - c(3.0) * t5;
    let h21 = c(0.5) * t3 - t4 + c(0.5) * t5;
    let d00 = -c(30.0) * t2 + c(60.0) * t3 - c(30.0) * t4;
    let d10 = T::one() - c(18.0) * t2 + c(32.0) * t3 - c(15.0) * t4;
    let d20 = t - c(4.5) * t2 + c(6.0) * t3 - c(2.5) * t4;
    let d01 = c(30.0) * t2 - c(60.0) * t3 + c(30.0) * t4;
    let d11 = -c(12.0) * t2 + c(28.0) * t3 - c(15.0) * t4;
    let d21 = c(1.5) * t2 - c(4.0) * t3 + c(2.5) * t4;
    let value = h00 * left[0]
        + h * h10 * left[1]
        + h * h * h20 * left[2]
        + h01 * right[0]
        + h * h11 * right[1]
        + h * h * h21 * right[2];
    let deriv = (d00 * left[0] + d01 * right[0]) / h
        + d10 * left[1]
        + d11 * right[1]
        + h * (d20 * left[2] + d21 * right[2]);
    (value, deriv)
}

/// Symmetry class of a positive solution with respect to `x ↦ 1 − x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    /// Maximum attained left of the midpoint.
    AsymmetricLeft,
    /// Maximum attained right of the midpoint.
    AsymmetricRight,
}

impl Symmetry {
    pub fn as_str(self) -> &'static str {
        match self {
            Symmetry::Symmetric => "symmetric",
            Symmetry::AsymmetricLeft => "asymmetric_left",
            Symmetry::AsymmetricRight => "asymmetric_right",
        }
    }

    pub fn reflected(self) -> Self {
        match self {
            Symmetry::Symmetric => Symmetry::Symmetric,
            Symmetry::AsymmetricLeft => Symmetry::AsymmetricRight,
            Symmetry::AsymmetricRight => Symmetry::AsymmetricLeft,
        }
    }

    pub fn is_symmetric(self) -> bool {
        self == Symmetry::Symmetric
    }
}

/// A verified positive solution: three arcs plus the diagnostics that
/// certify it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveSolution<T> {
    pub params: ProblemParams<T>,
    /// `u'(0) > 0`.
    pub v0: T,
    /// Nonlinear, linear, nonlinear.
    pub arcs: [TrajectoryArc<T>; 3],
    /// `‖u‖∞`.
    pub r_max: T,
    /// A maximiser of `u`.
    pub x_max: T,
    pub symmetry: Symmetry,
    /// `|u(1)|`.
    pub shoot_residual: T,
    /// `sup |u − 𝒦(λu + a uᵖ)|` on the sample grid.
    pub fixed_point_residual: T,
}

impl<T: Scalar> PositiveSolution<T> {
    /// Evaluates `(u, u')` at `x ∈ [0, 1]`; interface points resolve to the
    /// left arc.
    pub fn eval(&self, x: T) -> PhaseState<T> {
        let (lam, p) = (self.params.lambda(), self.params.p());
        let arc = self
            .arcs
            .iter()
            .find(|a| x <= a.x_end)
            .unwrap_or(&self.arcs[2]);
        let x = x.max(arc.x_start).min(arc.x_end);
        arc.interpolate(x, lam, p)
    }

    pub fn terminal(&self) -> &PhaseState<T> {
        self.arcs[2].last()
    }

    /// All samples in order; interface states appear twice (once per arc).
    pub fn samples(&self) -> impl Iterator<Item = (Regime, &PhaseState<T>)> {
        self.arcs
            .iter()
            .flat_map(|a| a.samples.iter().map(move |s| (a.regime, s)))
    }

    /// `sup_x |u(x) − u(1 − x)|` over the stored abscissas.
    pub fn symmetry_defect(&self) -> T {
        self.samples()
            .map(|(_, s)| (s.u - self.eval(T::one() - s.x).u).abs())
            .fold(T::zero(), T::max)
    }

    /// Largest per-arc relative energy drift.
    pub fn energy_drift(&self) -> T {
        let (lam, p) = (self.params.lambda(), self.params.p());
        self.arcs
            .iter()
            .map(|a| a.energy_drift(lam, p))
            .fold(T::zero(), T::max)
    }

    /// Smallest `u` over samples strictly inside `(0, 1)`.
    pub fn interior_min(&self) -> T {
        self.samples()
            .filter(|(_, s)| s.x > T::zero() && s.x < T::one())
            .map(|(_, s)| s.u)
            .fold(T::infinity(), T::min)
    }

    pub fn terminal_slope(&self) -> T {
        self.terminal().v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(lambda: f64, p: f64, h: f64) -> ProblemParams<f64> {
        ProblemParams::new(lambda, p, h).unwrap()
    }

    #[test]
    fn weight_examples() {
        let pp = params(0.0, 3.0, 0.5);
        assert_eq!(weight(0.5, &pp).unwrap(), 0.0);
        assert_eq!(weight(0.25, &pp).unwrap(), 1.0);
        assert_eq!(weight(0.75, &pp).unwrap(), 1.0);
        assert_eq!(weight(0.0, &pp).unwrap(), 1.0);
        assert_eq!(weight(1.0, &pp).unwrap(), 1.0);
        assert!(weight(1.5, &pp).is_err());
        assert!(weight(-0.1, &pp).is_err());
        assert!(weight(f64::NAN, &pp).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(ProblemParams::new(0.0, 1.0, 0.5).is_err());
        assert!(ProblemParams::new(0.0, 3.0, 0.0).is_err());
        assert!(ProblemParams::new(0.0, 3.0, 1.0).is_err());
        assert!(ProblemParams::new(f64::INFINITY, 3.0, 0.5).is_err());
        let pi2 = std::f64::consts::PI.powi(2);
        // accepted by the type, rejected by solvers
        let at = params(pi2, 3.0, 0.5);
        assert!(at.require_solvable().is_err());
        assert!(params(pi2 - 1e-9, 3.0, 0.5).require_solvable().is_ok());
    }

    #[test]
    fn interfaces_mirror_exactly() {
        for &h in &[0.1, 0.2, 0.3, 0.5, 0.7, 0.999] {
            let pp = params(0.0, 3.0, h);
            assert_eq!(pp.left_interface() + pp.right_interface(), 1.0);
            assert!((pp.left_interface() - (1.0 - h) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy_nonlinear(0.0, 0.0, &params(-2.0, 3.0, 0.5)), 0.0);
        let e = energy_nonlinear(1.0, 1.0, &params(-2.0, 3.0, 0.5));
        assert!((e + 0.25).abs() < 1e-15);
        assert_eq!(energy_linear(0.0, 0.0, -1.0), 0.0);
        assert_eq!(energy_linear(3.0, 4.0, 1.0), 12.5);
        // W^u lies in the zero level set of the linear energy
        let lam = -3.7_f64;
        assert!(energy_linear(1.0, (-lam).sqrt(), lam).abs() < 1e-12);
        // homoclinic crossing is on the zero nonlinear level
        let (lam, p) = (-2.0_f64, 3.0_f64);
        let u_ho = (-lam * (p + 1.0) / 2.0).powf(1.0 / (p - 1.0));
        assert!(energy_nonlinear(u_ho, 0.0, &params(lam, p, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn quintic_hermite_reproduces_quintics() {
        let f =
            |x: f64| 1.0 + 2.0 * x - x * x + 0.5 * x.powi(3) - 0.25 * x.powi(4) + 0.1 * x.powi(5);
        let df = |x: f64| 2.0 - 2.0 * x + 1.5 * x * x - x.powi(3) + 0.5 * x.powi(4);
        let d2f = |x: f64| -2.0 + 3.0 * x - 3.0 * x * x + 2.0 * x.powi(3);
        let (a, b) = (0.3, 0.8);
        let h = b - a;
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let x = a + t * h;
            let (u, du) = quintic_hermite(t, h, [f(a), df(a), d2f(a)], [f(b), df(b), d2f(b)]);
            assert!((u - f(x)).abs() < 1e-13, "{u} vs {}", f(x));
            assert!((du - df(x)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn weight_is_symmetric(x in 0.0f64..=1.0, h in 0.01f64..0.99) {
            let pp = params(0.0, 3.0, h);
            prop_assert_eq!(weight(x, &pp).unwrap(), weight(1.0 - x, &pp).unwrap());
        }

        #[test]
        fn energies_differ_by_potential(u in 0.0f64..50.0, v in -50.0f64..50.0,
                                        lam in -30.0f64..9.0, p in 1.01f64..6.0) {
            let pp = params(lam, p, 0.5);
            let diff = energy_nonlinear(u, v, &pp) - energy_linear(u, v, lam);
            let expected = u.powf(p + 1.0) / (p + 1.0);
            prop_assert!((diff - expected).abs() <= 1e-12 * expected.abs().max(1.0) * 10.0);
        }
    }
}
