//! Time-of-flight maps of the nonlinear system `u' = v, v' = −λu − uᵖ` and
//! the linear system `u' = v, v' = −λu`, the rescaled map `φ(R, θ)` used
//! for `λ > 0`, and the closed-form constants of the linear window.
//!
//! All maps take `(λ, p)` explicitly. The free functions use the default
//! [`QuadratureConfig`]; [`TimeMaps`] carries a custom one.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::{
    integrate_nodes, one_minus_pow, power_arc_integral, Node, QuadratureConfig,
};
use crate::roots::{brent, invert_increasing, RootConfig};
use crate::scalar::Scalar;

/// An amplitude and the flight time it produces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeMapPoint<T> {
    pub u0: T,
    pub time: T,
}

/// One evaluation of `φ(R, θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiValue<T> {
    #[serde(rename = "R")]
    pub r: T,
    pub theta: T,
    pub value: T,
}

/// `u_ho = (−λ(p+1)/2)^{1/(p−1)}`, where the zero-energy homoclinic loop of
/// the nonlinear system crosses the `u`-axis.
pub fn homoclinic_crossing<T: Scalar>(lambda: T, p: T) -> Result<T> {
    check_p(p)?;
    if !(lambda < T::zero()) {
        return domain(format!(
            "homoclinic crossing needs lambda < 0, got {lambda}"
        ));
    }
    Ok((-lambda * (p + T::one()) / T::lit(2.0)).powf((p - T::one()).recip()))
}

/// The positive equilibrium `ω = (−λ)^{1/(p−1)}` of the nonlinear system.
pub fn equilibrium<T: Scalar>(lambda: T, p: T) -> Result<T> {
    check_p(p)?;
    if !(lambda < T::zero()) {
        return domain(format!("equilibrium needs lambda < 0, got {lambda}"));
    }
    Ok((-lambda).powf((p - T::one()).recip()))
}

fn check_p<T: Scalar>(p: T) -> Result<()> {
    if p > T::one() && p.is_finite() {
        Ok(())
    } else {
        domain(format!("exponent p must satisfy p > 1, got {p}"))
    }
}

/// Time maps evaluated with a fixed quadrature configuration.
#[derive(Clone, Copy, Debug)]
pub struct TimeMaps<T> {
    pub quad: QuadratureConfig<T>,
}

impl<T: Scalar> Default for TimeMaps<T> {
    fn default() -> Self {
        Self::new(QuadratureConfig::default())
    }
}

impl<T: Scalar> TimeMaps<T> {
    pub fn new(quad: QuadratureConfig<T>) -> Self {
        Self { quad }
    }

    /// `T_N(λ, u0) = ∫₀¹ ds/√(λ(1−s²) + (2/(p+1))u0^{p−1}(1−s^{p+1}))`, the
    /// time from `(0, v0)` to the turning point `(u0, 0)`.
    pub fn time_n_full(&self, lambda: T, p: T, u0: T) -> Result<T> {
        self.time_n_partial(lambda, p, u0, T::zero())
    }

    /// The same integral from `u_l/u0` to 1: the time from `u = u_l` to the
    /// turning point `u0` along the orbit through `(u0, 0)`.
    pub fn time_n_partial(&self, lambda: T, p: T, u0: T, u_l: T) -> Result<T> {
        check_p(p)?;
        if !(u0 > T::zero()) || !u0.is_finite() {
            return domain(format!("turning amplitude must be positive, got {u0}"));
        }
        if !(u_l >= T::zero() && u_l < u0) {
            return domain(format!("need 0 <= u_l < u0, got u_l = {u_l}, u0 = {u0}"));
        }
        let q = p + T::one();
        let k = T::lit(2.0) * u0.powf(p - T::one()) / q;
        let lam_k = lambda + k;
        let a = u_l / u0;
        if lambda < T::zero() {
            // The orbit must reach u_l before turning: D > 0 on [a, 1).
            let u_ho = homoclinic_crossing(lambda, p)?;
            if a == T::zero() && !(u0 > u_ho) {
                return domain(format!(
                    "u0 = {u0} must exceed the homoclinic crossing {u_ho} for lambda = {lambda}"
                ));
            }
            let d_a = lam_k - lambda * a * a - k * a.powf(q);
            if !(d_a > T::zero()) {
                return domain(format!("orbit through ({u0}, 0) does not reach u = {u_l}"));
            }
        }
        let half = T::lit(0.5);
        let integrand = |n: Node<T>| {
            let s = n.x;
            let d = if lambda < T::zero() && s < half {
                lam_k - lambda * s * s - k * s.powf(q)
            } else {
                lambda * n.to_upper * (T::one() + s) + k * one_minus_pow(s, n.to_upper, q)
            };
            d.sqrt().recip()
        };
        integrate_nodes(integrand, a, T::one(), &self.quad)
    }

    /// `∫₀¹ ds/√(−λs² + (2/(p+1))u_ω^{p−1}(1−s^{p+1}))`: time from the
    /// `v`-axis to the point `(u_ω, √(−λ)u_ω)` of the unstable manifold of
    /// the origin, along the orbit through that point.
    pub fn time_n_from_axis(&self, lambda: T, p: T, u_omega: T) -> Result<T> {
        check_p(p)?;
        if !(lambda < T::zero()) {
            return domain(format!(
                "time from axis to the unstable manifold needs lambda < 0, got {lambda}"
            ));
        }
        if !(u_omega > T::zero()) {
            return domain(format!("u_omega must be positive, got {u_omega}"));
        }
        let q = p + T::one();
        let k = T::lit(2.0) * u_omega.powf(p - T::one()) / q;
        let integrand = |n: Node<T>| {
            let s = n.x;
            (-lambda * s * s + k * one_minus_pow(s, n.to_upper, q))
                .sqrt()
                .recip()
        };
        integrate_nodes(integrand, T::zero(), T::one(), &self.quad)
    }

    /// For a turning amplitude `u₊ > u_ho`, returns the abscissa `u_ω` where
    /// the orbit meets the unstable manifold, together with the time from
    /// there to `(u₊, 0)`.
    pub fn time_n_unstable_to_axis(&self, lambda: T, p: T, u_plus: T) -> Result<(T, T)> {
        let u_ho = homoclinic_crossing(lambda, p)?;
        if !(u_plus > u_ho) {
            return domain(format!(
                "u_plus = {u_plus} must exceed the homoclinic crossing {u_ho}"
            ));
        }
        let q = p + T::one();
        let ratio =
            (q * lambda / T::lit(2.0) * u_plus.powf(T::one() - p) + T::one()).powf(q.recip());
        let u_omega = ratio * u_plus;
        let time = self.time_n_partial(lambda, p, u_plus, u_omega)?;
        Ok((u_omega, time))
    }

    /// `(1/√λ)∫₀¹ ds/√(tan²θ + 1 − s² + (2u_l^{p−1}/(λ(p+1)))(1−s^{p+1}))`
    /// for `λ > 0`: the time from the `v`-axis to the point with abscissa
    /// `u_l` on the ray `v = √λ·tanθ·u`.
    pub fn time_n_rotated(&self, lambda: T, p: T, u_l: T, theta: T) -> Result<T> {
        check_p(p)?;
        if !(lambda > T::zero()) {
            return domain(format!("rotated time map needs lambda > 0, got {lambda}"));
        }
        if !(u_l >= T::zero()) {
            return domain(format!("u_l must be non-negative, got {u_l}"));
        }
        check_theta(theta)?;
        let c = theta.cos();
        let kappa = T::lit(2.0) * u_l.powf(p - T::one()) / (lambda * (p + T::one()));
        Ok(self.rotated_integral(p, theta, kappa * c * c)? / lambda.sqrt())
    }

    /// `∫₀¹ ds/√(sec²θ − s² + κ(1−s^{p+1}))` written as
    /// `cosθ ∫₀¹ ds/√(sin²θ + cos²θ(1−s²) + κcos²θ(1−s^{p+1}))`.
    fn rotated_integral(&self, p: T, theta: T, kappa_c2: T) -> Result<T> {
        let (sn, c) = theta.sin_cos();
        if c <= T::zero() {
            return Ok(T::zero());
        }
        let (s2, c2) = (sn * sn, c * c);
        let q = p + T::one();
        let integrand = |n: Node<T>| {
            let s = n.x;
            let g =
                s2 + c2 * n.to_upper * (T::one() + s) + kappa_c2 * one_minus_pow(s, n.to_upper, q);
            g.sqrt().recip()
        };
        Ok(c * integrate_nodes(integrand, T::zero(), T::one(), &self.quad)?)
    }

    /// The rescaled map
    /// `φ(R, θ) = 2∫₀¹ ds/√(sec²θ − s² + (2R^{p−1}cos^{p−1}θ/(λ(p+1)))(1−s^{p+1}))`,
    /// extended by `φ(R, π/2) = 0`.
    pub fn phi(&self, r: T, theta: T, lambda: T, p: T) -> Result<T> {
        let k = phi_k(r, lambda, p)?;
        check_theta(theta)?;
        if theta >= T::FRAC_PI_2() {
            return Ok(T::zero());
        }
        let c = theta.cos();
        Ok(T::lit(2.0) * self.rotated_integral(p, theta, k * c.powf(p + T::one()))?)
    }

    /// `∂φ/∂θ = sinθ ∫₀¹ G^{−3/2}[(p−1)K cos^{p+1}θ (1−s^{p+1}) − 2] ds` with
    /// `G = sin²θ + cos²θ(1−s²) + K cos^{p+1}θ(1−s^{p+1})` and
    /// `K = 2R^{p−1}/(λ(p+1))`. Refused below `θ = 1e−6`, where the integral
    /// degenerates.
    pub fn phi_dtheta(&self, r: T, theta: T, lambda: T, p: T) -> Result<T> {
        let k = phi_k(r, lambda, p)?;
        check_theta(theta)?;
        if theta < T::lit(1e-6) {
            return domain(format!(
                "phi_dtheta is indeterminate near theta = 0 (got {theta}); use differences of phi"
            ));
        }
        if theta >= T::FRAC_PI_2() {
            return Ok(-T::lit(2.0));
        }
        let (sn, c) = theta.sin_cos();
        let (s2, c2) = (sn * sn, c * c);
        let q = p + T::one();
        let kc = k * c.powf(q);
        let two = T::lit(2.0);
        let integrand = |n: Node<T>| {
            let s = n.x;
            let tail = one_minus_pow(s, n.to_upper, q);
            let g = s2 + c2 * n.to_upper * (T::one() + s) + kc * tail;
            ((p - T::one()) * kc * tail - two) / (g * g.sqrt())
        };
        Ok(sn * integrate_nodes(integrand, T::zero(), T::one(), &self.quad)?)
    }

    /// Large-`R` profile `R^{−(p−1)/2}·√(2λ(p+1)/cos^{p−1}θ)·I(p)`, with
    /// `I(p) = ∫₀¹ ds/√(1−s^{p+1}) = B(1/(p+1), 1/2)/(p+1)`.
    pub fn phi_asymptotic(&self, r: T, theta: T, lambda: T, p: T) -> Result<T> {
        let i = self.asymptotic_prefactor(r, theta, lambda, p)?;
        let c = theta.cos();
        Ok(i * (T::lit(2.0) * lambda * (p + T::one()) / c.powf(p - T::one())).sqrt())
    }

    /// Exact `θ`-derivative of [`TimeMaps::phi_asymptotic`]:
    /// `R^{−(p−1)/2}(p−1) sinθ √(λ(p+1)/(2cos^{p+1}θ))·I(p)`.
    pub fn phi_dtheta_asymptotic(&self, r: T, theta: T, lambda: T, p: T) -> Result<T> {
        let i = self.asymptotic_prefactor(r, theta, lambda, p)?;
        let (sn, c) = theta.sin_cos();
        Ok(i * (p - T::one())
            * sn
            * (lambda * (p + T::one()) / (T::lit(2.0) * c.powf(p + T::one()))).sqrt())
    }

    fn asymptotic_prefactor(&self, r: T, theta: T, lambda: T, p: T) -> Result<T> {
        phi_k(r, lambda, p)?;
        if !(theta >= T::zero() && theta < T::FRAC_PI_2()) {
            return domain(format!(
                "asymptotic profile needs theta in [0, pi/2), got {theta}"
            ));
        }
        let i = power_arc_integral(p + T::one(), &self.quad)?;
        Ok(r.powf(-(p - T::one()) / T::lit(2.0)) * i)
    }

    /// Samples `φ(R, ·)` at the given angles.
    pub fn phi_curve(&self, r: T, thetas: &[T], lambda: T, p: T) -> Result<Vec<PhiValue<T>>> {
        thetas
            .iter()
            .map(|&theta| {
                Ok(PhiValue {
                    r,
                    theta,
                    value: self.phi(r, theta, lambda, p)?,
                })
            })
            .collect()
    }

    /// Samples `T_N(λ, ·)` at the given amplitudes.
    pub fn time_map_curve(
        &self,
        lambda: T,
        p: T,
        amplitudes: &[T],
    ) -> Result<Vec<TimeMapPoint<T>>> {
        amplitudes
            .iter()
            .map(|&u0| {
                Ok(TimeMapPoint {
                    u0,
                    time: self.time_n_full(lambda, p, u0)?,
                })
            })
            .collect()
    }

    /// Quadrature form `∫_{u₊}^{u_l} du/√(−λ(u² − u₊²))` of
    /// [`time_l_hyperbolic`].
    pub fn time_l_hyperbolic_quadrature(&self, lambda: T, u_plus: T, u_l: T) -> Result<T> {
        check_hyperbolic(lambda, u_plus, u_l)?;
        integrate_nodes(
            |n: Node<T>| (-lambda * n.from_lower * (n.x + u_plus)).sqrt().recip(),
            u_plus,
            u_l,
            &self.quad,
        )
    }

    /// Quadrature form `∫₀^{u_r} du/√(v₋² − λu²)` of [`time_l_to_axis`].
    pub fn time_l_to_axis_quadrature(&self, lambda: T, u_r: T, v_minus: T) -> Result<T> {
        check_to_axis(lambda, u_r, v_minus)?;
        if u_r == T::zero() {
            return Ok(T::zero());
        }
        let v2 = v_minus * v_minus;
        integrate_nodes(
            |n: Node<T>| (v2 - lambda * n.x * n.x).sqrt().recip(),
            T::zero(),
            u_r,
            &self.quad,
        )
    }

    /// The amplitudes `u0 > u1` with `2T_N(λ, u0) = (1−h)/2` and
    /// `T_N(λ, u1) = (1−h)/2` (`λ < 0`): the turning points of the orbits
    /// that return to the `v`-axis, respectively reach the `u`-axis, within
    /// one nonlinear interval.
    pub fn connection_amplitudes(&self, lambda: T, p: T, h: T) -> Result<(T, T)> {
        let u_ho = homoclinic_crossing(lambda, p)?;
        if !(h > T::zero() && h < T::one()) {
            return domain(format!("h must lie in (0, 1), got {h}"));
        }
        let target = (T::one() - h) / T::lit(2.0);
        let u0 = self.invert_full(lambda, p, u_ho, target / T::lit(2.0))?;
        let u1 = self.invert_full(lambda, p, u_ho, target)?;
        Ok((u0, u1))
    }

    /// Solves `T_N(λ, u) = target` for `u > u_ho`.
    fn invert_full(&self, lambda: T, p: T, u_ho: T, target: T) -> Result<T> {
        let f = |u: T| Ok(self.time_n_full(lambda, p, u)? - target);
        let lo = u_ho * (T::one() + T::lit(1e-9));
        let mut hi = u_ho * T::lit(2.0);
        while f(hi)? > T::zero() {
            hi = hi * T::lit(2.0);
            if !hi.is_finite() {
                return domain("time map inversion overflowed");
            }
        }
        brent(f, lo, hi, &RootConfig::default())
    }
}

fn phi_k<T: Scalar>(r: T, lambda: T, p: T) -> Result<T> {
    check_p(p)?;
    if !(lambda > T::zero()) {
        return domain(format!("phi needs lambda > 0, got {lambda}"));
    }
    if !(r > T::zero()) || !r.is_finite() {
        return domain(format!("R must be positive, got {r}"));
    }
    Ok(T::lit(2.0) * r.powf(p - T::one()) / (lambda * (p + T::one())))
}

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    // Allow rounding of π/2 itself.
    if theta >= T::zero() && theta <= T::FRAC_PI_2() + T::epsilon() {
        Ok(())
    } else {
        domain(format!("theta must lie in [0, pi/2], got {theta}"))
    }
}

fn check_hyperbolic<T: Scalar>(lambda: T, u_plus: T, u_l: T) -> Result<()> {
    if !(lambda < T::zero()) {
        return domain(format!(
            "hyperbolic linear time needs lambda < 0, got {lambda}"
        ));
    }
    if !(u_plus > T::zero() && u_l > u_plus) {
        return domain(format!(
            "need u_l > u_plus > 0, got u_plus = {u_plus}, u_l = {u_l}"
        ));
    }
    Ok(())
}

fn check_to_axis<T: Scalar>(lambda: T, u_r: T, v_minus: T) -> Result<()> {
    if !(lambda < T::zero()) {
        return domain(format!(
            "linear time to axis needs lambda < 0, got {lambda}"
        ));
    }
    if !(u_r >= T::zero()) {
        return domain(format!("u_r must be non-negative, got {u_r}"));
    }
    if !(v_minus < T::zero()) {
        return domain(format!("v_minus must be negative, got {v_minus}"));
    }
    Ok(())
}

/// `acosh(1 + d)` without cancellation for small `d ≥ 0`.
fn acosh_1p<T: Scalar>(d: T) -> T {
    (d + (d * (d + T::lit(2.0))).sqrt()).ln_1p()
}

/// Time for the linear flow to carry `(u₊, 0)` to abscissa `u_l > u₊`:
/// `acosh(u_l/u₊)/√(−λ)`.
pub fn time_l_hyperbolic<T: Scalar>(lambda: T, u_plus: T, u_l: T) -> Result<T> {
    check_hyperbolic(lambda, u_plus, u_l)?;
    Ok(acosh_1p((u_l - u_plus) / u_plus) / (-lambda).sqrt())
}

/// The linear connection time written through the amplitude ratio
/// `ρ = û/u₁ ≥ 1`: `ln(ρ + √(ρ² − 1))/√(−λ)`.
pub fn time_l_from_ratio<T: Scalar>(lambda: T, ratio: T) -> Result<T> {
    if !(lambda < T::zero()) {
        return domain(format!(
            "hyperbolic linear time needs lambda < 0, got {lambda}"
        ));
    }
    if !(ratio >= T::one()) {
        return domain(format!("amplitude ratio must be at least 1, got {ratio}"));
    }
    Ok(acosh_1p(ratio - T::one()) / (-lambda).sqrt())
}

/// Time for the linear flow to carry `(u_r, v_r)` to the axis point
/// `(0, v₋)`, `v₋ < 0`: `asinh(√|λ|u_r/|v₋|)/√|λ|`.
pub fn time_l_to_axis<T: Scalar>(lambda: T, u_r: T, v_minus: T) -> Result<T> {
    check_to_axis(lambda, u_r, v_minus)?;
    let w = (-lambda).sqrt();
    Ok((w * u_r / v_minus.abs()).asinh() / w)
}

fn check_lambda_h<T: Scalar>(lambda: T, h: T) -> Result<()> {
    if !(lambda < T::zero()) {
        return domain(format!("needs lambda < 0, got {lambda}"));
    }
    // h = 1 is admitted: the constants stay finite there.
    if !(h > T::zero() && h <= T::one()) {
        return domain(format!("h must lie in (0, 1], got {h}"));
    }
    Ok(())
}

/// Slope `m_h = √(|λ|(D(h)+1))`, `D(h) = [g⁻¹(√|λ|h)]^{−2}` with
/// `g(s) = ln(s + √(s²+1))`: points `(u, −m_h u)` reach the `v`-axis in
/// time exactly `h` under the linear flow. Equals `√|λ|·coth(√|λ|h)`.
pub fn cone_slope<T: Scalar>(lambda: T, h: T) -> Result<T> {
    check_lambda_h(lambda, h)?;
    let w = (-lambda).sqrt();
    let y = w * h;
    let s = invert_increasing(
        |s: T| s.asinh(),
        |s: T| (s * s + T::one()).sqrt().recip(),
        y,
        T::zero(),
        y.exp(),
    )?;
    let d = (s * s).recip();
    Ok((-lambda * (d + T::one())).sqrt())
}

/// Gate ratio `C = g⁻¹(h√(−λ)/2) > 1` with `g(s) = ln(s + √(s²−1))`: a
/// linear orbit turning at `u₊` reaches `C·u₊` after time `h/2`.
pub fn linear_gate_ratio<T: Scalar>(lambda: T, h: T) -> Result<T> {
    check_lambda_h(lambda, h)?;
    let y = h * (-lambda).sqrt() / T::lit(2.0);
    invert_increasing(
        |s: T| acosh_1p(s - T::one()),
        |s: T| ((s - T::one()) * (s + T::one())).sqrt().recip(),
        y,
        T::one(),
        T::lit(2.0) * y.exp(),
    )
}

/// [`TimeMaps::time_n_full`] with default tolerances.
pub fn time_n_full<T: Scalar>(lambda: T, p: T, u0: T) -> Result<T> {
    TimeMaps::default().time_n_full(lambda, p, u0)
}

/// [`TimeMaps::time_n_partial`] with default tolerances.
pub fn time_n_partial<T: Scalar>(lambda: T, p: T, u0: T, u_l: T) -> Result<T> {
    TimeMaps::default().time_n_partial(lambda, p, u0, u_l)
}

/// [`TimeMaps::time_n_from_axis`] with default tolerances.
pub fn time_n_from_axis<T: Scalar>(lambda: T, p: T, u_omega: T) -> Result<T> {
    TimeMaps::default().time_n_from_axis(lambda, p, u_omega)
}

/// [`TimeMaps::time_n_unstable_to_axis`] with default tolerances.
pub fn time_n_unstable_to_axis<T: Scalar>(lambda: T, p: T, u_plus: T) -> Result<(T, T)> {
    TimeMaps::default().time_n_unstable_to_axis(lambda, p, u_plus)
}

/// [`TimeMaps::time_n_rotated`] with default tolerances.
pub fn time_n_rotated<T: Scalar>(lambda: T, p: T, u_l: T, theta: T) -> Result<T> {
    TimeMaps::default().time_n_rotated(lambda, p, u_l, theta)
}

/// [`TimeMaps::phi`] with default tolerances.
pub fn phi<T: Scalar>(r: T, theta: T, lambda: T, p: T) -> Result<T> {
    TimeMaps::default().phi(r, theta, lambda, p)
}

/// [`TimeMaps::phi_dtheta`] with default tolerances.
pub fn phi_dtheta<T: Scalar>(r: T, theta: T, lambda: T, p: T) -> Result<T> {
    TimeMaps::default().phi_dtheta(r, theta, lambda, p)
}

/// [`TimeMaps::phi_asymptotic`] with default tolerances.
pub fn phi_asymptotic<T: Scalar>(r: T, theta: T, lambda: T, p: T) -> Result<T> {
    TimeMaps::default().phi_asymptotic(r, theta, lambda, p)
}

/// [`TimeMaps::phi_dtheta_asymptotic`] with default tolerances.
pub fn phi_dtheta_asymptotic<T: Scalar>(r: T, theta: T, lambda: T, p: T) -> Result<T> {
    TimeMaps::default().phi_dtheta_asymptotic(r, theta, lambda, p)
}

/// [`TimeMaps::connection_amplitudes`] with default tolerances.
pub fn connection_amplitudes<T: Scalar>(lambda: T, p: T, h: T) -> Result<(T, T)> {
    TimeMaps::default().connection_amplitudes(lambda, p, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn homoclinic_and_equilibrium_examples() {
        assert!(close(homoclinic_crossing(-2.0, 3.0).unwrap(), 2.0, 1e-15));
        assert!(close(
            homoclinic_crossing(-1.0, 3.0).unwrap(),
            2f64.sqrt(),
            1e-15
        ));
        for &p in &[1.5, 2.0, 3.0, 7.0] {
            assert!(close(
                homoclinic_crossing(-2.0 / (p + 1.0), p).unwrap(),
                1.0,
                1e-14
            ));
        }
        assert!(homoclinic_crossing(0.0, 3.0).is_err());
        assert!(close(equilibrium(-1.0, 3.0).unwrap(), 1.0, 1e-15));
        assert!(close(equilibrium(-4.0, 3.0).unwrap(), 2.0, 1e-15));
        assert!(close(equilibrium(-1.0, 2.0).unwrap(), 1.0, 1e-15));
        assert!(equilibrium(1.0, 3.0).is_err());
        assert!(equilibrium(-3.0, 3.0).unwrap() < homoclinic_crossing(-3.0, 3.0).unwrap());
    }

    #[test]
    fn full_time_map_limits() {
        let t1 = time_n_full(0.0, 3.0, 1.0).unwrap();
        let t4 = time_n_full(0.0, 3.0, 4.0).unwrap();
        assert!(close(t4 / t1, 0.25, 1e-12));
        assert!(close(time_n_full(1.0, 3.0, 1e-8).unwrap(), FRAC_PI_2, 1e-4));
        let u_ho = homoclinic_crossing(-1.0, 3.0).unwrap();
        assert!(time_n_full(-1.0, 3.0, u_ho * (1.0 + 1e-9)).unwrap() > 10.0);
        assert!(time_n_full(-1.0, 3.0, u_ho).is_err());
        assert!(time_n_full(-1.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn partial_time_map_edges() {
        let full = time_n_full(-1.0, 3.0, 3.0).unwrap();
        assert_eq!(time_n_partial(-1.0, 3.0, 3.0, 0.0).unwrap(), full);
        assert!(time_n_partial(-1.0, 3.0, 3.0, 3.0 * (1.0 - 1e-12)).unwrap() < 1e-5);
        assert!(time_n_partial(-1.0, 3.0, 3.0, 3.0).is_err());
        assert!(time_n_partial(-1.0, 3.0, 3.0, 4.0).is_err());
    }

    #[test]
    fn from_axis_examples() {
        let a = time_n_from_axis(-1.0, 3.0, 1.0).unwrap();
        let b = time_n_from_axis(-1.0, 3.0, 2.0).unwrap();
        assert!(a > b);
        assert!(time_n_from_axis(-1.0, 3.0, 1e4).unwrap() < 0.05);
        assert!(time_n_from_axis(1.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn unstable_manifold_decomposition() {
        for &(lam, p) in &[(-1.0, 3.0), (-5.0, 2.0), (-0.5, 4.5)] {
            let u_ho = homoclinic_crossing(lam, p).unwrap();
            for &f in &[1.01, 1.5, 3.0] {
                let u_plus = u_ho * f;
                let (u_omega, t) = time_n_unstable_to_axis(lam, p, u_plus).unwrap();
                let lhs = time_n_full(lam, p, u_plus).unwrap();
                let rhs = time_n_from_axis(lam, p, u_omega).unwrap() + t;
                assert!(close(lhs, rhs, 1e-9), "{lam} {p} {u_plus}: {lhs} vs {rhs}");
            }
        }
        let ratios: Vec<f64> = [2.0, 3.0, 5.0]
            .iter()
            .map(|&u| {
                let (w, _) = time_n_unstable_to_axis(-1.0, 3.0, u).unwrap();
                w / u
            })
            .collect();
        assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2]);
        let u_ho = homoclinic_crossing(-1.0, 3.0).unwrap();
        let (w, _) = time_n_unstable_to_axis(-1.0, 3.0, u_ho * (1.0 + 1e-12)).unwrap();
        assert!(w / u_ho < 0.01);
        assert!(time_n_unstable_to_axis(-1.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn hyperbolic_examples() {
        assert!(close(
            time_l_hyperbolic(-1.0, 1.0, 1f64.cosh()).unwrap(),
            1.0,
            1e-15
        ));
        assert!(close(
            time_l_hyperbolic(-4.0, 1.0, 2f64.cosh()).unwrap(),
            1.0,
            1e-15
        ));
        assert!(time_l_hyperbolic(-1.0, 1.0, 1.0 + 1e-14).unwrap() < 1e-6);
        assert!(time_l_hyperbolic(-1.0, 1.0, 1.0).is_err());
        let maps = TimeMaps::<f64>::default();
        let q = maps
            .time_l_hyperbolic_quadrature(-1.0, 1.0, 1f64.cosh())
            .unwrap();
        assert!(close(q, 1.0, 1e-10));
        assert!(close(
            time_l_from_ratio(-1.0, 1f64.cosh()).unwrap(),
            1.0,
            1e-15
        ));
    }

    #[test]
    fn to_axis_examples() {
        assert_eq!(time_l_to_axis(-1.0, 0.0, -1.0).unwrap(), 0.0);
        assert!(close(
            time_l_to_axis(-1.0, 1f64.sinh(), -1.0).unwrap(),
            1.0,
            1e-15
        ));
        let maps = TimeMaps::<f64>::default();
        let a = time_l_to_axis(-1.0, 2.0, -1.0).unwrap();
        let b = maps.time_l_to_axis_quadrature(-1.0, 2.0, -1.0).unwrap();
        assert!(close(a, b, 1e-10));
        assert!(time_l_to_axis(-1.0, 1.0, 1.0).is_err());
        assert!(time_l_to_axis(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn to_axis_matches_linear_flow() {
        // Start on the orbit through (0, v₋) at u_r with v < 0 and flow the
        // closed-form hyperbolic map for the predicted time.
        let (lam, u_r, v_m): (f64, f64, f64) = (-1.0, 2.0, -1.0);
        let w = (-lam).sqrt();
        let v_r = -(v_m * v_m + w * w * u_r * u_r).sqrt();
        let t = time_l_to_axis(lam, u_r, v_m).unwrap();
        let (ch, sh) = ((w * t).cosh(), (w * t).sinh());
        let u = u_r * ch + v_r * sh / w;
        let v = u_r * w * sh + v_r * ch;
        assert!(u.abs() < 1e-10 && close(v, v_m, 1e-10));
    }

    #[test]
    fn cone_slope_examples() {
        let m: Vec<f64> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&h| cone_slope(-1.0, h).unwrap())
            .collect();
        assert!(m[0] > m[1] && m[1] > m[2]);
        assert!(close(
            cone_slope(-1.0, 1.0).unwrap(),
            1.0 / 1f64.tanh(),
            1e-12
        ));
        assert!(close(
            cone_slope(-1.0, 1.0).unwrap(),
            1.3130352854993315,
            1e-12
        ));
        assert!(cone_slope(-1.0, 0.05).unwrap() > 10.0);
        for &(lam, h) in &[(-0.3_f64, 0.1), (-7.0, 0.6), (-50.0, 0.9)] {
            let w: f64 = (-lam).sqrt();
            assert!(close(
                cone_slope(lam, h).unwrap(),
                w / (w * h).tanh(),
                1e-10 * w
            ));
        }
        assert!(cone_slope(1.0, 0.5).is_err());
        assert!(cone_slope(-1.0, 0.0).is_err());
    }

    #[test]
    fn gate_ratio_examples() {
        let c = linear_gate_ratio(-1.0, 0.6).unwrap();
        assert!(c > 1.0);
        assert!(close(time_l_hyperbolic(-1.0, 1.0, c).unwrap(), 0.3, 1e-10));
        let small = linear_gate_ratio(-1.0, 1e-6).unwrap();
        assert!(small > 1.0 && small - 1.0 < 1e-12);
        assert!(close(
            linear_gate_ratio(-4.0, 1.0).unwrap(),
            1f64.cosh(),
            1e-12
        ));
    }

    // Reference values for p = 3, λ = 6 from an independent 50-digit
    // adaptive quadrature of the defining integral.
    const PHI_300: [(f64, f64); 6] = [
        (0.0, 0.030_275_442_414_598_6),
        (0.01, 0.030_275_622_58),
        (0.02, 0.030_278_829_61),
        (0.5, 0.034_403_168_67),
        (1.2, 0.080_783_018_09),
        (1.5, 0.132_113_625_58),
    ];

    #[test]
    fn phi_reference_values() {
        for &(theta, want) in &PHI_300 {
            let got = phi(300.0, theta, 6.0, 3.0).unwrap();
            assert!(close(got, want, 1e-10), "theta {theta}: {got} vs {want}");
        }
    }

    #[test]
    fn phi_limits() {
        for &theta in &[0.0, 0.3, 1.0] {
            assert!(close(
                phi(1e-10, theta, 1.0, 3.0).unwrap(),
                PI - 2.0 * theta,
                1e-4
            ));
        }
        assert_eq!(phi(17.0, FRAC_PI_2, 6.0, 3.0).unwrap(), 0.0);
        assert!(phi(1.0, 0.3, -1.0, 3.0).is_err());
        assert!(phi(1.0, 2.0, 6.0, 3.0).is_err());
    }

    #[test]
    fn phi_matches_rotated_time_map() {
        for &(r, theta) in &[(0.5, 0.2), (20.0, 0.7), (300.0, 1.3)] {
            let s = time_n_rotated(6.0, 3.0, r * f64::cos(theta), theta).unwrap();
            let f = phi(r, theta, 6.0, 3.0).unwrap();
            assert!(close(f, 2.0 * 6f64.sqrt() * s, 1e-12 * f.max(1.0)));
        }
    }

    #[test]
    fn phi_derivative_against_differences() {
        let (r, theta, lam, p) = (20.0_f64, 0.7, 6.0, 3.0);
        let step = 1e-5;
        let fd = (phi(r, theta + step, lam, p).unwrap() - phi(r, theta - step, lam, p).unwrap())
            / (2.0 * step);
        let d = phi_dtheta(r, theta, lam, p).unwrap();
        assert!(((d - fd) / fd).abs() < 1e-5, "{d} vs {fd}");
        assert_eq!(phi_dtheta(300.0, FRAC_PI_2, 6.0, 3.0).unwrap(), -2.0);
        for &t in &[0.3, 0.6, 0.9, 1.2] {
            assert!(phi_dtheta(300.0, t, 6.0, 3.0).unwrap() > 0.0);
        }
        assert!(phi_dtheta(300.0, 0.0, 6.0, 3.0).is_err());
        assert!(phi_dtheta(300.0, 1e-7, 6.0, 3.0).is_err());
    }

    #[test]
    fn phi_derivative_small_angles() {
        let (r, lam, p) = (300.0_f64, 6.0, 3.0);
        for &theta in &[1e-3, 1e-2, 0.05] {
            let step = theta * 1e-3;
            let fd = (phi(r, theta + step, lam, p).unwrap()
                - phi(r, theta - step, lam, p).unwrap())
                / (2.0 * step);
            let d = phi_dtheta(r, theta, lam, p).unwrap();
            assert!(
                (d - fd).abs() < 1e-5 * fd.abs().max(1e-3),
                "theta {theta}: {d} vs {fd}"
            );
        }
    }

    #[test]
    fn asymptotic_profiles() {
        let (lam, p) = (6.0_f64, 3.0);
        let f = phi(1e6, 0.5, lam, p).unwrap();
        let a = phi_asymptotic(1e6, 0.5, lam, p).unwrap();
        assert!(((f - a) / f).abs() < 0.01);
        let a4 = phi_asymptotic(4e6, 0.5, lam, p).unwrap();
        assert!(close(a4 / a, 0.25, 1e-14));
        let d = phi_dtheta_asymptotic(1e6, 0.5, lam, p).unwrap();
        let d4 = phi_dtheta_asymptotic(4e6, 0.5, lam, p).unwrap();
        assert!(close(d4 / d, 0.25, 1e-14));
        for &t in &[0.01, 0.5, 1.0, 1.5] {
            assert!(phi_dtheta_asymptotic(100.0, t, lam, p).unwrap() > 0.0);
        }
        let exact = phi_dtheta(1e6, 0.5, lam, p).unwrap();
        assert!(((exact - d) / d).abs() < 0.01);
    }

    #[test]
    fn connection_amplitudes_ordering() {
        for &lam in &[-1.0_f64, -5.0, -20.0] {
            let (u0, u1) = connection_amplitudes(lam, 3.0, 0.5).unwrap();
            let bound = 2f64.sqrt() * (-lam).sqrt();
            assert!(u0 > u1 && u1 >= bound);
            assert!(close(2.0 * time_n_full(lam, 3.0, u0).unwrap(), 0.25, 1e-10));
            assert!(close(time_n_full(lam, 3.0, u1).unwrap(), 0.25, 1e-10));
        }
    }

    #[test]
    fn single_precision_instantiation() {
        let v: f32 = time_n_full(0.0f32, 3.0, 1.0).unwrap();
        let w = time_n_full(0.0f64, 3.0, 1.0).unwrap();
        assert!((v as f64 - w).abs() < 1e-5);
    }
}
