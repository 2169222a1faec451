//! Integrals with inverse-square-root endpoint singularities.
//!
//! Every time-of-flight integral in this crate has the form
//! `∫ ds / √D(s)` with `D` vanishing linearly at the upper limit. The
//! substitution `s = b − (b − a)t²` turns that into a bounded integrand on
//! `t ∈ [0, 1]`, which is then integrated by tanh-sinh (double exponential)
//! refinement. Tanh-sinh also tolerates a second inverse-square-root
//! singularity at the lower limit, so both ends are covered.
//!
//! Integrands that lose precision near an endpoint can use
//! [`integrate_nodes`], which hands them the exact distances to both limits.

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Tolerances for [`integrate_endpoint_singular`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    /// Number of step halvings of the tanh-sinh ladder.
    pub max_levels: usize,
}

impl<T: Scalar> Default for QuadratureConfig<T> {
    fn default() -> Self {
        // 1e-12, or a few ulps when the scalar type cannot resolve that.
        let tol = T::lit(1e-12).max(T::lit(16.0) * T::epsilon());
        Self {
            abs_tol: tol,
            rel_tol: tol,
            max_levels: 12,
        }
    }
}

impl<T: Scalar> QuadratureConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero() && self.rel_tol > T::zero()) {
            return domain("quadrature tolerances must be positive");
        }
        if self.max_levels < 1 {
            return domain("quadrature needs at least one refinement level");
        }
        Ok(())
    }
}

/// A quadrature abscissa together with its exact distances to both limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node<T> {
    pub x: T,
    /// `x − a`, computed without cancellation.
    pub from_lower: T,
    /// `b − x`, computed without cancellation.
    pub to_upper: T,
}

/// `∫_a^b f(s) ds` for `f` with at worst `1/√(b−s)` behaviour at `b` (and
/// optionally `1/√(s−a)` at `a`).
pub fn integrate_endpoint_singular<T, F>(
    mut f: F,
    a: T,
    b: T,
    cfg: &QuadratureConfig<T>,
) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    // The abscissa handed to `f` is rounded, so its true distance to the
    // nearer limit differs from the nominal one. Values are rescaled by the
    // inverse-square-root law `f` is assumed to obey there; that is exact
    // for the singular part and harmless for a regular one. Abscissas that
    // round onto the limit itself reuse the value at the edge of a small
    // exclusion zone.
    let zone = |end: T| T::lit(16.0) * T::epsilon() * end.abs();
    let (zone_a, zone_b) = (zone(a), zone(b));
    let mut edge_a: Option<(T, T)> = None;
    let mut edge_b: Option<(T, T)> = None;
    integrate_nodes(
        |n: Node<T>| {
            if n.to_upper <= n.from_lower {
                let gap = b - n.x;
                let (gap, fx) = if gap > zone_b {
                    (gap, f(n.x))
                } else {
                    *edge_b.get_or_insert_with(|| {
                        let x = b - zone_b.max(T::min_positive_value());
                        (b - x, f(x))
                    })
                };
                fx * (gap / n.to_upper).sqrt()
            } else {
                let gap = n.x - a;
                let (gap, fx) = if gap > zone_a {
                    (gap, f(n.x))
                } else {
                    *edge_a.get_or_insert_with(|| {
                        let x = a + zone_a.max(T::min_positive_value());
                        (x - a, f(x))
                    })
                };
                fx * (gap / n.from_lower).sqrt()
            }
        },
        a,
        b,
        cfg,
    )
}

/// Same as [`integrate_endpoint_singular`] but the integrand receives a
/// [`Node`].
pub fn integrate_nodes<T, F>(mut f: F, a: T, b: T, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(Node<T>) -> T,
{
    cfg.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return domain(format!(
            "integration limits must satisfy a < b, got [{a}, {b}]"
        ));
    }
    let width = b - a;
    let two = T::lit(2.0);

    // Integrand in the substituted variable, evaluated from (t, 1 − t).
    let mut g = |t: T, c: T| -> Result<T> {
        let to_upper = width * t * t;
        let from_lower = width * c * (T::one() + t);
        let x = if t < T::lit(0.5) {
            b - to_upper
        } else {
            a + from_lower
        };
        let y = two
            * width
            * t
            * f(Node {
                x,
                from_lower,
                to_upper,
            });
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand {
                node: x.to_f64_lossy(),
            })
        }
    };

    // Nodes closer than q_min to either end of [0, 1] are dropped; their
    // weights are far below any representable contribution.
    let q_min = T::min_positive_value().powf(T::lit(0.45));
    let tau_max = ((-q_min.ln()) / T::PI()).asinh();

    let half = T::lit(0.5);
    // τ = 0 maps to t = 1/2 with dt/dτ = π/4.
    let mut sum = T::PI() / T::lit(4.0) * g(half, half)?;

    // Contribution of the symmetric pair at ±τ (τ > 0), weighted by dt/dτ.
    let mut pair = |tau: T| -> Result<T> {
        let q = (-T::PI() * tau.sinh()).exp();
        let denom = T::one() + q;
        let w = T::PI() * tau.cosh() * q / (denom * denom);
        let t_lo = q / denom;
        let t_hi = T::one() / denom;
        Ok(w * (g(t_lo, t_hi)? + g(t_hi, t_lo)?))
    };

    let mut h = T::one();
    let mut k = 1usize;
    loop {
        let tau = T::count(k) * h;
        if tau > tau_max {
            break;
        }
        sum = sum + pair(tau)?;
        k += 1;
    }
    let mut estimate = h * sum;
    let mut last_err = T::infinity();
    for level in 1..=cfg.max_levels {
        h = h * half;
        let mut k = 1usize;
        loop {
            let tau = T::count(k) * h;
            if tau > tau_max {
                break;
            }
            sum = sum + pair(tau)?;
            k += 2;
        }
        let next = h * sum;
        let err = (next - estimate).abs();
        estimate = next;
        last_err = err;
        let tol = cfg.abs_tol.max(cfg.rel_tol * estimate.abs());
        if level >= 3 && err <= tol {
            return Ok(estimate);
        }
    }
    Err(Error::QuadratureConvergence {
        estimate: estimate.to_f64_lossy(),
        error: last_err.to_f64_lossy(),
    })
}

/// `1 − s^q` accurate near `s = 1` given `gap = 1 − s`.
#[inline]
pub(crate) fn one_minus_pow<T: Scalar>(s: T, gap: T, q: T) -> T {
    if gap < T::lit(0.5) {
        -(q * (-gap).ln_1p()).exp_m1()
    } else {
        T::one() - s.powf(q)
    }
}

/// `∫₀¹ ds/√(1 − s^q)` for any `q > 0`.
pub fn power_arc_integral<T: Scalar>(q: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    if !(q > T::zero()) {
        return domain(format!("power must be positive, got {q}"));
    }
    integrate_nodes(
        |n: Node<T>| T::one() / one_minus_pow(n.x, n.to_upper, q).sqrt(),
        T::zero(),
        T::one(),
        cfg,
    )
}

/// `∫₀¹ ds/√(1 − s^{p+1})`, the constant in the large-amplitude profiles of
/// the rescaled time map. Equals `B(1/(p+1), 1/2)/(p+1)`.
pub fn beta_integral<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::one()) {
        return domain(format!("beta_integral needs p > 1, got {p}"));
    }
    power_arc_integral(p + T::one(), &QuadratureConfig::default())
}
