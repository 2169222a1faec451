//! Scalar root finding: Brent's method, plain bisection, and safeguarded
//! Newton inversion of monotone functions.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Stopping rule for bracketed searches.
#[derive(Clone, Copy, Debug)]
pub struct RootConfig<T> {
    /// Absolute width of the final bracket.
    pub x_tol: T,
    /// Accept early when `|f| ≤ f_tol`.
    pub f_tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for RootConfig<T> {
    fn default() -> Self {
        Self {
            x_tol: T::lit(1e-12),
            f_tol: T::zero(),
            max_iter: 200,
        }
    }
}

/// Brent's method on a bracket `[a, b]` with `f(a)`, `f(b)` of opposite sign.
/// Errors from `f` propagate unchanged.
pub fn brent<T, F>(mut f: F, a: T, b: T, cfg: &RootConfig<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    brent_with_values(f, a, fa, b, fb, cfg)
}

/// [`brent`] when the endpoint values are already known.
pub fn brent_with_values<T, F>(mut f: F, a: T, fa: T, b: T, fb: T, cfg: &RootConfig<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{a:e}, {b:e}]: f = {fa:e}, {fb:e}"
        )));
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..cfg.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + half * cfg.x_tol;
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() || fb.abs() <= cfg.f_tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut pp, mut qq);
            if a == c {
                pp = two * m * s;
                qq = T::one() - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                pp = s * (two * m * q0 * (q0 - r) - (b - a) * (r - T::one()));
                qq = (q0 - T::one()) * (r - T::one()) * (s - T::one());
            }
            if pp > T::zero() {
                qq = -qq;
            } else {
                pp = -pp;
            }
            if two * pp < (T::lit(3.0) * m * qq - (tol * qq).abs()).min((e * qq).abs()) {
                e = d;
                d = pp / qq;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol {
            b + d
        } else {
            b + tol * m.signum()
        };
        fb = f(b)?;
        if fb.is_nan() {
            return Err(Error::RootFinding(format!("function not finite at {b:e}")));
        }
    }
    Err(Error::RootFinding(format!(
        "no convergence after {} iterations, bracket [{b:e}, {c:e}]",
        cfg.max_iter
    )))
}

/// Bisection on `[a, b]` down to width `x_tol`. Returns the bracket midpoint.
pub fn bisect<T, F>(mut f: F, a: T, b: T, cfg: &RootConfig<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{a:e}, {b:e}]: f = {flo:e}, {fhi:e}"
        )));
    }
    let half = T::lit(0.5);
    for _ in 0..cfg.max_iter.max(2000) {
        let mid = half * (lo + hi);
        if (hi - lo).abs() <= cfg.x_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == T::zero() || fm.abs() <= cfg.f_tol {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(half * (lo + hi))
}

/// Solves `g(s) = target` for increasing `g` on `[lo, hi]` by Newton steps
/// with analytic derivative, falling back to bisection whenever a step
/// leaves the current bracket.
pub fn invert_increasing<T, G, D>(g: G, dg: D, target: T, lo: T, hi: T) -> Result<T>
where
    T: Scalar,
    G: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let (mut lo, mut hi) = (lo, hi);
    if !(g(lo) <= target && g(hi) >= target) {
        return Err(Error::RootFinding(format!(
            "target {target:e} not bracketed by [{lo:e}, {hi:e}]"
        )));
    }
    let half = T::lit(0.5);
    let mut x = half * (lo + hi);
    for _ in 0..400 {
        let r = g(x) - target;
        if r == T::zero() {
            return Ok(x);
        }
        if r > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        let slope = dg(x);
        let newton = x - r / slope;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            half * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= T::lit(4.0) * T::epsilon() * x.abs().max(T::min_positive_value())
            || hi - lo <= T::epsilon() * hi.abs()
        {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Expands `[lo, hi]` geometrically upward until `f` changes sign, keeping
/// `lo` fixed. Returns the new upper end and its value.
pub fn expand_upward<T, F>(mut f: F, lo: T, hi: T, factor: T, max_steps: usize) -> Result<(T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let flo = f(lo)?;
    let mut hi = hi;
    for _ in 0..max_steps {
        let fhi = f(hi)?;
        if fhi.signum() != flo.signum() || fhi == T::zero() {
            return Ok((hi, fhi));
        }
        hi = hi * factor;
    }
    Err(Error::RootFinding(format!(
        "no sign change found up to {hi:e} starting from {lo:e}"
    )))
}
