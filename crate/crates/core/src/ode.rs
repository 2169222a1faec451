//! Dormand–Prince 5(4) with Hairer's continuous extension, for planar
//! systems. Steps carry their sign, so the same code integrates backward.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) type Vec2<T> = [T; 2];

#[derive(Clone, Copy, Debug)]
pub(crate) struct StepControl<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_step: T,
}

/// One accepted step together with its interpolation coefficients.
#[derive(Clone, Copy, Debug)]
pub(crate) struct DenseStep<T> {
    pub x0: T,
    pub h: T,
    r: [Vec2<T>; 5],
}

impl<T: Scalar> DenseStep<T> {
    pub fn x1(&self) -> T {
        self.x0 + self.h
    }

    /// Interpolated state at `x` within the step.
    pub fn eval(&self, x: T) -> Vec2<T> {
        let th = (x - self.x0) / self.h;
        let th1 = T::one() - th;
        let r = &self.r;
        let comp =
            |i: usize| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        [comp(0), comp(1)]
    }
}

fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}

fn axpy<T: Scalar>(y: Vec2<T>, h: T, terms: &[(f64, &Vec2<T>)]) -> Vec2<T> {
    let mut out = y;
    for i in 0..2 {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc = acc + lit::<T>(*c) * k[i];
        }
        out[i] = out[i] + h * acc;
    }
    out
}

/// What the step callback asks for next.
pub(crate) enum Next<T> {
    Continue,
    /// End the integration early at this point.
    Stop(T, Vec2<T>),
}

/// Integrates `y' = f(x, y)` from `x0` to `x_end` (either direction),
/// calling `on_step` after every accepted step. Returns the final abscissa
/// and state, which is `x_end` unless the callback stopped early.
pub(crate) fn integrate<T, F, S>(
    f: F,
    x0: T,
    y0: Vec2<T>,
    x_end: T,
    ctl: &StepControl<T>,
    mut on_step: S,
) -> Result<(T, Vec2<T>)>
where
    T: Scalar,
    F: Fn(T, &Vec2<T>) -> Vec2<T>,
    S: FnMut(&DenseStep<T>) -> Result<Next<T>>,
{
    let span = x_end - x0;
    if span == T::zero() {
        return Ok((x0, y0));
    }
    let dir = span.signum();
    let max_step = ctl.max_step.min(span.abs());
    let scale =
        |y: &Vec2<T>, z: &Vec2<T>, i: usize| ctl.abs_tol + ctl.rel_tol * y[i].abs().max(z[i].abs());

    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = dir * initial_step(&f, x, &y, &k1, dir, ctl).min(max_step);
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        let remaining = x_end - x;
        if remaining * dir <= T::zero() {
            return Ok((x, y));
        }
        let mut last = false;
        if (h.abs() - remaining.abs()) >= -T::lit(1e-12) * remaining.abs()
            || (x + h - x_end) * dir > T::zero()
        {
            h = remaining;
            last = true;
        }
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::Integration {
                x: x.to_f64_lossy(),
                reason: "step budget exhausted".into(),
            });
        }

        let k2 = f(x + lit::<T>(0.2) * h, &axpy(y, h, &[(0.2, &k1)]));
        let k3 = f(
            x + lit::<T>(0.3) * h,
            &axpy(y, h, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]),
        );
        let k4 = f(
            x + lit::<T>(0.8) * h,
            &axpy(
                y,
                h,
                &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)],
            ),
        );
        let k5 = f(
            x + lit::<T>(8.0 / 9.0) * h,
            &axpy(
                y,
                h,
                &[
                    (19372.0 / 6561.0, &k1),
                    (-25360.0 / 2187.0, &k2),
                    (64448.0 / 6561.0, &k3),
                    (-212.0 / 729.0, &k4),
                ],
            ),
        );
        let k6 = f(
            x + h,
            &axpy(
                y,
                h,
                &[
                    (9017.0 / 3168.0, &k1),
                    (-355.0 / 33.0, &k2),
                    (46732.0 / 5247.0, &k3),
                    (49.0 / 176.0, &k4),
                    (-5103.0 / 18656.0, &k5),
                ],
            ),
        );
        let y1 = axpy(
            y,
            h,
            &[
                (35.0 / 384.0, &k1),
                (500.0 / 1113.0, &k3),
                (125.0 / 192.0, &k4),
                (-2187.0 / 6784.0, &k5),
                (11.0 / 84.0, &k6),
            ],
        );
        let x1 = if last { x_end } else { x + h };
        let k7 = f(x1, &y1);

        let e = axpy(
            [T::zero(), T::zero()],
            h,
            &[
                (71.0 / 57600.0, &k1),
                (-71.0 / 16695.0, &k3),
                (71.0 / 1920.0, &k4),
                (-17253.0 / 339200.0, &k5),
                (22.0 / 525.0, &k6),
                (-1.0 / 40.0, &k7),
            ],
        );
        let mut err = T::zero();
        for (i, ei) in e.iter().enumerate() {
            let r = *ei / scale(&y, &y1, i);
            err = err + r * r;
        }
        err = (err / lit(2.0)).sqrt();

        if !err.is_finite() || !y1[0].is_finite() || !y1[1].is_finite() {
            h = h * lit(0.1);
            last_rejected = true;
            if h.abs() <= T::lit(16.0) * T::epsilon() * x.abs().max(T::one()) {
                return Err(Error::Integration {
                    x: x.to_f64_lossy(),
                    reason: "solution left the finite range".into(),
                });
            }
            continue;
        }

        if err <= T::one() {
            let d = axpy(
                [T::zero(), T::zero()],
                h,
                &[
                    (-12715105075.0 / 11282082432.0, &k1),
                    (87487479700.0 / 32700410799.0, &k3),
                    (-10690763975.0 / 1880347072.0, &k4),
                    (701980252875.0 / 199316789632.0, &k5),
                    (-1453857185.0 / 822651844.0, &k6),
                    (69997945.0 / 29380423.0, &k7),
                ],
            );
            let mut r = [[T::zero(); 2]; 5];
            for i in 0..2 {
                let diff = y1[i] - y[i];
                let bspl = h * k1[i] - diff;
                r[0][i] = y[i];
                r[1][i] = diff;
                r[2][i] = bspl;
                r[3][i] = diff - h * k7[i] - bspl;
                r[4][i] = d[i];
            }
            let step = DenseStep {
                x0: x,
                h: x1 - x,
                r,
            };
            if let Next::Stop(xs, ys) = on_step(&step)? {
                return Ok((xs, ys));
            }
            x = x1;
            y = y1;
            k1 = k7;
            if last {
                return Ok((x, y));
            }
            let mut fac = lit::<T>(0.9) * err.max(lit(1e-10)).powf(lit(-0.2));
            fac = fac
                .min(lit(if last_rejected { 1.0 } else { 10.0 }))
                .max(lit(0.2));
            h = dir * (h.abs() * fac).min(max_step);
            last_rejected = false;
        } else {
            let fac = (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2));
            h = h * fac;
            last_rejected = true;
            if h.abs() <= T::lit(16.0) * T::epsilon() * x.abs().max(T::one()) {
                return Err(Error::Integration {
                    x: x.to_f64_lossy(),
                    reason: format!("step size collapsed to {:e}", h.to_f64_lossy()),
                });
            }
        }
    }
}

/// Hairer's starting step heuristic.
fn initial_step<T, F>(f: &F, x: T, y: &Vec2<T>, k1: &Vec2<T>, dir: T, ctl: &StepControl<T>) -> T
where
    T: Scalar,
    F: Fn(T, &Vec2<T>) -> Vec2<T>,
{
    let sc = |i: usize| ctl.abs_tol + ctl.rel_tol * y[i].abs();
    let norm = |v: &Vec2<T>| (((v[0] / sc(0)).powi(2) + (v[1] / sc(1)).powi(2)) / lit(2.0)).sqrt();
    let d0 = norm(y);
    let d1 = norm(k1);
    let mut h0 = if d0 < lit(1e-5) || d1 < lit(1e-5) {
        lit(1e-6)
    } else {
        lit::<T>(0.01) * d0 / d1
    };
    h0 = h0.min(ctl.max_step);
    let y1 = [y[0] + dir * h0 * k1[0], y[1] + dir * h0 * k1[1]];
    let k2 = f(x + dir * h0, &y1);
    let d2 = norm(&[k2[0] - k1[0], k2[1] - k1[1]]) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= lit(1e-15) {
        (h0 * lit(1e-3)).max(lit(1e-6))
    } else {
        (lit::<T>(0.01) / dm).powf(lit(0.2))
    };
    (h0 * lit(100.0)).min(h1).min(ctl.max_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl() -> StepControl<f64> {
        StepControl {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_step: 0.1,
        }
    }

    #[test]
    fn harmonic_oscillator_forward_and_back() {
        let f = |_x: f64, y: &Vec2<f64>| [y[1], -y[0]];
        let (_, y) = integrate(f, 0.0, [0.0, 1.0], 3.0, &ctl(), |_| Ok(Next::Continue)).unwrap();
        assert!((y[0] - 3f64.sin()).abs() < 1e-10);
        assert!((y[1] - 3f64.cos()).abs() < 1e-10);
        let (_, back) = integrate(f, 3.0, y, 0.0, &ctl(), |_| Ok(Next::Continue)).unwrap();
        assert!(back[0].abs() < 1e-10 && (back[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dense_output_is_accurate() {
        let f = |_x: f64, y: &Vec2<f64>| [y[1], -y[0]];
        let mut worst: f64 = 0.0;
        integrate(f, 0.0, [0.0, 1.0], 5.0, &ctl(), |s| {
            for k in 0..=10 {
                let x = s.x0 + s.h * k as f64 / 10.0;
                let y = s.eval(x);
                worst = worst
                    .max((y[0] - x.sin()).abs())
                    .max((y[1] - x.cos()).abs());
            }
            Ok(Next::Continue)
        })
        .unwrap();
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn callback_can_stop_early() {
        let f = |_x: f64, y: &Vec2<f64>| [y[1], -y[0]];
        let (x, y) = integrate(f, 0.0, [0.0, 1.0], 10.0, &ctl(), |s| {
            Ok(if s.x1() > 2.0 {
                Next::Stop(2.0, s.eval(2.0))
            } else {
                Next::Continue
            })
        })
        .unwrap();
        assert_eq!(x, 2.0);
        assert!((y[0] - 2f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn steps_tile_the_interval() {
        let f = |_x: f64, y: &Vec2<f64>| [y[1], -y[0]];
        let mut ends = vec![];
        integrate(f, 1.0, [0.0, 1.0], -1.0, &ctl(), |s| {
            ends.push((s.x0, s.x1()));
            Ok(Next::Continue)
        })
        .unwrap();
        assert_eq!(ends.first().unwrap().0, 1.0);
        assert_eq!(ends.last().unwrap().1, -1.0);
        assert!(ends.windows(2).all(|w| w[0].1 == w[1].0));
    }
}
