//! Level structure of `θ ↦ φ(R, θ)` and the equal-level pairing on both
//! sides of its peak.
//!
//! For large `R` the map starts near its minimum at `θ = 0`, rises through
//! `[ε, π/2 − ε]`, peaks at `θ_M` close to `π/2` and falls to `φ(R, π/2) = 0`.
//! Every level between the minimum `φ_m` and the peak `φ_M` is then attained
//! exactly once on each side of `θ_M`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::error::{domain, Error, Result};
use crate::roots::{brent, RootConfig};
use crate::timemaps::TimeMaps;

use super::SolverConfig;

/// Samples on the rising middle `[ε, π/2 − ε]`.
const MIDDLE_SAMPLES: usize = 160;
/// Samples on each of the outer bands `[0, ε]` and `[π/2 − ε, π/2]`.
const BAND_SAMPLES: usize = 96;
/// Halvings of `ε` after a failure in the left part of the middle.
const MAX_HALVINGS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiLandscape {
    #[serde(rename = "R")]
    pub r: f64,
    pub epsilon: f64,
    /// Minimizer of `φ(R, ·)` on `[0, ε]`.
    pub theta_m: f64,
    pub phi_m: f64,
    /// Maximizer of `φ(R, ·)` on `[π/2 − ε, π/2)`.
    #[serde(rename = "theta_M")]
    pub theta_peak: f64,
    #[serde(rename = "phi_M")]
    pub phi_peak: f64,
    /// Least angle past the peak where `φ` is back down to `φ_m`.
    pub theta_bar: f64,
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                b
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Landscape at the given `ε`, with no adaptation.
pub fn phi_landscape(r: f64, lambda: f64, p: f64, epsilon: f64) -> Result<PhiLandscape> {
    build(&SolverConfig::default().maps(), r, lambda, p, epsilon)
}

/// Landscape starting from `ε`: a monotonicity failure near `π/2` doubles
/// `ε` (while it stays below `π/4`), one near `θ = 0` halves it (at most
/// three times). For moderate `R` the peak lies well below `π/2 − 0.05`
/// (`θ_M ≈ 1.45` at `R = 300`, `λ = 6`, `p = 3`), so `ε` often has to grow.
pub fn phi_landscape_adaptive(r: f64, lambda: f64, p: f64, epsilon: f64) -> Result<PhiLandscape> {
    phi_landscape_adaptive_with(r, lambda, p, epsilon, &SolverConfig::default())
}

pub fn phi_landscape_adaptive_with(
    r: f64,
    lambda: f64,
    p: f64,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<PhiLandscape> {
    adaptive(&cfg.maps(), r, lambda, p, epsilon)
}

pub(crate) fn adaptive(
    maps: &TimeMaps<f64>,
    r: f64,
    lambda: f64,
    p: f64,
    epsilon: f64,
) -> Result<PhiLandscape> {
    let mut eps = epsilon;
    let mut halvings = 0;
    let mut first_err = None;
    loop {
        match build(maps, r, lambda, p, eps) {
            Ok(l) => return Ok(l),
            Err(Error::LandscapeNotMonotone { lo, hi }) => {
                first_err.get_or_insert(Error::LandscapeNotMonotone { lo, hi });
                if 0.5 * (lo + hi) > FRAC_PI_4 {
                    if 2.0 * eps >= FRAC_PI_4 {
                        break;
                    }
                    eps *= 2.0;
                } else {
                    if halvings == MAX_HALVINGS {
                        break;
                    }
                    halvings += 1;
                    eps /= 2.0;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(first_err.expect("loop exits only after a monotonicity failure"))
}

pub(crate) fn build(
    maps: &TimeMaps<f64>,
    r: f64,
    lambda: f64,
    p: f64,
    epsilon: f64,
) -> Result<PhiLandscape> {
    if !(lambda > 0.0) {
        return domain(format!("the phi landscape needs lambda > 0, got {lambda}"));
    }
    if !(epsilon > 0.0 && epsilon < FRAC_PI_4) {
        return domain(format!("epsilon must lie in (0, pi/4), got {epsilon}"));
    }
    let phi = |t: f64| maps.phi(r, t, lambda, p);

    // Rising middle.
    let mid = grid(epsilon, FRAC_PI_2 - epsilon, MIDDLE_SAMPLES);
    let mut prev = phi(mid[0])?;
    for w in mid.windows(2) {
        let next = phi(w[1])?;
        if !(next > prev) {
            return Err(Error::LandscapeNotMonotone { lo: w[0], hi: w[1] });
        }
        prev = next;
    }
    let phi_top_of_middle = prev;

    // Left band: a single minimum, possibly at an end.
    let left = grid(0.0, epsilon, BAND_SAMPLES);
    let left_vals = left.iter().map(|&t| phi(t)).collect::<Result<Vec<_>>>()?;
    let i_min = argmin(&left_vals);
    check_unimodal(&left_vals, i_min, false).map_err(|k| {
        Error::MultiPeak(format!(
            "phi has several minima on [0, {epsilon}] near theta = {:.6}",
            left[k]
        ))
    })?;
    let theta_m = if i_min == 0 || i_min + 1 == left.len() {
        left[i_min]
    } else {
        golden_min(&phi, left[i_min - 1], left[i_min + 1])?
    };
    let phi_m = phi(theta_m)?;

    // Right band: a single maximum strictly inside.
    let right = grid(FRAC_PI_2 - epsilon, FRAC_PI_2, BAND_SAMPLES);
    let right_vals = right.iter().map(|&t| phi(t)).collect::<Result<Vec<_>>>()?;
    let i_max = argmax(&right_vals);
    if i_max == 0 {
        // Still falling at π/2 − ε: the peak is inside the middle.
        return Err(Error::LandscapeNotMonotone {
            lo: right[0],
            hi: right[1],
        });
    }
    check_unimodal(&right_vals, i_max, true).map_err(|k| {
        Error::MultiPeak(format!(
            "phi has several maxima on [{:.6}, pi/2] near theta = {:.6}",
            FRAC_PI_2 - epsilon,
            right[k]
        ))
    })?;
    let dphi = |t: f64| maps.phi_dtheta(r, t, lambda, p);
    let theta_peak = brent(
        dphi,
        right[i_max - 1],
        right[i_max + 1],
        &RootConfig {
            x_tol: 1e-14,
            ..RootConfig::default()
        },
    )?;
    let phi_peak = phi(theta_peak)?;
    if !(phi_peak >= phi_top_of_middle && phi_top_of_middle > phi_m) {
        return Err(Error::LandscapeNotMonotone {
            lo: FRAC_PI_2 - epsilon,
            hi: theta_peak,
        });
    }

    let theta_bar = brent(
        |t| Ok(phi(t)? - phi_m),
        theta_peak,
        FRAC_PI_2,
        &RootConfig {
            x_tol: 1e-15,
            ..RootConfig::default()
        },
    )?;

    Ok(PhiLandscape {
        r,
        epsilon,
        theta_m,
        phi_m,
        theta_peak,
        phi_peak,
        theta_bar,
    })
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, k| if v[k] < v[best] { k } else { best })
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, k| if v[k] > v[best] { k } else { best })
}

/// Checks that `v` is monotone on each side of `k` (rising then falling for
/// a peak, falling then rising for a valley). Returns the first offending
/// index.
fn check_unimodal(v: &[f64], k: usize, peak: bool) -> std::result::Result<(), usize> {
    let up = |a: f64, b: f64| if peak { b >= a } else { b <= a };
    for j in 0..k {
        if !up(v[j], v[j + 1]) {
            return Err(j);
        }
    }
    for j in k..v.len() - 1 {
        if up(v[j], v[j + 1]) && v[j] != v[j + 1] {
            return Err(j);
        }
    }
    Ok(())
}

fn golden_min<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// The two angles where `φ(R, ·)` takes the value `level`, one on each side
/// of the peak. At the ends of `[φ_m, φ_M]` they are `(θ_m, θ̄)` and
/// `(θ_M, θ_M)`.
pub fn climb_pair(landscape: &PhiLandscape, level: f64, lambda: f64, p: f64) -> Result<(f64, f64)> {
    climb(&SolverConfig::default().maps(), landscape, level, lambda, p)
}

pub(crate) fn climb(
    maps: &TimeMaps<f64>,
    l: &PhiLandscape,
    level: f64,
    lambda: f64,
    p: f64,
) -> Result<(f64, f64)> {
    if !(level >= l.phi_m && level <= l.phi_peak) {
        return domain(format!(
            "level {level} outside [phi_m, phi_M] = [{}, {}]",
            l.phi_m, l.phi_peak
        ));
    }
    if level == l.phi_peak {
        return Ok((l.theta_peak, l.theta_peak));
    }
    if level == l.phi_m {
        return Ok((l.theta_m, l.theta_bar));
    }
    let f = |t: f64| Ok(maps.phi(l.r, t, lambda, p)? - level);
    let cfg = RootConfig {
        x_tol: 1e-15,
        f_tol: 1e-13 * level.abs().max(1.0),
        ..RootConfig::default()
    };
    let side = |a: f64, b: f64, rising: bool| -> Result<f64> {
        let (fa, fb) = (f(a)?, f(b)?);
        let ok = if rising {
            fa <= 0.0 && fb >= 0.0
        } else {
            fa >= 0.0 && fb <= 0.0
        };
        if !ok {
            return Err(Error::MultiPeak(format!(
                "level {level} not bracketed by the {} branch [{a}, {b}]",
                if rising { "rising" } else { "falling" }
            )));
        }
        let t = brent(f, a, b, &cfg)?;
        // A second crossing on the same branch would mean a hidden extremum.
        let probe = |s: f64| f(t + s * (b - a) * 1e-3);
        if t - (b - a) * 1e-3 > a && t + (b - a) * 1e-3 < b {
            let (lo, hi) = (probe(-1.0)?, probe(1.0)?);
            let monotone = if rising {
                lo < 0.0 && hi > 0.0
            } else {
                lo > 0.0 && hi < 0.0
            };
            if !monotone {
                return Err(Error::MultiPeak(format!(
                    "phi not monotone near theta = {t}"
                )));
            }
        }
        Ok(t)
    };
    let left = side(l.theta_m, l.theta_peak, true)?;
    let right = side(l.theta_peak, l.theta_bar, false)?;
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timemaps::phi;

    #[test]
    fn large_r_landscape_has_the_expected_shape() {
        let l = phi_landscape_adaptive(300.0, 6.0, 3.0, 0.05).unwrap();
        assert!(l.theta_m >= 0.0 && l.theta_m <= l.epsilon);
        assert!(l.theta_peak >= FRAC_PI_2 - l.epsilon && l.theta_peak < FRAC_PI_2);
        assert!(l.theta_bar > l.theta_peak && l.theta_bar < FRAC_PI_2);
        let at_edge = phi(300.0, FRAC_PI_2 - l.epsilon, 6.0, 3.0).unwrap();
        assert!(l.phi_peak >= at_edge && at_edge > l.phi_m);
        assert!((phi(300.0, l.theta_bar, 6.0, 3.0).unwrap() - l.phi_m).abs() < 1e-9);
    }

    #[test]
    fn fixed_small_epsilon_misses_the_peak_at_r_300() {
        assert!(matches!(
            phi_landscape(300.0, 6.0, 3.0, 0.05),
            Err(Error::LandscapeNotMonotone { .. })
        ));
    }

    #[test]
    fn small_r_is_rejected() {
        assert!(matches!(
            phi_landscape_adaptive(4.0, 6.0, 3.0, 0.05),
            Err(Error::LandscapeNotMonotone { .. })
        ));
    }

    #[test]
    fn climb_pair_ends_and_middle() {
        let l = phi_landscape_adaptive(300.0, 6.0, 3.0, 0.05).unwrap();
        let (a, b) = climb_pair(&l, l.phi_peak * (1.0 - 1e-12), 6.0, 3.0).unwrap();
        assert!((a - l.theta_peak).abs() < 1e-4 && (b - l.theta_peak).abs() < 1e-4);
        let (a, b) = climb_pair(&l, l.phi_m * (1.0 + 1e-12), 6.0, 3.0).unwrap();
        assert!((a - l.theta_m).abs() < 1e-3 && (b - l.theta_bar).abs() < 1e-6);
        let level = 0.5 * (l.phi_m + l.phi_peak);
        let (a, b) = climb_pair(&l, level, 6.0, 3.0).unwrap();
        assert!(a < l.theta_peak && b > l.theta_peak);
        let fa = phi(300.0, a, 6.0, 3.0).unwrap();
        let fb = phi(300.0, b, 6.0, 3.0).unwrap();
        assert!((fa - fb).abs() < 1e-10 && (fa - level).abs() < 1e-10);
        assert!(climb_pair(&l, l.phi_peak * 1.01, 6.0, 3.0).is_err());
    }
}
