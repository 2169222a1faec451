use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use mnlab::quadrature::{beta_integral, integrate_endpoint_singular, QuadratureConfig};
use mnlab::solvers::{
    climb_pair, phi_landscape_adaptive, reflect, solve_matching, solve_symmetric, symmetric_slope,
    SolverConfig,
};
use mnlab::timemaps::{
    phi, phi_dtheta, time_l_from_ratio, time_l_hyperbolic, time_n_full, time_n_partial,
};
use mnlab::{Params, Symmetry};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn phi_vanishes_at_the_top(r in 0.1_f64..1e4, lam in 0.5_f64..9.0, p in 2.0_f64..6.0) {
        let v = phi(r, FRAC_PI_2, lam, p).unwrap();
        prop_assert!(v.abs() < 1e-12, "phi = {v}");
        prop_assert_eq!(phi_dtheta(r, FRAC_PI_2, lam, p).unwrap(), -2.0);
    }

    #[test]
    fn phi_is_bounded_by_the_linear_flow(r in 0.1_f64..1e3, theta in 0.0_f64..1.5, lam in 1.0_f64..9.0) {
        // The nonlinearity speeds up the crossing, so the nonlinear time
        // never exceeds the linear one.
        let v = phi(r, theta, lam, 3.0).unwrap();
        prop_assert!(v > 0.0);
        prop_assert!(v <= PI - 2.0 * theta + 1e-10);
    }

    #[test]
    fn full_time_map_decreases_in_amplitude(lam in -20.0_f64..9.0, u in 0.05_f64..50.0, k in 1.01_f64..3.0) {
        let lo = time_n_full(lam, 3.0, u);
        let hi = time_n_full(lam, 3.0, u * k);
        if let (Ok(lo), Ok(hi)) = (lo, hi) {
            prop_assert!(hi < lo, "T({u}) = {lo}, T({}) = {hi}", u * k);
        }
    }

    #[test]
    fn partial_time_is_monotone_in_the_level(lam in -5.0_f64..9.0, u0 in 1.0_f64..20.0, a in 0.05_f64..0.9, b in 0.05_f64..0.9) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-3);
        let t_lo = time_n_partial(lam, 3.0, u0, lo * u0);
        let t_hi = time_n_partial(lam, 3.0, u0, hi * u0);
        if let (Ok(t_lo), Ok(t_hi)) = (t_lo, t_hi) {
            prop_assert!(t_hi < t_lo);
            prop_assert!(t_hi >= 0.0);
        }
    }

    #[test]
    fn hyperbolic_time_depends_on_the_ratio_only(lam in -50.0_f64..-0.1, u in 0.01_f64..10.0, ratio in 1.001_f64..50.0, scale in 0.1_f64..10.0) {
        let a = time_l_hyperbolic(lam, u, u * ratio).unwrap();
        let b = time_l_hyperbolic(lam, u * scale, u * scale * ratio).unwrap();
        let c = time_l_from_ratio(lam, ratio).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
        prop_assert!((a - c).abs() < 1e-12 * a.max(1.0));
    }

    #[test]
    fn quadrature_of_a_square_root_singularity(a in -5.0_f64..5.0, w in 0.01_f64..10.0) {
        // ∫_a^{a+w} ds / √(a+w−s) = 2√w
        let b = a + w;
        let v = integrate_endpoint_singular(|s: f64| 1.0 / (b - s).sqrt(), a, b, &QuadratureConfig::default());
        if let Ok(v) = v {
            prop_assert!((v - 2.0 * w.sqrt()).abs() < 1e-9 * w.sqrt().max(1.0), "{v}");
        }
    }

    #[test]
    fn beta_integral_is_finite_and_decreasing(p in 1.1_f64..10.0) {
        let a = beta_integral(p).unwrap();
        let b = beta_integral(p + 0.5).unwrap();
        prop_assert!(a.is_finite() && a > 0.0);
        prop_assert!(b < a);
    }
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn symmetric_solutions_are_verified_and_even(lam in -30.0_f64..9.5, h in 0.1_f64..0.9) {
        let params = Params::new(lam, 3.0, h).unwrap();
        let sol = solve_symmetric(&params).unwrap();
        prop_assert_eq!(sol.symmetry, Symmetry::Symmetric);
        prop_assert!(sol.v0 > 0.0);
        prop_assert!(sol.interior_min() > 0.0);
        prop_assert!(sol.symmetry_defect() < 1e-6 * sol.r_max.max(1.0));
        prop_assert!((sol.x_max - 0.5).abs() < 1e-6 || lam < 0.0);
        prop_assert!(sol.energy_drift() < 1e-9);
        let slope = symmetric_slope(&params, &SolverConfig::default()).unwrap();
        prop_assert!((slope - sol.v0).abs() < 1e-9 * slope.max(1.0));
    }

    #[test]
    fn reflection_is_an_involution(lam in -20.0_f64..9.5, h in 0.1_f64..0.9) {
        let sol = solve_symmetric(&Params::new(lam, 3.0, h).unwrap()).unwrap();
        let back = reflect(&reflect(&sol));
        prop_assert_eq!(back.symmetry, sol.symmetry);
        prop_assert!((back.v0 - sol.v0).abs() <= 1e-12 * sol.v0);
        prop_assert!((back.x_max - sol.x_max).abs() <= 1e-12);
        prop_assert!((reflect(&sol).v0 + sol.terminal_slope()).abs() <= 1e-12 * sol.v0);
    }

    #[test]
    fn climbs_land_on_equal_phi(r in 100.0_f64..2000.0, t in 0.0_f64..1.0) {
        let l = phi_landscape_adaptive(r, 6.0, 3.0, 0.05).unwrap();
        let level = l.phi_m + t * (l.phi_peak - l.phi_m);
        let (a, b) = climb_pair(&l, level, 6.0, 3.0).unwrap();
        prop_assert!(a <= l.theta_peak && b >= l.theta_peak);
        let (fa, fb) = (phi(r, a, 6.0, 3.0).unwrap(), phi(r, b, 6.0, 3.0).unwrap());
        prop_assert!((fa - fb).abs() < 1e-10, "{fa} vs {fb}");
    }
}

#[test]
fn matching_is_symmetric_under_swapping_the_angles() {
    let m = solve_matching(6.0, 3.0, 300.0, 0.05).unwrap();
    let s = m.swapped();
    assert_abs_diff_eq!(s.h, m.h, epsilon = 1e-15);
    assert_eq!((s.theta0, s.theta1), (m.theta1, m.theta0));
    let (a, b) = m.residuals(6.0, 3.0).unwrap();
    let (c, d) = s.residuals(6.0, 3.0).unwrap();
    assert_abs_diff_eq!(a, c, epsilon = 1e-12);
    assert_abs_diff_eq!(b, d, epsilon = 1e-12);
}
