use proptest::prelude::*;

use mnlab::solvers::{count_by_symmetry, find_all_positive_with, solve_symmetric, ScanConfig};
use mnlab::{Params, Symmetry};

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    // Asymmetric solutions come in mirror pairs and exactly one solution is
    // symmetric.
    #[test]
    fn solutions_pair_up_under_reflection(lam in -30.0_f64..9.5, h in 0.15_f64..0.85) {
        let params = Params::new(lam, 3.0, h).unwrap();
        let all = find_all_positive_with(&params, &ScanConfig::default());
        let (sym, asym) = count_by_symmetry(&all);
        prop_assert_eq!(sym, 1);
        let left = all.iter().filter(|s| s.symmetry == Symmetry::AsymmetricLeft).count();
        prop_assert_eq!(2 * left, asym);
        let reference = solve_symmetric(&params).unwrap();
        let s = all.iter().find(|s| s.symmetry == Symmetry::Symmetric).unwrap();
        prop_assert!((s.v0 - reference.v0).abs() < 1e-7 * reference.v0.max(1.0));
        for s in all.iter().filter(|s| !s.symmetry.is_symmetric()) {
            let mirror = -s.terminal_slope();
            prop_assert!(all.iter().any(|t| (t.v0 - mirror).abs() < 1e-7 * mirror.max(1.0)));
            prop_assert!(s.interior_min() > 0.0);
        }
    }
}
