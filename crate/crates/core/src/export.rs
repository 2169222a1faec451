//! Serialized forms of solutions. Every float is written with 17
//! significant digits, so output round-trips and is byte-for-byte
//! reproducible.

use serde::{Deserialize, Serialize};
use std::io;

use crate::model::{PositiveSolution, Symmetry};
use crate::solvers::{residual_scale, FIXED_POINT_TOL, SHOOT_TOL};

/// Formats `x` with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub lambda: f64,
    pub p: f64,
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub shoot: f64,
    pub fixed_point: f64,
    pub shoot_threshold: f64,
    pub fixed_point_threshold: f64,
}

/// Whether either residual is over its amplitude-scaled threshold.
pub fn residuals_exceed(shoot: f64, fixed_point: f64, r_max: f64) -> bool {
    let scale = residual_scale(r_max);
    !(shoot < SHOOT_TOL * scale && fixed_point < FIXED_POINT_TOL * scale)
}

/// The exported summary of one solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub params: ParamsRecord,
    pub v0: f64,
    pub r_max: f64,
    pub x_max: f64,
    pub symmetry: Symmetry,
    pub residuals: Residuals,
    /// Set when a residual exceeds its threshold.
    pub warn: bool,
    /// Where the trajectory samples were written, if anywhere.
    pub samples: Option<String>,
}

impl SolutionRecord {
    pub fn new(sol: &PositiveSolution<f64>, samples: Option<String>) -> Self {
        let scale = residual_scale(sol.r_max);
        let residuals = Residuals {
            shoot: sol.shoot_residual,
            fixed_point: sol.fixed_point_residual,
            shoot_threshold: SHOOT_TOL * scale,
            fixed_point_threshold: FIXED_POINT_TOL * scale,
        };
        Self {
            params: ParamsRecord {
                lambda: sol.params.lambda(),
                p: sol.params.p(),
                h: sol.params.h(),
            },
            v0: sol.v0,
            r_max: sol.r_max,
            x_max: sol.x_max,
            symmetry: sol.symmetry,
            warn: residuals_exceed(sol.shoot_residual, sol.fixed_point_residual, sol.r_max),
            residuals,
            samples,
        }
    }
}

/// Compact JSON with floats at 17 significant digits; non-finite floats
/// become `null`.
struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(num(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// Serializes `value` as one line of JSON.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemParams;
    use crate::solvers::solve_symmetric;

    #[test]
    fn floats_have_seventeen_digits_and_round_trip() {
        let s = to_json(&[0.1_f64, 1.0 / 3.0, f64::NAN]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,3.3333333333333331e-1,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[1], Some(1.0 / 3.0));
    }

    #[test]
    fn record_of_a_verified_solution() {
        let sol = solve_symmetric(&ProblemParams::new(-1.0, 3.0, 0.5).unwrap()).unwrap();
        let r = SolutionRecord::new(&sol, Some("traj.csv".into()));
        assert!(!r.warn);
        let json = to_json(&r).unwrap();
        assert!(json.contains("\"symmetry\":\"symmetric\""));
        let back: SolutionRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn warn_flag() {
        let mut sol = solve_symmetric(&ProblemParams::new(0.0, 3.0, 0.5).unwrap()).unwrap();
        sol.fixed_point_residual = 1.0;
        assert!(SolutionRecord::new(&sol, None).warn);
    }
}
