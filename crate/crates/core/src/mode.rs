//! Parameters of the variational problem.
//!
//! A mode fixes the interval half-length `R`, the symmetry constant `β` and
//! the coefficients `c0`, `c1` of the functional; the Euler–Lagrange
//! coefficient `c = -c0/c1` and the exponent `φ_c = (1 + √(1 − 4c))/2`
//! follow from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeTag {
    /// `c = -1`, `β = 1`, `θR = √(3/5)`, linear mollifier.
    Special,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    #[serde(rename = "R")]
    pub r: f64,
    pub theta: f64,
    pub beta: f64,
    pub c: f64,
    pub c0: f64,
    pub c1: f64,
    pub phi_c: f64,
    pub tag: ModeTag,
    /// `c0 < 0`: the functional may not be convex, so the stationary
    /// solution is not claimed to be a minimizer.
    pub non_convex: bool,
}

/// `R = √(3/5)/θ`, the length at which `c0 = c1` for the linear mollifier.
pub fn special_r(theta: f64) -> f64 {
    (0.6f64).sqrt() / theta
}

fn phi_of(c: f64) -> f64 {
    0.5 * (1.0 + (1.0 - 4.0 * c).sqrt())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {x}")))
    }
}

impl ModeParams {
    pub fn special(theta: f64) -> Result<Self> {
        positive("theta", theta)?;
        let c01 = 4.0 / (5.0 * theta);
        Ok(Self {
            r: special_r(theta),
            theta,
            beta: 1.0,
            c: -1.0,
            c0: c01,
            c1: c01,
            phi_c: phi_of(-1.0),
            tag: ModeTag::Special,
            non_convex: false,
        })
    }

    /// General mode from the mollifier moments `B = ∫P²`, `C = ∫P'²`.
    pub fn general(theta: f64, r: f64, beta: f64, b: f64, c_moment: f64) -> Result<Self> {
        positive("theta", theta)?;
        positive("R", r)?;
        positive("B", b)?;
        positive("C", c_moment)?;
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
        }
        let c0 = c_moment / theta - theta * b * r * r;
        let c1 = 4.0 * theta * b * r * r;
        let c = -c0 / c1;
        if !(c < 0.25) {
            return Err(Error::InvalidParameter(format!("c = {c} must be below 1/4")));
        }
        Ok(Self {
            r,
            theta,
            beta,
            c,
            c0,
            c1,
            phi_c: phi_of(c),
            tag: ModeTag::General,
            non_convex: c0 < 0.0,
        })
    }

    /// General mode with the linear mollifier whose `θ` produces the
    /// requested Euler–Lagrange coefficient `c` at length `R`.
    pub fn from_ode(r: f64, c: f64, beta: f64) -> Result<Self> {
        positive("R", r)?;
        if !(c < 0.25) {
            return Err(Error::InvalidParameter(format!("c = {c} must be below 1/4")));
        }
        let theta = 3f64.sqrt() / (r * (1.0 - 4.0 * c).sqrt());
        let mut m = Self::general(theta, r, beta, 1.0 / 3.0, 1.0)?;
        // keep the requested c exactly rather than its round trip
        m.c = c;
        m.phi_c = phi_of(c);
        Ok(m)
    }

    /// `√(1 − 4c) = 2φ_c − 1`, the gap between the growing and decaying
    /// exponents of the homogeneous equation.
    pub fn root_gap(&self) -> f64 {
        (1.0 - 4.0 * self.c).sqrt()
    }

    /// Mollifier moments `(B, C)` recovered from `c0`, `c1`, `θ`, `R`.
    pub fn moments(&self) -> (f64, f64) {
        let b = self.c1 / (4.0 * self.theta * self.r * self.r);
        let c = self.theta * (self.c0 + 0.25 * self.c1);
        (b, c)
    }

    /// Exponent of the growing homogeneous solution, `φ_c − 1`.
    pub fn growth_rate(&self) -> f64 {
        self.phi_c - 1.0
    }
}

pub fn make_mode_special(theta: f64) -> Result<ModeParams> {
    ModeParams::special(theta)
}

pub fn make_mode_general(theta: f64, r: f64, beta: f64, b: f64, c_moment: f64) -> Result<ModeParams> {
    ModeParams::general(theta, r, beta, b, c_moment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_mode_fields() {
        let m = ModeParams::special(0.6f64.sqrt() / 5.0).unwrap();
        assert!((m.r - 5.0).abs() < 1e-14);
        let m = ModeParams::special(0.5).unwrap();
        assert!((m.r - 1.549_193_338_482_966_8).abs() < 1e-15);
        assert_eq!(m.c0, m.c1);
        assert!((m.c0 - 1.6).abs() < 1e-15);
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        assert!((m.phi_c - phi).abs() < 1e-15);
        assert!((m.phi_c * (m.phi_c - 1.0) + m.c).abs() < 1e-15);
    }

    #[test]
    fn general_reduces_to_special() {
        for theta in [0.5, 0.25, 1.0 / 6.0, 0.01] {
            let s = ModeParams::special(theta).unwrap();
            let g = ModeParams::general(theta, special_r(theta), 1.0, 1.0 / 3.0, 1.0).unwrap();
            assert!((g.c - s.c).abs() < 1e-13);
            assert!((g.c0 - s.c0).abs() < 1e-12 * s.c0);
            assert!((g.c1 - s.c1).abs() < 1e-12 * s.c1);
            assert!((g.phi_c - s.phi_c).abs() < 1e-13);
        }
    }

    #[test]
    fn general_arithmetic() {
        let g = ModeParams::general(0.1, 10.0, 1.0, 1.0 / 3.0, 1.0).unwrap();
        assert!((g.c0 - 20.0 / 3.0).abs() < 1e-13);
        assert!((g.c1 - 40.0 / 3.0).abs() < 1e-13);
        assert!((g.c + 0.5).abs() < 1e-15);
        assert!((g.phi_c - 0.5 * (1.0 + 3f64.sqrt())).abs() < 1e-15);
        assert!(!g.non_convex);
    }

    #[test]
    fn moments_round_trip() {
        let g = ModeParams::general(0.13, 4.2, 0.9, 0.31, 1.07).unwrap();
        let (b, c) = g.moments();
        assert!((b - 0.31).abs() < 1e-14 && (c - 1.07).abs() < 1e-14);
        let (b, c) = ModeParams::special(0.3).unwrap().moments();
        assert!((b - 1.0 / 3.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_convex_flag() {
        // c0 < 0 once θ²BR² exceeds C
        let g = ModeParams::general(1.0, 3.0, 1.0, 1.0 / 3.0, 1.0).unwrap();
        assert!(g.c0 < 0.0 && g.non_convex);
        assert!(g.c > 0.0 && g.c < 0.25);
    }

    #[test]
    fn from_ode_hits_requested_c() {
        for c in [-1.0, -0.5, 0.1, -3.3] {
            let m = ModeParams::from_ode(4.0, c, 0.8).unwrap();
            assert!((-m.c0 / m.c1 - c).abs() < 1e-12);
            assert_eq!(m.beta, 0.8);
        }
        let m = ModeParams::from_ode(5.0, -1.0, 1.0).unwrap();
        let s = ModeParams::special(0.6f64.sqrt() / 5.0).unwrap();
        assert!((m.theta - s.theta).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ModeParams::special(0.0).is_err());
        assert!(ModeParams::general(0.1, -1.0, 1.0, 1.0 / 3.0, 1.0).is_err());
        assert!(ModeParams::general(0.1, 1.0, f64::NAN, 1.0 / 3.0, 1.0).is_err());
        assert!(ModeParams::from_ode(1.0, 0.3, 1.0).is_err());
    }
}
