//! `Q_R(y)` on `[0, 1]` rebuilt from `S_R`, its step-function limit, and
//! the closed forms of the leading asymptotic constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp2f1::{gamma_real, hyp2f1_neg_scaled, EvalConfig};
use crate::mode::ModeParams;
use crate::quad::QuadConfig;
use crate::varsol::Solution;

/// The pointwise limit `Q∞`: 1 below 1/2, 1/2 at 1/2, 0 above.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepFunction;

impl StepFunction {
    pub fn value(&self, y: f64) -> f64 {
        if y < 0.5 {
            1.0
        } else if y == 0.5 {
            0.5
        } else {
            0.0
        }
    }
}

fn check_y(y: f64) -> Result<()> {
    if (0.0..=1.0).contains(&y) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("y = {y} outside [0, 1]")))
    }
}

/// `Q(y) = S(2R(y − 1/2))` for `y ≥ 1/2`, `β − S(2R(1/2 − y))` below.
pub fn q_from_solution(sol: &Solution, y: f64) -> Result<f64> {
    check_y(y)?;
    let r = sol.mode.r;
    let tau = (2.0 * r * (y - 0.5).abs()).min(r);
    let s = sol.s_value(tau)?;
    Ok(if y >= 0.5 { s } else { sol.mode.beta - s })
}

/// `Q_R(y)` in special mode with `θ = √(3/5)/R`.
pub fn q_value(r: f64, y: f64, cfg: &QuadConfig) -> Result<f64> {
    let sol = special_solution(r, cfg)?;
    q_from_solution(&sol, y)
}

fn special_solution(r: f64, cfg: &QuadConfig) -> Result<Solution> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("R = {r} must be positive")));
    }
    let mode = ModeParams::special(0.6f64.sqrt() / r)?;
    Solution::new(&mode, cfg)
}

/// `Q_R(y0)` for each `R`, in order.
pub fn step_limit_scan(y0: f64, r_list: &[f64], cfg: &QuadConfig) -> Result<Vec<f64>> {
    check_y(y0)?;
    if r_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("R list must be strictly increasing".into()));
    }
    r_list
        .iter()
        .map(|&r| q_from_solution(&special_solution(r, cfg)?, y0))
        .collect()
}

/// `max |S_R(t)| e^{−(φ−1)t}` over `n + 1` equispaced points of `[0, R]`.
pub fn growth_envelope(sol: &Solution, n: usize) -> Result<f64> {
    let r = sol.mode.r;
    let lam = sol.basis().lambda;
    let mut worst = 0.0f64;
    for i in 0..=n {
        let t = r * i as f64 / n as f64;
        worst = worst.max(sol.s_value(t)?.abs() * (-lam * t).exp());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    /// `Γ(1 + √5/2) Γ(√5/2) / Γ(φ)²`.
    pub gamma_ratio: f64,
    /// `csc(√5 π/2)`.
    pub csc: f64,
    /// Point at which the measured limits are taken.
    pub t: f64,
    /// `F⁺(t) e^t`.
    pub fp_measured: f64,
    /// `F⁻(t) e^{−(√5−1)t}`.
    pub fm_measured: f64,
}

impl AsymptoticConstants {
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("gamma_ratio", self.gamma_ratio),
            ("csc", self.csc),
            ("fp_measured", self.fp_measured),
            ("fm_measured", self.fm_measured),
        ]
    }
}

pub fn asymptotic_constants() -> Result<AsymptoticConstants> {
    asymptotic_constants_at(30.0)
}

pub fn asymptotic_constants_at(t: f64) -> Result<AsymptoticConstants> {
    let s5 = 5f64.sqrt();
    let phi = 0.5 * (1.0 + s5);
    let g = gamma_real(1.0 + s5 / 2.0)? * gamma_real(s5 / 2.0)? / gamma_real(phi)?.powi(2);
    let csc = 1.0 / (s5 * std::f64::consts::PI / 2.0).sin();
    let cfg = EvalConfig::default();
    // the scaled evaluations are F·e^{2t·min(a,b)}; min is 1/2 and 1 − φ
    let fp_measured = hyp2f1_neg_scaled(0.5, phi, 0.5 + phi, t, &cfg)?;
    let fm_measured = hyp2f1_neg_scaled(0.5, 1.0 - phi, 1.5 - phi, t, &cfg)?;
    Ok(AsymptoticConstants {
        gamma_ratio: g,
        csc,
        t,
        fp_measured,
        fm_measured,
    })
}
