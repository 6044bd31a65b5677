//! The moment constant `c(P, Q, R)` and the proportion
//! `κ = 1 − ln c(P, Q, R) / R`.
//!
//! Logarithms are assembled as `ln c = R + ln(c e^{−R})` with the `e^R`
//! factored out before any exponential is formed, so κ stays finite for
//! lengths where `c` itself would overflow.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::{ModeParams, ModeTag};
use crate::profile::SolutionProfile;
use crate::quad::{integrate, QuadConfig};
use crate::varsol::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MollifierKind {
    /// `P(x) = x`.
    Linear,
    /// `P(x) = sinh(rx)/sinh(r)`.
    Sinh { r: f64 },
    Custom,
}

/// The mollifier side of the functional: `B = ∫₀¹P²`, `C = ∫₀¹P'²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub kind: MollifierKind,
    pub b: f64,
    pub c: f64,
}

impl MollifierSpec {
    pub fn linear() -> Self {
        Self {
            kind: MollifierKind::Linear,
            b: 1.0 / 3.0,
            c: 1.0,
        }
    }

    pub fn sinh(r: f64) -> Result<Self> {
        let (b, c) = sinh_moments(r)?;
        Ok(Self {
            kind: MollifierKind::Sinh { r },
            b,
            c,
        })
    }

    pub fn custom(b: f64, c: f64) -> Result<Self> {
        if !(b > 0.0 && c > 0.0 && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mollifier moments must be positive, got B = {b}, C = {c}"
            )));
        }
        Ok(Self {
            kind: MollifierKind::Custom,
            b,
            c,
        })
    }

    /// `θR` at which the Euler–Lagrange coefficient is `c = −1`.
    pub fn balanced_theta_r(&self) -> f64 {
        (self.c / (5.0 * self.b)).sqrt()
    }
}

impl fmt::Display for MollifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MollifierKind::Linear => write!(f, "linear"),
            MollifierKind::Sinh { r } => write!(f, "sinh:{r}"),
            MollifierKind::Custom => write!(f, "custom:{}:{}", self.b, self.c),
        }
    }
}

impl std::str::FromStr for MollifierSpec {
    type Err = Error;

    /// `linear`, `sinh:<r>` or `custom:<B>:<C>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognised mollifier '{s}'"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["linear"] => Ok(Self::linear()),
            ["sinh", r] => Self::sinh(num(r)?),
            ["custom", b, c] => Self::custom(num(b)?, num(c)?),
            _ => Err(bad()),
        }
    }
}

fn sinh_moments(r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidR(r));
    }
    let b = if r < 0.1 {
        let r2 = r * r;
        1.0 / 3.0 + r2 * (-2.0 / 45.0 + r2 * (2.0 / 315.0 + r2 * (-4.0 / 4725.0 + r2 * 2.0 / 18711.0)))
    } else {
        let csch = 1.0 / r.sinh();
        (1.0 / r.tanh() - r * csch * csch) / (2.0 * r)
    };
    let csch = 1.0 / r.sinh();
    let c = 0.5 * r * csch * (r.cosh() + r * csch);
    Ok((b, c))
}

pub fn mollifier_moments(spec: &MollifierSpec) -> Result<(f64, f64)> {
    match spec.kind {
        MollifierKind::Linear => Ok((1.0 / 3.0, 1.0)),
        MollifierKind::Sinh { r } => sinh_moments(r),
        MollifierKind::Custom => Ok((spec.b, spec.c)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub theta: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub beta: f64,
    /// `c(P, Q, R)`; infinite when it overflows, in which case `ln_c` is
    /// still exact.
    pub c_pqr: f64,
    pub ln_c: f64,
    pub kappa: f64,
    pub mode_tag: ModeTag,
    pub mollifier: String,
}

impl KappaResult {
    fn new(mode: &ModeParams, ln_c: f64, mollifier: String) -> Self {
        Self {
            theta: mode.theta,
            r: mode.r,
            beta: mode.beta,
            c_pqr: ln_c.exp(),
            ln_c,
            kappa: 1.0 - ln_c / mode.r,
            mode_tag: mode.tag,
            mollifier,
        }
    }
}

fn checked_ln(r: f64, scaled: f64) -> Result<f64> {
    if scaled > 0.0 && scaled.is_finite() {
        Ok(r + scaled.ln())
    } else {
        Err(Error::NonPositiveArgument(scaled))
    }
}

/// The bracket `1 − e^{−R} − S'(0) − ∫₀ᴿ e^{−t} S dt` of the special mode.
pub fn special_bracket(sol: &Solution) -> Result<f64> {
    let r = sol.mode.r;
    Ok(-(-r).exp_m1() - sol.s_prime_zero()? - sol.exp_weighted_integral()?.value)
}

/// `ln c(P, Q, R)` in special mode:
/// `c = 1/2 + (−1 + 2 e^R X)/√15` with `X` the special bracket.
pub fn ln_c_special(sol: &Solution) -> Result<f64> {
    let r = sol.mode.r;
    let x = special_bracket(sol)?;
    let s15 = 15f64.sqrt();
    checked_ln(r, 2.0 * x / s15 + (-r).exp() * (0.5 - 1.0 / s15))
}

pub fn c_pqr_special(theta: f64, cfg: &QuadConfig) -> Result<f64> {
    Ok(kappa_special(theta, cfg)?.c_pqr)
}

pub fn kappa_special(theta: f64, cfg: &QuadConfig) -> Result<KappaResult> {
    let mode = ModeParams::special(theta)?;
    let sol = Solution::new(&mode, cfg)?;
    let ln_c = ln_c_special(&sol)?;
    Ok(KappaResult::new(&mode, ln_c, MollifierSpec::linear().to_string()))
}

/// `ln c` from the value `K` of the functional at an admissible `S`:
/// `c = (1 + e^{2R}(β−1)²)/2 + c1 (e^R/2R)(e^R(1−β)² − e^{−R})/2 + (e^R/2R) K`.
pub fn ln_c_from_k(mode: &ModeParams, k: f64) -> Result<f64> {
    let r = mode.r;
    let bb = (mode.beta - 1.0).powi(2);
    let em = (-r).exp();
    let ep = r.exp();
    let scaled = 0.5 * (em + ep * bb) + mode.c1 / (2.0 * r) * 0.5 * (ep * bb - em) + k / (2.0 * r);
    checked_ln(r, scaled)
}

/// `K(S)` at the stationary solution:
/// `c0 β²(1−e^{−R}) − c1 β S'(0) + 2(β−1) c1 S'(R) cosh R − c0 β ∫₀ᴿ e^{−t} S`.
pub fn k_closed_form(sol: &Solution) -> Result<f64> {
    let m = &sol.mode;
    let beta = m.beta;
    let mut k = m.c0 * beta * beta * -(-m.r).exp_m1() - m.c1 * beta * sol.s_prime_zero()?
        - m.c0 * beta * sol.exp_weighted_integral()?.value;
    if beta != 1.0 {
        k += 2.0 * (beta - 1.0) * m.c1 * sol.s_prime_r()? * m.r.cosh();
    }
    Ok(k)
}

pub fn kappa_general_mode(mode: &ModeParams, mollifier: &str, cfg: &QuadConfig) -> Result<KappaResult> {
    let sol = Solution::new(mode, cfg)?;
    let ln_c = ln_c_from_k(mode, k_closed_form(&sol)?)?;
    Ok(KappaResult::new(mode, ln_c, mollifier.to_string()))
}

/// κ through the general functional. `r = None` picks the length at which
/// `c = −1`.
pub fn kappa_general(
    theta: f64,
    r: Option<f64>,
    beta: f64,
    spec: &MollifierSpec,
    cfg: &QuadConfig,
) -> Result<KappaResult> {
    let (b, c) = mollifier_moments(spec)?;
    let r = r.unwrap_or_else(|| spec.balanced_theta_r() / theta);
    let mode = ModeParams::general(theta, r, beta, b, c)?;
    kappa_general_mode(&mode, &spec.to_string(), cfg)
}

/// `ln c` by direct quadrature of
/// `c = 1/2 + e^{2R}(β−1)²/2 + ∫₀¹ ((C/θ) w² + θB w'²) dy`, `w = e^{Ry} Q`,
/// with `Q` rebuilt from `S` by reflection. Independent of the
/// integration-by-parts reductions; usable while `S` is accurate on all of
/// `[0, R]` (moderate R).
pub fn ln_c_direct(sol: &Solution, cfg: &QuadConfig) -> Result<f64> {
    let m = &sol.mode;
    let r = m.r;
    let beta = m.beta;
    let (b, c) = m.moments();
    let kq = c / m.theta;
    let kp = m.theta * b;
    let q = |y: f64| -> Result<(f64, f64)> {
        if y >= 0.5 {
            let (s, d) = sol.s_and_prime((2.0 * r * (y - 0.5)).min(r))?;
            Ok((s, 2.0 * r * d))
        } else {
            let (s, d) = sol.s_and_prime((2.0 * r * (0.5 - y)).min(r))?;
            Ok((beta - s, 2.0 * r * d))
        }
    };
    // integrand times e^{−2R}
    let f = |y: f64| match q(y) {
        Ok((qv, qd)) => {
            let e = (2.0 * r * (y - 1.0)).exp();
            e * (kq * qv * qv + kp * (r * qv + qd).powi(2))
        }
        Err(_) => f64::NAN,
    };
    let cfg = QuadConfig {
        initial_panels: 8,
        ..*cfg
    };
    let lo = integrate(f, 0.0, 0.5, &cfg)?.value;
    let hi = integrate(f, 0.5, 1.0, &cfg)?.value;
    let scaled = 0.5 * (-2.0 * r).exp() + 0.5 * (beta - 1.0).powi(2) + lo + hi;
    if !scaled.is_finite() {
        return Err(Error::NonPositiveArgument(scaled));
    }
    checked_ln(2.0 * r, scaled)
}

/// Romberg-refined trapezoid value of
/// `K(S) = ∫₀ᴿ e^t (c0 S² + c1 S'²) + e^{−t} (c0 (β − S)² + c1 S'²) dt`
/// on the profile grid, which must be uniform with a multiple of 4
/// intervals. Fails with `GridTooCoarse` if the refinement levels disagree
/// by more than `max(abs_tol, rel_tol·|K|)`.
pub fn k_functional_direct(profile: &SolutionProfile, mode: &ModeParams, cfg: &QuadConfig) -> Result<f64> {
    let n = profile.len() - 1;
    let t = &profile.grid;
    let s = &profile.values;
    let scale = 1e-9 * (1.0 + mode.beta.abs());
    if (s[0] - 0.5 * mode.beta).abs() > scale || (s[n] - (mode.beta - 1.0)).abs() > scale {
        return Err(Error::InvalidParameter(format!(
            "profile violates S(0) = β/2, S(R) = β − 1 (got {}, {})",
            s[0], s[n]
        )));
    }
    if (t[n] - mode.r).abs() > 1e-12 * mode.r || t[0] != 0.0 {
        return Err(Error::InvalidParameter("profile must cover [0, R]".into()));
    }
    let h = profile
        .uniform_step()
        .ok_or_else(|| Error::InvalidParameter("profile grid must be uniform".into()))?;
    if n % 4 != 0 {
        return Err(Error::InvalidParameter(format!("interval count {n} must be a multiple of 4")));
    }
    let d = profile.derivatives();
    let beta = mode.beta;
    let g: Vec<f64> = (0..=n)
        .map(|i| {
            let (sv, dv) = (s[i], d[i]);
            t[i].exp() * (mode.c0 * sv * sv + mode.c1 * dv * dv)
                + (-t[i]).exp() * (mode.c0 * (beta - sv).powi(2) + mode.c1 * dv * dv)
        })
        .collect();
    let trap = |stride: usize| {
        let mut acc = 0.5 * (g[0] + g[n]);
        let mut i = stride;
        while i < n {
            acc += g[i];
            i += stride;
        }
        acc * h * stride as f64
    };
    let (t1, t2, t4) = (trap(1), trap(2), trap(4));
    let r1 = t1 + (t1 - t2) / 3.0;
    let r2 = t2 + (t2 - t4) / 3.0;
    let value = r1 + (r1 - r2) / 15.0;
    let err = (r1 - r2).abs() / 15.0;
    if err > cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
        return Err(Error::GridTooCoarse(err));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_standard_mollifiers() {
        assert_eq!(mollifier_moments(&MollifierSpec::linear()).unwrap(), (1.0 / 3.0, 1.0));
        let (b, c) = sinh_moments(1e-3).unwrap();
        assert!((b - 1.0 / 3.0).abs() < 1e-6 && (c - 1.0).abs() < 1e-6);
        let (b, c) = sinh_moments(0.25).unwrap();
        // reference values by 30-digit quadrature of P² and P'²
        assert!((b - 0.330_580_152_081_666).abs() < 1e-14, "{b}");
        assert!((c - 1.000_085_781_763_3).abs() < 1e-12, "{c}");
        assert!(matches!(sinh_moments(0.0), Err(Error::InvalidR(_))));
        assert!(matches!(sinh_moments(-1.0), Err(Error::InvalidR(_))));
    }

    #[test]
    fn sinh_series_and_closed_form_meet() {
        for r in [0.05, 0.099] {
            let (bs, _) = sinh_moments(r).unwrap();
            let csch = 1.0 / f64::sinh(r);
            let bc = (1.0 / r.tanh() - r * csch * csch) / (2.0 * r);
            assert!((bs - bc).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn sinh_moments_match_quadrature() {
        let cfg = QuadConfig::with_tol(1e-14);
        for r in [0.25, 1.0, 3.0] {
            let (b, c) = sinh_moments(r).unwrap();
            let qb = integrate(|x| ((r * x).sinh() / r.sinh()).powi(2), 0.0, 1.0, &cfg).unwrap().value;
            let qc = integrate(|x| (r * (r * x).cosh() / r.sinh()).powi(2), 0.0, 1.0, &cfg).unwrap().value;
            assert!((b - qb).abs() < 1e-12 && (c - qc).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn mollifier_parsing() {
        assert_eq!("linear".parse::<MollifierSpec>().unwrap(), MollifierSpec::linear());
        let s: MollifierSpec = "sinh:0.25".parse().unwrap();
        assert_eq!(s.kind, MollifierKind::Sinh { r: 0.25 });
        assert_eq!(s.to_string(), "sinh:0.25");
        let c: MollifierSpec = "custom:0.3:1.1".parse().unwrap();
        assert_eq!((c.b, c.c), (0.3, 1.1));
        assert!("sinh".parse::<MollifierSpec>().is_err());
        assert!("sinh:-2".parse::<MollifierSpec>().is_err());
        assert!("custom:0:1".parse::<MollifierSpec>().is_err());
    }

    #[test]
    fn kappa_matches_defining_relation() {
        let k = kappa_special(0.25, &QuadConfig::default()).unwrap();
        assert!((k.kappa - (1.0 - k.c_pqr.ln() / k.r)).abs() < 1e-12);
        assert!((k.kappa - 0.176).abs() < 1e-3);
    }

    #[test]
    fn general_route_reduces_to_special() {
        let cfg = QuadConfig::default();
        for theta in [0.5, 0.25, 0.1] {
            let s = kappa_special(theta, &cfg).unwrap();
            let g = kappa_general(theta, None, 1.0, &MollifierSpec::linear(), &cfg).unwrap();
            assert!((s.kappa - g.kappa).abs() < 1e-8, "theta={theta}");
        }
    }

    #[test]
    fn direct_c_agrees_with_closed_form() {
        let cfg = QuadConfig::default();
        for theta in [0.5, 0.25] {
            let mode = ModeParams::special(theta).unwrap();
            let sol = Solution::new(&mode, &cfg).unwrap();
            let a = ln_c_special(&sol).unwrap();
            let b = ln_c_direct(&sol, &cfg).unwrap();
            assert!((a.exp() - b.exp()).abs() < 1e-7 * a.exp(), "theta={theta}: {a} vs {b}");
        }
        let mode = ModeParams::general(0.2, 3.0, 0.9, 0.33, 1.02).unwrap();
        let sol = Solution::new(&mode, &cfg).unwrap();
        let a = ln_c_from_k(&mode, k_closed_form(&sol).unwrap()).unwrap();
        let b = ln_c_direct(&sol, &cfg).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn direct_k_agrees_with_closed_form() {
        let cfg = QuadConfig::default();
        let mode = ModeParams::special(0.6f64.sqrt() / 5.0).unwrap();
        let sol = Solution::new(&mode, &cfg).unwrap();
        let p = sol.profile(4000).unwrap();
        let kd = k_functional_direct(&p, &mode, &QuadConfig::with_tol(1e-8)).unwrap();
        let kc = k_closed_form(&sol).unwrap();
        assert!((kd - kc).abs() < 1e-6 * kc.abs(), "{kd} vs {kc}");
    }

    #[test]
    fn direct_k_rejects_inadmissible_and_coarse() {
        let mode = ModeParams::special(0.3).unwrap();
        let n = 400;
        let grid: Vec<f64> = (0..=n).map(|i| mode.r * i as f64 / n as f64).collect();
        let zero = SolutionProfile::new(grid.clone(), vec![0.0; n + 1], None).unwrap();
        assert!(matches!(
            k_functional_direct(&zero, &mode, &QuadConfig::default()),
            Err(Error::InvalidParameter(_))
        ));
        let lin: Vec<f64> = grid.iter().map(|t| 0.5 - 0.5 * t / mode.r).collect();
        let p = SolutionProfile::new(grid, lin, None).unwrap();
        assert!(matches!(
            k_functional_direct(&p, &mode, &QuadConfig::with_tol(1e-16)),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn linear_comparison_function_is_worse() {
        let cfg = QuadConfig::default();
        for mode in [
            ModeParams::special(0.3).unwrap(),
            ModeParams::general(0.15, 3.0, 1.3, 1.0 / 3.0, 1.0).unwrap(),
        ] {
            let sol = Solution::new(&mode, &cfg).unwrap();
            let n = 4000;
            let opt = sol.profile(n).unwrap();
            let r = mode.r;
            let beta = mode.beta;
            let lin: Vec<f64> = opt.grid.iter().map(|t| beta / 2.0 + (beta / 2.0 - 1.0) * t / r).collect();
            let dl = vec![(beta / 2.0 - 1.0) / r; n + 1];
            let lp = SolutionProfile::new(opt.grid.clone(), lin, Some(dl)).unwrap();
            let loose = QuadConfig::with_tol(1e-6);
            let k_opt = k_functional_direct(&opt, &mode, &loose).unwrap();
            let k_lin = k_functional_direct(&lp, &mode, &loose).unwrap();
            assert!(k_lin > k_opt, "{k_lin} <= {k_opt}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn general_mode_reduces_to_special(theta in 0.005f64..0.7) {
            let cfg = QuadConfig::default();
            let s = kappa_special(theta, &cfg).unwrap();
            let g = kappa_general(theta, None, 1.0, &MollifierSpec::linear(), &cfg).unwrap();
            proptest::prop_assert!((s.kappa - g.kappa).abs() < 1e-10, "{} vs {}", s.kappa, g.kappa);
            proptest::prop_assert!((s.kappa - (1.0 - s.ln_c / s.r)).abs() < 1e-15);
        }
    }
}
