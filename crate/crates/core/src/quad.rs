//! Adaptive Gauss–Kronrod quadrature on finite intervals.
//!
//! Each panel is integrated with the 15-point Kronrod rule; the embedded
//! 7-point Gauss rule supplies the error estimate. The panel with the worst
//! error is bisected until the summed estimate meets
//! `max(abs_tol, rel_tol * |value|)`. Panel contributions are summed in
//! interval order, so results are deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to any one panel.
    pub max_depth: usize,
    pub initial_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_depth: 50,
            initial_panels: 1,
        }
    }
}

impl QuadConfig {
    /// Same config with both tolerances set to `tol`.
    pub fn with_tol(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_depth < 10 {
            return Err(Error::InvalidParameter(format!(
                "max_depth must be at least 10, got {}",
                self.max_depth
            )));
        }
        if self.initial_panels == 0 {
            return Err(Error::InvalidParameter(
                "initial_panels must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels_used: usize,
}

/// Result of integrating an `N`-vector valued integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResultN<const N: usize> {
    pub value: [f64; N],
    pub error_estimate: [f64; N],
    pub panels_used: usize,
}

// Kronrod abscissae on [0, 1]; odd indices are the Gauss-7 nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss–Kronrod 7/15 panel.
#[derive(Debug, Clone, Copy)]
pub struct Panel<const N: usize> {
    pub lo: f64,
    pub hi: f64,
    pub value: [f64; N],
    pub error: [f64; N],
    /// Error level below which refinement only chases rounding.
    pub floor: [f64; N],
    depth: usize,
}

/// Apply the 15-point Kronrod rule (and embedded 7-point Gauss rule) to
/// `[lo, hi]`.
pub fn gk15<const N: usize, F>(f: &F, lo: f64, hi: f64) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);

    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut res_abs = [0.0; N];
    let mut fvals: [([f64; N], [f64; N]); 7] = [([0.0; N], [0.0; N]); 7];

    for k in 0..N {
        kron[k] = fc[k] * WGK[7];
        gauss[k] = fc[k] * WG[3];
        res_abs[k] = (fc[k] * WGK[7]).abs();
    }
    for (j, slot) in fvals.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..N {
            let sum = f1[k] + f2[k];
            kron[k] += WGK[j] * sum;
            res_abs[k] += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * sum;
            }
        }
        *slot = (f1, f2);
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut floor = [0.0; N];
    for k in 0..N {
        let mean = kron[k] * 0.5;
        let mut res_asc = WGK[7] * (fc[k] - mean).abs();
        for (j, (f1, f2)) in fvals.iter().enumerate() {
            res_asc += WGK[j] * ((f1[k] - mean).abs() + (f2[k] - mean).abs());
        }
        let res_asc = res_asc * half.abs();
        let res_abs_k = res_abs[k] * half.abs();
        let mut err = ((kron[k] - gauss[k]) * half).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        let fl = 50.0 * f64::EPSILON * res_abs_k;
        if res_abs_k > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(fl);
        }
        value[k] = kron[k] * half;
        error[k] = err;
        floor[k] = fl;
    }
    Panel {
        lo,
        hi,
        value,
        error,
        floor,
        depth: 0,
    }
}

const MAX_PANELS: usize = 200_000;

/// Adaptive integration of a vector-valued integrand. Every component must
/// meet its own tolerance.
pub fn integrate_vec<const N: usize, F>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
) -> Result<QuadResultN<N>>
where
    F: Fn(f64) -> [f64; N],
{
    cfg.validate()?;
    if !(lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "integration bounds out of order: [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(QuadResultN {
            value: [0.0; N],
            error_estimate: [0.0; N],
            panels_used: 0,
        });
    }

    let n0 = cfg.initial_panels;
    let width = (hi - lo) / n0 as f64;
    let mut panels: Vec<Panel<N>> = (0..n0)
        .map(|i| {
            let a = lo + width * i as f64;
            let b = if i + 1 == n0 { hi } else { a + width };
            gk15(&f, a, b)
        })
        .collect();

    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        for p in &panels {
            for k in 0..N {
                total[k] += p.value[k];
                err[k] += p.error[k];
            }
        }
        let tol: [f64; N] = std::array::from_fn(|k| cfg.abs_tol.max(cfg.rel_tol * total[k].abs()));
        if (0..N).all(|k| err[k] <= tol[k]) {
            break;
        }

        // worst panel that is not already at its rounding floor
        let mut worst: Option<(usize, f64)> = None;
        for (i, p) in panels.iter().enumerate() {
            let score = (0..N)
                .filter(|&k| p.error[k] > 2.0 * p.floor[k])
                .map(|k| p.error[k] / tol[k])
                .fold(0.0, f64::max);
            if score > 0.0 && worst.map_or(true, |(_, s)| score > s) {
                worst = Some((i, score));
            }
        }
        let Some((idx, _)) = worst else {
            // nothing left to refine but rounding noise
            break;
        };

        let p = panels[idx];
        if p.depth >= cfg.max_depth || panels.len() >= MAX_PANELS {
            let (value, error) = finish(&mut panels);
            return Err(Error::DepthExceeded {
                max_depth: cfg.max_depth,
                value: value[0],
                error_estimate: 10.0 * error[0],
            });
        }
        let mid = 0.5 * (p.lo + p.hi);
        let mut left = gk15(&f, p.lo, mid);
        let mut right = gk15(&f, mid, p.hi);
        left.depth = p.depth + 1;
        right.depth = p.depth + 1;
        panels[idx] = left;
        panels.push(right);
    }

    let panels_used = panels.len();
    let (value, error_estimate) = finish(&mut panels);
    Ok(QuadResultN {
        value,
        error_estimate,
        panels_used,
    })
}

fn finish<const N: usize>(panels: &mut [Panel<N>]) -> ([f64; N], [f64; N]) {
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for p in panels.iter() {
        for k in 0..N {
            value[k] += p.value[k];
            error[k] += p.error[k];
        }
    }
    (value, error)
}

/// Adaptive integration of a scalar integrand over `[lo, hi]`.
pub fn integrate<F>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_vec(|x| [f(x)], lo, hi, cfg)?;
    Ok(QuadResult {
        value: r.value[0],
        error_estimate: r.error_estimate[0],
        panels_used: r.panels_used,
    })
}

/// Upper bound on `∫_U^∞ |f|` when `|f(u)| ≤ amplitude · e^{-decay_rate·u}`.
pub fn tail_bound(decay_rate: f64, amplitude: f64, u: f64) -> f64 {
    assert!(decay_rate > 0.0, "decay rate must be positive");
    amplitude * (-decay_rate * u).exp() / decay_rate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_on_unit_interval() {
        let r = integrate(|t| (-t).exp(), 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((r.value - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!(r.error_estimate >= 0.0);
    }

    #[test]
    fn kronrod_weights_are_normalised() {
        let s: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_is_exact_for_quintics() {
        let p = |x: f64| 3.0 - 2.0 * x + 0.5 * x.powi(2) + x.powi(3) - 4.0 * x.powi(4) + 1.5 * x.powi(5);
        let antider = |x: f64| {
            3.0 * x - x.powi(2) + x.powi(3) / 6.0 + x.powi(4) / 4.0 - 0.8 * x.powi(5) + 0.25 * x.powi(6)
        };
        let panel = gk15(&|x| [p(x)], -0.7, 1.3);
        let exact = antider(1.3) - antider(-0.7);
        assert!((panel.value[0] - exact).abs() < 1e-14);
        // the Gauss-7 half is exact too, so the estimate sits on the rounding floor
        assert!(panel.error[0] <= 1e-12);
    }

    #[test]
    fn high_degree_exactness_of_kronrod_rule() {
        // degree 22 is the Kronrod-15 limit
        let panel = gk15(&|x: f64| [x.powi(22)], -1.0, 1.0);
        assert!((panel.value[0] - 2.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn additivity() {
        let f = |x: f64| (3.0 * x).sin() * (-0.2 * x).exp();
        let cfg = QuadConfig::default();
        let ac = integrate(f, 0.0, 7.0, &cfg).unwrap();
        let ab = integrate(f, 0.0, 2.5, &cfg).unwrap();
        let bc = integrate(f, 2.5, 7.0, &cfg).unwrap();
        let diff = (ac.value - ab.value - bc.value).abs();
        assert!(diff <= ac.error_estimate + ab.error_estimate + bc.error_estimate + 1e-15);
    }

    #[test]
    fn refinement_does_not_hurt() {
        let set: [(fn(f64) -> f64, f64, f64, f64); 3] = [
            (|x| 1.0 / (1.0 + x * x), 0.0, 10.0, 10f64.atan()),
            (|x| x.sqrt(), 0.0, 1.0, 2.0 / 3.0),
            (|x| (x * x).cos(), 0.0, 3.0, 0.702_863_557_730_269),
        ];
        for (f, a, b, exact) in set {
            let mut prev = f64::INFINITY;
            for k in 4..10 {
                let tol = 10f64.powi(-k);
                let r = integrate(f, a, b, &QuadConfig::with_tol(tol)).unwrap();
                let err = (r.value - exact).abs();
                assert!(err <= prev.max(1e-15) * 1.0001, "tol {tol}: {err} after {prev}");
                assert!(err <= 10.0 * tol.max(1e-15));
                prev = err;
            }
        }
    }

    #[test]
    fn depth_limit_is_reported_with_best_value() {
        let cfg = QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_depth: 10,
            initial_panels: 1,
        };
        let r = integrate(|x: f64| if x < 0.3 { 0.0 } else { 1.0 }, 0.0, 1.0, &cfg);
        match r {
            Err(Error::DepthExceeded { value, error_estimate, .. }) => {
                assert!((value - 0.7).abs() < 1e-2);
                assert!(error_estimate > 0.0);
            }
            other => panic!("expected DepthExceeded, got {other:?}"),
        }
    }

    #[test]
    fn empty_and_reversed_intervals() {
        let cfg = QuadConfig::default();
        assert_eq!(integrate(|x| x, 2.0, 2.0, &cfg).unwrap().value, 0.0);
        assert!(integrate(|x| x, 2.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn tail_bound_values() {
        assert!((tail_bound(1.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
        let rate = (3.0 - 5f64.sqrt()) / 2.0;
        let b = tail_bound(rate, 1.3, 60.0);
        assert!((b - 1.3 * (-rate * 60.0).exp() / rate).abs() < 1e-24);
        assert!(b < 4e-10 && b > 3.5e-10, "{b}");
        assert!((tail_bound(2.0, 5.0, 10.0) - 5.0 * (-20f64).exp() / 2.0).abs() < 1e-22);
    }

    #[test]
    fn vector_integrand_components_independent() {
        let r = integrate_vec(|x: f64| [x, x * x, x.exp()], 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-14);
        assert!((r.value[1] - 8.0 / 3.0).abs() < 1e-14);
        assert!((r.value[2] - (2f64.exp() - 1.0)).abs() < 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn exact_on_cubics(p in proptest::array::uniform4(-3.0f64..3.0), lo in -2.0f64..0.0, len in 0.1f64..5.0) {
            let hi = lo + len;
            let f = |x: f64| p[0] + x * (p[1] + x * (p[2] + x * p[3]));
            let anti = |x: f64| x * (p[0] + x * (p[1] / 2.0 + x * (p[2] / 3.0 + x * p[3] / 4.0)));
            let r = integrate(f, lo, hi, &QuadConfig::default()).unwrap();
            proptest::prop_assert!((r.value - (anti(hi) - anti(lo))).abs() < 1e-12 * (1.0 + r.value.abs()));
        }
    }
}
