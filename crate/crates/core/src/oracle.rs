//! Brute-force references for the closed-form solution: a central-difference
//! boundary value solver and a direct minimizer of the trapezoid-discretized
//! functional. Neither uses any hypergeometric machinery.

use crate::error::{Error, Result};
use crate::mode::ModeParams;
pub use crate::profile::SolutionProfile;

/// `1/(1 + e^{2t})` without overflow for large t.
pub fn logistic_source(t: f64) -> f64 {
    if t > 0.0 {
        let e = (-2.0 * t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + (2.0 * t).exp())
    }
}

fn uniform_grid(r: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { r } else { r * i as f64 / n as f64 }).collect()
}

/// Thomas algorithm for `lo[i] x[i-1] + di[i] x[i] + up[i] x[i+1] = rhs[i]`.
fn solve_tridiagonal(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = di.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let scale = di.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for i in 0..m {
        let l = if i > 0 { lo[i] } else { 0.0 };
        let pivot = di[i] - l * prev_c;
        if !(pivot.abs() > 1e-14 * scale) {
            return Err(Error::SingularSystem { row: i, pivot });
        }
        c[i] = if i + 1 < m { up[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - l * prev_d) / pivot;
        prev_c = c[i];
        prev_d = d[i];
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Second-order central differences for
/// `S'' + tanh(t) S' + c S = cβ/(1 + e^{2t})` on `n` equal subintervals of
/// `[0, R]` with Dirichlet ends `S(0) = β/2`, `S(R) = β − 1`.
pub fn bvp_solve(mode: &ModeParams, n: usize) -> Result<SolutionProfile> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!("bvp_solve needs n >= 100, got {n}")));
    }
    let r = mode.r;
    let h = r / n as f64;
    let grid = uniform_grid(r, n);
    let (s0, sr) = (0.5 * mode.beta, mode.beta - 1.0);
    let m = n - 1;
    let mut lo = vec![0.0; m];
    let mut di = vec![0.0; m];
    let mut up = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let h2 = h * h;
    for k in 0..m {
        let t = grid[k + 1];
        let th = t.tanh();
        lo[k] = 1.0 / h2 - th / (2.0 * h);
        di[k] = -2.0 / h2 + mode.c;
        up[k] = 1.0 / h2 + th / (2.0 * h);
        rhs[k] = mode.c * mode.beta * logistic_source(t);
    }
    rhs[0] -= lo[0] * s0;
    rhs[m - 1] -= up[m - 1] * sr;
    let inner = solve_tridiagonal(&lo, &di, &up, &rhs)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(s0);
    values.extend(inner);
    values.push(sr);
    Ok(SolutionProfile::new(grid, values, None)?.with_derivatives())
}

/// Largest residual of the difference equations, which should be rounding
/// level for a `bvp_solve` output.
pub fn bvp_residual(mode: &ModeParams, p: &SolutionProfile) -> f64 {
    let h = p.grid[1] - p.grid[0];
    let s = &p.values;
    (1..s.len() - 1)
        .map(|i| {
            let t = p.grid[i];
            let d2 = (s[i + 1] - 2.0 * s[i] + s[i - 1]) / (h * h);
            let d1 = (s[i + 1] - s[i - 1]) / (2.0 * h);
            (d2 + t.tanh() * d1 + mode.c * s[i] - mode.c * mode.beta * logistic_source(t)).abs()
        })
        .fold(0.0, f64::max)
}

/// Cell weights `a_i ≈ ∫_cell 2c1 cosh t` and node weights `ω_i`.
fn discrete_weights(mode: &ModeParams, grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.len() - 1;
    let h = grid[1] - grid[0];
    let a = (0..n)
        .map(|i| mode.c1 * h * (grid[i].cosh() + grid[i + 1].cosh()))
        .collect();
    let w = (0..=n).map(|i| if i == 0 || i == n { 0.5 * h } else { h }).collect();
    (a, w)
}

/// Value of the trapezoid-discretized functional
/// `Σ_cells a_i (ΔS/h)² + Σ_nodes ω_i (2 c0 cosh t S² − 2 c0 β e^{−t} S + c0 β² e^{−t})`.
pub fn discrete_k(mode: &ModeParams, p: &SolutionProfile) -> Result<f64> {
    let h = p
        .uniform_step()
        .ok_or_else(|| Error::InvalidParameter("discrete functional needs a uniform grid".into()))?;
    let (a, w) = discrete_weights(mode, &p.grid);
    let s = &p.values;
    let beta = mode.beta;
    let cells: f64 = a.iter().enumerate().map(|(i, ai)| ai * ((s[i + 1] - s[i]) / h).powi(2)).sum();
    let nodes: f64 = p
        .grid
        .iter()
        .zip(s)
        .zip(&w)
        .map(|((&t, &sv), &wi)| {
            let em = (-t).exp();
            wi * mode.c0 * (2.0 * t.cosh() * sv * sv - 2.0 * beta * em * sv + beta * beta * em)
        })
        .sum();
    Ok(cells + nodes)
}

/// Minimizes the discretized functional over the interior node values with
/// the ends pinned. Non-convex modes are refused unless
/// `allow_non_convex` is set; an indefinite Hessian is always an error.
pub fn discrete_minimize(mode: &ModeParams, n: usize, allow_non_convex: bool) -> Result<SolutionProfile> {
    if mode.non_convex && !allow_non_convex {
        return Err(Error::InvalidParameter(
            "mode has c0 < 0; minimization must be explicitly allowed".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 intervals, got {n}")));
    }
    let r = mode.r;
    let h = r / n as f64;
    let grid = uniform_grid(r, n);
    let (s0, sr) = (0.5 * mode.beta, mode.beta - 1.0);
    let (a, w) = discrete_weights(mode, &grid);
    let h2 = h * h;
    let m = n - 1;
    // half the Hessian and the matching right-hand side
    let mut di = vec![0.0; m];
    let mut off = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for k in 0..m {
        let j = k + 1;
        let t = grid[j];
        di[k] = (a[j - 1] + a[j]) / h2 + 2.0 * w[j] * mode.c0 * t.cosh();
        off[k] = -a[j] / h2;
        rhs[k] = w[j] * mode.c0 * mode.beta * (-t).exp();
    }
    rhs[0] += a[0] / h2 * s0;
    rhs[m - 1] += a[n - 1] / h2 * sr;

    // LDLᵀ: the pivots are D, so positive definiteness is visible directly
    let mut d = vec![0.0; m];
    let mut l = vec![0.0; m];
    let mut worst = f64::INFINITY;
    for k in 0..m {
        let prev = if k > 0 { l[k - 1] * l[k - 1] * d[k - 1] } else { 0.0 };
        d[k] = di[k] - prev;
        worst = worst.min(d[k]);
        if k + 1 < m {
            l[k] = off[k] / d[k];
        }
    }
    if !(worst > 0.0) {
        return Err(Error::IndefiniteForm(worst));
    }
    let mut y = rhs;
    for k in 1..m {
        y[k] -= l[k - 1] * y[k - 1];
    }
    for k in 0..m {
        y[k] /= d[k];
    }
    for k in (0..m - 1).rev() {
        y[k] -= l[k] * y[k + 1];
    }
    let mut values = Vec::with_capacity(n + 1);
    values.push(s0);
    values.extend(y);
    values.push(sr);
    Ok(SolutionProfile::new(grid, values, None)?.with_derivatives())
}

/// Sup and L² distances between two profiles on the same grid.
pub fn compare_profiles(a: &SolutionProfile, b: &SolutionProfile) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch);
    }
    let span = a.upper() - a.grid[0];
    if a
        .grid
        .iter()
        .zip(&b.grid)
        .any(|(x, y)| (x - y).abs() > 1e-12 * span.max(1.0))
    {
        return Err(Error::GridMismatch);
    }
    compare_with(a, |i| Ok(b.values[i]))
}

/// Sup and L² distances between a profile and values produced per node.
pub fn compare_with<F>(a: &SolutionProfile, mut other: F) -> Result<(f64, f64)>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut sup = 0.0f64;
    let mut l2 = 0.0;
    let mut prev = 0.0;
    for i in 0..a.len() {
        let e = a.values[i] - other(i)?;
        sup = sup.max(e.abs());
        if i > 0 {
            l2 += 0.5 * (e * e + prev * prev) * (a.grid[i] - a.grid[i - 1]);
        }
        prev = e;
    }
    Ok((sup, l2.sqrt()))
}

/// `∫_{−R}^{R} e^t (c0 S² + c1 S'²) dt` for the odd-about-β/2 extension
/// `S(−t) = β − S(t)`, by Romberg-refined trapezoid on the mirrored grid.
pub fn k_full_interval(mode: &ModeParams, p: &SolutionProfile) -> Result<f64> {
    let h = p
        .uniform_step()
        .ok_or_else(|| Error::InvalidParameter("full-interval functional needs a uniform grid".into()))?;
    let n = p.len() - 1;
    if n % 2 != 0 {
        return Err(Error::InvalidParameter("interval count must be even".into()));
    }
    let d = p.derivatives();
    let beta = mode.beta;
    let f = |t: f64, s: f64, ds: f64| t.exp() * (mode.c0 * s * s + mode.c1 * ds * ds);
    // node k of the mirrored grid is t = (k − n) h
    let g: Vec<f64> = (0..=2 * n)
        .map(|k| {
            if k >= n {
                let i = k - n;
                f(p.grid[i], p.values[i], d[i])
            } else {
                let i = n - k;
                f(-p.grid[i], beta - p.values[i], d[i])
            }
        })
        .collect();
    let trap = |stride: usize| {
        let m = g.len() - 1;
        let inner: f64 = (stride..m).step_by(stride).map(|i| g[i]).sum();
        (0.5 * (g[0] + g[m]) + inner) * h * stride as f64
    };
    let (t1, t2) = (trap(1), trap(2));
    Ok(t1 + (t1 - t2) / 3.0)
}
