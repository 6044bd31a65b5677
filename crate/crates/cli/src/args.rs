use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mollab_core::{Level, MollifierSpec};

#[derive(Debug, Parser)]
#[command(name = "mollab", version, about = "Variational linear combinations for Levinson's method")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Quadrature tolerance (absolute and relative).
    #[arg(long, global = true, env = "MOLLAB_TOL", value_parser = positive)]
    pub tol: Option<f64>,
    /// Truncation point standing in for infinity.
    #[arg(long, global = true, default_value_t = mollab_core::DEFAULT_TRUNCATION, value_parser = positive)]
    pub truncation: f64,
    /// Emit JSON instead of CSV or text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// κ for one θ. Special mode unless a general-mode flag is given.
    Kappa {
        #[arg(long, value_parser = theta_value)]
        theta: f64,
        #[command(flatten)]
        general: GeneralFlags,
        /// Interval half-length; defaults to the length at which c = −1.
        #[arg(long = "R", value_parser = positive)]
        r: Option<f64>,
    },
    /// One κ row per θ, as CSV sorted by θ.
    Table {
        /// θ values, as decimals or fractions such as 5/54.
        #[arg(value_parser = theta_value)]
        thetas: Vec<f64>,
        /// Evenly spaced θ grid `lo:hi:n`, both ends included.
        #[arg(long, value_parser = grid_value)]
        grid: Option<Grid>,
        /// Add the eight θ values of the reference table.
        #[arg(long)]
        reference_set: bool,
        #[command(flatten)]
        general: GeneralFlags,
        /// Worker threads.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
    },
    /// Reload a table CSV and recheck `κ = 1 − ln(c)/R` on every row.
    CheckTable { path: PathBuf },
    /// `S_R` and `S'_R` on equispaced points of `[0, R]`.
    Solve {
        #[arg(long = "R", value_parser = positive)]
        r: f64,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        beta: f64,
        /// Number of points, both ends included.
        #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u32).range(2..))]
        points: u32,
    },
    /// Invariant and oracle checks.
    Verify {
        #[arg(long, default_value = "quick", value_parser = level_value)]
        level: Level,
        /// Fault injection: scale the functional coefficient c1 by 1 + x.
        #[arg(long, allow_negative_numbers = true)]
        tamper_c1: Option<f64>,
    },
    /// `Q_R(y0)` over a list of lengths.
    Limit {
        #[arg(long, value_parser = unit_interval)]
        y0: f64,
        #[arg(long = "R-list", value_delimiter = ',', required = true, value_parser = positive)]
        r_list: Vec<f64>,
    },
    /// Named constants: `w1`, `w2` and the component integrals at the
    /// truncation point, plus the closed-form asymptotic constants.
    Constants,
}

#[derive(Debug, Args, Clone)]
pub struct GeneralFlags {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// `linear`, `sinh:r` or `custom:B:C`.
    #[arg(long, value_parser = mollifier_value)]
    pub mollifier: Option<MollifierSpec>,
}

impl GeneralFlags {
    pub fn is_general(&self) -> bool {
        self.beta.is_some() || self.mollifier.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.n {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.hi
                    } else {
                        self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{s:?} must be positive"))
    }
}

pub fn theta_value(s: &str) -> Result<f64, String> {
    positive(s)
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{s:?} must lie in [0, 1]"))
    }
}

fn grid_value(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("grid {s:?} must be lo:hi:n"));
    };
    let (lo, hi) = (positive(lo)?, positive(hi)?);
    let n: usize = n.trim().parse().map_err(|_| format!("bad point count in {s:?}"))?;
    if hi < lo {
        return Err(format!("grid {s:?} has hi < lo"));
    }
    Ok(Grid { lo, hi, n })
}

fn mollifier_value(s: &str) -> Result<MollifierSpec, String> {
    s.parse::<MollifierSpec>().map_err(|e| e.to_string())
}

fn level_value(s: &str) -> Result<Level, String> {
    s.parse::<Level>().map_err(|e| e.to_string())
}
