//! Manifest header, number formatting and output sinks.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use mollab_core::{ModeParams, QuadConfig};
use serde::Serialize;

/// Run metadata embedded in every emitted file. In CSV it is written as
/// `#` comment lines so the body stays byte-identical across runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub timestamp_unix: u64,
    pub wall_time_s: f64,
    pub tolerances: QuadConfig,
    pub truncation: f64,
    pub modes: Vec<ModeParams>,
}

impl RunManifest {
    pub fn new(command: &str, tolerances: QuadConfig, truncation: f64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_time_s: 0.0,
            tolerances,
            truncation,
            modes: Vec::new(),
        }
    }

    pub fn comment_lines(&self) -> String {
        let t = &self.tolerances;
        let mut s = format!(
            "# tool: {} {}\n# command: {}\n# timestamp_unix: {}\n# wall_time_s: {:.6}\n\
             # tolerances: abs_tol={:e} rel_tol={:e} max_depth={}\n# truncation: {}\n",
            self.tool, self.version, self.command, self.timestamp_unix, self.wall_time_s, t.abs_tol,
            t.rel_tol, t.max_depth, self.truncation
        );
        for m in &self.modes {
            s.push_str("# mode: ");
            s.push_str(&serde_json::to_string(m).unwrap_or_default());
            s.push('\n');
        }
        s
    }
}

/// Shortest `%.15g`-style rendering: 15 significant digits, trailing zeros
/// dropped, scientific notation outside `[1e-4, 1e15)`.
pub fn sig15(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.14e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..15).contains(&exp) {
        trim_zeros(format!("{:.*}", (14 - exp) as usize, x))
    } else {
        format!("{}e{}", trim_zeros(mant.to_string()), exp)
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// `c` to 15 significant digits, built from `ln c` when `c` itself
/// overflows `f64`.
pub fn format_c(c: f64, ln_c: f64) -> String {
    if c.is_finite() && c > 0.0 {
        return sig15(c);
    }
    let l10 = ln_c / std::f64::consts::LN_10;
    let mut k = l10.floor();
    let mut m = 10f64.powf(l10 - k);
    if format!("{m:.14}").starts_with("10") {
        m /= 10.0;
        k += 1.0;
    }
    format!("{}e{}", trim_zeros(format!("{m:.14}")), k as i64)
}

/// `ln c` from a rendering produced by [`format_c`].
pub fn parse_ln_c(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        if v.is_finite() && v > 0.0 {
            return Some(v.ln());
        }
    }
    let (m, e) = s.split_once(['e', 'E'])?;
    let m: f64 = m.parse().ok()?;
    let e: i64 = e.parse().ok()?;
    (m > 0.0).then(|| m.ln() + e as f64 * std::f64::consts::LN_10)
}

/// Writes to the `--out` file or stdout.
pub fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}
