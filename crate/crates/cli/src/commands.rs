use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use mollab_core::kappa::{kappa_general, kappa_special};
use mollab_core::siegel::{asymptotic_constants, step_limit_scan};
use mollab_core::varsol::Fundamental;
use mollab_core::verify::{self, REFERENCE_TABLE};
use mollab_core::{KappaResult, Level, ModeParams, MollifierSpec, QuadConfig, Solution, VerifyOptions};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::args::{GeneralFlags, Global, Grid};
use crate::output::{format_c, parse_ln_c, sig15, sink, RunManifest};

/// `κ = 1 − ln(c)/R` must hold on a reloaded row to this accuracy.
pub const ROW_INVARIANT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] mollab_core::Error),
    #[error("{0}")]
    PartialFailure(String),
    #[error("{0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::PartialFailure(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub struct Context {
    pub cfg: QuadConfig,
    pub truncation: f64,
    pub json: bool,
    out: Option<std::path::PathBuf>,
    start: Instant,
}

impl Context {
    pub fn new(g: &Global) -> CliResult<Self> {
        let cfg = g.tol.map(QuadConfig::with_tol).unwrap_or_default();
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            cfg,
            truncation: g.truncation,
            json: g.json,
            out: g.out.clone(),
            start: Instant::now(),
        })
    }

    fn manifest(&self, command: &str, modes: Vec<ModeParams>) -> RunManifest {
        let mut m = RunManifest::new(command, self.cfg, self.truncation);
        m.modes = modes;
        m.wall_time_s = self.start.elapsed().as_secs_f64();
        m
    }

    fn emit(&self, body: &[u8]) -> CliResult<()> {
        let mut w = sink(self.out.as_deref())?;
        w.write_all(body)?;
        w.flush()?;
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.emit(s.as_bytes())
    }
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: T,
}

fn csv_bytes(manifest: &RunManifest, header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut buf = manifest.comment_lines().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

fn compute_kappa(theta: f64, r: Option<f64>, general: &GeneralFlags, cfg: &QuadConfig) -> mollab_core::Result<KappaResult> {
    if general.is_general() || r.is_some() {
        let spec = general.mollifier.unwrap_or_else(MollifierSpec::linear);
        kappa_general(theta, r, general.beta.unwrap_or(1.0), &spec, cfg)
    } else {
        kappa_special(theta, cfg)
    }
}

pub fn kappa(ctx: &Context, theta: f64, general: &GeneralFlags, r: Option<f64>) -> CliResult<()> {
    let k = compute_kappa(theta, r, general, &ctx.cfg)?;
    let mode = if general.is_general() || r.is_some() {
        let spec = general.mollifier.unwrap_or_else(MollifierSpec::linear);
        let (b, c) = mollab_core::kappa::mollifier_moments(&spec)?;
        ModeParams::general(k.theta, k.r, k.beta, b, c)?
    } else {
        ModeParams::special(theta)?
    };
    let manifest = ctx.manifest("kappa", vec![mode]);
    if ctx.json {
        #[derive(Serialize)]
        struct Body<'a> {
            result: &'a KappaResult,
        }
        return ctx.emit_json(&Wrapped {
            manifest: &manifest,
            body: Body { result: &k },
        });
    }
    let mut s = manifest.comment_lines();
    for (key, val) in [
        ("theta", sig15(k.theta)),
        ("R", sig15(k.r)),
        ("beta", sig15(k.beta)),
        ("mollifier", k.mollifier.clone()),
        ("mode", format!("{:?}", k.mode_tag).to_lowercase()),
        ("c_pqr", format_c(k.c_pqr, k.ln_c)),
        ("ln_c", sig15(k.ln_c)),
        ("kappa", sig15(k.kappa)),
    ] {
        s.push_str(&format!("{key} = {val}\n"));
    }
    ctx.emit(s.as_bytes())
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub theta: f64,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub beta: f64,
    pub mollifier: String,
    pub c_pqr: Option<f64>,
    pub ln_c: Option<f64>,
    pub kappa: Option<f64>,
    pub error: Option<String>,
}

pub fn table(
    ctx: &Context,
    thetas: &[f64],
    grid: Option<Grid>,
    reference_set: bool,
    general: &GeneralFlags,
    jobs: u32,
) -> CliResult<()> {
    let mut list = thetas.to_vec();
    if let Some(g) = grid {
        list.extend(g.points());
    }
    if reference_set {
        list.extend(REFERENCE_TABLE.iter().map(|e| e.theta()));
    }
    list.sort_by(f64::total_cmp);
    list.dedup();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs as usize)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mollifier = general.mollifier.unwrap_or_else(MollifierSpec::linear).to_string();
    let beta = general.beta.unwrap_or(1.0);
    // indexed collect keeps θ order regardless of scheduling
    let rows: Vec<TableRow> = pool.install(|| {
        list.par_iter()
            .map(|&theta| match compute_kappa(theta, None, general, &ctx.cfg) {
                Ok(k) => TableRow {
                    theta,
                    r: Some(k.r),
                    beta: k.beta,
                    mollifier: k.mollifier,
                    c_pqr: Some(k.c_pqr),
                    ln_c: Some(k.ln_c),
                    kappa: Some(k.kappa),
                    error: None,
                },
                Err(e) => TableRow {
                    theta,
                    r: None,
                    beta,
                    mollifier: mollifier.clone(),
                    c_pqr: None,
                    ln_c: None,
                    kappa: None,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    });
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    let manifest = ctx.manifest("table", Vec::new());

    if ctx.json {
        #[derive(Serialize)]
        struct Body<'a> {
            rows: &'a [TableRow],
        }
        ctx.emit_json(&Wrapped {
            manifest: &manifest,
            body: Body { rows: &rows },
        })?;
    } else {
        let mut header = vec!["theta", "R", "beta", "mollifier", "c_pqr", "kappa"];
        if failures > 0 {
            header.push("error");
        }
        let opt = |x: Option<f64>| x.map(sig15).unwrap_or_default();
        let records: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                let mut rec = vec![
                    sig15(r.theta),
                    opt(r.r),
                    sig15(r.beta),
                    r.mollifier.clone(),
                    match (r.c_pqr, r.ln_c) {
                        (Some(c), Some(l)) => format_c(c, l),
                        _ => String::new(),
                    },
                    opt(r.kappa),
                ];
                if failures > 0 {
                    rec.push(r.error.clone().unwrap_or_default());
                }
                rec
            })
            .collect();
        ctx.emit(&csv_bytes(&manifest, &header, &records)?)?;
    }
    if failures > 0 {
        return Err(CliError::PartialFailure(format!("{failures} of {} rows failed", rows.len())));
    }
    Ok(())
}

/// Largest `|κ − (1 − ln c/R)|` over the rows of a table CSV, and the
/// number of rows that fail the invariant or carry an error.
pub fn recheck_table(path: &Path) -> CliResult<(usize, usize, f64)> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("table has no {name:?} column")))
    };
    let (ir, ic, ik) = (col("R")?, col("c_pqr")?, col("kappa")?);
    let ie = headers.iter().position(|h| h == "error");
    let (mut rows, mut bad, mut worst) = (0, 0, 0.0f64);
    for rec in rdr.records() {
        let rec = rec?;
        rows += 1;
        if ie.map(|i| !rec[i].is_empty()).unwrap_or(false) {
            bad += 1;
            continue;
        }
        let r: Option<f64> = rec[ir].parse().ok();
        let k: Option<f64> = rec[ik].parse().ok();
        let ln_c = parse_ln_c(&rec[ic]);
        match (r, k, ln_c) {
            (Some(r), Some(k), Some(l)) => {
                let gap = (k - (1.0 - l / r)).abs();
                worst = worst.max(gap);
                if !(gap <= ROW_INVARIANT_TOL) {
                    bad += 1;
                }
            }
            _ => bad += 1,
        }
    }
    Ok((rows, bad, worst))
}

pub fn check_table(ctx: &Context, path: &Path) -> CliResult<()> {
    let (rows, bad, worst) = recheck_table(path)?;
    let msg = format!("{rows} rows checked, {bad} failed, worst |κ − (1 − ln c/R)| = {worst:.3e}\n");
    ctx.emit(msg.as_bytes())?;
    if bad > 0 {
        return Err(CliError::Verification(format!("{bad} table rows failed")));
    }
    Ok(())
}

pub fn solve(ctx: &Context, r: f64, c: f64, beta: f64, points: u32) -> CliResult<()> {
    let mode = ModeParams::from_ode(r, c, beta)?;
    let sol = Solution::new(&mode, &ctx.cfg)?;
    let profile = sol.profile(points as usize - 1)?;
    let manifest = ctx.manifest("solve", vec![mode]);
    if ctx.json {
        #[derive(Serialize)]
        struct Body<'a> {
            c1: f64,
            profile: &'a mollab_core::SolutionProfile,
        }
        return ctx.emit_json(&Wrapped {
            manifest: &manifest,
            body: Body {
                c1: sol.c1(),
                profile: &profile,
            },
        });
    }
    let derivs = profile.derivatives();
    let rows: Vec<Vec<String>> = (0..profile.len())
        .map(|i| vec![sig15(profile.grid[i]), sig15(profile.values[i]), sig15(derivs[i])])
        .collect();
    ctx.emit(&csv_bytes(&manifest, &["t", "S", "Sprime"], &rows)?)
}

pub fn verify(ctx: &Context, level: Level, tamper_c1: Option<f64>) -> CliResult<()> {
    let opts = VerifyOptions {
        level,
        cfg: ctx.cfg,
        tamper_c1,
    };
    let report = verify::run(&opts);
    let manifest = ctx.manifest("verify", Vec::new());
    if ctx.json {
        #[derive(Serialize)]
        struct Body<'a> {
            report: &'a mollab_core::Report,
        }
        ctx.emit_json(&Wrapped {
            manifest: &manifest,
            body: Body { report: &report },
        })?;
    } else {
        let mut s = manifest.comment_lines();
        s.push_str(&report.to_text());
        ctx.emit(s.as_bytes())?;
    }
    if !report.passed {
        return Err(CliError::Verification(format!("verification at level {level} failed")));
    }
    Ok(())
}

pub fn limit(ctx: &Context, y0: f64, r_list: &[f64]) -> CliResult<()> {
    if r_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Usage("--R-list must be strictly increasing".into()));
    }
    let q = step_limit_scan(y0, r_list, &ctx.cfg)?;
    let manifest = ctx.manifest("limit", Vec::new());
    if ctx.json {
        #[derive(Serialize)]
        struct Body<'a> {
            y0: f64,
            #[serde(rename = "R")]
            r: &'a [f64],
            q: &'a [f64],
        }
        return ctx.emit_json(&Wrapped {
            manifest: &manifest,
            body: Body { y0, r: r_list, q: &q },
        });
    }
    let rows: Vec<Vec<String>> = r_list
        .iter()
        .zip(&q)
        .map(|(r, q)| vec![sig15(y0), sig15(*r), sig15(*q)])
        .collect();
    ctx.emit(&csv_bytes(&manifest, &["y0", "R", "Q"], &rows)?)
}

pub fn constants(ctx: &Context) -> CliResult<()> {
    let u = ctx.truncation;
    let fund = Fundamental::new(-1.0, u, &ctx.cfg)?;
    let (w1, w2) = fund.w(u)?;
    let ci = fund.component_integrals(u, &ctx.cfg)?;
    let a = asymptotic_constants()?;
    let mut named: Vec<(&str, f64)> = vec![
        ("w1", w1),
        ("w2", w2),
        ("int_f", ci.f),
        ("int_g0", ci.g0),
        ("int_g1w1", ci.g1w1),
        ("int_g2w2", ci.g2w2),
        ("g1_0", fund.basis.g1_0),
        ("g2_0", fund.basis.g2_0),
    ];
    named.extend(a.named());
    let manifest = ctx.manifest("constants", Vec::new());
    if ctx.json {
        #[derive(Serialize)]
        struct Body {
            constants: std::collections::BTreeMap<String, f64>,
        }
        let constants = named.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        return ctx.emit_json(&Wrapped {
            manifest: &manifest,
            body: Body { constants },
        });
    }
    let rows: Vec<Vec<String>> = named.iter().map(|(k, v)| vec![k.to_string(), sig15(*v)]).collect();
    ctx.emit(&csv_bytes(&manifest, &["name", "value"], &rows)?)
}
