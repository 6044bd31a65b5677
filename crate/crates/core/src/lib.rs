//! Closed-form and brute-force solution of the quadratic variational
//! problem behind Levinson–Conrey lower bounds for the proportion of zeros
//! of ζ(s) on the critical line, and the resulting proportion κ(θ).

pub mod error;
pub mod hyp2f1;
pub mod kappa;
pub mod mode;
pub mod oracle;
pub mod profile;
pub mod quad;
pub mod siegel;
pub mod varsol;
pub mod verify;

pub use error::{Error, Result};
pub use hyp2f1::{EvalConfig, HypArgs};
pub use kappa::{KappaResult, MollifierKind, MollifierSpec};
pub use mode::{ModeParams, ModeTag};
pub use profile::SolutionProfile;
pub use quad::{QuadConfig, QuadResult};
pub use siegel::{AsymptoticConstants, StepFunction};
pub use varsol::{Solution, DEFAULT_TRUNCATION};
pub use verify::{Check, Level, Report, VerifyOptions};
