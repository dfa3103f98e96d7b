//! Command-line front end.
//!
//! Sets are given as JSON files or as `builtin:NAME` (`fig1`, `triangle`,
//! `l_set`, `m_set`, `unit_box`, `unit_box:N:M`). JSON outputs are
//! canonical. Exit codes: 0 pass, 1 semantic failure, 2 input error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::duality::{module_from_set, roundtrip_distance, FreeOrderUnitModule, ModuleJson};
use crate::error::{Error, Result};
use crate::gamma::run_trials;
use crate::geometry::{PartiallyConvexSet, DEFAULT_RESOLUTION};
use crate::io::{format_g, load_set, read_json, to_canonical_json};
use crate::paff::{
    approx_bernstein, recover_coefficients, sup_distance, CAffFunction, CaffJson, InteriorSelection, PAffPolynomial,
    PaffJson,
};
use crate::regularity::{check_regular, Verdict, DEFAULT_TOL_RATE};
use crate::separation::{
    separate_continuous, separate_polynomial, validate_certificate, CertificateJson, ContinuousSeparatorJson,
    DEFAULT_TOL,
};

pub const SEED_ENV: &str = "PARCONV_SEED";
pub const DEFAULT_ROUNDTRIP_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "parconv",
    version,
    about = "Partially convex sets: separation, regularity, duality"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for randomized runs; the PARCONV_SEED variable overrides it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Grid points per axis for builtin sets.
    #[arg(long, global = true, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Validation tolerance for separation certificates.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Rate bound for the hemicontinuity checks.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_RATE)]
    pub tol_rate: f64,
    /// Round-trip distance bound.
    #[arg(long, global = true, default_value_t = DEFAULT_ROUNDTRIP_TOL)]
    pub eps_rt: f64,
}

impl RunConfig {
    pub fn effective_seed(&self) -> u64 {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(self.seed)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("tol", self.tol), ("tol-rate", self.tol_rate), ("eps-rt", self.eps_rt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("--{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interior, lower and upper hemicontinuity checks.
    CheckRegularity { set: String },
    /// Separate the point (x, y) from the set.
    Separate {
        set: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<f64>,
        /// Continuous separator instead of a polynomial certificate.
        #[arg(long)]
        continuous: bool,
    },
    /// Recover coefficient functions of a partially affine polynomial from
    /// its values on the set.
    Recover {
        set: String,
        /// Polynomial JSON (`{"n", "m", "coeffs"}`).
        #[arg(long)]
        function: PathBuf,
    },
    /// Bernstein approximation of sampled coefficients.
    Approx {
        set: String,
        /// Sampled coefficients as written by `recover`.
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        degree: u32,
    },
    /// Fiber cones of a regular set.
    Dualize { set: String },
    /// State space of a module JSON.
    Statespace { module: PathBuf },
    /// Set -> module -> state space distance.
    Roundtrip { set: String },
    /// Random checks of the matrix compression identities.
    GammaTest {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// CSV of slice boundaries, or of a certificate's zero level.
    PlotData {
        set: String,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
}

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

/// Exit code of an error: 1 for semantic failures, 2 for bad input.
pub fn error_code(err: &Error) -> i32 {
    match err {
        Error::Json(_)
        | Error::Io(_)
        | Error::InvalidInput(_)
        | Error::YOutsideBox { .. }
        | Error::DimensionTooLarge { .. }
        | Error::GridNotTensor
        | Error::NotIsometry { .. } => 2,
        _ => 1,
    }
}

fn json_out<T: serde::Serialize>(value: &T) -> Result<String> {
    to_canonical_json(value)
}

fn load(config: &RunConfig, source: &str) -> Result<PartiallyConvexSet> {
    load_set(source, config.resolution)
}

fn pass_if(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

/// Runs a command and returns the text to emit with its outcome.
pub fn execute(config: &RunConfig, command: &Command) -> Result<(String, Outcome)> {
    config.validate()?;
    match command {
        Command::CheckRegularity { set } => {
            let report = check_regular(&load(config, set)?, config.tol_rate);
            Ok((json_out(&report)?, pass_if(report.verdict == Verdict::Regular)))
        }
        Command::Separate { set, x, y, continuous } => {
            let set = load(config, set)?;
            if *continuous {
                let sep = separate_continuous(&set, x, y)?;
                let report = sep.validate(&set, x, config.tol);
                let pass = report.pass;
                Ok((json_out(&ContinuousSeparatorJson::new(&sep, report))?, pass_if(pass)))
            } else {
                let cert = separate_polynomial(&set, x, y)?;
                let report = validate_certificate(&set, &cert, x, y, config.tol);
                let pass = report.pass;
                Ok((
                    json_out(&CertificateJson::new(&cert, Some(x), Some(report)))?,
                    pass_if(pass),
                ))
            }
        }
        Command::Recover { set, function } => {
            let set = load(config, set)?;
            let p = PAffPolynomial::from_json(&read_json::<PaffJson>(function)?)?;
            if p.n() != set.n() || p.m() != set.m() {
                return Err(Error::InvalidInput("polynomial and set dimensions differ".into()));
            }
            let c = recover_coefficients(&set, |x: &[f64], y: &[f64]| p.eval(x, y), InteriorSelection::Axis)?;
            Ok((json_out(&c.to_json())?, Outcome::Pass))
        }
        Command::Approx { set, samples, degree } => {
            let set = load(config, set)?;
            let c = CAffFunction::from_json(&read_json::<CaffJson>(samples)?)?;
            let p = approx_bernstein(&c, *degree)?;
            let error = sup_distance(&set, &c, &p);
            let out = json!({ "degree": degree, "polynomial": p.to_json(), "sup_error": error });
            Ok((json_out(&out)?, Outcome::Pass))
        }
        Command::Dualize { set } => {
            let module = module_from_set(&load(config, set)?)?;
            Ok((json_out(&module.to_json())?, Outcome::Pass))
        }
        Command::Statespace { module } => {
            let module = FreeOrderUnitModule::from_json(&read_json::<ModuleJson>(module)?)?;
            let set = module.state_space()?;
            Ok((json_out(&set.to_json())?, Outcome::Pass))
        }
        Command::Roundtrip { set } => {
            let distance = roundtrip_distance(&load(config, set)?)?;
            let pass = distance <= config.eps_rt;
            let out = json!({ "distance": distance, "eps_rt": config.eps_rt, "pass": pass });
            Ok((json_out(&out)?, pass_if(pass)))
        }
        Command::GammaTest { trials } => {
            let seed = config.effective_seed();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let report = run_trials(&mut rng, *trials);
            let out = json!({ "seed": seed, "report": report });
            Ok((json_out(&out)?, pass_if(report.pass)))
        }
        Command::PlotData { set, cert } => {
            let set = load(config, set)?;
            match cert {
                None => Ok((slice_csv(&set), Outcome::Pass)),
                Some(path) => Ok((
                    certificate_csv(&set, &read_json::<CertificateJson>(path)?)?,
                    Outcome::Pass,
                )),
            }
        }
    }
}

/// `y,x_min,x_max` per nonempty slice (`n = 1` and `m = 1`).
pub fn slice_csv(set: &PartiallyConvexSet) -> String {
    let mut out = String::from("y,x_min,x_max\n");
    for (y, slice) in set.grid().points().iter().zip(set.slices()) {
        let (Some(lo), Some(hi)) = (slice.max_affine(&[-1.0], 0.0), slice.max_affine(&[1.0], 0.0)) else {
            continue;
        };
        let _ = writeln!(out, "{},{},{}", format_g(y[0]), format_g(-lo), format_g(hi));
    }
    out
}

/// Zero level of a certificate with one `x` and one `y` variable, as
/// `y,x_zero` rows. With `v != 0` there is one row per grid point; with
/// `v = 0` the level set is a union of lines `y = const` and `x_zero` is
/// left blank.
pub fn certificate_csv(set: &PartiallyConvexSet, cert: &CertificateJson) -> Result<String> {
    if cert.v.len() != 1 || cert.y_z.len() != 1 {
        return Err(Error::InvalidInput("plot data needs n = 1 and m = 1".into()));
    }
    let mut out = String::from("y,x_zero\n");
    let (v, c, m, yz) = (cert.v[0], cert.c, cert.big_m, cert.y_z[0]);
    if v != 0.0 {
        for y in set.grid().points() {
            let x = -(c + m * (y[0] - yz).powi(2)) / v;
            let _ = writeln!(out, "{},{}", format_g(y[0]), format_g(x));
        }
    } else if m > 0.0 && -c / m >= 0.0 {
        let r = (-c / m).sqrt();
        let mut roots = vec![yz - r, yz + r];
        roots.dedup();
        for y in roots {
            let _ = writeln!(out, "{},", format_g(y));
        }
    }
    Ok(out)
}

fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.output {
        Some(path) => std::fs::write(Path::new(path), text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = execute(&cli.config, &cli.command).and_then(|(text, outcome)| {
        emit(&cli.config, &text)?;
        Ok(outcome)
    });
    match result {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}
