//! Subcommand implementations for the `ecp` binary. Each returns an
//! [`Outcome`] instead of printing so the commands can be tested in-process.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecp_core::comparison::{
    curves_for_caps, figure3_grid, figure3_point, SweepTable, DEFAULT_GRID_POINTS,
};
use ecp_core::io::{parse_caps, parse_real_list, sweep_to_csv, RunConfig, RunRecord};
use ecp_core::protocols::{analytic_total_probability, run_ecp, WCoefficients, WKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Simulated and analytic probabilities must agree this closely.
pub const MATCH_TOL: f64 = 1e-10;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ecp",
    version,
    about = "Optimal W-state entanglement concentration with linear optics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one concentration run and compare it with N·min|a_i|².
    Run(RunArgs),
    /// Emit the prior-scheme vs optimal-protocol sweep as CSV.
    Compare(CompareArgs),
    /// Check both drivers against the closed form on random inputs.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    SinglePhoton,
    Polarization,
}

impl From<Protocol> for WKind {
    fn from(p: Protocol) -> Self {
        match p {
            Protocol::SinglePhoton => WKind::SinglePhoton,
            Protocol::Polarization => WKind::Polarization,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    /// Squared moduli |a_k|², comma separated; must sum to 1.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs2: String,
    /// Phases in radians, comma separated, one per coefficient.
    #[arg(long, allow_hyphen_values = true)]
    pub phases: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Number of α grid points.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub alpha_points: usize,
    /// Iteration caps of the prior-scheme curves as `n:m` pairs.
    #[arg(long, default_value = "1:1,3:3,5:5")]
    pub caps: String,
    /// Explicit α values instead of the uniform grid.
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: Option<String>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long, env = "ECP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Use this coefficient vector (squared moduli) in every trial.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs2: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String, code: i32) -> Self {
        Outcome {
            stdout,
            stderr: String::new(),
            code,
        }
    }

    /// Exit 2 with a JSON error record on stderr.
    fn invalid(message: impl std::fmt::Display) -> Self {
        let record = serde_json::json!({ "error": "validation", "message": message.to_string() });
        Outcome {
            stdout: String::new(),
            stderr: format!("{record}\n"),
            code: EXIT_INVALID,
        }
    }
}

pub fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Run(a) => redirect(cmd_run(a), a.out.as_deref()),
        Command::Compare(a) => redirect(cmd_compare(a), a.out.as_deref()),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Moves a successful command's stdout into `path`, if one was given.
fn redirect(mut out: Outcome, path: Option<&Path>) -> Outcome {
    let Some(path) = path else { return out };
    if out.code == EXIT_INVALID {
        return out;
    }
    if let Err(e) = std::fs::write(path, &out.stdout) {
        return Outcome::invalid(format!("--out {}: {e}", path.display()));
    }
    out.stdout.clear();
    out
}

pub fn cmd_run(args: &RunArgs) -> Outcome {
    let coeffs2 = match parse_real_list(&args.coeffs2) {
        Ok(v) => v,
        Err(e) => return Outcome::invalid(format!("--coeffs2: {e}")),
    };
    let phases = match args.phases.as_deref().map(parse_real_list).transpose() {
        Ok(v) => v,
        Err(e) => return Outcome::invalid(format!("--phases: {e}")),
    };
    let config = RunConfig {
        protocol: args.protocol.into(),
        coeffs2,
        phases,
    };
    let c = match config.coefficients() {
        Ok(c) => c,
        Err(e) => return Outcome::invalid(e),
    };
    let report = match run_ecp(&c, config.protocol) {
        Ok(r) => r,
        Err(e) => return Outcome::invalid(e),
    };
    let record = RunRecord::from_report(&c, &report);
    let body = match args.format {
        Format::Json => record.to_json() + "\n",
        Format::Csv => record.to_csv(),
        Format::Text => record.to_text(),
    };
    let code = if (record.total_prob - record.analytic_prob).abs() < MATCH_TOL {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    };
    Outcome::ok(body, code)
}

pub fn cmd_compare(args: &CompareArgs) -> Outcome {
    let caps = match parse_caps(&args.caps) {
        Ok(c) => c,
        Err(e) => return Outcome::invalid(format!("--caps: {e}")),
    };
    let alphas = match &args.alphas {
        Some(s) => match parse_real_list(s) {
            Ok(v) => v,
            Err(e) => return Outcome::invalid(format!("--alphas: {e}")),
        },
        None => {
            if args.alpha_points == 0 {
                return Outcome::invalid("--alpha-points must be at least 1");
            }
            figure3_grid(args.alpha_points)
        }
    };
    let curves = curves_for_caps(&caps);
    let mut table = SweepTable::default();
    let mut omitted = 0;
    for alpha in alphas {
        match figure3_point(alpha, &curves) {
            Ok(rows) => table.rows.extend(rows),
            Err(_) => omitted += 1,
        }
    }
    Outcome::ok(sweep_to_csv(&table, omitted), EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Offender {
    pub protocol: WKind,
    pub coeffs2: Vec<f64>,
    pub phases: Vec<f64>,
    pub total_prob: f64,
    pub analytic_prob: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub trials: usize,
    pub seed: u64,
    pub max_abs_error: f64,
    pub min_fidelity: f64,
    /// Total probability of the last trial's single-photon run.
    pub last_total_prob: f64,
    pub offenders: Vec<Offender>,
}

pub fn cmd_verify(args: &VerifyArgs) -> Outcome {
    if args.trials == 0 {
        return Outcome::invalid("--trials must be at least 1");
    }
    if args.n_min < 2 || args.n_min > args.n_max {
        return Outcome::invalid(format!(
            "need 2 <= n-min <= n-max, got {}..{}",
            args.n_min, args.n_max
        ));
    }
    let forced = match args.coeffs2.as_deref().map(parse_real_list).transpose() {
        Ok(None) => None,
        Ok(Some(v)) => match WCoefficients::from_squared_moduli(&v, None) {
            Ok(c) => Some(c),
            Err(e) => return Outcome::invalid(e),
        },
        Err(e) => return Outcome::invalid(format!("--coeffs2: {e}")),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut summary = VerifySummary {
        trials: args.trials,
        seed: args.seed,
        max_abs_error: 0.0,
        min_fidelity: 1.0,
        last_total_prob: f64::NAN,
        offenders: Vec::new(),
    };
    for _ in 0..args.trials {
        let c = match &forced {
            Some(c) => c.clone(),
            None => {
                let n = rng.gen_range(args.n_min..=args.n_max);
                let phased = rng.gen_bool(0.5);
                WCoefficients::random(&mut rng, n, phased).expect("sampled coefficients are valid")
            }
        };
        let analytic = analytic_total_probability(&c);
        for kind in [WKind::SinglePhoton, WKind::Polarization] {
            let (total, fidelity) = match run_ecp(&c, kind) {
                Ok(r) => (r.total_prob, r.fidelity_to_target),
                Err(_) => (f64::NAN, f64::NAN),
            };
            if kind == WKind::SinglePhoton {
                summary.last_total_prob = total;
            }
            let err = (total - analytic).abs();
            summary.max_abs_error = summary.max_abs_error.max(err);
            summary.min_fidelity = summary.min_fidelity.min(fidelity);
            if !(err < MATCH_TOL && fidelity > 1.0 - MATCH_TOL) {
                summary.offenders.push(Offender {
                    protocol: kind,
                    coeffs2: c.squared_moduli(),
                    phases: c.phases(),
                    total_prob: total,
                    analytic_prob: analytic,
                    fidelity,
                });
            }
        }
    }
    let code = if summary.offenders.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    };
    let body = match args.format {
        Format::Json | Format::Csv => {
            serde_json::to_string_pretty(&summary).expect("plain data serializes") + "\n"
        }
        Format::Text => verify_text(&summary),
    };
    Outcome::ok(body, code)
}

fn verify_text(s: &VerifySummary) -> String {
    let mut out = format!(
        "trials: {}\nseed: {}\nmax |simulated - analytic|: {:.3e}\nmin fidelity: {:.15}\nlast total: {}\n",
        s.trials, s.seed, s.max_abs_error, s.min_fidelity, s.last_total_prob
    );
    if s.offenders.is_empty() {
        out.push_str("status: ok\n");
    } else {
        out.push_str(&format!("status: {} violation(s)\n", s.offenders.len()));
        for o in &s.offenders {
            out.push_str(&format!(
                "  {} coeffs2={:?} total={} analytic={} fidelity={}\n",
                o.protocol.name(),
                o.coeffs2,
                o.total_prob,
                o.analytic_prob,
                o.fidelity
            ));
        }
    }
    out
}
