//! `lindblad`: steady states, conserved quantities and block structure of
//! Lindblad master equations from the command line.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 input error,
//! 3 numerical failure.

mod format;
mod input;
mod report;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use format::{c6, g6, sig17};
use input::{default_margin, load, parse_state, Loaded};
use lindblad_core::evolve::{horizon, propagate};
use lindblad_core::liouvillian::{eigenvalues, Liouvillian, Tolerances};
use lindblad_core::structure::{find_symmetry_generators, symmetry_report, DEFAULT_SEED, SYMMETRY_TOL};
use lindblad_core::{asymptotic_project, infinite_time_state, Error, Operator};
use report::{Analysis, Options, Report};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }

    pub fn from_core(e: Error) -> Self {
        let code = if e.is_input_error() { 2 } else { 3 };
        CliError { code, message: e.to_string() }
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

#[derive(Parser)]
#[command(name = "lindblad", version, about = "Asymptotic analysis of Lindblad master equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Numerics {
    /// Zero-eigenvalue threshold scale: |lambda| < tol * max(1, ||L||_max) counts as zero
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Fock levels below the cutoff excluded from conservation checks
    /// [default: 2d for jumps removing d quanta, 0 for qubit models]
    #[arg(long)]
    interior_margin: Option<usize>,
    /// Seed of the block-structure probe
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum, steady space, conserved quantities and block structure as a JSON report
    Analyze {
        /// Model file, or a catalog name
        #[arg(required_unless_present = "models")]
        model: Option<String>,
        /// Glob of model files analyzed in parallel; the report is a JSON array in path order
        #[arg(long, conflicts_with = "model")]
        models: Option<String>,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        /// Input state for the coefficient table: ket(...), coherent(re,im) or a matrix file
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Eigenvalues of the generator as CSV with header "re,im", 17 significant digits
    Spectrum {
        model: String,
        /// Write the CSV here instead of standard output
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Zero-eigenvalue threshold scale used for ordering
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Asymptotic state of an input state and its coefficients Tr{J_mu^† rho}
    Predict {
        model: String,
        /// ket(b1b2...), ket(b1,b2,...), coherent(re,im) or a JSON matrix file
        #[arg(long)]
        state: String,
        /// Include oscillating coherences at this time
        #[arg(long)]
        time: Option<f64>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Compare the asymptotic projection with direct propagation; exit 1 on mismatch
    Verify {
        model: String,
        #[arg(long)]
        state: String,
        /// Propagation time [default: 30 / dissipation gap]
        #[arg(long)]
        t_final: Option<f64>,
        /// Largest accepted entrywise difference
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Block table and factor states of the limit set
    Structure {
        model: String,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Basis of Hermitian weak-symmetry generators with strong and conserved flags (N <= 16)
    Symmetries {
        model: String,
        /// Relative tolerance of the symmetry tests
        #[arg(long, default_value_t = SYMMETRY_TOL)]
        tol: f64,
    },
}

fn options(numerics: &Numerics, loaded: &Loaded) -> Options {
    Options {
        zero_scale: numerics.tol,
        margin: numerics.interior_margin.unwrap_or_else(|| default_margin(loaded)),
        seed: numerics.seed,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::numerical(format!("stdout: {e}")))
        }
    }
}

fn analyze_one(arg: &str, state: Option<&str>, numerics: &Numerics) -> Result<Report, CliError> {
    let loaded = load(arg)?;
    let opts = options(numerics, &loaded);
    let rho = state.map(|s| parse_state(s, &loaded.model)).transpose()?;
    let a = report::analyze(loaded.model, &opts).map_err(|e| e.context(arg))?;
    let coeffs = match (state, &rho) {
        (Some(spec), Some(rho)) => Some(report::coefficients(&a.decomposition, spec, rho)?),
        _ => None,
    };
    Ok(report::build(&a, &loaded.source, opts.margin, coeffs))
}

fn residual_failure(r: &Report) -> Option<CliError> {
    let bad = r.failed_residuals();
    if bad.is_empty() {
        return None;
    }
    let list: Vec<String> = bad
        .iter()
        .map(|x| format!("{} = {:.3e} > {:.3e}", x.name, x.value, x.tolerance))
        .collect();
    Some(CliError::numerical(format!("{}: {}", r.model.source, list.join(", "))))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn cmd_analyze(
    model: Option<String>,
    models: Option<String>,
    out: Option<PathBuf>,
    state: Option<String>,
    numerics: Numerics,
) -> Result<(), CliError> {
    if let Some(pattern) = models {
        let mut paths: Vec<PathBuf> = glob::glob(&pattern)
            .map_err(|e| CliError::input(format!("--models: {e}")))?
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::input(format!("--models: {e}")))?;
        paths.sort();
        if paths.is_empty() {
            return Err(CliError::input(format!("--models: '{pattern}' matches no files")));
        }
        let results: Vec<Result<Report, CliError>> = paths
            .par_iter()
            .map(|p| analyze_one(&p.to_string_lossy(), state.as_deref(), &numerics))
            .collect();
        let mut reports = Vec::with_capacity(results.len());
        let mut worst: Option<CliError> = None;
        for r in results {
            match r {
                Ok(rep) => {
                    if let Some(e) = residual_failure(&rep) {
                        eprintln!("error: {}", e.message);
                        worst = Some(worse(worst, e));
                    }
                    reports.push(rep);
                }
                Err(e) => {
                    eprintln!("error: {}", e.message);
                    worst = Some(worse(worst, e));
                }
            }
        }
        emit(&to_json(&reports)?, out.as_deref())?;
        return worst.map_or(Ok(()), Err);
    }
    let arg = model.expect("clap requires a model without --models");
    let rep = analyze_one(&arg, state.as_deref(), &numerics)?;
    emit(&to_json(&rep)?, out.as_deref())?;
    residual_failure(&rep).map_or(Ok(()), Err)
}

/// Input errors outrank numerical failures so a bad file is never masked.
fn worse(a: Option<CliError>, b: CliError) -> CliError {
    match a {
        Some(a) if a.code == 2 || b.code != 2 => a,
        _ => b,
    }
}

fn cmd_spectrum(model: String, csv: Option<PathBuf>, tol: f64) -> Result<(), CliError> {
    let loaded = load(&model)?;
    let l = Liouvillian::new(loaded.model);
    let t = Tolerances {
        zero_scale: tol,
        ..Tolerances::default()
    };
    let vals = eigenvalues(&l, t.zero(&l)).map_err(CliError::from_core)?;
    let mut text = String::from("re,im\n");
    for v in vals {
        let _ = writeln!(text, "{},{}", sig17(v.re), sig17(v.im));
    }
    emit(&text, csv.as_deref())
}

fn write_entries(text: &mut String, op: &Operator) {
    let n = op.dim();
    let mut any = false;
    for i in 0..n {
        for j in 0..n {
            let v = op.get(i, j);
            if v.norm() >= format::DISPLAY_CHOP {
                let _ = writeln!(text, "  [{i},{j}]  {}", c6(v));
                any = true;
            }
        }
    }
    if !any {
        text.push_str("  (all entries zero)\n");
    }
}

fn cmd_predict(model: String, state: String, time: Option<f64>, numerics: Numerics) -> Result<(), CliError> {
    let loaded = load(&model)?;
    let opts = options(&numerics, &loaded);
    let rho = parse_state(&state, &loaded.model)?;
    let name = loaded.model.name().to_string();
    let l = Liouvillian::new(loaded.model);
    let tol = Tolerances {
        zero_scale: opts.zero_scale,
        ..Tolerances::default()
    };
    let dec = lindblad_core::decompose(&l, &tol).map_err(CliError::from_core)?;
    let out = match time {
        Some(t) => infinite_time_state(&dec, &rho, t),
        None => asymptotic_project(&dec, &rho),
    }
    .map_err(CliError::from_core)?;
    let coeffs = dec.coefficients(rho.as_operator()).map_err(CliError::from_core)?;

    let mut text = String::new();
    let _ = writeln!(text, "model {name} (N = {}, D = {})", l.dim(), dec.dim());
    let _ = writeln!(text, "state {state}");
    text.push_str("coefficients Tr{J_mu^† rho_in}:\n");
    for (mu, c) in coeffs.iter().enumerate() {
        let _ = writeln!(text, "  {mu:>3}  {}", c6(*c));
    }
    match time {
        Some(t) => {
            let _ = writeln!(text, "rho_inf(t = {}) nonzero entries:", g6(t));
        }
        None => text.push_str("rho_ss nonzero entries:\n"),
    }
    write_entries(&mut text, out.as_operator());
    emit(&text, None)
}

fn cmd_verify(model: String, state: String, t_final: Option<f64>, tol: f64) -> Result<bool, CliError> {
    let loaded = load(&model)?;
    let rho = parse_state(&state, &loaded.model)?;
    let l = Liouvillian::new(loaded.model);
    let dec = lindblad_core::decompose(&l, &Tolerances::default()).map_err(CliError::from_core)?;
    let t = match t_final {
        Some(t) => t,
        None => dec
            .gap
            .and_then(horizon)
            .ok_or_else(|| CliError::input("no decaying eigenvalue; pass --t-final"))?,
    };
    // oscillating coherences are advanced to the same time
    let predicted = infinite_time_state(&dec, &rho, t).map_err(CliError::from_core)?;
    let propagated = propagate(&l, &rho, t).map_err(CliError::from_core)?;
    let residual = (predicted.as_operator() - propagated.as_operator()).norm_max();
    let ok = residual < tol;

    let mut text = String::new();
    let _ = writeln!(text, "t_final {}", g6(t));
    text.push_str("asymptotic projection:\n");
    write_entries(&mut text, predicted.as_operator());
    text.push_str("propagated state:\n");
    write_entries(&mut text, propagated.as_operator());
    let _ = writeln!(
        text,
        "residual {:.3e} {} tolerance {:.3e}: {}",
        residual,
        if ok { "<" } else { ">=" },
        tol,
        if ok { "PASS" } else { "MISMATCH" }
    );
    emit(&text, None)?;
    Ok(ok)
}

fn structure_text(a: &Analysis, name: &str) -> String {
    let mut text = String::new();
    let s = &a.structure;
    let _ = writeln!(
        text,
        "model {name}: D = {}, support {} of {}, capacity {}",
        a.decomposition.dim(),
        s.support_dim,
        a.liouvillian.dim(),
        s.capacity()
    );
    text.push_str("block    n    m  energies\n");
    for (k, b) in s.blocks.iter().enumerate() {
        let e: Vec<String> = b.energies.iter().map(|x| g6(*x)).collect();
        let _ = writeln!(text, "{k:>5} {:>4} {:>4}  [{}]", b.n, b.m, e.join(", "));
    }
    for (k, b) in s.blocks.iter().enumerate() {
        let _ = writeln!(text, "factor state T({k}), {}x{}:", b.m, b.m);
        let t = b.factor_state.as_operator();
        for i in 0..b.m {
            let row: Vec<String> = (0..b.m).map(|j| c6(t.get(i, j))).collect();
            let _ = writeln!(text, "  {}", row.join("  "));
        }
    }
    text
}

fn cmd_structure(model: String, numerics: Numerics) -> Result<(), CliError> {
    let loaded = load(&model)?;
    let opts = options(&numerics, &loaded);
    let name = loaded.model.name().to_string();
    let a = report::analyze(loaded.model, &opts)?;
    emit(&structure_text(&a, &name), None)
}

fn cmd_symmetries(model: String, tol: f64) -> Result<(), CliError> {
    let loaded = load(&model)?;
    let l = Liouvillian::new(loaded.model);
    let gens = find_symmetry_generators(&l, tol).map_err(CliError::from_core)?;
    let mut text = String::new();
    let _ = writeln!(text, "{} weak-symmetry generators", gens.len());
    for (k, a) in gens.iter().enumerate() {
        let r = symmetry_report(a, &l, tol);
        let _ = writeln!(text, "generator {k}: strong={} weak={} conserved={}", r.strong, r.weak, r.conserved);
        write_entries(&mut text, a);
    }
    emit(&text, None)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Analyze {
            model,
            models,
            out,
            state,
            numerics,
        } => cmd_analyze(model, models, out, state, numerics)?,
        Command::Spectrum { model, csv, tol } => cmd_spectrum(model, csv, tol)?,
        Command::Predict {
            model,
            state,
            time,
            numerics,
        } => cmd_predict(model, state, time, numerics)?,
        Command::Verify {
            model,
            state,
            t_final,
            tol,
        } => {
            if !cmd_verify(model, state, t_final, tol)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Structure { model, numerics } => cmd_structure(model, numerics)?,
        Command::Symmetries { model, tol } => cmd_symmetries(model, tol)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
