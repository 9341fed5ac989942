//! Batch front door: generate extremal signals, compute distributions, run
//! the verification suites, and validate reports.
//!
//! Exit codes: 0 on success (all checks pass), 1 when a verification fails,
//! 2 on usage or I/O errors.

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tfu_core::io::{load_chirp_spec, load_signal_csv, save_distribution, save_signal_csv, summarize_report, validate_schema, VerifyReport};
use tfu_core::suites::{run_suite, run_theorem_case, SuiteConfig, DEFAULT_SEED};
use tfu_core::{cctfd, optimal_chirp, optimal_gaussian, BoundReport, ChirpSpec, Grid, Kernel, TheoremCase, Verdict};

const REPORT_SCHEMA_TEXT: &str = include_str!("../../../schemas/report.schema.json");
const BOUND_SCHEMA_TEXT: &str = include_str!("../../../schemas/bound_report.schema.json");

#[derive(Clone, Copy, Debug)]
struct GridArg {
    count: usize,
    lo: f64,
    hi: f64,
}

fn parse_grid(s: &str) -> Result<GridArg, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected M:lo:hi, got '{s}'"));
    }
    let count: usize = parts[0].parse().map_err(|e| format!("bad node count: {e}"))?;
    let lo: f64 = parts[1].parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = parts[2].parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if count < 2 {
        return Err("node count must be at least 2".into());
    }
    if !(hi > lo) {
        return Err(format!("empty span [{lo}, {hi})"));
    }
    Ok(GridArg { count, lo, hi })
}

impl GridArg {
    fn build(&self) -> anyhow::Result<Grid> {
        Ok(Grid::line(self.lo, self.hi, self.count)?)
    }
}

#[derive(Parser)]
#[command(
    name = "tfu",
    version,
    about = "Cohen's-class time-frequency distribution laboratory"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an extremal signal (Gaussian or Gaussian-enveloped chirp)
    Generate {
        /// Envelope width parameter of the Gaussian family
        #[arg(long)]
        zeta: Option<f64>,
        /// Chirp-rate reciprocal; together with --zeta selects a chirp
        #[arg(long)]
        eps: Option<f64>,
        /// Time center
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        /// Frequency center (chirps only)
        #[arg(long, default_value_t = 0.0)]
        w0: f64,
        /// Full chirp specification JSON (overrides the scalar flags)
        #[arg(long)]
        chirp: Option<PathBuf>,
        #[arg(long, value_parser = parse_grid, default_value = "256:-8:8")]
        grid: GridArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a distribution from a signal CSV
    Compute {
        #[arg(long)]
        signal: PathBuf,
        /// unit | krd | page | timemul:<builtin>(<param>) | table:<csv>
        #[arg(long, default_value = "unit")]
        kernel: String,
        /// Output path; a .bin extension selects the compact binary format
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification suites or a single lower-bound case
    Verify {
        /// lemmas | theorems | flandrin | all
        #[arg(long)]
        suite: Option<String>,
        /// T1 | T2 | T3 | T4
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long, value_parser = parse_grid, default_value = "256:-8:8")]
        grid: GridArg,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Relative tolerance override
        #[arg(long)]
        tol: Option<f64>,
        /// Seed for the randomized checks (recorded in the report)
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a report JSON against the shipped schema and summarize it
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn write_or_print(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_generate(
    zeta: Option<f64>,
    eps: Option<f64>,
    x0: f64,
    w0: f64,
    chirp: Option<PathBuf>,
    grid: GridArg,
    out: PathBuf,
) -> anyhow::Result<ExitCode> {
    let grid = grid.build()?;
    let signal = if let Some(path) = chirp {
        let spec: ChirpSpec = load_chirp_spec(&path)?;
        optimal_chirp(&spec, &grid)?.0
    } else if let Some(eps) = eps {
        let zeta = zeta.unwrap_or(1.0 / (2.0 * PI));
        let mut spec = ChirpSpec::one_dim(zeta, eps, 1);
        spec.x0 = vec![x0];
        spec.w0 = vec![w0];
        optimal_chirp(&spec, &grid)?.0
    } else {
        let zeta = zeta.ok_or_else(|| anyhow!("generate needs --zeta, --eps, or --chirp"))?;
        optimal_gaussian(zeta, &[x0], 0.0, &grid)?
    };
    save_signal_csv(&out, &signal)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_compute(signal: PathBuf, kernel: String, out: PathBuf) -> anyhow::Result<ExitCode> {
    let f = load_signal_csv(&signal)?;
    let k = Kernel::parse(&kernel)?;
    let d = cctfd(&f, &k)?;
    save_distribution(&out, &d)?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    suite: Option<String>,
    theorem: Option<String>,
    grid: GridArg,
    kernel: Option<String>,
    zeta: Option<f64>,
    eps: Option<f64>,
    tol: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    if let Some(tol) = tol {
        if !(tol > 0.0 && tol.is_finite()) {
            bail!("--tol must be positive, got {tol}");
        }
    }
    let cfg = SuiteConfig {
        grid_count: grid.count,
        grid_lo: grid.lo,
        grid_hi: grid.hi,
        seed: seed.unwrap_or(DEFAULT_SEED),
        rel_tol: tol.unwrap_or(1e-3),
    };
    match (suite, theorem) {
        (Some(_), Some(_)) => bail!("--suite and --theorem are mutually exclusive"),
        (None, None) => bail!("verify needs --suite or --theorem"),
        (Some(name), None) => {
            let report = run_suite(&name, &cfg)?;
            let json = report.to_json();
            let value: serde_json::Value = serde_json::from_str(&json)?;
            let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA_TEXT)?;
            validate_schema(&value, &schema)
                .map_err(|e| anyhow!("generated report violates its schema: {e}"))?;
            write_or_print(out.as_deref(), &json)?;
            eprint!("{}", summarize_report(&report));
            Ok(if report.failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        (None, Some(case)) => {
            let case = TheoremCase::parse(&case)?;
            let kernel = kernel.as_deref().map(Kernel::parse).transpose()?;
            let zeta = zeta.unwrap_or(1.0 / (2.0 * PI));
            let eps = eps.unwrap_or(1.0);
            let report: BoundReport = run_theorem_case(case, zeta, eps, kernel, &cfg)?;
            let mut json = serde_json::to_string_pretty(&report)?;
            json.push('\n');
            let value: serde_json::Value = serde_json::from_str(&json)?;
            let schema: serde_json::Value = serde_json::from_str(BOUND_SCHEMA_TEXT)?;
            validate_schema(&value, &schema)
                .map_err(|e| anyhow!("generated report violates its schema: {e}"))?;
            write_or_print(out.as_deref(), &json)?;
            eprintln!(
                "case {} verdict {}: measured {:.6e} bound {:.6e} slack {:.3e}",
                report.case.name(),
                report.verdict,
                report.measured_product,
                report.theorem_bound_abscov,
                report.slack
            );
            Ok(if report.verdict == Verdict::Fail { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
    }
}

fn cmd_report(input: PathBuf) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&input)
        .with_context(|| format!("reading {}", input.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", input.display()))?;
    if value.get("checks").is_some() {
        let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA_TEXT)?;
        validate_schema(&value, &schema).map_err(|e| anyhow!("schema violation: {e}"))?;
        let report: VerifyReport = serde_json::from_value(value)?;
        print!("{}", summarize_report(&report));
        Ok(if report.failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
    } else if value.get("case").is_some() {
        let schema: serde_json::Value = serde_json::from_str(BOUND_SCHEMA_TEXT)?;
        validate_schema(&value, &schema).map_err(|e| anyhow!("schema violation: {e}"))?;
        let report: BoundReport = serde_json::from_value(value)?;
        println!(
            "case {} verdict {}: measured {:.6e} bound {:.6e} slack {:.3e} (tol {:.1e})",
            report.case.name(),
            report.verdict,
            report.measured_product,
            report.theorem_bound_abscov,
            report.slack,
            report.tolerance
        );
        Ok(if report.verdict == Verdict::Fail { ExitCode::from(1) } else { ExitCode::SUCCESS })
    } else {
        bail!("unrecognized report shape (expected a suite or bound report)");
    }
}

fn main() -> ExitCode {
    // TFU_THREADS caps the data-parallel workers inside the engine.
    if let Ok(n) = std::env::var("TFU_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Generate { zeta, eps, x0, w0, chirp, grid, out } => {
            cmd_generate(zeta, eps, x0, w0, chirp, grid, out)
        }
        Cmd::Compute { signal, kernel, out } => cmd_compute(signal, kernel, out),
        Cmd::Verify { suite, theorem, grid, kernel, zeta, eps, tol, seed, out } => {
            cmd_verify(suite, theorem, grid, kernel, zeta, eps, tol, seed, out)
        }
        Cmd::Report { input } => cmd_report(input),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
