//! `mcipdg` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid configuration
//! or usage, 3 numerical failure (singular or failed factorization).

mod config;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use mcipdg::assembly::assemble_a_h;
use mcipdg::driver::{
    compare_algorithms, diagnostics, estimate_source_moments, run_multimodes, run_standard,
    DiagnosticInputs, Problem, RunConfig,
};
use mcipdg::mesh::build_uniform_mesh;
use mcipdg::random_field::{compute_kl, CovarianceSpec};
use serde::Serialize;

use config::{ConfigArgs, ConfigError, Preset};

/// Dense eigensolves beyond this many cells per axis are refused.
const KL_MAX_CELLS_PER_AXIS: usize = 12;

#[derive(Parser)]
#[command(name = "mcipdg", version, about = "Multi-modes Monte Carlo IP-DG for time-harmonic Maxwell")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Standard,
    Multimodes,
    /// Both algorithms with common random numbers, plus the error table.
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or both algorithms and write artifacts to a directory.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_enum, default_value = "multimodes")]
        algorithm: AlgorithmArg,
        /// Output directory.
        #[arg(long, default_value = "mcipdg-out")]
        out: PathBuf,
        /// Number of leading samples whose eta/xi fields are dumped.
        #[arg(long, default_value_t = 1)]
        dump_fields: usize,
    },
    /// Error/timing table `N = 0..=n_max` comparing both algorithms.
    Compare {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Largest mode index; defaults to the configured `modes`.
        #[arg(long)]
        n_max: Option<usize>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error tables for every epsilon of a preset sweep.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Covariance eigenvalues and cumulative energy.
    KlInfo {
        #[arg(long = "L", default_value_t = 4)]
        cells_per_axis: usize,
        #[arg(long, default_value_t = 0.5)]
        ell: f64,
        /// Energy fraction used for the suggested truncation.
        #[arg(long, default_value_t = 0.99)]
        fraction: f64,
        /// Emit a JSON summary instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Mesh counts as JSON.
    MeshInfo {
        #[arg(long = "L")]
        cells_per_axis: usize,
    },
    /// Write the deterministic matrix as `i j re im` triplets and print its hash.
    ExportMatrix {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convergence-condition products and source moments as JSON.
    Diagnostics {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<mcipdg::Error>() {
        Some(e) if e.is_numerical() => 3,
        Some(mcipdg::Error::InvalidConfig(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn warn(cfg: &RunConfig, warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: epsilon = {}: {w}", cfg.epsilon);
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Run {
            cfg,
            algorithm,
            out,
            dump_fields,
        } => cmd_run(&cfg.resolve()?, algorithm, &out, dump_fields),
        Command::Compare { cfg, n_max, out } => {
            let cfg = cfg.resolve()?;
            let n_max = n_max.unwrap_or(cfg.modes);
            let cmp = compare_algorithms(&cfg, n_max)?;
            warn(&cfg, &cmp.multimodes.diagnostics.warnings);
            match out {
                Some(path) => output::write_error_rows(create(&path)?, &cmp.rows),
                None => output::write_error_rows(io::stdout().lock(), &cmp.rows),
            }
        }
        Command::Sweep { cfg, out } => {
            let base = cfg.resolve()?;
            let epsilons = cfg.preset.map_or(&config::EPSILON_SWEEP[..], Preset::epsilons);
            let mut tables = Vec::new();
            for &eps in epsilons {
                let c = RunConfig {
                    epsilon: eps,
                    ..base.clone()
                };
                let cmp = compare_algorithms(&c, c.modes)?;
                warn(&c, &cmp.multimodes.diagnostics.warnings);
                tables.push((eps, cmp.rows));
            }
            match out {
                Some(path) => output::write_sweep(create(&path)?, &tables),
                None => output::write_sweep(io::stdout().lock(), &tables),
            }
        }
        Command::KlInfo {
            cells_per_axis,
            ell,
            fraction,
            json,
        } => cmd_kl_info(cells_per_axis, ell, fraction, json),
        Command::MeshInfo { cells_per_axis } => {
            let mesh = build_uniform_mesh(cells_per_axis)
                .map_err(|e| ConfigError(e.to_string()))?;
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &mesh.summary())?;
            writeln!(out)?;
            Ok(())
        }
        Command::ExportMatrix { cfg, out } => {
            let cfg = cfg.resolve()?;
            let mesh = build_uniform_mesh(cfg.cells_per_axis)?;
            let a = assemble_a_h(&mesh, &cfg.dg_params()?)?;
            let mut w = create(&out)?;
            a.write_triplets(&mut w)?;
            w.flush()?;
            println!("{}", a.content_hash());
            Ok(())
        }
        Command::Diagnostics { cfg } => {
            let cfg = cfg.resolve()?;
            let d = diagnostics(&DiagnosticInputs {
                epsilon: cfg.epsilon,
                k: cfg.k,
                c0: cfg.c0,
                c0_hat: cfg.c0_hat,
                mu: cfg.mu,
            });
            let moments = estimate_source_moments(&cfg)?;
            #[derive(Serialize)]
            struct Report {
                #[serde(flatten)]
                diagnostics: mcipdg::driver::Diagnostics,
                source_mean_l2_sq: f64,
                source_mean_div_sq: f64,
            }
            let report = Report {
                diagnostics: d,
                source_mean_l2_sq: moments.mean_l2_sq,
                source_mean_div_sq: moments.mean_div_sq,
            };
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn create(path: &std::path::Path) -> anyhow::Result<io::BufWriter<std::fs::File>> {
    let f = std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(io::BufWriter::new(f))
}

fn cmd_run(
    cfg: &RunConfig,
    algorithm: AlgorithmArg,
    out: &std::path::Path,
    dump_fields: usize,
) -> anyhow::Result<()> {
    let problem = Problem::new(cfg)?;
    match algorithm {
        AlgorithmArg::Standard => {
            let r = run_standard(cfg)?;
            warn(cfg, &r.diagnostics.warnings);
            output::write_run_dir(out, &problem, "standard", &[&r], None, dump_fields)
        }
        AlgorithmArg::Multimodes => {
            let r = run_multimodes(cfg)?;
            warn(cfg, &r.diagnostics.warnings);
            output::write_run_dir(out, &problem, "multimodes", &[&r], None, dump_fields)
        }
        AlgorithmArg::Both => {
            let cmp = compare_algorithms(cfg, cfg.modes)?;
            warn(cfg, &cmp.multimodes.diagnostics.warnings);
            output::write_run_dir(
                out,
                &problem,
                "both",
                &[&cmp.standard, &cmp.multimodes],
                Some(&cmp.rows),
                dump_fields,
            )
        }
    }
}

fn cmd_kl_info(cells_per_axis: usize, ell: f64, fraction: f64, json: bool) -> anyhow::Result<()> {
    if cells_per_axis == 0 || cells_per_axis > KL_MAX_CELLS_PER_AXIS {
        return Err(ConfigError(format!(
            "kl-info needs 1 <= L <= {KL_MAX_CELLS_PER_AXIS} for a dense eigensolve, got {cells_per_axis}"
        ))
        .into());
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(ConfigError(format!("fraction must be in (0, 1], got {fraction}")).into());
    }
    let spec = CovarianceSpec::exponential(ell).map_err(|e| ConfigError(e.to_string()))?;
    let mesh = build_uniform_mesh(cells_per_axis)?;
    let kl = compute_kl(&mesh, &spec)?;
    let energy = kl.cumulative_energy();
    let suggested = kl.truncation_for(fraction);
    let mut out = io::stdout().lock();
    if json {
        #[derive(Serialize)]
        struct KlReport<'a> {
            cells: usize,
            correlation_length: f64,
            eigenvalues: &'a [f64],
            cumulative_energy: &'a [f64],
            trace: f64,
            fraction: f64,
            suggested_truncation: usize,
        }
        serde_json::to_writer_pretty(
            &mut out,
            &KlReport {
                cells: mesh.num_cells(),
                correlation_length: ell,
                eigenvalues: kl.eigenvalues(),
                cumulative_energy: &energy,
                trace: kl.eigenvalues().iter().sum(),
                fraction,
                suggested_truncation: suggested,
            },
        )?;
        writeln!(out)?;
    } else {
        let mut wr = csv::Writer::from_writer(&mut out);
        wr.write_record(output::KL_HEADER.split(','))?;
        for (i, (l, e)) in kl.eigenvalues().iter().zip(&energy).enumerate() {
            wr.write_record([(i + 1).to_string(), l.to_string(), e.to_string()])?;
        }
        wr.flush()?;
        eprintln!("suggested truncation for {fraction} energy: {suggested}");
    }
    Ok(())
}
