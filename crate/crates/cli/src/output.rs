//! CSV and JSON artifacts. Column sets are part of the interface; the
//! golden-header tests pin them.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use mcipdg::dg::{DgField, LOCAL_DOFS, MONOMIALS};
use mcipdg::driver::{ErrorRow, FieldStats, Manifest, McResult, Problem, Timings};
use serde::Serialize;

pub const ERRORS_HEADER: &str = "N,l2_error,dg_error,eps_pow_N,time_multimodes_s,time_standard_s";
pub const TIMINGS_HEADER: &str = "algorithm,samples,modes,factorizations,setup_s,factorization_s,load_s,solve_s,sampling_s,total_s,cpu_s";
pub const SOLUTION_HEADER: &str = "dof,cell,component,monomial,re,im";
pub const SWEEP_HEADER: &str =
    "epsilon,N,l2_error,dg_error,eps_pow_N,time_multimodes_s,time_standard_s";
pub const KL_HEADER: &str = "k,eigenvalue,cumulative_energy";

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_error_rows<W: Write>(w: W, rows: &[ErrorRow]) -> anyhow::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    if rows.is_empty() {
        wr.write_record(ERRORS_HEADER.split(','))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(w: W, tables: &[(f64, Vec<ErrorRow>)]) -> anyhow::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SWEEP_HEADER.split(','))?;
    for (eps, rows) in tables {
        for r in rows {
            wr.write_record([
                eps.to_string(),
                r.n.to_string(),
                r.l2_error.to_string(),
                r.dg_error.to_string(),
                r.eps_pow_n.to_string(),
                r.time_multimodes_s.to_string(),
                r.time_standard_s.to_string(),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn write_timings<W: Write>(w: W, results: &[&McResult], modes: usize) -> anyhow::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(TIMINGS_HEADER.split(','))?;
    for r in results {
        let t: &Timings = &r.timings;
        wr.write_record([
            r.algorithm.to_string(),
            r.samples.to_string(),
            modes.to_string(),
            r.factorizations.to_string(),
            t.setup_s.to_string(),
            t.factorization_s.to_string(),
            t.load_s.to_string(),
            t.solve_s.iter().sum::<f64>().to_string(),
            t.sampling_s.to_string(),
            t.total_s.to_string(),
            t.cpu_s().to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Coefficients with full precision so files compare bitwise.
pub fn write_solution<W: Write>(mut w: W, field: &DgField) -> anyhow::Result<()> {
    writeln!(w, "{SOLUTION_HEADER}")?;
    for (dof, z) in field.coeffs().iter().enumerate() {
        let cell = dof / LOCAL_DOFS;
        let local = dof % LOCAL_DOFS;
        writeln!(
            w,
            "{dof},{cell},{},{},{:.17e},{:.17e}",
            local / MONOMIALS,
            local % MONOMIALS,
            z.re,
            z.im
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
pub struct ResultSummary<'a> {
    pub algorithm: String,
    pub factorizations: usize,
    pub timings: &'a Timings,
    pub diagnostics: &'a mcipdg::driver::Diagnostics,
    pub field_stats: &'a FieldStats,
}

#[derive(Serialize)]
pub struct RunRecord<'a> {
    #[serde(flatten)]
    pub manifest: Manifest,
    pub results: Vec<ResultSummary<'a>>,
}

pub fn summary(r: &McResult) -> ResultSummary<'_> {
    ResultSummary {
        algorithm: r.algorithm.to_string(),
        factorizations: r.factorizations,
        timings: &r.timings,
        diagnostics: &r.diagnostics,
        field_stats: &r.field_stats,
    }
}

/// Writes `manifest.json`, `timings.csv`, `errors.csv` (when both
/// algorithms ran), `solution/` and `fields/` into `dir`.
pub fn write_run_dir(
    dir: &Path,
    problem: &Problem,
    algorithm: &str,
    results: &[&McResult],
    errors: Option<&[ErrorRow]>,
    dump_fields: usize,
) -> anyhow::Result<()> {
    let cfg = problem.config();
    fs::create_dir_all(dir.join("solution"))
        .with_context(|| format!("cannot create {}", dir.display()))?;
    fs::create_dir_all(dir.join("fields"))?;

    let hash = results.first().map(|r| r.matrix_hash.clone()).unwrap_or_default();
    let record = RunRecord {
        manifest: Manifest::new(cfg, algorithm, &hash)?,
        results: results.iter().map(|r| summary(r)).collect(),
    };
    let mut w = create(&dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut w, &record)?;
    writeln!(w)?;
    w.flush()?;

    write_timings(create(&dir.join("timings.csv"))?, results, cfg.modes)?;
    if let Some(rows) = errors {
        write_error_rows(create(&dir.join("errors.csv"))?, rows)?;
    }
    for r in results {
        let name = format!("psi_{}.csv", r.algorithm);
        write_solution(create(&dir.join("solution").join(name))?, &r.mean)?;
        for (n, phi) in r.mode_means.iter().enumerate() {
            write_solution(create(&dir.join("solution").join(format!("phi_{n}.csv")))?, phi)?;
        }
    }
    for j in 0..dump_fields.min(cfg.samples) {
        let draw = problem.draw(j)?;
        problem
            .eta_sample(&draw)?
            .write_csv(create(&dir.join("fields").join(format!("eta_{j:04}.csv")))?)?;
        problem
            .xi_sample(&draw)?
            .write_csv(create(&dir.join("fields").join(format!("xi_{j:04}.csv")))?)?;
    }
    Ok(())
}
