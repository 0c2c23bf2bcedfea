//! Monte Carlo drivers: the standard per-sample solver, the multi-modes
//! solver with a single shared factorization, and their comparison.
//!
//! Sample `j` always draws from its own stream `sample_stream(seed, j)`:
//! first the coefficient perturbation `eta`, then (if enabled) the source
//! phase `xi`. Both algorithms therefore see identical draws for identical
//! configurations (common random numbers).
//!
//! Samples are solved in fixed-size chunks in parallel and accumulated in
//! sample-index order, so results are bitwise independent of the worker
//! count.
//!
//! Mode convention: a run with `modes = N` computes `E_0, ..., E_N` and
//! `Psi_N = sum_{n=0}^{N} eps^n phi_n`, so `Psi_0 = phi_0` is the
//! unperturbed mean.

mod config;
mod diagnostics;
mod source;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_a_h, assemble_load, assemble_standard, mode_source_into, DgParams, LoadVector,
    SystemMatrix,
};
use crate::dg::{dg_norm, l2_norm, DgField, Penalty};
use crate::linalg::{factorize, Factorization};
use crate::mesh::{HexMesh, MeshSummary};
use crate::par::{self, Workers};
use crate::random_field::{
    compute_kl, sample_stream, uniform_values, FieldKind, FieldSample, GaussianSampler, KlBasis,
};
use crate::{Error, Result};

pub use config::{FieldConfig, RunConfig, SourceConfig, SourceKind};
pub use diagnostics::{diagnostics, DiagnosticInputs, Diagnostics};
pub use source::{Source, SourceMoments};

/// Samples solved concurrently before their results are folded into the
/// running means.
const CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Standard,
    Multimodes,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Standard => "standard",
            Algorithm::Multimodes => "multimodes",
        })
    }
}

enum FieldModel {
    Gaussian { sampler: GaussianSampler, clamp: bool },
    Uniform,
    Kl { basis: KlBasis, truncation: usize },
    Constant(f64),
}

impl FieldModel {
    fn new(cfg: &RunConfig, mesh: &HexMesh) -> Result<Self> {
        let f = &cfg.field;
        Ok(match f.kind {
            FieldKind::Gaussian => FieldModel::Gaussian {
                sampler: GaussianSampler::new(mesh, &cfg.covariance()?)?,
                clamp: f.clamp,
            },
            FieldKind::Uniform => FieldModel::Uniform,
            FieldKind::Kl => {
                let basis = compute_kl(mesh, &cfg.covariance()?)?;
                let truncation = f.kl_truncation.unwrap_or(basis.len());
                if truncation > basis.len() {
                    return Err(Error::config(format!(
                        "kl_truncation {truncation} exceeds the {} available modes",
                        basis.len()
                    )));
                }
                FieldModel::Kl { basis, truncation }
            }
            FieldKind::Constant => FieldModel::Constant(f.constant_value),
        })
    }

    fn draw<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            FieldModel::Gaussian { sampler, clamp } => Ok(sampler.sample_values(rng, *clamp)),
            FieldModel::Uniform => Ok(uniform_values(n, rng)),
            FieldModel::Kl { basis, truncation } => {
                // zeta is normalized by sqrt(lambda_1); undo it so eta has
                // the covariance of the truncated expansion
                let s = basis.epsilon();
                Ok(basis
                    .sample_zeta_values(*truncation, rng)?
                    .into_iter()
                    .map(|z| s * z)
                    .collect())
            }
            FieldModel::Constant(v) => Ok(vec![*v; n]),
        }
    }
}

/// Random input of one Monte Carlo sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDraw {
    pub index: usize,
    /// Cellwise perturbation of the refraction index.
    pub eta: Vec<f64>,
    /// Cellwise phase perturbation of the source; zeros when disabled.
    pub xi: Vec<f64>,
}

/// Mesh, discretization and random model of a configuration.
pub struct Problem {
    config: RunConfig,
    mesh: HexMesh,
    params: DgParams,
    field: FieldModel,
    source: Source,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("config", &self.config)
            .field("mesh", &self.mesh.summary())
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let mesh = HexMesh::uniform(config.cells_per_axis)?;
        let params = config.dg_params()?;
        let field = FieldModel::new(config, &mesh)?;
        let source = Source::new(&config.source, config.k);
        Ok(Self {
            config: config.clone(),
            mesh,
            params,
            field,
            source,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn mesh(&self) -> &HexMesh {
        &self.mesh
    }

    pub fn params(&self) -> &DgParams {
        &self.params
    }

    pub fn penalty(&self) -> Penalty {
        self.params.penalty
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// Draws `eta` then `xi` from the stream of sample `index`.
    pub fn draw(&self, index: usize) -> Result<SampleDraw> {
        let n = self.mesh.num_cells();
        let mut rng = sample_stream(self.config.seed, index as u64);
        let eta = self.field.draw(n, &mut rng)?;
        let xi = if self.config.source.random_phase && !self.source.is_zero() {
            self.field.draw(n, &mut rng)?
        } else {
            vec![0.0; n]
        };
        Ok(SampleDraw { index, eta, xi })
    }

    pub fn eta_sample(&self, draw: &SampleDraw) -> Result<FieldSample> {
        FieldSample::new(&self.mesh, draw.eta.clone(), self.config.field.kind)
    }

    pub fn xi_sample(&self, draw: &SampleDraw) -> Result<FieldSample> {
        FieldSample::new(&self.mesh, draw.xi.clone(), self.config.field.kind)
    }

    /// Load vector of `f(omega_j)`.
    pub fn load(&self, draw: &SampleDraw) -> Result<LoadVector> {
        if self.source.is_zero() {
            let dim = crate::dg::LOCAL_DOFS * self.mesh.num_cells();
            return Ok(LoadVector(vec![Complex64::new(0.0, 0.0); dim]));
        }
        let xi = &draw.xi;
        let src = &self.source;
        assemble_load(&self.mesh, |cell, x| src.eval(xi[cell], x), self.config.load_quad_order)
    }

    /// `alpha = 1 + eps * eta` per cell.
    pub fn alpha(&self, draw: &SampleDraw) -> Vec<f64> {
        draw.eta.iter().map(|e| 1.0 + self.config.epsilon * e).collect()
    }

    /// The sample-independent matrix of `a_h`.
    pub fn deterministic_matrix(&self) -> Result<SystemMatrix> {
        assemble_a_h(&self.mesh, &self.params)
    }

    /// Per-sample system of the standard algorithm.
    pub fn sample_matrix(&self, draw: &SampleDraw) -> Result<SystemMatrix> {
        assemble_standard(&self.mesh, &self.params, &self.alpha(draw))
    }

    /// Solves the full perturbed problem for one draw, factorizing its own
    /// matrix.
    pub fn solve_standard(&self, draw: &SampleDraw) -> Result<DgField> {
        let fact = factorize(&self.sample_matrix(draw)?)?;
        let b = self.load(draw)?;
        DgField::from_coeffs(&self.mesh, fact.solve(b.as_slice())?)
    }

    /// Modes `E_0..=E_modes` of one draw using a factorization of `a_h`.
    pub fn solve_modes(
        &self,
        fact: &Factorization,
        draw: &SampleDraw,
        modes: usize,
    ) -> Result<Vec<DgField>> {
        let mut timing = Vec::new();
        let load = self.load(draw)?;
        self.solve_modes_timed(fact, draw, load, modes, &mut timing)
    }

    fn solve_modes_timed(
        &self,
        fact: &Factorization,
        draw: &SampleDraw,
        load: LoadVector,
        modes: usize,
        timing: &mut Vec<f64>,
    ) -> Result<Vec<DgField>> {
        let start = Instant::now();
        let mut rhs = load.0;
        fact.solve_in_place(&mut rhs)?;
        let mut out = vec![DgField::from_coeffs(&self.mesh, rhs)?];
        timing.push(start.elapsed().as_secs_f64());
        let zero = DgField::zeros(&self.mesh);
        for n in 0..modes {
            let start = Instant::now();
            let prev2 = if n == 0 { &zero } else { &out[n - 1] };
            let mut rhs = vec![Complex64::new(0.0, 0.0); out[n].len()];
            mode_source_into(&self.mesh, self.config.k, &draw.eta, &out[n], prev2, &mut rhs)?;
            fact.solve_in_place(&mut rhs)?;
            out.push(DgField::from_coeffs(&self.mesh, rhs)?);
            timing.push(start.elapsed().as_secs_f64());
        }
        Ok(out)
    }

    fn workers(&self) -> Workers {
        Workers(self.config.workers)
    }
}

/// Solves `f(j)` for every sample, `CHUNK` at a time in parallel, and
/// hands the results to `sink` in index order.
fn for_each_sample<T, F, S>(samples: usize, f: F, mut sink: S) -> Result<()>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
    S: FnMut(usize, T) -> Result<()>,
{
    let mut start = 0;
    while start < samples {
        let end = (start + CHUNK).min(samples);
        for (i, r) in par::map_range(start..end, &f).into_iter().enumerate() {
            sink(start + i, r?)?;
        }
        start = end;
    }
    Ok(())
}

/// Wall-clock and summed per-sample timings, in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    /// Assembly and factorization of the shared matrix (multi-modes only).
    pub setup_s: f64,
    /// Sum of all factorization times.
    pub factorization_s: f64,
    /// Wall time of the sample loop.
    pub sampling_s: f64,
    /// Wall time of the whole run.
    pub total_s: f64,
    /// Sum over samples of the time spent drawing and assembling the load.
    pub load_s: f64,
    /// Sum over samples of the per-sample solve time (standard), or of the
    /// time spent on mode `n` (multi-modes, one entry per mode).
    pub solve_s: Vec<f64>,
}

impl Timings {
    /// Single-thread cost estimate: setup plus every per-sample timing.
    pub fn cpu_s(&self) -> f64 {
        self.setup_s + self.load_s + self.solve_s.iter().sum::<f64>()
    }

    /// Single-thread cost estimate of a multi-modes run stopped after mode
    /// `n`.
    pub fn cpu_s_through_mode(&self, n: usize) -> f64 {
        let k = (n + 1).min(self.solve_s.len());
        self.setup_s + self.load_s + self.solve_s[..k].iter().sum::<f64>()
    }

    /// Mean per-sample time.
    pub fn per_sample_s(&self, samples: usize) -> f64 {
        (self.load_s + self.solve_s.iter().sum::<f64>()) / samples.max(1) as f64
    }
}

/// Statistics of the realized coefficient perturbations `eta`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub mean: f64,
    pub variance: f64,
    /// Largest `|eta|` over all cells and samples.
    pub sup_max: f64,
    /// Largest cell-difference quotient over all samples.
    pub lipschitz_max: f64,
}

#[derive(Default)]
struct FieldStatsAcc {
    n: usize,
    sum: f64,
    sum_sq: f64,
    sup: f64,
    lip: f64,
}

impl FieldStatsAcc {
    fn add(&mut self, s: &FieldSample) {
        for v in s.values() {
            self.n += 1;
            self.sum += v;
            self.sum_sq += v * v;
        }
        self.sup = self.sup.max(s.sup_norm());
        self.lip = self.lip.max(s.lipschitz_surrogate());
    }

    fn finish(&self) -> FieldStats {
        let n = self.n.max(1) as f64;
        let mean = self.sum / n;
        FieldStats {
            mean,
            variance: (self.sum_sq / n - mean * mean).max(0.0),
            sup_max: self.sup,
            lipschitz_max: self.lip,
        }
    }
}

/// Outcome of one Monte Carlo run.
#[derive(Clone, Debug)]
pub struct McResult {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub samples: usize,
    /// Sample mean of the (combined) solution.
    pub mean: DgField,
    /// Sample means `phi_0..=phi_N` of the modes (multi-modes only).
    pub mode_means: Vec<DgField>,
    pub timings: Timings,
    /// Number of LU factorizations performed.
    pub factorizations: usize,
    pub diagnostics: Diagnostics,
    pub field_stats: FieldStats,
    /// Content hash of the deterministic `a_h` matrix.
    pub matrix_hash: String,
}

impl McResult {
    /// `Psi_n = sum_{m <= n} eps^m phi_m` from the stored mode means.
    pub fn truncated(&self, n: usize) -> Result<DgField> {
        if n >= self.mode_means.len() {
            return Err(Error::OutOfRange {
                index: n,
                len: self.mode_means.len(),
            });
        }
        let mut out = self.mode_means[0].clone();
        for (m, phi) in self.mode_means.iter().enumerate().take(n + 1).skip(1) {
            out.axpy(Complex64::new(self.epsilon.powi(m as i32), 0.0), phi);
        }
        Ok(out)
    }
}

fn diagnostics_for(cfg: &RunConfig, stats: &FieldStats) -> Diagnostics {
    let mu = if cfg.mu_from_field {
        stats.lipschitz_max
    } else {
        cfg.mu
    };
    diagnostics(&DiagnosticInputs {
        epsilon: cfg.epsilon,
        k: cfg.k,
        c0: cfg.c0,
        c0_hat: cfg.c0_hat,
        mu,
    })
}

/// Standard algorithm: assemble, factorize and solve the perturbed system
/// of every sample, averaging the solutions.
pub fn run_standard(cfg: &RunConfig) -> Result<McResult> {
    let problem = Problem::new(cfg)?;
    par::with_workers(problem.workers(), || standard_impl(&problem))
}

struct StandardSample {
    solution: DgField,
    eta: FieldSample,
    load_s: f64,
    solve_s: f64,
    factor_s: f64,
}

fn standard_impl(problem: &Problem) -> Result<McResult> {
    let cfg = problem.config();
    let t0 = Instant::now();
    let matrix_hash = problem.deterministic_matrix()?.content_hash();
    let counter = AtomicUsize::new(0);
    let inv_m = Complex64::new(1.0 / cfg.samples as f64, 0.0);
    let mut mean = DgField::zeros(problem.mesh());
    let mut stats = FieldStatsAcc::default();
    let mut timings = Timings::default();
    let mut solve_s = 0.0;

    let t_loop = Instant::now();
    for_each_sample(
        cfg.samples,
        |j| {
            let start = Instant::now();
            let draw = problem.draw(j)?;
            let load = problem.load(&draw)?;
            let load_s = start.elapsed().as_secs_f64();
            let start = Instant::now();
            let fact = factorize(&problem.sample_matrix(&draw)?)?;
            counter.fetch_add(1, Ordering::Relaxed);
            let x = fact.solve(load.as_slice())?;
            Ok(StandardSample {
                solution: DgField::from_coeffs(problem.mesh(), x)?,
                eta: problem.eta_sample(&draw)?,
                load_s,
                solve_s: start.elapsed().as_secs_f64(),
                factor_s: fact.elapsed().as_secs_f64(),
            })
        },
        |_, s| {
            mean.axpy(inv_m, &s.solution);
            stats.add(&s.eta);
            timings.load_s += s.load_s;
            timings.factorization_s += s.factor_s;
            solve_s += s.solve_s;
            Ok(())
        },
    )?;
    timings.sampling_s = t_loop.elapsed().as_secs_f64();
    timings.solve_s = vec![solve_s];
    timings.total_s = t0.elapsed().as_secs_f64();

    let field_stats = stats.finish();
    Ok(McResult {
        algorithm: Algorithm::Standard,
        epsilon: cfg.epsilon,
        samples: cfg.samples,
        mean,
        mode_means: Vec::new(),
        timings,
        factorizations: counter.into_inner(),
        diagnostics: diagnostics_for(cfg, &field_stats),
        field_stats,
        matrix_hash,
    })
}

/// Multi-modes algorithm: one factorization of `a_h`, then `modes + 1`
/// substitutions per sample.
pub fn run_multimodes(cfg: &RunConfig) -> Result<McResult> {
    let problem = Problem::new(cfg)?;
    par::with_workers(problem.workers(), || multimodes_impl(&problem))
}

struct ModeSample {
    modes: Vec<DgField>,
    eta: FieldSample,
    load_s: f64,
    mode_s: Vec<f64>,
}

fn multimodes_impl(problem: &Problem) -> Result<McResult> {
    let cfg = problem.config();
    let n_modes = cfg.modes + 1;
    let t0 = Instant::now();
    let a = problem.deterministic_matrix()?;
    let matrix_hash = a.content_hash();
    let fact = factorize(&a)?;
    let factorizations = 1;
    let mut timings = Timings {
        factorization_s: fact.elapsed().as_secs_f64(),
        setup_s: t0.elapsed().as_secs_f64(),
        solve_s: vec![0.0; n_modes],
        ..Default::default()
    };

    let eps = cfg.epsilon;
    let powers: Vec<Complex64> = (0..n_modes)
        .map(|n| Complex64::new(eps.powi(n as i32), 0.0))
        .collect();
    let inv_m = Complex64::new(1.0 / cfg.samples as f64, 0.0);
    let mut mean = DgField::zeros(problem.mesh());
    let mut mode_means = vec![DgField::zeros(problem.mesh()); n_modes];
    let mut stats = FieldStatsAcc::default();

    let t_loop = Instant::now();
    for_each_sample(
        cfg.samples,
        |j| {
            let start = Instant::now();
            let draw = problem.draw(j)?;
            let load = problem.load(&draw)?;
            let load_s = start.elapsed().as_secs_f64();
            let mut mode_s = Vec::with_capacity(n_modes);
            let modes = problem.solve_modes_timed(&fact, &draw, load, cfg.modes, &mut mode_s)?;
            Ok(ModeSample {
                modes,
                eta: problem.eta_sample(&draw)?,
                load_s,
                mode_s,
            })
        },
        |_, s| {
            let mut combined = s.modes[0].clone();
            for (n, e) in s.modes.iter().enumerate().skip(1) {
                combined.axpy(powers[n], e);
            }
            mean.axpy(inv_m, &combined);
            for (phi, e) in mode_means.iter_mut().zip(&s.modes) {
                phi.axpy(inv_m, e);
            }
            stats.add(&s.eta);
            timings.load_s += s.load_s;
            for (acc, t) in timings.solve_s.iter_mut().zip(&s.mode_s) {
                *acc += t;
            }
            Ok(())
        },
    )?;
    timings.sampling_s = t_loop.elapsed().as_secs_f64();
    timings.total_s = t0.elapsed().as_secs_f64();

    let field_stats = stats.finish();
    Ok(McResult {
        algorithm: Algorithm::Multimodes,
        epsilon: eps,
        samples: cfg.samples,
        mean,
        mode_means,
        timings,
        factorizations,
        diagnostics: diagnostics_for(cfg, &field_stats),
        field_stats,
        matrix_hash,
    })
}

/// One line of the error table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub l2_error: f64,
    pub dg_error: f64,
    #[serde(rename = "eps_pow_N")]
    pub eps_pow_n: f64,
    /// Single-thread cost estimate of multi-modes stopped after mode `N`.
    pub time_multimodes_s: f64,
    /// Single-thread cost estimate of the standard run.
    pub time_standard_s: f64,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub rows: Vec<ErrorRow>,
    pub standard: McResult,
    pub multimodes: McResult,
}

/// Runs both algorithms with common random numbers and tabulates
/// `||Psi_std - Psi_N||` for `N = 0..=n_max` by truncating the stored
/// mode means.
pub fn compare_algorithms(cfg: &RunConfig, n_max: usize) -> Result<Comparison> {
    let cfg = RunConfig {
        modes: n_max,
        ..cfg.clone()
    };
    let problem = Problem::new(&cfg)?;
    par::with_workers(problem.workers(), || {
        let standard = standard_impl(&problem)?;
        let multimodes = multimodes_impl(&problem)?;
        let t_std = standard.timings.cpu_s();
        let mut rows = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let diff = standard.mean.sub(&multimodes.truncated(n)?);
            rows.push(ErrorRow {
                n,
                l2_error: l2_norm(&diff, problem.mesh())?,
                dg_error: dg_norm(&diff, problem.mesh(), problem.penalty())?,
                eps_pow_n: cfg.epsilon.powi(n as i32),
                time_multimodes_s: multimodes.timings.cpu_s_through_mode(n),
                time_standard_s: t_std,
            });
        }
        Ok(Comparison {
            rows,
            standard,
            multimodes,
        })
    })
}

/// Monte Carlo estimate of `E||f||^2` and `E||div f||^2` over the
/// configured samples.
pub fn estimate_source_moments(cfg: &RunConfig) -> Result<SourceMoments> {
    let problem = Problem::new(cfg)?;
    let q = cfg.load_quad_order;
    par::with_workers(problem.workers(), || {
        let (mut f2, mut d2) = (0.0, 0.0);
        for_each_sample(
            cfg.samples,
            |j| {
                let draw = problem.draw(j)?;
                problem.source().norms_sq(problem.mesh(), &draw.xi, q)
            },
            |_, (a, b)| {
                f2 += a;
                d2 += b;
                Ok(())
            },
        )?;
        let m = cfg.samples as f64;
        Ok(SourceMoments {
            mean_l2_sq: f2 / m,
            mean_div_sq: d2 / m,
        })
    })
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub algorithm: String,
    pub seed: u64,
    pub matrix_hash: String,
    pub mesh: MeshSummary,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(cfg: &RunConfig, algorithm: &str, matrix_hash: &str) -> Result<Self> {
        Ok(Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            algorithm: algorithm.to_string(),
            seed: cfg.seed,
            matrix_hash: matrix_hash.to_string(),
            mesh: HexMesh::uniform(cfg.cells_per_axis)?.summary(),
            config: cfg.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            cells_per_axis: 2,
            samples: 5,
            modes: 3,
            ..Default::default()
        }
    }

    #[test]
    fn draws_are_reproducible_and_distinct() {
        let p = Problem::new(&small()).unwrap();
        assert_eq!(p.draw(3).unwrap(), p.draw(3).unwrap());
        assert_ne!(p.draw(3).unwrap().eta, p.draw(4).unwrap().eta);
        assert_ne!(p.draw(3).unwrap().eta, p.draw(3).unwrap().xi);
    }

    #[test]
    fn phase_disabled_gives_zero_xi() {
        let mut cfg = small();
        cfg.source.random_phase = false;
        let p = Problem::new(&cfg).unwrap();
        assert!(p.draw(0).unwrap().xi.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn multimodes_factorizes_once() {
        let r = run_multimodes(&small()).unwrap();
        assert_eq!(r.factorizations, 1);
        assert_eq!(r.mode_means.len(), 4);
        assert_eq!(r.timings.solve_s.len(), 4);
    }

    #[test]
    fn standard_factorizes_per_sample() {
        let r = run_standard(&small()).unwrap();
        assert_eq!(r.factorizations, 5);
        assert!(r.mode_means.is_empty());
        assert!(r.truncated(0).is_err());
    }

    #[test]
    fn truncation_reproduces_mean() {
        let r = run_multimodes(&small()).unwrap();
        let psi = r.truncated(3).unwrap();
        let d = psi.sub(&r.mean);
        let rel = d.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max)
            / r.mean.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn kl_truncation_checked() {
        let mut cfg = small();
        cfg.field.kind = FieldKind::Kl;
        cfg.field.kl_truncation = Some(9);
        assert!(Problem::new(&cfg).is_err());
        cfg.field.kl_truncation = Some(3);
        assert!(Problem::new(&cfg).is_ok());
    }

    #[test]
    fn manifest_round_trips() {
        let m = Manifest::new(&small(), "multimodes", "abc").unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<Manifest>(&s).unwrap(), m);
    }
}
