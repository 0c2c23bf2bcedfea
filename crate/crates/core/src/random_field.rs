//! Piecewise-constant random fields over mesh cells.
//!
//! Every sampler takes an explicit RNG. Monte Carlo drivers obtain one
//! independent ChaCha stream per sample from `(master seed, sample index)`
//! via [`sample_stream`], so results never depend on execution order.

use std::io::Write;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::mesh::HexMesh;
use crate::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero when
/// the covariance has to be factorized spectrally.
const EIGEN_FLOOR_REL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Gaussian,
    Uniform,
    Kl,
    Constant,
}

/// One realization of a cellwise constant field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    values: Vec<f64>,
    kind: FieldKind,
    sup_norm: f64,
    lipschitz: f64,
}

impl FieldSample {
    pub fn new(mesh: &HexMesh, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        if values.len() != mesh.num_cells() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_cells(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("field sample contains non-finite values"));
        }
        let sup_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lipschitz = mesh
            .interior_faces()
            .iter()
            .map(|f| (values[f.owner] - values[f.neighbor]).abs() / mesh.h())
            .fold(0.0f64, f64::max);
        Ok(Self {
            values,
            kind,
            sup_norm,
            lipschitz,
        })
    }

    pub fn constant(mesh: &HexMesh, value: f64) -> Result<Self> {
        Self::new(mesh, vec![value; mesh.num_cells()], FieldKind::Constant)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Largest adjacent-cell difference quotient, a stand-in for
    /// `||grad eta||_inf` on piecewise constant fields.
    pub fn lipschitz_surrogate(&self) -> f64 {
        self.lipschitz
    }

    /// Writes `cell,value` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "cell,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{v:.17e}")?;
        }
        Ok(())
    }
}

/// Exponential covariance `C(x, y) = exp(-|x - y|_2 / ell)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub correlation_length: f64,
}

impl CovarianceSpec {
    /// `ell` may be `+inf` (perfect correlation).
    pub fn exponential(correlation_length: f64) -> Result<Self> {
        if correlation_length.is_nan() || correlation_length <= 0.0 {
            return Err(Error::config(format!(
                "correlation length must be positive, got {correlation_length}"
            )));
        }
        Ok(Self { correlation_length })
    }

    pub fn eval(&self, distance: f64) -> f64 {
        (-distance / self.correlation_length).exp()
    }

    /// Covariance matrix between cell centers.
    pub fn matrix(&self, mesh: &HexMesh) -> Mat<f64> {
        let cells = mesh.cells();
        let n = cells.len();
        Mat::from_fn(n, n, |i, j| {
            let (a, b) = (cells[i].center, cells[j].center);
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            self.eval(d)
        })
    }
}

/// How the covariance factor was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceFactor {
    Cholesky,
    /// Cholesky failed; `V diag(sqrt(max(lambda, 0)))` used instead.
    EigenFloored,
}

/// Reusable sampler `eta = F z` with `F F^T = C`.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    factor: Mat<f64>,
    method: CovarianceFactor,
    lower_triangular: bool,
}

impl GaussianSampler {
    pub fn new(mesh: &HexMesh, spec: &CovarianceSpec) -> Result<Self> {
        CovarianceSpec::exponential(spec.correlation_length)?;
        let cov = spec.matrix(mesh);
        match cov.llt(Side::Lower) {
            Ok(llt) => Ok(Self {
                factor: llt.L().to_owned(),
                method: CovarianceFactor::Cholesky,
                lower_triangular: true,
            }),
            Err(_) => {
                let (vals, vecs) = sym_eigen_desc(&cov)?;
                let floor = EIGEN_FLOOR_REL * vals.first().copied().unwrap_or(0.0);
                let n = cov.nrows();
                let factor = Mat::from_fn(n, n, |i, j| {
                    let l = if vals[j] > floor { vals[j].sqrt() } else { 0.0 };
                    vecs[(i, j)] * l
                });
                Ok(Self {
                    factor,
                    method: CovarianceFactor::EigenFloored,
                    lower_triangular: false,
                })
            }
        }
    }

    pub fn method(&self) -> CovarianceFactor {
        self.method
    }

    pub fn len(&self) -> usize {
        self.factor.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.factor.nrows() == 0
    }

    /// Draws `n` standard normals from `rng` and returns `F z`, optionally
    /// clamped to `[-1, 1]`.
    pub fn sample_values<R: Rng + ?Sized>(&self, rng: &mut R, clamp: bool) -> Vec<f64> {
        let n = self.factor.nrows();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        (0..n)
            .map(|i| {
                let cols = if self.lower_triangular { i + 1 } else { n };
                let v: f64 = (0..cols).map(|j| self.factor[(i, j)] * z[j]).sum();
                if clamp {
                    v.clamp(-1.0, 1.0)
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        mesh: &HexMesh,
        rng: &mut R,
        clamp: bool,
    ) -> Result<FieldSample> {
        FieldSample::new(mesh, self.sample_values(rng, clamp), FieldKind::Gaussian)
    }
}

/// Gaussian field with exponential covariance at cell centers. Builds a
/// fresh covariance factor; use [`GaussianSampler`] to amortize it.
pub fn sample_gaussian<R: Rng + ?Sized>(
    mesh: &HexMesh,
    spec: &CovarianceSpec,
    rng: &mut R,
    clamp: bool,
) -> Result<FieldSample> {
    GaussianSampler::new(mesh, spec)?.sample(mesh, rng, clamp)
}

pub fn uniform_values<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Independent `U(-1, 1)` value per cell.
pub fn sample_uniform<R: Rng + ?Sized>(mesh: &HexMesh, rng: &mut R) -> Result<FieldSample> {
    FieldSample::new(mesh, uniform_values(mesh.num_cells(), rng), FieldKind::Uniform)
}

/// Per-sample random stream: ChaCha8 seeded with `master_seed`, stream
/// number `index`.
pub fn sample_stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn sym_eigen_desc(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let n = m.nrows();
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns nondecreasing order
    let vals: Vec<f64> = (0..n).rev().map(|i| s[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok((vals, vecs))
}

/// Discrete Karhunen-Loeve basis of the cell-center covariance.
#[derive(Clone, Debug)]
pub struct KlBasis {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
    mean: Vec<f64>,
}

/// A KL realization together with its weak-form normalization
/// `field = mean + eps * zeta`, `eps = sqrt(lambda_1)`.
#[derive(Clone, Debug)]
pub struct KlSample {
    pub field: FieldSample,
    pub epsilon: f64,
    pub zeta: FieldSample,
}

/// Full eigendecomposition of the covariance matrix, eigenvalues descending.
/// The mean field defaults to one on every cell.
pub fn compute_kl(mesh: &HexMesh, spec: &CovarianceSpec) -> Result<KlBasis> {
    CovarianceSpec::exponential(spec.correlation_length)?;
    let (eigenvalues, eigenvectors) = sym_eigen_desc(&spec.matrix(mesh))?;
    Ok(KlBasis {
        eigenvalues,
        eigenvectors,
        mean: vec![1.0; mesh.num_cells()],
    })
}

impl KlBasis {
    pub fn with_mean(mut self, mean: Vec<f64>) -> Result<Self> {
        if mean.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: mean.len(),
            });
        }
        self.mean = mean;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Mat<f64> {
        &self.eigenvectors
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// `sqrt(lambda_1)`.
    pub fn epsilon(&self) -> f64 {
        self.eigenvalues.first().map_or(0.0, |l| l.max(0.0).sqrt())
    }

    /// Fraction of the total variance captured by the first `k` modes, for
    /// `k = 1..=len`.
    pub fn cumulative_energy(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().map(|l| l.max(0.0)).sum();
        let mut acc = 0.0;
        self.eigenvalues
            .iter()
            .map(|l| {
                acc += l.max(0.0);
                if total > 0.0 {
                    acc / total
                } else {
                    1.0
                }
            })
            .collect()
    }

    /// Smallest truncation capturing at least `fraction` of the variance.
    pub fn truncation_for(&self, fraction: f64) -> usize {
        self.cumulative_energy()
            .iter()
            .position(|&e| e >= fraction - 1e-15)
            .map_or(self.len(), |p| p + 1)
    }

    fn check_truncation(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            return Err(Error::config(format!(
                "KL truncation {k} not in 1..={}",
                self.len()
            )));
        }
        Ok(())
    }

    /// `sum_{k < K} sqrt(lambda_k / lambda_1) phi_k xi_k` for given
    /// standard-normal amplitudes (the normalized perturbation `zeta`).
    pub fn zeta_from(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.eigenvectors.nrows();
        let eps = self.epsilon();
        let mut out = vec![0.0; n];
        for (k, x) in xi.iter().enumerate() {
            let s = self.eigenvalues[k].max(0.0).sqrt();
            let scale = if eps > 0.0 { s / eps } else { 0.0 } * x;
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.eigenvectors[(i, k)] * scale;
            }
        }
        out
    }

    /// Normalized perturbation `zeta` only, drawing `truncation` normals.
    pub fn sample_zeta_values<R: Rng + ?Sized>(
        &self,
        truncation: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        self.check_truncation(truncation)?;
        let xi: Vec<f64> = (0..truncation).map(|_| rng.sample(StandardNormal)).collect();
        Ok(self.zeta_from(&xi))
    }

    /// `mean + sum_{k < K} sqrt(lambda_k) phi_k xi_k`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        mesh: &HexMesh,
        truncation: usize,
        rng: &mut R,
    ) -> Result<KlSample> {
        let zeta = self.sample_zeta_values(truncation, rng)?;
        let eps = self.epsilon();
        let field: Vec<f64> = self.mean.iter().zip(&zeta).map(|(m, z)| m + eps * z).collect();
        Ok(KlSample {
            field: FieldSample::new(mesh, field, FieldKind::Kl)?,
            epsilon: eps,
            zeta: FieldSample::new(mesh, zeta, FieldKind::Kl)?,
        })
    }

    /// `sum_k lambda_k phi_k phi_k^T` over the first `k` modes.
    pub fn reconstruct(&self, k: usize) -> Mat<f64> {
        let n = self.eigenvectors.nrows();
        let v = &self.eigenvectors;
        Mat::from_fn(n, n, |i, j| {
            (0..k.min(self.len()))
                .map(|m| self.eigenvalues[m] * v[(i, m)] * v[(j, m)])
                .sum()
        })
    }
}

/// Draws a KL sample truncated after `truncation` modes.
pub fn sample_from_kl<R: Rng + ?Sized>(
    basis: &KlBasis,
    mesh: &HexMesh,
    truncation: usize,
    rng: &mut R,
) -> Result<KlSample> {
    basis.sample(mesh, truncation, rng)
}
