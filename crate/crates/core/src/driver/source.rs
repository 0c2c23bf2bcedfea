//! Random source term and its moments.

use num_complex::Complex64;

use crate::dg::{CVec3, QuadratureRule};
use crate::mesh::{HexMesh, Point3};
use crate::Result;

use super::config::{SourceConfig, SourceKind};

/// Source `f(omega, x)` given a cellwise constant phase perturbation `xi`.
#[derive(Clone, Debug)]
pub struct Source {
    kind: SourceKind,
    k: f64,
    scale: f64,
    constant: [f64; 3],
}

impl Source {
    pub fn new(cfg: &SourceConfig, k: f64) -> Self {
        Self {
            kind: cfg.kind,
            k,
            scale: cfg.scale,
            constant: cfg.constant,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == SourceKind::Zero || self.scale == 0.0
    }

    pub fn eval(&self, xi: f64, x: Point3) -> CVec3 {
        let zero = Complex64::new(0.0, 0.0);
        match self.kind {
            SourceKind::PlaneWave => {
                let kk = self.k * (1.0 + xi);
                x.map(|t| Complex64::from_polar(self.scale, kk * t))
            }
            SourceKind::Constant => self.constant.map(|c| Complex64::new(self.scale * c, 0.0)),
            SourceKind::Zero => [zero; 3],
        }
    }

    /// Analytic divergence for cellwise constant `xi`.
    pub fn divergence(&self, xi: f64, x: Point3) -> Complex64 {
        match self.kind {
            SourceKind::PlaneWave => {
                let kk = self.k * (1.0 + xi);
                let sum: Complex64 = x.iter().map(|t| Complex64::from_polar(1.0, kk * t)).sum();
                Complex64::new(0.0, kk * self.scale) * sum
            }
            SourceKind::Constant | SourceKind::Zero => Complex64::new(0.0, 0.0),
        }
    }

    /// `(||f||^2_{L^2(D)}, ||div f||^2_{L^2(D)})` for one realization of `xi`.
    pub fn norms_sq(&self, mesh: &HexMesh, xi: &[f64], q: usize) -> Result<(f64, f64)> {
        let rule = QuadratureRule::cube(q)?;
        let vol = mesh.h().powi(3);
        let (mut f2, mut d2) = (0.0, 0.0);
        for (cell, &xc) in xi.iter().enumerate() {
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let x = mesh.to_physical(cell, *p);
                let v = self.eval(xc, x);
                f2 += w * vol * v.iter().map(|z| z.norm_sqr()).sum::<f64>();
                d2 += w * vol * self.divergence(xc, x).norm_sqr();
            }
        }
        Ok((f2, d2))
    }
}

/// Monte Carlo estimates of `E||f||^2` and `E||div f||^2`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SourceMoments {
    pub mean_l2_sq: f64,
    pub mean_div_sq: f64,
}

impl SourceMoments {
    /// `E||f||^2 + E||div f||^2`.
    pub fn total(&self) -> f64 {
        self.mean_l2_sq + self.mean_div_sq
    }
}
