//! Reusable sparse complex LU factorization.
//!
//! Backed by faer's supernodal LU with a COLAMD fill-reducing column
//! ordering and partial row pivoting. Both the factorization and every
//! triangular solve run single-threaded inside faer, so results do not
//! depend on the surrounding thread pool; parallelism lives one level up,
//! across Monte Carlo samples that share one immutable [`Factorization`].

use std::time::{Duration, Instant};

use dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuRef, NumericLu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, MatMut, Par};
use num_complex::Complex64;

use crate::assembly::SystemMatrix;
use crate::{Error, Result};

/// Stored `P A Q = L U`, reusable for any number of right-hand sides.
#[derive(Debug)]
pub struct Factorization {
    dim: usize,
    symbolic: SymbolicLu<usize>,
    numeric: NumericLu<usize, Complex64>,
    solve_req: StackReq,
    elapsed: Duration,
}

fn to_csc(a: &SystemMatrix) -> Result<SparseColMat<usize, Complex64>> {
    let mut triplets = Vec::with_capacity(a.nnz());
    for i in 0..a.dim() {
        for (j, v) in a.row(i) {
            triplets.push(Triplet::new(i, j, v));
        }
    }
    SparseColMat::try_new_from_triplets(a.dim(), a.dim(), &triplets)
        .map_err(|e| Error::Factorization(format!("{e:?}")))
}

impl Factorization {
    pub fn new(a: &SystemMatrix) -> Result<Self> {
        factorize(a)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Wall time spent factorizing.
    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }

    fn lu(&self) -> LuRef<'_, usize, Complex64> {
        LuRef::new_unchecked(&self.symbolic, &self.numeric)
    }

    /// Overwrites `x` (holding `b` on entry) with the solution of `A x = b`.
    pub fn solve_in_place(&self, x: &mut [Complex64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut buf = MemBuffer::new(self.solve_req);
        let n = self.dim;
        self.lu().solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(x, n, 1),
            Par::Seq,
            MemStack::new(&mut buf),
        );
        Ok(())
    }

    /// Returns `x` with `A x = b`. The factorization is not modified.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}

/// Factorizes `a`. A numerically singular matrix yields
/// [`Error::Singular`] carrying the offending pivot (or first non-finite
/// solution component).
pub fn factorize(a: &SystemMatrix) -> Result<Factorization> {
    let start = Instant::now();
    let n = a.dim();
    let csc = to_csc(a)?;
    let symbolic = factorize_symbolic_lu(csc.symbolic(), Default::default())
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let mut numeric = NumericLu::<usize, Complex64>::new();
    let req = symbolic.factorize_numeric_lu_scratch::<Complex64>(Par::Seq, Default::default());
    let mut buf = MemBuffer::new(req);
    symbolic
        .factorize_numeric_lu(
            &mut numeric,
            csc.as_ref(),
            Par::Seq,
            MemStack::new(&mut buf),
            Default::default(),
        )
        .map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::Singular { pivot: index },
            LuError::Generic(g) => Error::Factorization(format!("{g:?}")),
        })?;
    let solve_req = symbolic.solve_in_place_scratch::<Complex64>(1, Par::Seq);
    let fact = Factorization {
        dim: n,
        symbolic,
        numeric,
        solve_req,
        elapsed: start.elapsed(),
    };

    // Exactly zero pivots surface as non-finite values in a probe solve.
    if n > 0 {
        let probe = fact.solve(&vec![Complex64::new(1.0, 0.0); n])?;
        if let Some(pivot) = probe.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Singular { pivot });
        }
    }
    Ok(Factorization {
        elapsed: start.elapsed(),
        ..fact
    })
}

/// `x` with `A x = b` via a stored factorization.
pub fn solve(fact: &Factorization, b: &[Complex64]) -> Result<Vec<Complex64>> {
    fact.solve(b)
}

/// `||A x - b||_2 / (||A||_F ||x||_2 + ||b||_2)`.
pub fn relative_residual(a: &SystemMatrix, x: &[Complex64], b: &[Complex64]) -> Result<f64> {
    let ax = a.mul_vec(x)?;
    let r: f64 = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let xn = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let bn = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let denom = a.frobenius_norm() * xn + bn;
    Ok(if denom == 0.0 { 0.0 } else { r / denom })
}
