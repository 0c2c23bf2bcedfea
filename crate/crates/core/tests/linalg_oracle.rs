//! Sparse LU against a dense Gaussian-elimination oracle written here.

use mcipdg::assembly::{assemble_a_h, assemble_standard, DgParams, MatrixMeta, SystemMatrix};
use mcipdg::linalg::{factorize, relative_residual};
use mcipdg::mesh::build_uniform_mesh;
use mcipdg::{Complex64, Error};

fn dense_solve(a: &SystemMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = a.dim();
    let mut m = a.to_dense();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap();
        m.swap(col, piv);
        x.swap(col, piv);
        let d = m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / d;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
            let v = x[col];
            x[row] -= f * v;
        }
    }
    for row in (0..n).rev() {
        let mut s = x[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    x
}

fn rhs(n: usize, shift: f64) -> Vec<Complex64> {
    (0..n)
        .map(|i| Complex64::new((i as f64 * 0.37 + shift).sin(), (i as f64 * 0.11).cos()))
        .collect()
}

fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[test]
fn deterministic_matrix_matches_dense_oracle() {
    let mesh = build_uniform_mesh(2).unwrap();
    let a = assemble_a_h(&mesh, &DgParams::new(2.0, 1.0, 10.0, 0.1).unwrap()).unwrap();
    let fact = factorize(&a).unwrap();
    for shift in [0.0, 1.3, -2.1] {
        let b = rhs(a.dim(), shift);
        let x = fact.solve(&b).unwrap();
        assert!(max_rel(&x, &dense_solve(&a, &b)) < 1e-10);
        assert!(relative_residual(&a, &x, &b).unwrap() < 1e-13);
    }
}

#[test]
fn perturbed_matrix_matches_dense_oracle() {
    let mesh = build_uniform_mesh(2).unwrap();
    let alpha: Vec<f64> = (0..8).map(|c| 1.0 + 0.3 * ((c as f64) * 1.7).sin()).collect();
    let a = assemble_standard(&mesh, &DgParams::new(3.0, 0.5, 5.0, 0.2).unwrap(), &alpha).unwrap();
    let b = rhs(a.dim(), 0.4);
    let x = factorize(&a).unwrap().solve(&b).unwrap();
    assert!(max_rel(&x, &dense_solve(&a, &b)) < 1e-10);
}

#[test]
fn reuse_gives_same_answer_as_fresh_factorization() {
    let mesh = build_uniform_mesh(3).unwrap();
    let a = assemble_a_h(&mesh, &DgParams::new(2.0, 1.0, 10.0, 0.1).unwrap()).unwrap();
    let shared = factorize(&a).unwrap();
    for shift in [0.0, 0.5, 1.0] {
        let b = rhs(a.dim(), shift);
        let fresh = factorize(&a).unwrap().solve(&b).unwrap();
        assert_eq!(shared.solve(&b).unwrap(), fresh);
    }
}

#[test]
fn rank_deficient_matrix_is_singular() {
    let meta = MatrixMeta {
        k: 1.0,
        lambda: 1.0,
        gamma0: 0.0,
        gamma1: 0.0,
        cells_per_axis: 0,
    };
    let one = Complex64::new(1.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    // third row = first + second
    let a = SystemMatrix::from_csr(
        3,
        vec![0, 2, 4, 7],
        vec![0, 1, 1, 2, 0, 1, 2],
        vec![one, two, one, one, one, Complex64::new(3.0, 0.0), one],
        meta,
    )
    .unwrap();
    let err = factorize(&a).unwrap_err();
    assert!(matches!(err, Error::Singular { .. }), "{err:?}");
    assert!(err.is_numerical());
}
