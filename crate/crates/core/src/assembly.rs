//! Assembly of the IP-DG sesquilinear forms and load vectors.
//!
//! Matrix entry `(i, j)` holds `a_h(phi_j, phi_i)`: rows are test functions,
//! columns trial functions. All basis functions are real, so every form
//! splits as `A = S - i P` with `S` (curl-curl, consistency fluxes and
//! `-k^2` mass) and `P` (interior penalties `J_0 + J_1` and the impedance
//! term `k * lambda * <u_T, v_T>` on the boundary) both real symmetric.
//!
//! On a uniform mesh every cell, every interior face of a given orientation
//! and every boundary face of a given side are congruent, so the local
//! element matrices are integrated once and scattered.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::dg::{
    cross, dot, face_points, local_dof, tangential, BasisSet, CVec3, DgField, Penalty,
    QuadratureRule, LOCAL_DOFS,
};
use crate::mesh::{HexMesh, Point3};
use crate::par;
use crate::{Error, Result};

type Block = [[f64; LOCAL_DOFS]; LOCAL_DOFS];

const ZERO_BLOCK: Block = [[0.0; LOCAL_DOFS]; LOCAL_DOFS];

/// Default per-axis Gauss order for polynomial integrands (exact).
pub const POLY_QUAD_ORDER: usize = 2;

/// Closed-form `∫_{[0,1]^3} m_a m_b` for the monomials `{1, x, y, z}`.
pub const REFERENCE_MASS: [[f64; 4]; 4] = [
    [1.0, 0.5, 0.5, 0.5],
    [0.5, 1.0 / 3.0, 0.25, 0.25],
    [0.5, 0.25, 1.0 / 3.0, 0.25],
    [0.5, 0.25, 0.25, 1.0 / 3.0],
];

/// Physical and discretisation parameters of the IP-DG operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DgParams {
    /// Wave number `k > 0`.
    pub k: f64,
    /// Impedance `lambda > 0`.
    pub lambda: f64,
    pub penalty: Penalty,
    /// Gauss points per axis for polynomial integrands.
    pub quad_order: usize,
}

impl DgParams {
    pub fn new(k: f64, lambda: f64, gamma0: f64, gamma1: f64) -> Result<Self> {
        let p = Self {
            k,
            lambda,
            penalty: Penalty::new(gamma0, gamma1)?,
            quad_order: POLY_QUAD_ORDER,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_quad_order(mut self, q: usize) -> Self {
        self.quad_order = q;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::config(format!("wave number must be positive, got {}", self.k)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(format!(
                "impedance must be positive, got {}",
                self.lambda
            )));
        }
        Penalty::new(self.penalty.gamma0, self.penalty.gamma1)?;
        if self.quad_order < POLY_QUAD_ORDER {
            return Err(Error::config("polynomial quadrature needs at least 2 points per axis"));
        }
        Ok(())
    }
}

/// Parameters a matrix was assembled with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixMeta {
    pub k: f64,
    pub lambda: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub cells_per_axis: usize,
}

/// Sparse complex matrix in compressed-row form with sorted column indices.
///
/// Nonzeros only appear in diagonal cell blocks and between face-adjacent
/// cells.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
    meta: MatrixMeta,
}

impl SystemMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn meta(&self) -> &MatrixMeta {
        &self.meta
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Builds a matrix from raw CSR arrays; columns within each row must be
    /// strictly increasing.
    pub fn from_csr(
        dim: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<Complex64>,
        meta: MatrixMeta,
    ) -> Result<Self> {
        if row_ptr.len() != dim + 1 || col_idx.len() != values.len() {
            return Err(Error::config("inconsistent CSR arrays"));
        }
        if row_ptr[0] != 0 || row_ptr[dim] != values.len() {
            return Err(Error::config("inconsistent CSR row pointers"));
        }
        for r in 0..dim {
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= dim) {
                return Err(Error::config(format!("bad column indices in row {r}")));
            }
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
            meta,
        })
    }

    /// Entry `(i, j)`, zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(p) => self.values[self.row_ptr[i] + p],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Dense row-major copy. Intended for small test matrices.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.dim]; self.dim];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }

    /// SHA-256 over dimension, pattern and the exact bit patterns of all
    /// values, as lowercase hex.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dim as u64).to_le_bytes());
        for p in &self.row_ptr {
            hasher.update((*p as u64).to_le_bytes());
        }
        for c in &self.col_idx {
            hasher.update((*c as u64).to_le_bytes());
        }
        for v in &self.values {
            hasher.update(v.re.to_bits().to_le_bytes());
            hasher.update(v.im.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Writes the matrix as coordinate text: a header line `n n nnz`
    /// followed by one `row col re im` line per stored entry (0-based).
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.dim, self.dim, self.nnz())?;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                writeln!(w, "{i} {j} {:.17e} {:.17e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values,
            meta: self.meta,
        }
    }
}

/// Both halves of `A = S - i P` on a shared pattern.
#[derive(Clone, Debug)]
pub struct SplitMatrix {
    /// Curl-curl, consistency fluxes and mass.
    pub hermitian: SystemMatrix,
    /// Interior penalties and impedance boundary term.
    pub penalty: SystemMatrix,
}

impl SplitMatrix {
    /// `S - i P`.
    pub fn combine(&self) -> SystemMatrix {
        let i = Complex64::new(0.0, 1.0);
        let values = self
            .hermitian
            .values
            .iter()
            .zip(&self.penalty.values)
            .map(|(s, p)| s - i * p)
            .collect();
        self.hermitian.with_values(values)
    }
}

/// Complex load vector `(F, phi_i)_D`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadVector(pub Vec<Complex64>);

impl LoadVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Element matrices of a single interior face, indexed `[test side][trial side]`
/// with side 0 = owner and 1 = neighbor.
#[derive(Clone, Debug)]
struct FaceBlocks {
    s: [[Block; 2]; 2],
    p: [[Block; 2]; 2],
}

#[derive(Clone, Debug)]
struct Templates {
    curl_curl: Block,
    mass: Block,
    /// Keyed by (axis, owner is the upper cell).
    interior: HashMap<(usize, bool), FaceBlocks>,
    /// Tangential boundary mass keyed by (axis, outward normal positive).
    boundary: HashMap<(usize, bool), Block>,
}

fn volume_blocks(mesh: &HexMesh, rule: &QuadratureRule) -> (Block, Block) {
    let basis = BasisSet::for_mesh(mesh);
    let curls = basis.curls();
    let vol = mesh.h().powi(3);
    let mut cc = ZERO_BLOCK;
    let mut mass = ZERO_BLOCK;
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let vals = basis.values(*p);
        for i in 0..LOCAL_DOFS {
            for j in 0..LOCAL_DOFS {
                cc[i][j] += w * vol * dot(curls[j], curls[i]);
                mass[i][j] += w * vol * dot(vals[j], vals[i]);
            }
        }
    }
    (cc, mass)
}

fn interior_face_blocks(
    mesh: &HexMesh,
    face: usize,
    penalty: Penalty,
    rule: &QuadratureRule,
) -> FaceBlocks {
    let f = &mesh.interior_faces()[face];
    let h = mesh.h();
    let basis = BasisSet::for_mesh(mesh);
    let curls = basis.curls();
    let nu = f.normal;
    let sides = [f.owner, f.neighbor];
    let sign = [1.0, -1.0];
    let curl_x_nu: Vec<[f64; 3]> = curls.iter().map(|c| cross(*c, nu)).collect();

    let mut s = [[ZERO_BLOCK; 2]; 2];
    let mut p = [[ZERO_BLOCK; 2]; 2];
    for (x, w) in face_points(mesh, f.owner, f.axis, f.offset, rule) {
        let tang: [Vec<[f64; 3]>; 2] = [0, 1].map(|side| {
            basis
                .values(mesh.to_local(sides[side], x))
                .iter()
                .map(|v| tangential(nu, *v))
                .collect()
        });
        for t in 0..2 {
            for sd in 0..2 {
                let st = sign[t] * sign[sd];
                for i in 0..LOCAL_DOFS {
                    for j in 0..LOCAL_DOFS {
                        // -<{curl u x nu}, [v_T]> - <[u_T], {curl v x nu}>
                        let flux = 0.5 * sign[t] * dot(curl_x_nu[j], tang[t][i])
                            + 0.5 * sign[sd] * dot(tang[sd][j], curl_x_nu[i]);
                        s[t][sd][i][j] -= w * flux;
                        let j0 = penalty.gamma0 / h * st * dot(tang[sd][j], tang[t][i]);
                        let j1 = penalty.gamma1 * h * st * dot(curl_x_nu[j], curl_x_nu[i]);
                        p[t][sd][i][j] += w * (j0 + j1);
                    }
                }
            }
        }
    }
    FaceBlocks { s, p }
}

fn boundary_face_block(mesh: &HexMesh, face: usize, rule: &QuadratureRule) -> Block {
    let f = &mesh.boundary_faces()[face];
    let basis = BasisSet::for_mesh(mesh);
    let mut b = ZERO_BLOCK;
    for (x, w) in face_points(mesh, f.cell, f.axis, f.offset, rule) {
        let tang: Vec<[f64; 3]> = basis
            .values(mesh.to_local(f.cell, x))
            .iter()
            .map(|v| tangential(f.normal, *v))
            .collect();
        for i in 0..LOCAL_DOFS {
            for j in 0..LOCAL_DOFS {
                b[i][j] += w * dot(tang[j], tang[i]);
            }
        }
    }
    b
}

fn interior_key(mesh: &HexMesh, face: usize) -> (usize, bool) {
    let f = &mesh.interior_faces()[face];
    let upper = mesh.cells()[f.owner].origin[f.axis] > mesh.cells()[f.neighbor].origin[f.axis];
    (f.axis, upper)
}

fn boundary_key(mesh: &HexMesh, face: usize) -> (usize, bool) {
    let f = &mesh.boundary_faces()[face];
    (f.axis, f.normal[f.axis] > 0.0)
}

impl Templates {
    fn build(mesh: &HexMesh, params: &DgParams) -> Result<Self> {
        let cube = QuadratureRule::cube(params.quad_order)?;
        let square = QuadratureRule::square(params.quad_order)?;
        let (curl_curl, mass) = volume_blocks(mesh, &cube);
        let mut interior = HashMap::new();
        for f in 0..mesh.interior_faces().len() {
            interior
                .entry(interior_key(mesh, f))
                .or_insert_with(|| interior_face_blocks(mesh, f, params.penalty, &square));
        }
        let mut boundary = HashMap::new();
        for f in 0..mesh.boundary_faces().len() {
            boundary
                .entry(boundary_key(mesh, f))
                .or_insert_with(|| boundary_face_block(mesh, f, &square));
        }
        Ok(Self {
            curl_curl,
            mass,
            interior,
            boundary,
        })
    }
}

fn add_block(dst: &mut Block, src: &Block, scale: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        for (a, b) in d.iter_mut().zip(s) {
            *a += scale * b;
        }
    }
}

/// Row-block data produced for one cell: sorted column cells with the S and
/// P blocks.
struct CellRow {
    cols: Vec<usize>,
    s: Vec<Block>,
    p: Vec<Block>,
}

fn assemble_cell_row(
    mesh: &HexMesh,
    params: &DgParams,
    t: &Templates,
    mass_scale: Option<&[f64]>,
    cell: usize,
) -> CellRow {
    let mut cols = mesh.neighbors(cell);
    cols.push(cell);
    cols.sort_unstable();
    let pos = |c: usize| cols.binary_search(&c).expect("column cell in row pattern");
    let mut s = vec![ZERO_BLOCK; cols.len()];
    let mut p = vec![ZERO_BLOCK; cols.len()];

    let diag = pos(cell);
    let k2 = params.k * params.k;
    let alpha2 = mass_scale.map_or(1.0, |a| a[cell] * a[cell]);
    add_block(&mut s[diag], &t.curl_curl, 1.0);
    add_block(&mut s[diag], &t.mass, -k2 * alpha2);

    for &f in mesh.cell_interior_faces(cell) {
        let face = &mesh.interior_faces()[f];
        let blocks = &t.interior[&interior_key(mesh, f)];
        let (me, other, other_cell) = if face.owner == cell {
            (0, 1, face.neighbor)
        } else {
            (1, 0, face.owner)
        };
        add_block(&mut s[diag], &blocks.s[me][me], 1.0);
        add_block(&mut p[diag], &blocks.p[me][me], 1.0);
        let off = pos(other_cell);
        add_block(&mut s[off], &blocks.s[me][other], 1.0);
        add_block(&mut p[off], &blocks.p[me][other], 1.0);
    }

    let kl = params.k * params.lambda;
    for &f in mesh.cell_boundary_faces(cell) {
        add_block(&mut p[diag], &t.boundary[&boundary_key(mesh, f)], kl);
    }
    CellRow { cols, s, p }
}

fn assemble_split_impl(
    mesh: &HexMesh,
    params: &DgParams,
    mass_scale: Option<&[f64]>,
) -> Result<SplitMatrix> {
    params.validate()?;
    let templates = Templates::build(mesh, params)?;
    let n_cells = mesh.num_cells();
    let rows = par::map_range(0..n_cells, |cell| {
        assemble_cell_row(mesh, params, &templates, mass_scale, cell)
    });

    let dim = LOCAL_DOFS * n_cells;
    let nnz: usize = rows.iter().map(|r| r.cols.len() * LOCAL_DOFS * LOCAL_DOFS).sum();
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut col_idx = Vec::with_capacity(nnz);
    let mut s_vals = Vec::with_capacity(nnz);
    let mut p_vals = Vec::with_capacity(nnz);
    row_ptr.push(0);
    for row in &rows {
        for i in 0..LOCAL_DOFS {
            for (b, &cc) in row.cols.iter().enumerate() {
                for j in 0..LOCAL_DOFS {
                    col_idx.push(LOCAL_DOFS * cc + j);
                    s_vals.push(Complex64::new(row.s[b][i][j], 0.0));
                    p_vals.push(Complex64::new(row.p[b][i][j], 0.0));
                }
            }
            row_ptr.push(col_idx.len());
        }
    }
    let meta = MatrixMeta {
        k: params.k,
        lambda: params.lambda,
        gamma0: params.penalty.gamma0,
        gamma1: params.penalty.gamma1,
        cells_per_axis: mesh.cells_per_axis(),
    };
    let hermitian = SystemMatrix {
        dim,
        row_ptr,
        col_idx,
        values: s_vals,
        meta,
    };
    let penalty = hermitian.with_values(p_vals);
    Ok(SplitMatrix { hermitian, penalty })
}

/// `S` and `P` of the deterministic operator `a_h = S - i P`.
pub fn assemble_split(mesh: &HexMesh, params: &DgParams) -> Result<SplitMatrix> {
    assemble_split_impl(mesh, params, None)
}

/// The sample-independent IP-DG matrix of `a_h`.
pub fn assemble_a_h(mesh: &HexMesh, params: &DgParams) -> Result<SystemMatrix> {
    Ok(assemble_split(mesh, params)?.combine())
}

/// Matrix of the per-sample form `â_{h,j}`: identical to [`assemble_a_h`]
/// except the mass term carries the cellwise constant `alpha^2`.
pub fn assemble_standard(mesh: &HexMesh, params: &DgParams, alpha: &[f64]) -> Result<SystemMatrix> {
    Ok(assemble_standard_split(mesh, params, alpha)?.combine())
}

pub fn assemble_standard_split(
    mesh: &HexMesh,
    params: &DgParams,
    alpha: &[f64],
) -> Result<SplitMatrix> {
    if alpha.len() != mesh.num_cells() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_cells(),
            got: alpha.len(),
        });
    }
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::config("coefficient sample contains non-finite values"));
    }
    assemble_split_impl(mesh, params, Some(alpha))
}

/// `(f, phi_i)_D` by a tensor Gauss rule with `q_f` points per axis. The
/// source is called with the cell label and a physical point.
pub fn assemble_load<F>(mesh: &HexMesh, f: F, q_f: usize) -> Result<LoadVector>
where
    F: Fn(usize, Point3) -> CVec3 + Sync + Send,
{
    let rule = QuadratureRule::cube(q_f)?;
    let vol = mesh.h().powi(3);
    let blocks = par::map_range(0..mesh.num_cells(), |cell| {
        let mut b = [Complex64::new(0.0, 0.0); LOCAL_DOFS];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let v = f(cell, mesh.to_physical(cell, *p));
            let m = crate::dg::monomials(*p);
            for c in 0..3 {
                let wv = v[c] * (w * vol);
                for (a, ma) in m.iter().enumerate() {
                    b[local_dof(c, a)] += wv * ma;
                }
            }
        }
        b
    });
    Ok(LoadVector(blocks.into_iter().flatten().collect()))
}

/// Applies the cellwise mass `(Mhat * h^3) ⊗ I_3` to per-cell coefficients.
fn mass_apply_cell(vol: f64, coeffs: &[Complex64; LOCAL_DOFS]) -> [Complex64; LOCAL_DOFS] {
    let mut out = [Complex64::new(0.0, 0.0); LOCAL_DOFS];
    for c in 0..3 {
        for a in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..4 {
                acc += coeffs[local_dof(c, b)] * REFERENCE_MASS[a][b];
            }
            out[local_dof(c, a)] = acc * vol;
        }
    }
    out
}

/// Recursive mode source `(2k^2 eta E_prev + k^2 eta^2 E_prev2, phi_i)_D`
/// for cellwise constant `eta`. Integrals are exact.
pub fn assemble_mode_source(
    mesh: &HexMesh,
    k: f64,
    eta: &[f64],
    prev: &DgField,
    prev2: &DgField,
) -> Result<LoadVector> {
    let mut out = LoadVector(vec![Complex64::new(0.0, 0.0); LOCAL_DOFS * mesh.num_cells()]);
    mode_source_into(mesh, k, eta, prev, prev2, &mut out.0)?;
    Ok(out)
}

/// Allocation-free variant of [`assemble_mode_source`].
pub fn mode_source_into(
    mesh: &HexMesh,
    k: f64,
    eta: &[f64],
    prev: &DgField,
    prev2: &DgField,
    out: &mut [Complex64],
) -> Result<()> {
    prev.check_mesh(mesh)?;
    prev2.check_mesh(mesh)?;
    if eta.len() != mesh.num_cells() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_cells(),
            got: eta.len(),
        });
    }
    if out.len() != prev.len() {
        return Err(Error::DimensionMismatch {
            expected: prev.len(),
            got: out.len(),
        });
    }
    let vol = mesh.h().powi(3);
    let k2 = k * k;
    for (cell, &e) in eta.iter().enumerate() {
        let a = prev.cell_coeffs(cell);
        let b = prev2.cell_coeffs(cell);
        let mut g = [Complex64::new(0.0, 0.0); LOCAL_DOFS];
        for l in 0..LOCAL_DOFS {
            g[l] = a[l] * (2.0 * k2 * e) + b[l] * (k2 * e * e);
        }
        out[LOCAL_DOFS * cell..LOCAL_DOFS * (cell + 1)].copy_from_slice(&mass_apply_cell(vol, &g));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_mesh;

    fn params(k: f64, lambda: f64, g0: f64, g1: f64) -> DgParams {
        DgParams::new(k, lambda, g0, g1).unwrap()
    }

    #[test]
    fn rejects_nonpositive_k_and_lambda() {
        assert!(DgParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(DgParams::new(2.0, -1.0, 1.0, 1.0).is_err());
        assert!(DgParams::new(2.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn single_cell_constant_entry() {
        let mesh = build_uniform_mesh(1).unwrap();
        let (k, lam) = (2.0, 1.0);
        let a = assemble_a_h(&mesh, &params(k, lam, 0.0, 0.0)).unwrap();
        let d = local_dof(0, 0);
        let want = Complex64::new(-k * k, -4.0 * k * lam);
        assert!((a.get(d, d) - want).norm() < 1e-13);
    }

    #[test]
    fn standard_with_unit_alpha_matches_a_h() {
        let mesh = build_uniform_mesh(2).unwrap();
        let p = params(2.0, 1.0, 10.0, 0.1);
        let a = assemble_a_h(&mesh, &p).unwrap();
        let s = assemble_standard(&mesh, &p, &[1.0; 8]).unwrap();
        assert_eq!(a.col_idx(), s.col_idx());
        for (x, y) in a.values().iter().zip(s.values()) {
            assert!((x - y).norm() <= 1e-14);
        }
    }

    #[test]
    fn standard_single_cell_entry() {
        let mesh = build_uniform_mesh(1).unwrap();
        let (k, lam) = (2.0, 1.0);
        let s = assemble_standard(&mesh, &params(k, lam, 10.0, 0.1), &[1.1]).unwrap();
        let d = local_dof(0, 0);
        let want = Complex64::new(-k * k * 1.1 * 1.1, -4.0 * k * lam);
        assert!((s.get(d, d) - want).norm() < 1e-13);
    }

    #[test]
    fn standard_rejects_wrong_length() {
        let mesh = build_uniform_mesh(2).unwrap();
        let p = params(2.0, 1.0, 10.0, 0.1);
        assert!(matches!(
            assemble_standard(&mesh, &p, &[1.0; 7]),
            Err(Error::DimensionMismatch { expected: 8, got: 7 })
        ));
    }

    #[test]
    fn constant_load_moments() {
        let mesh = build_uniform_mesh(1).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let b = assemble_load(&mesh, |_, _| [one, zero, zero], 4).unwrap();
        let want = [1.0, 0.5, 0.5, 0.5];
        for (a, w) in want.iter().enumerate() {
            assert!((b.0[local_dof(0, a)] - w).norm() < 1e-14);
        }
        for l in 4..LOCAL_DOFS {
            assert_eq!(b.0[l], zero);
        }
    }

    #[test]
    fn zero_mode_sources() {
        let mesh = build_uniform_mesh(2).unwrap();
        let z = DgField::zeros(&mesh);
        let s = assemble_mode_source(&mesh, 2.0, &[0.3; 8], &z, &z).unwrap();
        assert!(s.0.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn mode_source_single_cell() {
        let mesh = build_uniform_mesh(1).unwrap();
        let mut e = DgField::zeros(&mesh);
        e.cell_coeffs_mut(0)[local_dof(0, 0)] = Complex64::new(1.0, 0.0);
        let z = DgField::zeros(&mesh);
        let s = assemble_mode_source(&mesh, 2.0, &[1.0], &e, &z).unwrap();
        for (a, w) in [1.0, 0.5, 0.5, 0.5].iter().enumerate() {
            assert!((s.0[local_dof(0, a)] - 8.0 * w).norm() < 1e-14);
        }
    }

    #[test]
    fn mode_source_mesh_mismatch() {
        let m1 = build_uniform_mesh(1).unwrap();
        let m2 = build_uniform_mesh(2).unwrap();
        let z = DgField::zeros(&m1);
        assert!(assemble_mode_source(&m2, 2.0, &[0.0; 8], &z, &z).is_err());
    }

    #[test]
    fn triplet_export_header_and_count() {
        let mesh = build_uniform_mesh(1).unwrap();
        let a = assemble_a_h(&mesh, &params(2.0, 1.0, 10.0, 0.1)).unwrap();
        let mut buf = Vec::new();
        a.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "12 12 144");
        assert_eq!(lines.count(), 144);
    }

    #[test]
    fn pattern_only_couples_neighbors() {
        let mesh = build_uniform_mesh(3).unwrap();
        let a = assemble_a_h(&mesh, &params(2.0, 1.0, 10.0, 0.1)).unwrap();
        for i in 0..a.dim() {
            let ci = i / LOCAL_DOFS;
            let nb = mesh.neighbors(ci);
            for (j, _) in a.row(i) {
                let cj = j / LOCAL_DOFS;
                assert!(cj == ci || nb.contains(&cj));
            }
        }
    }
}
