//! Broken piecewise-linear vector space `V_h` on a [`HexMesh`].
//!
//! Each cell carries 12 local degrees of freedom: for every Cartesian
//! component `c` the four scalar monomials `{1, x̂, ŷ, ẑ}` in cell-local
//! coordinates `x̂ = (x - origin) / h ∈ [0,1]^3`. Local dof `c * 4 + a`
//! multiplies `e_c * m_a(x̂)`; the global dof is `12 * cell + local`.
//!
//! No continuity is imposed across faces. Jumps and averages follow the
//! owner/neighbor orientation stored in the mesh.

pub mod quadrature;

use num_complex::Complex64;

use crate::mesh::{FaceId, HexMesh, Point3};
use crate::{Error, Result};

pub use quadrature::{GaussLegendre, QuadratureRule};

pub const LOCAL_DOFS: usize = 12;
pub const MONOMIALS: usize = 4;

/// Complex 3-vector.
pub type CVec3 = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
pub fn local_dof(component: usize, monomial: usize) -> usize {
    component * MONOMIALS + monomial
}

/// Scalar monomials `{1, x̂, ŷ, ẑ}` at a local point.
#[inline]
pub fn monomials(xhat: Point3) -> [f64; MONOMIALS] {
    [1.0, xhat[0], xhat[1], xhat[2]]
}

#[inline]
pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn ccross(a: CVec3, b: [f64; 3]) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `(nu x v) x nu`, the part of `v` tangential to a face with unit normal `nu`.
#[inline]
pub fn tangential(nu: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    cross(cross(nu, v), nu)
}

#[inline]
pub fn ctangential(nu: [f64; 3], v: CVec3) -> CVec3 {
    let nv = [
        v[2] * nu[1] - v[1] * nu[2],
        v[0] * nu[2] - v[2] * nu[0],
        v[1] * nu[0] - v[0] * nu[1],
    ];
    ccross(nv, nu)
}

#[inline]
fn cnorm_sqr(v: CVec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// The 12 local basis functions of a cell of size `h`.
#[derive(Clone, Copy, Debug)]
pub struct BasisSet {
    h: f64,
}

impl BasisSet {
    pub fn new(h: f64) -> Self {
        Self { h }
    }

    pub fn for_mesh(mesh: &HexMesh) -> Self {
        Self::new(mesh.h())
    }

    /// Values of all basis functions at a local point.
    pub fn values(&self, xhat: Point3) -> [[f64; 3]; LOCAL_DOFS] {
        let m = monomials(xhat);
        let mut out = [[0.0; 3]; LOCAL_DOFS];
        for c in 0..3 {
            for a in 0..MONOMIALS {
                out[local_dof(c, a)][c] = m[a];
            }
        }
        out
    }

    /// Constant curls of all basis functions, `curl(e_c m_a) = grad m_a x e_c`.
    pub fn curls(&self) -> [[f64; 3]; LOCAL_DOFS] {
        let mut out = [[0.0; 3]; LOCAL_DOFS];
        for c in 0..3 {
            let mut ec = [0.0; 3];
            ec[c] = 1.0;
            for a in 1..MONOMIALS {
                let mut grad = [0.0; 3];
                grad[a - 1] = 1.0 / self.h;
                out[local_dof(c, a)] = cross(grad, ec);
            }
        }
        out
    }
}

/// A member of `V_h`: complex coefficients, 12 per cell, no inter-cell
/// continuity.
#[derive(Clone, Debug, PartialEq)]
pub struct DgField {
    cells_per_axis: usize,
    coeffs: Vec<Complex64>,
}

impl DgField {
    pub fn zeros(mesh: &HexMesh) -> Self {
        Self {
            cells_per_axis: mesh.cells_per_axis(),
            coeffs: vec![ZERO; LOCAL_DOFS * mesh.num_cells()],
        }
    }

    pub fn from_coeffs(mesh: &HexMesh, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = LOCAL_DOFS * mesh.num_cells();
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            cells_per_axis: mesh.cells_per_axis(),
            coeffs,
        })
    }

    /// Interpolates a field that is linear on every cell (exact for
    /// members of `V_h`, e.g. global linear polynomials).
    pub fn from_cellwise_linear<F>(mesh: &HexMesh, f: F) -> Self
    where
        F: Fn(usize, Point3) -> CVec3,
    {
        let mut out = Self::zeros(mesh);
        for cell in 0..mesh.num_cells() {
            let at = |xhat: Point3| f(cell, mesh.to_physical(cell, xhat));
            let v0 = at([0.0; 3]);
            let vs = [at([1.0, 0.0, 0.0]), at([0.0, 1.0, 0.0]), at([0.0, 0.0, 1.0])];
            let block = out.cell_coeffs_mut(cell);
            for c in 0..3 {
                block[local_dof(c, 0)] = v0[c];
                for a in 1..MONOMIALS {
                    block[local_dof(c, a)] = vs[a - 1][c] - v0[c];
                }
            }
        }
        out
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn num_cells(&self) -> usize {
        self.coeffs.len() / LOCAL_DOFS
    }

    pub fn cell_coeffs(&self, cell: usize) -> &[Complex64] {
        &self.coeffs[LOCAL_DOFS * cell..LOCAL_DOFS * (cell + 1)]
    }

    pub fn cell_coeffs_mut(&mut self, cell: usize) -> &mut [Complex64] {
        &mut self.coeffs[LOCAL_DOFS * cell..LOCAL_DOFS * (cell + 1)]
    }

    pub fn check_mesh(&self, mesh: &HexMesh) -> Result<()> {
        let expected = LOCAL_DOFS * mesh.num_cells();
        if self.cells_per_axis != mesh.cells_per_axis() || self.coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.coeffs.len(),
            });
        }
        Ok(())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: Complex64, other: &DgField) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: Complex64) {
        for a in &mut self.coeffs {
            *a *= alpha;
        }
    }

    pub fn sub(&self, other: &DgField) -> DgField {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        out
    }

    fn check_cell(&self, cell: usize) -> Result<()> {
        let n = self.num_cells();
        if cell >= n {
            return Err(Error::OutOfRange { index: cell, len: n });
        }
        Ok(())
    }

    /// Value at local coordinates `xhat` of `cell`.
    pub fn eval_local(&self, cell: usize, xhat: Point3) -> Result<CVec3> {
        self.check_cell(cell)?;
        Ok(self.eval_local_unchecked(cell, xhat))
    }

    fn eval_local_unchecked(&self, cell: usize, xhat: Point3) -> CVec3 {
        let m = monomials(xhat);
        let c = self.cell_coeffs(cell);
        let mut out = [ZERO; 3];
        for (comp, o) in out.iter_mut().enumerate() {
            for (a, ma) in m.iter().enumerate() {
                *o += c[local_dof(comp, a)] * ma;
            }
        }
        out
    }

    /// Constant curl of the field on `cell`.
    pub fn curl(&self, mesh: &HexMesh, cell: usize) -> Result<CVec3> {
        self.check_cell(cell)?;
        Ok(self.curl_unchecked(mesh.h(), cell))
    }

    fn curl_unchecked(&self, h: f64, cell: usize) -> CVec3 {
        let curls = BasisSet::new(h).curls();
        let c = self.cell_coeffs(cell);
        let mut out = [ZERO; 3];
        for (l, cl) in curls.iter().enumerate() {
            for d in 0..3 {
                out[d] += c[l] * cl[d];
            }
        }
        out
    }

    /// Trace of the restriction to `cell` at a physical point.
    pub fn trace(&self, mesh: &HexMesh, cell: usize, x: Point3) -> Result<CVec3> {
        self.check_cell(cell)?;
        Ok(self.eval_local_unchecked(cell, mesh.to_local(cell, x)))
    }
}

/// Value of `field` at a local point of `cell`.
pub fn eval_field(field: &DgField, cell: usize, xhat: Point3) -> Result<CVec3> {
    field.eval_local(cell, xhat)
}

/// Constant curl of `field` on `cell`, including the `1/h` chain-rule factor.
pub fn eval_curl(field: &DgField, mesh: &HexMesh, cell: usize) -> Result<CVec3> {
    field.curl(mesh, cell)
}

/// Jump at a face point: owner minus neighbor trace on interior faces, the
/// single trace on boundary faces.
pub fn jump(field: &DgField, mesh: &HexMesh, face: FaceId, x: Point3) -> Result<CVec3> {
    match face {
        FaceId::Interior(f) => {
            let face = interior(mesh, f)?;
            let a = field.trace(mesh, face.owner, x)?;
            let b = field.trace(mesh, face.neighbor, x)?;
            Ok([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
        }
        FaceId::Boundary(f) => field.trace(mesh, boundary(mesh, f)?.cell, x),
    }
}

/// Average at a face point; the single trace on boundary faces.
pub fn average(field: &DgField, mesh: &HexMesh, face: FaceId, x: Point3) -> Result<CVec3> {
    match face {
        FaceId::Interior(f) => {
            let face = interior(mesh, f)?;
            let a = field.trace(mesh, face.owner, x)?;
            let b = field.trace(mesh, face.neighbor, x)?;
            Ok([
                0.5 * (a[0] + b[0]),
                0.5 * (a[1] + b[1]),
                0.5 * (a[2] + b[2]),
            ])
        }
        FaceId::Boundary(f) => field.trace(mesh, boundary(mesh, f)?.cell, x),
    }
}

fn interior(mesh: &HexMesh, f: usize) -> Result<&crate::mesh::InteriorFace> {
    mesh.interior_faces().get(f).ok_or(Error::OutOfRange {
        index: f,
        len: mesh.interior_faces().len(),
    })
}

fn boundary(mesh: &HexMesh, f: usize) -> Result<&crate::mesh::BoundaryFace> {
    mesh.boundary_faces().get(f).ok_or(Error::OutOfRange {
        index: f,
        len: mesh.boundary_faces().len(),
    })
}

/// Physical quadrature points and weights (including the face area) on an
/// axis-aligned face through `offset`, spanning the tangential extent of
/// `cell`.
pub fn face_points(
    mesh: &HexMesh,
    cell: usize,
    axis: usize,
    offset: f64,
    rule: &QuadratureRule,
) -> Vec<(Point3, f64)> {
    let h = mesh.h();
    let origin = mesh.cells()[cell].origin;
    let (t0, t1) = ((axis + 1) % 3, (axis + 2) % 3);
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(p, w)| {
            let mut x = [0.0; 3];
            x[axis] = offset;
            x[t0] = origin[t0] + h * p[0];
            x[t1] = origin[t1] + h * p[1];
            (x, w * h * h)
        })
        .collect()
}

/// Penalty parameters of the IP-DG scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Penalty {
    pub gamma0: f64,
    pub gamma1: f64,
}

impl Penalty {
    pub fn new(gamma0: f64, gamma1: f64) -> Result<Self> {
        if !(gamma0 >= 0.0 && gamma1 >= 0.0) || !gamma0.is_finite() || !gamma1.is_finite() {
            return Err(Error::config("penalty parameters must be finite and nonnegative"));
        }
        Ok(Self { gamma0, gamma1 })
    }
}

/// Individual pieces of the DG seminorm, all squared.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeminormParts {
    pub curl: f64,
    pub j0: f64,
    pub j1: f64,
}

impl SeminormParts {
    pub fn total(&self) -> f64 {
        self.curl + self.j0 + self.j1
    }
}

const NORM_QUAD: usize = 2;

/// `||v||_{L^2(D)}`.
pub fn l2_norm(field: &DgField, mesh: &HexMesh) -> Result<f64> {
    field.check_mesh(mesh)?;
    let rule = QuadratureRule::cube(NORM_QUAD)?;
    let vol = mesh.h().powi(3);
    let mut sum = 0.0;
    for cell in 0..mesh.num_cells() {
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            sum += w * vol * cnorm_sqr(field.eval_local_unchecked(cell, *p));
        }
    }
    Ok(sum.sqrt())
}

/// `||curl v||^2_{L^2(T_h)}`, `J_0(v,v)` and `J_1(v,v)`.
pub fn seminorm_parts(field: &DgField, mesh: &HexMesh, penalty: Penalty) -> Result<SeminormParts> {
    field.check_mesh(mesh)?;
    Penalty::new(penalty.gamma0, penalty.gamma1)?;
    let h = mesh.h();
    let vol = h.powi(3);
    let rule = QuadratureRule::square(NORM_QUAD)?;
    let mut parts = SeminormParts::default();
    for cell in 0..mesh.num_cells() {
        parts.curl += vol * cnorm_sqr(field.curl_unchecked(h, cell));
    }
    for face in mesh.interior_faces() {
        let (o, n) = (face.owner, face.neighbor);
        let co = ccross(field.curl_unchecked(h, o), face.normal);
        let cn = ccross(field.curl_unchecked(h, n), face.normal);
        let jump_curl = [co[0] - cn[0], co[1] - cn[1], co[2] - cn[2]];
        let mut jt = 0.0;
        for (x, w) in face_points(mesh, o, face.axis, face.offset, &rule) {
            let a = field.eval_local_unchecked(o, mesh.to_local(o, x));
            let b = field.eval_local_unchecked(n, mesh.to_local(n, x));
            let j = ctangential(face.normal, [a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
            jt += w * cnorm_sqr(j);
        }
        parts.j0 += penalty.gamma0 / h * jt;
        parts.j1 += penalty.gamma1 * h * face.area * cnorm_sqr(jump_curl);
    }
    Ok(parts)
}

/// `|v|_DG = sqrt(||curl v||^2 + J_0(v,v) + J_1(v,v))`.
pub fn dg_seminorm(field: &DgField, mesh: &HexMesh, penalty: Penalty) -> Result<f64> {
    Ok(seminorm_parts(field, mesh, penalty)?.total().sqrt())
}

/// `||v||_DG = sqrt(|v|_DG^2 + ||v||^2_{L^2(D)})`.
pub fn dg_norm(field: &DgField, mesh: &HexMesh, penalty: Penalty) -> Result<f64> {
    let semi = seminorm_parts(field, mesh, penalty)?.total();
    let l2 = l2_norm(field, mesh)?;
    Ok((semi + l2 * l2).sqrt())
}

/// `||v||_{L^2(dD)}`.
pub fn boundary_l2(field: &DgField, mesh: &HexMesh) -> Result<f64> {
    field.check_mesh(mesh)?;
    let rule = QuadratureRule::square(NORM_QUAD)?;
    let mut sum = 0.0;
    for face in mesh.boundary_faces() {
        for (x, w) in face_points(mesh, face.cell, face.axis, face.offset, &rule) {
            let v = field.eval_local_unchecked(face.cell, mesh.to_local(face.cell, x));
            sum += w * cnorm_sqr(v);
        }
    }
    Ok(sum.sqrt())
}

/// `∫_D v dx`, componentwise.
pub fn integral(field: &DgField, mesh: &HexMesh) -> Result<CVec3> {
    field.check_mesh(mesh)?;
    let vol = mesh.h().powi(3);
    let moments = [1.0, 0.5, 0.5, 0.5];
    let mut out = [ZERO; 3];
    for cell in 0..mesh.num_cells() {
        let c = field.cell_coeffs(cell);
        for (comp, o) in out.iter_mut().enumerate() {
            for (a, m) in moments.iter().enumerate() {
                *o += c[local_dof(comp, a)] * (m * vol);
            }
        }
    }
    Ok(out)
}
