//! Uniform hexahedral partitions of the unit cube `D = (0,1)^3`.
//!
//! Cells carry a global label equal to their lexicographic index
//! `i + L*(j + L*k)`. Every interior face stores the cell with the larger
//! label as its *owner*, and the face normal points out of the owner. Jumps
//! across interior faces are always `owner trace - neighbor trace`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Point3 = [f64; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub label: usize,
    pub ijk: [usize; 3],
    /// Lower corner of the cell.
    pub origin: Point3,
    pub center: Point3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteriorFace {
    /// Cell with the larger global label.
    pub owner: usize,
    pub neighbor: usize,
    /// Axis the face is orthogonal to (0 = x, 1 = y, 2 = z).
    pub axis: usize,
    /// Unit normal pointing out of `owner`.
    pub normal: Point3,
    /// Coordinate of the face plane along `axis`.
    pub offset: f64,
    pub area: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFace {
    pub cell: usize,
    pub axis: usize,
    /// Outward unit normal of the domain.
    pub normal: Point3,
    pub offset: f64,
    pub area: f64,
}

/// Either kind of face, used where traces are taken generically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceId {
    Interior(usize),
    Boundary(usize),
}

#[derive(Clone, Debug)]
pub struct HexMesh {
    cells_per_axis: usize,
    h: f64,
    cells: Vec<Cell>,
    interior_faces: Vec<InteriorFace>,
    boundary_faces: Vec<BoundaryFace>,
    cell_interior_faces: Vec<Vec<usize>>,
    cell_boundary_faces: Vec<Vec<usize>>,
}

/// Counts and mesh size, for debugging dumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub cells_per_axis: usize,
    pub h: f64,
    pub cells: usize,
    pub interior_faces: usize,
    pub boundary_faces: usize,
}

fn unit(axis: usize, sign: f64) -> Point3 {
    let mut n = [0.0; 3];
    n[axis] = sign;
    n
}

impl HexMesh {
    /// Builds the uniform partition of the unit cube into `L^3` cubes.
    pub fn uniform(cells_per_axis: usize) -> Result<Self> {
        build_uniform_mesh(cells_per_axis)
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, label: usize) -> Result<&Cell> {
        self.cells.get(label).ok_or(Error::OutOfRange {
            index: label,
            len: self.cells.len(),
        })
    }

    pub fn interior_faces(&self) -> &[InteriorFace] {
        &self.interior_faces
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    /// Interior faces touching `cell`, in ascending face order.
    pub fn cell_interior_faces(&self, cell: usize) -> &[usize] {
        &self.cell_interior_faces[cell]
    }

    pub fn cell_boundary_faces(&self, cell: usize) -> &[usize] {
        &self.cell_boundary_faces[cell]
    }

    pub fn label(&self, i: usize, j: usize, k: usize) -> usize {
        let l = self.cells_per_axis;
        i + l * (j + l * k)
    }

    /// Face-adjacent cells of `cell`, sorted by label.
    pub fn neighbors(&self, cell: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.cell_interior_faces[cell]
            .iter()
            .map(|&f| {
                let face = &self.interior_faces[f];
                if face.owner == cell {
                    face.neighbor
                } else {
                    face.owner
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Maps a physical point to local coordinates `[0,1]^3` of `cell`.
    pub fn to_local(&self, cell: usize, x: Point3) -> Point3 {
        let o = self.cells[cell].origin;
        [
            (x[0] - o[0]) / self.h,
            (x[1] - o[1]) / self.h,
            (x[2] - o[2]) / self.h,
        ]
    }

    pub fn to_physical(&self, cell: usize, xhat: Point3) -> Point3 {
        let o = self.cells[cell].origin;
        [
            o[0] + self.h * xhat[0],
            o[1] + self.h * xhat[1],
            o[2] + self.h * xhat[2],
        ]
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            cells_per_axis: self.cells_per_axis,
            h: self.h,
            cells: self.cells.len(),
            interior_faces: self.interior_faces.len(),
            boundary_faces: self.boundary_faces.len(),
        }
    }

    /// Returns a copy with cell labels permuted by `perm` (new label of old
    /// cell `c` is `perm[c]`). Face owners are re-chosen so the larger-label
    /// convention still holds. Only used to probe orientation dependence.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.cells.len();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::config("relabel: not a permutation"));
            }
            seen[p] = true;
        }
        let mut cells = vec![self.cells[0].clone(); n];
        for (old, cell) in self.cells.iter().enumerate() {
            let mut c = cell.clone();
            c.label = perm[old];
            cells[perm[old]] = c;
        }
        let interior_faces = self
            .interior_faces
            .iter()
            .map(|f| {
                let (a, b) = (perm[f.owner], perm[f.neighbor]);
                let flip = a < b;
                InteriorFace {
                    owner: a.max(b),
                    neighbor: a.min(b),
                    normal: if flip {
                        f.normal.map(|v| -v)
                    } else {
                        f.normal
                    },
                    ..f.clone()
                }
            })
            .collect::<Vec<_>>();
        let boundary_faces = self
            .boundary_faces
            .iter()
            .map(|f| BoundaryFace {
                cell: perm[f.cell],
                ..f.clone()
            })
            .collect::<Vec<_>>();
        Ok(Self::with_faces(
            self.cells_per_axis,
            cells,
            interior_faces,
            boundary_faces,
        ))
    }

    fn with_faces(
        cells_per_axis: usize,
        cells: Vec<Cell>,
        interior_faces: Vec<InteriorFace>,
        boundary_faces: Vec<BoundaryFace>,
    ) -> Self {
        let n = cells.len();
        let mut cell_interior_faces = vec![Vec::new(); n];
        for (f, face) in interior_faces.iter().enumerate() {
            cell_interior_faces[face.owner].push(f);
            cell_interior_faces[face.neighbor].push(f);
        }
        let mut cell_boundary_faces = vec![Vec::new(); n];
        for (f, face) in boundary_faces.iter().enumerate() {
            cell_boundary_faces[face.cell].push(f);
        }
        Self {
            cells_per_axis,
            h: 1.0 / cells_per_axis as f64,
            cells,
            interior_faces,
            boundary_faces,
            cell_interior_faces,
            cell_boundary_faces,
        }
    }
}

pub fn build_uniform_mesh(cells_per_axis: usize) -> Result<HexMesh> {
    let l = cells_per_axis;
    if l == 0 {
        return Err(Error::config("cells per axis must be at least 1"));
    }
    let h = 1.0 / l as f64;
    let label = |i: usize, j: usize, k: usize| i + l * (j + l * k);

    let mut cells = Vec::with_capacity(l * l * l);
    for k in 0..l {
        for j in 0..l {
            for i in 0..l {
                let origin = [i as f64 * h, j as f64 * h, k as f64 * h];
                cells.push(Cell {
                    label: label(i, j, k),
                    ijk: [i, j, k],
                    origin,
                    center: origin.map(|o| o + 0.5 * h),
                });
            }
        }
    }

    let mut interior_faces = Vec::with_capacity(3 * l * l * (l - 1));
    let mut boundary_faces = Vec::with_capacity(6 * l * l);
    for cell in &cells {
        let ijk = cell.ijk;
        for axis in 0..3 {
            // The upper neighbor along `axis` has the larger label, so it owns
            // the shared face and the normal points in the -axis direction.
            if ijk[axis] > 0 {
                let mut lower = ijk;
                lower[axis] -= 1;
                interior_faces.push(InteriorFace {
                    owner: cell.label,
                    neighbor: label(lower[0], lower[1], lower[2]),
                    axis,
                    normal: unit(axis, -1.0),
                    offset: cell.origin[axis],
                    area: h * h,
                });
            } else {
                boundary_faces.push(BoundaryFace {
                    cell: cell.label,
                    axis,
                    normal: unit(axis, -1.0),
                    offset: 0.0,
                    area: h * h,
                });
            }
            if ijk[axis] + 1 == l {
                boundary_faces.push(BoundaryFace {
                    cell: cell.label,
                    axis,
                    normal: unit(axis, 1.0),
                    offset: 1.0,
                    area: h * h,
                });
            }
        }
    }

    Ok(HexMesh::with_faces(l, cells, interior_faces, boundary_faces))
}
