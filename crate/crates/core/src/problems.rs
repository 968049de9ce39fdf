//! Deterministic test-matrix generators.
//!
//! All domains are node-centered uniform grids with Dirichlet boundaries
//! eliminated; the unknowns are the interior nodes, ordered lexicographically
//! with x fastest. Generators never use randomness.

use crate::error::{AmgError, Result};
use crate::linalg::LuFactors;
use crate::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    Poisson2D,
    Poisson3D,
    AnisoDiffusion2D,
    JumpBoxInBox,
    JumpSawtooth,
    AdvDiffConstant,
    AdvDiffRecirculating,
}

/// Everything needed to build one test matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Anisotropy strength (AnisoDiffusion2D).
    pub epsilon: f64,
    /// Anisotropy rotation angle in radians (AnisoDiffusion2D).
    pub angle: f64,
    /// Diffusion constant (advection-diffusion kinds).
    pub alpha: f64,
    /// Coefficient inside the jump region (jump kinds).
    pub d_high: f64,
    /// Divide stencils by h^2 (finite-difference kinds).
    pub h_scaling: bool,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, n: usize) -> Self {
        ProblemSpec {
            kind,
            nx: n,
            ny: n,
            nz: n,
            epsilon: 1e-3,
            angle: 0.0,
            alpha: 1.0,
            d_high: 1e4,
            h_scaling: true,
        }
    }

    pub fn n_unknowns(&self) -> usize {
        match self.kind {
            ProblemKind::Poisson3D => self.nx * self.ny * self.nz,
            _ => self.nx * self.ny,
        }
    }

    /// Grid spacing implied by the kind's domain.
    pub fn h(&self) -> f64 {
        let extent = match self.kind {
            ProblemKind::JumpSawtooth => 16.0,
            ProblemKind::AdvDiffConstant | ProblemKind::AdvDiffRecirculating => 2.0,
            _ => 1.0,
        };
        extent / (self.nx as f64 + 1.0)
    }

    pub fn build(&self) -> Result<SparseMatrix> {
        if self.nx < 2 || self.ny < 2 {
            return Err(AmgError::InvalidConfig(
                "grid dimensions must be at least 2 per axis".into(),
            ));
        }
        match self.kind {
            ProblemKind::Poisson2D => poisson_2d(self.nx, self.ny, self.h_scaling),
            ProblemKind::Poisson3D => {
                if self.nz < 2 {
                    return Err(AmgError::InvalidConfig(
                        "grid dimensions must be at least 2 per axis".into(),
                    ));
                }
                poisson_3d(self.nx, self.ny, self.nz, self.h_scaling)
            }
            ProblemKind::AnisoDiffusion2D => {
                if self.epsilon <= 0.0 {
                    return Err(AmgError::InvalidConfig("epsilon must be positive".into()));
                }
                aniso_q1_2d(self.nx, self.ny, self.epsilon, self.angle)
            }
            ProblemKind::JumpBoxInBox => {
                jump_coefficient_2d(self.nx, self.ny, &JumpGeometry::box_in_box(self.d_high))
            }
            ProblemKind::JumpSawtooth => {
                jump_coefficient_2d(self.nx, self.ny, &JumpGeometry::sawtooth(self.d_high))
            }
            ProblemKind::AdvDiffConstant => {
                advdiff_upwind_2d(self.nx, self.ny, self.alpha, &constant_advection())
            }
            ProblemKind::AdvDiffRecirculating => {
                advdiff_upwind_2d(self.nx, self.ny, self.alpha, &AdvectionField::Recirculating)
            }
        }
    }
}

/// 5-point finite-difference Laplacian on the unit square, Dirichlet
/// eliminated. Interior stencil is (-1, -1, 4, -1, -1), divided by h^2 when
/// `h_scaling` is set.
pub fn poisson_2d(nx: usize, ny: usize, h_scaling: bool) -> Result<SparseMatrix> {
    if nx < 2 || ny < 2 {
        return Err(AmgError::InvalidConfig(
            "grid dimensions must be at least 2 per axis".into(),
        ));
    }
    let n = nx * ny;
    let h = 1.0 / (nx as f64 + 1.0);
    let scale = if h_scaling { 1.0 / (h * h) } else { 1.0 };
    let idx = |i: usize, j: usize| j * nx + i;
    let mut t = Vec::with_capacity(5 * n);
    for j in 0..ny {
        for i in 0..nx {
            let row = idx(i, j);
            t.push((row, row, 4.0 * scale));
            if i > 0 {
                t.push((row, idx(i - 1, j), -scale));
            }
            if i + 1 < nx {
                t.push((row, idx(i + 1, j), -scale));
            }
            if j > 0 {
                t.push((row, idx(i, j - 1), -scale));
            }
            if j + 1 < ny {
                t.push((row, idx(i, j + 1), -scale));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &t)
}

/// 7-point finite-difference Laplacian on the unit cube.
pub fn poisson_3d(nx: usize, ny: usize, nz: usize, h_scaling: bool) -> Result<SparseMatrix> {
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(AmgError::InvalidConfig(
            "grid dimensions must be at least 2 per axis".into(),
        ));
    }
    let n = nx * ny * nz;
    let h = 1.0 / (nx as f64 + 1.0);
    let scale = if h_scaling { 1.0 / (h * h) } else { 1.0 };
    let idx = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;
    let mut t = Vec::with_capacity(7 * n);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let row = idx(i, j, k);
                t.push((row, row, 6.0 * scale));
                if i > 0 {
                    t.push((row, idx(i - 1, j, k), -scale));
                }
                if i + 1 < nx {
                    t.push((row, idx(i + 1, j, k), -scale));
                }
                if j > 0 {
                    t.push((row, idx(i, j - 1, k), -scale));
                }
                if j + 1 < ny {
                    t.push((row, idx(i, j + 1, k), -scale));
                }
                if k > 0 {
                    t.push((row, idx(i, j, k - 1), -scale));
                }
                if k + 1 < nz {
                    t.push((row, idx(i, j, k + 1), -scale));
                }
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &t)
}

/// Bilinear (Q1) finite-element stiffness matrix for -div(Q^T D Q grad u)
/// on the unit square, where D = diag(1, epsilon) and Q rotates by `angle`.
/// Assembled with 2x2 Gauss quadrature, which is exact for constant
/// coefficients, and yields the familiar 9-point stencil.
pub fn aniso_q1_2d(nx: usize, ny: usize, epsilon: f64, angle: f64) -> Result<SparseMatrix> {
    if nx < 2 || ny < 2 {
        return Err(AmgError::InvalidConfig(
            "grid dimensions must be at least 2 per axis".into(),
        ));
    }
    if epsilon <= 0.0 {
        return Err(AmgError::InvalidConfig("epsilon must be positive".into()));
    }
    let (s, c) = angle.sin_cos();
    // K = Q^T D Q with D = diag(1, eps).
    let kxx = c * c + epsilon * s * s;
    let kyy = s * s + epsilon * c * c;
    let kxy = (epsilon - 1.0) * c * s;

    // Element stiffness on the reference square [-1,1]^2; the physical h
    // cancels in 2D. Local nodes: 0 (-1,-1), 1 (1,-1), 2 (1,1), 3 (-1,1).
    let g = 1.0 / 3.0f64.sqrt();
    let gauss = [(-g, -g), (g, -g), (g, g), (-g, g)];
    let ke = {
        let mut ke = [[0.0f64; 4]; 4];
        for &(xi, eta) in &gauss {
            let dn = [
                [-(1.0 - eta) / 4.0, -(1.0 - xi) / 4.0],
                [(1.0 - eta) / 4.0, -(1.0 + xi) / 4.0],
                [(1.0 + eta) / 4.0, (1.0 + xi) / 4.0],
                [-(1.0 + eta) / 4.0, (1.0 - xi) / 4.0],
            ];
            for a in 0..4 {
                for b in 0..4 {
                    let gx_a = dn[a][0];
                    let gy_a = dn[a][1];
                    let gx_b = dn[b][0];
                    let gy_b = dn[b][1];
                    ke[a][b] += gx_a * (kxx * gx_b + kxy * gy_b) + gy_a * (kxy * gx_b + kyy * gy_b);
                }
            }
        }
        // Force exact symmetry so the assembled matrix is bitwise symmetric.
        for a in 0..4 {
            for b in (a + 1)..4 {
                let v = 0.5 * (ke[a][b] + ke[b][a]);
                ke[a][b] = v;
                ke[b][a] = v;
            }
        }
        ke
    };

    let n = nx * ny;
    let nodes_x = nx + 2;
    // Interior unknown index for a global node, if interior.
    let unknown = |gi: usize, gj: usize| -> Option<usize> {
        if gi >= 1 && gi <= nx && gj >= 1 && gj <= ny {
            Some((gj - 1) * nx + (gi - 1))
        } else {
            None
        }
    };
    let _ = nodes_x;
    let mut t = Vec::with_capacity(9 * n);
    for ej in 0..(ny + 1) {
        for ei in 0..(nx + 1) {
            // Global nodes of this element, in local order.
            let nodes = [(ei, ej), (ei + 1, ej), (ei + 1, ej + 1), (ei, ej + 1)];
            for a in 0..4 {
                let Some(ra) = unknown(nodes[a].0, nodes[a].1) else {
                    continue;
                };
                for b in 0..4 {
                    if let Some(cb) = unknown(nodes[b].0, nodes[b].1) {
                        t.push((ra, cb, ke[a][b]));
                    }
                }
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &t)
}

/// Geometry of the high-coefficient region for the jump problems.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpGeometry {
    /// Square domain [0, extent]^2.
    pub extent: f64,
    pub d_high: f64,
    pub region: JumpRegion,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum JumpRegion {
    Box { lo: (f64, f64), hi: (f64, f64) },
    Polygon(Vec<(f64, f64)>),
}

/// Sawtooth band across [0,16]^2: a sloped bottom edge with a toothed top.
/// The published figure is schematic, so these vertices are an approximation
/// and callers may substitute their own polygon.
pub const SAWTOOTH_POLYGON: [(f64, f64); 12] = [
    (0.0, 2.0),
    (16.0, 6.0),
    (16.0, 9.0),
    (14.0, 12.0),
    (12.0, 8.0),
    (10.0, 11.0),
    (8.0, 7.0),
    (6.0, 10.0),
    (4.0, 6.0),
    (2.0, 9.0),
    (0.0, 5.0),
    (0.0, 2.0),
];

impl JumpGeometry {
    pub fn box_in_box(d_high: f64) -> Self {
        JumpGeometry {
            extent: 1.0,
            d_high,
            region: JumpRegion::Box {
                lo: (0.44, 0.44),
                hi: (0.52, 0.52),
            },
        }
    }

    pub fn sawtooth(d_high: f64) -> Self {
        JumpGeometry {
            extent: 16.0,
            d_high,
            region: JumpRegion::Polygon(SAWTOOTH_POLYGON.to_vec()),
        }
    }

    fn coefficient(&self, x: f64, y: f64) -> f64 {
        let inside = match &self.region {
            JumpRegion::Box { lo, hi } => x >= lo.0 && x <= hi.0 && y >= lo.1 && y <= hi.1,
            JumpRegion::Polygon(poly) => point_in_polygon(x, y, poly),
        };
        if inside {
            self.d_high
        } else {
            1.0
        }
    }
}

/// Even-odd ray casting.
fn point_in_polygon(x: f64, y: f64, poly: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if ((yi > y) != (yj > y)) && (x < (xj - xi) * (y - yi) / (yj - yi) + xi) {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Conservative 5-point discretization of -div(d(x,y) grad u) with face
/// coefficients taken as the arithmetic mean of the nodal coefficients on
/// either side. Symmetric by construction.
pub fn jump_coefficient_2d(nx: usize, ny: usize, geom: &JumpGeometry) -> Result<SparseMatrix> {
    if nx < 2 || ny < 2 {
        return Err(AmgError::InvalidConfig(
            "grid dimensions must be at least 2 per axis".into(),
        ));
    }
    let n = nx * ny;
    let h = geom.extent / (nx as f64 + 1.0);
    let inv_h2 = 1.0 / (h * h);
    // Nodal coefficients on the full grid including boundary nodes.
    let d_at = |gi: usize, gj: usize| geom.coefficient(gi as f64 * h, gj as f64 * h);
    let idx = |i: usize, j: usize| j * nx + i;
    let mut t = Vec::with_capacity(5 * n);
    for j in 0..ny {
        for i in 0..nx {
            let (gi, gj) = (i + 1, j + 1);
            let row = idx(i, j);
            let d_c = d_at(gi, gj);
            let faces = [
                (
                    gi.wrapping_sub(1),
                    gj,
                    i.checked_sub(1).map(|ii| idx(ii, j)),
                ),
                (gi + 1, gj, (i + 1 < nx).then(|| idx(i + 1, j))),
                (
                    gi,
                    gj.wrapping_sub(1),
                    j.checked_sub(1).map(|jj| idx(i, jj)),
                ),
                (gi, gj + 1, (j + 1 < ny).then(|| idx(i, j + 1))),
            ];
            let mut diag = 0.0;
            for &(ni, nj, col) in &faces {
                let coef = 0.5 * (d_c + d_at(ni, nj)) * inv_h2;
                diag += coef;
                if let Some(c) = col {
                    t.push((row, c, -coef));
                }
            }
            t.push((row, row, diag));
        }
    }
    SparseMatrix::from_triplets(n, n, &t)
}

/// Advection velocity field on [-1,1]^2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum AdvectionField {
    Constant {
        bx: f64,
        by: f64,
    },
    /// Divergence-free recirculation about the domain center; evaluated in
    /// unit-square coordinates mapped from [-1,1]^2.
    Recirculating,
}

impl AdvectionField {
    pub fn at(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            AdvectionField::Constant { bx, by } => (*bx, *by),
            AdvectionField::Recirculating => {
                let u = (x + 1.0) / 2.0;
                let v = (y + 1.0) / 2.0;
                (
                    u * (1.0 - u) * (2.0 * v - 1.0),
                    -(2.0 * u - 1.0) * (1.0 - v) * v,
                )
            }
        }
    }
}

/// Constant non-grid-aligned field b = [sqrt(2/3), sqrt(1/3)].
pub fn constant_advection() -> AdvectionField {
    AdvectionField::Constant {
        bx: (2.0f64 / 3.0).sqrt(),
        by: (1.0f64 / 3.0).sqrt(),
    }
}

/// First-order upwind finite differences for
/// -alpha * Laplacian(u) + b . grad(u) on [-1,1]^2, Dirichlet inflow
/// eliminated. With alpha = 0 and a constant positive field the matrix is
/// lower triangular in the natural ordering.
pub fn advdiff_upwind_2d(
    nx: usize,
    ny: usize,
    alpha: f64,
    field: &AdvectionField,
) -> Result<SparseMatrix> {
    if nx < 2 || ny < 2 {
        return Err(AmgError::InvalidConfig(
            "grid dimensions must be at least 2 per axis".into(),
        ));
    }
    if alpha < 0.0 {
        return Err(AmgError::InvalidConfig("alpha must be nonnegative".into()));
    }
    if alpha == 0.0 && matches!(field, AdvectionField::Recirculating) {
        return Err(AmgError::InvalidConfig(
            "recirculating advection with alpha = 0 is ill-defined".into(),
        ));
    }
    let n = nx * ny;
    let h = 2.0 / (nx as f64 + 1.0);
    let inv_h2 = 1.0 / (h * h);
    let inv_h = 1.0 / h;
    let idx = |i: usize, j: usize| j * nx + i;
    let mut t = Vec::with_capacity(5 * n);
    for j in 0..ny {
        for i in 0..nx {
            let row = idx(i, j);
            let x = -1.0 + (i as f64 + 1.0) * h;
            let y = -1.0 + (j as f64 + 1.0) * h;
            let (bx, by) = field.at(x, y);
            let mut diag = 0.0;
            if alpha > 0.0 {
                diag += 4.0 * alpha * inv_h2;
                if i > 0 {
                    t.push((row, idx(i - 1, j), -alpha * inv_h2));
                }
                if i + 1 < nx {
                    t.push((row, idx(i + 1, j), -alpha * inv_h2));
                }
                if j > 0 {
                    t.push((row, idx(i, j - 1), -alpha * inv_h2));
                }
                if j + 1 < ny {
                    t.push((row, idx(i, j + 1), -alpha * inv_h2));
                }
            }
            // Upwind advection: only upstream neighbors are referenced.
            if bx >= 0.0 {
                diag += bx * inv_h;
                if i > 0 {
                    t.push((row, idx(i - 1, j), -bx * inv_h));
                }
            } else {
                diag -= bx * inv_h;
                if i + 1 < nx {
                    t.push((row, idx(i + 1, j), bx * inv_h));
                }
            }
            if by >= 0.0 {
                diag += by * inv_h;
                if j > 0 {
                    t.push((row, idx(i, j - 1), -by * inv_h));
                }
            } else {
                diag -= by * inv_h;
                if j + 1 < ny {
                    t.push((row, idx(i, j + 1), by * inv_h));
                }
            }
            t.push((row, row, diag));
        }
    }
    SparseMatrix::from_triplets(n, n, &t)
}

/// Left-multiplies by the inverse of the block diagonal of A:
/// returns Bdiag^{-1} A. Block size 1 is plain row scaling.
pub fn block_diag_prescale(a: &SparseMatrix, block_size: usize) -> Result<SparseMatrix> {
    let n = a.n_rows();
    if block_size == 0 || n % block_size != 0 {
        return Err(AmgError::InvalidConfig(format!(
            "matrix size {n} is not divisible by block size {block_size}"
        )));
    }
    let mut t = Vec::with_capacity(a.nnz());
    for b in 0..(n / block_size) {
        let r0 = b * block_size;
        let rows: Vec<usize> = (r0..r0 + block_size).collect();
        let block = a.extract_submatrix(&rows, &rows)?;
        let lu = LuFactors::factor(&block)
            .map_err(|_| AmgError::SingularMatrix(format!("diagonal block {b} is singular")))?;
        // Union of columns touched by this block's rows.
        let mut cols: Vec<usize> = Vec::new();
        for &r in &rows {
            cols.extend_from_slice(a.row(r).0);
        }
        cols.sort_unstable();
        cols.dedup();
        let rhs = a.extract_submatrix(&rows, &cols)?;
        let x = lu.solve(&rhs);
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                let v = x[(ri, ci)];
                if v != 0.0 {
                    t.push((r, c, v));
                }
            }
        }
    }
    SparseMatrix::from_triplets(n, a.n_cols(), &t)
}
