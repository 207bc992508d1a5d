//! Linear finite-element model problems on the unit square.
//!
//! The square is divided into `2^k x 2^k` cells, each split along its
//! lower-left to upper-right diagonal. Homogeneous Dirichlet rows are
//! eliminated, leaving `(2^k - 1)^2` interior unknowns numbered
//! lexicographically (x fastest).

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

pub const MIN_LEVEL: usize = 1;
pub const MAX_LEVEL: usize = 12;
pub const DEFAULT_LOW_COEFFICIENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshLevel {
    pub k: usize,
}

impl MeshLevel {
    pub fn new(k: usize) -> Result<Self> {
        if !(MIN_LEVEL..=MAX_LEVEL).contains(&k) {
            return Err(Error::LevelOutOfRange {
                level: k,
                max: MAX_LEVEL,
            });
        }
        Ok(Self { k })
    }

    pub fn cells_per_side(&self) -> usize {
        1 << self.k
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_side() as f64
    }

    /// Interior nodes per side.
    pub fn side(&self) -> usize {
        self.cells_per_side() - 1
    }

    pub fn n_interior(&self) -> usize {
        self.side() * self.side()
    }

    /// Index of grid node `(i, j)`, or `None` on the boundary.
    pub fn node(&self, i: usize, j: usize) -> Option<usize> {
        let m = self.cells_per_side();
        if i == 0 || j == 0 || i >= m || j >= m {
            None
        } else {
            Some((j - 1) * self.side() + (i - 1))
        }
    }

    /// Grid coordinates of interior node `idx`.
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.side() + 1, idx / self.side() + 1)
    }
}

/// Open axis-aligned rectangle `(x0, x1) x (y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn square(lo: f64, hi: f64) -> Self {
        Self {
            x0: lo,
            x1: hi,
            y0: lo,
            y1: hi,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x0 && x < self.x1 && y > self.y0 && y < self.y1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    Constant,
    Jump,
}

/// Diffusion coefficient, sampled at element barycentres.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub kind: CoefficientKind,
    /// Value outside the high regions (jump kind only).
    pub low: f64,
    /// Regions where the coefficient equals 1.
    pub regions: Vec<Rect>,
}

impl CoefficientField {
    pub fn constant() -> Self {
        Self {
            kind: CoefficientKind::Constant,
            low: 1.0,
            regions: Vec::new(),
        }
    }

    /// `a = 1` on `(0.25, 0.5)^2` and `(0.5, 0.75)^2`, `low` elsewhere.
    pub fn jump(low: f64) -> Self {
        Self {
            kind: CoefficientKind::Jump,
            low,
            regions: vec![Rect::square(0.25, 0.5), Rect::square(0.5, 0.75)],
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            CoefficientKind::Constant => 1.0,
            CoefficientKind::Jump => {
                if self.regions.iter().any(|r| r.contains(x, y)) {
                    1.0
                } else {
                    self.low
                }
            }
        }
    }
}

/// A discretised model problem.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: MeshLevel,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// P1 stiffness and constant-load assembly for an arbitrary coefficient.
pub fn assemble(k: usize, coefficient: &CoefficientField, load: f64) -> Result<Discretization> {
    let mesh = MeshLevel::new(k)?;
    let m = mesh.cells_per_side();
    let h = mesh.h();
    let n = mesh.n_interior();
    let mut triplets = Vec::with_capacity(7 * n + 16);
    let mut rhs = vec![0.0; n];

    for cj in 0..m {
        for ci in 0..m {
            let lower = [(ci, cj), (ci + 1, cj), (ci + 1, cj + 1)];
            let upper = [(ci, cj), (ci + 1, cj + 1), (ci, cj + 1)];
            for tri in [lower, upper] {
                let pts = tri.map(|(i, j)| (i as f64 * h, j as f64 * h));
                let bx = (pts[0].0 + pts[1].0 + pts[2].0) / 3.0;
                let by = (pts[0].1 + pts[1].1 + pts[2].1) / 3.0;
                let a = coefficient.eval(bx, by);
                let (local, area) = p1_stiffness(pts);
                let nodes = tri.map(|(i, j)| mesh.node(i, j));
                for r in 0..3 {
                    let Some(gr) = nodes[r] else { continue };
                    rhs[gr] += load * area / 3.0;
                    for c in 0..3 {
                        if let Some(gc) = nodes[c] {
                            triplets.push((gr, gc, a * local[r][c]));
                        }
                    }
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(n, n, &triplets)?.drop_zeros();
    Ok(Discretization { mesh, matrix, rhs })
}

/// Local P1 stiffness `area * grad(l_a) . grad(l_b)` and the triangle area.
fn p1_stiffness(p: [(f64, f64); 3]) -> ([[f64; 3]; 3], f64) {
    let det = (p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1);
    let area = 0.5 * det.abs();
    // grad(l_a) = (y_b - y_c, x_c - x_b) / det for (a, b, c) cyclic.
    let grads: [(f64, f64); 3] = std::array::from_fn(|a| {
        let b = (a + 1) % 3;
        let c = (a + 2) % 3;
        ((p[b].1 - p[c].1) / det, (p[c].0 - p[b].0) / det)
    });
    let mut k = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            k[r][c] = area * (grads[r].0 * grads[c].0 + grads[r].1 * grads[c].1);
        }
    }
    (k, area)
}

/// `-Laplace u = 1` with homogeneous Dirichlet data.
pub fn assemble_poisson(k: usize) -> Result<(CsrMatrix, Vec<f64>)> {
    let d = assemble(k, &CoefficientField::constant(), 1.0)?;
    Ok((d.matrix, d.rhs))
}

/// `-div(a grad u) = 0` with the two-square jump coefficient.
pub fn assemble_jump(k: usize, low: f64) -> Result<(CsrMatrix, Vec<f64>)> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "jump problem needs k >= 2 so the coefficient regions align with the mesh (got {k})"
        )));
    }
    if !(low > 0.0) || !low.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "low coefficient must be positive, got {low}"
        )));
    }
    let d = assemble(k, &CoefficientField::jump(low), 0.0)?;
    Ok((d.matrix, d.rhs))
}
