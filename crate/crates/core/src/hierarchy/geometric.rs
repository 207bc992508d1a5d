//! Nested uniform meshes with linear interpolation between them.

use crate::error::{Error, Result};
use crate::linalg::{rap, CsrMatrix};
use crate::problems::{assemble_jump, assemble_poisson, MeshLevel, MAX_LEVEL};
use crate::smoothers::SmootherSpec;

use super::Hierarchy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometricProblem {
    Poisson,
    Jump { low: f64 },
}

/// Linear interpolation from mesh level `k - 1` to mesh level `k`.
///
/// A coarse hat function takes the value 1 at its own node and 1/2 at the six
/// fine neighbours lying on its support edges: `(+-1, 0)`, `(0, +-1)` and the
/// diagonal pair `(1, 1)`, `(-1, -1)` of the lower-left to upper-right split.
pub fn prolongator(k: usize) -> Result<CsrMatrix> {
    if k < 2 {
        return Err(Error::LevelOutOfRange {
            level: k,
            max: MAX_LEVEL,
        });
    }
    let fine = MeshLevel::new(k)?;
    let coarse = MeshLevel::new(k - 1)?;
    let mut triplets = Vec::with_capacity(7 * coarse.n_interior());
    const NEIGHBORS: [(isize, isize); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)];
    for c in 0..coarse.n_interior() {
        let (ci, cj) = coarse.coords(c);
        let (fi, fj) = (2 * ci, 2 * cj);
        triplets.push((fine.node(fi, fj).expect("coarse nodes are interior"), c, 1.0));
        for (di, dj) in NEIGHBORS {
            let (ni, nj) = (fi as isize + di, fj as isize + dj);
            if let Some(f) = fine.node(ni as usize, nj as usize) {
                triplets.push((f, c, 0.5));
            }
        }
    }
    CsrMatrix::from_triplets(fine.n_interior(), coarse.n_interior(), &triplets)
}

/// Geometric hierarchy on levels `1..=k_max`.
///
/// The finest operator is assembled on the mesh; coarser operators are the
/// Galerkin products `P^t A P`. For the Poisson problem these coincide with the
/// directly assembled coarse matrices.
pub fn build_geometric(problem: GeometricProblem, k_max: usize, smoother: SmootherSpec) -> Result<Hierarchy> {
    if !(2..=MAX_LEVEL).contains(&k_max) {
        return Err(Error::LevelOutOfRange {
            level: k_max,
            max: MAX_LEVEL,
        });
    }
    let (fine, _) = match problem {
        GeometricProblem::Poisson => assemble_poisson(k_max)?,
        GeometricProblem::Jump { low } => assemble_jump(k_max, low)?,
    };
    let mut matrices = vec![fine];
    let mut prolongators = Vec::new();
    for k in (2..=k_max).rev() {
        let p = prolongator(k)?;
        let coarse = rap(&p, matrices.last().unwrap())?;
        matrices.push(coarse);
        prolongators.push(p);
    }
    matrices.reverse();
    prolongators.reverse();
    Hierarchy::from_parts(matrices, prolongators, smoother)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_prolongator() {
        let p = prolongator(2).unwrap();
        assert_eq!((p.n_rows(), p.n_cols()), (9, 1));
        let mesh = MeshLevel::new(2).unwrap();
        for r in 0..9 {
            let (i, j) = mesh.coords(r);
            let expected = match (i as isize - 2, j as isize - 2) {
                (0, 0) => 1.0,
                (1, 0) | (-1, 0) | (0, 1) | (0, -1) | (1, 1) | (-1, -1) => 0.5,
                _ => 0.0,
            };
            assert_eq!(p.get(r, 0), expected, "node ({i}, {j})");
        }
        let (a2, _) = assemble_poisson(2).unwrap();
        assert_eq!(rap(&p, &a2).unwrap().to_dense(), vec![4.0]);
    }

    #[test]
    fn coarse_nodes_interpolate_exactly() {
        for k in 2..=5 {
            let p = prolongator(k).unwrap();
            let fine = MeshLevel::new(k).unwrap();
            let coarse = MeshLevel::new(k - 1).unwrap();
            for c in 0..coarse.n_interior() {
                let (ci, cj) = coarse.coords(c);
                let f = fine.node(2 * ci, 2 * cj).unwrap();
                assert_eq!(p.row(f), (&[c][..], &[1.0][..]));
            }
        }
    }

    #[test]
    fn interpolates_linear_functions() {
        for k in 2..=6 {
            let p = prolongator(k).unwrap();
            let fine = MeshLevel::new(k).unwrap();
            let coarse = MeshLevel::new(k - 1).unwrap();
            let lin = |m: &MeshLevel, idx: usize| {
                let (i, j) = m.coords(idx);
                (i + j) as f64 * m.h()
            };
            let vc: Vec<f64> = (0..coarse.n_interior()).map(|c| lin(&coarse, c)).collect();
            let vf = p.mul_vec(&vc);
            for (f, &v) in vf.iter().enumerate() {
                let (i, j) = fine.coords(f);
                // Fine nodes whose interpolation stencil touches the boundary see the
                // zero boundary value, so compare on nodes with all parents interior.
                if i > 1 && j > 1 && i < fine.side() && j < fine.side() {
                    assert!((v - lin(&fine, f)).abs() <= 1e-13, "k={k} node ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn level_range() {
        assert!(build_geometric(GeometricProblem::Poisson, 1, SmootherSpec::default()).is_err());
        assert!(prolongator(1).is_err());
    }
}
