//! Multilevel hierarchies: nested geometric meshes and unsmoothed aggregation.
//!
//! Levels are numbered `1..=J` from coarsest to finest. Level `k - 1` stores
//! the prolongator `P` from itself to level `k`; restriction is always `P^t`.

mod aggregation;
mod geometric;

pub use aggregation::{aggregate, Aggregation, DEFAULT_THETA};
pub use geometric::{build_geometric, prolongator as geometric_prolongator, GeometricProblem};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{rap, CsrMatrix, DenseFactorization, DEFAULT_DENSE_LIMIT};
use crate::smoothers::{Smoother, SmootherSpec};

pub const DEFAULT_MIN_COARSE: usize = 50;
pub const DEFAULT_MAX_LEVELS: usize = 20;

#[derive(Debug, Clone)]
pub struct Level {
    pub a: CsrMatrix,
    /// Prolongator to the next finer level; `None` on the finest level.
    pub p_to_finer: Option<CsrMatrix>,
    pub smoother: Smoother,
}

impl Level {
    pub fn dim(&self) -> usize {
        self.a.n_rows()
    }
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    levels: Vec<Level>,
    coarse_solver: DenseFactorization,
}

impl Hierarchy {
    /// Assemble from coarse-to-fine operators and the prolongators between them.
    ///
    /// `prolongators[i]` maps level `i + 1` to level `i + 2` (1-based levels).
    pub fn from_parts(matrices: Vec<CsrMatrix>, prolongators: Vec<CsrMatrix>, smoother: SmootherSpec) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidParameter("hierarchy needs at least one level".into()));
        }
        if prolongators.len() + 1 != matrices.len() {
            return Err(Error::dims(
                "hierarchy prolongators",
                matrices.len() - 1,
                prolongators.len(),
            ));
        }
        for (i, p) in prolongators.iter().enumerate() {
            if p.n_cols() != matrices[i].n_rows() {
                return Err(Error::dims("prolongator columns", matrices[i].n_rows(), p.n_cols()));
            }
            if p.n_rows() != matrices[i + 1].n_rows() {
                return Err(Error::dims("prolongator rows", matrices[i + 1].n_rows(), p.n_rows()));
            }
        }
        let coarse_solver = DenseFactorization::with_limit(&matrices[0], DEFAULT_DENSE_LIMIT)?;
        let mut ps = prolongators.into_iter().map(Some).collect::<Vec<_>>();
        ps.push(None);
        let levels = matrices
            .into_iter()
            .zip(ps)
            .map(|(a, p_to_finer)| {
                let smoother = smoother.bind(&a)?;
                Ok(Level {
                    a,
                    p_to_finer,
                    smoother,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { levels, coarse_solver })
    }

    /// Number of levels `J`.
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> usize {
        self.levels.len()
    }

    pub fn check_level(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.levels.len() {
            return Err(Error::LevelOutOfRange {
                level: k,
                max: self.levels.len(),
            });
        }
        Ok(())
    }

    /// Level `k` (1-based).
    pub fn level(&self, k: usize) -> &Level {
        &self.levels[k - 1]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn a(&self, k: usize) -> &CsrMatrix {
        &self.levels[k - 1].a
    }

    pub fn smoother(&self, k: usize) -> &Smoother {
        &self.levels[k - 1].smoother
    }

    /// Prolongator from level `k - 1` to level `k`, for `k >= 2`.
    pub fn p(&self, k: usize) -> &CsrMatrix {
        self.levels[k - 2]
            .p_to_finer
            .as_ref()
            .expect("every non-finest level stores a prolongator")
    }

    pub fn coarse_solver(&self) -> &DenseFactorization {
        &self.coarse_solver
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(Level::dim).collect()
    }

    /// Rebind every level to a different smoother.
    pub fn with_smoother(&self, spec: SmootherSpec) -> Result<Self> {
        let levels = self
            .levels
            .iter()
            .map(|l| {
                Ok(Level {
                    a: l.a.clone(),
                    p_to_finer: l.p_to_finer.clone(),
                    smoother: spec.bind(&l.a)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            levels,
            coarse_solver: self.coarse_solver.clone(),
        })
    }

    /// Levels `lo..=hi` as a new hierarchy whose coarsest level is `lo`.
    pub fn sub_hierarchy(&self, lo: usize, hi: usize) -> Result<Self> {
        self.check_level(lo)?;
        self.check_level(hi)?;
        if lo > hi {
            return Err(Error::InvalidParameter(format!("empty level range {lo}..={hi}")));
        }
        let mut levels: Vec<Level> = self.levels[lo - 1..hi].to_vec();
        levels.last_mut().unwrap().p_to_finer = None;
        let coarse_solver = DenseFactorization::new(&levels[0].a)?;
        Ok(Self { levels, coarse_solver })
    }

    /// Largest `|P^t A_k P - A_{k-1}|` over all levels.
    pub fn galerkin_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 2..=self.n_levels() {
            let d = rap(self.p(k), self.a(k))?.max_abs_diff(self.a(k - 1))?;
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// `sum_k nnz(A_k) / nnz(A_J)`.
    pub fn operator_complexity(&self) -> f64 {
        let total: usize = self.levels.iter().map(|l| l.a.nnz()).sum();
        total as f64 / self.levels.last().unwrap().a.nnz() as f64
    }

    /// Per-level dimensions, nonzeros and operator complexity.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "level,dimension,nnz");
        for (i, l) in self.levels.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", i + 1, l.dim(), l.a.nnz());
        }
        let _ = writeln!(s, "operator_complexity,{:.6}", self.operator_complexity());
        s
    }
}

/// Unsmoothed-aggregation AMG hierarchy with Galerkin coarse operators.
///
/// Coarsening stops once the dimension is at most `min_coarse` or
/// `max_levels` levels exist.
pub fn build_ua_amg(
    a_fine: &CsrMatrix,
    theta: f64,
    min_coarse: usize,
    max_levels: usize,
    smoother: SmootherSpec,
) -> Result<Hierarchy> {
    if max_levels == 0 {
        return Err(Error::InvalidParameter("max_levels must be >= 1".into()));
    }
    let mut matrices = vec![a_fine.clone()];
    let mut prolongators = Vec::new();
    let mut stalled = 0;
    while matrices.len() < max_levels && matrices.last().unwrap().n_rows() > min_coarse {
        let a = matrices.last().unwrap();
        let agg = aggregate(a, theta)?;
        if agg.n_aggregates == a.n_rows() {
            stalled += 1;
            if stalled >= 2 {
                return Err(Error::CoarseningStagnated(a.n_rows()));
            }
        } else {
            stalled = 0;
        }
        let p = agg.prolongator();
        let coarse = rap(&p, a)?;
        prolongators.push(p);
        matrices.push(coarse);
    }
    matrices.reverse();
    prolongators.reverse();
    Hierarchy::from_parts(matrices, prolongators, smoother)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::assemble_poisson;

    #[test]
    fn ua_hierarchy_structure() {
        let (a, _) = assemble_poisson(5).unwrap();
        let h = build_ua_amg(
            &a,
            DEFAULT_THETA,
            DEFAULT_MIN_COARSE,
            DEFAULT_MAX_LEVELS,
            SmootherSpec::default(),
        )
        .unwrap();
        assert!(h.n_levels() >= 2);
        assert!(h.a(1).n_rows() <= DEFAULT_MIN_COARSE);
        assert_eq!(h.galerkin_defect().unwrap(), 0.0);
        for k in 2..=h.n_levels() {
            let p = h.p(k);
            for i in 0..p.n_rows() {
                assert_eq!(p.row(i).1, &[1.0]);
            }
        }
        assert!(h.summary().contains("operator_complexity"));
    }

    #[test]
    fn zero_row_sums_are_preserved() {
        // Graph Laplacian of a path plus a small diagonal shift on one end keeps
        // all but one row sum at zero; the pure Laplacian part must stay zero.
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            let deg = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            t.push((i, i, deg));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let agg = aggregate(&a, DEFAULT_THETA).unwrap();
        let coarse = rap(&agg.prolongator(), &a).unwrap();
        for i in 0..coarse.n_rows() {
            assert_eq!(coarse.row(i).1.iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn stagnation_is_reported() {
        let a = CsrMatrix::from_diagonal(&vec![1.0; 80]);
        assert!(matches!(
            build_ua_amg(&a, DEFAULT_THETA, 10, 20, SmootherSpec::default()),
            Err(Error::CoarseningStagnated(80))
        ));
    }

    #[test]
    fn sub_hierarchy_keeps_top_levels() {
        let h = build_geometric(GeometricProblem::Poisson, 4, SmootherSpec::default()).unwrap();
        let two = h.sub_hierarchy(3, 4).unwrap();
        assert_eq!(two.dims(), vec![49, 225]);
        assert!(two.level(2).p_to_finer.is_none());
        assert!(h.sub_hierarchy(0, 2).is_err());
    }
}
