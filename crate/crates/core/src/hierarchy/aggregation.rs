//! Greedy strength-based aggregation for unsmoothed-aggregation AMG.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

pub const DEFAULT_THETA: f64 = 0.08;

const UNASSIGNED: usize = usize::MAX;

/// A partition of the unknowns into non-empty, disjoint aggregates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregation {
    /// `assignment[i]` is the aggregate of node `i`.
    pub assignment: Vec<usize>,
    pub n_aggregates: usize,
}

impl Aggregation {
    /// Sizes of every aggregate.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_aggregates];
        for &g in &self.assignment {
            s[g] += 1;
        }
        s
    }

    /// Piecewise-constant prolongator: `P[i, g] = 1` iff node `i` is in aggregate `g`.
    pub fn prolongator(&self) -> CsrMatrix {
        let n = self.assignment.len();
        CsrMatrix::new(
            n,
            self.n_aggregates,
            (0..=n).collect(),
            self.assignment.clone(),
            vec![1.0; n],
        )
        .expect("aggregation is a valid partition")
    }

    /// Check the partition invariants.
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.assignment.iter().position(|&g| g >= self.n_aggregates) {
            return Err(Error::InvalidStructure(format!("node {i} is unassigned")));
        }
        if let Some(g) = self.sizes().iter().position(|&s| s == 0) {
            return Err(Error::EmptyAggregate(g));
        }
        Ok(())
    }
}

/// Strong neighbourhood test `|a_ij| >= theta * sqrt(a_ii a_jj)`.
fn strong_neighbors<'a>(
    a: &'a CsrMatrix,
    diag: &'a [f64],
    theta: f64,
    i: usize,
) -> impl Iterator<Item = (usize, f64)> + 'a {
    let (cols, vals) = a.row(i);
    let di = diag[i];
    cols.iter()
        .zip(vals)
        .filter(move |(&j, &v)| j != i && v != 0.0 && v.abs() >= theta * (di * diag[j]).sqrt())
        .map(|(&j, &v)| (j, v.abs()))
}

/// Three-phase greedy aggregation in row order.
///
/// 1. A node whose whole strong neighbourhood is unaggregated seeds a new
///    aggregate containing that neighbourhood.
/// 2. Each remaining node joins the phase-1 aggregate it is most strongly
///    coupled to.
/// 3. Anything still left becomes a singleton.
pub fn aggregate(a: &CsrMatrix, theta: f64) -> Result<Aggregation> {
    if !a.is_square() {
        return Err(Error::dims("aggregate", a.n_rows(), a.n_cols()));
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "strength threshold must lie in [0, 1), got {theta}"
        )));
    }
    let n = a.n_rows();
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::BadDiagonal(i));
    }

    let mut assignment = vec![UNASSIGNED; n];
    let mut n_aggregates = 0;

    for i in 0..n {
        if assignment[i] != UNASSIGNED {
            continue;
        }
        let mut has_strong = false;
        let mut free = true;
        for (j, _) in strong_neighbors(a, &diag, theta, i) {
            has_strong = true;
            if assignment[j] != UNASSIGNED {
                free = false;
                break;
            }
        }
        if has_strong && free {
            assignment[i] = n_aggregates;
            for (j, _) in strong_neighbors(a, &diag, theta, i) {
                assignment[j] = n_aggregates;
            }
            n_aggregates += 1;
        }
    }

    let phase1 = assignment.clone();
    for i in 0..n {
        if assignment[i] != UNASSIGNED {
            continue;
        }
        let best = strong_neighbors(a, &diag, theta, i)
            .filter(|&(j, _)| phase1[j] != UNASSIGNED)
            .fold(None::<(usize, f64)>, |best, (j, w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((j, w)),
            });
        if let Some((j, _)) = best {
            assignment[i] = phase1[j];
        }
    }

    for g in assignment.iter_mut() {
        if *g == UNASSIGNED {
            *g = n_aggregates;
            n_aggregates += 1;
        }
    }

    let agg = Aggregation {
        assignment,
        n_aggregates,
    };
    debug_assert!(agg.validate().is_ok());
    Ok(agg)
}
