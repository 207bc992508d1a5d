//! Nonlinear preconditioned CG and the nonlinear AMLI cycles.
//!
//! Notation used in the docs:
//!
//! - `B^[.]`: the AMLI cycle itself (symmetric or nonsymmetric), one
//!   smoothing sweep (or two) around a coarse correction.
//! - `B~[.]`: `n` steps of nonlinear PCG preconditioned by `B^[.]` on the
//!   same level. The coarse correction inside `B^_k` is `B~_{k-1}`.
//!
//! None of these operators is linear; they are deterministic functions of
//! their input.

use crate::cycles::{apply_linear, check_rhs, LinearCycleKind};
use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::linalg::vector::{axpy, dot, norm, sub};
use crate::linalg::CsrMatrix;

/// Relative residual below which nonlinear PCG stops early.
pub const PCG_EARLY_EXIT: f64 = 1e-14;
/// Relative energy below which a search direction counts as a breakdown.
pub const PCG_BREAKDOWN: f64 = 1e-30;

/// Which previous directions a new PCG direction is orthogonalised against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// All previous directions.
    Full,
    /// The `m + 1` most recent directions (`m = 0` keeps only the last one).
    Window(usize),
    /// None: preconditioned steepest descent.
    SteepestDescent,
}

impl Truncation {
    fn keep(&self, stored: usize) -> usize {
        match *self {
            Truncation::Full => stored,
            Truncation::Window(m) => stored.min(m + 1),
            Truncation::SteepestDescent => 0,
        }
    }
}

impl std::str::FromStr for Truncation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "sd" | "steepest-descent" => Ok(Self::SteepestDescent),
            m => m
                .parse::<usize>()
                .map(Self::Window)
                .map_err(|_| Error::InvalidParameter(format!("unknown truncation `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmliKind {
    /// Pre- and post-smoothing.
    Symmetric,
    /// Pre-smoothing only.
    Nonsymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleParams {
    /// Nonlinear PCG steps per coarse solve.
    pub n_inner: usize,
    pub truncation: Truncation,
    pub kind: AmliKind,
}

impl CycleParams {
    pub fn new(n_inner: usize) -> Self {
        Self {
            n_inner,
            truncation: Truncation::Full,
            kind: AmliKind::Symmetric,
        }
    }

    pub fn nonsymmetric(mut self) -> Self {
        self.kind = AmliKind::Nonsymmetric;
        self
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_inner == 0 {
            return Err(Error::InvalidParameter("n_inner must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PcgDirection {
    pub p: Vec<f64>,
    pub ap: Vec<f64>,
    /// `(A p, p)`.
    pub energy: f64,
}

/// Full record of one nonlinear PCG invocation.
#[derive(Debug, Clone)]
pub struct PcgState {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub directions: Vec<PcgDirection>,
    /// `r_0, r_1, ...` after each step.
    pub residuals: Vec<Vec<f64>>,
    /// Step lengths `alpha_i`.
    pub alphas: Vec<f64>,
}

/// `n` steps of nonlinear PCG for `A u = f` from `u_0 = 0`.
pub fn nonlinear_pcg<F>(a: &CsrMatrix, precond: F, f: &[f64], params: &CycleParams) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    Ok(pcg_run(a, precond, f, params, false)?.u)
}

/// As [`nonlinear_pcg`], also keeping every residual and direction.
pub fn nonlinear_pcg_traced<F>(a: &CsrMatrix, precond: F, f: &[f64], params: &CycleParams) -> Result<PcgState>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    pcg_run(a, precond, f, params, true)
}

fn pcg_run<F>(a: &CsrMatrix, mut precond: F, f: &[f64], params: &CycleParams, trace: bool) -> Result<PcgState>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    params.validate()?;
    if f.len() != a.n_rows() {
        return Err(Error::dims("nonlinear PCG", a.n_rows(), f.len()));
    }
    let n = f.len();
    let stop = PCG_EARLY_EXIT * norm(f);
    let mut u = vec![0.0; n];
    let mut r = f.to_vec();
    let mut directions: Vec<PcgDirection> = Vec::with_capacity(params.n_inner);
    let mut residuals = Vec::new();
    let mut alphas = Vec::new();
    if trace {
        residuals.push(r.clone());
    }

    for _ in 0..params.n_inner {
        if norm(&r) <= stop {
            break;
        }
        let z = precond(&r)?;
        if z.len() != n {
            return Err(Error::dims("preconditioner output", n, z.len()));
        }
        let mut p = z.clone();
        let keep = params.truncation.keep(directions.len());
        for d in &directions[directions.len() - keep..] {
            let beta = -dot(&z, &d.ap) / d.energy;
            axpy(beta, &d.p, &mut p);
        }
        let ap = a.mul_vec(&p);
        let energy = dot(&ap, &p);
        if !(energy > PCG_BREAKDOWN * dot(&p, &p)) {
            return Err(Error::PcgBreakdown);
        }
        let alpha = dot(&r, &p) / energy;
        axpy(alpha, &p, &mut u);
        axpy(-alpha, &ap, &mut r);
        if trace {
            residuals.push(r.clone());
            alphas.push(alpha);
        }
        if trace || params.truncation != Truncation::SteepestDescent {
            directions.push(PcgDirection { p, ap, energy });
        }
    }
    Ok(PcgState {
        u,
        r,
        directions,
        residuals,
        alphas,
    })
}

/// The scalar `(B^[f], f) / ||B^[f]||_A^2` of a single PCG step.
pub fn one_step_scalar(a: &CsrMatrix, bf: &[f64], f: &[f64]) -> f64 {
    dot(bf, f) / dot(&a.mul_vec(bf), bf)
}

/// `B^_k[f]`, the symmetric nonlinear AMLI cycle.
pub fn apply_amli(h: &Hierarchy, k: usize, f: &[f64], params: &CycleParams) -> Result<Vec<f64>> {
    check_rhs(h, k, f)?;
    params.validate()?;
    hat(h, k, f, params, AmliKind::Symmetric)
}

/// `B^ns_k[f]`, the nonsymmetric nonlinear AMLI cycle.
pub fn apply_amli_ns(h: &Hierarchy, k: usize, f: &[f64], params: &CycleParams) -> Result<Vec<f64>> {
    check_rhs(h, k, f)?;
    params.validate()?;
    hat(h, k, f, params, AmliKind::Nonsymmetric)
}

/// `B~_k[f]`: nonlinear PCG on level `k` preconditioned by `B^_k`.
pub fn apply_amli_tilde(h: &Hierarchy, k: usize, f: &[f64], params: &CycleParams) -> Result<Vec<f64>> {
    check_rhs(h, k, f)?;
    params.validate()?;
    tilde(h, k, f, params, AmliKind::Symmetric)
}

/// `B~ns_k[f]`: nonlinear PCG on level `k` preconditioned by `B^ns_k`.
pub fn apply_amli_ns_tilde(h: &Hierarchy, k: usize, f: &[f64], params: &CycleParams) -> Result<Vec<f64>> {
    check_rhs(h, k, f)?;
    params.validate()?;
    tilde(h, k, f, params, AmliKind::Nonsymmetric)
}

fn hat(h: &Hierarchy, k: usize, f: &[f64], params: &CycleParams, kind: AmliKind) -> Result<Vec<f64>> {
    if k == 1 {
        let mut u = f.to_vec();
        h.coarse_solver().solve_in_place(&mut u);
        return Ok(u);
    }
    let a = h.a(k);
    let p = h.p(k);
    let sm = h.smoother(k);
    let mut u = sm.apply(a, f);
    let g = p.mul_vec_transpose(&sub(f, &a.mul_vec(&u)));
    let e = tilde(h, k - 1, &g, params, kind)?;
    axpy(1.0, &p.mul_vec(&e), &mut u);
    if kind == AmliKind::Symmetric {
        let post = sm.apply_transpose(a, &sub(f, &a.mul_vec(&u)));
        axpy(1.0, &post, &mut u);
    }
    Ok(u)
}

fn tilde(h: &Hierarchy, k: usize, f: &[f64], params: &CycleParams, kind: AmliKind) -> Result<Vec<f64>> {
    nonlinear_pcg(h.a(k), |r| hat(h, k, r, params, kind), f, params)
}

/// An approximate inverse usable by [`stationary_solve`] and the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Linear(LinearCycleKind),
    /// `B^` (or `B^ns`) with the given parameters.
    Hat(CycleParams),
    /// `B~` (or `B~ns`) with the given parameters.
    Tilde(CycleParams),
}

impl Method {
    pub fn apply(&self, h: &Hierarchy, k: usize, f: &[f64]) -> Result<Vec<f64>> {
        match self {
            Method::Linear(kind) => apply_linear(h, *kind, k, f),
            Method::Hat(p) => match p.kind {
                AmliKind::Symmetric => apply_amli(h, k, f, p),
                AmliKind::Nonsymmetric => apply_amli_ns(h, k, f, p),
            },
            Method::Tilde(p) => match p.kind {
                AmliKind::Symmetric => apply_amli_tilde(h, k, f, p),
                AmliKind::Nonsymmetric => apply_amli_ns_tilde(h, k, f, p),
            },
        }
    }

    /// Column label in the style `B`, `B^ N-PCG(2)`, `B~ns N-PCG(1)`.
    pub fn label(&self) -> String {
        match self {
            Method::Linear(LinearCycleKind::V) => "B".into(),
            Method::Linear(LinearCycleKind::Backslash) => "Bns".into(),
            Method::Hat(p) | Method::Tilde(p) => {
                let head = if matches!(self, Method::Hat(_)) { "B^" } else { "B~" };
                let ns = if p.kind == AmliKind::Nonsymmetric { "ns" } else { "" };
                let trunc = match p.truncation {
                    Truncation::Full => String::new(),
                    Truncation::Window(m) => format!(" w{m}"),
                    Truncation::SteepestDescent => " sd".into(),
                };
                format!("{head}{ns} N-PCG({}){trunc}", p.n_inner)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TolKind {
    /// `||f - A u_i|| <= tol ||f - A u_0||`.
    RelResidual,
    /// `||u_i - u*||_A <= tol`.
    EnergyError,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub residual_history: Vec<f64>,
    pub energy_error_history: Option<Vec<f64>>,
    /// Ratio of the last two entries of the monitored history.
    pub measured_final_contraction: f64,
}

impl SolveReport {
    /// Whether the monitored history never increased.
    pub fn monotone(&self) -> bool {
        let h = self.energy_error_history.as_ref().unwrap_or(&self.residual_history);
        h.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Settings of [`stationary_solve`].
#[derive(Debug, Clone, Copy)]
pub struct StopCriterion {
    pub tol: f64,
    pub kind: TolKind,
    pub max_iter: usize,
}

/// Growth factor of the monitored quantity that flags divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Stationary iteration `u <- u + B[f - A u]`.
pub fn stationary_solve<F>(
    mut operator: F,
    a: &CsrMatrix,
    f: &[f64],
    u0: &[f64],
    stop: StopCriterion,
    u_exact: Option<&[f64]>,
) -> Result<SolveReport>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = a.n_rows();
    if f.len() != n {
        return Err(Error::dims("stationary solve rhs", n, f.len()));
    }
    if u0.len() != n {
        return Err(Error::dims("stationary solve initial guess", n, u0.len()));
    }
    if let Some(x) = u_exact {
        if x.len() != n {
            return Err(Error::dims("stationary solve exact solution", n, x.len()));
        }
    }
    if stop.kind == TolKind::EnergyError && u_exact.is_none() {
        return Err(Error::InvalidParameter(
            "energy-error stopping needs the exact solution".into(),
        ));
    }
    if !(stop.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            stop.tol
        )));
    }

    let energy_error = |u: &[f64]| {
        u_exact.map(|x| {
            let e = sub(u, x);
            dot(&a.mul_vec(&e), &e).max(0.0).sqrt()
        })
    };
    let mut u = u0.to_vec();
    let mut r = sub(f, &a.mul_vec(&u));
    let mut residual_history = vec![norm(&r)];
    let mut energy_history = energy_error(&u).map(|e| vec![e]);
    let r0 = residual_history[0];

    let monitored = |res: &[f64], en: &Option<Vec<f64>>| -> f64 {
        match stop.kind {
            TolKind::RelResidual => *res.last().unwrap(),
            TolKind::EnergyError => *en.as_ref().unwrap().last().unwrap(),
        }
    };
    let threshold = match stop.kind {
        TolKind::RelResidual => stop.tol * r0,
        TolKind::EnergyError => stop.tol,
    };
    let initial = monitored(&residual_history, &energy_history);

    let mut converged = monitored(&residual_history, &energy_history) <= threshold;
    let mut diverged = false;
    let mut iterations = 0;
    while !converged && iterations < stop.max_iter {
        let du = operator(&r)?;
        axpy(1.0, &du, &mut u);
        r = sub(f, &a.mul_vec(&u));
        iterations += 1;
        residual_history.push(norm(&r));
        if let (Some(h), Some(e)) = (energy_history.as_mut(), energy_error(&u)) {
            h.push(e);
        }
        let m = monitored(&residual_history, &energy_history);
        if !m.is_finite() || m > DIVERGENCE_FACTOR * initial {
            diverged = true;
            break;
        }
        converged = m <= threshold;
    }

    let hist = energy_history
        .as_ref()
        .filter(|_| stop.kind == TolKind::EnergyError)
        .unwrap_or(&residual_history);
    let measured_final_contraction = match hist.len() {
        0 | 1 => 0.0,
        l => hist[l - 1] / hist[l - 2],
    };
    Ok(SolveReport {
        iterations,
        converged,
        diverged,
        residual_history,
        energy_error_history: energy_history,
        measured_final_contraction,
    })
}

/// Smallest `n` with `n > 1 / (1 - delta_bar)`: enough nonlinear PCG steps for
/// uniform convergence when the two-grid factor is `delta_bar`.
pub fn required_n(delta_bar: f64) -> usize {
    assert!((0.0..1.0).contains(&delta_bar), "two-grid factor must lie in [0, 1)");
    (1.0 / (1.0 - delta_bar)).floor() as usize + 1
}
