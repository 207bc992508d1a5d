//! Numerical checks of the convergence theory.
//!
//! Every check draws its random vectors from [`crate::rng`] keyed by the
//! check name and level, so reports are reproducible for a given seed.
//! Constants estimated from samples are lower bounds for the true extremal
//! values; where a dense eigensolve is affordable its result is added as
//! one more candidate.

use std::fmt;

use nalgebra::DMatrix;

use crate::amli::{
    apply_amli, apply_amli_ns, apply_amli_ns_tilde, apply_amli_tilde, nonlinear_pcg, nonlinear_pcg_traced,
    one_step_scalar, CycleParams, Method, Truncation,
};
use crate::cycles::{apply_backslash, apply_v_cycle};
use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::linalg::vector::{axpy, dot, norm, rel_diff, sub};
use crate::linalg::{spectral_radius, CsrMatrix, DenseFactorization, DEFAULT_DENSE_LIMIT};
use crate::par::map_indices;
use crate::rng::normal_vector;
use crate::smoothers::measure_smoothing_constant;

pub const DEFAULT_SAMPLES: usize = 100;
/// Largest dimension for which dense eigen oracles are formed.
pub const DENSE_EIG_LIMIT: usize = 1100;

/// Outcome of one check. `passed` holds exactly when `measured <= tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub samples: usize,
    /// Named side quantities (estimated constants, ratios).
    pub values: Vec<(String, f64)>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, measured: f64, tolerance: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            samples,
            values: Vec::new(),
        }
    }

    pub fn with_value(mut self, key: impl Into<String>, value: f64) -> Self {
        self.values.push((key.into(), value));
        self
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }

    pub const CSV_HEADER: &'static str = "name,passed,measured,tolerance,samples";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{:e},{:e},{}",
            self.name, self.passed, self.measured, self.tolerance, self.samples
        )
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.3e} (tolerance {:.3e}, {} samples)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.samples
        )?;
        for (k, v) in &self.values {
            write!(f, " {k}={v:.6e}")?;
        }
        Ok(())
    }
}

fn energy(a: &CsrMatrix, v: &[f64]) -> f64 {
    dot(&a.mul_vec(v), v)
}

fn a_norm(a: &CsrMatrix, v: &[f64]) -> f64 {
    energy(a, v).max(0.0).sqrt()
}

fn sample(n: usize, seed: u64, label: &str, k: usize, i: usize) -> Vec<f64> {
    normal_vector(n, seed, &format!("{label}/k{k}"), i as u64)
}

fn check_two_levels(h: &Hierarchy, k: usize) -> Result<()> {
    h.check_level(k)?;
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "check needs a coarser level below k = {k}"
        )));
    }
    Ok(())
}

/// The `A`-orthogonal projection onto the range of the prolongator,
/// `P (P^t A P)^{-1} P^t A`, applied through a dense coarse factorization.
pub struct CoarseProjection<'a> {
    a: &'a CsrMatrix,
    p: &'a CsrMatrix,
    coarse: DenseFactorization,
}

impl<'a> CoarseProjection<'a> {
    pub fn new(h: &'a Hierarchy, k: usize) -> Result<Self> {
        check_two_levels(h, k)?;
        Ok(Self {
            a: h.a(k),
            p: h.p(k),
            coarse: DenseFactorization::with_limit(h.a(k - 1), DEFAULT_DENSE_LIMIT)?,
        })
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut y = self.p.mul_vec_transpose(&self.a.mul_vec(v));
        self.coarse.solve_in_place(&mut y);
        self.p.mul_vec(&y)
    }

    /// `(I - Pi) v`.
    pub fn complement(&self, v: &[f64]) -> Vec<f64> {
        sub(v, &self.apply(v))
    }
}

/// Dense matrix of a linear map on `R^n`, assembled column by column.
pub fn dense_operator<F>(n: usize, apply: F) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    let cols = map_indices(n, |j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        apply(&e)
    });
    DMatrix::from_fn(n, n, |i, j| cols[j][i])
}

fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest eigenvalue of the pencil `(x, y)` with `y` SPD; `None` if `y` is not.
pub fn generalized_max_eigenvalue(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Option<f64> {
    let l = y.clone().cholesky()?.l();
    let z = l.solve_lower_triangular(x)?;
    let w = l.solve_lower_triangular(&z.transpose())?;
    Some(symmetric_part(&w).symmetric_eigenvalues().max())
}

fn dense_inverse(a: &CsrMatrix) -> Result<DMatrix<f64>> {
    a.to_nalgebra()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::NotSpd("dense inverse".into()))
}

/// `ĉ1 = max rho(A_k) ||(I - Pi) v||_A^2 / ||A_k v||^2`.
///
/// `measured` is the worst relative size of `(I - Pi) P v_c` for coarse
/// functions, which must vanish, combined with the disagreement between the
/// sparse projection and the dense oracle.
pub fn check_approximation_constant(h: &Hierarchy, k: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let proj = CoarseProjection::new(h, k)?;
    let a = h.a(k);
    let n = a.n_rows();
    let rho = spectral_radius(a).value;
    let ratio = |v: &[f64]| {
        let av = a.mul_vec(v);
        rho * energy(a, &proj.complement(v)) / dot(&av, &av)
    };
    let sampled = map_indices(samples, |i| ratio(&sample(n, seed, "approximation", k, i)))
        .into_iter()
        .fold(0.0, f64::max);

    let nc = h.a(k - 1).n_rows();
    let mut violation: f64 = 0.0;
    for i in 0..samples.clamp(1, 10) {
        let vc = sample(nc, seed, "approximation-coarse", k, i);
        let v = h.p(k).mul_vec(&vc);
        violation = violation.max(a_norm(a, &proj.complement(&v)) / a_norm(a, &v));
    }

    let mut report_dense = None;
    if n <= DENSE_EIG_LIMIT {
        // ||(I - Pi) v||_A^2 = w^t (A^{-1} - P A_c^{-1} P^t) w with w = A v.
        let p = h.p(k).to_nalgebra();
        let m = dense_inverse(a)? - &p * dense_inverse(h.a(k - 1))? * p.transpose();
        let lmax = symmetric_part(&m).symmetric_eigenvalues().max();
        report_dense = Some(rho * lmax);
        let v = sample(n, seed, "approximation", k, 0);
        let w = nalgebra::DVector::from_vec(a.mul_vec(&v));
        let dense_energy = (w.transpose() * &m * &w)[(0, 0)];
        let sparse_energy = energy(a, &proj.complement(&v));
        violation = violation.max((dense_energy - sparse_energy).abs() / sparse_energy.abs().max(f64::MIN_POSITIVE));
    }
    let c1 = report_dense.map_or(sampled, |d| d.max(sampled));
    let mut report = CheckReport::new(format!("approximation_constant[k={k}]"), violation, 1e-10, samples)
        .with_value("c1", c1)
        .with_value("c1_sampled", sampled)
        .with_value("rho", rho);
    if let Some(d) = report_dense {
        report = report.with_value("c1_dense", d);
    }
    Ok(report)
}

/// `ĉ2 = rho(A) min (R~ v, v) / (v, v)` for the level-`k` smoother.
pub fn check_smoothing_constant(h: &Hierarchy, k: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    h.check_level(k)?;
    let sc = measure_smoothing_constant(h.a(k), h.smoother(k).spec(), samples, seed)?;
    Ok(
        CheckReport::new(format!("smoothing_constant[k={k}]"), (-sc.c2).max(0.0), 0.0, samples)
            .with_value("c2", sc.c2)
            .with_value("c2_sampled", sc.rho * sc.sampled_min)
            .with_value("rho", sc.rho),
    )
}

/// `η̂ = max ||(I - Pi) v̂||_A^2 / (||v||_A^2 - ||v̂||_A^2)`, `v̂ = (I - R A) v`.
///
/// Reports `eta` and `delta = eta / (1 + eta)`; `measured` is `delta`, which
/// must stay below one.
pub fn check_lemma_approx(h: &Hierarchy, k: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let proj = CoarseProjection::new(h, k)?;
    let a = h.a(k);
    let sm = h.smoother(k);
    let n = a.n_rows();
    let ratios = map_indices(samples, |i| -> Result<Option<f64>> {
        let v = sample(n, seed, "lemma-approx", k, i);
        let vh = sm.error_step(a, &v);
        let ev = energy(a, &v);
        let den = ev - energy(a, &vh);
        if den < -1e-12 * ev {
            return Err(Error::SmootherNotConvergent(format!(
                "||v||_A^2 - ||(I - R A) v||_A^2 = {den:e} < 0 at level {k}"
            )));
        }
        if den < 1e-14 * ev {
            return Ok(None);
        }
        Ok(Some(energy(a, &proj.complement(&vh)) / den))
    });
    let mut sampled: f64 = 0.0;
    let mut used = 0;
    for r in ratios {
        if let Some(r) = r? {
            sampled = sampled.max(r);
            used += 1;
        }
    }

    let mut dense = None;
    if n <= DENSE_EIG_LIMIT {
        let ad = a.to_nalgebra();
        let s = dense_operator(n, |v| sm.error_step(a, v));
        let p = h.p(k).to_nalgebra();
        let apa = &ad * &p * dense_inverse(h.a(k - 1))? * p.transpose() * &ad;
        let x = symmetric_part(&(s.transpose() * (&ad - apa) * &s));
        let y = symmetric_part(&(&ad - s.transpose() * &ad * &s));
        dense = generalized_max_eigenvalue(&x, &y);
    }
    let eta = dense.map_or(sampled, |d| d.max(sampled));
    let delta = eta / (1.0 + eta);
    let mut report = CheckReport::new(format!("lemma_approx[k={k}]"), delta, 1.0 - f64::EPSILON, used)
        .with_value("eta", eta)
        .with_value("eta_sampled", sampled)
        .with_value("delta", delta);
    if let Some(d) = dense {
        report = report.with_value("eta_dense", d);
    }
    Ok(report)
}

/// The four error/operator representations of the nonlinear AMLI cycles,
/// evaluated with dense smoother and transfer matrices on the right-hand side.
pub fn check_error_representation(
    h: &Hierarchy,
    k: usize,
    params: &CycleParams,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    check_two_levels(h, k)?;
    let a = h.a(k);
    let n = a.n_rows();
    if n > DENSE_EIG_LIMIT {
        return Err(Error::DenseLimitExceeded {
            dim: n,
            limit: DENSE_EIG_LIMIT,
        });
    }
    let sm = h.smoother(k);
    let ad = a.to_nalgebra();
    let r = dense_operator(n, |v| sm.apply(a, v));
    let rt = r.transpose();
    let id = DMatrix::<f64>::identity(n, n);
    let s = &id - &r * &ad;
    let st = &id - &rt * &ad;
    let s_res = &id - &ad * &r;
    let rbar = &r + &rt - &rt * &ad * &r;
    let p = h.p(k).to_nalgebra();
    let pt = p.transpose();

    let mat =
        |m: &DMatrix<f64>, v: &[f64]| -> Vec<f64> { (m * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec() };
    let mut worst: f64 = 0.0;
    let per_sample = map_indices(samples, |i| -> Result<f64> {
        let v = sample(n, seed, "error-representation", k, i);
        let av = a.mul_vec(&v);
        let vh = mat(&s, &v);
        let g = mat(&(&pt * &ad), &vh);
        let gr = mat(&(&pt * &s_res), &v);
        let mut err: f64 = 0.0;

        let tn = apply_amli_ns_tilde(h, k - 1, &g, params)?;
        let lhs = sub(&v, &apply_amli_ns(h, k, &av, params)?);
        let rhs = sub(&vh, &mat(&p, &tn));
        err = err.max(rel_diff(&lhs, &rhs));

        let tn = apply_amli_ns_tilde(h, k - 1, &gr, params)?;
        let lhs = apply_amli_ns(h, k, &v, params)?;
        let mut rhs = mat(&r, &v);
        axpy(1.0, &mat(&p, &tn), &mut rhs);
        err = err.max(rel_diff(&lhs, &rhs));

        let t = apply_amli_tilde(h, k - 1, &g, params)?;
        let lhs = sub(&v, &apply_amli(h, k, &av, params)?);
        let rhs = mat(&st, &sub(&vh, &mat(&p, &t)));
        err = err.max(rel_diff(&lhs, &rhs));

        let t = apply_amli_tilde(h, k - 1, &gr, params)?;
        let lhs = apply_amli(h, k, &v, params)?;
        let mut rhs = mat(&rbar, &v);
        axpy(1.0, &mat(&(&st * &p), &t), &mut rhs);
        err = err.max(rel_diff(&lhs, &rhs));
        Ok(err)
    });
    for e in per_sample {
        worst = worst.max(e?);
    }
    Ok(CheckReport::new(
        format!("error_representation[k={k}]"),
        worst,
        1e-12,
        samples,
    ))
}

/// `||E_TG||_A` of the symmetric two-grid method between levels `k - 1` and `k`.
pub fn check_two_grid_factor(h: &Hierarchy, k: usize) -> Result<f64> {
    check_two_levels(h, k)?;
    let a = h.a(k);
    let sm = h.smoother(k);
    two_grid_factor_with(a, h.p(k), |v| sm.apply(a, v), |v| sm.apply_transpose(a, v))
}

/// Two-grid factor for an arbitrary smoother given by `R` and `R^t`.
///
/// With `A = L L^t`, `L^t E L^{-t}` is symmetric and its largest absolute
/// eigenvalue is `||E||_A`.
pub fn two_grid_factor_with<R, Rt>(a: &CsrMatrix, p: &CsrMatrix, r: R, rt: Rt) -> Result<f64>
where
    R: Fn(&[f64]) -> Vec<f64> + Sync + Send,
    Rt: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    let n = a.n_rows();
    if n > DENSE_EIG_LIMIT {
        return Err(Error::DenseLimitExceeded {
            dim: n,
            limit: DENSE_EIG_LIMIT,
        });
    }
    let chol = DenseFactorization::with_limit(a, DENSE_EIG_LIMIT)?;
    let coarse = DenseFactorization::new(&crate::linalg::rap(p, a)?)?;
    let error = |v: &[f64]| {
        let mut x = v.to_vec();
        axpy(-1.0, &r(&a.mul_vec(&x)), &mut x);
        let mut y = p.mul_vec_transpose(&a.mul_vec(&x));
        coarse.solve_in_place(&mut y);
        axpy(-1.0, &p.mul_vec(&y), &mut x);
        axpy(-1.0, &rt(&a.mul_vec(&x)), &mut x);
        x
    };
    let m = dense_operator(n, |e| chol.mul_lower_transpose(&error(&chol.solve_lower_transpose(e))));
    let eig = symmetric_part(&m).symmetric_eigenvalues();
    Ok(eig.iter().fold(0.0, |acc: f64, &l| acc.max(l.abs())))
}

/// Report form of [`check_two_grid_factor`], including `required_n`.
pub fn two_grid_report(h: &Hierarchy, k: usize) -> Result<CheckReport> {
    let d = check_two_grid_factor(h, k)?;
    let mut r =
        CheckReport::new(format!("two_grid_factor[k={k}]"), d, 1.0 - f64::EPSILON, 0).with_value("delta_bar", d);
    if d < 1.0 {
        r = r.with_value("required_n", crate::amli::required_n(d) as f64);
    }
    Ok(r)
}

/// Per-level worst cases from [`check_comparison_suite`].
#[derive(Debug, Clone, Default)]
struct ComparisonStats {
    chain_slack: f64,
    identity_violation: f64,
    ns_slack: f64,
    strict_ratio_hat: f64,
    strict_ratio_tilde: f64,
}

/// Comparison inequalities between the nonlinear AMLI cycles and the linear
/// cycles on levels `2..=k_max`.
///
/// Per level it reports:
/// - `comparison_chain`: `0 <= (v - B~[Av], v)_A <= (v - B^[Av], v)_A <= (v - B Av, v)_A`,
///   asserted only with full PCG;
/// - `tilde_identity`: `||v - B~[Av]||_A^2 = (v - B~[Av], v)_A`, asserted only with full PCG;
/// - `ns_comparison`: `||v - B~ns[Av]||_A <= ||v - B^ns[Av]||_A <= ||v - Bns Av||_A`;
/// - `strict_improvement`: `||v - B^[Av]||_A / ||v - Bns Av||_A < 1` (and the same for `B~`).
pub fn check_comparison_suite(
    h: &Hierarchy,
    params: &CycleParams,
    samples: usize,
    seed: u64,
    k_max: usize,
) -> Result<Vec<CheckReport>> {
    params.validate()?;
    let full = params.truncation == Truncation::Full;
    let mut reports = Vec::new();
    for k in 2..=k_max.min(h.n_levels()) {
        let a = h.a(k);
        let n = a.n_rows();
        let stats = map_indices(samples, |i| -> Result<ComparisonStats> {
            let v = sample(n, seed, "comparison", k, i);
            let w = a.mul_vec(&v);
            let ev = energy(a, &v);
            let ip = |e: &[f64]| dot(&a.mul_vec(e), &v);
            let t = sub(&v, &apply_amli_tilde(h, k, &w, params)?);
            let hh = sub(&v, &apply_amli(h, k, &w, params)?);
            let lin = sub(&v, &apply_v_cycle(h, k, &w)?);
            let (ip_t, ip_h, ip_l) = (ip(&t), ip(&hh), ip(&lin));
            let chain = ip_t.min(ip_h - ip_t).min(ip_l - ip_h) / ev;
            let et = energy(a, &t);
            let identity = (et - ip_t).abs() / et.abs().max(ip_t.abs()).max(f64::MIN_POSITIVE);

            let tn = a_norm(a, &sub(&v, &apply_amli_ns_tilde(h, k, &w, params)?));
            let hn = a_norm(a, &sub(&v, &apply_amli_ns(h, k, &w, params)?));
            let ln = a_norm(a, &sub(&v, &apply_backslash(h, k, &w)?));
            let ns = (hn - tn).min(ln - hn) / ev.sqrt();
            Ok(ComparisonStats {
                chain_slack: chain,
                identity_violation: identity,
                ns_slack: ns,
                strict_ratio_hat: a_norm(a, &hh) / ln,
                strict_ratio_tilde: a_norm(a, &t) / ln,
            })
        });
        let mut worst = ComparisonStats {
            chain_slack: f64::INFINITY,
            ns_slack: f64::INFINITY,
            ..Default::default()
        };
        for s in stats {
            let s = s?;
            worst.chain_slack = worst.chain_slack.min(s.chain_slack);
            worst.identity_violation = worst.identity_violation.max(s.identity_violation);
            worst.ns_slack = worst.ns_slack.min(s.ns_slack);
            worst.strict_ratio_hat = worst.strict_ratio_hat.max(s.strict_ratio_hat);
            worst.strict_ratio_tilde = worst.strict_ratio_tilde.max(s.strict_ratio_tilde);
        }
        let asserted = |tol: f64| if full { tol } else { f64::INFINITY };
        reports.push(
            CheckReport::new(
                format!("comparison_chain[k={k}]"),
                (-worst.chain_slack).max(0.0),
                asserted(1e-12),
                samples,
            )
            .with_value("worst_slack", worst.chain_slack),
        );
        reports.push(CheckReport::new(
            format!("tilde_identity[k={k}]"),
            worst.identity_violation,
            asserted(1e-10),
            samples,
        ));
        reports.push(
            CheckReport::new(
                format!("ns_comparison[k={k}]"),
                (-worst.ns_slack).max(0.0),
                1e-12,
                samples,
            )
            .with_value("worst_slack", worst.ns_slack),
        );
        let ratio = worst.strict_ratio_hat.max(worst.strict_ratio_tilde);
        reports.push(
            CheckReport::new(format!("strict_improvement[k={k}]"), ratio, 1.0 - 1e-12, samples)
                .with_value("ratio_hat", worst.strict_ratio_hat)
                .with_value("ratio_tilde", worst.strict_ratio_tilde),
        );
    }
    Ok(reports)
}

#[derive(Debug, Clone, Copy, Default)]
struct PcgStats {
    directions: f64,
    residuals: f64,
    recurrence: f64,
    monotone: f64,
}

/// Orthogonality and monotonicity properties of one traced nonlinear PCG run
/// per sample: `steps` iterations at level `k` preconditioned by `B^_k`.
pub fn check_pcg_orthogonality(
    h: &Hierarchy,
    k: usize,
    params: &CycleParams,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    h.check_level(k)?;
    let a = h.a(k);
    let n = a.n_rows();
    let outer = CycleParams {
        n_inner: steps,
        ..*params
    };
    let fac = if n <= DEFAULT_DENSE_LIMIT {
        Some(DenseFactorization::new(a)?)
    } else {
        None
    };
    let stats = map_indices(samples, |i| -> Result<PcgStats> {
        let f = sample(n, seed, "pcg", k, i);
        let st = nonlinear_pcg_traced(a, |r| apply_amli(h, k, r, params), &f, &outer)?;
        let mut s = PcgStats::default();
        let d = &st.directions;
        for (i, di) in d.iter().enumerate() {
            for dj in &d[..i] {
                let c = dot(&di.ap, &dj.p).abs() / (di.energy * dj.energy).sqrt();
                s.directions = s.directions.max(c);
            }
        }
        let mut u = vec![0.0; n];
        let nf = norm(&f);
        for (i, r) in st.residuals.iter().enumerate().skip(1) {
            axpy(st.alphas[i - 1], &d[i - 1].p, &mut u);
            let nr = norm(r);
            for dj in &d[..i] {
                if nr > 0.0 {
                    s.residuals = s.residuals.max(dot(r, &dj.p).abs() / (nr * norm(&dj.p)));
                }
            }
            let exact = sub(&f, &a.mul_vec(&u));
            s.recurrence = s.recurrence.max(norm(&sub(r, &exact)) / nf);
        }
        if let Some(fac) = &fac {
            let inv_norm = |r: &[f64]| dot(&fac.solve(r).expect("dimension checked"), r).max(0.0).sqrt();
            let scale = inv_norm(&f);
            for w in st.residuals.windows(2) {
                s.monotone = s.monotone.max((inv_norm(&w[1]) - inv_norm(&w[0])) / scale);
            }
        }
        Ok(s)
    });
    let mut worst = PcgStats::default();
    for s in stats {
        let s = s?;
        worst.directions = worst.directions.max(s.directions);
        worst.residuals = worst.residuals.max(s.residuals);
        worst.recurrence = worst.recurrence.max(s.recurrence);
        worst.monotone = worst.monotone.max(s.monotone);
    }
    let full = params.truncation == Truncation::Full;
    let asserted = |tol: f64| if full { tol } else { f64::INFINITY };
    let mut out = vec![
        CheckReport::new(
            format!("pcg_direction_orthogonality[k={k}]"),
            worst.directions,
            asserted(1e-10),
            samples,
        ),
        CheckReport::new(
            format!("pcg_residual_orthogonality[k={k}]"),
            worst.residuals,
            asserted(1e-10),
            samples,
        ),
        CheckReport::new(
            format!("pcg_residual_recurrence[k={k}]"),
            worst.recurrence,
            1e-12,
            samples,
        ),
    ];
    if fac.is_some() {
        out.push(CheckReport::new(
            format!("pcg_monotone_residual[k={k}]"),
            worst.monotone.max(0.0),
            1e-12,
            samples,
        ));
    }
    Ok(out)
}

/// Nonlinear PCG rate against the preconditioner accuracy:
/// `||A^{-1} f - B~[f]||_A <= δ̂^n ||f||_{A^{-1}}` with
/// `δ̂ = max ||A^{-1} f - B^[f]||_A / ||f||_{A^{-1}}` over the same samples.
///
/// `measured` is the worst ratio of the left side to the bound on the pool;
/// the worst ratio on fresh samples is reported as `fresh_ratio`.
pub fn check_npcg_rate(
    h: &Hierarchy,
    k: usize,
    params: &CycleParams,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    h.check_level(k)?;
    let a = h.a(k);
    let n = a.n_rows();
    let fac = DenseFactorization::with_limit(a, DEFAULT_DENSE_LIMIT)?;
    let measure = |label: &str| -> Result<Vec<(f64, f64)>> {
        map_indices(samples, |i| -> Result<(f64, f64)> {
            let f = sample(n, seed, label, k, i);
            let x = fac.solve(&f)?;
            let fnorm = dot(&x, &f).sqrt();
            let hat = a_norm(a, &sub(&x, &apply_amli(h, k, &f, params)?)) / fnorm;
            let tilde = a_norm(a, &sub(&x, &apply_amli_tilde(h, k, &f, params)?)) / fnorm;
            Ok((hat, tilde))
        })
        .into_iter()
        .collect()
    };
    let pool = measure("npcg-rate")?;
    let fresh = measure("npcg-rate-fresh")?;
    let delta = pool.iter().map(|p| p.0).fold(0.0, f64::max);
    let bound = delta.powi(params.n_inner as i32);
    let ratio = |set: &[(f64, f64)]| {
        set.iter()
            .map(|&(_, t)| {
                if bound > 0.0 {
                    t / bound
                } else if t == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    };
    Ok(
        CheckReport::new(format!("npcg_rate[k={k}]"), ratio(&pool), 1.0 + 1e-8, samples)
            .with_value("delta_hat", delta)
            .with_value("fresh_ratio", ratio(&fresh)),
    )
}

/// `max ||v - B~[Av]||_A^2 / ||v||_A^2` over random `v` at level `k`.
pub fn contraction_estimate(h: &Hierarchy, k: usize, params: &CycleParams, samples: usize, seed: u64) -> Result<f64> {
    h.check_level(k)?;
    let a = h.a(k);
    let n = a.n_rows();
    let r = map_indices(samples, |i| -> Result<f64> {
        let v = sample(n, seed, "contraction", k, i);
        let e = sub(&v, &apply_amli_tilde(h, k, &a.mul_vec(&v), params)?);
        Ok(energy(a, &e) / energy(a, &v))
    });
    r.into_iter().try_fold(0.0, |acc: f64, x| Ok(acc.max(x?)))
}

/// Whether a per-level sequence of estimates stays below one and never rises
/// by more than `slack` from one level to the next.
pub fn check_uniform_contraction(name: &str, estimates: &[(usize, f64)], slack: f64, samples: usize) -> CheckReport {
    let mut rise: f64 = 0.0;
    for w in estimates.windows(2) {
        rise = rise.max(w[1].1 - w[0].1);
    }
    let top = estimates.iter().map(|e| e.1).fold(0.0, f64::max);
    let mut r = CheckReport::new(
        name,
        rise.max(if top < 1.0 { 0.0 } else { f64::INFINITY }),
        slack,
        samples,
    );
    for &(k, d) in estimates {
        r = r.with_value(format!("k{k}"), d);
    }
    r
}

/// One nonlinear PCG step equals `alpha B^[f]` with `alpha = (B^[f], f) / ||B^[f]||_A^2`,
/// and `alpha` is the energy-optimal step length along `B^[f]`.
///
/// The optimal step `(A z, A^{-1} f) / (A z, z)` is formed from a dense solve,
/// independently of the PCG code path; it is skipped above the dense limit.
pub fn check_one_step_scalar(
    h: &Hierarchy,
    k: usize,
    params: &CycleParams,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    h.check_level(k)?;
    let a = h.a(k);
    let n = a.n_rows();
    let one = CycleParams { n_inner: 1, ..*params };
    let fac = if n <= DEFAULT_DENSE_LIMIT {
        Some(DenseFactorization::new(a)?)
    } else {
        None
    };
    let errs = map_indices(samples, |i| -> Result<(f64, f64)> {
        let f = sample(n, seed, "one-step", k, i);
        let z = apply_amli(h, k, &f, params)?;
        let alpha = one_step_scalar(a, &z, &f);
        let step = nonlinear_pcg(a, |r| apply_amli(h, k, r, params), &f, &one)?;
        let closed = rel_diff(&step, &z.iter().map(|x| alpha * x).collect::<Vec<_>>());
        let optimal = match &fac {
            Some(fac) => {
                let x = fac.solve(&f)?;
                let az = a.mul_vec(&z);
                let best = dot(&az, &x) / dot(&az, &z);
                (alpha - best).abs() / alpha.abs()
            }
            None => 0.0,
        };
        Ok((closed, optimal))
    });
    let (mut closed, mut optimal) = (0.0f64, 0.0f64);
    for e in errs {
        let (c, o) = e?;
        closed = closed.max(c);
        optimal = optimal.max(o);
    }
    Ok(
        CheckReport::new(format!("one_step_scalar[k={k}]"), closed.max(optimal), 1e-13, samples)
            .with_value("closed_form", closed)
            .with_value("optimal_step", optimal),
    )
}

/// Named groups of checks run by [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Constants,
    Representation,
    TwoGrid,
    Comparison,
    Pcg,
    Uniform,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "all" => Suite::All,
            "constants" => Suite::Constants,
            "representation" => Suite::Representation,
            "two-grid" | "two_grid" => Suite::TwoGrid,
            "comparison" => Suite::Comparison,
            "pcg" => Suite::Pcg,
            "uniform" => Suite::Uniform,
            other => return Err(Error::InvalidParameter(format!("unknown suite '{other}'"))),
        })
    }
}

/// Run a suite on the Poisson (and, for comparisons and constants, the jump)
/// hierarchy over `levels` (each at least 2). Reports are prefixed with the
/// problem name.
pub fn run_suite(suite: Suite, levels: &[usize], samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    use crate::hierarchy::{build_geometric, GeometricProblem};
    use crate::problems::DEFAULT_LOW_COEFFICIENT;
    use crate::smoothers::SmootherSpec;

    let k_max = *levels
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("empty level list".into()))?;
    if let Some(&k) = levels.iter().find(|&&k| k < 2) {
        return Err(Error::LevelOutOfRange { level: k, max: k_max });
    }
    let hierarchies = [
        (
            "poisson",
            build_geometric(GeometricProblem::Poisson, k_max, SmootherSpec::default())?,
        ),
        (
            "jump",
            build_geometric(
                GeometricProblem::Jump {
                    low: DEFAULT_LOW_COEFFICIENT,
                },
                k_max,
                SmootherSpec::default(),
            )?,
        ),
    ];
    let want = |s: Suite| suite == Suite::All || suite == s;
    let mut out = Vec::new();
    let mut push = |problem: &str, r: CheckReport| {
        out.push(CheckReport {
            name: format!("{problem}/{}", r.name),
            ..r
        })
    };
    let dense_ok = |h: &Hierarchy, k: usize| h.a(k).n_rows() <= DENSE_EIG_LIMIT;
    for (name, h) in &hierarchies {
        let poisson = *name == "poisson";
        for &k in levels {
            let at = |e: Error| e.at(format!("{name} k={k}"));
            if want(Suite::Constants) {
                push(name, check_approximation_constant(h, k, samples, seed).map_err(at)?);
                push(name, check_smoothing_constant(h, k, samples, seed).map_err(at)?);
                if poisson {
                    push(name, check_lemma_approx(h, k, samples, seed).map_err(at)?);
                }
            }
            if want(Suite::Representation) && poisson && dense_ok(h, k) {
                for n in 1..=2 {
                    let r = check_error_representation(h, k, &CycleParams::new(n), samples, seed).map_err(at)?;
                    push(
                        name,
                        CheckReport {
                            name: format!("{}[n={n}]", r.name),
                            ..r
                        },
                    );
                }
            }
            if want(Suite::TwoGrid) && poisson && dense_ok(h, k) {
                push(name, two_grid_report(h, k).map_err(at)?);
            }
            if want(Suite::Pcg) && poisson {
                let p = CycleParams::new(2);
                for r in check_pcg_orthogonality(h, k, &p, 4, samples, seed).map_err(at)? {
                    push(name, r);
                }
                push(name, check_one_step_scalar(h, k, &p, samples, seed).map_err(at)?);
                if h.a(k).n_rows() <= DEFAULT_DENSE_LIMIT {
                    for n in 1..=2 {
                        let r = check_npcg_rate(h, k, &CycleParams::new(n), samples, seed).map_err(at)?;
                        push(
                            name,
                            CheckReport {
                                name: format!("{}[n={n}]", r.name),
                                ..r
                            },
                        );
                    }
                }
            }
        }
        if want(Suite::Comparison) {
            let variants = [
                CycleParams::new(1),
                CycleParams::new(2),
                CycleParams::new(2).with_truncation(Truncation::Window(0)),
                CycleParams::new(2).with_truncation(Truncation::SteepestDescent),
            ];
            for p in variants {
                let tag = Method::Tilde(p).label();
                for r in
                    check_comparison_suite(h, &p, samples, seed, k_max).map_err(|e| e.at(format!("{name} {tag}")))?
                {
                    push(
                        name,
                        CheckReport {
                            name: format!("{}[{tag}]", r.name),
                            ..r
                        },
                    );
                }
            }
        }
        if want(Suite::Uniform) && poisson {
            let p = CycleParams::new(2);
            let est = levels
                .iter()
                .map(|&k| Ok((k, contraction_estimate(h, k, &p, samples, seed)?)))
                .collect::<Result<Vec<_>>>()?;
            push(
                name,
                check_uniform_contraction("uniform_contraction", &est, 0.05, samples),
            );
        }
    }
    Ok(out)
}
