//! The regularized inverse problem on pairwise solution differences.
//!
//! For `n` solutions the `N = n(n-1)/2` pairwise differences at one vectorized
//! element `m` satisfy `D du = f`, where every row of `D` holds a single `+1`
//! and a single `-1`. `D` annihilates the constant vector, so the errors are
//! only determined up to a common shift. The estimate minimizes
//!
//! ```text
//! eps_m(du) = 1/2 |D du - f|^2 + alpha/2 |du|^2
//! ```
//!
//! either by plain gradient descent or by a direct solve of
//! `(D^T D + alpha I) du = D^T f`. For consistent data `f = D e` the minimizer
//! is `n/(n+alpha) (e - mean(e))`, i.e. the true errors shifted by minus their
//! mean and slightly shrunk.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSet, Grid2D, SolutionEnsemble, VarTag};
use crate::metrics;

/// Default regularization parameter.
pub const DEFAULT_ALPHA: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct DifferenceSystem {
    n: usize,
    pairs: Vec<(usize, usize)>,
    matrix: DMatrix<f64>,
}

impl DifferenceSystem {
    /// Rows are ordered `(0,1), (0,2), ..., (0,n-1), (1,2), ...`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Underdetermined(n));
        }
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect();
        let mut matrix = DMatrix::zeros(pairs.len(), n);
        for (row, &(j, k)) in pairs.iter().enumerate() {
            matrix[(row, j)] = 1.0;
            matrix[(row, k)] = -1.0;
        }
        Ok(Self { n, pairs, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of pair relations `N`.
    pub fn rows(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, row: usize) -> (usize, usize) {
        self.pairs[row]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `D du`.
    pub fn apply(&self, du: &[f64]) -> Vec<f64> {
        self.pairs.iter().map(|&(j, k)| du[j] - du[k]).collect()
    }

    /// `D^T r`.
    pub fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&(j, k), &ri) in self.pairs.iter().zip(r) {
            out[j] += ri;
            out[k] -= ri;
        }
        out
    }

    /// Right-hand side from the solution values at one element.
    pub fn rhs_from_values(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values.len(), self.n)?;
        Ok(self.apply(values))
    }

    pub fn assemble_rhs(&self, ensemble: &SolutionEnsemble, m: usize) -> Result<PointRhs> {
        if ensemble.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: ensemble.n() });
        }
        if m >= ensemble.m() {
            return Err(Error::IndexOutOfRange { index: m, len: ensemble.m() });
        }
        Ok(PointRhs { m, f: self.apply(&ensemble.column(m)) })
    }

    fn check_len(&self, actual: usize, expected: usize) -> Result<()> {
        if actual != expected {
            return Err(Error::DimensionMismatch { expected, actual });
        }
        Ok(())
    }
}

/// Right-hand side of the difference system at flat index `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointRhs {
    pub m: usize,
    pub f: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    Zero,
    Constant(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Gradient,
    ClosedForm,
}

impl SolverKind {
    pub fn tag(self) -> &'static str {
        match self {
            SolverKind::Gradient => "gradient",
            SolverKind::ClosedForm => "closed_form",
        }
    }
}

/// Inverse-problem settings. `tau` and `grad_tol` default to values that
/// depend on `n` and the data when left unset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IpConfig {
    pub alpha: f64,
    /// Gradient step; `1/(n + alpha)` when unset.
    pub tau: Option<f64>,
    pub max_iters: usize,
    /// Stop once the gradient norm drops below this; `1e-10 (1 + |f|)` when unset.
    pub grad_tol: Option<f64>,
    pub init: InitialGuess,
}

impl Default for IpConfig {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA, tau: None, max_iters: 10_000, grad_tol: None, init: InitialGuess::Zero }
    }
}

impl IpConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::Config(format!("tau must be positive, got {tau}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if let Some(tol) = self.grad_tol {
            if !(tol > 0.0) {
                return Err(Error::Config(format!("grad_tol must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    pub fn step_for(&self, n: usize) -> f64 {
        self.tau.unwrap_or(1.0 / (n as f64 + self.alpha))
    }

    pub fn tolerance_for(&self, f: &[f64]) -> f64 {
        self.grad_tol.unwrap_or_else(|| 1e-10 * (1.0 + norm(f)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    /// Functional value at the returned estimate.
    pub functional: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
}

/// `1/2 |D du - f|^2 + alpha/2 |du|^2`.
pub fn functional_value(sys: &DifferenceSystem, f: &[f64], du: &[f64], alpha: f64) -> f64 {
    let residual: f64 = sys.apply(du).iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum();
    0.5 * residual + 0.5 * alpha * du.iter().map(|v| v * v).sum::<f64>()
}

/// `D^T (D du - f) + alpha du`.
pub fn functional_gradient(sys: &DifferenceSystem, f: &[f64], du: &[f64], alpha: f64) -> Vec<f64> {
    let r: Vec<f64> = sys.apply(du).iter().zip(f).map(|(a, b)| a - b).collect();
    let mut g = sys.apply_transpose(&r);
    for (gi, ui) in g.iter_mut().zip(du) {
        *gi += alpha * ui;
    }
    g
}

/// Gradient descent `du <- du - tau grad`. Running out of iterations is
/// reported in the diagnostics, not as an error.
pub fn solve_point_gradient(
    sys: &DifferenceSystem,
    f: &[f64],
    cfg: &IpConfig,
) -> Result<(Vec<f64>, PointDiagnostics)> {
    cfg.validate()?;
    sys.check_len(f.len(), sys.rows())?;
    let tau = cfg.step_for(sys.n());
    let tol = cfg.tolerance_for(f);
    let mut du = match cfg.init {
        InitialGuess::Zero => vec![0.0; sys.n()],
        InitialGuess::Constant(c) => vec![c; sys.n()],
    };
    let mut grad = functional_gradient(sys, f, &du, cfg.alpha);
    let mut grad_norm = norm(&grad);
    let mut iterations = 0;
    while grad_norm > tol && iterations < cfg.max_iters {
        for (u, g) in du.iter_mut().zip(&grad) {
            *u -= tau * g;
        }
        iterations += 1;
        grad = functional_gradient(sys, f, &du, cfg.alpha);
        grad_norm = norm(&grad);
        if !grad_norm.is_finite() {
            break;
        }
    }
    let diag = PointDiagnostics {
        functional: functional_value(sys, f, &du, cfg.alpha),
        iterations,
        converged: grad_norm <= tol,
        grad_norm,
    };
    Ok((du, diag))
}

/// Factorization of `D^T D + alpha I`, reusable across points.
pub struct ClosedFormSolver<'a> {
    sys: &'a DifferenceSystem,
    alpha: f64,
    factor: Cholesky<f64, Dyn>,
}

impl<'a> ClosedFormSolver<'a> {
    pub fn new(sys: &'a DifferenceSystem, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("closed-form solve needs alpha > 0, got {alpha}")));
        }
        let d = sys.matrix();
        let mut normal = d.transpose() * d;
        for i in 0..sys.n() {
            normal[(i, i)] += alpha;
        }
        let factor = Cholesky::new(normal)
            .ok_or_else(|| Error::Degenerate("normal matrix is not positive definite".into()))?;
        Ok(Self { sys, alpha, factor })
    }

    /// The exact minimizer is orthogonal to the constant vector for every `f`
    /// (`D 1 = 0`), so the rounding-level constant component of both the
    /// right-hand side and the solution is removed; otherwise it would be
    /// amplified by `1/alpha`.
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.sys.check_len(f.len(), self.sys.rows())?;
        let rhs = DVector::from_vec(centered(self.sys.apply_transpose(f)));
        Ok(centered(self.factor.solve(&rhs).iter().copied().collect()))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Exact minimizer: solves `(D^T D + alpha I) du = D^T f`.
pub fn solve_point_closed_form(sys: &DifferenceSystem, f: &[f64], alpha: f64) -> Result<Vec<f64>> {
    ClosedFormSolver::new(sys, alpha)?.solve(f)
}

/// Minimum-norm solution for known true errors `e`: returns `(e - mean(e), -mean(e))`.
pub fn normal_solution_oracle(e: &[f64]) -> (Vec<f64>, f64) {
    if e.is_empty() {
        return (Vec::new(), 0.0);
    }
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    (e.iter().map(|v| v - mean).collect(), -mean)
}

/// Per-solution, per-element error estimates.
#[derive(Clone, Debug)]
pub struct ErrorEstimate {
    pub grid: Grid2D,
    pub vars: Vec<VarTag>,
    pub labels: Vec<String>,
    /// `estimates[j][m]` is the estimated error of solution `j` at element `m`.
    pub estimates: Vec<Vec<f64>>,
    pub alpha: f64,
    pub solver: SolverKind,
    pub diagnostics: Vec<PointDiagnostics>,
}

impl ErrorEstimate {
    pub fn estimate(&self, j: usize) -> &[f64] {
        &self.estimates[j]
    }

    pub fn estimate_for(&self, label: &str) -> Option<&[f64]> {
        self.labels.iter().position(|l| l == label).map(|j| self.estimates[j].as_slice())
    }

    pub fn nonconverged_points(&self) -> usize {
        self.diagnostics.iter().filter(|d| !d.converged).count()
    }

    /// One container per solution, variables tagged `err:<var>`.
    pub fn to_field_sets(&self) -> Result<Vec<FieldSet>> {
        let vars: Vec<VarTag> = self.vars.iter().map(|v| v.as_error()).collect();
        self.labels
            .iter()
            .zip(&self.estimates)
            .map(|(label, est)| FieldSet::devectorize(est, self.grid, &vars, label.clone()))
            .collect()
    }
}

/// Solves the point problem independently at every vectorized element.
pub fn solve_field(
    ensemble: &SolutionEnsemble,
    cfg: &IpConfig,
    solver: SolverKind,
) -> Result<ErrorEstimate> {
    cfg.validate()?;
    let sys = DifferenceSystem::new(ensemble.n())?;
    let closed = match solver {
        SolverKind::ClosedForm => Some(ClosedFormSolver::new(&sys, cfg.alpha)?),
        SolverKind::Gradient => None,
    };
    let m_len = ensemble.m();
    let mut estimates = vec![Vec::with_capacity(m_len); ensemble.n()];
    let mut diagnostics = Vec::with_capacity(m_len);
    for m in 0..m_len {
        let rhs = sys.assemble_rhs(ensemble, m)?;
        let (du, diag) = match &closed {
            Some(cf) => {
                let du = cf.solve(&rhs.f)?;
                let grad_norm = norm(&functional_gradient(&sys, &rhs.f, &du, cfg.alpha));
                let diag = PointDiagnostics {
                    functional: functional_value(&sys, &rhs.f, &du, cfg.alpha),
                    iterations: 0,
                    converged: true,
                    grad_norm,
                };
                (du, diag)
            }
            None => solve_point_gradient(&sys, &rhs.f, cfg)?,
        };
        for (col, v) in estimates.iter_mut().zip(du) {
            col.push(v);
        }
        diagnostics.push(diag);
    }
    Ok(ErrorEstimate {
        grid: *ensemble.grid(),
        vars: ensemble.vars().to_vec(),
        labels: ensemble.labels().to_vec(),
        estimates,
        alpha: cfg.alpha,
        solver,
        diagnostics,
    })
}

/// One row of a regularization sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub alpha: f64,
    pub estimate: Vec<f64>,
    pub functional: f64,
    /// `sum_j |du_j| / n`.
    pub mean_abs: f64,
    /// Averaged effectivity index, when true errors are known.
    pub effectivity: Option<f64>,
    /// Mean offset of the estimate from the true errors, when known.
    pub shift: Option<f64>,
}

/// Solves the point problem for every `alpha` (ascending, positive).
pub fn alpha_sweep(
    sys: &DifferenceSystem,
    f: &[f64],
    alphas: &[f64],
    cfg: &IpConfig,
    solver: SolverKind,
    truth: Option<&[f64]>,
) -> Result<Vec<SweepRecord>> {
    check_alphas(alphas)?;
    if let Some(t) = truth {
        sys.check_len(t.len(), sys.n())?;
    }
    alphas
        .iter()
        .map(|&alpha| {
            let cfg = IpConfig { alpha, ..*cfg };
            let du = match solver {
                SolverKind::ClosedForm => solve_point_closed_form(sys, f, alpha)?,
                SolverKind::Gradient => solve_point_gradient(sys, f, &cfg)?.0,
            };
            let n = du.len() as f64;
            let effectivity = truth.map(|t| metrics::averaged_effectivity(&[&du[..]], &[t])).transpose()?;
            let shift = truth.map(|t| du.iter().zip(t).map(|(a, b)| a - b).sum::<f64>() / n);
            Ok(SweepRecord {
                alpha,
                functional: functional_value(sys, f, &du, alpha),
                mean_abs: du.iter().map(|v| v.abs()).sum::<f64>() / n,
                effectivity,
                shift,
                estimate: du,
            })
        })
        .collect()
}

/// Field-level sweep: functional summed over elements, `mean_abs` averaged
/// over all entries, effectivity pooled over solutions and elements.
pub fn alpha_sweep_ensemble(
    ensemble: &SolutionEnsemble,
    alphas: &[f64],
    cfg: &IpConfig,
    solver: SolverKind,
    truth: Option<&[Vec<f64>]>,
) -> Result<Vec<SweepRecord>> {
    check_alphas(alphas)?;
    alphas
        .iter()
        .map(|&alpha| {
            let est = solve_field(ensemble, &IpConfig { alpha, ..*cfg }, solver)?;
            let functional = est.diagnostics.iter().map(|d| d.functional).sum();
            let count = (est.estimates.len() * ensemble.m()) as f64;
            let mean_abs = est.estimates.iter().flatten().map(|v| v.abs()).sum::<f64>() / count;
            let effectivity = truth
                .map(|t| {
                    let e: Vec<&[f64]> = est.estimates.iter().map(Vec::as_slice).collect();
                    let t: Vec<&[f64]> = t.iter().map(Vec::as_slice).collect();
                    metrics::averaged_effectivity(&e, &t)
                })
                .transpose()?;
            Ok(SweepRecord { alpha, estimate: Vec::new(), functional, mean_abs, effectivity, shift: None })
        })
        .collect()
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::Config("sweep alphas must be positive".into()));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("sweep alphas must be strictly ascending".into()));
    }
    Ok(())
}

/// Writes a sweep as CSV: `alpha,eps,mean_abs_error,I_eff`, followed by the
/// shift and the per-solution estimates when available.
pub fn write_sweep_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<()> {
    let n = records.first().map_or(0, |r| r.estimate.len());
    write!(w, "alpha,eps,mean_abs_error,I_eff,shift")?;
    for j in 1..=n {
        write!(w, ",du_{j}")?;
    }
    writeln!(w)?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:e}"));
    for r in records {
        write!(
            w,
            "{:e},{:e},{:e},{},{}",
            r.alpha,
            r.functional,
            r.mean_abs,
            opt(r.effectivity),
            opt(r.shift)
        )?;
        for v in &r.estimate {
            write!(w, ",{v:e}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// `n` logarithmically spaced values from `10^lo` to `10^hi`, endpoints included.
pub fn log_alphas(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo_exp)],
        _ => (0..count)
            .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

fn centered(mut v: Vec<f64>) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in &mut v {
        *x -= mean;
    }
    v
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Quantity;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const E5: [f64; 3] = [1.0, -2.0, 3.0];

    #[test]
    fn three_solution_matrix_matches_textbook_layout() {
        let sys = DifferenceSystem::new(3).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, -1.0]);
        assert_eq!(sys.matrix(), &expected);
    }

    #[test]
    fn row_counts() {
        assert_eq!(DifferenceSystem::new(5).unwrap().rows(), 10);
        assert_eq!(DifferenceSystem::new(13).unwrap().rows(), 78);
        assert!(matches!(DifferenceSystem::new(2), Err(Error::Underdetermined(2))));
    }

    #[test]
    fn gram_matrix_by_direct_multiplication() {
        for n in [3, 4, 13] {
            let sys = DifferenceSystem::new(n).unwrap();
            let d = sys.matrix();
            // explicit triple loop rather than nalgebra's product
            for a in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for r in 0..sys.rows() {
                        s += d[(r, a)] * d[(r, b)];
                    }
                    let expected = if a == b { n as f64 - 1.0 } else { -1.0 };
                    assert_eq!(s, expected);
                }
            }
        }
    }

    #[test]
    fn rows_hold_one_plus_and_one_minus() {
        let sys = DifferenceSystem::new(6).unwrap();
        for r in 0..sys.rows() {
            let row: Vec<f64> = sys.matrix().row(r).iter().copied().collect();
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v == -1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v == 0.0).count(), 4);
            let (j, k) = sys.pair(r);
            assert!(j < k && row[j] == 1.0 && row[k] == -1.0);
        }
        assert!(sys.apply(&[2.5; 6]).iter().all(|&v| v == 0.0));
        assert_eq!(sys.matrix().rank(1e-10), 5);
    }

    #[test]
    fn rhs_for_scalar_example() {
        let sys = DifferenceSystem::new(3).unwrap();
        assert_eq!(sys.rhs_from_values(&E5).unwrap(), vec![3.0, -2.0, -5.0]);
        assert_eq!(sys.rhs_from_values(&[4.0; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn assemble_rhs_from_ensemble() {
        let g = Grid2D::new(2, 1, 0.0, 0.0, 1.0, 1.0).unwrap();
        let vals = [[0.3, 1.0], [-1.2, 2.0], [4.0, 0.5], [2.2, -1.0], [0.0, 7.0]];
        let ens = SolutionEnsemble::from_vectors(
            g,
            vec![VarTag::value(Quantity::VelocityX)],
            (0..5).map(|i| i.to_string()).collect(),
            vals.iter().map(|v| v.to_vec()).collect(),
        )
        .unwrap();
        let sys = DifferenceSystem::new(5).unwrap();
        for m in 0..2 {
            let rhs = sys.assemble_rhs(&ens, m).unwrap();
            assert_eq!(rhs.m, m);
            for (row, &(j, k)) in sys.pairs().iter().enumerate() {
                assert_eq!(rhs.f[row], vals[j][m] - vals[k][m]);
            }
        }
        assert!(sys.assemble_rhs(&ens, 2).is_err());
    }

    #[test]
    fn functional_examples() {
        let sys = DifferenceSystem::new(3).unwrap();
        assert_eq!(functional_value(&sys, &[0.0; 3], &[0.0; 3], 0.7), 0.0);
        assert_eq!(functional_value(&sys, &[3.0, -2.0, -5.0], &[0.0; 3], 12.0), 19.0);
        let (normal, _) = normal_solution_oracle(&E5);
        let f = sys.apply(&E5);
        assert!(functional_value(&sys, &f, &normal, 0.0) < 1e-28);
    }

    #[test]
    fn gradient_at_zero_is_minus_dt_f() {
        let sys = DifferenceSystem::new(3).unwrap();
        let f = [3.0, -2.0, -5.0];
        let g = functional_gradient(&sys, &f, &[0.0; 3], 0.5);
        assert_eq!(g, vec![-1.0, 8.0, -7.0]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        // fixed pseudo-random inputs, n = 4
        let sys = DifferenceSystem::new(4).unwrap();
        let du = [0.37, -1.21, 2.05, -0.44];
        let f = [1.3, -0.2, 0.9, -2.4, 0.15, 3.1];
        let alpha = 0.013;
        let g = functional_gradient(&sys, &f, &du, alpha);
        for i in 0..4 {
            let h = 1e-6 * (1.0 + du[i].abs());
            let mut p = du;
            let mut m = du;
            p[i] += h;
            m[i] -= h;
            let fd = (functional_value(&sys, &f, &p, alpha) - functional_value(&sys, &f, &m, alpha)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn scalar_example_gradient_solver() {
        let sys = DifferenceSystem::new(3).unwrap();
        let f = sys.apply(&E5);
        let (du, diag) = solve_point_gradient(&sys, &f, &IpConfig::default()).unwrap();
        assert!(diag.converged);
        for (a, b) in du.iter().zip([1.0 / 3.0, -8.0 / 3.0, 7.0 / 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-3);
        }
        let shift = du.iter().zip(&E5).map(|(a, b)| a - b).sum::<f64>() / 3.0;
        assert_abs_diff_eq!(shift, -2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero_estimate() {
        let sys = DifferenceSystem::new(4).unwrap();
        let (du, diag) = solve_point_gradient(&sys, &[0.0; 6], &IpConfig::with_alpha(0.2)).unwrap();
        assert_eq!(du, vec![0.0; 4]);
        assert_eq!(diag.iterations, 0);
        assert_eq!(solve_point_closed_form(&sys, &[0.0; 6], 0.2).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn closed_form_examples() {
        let sys = DifferenceSystem::new(3).unwrap();
        let f = sys.apply(&E5);
        let du = solve_point_closed_form(&sys, &f, 3.0).unwrap();
        for (a, b) in du.iter().zip([1.0 / 6.0, -4.0 / 3.0, 7.0 / 6.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
        }
        let tiny = solve_point_closed_form(&sys, &f, 1e-12).unwrap();
        let (normal, b) = normal_solution_oracle(&E5);
        assert_abs_diff_eq!(b, -2.0 / 3.0, epsilon = 1e-15);
        for (a, b) in tiny.iter().zip(&normal) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
        assert!(matches!(solve_point_closed_form(&sys, &f, 0.0), Err(Error::Config(_))));
        assert!(matches!(solve_point_closed_form(&sys, &f, -1.0), Err(Error::Config(_))));
    }

    #[test]
    fn closed_form_agrees_with_independent_dense_solve() {
        // Gaussian elimination written out here, independent of the Cholesky path.
        fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
            let n = b.len();
            for c in 0..n {
                let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
                a.swap(c, p);
                b.swap(c, p);
                for r in c + 1..n {
                    let factor = a[r][c] / a[c][c];
                    for k in c..n {
                        a[r][k] -= factor * a[c][k];
                    }
                    b[r] -= factor * b[c];
                }
            }
            let mut x = vec![0.0; n];
            for r in (0..n).rev() {
                let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
                x[r] = (b[r] - s) / a[r][r];
            }
            x
        }
        let sys = DifferenceSystem::new(3).unwrap();
        let f = sys.apply(&E5);
        let d = sys.matrix();
        let alpha = 3.0;
        let a: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| (0..3).map(|r| d[(r, i)] * d[(r, j)]).sum::<f64>() + if i == j { alpha } else { 0.0 })
                    .collect()
            })
            .collect();
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|r| d[(r, i)] * f[r]).sum()).collect();
        let oracle = gauss(a, b);
        let du = solve_point_closed_form(&sys, &f, alpha).unwrap();
        for (x, y) in du.iter().zip(&oracle) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-13);
        }
    }

    #[test]
    fn equal_errors_give_zero_estimate() {
        let sys = DifferenceSystem::new(3).unwrap();
        let f = sys.apply(&[0.4, 0.4, 0.4]);
        for alpha in [1e-8, 1e-3, 10.0] {
            assert_eq!(solve_point_closed_form(&sys, &f, alpha).unwrap(), vec![0.0; 3]);
        }
    }

    #[test]
    fn oracle_edge_cases() {
        let (du, b) = normal_solution_oracle(&[0.0; 4]);
        assert_eq!(du, vec![0.0; 4]);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            IpConfig { alpha: 0.0, ..Default::default() },
            IpConfig { tau: Some(-1.0), ..Default::default() },
            IpConfig { max_iters: 0, ..Default::default() },
            IpConfig { grad_tol: Some(0.0), ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn iteration_cap_is_reported_not_fatal() {
        let sys = DifferenceSystem::new(3).unwrap();
        let f = sys.apply(&E5);
        let cfg = IpConfig { tau: Some(1e-3), max_iters: 5, ..Default::default() };
        let (du, diag) = solve_point_gradient(&sys, &f, &cfg).unwrap();
        assert!(!diag.converged);
        assert_eq!(diag.iterations, 5);
        assert!(du.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn field_solve_matches_pointwise_law() {
        let g = Grid2D::unit_square(6, 5).unwrap();
        let base: Vec<f64> = (0..30).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
        let errs: Vec<Vec<f64>> = (0..4)
            .map(|j| (0..30).map(|i| ((i * (j + 2)) as f64 * 0.71).cos() * 0.1).collect())
            .collect();
        let sols = errs.iter().map(|e| base.iter().zip(e).map(|(a, b)| a + b).collect()).collect();
        let ens = SolutionEnsemble::from_vectors(
            g,
            vec![VarTag::value(Quantity::VelocityX)],
            (0..4).map(|j| format!("s{j}")).collect(),
            sols,
        )
        .unwrap();
        let alpha = 1e-3;
        let est = solve_field(&ens, &IpConfig::with_alpha(alpha), SolverKind::ClosedForm).unwrap();
        let scale = 4.0 / (4.0 + alpha);
        for m in 0..30 {
            let mean = (0..4).map(|j| errs[j][m]).sum::<f64>() / 4.0;
            for j in 0..4 {
                assert_abs_diff_eq!(est.estimates[j][m], scale * (errs[j][m] - mean), epsilon = 1e-10);
            }
        }
        let grad = solve_field(&ens, &IpConfig::with_alpha(alpha), SolverKind::Gradient).unwrap();
        assert_eq!(grad.nonconverged_points(), 0);
        let sets = est.to_field_sets().unwrap();
        assert_eq!(sets[2].label, "s2");
        assert_eq!(sets[2].vars(), vec![VarTag::error_of(Quantity::VelocityX)]);
    }

    #[test]
    fn sweep_rows_and_csv() {
        let sys = DifferenceSystem::new(3).unwrap();
        let f = sys.apply(&E5);
        let alphas = log_alphas(-10.0, 0.0, 11);
        assert_abs_diff_eq!(alphas[0], 1e-10, epsilon = 1e-24);
        assert_abs_diff_eq!(alphas[10], 1.0, epsilon = 1e-15);
        let recs = alpha_sweep(&sys, &f, &alphas, &IpConfig::default(), SolverKind::ClosedForm, Some(&E5)).unwrap();
        assert_eq!(recs.len(), 11);
        let last = recs.last().unwrap();
        let (normal, _) = normal_solution_oracle(&E5);
        for (a, b) in last.estimate.iter().zip(&normal) {
            assert_abs_diff_eq!(*a, 0.75 * b, epsilon = 1e-13);
        }
        for r in &recs {
            assert_abs_diff_eq!(r.shift.unwrap(), -2.0 / 3.0, epsilon = 1e-9);
        }
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("alpha,eps,mean_abs_error,I_eff,shift,du_1,du_2,du_3\n"));
        assert_eq!(text.lines().count(), 12);
        assert!(alpha_sweep(&sys, &f, &[1e-2, 1e-3], &IpConfig::default(), SolverKind::ClosedForm, None).is_err());
    }

    proptest! {
        #[test]
        fn closed_form_is_zero_sum_and_shrinks_with_alpha(
            f in proptest::collection::vec(-10.0f64..10.0, 10),
            a1 in 1e-6f64..1.0,
            factor in 1.0f64..100.0,
        ) {
            // arbitrary (possibly inconsistent) rhs for n = 5
            let sys = DifferenceSystem::new(5).unwrap();
            let du = solve_point_closed_form(&sys, &f, a1).unwrap();
            let scale = du.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            prop_assert!(du.iter().sum::<f64>().abs() <= 1e-12 * scale * 5.0);
            let du2 = solve_point_closed_form(&sys, &f, a1 * factor).unwrap();
            prop_assert!(norm(&du2) <= norm(&du) * (1.0 + 1e-12));
        }

        #[test]
        fn shifting_all_solutions_changes_nothing(
            vals in proptest::collection::vec(-5.0f64..5.0, 4),
            c in -3.0f64..3.0,
        ) {
            // shifts by c are exact in binary when c and vals are dyadic
            let c = (c * 64.0).round() / 64.0;
            let vals: Vec<f64> = vals.iter().map(|v| (v * 1024.0).round() / 1024.0).collect();
            let shifted: Vec<f64> = vals.iter().map(|v| v + c).collect();
            let sys = DifferenceSystem::new(4).unwrap();
            let f1 = sys.rhs_from_values(&vals).unwrap();
            let f2 = sys.rhs_from_values(&shifted).unwrap();
            prop_assert_eq!(&f1, &f2);
            let d1 = solve_point_closed_form(&sys, &f1, 1e-3).unwrap();
            let d2 = solve_point_closed_form(&sys, &f2, 1e-3).unwrap();
            prop_assert_eq!(d1, d2);
        }
    }
}
