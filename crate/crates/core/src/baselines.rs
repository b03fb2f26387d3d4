//! Lasso and adaptive Lasso baselines tuned by leave-one-out cross-validation.
//!
//! Covariates are rescaled internally to unit empirical norm (`‖x_j‖²_n = 1`)
//! and coefficients are mapped back to the original scale on output. On the
//! rescaled problem the Lasso minimizes
//!
//! ```text
//! ‖Y − Zβ‖²_n + (2λ/√n) Σ_j w_j |β_j|
//! ```
//!
//! with `w_j = 1` for the plain Lasso and `w_j = |β̃_j ‖x_j‖₂|^{−γ}` for the
//! adaptive Lasso, `β̃` being the initial estimator on the original scale.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::regression::DataSet;

/// Coordinates of the initial estimator below this magnitude get an infinite weight.
pub const ADAPTIVE_ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoConfig {
    /// Strictly increasing, positive. Empty means "use the data-driven grid".
    pub lambda_grid: Vec<f64>,
    pub lambda_points: usize,
    pub gamma_grid: Vec<f64>,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda_grid: Vec::new(),
            lambda_points: 20,
            gamma_grid: vec![0.5, 1.0, 2.0],
            max_iter: 10_000,
            tol: 1e-7,
        }
    }
}

impl LassoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.lambda_grid.is_empty() && self.lambda_points == 0 {
            return bad("lambda grid is empty");
        }
        if self.lambda_grid.iter().any(|v| !(*v > 0.0)) || self.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("lambda grid must be positive and strictly increasing");
        }
        if self.gamma_grid.is_empty() || self.gamma_grid.iter().any(|v| !(*v > 0.0)) {
            return bad("gamma grid must be nonempty and positive");
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tol must be positive and max_iter at least 1");
        }
        Ok(())
    }

    pub fn options(&self) -> CdOptions {
        CdOptions {
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }

    /// The configured grid, or the data-driven one when none is configured.
    pub fn lambdas_for(&self, data: &DataSet) -> Result<Vec<f64>> {
        if self.lambda_grid.is_empty() {
            paper_lambda_grid(data, self.lambda_points)
        } else {
            Ok(self.lambda_grid.clone())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdOptions {
    /// Maximum number of full sweeps.
    pub max_iter: usize,
    /// Convergence threshold on the largest coordinate change in a sweep.
    pub tol: f64,
}

impl Default for CdOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-7,
        }
    }
}

/// Design rescaled to unit empirical column norms.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub z: DMatrix<f64>,
    /// `‖x_j‖_n`; zero for a null column.
    pub scales: Vec<f64>,
}

impl Standardized {
    pub fn new(x: &DMatrix<f64>) -> Self {
        let n = x.nrows() as f64;
        let mut z = x.clone();
        let mut scales = Vec::with_capacity(x.ncols());
        for (j, mut col) in z.column_iter_mut().enumerate() {
            let s = (x.column(j).norm_squared() / n).sqrt();
            if s > 0.0 {
                col /= s;
            }
            scales.push(s);
        }
        Self { z, scales }
    }

    fn to_original(&self, beta: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            beta.len(),
            beta.iter()
                .zip(&self.scales)
                .map(|(b, s)| if *s > 0.0 { b / s } else { 0.0 }),
        )
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// `‖y − Zβ‖²_n + 2 Σ_j t_j |β_j|`; coordinates with infinite threshold are held at zero.
pub fn cd_objective(z: &DMatrix<f64>, y: &DVector<f64>, thresholds: &[f64], beta: &[f64]) -> f64 {
    let b = DVector::from_column_slice(beta);
    let resid = y - z * b;
    let pen: f64 = thresholds
        .iter()
        .zip(beta)
        .filter(|(t, _)| t.is_finite())
        .map(|(t, b)| t * b.abs())
        .sum();
    resid.norm_squared() / z.nrows() as f64 + 2.0 * pen
}

/// Cyclic coordinate descent on a unit-norm design with per-coordinate
/// soft-thresholds `t_j`. Coordinates with `t_j = ∞` (or a null column) stay at zero.
///
/// When `trace` is given, the objective after every sweep is appended to it.
pub fn coordinate_descent(
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    thresholds: &[f64],
    opts: CdOptions,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<Vec<f64>> {
    let (n, p) = z.shape();
    let nf = n as f64;
    let active: Vec<bool> = (0..p)
        .map(|j| thresholds[j].is_finite() && z.column(j).norm_squared() > 0.0)
        .collect();
    let mut beta = vec![0.0; p];
    let mut resid: Vec<f64> = y.iter().copied().collect();
    let mut last_change = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let mut max_change = 0.0f64;
        for j in 0..p {
            if !active[j] {
                continue;
            }
            let col = z.column(j);
            let col = col.as_slice();
            let old = beta[j];
            let mut rho = 0.0;
            for i in 0..n {
                rho += col[i] * resid[i];
            }
            // columns have ‖z_j‖²_n = 1
            let new = soft_threshold(rho / nf + old, thresholds[j]);
            let delta = new - old;
            if delta != 0.0 {
                for i in 0..n {
                    resid[i] -= delta * col[i];
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(cd_objective(z, y, thresholds, &beta));
        }
        last_change = max_change;
        if max_change < opts.tol {
            return Ok(beta);
        }
    }
    Err(Error::NoConvergence {
        sweeps: opts.max_iter,
        last_change,
        last_iterate: beta,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    Ok(())
}

/// Lasso estimate on the original scale.
pub fn lasso(data: &DataSet, lambda: f64, opts: CdOptions) -> Result<DVector<f64>> {
    check_lambda(lambda)?;
    let std = Standardized::new(data.x());
    let t = lambda / (data.n() as f64).sqrt();
    let beta = coordinate_descent(&std.z, data.y(), &vec![t; data.p()], opts, None)?;
    Ok(std.to_original(&beta))
}

/// Smallest `λ` for which the Lasso solution is identically zero.
pub fn lambda_max(data: &DataSet) -> f64 {
    let std = Standardized::new(data.x());
    let n = data.n() as f64;
    let corr = std.z.transpose() * data.y();
    corr.amax() / n * n.sqrt()
}

/// Per-coordinate adaptive weights `|β̃_j ‖x_j‖₂|^{−γ}` from an initial
/// estimate `β̃` on the original scale, i.e. the initial coefficients of the
/// columns rescaled to unit Euclidean norm.
pub fn adaptive_weights(std: &Standardized, init: &DVector<f64>, gamma: f64) -> Result<Vec<f64>> {
    if init.len() != std.scales.len() {
        return Err(Error::LengthMismatch {
            expected: std.scales.len(),
            got: init.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    let root_n = (std.z.nrows() as f64).sqrt();
    let weights: Vec<f64> = init
        .iter()
        .zip(&std.scales)
        .map(|(b, s)| {
            if b.abs() < ADAPTIVE_ZERO_TOL || *s == 0.0 {
                f64::INFINITY
            } else {
                (b * s * root_n).abs().powf(-gamma)
            }
        })
        .collect();
    if weights.iter().all(|w| w.is_infinite()) {
        return Err(Error::AllWeightsInfinite);
    }
    Ok(weights)
}

/// Adaptive Lasso with weights built from `init`.
pub fn adaptive_lasso(
    data: &DataSet,
    lambda: f64,
    gamma: f64,
    init: &DVector<f64>,
    opts: CdOptions,
) -> Result<DVector<f64>> {
    check_lambda(lambda)?;
    let std = Standardized::new(data.x());
    let weights = adaptive_weights(&std, init, gamma)?;
    let t = lambda / (data.n() as f64).sqrt();
    let thresholds: Vec<f64> = weights.iter().map(|w| w * t).collect();
    let beta = coordinate_descent(&std.z, data.y(), &thresholds, opts, None)?;
    Ok(std.to_original(&beta))
}

/// `n_points` log-spaced values on `[0.3 Λ, Λ]`, `Λ = 2 √(log p · Var̂(Y))`,
/// with the unbiased variance estimate. A single point is `Λ` itself.
pub fn paper_lambda_grid(data: &DataSet, n_points: usize) -> Result<Vec<f64>> {
    let (n, p) = (data.n(), data.p());
    if n < 2 || p < 2 {
        return Err(Error::InvalidParameter("need n >= 2 and p >= 2".into()));
    }
    if n_points == 0 {
        return Err(Error::InvalidParameter("need at least one grid point".into()));
    }
    let y = data.y();
    let mean = y.mean();
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::DegenerateY);
    }
    let upper = 2.0 * ((p as f64).ln() * var).sqrt();
    if n_points == 1 {
        return Ok(vec![upper]);
    }
    let lower = 0.3 * upper;
    let (a, b) = (lower.ln(), upper.ln());
    let mut grid: Vec<f64> = (0..n_points)
        .map(|k| (a + (b - a) * k as f64 / (n_points - 1) as f64).exp())
        .collect();
    grid[0] = lower;
    grid[n_points - 1] = upper;
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome<C> {
    pub best: C,
    pub best_index: usize,
    /// Sum of squared held-out errors per candidate; `None` for disqualified ones.
    pub scores: Vec<Option<f64>>,
    pub diagnostics: Vec<String>,
}

/// Leave-one-out cross-validation over `candidates`.
///
/// Each candidate is scored by `Σ_i (y_i − x_i θ̂_{−i})²`. A candidate whose fit
/// fails on any fold is disqualified. Ties go to the earliest candidate, so
/// callers list candidates by increasing `λ` (then `γ`).
pub fn loo_cv<C: Clone>(
    data: &DataSet,
    candidates: &[C],
    fitter: impl Fn(&DataSet, &C) -> Result<DVector<f64>>,
) -> Result<CvOutcome<C>> {
    let n = data.n();
    if n < 2 {
        return Err(Error::InvalidParameter("leave-one-out needs n >= 2".into()));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidates".into()));
    }
    if candidates.len() == 1 {
        return Ok(CvOutcome {
            best: candidates[0].clone(),
            best_index: 0,
            scores: vec![None],
            diagnostics: Vec::new(),
        });
    }
    let folds: Vec<DataSet> = (0..n).map(|i| data.without_row(i)).collect();
    let mut scores = Vec::with_capacity(candidates.len());
    let mut diagnostics = Vec::new();
    for (ci, cand) in candidates.iter().enumerate() {
        let mut total = 0.0;
        let mut failed = None;
        for (i, fold) in folds.iter().enumerate() {
            match fitter(fold, cand) {
                Ok(theta) => {
                    let pred = data.x().row(i).dot(&theta.transpose());
                    total += (data.y()[i] - pred).powi(2);
                }
                Err(e) => {
                    failed = Some(format!("candidate {ci} fold {i}: {e}"));
                    break;
                }
            }
        }
        match failed {
            Some(msg) => {
                diagnostics.push(msg);
                scores.push(None);
            }
            None => scores.push(Some(total)),
        }
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((i, s));
            }
        }
    }
    let (best_index, _) = best.ok_or_else(|| {
        Error::InvalidParameter(format!("every candidate failed: {}", diagnostics.join("; ")))
    })?;
    Ok(CvOutcome {
        best: candidates[best_index].clone(),
        best_index,
        scores,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub estimate: DVector<f64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveLassoFit {
    pub estimate: DVector<f64>,
    pub lambda: f64,
    pub gamma: f64,
    pub init: DVector<f64>,
}

/// Lasso with `λ` chosen by leave-one-out cross-validation.
pub fn lasso_cv(data: &DataSet, cfg: &LassoConfig) -> Result<LassoFit> {
    cfg.validate()?;
    let opts = cfg.options();
    let grid = cfg.lambdas_for(data)?;
    let cv = loo_cv(data, &grid, |d, &lambda| lasso(d, lambda, opts))?;
    Ok(LassoFit {
        estimate: lasso(data, cv.best, opts)?,
        lambda: cv.best,
    })
}

/// Adaptive Lasso: the initial estimator is the cross-validated Lasso on the
/// full sample; `(λ, γ)` is then chosen by leave-one-out cross-validation.
pub fn adaptive_lasso_cv(data: &DataSet, cfg: &LassoConfig, init: Option<&LassoFit>) -> Result<AdaptiveLassoFit> {
    cfg.validate()?;
    let opts = cfg.options();
    let owned;
    let init = match init {
        Some(f) => f,
        None => {
            owned = lasso_cv(data, cfg)?;
            &owned
        }
    };
    let grid = cfg.lambdas_for(data)?;
    let mut gammas = cfg.gamma_grid.clone();
    gammas.sort_by(f64::total_cmp);
    // every weight infinite: every coordinate is excluded, whatever (λ, γ)
    if init.estimate.iter().all(|b| b.abs() < ADAPTIVE_ZERO_TOL) {
        return Ok(AdaptiveLassoFit {
            estimate: DVector::zeros(data.p()),
            lambda: grid[0],
            gamma: gammas[0],
            init: init.estimate.clone(),
        });
    }
    let candidates: Vec<(f64, f64)> = grid
        .iter()
        .flat_map(|&l| gammas.iter().map(move |&g| (l, g)))
        .collect();
    let start = &init.estimate;
    let cv = loo_cv(data, &candidates, |d, &(l, g)| adaptive_lasso(d, l, g, start, opts))?;
    let (lambda, gamma) = cv.best;
    Ok(AdaptiveLassoFit {
        estimate: adaptive_lasso(data, lambda, gamma, start, opts)?,
        lambda,
        gamma,
        init: start.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::{fit_least_squares, Model};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian_data(n: usize, p: usize, theta: &[f64], seed: u64) -> DataSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let e = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &x * DVector::from_column_slice(theta) + e;
        DataSet::new(x, y).unwrap()
    }

    /// Hadamard-like design with `XᵀX/n = I`.
    fn orthonormal_data(seed: u64) -> DataSet {
        let h2 = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let h4 = h2.kronecker(&h2);
        let h8 = h4.kronecker(&h2);
        let x = h8.columns(0, 5).into_owned();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = DVector::from_fn(8, |_, _| rng.sample::<f64, _>(StandardNormal) * 2.0);
        DataSet::new(x, y).unwrap()
    }

    #[test]
    fn vanishing_penalty_gives_ols() {
        let data = gaussian_data(40, 5, &[1.0, -0.5, 0.0, 2.0, 0.3], 1);
        let opts = CdOptions { max_iter: 100_000, tol: 1e-12 };
        let est = lasso(&data, 1e-10, opts).unwrap();
        let ols = fit_least_squares(&data, &Model::prefix(5)).unwrap();
        for j in 0..5 {
            assert!((est[j] - ols.coefficients[j]).abs() < 1e-5);
        }
    }

    #[test]
    fn large_penalty_gives_zero() {
        let data = gaussian_data(30, 6, &[1.0, 0.5, 0.0, 0.0, 0.0, 0.0], 2);
        let lmax = lambda_max(&data);
        assert!(lasso(&data, lmax * 1.0001, CdOptions::default()).unwrap().iter().all(|&v| v == 0.0));
        assert!(lasso(&data, lmax * 0.9, CdOptions::default()).unwrap().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn orthonormal_design_soft_thresholds_ols() {
        for seed in 0..5 {
            let data = orthonormal_data(seed);
            let n = data.n() as f64;
            let ols = data.x().transpose() * data.y() / n;
            for lambda in [0.1, 0.5, 1.0, 2.0] {
                let est = lasso(&data, lambda, CdOptions::default()).unwrap();
                for j in 0..5 {
                    let oracle = soft_threshold(ols[j], lambda / n.sqrt());
                    assert!((est[j] - oracle).abs() < 1e-6, "{} vs {oracle}", est[j]);
                }
            }
        }
    }

    #[test]
    fn orthonormal_support_shrinks_with_penalty() {
        let data = orthonormal_data(9);
        let mut prev: Option<Vec<bool>> = None;
        for k in 1..40 {
            let lambda = 0.1 * k as f64;
            let est = lasso(&data, lambda, CdOptions::default()).unwrap();
            let support: Vec<bool> = est.iter().map(|v| *v != 0.0).collect();
            if let Some(p) = &prev {
                assert!(support.iter().zip(p).all(|(now, before)| !*now || *before));
            }
            prev = Some(support);
        }
    }

    #[test]
    fn objective_decreases_each_sweep() {
        let data = gaussian_data(25, 10, &[1.0, 0.8, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.1], 3);
        let std = Standardized::new(data.x());
        let t = vec![0.2; 10];
        let mut trace = Vec::new();
        coordinate_descent(&std.z, data.y(), &t, CdOptions::default(), Some(&mut trace)).unwrap();
        let start = cd_objective(&std.z, data.y(), &t, &[0.0; 10]);
        assert!(trace[0] <= start);
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn kkt_conditions_hold() {
        let opts = CdOptions::default();
        for seed in 0..10 {
            let data = gaussian_data(30, 8, &[1.0, 0.0, -0.7, 0.0, 0.0, 0.3, 0.0, 0.0], 10 + seed);
            let std = Standardized::new(data.x());
            let t = vec![0.15; 8];
            let beta = coordinate_descent(&std.z, data.y(), &t, opts, None).unwrap();
            let resid = data.y() - &std.z * DVector::from_column_slice(&beta);
            let grad = std.z.transpose() * resid / data.n() as f64;
            for j in 0..8 {
                if beta[j] != 0.0 {
                    assert!((grad[j] - t[j] * beta[j].signum()).abs() <= 10.0 * opts.tol);
                } else {
                    assert!(grad[j].abs() <= t[j] + 10.0 * opts.tol);
                }
            }
        }
    }

    #[test]
    fn no_convergence_reports_last_iterate() {
        let data = gaussian_data(30, 8, &[1.0; 8], 4);
        let err = lasso(&data, 0.01, CdOptions { max_iter: 1, tol: 1e-12 }).unwrap_err();
        match err {
            Error::NoConvergence { sweeps, last_iterate, .. } => {
                assert_eq!(sweeps, 1);
                assert_eq!(last_iterate.len(), 8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn adaptive_reductions() {
        let data = gaussian_data(40, 6, &[1.0, -0.5, 0.0, 0.0, 0.8, 0.0], 5);
        let opts = CdOptions { max_iter: 100_000, tol: 1e-11 };
        let std = Standardized::new(data.x());
        // init = 1/‖x_j‖₂ on every coordinate makes every weight exactly one
        let unit = DVector::from_iterator(6, std.scales.iter().map(|s| 1.0 / (s * 40f64.sqrt())));
        let a = adaptive_lasso(&data, 0.5, 1.0, &unit, opts).unwrap();
        let b = lasso(&data, 0.5, opts).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-9);
        // gamma -> 0 drives the weights to one for any init
        let init = DVector::from_row_slice(&[0.3, 2.0, 1.0, 0.5, 4.0, 1.5]);
        let a = adaptive_lasso(&data, 0.5, 1e-9, &init, opts).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-6);
        // lambda -> 0: OLS restricted to finitely weighted coordinates
        let init = DVector::from_row_slice(&[1.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        let a = adaptive_lasso(&data, 1e-10, 1.0, &init, opts).unwrap();
        let ols = fit_least_squares(&data, &Model::new(vec![0, 1, 4], 6).unwrap()).unwrap();
        for j in 0..6 {
            assert!((a[j] - ols.coefficients[j]).abs() < 1e-5);
        }
        assert!(matches!(
            adaptive_lasso(&data, 0.5, 1.0, &DVector::zeros(6), opts),
            Err(Error::AllWeightsInfinite)
        ));
    }

    #[test]
    fn adaptive_support_within_init_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..100 {
            let data = gaussian_data(20, 8, &[1.0, 0.5, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0], 1000 + trial);
            let init = DVector::from_fn(8, |j, _| if j % 3 == 0 { rng.random_range(0.5..2.0) } else { 0.0 });
            let est = adaptive_lasso(&data, 1.0, 4.0, &init, CdOptions::default()).unwrap();
            for j in 0..8 {
                if init[j] == 0.0 {
                    assert_eq!(est[j], 0.0);
                }
            }
        }
    }

    #[test]
    fn lambda_grid_values() {
        let data = gaussian_data(30, 20, &[0.0; 20], 6);
        let y = data.y();
        let mean = y.mean();
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 29.0;
        let big = 2.0 * (20f64.ln() * var).sqrt();
        assert_eq!(paper_lambda_grid(&data, 1).unwrap(), vec![big]);
        let g = paper_lambda_grid(&data, 20).unwrap();
        assert_eq!(g.len(), 20);
        assert_relative_eq!(g[0] / g[19], 0.3, epsilon = 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        // p = 20, Var(Y) = 4
        assert_relative_eq!(2.0 * (4.0 * 20f64.ln()).sqrt(), 6.92327, epsilon = 1e-5);
        let flat = DataSet::new(data.x().clone(), DVector::from_element(30, 1.0)).unwrap();
        assert!(matches!(paper_lambda_grid(&flat, 5), Err(Error::DegenerateY)));
    }

    #[test]
    fn loo_cv_behaviour() {
        let data = gaussian_data(15, 3, &[1.0, 0.0, 0.0], 8);
        let single = loo_cv(&data, &[0.7], |d, _| Ok(DVector::zeros(d.p()))).unwrap();
        assert_eq!(single.best, 0.7);

        // candidate 1 reproduces the held-out response exactly
        let exact = DataSet::new(data.x().clone(), data.x() * DVector::from_row_slice(&[1.0, 2.0, 3.0])).unwrap();
        let out = loo_cv(&exact, &[0usize, 1], |d, &c| {
            if c == 1 {
                Ok(fit_least_squares(d, &Model::prefix(3))?.coefficients)
            } else {
                Ok(DVector::zeros(3))
            }
        })
        .unwrap();
        assert_eq!(out.best, 1);

        // ties go to the first candidate
        let out = loo_cv(&data, &[1, 2, 3], |d, _| Ok(DVector::zeros(d.p()))).unwrap();
        assert_eq!(out.best, 1);

        // failing candidates are disqualified
        let out = loo_cv(&data, &[0usize, 1], |d, &c| {
            if c == 0 {
                Err(Error::DegenerateY)
            } else {
                Ok(DVector::zeros(d.p()))
            }
        })
        .unwrap();
        assert_eq!(out.best, 1);
        assert_eq!(out.diagnostics.len(), 1);
    }

    #[test]
    fn cross_validated_fits_run() {
        let data = gaussian_data(20, 10, &[2.0, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 12);
        let cfg = LassoConfig::default();
        let l = lasso_cv(&data, &cfg).unwrap();
        assert!(l.estimate[0] != 0.0);
        let a = adaptive_lasso_cv(&data, &cfg, Some(&l)).unwrap();
        for j in 0..10 {
            if l.estimate[j] == 0.0 {
                assert_eq!(a.estimate[j], 0.0);
            }
        }
    }
}
