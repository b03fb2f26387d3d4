//! Least-squares fits over a model, empirical and population losses, and the
//! exact risk of a fixed-model estimator under a Gaussian design.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetry tolerance accepted for a covariance matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Pivots of `R` smaller than this fraction of the largest pivot are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Population parameters of the regression `Y = X θ + ε`, `X ~ N(0, Σ)`, `ε ~ N(0, σ²)`.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    theta: DVector<f64>,
    sigma: DMatrix<f64>,
    noise_var: f64,
    chol: DMatrix<f64>,
}

impl GroundTruth {
    pub fn new(theta: DVector<f64>, sigma: DMatrix<f64>, noise_var: f64) -> Result<Self> {
        let p = theta.len();
        if p == 0 {
            return Err(Error::InvalidTruth("theta is empty".into()));
        }
        if sigma.nrows() != p || sigma.ncols() != p {
            return Err(Error::InvalidTruth(format!(
                "sigma is {}x{}, expected {p}x{p}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        // Zero noise is accepted so that degenerate noiseless designs can be simulated.
        if !(noise_var >= 0.0) || !noise_var.is_finite() {
            return Err(Error::InvalidTruth(format!("noise variance {noise_var} is invalid")));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTruth("theta has non-finite entries".into()));
        }
        for i in 0..p {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidTruth(format!(
                        "sigma is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let chol = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidTruth("sigma is not positive definite".into()))?
            .l();
        Ok(Self {
            theta,
            sigma,
            noise_var,
            chol,
        })
    }

    pub fn p(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Lower Cholesky factor `L` with `L Lᵀ = Σ`.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }
}

/// `n` observations of the response and the covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl DataSet {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::InvalidData(format!(
                "x has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidData("need n >= 1 and p >= 1".into()));
        }
        Ok(Self { x, y })
    }

    /// Builds a data set from row slices.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidData("ragged design rows".into()));
        }
        let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        Self::new(x, DVector::from_vec(y))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Copy of the data with observation `i` removed.
    pub fn without_row(&self, i: usize) -> DataSet {
        DataSet {
            x: self.x.clone().remove_row(i),
            y: self.y.clone().remove_row(i),
        }
    }

    pub fn scaled_response(&self, c: f64) -> DataSet {
        DataSet {
            x: self.x.clone(),
            y: &self.y * c,
        }
    }
}

/// A set of covariate indices, stored 0-based and strictly increasing.
///
/// `Display` prints the 1-based indices, e.g. `{1,2}`; the empty model prints `{}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Model {
    indices: Vec<usize>,
}

impl Model {
    pub fn new(indices: Vec<usize>, p: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModel(format!(
                "indices {indices:?} are not strictly increasing"
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= p {
                return Err(Error::InvalidModel(format!(
                    "index {} exceeds p = {p}",
                    last + 1
                )));
            }
        }
        Ok(Self { indices })
    }

    /// Builds a model from 1-based indices in any order; duplicates are rejected.
    pub fn from_one_based(one_based: &[usize], p: usize) -> Result<Self> {
        let mut idx = Vec::with_capacity(one_based.len());
        for &i in one_based {
            if i == 0 {
                return Err(Error::InvalidModel("indices are 1-based".into()));
            }
            idx.push(i - 1);
        }
        idx.sort_unstable();
        Self::new(idx, p)
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `{1, …, k}`.
    pub fn prefix(k: usize) -> Self {
        Self {
            indices: (0..k).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// Comma separated 1-based indices (empty string for the empty model).
    pub fn to_one_based_string(&self) -> String {
        self.indices
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub(crate) fn selection_key(&self) -> (usize, &[usize]) {
        (self.dim(), &self.indices)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_one_based_string())
    }
}

/// Least-squares solution restricted to a model.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: DVector<f64>,
    pub empirical_loss: f64,
    pub model: Model,
}

/// Householder QR of `X_m` with the response carried along.
///
/// Buffers are reused across calls so that sweeping a large collection does
/// not allocate per model.
#[derive(Debug, Default)]
pub(crate) struct LsWorkspace {
    a: Vec<f64>,
    b: Vec<f64>,
    diag: Vec<f64>,
    n: usize,
    d: usize,
}

impl LsWorkspace {
    /// Factorizes `X_m` and returns the residual sum of squares `‖Y − Π_m Y‖²`.
    pub(crate) fn factor(&mut self, data: &DataSet, m: &Model) -> Result<f64> {
        let n = data.n();
        let d = m.dim();
        if d >= n {
            return Err(Error::DimensionTooLarge {
                model: m.clone(),
                dim: d,
                n,
            });
        }
        self.n = n;
        self.d = d;
        self.a.clear();
        for &j in m.indices() {
            self.a.extend_from_slice(data.x().column(j).as_slice());
        }
        self.b.clear();
        self.b.extend_from_slice(data.y().as_slice());
        self.diag.clear();

        let a = &mut self.a;
        let b = &mut self.b;
        for k in 0..d {
            let col = k * n;
            let norm2: f64 = a[col + k..col + n].iter().map(|v| v * v).sum();
            let norm = norm2.sqrt();
            if norm == 0.0 {
                self.diag.push(0.0);
                continue;
            }
            let akk = a[col + k];
            let alpha = if akk > 0.0 { -norm } else { norm };
            let vk = akk - alpha;
            a[col + k] = vk;
            let vtv = norm2 - akk * akk + vk * vk;
            for j in k + 1..d {
                let cj = j * n;
                let mut s = 0.0;
                for i in k..n {
                    s += a[col + i] * a[cj + i];
                }
                let s = 2.0 * s / vtv;
                for i in k..n {
                    a[cj + i] -= s * a[col + i];
                }
            }
            let mut s = 0.0;
            for i in k..n {
                s += a[col + i] * b[i];
            }
            let s = 2.0 * s / vtv;
            for i in k..n {
                b[i] -= s * a[col + i];
            }
            self.diag.push(alpha);
        }

        if d > 0 {
            let max = self.diag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let min = self.diag.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
            if max == 0.0 || min <= RANK_TOL * max {
                return Err(Error::RankDeficient {
                    model: m.clone(),
                    ratio: if max == 0.0 { 0.0 } else { min / max },
                });
            }
        }
        Ok(b[d..n].iter().map(|v| v * v).sum())
    }

    pub(crate) fn dim(&self) -> usize {
        self.d
    }

    /// `Qᵀ Y` after a successful [`factor`](Self::factor).
    pub(crate) fn rotated_response(&self) -> &[f64] {
        &self.b
    }

    /// Coefficients on the model's coordinates after a successful [`factor`](Self::factor).
    pub(crate) fn solve(&self) -> Vec<f64> {
        self.solve_prefix(self.d)
    }

    /// Coefficients of the sub-model made of the first `d` factored columns.
    pub(crate) fn solve_prefix(&self, d: usize) -> Vec<f64> {
        let n = self.n;
        let d = d.min(self.d);
        let mut beta = vec![0.0; d];
        for k in (0..d).rev() {
            let mut s = self.b[k];
            for j in k + 1..d {
                s -= self.a[j * n + k] * beta[j];
            }
            beta[k] = s / self.diag[k];
        }
        beta
    }
}

/// Least-squares estimator `θ̂_m`, the minimizer of `‖Y − Xθ'‖²_n` over vectors supported on `m`.
pub fn fit_least_squares(data: &DataSet, m: &Model) -> Result<FitResult> {
    if m.indices().last().is_some_and(|&j| j >= data.p()) {
        return Err(Error::InvalidModel(format!("{m} exceeds p = {}", data.p())));
    }
    let mut ws = LsWorkspace::default();
    ws.factor(data, m)?;
    let beta = ws.solve();
    let mut coefficients = DVector::zeros(data.p());
    for (&j, b) in m.indices().iter().zip(beta) {
        coefficients[j] = b;
    }
    let empirical_loss = empirical_loss(data, &coefficients)?;
    Ok(FitResult {
        coefficients,
        empirical_loss,
        model: m.clone(),
    })
}

/// `γ_n(θ') = ‖Y − Xθ'‖² / n`.
pub fn empirical_loss(data: &DataSet, theta: &DVector<f64>) -> Result<f64> {
    if theta.len() != data.p() {
        return Err(Error::LengthMismatch {
            expected: data.p(),
            got: theta.len(),
        });
    }
    let resid = data.y() - data.x() * theta;
    Ok(resid.norm_squared() / data.n() as f64)
}

/// `l(θ₁, θ₂) = (θ₁ − θ₂)ᵀ Σ (θ₁ − θ₂)`.
pub fn population_loss(truth: &GroundTruth, theta1: &DVector<f64>, theta2: &DVector<f64>) -> Result<f64> {
    let p = truth.p();
    for v in [theta1, theta2] {
        if v.len() != p {
            return Err(Error::LengthMismatch {
                expected: p,
                got: v.len(),
            });
        }
    }
    let diff = theta1 - theta2;
    Ok((truth.sigma() * &diff).dot(&diff).max(0.0))
}

/// Population projection `θ_m` of `θ` onto vectors supported on `m` (Σ inner product).
pub fn project_theta(truth: &GroundTruth, m: &Model) -> Result<DVector<f64>> {
    let p = truth.p();
    if m.indices().last().is_some_and(|&j| j >= p) {
        return Err(Error::InvalidModel(format!("{m} exceeds p = {p}")));
    }
    let mut out = DVector::zeros(p);
    if m.is_empty() {
        return Ok(out);
    }
    let idx = m.indices();
    let d = idx.len();
    let sigma = truth.sigma();
    let sub = DMatrix::from_fn(d, d, |a, b| sigma[(idx[a], idx[b])]);
    let rhs = DVector::from_fn(d, |a, _| sigma.row(idx[a]).dot(&truth.theta().transpose()));
    let beta = sub
        .cholesky()
        .ok_or_else(|| Error::SingularSubmatrix(m.clone()))?
        .solve(&rhs);
    for (a, &j) in idx.iter().enumerate() {
        out[j] = beta[a];
    }
    Ok(out)
}

/// Exact risk `E[l(θ̂_m, θ)] = l(θ_m, θ) + (σ² + l(θ_m, θ)) d_m / (n − d_m − 1)`.
pub fn closed_form_risk(truth: &GroundTruth, m: &Model, n: usize) -> Result<f64> {
    let d = m.dim();
    if n < d + 2 {
        return Err(Error::DimensionTooLarge {
            model: m.clone(),
            dim: d,
            n,
        });
    }
    let theta_m = project_theta(truth, m)?;
    let bias = population_loss(truth, &theta_m, truth.theta())?;
    Ok(bias + (truth.noise_var() + bias) * d as f64 / (n - d - 1) as f64)
}
