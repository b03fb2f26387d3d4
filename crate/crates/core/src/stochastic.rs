//! Covariance constructors, Gaussian sampling and reproducible random streams.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{DataSet, GroundTruth, SYMMETRY_TOL};

/// Identity of the random generator, recorded in every report.
pub const GENERATOR_VERSION: &str =
    "chacha20/rand_chacha-0.9 stream-per-replication; normal=rand_distr-0.5 ziggurat";

/// Eigenvalues below this are treated as a failure of positive semi-definiteness.
pub const PSD_TOL: f64 = 1e-9;

/// Master seed; replication `r` reads ChaCha20 stream `r` of that seed, so
/// replications are independent and individually reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn from_entropy() -> Self {
        Self {
            master_seed: rand::rng().random(),
        }
    }

    pub fn stream(&self, rep: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(rep);
        rng
    }

    /// Independent seed for a named sub-experiment.
    pub fn derive(&self, salt: u64) -> SeedSpec {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed ^ 0x9e37_79b9_7f4a_7c15);
        rng.set_stream(salt);
        SeedSpec {
            master_seed: rng.random(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceKind {
    Identity(usize),
    /// `Σ₂ = AᵀA` from the correlated-design experiment.
    PaperSigma2(usize),
    /// Circulant `corr(X_i, X_j) = exp(−ω |i−j|_p)`.
    ExpCirculant { p: usize, omega: f64 },
    /// Circulant `corr(X_i, X_j) = (1 + |i−j|_p)^{−t}`.
    PolyCirculant { p: usize, t: f64 },
    Explicit(DMatrix<f64>),
}

impl CovarianceKind {
    pub fn build(&self) -> Result<DMatrix<f64>> {
        let m = match self {
            CovarianceKind::Identity(p) => {
                if *p == 0 {
                    return Err(Error::BadDimension(0, "p must be positive".into()));
                }
                DMatrix::identity(*p, *p)
            }
            CovarianceKind::PaperSigma2(p) => build_sigma2(*p)?,
            CovarianceKind::ExpCirculant { p, omega } => {
                if !(*omega > 0.0) {
                    return Err(Error::InvalidParameter(format!("omega = {omega} must be positive")));
                }
                let w = *omega;
                build_circulant(*p, |k| (-w * k as f64).exp())?.matrix
            }
            CovarianceKind::PolyCirculant { p, t } => {
                if !(*t > 0.0) {
                    return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
                }
                let t = *t;
                build_circulant(*p, |k| (1.0 + k as f64).powf(-t))?.matrix
            }
            CovarianceKind::Explicit(m) => m.clone(),
        };
        check_covariance(&m)?;
        Ok(m)
    }
}

fn check_covariance(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidParameter("covariance must be square".into()));
    }
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "covariance is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    if m.clone().cholesky().is_none() {
        return Err(Error::InvalidParameter("covariance is not positive definite".into()));
    }
    Ok(())
}

/// `Σ₂ = AᵀA` where the rows of `A` are
/// `a₁ = (1, −1, 0, …)/√2`, `a₂ = (−1, 1.2, 0, …)/√(1 + 1.2²)`,
/// `a₃ = (1/√2, 1/√2, 1/p, …, 1/p)/√(1/2 + (p−2)/p²)` and `a_j = e_j` for `j ≥ 4`.
pub fn build_sigma2(p: usize) -> Result<DMatrix<f64>> {
    if p < 4 {
        return Err(Error::BadDimension(p, "sigma2 needs p >= 4".into()));
    }
    let a = sigma2_rows(p);
    let sigma = a.transpose() * &a;
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    if sigma.clone().cholesky().is_none() {
        return Err(Error::InvalidParameter("sigma2 is not positive definite".into()));
    }
    Ok(sigma)
}

/// The matrix `A` whose Gram matrix is `Σ₂`.
pub fn sigma2_rows(p: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(p, p);
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    a[(0, 0)] = r2;
    a[(0, 1)] = -r2;
    let n2 = (1.0f64 + 1.44).sqrt();
    a[(1, 0)] = -1.0 / n2;
    a[(1, 1)] = 1.2 / n2;
    // 1/2 + (p−2)/p² = (p² + 2(p−2)) / (2p²), formed in integers
    let pp = p as u64;
    let num = pp * pp + 2 * (pp - 2);
    let den = 2 * pp * pp;
    let norm3 = (num as f64 / den as f64).sqrt();
    a[(2, 0)] = r2 / norm3;
    a[(2, 1)] = r2 / norm3;
    for j in 2..p {
        a[(2, j)] = 1.0 / (p as f64 * norm3);
    }
    for j in 3..p {
        a[(j, j)] = 1.0;
    }
    a
}

/// Toroidal distance `min(|i−j|, p−|i−j|)`.
pub fn toroidal_distance(i: usize, j: usize, p: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(p - d)
}

#[derive(Debug, Clone)]
pub struct CirculantMatrix {
    pub matrix: DMatrix<f64>,
    /// `λ_l = Σ_k a_k cos(2π k l / p)` for `l = 0..p`.
    pub eigenvalues: Vec<f64>,
}

impl CirculantMatrix {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Stationary correlation on the discrete torus: `M[i,j] = corr(|i−j|_p)`.
///
/// The spectrum is the discrete Fourier transform of the first row; a matrix
/// with an eigenvalue below `−1e-9` is rejected.
pub fn build_circulant(p: usize, corr: impl Fn(usize) -> f64) -> Result<CirculantMatrix> {
    if p % 2 == 0 {
        return Err(Error::EvenP(p));
    }
    if (corr(0) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("corr(0) = {} must be 1", corr(0))));
    }
    let first_row: Vec<f64> = (0..p).map(|k| corr(toroidal_distance(0, k, p))).collect();
    let matrix = DMatrix::from_fn(p, p, |i, j| first_row[toroidal_distance(i, j, p)]);
    let eigenvalues = circulant_eigenvalues(&first_row);
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(CirculantMatrix { matrix, eigenvalues })
}

/// Real DFT of a symmetric first row.
pub fn circulant_eigenvalues(first_row: &[f64]) -> Vec<f64> {
    let p = first_row.len();
    (0..p)
        .map(|l| {
            first_row
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let phase = 2.0 * std::f64::consts::PI * ((k * l) % p) as f64 / p as f64;
                    a * phase.cos()
                })
                .sum()
        })
        .collect()
}

/// Writes a matrix as CSV, shortest round-trip formatting, no header.
pub fn write_covariance_csv(m: &DMatrix<f64>, mut out: impl Write) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_covariance_csv(text: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("covariance row {}: {e}", i + 1)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let p = rows.len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(Error::Config("covariance CSV must be a square matrix".into()));
    }
    Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
}

/// Draws `n` rows `X ~ N(0, Σ)` (as `L z`) followed by `n` noise values.
pub fn sample_dataset(truth: &GroundTruth, n: usize, seed: &SeedSpec, rep: u64) -> Result<DataSet> {
    let mut rng = seed.stream(rep);
    sample_with(truth, n, &mut rng)
}

pub fn sample_with(truth: &GroundTruth, n: usize, rng: &mut impl Rng) -> Result<DataSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let p = truth.p();
    let mut z = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            z[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let x = z * truth.cholesky_factor().transpose();
    let sd = truth.noise_var().sqrt();
    let eps = DVector::from_fn(n, |_, _| sd * rng.sample::<f64, _>(StandardNormal));
    let y = &x * truth.theta() + eps;
    DataSet::new(x, y)
}
