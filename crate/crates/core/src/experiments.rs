//! Monte-Carlo experiments: risk ratio, power and FDR of the penalized
//! estimator against the Lasso baselines, plus empirical checks of the risk
//! identities, the minimal-penalty phenomenon, the χ²/Wishart deviation
//! bounds and the asymptotic optimality of FPE.
//!
//! Every replication draws from its own random stream and results are reduced
//! in replication order, so reports do not depend on the number of threads.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{adaptive_lasso_cv, lasso_cv, LassoConfig};
use crate::collections::ModelCollection;
use crate::error::{Error, Result};
use crate::penalties::PenaltySpec;
use crate::regression::{
    closed_form_risk, empirical_loss, fit_least_squares, population_loss, project_theta, DataSet, GroundTruth,
    LsWorkspace, Model,
};
use crate::selector::select_many;
use crate::stochastic::{build_sigma2, sample_dataset, sample_with, SeedSpec, GENERATOR_VERSION};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec {
    Penalized(PenaltySpec),
    Lasso(LassoConfig),
    AdaptiveLasso(LassoConfig),
}

impl EstimatorSpec {
    pub fn label(&self) -> String {
        match self {
            EstimatorSpec::Penalized(PenaltySpec::Complete { k }) => format!("K={k}"),
            EstimatorSpec::Penalized(spec) => spec.to_string(),
            EstimatorSpec::Lasso(_) => "lasso".into(),
            EstimatorSpec::AdaptiveLasso(_) => "adaptive-lasso".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub truth: GroundTruth,
    pub n: usize,
    pub replications: usize,
    pub estimators: Vec<EstimatorSpec>,
    pub collection: ModelCollection,
    /// Reference collection of the risk-ratio denominator.
    pub oracle_collection: ModelCollection,
    pub seed: SeedSpec,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidParameter("no estimator configured".into()));
        }
        let p = self.truth.p();
        for c in [&self.collection, &self.oracle_collection] {
            if c.p() != p {
                return Err(Error::InvalidCollection(format!("collection has p = {}, truth has p = {p}", c.p())));
            }
        }
        if self.collection.max_dim() >= self.n {
            return Err(Error::DimensionTooLarge {
                model: Model::prefix(self.collection.max_dim()),
                dim: self.collection.max_dim(),
                n: self.n,
            });
        }
        for e in &self.estimators {
            match e {
                EstimatorSpec::Penalized(s) => {
                    s.validate()?;
                    if matches!(s, PenaltySpec::Prior { .. }) && !self.collection.has_priors() {
                        return Err(Error::InvalidCollection("prior penalty needs prior weights".into()));
                    }
                }
                EstimatorSpec::Lasso(c) | EstimatorSpec::AdaptiveLasso(c) => c.validate()?,
            }
        }
        if self.truth.theta().iter().all(|v| *v == 0.0) {
            return Err(Error::NoTrueSignal);
        }
        Ok(())
    }

    /// The simulation design with `p = 20`, `σ² = 1`: experiment 1 uses `Σ = I`
    /// and `θ = (2, 1, 0.5, 0, …)`, experiment 2 uses `Σ₂` and `θ = (40, 40, 0, …)`.
    /// Complete selection is capped at 3, 4, 5 for `n = 15, 20, 30`
    /// (`⌊n/5⌋` in general), and the risk ratio is always taken against the
    /// complete collection of dimension at most 5.
    pub fn preset(experiment: u8, n: usize, replications: usize, seed: SeedSpec) -> Result<Self> {
        let p = 20;
        let mut theta = DVector::zeros(p);
        let sigma = match experiment {
            1 => {
                theta[0] = 2.0;
                theta[1] = 1.0;
                theta[2] = 0.5;
                DMatrix::identity(p, p)
            }
            2 => {
                theta[0] = 40.0;
                theta[1] = 40.0;
                build_sigma2(p)?
            }
            other => return Err(Error::InvalidParameter(format!("unknown experiment {other}"))),
        };
        let truth = GroundTruth::new(theta, sigma, 1.0)?;
        let dmax = (n / 5).clamp(1, 5);
        let mut estimators: Vec<EstimatorSpec> = [1.1, 1.5, 2.0]
            .iter()
            .map(|&k| EstimatorSpec::Penalized(PenaltySpec::Complete { k }))
            .collect();
        estimators.push(EstimatorSpec::Lasso(LassoConfig::default()));
        estimators.push(EstimatorSpec::AdaptiveLasso(LassoConfig::default()));
        Ok(Self {
            truth,
            n,
            replications,
            estimators,
            collection: ModelCollection::complete(p, dmax)?,
            oracle_collection: ModelCollection::complete(p, 5)?,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub ci_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub estimator: String,
    pub risk_ratio: MetricSummary,
    pub power: MetricSummary,
    pub fdr: MetricSummary,
    /// Mean of `l(θ̂, θ)` itself.
    pub loss: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub generator: String,
    pub oracle_risk: f64,
    pub oracle_model: String,
    pub estimators: Vec<EstimatorReport>,
}

impl ExperimentReport {
    pub fn get(&self, label: &str) -> Option<&EstimatorReport> {
        self.estimators.iter().find(|e| e.estimator == label)
    }
}

/// Per-replication contributions `(power, fdr)`.
///
/// A coordinate counts as discovered when `θ̂_i ≠ 0` exactly. With no
/// discovery the FDR contribution is 0.
pub fn power_and_fdr(theta_true: &DVector<f64>, theta_hat: &DVector<f64>) -> Result<(f64, f64)> {
    if theta_true.len() != theta_hat.len() {
        return Err(Error::LengthMismatch {
            expected: theta_true.len(),
            got: theta_hat.len(),
        });
    }
    let signal = theta_true.iter().filter(|v| **v != 0.0).count();
    if signal == 0 {
        return Err(Error::NoTrueSignal);
    }
    let mut true_pos = 0usize;
    let mut false_pos = 0usize;
    for (t, h) in theta_true.iter().zip(theta_hat.iter()) {
        if *h != 0.0 {
            if *t != 0.0 {
                true_pos += 1;
            } else {
                false_pos += 1;
            }
        }
    }
    let discoveries = true_pos + false_pos;
    let fdr = if discoveries == 0 {
        0.0
    } else {
        false_pos as f64 / discoveries as f64
    };
    Ok((true_pos as f64 / signal as f64, fdr))
}

/// `min_{m ∈ c} E[l(θ̂_m, θ)]` from the closed-form risk, with its minimizer.
pub fn oracle_denominator(truth: &GroundTruth, n: usize, c: &ModelCollection) -> Result<(f64, Model)> {
    let mut best: Option<(f64, Model)> = None;
    for m in c.enumerate() {
        let r = closed_form_risk(truth, &m, n)?;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, m));
        }
    }
    best.ok_or(Error::EmptyCollection)
}

/// Neumaier-compensated mean and sample standard deviation.
pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and CI half-width divided by `scale`; `0/0` is read as a ratio of 1
/// for the mean and 0 for the width (noiseless truth with a perfect fit).
fn summarize(values: &[f64], scale: f64) -> MetricSummary {
    let (mean, sd) = mean_sd(values);
    let half = Z95 * sd / (values.len() as f64).sqrt();
    MetricSummary {
        mean: if mean == 0.0 && scale == 0.0 { 1.0 } else { mean / scale },
        ci_half_width: if half == 0.0 { 0.0 } else { half / scale },
    }
}

/// `(loss, power, fdr)` for each estimator, in configuration order.
fn run_replication(cfg: &ExperimentConfig, rep: u64) -> Result<Vec<(f64, f64, f64)>> {
    let data = sample_dataset(&cfg.truth, cfg.n, &cfg.seed, rep)?;
    let specs: Vec<PenaltySpec> = cfg
        .estimators
        .iter()
        .filter_map(|e| match e {
            EstimatorSpec::Penalized(s) => Some(*s),
            _ => None,
        })
        .collect();
    let selections = if specs.is_empty() {
        Vec::new()
    } else {
        select_many(&data, &cfg.collection, &specs, false)?
    };
    let mut selections = selections.into_iter();
    let mut lasso_fits: Vec<(LassoConfig, crate::baselines::LassoFit)> = Vec::new();
    let mut lasso_for = |c: &LassoConfig| -> Result<crate::baselines::LassoFit> {
        if let Some((_, f)) = lasso_fits.iter().find(|(k, _)| k == c) {
            return Ok(f.clone());
        }
        let f = lasso_cv(&data, c)?;
        lasso_fits.push((c.clone(), f.clone()));
        Ok(f)
    };
    let mut out = Vec::with_capacity(cfg.estimators.len());
    for e in &cfg.estimators {
        let estimate = match e {
            EstimatorSpec::Penalized(_) => selections.next().expect("one selection per spec").estimate,
            EstimatorSpec::Lasso(c) => lasso_for(c)?.estimate,
            EstimatorSpec::AdaptiveLasso(c) => {
                let init = lasso_for(c)?;
                adaptive_lasso_cv(&data, c, Some(&init))?.estimate
            }
        };
        let loss = population_loss(&cfg.truth, &estimate, cfg.truth.theta())?;
        let (power, fdr) = power_and_fdr(cfg.truth.theta(), &estimate)?;
        out.push((loss, power, fdr));
    }
    Ok(out)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (oracle_risk, oracle_model) = oracle_denominator(&cfg.truth, cfg.n, &cfg.oracle_collection)?;
    let per_rep: Vec<Result<Vec<(f64, f64, f64)>>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            run_replication(cfg, rep).map_err(|e| Error::Replication {
                rep,
                source: Box::new(e),
            })
        })
        .collect();
    let per_rep: Vec<Vec<(f64, f64, f64)>> = per_rep.into_iter().collect::<Result<_>>()?;

    let estimators = cfg
        .estimators
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let losses: Vec<f64> = per_rep.iter().map(|r| r[i].0).collect();
            let powers: Vec<f64> = per_rep.iter().map(|r| r[i].1).collect();
            let fdrs: Vec<f64> = per_rep.iter().map(|r| r[i].2).collect();
            EstimatorReport {
                estimator: e.label(),
                risk_ratio: summarize(&losses, oracle_risk),
                power: summarize(&powers, 1.0),
                fdr: summarize(&fdrs, 1.0),
                loss: summarize(&losses, 1.0),
            }
        })
        .collect();
    Ok(ExperimentReport {
        n: cfg.n,
        replications: cfg.replications,
        seed: cfg.seed.master_seed,
        generator: GENERATOR_VERSION.into(),
        oracle_risk,
        oracle_model: oracle_model.to_string(),
        estimators,
    })
}

/// Monte-Carlo mean, its standard error, and the closed-form target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCheck {
    pub mc_mean: f64,
    pub std_error: f64,
    pub expected: f64,
}

impl MeanCheck {
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.mc_mean == self.expected {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mc_mean - self.expected) / self.std_error
        }
    }

    pub fn within(&self, n_se: f64) -> bool {
        self.z_score().abs() <= n_se
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma21Report {
    pub model: String,
    pub n: usize,
    pub reps: usize,
    /// `γ(θ̂_m) = σ² + l(θ̂_m, θ)` against `(l(θ_m,θ) + σ²)(1 + d/(n−d−1))`.
    pub prediction_error: MeanCheck,
    /// `γ_n(θ̂_m)` against `(l(θ_m,θ) + σ²)(1 − d/n)`.
    pub empirical_error: MeanCheck,
    pub pass: bool,
}

/// Checks both risk identities of the fixed-model estimator to 4 standard errors.
pub fn verify_lemma21(truth: &GroundTruth, m: &Model, n: usize, reps: usize, seed: SeedSpec) -> Result<Lemma21Report> {
    let d = m.dim();
    if n < d + 2 {
        return Err(Error::DimensionTooLarge {
            model: m.clone(),
            dim: d,
            n,
        });
    }
    if reps < 2 {
        return Err(Error::InvalidParameter("need at least two replications".into()));
    }
    let theta_m = project_theta(truth, m)?;
    let bias = population_loss(truth, &theta_m, truth.theta())?;
    let base = bias + truth.noise_var();
    let (df, nf) = (d as f64, n as f64);

    let draws: Vec<Result<(f64, f64)>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let data = sample_dataset(truth, n, &seed, rep)?;
            let fit = fit_least_squares(&data, m)?;
            let gamma = truth.noise_var() + population_loss(truth, &fit.coefficients, truth.theta())?;
            Ok((gamma, fit.empirical_loss))
        })
        .collect();
    let draws: Vec<(f64, f64)> = draws.into_iter().collect::<Result<_>>()?;
    let check = |values: Vec<f64>, expected: f64| {
        let (mean, sd) = mean_sd(&values);
        MeanCheck {
            mc_mean: mean,
            std_error: sd / (values.len() as f64).sqrt(),
            expected,
        }
    };
    let prediction_error = check(draws.iter().map(|v| v.0).collect(), base * (1.0 + df / (nf - df - 1.0)));
    let empirical_error = check(draws.iter().map(|v| v.1).collect(), base * (1.0 - df / nf));
    Ok(Lemma21Report {
        model: m.to_string(),
        n,
        reps,
        pass: prediction_error.within(4.0) && empirical_error.within(4.0),
        prediction_error,
        empirical_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalPenaltyReport {
    pub n: usize,
    pub p: usize,
    pub nu: f64,
    pub reps: usize,
    /// Frequency of `d_m̂ ≥ n/4` under `pen = (1−ν) d/(n−d)`.
    pub under_frequency: f64,
    /// Same frequency under FPE (`K = 2`).
    pub control_frequency: f64,
    /// Whether the run lies in the regime where the frequencies are asserted.
    pub asserted: bool,
    pub pass: bool,
}

/// Over-fitting under a penalty below `d/(n−d)`: selection over
/// `{∅, {1}, …, {1..⌊n/2⌋}}` with `pen = (1−ν) d/(n−d)` against the FPE control.
///
/// Asserted (frequency ≥ 0.9, control ≤ 0.1) for `n ≥ 60` and `ν ≥ 0.5`.
pub fn verify_minimal_penalty(
    n: usize,
    p: usize,
    nu: f64,
    reps: usize,
    seed: SeedSpec,
    theta: Option<DVector<f64>>,
) -> Result<MinimalPenaltyReport> {
    if 2 * p < n {
        return Err(Error::InvalidParameter(format!("need p >= n/2, got p = {p}, n = {n}")));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must lie in (0, 1)")));
    }
    let theta = theta.unwrap_or_else(|| DVector::zeros(p));
    let truth = GroundTruth::new(theta, DMatrix::identity(p, p), 1.0)?;
    let c = ModelCollection::ordered(p, n / 2)?;
    let specs = [PenaltySpec::Minimal { k: 1.0 - nu }, PenaltySpec::Minimal { k: 2.0 }];
    let quarter = n as f64 / 4.0;
    let hits: Vec<Result<(bool, bool)>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let data = sample_dataset(&truth, n, &seed, rep)?;
            let r = select_many(&data, &c, &specs, false)?;
            Ok((r[0].chosen.dim() as f64 >= quarter, r[1].chosen.dim() as f64 >= quarter))
        })
        .collect();
    let hits: Vec<(bool, bool)> = hits.into_iter().collect::<Result<_>>()?;
    let freq = |f: fn(&(bool, bool)) -> bool| hits.iter().filter(|h| f(h)).count() as f64 / reps as f64;
    let under_frequency = freq(|h| h.0);
    let control_frequency = freq(|h| h.1);
    let asserted = n >= 60 && nu >= 0.5;
    Ok(MinimalPenaltyReport {
        n,
        p,
        nu,
        reps,
        under_frequency,
        control_frequency,
        asserted,
        pass: !asserted || (under_frequency >= 0.9 && control_frequency <= 0.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationKind {
    /// `P(χ²(d) ≤ d − 2√(dx)) ≤ e^{−x}`
    Chi2Lower,
    /// `P(χ²(d) ≥ d + 2√(dx) + 2x) ≤ e^{−x}`
    Chi2Upper,
    /// `P(χ²(d) ≤ d ((1 − δ_d − √(2x/d)) ∨ 0)²) ≤ e^{−x}`, `δ_d = √(π/(2d)) + e^{−d/16}`
    Chi2Refined,
    /// `P(φ_max((ZᵀZ)⁻¹) ≥ [n (1 − √(d/n) − x)²]⁻¹) ≤ e^{−nx²/2}`
    WishartInv,
    /// `P(φ_max(ZᵀZ) ≥ n (1 + √(d/n) + x)²) ≤ e^{−nx²/2}`
    WishartMax,
}

impl ConcentrationKind {
    pub const ALL: [ConcentrationKind; 5] = [
        ConcentrationKind::Chi2Lower,
        ConcentrationKind::Chi2Upper,
        ConcentrationKind::Chi2Refined,
        ConcentrationKind::WishartInv,
        ConcentrationKind::WishartMax,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConcentrationKind::Chi2Lower => "chi2_lower",
            ConcentrationKind::Chi2Upper => "chi2_upper",
            ConcentrationKind::Chi2Refined => "chi2_refined",
            ConcentrationKind::WishartInv => "wishart_inv",
            ConcentrationKind::WishartMax => "wishart_max",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn is_wishart(&self) -> bool {
        matches!(self, ConcentrationKind::WishartInv | ConcentrationKind::WishartMax)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Pass,
    Fail,
    /// The bound is below `20/reps`, so the tail cannot be observed.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationCell {
    pub kind: ConcentrationKind,
    pub d: usize,
    pub x: f64,
    /// Sample size of the Wishart matrix (unused for χ² kinds).
    pub n: usize,
    pub reps: usize,
    pub bound: f64,
    pub threshold: f64,
    pub frequency: Option<f64>,
    /// `bound + 3 √(bound (1 − bound) / reps)`
    pub allowed: f64,
    /// For `WishartMax`, the frequency of the event as literally displayed,
    /// `φ_max(ZᵀZ) ≤ n (1 + √(d/n) + x)²`; reported, never asserted.
    pub literal_frequency: Option<f64>,
    pub status: CellStatus,
}

/// Default Wishart sample size for dimension `d`: small enough that the
/// `e^{−nx²/2}` tails stay observable, large enough for the inverse bound to
/// have a positive threshold at `x = 0.5`.
pub fn default_wishart_n(kind: ConcentrationKind, d: usize) -> usize {
    match kind {
        ConcentrationKind::WishartInv => 8 * d,
        _ => 2 * d,
    }
}

/// Empirical tail frequency of one deviation bound.
pub fn verify_concentration(
    kind: ConcentrationKind,
    d: usize,
    x: f64,
    n: Option<usize>,
    reps: usize,
    seed: SeedSpec,
) -> Result<ConcentrationCell> {
    if d == 0 || !(x > 0.0) || reps == 0 {
        return Err(Error::InvalidParameter("need d >= 1, x > 0, reps >= 1".into()));
    }
    let n = n.unwrap_or_else(|| default_wishart_n(kind, d));
    if kind.is_wishart() && n <= d {
        return Err(Error::InvalidParameter(format!("Wishart needs n > d, got n = {n}, d = {d}")));
    }
    let (df, nf) = (d as f64, n as f64);
    let (bound, threshold) = match kind {
        ConcentrationKind::Chi2Lower => ((-x).exp(), df - 2.0 * (df * x).sqrt()),
        ConcentrationKind::Chi2Upper => ((-x).exp(), df + 2.0 * (df * x).sqrt() + 2.0 * x),
        ConcentrationKind::Chi2Refined => {
            let delta = (std::f64::consts::PI / (2.0 * df)).sqrt() + (-df / 16.0).exp();
            let base = (1.0 - delta - (2.0 * x / df).sqrt()).max(0.0);
            ((-x).exp(), df * base * base)
        }
        // φ_max((ZᵀZ)⁻¹) ≥ 1/t  ⟺  φ_min(ZᵀZ) ≤ t; a nonpositive base leaves an empty event
        ConcentrationKind::WishartInv => {
            let base = (1.0 - (df / nf).sqrt() - x).max(0.0);
            ((-nf * x * x / 2.0).exp(), nf * base * base)
        }
        ConcentrationKind::WishartMax => ((-nf * x * x / 2.0).exp(), nf * (1.0 + (df / nf).sqrt() + x).powi(2)),
    };
    let allowed = bound + 3.0 * (bound * (1.0 - bound) / reps as f64).sqrt();
    let mut cell = ConcentrationCell {
        kind,
        d,
        x,
        n,
        reps,
        bound,
        threshold,
        frequency: None,
        allowed,
        literal_frequency: None,
        status: CellStatus::Skipped,
    };
    if bound < 20.0 / reps as f64 {
        return Ok(cell);
    }

    // (event, literal-reading event)
    let draws: Vec<(bool, bool)> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = seed.stream(rep);
            match kind {
                ConcentrationKind::Chi2Lower | ConcentrationKind::Chi2Refined => {
                    let q = chi_square(&mut rng, d);
                    (q <= threshold && threshold > 0.0, false)
                }
                ConcentrationKind::Chi2Upper => (chi_square(&mut rng, d) >= threshold, false),
                ConcentrationKind::WishartInv => {
                    let (min, _) = wishart_extremes(&mut rng, n, d);
                    (threshold > 0.0 && min <= threshold, false)
                }
                ConcentrationKind::WishartMax => {
                    let (_, max) = wishart_extremes(&mut rng, n, d);
                    (max >= threshold, max <= threshold)
                }
            }
        })
        .collect();
    let count = |f: fn(&(bool, bool)) -> bool| draws.iter().filter(|v| f(v)).count() as f64 / reps as f64;
    let freq = count(|v| v.0);
    cell.frequency = Some(freq);
    if kind == ConcentrationKind::WishartMax {
        cell.literal_frequency = Some(count(|v| v.1));
    }
    cell.status = if freq <= allowed { CellStatus::Pass } else { CellStatus::Fail };
    Ok(cell)
}

/// Every cell of the grid `d ∈ {5, 20, 100}`, `x ∈ {0.5, 1, 2}` for every kind.
pub fn concentration_grid(reps: usize, seed: SeedSpec) -> Result<Vec<ConcentrationCell>> {
    let mut out = Vec::new();
    for (ki, kind) in ConcentrationKind::ALL.into_iter().enumerate() {
        for (di, d) in [5usize, 20, 100].into_iter().enumerate() {
            for (xi, x) in [0.5, 1.0, 2.0].into_iter().enumerate() {
                let salt = (ki * 100 + di * 10 + xi) as u64;
                out.push(verify_concentration(kind, d, x, None, reps, seed.derive(salt))?);
            }
        }
    }
    Ok(out)
}

fn chi_square(rng: &mut impl Rng, d: usize) -> f64 {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum()
}

fn wishart_extremes(rng: &mut impl Rng, n: usize, d: usize) -> (f64, f64) {
    let z = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let gram = z.transpose() * &z;
    let eig = gram.symmetric_eigen().eigenvalues;
    (eig.min(), eig.max())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpeTrendPoint {
    pub n: usize,
    pub median_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpeTrendReport {
    pub s: f64,
    pub reps: usize,
    pub points: Vec<FpeTrendPoint>,
    pub nonincreasing: bool,
    pub pass: bool,
}

/// Upper limit on the median oracle ratio at the largest sample size.
pub const FPE_FINAL_RATIO_MAX: f64 = 1.5;

/// `θ_i = amplitude · i^{−(1+s)/2}`, so consecutive nested models differ in
/// bias by `amplitude² · i^{−(1+s)}` under `Σ = I`.
pub fn polynomial_truth(p: usize, s: f64, amplitude: f64) -> Result<GroundTruth> {
    let theta = DVector::from_fn(p, |i, _| amplitude * ((i + 1) as f64).powf(-(1.0 + s) / 2.0));
    GroundTruth::new(theta, DMatrix::identity(p, p), 1.0)
}

/// `l(θ̃, θ) / min_m l(θ̂_m, θ)` over `{∅, …, {1..⌊n/2⌋}}` for each penalty in `ks`.
fn ordered_oracle_ratios(truth: &GroundTruth, data: &DataSet, ks: &[f64]) -> Result<Vec<f64>> {
    let n = data.n();
    let c = ModelCollection::ordered(truth.p(), n / 2)?;
    let specs: Vec<PenaltySpec> = ks.iter().map(|&k| PenaltySpec::Minimal { k }).collect();
    let selections = select_many(data, &c, &specs, false)?;
    let mut ws = LsWorkspace::default();
    ws.factor(data, &Model::prefix(n / 2))?;
    let mut best = f64::INFINITY;
    for k in 0..=n / 2 {
        let beta = ws.solve_prefix(k);
        let mut est = DVector::zeros(truth.p());
        est.rows_mut(0, k).copy_from_slice(&beta);
        best = best.min(population_loss(truth, &est, truth.theta())?);
    }
    selections
        .iter()
        .map(|s| Ok(population_loss(truth, &s.estimate, truth.theta())? / best))
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Median oracle ratio of FPE over nested selection for each `n` in the grid.
pub fn verify_fpe_trend(
    n_grid: &[usize],
    s: f64,
    amplitude: f64,
    reps: usize,
    seed: SeedSpec,
) -> Result<FpeTrendReport> {
    if n_grid.is_empty() || reps == 0 {
        return Err(Error::InvalidParameter("empty grid or no replications".into()));
    }
    let p = n_grid.iter().max().copied().unwrap_or(0) / 2;
    let truth = polynomial_truth(p.max(1), s, amplitude)?;
    let mut points = Vec::new();
    for (gi, &n) in n_grid.iter().enumerate() {
        let stream = seed.derive(gi as u64);
        let ratios: Vec<Result<f64>> = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let data = sample_dataset(&truth, n, &stream, rep)?;
                Ok(ordered_oracle_ratios(&truth, &data, &[2.0])?[0])
            })
            .collect();
        let ratios: Vec<f64> = ratios.into_iter().collect::<Result<_>>()?;
        points.push(FpeTrendPoint {
            n,
            median_ratio: median(ratios),
        });
    }
    let nonincreasing = points.windows(2).all(|w| w[1].median_ratio <= w[0].median_ratio);
    let last = points.last().map_or(f64::INFINITY, |p| p.median_ratio);
    Ok(FpeTrendReport {
        s,
        reps,
        nonincreasing,
        pass: nonincreasing && last <= FPE_FINAL_RATIO_MAX,
        points,
    })
}

/// Fraction of paired replications where `K = 3` attains an oracle ratio no
/// worse than `K = 2` (nested selection, polynomially decaying `θ`).
pub fn compare_k3_k2(n: usize, s: f64, amplitude: f64, reps: usize, seed: SeedSpec) -> Result<f64> {
    let truth = polynomial_truth((n / 2).max(1), s, amplitude)?;
    let wins: Vec<Result<bool>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let data = sample_dataset(&truth, n, &seed, rep)?;
            let r = ordered_oracle_ratios(&truth, &data, &[2.0, 3.0])?;
            Ok(r[1] <= r[0])
        })
        .collect();
    let wins: Vec<bool> = wins.into_iter().collect::<Result<_>>()?;
    Ok(wins.iter().filter(|w| **w).count() as f64 / reps as f64)
}

/// Empirical `γ_n` over a single draw, exposed for bindings.
pub fn empirical_risk_draw(truth: &GroundTruth, m: &Model, n: usize, rng: &mut impl Rng) -> Result<f64> {
    let data = sample_with(truth, n, rng)?;
    let fit = fit_least_squares(&data, m)?;
    empirical_loss(&data, &fit.coefficients)
}

/// The risk-identity configurations checked by the `lemma21` suite:
/// `(label, truth, model, n)`. They cover the null model, a well-specified
/// model, a misspecified model, the correlated `Σ₂` design and a circulant
/// correlation.
pub fn lemma21_configurations() -> Result<Vec<(String, GroundTruth, Model, usize)>> {
    let mut out = Vec::new();
    let ident = |p: usize| DMatrix::identity(p, p);

    out.push((
        "identity, theta = 0, empty model".to_string(),
        GroundTruth::new(DVector::zeros(5), ident(5), 2.0)?,
        Model::empty(),
        10,
    ));

    let mut theta = DVector::zeros(5);
    theta[0] = 1.0;
    out.push((
        "identity, theta = e1, model {1}".to_string(),
        GroundTruth::new(theta, ident(5), 1.0)?,
        Model::prefix(1),
        20,
    ));

    let mut theta = DVector::zeros(10);
    theta[0] = 2.0;
    theta[1] = 1.0;
    theta[2] = 0.5;
    out.push((
        "identity, misspecified model {1,2}".to_string(),
        GroundTruth::new(theta, ident(10), 1.0)?,
        Model::prefix(2),
        15,
    ));

    let mut theta = DVector::zeros(20);
    theta[0] = 40.0;
    theta[1] = 40.0;
    out.push((
        "sigma2, model {1,3}".to_string(),
        GroundTruth::new(theta, build_sigma2(20)?, 1.0)?,
        Model::new(vec![0, 2], 20)?,
        30,
    ));

    let sigma = crate::stochastic::CovarianceKind::ExpCirculant { p: 11, omega: 0.5 }.build()?;
    let mut theta = DVector::zeros(11);
    theta[0] = 1.0;
    theta[1] = -1.0;
    theta[5] = 0.5;
    out.push((
        "exp circulant (omega = 0.5), model {1,4,7}".to_string(),
        GroundTruth::new(theta, sigma, 0.5)?,
        Model::new(vec![0, 3, 6], 11)?,
        12,
    ));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CirculantCell {
    pub family: String,
    pub param: f64,
    pub p: usize,
    pub min_eigenvalue: f64,
    /// Largest gap between sorted DFT eigenvalues and a dense symmetric eigendecomposition.
    pub max_dft_error: f64,
    pub pass: bool,
}

/// `Ψ₁(ω)` for `ω ∈ {0.1, 0.5, 1, 2}` and `Ψ₂(t)` for `t ∈ {0.5, 1, 2}`, `p ∈ {11, 21, 51}`.
pub fn verify_circulant_psd() -> Result<Vec<CirculantCell>> {
    use crate::stochastic::{build_circulant, PSD_TOL};
    let mut out = Vec::new();
    for p in [11usize, 21, 51] {
        let families: Vec<(&str, f64)> = [0.1, 0.5, 1.0, 2.0]
            .iter()
            .map(|&w| ("exp", w))
            .chain([0.5, 1.0, 2.0].iter().map(|&t| ("poly", t)))
            .collect();
        for (family, param) in families {
            let c = match family {
                "exp" => build_circulant(p, |k| (-param * k as f64).exp())?,
                _ => build_circulant(p, |k| (1.0 + k as f64).powf(-param))?,
            };
            let mut dft = c.eigenvalues.clone();
            dft.sort_by(f64::total_cmp);
            let mut dense: Vec<f64> = c.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            dense.sort_by(f64::total_cmp);
            let max_dft_error = dft.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let min_eigenvalue = c.min_eigenvalue();
            out.push(CirculantCell {
                family: family.into(),
                param,
                p,
                min_eigenvalue,
                max_dft_error,
                pass: min_eigenvalue >= -PSD_TOL && max_dft_error <= 1e-8,
            });
        }
    }
    Ok(out)
}
