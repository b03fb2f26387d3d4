//! Penalty functions `pen(m)` and the collection-size assumptions under which
//! the risk bounds for the penalized estimator hold.
//!
//! Every penalty depends on a model only through its dimension (and the
//! collection's complexity `H(d)` or the prior weight `l_m`), so the
//! functions here take scalars.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::collections::ModelCollection;
use crate::error::{Error, Result};
use crate::regression::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltySpec {
    /// `K d/(n−d)`; `K = 2` is FPE. Any `K > 0` is accepted.
    Minimal { k: f64 },
    /// `d/(n−d) (2 + (d+1)/(n−d−1))`, the unbiased-risk heuristic.
    Heuristic,
    /// `K d/(n−d) (1 + √(2 H(d)))²` with the collection's complexity.
    Complexity { k: f64 },
    /// `K d/(n−d) (1 + √(2 log(e p/d)))²` for complete selection.
    Complete { k: f64 },
    /// `K d/(n−d) (1 + √(2 l_m))²` with `l_m` from the collection's priors.
    Prior { k: f64 },
}

impl PenaltySpec {
    pub fn k(&self) -> Option<f64> {
        match *self {
            PenaltySpec::Minimal { k }
            | PenaltySpec::Complexity { k }
            | PenaltySpec::Complete { k }
            | PenaltySpec::Prior { k } => Some(k),
            PenaltySpec::Heuristic => None,
        }
    }

    /// Builds a penalty from its lower-case name (`minimal`, `heuristic`,
    /// `complexity`, `complete`, `prior`). `k` is ignored by `heuristic`.
    pub fn from_name(name: &str, k: f64) -> Result<Self> {
        let spec = match name {
            "minimal" => PenaltySpec::Minimal { k },
            "heuristic" => PenaltySpec::Heuristic,
            "complexity" => PenaltySpec::Complexity { k },
            "complete" => PenaltySpec::Complete { k },
            "prior" => PenaltySpec::Prior { k },
            other => return Err(Error::InvalidParameter(format!("unknown penalty '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.k() {
            Some(k) if !(k > 0.0) || !k.is_finite() => {
                Err(Error::InvalidParameter(format!("penalty constant K = {k} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// Penalty of model `m` in collection `c` for a sample of size `n`.
    pub fn value(&self, c: &ModelCollection, m: &Model, n: usize) -> Result<f64> {
        let d = m.dim();
        let out = match *self {
            PenaltySpec::Minimal { k } => pen_minimal(k, d, n),
            PenaltySpec::Heuristic => pen_heuristic(d, n),
            PenaltySpec::Complexity { k } => pen_complexity(k, d, n, c.complexity_h(d)),
            PenaltySpec::Complete { k } => pen_complete(k, d, n, c.p()),
            PenaltySpec::Prior { k } => {
                if d == 0 {
                    pen_prior(k, 0, n, 0.0)
                } else {
                    pen_prior(k, d, n, c.prior_l(m)?)
                }
            }
        };
        out.map_err(|e| match e {
            Error::DimensionTooLarge { dim, n, .. } => Error::DimensionTooLarge {
                model: m.clone(),
                dim,
                n,
            },
            other => other,
        })
    }
}

impl fmt::Display for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltySpec::Minimal { k } => write!(f, "minimal(K={k})"),
            PenaltySpec::Heuristic => write!(f, "heuristic"),
            PenaltySpec::Complexity { k } => write!(f, "complexity(K={k})"),
            PenaltySpec::Complete { k } => write!(f, "complete(K={k})"),
            PenaltySpec::Prior { k } => write!(f, "prior(K={k})"),
        }
    }
}

fn too_large(d: usize, n: usize) -> Error {
    Error::DimensionTooLarge {
        model: Model::prefix(d),
        dim: d,
        n,
    }
}

fn ratio(d: usize, n: usize) -> Result<f64> {
    if d >= n {
        return Err(too_large(d, n));
    }
    Ok(d as f64 / (n - d) as f64)
}

pub fn pen_minimal(k: f64, d: usize, n: usize) -> Result<f64> {
    Ok(k * ratio(d, n)?)
}

pub fn pen_heuristic(d: usize, n: usize) -> Result<f64> {
    if d + 2 > n {
        return Err(too_large(d, n));
    }
    Ok(ratio(d, n)? * (2.0 + (d + 1) as f64 / (n - d - 1) as f64))
}

pub fn pen_complexity(k: f64, d: usize, n: usize, h: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::InvalidParameter(format!("complexity {h} must be nonnegative")));
    }
    let r = ratio(d, n)?;
    Ok(k * r * (1.0 + (2.0 * h).sqrt()).powi(2))
}

pub fn pen_complete(k: f64, d: usize, n: usize, p: usize) -> Result<f64> {
    if d == 0 {
        return Ok(0.0);
    }
    if d > p {
        return Err(Error::InvalidParameter(format!("dimension {d} exceeds p = {p}")));
    }
    let r = ratio(d, n)?;
    let log_term = 1.0 + (p as f64 / d as f64).ln();
    Ok(k * r * (1.0 + (2.0 * log_term).sqrt()).powi(2))
}

pub fn pen_prior(k: f64, d: usize, n: usize, l_m: f64) -> Result<f64> {
    if d == 0 {
        return ratio(0, n).map(|_| 0.0);
    }
    if !(l_m >= 0.0) {
        return Err(Error::InvalidParameter(format!("l_m = {l_m} must be nonnegative")));
    }
    let r = ratio(d, n)?;
    Ok(k * r * (1.0 + (2.0 * l_m).sqrt()).powi(2))
}

/// Largest admissible `η` for a penalty constant `K > 1`:
/// `max((1 − 2 (3/(K+2))^{1/6})₊², (1 − (3/(K+2))^{1/6})₊² / 4)`.
///
/// Both bases are clamped at zero before squaring so the function starts at 0
/// for `K → 1⁺` and increases to 1.
pub fn eta_of_k(k: f64) -> Result<f64> {
    if !(k > 1.0) {
        return Err(Error::InvalidK(k));
    }
    let root = (3.0 / (k + 2.0)).powf(1.0 / 6.0);
    let first = (1.0 - 2.0 * root).max(0.0).powi(2);
    let second = (1.0 - root).max(0.0).powi(2) / 4.0;
    Ok(first.max(second))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub holds: bool,
    /// Largest value of the left-hand side over the collection.
    pub max_lhs: f64,
    pub diagnostic: Option<String>,
}

/// Checks `(1 + √(2 H(d_m)))² d_m/(n − d_m) ≤ η < η(K)` for every model of `c`;
/// for collections with priors, `l_m` replaces `H(d_m)`.
pub fn check_assumption(c: &ModelCollection, k: f64, n: usize, eta: f64) -> AssumptionCheck {
    let mut max_lhs = 0.0f64;
    let fail = |max_lhs: f64, msg: String| AssumptionCheck {
        holds: false,
        max_lhs,
        diagnostic: Some(msg),
    };
    let eta_k = match eta_of_k(k) {
        Ok(v) => v,
        Err(e) => return fail(f64::NAN, e.to_string()),
    };
    if !(eta > 0.0) {
        return fail(f64::NAN, format!("eta = {eta} must be positive"));
    }
    if eta >= eta_k {
        return fail(f64::NAN, format!("eta = {eta} is not below eta(K) = {eta_k:.6e} for K = {k}"));
    }
    let lhs = |d: usize, weight: f64| -> Option<f64> {
        (d < n).then(|| (1.0 + (2.0 * weight).sqrt()).powi(2) * d as f64 / (n - d) as f64)
    };
    for m in c.enumerate() {
        let d = m.dim();
        let weight = if c.has_priors() {
            if d == 0 {
                0.0
            } else {
                c.prior_l(&m).unwrap_or(f64::INFINITY)
            }
        } else {
            c.complexity_h(d)
        };
        match lhs(d, weight) {
            None => return fail(f64::INFINITY, format!("model {m} has dimension {d} >= n = {n}")),
            Some(v) => {
                max_lhs = max_lhs.max(v);
                if v > eta {
                    return fail(
                        v,
                        format!("model {m}: (1+sqrt(2w))^2 d/(n-d) = {v:.6} exceeds eta = {eta}"),
                    );
                }
            }
        }
    }
    AssumptionCheck {
        holds: true,
        max_lhs,
        diagnostic: None,
    }
}
