//! Penalized model selection:
//! `m̂ = argmin_m ‖Y − Π_m Y‖²_n (1 + pen(m))` and `θ̃ = θ̂_m̂`.

use nalgebra::DVector;

use crate::collections::{CollectionKind, ModelCollection};
use crate::error::{Error, Result};
use crate::penalties::PenaltySpec;
use crate::regression::{fit_least_squares, DataSet, LsWorkspace, Model};

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub chosen: Model,
    pub estimate: DVector<f64>,
    /// Criterion value of the chosen model.
    pub criterion: f64,
    /// Every model with its criterion, in enumeration order. Empty unless an
    /// audit was requested.
    pub criterion_values: Vec<(Model, f64)>,
    pub penalty_used: PenaltySpec,
}

/// `Crit(m) = ‖Y − Π_m Y‖²_n (1 + pen)`.
pub fn criterion(data: &DataSet, m: &Model, pen_value: f64) -> Result<f64> {
    let mut ws = LsWorkspace::default();
    let rss = ws.factor(data, m)?;
    Ok(rss / data.n() as f64 * (1.0 + pen_value))
}

/// Selects a model from `c` with the penalty `spec`, keeping the full criterion audit.
pub fn select(data: &DataSet, c: &ModelCollection, spec: PenaltySpec) -> Result<SelectionResult> {
    let mut out = select_many(data, c, &[spec], true)?;
    Ok(out.remove(0))
}

/// Runs the selection for several penalties while fitting each model only once.
///
/// Ties (within `1e-12 · min(1, ‖Y‖²_n)`) go to the model that comes first in
/// enumeration order: smallest dimension, then lexicographically smallest.
pub fn select_many(
    data: &DataSet,
    c: &ModelCollection,
    specs: &[PenaltySpec],
    audit: bool,
) -> Result<Vec<SelectionResult>> {
    let n = data.n();
    if c.p() != data.p() {
        return Err(Error::InvalidCollection(format!(
            "collection has p = {}, data has p = {}",
            c.p(),
            data.p()
        )));
    }
    if c.is_empty() {
        return Err(Error::EmptyCollection);
    }
    if let Some(m) = c.enumerate().find(|m| m.dim() >= n) {
        return Err(Error::DimensionTooLarge {
            dim: m.dim(),
            model: m,
            n,
        });
    }
    for s in specs {
        s.validate()?;
    }

    let scale = data.y().norm_squared() / n as f64;
    let slack = 1e-12 * scale.min(1.0);

    // Penalties that only depend on the dimension are tabulated once.
    let max_dim = c.max_dim();
    let tables: Vec<Option<Vec<f64>>> = specs
        .iter()
        .map(|s| {
            if matches!(s, PenaltySpec::Prior { .. }) {
                Ok(None)
            } else {
                (0..=max_dim)
                    .map(|d| s.value(c, &Model::prefix(d), n))
                    .collect::<Result<Vec<_>>>()
                    .map(Some)
            }
        })
        .collect::<Result<_>>()?;

    let mut best: Vec<Option<(Model, f64)>> = vec![None; specs.len()];
    let mut audits: Vec<Vec<(Model, f64)>> = vec![Vec::new(); specs.len()];

    let mut visit = |m: Model, rss: f64| -> Result<()> {
        let gamma_n = rss / n as f64;
        for (i, spec) in specs.iter().enumerate() {
            let pen = match &tables[i] {
                Some(t) => t[m.dim()],
                None => spec.value(c, &m, n)?,
            };
            let crit = gamma_n * (1.0 + pen);
            let better = match &best[i] {
                None => true,
                Some((_, b)) => crit < b - slack,
            };
            if audit {
                audits[i].push((m.clone(), crit));
            }
            if better {
                best[i] = Some((m.clone(), crit));
            }
        }
        Ok(())
    };

    let mut ws = LsWorkspace::default();
    match c.kind() {
        CollectionKind::Ordered { max_dim } => {
            // One QR of the largest nested model gives every prefix residual.
            ws.factor(data, &Model::prefix(*max_dim))?;
            let tail = nested_residuals(&ws, n);
            for (d, rss) in tail.into_iter().enumerate().take(max_dim + 1) {
                visit(Model::prefix(d), rss)?;
            }
        }
        _ => {
            for m in c.enumerate() {
                let rss = ws.factor(data, &m)?;
                visit(m, rss)?;
            }
        }
    }

    best.into_iter()
        .zip(audits)
        .zip(specs)
        .map(|((b, criterion_values), spec)| {
            let (chosen, crit) = b.expect("collection is nonempty");
            let estimate = fit_least_squares(data, &chosen)?.coefficients;
            Ok(SelectionResult {
                chosen,
                estimate,
                criterion: crit,
                criterion_values,
                penalty_used: *spec,
            })
        })
        .collect()
}

/// Residual sums of squares of the prefixes `{1..k}`, `k = 0..=d`, read off the
/// rotated response `Qᵀ Y` of a single factorization.
fn nested_residuals(ws: &LsWorkspace, n: usize) -> Vec<f64> {
    let b = ws.rotated_response();
    let mut out = vec![0.0; ws.dim() + 1];
    let mut acc: f64 = b[ws.dim()..n].iter().map(|v| v * v).sum();
    out[ws.dim()] = acc;
    for k in (0..ws.dim()).rev() {
        acc += b[k] * b[k];
        out[k] = acc;
    }
    out
}
