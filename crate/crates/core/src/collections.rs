//! Model collections: nested (ordered) selection, complete selection up to a
//! dimension cap, and explicit lists carrying optional prior weights.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::regression::Model;

/// Explicit priors whose total is this close to one are silently renormalized.
pub const PRIOR_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum CollectionKind {
    /// `∅, {1}, {1,2}, …, {1..max_dim}`.
    Ordered { max_dim: usize },
    /// Every subset of `{1..p}` of size at most `max_dim`.
    Complete { max_dim: usize },
    /// A user-supplied list, kept in enumeration order.
    Explicit {
        models: Vec<Model>,
        priors: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCollection {
    kind: CollectionKind,
    p: usize,
}

impl ModelCollection {
    pub fn ordered(p: usize, max_dim: usize) -> Result<Self> {
        if max_dim > p {
            return Err(Error::InvalidCollection(format!(
                "ordered collection up to {max_dim} exceeds p = {p}"
            )));
        }
        Ok(Self {
            kind: CollectionKind::Ordered { max_dim },
            p,
        })
    }

    pub fn complete(p: usize, max_dim: usize) -> Result<Self> {
        if max_dim > p {
            return Err(Error::InvalidCollection(format!(
                "complete collection up to {max_dim} exceeds p = {p}"
            )));
        }
        Ok(Self {
            kind: CollectionKind::Complete { max_dim },
            p,
        })
    }

    /// Explicit list of models; they are reordered by dimension then lexicographically.
    pub fn explicit(p: usize, models: Vec<Model>, priors: Option<Vec<f64>>) -> Result<Self> {
        if let Some(w) = &priors {
            if w.len() != models.len() {
                return Err(Error::InvalidCollection(format!(
                    "{} priors for {} models",
                    w.len(),
                    models.len()
                )));
            }
            if let Some(bad) = w.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(Error::InvalidCollection(format!("prior weight {bad} is not positive")));
            }
        }
        let mut seen = HashSet::new();
        for m in &models {
            if m.indices().last().is_some_and(|&j| j >= p) {
                return Err(Error::InvalidCollection(format!("model {m} exceeds p = {p}")));
            }
            if !seen.insert(m.clone()) {
                return Err(Error::InvalidCollection(format!("model {m} is listed twice")));
            }
        }
        let mut order: Vec<usize> = (0..models.len()).collect();
        order.sort_by(|&a, &b| models[a].selection_key().cmp(&models[b].selection_key()));
        let sorted: Vec<Model> = order.iter().map(|&i| models[i].clone()).collect();
        let priors = match priors {
            None => None,
            Some(w) => {
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > PRIOR_SUM_TOL {
                    return Err(Error::InvalidCollection(format!(
                        "prior weights sum to {total}, not 1"
                    )));
                }
                Some(order.iter().map(|&i| w[i] / total).collect())
            }
        };
        Ok(Self {
            kind: CollectionKind::Explicit {
                models: sorted,
                priors,
            },
            p,
        })
    }

    /// Parses the text format: one model per line, comma-separated 1-based
    /// indices, optionally followed by `: weight`. `#` starts a comment; the
    /// empty model is written `{}` (or nothing before the colon).
    pub fn parse_explicit(text: &str, p: usize) -> Result<Self> {
        let mut models = Vec::new();
        let mut priors = Vec::new();
        let mut with_prior = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::InvalidCollection(format!("line {}: {msg}", lineno + 1));
            let (indices, weight) = match line.split_once(':') {
                Some((a, b)) => (a.trim(), Some(b.trim())),
                None => (line, None),
            };
            match (with_prior, weight.is_some()) {
                (None, w) => with_prior = Some(w),
                (Some(a), b) if a != b => return Err(err("either every line or no line carries a prior".into())),
                _ => {}
            }
            let indices = indices.trim_start_matches('{').trim_end_matches('}').trim();
            let one_based = if indices.is_empty() {
                Vec::new()
            } else {
                indices
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|e| err(format!("bad index {t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?
            };
            let mut sorted = one_based.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(err("repeated index".into()));
            }
            models.push(Model::from_one_based(&one_based, p).map_err(|e| err(e.to_string()))?);
            if let Some(w) = weight {
                priors.push(w.parse::<f64>().map_err(|e| err(format!("bad weight {w:?}: {e}")))?);
            }
        }
        let priors = (with_prior == Some(true)).then_some(priors);
        Self::explicit(p, models, priors)
    }

    pub fn load_explicit(path: &Path, p: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_explicit(&text, p)
    }

    pub fn kind(&self) -> &CollectionKind {
        &self.kind
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn has_priors(&self) -> bool {
        matches!(&self.kind, CollectionKind::Explicit { priors: Some(_), .. })
    }

    /// Largest model dimension present.
    pub fn max_dim(&self) -> usize {
        match &self.kind {
            CollectionKind::Ordered { max_dim } | CollectionKind::Complete { max_dim } => *max_dim,
            CollectionKind::Explicit { models, .. } => models.last().map_or(0, Model::dim),
        }
    }

    /// Number of models at dimension `d`.
    pub fn count_at(&self, d: usize) -> u128 {
        match &self.kind {
            CollectionKind::Ordered { max_dim } => u128::from(d <= *max_dim),
            CollectionKind::Complete { max_dim } => {
                if d <= *max_dim {
                    binomial(self.p, d)
                } else {
                    0
                }
            }
            CollectionKind::Explicit { models, .. } => models.iter().filter(|m| m.dim() == d).count() as u128,
        }
    }

    pub fn len(&self) -> u128 {
        (0..=self.max_dim()).map(|d| self.count_at(d)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, m: &Model) -> bool {
        if m.indices().last().is_some_and(|&j| j >= self.p) {
            return false;
        }
        match &self.kind {
            CollectionKind::Ordered { max_dim } => m.dim() <= *max_dim && m.indices().iter().enumerate().all(|(a, &j)| a == j),
            CollectionKind::Complete { max_dim } => m.dim() <= *max_dim,
            CollectionKind::Explicit { models, .. } => self.explicit_position(models, m).is_some(),
        }
    }

    fn explicit_position(&self, models: &[Model], m: &Model) -> Option<usize> {
        models
            .binary_search_by(|probe| probe.selection_key().cmp(&m.selection_key()))
            .ok()
    }

    /// Streams the models by dimension, then lexicographically.
    pub fn enumerate(&self) -> ModelIter<'_> {
        match &self.kind {
            CollectionKind::Ordered { max_dim } => ModelIter::Ordered {
                next: 0,
                max_dim: *max_dim,
            },
            CollectionKind::Complete { max_dim } => ModelIter::Complete(Combinations::new(self.p, *max_dim)),
            CollectionKind::Explicit { models, .. } => ModelIter::Explicit(models.iter()),
        }
    }

    /// `H(d) = log(card{m : d_m = d}) / d`; zero when the count is 0 or 1.
    pub fn complexity_h(&self, d: usize) -> f64 {
        if d == 0 {
            return 0.0;
        }
        let log_count = match &self.kind {
            CollectionKind::Ordered { .. } => 0.0,
            CollectionKind::Complete { max_dim } => {
                if d > *max_dim {
                    0.0
                } else {
                    ln_binomial(self.p, d)
                }
            }
            CollectionKind::Explicit { .. } => {
                let c = self.count_at(d);
                if c <= 1 {
                    0.0
                } else {
                    (c as f64).ln()
                }
            }
        };
        log_count / d as f64
    }

    /// `l_m = −log π(m) / d_m`, with `l_∅ = 1`.
    pub fn prior_l(&self, m: &Model) -> Result<f64> {
        let CollectionKind::Explicit {
            models,
            priors: Some(priors),
        } = &self.kind
        else {
            return Err(Error::InvalidCollection("collection carries no prior weights".into()));
        };
        if m.is_empty() {
            return Ok(1.0);
        }
        let pos = self
            .explicit_position(models, m)
            .ok_or_else(|| Error::ModelNotInCollection(m.clone()))?;
        Ok(-priors[pos].ln() / m.dim() as f64)
    }

    /// Prior weights aligned with [`enumerate`](Self::enumerate).
    pub fn priors(&self) -> Option<&[f64]> {
        match &self.kind {
            CollectionKind::Explicit { priors: Some(w), .. } => Some(w),
            _ => None,
        }
    }
}

/// Largest advisable dimension cap for complete selection:
/// `⌊n / (2.5 (2 + log(max(p/n, 1))))⌋`, capped at `p` and floored at 1.
pub fn recommended_complete_dmax(n: usize, p: usize) -> usize {
    let ratio = (p as f64 / n as f64).max(1.0);
    let cap = (n as f64 / (2.5 * (2.0 + ratio.ln()))).floor() as usize;
    cap.min(p).max(1)
}

pub enum ModelIter<'a> {
    Ordered { next: usize, max_dim: usize },
    Complete(Combinations),
    Explicit(std::slice::Iter<'a, Model>),
}

impl Iterator for ModelIter<'_> {
    type Item = Model;

    fn next(&mut self) -> Option<Model> {
        match self {
            ModelIter::Ordered { next, max_dim } => {
                if *next > *max_dim {
                    return None;
                }
                *next += 1;
                Some(Model::prefix(*next - 1))
            }
            ModelIter::Complete(c) => c.next(),
            ModelIter::Explicit(it) => it.next().cloned(),
        }
    }
}

/// All `k`-subsets of `{0..p}` for `k = 0..=max_dim`, in lexicographic order within each size.
pub struct Combinations {
    p: usize,
    max_dim: usize,
    current: Vec<usize>,
    started: bool,
}

impl Combinations {
    fn new(p: usize, max_dim: usize) -> Self {
        Self {
            p,
            max_dim,
            current: Vec::new(),
            started: false,
        }
    }

    fn advance(&mut self) -> bool {
        let k = self.current.len();
        let p = self.p;
        // rightmost position that can still move
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.current[i] < p - k + i {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                return true;
            }
        }
        if k < self.max_dim {
            self.current = (0..=k).collect();
            true
        } else {
            false
        }
    }
}

impl Iterator for Combinations {
    type Item = Model;

    fn next(&mut self) -> Option<Model> {
        if !self.started {
            self.started = true;
            return Some(Model::empty());
        }
        if self.advance() {
            Some(Model::from_sorted_unchecked(self.current.clone()))
        } else {
            None
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}
