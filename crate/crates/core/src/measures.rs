//! Unithood measures over page counts.
//!
//! For a pair `a_x b a_y` with merged phrase `s` and counts `n_s`, `n_ax`,
//! `n_ay`:
//!
//! * weight: `p(w) = (n_w / N) · exp(-n_w / N)` with `N = n_s + n_ax + n_ay`
//! * mutual information: `MI = p(s) / (p(a_x) · p(a_y))`
//! * independence: `ID(a, s) = log10(n_a - n_s)` when `n_a > n_s`, else 0
//! * ratio: `IDR = ID(a_x, s) / ID(a_y, s)`
//!
//! The merge decision accepts `s` when MI is above `mi_plus`, or when MI
//! lies in `[mi_minus, mi_plus]` and both constituents are independent
//! enough (`>= id_t`) and about equally so (`idr` in `[idr_minus, idr_plus]`).
//!
//! Two classic baselines are also provided: pointwise mutual information in
//! bits and the C-value of a nested candidate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::EvidenceSet;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("all counts are zero; no evidence to measure")]
    NoEvidence,
    #[error("count {n_w} exceeds total {total}")]
    CountExceedsTotal { n_w: u64, total: u64 },
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("marginal probability must be positive (p_a = {p_a}, p_b = {p_b})")]
    ZeroMarginal { p_a: f64, p_b: f64 },
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("candidate length {len} exceeds longest n-gram {g}")]
    TooLong { len: usize, g: usize },
    #[error("{0}")]
    BadNesting(String),
}

/// Decision thresholds. Defaults are the empirically chosen
/// `0.9 / 0.02 / 6 / 1.35 / 0.93`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub mi_plus: f64,
    pub mi_minus: f64,
    pub id_t: f64,
    pub idr_plus: f64,
    pub idr_minus: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            mi_plus: 0.9,
            mi_minus: 0.02,
            id_t: 6.0,
            idr_plus: 1.35,
            idr_minus: 0.93,
        }
    }
}

impl Thresholds {
    pub const NAMES: [&'static str; 5] = ["mi_plus", "mi_minus", "id_t", "idr_plus", "idr_minus"];

    pub fn validate(&self) -> Result<(), MeasureError> {
        let all = [self.mi_plus, self.mi_minus, self.id_t, self.idr_plus, self.idr_minus];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(MeasureError::InvalidThresholds("thresholds must be finite".into()));
        }
        if self.mi_plus <= self.mi_minus {
            return Err(MeasureError::InvalidThresholds(format!(
                "mi_plus ({}) must exceed mi_minus ({})",
                self.mi_plus, self.mi_minus
            )));
        }
        if self.idr_plus <= self.idr_minus {
            return Err(MeasureError::InvalidThresholds(format!(
                "idr_plus ({}) must exceed idr_minus ({})",
                self.idr_plus, self.idr_minus
            )));
        }
        if self.id_t < 0.0 {
            return Err(MeasureError::InvalidThresholds(format!(
                "id_t ({}) must be >= 0",
                self.id_t
            )));
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "mi_plus" => self.mi_plus,
            "mi_minus" => self.mi_minus,
            "id_t" => self.id_t,
            "idr_plus" => self.idr_plus,
            "idr_minus" => self.idr_minus,
            _ => return None,
        })
    }

    /// Sets a threshold by name; returns `false` for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "mi_plus" => &mut self.mi_plus,
            "mi_minus" => &mut self.mi_minus,
            "id_t" => &mut self.id_t,
            "idr_plus" => &mut self.idr_plus,
            "idr_minus" => &mut self.idr_minus,
            _ => return false,
        };
        *slot = value;
        true
    }

    /// The merge predicate. `idr` is `None` when `id_y` is zero, which
    /// rejects the mediocre-MI branch.
    pub fn accepts(&self, mi: f64, id_x: f64, id_y: f64, idr: Option<f64>) -> bool {
        if mi > self.mi_plus {
            return true;
        }
        if mi < self.mi_minus {
            return false;
        }
        let Some(idr) = idr else {
            return false;
        };
        id_x >= self.id_t && id_y >= self.id_t && idr <= self.idr_plus && idr >= self.idr_minus
    }
}

/// `(n_w / total) · exp(-n_w / total)`, always within `[0, 1/e]`.
pub fn weight(n_w: u64, total: u64) -> Result<f64, MeasureError> {
    if total == 0 {
        return Err(MeasureError::NoEvidence);
    }
    if n_w > total {
        return Err(MeasureError::CountExceedsTotal { n_w, total });
    }
    let x = n_w as f64 / total as f64;
    Ok(x * (-x).exp())
}

/// Mutual information value plus a flag for evidence where a constituent was
/// never seen on its own (zero denominator, reported as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutualInformation {
    pub value: f64,
    pub degenerate: bool,
}

pub fn mutual_information(evidence: &EvidenceSet) -> Result<MutualInformation, MeasureError> {
    let total = evidence.total();
    if total == 0 {
        return Err(MeasureError::NoEvidence);
    }
    if evidence.n_ax == 0 || evidence.n_ay == 0 {
        return Ok(MutualInformation {
            value: 0.0,
            degenerate: true,
        });
    }
    let p_s = weight(evidence.n_s, total)?;
    let p_ax = weight(evidence.n_ax, total)?;
    let p_ay = weight(evidence.n_ay, total)?;
    Ok(MutualInformation {
        value: p_s / (p_ax * p_ay),
        degenerate: false,
    })
}

/// `log10(n_a - n_s)` when `n_a > n_s`, else 0.
pub fn independence(n_a: u64, n_s: u64) -> f64 {
    if n_a > n_s {
        ((n_a - n_s) as f64).log10()
    } else {
        0.0
    }
}

/// `id_x / id_y`, undefined when `id_y` is zero.
pub fn independence_ratio(id_x: f64, id_y: f64) -> Option<f64> {
    (id_y > 0.0).then(|| id_x / id_y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnithoodScores {
    pub p_s: f64,
    pub p_ax: f64,
    pub p_ay: f64,
    pub mi: f64,
    pub id_x: f64,
    pub id_y: f64,
    pub idr: Option<f64>,
    pub uh: bool,
    /// Set when `n_ax` or `n_ay` was zero and MI was forced to 0.
    pub degenerate: bool,
}

impl UnithoodScores {
    /// Scores from precomputed MI and independence values. Weights are NaN
    /// since no counts are available. `idr` defaults to `id_x / id_y`.
    pub fn from_measures(mi: f64, id_x: f64, id_y: f64, idr: Option<f64>, thresholds: &Thresholds) -> Self {
        let idr = idr.or_else(|| independence_ratio(id_x, id_y));
        Self {
            p_s: f64::NAN,
            p_ax: f64::NAN,
            p_ay: f64::NAN,
            mi,
            id_x,
            id_y,
            idr,
            uh: thresholds.accepts(mi, id_x, id_y, idr),
            degenerate: false,
        }
    }

    /// Re-applies the merge predicate under other thresholds.
    pub fn decide(&self, thresholds: &Thresholds) -> bool {
        thresholds.accepts(self.mi, self.id_x, self.id_y, self.idr)
    }
}

/// Computes every measure for one pair and the merge decision.
pub fn unithood(evidence: &EvidenceSet, thresholds: &Thresholds) -> Result<UnithoodScores, MeasureError> {
    thresholds.validate()?;
    let total = evidence.total();
    if total == 0 {
        return Err(MeasureError::NoEvidence);
    }
    let mi = mutual_information(evidence)?;
    let id_x = independence(evidence.n_ax, evidence.n_s);
    let id_y = independence(evidence.n_ay, evidence.n_s);
    let idr = independence_ratio(id_x, id_y);
    let uh = !mi.degenerate && thresholds.accepts(mi.value, id_x, id_y, idr);
    Ok(UnithoodScores {
        p_s: weight(evidence.n_s, total)?,
        p_ax: weight(evidence.n_ax, total)?,
        p_ay: weight(evidence.n_ay, total)?,
        mi: mi.value,
        id_x,
        id_y,
        idr,
        uh,
        degenerate: mi.degenerate,
    })
}

/// Pointwise mutual information in bits, `log2(p_ab / (p_a · p_b))`.
/// Returns negative infinity when `p_ab` is zero.
pub fn baseline_pmi(p_ab: f64, p_a: f64, p_b: f64) -> Result<f64, MeasureError> {
    for p in [p_ab, p_a, p_b] {
        if !(0.0..=1.0).contains(&p) {
            return Err(MeasureError::InvalidProbability(p));
        }
    }
    if p_a <= 0.0 || p_b <= 0.0 {
        return Err(MeasureError::ZeroMarginal { p_a, p_b });
    }
    if p_ab == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((p_ab / (p_a * p_b)).log2())
}

/// [`baseline_pmi`] with probabilities taken as document frequency over a
/// corpus of `corpus_size` documents.
pub fn baseline_pmi_from_counts(n_ab: u64, n_a: u64, n_b: u64, corpus_size: u64) -> Result<f64, MeasureError> {
    if corpus_size == 0 {
        return Err(MeasureError::NoEvidence);
    }
    let n = corpus_size as f64;
    baseline_pmi(n_ab as f64 / n, n_a as f64 / n, n_b as f64 / n)
}

/// C-value of `candidate` given its frequency, the longest n-gram length
/// `g`, and the longer candidates that contain it with their frequencies.
///
/// A non-nested candidate shorter than `g` is scored as `log2|a| · f_a`.
pub fn baseline_cvalue(candidate: &str, f_a: f64, g: usize, longer: &[(&str, f64)]) -> Result<f64, MeasureError> {
    let words: Vec<&str> = candidate.split_whitespace().collect();
    let len = words.len();
    if len == 0 {
        return Err(MeasureError::BadNesting("empty candidate".into()));
    }
    if len > g {
        return Err(MeasureError::TooLong { len, g });
    }
    for (term, _) in longer {
        let outer: Vec<&str> = term.split_whitespace().collect();
        if outer == words {
            return Err(MeasureError::BadNesting(format!("`{term}` is the candidate itself")));
        }
        if outer.len() <= len || !outer.windows(len).any(|w| w == words.as_slice()) {
            return Err(MeasureError::BadNesting(format!(
                "`{term}` does not contain `{candidate}`"
            )));
        }
    }
    let factor = (len as f64).log2();
    if len == g || longer.is_empty() {
        return Ok(factor * f_a);
    }
    let nested: f64 = longer.iter().map(|(_, f)| f).sum::<f64>() / longer.len() as f64;
    Ok(factor * (f_a - nested))
}
