//! Scoring merge decisions against gold labels, and threshold sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::evidence::EvidenceSet;
use crate::measures::{unithood, MeasureError, Thresholds, UnithoodScores};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no pair id is shared by decisions and gold labels")]
    NoOverlap,
    #[error("{} decided pair(s) have no gold label: {}", .0.len(), .0.join(", "))]
    Unlabeled(Vec<String>),
    #[error("no pairs to evaluate")]
    NoPairs,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("pair `{id}`: {source}")]
    Measure {
        id: String,
        #[source]
        source: MeasureError,
    },
}

/// Actual (rows) against ideal (columns) merge decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContingencyTable {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ContingencyTable {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, actual: bool, ideal: bool) {
        match (actual, ideal) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn metrics(&self) -> Metrics {
        metrics(self)
    }
}

/// Metrics whose denominator is zero are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    /// Harmonic mean of precision and recall.
    pub f1: Option<f64>,
    /// Product of precision and recall. Some evaluations call this the
    /// F-score, so it is reported next to `f1`.
    pub paper_f: Option<f64>,
    pub accuracy: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(t: &ContingencyTable) -> Metrics {
    let precision = ratio(t.tp, t.tp + t.fp);
    let recall = ratio(t.tp, t.tp + t.fn_);
    let (f1, paper_f) = match (precision, recall) {
        (Some(p), Some(r)) => (Some(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 }), Some(p * r)),
        _ => (None, None),
    };
    Metrics {
        precision,
        recall,
        f1,
        paper_f,
        accuracy: ratio(t.tp + t.tn, t.total()),
    }
}

/// Result of [`score`]; `unused_gold` lists gold ids with no decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Score {
    pub table: ContingencyTable,
    pub unused_gold: Vec<String>,
}

/// Builds the contingency table. Every decided pair needs a gold label;
/// gold labels without a decision are ignored with a warning.
pub fn score(decisions: &BTreeMap<String, bool>, gold: &BTreeMap<String, bool>) -> Result<Score, EvalError> {
    let unlabeled: Vec<String> = decisions.keys().filter(|k| !gold.contains_key(*k)).cloned().collect();
    if unlabeled.len() == decisions.len() {
        return Err(EvalError::NoOverlap);
    }
    if !unlabeled.is_empty() {
        return Err(EvalError::Unlabeled(unlabeled));
    }
    let unused_gold: Vec<String> = gold.keys().filter(|k| !decisions.contains_key(*k)).cloned().collect();
    if !unused_gold.is_empty() {
        log::warn!("ignoring {} gold label(s) without a decision", unused_gold.len());
    }
    let mut table = ContingencyTable::default();
    for (id, &actual) in decisions {
        table.add(actual, gold[id]);
    }
    Ok(Score { table, unused_gold })
}

/// Per-threshold candidate values. Thresholds without values stay at the
/// base setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    pub base: Thresholds,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl ThresholdGrid {
    pub fn single(base: Thresholds) -> Self {
        Self {
            base,
            values: BTreeMap::new(),
        }
    }

    /// Parses `name=v1,v2;name=v3`. Names are the [`Thresholds`] field names.
    pub fn parse(spec: &str, base: Thresholds) -> Result<Self, EvalError> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Err(EvalError::BadGrid("empty grid spec".into()));
        }
        let mut values = BTreeMap::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, list) = part
                .split_once('=')
                .ok_or_else(|| EvalError::BadGrid(format!("`{part}` is not name=values")))?;
            let name = name.trim();
            if base.get(name).is_none() {
                return Err(EvalError::BadGrid(format!("unknown threshold `{name}`")));
            }
            let vals = list
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|f| f.is_finite())
                        .ok_or_else(|| EvalError::BadGrid(format!("bad value `{v}` for {name}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.insert(name.to_string(), vals).is_some() {
                return Err(EvalError::BadGrid(format!("`{name}` given twice")));
            }
        }
        if values.is_empty() {
            return Err(EvalError::BadGrid("empty grid spec".into()));
        }
        Ok(Self { base, values })
    }

    /// All grid points in a fixed order: the product over
    /// [`Thresholds::NAMES`], last name varying fastest.
    pub fn points(&self) -> Vec<Thresholds> {
        let mut points = vec![self.base];
        for name in Thresholds::NAMES {
            let Some(vals) = self.values.get(name) else {
                continue;
            };
            points = points
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p;
                        q.set(name, v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortKey {
    #[default]
    F1,
    PaperF,
    Precision,
    Recall,
    Accuracy,
    /// Keep grid order.
    Grid,
}

impl std::str::FromStr for SortKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "f1" | "f_score" => Self::F1,
            "paper_f" => Self::PaperF,
            "precision" => Self::Precision,
            "recall" => Self::Recall,
            "accuracy" => Self::Accuracy,
            "grid" => Self::Grid,
            other => return Err(format!("unknown sort key `{other}`")),
        })
    }
}

impl SortKey {
    fn pick(self, m: &Metrics) -> Option<f64> {
        match self {
            Self::F1 => m.f1,
            Self::PaperF => m.paper_f,
            Self::Precision => m.precision,
            Self::Recall => m.recall,
            Self::Accuracy => m.accuracy,
            Self::Grid => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Position in [`ThresholdGrid::points`].
    pub index: usize,
    pub thresholds: Thresholds,
    pub table: ContingencyTable,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Grid points that were not evaluated, with the reason.
    pub skipped: Vec<(Thresholds, String)>,
}

/// Evaluates every grid point against `gold`.
///
/// Measures are computed once per pair; each grid point only re-applies the
/// decision predicate. Runs on the current rayon pool.
pub fn sweep(
    pairs: &[(String, EvidenceSet)],
    gold: &BTreeMap<String, bool>,
    grid: &ThresholdGrid,
    sort: SortKey,
) -> Result<SweepReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::NoPairs);
    }
    let scored: Vec<(String, UnithoodScores)> = pairs
        .iter()
        .map(|(id, ev)| {
            unithood(ev, &Thresholds::default())
                .map(|s| (id.clone(), s))
                .map_err(|source| EvalError::Measure { id: id.clone(), source })
        })
        .collect::<Result<_, _>>()?;
    let labels: BTreeMap<String, bool> = scored.iter().map(|(id, _)| (id.clone(), false)).collect();
    score(&labels, gold)?;

    let mut skipped = Vec::new();
    let mut valid = Vec::new();
    for (index, t) in grid.points().into_iter().enumerate() {
        match t.validate() {
            Ok(()) => valid.push((index, t)),
            Err(e) => {
                log::warn!("skipping grid point {index}: {e}");
                skipped.push((t, e.to_string()));
            }
        }
    }

    let mut rows: Vec<SweepRow> = valid
        .par_iter()
        .map(|&(index, t)| {
            let mut table = ContingencyTable::default();
            for (id, s) in &scored {
                table.add(!s.degenerate && s.decide(&t), gold[id]);
            }
            SweepRow {
                index,
                thresholds: t,
                table,
                metrics: table.metrics(),
            }
        })
        .collect();

    if sort != SortKey::Grid {
        // Descending by metric, undefined last, ties in grid order.
        rows.sort_by(|a, b| {
            let (x, y) = (sort.pick(&a.metrics), sort.pick(&b.metrics));
            match (x, y) {
                (Some(x), Some(y)) => y.total_cmp(&x),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            }
            .then(a.index.cmp(&b.index))
        });
    }
    Ok(SweepReport { rows, skipped })
}

pub const SWEEP_HEADER: &str =
    "#mi_plus\tmi_minus\tid_t\tidr_plus\tidr_minus\ttp\tfp\tfn\ttn\tprecision\trecall\tf1\tpaper_f\taccuracy";

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

pub fn write_sweep_report(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in &report.rows {
        let t = &r.thresholds;
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.mi_plus,
            t.mi_minus,
            t.id_t,
            t.idr_plus,
            t.idr_minus,
            r.table.tp,
            r.table.fp,
            r.table.fn_,
            r.table.tn,
            fmt_opt(m.precision),
            fmt_opt(m.recall),
            fmt_opt(m.f1),
            fmt_opt(m.paper_f),
            fmt_opt(m.accuracy),
        );
    }
    out
}
