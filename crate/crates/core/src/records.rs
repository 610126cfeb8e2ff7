//! Tab-separated interchange files between pipeline steps.
//!
//! * candidates: `sentence_id  span  surface`
//! * pairs: `pair_id  sentence_id  ax_span  a_x  b  ay_span  a_y  s`, with
//!   optional extra columns named in a `#pair_id ...` header: `n_s n_ax n_ay`
//!   (raw counts) and/or `mi id_x id_y [idr]` (precomputed measures)
//! * decisions: `pair_id  a_x  b  a_y  id_x  id_y  idr  mi  decision  s`
//! * gold: `pair_id  MERGED|NOTMERGED`
//!
//! Spans are comma-joined offsets. `b` is empty when the candidates touch.
//! Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::evidence::EvidenceSet;
use crate::extract::{join_phrase, Candidate, CandidatePair};
use crate::measures::UnithoodScores;

#[derive(Debug, Error, PartialEq)]
#[error("{kind} line {line}: {message}")]
pub struct RecordError {
    pub kind: &'static str,
    pub line: usize,
    pub message: String,
}

fn err(kind: &'static str, line: usize, message: impl Into<String>) -> RecordError {
    RecordError {
        kind,
        line,
        message: message.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn format_span(span: &[u32]) -> String {
    span.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub fn parse_span(text: &str) -> Option<Vec<u32>> {
    let span: Vec<u32> = text.split(',').map(|o| o.trim().parse().ok()).collect::<Option<_>>()?;
    (!span.is_empty() && span.windows(2).all(|w| w[0] < w[1])).then_some(span)
}

pub const CANDIDATE_HEADER: &str = "#sentence_id\tspan\tsurface";

pub fn write_candidates(candidates: &[Candidate]) -> String {
    let mut out = format!("{CANDIDATE_HEADER}\n");
    for c in candidates {
        let _ = writeln!(out, "{}\t{}\t{}", c.sentence_id, format_span(&c.span), c.surface);
    }
    out
}

pub fn read_candidates(text: &str) -> Result<Vec<Candidate>, RecordError> {
    data_lines(text)
        .map(|(n, line)| {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(err(
                    "candidates",
                    n,
                    format!("expected 3 columns, found {}", cols.len()),
                ));
            }
            let span = parse_span(cols[1]).ok_or_else(|| err("candidates", n, "invalid span"))?;
            Ok(Candidate {
                sentence_id: cols[0].to_string(),
                span,
                surface: cols[2].to_string(),
                head_offset: None,
            })
        })
        .collect()
}

/// Precomputed measures carried by a pairs file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectedMeasures {
    pub mi: f64,
    pub id_x: f64,
    pub id_y: f64,
    pub idr: Option<f64>,
}

/// One row of a pairs file.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub pair_id: String,
    pub pair: CandidatePair,
    pub evidence: Option<EvidenceSet>,
    pub measures: Option<InjectedMeasures>,
}

const PAIR_BASE: [&str; 8] = ["pair_id", "sentence_id", "ax_span", "a_x", "b", "ay_span", "a_y", "s"];
const PAIR_EXTRA: [&str; 7] = ["n_s", "n_ax", "n_ay", "mi", "id_x", "id_y", "idr"];

pub fn pair_header(with_evidence: bool) -> String {
    let mut cols: Vec<&str> = PAIR_BASE.to_vec();
    if with_evidence {
        cols.extend(&PAIR_EXTRA[..3]);
    }
    format!("#{}", cols.join("\t"))
}

/// Writes pairs, adding count columns when every record carries evidence.
pub fn write_pairs(records: &[PairRecord]) -> String {
    let with_evidence = !records.is_empty() && records.iter().all(|r| r.evidence.is_some());
    let mut out = pair_header(with_evidence);
    out.push('\n');
    for r in records {
        let p = &r.pair;
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.pair_id,
            p.sentence_id(),
            format_span(&p.a_x.span),
            p.a_x.surface,
            p.b,
            format_span(&p.a_y.span),
            p.a_y.surface,
            p.s
        );
        if let (true, Some(e)) = (with_evidence, r.evidence) {
            let _ = write!(out, "\t{}\t{}\t{}", e.n_s, e.n_ax, e.n_ay);
        }
        out.push('\n');
    }
    out
}

pub fn read_pairs(text: &str) -> Result<Vec<PairRecord>, RecordError> {
    const KIND: &str = "pairs";
    // Extra column names come from the last header line before the data.
    let mut extras: Vec<String> = Vec::new();
    for line in text.lines() {
        if let Some(h) = line.strip_prefix("#pair_id") {
            let names: Vec<String> = std::iter::once("pair_id")
                .chain(h.split('\t').skip(1))
                .map(str::to_string)
                .collect();
            extras = names.into_iter().skip(PAIR_BASE.len()).collect();
        } else if !line.is_empty() && !line.starts_with('#') {
            break;
        }
    }
    for name in &extras {
        if !PAIR_EXTRA.contains(&name.as_str()) {
            return Err(err(KIND, 1, format!("unknown column `{name}`")));
        }
    }
    let has = |n: &str| extras.iter().any(|e| e == n);
    let counts = ["n_s", "n_ax", "n_ay"].iter().filter(|n| has(n)).count();
    let measures = ["mi", "id_x", "id_y"].iter().filter(|n| has(n)).count();
    if counts % 3 != 0 || measures % 3 != 0 || (has("idr") && measures == 0) {
        return Err(err(
            KIND,
            1,
            "count columns come as n_s,n_ax,n_ay and measures as mi,id_x,id_y[,idr]",
        ));
    }

    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (n, line) in data_lines(text) {
        let cols: Vec<&str> = line.split('\t').collect();
        let want = PAIR_BASE.len() + extras.len();
        if cols.len() != want {
            return Err(err(KIND, n, format!("expected {want} columns, found {}", cols.len())));
        }
        let ax_span = parse_span(cols[2]).ok_or_else(|| err(KIND, n, "invalid ax_span"))?;
        let ay_span = parse_span(cols[5]).ok_or_else(|| err(KIND, n, "invalid ay_span"))?;
        let (sid, b) = (cols[1], cols[4]);
        let gap = ay_span[0] as i64 - *ax_span.last().unwrap() as i64;
        if !((b.is_empty() && gap == 1) || (!b.is_empty() && gap == 2)) {
            return Err(err(KIND, n, "spans are not adjacent around the connector"));
        }
        let candidate = |span: Vec<u32>, surface: &str| Candidate {
            sentence_id: sid.to_string(),
            span,
            surface: surface.to_string(),
            head_offset: None,
        };
        let pair = CandidatePair::new(candidate(ax_span, cols[3]), b, candidate(ay_span, cols[6]));
        if pair.s != cols[7] {
            return Err(err(
                KIND,
                n,
                format!("s `{}` is not `{}`", cols[7], join_phrase(cols[3], b, cols[6])),
            ));
        }
        if !seen.insert(cols[0].to_string()) {
            return Err(err(KIND, n, format!("duplicate pair id `{}`", cols[0])));
        }

        let field =
            |name: &str| -> Option<&str> { extras.iter().position(|e| e == name).map(|i| cols[PAIR_BASE.len() + i]) };
        let int = |name: &str| -> Result<u64, RecordError> {
            field(name)
                .unwrap()
                .trim()
                .parse()
                .map_err(|_| err(KIND, n, format!("invalid {name}")))
        };
        let real = |name: &str| -> Result<Option<f64>, RecordError> {
            match field(name).map(str::trim) {
                None | Some("-") | Some("") => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|f| f.is_finite())
                    .map(Some)
                    .ok_or_else(|| err(KIND, n, format!("invalid {name}"))),
            }
        };
        let evidence = if counts == 3 {
            Some(EvidenceSet::new(int("n_s")?, int("n_ax")?, int("n_ay")?))
        } else {
            None
        };
        let measures = if measures == 3 {
            let need = |name: &str| real(name)?.ok_or_else(|| err(KIND, n, format!("missing {name}")));
            Some(InjectedMeasures {
                mi: need("mi")?,
                id_x: need("id_x")?,
                id_y: need("id_y")?,
                idr: real("idr")?,
            })
        } else {
            None
        };
        out.push(PairRecord {
            pair_id: cols[0].to_string(),
            pair,
            evidence,
            measures,
        });
    }
    Ok(out)
}

/// One row of `decide` output.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub pair_id: String,
    pub pair: CandidatePair,
    pub scores: UnithoodScores,
}

pub const DECISION_HEADER: &str = "#pair_id\ta_x\tb\ta_y\tid_x\tid_y\tidr\tmi\tdecision\ts";

pub fn decision_label(merged: bool) -> &'static str {
    if merged {
        "MERGED"
    } else {
        "NOTMERGED"
    }
}

fn parse_label(text: &str) -> Option<bool> {
    match text.trim() {
        "MERGED" => Some(true),
        "NOTMERGED" => Some(false),
        _ => None,
    }
}

pub fn write_decisions(records: &[DecisionRecord]) -> String {
    let mut out = format!("{DECISION_HEADER}\n");
    for r in records {
        let s = &r.scores;
        let idr = s.idr.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{}\t{:.4}\t{}\t{}",
            r.pair_id,
            r.pair.a_x.surface,
            r.pair.b,
            r.pair.a_y.surface,
            s.id_x,
            s.id_y,
            idr,
            s.mi,
            decision_label(s.uh),
            r.pair.s
        );
    }
    out
}

fn read_labels(
    text: &str,
    kind: &'static str,
    columns: usize,
    label_col: usize,
) -> Result<BTreeMap<String, bool>, RecordError> {
    let mut out = BTreeMap::new();
    for (n, line) in data_lines(text) {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != columns {
            return Err(err(
                kind,
                n,
                format!("expected {columns} columns, found {}", cols.len()),
            ));
        }
        let label = parse_label(cols[label_col]).ok_or_else(|| {
            err(
                kind,
                n,
                format!("label `{}` is not MERGED or NOTMERGED", cols[label_col]),
            )
        })?;
        if out.insert(cols[0].to_string(), label).is_some() {
            return Err(err(kind, n, format!("duplicate pair id `{}`", cols[0])));
        }
    }
    Ok(out)
}

/// Pair id → merged, from a decisions file.
pub fn read_decisions(text: &str) -> Result<BTreeMap<String, bool>, RecordError> {
    read_labels(text, "decisions", 10, 8)
}

pub fn read_gold(text: &str) -> Result<BTreeMap<String, bool>, RecordError> {
    read_labels(text, "gold", 2, 1)
}

pub fn write_gold(labels: &BTreeMap<String, bool>) -> String {
    let mut out = String::from("#pair_id\tlabel\n");
    for (id, &m) in labels {
        let _ = writeln!(out, "{id}\t{}", decision_label(m));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Thresholds;

    const FIG3: &str = "#pair_id\tsentence_id\tax_span\ta_x\tb\tay_span\ta_y\ts\tmi\tid_x\tid_y\tidr\n\
        66\tr66\t1,2,3\tAgriculture Department lab\tin\t5\tAmes\tAgriculture Department lab in Ames\t1.5466\t1.6989\t7.3765\t0.2303\n";

    #[test]
    fn reads_injected_measures() {
        let r = read_pairs(FIG3).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].pair.connector_offset(), Some(4));
        assert_eq!(
            r[0].measures,
            Some(InjectedMeasures {
                mi: 1.5466,
                id_x: 1.6989,
                id_y: 7.3765,
                idr: Some(0.2303)
            })
        );
        assert_eq!(r[0].evidence, None);
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let base = "1\ts\t1\ta\t\t2\tb\ta b\n";
        assert!(read_pairs(base).is_ok());
        assert!(read_pairs("1\ts\t1\ta\t\t3\tb\ta b\n").is_err());
        assert!(read_pairs("1\ts\t1\ta\tof\t3\tb\ta b\n").is_err());
        assert!(read_pairs("1\ts\t1\ta\t\t2\tb\ta  b\n").is_err());
        assert!(read_pairs(&format!("{base}{base}")).is_err());
        assert!(read_pairs(
            "#pair_id\tsentence_id\tax_span\ta_x\tb\tay_span\ta_y\ts\tn_s\n1\ts\t1\ta\t\t2\tb\ta b\t4\n"
        )
        .is_err());
    }

    #[test]
    fn evidence_columns_round_trip() {
        let mut r = read_pairs("1\ts\t1\ta\tof\t3\tb\ta of b\n").unwrap();
        r[0].evidence = Some(EvidenceSet::new(1, 2, 3));
        let text = write_pairs(&r);
        assert!(text.starts_with(&pair_header(true)));
        assert_eq!(read_pairs(&text).unwrap(), r);
    }

    #[test]
    fn decision_rows_use_four_decimals() {
        let pair = read_pairs(FIG3).unwrap().remove(0).pair;
        let scores = UnithoodScores::from_measures(0.7289, 5.9029, 2.7481, Some(2.1479), &Thresholds::default());
        let text = write_decisions(&[DecisionRecord {
            pair_id: "72".into(),
            pair,
            scores,
        }]);
        let row = text.lines().nth(1).unwrap();
        assert_eq!(
            row,
            "72\tAgriculture Department lab\tin\tAmes\t5.9029\t2.7481\t2.1479\t0.7289\tNOTMERGED\tAgriculture Department lab in Ames"
        );
        assert!(!read_decisions(&text).unwrap()["72"]);
    }

    #[test]
    fn gold_labels() {
        let g = read_gold("#c\n1\tMERGED\n2\tNOTMERGED\n").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(read_gold(&write_gold(&g)).unwrap(), g);
        assert!(read_gold("1\tmaybe\n").is_err());
        assert!(read_gold("1\tMERGED\n1\tMERGED\n").is_err());
    }

    #[test]
    fn candidates_round_trip() {
        let c = vec![Candidate {
            sentence_id: "s1".into(),
            span: vec![20, 21],
            surface: "National Institute".into(),
            head_offset: None,
        }];
        assert_eq!(read_candidates(&write_candidates(&c)).unwrap(), c);
        assert!(read_candidates("s1\t2,1\tx\n").is_err());
    }
}
