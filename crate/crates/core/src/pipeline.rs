//! Extraction over many sentences and the iterated merge/decide loop.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::evidence::{CountProvider, EvidenceError, EvidenceSet};
use crate::extract::{extract_candidates, form_pairs, form_pairs_with, merge_pass, Candidate, CandidatePair};
use crate::measures::{unithood, MeasureError, Thresholds, UnithoodScores};
use crate::parse::ParsedSentence;
use crate::records::{DecisionRecord, PairRecord};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("pair `{id}` ({phrase}): {source}")]
    Evidence {
        id: String,
        phrase: String,
        #[source]
        source: EvidenceError,
    },
    #[error("pair `{id}`: {source}")]
    Measure {
        id: String,
        #[source]
        source: MeasureError,
    },
    #[error("pair `{0}` has no counts or measures and no count provider is configured")]
    NoProvider(String),
}

/// Candidates and numbered pairs for a batch of sentences.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub candidates: Vec<Candidate>,
    pub pairs: Vec<PairRecord>,
}

/// Extracts candidates and pairs from every sentence. Pair ids are `1..`
/// in sentence order regardless of how the work is scheduled.
pub fn extract_all(sentences: &[ParsedSentence]) -> Extraction {
    let per_sentence: Vec<(Vec<Candidate>, Vec<CandidatePair>)> = sentences
        .par_iter()
        .map(|s| {
            let c = extract_candidates(s);
            let p = form_pairs(&c, s);
            (c, p)
        })
        .collect();
    let mut out = Extraction::default();
    for (c, p) in per_sentence {
        out.candidates.extend(c);
        for pair in p {
            out.pairs.push(PairRecord {
                pair_id: (out.pairs.len() + 1).to_string(),
                pair,
                evidence: None,
                measures: None,
            });
        }
    }
    out
}

/// Settings for [`decide`].
#[derive(Clone, Copy)]
pub struct DecideOptions<'a> {
    pub thresholds: Thresholds,
    pub provider: Option<&'a dyn CountProvider>,
    pub max_merge_passes: usize,
}

/// Output of [`decide`].
#[derive(Debug, Clone, Default)]
pub struct DecideOutcome {
    pub decisions: Vec<DecisionRecord>,
    /// First-pass records with the counts that were used, where counts were used.
    pub decorated: Vec<PairRecord>,
    /// Candidates that took part in pairing, after the last pass.
    pub candidates: Vec<Candidate>,
    pub passes: usize,
}

fn scores_for(
    id: &str,
    pair: &CandidatePair,
    evidence: Option<EvidenceSet>,
    measures: Option<crate::records::InjectedMeasures>,
    opts: &DecideOptions,
) -> Result<(UnithoodScores, Option<EvidenceSet>), PipelineError> {
    if let Some(m) = measures {
        return Ok((
            UnithoodScores::from_measures(m.mi, m.id_x, m.id_y, m.idr, &opts.thresholds),
            None,
        ));
    }
    let evidence = match evidence {
        Some(e) => e,
        None => {
            let provider = opts.provider.ok_or_else(|| PipelineError::NoProvider(id.to_string()))?;
            EvidenceSet::gather(provider, pair).map_err(|source| PipelineError::Evidence {
                id: id.to_string(),
                phrase: match &source {
                    EvidenceError::Missing(p) => p.clone(),
                    _ => pair.s.clone(),
                },
                source,
            })?
        }
    };
    let scores = unithood(&evidence, &opts.thresholds).map_err(|source| PipelineError::Measure {
        id: id.to_string(),
        source,
    })?;
    Ok((scores, Some(evidence)))
}

struct SentenceRun {
    // (pass, pair, scores), passes >= 2 only
    later: Vec<(usize, CandidatePair, UnithoodScores)>,
    candidates: Vec<Candidate>,
    passes: usize,
}

/// Decides every pair, applies accepted merges, re-pairs merged candidates
/// with their neighbours and repeats until nothing changes or
/// `max_merge_passes` passes have run.
///
/// First-pass rows keep their input ids and order. Pairs created by later
/// passes follow, numbered after the largest numeric input id.
pub fn decide(records: &[PairRecord], opts: &DecideOptions) -> Result<DecideOutcome, PipelineError> {
    let first: Vec<(UnithoodScores, Option<EvidenceSet>)> = records
        .par_iter()
        .map(|r| scores_for(&r.pair_id, &r.pair, r.evidence, r.measures, opts))
        .collect::<Result<_, _>>()?;

    // Group by sentence in first-appearance order.
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        let sid = r.pair.sentence_id();
        groups
            .entry(sid)
            .or_insert_with(|| {
                order.push(sid);
                Vec::new()
            })
            .push(i);
    }

    let runs: Vec<SentenceRun> = order
        .par_iter()
        .map(|sid| {
            let idx = &groups[sid];
            let mut by_start: BTreeMap<u32, Candidate> = BTreeMap::new();
            let mut connectors: HashMap<u32, String> = HashMap::new();
            for &i in idx {
                let p = &records[i].pair;
                by_start.entry(p.a_x.first()).or_insert_with(|| p.a_x.clone());
                by_start.entry(p.a_y.first()).or_insert_with(|| p.a_y.clone());
                if let Some(o) = p.connector_offset() {
                    connectors.insert(o, p.b.clone());
                }
            }
            let mut candidates: Vec<Candidate> = by_start.into_values().collect();
            let mut pairs: Vec<CandidatePair> = idx.iter().map(|&i| records[i].pair.clone()).collect();
            let mut decisions: Vec<bool> = idx.iter().map(|&i| first[i].0.uh).collect();
            let mut later = Vec::new();
            let mut passes = 1;
            loop {
                let merged = merge_pass(&pairs, &decisions, &candidates);
                let fresh: Vec<Candidate> = merged.iter().filter(|c| !candidates.contains(c)).cloned().collect();
                candidates = merged;
                if fresh.is_empty() || passes >= opts.max_merge_passes {
                    break;
                }
                pairs = form_pairs_with(&candidates, |_, o| connectors.get(&o).cloned())
                    .into_iter()
                    .filter(|p| fresh.contains(&p.a_x) || fresh.contains(&p.a_y))
                    .collect();
                if pairs.is_empty() {
                    break;
                }
                passes += 1;
                decisions = Vec::with_capacity(pairs.len());
                for p in &pairs {
                    let (scores, _) = scores_for(&p.s, p, None, None, opts)?;
                    decisions.push(scores.uh);
                    later.push((passes, p.clone(), scores));
                }
            }
            Ok(SentenceRun {
                later,
                candidates,
                passes,
            })
        })
        .collect::<Result<_, PipelineError>>()?;

    let mut out = DecideOutcome::default();
    for (r, (scores, evidence)) in records.iter().zip(&first) {
        out.decisions.push(DecisionRecord {
            pair_id: r.pair_id.clone(),
            pair: r.pair.clone(),
            scores: *scores,
        });
        out.decorated.push(PairRecord {
            evidence: evidence.or(r.evidence),
            ..r.clone()
        });
    }
    let mut next_id = records
        .iter()
        .filter_map(|r| r.pair_id.parse::<u64>().ok())
        .max()
        .unwrap_or(0);
    let max_pass = runs.iter().map(|r| r.passes).max().unwrap_or(0);
    for pass in 2..=max_pass {
        for run in &runs {
            for (_, pair, scores) in run.later.iter().filter(|(p, _, _)| *p == pass) {
                next_id += 1;
                out.decisions.push(DecisionRecord {
                    pair_id: next_id.to_string(),
                    pair: pair.clone(),
                    scores: *scores,
                });
            }
        }
    }
    out.passes = max_pass;
    out.candidates = runs.into_iter().flat_map(|r| r.candidates).collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{FixtureProvider, MissingPolicy};
    use crate::parse::ParseToken;

    fn sentence() -> ParsedSentence {
        // "National Institutes of Allergy and Infectious Diseases"
        ParsedSentence::new(
            "s",
            vec![
                ParseToken::new(1, "National", "NNP", "nn", 2),
                ParseToken::new(2, "Institutes", "NNP", "root", 0),
                ParseToken::new(3, "of", "IN", "prep", 2),
                ParseToken::new(4, "Allergy", "NNP", "pobj", 3),
                ParseToken::new(5, "and", "CC", "cc", 4),
                ParseToken::new(6, "Infectious", "NNP", "nn", 7),
                ParseToken::new(7, "Diseases", "NNP", "conj", 4),
            ],
        )
    }

    fn provider() -> FixtureProvider {
        FixtureProvider::from_pairs(
            [
                ("National Institutes", 5000),
                ("Allergy", 90000),
                ("Infectious Diseases", 40000),
                ("Allergy and Infectious Diseases", 30000),
                ("National Institutes of Allergy", 10),
                ("National Institutes of Allergy and Infectious Diseases", 4000),
            ],
            MissingPolicy::Error,
        )
    }

    #[test]
    fn ids_are_sequential_in_sentence_order() {
        let mut b = sentence();
        b.sentence_id = "t".into();
        let ex = extract_all(&[sentence(), b]);
        let ids: Vec<&str> = ex.pairs.iter().map(|p| p.pair_id.as_str()).collect();
        assert_eq!(ids, vec!["1", "2", "3", "4"]);
        assert_eq!(ex.pairs[0].pair.s, "National Institutes of Allergy");
        assert_eq!(ex.pairs[1].pair.s, "Allergy and Infectious Diseases");
    }

    #[test]
    fn merges_nest_across_passes() {
        let ex = extract_all(&[sentence()]);
        let p = provider();
        let opts = DecideOptions {
            thresholds: Thresholds::default(),
            provider: Some(&p),
            max_merge_passes: 3,
        };
        let out = decide(&ex.pairs, &opts).unwrap();
        let rows: Vec<(&str, &str, bool)> = out
            .decisions
            .iter()
            .map(|d| (d.pair_id.as_str(), d.pair.s.as_str(), d.scores.uh))
            .collect();
        assert_eq!(
            rows,
            vec![
                ("1", "National Institutes of Allergy", false),
                ("2", "Allergy and Infectious Diseases", true),
                ("3", "National Institutes of Allergy and Infectious Diseases", true),
            ]
        );
        assert_eq!(out.passes, 2);
        assert_eq!(out.candidates.len(), 1);
        assert_eq!(out.candidates[0].span, vec![1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn single_pass_limit_stops_early() {
        let ex = extract_all(&[sentence()]);
        let p = provider();
        let opts = DecideOptions {
            thresholds: Thresholds::default(),
            provider: Some(&p),
            max_merge_passes: 1,
        };
        let out = decide(&ex.pairs, &opts).unwrap();
        assert_eq!(out.decisions.len(), 2);
        assert_eq!(out.candidates.len(), 2);
    }

    #[test]
    fn missing_count_names_phrase() {
        let ex = extract_all(&[sentence()]);
        let p = FixtureProvider::from_pairs([("Allergy", 1)], MissingPolicy::Error);
        let opts = DecideOptions {
            thresholds: Thresholds::default(),
            provider: Some(&p),
            max_merge_passes: 3,
        };
        let e = decide(&ex.pairs, &opts).unwrap_err();
        assert!(e.to_string().contains("National Institutes of Allergy"), "{e}");
    }

    #[test]
    fn no_provider_needed_for_decorated_pairs() {
        let mut ex = extract_all(&[sentence()]);
        for r in &mut ex.pairs {
            r.evidence = Some(EvidenceSet::new(0, 10, 10));
        }
        let opts = DecideOptions {
            thresholds: Thresholds::default(),
            provider: None,
            max_merge_passes: 3,
        };
        let out = decide(&ex.pairs, &opts).unwrap();
        assert!(out.decisions.iter().all(|d| !d.scores.uh));
        assert!(decide(&extract_all(&[sentence()]).pairs, &opts).is_err());
    }
}
