//! Head-driven left-right noun phrase filter and candidate pairing.
//!
//! Candidates are grown outward from head nouns. A neighbouring token is
//! absorbed when it sits at the next offset, depends on the head or on a
//! token already absorbed, is a noun, adjective or foreign word, and is not
//! a possessive. The left side is grown to exhaustion before the right side.
//! Nouns left uncovered afterwards become single-token candidates.
//!
//! Adjacent candidates (no gap, or one preposition / "and" between them)
//! form pairs `a_x b a_y` whose merge is decided elsewhere; [`merge_pass`]
//! applies those decisions.

use std::collections::{BTreeSet, HashMap};

use crate::parse::{ParseToken, ParsedSentence};

/// Potential term candidate: a contiguous run of tokens in one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub sentence_id: String,
    /// Member offsets, strictly ascending.
    pub span: Vec<u32>,
    /// Member lemmas joined by single spaces.
    pub surface: String,
    /// Head noun the candidate grew from; `None` for leftover nouns.
    pub head_offset: Option<u32>,
}

impl Candidate {
    pub fn first(&self) -> u32 {
        self.span[0]
    }

    pub fn last(&self) -> u32 {
        *self.span.last().expect("candidate span is never empty")
    }

    pub fn len(&self) -> usize {
        self.span.len()
    }

    pub fn is_empty(&self) -> bool {
        self.span.is_empty()
    }

    fn from_offsets(sentence: &ParsedSentence, offsets: &BTreeSet<u32>, head: Option<u32>) -> Self {
        let span: Vec<u32> = offsets.iter().copied().collect();
        let surface = span
            .iter()
            .filter_map(|o| sentence.token(*o))
            .map(|t| t.lemma.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        Self {
            sentence_id: sentence.sentence_id.clone(),
            span,
            surface,
            head_offset: head,
        }
    }
}

/// `a_x b a_y` where `b` is empty, a preposition or "and".
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidatePair {
    pub a_x: Candidate,
    /// Connector lemma; empty when the candidates touch.
    pub b: String,
    pub a_y: Candidate,
    /// `a_x b a_y`, single-space joined.
    pub s: String,
}

impl CandidatePair {
    pub fn new(a_x: Candidate, b: impl Into<String>, a_y: Candidate) -> Self {
        let b = b.into();
        let s = join_phrase(&a_x.surface, &b, &a_y.surface);
        Self { a_x, b, a_y, s }
    }

    pub fn sentence_id(&self) -> &str {
        &self.a_x.sentence_id
    }

    /// Offset of the connector token, if any.
    pub fn connector_offset(&self) -> Option<u32> {
        (!self.b.is_empty()).then(|| self.a_x.last() + 1)
    }
}

pub(crate) fn join_phrase(a_x: &str, b: &str, a_y: &str) -> String {
    if b.is_empty() {
        format!("{a_x} {a_y}")
    } else {
        format!("{a_x} {b} {a_y}")
    }
}

fn may_join_phrase(t: &ParseToken) -> bool {
    matches!(t.pos.as_str(), "NN" | "NNS" | "NNP" | "NNPS" | "JJ" | "FW") && !t.is_possessive()
}

fn is_modifier_of_noun(t: &ParseToken) -> bool {
    matches!(t.dep_rel.as_str(), "nn" | "amod" | "poss")
        || matches!(t.pos.as_str(), "NN" | "NNS" | "NNP" | "NNPS" | "JJ" | "FW")
}

/// Connector lemma if `t` may sit between two paired candidates.
pub fn connector(t: &ParseToken) -> Option<&str> {
    if t.pos == "IN" || (t.pos == "CC" && t.lemma.eq_ignore_ascii_case("and")) {
        Some(t.lemma.as_str())
    } else {
        None
    }
}

/// Offsets of head nouns: nouns with at least one modifier-type dependent,
/// plus nouns at the sentence root. Possessives never head a phrase.
pub fn find_head_nouns(sentence: &ParsedSentence) -> BTreeSet<u32> {
    sentence
        .tokens
        .iter()
        .filter(|t| t.is_noun() && !t.is_possessive())
        .filter(|t| t.head_offset == 0 || sentence.dependents(t.offset).any(is_modifier_of_noun))
        .map(|t| t.offset)
        .collect()
}

fn grow(sentence: &ParsedSentence, head: u32) -> BTreeSet<u32> {
    let mut members = BTreeSet::from([head]);
    let absorbs = |members: &BTreeSet<u32>, offset: u32| {
        sentence
            .token(offset)
            .is_some_and(|t| may_join_phrase(t) && members.contains(&t.head_offset))
    };
    loop {
        let left = *members.first().unwrap();
        if left > 1 && absorbs(&members, left - 1) {
            members.insert(left - 1);
        } else {
            break;
        }
    }
    loop {
        let right = *members.last().unwrap();
        if absorbs(&members, right + 1) {
            members.insert(right + 1);
        } else {
            break;
        }
    }
    members
}

/// Runs the head-driven filter over one sentence. The result is ordered by
/// first offset and no two candidates share a token.
pub fn extract_candidates(sentence: &ParsedSentence) -> Vec<Candidate> {
    // Grown spans are contiguous in offset space, so overlap reduces to
    // interval intersection. Larger spans first so a contained span folds
    // into its container and keeps the container's head.
    let mut grown: Vec<(u32, BTreeSet<u32>)> = find_head_nouns(sentence)
        .into_iter()
        .map(|h| (h, grow(sentence, h)))
        .collect();
    grown.sort_by_key(|(h, m)| (std::cmp::Reverse(m.len()), *h));

    let mut unified: Vec<(u32, BTreeSet<u32>)> = Vec::new();
    for (head, members) in grown {
        let (lo, hi) = (*members.first().unwrap(), *members.last().unwrap());
        let hit = unified.iter_mut().find(|(_, m)| {
            let (ulo, uhi) = (*m.first().unwrap(), *m.last().unwrap());
            lo <= uhi && ulo <= hi
        });
        match hit {
            Some((_, m)) => m.extend(members),
            None => unified.push((head, members)),
        }
    }
    // One union can bridge two previously separate spans.
    unified.sort_by_key(|(_, m)| *m.first().unwrap());
    let mut merged: Vec<(u32, BTreeSet<u32>)> = Vec::new();
    for (head, members) in unified {
        match merged.last_mut() {
            Some((_, prev)) if *members.first().unwrap() <= *prev.last().unwrap() => prev.extend(members),
            _ => merged.push((head, members)),
        }
    }

    let covered: BTreeSet<u32> = merged.iter().flat_map(|(_, m)| m.iter().copied()).collect();
    let mut out: Vec<Candidate> = merged
        .iter()
        .map(|(h, m)| Candidate::from_offsets(sentence, m, Some(*h)))
        .collect();
    out.extend(
        sentence
            .tokens
            .iter()
            .filter(|t| t.is_noun() && !t.is_possessive() && !covered.contains(&t.offset))
            .map(|t| Candidate::from_offsets(sentence, &BTreeSet::from([t.offset]), None)),
    );
    out.sort_by_key(Candidate::first);
    out
}

/// Pairs candidates using a connector lookup keyed by offset. The lookup
/// returns the connector lemma when the token at that offset may link two
/// candidates.
pub fn form_pairs_with<F>(candidates: &[Candidate], connector_at: F) -> Vec<CandidatePair>
where
    F: Fn(&str, u32) -> Option<String>,
{
    let mut sorted: Vec<&Candidate> = candidates.iter().collect();
    sorted.sort_by(|a, b| (&a.sentence_id, a.first()).cmp(&(&b.sentence_id, b.first())));

    let mut pairs = Vec::new();
    for w in sorted.windows(2) {
        let (x, y) = (w[0], w[1]);
        if x.sentence_id != y.sentence_id {
            continue;
        }
        if x.last() + 1 == y.first() {
            pairs.push(CandidatePair::new(x.clone(), "", y.clone()));
        } else if x.last() + 2 == y.first() {
            if let Some(b) = connector_at(&x.sentence_id, x.last() + 1) {
                pairs.push(CandidatePair::new(x.clone(), b, y.clone()));
            }
        }
    }
    pairs
}

/// Pairs every two candidates of `sentence` that touch or are separated by
/// exactly one preposition or "and".
pub fn form_pairs(candidates: &[Candidate], sentence: &ParsedSentence) -> Vec<CandidatePair> {
    form_pairs_with(candidates, |_, offset| {
        sentence.token(offset).and_then(connector).map(str::to_string)
    })
}

/// Applies accepted merges left to right. A candidate takes part in at most
/// one merge per pass; later conflicting pairs wait for the next pass.
///
/// `decisions[i]` is the decision for `pairs[i]`.
pub fn merge_pass(pairs: &[CandidatePair], decisions: &[bool], candidates: &[Candidate]) -> Vec<Candidate> {
    assert_eq!(pairs.len(), decisions.len(), "one decision per pair");

    let key = |c: &Candidate| (c.sentence_id.clone(), c.first());
    let mut accepted: Vec<&CandidatePair> = pairs
        .iter()
        .zip(decisions)
        .filter_map(|(p, &d)| d.then_some(p))
        .collect();
    accepted.sort_by(|a, b| (a.sentence_id(), a.a_x.first()).cmp(&(b.sentence_id(), b.a_x.first())));

    let mut used: BTreeSet<(String, u32)> = BTreeSet::new();
    let mut replacement: HashMap<(String, u32), Option<Candidate>> = HashMap::new();
    for p in accepted {
        let (kx, ky) = (key(&p.a_x), key(&p.a_y));
        if used.contains(&kx) || used.contains(&ky) {
            continue;
        }
        used.insert(kx.clone());
        used.insert(ky.clone());
        let mut span = p.a_x.span.clone();
        span.extend(p.connector_offset());
        span.extend(p.a_y.span.iter().copied());
        let head = if p.b.is_empty() {
            p.a_y.head_offset
        } else {
            p.a_x.head_offset
        };
        replacement.insert(
            kx,
            Some(Candidate {
                sentence_id: p.a_x.sentence_id.clone(),
                span,
                surface: p.s.clone(),
                head_offset: head,
            }),
        );
        replacement.insert(ky, None);
    }

    candidates
        .iter()
        .filter_map(|c| match replacement.get(&key(c)) {
            Some(r) => r.clone(),
            None => Some(c.clone()),
        })
        .collect()
}
