//! Columnar dependency-parse input.
//!
//! One token per line, six tab-separated columns:
//!
//! ```text
//! sentence_id  offset  lemma  pos  dep_rel  head_offset
//! ```
//!
//! Lines starting with `#` are comments. Offsets are 1-based and per
//! sentence; gaps are allowed. A head offset of `0` marks the sentence root.
//! Head offsets that point at a token not present in the sentence are kept
//! as-is and treated downstream as "governed from outside".

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

/// Header comment emitted by [`write_parse_file`].
pub const PARSE_HEADER: &str = "#sentence_id\toffset\tlemma\tpos\tdep_rel\thead_offset";

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: expected 6 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: invalid {column} `{value}`")]
    BadInteger {
        line: usize,
        column: &'static str,
        value: String,
    },
    #[error("line {line}: {reason}")]
    InvalidToken { line: usize, reason: String },
    #[error("line {line}: duplicate offset {offset} in sentence `{sentence_id}`")]
    DuplicateOffset {
        line: usize,
        sentence_id: String,
        offset: u32,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// One row of parser output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseToken {
    pub offset: u32,
    pub lemma: String,
    pub pos: String,
    pub dep_rel: String,
    pub head_offset: u32,
}

impl ParseToken {
    pub fn new(offset: u32, lemma: &str, pos: &str, dep_rel: &str, head_offset: u32) -> Self {
        Self {
            offset,
            lemma: lemma.to_string(),
            pos: pos.to_string(),
            dep_rel: dep_rel.to_string(),
            head_offset,
        }
    }

    /// Checks the per-token invariants, returning a human-readable reason on failure.
    pub fn validate(&self) -> Result<(), String> {
        if self.offset == 0 {
            return Err("offset must be >= 1".into());
        }
        if self.head_offset == self.offset {
            return Err(format!("token {} depends on itself", self.offset));
        }
        if self.lemma.is_empty() {
            return Err("empty lemma".into());
        }
        for (name, field) in [("lemma", &self.lemma), ("pos", &self.pos), ("dep_rel", &self.dep_rel)] {
            if field.contains(['\t', '\n', '\r']) {
                return Err(format!("{name} contains a tab or newline"));
            }
        }
        Ok(())
    }

    pub fn is_noun(&self) -> bool {
        matches!(self.pos.as_str(), "NN" | "NNS" | "NNP" | "NNPS")
    }

    pub fn is_possessive(&self) -> bool {
        self.dep_rel == "poss"
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    pub sentence_id: String,
    /// Sorted by strictly increasing offset.
    pub tokens: Vec<ParseToken>,
}

impl ParsedSentence {
    pub fn new(sentence_id: impl Into<String>, mut tokens: Vec<ParseToken>) -> Self {
        tokens.sort_by_key(|t| t.offset);
        Self {
            sentence_id: sentence_id.into(),
            tokens,
        }
    }

    pub fn token(&self, offset: u32) -> Option<&ParseToken> {
        self.tokens
            .binary_search_by_key(&offset, |t| t.offset)
            .ok()
            .map(|i| &self.tokens[i])
    }

    pub fn dependents(&self, head: u32) -> impl Iterator<Item = &ParseToken> {
        self.tokens.iter().filter(move |t| t.head_offset == head)
    }
}

/// Reads a parse file. Sentences come back in first-appearance order with
/// their tokens sorted by offset.
pub fn read_parse_file<R: BufRead>(input: R) -> Result<Vec<ParsedSentence>, ParseError> {
    let mut order: Vec<ParsedSentence> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut seen: Vec<HashMap<u32, usize>> = Vec::new();

    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(ParseError::ColumnCount {
                line: line_no,
                found: cols.len(),
            });
        }
        let int = |column: &'static str, value: &str| {
            value.parse::<u32>().map_err(|_| ParseError::BadInteger {
                line: line_no,
                column,
                value: value.to_string(),
            })
        };
        let token = ParseToken::new(
            int("offset", cols[1])?,
            cols[2],
            cols[3],
            cols[4],
            int("head_offset", cols[5])?,
        );
        token
            .validate()
            .map_err(|reason| ParseError::InvalidToken { line: line_no, reason })?;

        let sid = cols[0];
        let slot = *index.entry(sid.to_string()).or_insert_with(|| {
            order.push(ParsedSentence {
                sentence_id: sid.to_string(),
                tokens: Vec::new(),
            });
            seen.push(HashMap::new());
            order.len() - 1
        });
        if seen[slot].insert(token.offset, line_no).is_some() {
            return Err(ParseError::DuplicateOffset {
                line: line_no,
                sentence_id: sid.to_string(),
                offset: token.offset,
            });
        }
        order[slot].tokens.push(token);
    }

    for sentence in &mut order {
        sentence.tokens.sort_by_key(|t| t.offset);
    }
    Ok(order)
}

/// Serializes sentences in the same format [`read_parse_file`] accepts.
pub fn write_parse_file(sentences: &[ParsedSentence]) -> String {
    let mut out = String::new();
    out.push_str(PARSE_HEADER);
    out.push('\n');
    for s in sentences {
        for t in &s.tokens {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                s.sentence_id, t.offset, t.lemma, t.pos, t.dep_rel, t.head_offset
            );
        }
    }
    out
}
