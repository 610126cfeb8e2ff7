use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{normalize_phrase, CountProvider, EvidenceError};

/// What a closed fixture does with a phrase it has no entry for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    #[default]
    Error,
    Zero,
}

/// Fixed phrase → count table. Lookups ignore case.
#[derive(Debug, Clone)]
pub struct FixtureProvider {
    counts: HashMap<String, u64>,
    policy: MissingPolicy,
}

fn key(phrase: &str) -> String {
    normalize_phrase(phrase).to_lowercase()
}

impl FixtureProvider {
    pub fn from_pairs<I, S>(entries: I, policy: MissingPolicy) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        Self {
            counts: entries.into_iter().map(|(p, n)| (key(p.as_ref()), n)).collect(),
            policy,
        }
    }

    /// JSON object mapping phrase to non-negative integer.
    pub fn from_json_str(text: &str, policy: MissingPolicy) -> Result<Self, EvidenceError> {
        let map: HashMap<String, u64> = serde_json::from_str(text).map_err(|e| EvidenceError::Format {
            source_name: "fixture".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        Ok(Self::from_pairs(map, policy))
    }

    /// `phrase<TAB>count` lines; `#` comments and blank lines are skipped.
    pub fn from_tsv_str(text: &str, policy: MissingPolicy) -> Result<Self, EvidenceError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| EvidenceError::Format {
                source_name: "fixture".into(),
                line: i + 1,
                message,
            };
            let (phrase, n) = line
                .rsplit_once('\t')
                .ok_or_else(|| bad("expected `phrase<TAB>count`".into()))?;
            let n: u64 = n.trim().parse().map_err(|_| bad(format!("invalid count `{n}`")))?;
            entries.push((phrase.to_string(), n));
        }
        Ok(Self::from_pairs(entries, policy))
    }

    /// Loads JSON when the file starts with `{`, TSV otherwise.
    pub fn load(path: &Path, policy: MissingPolicy) -> Result<Self, EvidenceError> {
        let text = std::fs::read_to_string(path)?;
        if text.trim_start().starts_with('{') {
            Self::from_json_str(&text, policy)
        } else {
            Self::from_tsv_str(&text, policy)
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl CountProvider for FixtureProvider {
    fn id(&self) -> &str {
        "fixture"
    }

    fn count(&self, phrase: &str) -> Result<u64, EvidenceError> {
        match (self.counts.get(&key(phrase)), self.policy) {
            (Some(&n), _) => Ok(n),
            (None, MissingPolicy::Zero) => Ok(0),
            (None, MissingPolicy::Error) => Err(EvidenceError::Missing(normalize_phrase(phrase))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_lookup() {
        let f = FixtureProvider::from_json_str(r#"{"mental health": 42}"#, MissingPolicy::Error).unwrap();
        assert_eq!(f.count("mental health").unwrap(), 42);
        assert_eq!(f.count("Mental  Health").unwrap(), 42);
    }

    #[test]
    fn miss_follows_policy() {
        let strict = FixtureProvider::from_pairs([("a", 1)], MissingPolicy::Error);
        assert!(matches!(strict.count("b"), Err(EvidenceError::Missing(p)) if p == "b"));
        let lenient = FixtureProvider::from_pairs([("a", 1)], MissingPolicy::Zero);
        assert_eq!(lenient.count("b").unwrap(), 0);
    }

    #[test]
    fn tsv_fixture() {
        let f = FixtureProvider::from_tsv_str("# c\nfood poisoning\t7\n\nE coli\t3\n", MissingPolicy::Error).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.count("food poisoning").unwrap(), 7);
        assert!(FixtureProvider::from_tsv_str("x\tmany\n", MissingPolicy::Error).is_err());
        assert!(FixtureProvider::from_json_str(r#"{"x": -1}"#, MissingPolicy::Error).is_err());
    }
}
