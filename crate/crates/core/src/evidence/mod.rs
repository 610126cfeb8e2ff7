//! Page-count evidence.
//!
//! Every measure works from document counts: how many documents contain a
//! phrase as an exact contiguous sequence. Counts come from a
//! [`CountProvider`]; this module ships a closed fixture table, an in-memory
//! document index, and a configurable HTTP search client. Any provider can
//! be wrapped in a [`CachedProvider`] backed by an append-only TSV file.

mod cache;
mod fixture;
mod local;
mod remote;

pub use cache::{CacheEntry, CachedProvider, CountCache};
pub use fixture::{FixtureProvider, MissingPolicy};
pub use local::LocalIndex;
pub use remote::{CountExtractor, HttpTransport, RemoteClient, RemoteConfig, Transport};

use thiserror::Error;

use crate::extract::CandidatePair;

#[derive(Debug, Error)]
pub enum EvidenceError {
    #[error("empty phrase")]
    EmptyPhrase,
    #[error("no count for phrase `{0}` in fixture")]
    Missing(String),
    #[error("request for `{phrase}` failed after {attempts} attempt(s): {message}")]
    Transport {
        phrase: String,
        attempts: u32,
        message: String,
    },
    #[error("invalid count path `{0}`: {1}")]
    BadCountPath(String, String),
    #[error("{source_name} line {line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Source of document counts for exact phrases.
pub trait CountProvider: Send + Sync {
    /// Identifier recorded alongside cached counts.
    fn id(&self) -> &str;

    /// Number of documents containing `phrase`. Callers pass normalized
    /// phrases; see [`normalize_phrase`].
    fn count(&self, phrase: &str) -> Result<u64, EvidenceError>;
}

impl<P: CountProvider + ?Sized> CountProvider for Box<P> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn count(&self, phrase: &str) -> Result<u64, EvidenceError> {
        (**self).count(phrase)
    }
}

impl<P: CountProvider + ?Sized> CountProvider for std::sync::Arc<P> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn count(&self, phrase: &str) -> Result<u64, EvidenceError> {
        (**self).count(phrase)
    }
}

/// Collapses runs of whitespace to single spaces and trims. Case is kept.
pub fn normalize_phrase(phrase: &str) -> String {
    phrase.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Normalizes and counts, rejecting phrases that are empty after normalization.
pub fn count(provider: &dyn CountProvider, phrase: &str) -> Result<u64, EvidenceError> {
    let phrase = normalize_phrase(phrase);
    if phrase.is_empty() {
        return Err(EvidenceError::EmptyPhrase);
    }
    provider.count(&phrase)
}

/// Page counts for `s`, `a_x` and `a_y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EvidenceSet {
    pub n_s: u64,
    pub n_ax: u64,
    pub n_ay: u64,
}

impl EvidenceSet {
    pub fn new(n_s: u64, n_ax: u64, n_ay: u64) -> Self {
        Self { n_s, n_ax, n_ay }
    }

    pub fn total(&self) -> u64 {
        self.n_s + self.n_ax + self.n_ay
    }

    pub fn gather(provider: &dyn CountProvider, pair: &CandidatePair) -> Result<Self, EvidenceError> {
        Self::gather_phrases(provider, &pair.s, &pair.a_x.surface, &pair.a_y.surface)
    }

    pub fn gather_phrases(provider: &dyn CountProvider, s: &str, a_x: &str, a_y: &str) -> Result<Self, EvidenceError> {
        Ok(Self {
            n_s: count(provider, s)?,
            n_ax: count(provider, a_x)?,
            n_ay: count(provider, a_y)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_collapses_whitespace_only() {
        assert_eq!(normalize_phrase("  Mental \t Health\n"), "Mental Health");
        assert_eq!(normalize_phrase("   "), "");
    }

    #[test]
    fn blank_phrase_is_rejected() {
        let f = FixtureProvider::from_pairs([("a", 1)], MissingPolicy::Zero);
        assert!(matches!(count(&f, " \t "), Err(EvidenceError::EmptyPhrase)));
    }
}
