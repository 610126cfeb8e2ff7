use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{SecondsFormat, Utc};

use super::{normalize_phrase, CountProvider, EvidenceError};

/// One line of the cache file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub phrase: String,
    pub count: u64,
    pub provider_id: String,
    pub fetched_at: String,
}

impl CacheEntry {
    fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\n",
            self.phrase, self.count, self.provider_id, self.fetched_at
        )
    }
}

/// Append-only count cache.
///
/// The file holds `phrase<TAB>count<TAB>provider_id<TAB>fetched_at` lines and
/// is read fully on open; for a repeated `(phrase, provider)` the last line
/// wins. Writes go through a single locked handle.
#[derive(Debug, Default)]
pub struct CountCache {
    path: Option<PathBuf>,
    entries: Mutex<HashMap<(String, String), u64>>,
    writer: Mutex<Option<File>>,
}

impl CountCache {
    /// A cache that never touches disk.
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(path: &Path) -> Result<Self, EvidenceError> {
        let mut entries = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            for (i, line) in text.lines().enumerate() {
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let cols: Vec<&str> = line.split('\t').collect();
                let bad = |message: &str| EvidenceError::Format {
                    source_name: path.display().to_string(),
                    line: i + 1,
                    message: message.to_string(),
                };
                if cols.len() != 4 {
                    return Err(bad("expected 4 tab-separated columns"));
                }
                let count: u64 = cols[1].parse().map_err(|_| bad("invalid count"))?;
                entries.insert((cols[2].to_string(), cols[0].to_string()), count);
            }
        }
        Ok(Self {
            path: Some(path.to_path_buf()),
            entries: Mutex::new(entries),
            writer: Mutex::new(None),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, provider_id: &str, phrase: &str) -> Option<u64> {
        self.entries
            .lock()
            .unwrap()
            .get(&(provider_id.to_string(), phrase.to_string()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, provider_id: &str, phrase: &str, count: u64) -> Result<(), EvidenceError> {
        let entry = CacheEntry {
            phrase: phrase.to_string(),
            count,
            provider_id: provider_id.to_string(),
            fetched_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        };
        if let Some(path) = &self.path {
            let mut writer = self.writer.lock().unwrap();
            if writer.is_none() {
                *writer = Some(OpenOptions::new().create(true).append(true).open(path)?);
            }
            let file = writer.as_mut().unwrap();
            file.write_all(entry.to_line().as_bytes())?;
            file.flush()?;
        }
        self.entries
            .lock()
            .unwrap()
            .insert((entry.provider_id, entry.phrase), count);
        Ok(())
    }
}

/// Cache-first wrapper around any provider.
pub struct CachedProvider<P> {
    inner: P,
    cache: Arc<CountCache>,
}

impl<P: CountProvider> CachedProvider<P> {
    pub fn new(inner: P, cache: Arc<CountCache>) -> Self {
        Self { inner, cache }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn cache(&self) -> &CountCache {
        &self.cache
    }
}

impl<P: CountProvider> CountProvider for CachedProvider<P> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn count(&self, phrase: &str) -> Result<u64, EvidenceError> {
        let phrase = normalize_phrase(phrase);
        if let Some(n) = self.cache.get(self.inner.id(), &phrase) {
            return Ok(n);
        }
        let n = self.inner.count(&phrase)?;
        self.cache.insert(self.inner.id(), &phrase, n)?;
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{FixtureProvider, MissingPolicy};

    #[test]
    fn last_entry_wins_and_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.tsv");
        std::fs::write(
            &path,
            "a b\t1\tremote\t2020-01-01T00:00:00Z\na b\t5\tremote\t2020-01-02T00:00:00Z\na b\t9\tfixture\tx\n",
        )
        .unwrap();
        let cache = CountCache::open(&path).unwrap();
        assert_eq!(cache.get("remote", "a b"), Some(5));
        assert_eq!(cache.get("fixture", "a b"), Some(9));

        cache.insert("remote", "c", 3).unwrap();
        drop(cache);
        let reopened = CountCache::open(&path).unwrap();
        assert_eq!(reopened.get("remote", "c"), Some(3));
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn malformed_cache_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.tsv");
        std::fs::write(&path, "a\tNaN\tx\ty\n").unwrap();
        assert!(CountCache::open(&path).is_err());
    }

    #[test]
    fn errors_are_not_cached() {
        let cache = Arc::new(CountCache::in_memory());
        let p = CachedProvider::new(
            FixtureProvider::from_pairs([("a", 1)], MissingPolicy::Error),
            cache.clone(),
        );
        assert!(p.count("b").is_err());
        assert!(cache.is_empty());
        assert_eq!(p.count("a").unwrap(), 1);
        assert_eq!(cache.len(), 1);
    }
}
