use std::collections::HashMap;
use std::path::Path;

use super::{CountProvider, EvidenceError};

/// In-memory document-frequency index over whitespace-tokenized documents.
///
/// `count` returns how many documents contain the phrase as a contiguous
/// token sequence, ignoring case. Repeats inside one document count once.
#[derive(Debug, Clone, Default)]
pub struct LocalIndex {
    vocab: HashMap<String, u32>,
    docs: Vec<Vec<u32>>,
    // term id -> ascending ids of documents containing it
    postings: Vec<Vec<u32>>,
}

impl LocalIndex {
    pub fn build<I, S>(documents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut index = Self::default();
        for doc in documents {
            index.add(doc.as_ref());
        }
        index
    }

    /// One document per line.
    pub fn load(path: &Path) -> Result<Self, EvidenceError> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::build(text.lines()))
    }

    fn add(&mut self, text: &str) {
        let doc_id = self.docs.len() as u32;
        let mut ids = Vec::new();
        for word in text.split_whitespace() {
            let word = word.to_lowercase();
            let next = self.vocab.len() as u32;
            let id = *self.vocab.entry(word).or_insert(next);
            if id == next {
                self.postings.push(Vec::new());
            }
            let list = &mut self.postings[id as usize];
            if list.last() != Some(&doc_id) {
                list.push(doc_id);
            }
            ids.push(id);
        }
        self.docs.push(ids);
    }

    pub fn num_documents(&self) -> usize {
        self.docs.len()
    }

    fn phrase_ids(&self, phrase: &str) -> Option<Vec<u32>> {
        phrase
            .split_whitespace()
            .map(|w| self.vocab.get(&w.to_lowercase()).copied())
            .collect()
    }

    pub fn document_frequency(&self, phrase: &str) -> u64 {
        let Some(ids) = self.phrase_ids(phrase) else {
            return 0;
        };
        if ids.is_empty() {
            return 0;
        }
        let rarest = ids
            .iter()
            .min_by_key(|id| self.postings[**id as usize].len())
            .expect("non-empty phrase");
        self.postings[*rarest as usize]
            .iter()
            .filter(|&&d| {
                let doc = &self.docs[d as usize];
                doc.len() >= ids.len() && doc.windows(ids.len()).any(|w| w == ids.as_slice())
            })
            .count() as u64
    }
}

impl CountProvider for LocalIndex {
    fn id(&self) -> &str {
        "local"
    }

    fn count(&self, phrase: &str) -> Result<u64, EvidenceError> {
        Ok(self.document_frequency(phrase))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_documents_not_occurrences() {
        let idx = LocalIndex::build(["a b a b", "a b"]);
        assert_eq!(idx.document_frequency("a b"), 2);
        assert_eq!(idx.document_frequency("b a"), 1);
    }

    #[test]
    fn two_of_three_documents() {
        let idx = LocalIndex::build([
            "outbreak of food poisoning in the city",
            "Food Poisoning cases rose",
            "food and poisoning are unrelated here",
        ]);
        assert_eq!(idx.document_frequency("food poisoning"), 2);
    }

    #[test]
    fn empty_corpus_and_long_phrases() {
        let empty = LocalIndex::build(Vec::<String>::new());
        assert_eq!(empty.document_frequency("anything"), 0);
        let idx = LocalIndex::build(["a b", "b c"]);
        assert_eq!(idx.document_frequency("a b c"), 0);
        assert_eq!(idx.document_frequency("zzz"), 0);
    }
}
