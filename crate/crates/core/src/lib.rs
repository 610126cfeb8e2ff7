//! Unithood of word sequences.
//!
//! Noun phrase candidates are pulled out of dependency-parsed sentences with
//! a head-driven filter, then adjacent candidates (`a_x b a_y`, where `b` is
//! nothing, a preposition or "and") are merged when page-count statistics
//! say the combined phrase behaves as one lexical unit.
//!
//! ```
//! use unithood::evidence::EvidenceSet;
//! use unithood::measures::{unithood, Thresholds};
//!
//! let scores = unithood(&EvidenceSet::new(4000, 5000, 30000), &Thresholds::default()).unwrap();
//! assert!(scores.uh);
//! ```
//!
//! The `book/` directory at the repository root walks through each stage.

pub mod cli;
pub mod config;
pub mod evaluation;
pub mod evidence;
pub mod extract;
pub mod measures;
pub mod parse;
pub mod pipeline;
pub mod records;

pub use evidence::{CountProvider, EvidenceSet};
pub use extract::{Candidate, CandidatePair};
pub use measures::{Thresholds, UnithoodScores};
pub use parse::{ParseToken, ParsedSentence};

// The guide's code blocks run as doc-tests so the book cannot drift.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/parse-format.md")]
    mod parse_format {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/evidence.md")]
    mod evidence {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
