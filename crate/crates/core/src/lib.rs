//! Security-property mining for SoC and IP design documentation.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] ingests plain-text or markdown documents into sentence records
//!   and reads/writes JSON Lines corpora.
//! * [`lexicon`] holds the tagger, synonym lexicon, adverb list and
//!   conjunction inventory shared by the text-rewriting stages.
//! * [`augment`] implements the swap/delete/replace/insert augmentation
//!   operators used to grow the language-model pre-training corpus.
//! * [`formalize`] fragments sentences at conjunctions, repairs incomplete
//!   fragments and builds the training/test dataset variants.
//! * [`classify`] provides bag-of-words and TF-IDF logistic regression
//!   scorers, the external model adapter and the evaluation metrics.
//! * [`extract`] runs a scorer over unseen documents and accounts for
//!   coverage against design-verification test descriptions.
//! * [`assertgen`] compiles property sentences into SystemVerilog assertions.

pub mod adapter;
pub mod assertgen;
pub mod augment;
pub mod classify;
pub mod corpus;
pub mod extract;
pub mod formalize;
pub mod lexicon;
pub mod rng;
pub mod text;

pub use corpus::{LabeledExample, SentenceRecord};
pub use lexicon::{Lexicon, PosTag};
