//! Config-driven text feature extraction and classification.
//!
//! A run reads a five-section INI file, builds preprocessing resources
//! (tokens, POS tags, n-gram tables, a Kneser-Ney language model, word
//! embeddings), runs the requested feature extractors, merges their
//! sparse blocks, optionally exports them, and trains and evaluates the
//! requested classifiers. See [`controller::run`].

pub mod args;
pub mod classify;
pub mod config;
pub mod controller;
pub mod dataset;
pub mod export;
pub mod features;
pub mod hashing;
pub mod lm;
pub mod preprocess;
pub mod sparse;

pub use config::{load_config, parse_config, RunConfig};
pub use dataset::Dataset;
pub use sparse::{hstack, FeatureBlock, FeatureDescriptor, SparseMatrix};
