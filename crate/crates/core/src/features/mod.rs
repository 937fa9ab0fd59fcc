//! Feature extractor registry and the two-phase extraction driver.
//!
//! Phase 1 asks every configured extractor which preprocessing resources it
//! needs. After [`crate::preprocess::fulfill`] has built them, phase 2 runs
//! the extractors, each seeing only the resources it asked for.

pub mod embedding;
pub mod lexical;
pub mod lm;
pub mod ngram;

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::args::Args;
use crate::config::{RunConfig, Settings};
use crate::dataset::Dataset;
use crate::lm::KnLanguageModel;
use crate::preprocess::{
    fulfill, EmbeddingTable, Level, NgramCountTable, PreprocessError, PreprocessRequest,
    ResourceCache, TagStream, TokenStream,
};
use crate::sparse::{hstack, FeatureBlock, SparseError};

pub use lexical::{SurfaceExtractor, TagClasses};
pub use ngram::{
    default_cutoff, default_hash_dims, quantile_bins, HashedNgramExtractor, NgramExtractor,
    QuantileExtractor,
};

pub const SURFACE_ID: u32 = 1;
pub const NGRAM_ID: u32 = 2;
pub const HASHED_NGRAM_ID: u32 = 3;
pub const LM_ID: u32 = 4;
pub const QUANTILE_ID: u32 = 5;
pub const AVG_EMBEDDING_ID: u32 = 6;
pub const SUPERVISED_EMBEDDING_ID: u32 = 7;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("feature id {id} registered twice ({first} and {second})")]
    DuplicateId {
        id: u32,
        first: &'static str,
        second: &'static str,
    },
    #[error("no extractor registered with id {0}")]
    UnknownId(u32),
    #[error("feature {id} ({name}): {message}")]
    Args {
        id: u32,
        name: &'static str,
        message: String,
    },
    #[error("preprocessing failed: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("extractor {name} failed: {message}")]
    Extractor { name: &'static str, message: String },
    #[error("extractor {name} returned {found} {split} rows, expected {expected}")]
    Protocol {
        name: &'static str,
        split: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
}

/// One configured feature extractor.
pub trait Extractor: Send + Sync {
    /// Phase 1: resources needed from the preprocessor.
    fn requests(&self) -> Vec<PreprocessRequest>;
    /// Phase 2: the train/test block.
    fn extract(&self, ctx: &ExtractorContext) -> Result<FeatureBlock, FeatureError>;
}

pub type MakeFn = fn(&mut Args, &Settings) -> Result<Box<dyn Extractor>, String>;

pub struct ExtractorEntry {
    pub id: u32,
    pub name: &'static str,
    pub usage: &'static str,
    pub make: MakeFn,
}

inventory::collect!(ExtractorEntry);

/// Registered extractors sorted by id.
pub fn registry() -> Vec<&'static ExtractorEntry> {
    let mut entries: Vec<&'static ExtractorEntry> =
        inventory::iter::<ExtractorEntry>.into_iter().collect();
    entries.sort_by_key(|e| e.id);
    entries
}

/// Fails on the first id shared by two entries of a sorted list.
pub fn check_unique_ids(entries: &[&ExtractorEntry]) -> Result<(), FeatureError> {
    for pair in entries.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(FeatureError::DuplicateId {
                id: pair[0].id,
                first: pair[0].name,
                second: pair[1].name,
            });
        }
    }
    Ok(())
}

/// The registry after checking that ids are unique; run once at startup.
pub fn checked_registry() -> Result<Vec<&'static ExtractorEntry>, FeatureError> {
    let entries = registry();
    check_unique_ids(&entries)?;
    Ok(entries)
}

pub fn find(id: u32) -> Option<&'static ExtractorEntry> {
    inventory::iter::<ExtractorEntry>
        .into_iter()
        .find(|e| e.id == id)
}

/// Instantiates extractor `id` from its argument text.
pub fn build(id: u32, args: &str, settings: &Settings) -> Result<Box<dyn Extractor>, FeatureError> {
    let entry = find(id).ok_or(FeatureError::UnknownId(id))?;
    let arg_error = |message| FeatureError::Args {
        id,
        name: entry.name,
        message,
    };
    let mut parsed = Args::parse(args).map_err(arg_error)?;
    let extractor = (entry.make)(&mut parsed, settings).map_err(arg_error)?;
    parsed.finish().map_err(arg_error)?;
    Ok(extractor)
}

/// Read access to the subset of a [`ResourceCache`] that one extractor
/// requested. Any other lookup fails with `NotRequested`.
pub struct ScopedCache<'a> {
    cache: &'a ResourceCache,
    allowed: BTreeSet<PreprocessRequest>,
}

impl<'a> ScopedCache<'a> {
    pub fn new(
        cache: &'a ResourceCache,
        allowed: impl IntoIterator<Item = PreprocessRequest>,
    ) -> Self {
        ScopedCache {
            cache,
            allowed: allowed.into_iter().collect(),
        }
    }

    fn permit(&self, request: &PreprocessRequest) -> Result<(), PreprocessError> {
        if self.allowed.contains(request) {
            Ok(())
        } else {
            Err(PreprocessError::NotRequested(request.clone()))
        }
    }

    pub fn tokens(&self, request: &PreprocessRequest) -> Result<&'a TokenStream, PreprocessError> {
        self.permit(request)?;
        self.cache.tokens(request)
    }

    pub fn tags(&self, request: &PreprocessRequest) -> Result<&'a TagStream, PreprocessError> {
        self.permit(request)?;
        self.cache.tags(request)
    }

    pub fn counts(
        &self,
        request: &PreprocessRequest,
    ) -> Result<&'a NgramCountTable, PreprocessError> {
        self.permit(request)?;
        self.cache.counts(request)
    }

    pub fn lm(&self, request: &PreprocessRequest) -> Result<&'a KnLanguageModel, PreprocessError> {
        self.permit(request)?;
        self.cache.lm(request)
    }

    pub fn embeddings(
        &self,
        request: &PreprocessRequest,
    ) -> Result<&'a EmbeddingTable, PreprocessError> {
        self.permit(request)?;
        self.cache.embeddings(request)
    }

    /// Train and test sequences at `level`: tokens for words, tags for POS.
    pub fn streams(
        &self,
        level: Level,
    ) -> Result<(&'a TokenStream, &'a TokenStream), PreprocessError> {
        match level {
            Level::Word => Ok((
                self.tokens(&PreprocessRequest::TokenizeTrain)?,
                self.tokens(&PreprocessRequest::TokenizeTest)?,
            )),
            Level::Pos => Ok((
                self.tags(&PreprocessRequest::TagTrain)?,
                self.tags(&PreprocessRequest::TagTest)?,
            )),
        }
    }
}

pub struct ExtractorContext<'a> {
    pub cache: ScopedCache<'a>,
    pub data: &'a Dataset,
    pub seed: u64,
}

/// Requests for the train and test sequences at `level`.
pub(crate) fn stream_requests(level: Level) -> [PreprocessRequest; 2] {
    match level {
        Level::Word => [
            PreprocessRequest::TokenizeTrain,
            PreprocessRequest::TokenizeTest,
        ],
        Level::Pos => [PreprocessRequest::TagTrain, PreprocessRequest::TagTest],
    }
}

pub(crate) fn resource_error(name: &'static str) -> impl Fn(PreprocessError) -> FeatureError {
    move |e| FeatureError::Extractor {
        name,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FeatureTiming {
    pub feature_id: u32,
    pub name: String,
    pub args: String,
    pub train_shape: (usize, usize),
    pub test_shape: (usize, usize),
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub block: FeatureBlock,
    /// One entry per feature request, in merge order.
    pub timings: Vec<FeatureTiming>,
    pub preprocess_seconds: f64,
}

/// Builds a thread pool of `threads` workers.
pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool, FeatureError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| FeatureError::ThreadPool(e.to_string()))
}

/// Runs both protocol phases for every feature request of `cfg` on a pool
/// of `cfg.settings.threads` workers and merges the blocks by ascending
/// feature id, then request order.
pub fn extract_all(cfg: &RunConfig, data: &Dataset) -> Result<Extraction, FeatureError> {
    thread_pool(cfg.settings.threads)?.install(|| extract_all_in_pool(cfg, data))
}

fn extract_all_in_pool(cfg: &RunConfig, data: &Dataset) -> Result<Extraction, FeatureError> {
    let mut order: Vec<usize> = (0..cfg.feature_requests.len()).collect();
    order.sort_by_key(|&i| cfg.feature_requests[i].feature_id);

    let mut planned = Vec::with_capacity(order.len());
    let mut all_requests = Vec::new();
    for &i in &order {
        let req = &cfg.feature_requests[i];
        let entry = find(req.feature_id).ok_or(FeatureError::UnknownId(req.feature_id))?;
        let extractor = build(req.feature_id, &req.args, &cfg.settings)?;
        let requests = extractor.requests();
        all_requests.extend(requests.iter().cloned());
        planned.push((entry, req, extractor, requests));
    }

    let start = Instant::now();
    let cache = fulfill(&all_requests, cfg, data)?;
    let preprocess_seconds = start.elapsed().as_secs_f64();
    log::info!(
        "preprocessing built {} resources in {:.2}s",
        cache.len(),
        preprocess_seconds
    );

    let results: Vec<(FeatureBlock, FeatureTiming)> = planned
        .par_iter()
        .map(|(entry, req, extractor, requests)| {
            let ctx = ExtractorContext {
                cache: ScopedCache::new(&cache, requests.iter().cloned()),
                data,
                seed: cfg.settings.seed,
            };
            let start = Instant::now();
            let block = extractor.extract(&ctx)?;
            let seconds = start.elapsed().as_secs_f64();
            for (split, expected, found) in [
                ("train", data.train_sentences.len(), block.train.n_rows()),
                ("test", data.test_sentences.len(), block.test.n_rows()),
            ] {
                if expected != found {
                    return Err(FeatureError::Protocol {
                        name: entry.name,
                        split,
                        expected,
                        found,
                    });
                }
            }
            log::debug!(
                "{} ({}) produced {} columns in {:.3}s",
                entry.name,
                req.args,
                block.n_cols(),
                seconds
            );
            let timing = FeatureTiming {
                feature_id: entry.id,
                name: entry.name.to_string(),
                args: req.args.clone(),
                train_shape: (block.train.n_rows(), block.n_cols()),
                test_shape: (block.test.n_rows(), block.n_cols()),
                seconds,
            };
            Ok((block, timing))
        })
        .collect::<Result<_, FeatureError>>()?;

    let (blocks, timings): (Vec<FeatureBlock>, Vec<FeatureTiming>) = results.into_iter().unzip();
    Ok(Extraction {
        block: hstack(&blocks)?,
        timings,
        preprocess_seconds,
    })
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn default_registry_has_seven_sorted_extractors() {
        let entries = checked_registry().unwrap();
        let listed: Vec<(u32, &str)> = entries.iter().map(|e| (e.id, e.name)).collect();
        assert_eq!(
            listed,
            [
                (1, "surface"),
                (2, "ngram"),
                (3, "hashed-ngram"),
                (4, "lm"),
                (5, "quantile"),
                (6, "avg-embedding"),
                (7, "supervised-embedding"),
            ]
        );
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        fn make(_: &mut Args, _: &Settings) -> Result<Box<dyn Extractor>, String> {
            Err("unused".into())
        }
        let a = ExtractorEntry {
            id: 2,
            name: "first",
            usage: "",
            make,
        };
        let b = ExtractorEntry {
            id: 2,
            name: "second",
            usage: "",
            make,
        };
        let c = ExtractorEntry {
            id: 3,
            name: "third",
            usage: "",
            make,
        };
        assert!(check_unique_ids(&[&a, &c]).is_ok());
        assert!(matches!(
            check_unique_ids(&[&a, &b, &c]),
            Err(FeatureError::DuplicateId { id: 2, .. })
        ));
    }

    #[test]
    fn unknown_args_are_argument_errors() {
        let err = build(NGRAM_ID, "n=2 colour=red", &Settings::default())
            .err()
            .unwrap();
        assert!(matches!(err, FeatureError::Args { id: 2, .. }), "{err}");
        assert!(build(NGRAM_ID, "n=0", &Settings::default()).is_err());
        assert!(matches!(
            build(99, "", &Settings::default()),
            Err(FeatureError::UnknownId(99))
        ));
    }

    #[test]
    fn scoped_cache_refuses_unrequested_resources() {
        let cache = cache_with(&[&["a"]], &[&["a"]], None, &[(1, 1, Level::Word)]);
        let scoped = ScopedCache::new(&cache, [PreprocessRequest::TokenizeTrain]);
        assert!(scoped.tokens(&PreprocessRequest::TokenizeTrain).is_ok());
        assert!(matches!(
            scoped.tokens(&PreprocessRequest::TokenizeTest),
            Err(PreprocessError::NotRequested(_))
        ));
        let table = PreprocessRequest::NgramCounts {
            n: 1,
            cutoff: 1,
            level: Level::Word,
        };
        assert!(scoped.counts(&table).is_err());
    }
}
