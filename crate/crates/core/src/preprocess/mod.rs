//! Tokenization, tagging, n-gram counting, embedding loading, and the
//! shared resource cache that extractors draw from.
//!
//! Extractors declare what they need as [`PreprocessRequest`]s. The feature
//! manager gathers every request, and [`fulfill`] builds each distinct
//! resource once, including the resources those depend on.

mod embeddings;
mod ngrams;
mod tagger;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::RunConfig;
use crate::dataset::{read_lines, Dataset};
use crate::lm::{train_kn, KnLanguageModel, LmError};

pub use embeddings::{load_embeddings, parse_embeddings, EmbeddingTable};
pub use ngrams::{count_ngrams, NgramCountTable};
pub use tagger::{parse_tagged_line, train_tagger, TaggedSentence, TaggerModel};
pub use tokenize::{is_punct_or_symbol, is_punct_token, tokenize};

/// Sentences as token lists.
pub type TokenStream = Vec<Vec<String>>;
/// Sentences as tag lists, parallel to a [`TokenStream`].
pub type TagStream = Vec<Vec<String>>;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("tagged corpus line {line}: {message}")]
    TaggedCorpus { line: usize, message: String },
    #[error("tagged corpus contains no tokens")]
    EmptyTaggedCorpus,
    #[error("embeddings line {line}: {message}")]
    Embeddings { line: usize, message: String },
    #[error("request `{request}` needs `{input}` in [input], which is not configured")]
    MissingInput {
        request: PreprocessRequest,
        input: &'static str,
    },
    #[error("invalid request `{request}`: {message}")]
    InvalidRequest {
        request: PreprocessRequest,
        message: &'static str,
    },
    #[error("building `{request}`: {source}")]
    Lm {
        request: PreprocessRequest,
        source: LmError,
    },
    #[error("resource `{0}` was not requested in the preprocessing phase")]
    NotRequested(PreprocessRequest),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Word,
    Pos,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Word => "word",
            Level::Pos => "pos",
        }
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word" => Ok(Level::Word),
            "pos" => Ok(Level::Pos),
            _ => Err(format!("level must be word or pos, got `{s}`")),
        }
    }
}

/// A resource an extractor needs. Equal requests denote the same resource.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PreprocessRequest {
    TokenizeTrain,
    TokenizeTest,
    TagTrain,
    TagTest,
    NgramCounts {
        n: usize,
        cutoff: usize,
        level: Level,
    },
    BuildLm {
        order: usize,
        level: Level,
    },
    LoadEmbeddings,
}

impl fmt::Display for PreprocessRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreprocessRequest::TokenizeTrain => f.write_str("tokenize-train"),
            PreprocessRequest::TokenizeTest => f.write_str("tokenize-test"),
            PreprocessRequest::TagTrain => f.write_str("tag-train"),
            PreprocessRequest::TagTest => f.write_str("tag-test"),
            PreprocessRequest::NgramCounts { n, cutoff, level } => {
                write!(f, "ngram-counts({n}, {cutoff}, {})", level.as_str())
            }
            PreprocessRequest::BuildLm { order, level } => {
                write!(f, "build-lm({order}, {})", level.as_str())
            }
            PreprocessRequest::LoadEmbeddings => f.write_str("load-embeddings"),
        }
    }
}

impl PreprocessRequest {
    fn validate(&self) -> Result<(), PreprocessError> {
        let bad = |message| {
            Err(PreprocessError::InvalidRequest {
                request: self.clone(),
                message,
            })
        };
        match *self {
            PreprocessRequest::NgramCounts { n: 0, .. } => bad("n must be at least 1"),
            PreprocessRequest::NgramCounts { cutoff: 0, .. } => bad("cutoff must be at least 1"),
            PreprocessRequest::BuildLm { order: 0, .. } => bad("order must be at least 1"),
            _ => Ok(()),
        }
    }

    /// Requests this one is built from.
    fn dependencies(&self) -> Vec<PreprocessRequest> {
        use PreprocessRequest::*;
        match self {
            TagTrain => vec![TokenizeTrain],
            TagTest => vec![TokenizeTest],
            NgramCounts {
                level: Level::Word, ..
            } => vec![TokenizeTrain],
            NgramCounts {
                level: Level::Pos, ..
            } => vec![TagTrain],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Resource {
    Tokens(Arc<TokenStream>),
    Tags(Arc<TagStream>),
    Counts(Arc<NgramCountTable>),
    Lm(Arc<KnLanguageModel>),
    Embeddings(Arc<EmbeddingTable>),
}

/// Built resources keyed by request. Written once by [`fulfill`], read-only
/// afterwards.
#[derive(Debug, Clone, Default)]
pub struct ResourceCache {
    entries: BTreeMap<PreprocessRequest, Resource>,
}

impl ResourceCache {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &PreprocessRequest> {
        self.entries.keys()
    }

    /// Adds a prebuilt resource, replacing any earlier one for `request`.
    pub fn insert(&mut self, request: PreprocessRequest, resource: Resource) {
        self.entries.insert(request, resource);
    }

    pub fn get(&self, request: &PreprocessRequest) -> Option<&Resource> {
        self.entries.get(request)
    }

    fn lookup(&self, request: &PreprocessRequest) -> Result<&Resource, PreprocessError> {
        self.entries
            .get(request)
            .ok_or_else(|| PreprocessError::NotRequested(request.clone()))
    }

    pub fn tokens(&self, request: &PreprocessRequest) -> Result<&TokenStream, PreprocessError> {
        match self.lookup(request)? {
            Resource::Tokens(t) => Ok(t),
            _ => Err(PreprocessError::NotRequested(request.clone())),
        }
    }

    pub fn tags(&self, request: &PreprocessRequest) -> Result<&TagStream, PreprocessError> {
        match self.lookup(request)? {
            Resource::Tags(t) => Ok(t),
            _ => Err(PreprocessError::NotRequested(request.clone())),
        }
    }

    pub fn counts(&self, request: &PreprocessRequest) -> Result<&NgramCountTable, PreprocessError> {
        match self.lookup(request)? {
            Resource::Counts(t) => Ok(t),
            _ => Err(PreprocessError::NotRequested(request.clone())),
        }
    }

    pub fn lm(&self, request: &PreprocessRequest) -> Result<&KnLanguageModel, PreprocessError> {
        match self.lookup(request)? {
            Resource::Lm(m) => Ok(m),
            _ => Err(PreprocessError::NotRequested(request.clone())),
        }
    }

    pub fn embeddings(
        &self,
        request: &PreprocessRequest,
    ) -> Result<&EmbeddingTable, PreprocessError> {
        match self.lookup(request)? {
            Resource::Embeddings(e) => Ok(e),
            _ => Err(PreprocessError::NotRequested(request.clone())),
        }
    }
}

fn tokenize_all(sentences: &[String], lowercase: bool) -> TokenStream {
    sentences
        .par_iter()
        .map(|s| tokenize(s, lowercase))
        .collect()
}

fn tag_all(model: &TaggerModel, tokens: &TokenStream) -> TagStream {
    tokens.par_iter().map(|s| model.tag(s)).collect()
}

fn load_tagger(
    cfg: &RunConfig,
    trigger: &PreprocessRequest,
) -> Result<TaggerModel, PreprocessError> {
    let path = cfg
        .input
        .tagged_corpus
        .as_ref()
        .ok_or_else(|| PreprocessError::MissingInput {
            request: trigger.clone(),
            input: "tagged_corpus",
        })?;
    let lines = read_lines(path).map_err(|e| PreprocessError::Io {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let mut corpus = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let mut sentence = parse_tagged_line(line, i + 1)?;
        if cfg.settings.lowercase {
            for (w, _) in &mut sentence {
                *w = w.to_lowercase();
            }
        }
        if !sentence.is_empty() {
            corpus.push(sentence);
        }
    }
    log::info!("training tagger on {} sentences", corpus.len());
    train_tagger(&corpus, cfg.settings.tagger_epochs, cfg.settings.seed)
}

fn load_lm_corpus(
    cfg: &RunConfig,
    trigger: &PreprocessRequest,
) -> Result<TokenStream, PreprocessError> {
    let path = cfg
        .input
        .lm_corpus
        .as_ref()
        .ok_or_else(|| PreprocessError::MissingInput {
            request: trigger.clone(),
            input: "lm_corpus",
        })?;
    let lines = read_lines(path).map_err(|e| PreprocessError::Io {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Ok(tokenize_all(&lines, cfg.settings.lowercase))
}

/// Builds every distinct requested resource (and its dependencies) exactly
/// once. Independent resources are built in parallel on the current rayon
/// pool.
pub fn fulfill(
    requests: &[PreprocessRequest],
    cfg: &RunConfig,
    data: &Dataset,
) -> Result<ResourceCache, PreprocessError> {
    let mut wanted: BTreeSet<PreprocessRequest> = BTreeSet::new();
    let mut stack: Vec<PreprocessRequest> = requests.to_vec();
    while let Some(r) = stack.pop() {
        r.validate()?;
        if wanted.insert(r.clone()) {
            stack.extend(r.dependencies());
        }
    }
    if wanted.is_empty() {
        return Ok(ResourceCache::default());
    }

    let lowercase = cfg.settings.lowercase;
    let needs_tagger = wanted.iter().find(|r| {
        matches!(
            r,
            PreprocessRequest::TagTrain
                | PreprocessRequest::TagTest
                | PreprocessRequest::BuildLm {
                    level: Level::Pos,
                    ..
                }
        )
    });
    let needs_lm_corpus = wanted
        .iter()
        .find(|r| matches!(r, PreprocessRequest::BuildLm { .. }));

    // Stage 1: inputs that depend only on files.
    let (tagger, (lm_tokens, embeddings)) = rayon::join(
        || needs_tagger.map(|r| load_tagger(cfg, r)).transpose(),
        || {
            rayon::join(
                || needs_lm_corpus.map(|r| load_lm_corpus(cfg, r)).transpose(),
                || {
                    wanted
                        .contains(&PreprocessRequest::LoadEmbeddings)
                        .then(|| {
                            let path = cfg.input.embeddings.as_ref().ok_or(
                                PreprocessError::MissingInput {
                                    request: PreprocessRequest::LoadEmbeddings,
                                    input: "embeddings",
                                },
                            )?;
                            load_embeddings(path)
                        })
                        .transpose()
                },
            )
        },
    );
    let (tagger, lm_tokens, embeddings) = (tagger?, lm_tokens?, embeddings?);

    let mut cache = ResourceCache::default();
    if wanted.contains(&PreprocessRequest::TokenizeTrain) {
        cache.entries.insert(
            PreprocessRequest::TokenizeTrain,
            Resource::Tokens(Arc::new(tokenize_all(&data.train_sentences, lowercase))),
        );
    }
    if wanted.contains(&PreprocessRequest::TokenizeTest) {
        cache.entries.insert(
            PreprocessRequest::TokenizeTest,
            Resource::Tokens(Arc::new(tokenize_all(&data.test_sentences, lowercase))),
        );
    }
    if let Some(e) = embeddings {
        cache.entries.insert(
            PreprocessRequest::LoadEmbeddings,
            Resource::Embeddings(Arc::new(e)),
        );
    }

    // Stage 2: tag streams.
    let mut lm_tags = None;
    if let Some(model) = &tagger {
        for (tag_req, tok_req) in [
            (
                PreprocessRequest::TagTrain,
                PreprocessRequest::TokenizeTrain,
            ),
            (PreprocessRequest::TagTest, PreprocessRequest::TokenizeTest),
        ] {
            if wanted.contains(&tag_req) {
                let tags = tag_all(model, cache.tokens(&tok_req)?);
                cache
                    .entries
                    .insert(tag_req, Resource::Tags(Arc::new(tags)));
            }
        }
        if wanted.iter().any(|r| {
            matches!(
                r,
                PreprocessRequest::BuildLm {
                    level: Level::Pos,
                    ..
                }
            )
        }) {
            lm_tags = lm_tokens.as_ref().map(|t| tag_all(model, t));
        }
    }

    // Stage 3: count tables and language models.
    let derived: Vec<&PreprocessRequest> = wanted
        .iter()
        .filter(|r| {
            matches!(
                r,
                PreprocessRequest::NgramCounts { .. } | PreprocessRequest::BuildLm { .. }
            )
        })
        .collect();
    let built: Vec<(PreprocessRequest, Resource)> = derived
        .par_iter()
        .map(|&r| -> Result<_, PreprocessError> {
            let resource = match *r {
                PreprocessRequest::NgramCounts { n, cutoff, level } => {
                    let stream = match level {
                        Level::Word => cache.tokens(&PreprocessRequest::TokenizeTrain)?,
                        Level::Pos => cache.tags(&PreprocessRequest::TagTrain)?,
                    };
                    Resource::Counts(Arc::new(count_ngrams(stream, n, cutoff)))
                }
                PreprocessRequest::BuildLm { order, level } => {
                    let corpus = match level {
                        Level::Word => lm_tokens.as_ref(),
                        Level::Pos => lm_tags.as_ref(),
                    }
                    .expect("language model corpus loaded in stage 1");
                    let model = train_kn(corpus, order).map_err(|source| PreprocessError::Lm {
                        request: r.clone(),
                        source,
                    })?;
                    Resource::Lm(Arc::new(model))
                }
                _ => unreachable!(),
            };
            Ok((r.clone(), resource))
        })
        .collect::<Result<_, _>>()?;
    cache.entries.extend(built);
    debug_assert!(wanted.iter().all(|r| cache.entries.contains_key(r)));
    Ok(cache)
}
