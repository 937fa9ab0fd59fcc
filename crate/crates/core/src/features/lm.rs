//! Sentence scores under the internal n-gram language model.

use crate::args::Args;
use crate::config::Settings;
use crate::preprocess::{Level, PreprocessRequest};
use crate::sparse::{FeatureBlock, FeatureDescriptor, SparseMatrix};

use super::{
    resource_error, stream_requests, Extractor, ExtractorContext, ExtractorEntry, FeatureError,
    LM_ID,
};

const NAME: &str = "lm";
pub const DEFAULT_ORDER: usize = 3;

/// `[logprob10, perplexity, mean surprisal bits]` per sentence.
#[derive(Debug, Clone)]
pub struct LmExtractor {
    pub level: Level,
    pub order: usize,
}

impl LmExtractor {
    fn lm_request(&self) -> PreprocessRequest {
        PreprocessRequest::BuildLm {
            order: self.order,
            level: self.level,
        }
    }
}

impl Extractor for LmExtractor {
    fn requests(&self) -> Vec<PreprocessRequest> {
        let mut r = vec![self.lm_request()];
        r.extend(stream_requests(self.level));
        r
    }

    fn extract(&self, ctx: &ExtractorContext) -> Result<FeatureBlock, FeatureError> {
        let err = resource_error(NAME);
        let model = ctx.cache.lm(&self.lm_request()).map_err(&err)?;
        let (train, test) = ctx.cache.streams(self.level).map_err(&err)?;
        let dense = |stream: &[Vec<String>]| {
            let rows: Vec<Vec<f64>> = stream
                .iter()
                .map(|s| model.sentence_scores(s).to_vec())
                .collect();
            SparseMatrix::from_dense(3, &rows)
        };
        let prefix = match self.level {
            Level::Word => "lm",
            Level::Pos => "poslm",
        };
        let descriptor = FeatureDescriptor::new(
            LM_ID,
            prefix,
            ["logprob10", "perplexity", "surprisal_bits"].map(String::from),
        );
        Ok(FeatureBlock::new(
            LM_ID,
            dense(train),
            dense(test),
            descriptor,
        )?)
    }
}

fn make(args: &mut Args, _: &Settings) -> Result<Box<dyn Extractor>, String> {
    let level = args.get_or("level", Level::Word)?;
    let order = args.get_or("order", DEFAULT_ORDER)?;
    if order < 1 {
        return Err("order must be at least 1".into());
    }
    Ok(Box::new(LmExtractor { level, order }))
}

inventory::submit! {
    ExtractorEntry {
        id: LM_ID,
        name: NAME,
        usage: "level=word|pos order=3 (needs lm_corpus in [input])",
        make,
    }
}
