//! Surface and lexical sentence statistics.

use std::collections::HashSet;

use crate::args::Args;
use crate::config::Settings;
use crate::preprocess::{is_punct_token, PreprocessRequest};
use crate::sparse::{FeatureBlock, FeatureDescriptor, SparseMatrix};

use super::{
    resource_error, Extractor, ExtractorContext, ExtractorEntry, FeatureError, SURFACE_ID,
};

const NAME: &str = "surface";

pub const COLUMNS: [&str; 7] = [
    "tokens",
    "mean_word_length",
    "type_token_ratio",
    "adjective_ratio",
    "verb_ratio",
    "noun_ratio",
    "adverb_ratio",
];

/// Tag prefixes that place a tag in each lexical class.
#[derive(Debug, Clone, PartialEq)]
pub struct TagClasses {
    pub adjective: Vec<String>,
    pub verb: Vec<String>,
    pub noun: Vec<String>,
    pub adverb: Vec<String>,
}

impl Default for TagClasses {
    fn default() -> Self {
        TagClasses {
            adjective: vec!["JJ".into()],
            verb: vec!["VB".into()],
            noun: vec!["NN".into()],
            adverb: vec!["RB".into()],
        }
    }
}

impl TagClasses {
    fn classes(&self) -> [&[String]; 4] {
        [&self.adjective, &self.verb, &self.noun, &self.adverb]
    }
}

#[derive(Debug, Clone, Default)]
pub struct SurfaceExtractor {
    pub classes: TagClasses,
}

/// The seven statistics of one tokenized, tagged sentence.
pub fn surface_row<S: AsRef<str>>(tokens: &[S], tags: &[S], classes: &TagClasses) -> [f64; 7] {
    let mut row = [0.0; 7];
    if tokens.is_empty() {
        return row;
    }
    let n = tokens.len() as f64;
    row[0] = n;
    let words: Vec<&str> = tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !is_punct_token(t))
        .collect();
    if !words.is_empty() {
        let chars: usize = words.iter().map(|w| w.chars().count()).sum();
        row[1] = chars as f64 / words.len() as f64;
    }
    let types: HashSet<&str> = tokens.iter().map(AsRef::as_ref).collect();
    row[2] = types.len() as f64 / n;
    for (slot, prefixes) in classes.classes().iter().enumerate() {
        let hits = tags
            .iter()
            .filter(|t| prefixes.iter().any(|p| t.as_ref().starts_with(p.as_str())))
            .count();
        row[3 + slot] = hits as f64 / n;
    }
    row
}

impl Extractor for SurfaceExtractor {
    fn requests(&self) -> Vec<PreprocessRequest> {
        vec![
            PreprocessRequest::TokenizeTrain,
            PreprocessRequest::TokenizeTest,
            PreprocessRequest::TagTrain,
            PreprocessRequest::TagTest,
        ]
    }

    fn extract(&self, ctx: &ExtractorContext) -> Result<FeatureBlock, FeatureError> {
        let err = resource_error(NAME);
        let matrix = |tokens: &PreprocessRequest, tags: &PreprocessRequest| {
            let tokens = ctx.cache.tokens(tokens).map_err(&err)?;
            let tags = ctx.cache.tags(tags).map_err(&err)?;
            let rows: Vec<Vec<f64>> = tokens
                .iter()
                .zip(tags)
                .map(|(t, g)| surface_row(t, g, &self.classes).to_vec())
                .collect();
            Ok::<_, FeatureError>(SparseMatrix::from_dense(COLUMNS.len(), &rows))
        };
        let train = matrix(
            &PreprocessRequest::TokenizeTrain,
            &PreprocessRequest::TagTrain,
        )?;
        let test = matrix(
            &PreprocessRequest::TokenizeTest,
            &PreprocessRequest::TagTest,
        )?;
        let descriptor =
            FeatureDescriptor::new(SURFACE_ID, NAME, COLUMNS.iter().map(|c| c.to_string()));
        Ok(FeatureBlock::new(SURFACE_ID, train, test, descriptor)?)
    }
}

fn make(args: &mut Args, _: &Settings) -> Result<Box<dyn Extractor>, String> {
    let d = TagClasses::default();
    Ok(Box::new(SurfaceExtractor {
        classes: TagClasses {
            adjective: args.list("adjective")?.unwrap_or(d.adjective),
            verb: args.list("verb")?.unwrap_or(d.verb),
            noun: args.list("noun")?.unwrap_or(d.noun),
            adverb: args.list("adverb")?.unwrap_or(d.adverb),
        },
    }))
}

inventory::submit! {
    ExtractorEntry {
        id: SURFACE_ID,
        name: NAME,
        usage: "adjective=JJ verb=VB noun=NN adverb=RB (comma-separated tag prefixes)",
        make,
    }
}
