//! Sentence vectors from word embeddings: averaged pretrained vectors and
//! the hidden layer of a supervised averaged-embedding classifier.

use crate::args::Args;
use crate::classify::{supervised_options, train_supervised_embedding, SupervisedEmbeddingOptions};
use crate::config::Settings;
use crate::preprocess::{EmbeddingTable, PreprocessRequest};
use crate::sparse::{FeatureBlock, FeatureDescriptor, SparseMatrix};

use super::{
    resource_error, Extractor, ExtractorContext, ExtractorEntry, FeatureError, AVG_EMBEDDING_ID,
    SUPERVISED_EMBEDDING_ID,
};

const AVG_NAME: &str = "avg-embedding";
const SUPERVISED_NAME: &str = "supervised-embedding";

/// Mean vector of the in-vocabulary tokens; zero if there are none.
pub fn average_vector<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim];
    let mut known = 0usize;
    for v in tokens.iter().filter_map(|t| table.get(t.as_ref())) {
        sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        known += 1;
    }
    if known > 0 {
        sum.iter_mut().for_each(|s| *s /= known as f64);
    }
    sum
}

fn token_requests() -> [PreprocessRequest; 2] {
    [
        PreprocessRequest::TokenizeTrain,
        PreprocessRequest::TokenizeTest,
    ]
}

fn dims(n: usize) -> impl Iterator<Item = String> {
    (0..n).map(|i| i.to_string())
}

#[derive(Debug, Clone, Default)]
pub struct AvgEmbeddingExtractor;

impl Extractor for AvgEmbeddingExtractor {
    fn requests(&self) -> Vec<PreprocessRequest> {
        let mut r = vec![PreprocessRequest::LoadEmbeddings];
        r.extend(token_requests());
        r
    }

    fn extract(&self, ctx: &ExtractorContext) -> Result<FeatureBlock, FeatureError> {
        let err = resource_error(AVG_NAME);
        let table = ctx
            .cache
            .embeddings(&PreprocessRequest::LoadEmbeddings)
            .map_err(&err)?;
        let [train, test] = token_requests().map(|r| ctx.cache.tokens(&r));
        let dense = |stream: &[Vec<String>]| {
            let rows: Vec<Vec<f64>> = stream.iter().map(|s| average_vector(s, table)).collect();
            SparseMatrix::from_dense(table.dim, &rows)
        };
        Ok(FeatureBlock::new(
            AVG_EMBEDDING_ID,
            dense(train.map_err(&err)?),
            dense(test.map_err(&err)?),
            FeatureDescriptor::new(AVG_EMBEDDING_ID, "avgemb", dims(table.dim)),
        )?)
    }
}

/// Trains a supervised averaged-embedding model on the train split and
/// emits its sentence representations.
#[derive(Debug, Clone)]
pub struct SupervisedEmbeddingExtractor {
    pub options: SupervisedEmbeddingOptions,
}

impl Extractor for SupervisedEmbeddingExtractor {
    fn requests(&self) -> Vec<PreprocessRequest> {
        token_requests().to_vec()
    }

    fn extract(&self, ctx: &ExtractorContext) -> Result<FeatureBlock, FeatureError> {
        let err = resource_error(SUPERVISED_NAME);
        let train = ctx
            .cache
            .tokens(&PreprocessRequest::TokenizeTrain)
            .map_err(&err)?;
        let test = ctx
            .cache
            .tokens(&PreprocessRequest::TokenizeTest)
            .map_err(&err)?;
        let model = train_supervised_embedding(
            train,
            &ctx.data.train_labels,
            ctx.data.n_classes(),
            &self.options,
        )
        .map_err(|e| FeatureError::Extractor {
            name: SUPERVISED_NAME,
            message: e.to_string(),
        })?;
        let dim = self.options.dim;
        let dense = |stream: &[Vec<String>]| {
            let rows: Vec<Vec<f64>> = stream.iter().map(|s| model.hidden(s)).collect();
            SparseMatrix::from_dense(dim, &rows)
        };
        Ok(FeatureBlock::new(
            SUPERVISED_EMBEDDING_ID,
            dense(train),
            dense(test),
            FeatureDescriptor::new(SUPERVISED_EMBEDDING_ID, "supemb", dims(dim)),
        )?)
    }
}

fn make_avg(_: &mut Args, _: &Settings) -> Result<Box<dyn Extractor>, String> {
    Ok(Box::new(AvgEmbeddingExtractor))
}

fn make_supervised(args: &mut Args, settings: &Settings) -> Result<Box<dyn Extractor>, String> {
    let seed = args.get_or("seed", settings.seed)?;
    let options = supervised_options(args, seed)?;
    if options.dim == 0 || options.epochs == 0 || options.lr.is_nan() || options.lr <= 0.0 {
        return Err("dim, epochs and lr must be positive".into());
    }
    Ok(Box::new(SupervisedEmbeddingExtractor { options }))
}

inventory::submit! {
    ExtractorEntry {
        id: AVG_EMBEDDING_ID,
        name: AVG_NAME,
        usage: "(no arguments; needs embeddings in [input])",
        make: make_avg,
    }
}

inventory::submit! {
    ExtractorEntry {
        id: SUPERVISED_EMBEDDING_ID,
        name: SUPERVISED_NAME,
        usage: "dim=10 epochs=5 lr=0.1 buckets=1000000 seed=<run seed>",
        make: make_supervised,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::test_support::{cache_with, dataset, make, run};
    use super::*;
    use crate::classify::{predict, train_linear_svm, SvmOptions};
    use crate::preprocess::{parse_embeddings, Resource};

    fn table() -> EmbeddingTable {
        parse_embeddings("2 2\ncat 1 2\ndog 3 -4\n").unwrap()
    }

    #[test]
    fn averaging_cases() {
        let t = table();
        assert_eq!(average_vector(&["cat"], &t), [1.0, 2.0]);
        assert_eq!(average_vector(&["cat", "dog", "zebra"], &t), [2.0, -1.0]);
        assert_eq!(average_vector(&["zebra"], &t), [0.0, 0.0]);
    }

    #[test]
    fn avg_block_shape() {
        let mut cache = cache_with(&[&["cat"], &["x"]], &[&["dog"]], None, &[]);
        cache.insert(
            PreprocessRequest::LoadEmbeddings,
            Resource::Embeddings(Arc::new(table())),
        );
        let block = run(make(AVG_EMBEDDING_ID, "").as_ref(), &cache, &dataset(2, 1)).unwrap();
        assert_eq!(block.descriptor.column_names, ["avgemb:0", "avgemb:1"]);
        assert_eq!(block.train.dense_row(1), [0.0, 0.0]);
        assert_eq!(block.test.dense_row(0), [3.0, -4.0]);
    }

    fn disjoint() -> (Vec<Vec<&'static str>>, Vec<usize>) {
        let a = ["apple", "banana", "cherry", "grape", "melon"];
        let b = ["engine", "wheel", "brake", "piston", "gear"];
        let mut sents = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let (words, label) = if i % 2 == 0 { (&a, 0) } else { (&b, 1) };
            sents.push((0..3).map(|k| words[(i + 2 * k) % 5]).collect());
            labels.push(label);
        }
        (sents, labels)
    }

    #[test]
    fn supervised_representation_is_separable_and_deterministic() {
        let (sents, labels) = disjoint();
        let rows: Vec<&[&str]> = sents.iter().map(Vec::as_slice).collect();
        let cache = cache_with(&rows, &rows[..4], None, &[]);
        let mut data = dataset(rows.len(), 4);
        data.train_labels = labels.clone();
        let ex = make(SUPERVISED_EMBEDDING_ID, "dim=6 epochs=10 buckets=100");
        let block = run(ex.as_ref(), &cache, &data).unwrap();
        assert_eq!(block.n_cols(), 6);
        assert_eq!(block, run(ex.as_ref(), &cache, &data).unwrap());
        let svm = train_linear_svm(&block.train, &labels, 2, &SvmOptions::default()).unwrap();
        assert_eq!(predict(&svm, &block.train).unwrap(), labels);
    }
}
