//! Count-table based extractors: bag of n-grams, hashed n-grams and
//! frequency quantiles.

use std::collections::HashMap;

use crate::args::Args;
use crate::config::Settings;
use crate::hashing::{column_and_sign, hash_ngram};
use crate::preprocess::{Level, NgramCountTable, PreprocessRequest, TokenStream};
use crate::sparse::{FeatureBlock, FeatureDescriptor, SparseMatrix};

use super::{
    resource_error, stream_requests, Extractor, ExtractorContext, ExtractorEntry, FeatureError,
    HASHED_NGRAM_ID, NGRAM_ID, QUANTILE_ID,
};

const WORD_CUTOFFS: [usize; 5] = [3, 5, 5, 10, 10];
const POS_CUTOFFS: [usize; 5] = [10, 20, 20, 20, 20];
const WORD_HASH_DIMS: [usize; 5] = [50_000, 70_000, 70_000, 100_000, 150_000];
const POS_HASH_DIMS: [usize; 5] = [50, 2_500, 7_000, 10_000, 15_000];

/// Default frequency cutoff for orders 1 to 5.
pub fn default_cutoff(n: usize, level: Level) -> Option<usize> {
    let table = match level {
        Level::Word => &WORD_CUTOFFS,
        Level::Pos => &POS_CUTOFFS,
    };
    n.checked_sub(1).and_then(|i| table.get(i)).copied()
}

/// Default hashed output size for orders 1 to 5.
pub fn default_hash_dims(n: usize, level: Level) -> Option<usize> {
    let table = match level {
        Level::Word => &WORD_HASH_DIMS,
        Level::Pos => &POS_HASH_DIMS,
    };
    n.checked_sub(1).and_then(|i| table.get(i)).copied()
}

/// Which count table an extractor reads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSpec {
    pub level: Level,
    pub n: usize,
    pub cutoff: usize,
}

impl TableSpec {
    /// Reads `level`, `n` and `cutoff`. A default cutoff is multiplied by
    /// the configured cutoff scale; an explicit one is used as given.
    fn parse(args: &mut Args, settings: &Settings) -> Result<TableSpec, String> {
        let level = args.get_or("level", Level::Word)?;
        let n: usize = args.get_or("n", 1)?;
        if n < 1 {
            return Err("n must be at least 1".into());
        }
        let cutoff = match args.get::<usize>("cutoff")? {
            Some(c) if c >= 1 => c,
            Some(_) => return Err("cutoff must be at least 1".into()),
            None => {
                default_cutoff(n, level)
                    .ok_or_else(|| format!("no default cutoff for n={n}; pass cutoff="))?
                    * settings.cutoff_scale
            }
        };
        Ok(TableSpec { level, n, cutoff })
    }

    fn request(&self) -> PreprocessRequest {
        PreprocessRequest::NgramCounts {
            n: self.n,
            cutoff: self.cutoff,
            level: self.level,
        }
    }

    fn requests(&self) -> Vec<PreprocessRequest> {
        let mut r = vec![self.request()];
        r.extend(stream_requests(self.level));
        r
    }

    fn prefix(&self, base: &str) -> String {
        match self.level {
            Level::Word => format!("{base}{}", self.n),
            Level::Pos => format!("pos{base}{}", self.n),
        }
    }

    /// The count table and both sequence streams.
    fn resources<'a>(
        &self,
        ctx: &ExtractorContext<'a>,
        name: &'static str,
    ) -> Result<(&'a NgramCountTable, [&'a TokenStream; 2]), FeatureError> {
        let err = resource_error(name);
        let table = ctx.cache.counts(&self.request()).map_err(&err)?;
        let (train, test) = ctx.cache.streams(self.level).map_err(&err)?;
        Ok((table, [train, test]))
    }
}

/// Builds a matrix from per-sentence `(column, value)` lists.
fn matrix_from(
    n_cols: usize,
    sentences: &[Vec<String>],
    row: impl Fn(&[String]) -> Vec<(usize, f64)>,
) -> Result<SparseMatrix, FeatureError> {
    let triplets: Vec<(usize, usize, f64)> = sentences
        .iter()
        .enumerate()
        .flat_map(|(r, s)| row(s).into_iter().map(move |(c, v)| (r, c, v)))
        .collect();
    Ok(SparseMatrix::from_triplets(
        sentences.len(),
        n_cols,
        &triplets,
    )?)
}

/// Raw occurrence counts of the table's n-grams.
#[derive(Debug, Clone)]
pub struct NgramExtractor {
    pub spec: TableSpec,
}

const NGRAM_NAME: &str = "ngram";

impl Extractor for NgramExtractor {
    fn requests(&self) -> Vec<PreprocessRequest> {
        self.spec.requests()
    }

    fn extract(&self, ctx: &ExtractorContext) -> Result<FeatureBlock, FeatureError> {
        let (table, streams) = self.spec.resources(ctx, NGRAM_NAME)?;
        let index = table.index();
        let n = self.spec.n;
        let row = |s: &[String]| -> Vec<(usize, f64)> {
            s.windows(n)
                .filter_map(|g| index.get(g).map(|&c| (c, 1.0)))
                .collect()
        };
        let train = matrix_from(table.len(), streams[0], row)?;
        let test = matrix_from(table.len(), streams[1], row)?;
        let descriptor = FeatureDescriptor::new(
            NGRAM_ID,
            &self.spec.prefix("ngram"),
            table.counts.keys().map(|k| k.join(" ")),
        );
        Ok(FeatureBlock::new(NGRAM_ID, train, test, descriptor)?)
    }
}

/// Signed hashing of the table's n-grams into `dims` columns.
#[derive(Debug, Clone)]
pub struct HashedNgramExtractor {
    pub spec: TableSpec,
    pub dims: usize,
}

const HASHED_NAME: &str = "hashed-ngram";

/// Hashed row of one sentence, restricted to n-grams in `table`.
pub fn hashed_row(
    sentence: &[String],
    n: usize,
    dims: usize,
    table: &HashMap<&[String], usize>,
) -> Vec<(usize, f64)> {
    sentence
        .windows(n)
        .filter(|g| table.contains_key(g))
        .map(|g| column_and_sign(hash_ngram(g), dims))
        .collect()
}

impl Extractor for HashedNgramExtractor {
    fn requests(&self) -> Vec<PreprocessRequest> {
        self.spec.requests()
    }

    fn extract(&self, ctx: &ExtractorContext) -> Result<FeatureBlock, FeatureError> {
        let (table, streams) = self.spec.resources(ctx, HASHED_NAME)?;
        let index = table.index();
        let (n, dims) = (self.spec.n, self.dims);
        let row = |s: &[String]| hashed_row(s, n, dims, &index);
        let train = matrix_from(dims, streams[0], row)?;
        let test = matrix_from(dims, streams[1], row)?;
        let descriptor = FeatureDescriptor::new(
            HASHED_NGRAM_ID,
            &self.spec.prefix("hash"),
            (0..dims).map(|c| c.to_string()),
        );
        Ok(FeatureBlock::new(HASHED_NGRAM_ID, train, test, descriptor)?)
    }
}

/// Frequency-rank bin (0 = most frequent) of every n-gram in `table`.
/// N-grams are ranked by descending count, ties lexicographically, and
/// split into four bins of equal size; the remainder goes to the
/// lowest-frequency bins.
pub fn quantile_bins(table: &NgramCountTable) -> HashMap<&[String], usize> {
    let mut ranked: Vec<(&Vec<String>, usize)> =
        table.counts.iter().map(|(k, &c)| (k, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let (base, rem) = (ranked.len() / 4, ranked.len() % 4);
    let sizes: Vec<usize> = (0..4).map(|b| base + usize::from(b >= 4 - rem)).collect();
    let mut bins = HashMap::with_capacity(ranked.len());
    let mut it = ranked.into_iter();
    for (bin, &size) in sizes.iter().enumerate() {
        for (gram, _) in it.by_ref().take(size) {
            bins.insert(gram.as_slice(), bin);
        }
    }
    bins
}

/// Share of a sentence's n-grams in each frequency bin, with the OOV share
/// last. Sentences without n-grams give a zero row.
pub fn quantile_row(sentence: &[String], n: usize, bins: &HashMap<&[String], usize>) -> [f64; 5] {
    let mut row = [0.0; 5];
    let mut total = 0usize;
    for g in sentence.windows(n) {
        row[bins.get(g).copied().unwrap_or(4)] += 1.0;
        total += 1;
    }
    if total > 0 {
        row.iter_mut().for_each(|v| *v /= total as f64);
    }
    row
}

#[derive(Debug, Clone)]
pub struct QuantileExtractor {
    pub spec: TableSpec,
}

const QUANTILE_NAME: &str = "quantile";

impl Extractor for QuantileExtractor {
    fn requests(&self) -> Vec<PreprocessRequest> {
        self.spec.requests()
    }

    fn extract(&self, ctx: &ExtractorContext) -> Result<FeatureBlock, FeatureError> {
        let (table, streams) = self.spec.resources(ctx, QUANTILE_NAME)?;
        let bins = quantile_bins(table);
        let n = self.spec.n;
        let dense = |stream: &[Vec<String>]| {
            let rows: Vec<Vec<f64>> = stream
                .iter()
                .map(|s| quantile_row(s, n, &bins).to_vec())
                .collect();
            SparseMatrix::from_dense(5, &rows)
        };
        let descriptor = FeatureDescriptor::new(
            QUANTILE_ID,
            &self.spec.prefix("quantile"),
            ["q1", "q2", "q3", "q4", "oov"].map(String::from),
        );
        Ok(FeatureBlock::new(
            QUANTILE_ID,
            dense(streams[0]),
            dense(streams[1]),
            descriptor,
        )?)
    }
}

fn make_ngram(args: &mut Args, settings: &Settings) -> Result<Box<dyn Extractor>, String> {
    Ok(Box::new(NgramExtractor {
        spec: TableSpec::parse(args, settings)?,
    }))
}

fn make_hashed(args: &mut Args, settings: &Settings) -> Result<Box<dyn Extractor>, String> {
    let spec = TableSpec::parse(args, settings)?;
    let dims = match args.get::<usize>("dims")? {
        Some(0) => return Err("dims must be at least 1".into()),
        Some(d) => d,
        None => default_hash_dims(spec.n, spec.level)
            .ok_or_else(|| format!("no default dims for n={}; pass dims=", spec.n))?,
    };
    Ok(Box::new(HashedNgramExtractor { spec, dims }))
}

fn make_quantile(args: &mut Args, settings: &Settings) -> Result<Box<dyn Extractor>, String> {
    Ok(Box::new(QuantileExtractor {
        spec: TableSpec::parse(args, settings)?,
    }))
}

inventory::submit! {
    ExtractorEntry {
        id: NGRAM_ID,
        name: NGRAM_NAME,
        usage: "level=word|pos n=1 cutoff=<word 3,5,5,10,10; pos 10,20,20,20,20 by n>",
        make: make_ngram,
    }
}

inventory::submit! {
    ExtractorEntry {
        id: HASHED_NGRAM_ID,
        name: HASHED_NAME,
        usage: "level=word|pos n=1 cutoff=<as ngram> dims=<word 50000,70000,70000,100000,150000; pos 50,2500,7000,10000,15000 by n>",
        make: make_hashed,
    }
}

inventory::submit! {
    ExtractorEntry {
        id: QUANTILE_ID,
        name: QUANTILE_NAME,
        usage: "level=word|pos n=1 cutoff=<as ngram>",
        make: make_quantile,
    }
}
