//! Experiment configuration.
//!
//! A run is described by an INI file with five sections:
//!
//! ```ini
//! [input]
//! train_text = train.txt
//! train_labels = train.labels
//! test_text = test.txt
//! test_labels = test.labels
//! # optional: tagged_corpus, embeddings, lm_corpus
//!
//! [output]
//! directory = out
//! formats = csv, svmlight, arff
//!
//! [settings]
//! threads = 1
//! seed = 42
//! lowercase = true
//! log_level = info
//! cutoff_scale = 1
//! tagger_epochs = 5
//!
//! [features]
//! 2: level=word n=1
//! 2: level=word n=2
//!
//! [classifiers]
//! svm: folds=3
//! ```
//!
//! `[features]` and `[classifiers]` hold one request per line as
//! `<id or name>: <args>`; the args are passed through verbatim. `[settings]`
//! and `[classifiers]` may be omitted.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::export::ExportFormat;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("{0} section required")]
    MissingSection(&'static str),
    #[error("[{section}] is missing required key `{key}`")]
    MissingKey {
        section: &'static str,
        key: &'static str,
    },
    #[error("features section requires at least one feature request")]
    NoFeatures,
    #[error("line {line}: unknown feature id {id}; known ids: {known:?}")]
    UnknownFeature {
        line: usize,
        id: u32,
        known: Vec<u32>,
    },
    #[error("line {line}: unknown classifier `{name}`; known: {known:?}")]
    UnknownClassifier {
        line: usize,
        name: String,
        known: Vec<String>,
    },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue {
        line: usize,
        key: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputPaths {
    pub train_text: PathBuf,
    pub train_labels: PathBuf,
    pub test_text: PathBuf,
    pub test_labels: PathBuf,
    pub tagged_corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lm_corpus: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub directory: PathBuf,
    pub formats: Vec<ExportFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogLevel {
    Error,
    Info,
    Debug,
}

impl LogLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            LogLevel::Error => "error",
            LogLevel::Info => "info",
            LogLevel::Debug => "debug",
        }
    }

    pub fn to_filter(self) -> log::LevelFilter {
        match self {
            LogLevel::Error => log::LevelFilter::Error,
            LogLevel::Info => log::LevelFilter::Info,
            LogLevel::Debug => log::LevelFilter::Debug,
        }
    }
}

impl FromStr for LogLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(LogLevel::Error),
            "info" => Ok(LogLevel::Info),
            "debug" => Ok(LogLevel::Debug),
            other => Err(format!("expected error, info or debug, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub threads: usize,
    pub seed: u64,
    pub lowercase: bool,
    pub log_level: LogLevel,
    /// Multiplier applied to default n-gram frequency cutoffs.
    pub cutoff_scale: usize,
    pub tagger_epochs: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            threads: 1,
            seed: 42,
            lowercase: true,
            log_level: LogLevel::Info,
            cutoff_scale: 1,
            tagger_epochs: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRequest {
    pub feature_id: u32,
    pub args: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierRequest {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: InputPaths,
    pub output: OutputSettings,
    pub settings: Settings,
    pub feature_requests: Vec<FeatureRequest>,
    pub classifier_requests: Vec<ClassifierRequest>,
}

/// A referenced file that does not exist or cannot be read.
#[derive(Debug, Clone, PartialEq)]
pub struct MissingPath {
    pub key: &'static str,
    pub path: PathBuf,
}

impl std::fmt::Display for MissingPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} = {} is not a readable file",
            self.key,
            self.path.display()
        )
    }
}

/// Parses a config against the built-in extractor and classifier registries.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let features: Vec<u32> = crate::features::registry().iter().map(|e| e.id).collect();
    let classifiers: Vec<&str> = crate::classify::registry().iter().map(|e| e.name).collect();
    parse_config_with(text, &features, &classifiers)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Input,
    Output,
    Settings,
    Features,
    Classifiers,
}

impl Section {
    const ALL: [(Section, &'static str); 5] = [
        (Section::Input, "input"),
        (Section::Output, "output"),
        (Section::Settings, "settings"),
        (Section::Features, "features"),
        (Section::Classifiers, "classifiers"),
    ];
}

/// Parses a config, accepting only the given feature ids and classifier names.
pub fn parse_config_with(
    text: &str,
    known_features: &[u32],
    known_classifiers: &[&str],
) -> Result<RunConfig, ConfigError> {
    let mut seen = Vec::new();
    let mut section: Option<Section> = None;
    let mut input: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    let mut output: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    let mut settings_kv: Vec<(usize, String, String)> = Vec::new();
    let mut feature_requests = Vec::new();
    let mut classifier_requests = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |message: String| ConfigError::Malformed {
            line: line_no,
            message,
        };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| malformed(format!("unterminated section header `{line}`")))?
                .trim();
            let &(found, canonical) = Section::ALL
                .iter()
                .find(|(_, n)| *n == name)
                .ok_or_else(|| malformed(format!("unknown section [{name}]")))?;
            if seen.contains(&canonical) {
                return Err(malformed(format!("duplicate section [{name}]")));
            }
            seen.push(canonical);
            section = Some(found);
            continue;
        }
        let current =
            section.ok_or_else(|| malformed("entry outside of any section".to_string()))?;
        match current {
            Section::Input | Section::Output | Section::Settings => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| malformed(format!("expected `key = value`, got `{line}`")))?;
                let (key, value) = (key.trim(), value.trim().to_string());
                let allowed: &[&'static str] = match current {
                    Section::Input => &[
                        "train_text",
                        "train_labels",
                        "test_text",
                        "test_labels",
                        "tagged_corpus",
                        "embeddings",
                        "lm_corpus",
                    ],
                    Section::Output => &["directory", "formats"],
                    _ => &[
                        "threads",
                        "seed",
                        "lowercase",
                        "log_level",
                        "cutoff_scale",
                        "tagger_epochs",
                    ],
                };
                let key = *allowed
                    .iter()
                    .find(|k| **k == key)
                    .ok_or_else(|| malformed(format!("unknown key `{key}`")))?;
                let target = match current {
                    Section::Input => Some(&mut input),
                    Section::Output => Some(&mut output),
                    _ => None,
                };
                match target {
                    Some(map) => {
                        if map.insert(key, (line_no, value)).is_some() {
                            return Err(malformed(format!("duplicate key `{key}`")));
                        }
                    }
                    None => settings_kv.push((line_no, key.to_string(), value)),
                }
            }
            Section::Features => {
                let (id, args) = split_request(line).ok_or_else(|| {
                    malformed(format!("expected `<feature id>: <args>`, got `{line}`"))
                })?;
                let feature_id: u32 = id
                    .parse()
                    .map_err(|_| malformed(format!("feature id `{id}` is not a number")))?;
                if !known_features.contains(&feature_id) {
                    return Err(ConfigError::UnknownFeature {
                        line: line_no,
                        id: feature_id,
                        known: known_features.to_vec(),
                    });
                }
                feature_requests.push(FeatureRequest {
                    feature_id,
                    args: args.to_string(),
                });
            }
            Section::Classifiers => {
                let (name, args) = split_request(line).ok_or_else(|| {
                    malformed(format!("expected `<classifier>: <params>`, got `{line}`"))
                })?;
                if !known_classifiers.contains(&name) {
                    return Err(ConfigError::UnknownClassifier {
                        line: line_no,
                        name: name.to_string(),
                        known: known_classifiers.iter().map(|s| s.to_string()).collect(),
                    });
                }
                let params = parse_key_values(args).map_err(malformed)?;
                classifier_requests.push(ClassifierRequest {
                    name: name.to_string(),
                    params,
                });
            }
        }
    }

    for required in ["input", "output", "features"] {
        if !seen.contains(&required) {
            return Err(ConfigError::MissingSection(required));
        }
    }
    if feature_requests.is_empty() {
        return Err(ConfigError::NoFeatures);
    }

    let mut take_path = |key: &'static str| input.remove(key).map(|(_, v)| PathBuf::from(v));
    let mut required = |key: &'static str| {
        take_path(key)
            .filter(|p| !p.as_os_str().is_empty())
            .ok_or(ConfigError::MissingKey {
                section: "input",
                key,
            })
    };
    let train_text = required("train_text")?;
    let train_labels = required("train_labels")?;
    let test_text = required("test_text")?;
    let test_labels = required("test_labels")?;
    let optional = |key: &str| {
        input
            .get(key)
            .filter(|(_, v)| !v.is_empty())
            .map(|(_, v)| PathBuf::from(v))
    };
    let inputs = InputPaths {
        train_text,
        train_labels,
        test_text,
        test_labels,
        tagged_corpus: optional("tagged_corpus"),
        embeddings: optional("embeddings"),
        lm_corpus: optional("lm_corpus"),
    };

    let directory = output
        .get("directory")
        .filter(|(_, v)| !v.is_empty())
        .map(|(_, v)| PathBuf::from(v))
        .ok_or(ConfigError::MissingKey {
            section: "output",
            key: "directory",
        })?;
    let formats = match output.get("formats") {
        None => vec![ExportFormat::Csv],
        Some((line, v)) => parse_formats(v).map_err(|message| ConfigError::InvalidValue {
            line: *line,
            key: "formats".into(),
            message,
        })?,
    };

    let mut settings = Settings::default();
    for (line, key, value) in settings_kv {
        let invalid = |message: String| ConfigError::InvalidValue {
            line,
            key: key.clone(),
            message,
        };
        match key.as_str() {
            "threads" => {
                settings.threads = parse_positive(&value).map_err(invalid)?;
            }
            "seed" => settings.seed = value.parse().map_err(|e| invalid(format!("{e}")))?,
            "lowercase" => settings.lowercase = parse_bool(&value).map_err(invalid)?,
            "log_level" => settings.log_level = value.parse().map_err(invalid)?,
            "cutoff_scale" => settings.cutoff_scale = parse_positive(&value).map_err(invalid)?,
            "tagger_epochs" => settings.tagger_epochs = parse_positive(&value).map_err(invalid)?,
            _ => unreachable!("settings keys are checked while reading"),
        }
    }

    Ok(RunConfig {
        input: inputs,
        output: OutputSettings { directory, formats },
        settings,
        feature_requests,
        classifier_requests,
    })
}

fn split_request(line: &str) -> Option<(&str, &str)> {
    let (head, args) = line.split_once(':')?;
    let head = head.trim();
    if head.is_empty() || head.contains(char::is_whitespace) {
        return None;
    }
    Some((head, args.trim()))
}

/// Parses space-separated `key=value` tokens.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for token in text.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .filter(|(k, _)| !k.is_empty())
            .ok_or_else(|| format!("expected `key=value`, got `{token}`"))?;
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(format!("duplicate parameter `{k}`"));
        }
    }
    Ok(out)
}

fn parse_formats(value: &str) -> Result<Vec<ExportFormat>, String> {
    if value == "none" || value.is_empty() {
        return Ok(Vec::new());
    }
    let mut formats = Vec::new();
    for part in value.split(',') {
        let f: ExportFormat = part.trim().parse()?;
        if !formats.contains(&f) {
            formats.push(f);
        }
    }
    Ok(formats)
}

fn parse_positive(value: &str) -> Result<usize, String> {
    match value.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{value}`")),
    }
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{value}`")),
    }
}

impl RunConfig {
    /// Renders the config in canonical INI form; `parse_config` inverts it.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let p = |p: &Path| p.display().to_string();
        s.push_str("[input]\n");
        let _ = writeln!(s, "train_text = {}", p(&self.input.train_text));
        let _ = writeln!(s, "train_labels = {}", p(&self.input.train_labels));
        let _ = writeln!(s, "test_text = {}", p(&self.input.test_text));
        let _ = writeln!(s, "test_labels = {}", p(&self.input.test_labels));
        for (key, value) in [
            ("tagged_corpus", &self.input.tagged_corpus),
            ("embeddings", &self.input.embeddings),
            ("lm_corpus", &self.input.lm_corpus),
        ] {
            if let Some(v) = value {
                let _ = writeln!(s, "{key} = {}", p(v));
            }
        }
        s.push_str("\n[output]\n");
        let _ = writeln!(s, "directory = {}", p(&self.output.directory));
        let formats = if self.output.formats.is_empty() {
            "none".to_string()
        } else {
            self.output
                .formats
                .iter()
                .map(|f| f.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(s, "formats = {formats}");
        let st = &self.settings;
        s.push_str("\n[settings]\n");
        let _ = writeln!(s, "threads = {}", st.threads);
        let _ = writeln!(s, "seed = {}", st.seed);
        let _ = writeln!(s, "lowercase = {}", st.lowercase);
        let _ = writeln!(s, "log_level = {}", st.log_level.as_str());
        let _ = writeln!(s, "cutoff_scale = {}", st.cutoff_scale);
        let _ = writeln!(s, "tagger_epochs = {}", st.tagger_epochs);
        s.push_str("\n[features]\n");
        for r in &self.feature_requests {
            let _ = writeln!(s, "{}: {}", r.feature_id, r.args);
        }
        s.push_str("\n[classifiers]\n");
        for r in &self.classifier_requests {
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(s, "{}: {}", r.name, params.join(" "));
        }
        s
    }

    /// Rebases relative input and output paths onto `base`.
    pub fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let i = &mut self.input;
        for p in [
            &mut i.train_text,
            &mut i.train_labels,
            &mut i.test_text,
            &mut i.test_labels,
        ] {
            fix(p);
        }
        for p in [&mut i.tagged_corpus, &mut i.embeddings, &mut i.lm_corpus]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.output.directory);
    }
}

/// Checks that every referenced input file is readable. Reports all
/// missing paths rather than stopping at the first.
pub fn validate_paths(cfg: &RunConfig) -> Result<(), Vec<MissingPath>> {
    let i = &cfg.input;
    let mut refs: Vec<(&'static str, &PathBuf)> = vec![
        ("train_text", &i.train_text),
        ("train_labels", &i.train_labels),
        ("test_text", &i.test_text),
        ("test_labels", &i.test_labels),
    ];
    for (key, p) in [
        ("tagged_corpus", &i.tagged_corpus),
        ("embeddings", &i.embeddings),
        ("lm_corpus", &i.lm_corpus),
    ] {
        if let Some(p) = p {
            refs.push((key, p));
        }
    }
    let missing: Vec<MissingPath> = refs
        .into_iter()
        .filter(|(_, p)| !(p.is_file() && std::fs::File::open(p).is_ok()))
        .map(|(key, p)| MissingPath {
            key,
            path: p.clone(),
        })
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(missing)
    }
}
