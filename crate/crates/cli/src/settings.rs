//! Config-file handling and resource loading.
//!
//! Every flag can also come from a flat TOML config file (`--config`); an
//! explicit flag always wins. Resource paths additionally fall back to
//! well-known filenames under `$NRR_RESOURCE_DIR`.

use std::path::{Path, PathBuf};

use nrr_core::features::Resources;
use nrr_core::lexicon::WordComplexityLexicon;
use nrr_core::resources::{EmbeddingStore, FrequencyTable, NGramLanguageModel};
use nrr_core::{Error, Result};

/// Environment variable naming the default resource directory.
pub const RESOURCE_DIR_ENV: &str = "NRR_RESOURCE_DIR";

/// Flat key/value settings read from the optional TOML config file.
#[derive(Debug, Default)]
pub struct Settings {
    table: toml::Table,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let body = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let table: toml::Table = body.parse().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("invalid TOML: {e}"),
        })?;
        Ok(Settings { table })
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.table.get(key)?.as_str().map(PathBuf::from)
    }

    pub fn f64(&self, key: &str) -> Option<f64> {
        let v = self.table.get(key)?;
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }

    pub fn usize(&self, key: &str) -> Option<usize> {
        self.table.get(key)?.as_integer().map(|i| i as usize)
    }

    pub fn u64(&self, key: &str) -> Option<u64> {
        self.table.get(key)?.as_integer().map(|i| i as u64)
    }
}

/// Flag value if given, else config value, else the built-in default.
pub fn resolve<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// A resource path: explicit flag, else config key, else a well-known
/// filename under `$NRR_RESOURCE_DIR` (only when that file exists).
pub fn resource_path(
    flag: Option<&Path>,
    settings: &Settings,
    key: &str,
    default_name: &str,
) -> Option<PathBuf> {
    if let Some(p) = flag {
        return Some(p.to_path_buf());
    }
    if let Some(p) = settings.path(key) {
        return Some(p);
    }
    if let Ok(dir) = std::env::var(RESOURCE_DIR_ENV) {
        let candidate = Path::new(&dir).join(default_name);
        if candidate.exists() {
            return Some(candidate);
        }
    }
    None
}

/// Resource path flags shared by the commands that extract features.
#[derive(Debug, clap::Args)]
pub struct ResourceArgs {
    /// Word-complexity lexicon TSV
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Trained language model file
    #[arg(long, value_name = "FILE")]
    pub lm: Option<PathBuf>,
    /// Corpus frequency table TSV (`token<TAB>count`)
    #[arg(long, value_name = "FILE")]
    pub google_freq: Option<PathBuf>,
    /// Simple Wikipedia frequency table TSV
    #[arg(long, value_name = "FILE")]
    pub wiki_simple: Option<PathBuf>,
    /// Wikipedia frequency table TSV
    #[arg(long, value_name = "FILE")]
    pub wiki_normal: Option<PathBuf>,
    /// Embedding file: text format, or a cache previously written by
    /// `--write-embedding-cache`
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// Write the loaded embeddings back out as a binary cache
    #[arg(long, value_name = "FILE")]
    pub write_embedding_cache: Option<PathBuf>,
}

impl ResourceArgs {
    pub fn load(&self, settings: &Settings) -> Result<Resources> {
        let mut resources = Resources::default();
        if let Some(p) = resource_path(self.lexicon.as_deref(), settings, "lexicon", "lexicon.tsv")
        {
            resources.lexicon = Some(WordComplexityLexicon::load(&p)?);
        }
        if let Some(p) = resource_path(self.lm.as_deref(), settings, "lm", "lm.bin") {
            resources.lm = Some(NGramLanguageModel::load(&p)?);
        }
        if let Some(p) = resource_path(
            self.google_freq.as_deref(),
            settings,
            "google_freq",
            "google_freq.tsv",
        ) {
            resources.google_freq = Some(FrequencyTable::load(&p)?);
        }
        if let Some(p) = resource_path(
            self.wiki_simple.as_deref(),
            settings,
            "wiki_simple",
            "wiki_simple.tsv",
        ) {
            resources.wiki_simple = Some(FrequencyTable::load(&p)?);
        }
        if let Some(p) = resource_path(
            self.wiki_normal.as_deref(),
            settings,
            "wiki_normal",
            "wiki_normal.tsv",
        ) {
            resources.wiki_normal = Some(FrequencyTable::load(&p)?);
        }
        if let Some(p) = resource_path(
            self.embeddings.as_deref(),
            settings,
            "embeddings",
            "embeddings.txt",
        ) {
            // The cache has magic bytes; fall back to the text reader.
            let store = match EmbeddingStore::load_cache(&p) {
                Ok(store) => store,
                Err(Error::CorruptFile { .. }) => EmbeddingStore::load_text(&p)?,
                Err(other) => return Err(other),
            };
            resources.embeddings = Some(store);
        }
        if let Some(cache) = &self.write_embedding_cache {
            match &resources.embeddings {
                Some(store) => store.save_cache(cache)?,
                None => {
                    return Err(Error::MissingResource(
                        "embedding store (needed to write a cache)",
                    ))
                }
            }
        }
        Ok(resources)
    }
}
