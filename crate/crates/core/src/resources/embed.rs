//! Word-embedding store: text-format loader, a binary cache it writes
//! itself, phrase averaging, and cosine similarity.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter};
use std::path::Path;

use indexmap::IndexMap;

use crate::bytes::{BinReader, BinWriter};
use crate::error::{Error, Result};

const CACHE_MAGIC: &[u8; 4] = b"NREC";
const CACHE_VERSION: u32 = 1;

/// Fixed-dimension vectors keyed by token.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: IndexMap<String, Vec<f64>>,
}

/// Mean of the in-vocabulary word vectors of a phrase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseEmbedding {
    pub vector: Vec<f64>,
    /// Number of phrase words found in the store. Zero means the vector is
    /// all zeros and carries no signal.
    pub covered: usize,
    pub words: usize,
}

impl PhraseEmbedding {
    pub fn any_coverage(&self) -> bool {
        self.covered > 0
    }
}

impl EmbeddingStore {
    /// Load the standard text format: `word v1 v2 ... vd`, one entry per
    /// line, optionally preceded by a `count dim` header line.
    pub fn load_text(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut vectors: IndexMap<String, Vec<f64>> = IndexMap::new();
        let mut dim = 0usize;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            let word = parts.next().expect("non-empty line has a first token");
            let values: Vec<f64> = parts
                .map(|p| {
                    p.parse::<f64>().map_err(|_| {
                        Error::parse(path, lineno, format!("non-numeric component {p:?}"))
                    })
                })
                .collect::<Result<_>>()?;
            // word2vec-style header: two integers on the first line.
            if lineno == 1 && values.len() == 1 && word.parse::<u64>().is_ok() {
                continue;
            }
            if values.is_empty() {
                return Err(Error::parse(path, lineno, "entry has no vector components"));
            }
            if dim == 0 {
                dim = values.len();
            } else if values.len() != dim {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected {dim} components, found {}", values.len()),
                ));
            }
            vectors.insert(word.to_string(), values);
        }
        if vectors.is_empty() {
            return Err(Error::EmptyInput("embedding file has no entries"));
        }
        log::info!(
            "loaded {} embeddings (dim {}) from {}",
            vectors.len(),
            dim,
            path.display()
        );
        Ok(EmbeddingStore { dim, vectors })
    }

    /// Write the binary cache (versioned header, little-endian doubles).
    pub fn save_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BinWriter::new(BufWriter::new(file));
        let io = |e| Error::io(path, e);
        w.u32(u32::from_le_bytes(*CACHE_MAGIC)).map_err(io)?;
        w.u32(CACHE_VERSION).map_err(io)?;
        w.u32(self.dim as u32).map_err(io)?;
        w.u64(self.vectors.len() as u64).map_err(io)?;
        for (word, vec) in &self.vectors {
            w.str(word).map_err(io)?;
            w.f64_slice(vec).map_err(io)?;
        }
        Ok(())
    }

    /// Read a cache written by [`EmbeddingStore::save_cache`]. The file is
    /// memory-mapped and decoded in one pass.
    pub fn load_cache(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        // Safety: the cache is private to this toolkit and not expected to
        // be mutated while mapped.
        let map = unsafe { memmap2::Mmap::map(&file) }.map_err(|e| Error::io(path, e))?;
        let mut r = BinReader::new(&map[..], path);
        r.expect_magic(CACHE_MAGIC, "embedding cache")?;
        let version = r.u32()?;
        if version != CACHE_VERSION {
            return Err(r.corrupt(format!("unsupported cache version {version}")));
        }
        let dim = r.u32()? as usize;
        let count = r.u64()? as usize;
        let mut vectors = IndexMap::with_capacity(count);
        for _ in 0..count {
            let word = r.str()?;
            let vec = r.f64_vec(dim)?;
            vectors.insert(word, vec);
        }
        Ok(EmbeddingStore { dim, vectors })
    }

    pub fn from_vectors(
        dim: usize,
        entries: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self> {
        let vectors: IndexMap<String, Vec<f64>> = entries.into_iter().collect();
        for (word, v) in &vectors {
            if v.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "vector for {word:?} has dimension {}, expected {dim}",
                    v.len()
                )));
            }
        }
        Ok(EmbeddingStore { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Exact probe, then lowercase.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        if let Some(v) = self.vectors.get(word) {
            return Some(v);
        }
        let lower = word.to_lowercase();
        if lower != word {
            if let Some(v) = self.vectors.get(lower.as_str()) {
                return Some(v);
            }
        }
        None
    }

    /// Component-wise mean over the in-vocabulary words of the phrase. With
    /// no coverage the vector is all zeros and `covered` is 0.
    pub fn phrase_embedding(&self, phrase: &str) -> PhraseEmbedding {
        let mut vector = vec![0.0; self.dim];
        let mut covered = 0usize;
        let mut words = 0usize;
        for word in phrase.split_whitespace() {
            words += 1;
            if let Some(v) = self.get(word) {
                covered += 1;
                for (acc, &x) in vector.iter_mut().zip(v) {
                    *acc += x;
                }
            }
        }
        if covered > 0 {
            for acc in vector.iter_mut() {
                *acc /= covered as f64;
            }
        }
        PhraseEmbedding {
            vector,
            covered,
            words,
        }
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write as _;

    fn store() -> EmbeddingStore {
        EmbeddingStore::from_vectors(
            2,
            [
                ("right".to_string(), vec![1.0, 0.0]),
                ("up".to_string(), vec![0.0, 1.0]),
                ("down".to_string(), vec![0.0, -1.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_word_is_its_vector() {
        let e = store().phrase_embedding("right");
        assert_eq!(e.vector, vec![1.0, 0.0]);
        assert_eq!(e.covered, 1);
    }

    #[test]
    fn opposite_vectors_average_to_zero() {
        let e = store().phrase_embedding("up down");
        assert_eq!(e.vector, vec![0.0, 0.0]);
        assert!(e.any_coverage());
    }

    #[test]
    fn oov_words_are_skipped_in_the_mean() {
        let e = store().phrase_embedding("right up zzqx");
        assert_eq!(e.vector, vec![0.5, 0.5]);
        assert_eq!(e.covered, 2);
        assert_eq!(e.words, 3);
    }

    #[test]
    fn no_coverage_is_zero_vector_with_flag() {
        let e = store().phrase_embedding("zz qq");
        assert_eq!(e.vector, vec![0.0, 0.0]);
        assert!(!e.any_coverage());
    }

    #[test]
    fn phrase_embedding_is_word_order_invariant() {
        let s = store();
        assert_eq!(
            s.phrase_embedding("right up").vector,
            s.phrase_embedding("up right").vector
        );
    }

    #[test]
    fn cosine_identities() {
        let v = [3.0, 4.0];
        assert_abs_diff_eq!(cosine(&v, &v).unwrap(), 1.0, epsilon = 1e-12);
        let neg = [-3.0, -4.0];
        assert_abs_diff_eq!(cosine(&v, &neg).unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cosine_zero_norm_convention_and_dim_check() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn text_loader_with_header_and_cache_roundtrip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"2 3\ncat 0.1 0.2 0.3\ndog -1 0 1\n").unwrap();
        let store = EmbeddingStore::load_text(f.path()).unwrap();
        assert_eq!(store.dim(), 3);
        assert_eq!(store.len(), 2);
        assert_eq!(store.get("cat").unwrap(), &[0.1, 0.2, 0.3]);
        // lowercase fallback
        assert_eq!(store.get("Dog").unwrap(), &[-1.0, 0.0, 1.0]);

        let cache = tempfile::NamedTempFile::new().unwrap();
        store.save_cache(cache.path()).unwrap();
        let reloaded = EmbeddingStore::load_cache(cache.path()).unwrap();
        assert_eq!(reloaded.dim(), 3);
        assert_eq!(reloaded.get("cat").unwrap(), store.get("cat").unwrap());
    }

    #[test]
    fn text_loader_rejects_ragged_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"cat 0.1 0.2\ndog 1\n").unwrap();
        assert!(matches!(
            EmbeddingStore::load_text(f.path()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn cache_rejects_wrong_magic() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"not a cache at all").unwrap();
        assert!(matches!(
            EmbeddingStore::load_cache(f.path()),
            Err(Error::CorruptFile { .. })
        ));
    }

    proptest::proptest! {
        #[test]
        fn cosine_scale_invariance(
            u in proptest::collection::vec(-10.0f64..10.0, 4),
            v in proptest::collection::vec(-10.0f64..10.0, 4),
            s in 0.01f64..100.0,
        ) {
            let nu: f64 = u.iter().map(|x| x * x).sum();
            let nv: f64 = v.iter().map(|x| x * x).sum();
            proptest::prop_assume!(nu > 1e-6 && nv > 1e-6);
            let scaled: Vec<f64> = u.iter().map(|x| x * s).collect();
            let a = cosine(&u, &v).unwrap();
            let b = cosine(&scaled, &v).unwrap();
            proptest::prop_assert!((a - b).abs() < 1e-9);
            let c = cosine(&v, &u).unwrap();
            proptest::prop_assert!((a - c).abs() < 1e-12);
        }
    }
}
