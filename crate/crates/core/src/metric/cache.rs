use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DistanceFn;
use crate::error::{Error, Result};
use crate::ot::{decode_matrix, encode_matrix, Matrix};
use crate::par::*;

/// Every parameter a pairwise distance depends on. A persisted matrix is
/// reused only when its sidecar matches the current key exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheKey {
    pub dataset_hash: String,
    pub min_sup: f64,
    pub max_edges: usize,
    pub dim: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub lambda: f64,
    pub sinkhorn_iters: usize,
    pub marginal_tol: f64,
    pub seed: u64,
    /// Mining/embedding scope, e.g. `all` or `train:fold3`.
    pub scope: String,
}

impl CacheKey {
    pub fn file_stem(&self) -> String {
        let json = serde_json::to_string(self).expect("key serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Symmetric pairwise distance store over graph ids `0..n`. Missing entries
/// are NaN. Reads run concurrently; fills take the write lock once per batch.
pub struct DistanceCache {
    n: usize,
    values: RwLock<Vec<f64>>,
    evaluations: AtomicUsize,
    loaded: bool,
}

/// A cache entry found on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub matrix: PathBuf,
    pub sidecar: PathBuf,
    pub key: Option<CacheKey>,
    pub filled: usize,
}

impl DistanceCache {
    pub fn new(n: usize) -> Self {
        DistanceCache {
            n,
            values: RwLock::new(vec![f64::NAN; n * n]),
            evaluations: AtomicUsize::new(0),
            loaded: false,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Fresh distance evaluations performed through this cache.
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Whether the contents came from disk.
    pub fn was_loaded(&self) -> bool {
        self.loaded
    }

    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        let v = self.values.read().unwrap()[a * self.n + b];
        (!v.is_nan()).then_some(v)
    }

    pub fn filled(&self) -> usize {
        self.values.read().unwrap().iter().filter(|v| !v.is_nan()).count()
    }

    /// Evaluates every pair in `pairs` not yet stored, in parallel, treating
    /// `(a, b)` and `(b, a)` as the same pair. Returns the number of fresh
    /// evaluations.
    pub fn ensure(&self, pairs: &[(usize, usize)], distance: &dyn DistanceFn) -> Result<usize> {
        let mut todo: Vec<(usize, usize)> = {
            let values = self.values.read().unwrap();
            pairs
                .iter()
                .map(|&(a, b)| (a.min(b), a.max(b)))
                .filter(|&(a, b)| values[a * self.n + b].is_nan())
                .collect()
        };
        todo.sort_unstable();
        todo.dedup();
        let results: Vec<f64> = todo
            .par_iter()
            .map(|&(a, b)| {
                distance
                    .distance(a, b)
                    .map_err(|e| Error::PairDistance(a, b, Box::new(e)))
            })
            .collect::<Result<_>>()?;
        let mut values = self.values.write().unwrap();
        for (&(a, b), &d) in todo.iter().zip(&results) {
            values[a * self.n + b] = d;
            values[b * self.n + a] = d;
        }
        self.evaluations.fetch_add(todo.len(), Ordering::Relaxed);
        Ok(todo.len())
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(self.n, self.n, self.values.read().unwrap().clone())
    }

    fn paths(dir: &Path, key: &CacheKey) -> (PathBuf, PathBuf) {
        let stem = key.file_stem();
        (dir.join(format!("{stem}.bin")), dir.join(format!("{stem}.json")))
    }

    /// Loads the matrix stored for `key`, or starts empty when none exists or
    /// the stored sidecar disagrees with `key`.
    pub fn load_or_new(dir: &Path, key: &CacheKey, n: usize) -> Self {
        let (bin, json) = Self::paths(dir, key);
        let stored: Option<CacheKey> = fs::read_to_string(&json)
            .ok()
            .and_then(|s| serde_json::from_str(&s).ok());
        if stored.as_ref() != Some(key) {
            if stored.is_some() {
                log::info!("distance cache {} is stale; recomputing", bin.display());
            }
            return Self::new(n);
        }
        match fs::read(&bin).ok().and_then(|b| decode_matrix(&b).ok()) {
            Some(m) if m.rows() == n && m.cols() == n => DistanceCache {
                n,
                values: RwLock::new(m.as_slice().to_vec()),
                evaluations: AtomicUsize::new(0),
                loaded: true,
            },
            _ => Self::new(n),
        }
    }

    pub fn save(&self, dir: &Path, key: &CacheKey) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let (bin, json) = Self::paths(dir, key);
        fs::write(&bin, encode_matrix(&self.to_matrix())).map_err(|e| Error::io(&bin, e))?;
        let sidecar = serde_json::to_string_pretty(key).expect("key serializes");
        fs::write(&json, sidecar).map_err(|e| Error::io(&json, e))
    }

    /// Lists matrix files in `dir` together with their parameter sidecars.
    pub fn list(dir: &Path) -> Result<Vec<CacheEntry>> {
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("bin") {
                continue;
            }
            let sidecar = path.with_extension("json");
            let key = fs::read_to_string(&sidecar)
                .ok()
                .and_then(|s| serde_json::from_str(&s).ok());
            let filled = fs::read(&path)
                .ok()
                .and_then(|b| decode_matrix(&b).ok())
                .map_or(0, |m| m.as_slice().iter().filter(|v| !v.is_nan()).count());
            out.push(CacheEntry {
                matrix: path,
                sidecar,
                key,
                filled,
            });
        }
        out.sort_by(|a, b| a.matrix.cmp(&b.matrix));
        Ok(out)
    }

    /// Removes every cache entry in `dir`; returns how many were removed.
    pub fn clear(dir: &Path) -> Result<usize> {
        let entries = Self::list(dir)?;
        for e in &entries {
            fs::remove_file(&e.matrix).map_err(|err| Error::io(&e.matrix, err))?;
            if e.sidecar.exists() {
                fs::remove_file(&e.sidecar).map_err(|err| Error::io(&e.sidecar, err))?;
            }
        }
        Ok(entries.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(seed: u64) -> CacheKey {
        CacheKey {
            dataset_hash: "abc".into(),
            min_sup: 0.9,
            max_edges: 5,
            dim: 16,
            epochs: 10,
            negatives: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            lambda: 0.01,
            sinkhorn_iters: 30,
            marginal_tol: 1e-9,
            seed,
            scope: "all".into(),
        }
    }

    #[test]
    fn unordered_pairs_evaluated_once() {
        let cache = DistanceCache::new(4);
        let f = |a: usize, b: usize| -> Result<f64> { Ok((a as f64 - b as f64).abs()) };
        let fresh = cache.ensure(&[(0, 1), (1, 0), (2, 2), (3, 1)], &f).unwrap();
        assert_eq!(fresh, 3);
        assert_eq!(cache.get(1, 3), Some(2.0));
        assert_eq!(cache.ensure(&[(1, 0), (1, 3)], &f).unwrap(), 0);
        assert_eq!(cache.evaluations(), 3);
        assert_eq!(cache.get(0, 2), None);
    }

    #[test]
    fn persisted_cache_respects_key() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DistanceCache::new(3);
        let f = |a: usize, b: usize| -> Result<f64> { Ok((a * 10 + b) as f64) };
        cache.ensure(&[(0, 1), (1, 2)], &f).unwrap();
        cache.save(dir.path(), &key(1)).unwrap();

        let warm = DistanceCache::load_or_new(dir.path(), &key(1), 3);
        assert!(warm.was_loaded());
        assert_eq!(warm.get(2, 1), Some(12.0));
        let cold = DistanceCache::load_or_new(dir.path(), &key(2), 3);
        assert!(!cold.was_loaded());
        let wrong_size = DistanceCache::load_or_new(dir.path(), &key(1), 4);
        assert!(!wrong_size.was_loaded());

        let listed = DistanceCache::list(dir.path()).unwrap();
        assert_eq!(listed.len(), 1);
        assert_eq!(listed[0].key.as_ref().unwrap().seed, 1);
        assert_eq!(listed[0].filled, 4);
        assert_eq!(DistanceCache::clear(dir.path()).unwrap(), 1);
        assert!(DistanceCache::list(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn stale_sidecar_invalidates() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DistanceCache::new(2);
        cache.save(dir.path(), &key(1)).unwrap();
        let (_, json) = DistanceCache::paths(dir.path(), &key(1));
        let mut edited = key(1);
        edited.lambda = 0.5;
        fs::write(&json, serde_json::to_string(&edited).unwrap()).unwrap();
        assert!(!DistanceCache::load_or_new(dir.path(), &key(1), 2).was_loaded());
    }
}
