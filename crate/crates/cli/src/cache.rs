//! Content-addressed on-disk mode cache with an in-memory index.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sads_udw::radial::{physical_mode, Method, ModeCacheKey, PhysicalMode, SolverSettings};
use sads_udw::response::ModeProvider;
use sads_udw::{Geometry, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
struct StoredKey {
    r_plus: u64,
    omega: u64,
    l: u32,
    method: Method,
    tolerances: Vec<u64>,
}

impl From<ModeCacheKey> for StoredKey {
    fn from(k: ModeCacheKey) -> Self {
        StoredKey {
            r_plus: k.r_plus,
            omega: k.omega,
            l: k.l,
            method: k.method,
            tolerances: k.tolerances,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: StoredKey,
    mode: PhysicalMode,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DiskStats {
    pub memory_hits: u64,
    pub disk_hits: u64,
    /// Solves performed.
    pub misses: u64,
    /// Unreadable or mismatched files that were recomputed.
    pub corrupt: u64,
    pub write_errors: u64,
}

#[derive(Debug)]
pub struct DiskCache {
    dir: Option<PathBuf>,
    method: Method,
    settings: SolverSettings,
    index: RwLock<HashMap<StoredKey, Arc<PhysicalMode>>>,
    memory_hits: AtomicU64,
    disk_hits: AtomicU64,
    misses: AtomicU64,
    corrupt: AtomicU64,
    write_errors: AtomicU64,
    tmp_counter: AtomicU64,
}

impl DiskCache {
    /// `dir = None` keeps the cache in memory only.
    pub fn new(dir: Option<&Path>, method: Method, settings: SolverSettings) -> std::io::Result<Self> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(DiskCache {
            dir: dir.map(Path::to_path_buf),
            method,
            settings,
            index: RwLock::default(),
            memory_hits: AtomicU64::new(0),
            disk_hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            corrupt: AtomicU64::new(0),
            write_errors: AtomicU64::new(0),
            tmp_counter: AtomicU64::new(0),
        })
    }

    pub fn stats(&self) -> DiskStats {
        DiskStats {
            memory_hits: self.memory_hits.load(Ordering::Relaxed),
            disk_hits: self.disk_hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            corrupt: self.corrupt.load(Ordering::Relaxed),
            write_errors: self.write_errors.load(Ordering::Relaxed),
        }
    }

    fn path_of(dir: &Path, key: &StoredKey) -> PathBuf {
        let bytes = serde_json::to_vec(key).expect("key serialises");
        dir.join(format!("{}.json", hex::encode(Sha256::digest(bytes))))
    }

    fn load(&self, path: &Path, key: &StoredKey) -> Option<PhysicalMode> {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                self.warn_corrupt(path, &e.to_string());
                return None;
            }
        };
        match serde_json::from_slice::<Entry>(&bytes) {
            Ok(entry) if entry.key == *key && entry.mode.key.l == key.l && entry.mode.key.omega.to_bits() == key.omega => {
                Some(entry.mode)
            }
            Ok(_) => {
                self.warn_corrupt(path, "stored key does not match");
                None
            }
            Err(e) => {
                self.warn_corrupt(path, &e.to_string());
                None
            }
        }
    }

    fn warn_corrupt(&self, path: &Path, why: &str) {
        self.corrupt.fetch_add(1, Ordering::Relaxed);
        eprintln!("warning: cache entry {} unusable ({why}); recomputing", path.display());
    }

    fn store(&self, path: &Path, key: &StoredKey, mode: &PhysicalMode) {
        let entry = Entry {
            key: key.clone(),
            mode: mode.clone(),
        };
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = path.with_extension(format!("tmp.{}.{n}", std::process::id()));
        let written = serde_json::to_vec(&entry)
            .map_err(std::io::Error::other)
            .and_then(|bytes| std::fs::write(&tmp, bytes))
            .and_then(|_| std::fs::rename(&tmp, path));
        if let Err(e) = written {
            self.write_errors.fetch_add(1, Ordering::Relaxed);
            let _ = std::fs::remove_file(&tmp);
            eprintln!("warning: cannot write cache entry {}: {e}", path.display());
        }
    }
}

impl ModeProvider for DiskCache {
    fn mode(&self, g: &Geometry, omega: f64, l: u32) -> Result<Arc<PhysicalMode>> {
        let key: StoredKey = ModeCacheKey::new(g, omega, l, self.method, &self.settings).into();
        if let Some(m) = self.index.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
            self.memory_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(m.clone());
        }
        let path = self.dir.as_deref().map(|d| Self::path_of(d, &key));
        if let Some(mode) = path.as_deref().and_then(|p| self.load(p, &key)) {
            self.disk_hits.fetch_add(1, Ordering::Relaxed);
            let mode = Arc::new(mode);
            self.index
                .write()
                .unwrap_or_else(|e| e.into_inner())
                .insert(key, mode.clone());
            return Ok(mode);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let mode = Arc::new(physical_mode(g, omega, l, self.method, &self.settings)?);
        if let Some(p) = &path {
            self.store(p, &key, &mode);
        }
        self.index
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, mode.clone());
        Ok(mode)
    }
}
