use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use super::{physical_mode, Method, PhysicalMode, SolverSettings};
use crate::error::Result;
use crate::geometry::Geometry;

/// Bit-exact identity of a solved mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeCacheKey {
    pub r_plus: u64,
    pub omega: u64,
    pub l: u32,
    pub method: Method,
    pub tolerances: Vec<u64>,
}

impl ModeCacheKey {
    pub fn new(g: &Geometry, omega: f64, l: u32, method: Method, settings: &SolverSettings) -> Self {
        ModeCacheKey {
            r_plus: g.r_plus().to_bits(),
            omega: omega.to_bits(),
            l,
            method,
            tolerances: settings.fingerprint(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
}

/// Process-wide memo of physical modes. Concurrent inserts of the same key are
/// harmless: solves are deterministic, so the last writer stores an equal value.
#[derive(Debug, Default)]
pub struct ModeCache {
    map: RwLock<HashMap<ModeCacheKey, Arc<PhysicalMode>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ModeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &ModeCacheKey) -> Option<Arc<PhysicalMode>> {
        let found = self.map.read().unwrap_or_else(|e| e.into_inner()).get(key).cloned();
        if found.is_some() {
            self.hits.fetch_add(1, Ordering::Relaxed);
        }
        found
    }

    pub fn insert(&self, key: ModeCacheKey, mode: Arc<PhysicalMode>) {
        self.map
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, mode);
    }

    /// Returns the cached mode or solves, stores and returns it.
    pub fn get_or_solve(
        &self,
        g: &Geometry,
        omega: f64,
        l: u32,
        method: Method,
        settings: &SolverSettings,
    ) -> Result<Arc<PhysicalMode>> {
        let key = ModeCacheKey::new(g, omega, l, method, settings);
        if let Some(mode) = self.get(&key) {
            return Ok(mode);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let mode = Arc::new(physical_mode(g, omega, l, method, settings)?);
        self.insert(key, mode.clone());
        Ok(mode)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.map.write().unwrap_or_else(|e| e.into_inner()).clear();
    }
}
