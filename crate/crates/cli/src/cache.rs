//! On-disk point cache: one JSON metadata record plus one little-endian f64
//! vector file per (instance, s, solver) key.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zenoprep_core::schedule::{PointKey, PointStore, SchedulePoint};
use zenoprep_core::spectral::{Residuals, SolveMethod, SpectralPoint, WindowMap};

const RECORD_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    record_version: u32,
    instance: String,
    s: f64,
    solver: String,
    e0: f64,
    e1: f64,
    gap: f64,
    e_max: f64,
    window: WindowMap,
    normalized_gap: f64,
    residuals: Residuals,
    method: SolveMethod,
    dim: usize,
    has_excited: bool,
    /// sha256 of the vector file
    checksum: String,
}

#[derive(Debug, Default)]
pub struct CacheStats {
    pub hits: AtomicUsize,
    pub misses: AtomicUsize,
    pub corrupt: AtomicUsize,
    pub writes: AtomicUsize,
}

#[derive(Debug)]
pub struct DiskCache {
    dir: PathBuf,
    stats: CacheStats,
    tmp_counter: AtomicU64,
}

pub fn key_hash(key: &PointKey) -> String {
    let mut h = Sha256::new();
    h.update(key.instance.as_bytes());
    h.update([0]);
    h.update((key.s + 0.0).to_bits().to_le_bytes());
    h.update([0]);
    h.update(key.solver.as_bytes());
    hex::encode(h.finalize())
}

fn encode_vectors(p: &SchedulePoint) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * p.spectral.ground.len());
    for x in p.spectral.ground.iter().chain(p.spectral.excited.iter().flat_map(|v| v.iter())) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

impl DiskCache {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Arc<Self>> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Arc::new(Self {
            dir,
            stats: CacheStats::default(),
            tmp_counter: AtomicU64::new(0),
        }))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn stats(&self) -> &CacheStats {
        &self.stats
    }

    fn paths(&self, key: &PointKey) -> (PathBuf, PathBuf) {
        let h = key_hash(key);
        (self.dir.join(format!("{h}.json")), self.dir.join(format!("{h}.bin")))
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = path.with_extension(format!("{}.{n}.tmp", std::process::id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    }

    fn read(&self, key: &PointKey) -> Result<Option<SchedulePoint>, String> {
        let (meta_path, bin_path) = self.paths(key);
        let text = match fs::read_to_string(&meta_path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.to_string()),
        };
        let meta: Meta = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        if meta.record_version != RECORD_VERSION
            || meta.instance != key.instance
            || meta.solver != key.solver
            || meta.s.to_bits() != (key.s + 0.0).to_bits()
        {
            return Err("record does not match its key".into());
        }
        let bytes = fs::read(&bin_path).map_err(|e| e.to_string())?;
        if hex::encode(Sha256::digest(&bytes)) != meta.checksum {
            return Err("vector checksum mismatch".into());
        }
        let n_vec = if meta.has_excited { 2 } else { 1 };
        if bytes.len() != 8 * n_vec * meta.dim {
            return Err(format!("vector file has {} bytes", bytes.len()));
        }
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let (ground, excited) = values.split_at(meta.dim);
        Ok(Some(SchedulePoint {
            s: meta.s,
            spectral: SpectralPoint {
                e0: meta.e0,
                e1: meta.e1,
                gap: meta.gap,
                ground: Arc::new(ground.to_vec()),
                excited: meta.has_excited.then(|| Arc::new(excited.to_vec())),
                residuals: meta.residuals,
                method: meta.method,
            },
            e_max: meta.e_max,
            window: meta.window,
            normalized_gap: meta.normalized_gap,
        }))
    }

    fn write(&self, key: &PointKey, p: &SchedulePoint) -> std::io::Result<()> {
        let (meta_path, bin_path) = self.paths(key);
        let bytes = encode_vectors(p);
        let meta = Meta {
            record_version: RECORD_VERSION,
            instance: key.instance.clone(),
            s: key.s + 0.0,
            solver: key.solver.clone(),
            e0: p.spectral.e0,
            e1: p.spectral.e1,
            gap: p.spectral.gap,
            e_max: p.e_max,
            window: p.window,
            normalized_gap: p.normalized_gap,
            residuals: p.spectral.residuals,
            method: p.spectral.method,
            dim: p.spectral.ground.len(),
            has_excited: p.spectral.excited.is_some(),
            checksum: hex::encode(Sha256::digest(&bytes)),
        };
        // vectors first: a reader that sees the new metadata also sees matching vectors
        self.write_atomic(&bin_path, &bytes)?;
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        self.write_atomic(&meta_path, text.as_bytes())
    }
}

impl PointStore for DiskCache {
    fn load(&self, key: &PointKey) -> Option<SchedulePoint> {
        match self.read(key) {
            Ok(Some(p)) => {
                self.stats.hits.fetch_add(1, Ordering::Relaxed);
                Some(p)
            }
            Ok(None) => {
                self.stats.misses.fetch_add(1, Ordering::Relaxed);
                None
            }
            Err(e) => {
                log::warn!("corrupt cache record for s = {} ({e}), recomputing", key.s);
                self.stats.corrupt.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    fn store(&self, key: &PointKey, point: &SchedulePoint) {
        match self.write(key, point) {
            Ok(()) => {
                self.stats.writes.fetch_add(1, Ordering::Relaxed);
            }
            Err(e) => log::warn!("could not write cache record for s = {}: {e}", key.s),
        }
    }
}
