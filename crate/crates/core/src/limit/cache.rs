//! On-disk cache of threshold tables, one JSON file per calibration setup.

use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use sha2::{Digest, Sha256};

use super::{calibrate, ThresholdMeta, ThresholdTable, TABLE_FORMAT_VERSION};
use crate::error::{MftError, Result};
use crate::grid::WindowSet;

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "MFT_CACHE_DIR";

pub fn encode_table(table: &ThresholdTable) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(table)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Parses and validates a cached table.
pub fn decode_table(bytes: &[u8]) -> Result<ThresholdTable> {
    let table: ThresholdTable = serde_json::from_slice(bytes)?;
    table.validate()?;
    Ok(table)
}

fn meta_key(meta: &ThresholdMeta) -> Result<String> {
    let canonical = serde_json::to_vec(meta)?;
    let digest = Sha256::digest(&canonical);
    Ok(digest.iter().take(12).map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone)]
pub struct ThresholdCache {
    dir: PathBuf,
}

impl ThresholdCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ThresholdCache { dir: dir.into() }
    }

    /// Cache rooted at `$MFT_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV).map(|d| ThresholdCache::new(PathBuf::from(d)))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, meta: &ThresholdMeta) -> Result<PathBuf> {
        Ok(self.dir.join(format!("threshold-{}.json", meta_key(meta)?)))
    }

    pub fn load(&self, meta: &ThresholdMeta) -> Result<Option<ThresholdTable>> {
        let path = self.path_for(meta)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        match decode_table(&bytes) {
            Ok(t) if &t.meta == meta => Ok(Some(t)),
            Ok(_) => {
                warn!(
                    "cache entry {} has different metadata; ignoring",
                    path.display()
                );
                Ok(None)
            }
            Err(e) => {
                warn!("unreadable cache entry {}: {e}", path.display());
                Ok(None)
            }
        }
    }

    pub fn store(&self, table: &ThresholdTable) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(&table.meta)?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, encode_table(table)?)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Cached table for the setup, calibrating and storing it on a miss.
    pub fn get_or_calibrate(
        &self,
        ws: &WindowSet,
        alpha: f64,
        n_sims: usize,
        seed: u64,
    ) -> Result<ThresholdTable> {
        let meta = ThresholdMeta {
            version: TABLE_FORMAT_VERSION,
            duration: ws.duration(),
            windows: ws.windows().to_vec(),
            grid_step: ws.grid_step(),
            alpha,
            n_sims,
            seed,
        };
        if let Some(t) = self.load(&meta)? {
            debug!(
                "threshold cache hit for {}",
                self.path_for(&meta)?.display()
            );
            return Ok(t);
        }
        let table = calibrate(ws, n_sims, seed)?.table(alpha)?;
        if table.meta != meta {
            return Err(MftError::Calibration(
                "calibration metadata mismatch".into(),
            ));
        }
        self.store(&table)?;
        Ok(table)
    }
}
