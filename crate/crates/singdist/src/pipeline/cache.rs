use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::Path;

use crate::lagrangian::CriticalSystem;

use super::{system_label, AbInitio, PipelineError};

/// File stem identifying a system, its exact equations and the run seed.
pub fn cache_key(sys: &CriticalSystem, seed: u64) -> String {
    let mut h = DefaultHasher::new();
    sys.dump().hash(&mut h);
    format!("{}-s{seed}-{:016x}", system_label(sys), h.finish())
}

pub fn load_cached(dir: &Path, key: &str) -> Result<Option<AbInitio>, PipelineError> {
    let path = dir.join(format!("{key}.json"));
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| PipelineError::Cache(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(ab) => Ok(Some(ab)),
        // A stale or truncated entry is recomputed and overwritten.
        Err(_) => Ok(None),
    }
}

pub fn store_cached(dir: &Path, key: &str, ab: &AbInitio) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::Cache(format!("{}: {e}", dir.display())))?;
    let path = dir.join(format!("{key}.json"));
    let tmp = dir.join(format!("{key}.json.tmp"));
    let text = serde_json::to_string(ab).map_err(|e| PipelineError::Cache(e.to_string()))?;
    fs::write(&tmp, text).map_err(|e| PipelineError::Cache(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, &path).map_err(|e| PipelineError::Cache(format!("{}: {e}", path.display())))
}
