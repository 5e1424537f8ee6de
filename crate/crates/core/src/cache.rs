//! On-disk report cache keyed by model hash, command, flags and tool
//! version. A miss or an unreadable entry just means recomputing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::report::{Report, TOOL_VERSION};

pub const CACHE_DIR_ENV: &str = "SULLIVAN_CACHE_DIR";

pub fn cache_key(model_hash: &str, command: &str, flags: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for part in [model_hash, command, TOOL_VERSION] {
        h.update(part.as_bytes());
        h.update([0]);
    }
    for (k, v) in flags {
        h.update(format!("{k}={v}").as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Option<Report> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Writes through a temporary file so readers never see a partial entry.
    pub fn store(&self, key: &str, report: &Report) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!("{key}.json.tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_string(report).expect("serializable report"))?;
        fs::rename(tmp, self.path(key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_depend_on_every_component() {
        let mut f = BTreeMap::new();
        f.insert("k".to_string(), "1".to_string());
        let a = cache_key("h", "shriek", &f);
        assert_ne!(a, cache_key("h2", "shriek", &f));
        assert_ne!(a, cache_key("h", "compare", &f));
        f.insert("k".to_string(), "3".to_string());
        assert_ne!(a, cache_key("h", "shriek", &f));
    }

    #[test]
    fn store_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("c"));
        let r = Report::new("euler", BTreeMap::new(), "s2", "ab");
        assert!(cache.load("k").is_none());
        cache.store("k", &r).unwrap();
        assert_eq!(cache.load("k"), Some(r));
    }
}
