use std::path::PathBuf;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Report, Request};

/// Bumped whenever an algorithm change can alter a report.
pub const ALGORITHM_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "/3");

static WRITER: Mutex<()> = Mutex::new(());

#[derive(Serialize, Deserialize)]
struct Entry {
    version: String,
    key: String,
    report: Report,
}

/// One JSON file per report under a directory.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Cache { dir }
    }

    pub fn dir(&self) -> &std::path::Path {
        &self.dir
    }

    pub fn default_dir() -> PathBuf {
        let base = std::env::var_os("XDG_CACHE_HOME")
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))
            .unwrap_or_else(std::env::temp_dir);
        base.join("gengap")
    }

    /// Hash of the algorithm version and the full request. Group tables enter through
    /// the factor grammar and the inlined presentations, which determine them.
    pub fn key(req: &Request) -> String {
        let mut h = Sha256::new();
        h.update(ALGORITHM_VERSION.as_bytes());
        h.update([0]);
        h.update(serde_json::to_vec(req).expect("request serializes"));
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Option<Report> {
        let path = self.path(key);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                log::warn!("cannot read cache entry {}: {e}; recomputing", path.display());
                return None;
            }
        };
        match serde_json::from_str::<Entry>(&text) {
            Ok(entry) if entry.version == ALGORITHM_VERSION && entry.key == key => Some(entry.report),
            Ok(_) => {
                log::warn!("stale cache entry {}; recomputing", path.display());
                None
            }
            Err(e) => {
                log::warn!("corrupted cache entry {}: {e}; recomputing", path.display());
                None
            }
        }
    }

    pub fn store(&self, key: &str, report: &Report) {
        let _guard = WRITER.lock().unwrap_or_else(|e| e.into_inner());
        let entry = Entry { version: ALGORITHM_VERSION.into(), key: key.into(), report: report.clone() };
        let result = std::fs::create_dir_all(&self.dir).and_then(|_| {
            let tmp = self.dir.join(format!("{key}.{}.tmp", std::process::id()));
            std::fs::write(&tmp, serde_json::to_vec_pretty(&entry).expect("entry serializes"))?;
            std::fs::rename(&tmp, self.path(key))
        });
        if let Err(e) = result {
            log::warn!("cannot write cache entry under {}: {e}", self.dir.display());
        }
    }
}
