//! Content-addressed cache of rendered command output.

use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Bumped whenever cached output could change for the same inputs.
pub const CACHE_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+1");

const MAGIC: &str = "cmtrace-cache";

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Key for `(operation, inputs, precision, version)`.
pub fn cache_key(operation: &str, inputs: &str, precision: Option<usize>, version: &str) -> String {
    let mut h = Sha256::new();
    for part in [operation, inputs, &format!("{precision:?}"), version] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex(&h.finalize())
}

/// Default location: `$CMTRACE_CACHE_DIR`, else `$HOME/.cache/cmtrace`, else a temp directory.
pub fn default_cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os("CMTRACE_CACHE_DIR") {
        return PathBuf::from(d);
    }
    if let Some(h) = std::env::var_os("HOME") {
        return PathBuf::from(h).join(".cache").join("cmtrace");
    }
    std::env::temp_dir().join("cmtrace-cache")
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

/// Outcome of a lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lookup {
    Hit(String),
    Miss,
    /// The entry failed its checksum and was removed.
    Corrupt,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.out"))
    }

    pub fn get(&self, key: &str) -> Lookup {
        let path = self.path(key);
        let Ok(raw) = fs::read_to_string(&path) else { return Lookup::Miss };
        let parsed = raw.split_once('\n').and_then(|(head, body)| {
            let mut it = head.split(' ');
            match (it.next(), it.next(), it.next()) {
                (Some(MAGIC), Some(k), Some(sum)) if k == key && sum == hex(&Sha256::digest(body.as_bytes())) => Some(body.to_string()),
                _ => None,
            }
        });
        match parsed {
            Some(body) => Lookup::Hit(body),
            None => {
                let _ = fs::remove_file(&path);
                Lookup::Corrupt
            }
        }
    }

    /// Writes through a temporary file and a rename, so readers never see a partial entry.
    pub fn put(&self, key: &str, body: &str) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!("{key}.tmp{}", std::process::id()));
        let head = format!("{MAGIC} {key} {}\n", hex(&Sha256::digest(body.as_bytes())));
        fs::write(&tmp, head + body)?;
        fs::rename(&tmp, self.path(key))
    }

    /// Returns the cached body for `key` or computes, stores and returns it.
    pub fn get_or_compute<E>(&self, key: &str, compute: impl FnOnce() -> Result<String, E>) -> Result<String, E> {
        match self.get(key) {
            Lookup::Hit(body) => return Ok(body),
            Lookup::Corrupt => eprintln!("warning: discarded corrupt cache entry {key}; recomputing"),
            Lookup::Miss => {}
        }
        let body = compute()?;
        if let Err(e) = self.put(key, &body) {
            eprintln!("warning: could not write cache entry {key}: {e}");
        }
        Ok(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let k = cache_key("trace", "J 3:10", None, CACHE_VERSION);
        assert_eq!(c.get(&k), Lookup::Miss);
        c.put(&k, "a\nb\n").unwrap();
        assert_eq!(c.get(&k), Lookup::Hit("a\nb\n".into()));
        let p = dir.path().join(format!("{k}.out"));
        let mut raw = std::fs::read_to_string(&p).unwrap();
        raw.push('x');
        std::fs::write(&p, raw).unwrap();
        assert_eq!(c.get(&k), Lookup::Corrupt);
        assert_eq!(c.get(&k), Lookup::Miss);
    }

    #[test]
    fn keys_depend_on_every_part() {
        let base = cache_key("trace", "x", Some(64), "1");
        assert_ne!(base, cache_key("trace", "x", Some(64), "2"));
        assert_ne!(base, cache_key("trace", "x", Some(65), "1"));
        assert_ne!(base, cache_key("trace", "y", Some(64), "1"));
        assert_ne!(base, cache_key("series", "x", Some(64), "1"));
    }
}
