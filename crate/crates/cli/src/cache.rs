//! Content-addressed store for expensive results. Entries are keyed by the
//! sha256 of the request and carry a digest of their payload, so a damaged
//! file is detected and recomputed instead of being served.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const FORMAT: u32 = 1;

pub struct Cache {
    dir: Option<PathBuf>,
}

/// How a lookup was satisfied; reported on stderr only so that output bytes
/// do not depend on cache state.
#[derive(Debug, PartialEq, Eq)]
pub enum Source {
    Hit,
    Computed,
    Recomputed,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    pub fn key(request: &Value) -> String {
        let tagged = json!({ "format": FORMAT, "version": env!("CARGO_PKG_VERSION"), "request": request });
        sha256_hex(tagged.to_string().as_bytes())
    }

    fn path(dir: &Path, key: &str) -> PathBuf {
        dir.join(format!("{key}.json"))
    }

    fn load(path: &Path, key: &str) -> Option<Value> {
        let bytes = fs::read(path).ok()?;
        let entry: Value = serde_json::from_slice(&bytes).ok()?;
        let payload = entry.get("payload")?;
        let digest = sha256_hex(payload.to_string().as_bytes());
        (entry.get("key")?.as_str()? == key && entry.get("digest")?.as_str()? == digest).then(|| payload.clone())
    }

    fn store(dir: &Path, key: &str, payload: &Value) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
        let entry = json!({ "key": key, "digest": sha256_hex(payload.to_string().as_bytes()), "payload": payload });
        let tmp = dir.join(format!(".{key}.{}.tmp", std::process::id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(entry.to_string().as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, Self::path(dir, key))?;
        Ok(())
    }

    /// Cached value for `request`, or the result of `produce`, stored for
    /// next time. Failing to write the cache is not an error.
    pub fn get_or_compute<F>(&self, request: &Value, produce: F) -> Result<(Value, Source)>
    where
        F: FnOnce() -> Result<Value>,
    {
        let Some(dir) = &self.dir else { return Ok((produce()?, Source::Computed)) };
        let key = Self::key(request);
        let path = Self::path(dir, &key);
        if let Some(v) = Self::load(&path, &key) {
            return Ok((v, Source::Hit));
        }
        let existed = path.exists();
        let v = produce()?;
        if let Err(e) = Self::store(dir, &key, &v) {
            eprintln!("warning: cache write failed: {e:#}");
        }
        Ok((v, if existed { Source::Recomputed } else { Source::Computed }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_after_store_and_recompute_after_damage() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(Some(dir.path().to_path_buf()));
        let req = json!({"cmd": "x", "n": 3});
        let (a, s) = cache.get_or_compute(&req, || Ok(json!({"v": [1, 2, 3]}))).unwrap();
        assert_eq!(s, Source::Computed);
        let (b, s) = cache.get_or_compute(&req, || panic!("should hit")).unwrap();
        assert_eq!((a.clone(), s), (b, Source::Hit));

        let path = Cache::path(dir.path(), &Cache::key(&req));
        let text = fs::read_to_string(&path).unwrap().replace("[1,2,3]", "[1,2,4]");
        fs::write(&path, text).unwrap();
        let (c, s) = cache.get_or_compute(&req, || Ok(json!({"v": [1, 2, 3]}))).unwrap();
        assert_eq!((c, s), (a, Source::Recomputed));
    }

    #[test]
    fn disabled_cache_always_computes() {
        let cache = Cache::new(None);
        let (_, s) = cache.get_or_compute(&json!(1), || Ok(json!(2))).unwrap();
        assert_eq!(s, Source::Computed);
    }
}
