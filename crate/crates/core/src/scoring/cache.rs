//! Content-addressed reply cache.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use super::backend::BackendReply;
use crate::hashing::sha256_hex;

/// SHA-256 over backend id, template name, rendered prompt and alias sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey(String);

#[derive(Serialize)]
struct KeyMaterial<'a> {
    backend: &'a str,
    template: &'a str,
    prompt: &'a str,
    yes: &'a BTreeSet<String>,
    no: &'a BTreeSet<String>,
}

impl CacheKey {
    pub fn new(
        backend_id: &str,
        template_name: &str,
        prompt: &str,
        yes_aliases: &BTreeSet<String>,
        no_aliases: &BTreeSet<String>,
    ) -> Self {
        let material = KeyMaterial {
            backend: backend_id,
            template: template_name,
            prompt,
            yes: yes_aliases,
            no: no_aliases,
        };
        let bytes = serde_json::to_vec(&material).expect("key material serializes");
        CacheKey(sha256_hex(&bytes))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Concurrent-safe reply store. Writers of the same key always carry the same
/// value, so races resolve to last-write-wins.
pub trait ReplyCache: Send + Sync {
    fn get(&self, key: &CacheKey) -> Option<BackendReply>;
    fn put(&self, key: &CacheKey, reply: &BackendReply);
}

#[derive(Debug, Default)]
pub struct MemoryCache {
    map: RwLock<HashMap<CacheKey, BackendReply>>,
}

impl MemoryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ReplyCache for MemoryCache {
    fn get(&self, key: &CacheKey) -> Option<BackendReply> {
        self.map.read().expect("cache lock").get(key).cloned()
    }

    fn put(&self, key: &CacheKey, reply: &BackendReply) {
        self.map.write().expect("cache lock").insert(key.clone(), reply.clone());
    }
}

/// One JSON file per key at `<root>/<first two hex chars>/<key>.json`.
#[derive(Debug, Clone)]
pub struct DirCache {
    root: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    reply: BackendReply,
}

impl DirCache {
    pub fn new(root: impl Into<PathBuf>) -> std::io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.root.join(&key.0[..2]).join(format!("{}.json", key.0))
    }

    fn write(&self, key: &CacheKey, reply: &BackendReply) -> std::io::Result<()> {
        let path = self.path_for(key);
        let dir = path.parent().expect("entry has a parent");
        fs::create_dir_all(dir)?;
        let entry = Entry {
            key: key.0.clone(),
            reply: reply.clone(),
        };
        // write-then-rename so readers never see a partial file
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer(&mut tmp, &entry)?;
        tmp.write_all(b"\n")?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(())
    }
}

impl ReplyCache for DirCache {
    fn get(&self, key: &CacheKey) -> Option<BackendReply> {
        let path = self.path_for(key);
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice::<Entry>(&bytes) {
            Ok(entry) if entry.key == key.0 => Some(entry.reply),
            Ok(_) | Err(_) => {
                log::warn!("ignoring unreadable cache entry {}", path.display());
                None
            }
        }
    }

    fn put(&self, key: &CacheKey, reply: &BackendReply) {
        if let Err(e) = self.write(key, reply) {
            log::warn!("cache write failed for {}: {e}", key.0);
        }
    }
}
