//! Output layout, manifests and the on-disk cache.
//!
//! A run of `job` writes into `<root>/<command>-<key>` where `key` is a prefix
//! of the SHA-256 of the resolved job. Cached results live in `<root>/cache`
//! under the hash of whatever determines them, so a line solve computed by
//! `solve-line` is picked up by `stokes-diff` and vice versa.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tritronquee::io::{write_file, write_json};
use tritronquee::{Error, Result};

use crate::config::Job;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn content_hash<T: Serialize + ?Sized>(kind: &str, value: &T) -> String {
    let mut h = Sha256::new();
    h.update(kind.as_bytes());
    h.update(VERSION.as_bytes());
    h.update(serde_json::to_vec(value).expect("configs serialize"));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Context {
    pub root: PathBuf,
    pub cache: bool,
}

pub struct Run<'a> {
    pub ctx: &'a Context,
    pub job: Job,
    pub key: String,
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub cache_hits: Vec<String>,
}

impl<'a> Run<'a> {
    pub fn new(ctx: &'a Context, job: Job) -> Self {
        let key = content_hash("job", &job);
        let dir = ctx.root.join(format!("{}-{}", job.name(), &key[..12]));
        Self { ctx, job, key, dir, files: Vec::new(), cache_hits: Vec::new() }
    }

    /// Writes `name` into the run directory through `fill`.
    pub fn emit(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut bytes = Vec::new();
        fill(&mut bytes)?;
        write_file(&self.dir.join(name), &bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn emit_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        self.emit(name, |b| write_json(b, value))
    }

    /// Loads `kind` keyed by `key_material` from the cache, or computes and stores it.
    pub fn cached<K: Serialize, T: Serialize + DeserializeOwned>(
        &mut self,
        kind: &str,
        key_material: &K,
        compute: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        let path = self.ctx.root.join("cache").join(format!("{kind}-{}.json", content_hash(kind, key_material)));
        if self.ctx.cache {
            if let Ok(bytes) = std::fs::read(&path) {
                if let Ok(value) = serde_json::from_slice(&bytes) {
                    self.cache_hits.push(kind.to_string());
                    return Ok(value);
                }
            }
        }
        let value = compute()?;
        if self.ctx.cache {
            write_file(&path, &serde_json::to_vec(&value)?)?;
        }
        Ok(value)
    }

    pub fn manifest(&self, status: &str, summary: Value) -> Value {
        json!({
            "tool": "tritronquee",
            "version": VERSION,
            "key": self.key,
            "job": self.job,
            "output": { "root": self.ctx.root, "dir": self.dir, "cache": self.ctx.cache },
            "status": status,
            "files": self.files,
            "cache_hits": self.cache_hits,
            "summary": summary,
        })
    }

    pub fn finish(self, summary: Value) -> Result<PathBuf> {
        let m = self.manifest("ok", summary);
        let mut bytes = Vec::new();
        write_json(&mut bytes, &m)?;
        write_file(&self.dir.join("manifest.json"), &bytes)?;
        Ok(self.dir)
    }

    /// Records the failure next to whatever was written so far.
    pub fn fail(mut self, err: &Error) -> Value {
        let diag = diagnostic(err);
        let _ = self.emit_json("error.json", &diag);
        let m = self.manifest("failed", diag.clone());
        let mut bytes = Vec::new();
        if write_json(&mut bytes, &m).is_ok() {
            let _ = write_file(&self.dir.join("manifest.json"), &bytes);
        }
        diag
    }
}

/// 2 for configurations that can never work, 1 for everything the numerics gave up on.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::InsideRadius { .. } | Error::OutOfInterval { .. } => 2,
        _ => 1,
    }
}

pub fn diagnostic(err: &Error) -> Value {
    let kind = format!("{err:?}");
    let kind = kind.split([' ', '(', '{']).next().unwrap_or("Error").to_string();
    let mut v = json!({ "error": kind, "message": err.to_string(), "exit_code": exit_code(err) });
    if let Error::NoConvergence { iterations, residual, history } = err {
        v["iterations"] = json!(iterations);
        v["residual"] = json!(residual);
        v["history"] = json!(history);
    }
    v
}

/// Reads the job back from a manifest written by [`Run::finish`].
pub fn job_from_manifest(path: &Path) -> Result<Job> {
    let bytes = std::fs::read(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_slice(&bytes).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    serde_json::from_value(v["job"].clone())
        .map_err(|e| Error::InvalidArgument(format!("{}: no usable job: {e}", path.display())))
}
