//! Durable persistence.
//!
//! On-disk layout under the store root:
//!
//! ```text
//! VERSION              format version, currently "1"
//! LOCK                 advisory lock held while the store is open
//! log                  append-only record log (see [`log`])
//! blobs/<hh>/<hash>    content-addressed blob files
//! ```

mod blob;
pub mod log;

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

pub use blob::{is_valid_hash, sha256_hex, BlobRef, BlobStore};
pub use log::{LogRecord, RecordKind, RecordLog, FORMAT_VERSION};

use crate::error::StoreError;

/// Blob directory plus record log, held open with an exclusive lock.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    blobs: BlobStore,
    log: Mutex<RecordLog>,
    _lock: File,
}

impl Store {
    /// Opens (creating if needed) the store at `root` and returns it with the
    /// replayable records. Fails with [`StoreError::Locked`] if another handle
    /// already holds the store.
    pub fn open(root: impl AsRef<Path>) -> Result<(Self, Vec<LogRecord>), StoreError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root)?;

        let lock = File::options().create(true).truncate(false).write(true).open(root.join("LOCK"))?;
        if lock.try_lock().is_err() {
            return Err(StoreError::Locked(root));
        }

        let version_path = root.join("VERSION");
        let expected = FORMAT_VERSION.to_string();
        match fs::read_to_string(&version_path) {
            Ok(found) if found.trim() == expected => {}
            Ok(found) => {
                return Err(StoreError::IncompatibleFormat { found: found.trim().to_string(), expected })
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                fs::write(&version_path, format!("{expected}\n"))?;
            }
            Err(e) => return Err(e.into()),
        }

        let blobs = BlobStore::open(root.join("blobs"))?;
        let (log, records) = RecordLog::open(&root.join("log"))?;
        Ok((Self { root, blobs, log: Mutex::new(log), _lock: lock }, records))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn log_path(&self) -> PathBuf {
        self.root.join("log")
    }

    pub fn blobs(&self) -> &BlobStore {
        &self.blobs
    }

    pub fn put_blob(&self, bytes: &[u8], mime: &str) -> Result<BlobRef, StoreError> {
        self.blobs.put(bytes, mime)
    }

    pub fn get_blob(&self, blob: &BlobRef) -> Result<Vec<u8>, StoreError> {
        self.blobs.get(&blob.hash)
    }

    pub fn append_record(&self, kind: RecordKind, payload: &str) -> Result<u64, StoreError> {
        self.log.lock().expect("record log poisoned").append(kind, payload)
    }
}
