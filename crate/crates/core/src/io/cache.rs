//! On-disk sample cache.
//!
//! A cache is a directory holding `manifest.json` and `samples.bin`.
//!
//! `samples.bin` layout (all integers little-endian):
//!
//! ```text
//! header   magic "TRJCACHE" | version u32 | reserved u32 | config fingerprint u64 | count u64
//! record*  payload length u64 | payload | xxh64(payload) u64
//! index    count × (record offset u64 | key length u32 | key bytes)
//! trailer  index offset u64 | xxh64(index) u64 | magic "TRJINDEX"
//! ```

use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh64::xxh64;

use super::codec::{decode_sample, encode_sample};
use super::CacheError;
use crate::preprocess::{PreprocConfig, UnifiedSample};

pub const FORMAT_NAME: &str = "trajhub-cache";
pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DATA_FILE: &str = "samples.bin";

const HEADER_MAGIC: &[u8; 8] = b"TRJCACHE";
const TRAILER_MAGIC: &[u8; 8] = b"TRJINDEX";
const HEADER_LEN: u64 = 32;
const TRAILER_LEN: u64 = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheManifest {
    pub format: String,
    pub format_version: u32,
    pub sample_count: u64,
    pub config: PreprocConfig,
    /// Hex-encoded fingerprint of the canonical config serialization.
    pub config_fingerprint: String,
    pub data_file: String,
}

impl CacheManifest {
    fn new(cfg: &PreprocConfig, sample_count: u64) -> Self {
        Self {
            format: FORMAT_NAME.into(),
            format_version: FORMAT_VERSION,
            sample_count,
            config: cfg.clone(),
            config_fingerprint: format!("{:016x}", cfg.fingerprint()),
            data_file: DATA_FILE.into(),
        }
    }
}

/// Streams samples into a new cache directory.
pub struct CacheWriter {
    dir: PathBuf,
    config: PreprocConfig,
    fingerprint: u64,
    out: BufWriter<File>,
    offset: u64,
    index: Vec<(u64, String)>,
    keys: HashSet<String>,
}

impl CacheWriter {
    pub fn create(dir: impl AsRef<Path>, config: &PreprocConfig) -> Result<Self, CacheError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let fingerprint = config.fingerprint();
        let mut out = BufWriter::with_capacity(1 << 20, File::create(dir.join(DATA_FILE))?);
        out.write_all(HEADER_MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&0u32.to_le_bytes())?;
        out.write_all(&fingerprint.to_le_bytes())?;
        out.write_all(&0u64.to_le_bytes())?;
        Ok(Self {
            dir,
            config: config.clone(),
            fingerprint,
            out,
            offset: HEADER_LEN,
            index: Vec::new(),
            keys: HashSet::new(),
        })
    }

    pub fn push(&mut self, sample: &UnifiedSample) -> Result<(), CacheError> {
        if sample.config_fingerprint != self.fingerprint {
            return Err(CacheError::ConfigMismatch {
                fields: vec!["config_fingerprint".into()],
            });
        }
        self.push_encoded(&sample.sample_key, &encode_sample(sample))
    }

    /// Appends an already-encoded payload; the caller vouches for its fingerprint.
    pub(crate) fn push_encoded(&mut self, key: &str, payload: &[u8]) -> Result<(), CacheError> {
        if !self.keys.insert(key.to_string()) {
            return Err(CacheError::DuplicateKey(key.to_string()));
        }
        self.index.push((self.offset, key.to_string()));
        self.out.write_all(&(payload.len() as u64).to_le_bytes())?;
        self.out.write_all(payload)?;
        self.out.write_all(&xxh64(payload, 0).to_le_bytes())?;
        self.offset += 16 + payload.len() as u64;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn finish(mut self) -> Result<CacheManifest, CacheError> {
        let mut index = Vec::new();
        for (offset, key) in &self.index {
            index.extend_from_slice(&offset.to_le_bytes());
            index.extend_from_slice(&(key.len() as u32).to_le_bytes());
            index.extend_from_slice(key.as_bytes());
        }
        self.out.write_all(&index)?;
        self.out.write_all(&self.offset.to_le_bytes())?;
        self.out.write_all(&xxh64(&index, 0).to_le_bytes())?;
        self.out.write_all(TRAILER_MAGIC)?;
        let count = self.index.len() as u64;
        let mut file = self.out.into_inner().map_err(|e| e.into_error())?;
        file.seek(SeekFrom::Start(24))?;
        file.write_all(&count.to_le_bytes())?;
        file.sync_all()?;

        let manifest = CacheManifest::new(&self.config, count);
        let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        text.push(b'\n');
        fs::write(self.dir.join(MANIFEST_FILE), text)?;
        Ok(manifest)
    }
}

/// Writes every sample to a fresh cache at `dir`.
pub fn write_cache<'a>(
    samples: impl IntoIterator<Item = &'a UnifiedSample>,
    dir: impl AsRef<Path>,
    config: &PreprocConfig,
) -> Result<CacheManifest, CacheError> {
    let mut w = CacheWriter::create(dir, config)?;
    for s in samples {
        w.push(s)?;
    }
    w.finish()
}

/// Random-access reader. Reads are positional, so one reader can serve
/// many threads at once.
pub struct CacheReader {
    manifest: CacheManifest,
    file: PositionalFile,
    size: u64,
    entries: Vec<(u64, String)>,
    by_key: HashMap<String, usize>,
}

impl std::fmt::Debug for CacheReader {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CacheReader")
            .field("manifest", &self.manifest)
            .field("len", &self.entries.len())
            .finish()
    }
}

impl CacheReader {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, CacheError> {
        let dir = dir.as_ref();
        let manifest_bytes = fs::read(dir.join(MANIFEST_FILE))?;
        let manifest: CacheManifest = serde_json::from_slice(&manifest_bytes)
            .map_err(|e| CacheError::Format(format!("manifest: {e}")))?;
        if manifest.format != FORMAT_NAME || manifest.format_version != FORMAT_VERSION {
            return Err(CacheError::Format(format!(
                "unsupported cache format {} v{}",
                manifest.format, manifest.format_version
            )));
        }
        if manifest.config_fingerprint != format!("{:016x}", manifest.config.fingerprint()) {
            return Err(CacheError::Format("manifest fingerprint does not match its config".into()));
        }
        let file = PositionalFile::open(&dir.join(&manifest.data_file))?;
        let size = file.len()?;
        if size < HEADER_LEN + TRAILER_LEN {
            return Err(CacheError::Format("data file too short".into()));
        }

        let mut header = [0u8; HEADER_LEN as usize];
        file.read_exact_at(&mut header, 0)?;
        if &header[..8] != HEADER_MAGIC {
            return Err(CacheError::Format("bad header magic".into()));
        }
        let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
        let fingerprint = u64::from_le_bytes(header[16..24].try_into().unwrap());
        let count = u64::from_le_bytes(header[24..32].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(CacheError::Format(format!("data file version {version}")));
        }
        if format!("{fingerprint:016x}") != manifest.config_fingerprint {
            return Err(CacheError::ConfigMismatch {
                fields: vec!["config_fingerprint (data file vs manifest)".into()],
            });
        }
        if count != manifest.sample_count {
            return Err(CacheError::Format(format!(
                "data file holds {count} samples, manifest says {}",
                manifest.sample_count
            )));
        }

        let mut trailer = [0u8; TRAILER_LEN as usize];
        file.read_exact_at(&mut trailer, size - TRAILER_LEN)?;
        if &trailer[16..] != TRAILER_MAGIC {
            return Err(CacheError::Format("bad trailer magic".into()));
        }
        let index_offset = u64::from_le_bytes(trailer[..8].try_into().unwrap());
        let index_hash = u64::from_le_bytes(trailer[8..16].try_into().unwrap());
        if index_offset < HEADER_LEN || index_offset > size - TRAILER_LEN {
            return Err(CacheError::Format("index offset out of range".into()));
        }
        let mut index = vec![0u8; (size - TRAILER_LEN - index_offset) as usize];
        file.read_exact_at(&mut index, index_offset)?;
        if xxh64(&index, 0) != index_hash {
            return Err(CacheError::Checksum {
                entry: "<index>".into(),
            });
        }
        let mut entries = Vec::with_capacity(count as usize);
        let mut pos = 0;
        while pos < index.len() {
            let bad = || CacheError::Format("truncated index".into());
            let offset =
                u64::from_le_bytes(index.get(pos..pos + 8).ok_or_else(bad)?.try_into().unwrap());
            let klen = u32::from_le_bytes(
                index.get(pos + 8..pos + 12).ok_or_else(bad)?.try_into().unwrap(),
            ) as usize;
            let key = std::str::from_utf8(index.get(pos + 12..pos + 12 + klen).ok_or_else(bad)?)
                .map_err(|e| CacheError::Format(e.to_string()))?
                .to_string();
            entries.push((offset, key));
            pos += 12 + klen;
        }
        if entries.len() as u64 != count {
            return Err(CacheError::Format("index entry count mismatch".into()));
        }
        let mut by_key = HashMap::with_capacity(entries.len());
        for (i, (_, key)) in entries.iter().enumerate() {
            if by_key.insert(key.clone(), i).is_some() {
                return Err(CacheError::DuplicateKey(key.clone()));
            }
        }
        Ok(Self {
            manifest,
            file,
            size,
            entries,
            by_key,
        })
    }

    /// Opens a cache and checks it was built with `expected`.
    pub fn open_expecting(
        dir: impl AsRef<Path>,
        expected: &PreprocConfig,
    ) -> Result<Self, CacheError> {
        let reader = Self::open(dir)?;
        reader.check_config(expected)?;
        Ok(reader)
    }

    pub fn check_config(&self, expected: &PreprocConfig) -> Result<(), CacheError> {
        let fields = self.manifest.config.diff(expected);
        if fields.is_empty() {
            Ok(())
        } else {
            Err(CacheError::ConfigMismatch {
                fields: fields.into_iter().map(String::from).collect(),
            })
        }
    }

    pub fn manifest(&self) -> &CacheManifest {
        &self.manifest
    }

    pub fn config(&self) -> &PreprocConfig {
        &self.manifest.config
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(_, k)| k.as_str())
    }

    pub fn key(&self, index: usize) -> Option<&str> {
        self.entries.get(index).map(|(_, k)| k.as_str())
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.by_key.get(key).copied()
    }

    /// Verified raw payload of entry `index`.
    pub fn payload(&self, index: usize) -> Result<Vec<u8>, CacheError> {
        let (offset, key) = self
            .entries
            .get(index)
            .ok_or(CacheError::IndexOutOfRange { index, len: self.entries.len() })?;
        let mut len = [0u8; 8];
        self.file.read_exact_at(&mut len, *offset)?;
        let len = u64::from_le_bytes(len);
        let end = offset.checked_add(16).and_then(|o| o.checked_add(len));
        if end.is_none_or(|e| e > self.size) {
            return Err(CacheError::Checksum { entry: key.clone() });
        }
        let mut buf = vec![0u8; len as usize + 8];
        self.file.read_exact_at(&mut buf, offset + 8)?;
        let hash = u64::from_le_bytes(buf[len as usize..].try_into().unwrap());
        buf.truncate(len as usize);
        if xxh64(&buf, 0) != hash {
            return Err(CacheError::Checksum { entry: key.clone() });
        }
        Ok(buf)
    }

    pub fn get(&self, index: usize) -> Result<UnifiedSample, CacheError> {
        let payload = self.payload(index)?;
        let key = &self.entries[index].1;
        let sample = decode_sample(&payload).map_err(|e| CacheError::Format(format!("{key}: {}", e.0)))?;
        if &sample.sample_key != key {
            return Err(CacheError::Checksum { entry: key.clone() });
        }
        Ok(sample)
    }

    pub fn get_by_key(&self, key: &str) -> Result<UnifiedSample, CacheError> {
        let i = self
            .index_of(key)
            .ok_or_else(|| CacheError::UnknownKey(key.to_string()))?;
        self.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = Result<UnifiedSample, CacheError>> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

/// Convenience wrapper around [`CacheReader::open`].
pub fn read_cache(dir: impl AsRef<Path>) -> Result<CacheReader, CacheError> {
    CacheReader::open(dir)
}

struct PositionalFile {
    #[cfg(unix)]
    file: File,
    #[cfg(not(unix))]
    file: std::sync::Mutex<File>,
}

impl PositionalFile {
    fn open(path: &Path) -> Result<Self, CacheError> {
        let file = File::open(path)?;
        #[cfg(not(unix))]
        let file = std::sync::Mutex::new(file);
        Ok(Self { file })
    }

    #[cfg(unix)]
    fn len(&self) -> Result<u64, CacheError> {
        Ok(self.file.metadata()?.len())
    }

    #[cfg(not(unix))]
    fn len(&self) -> Result<u64, CacheError> {
        Ok(self.file.lock().unwrap().metadata()?.len())
    }

    #[cfg(unix)]
    fn read_exact_at(&self, buf: &mut [u8], offset: u64) -> Result<(), CacheError> {
        use std::os::unix::fs::FileExt;
        Ok(self.file.read_exact_at(buf, offset)?)
    }

    #[cfg(not(unix))]
    fn read_exact_at(&self, buf: &mut [u8], offset: u64) -> Result<(), CacheError> {
        use std::io::Read;
        let mut f = self.file.lock().unwrap();
        f.seek(SeekFrom::Start(offset))?;
        Ok(f.read_exact(buf)?)
    }
}
