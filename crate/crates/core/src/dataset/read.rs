use std::fs;
use std::path::{Path, PathBuf};

use super::{Manifest, SampleEntry, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::graph::{deserialize, GraphSchema, TrafficGraph};

/// Read handle over a finished dataset. Samples load lazily; the handle is
/// `Sync` and may serve concurrent readers.
#[derive(Debug, Clone)]
pub struct Dataset {
    root: PathBuf,
    manifest: Manifest,
}

/// Opens a dataset by its manifest.
pub fn open_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref().to_path_buf();
    let path = root.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Dataset(format!("cannot read manifest {}: {e}", path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::Dataset(format!("corrupt manifest {}: {e}", path.display())))?;
    manifest.validate()?;
    Ok(Dataset { root, manifest })
}

impl Dataset {
    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.manifest.schema
    }

    pub fn len(&self) -> usize {
        self.manifest.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.samples.is_empty()
    }

    pub fn entry(&self, index: usize) -> Result<&SampleEntry> {
        self.manifest.samples.get(index).ok_or(Error::IndexOutOfRange { index, len: self.len() })
    }

    pub fn sample_path(&self, index: usize) -> Result<PathBuf> {
        Ok(self.root.join(&self.entry(index)?.file))
    }

    /// Raw sample bytes, verified against the manifest size and CRC32.
    pub fn read_bytes(&self, index: usize) -> Result<Vec<u8>> {
        let entry = self.entry(index)?;
        let path = self.root.join(&entry.file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if bytes.len() as u64 != entry.bytes || crc32fast::hash(&bytes) != entry.crc32 {
            return Err(Error::Checksum(path));
        }
        Ok(bytes)
    }

    pub fn get(&self, index: usize) -> Result<TrafficGraph> {
        let bytes = self.read_bytes(index)?;
        deserialize(&bytes).map_err(|e| Error::Dataset(format!("{}: {e}", self.entry(index).unwrap().file)))
    }

    pub fn iter(&self) -> impl Iterator<Item = Result<TrafficGraph>> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}
