//! File plumbing: headerless raw f32 series files (little-endian,
//! series-major) and the index snapshot envelope that bundles the learned
//! model, the tree, and content hashes of both the model and the data
//! file it was built from.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::series::Dataset;
use crate::wire::{self, Reader};

const SNAPSHOT_MAGIC: &[u8; 4] = b"SXI1";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Read a raw series file: `count` series of `series_length` f32 values.
/// `count == 0` infers the count from the file size.
pub fn read_raw(path: &Path, series_length: usize, count: usize) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let stride = series_length as u64 * 4;
    let size = bytes.len() as u64;
    let expected = |c: usize| c as u64 * stride;
    let count = if count == 0 {
        if stride == 0 || size % stride != 0 {
            return Err(Error::FileSizeMismatch {
                path: path.to_path_buf(),
                size,
                expected: size - size % stride.max(1),
                count: (size / stride.max(1)) as usize,
                n: series_length,
            });
        }
        (size / stride) as usize
    } else {
        if size != expected(count) {
            return Err(Error::FileSizeMismatch {
                path: path.to_path_buf(),
                size,
                expected: expected(count),
                count,
                n: series_length,
            });
        }
        count
    };
    let mut values = Vec::with_capacity(count * series_length);
    for chunk in bytes.chunks_exact(4) {
        values.push(f32::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok(values)
}

/// Read and ingest (z-normalize) a raw series file.
pub fn load_dataset(path: &Path, series_length: usize, count: usize) -> Result<Dataset> {
    Dataset::from_raw(read_raw(path, series_length, count)?, series_length)
}

/// Write raw f32 values little-endian (the inverse of [`read_raw`]).
pub fn write_raw(path: &Path, values: &[f32]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 4);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn sha256_bytes(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

pub fn sha256_file(path: &Path) -> Result<[u8; 32]> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(sha256_bytes(&bytes))
}

/// Everything needed to reload an index: the serialized model, the
/// serialized tree, the shape of the data file, and content hashes that
/// pin the snapshot to the exact model and data it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub model_bytes: Vec<u8>,
    pub tree_bytes: Vec<u8>,
    pub data_hash: [u8; 32],
    pub series_count: u64,
    pub series_length: u64,
}

impl Snapshot {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(SNAPSHOT_MAGIC);
        wire::put_u64(&mut buf, self.series_count);
        wire::put_u64(&mut buf, self.series_length);
        buf.extend_from_slice(&self.data_hash);
        buf.extend_from_slice(&sha256_bytes(&self.model_bytes));
        wire::put_u64(&mut buf, self.model_bytes.len() as u64);
        buf.extend_from_slice(&self.model_bytes);
        wire::put_u64(&mut buf, self.tree_bytes.len() as u64);
        buf.extend_from_slice(&self.tree_bytes);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "index snapshot");
        r.expect_magic(SNAPSHOT_MAGIC)?;
        let series_count = r.u64()?;
        let series_length = r.u64()?;
        let data_hash: [u8; 32] = r.bytes(32)?.try_into().unwrap();
        let model_hash: [u8; 32] = r.bytes(32)?.try_into().unwrap();
        let model_len = r.u64()? as usize;
        let model_bytes = r.bytes(model_len)?.to_vec();
        let tree_len = r.u64()? as usize;
        let tree_bytes = r.bytes(tree_len)?.to_vec();
        r.done()?;
        if sha256_bytes(&model_bytes) != model_hash {
            return Err(Error::HashMismatch { what: "model" });
        }
        Ok(Snapshot {
            model_bytes,
            tree_bytes,
            data_hash,
            series_count,
            series_length,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| io_err(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Check that `data_path` is byte-identical to the file the snapshot
    /// was built from.
    pub fn verify_data(&self, data_path: &Path) -> Result<()> {
        if sha256_file(data_path)? != self.data_hash {
            return Err(Error::HashMismatch { what: "data" });
        }
        Ok(())
    }
}

/// Convenience: resolve a possibly relative path against a base directory.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, Profile};

    #[test]
    fn raw_round_trip_and_inference() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.f32");
        let values = generate(Profile::Noisy, 7, 32, 1);
        write_raw(&path, &values).unwrap();
        assert_eq!(read_raw(&path, 32, 7).unwrap(), values);
        assert_eq!(read_raw(&path, 32, 0).unwrap(), values);
        let ds = load_dataset(&path, 32, 0).unwrap();
        assert_eq!(ds.len(), 7);
    }

    #[test]
    fn size_mismatch_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.f32");
        write_raw(&path, &[1.0; 10]).unwrap();
        assert!(read_raw(&path, 4, 3).is_err()); // 10 != 12
        assert!(read_raw(&path, 4, 0).is_err()); // 10 % 4 != 0
        assert!(read_raw(&path, 5, 2).is_ok());
    }

    #[test]
    fn snapshot_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data.f32");
        write_raw(&data, &generate(Profile::Smooth, 5, 16, 2)).unwrap();
        let snap = Snapshot {
            model_bytes: vec![1, 2, 3, 4],
            tree_bytes: vec![9, 8, 7],
            data_hash: sha256_file(&data).unwrap(),
            series_count: 5,
            series_length: 16,
        };
        let path = dir.path().join("index.sx");
        snap.write(&path).unwrap();
        let back = Snapshot::read(&path).unwrap();
        assert_eq!(back, snap);
        assert_eq!(back.to_bytes(), snap.to_bytes());
        back.verify_data(&data).unwrap();
    }

    #[test]
    fn tampering_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data.f32");
        write_raw(&data, &[0.5; 8]).unwrap();
        let snap = Snapshot {
            model_bytes: vec![1, 2, 3],
            tree_bytes: vec![],
            data_hash: sha256_file(&data).unwrap(),
            series_count: 2,
            series_length: 4,
        };
        // corrupt the embedded model bytes
        let mut bytes = snap.to_bytes();
        let off = bytes.len() - snap.tree_bytes.len() - 8 - snap.model_bytes.len();
        bytes[off] ^= 0xff;
        assert!(matches!(
            Snapshot::from_bytes(&bytes),
            Err(Error::HashMismatch { what: "model" })
        ));
        // change the data file
        write_raw(&data, &[0.25; 8]).unwrap();
        assert!(matches!(
            snap.verify_data(&data),
            Err(Error::HashMismatch { what: "data" })
        ));
    }
}
