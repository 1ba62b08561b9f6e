use std::fs;
use std::io;
use std::path::Path;

use rand::RngCore;

use super::query::{stream_rng, RngDomain};
use super::SystemConfig;
use crate::error::ProtocolError;

/// `N` equal-length files, zero padded so each splits into `F` subfiles of
/// `B-1` packets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileSet {
    files: Vec<Vec<u8>>,
    original_len: usize,
    subfile_len: usize,
    packet_len: usize,
}

impl FileSet {
    pub fn from_bytes(config: &SystemConfig, files: Vec<Vec<u8>>) -> Result<Self, ProtocolError> {
        if files.len() != config.files() {
            return Err(ProtocolError::Length(format!(
                "expected {} files, got {}",
                config.files(),
                files.len()
            )));
        }
        if let Some((n, f)) = files
            .iter()
            .enumerate()
            .find(|(_, f)| f.len() != config.file_len())
        {
            return Err(ProtocolError::Length(format!(
                "file {n} has {} bytes, expected {}",
                f.len(),
                config.file_len()
            )));
        }
        let padded = config.padded_len();
        let files = files
            .into_iter()
            .map(|mut f| {
                f.resize(padded, 0);
                f
            })
            .collect();
        Ok(Self {
            files,
            original_len: config.file_len(),
            subfile_len: config.subfile_len(),
            packet_len: config.packet_len(),
        })
    }

    /// Seeded pseudo-random file contents of the configured length.
    pub fn synthetic(config: &SystemConfig) -> Self {
        let files = (0..config.files())
            .map(|n| {
                let mut rng = stream_rng(config.seed(), 0, RngDomain::Files, n as u64);
                let mut bytes = vec![0u8; config.file_len()];
                rng.fill_bytes(&mut bytes);
                bytes
            })
            .collect();
        Self::from_bytes(config, files).expect("synthetic files match the config")
    }

    /// Reads every regular file of `dir` in name order. All files must have
    /// the same length.
    pub fn read_dir(dir: &Path) -> io::Result<Vec<Vec<u8>>> {
        let mut paths: Vec<_> = fs::read_dir(dir)?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        paths.iter().map(fs::read).collect()
    }

    pub fn count(&self) -> usize {
        self.files.len()
    }

    /// Padded bytes of file `n`.
    pub fn file(&self, n: usize) -> &[u8] {
        &self.files[n]
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn original_bits(&self) -> u64 {
        self.original_len as u64 * 8
    }

    pub fn padded_len(&self) -> usize {
        self.files.first().map_or(0, Vec::len)
    }

    pub fn pad_bits(&self) -> u64 {
        (self.padded_len() - self.original_len) as u64 * 8
    }

    pub fn subfile_len(&self) -> usize {
        self.subfile_len
    }

    pub fn packet_len(&self) -> usize {
        self.packet_len
    }

    /// `W_n^f` for 0-based row `f`.
    pub fn subfile(&self, n: usize, f: usize) -> &[u8] {
        &self.files[n][f * self.subfile_len..(f + 1) * self.subfile_len]
    }

    /// `W_{n,j}^f` for `j ∈ [1:B-1]`.
    pub fn packet(&self, n: usize, f: usize, j: usize) -> &[u8] {
        debug_assert!(j >= 1);
        let start = (j - 1) * self.packet_len;
        &self.subfile(n, f)[start..start + self.packet_len]
    }

    /// Checks that the set was padded for this configuration.
    pub(crate) fn check(&self, config: &SystemConfig) -> Result<(), ProtocolError> {
        if self.count() != config.files()
            || self.padded_len() != config.padded_len()
            || self.packet_len != config.packet_len()
            || self.original_len != config.file_len()
        {
            return Err(ProtocolError::Length(format!(
                "file set ({} files of {} padded bytes) does not match the configuration ({} files of {} bytes)",
                self.count(),
                self.padded_len(),
                config.files(),
                config.padded_len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::catalog;

    #[test]
    fn pads_to_multiple_of_subpacketization() {
        let config = SystemConfig::new(3, 2, 6, 13, catalog("sec4a").unwrap(), 7).unwrap();
        assert_eq!(config.padded_len(), 16);
        let files = FileSet::from_bytes(&config, vec![vec![1; 13], vec![2; 13]]).unwrap();
        assert_eq!(files.padded_len(), 16);
        assert_eq!(files.pad_bits(), 24);
        assert_eq!(files.packet_len(), 2);
        assert_eq!(files.packet(0, 3, 1), &[1, 0]);
        assert_eq!(files.packet(0, 3, 2), &[0, 0]);
        assert_eq!(files.subfile(1, 0), &[2, 2, 2, 2]);
    }

    #[test]
    fn rejects_unequal_lengths() {
        let config = SystemConfig::new(2, 2, 1, 4, catalog("trivial").unwrap(), 0).unwrap();
        assert!(FileSet::from_bytes(&config, vec![vec![0; 4], vec![0; 5]]).is_err());
        assert!(FileSet::from_bytes(&config, vec![vec![0; 4]]).is_err());
    }

    #[test]
    fn synthetic_is_seeded() {
        let config = SystemConfig::new(2, 3, 1, 32, catalog("trivial").unwrap(), 5).unwrap();
        assert_eq!(FileSet::synthetic(&config), FileSet::synthetic(&config));
        assert_ne!(
            FileSet::synthetic(&config),
            FileSet::synthetic(&config.with_seed(6))
        );
    }
}
