use std::collections::BTreeMap;

use super::{FileSet, SystemConfig};
use crate::error::ProtocolError;

/// What one user stores after placement: subfiles keyed by `(n, f)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheContent {
    pub user: usize,
    packet_len: usize,
    subfiles: BTreeMap<(usize, usize), Vec<u8>>,
}

impl CacheContent {
    pub(crate) fn new(user: usize, packet_len: usize) -> Self {
        Self {
            user,
            packet_len,
            subfiles: BTreeMap::new(),
        }
    }

    pub(crate) fn insert(&mut self, n: usize, f: usize, bytes: Vec<u8>) {
        self.subfiles.insert((n, f), bytes);
    }

    pub fn subfile(&self, n: usize, f: usize) -> Option<&[u8]> {
        self.subfiles.get(&(n, f)).map(Vec::as_slice)
    }

    /// Packet `j ∈ [1:B-1]` of a cached subfile.
    pub fn packet(&self, n: usize, f: usize, j: usize) -> Option<&[u8]> {
        let start = (j - 1) * self.packet_len;
        self.subfile(n, f)
            .map(|s| &s[start..start + self.packet_len])
    }

    pub fn stored(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.subfiles.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.subfiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subfiles.is_empty()
    }

    pub fn size_bits(&self) -> u64 {
        self.subfiles.values().map(|s| s.len() as u64 * 8).sum()
    }
}

/// User `k` stores `W_n^f` for every `n` and every row `f` with a star in
/// column `k`.
pub fn place(config: &SystemConfig, files: &FileSet) -> Result<Vec<CacheContent>, ProtocolError> {
    files.check(config)?;
    let pda = config.pda();
    Ok((0..pda.k())
        .map(|k| {
            let mut cache = CacheContent::new(k, config.packet_len());
            for f in (0..pda.f()).filter(|&f| pda.cell(f, k).is_star()) {
                for n in 0..config.files() {
                    cache.insert(n, f, files.subfile(n, f).to_vec());
                }
            }
            cache
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{catalog, man_pda, single_user_pda, ManParams};

    #[test]
    fn sec4a_user1_holds_rows_1_and_2() {
        let config = SystemConfig::new(3, 6, 6, 64, catalog("sec4a").unwrap(), 1).unwrap();
        let files = FileSet::synthetic(&config);
        let caches = place(&config, &files).unwrap();
        let stored: Vec<_> = caches[0].stored().collect();
        let expected: Vec<_> = (0..6).flat_map(|n| [(n, 0), (n, 1)]).collect();
        let mut expected = expected;
        expected.sort();
        assert_eq!(stored, expected);
        for cache in &caches {
            assert_eq!(cache.len(), 6 * 2);
            // N Z L / F bits
            assert_eq!(cache.size_bits(), 6 * 2 * files.padded_len() as u64 * 8 / 4);
        }
    }

    #[test]
    fn zero_star_column_caches_nothing() {
        let config = SystemConfig::new(2, 3, 1, 8, single_user_pda(2, 0).unwrap(), 1).unwrap();
        let caches = place(&config, &FileSet::synthetic(&config)).unwrap();
        assert!(caches[0].is_empty());
    }

    #[test]
    fn man_2_1_caches_half() {
        let config =
            SystemConfig::new(2, 2, 2, 8, man_pda(ManParams { k: 2, t: 1 }).unwrap(), 1).unwrap();
        let files = FileSet::synthetic(&config);
        let caches = place(&config, &files).unwrap();
        for cache in &caches {
            assert_eq!(cache.len(), 2);
            assert_eq!(cache.size_bits() * 2, 2 * files.padded_len() as u64 * 8);
        }
        assert_eq!(caches[0].stored().collect::<Vec<_>>(), vec![(0, 0), (1, 0)]);
        assert_eq!(caches[1].stored().collect::<Vec<_>>(), vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn rejects_mismatched_files() {
        let config = SystemConfig::new(2, 2, 1, 8, catalog("trivial").unwrap(), 1).unwrap();
        let other = SystemConfig::new(2, 2, 1, 16, catalog("trivial").unwrap(), 1).unwrap();
        assert!(place(&config, &FileSet::synthetic(&other)).is_err());
    }
}
