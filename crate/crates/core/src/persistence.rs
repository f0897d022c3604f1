//! Fat-node partial persistence: every field keeps its version-stamped
//! history, reads can target any past version, writes go to the open one.

use crate::error::{Error, Result};

pub type VersionId = u64;

/// Version counter and global write count.
#[derive(Clone, Debug, Default)]
pub struct VersionStore {
    current: VersionId,
    writes: u64,
}

impl VersionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_version(&mut self) -> VersionId {
        self.current += 1;
        self.current
    }

    /// The open version, 0 before the first `new_version`.
    pub fn current(&self) -> VersionId {
        self.current
    }

    pub fn writes(&self) -> u64 {
        self.writes
    }
}

/// One field's history.
#[derive(Clone, Debug)]
pub struct History<T> {
    init: T,
    entries: Vec<(u32, T)>,
}

impl<T: Copy + PartialEq> History<T> {
    pub fn new(init: T) -> Self {
        History { init, entries: Vec::new() }
    }

    pub fn write(&mut self, store: &mut VersionStore, value: T) -> Result<()> {
        let v = store.current;
        if v == 0 {
            return Err(Error::NoOpenVersion);
        }
        let v = u32::try_from(v).expect("version counter exceeds u32 storage");
        store.writes += 1;
        match self.entries.last_mut() {
            Some(last) if last.0 == v => last.1 = value,
            _ => self.entries.push((v, value)),
        }
        Ok(())
    }

    pub fn read(&self, v: VersionId) -> T {
        match self.entries.last() {
            None => self.init,
            Some(&(lv, val)) if lv as u64 <= v => val,
            _ => {
                let i = self.entries.partition_point(|e| e.0 as u64 <= v);
                if i == 0 {
                    self.init
                } else {
                    self.entries[i - 1].1
                }
            }
        }
    }

    pub fn latest(&self) -> T {
        self.entries.last().map_or(self.init, |e| e.1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u32, T)] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn versions_count_up() {
        let mut s = VersionStore::new();
        assert_eq!(s.new_version(), 1);
        assert_eq!(s.new_version(), 2);
        assert_eq!(s.new_version(), 3);
    }

    #[test]
    fn write_and_read_back() {
        let mut s = VersionStore::new();
        let mut h = History::new(0i32);
        assert_eq!(h.write(&mut s, 5), Err(Error::NoOpenVersion));
        s.new_version();
        h.write(&mut s, 5).unwrap();
        assert_eq!(h.entries(), &[(1, 5)]);
        s.new_version();
        s.new_version();
        h.write(&mut s, 7).unwrap();
        assert_eq!(h.entries(), &[(1, 5), (3, 7)]);
        assert_eq!((h.read(2), h.read(3)), (5, 7));
        h.write(&mut s, 8).unwrap();
        h.write(&mut s, 8).unwrap();
        assert_eq!(h.entries(), &[(1, 5), (3, 8)]);
        assert_eq!(h.read(0), 0);
        assert_eq!(h.read(2), 5);
        assert_eq!(h.read(3), 8);
        assert_eq!(s.writes(), 4);
    }
}
