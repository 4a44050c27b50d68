use std::collections::{BTreeMap, BTreeSet};

use crate::model::{ContentObject, Digest, Interest, Name};
use crate::time::Timestamp;

use super::FaceId;

/// PIT key: the requested name (with its implicit digest, for SCN requests)
/// and the publisher key digest. Interests agreeing on both are collapsed.
pub type PitKey = (Name, Option<Digest>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub name: Name,
    pub ppkd: Option<Digest>,
    /// Exclude set of the interest that created the entry.
    pub exclude: BTreeSet<Digest>,
    pub in_faces: BTreeSet<FaceId>,
    pub expiry: Timestamp,
}

impl PitEntry {
    pub fn key(&self) -> PitKey {
        (self.name.clone(), self.ppkd)
    }

    /// Name and publisher key agree with `content`; implicit digest and
    /// exclusion are checked separately by the forwarding pipeline.
    pub fn binds(&self, content: &ContentObject) -> bool {
        self.name.is_prefix_of(&content.name) && self.ppkd.is_none_or(|p| p == content.ppkd)
    }

    pub fn as_interest(&self) -> Interest {
        Interest {
            name: self.name.clone(),
            exclude: self.exclude.clone(),
            ppkd: self.ppkd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PitInsert {
    Created,
    Aggregated,
}

#[derive(Debug, Default, Clone)]
pub struct Pit {
    entries: BTreeMap<PitKey, PitEntry>,
}

impl Pit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &PitKey) -> Option<&PitEntry> {
        self.entries.get(key)
    }

    /// A live entry for the interest's (name, ppkd), if one exists at `now`.
    pub fn find_live(&self, interest: &Interest, now: Timestamp) -> Option<&PitEntry> {
        self.entries
            .get(&(interest.name.clone(), interest.ppkd))
            .filter(|e| e.expiry > now)
    }

    /// Adds `face` to the live entry for the interest or creates a new one.
    pub fn insert(&mut self, interest: &Interest, face: FaceId, now: Timestamp, expiry: Timestamp) -> PitInsert {
        let key = (interest.name.clone(), interest.ppkd);
        match self.entries.get_mut(&key) {
            Some(e) if e.expiry > now => {
                e.in_faces.insert(face);
                PitInsert::Aggregated
            }
            _ => {
                self.entries.insert(
                    key,
                    PitEntry {
                        name: interest.name.clone(),
                        ppkd: interest.ppkd,
                        exclude: interest.exclude.clone(),
                        in_faces: BTreeSet::from([face]),
                        expiry,
                    },
                );
                PitInsert::Created
            }
        }
    }

    /// Keys of live entries whose name and publisher key bind `content`, in
    /// key order.
    pub fn binding_keys(&self, content: &ContentObject, now: Timestamp) -> Vec<PitKey> {
        self.entries
            .iter()
            .filter(|(_, e)| e.expiry > now && e.binds(content))
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn remove(&mut self, key: &PitKey) -> Option<PitEntry> {
        self.entries.remove(key)
    }

    /// Removes every entry with `expiry <= now`; returns how many.
    pub fn sweep(&mut self, now: Timestamp) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, e| e.expiry > now);
        before - self.entries.len()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = &PitEntry> {
        self.entries.values()
    }
}
