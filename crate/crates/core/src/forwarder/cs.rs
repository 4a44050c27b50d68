use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

use crate::model::{matches_with_digest, ContentObject, Digest, Interest};
use crate::time::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub content: ContentObject,
    pub digest: Digest,
    pub inserted_at: Timestamp,
    /// `inserted_at + freshness`; the entry is never served at or after this.
    pub expires_at: Timestamp,
    /// Whether this router verified the object's signature. SCN hash checks
    /// do not set it: they vouch for the object, not for its key binding.
    pub signature_verified: bool,
    seq: u64,
    last_use: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheInsert {
    Inserted,
    /// Same content digest already cached.
    Duplicate,
    /// Capacity is zero.
    Disabled,
}

/// Content store with LRU eviction.
///
/// Lookups scan entries in insertion order so that, among several matches,
/// the least-recently-inserted one is served.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: usize,
    entries: BTreeMap<u64, CacheEntry>,
    by_digest: HashMap<Digest, u64>,
    lru: BTreeMap<u64, u64>,
    next_seq: u64,
    clock: u64,
}

impl ContentStore {
    pub fn new(capacity: usize) -> Self {
        ContentStore {
            capacity,
            entries: BTreeMap::new(),
            by_digest: HashMap::new(),
            lru: BTreeMap::new(),
            next_seq: 0,
            clock: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, digest: &Digest) -> bool {
        self.by_digest.contains_key(digest)
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &CacheEntry> {
        self.entries.values()
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    fn remove_seq(&mut self, seq: u64) -> Option<CacheEntry> {
        let e = self.entries.remove(&seq)?;
        self.by_digest.remove(&e.digest);
        self.lru.remove(&e.last_use);
        Some(e)
    }

    pub fn insert(&mut self, content: ContentObject, digest: Digest, now: Timestamp, signature_verified: bool) -> CacheInsert {
        if self.capacity == 0 {
            return CacheInsert::Disabled;
        }
        if let Some(&seq) = self.by_digest.get(&digest) {
            if signature_verified {
                if let Some(e) = self.entries.get_mut(&seq) {
                    e.signature_verified = true;
                }
            }
            return CacheInsert::Duplicate;
        }
        while self.entries.len() >= self.capacity {
            let (_, victim) = self.lru.pop_first().expect("lru tracks every entry");
            let e = self.entries.remove(&victim).expect("lru points at live entry");
            self.by_digest.remove(&e.digest);
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        let last_use = self.tick();
        let expires_at = now + Duration::from_secs(content.freshness);
        self.entries.insert(
            seq,
            CacheEntry {
                content,
                digest,
                inserted_at: now,
                expires_at,
                signature_verified,
                seq,
                last_use,
            },
        );
        self.by_digest.insert(digest, seq);
        self.lru.insert(last_use, seq);
        CacheInsert::Inserted
    }

    /// The least-recently-inserted live entry matching `interest`. When
    /// `require_verified` is set, entries without a verified signature are not served to
    /// key-bound (non-SCN) interests. A hit refreshes LRU recency; expired
    /// entries met on the way are purged.
    pub fn lookup(&mut self, interest: &Interest, now: Timestamp, require_verified: bool) -> Option<&CacheEntry> {
        let mut expired = Vec::new();
        let mut hit = None;
        let keyed = interest.ppkd.is_some() && !interest.name.is_scn();
        for (seq, e) in &self.entries {
            if now >= e.expires_at {
                expired.push(*seq);
                continue;
            }
            if require_verified && keyed && !e.signature_verified {
                continue;
            }
            if matches_with_digest(interest, &e.content, &e.digest) {
                hit = Some(*seq);
                break;
            }
        }
        for seq in expired {
            self.remove_seq(seq);
        }
        let seq = hit?;
        let tick = self.tick();
        let e = self.entries.get_mut(&seq)?;
        self.lru.remove(&e.last_use);
        e.last_use = tick;
        self.lru.insert(tick, seq);
        Some(&*e)
    }

    pub fn purge_expired(&mut self, now: Timestamp) -> usize {
        let expired: Vec<u64> = self
            .entries
            .iter()
            .filter(|(_, e)| now >= e.expires_at)
            .map(|(s, _)| *s)
            .collect();
        for s in &expired {
            self.remove_seq(*s);
        }
        expired.len()
    }
}
