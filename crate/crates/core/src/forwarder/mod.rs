//! Per-node NDN forwarding: content store, FIB, PIT and the verification
//! pipeline for returning content.
//!
//! A [`Forwarder`] is a single-threaded state machine. Each `handle_*` call
//! consumes one packet and returns a [`ForwarderActions`] record describing
//! what to send where; the caller (the simulator, a test, an FFI host) does
//! the actual sending.

mod cs;
mod fib;
mod pit;
mod policy;

use std::collections::BTreeSet;
use std::fmt;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{content_digest, ContentObject, Digest, Interest, Name};
use crate::time::Timestamp;

pub use cs::{CacheEntry, CacheInsert, ContentStore};
pub use fib::{Fib, FibEntry};
pub use pit::{Pit, PitEntry, PitInsert, PitKey};
pub use policy::{
    ikb_check, BadProbability, Ed25519Verifier, IkbVerdict, SignatureVerifier, VerificationMode,
    VerificationPolicy,
};

pub const DEFAULT_PIT_LIFETIME: Duration = Duration::from_secs(4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FaceId(pub u32);

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "face{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Content with no matching PIT entry.
    Unsolicited,
    /// KeyLocator digest differs from the PIT entry's PPKD.
    IkbKeyMismatch,
    /// Key matched but the signature did not verify.
    IkbBadSignature,
    /// Recomputed content digest differs from the requested SCN.
    ScnDigestMismatch,
    /// Content digest is excluded by every matching PIT entry.
    ExcludeMatch,
    /// Interest carries neither a PPKD nor an implicit digest at a router
    /// enforcing the binding rule.
    UnboundInterest,
    /// Content that cannot be encoded, hence has no digest.
    Malformed,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForwarderActions {
    pub forwarded_interests: Vec<(FaceId, Interest)>,
    pub delivered_contents: Vec<(FaceId, ContentObject)>,
    pub dropped: Option<DropReason>,
    /// Signature verifications performed while handling this packet.
    pub signature_verifications: u32,
    /// Set when an interest was answered from the content store.
    pub cache_hit: bool,
}

impl ForwarderActions {
    fn drop(reason: DropReason) -> Self {
        ForwarderActions {
            dropped: Some(reason),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ForwarderStats {
    pub interests_received: u64,
    pub contents_received: u64,
    pub cache_hits: u64,
    pub collapsed_interests: u64,
    pub forwarded_interests: u64,
    pub no_route: u64,
    pub unbound_interests: u64,
    pub unsolicited_drops: u64,
    pub exclude_drops: u64,
    pub ikb_drops: u64,
    pub ikb_key_mismatch: u64,
    pub ikb_bad_signature: u64,
    pub scn_drops: u64,
    pub malformed_drops: u64,
    pub signature_verifications: u64,
    pub hash_checks: u64,
    pub contents_delivered: u64,
    pub cache_insertions: u64,
}

impl ForwarderStats {
    fn record_drop(&mut self, reason: DropReason) {
        match reason {
            DropReason::Unsolicited => self.unsolicited_drops += 1,
            DropReason::IkbKeyMismatch => {
                self.ikb_drops += 1;
                self.ikb_key_mismatch += 1;
            }
            DropReason::IkbBadSignature => {
                self.ikb_drops += 1;
                self.ikb_bad_signature += 1;
            }
            DropReason::ScnDigestMismatch => self.scn_drops += 1,
            DropReason::ExcludeMatch => self.exclude_drops += 1,
            DropReason::UnboundInterest => self.unbound_interests += 1,
            DropReason::Malformed => self.malformed_drops += 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForwarderConfig {
    pub cache_capacity: usize,
    pub pit_lifetime: Duration,
    pub policy: VerificationPolicy,
    /// Seed for probabilistic verification draws.
    pub rng_seed: u64,
}

impl Default for ForwarderConfig {
    fn default() -> Self {
        ForwarderConfig {
            cache_capacity: 1024,
            pit_lifetime: DEFAULT_PIT_LIFETIME,
            policy: VerificationPolicy::none(),
            rng_seed: 0,
        }
    }
}

pub struct Forwarder {
    config: ForwarderConfig,
    cs: ContentStore,
    fib: Fib,
    pit: Pit,
    rng: ChaCha8Rng,
    verifier: Box<dyn SignatureVerifier + Send>,
    stats: ForwarderStats,
}

impl fmt::Debug for Forwarder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Forwarder")
            .field("config", &self.config)
            .field("cache_len", &self.cs.len())
            .field("pit_len", &self.pit.len())
            .field("fib_len", &self.fib.len())
            .finish()
    }
}

/// Outcome of checking one PIT entry against arriving content.
enum EntryVerdict {
    Pass { signature_verified: bool },
    Fail(DropReason),
}

impl Forwarder {
    pub fn new(config: ForwarderConfig) -> Self {
        Self::with_verifier(config, Box::new(Ed25519Verifier))
    }

    pub fn with_verifier(config: ForwarderConfig, verifier: Box<dyn SignatureVerifier + Send>) -> Self {
        Forwarder {
            cs: ContentStore::new(config.cache_capacity),
            fib: Fib::new(),
            pit: Pit::new(),
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            verifier,
            stats: ForwarderStats::default(),
            config,
        }
    }

    pub fn config(&self) -> &ForwarderConfig {
        &self.config
    }

    pub fn policy(&self) -> &VerificationPolicy {
        &self.config.policy
    }

    pub fn stats(&self) -> &ForwarderStats {
        &self.stats
    }

    pub fn content_store(&self) -> &ContentStore {
        &self.cs
    }

    pub fn pit(&self) -> &Pit {
        &self.pit
    }

    pub fn fib(&self) -> &Fib {
        &self.fib
    }

    pub fn add_route(&mut self, prefix: &Name, faces: Vec<FaceId>) {
        self.fib.insert(prefix, faces);
    }

    /// Faces of the longest matching FIB prefix; empty if none.
    pub fn fib_lookup(&self, name: &Name) -> Vec<FaceId> {
        self.fib.lookup(name).to_vec()
    }

    /// Removes PIT entries with `expiry <= now`.
    pub fn pit_sweep(&mut self, now: Timestamp) -> usize {
        self.pit.sweep(now)
    }

    pub fn clear_pit(&mut self) {
        self.pit.clear();
    }

    pub fn cache_lookup(&mut self, interest: &Interest, now: Timestamp) -> Option<ContentObject> {
        let require_verified = self.config.policy.verifies_all();
        self.cs
            .lookup(interest, now, require_verified)
            .map(|e| e.content.clone())
    }

    /// Inserts without any router check having vouched for the signature.
    pub fn cache_insert(&mut self, content: ContentObject, now: Timestamp) -> CacheInsert {
        match content_digest(&content) {
            Ok(d) => self.insert_cached(content, d, now, false),
            Err(_) => CacheInsert::Disabled,
        }
    }

    fn insert_cached(&mut self, content: ContentObject, digest: Digest, now: Timestamp, verified: bool) -> CacheInsert {
        let r = self.cs.insert(content, digest, now, verified);
        if r == CacheInsert::Inserted {
            self.stats.cache_insertions += 1;
        }
        r
    }

    pub fn handle_interest(&mut self, face: FaceId, interest: Interest, now: Timestamp) -> ForwarderActions {
        self.stats.interests_received += 1;
        if self.config.policy.enforces_binding() && !interest.is_bound() {
            self.stats.record_drop(DropReason::UnboundInterest);
            return ForwarderActions::drop(DropReason::UnboundInterest);
        }

        if let Some(content) = self.cache_lookup(&interest, now) {
            self.stats.cache_hits += 1;
            self.stats.contents_delivered += 1;
            return ForwarderActions {
                delivered_contents: vec![(face, content)],
                cache_hit: true,
                ..Default::default()
            };
        }

        if self.pit.find_live(&interest, now).is_some() {
            self.pit.insert(&interest, face, now, now + self.config.pit_lifetime);
            self.stats.collapsed_interests += 1;
            return ForwarderActions::default();
        }

        let faces: Vec<FaceId> = self
            .fib
            .lookup(&interest.name)
            .iter()
            .copied()
            .filter(|f| *f != face)
            .collect();
        if faces.is_empty() {
            // No route: dropped silently, there are no NACKs.
            self.stats.no_route += 1;
            return ForwarderActions::default();
        }
        self.pit.insert(&interest, face, now, now + self.config.pit_lifetime);
        self.stats.forwarded_interests += faces.len() as u64;
        ForwarderActions {
            forwarded_interests: faces.into_iter().map(|f| (f, interest.clone())).collect(),
            ..Default::default()
        }
    }

    fn draw_verification(&mut self) -> bool {
        match self.config.policy.mode() {
            VerificationMode::None => false,
            VerificationMode::IkbFull => true,
            VerificationMode::IkbProbabilistic(p) => self.rng.gen_bool(p),
            VerificationMode::IkbEdgeOnly => self.config.policy.is_edge(),
        }
    }

    /// Content pipeline: PIT match, exclusion, SCN hash check, IKB check,
    /// then delivery on every satisfied entry's faces and caching.
    ///
    /// Entries that fail a check are kept until they expire so genuine
    /// content can still satisfy them.
    pub fn handle_content(&mut self, face: FaceId, content: ContentObject, now: Timestamp) -> ForwarderActions {
        self.stats.contents_received += 1;
        let digest = match content_digest(&content) {
            Ok(d) => d,
            Err(_) => {
                self.stats.record_drop(DropReason::Malformed);
                return ForwarderActions::drop(DropReason::Malformed);
            }
        };

        let bound = self.pit.binding_keys(&content, now);
        if bound.is_empty() {
            self.stats.record_drop(DropReason::Unsolicited);
            return ForwarderActions::drop(DropReason::Unsolicited);
        }
        let candidates: Vec<PitKey> = bound
            .into_iter()
            .filter(|k| !self.pit.get(k).is_some_and(|e| e.exclude.contains(&digest)))
            .collect();
        if candidates.is_empty() {
            self.stats.record_drop(DropReason::ExcludeMatch);
            return ForwarderActions::drop(DropReason::ExcludeMatch);
        }

        let mut verifications = 0u32;
        let mut verify_drawn: Option<bool> = None;
        let mut ikb_memo: Option<IkbVerdict> = None;
        let mut hashed = false;
        let mut passed: Vec<(PitKey, bool)> = Vec::new();
        let mut first_failure: Option<DropReason> = None;

        for key in candidates {
            let entry = self.pit.get(&key).expect("candidate keys come from the PIT").clone();
            let verdict = if let Some(expected) = entry.name.implicit_digest() {
                hashed = true;
                if *expected == digest {
                    EntryVerdict::Pass {
                        signature_verified: false,
                    }
                } else {
                    EntryVerdict::Fail(DropReason::ScnDigestMismatch)
                }
            } else if entry.ppkd.is_some() && self.config.policy.enforces_binding() {
                let verify = match verify_drawn {
                    Some(v) => v,
                    None => {
                        let v = self.draw_verification();
                        verify_drawn = Some(v);
                        v
                    }
                };
                if verify {
                    // Every key-bound candidate carries the same PPKD (the
                    // content's), so one check covers them all.
                    let v = match ikb_memo {
                        Some(v) => v,
                        None => {
                            let mut counted = |c: &ContentObject, k: &crate::crypto::PublicKey| {
                                verifications += 1;
                                self.verifier.verify(c, k)
                            };
                            let v = ikb_check(&content, &entry, &mut counted);
                            ikb_memo = Some(v);
                            v
                        }
                    };
                    match v {
                        IkbVerdict::Pass => EntryVerdict::Pass {
                            signature_verified: true,
                        },
                        IkbVerdict::KeyMismatch => EntryVerdict::Fail(DropReason::IkbKeyMismatch),
                        IkbVerdict::BadSignature => EntryVerdict::Fail(DropReason::IkbBadSignature),
                    }
                } else {
                    EntryVerdict::Pass {
                        signature_verified: false,
                    }
                }
            } else {
                EntryVerdict::Pass {
                    signature_verified: false,
                }
            };
            match verdict {
                EntryVerdict::Pass { signature_verified } => passed.push((key, signature_verified)),
                EntryVerdict::Fail(r) => {
                    first_failure.get_or_insert(r);
                }
            }
        }
        if hashed {
            self.stats.hash_checks += 1;
        }
        self.stats.signature_verifications += u64::from(verifications);

        if passed.is_empty() {
            let reason = first_failure.expect("every candidate either passes or fails");
            self.stats.record_drop(reason);
            return ForwarderActions {
                dropped: Some(reason),
                signature_verifications: verifications,
                ..Default::default()
            };
        }

        let mut out_faces = BTreeSet::new();
        let mut signature_verified = false;
        for (key, verified) in &passed {
            if let Some(e) = self.pit.remove(key) {
                out_faces.extend(e.in_faces);
            }
            signature_verified |= verified;
        }
        out_faces.remove(&face);
        self.stats.contents_delivered += out_faces.len() as u64;
        let delivered = out_faces.into_iter().map(|f| (f, content.clone())).collect();
        self.insert_cached(content, digest, now, signature_verified);
        ForwarderActions {
            delivered_contents: delivered,
            signature_verifications: verifications,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests;
