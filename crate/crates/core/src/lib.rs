//! Named-Data-Networking forwarding core built around the Interest-Key
//! Binding rule: every interest names the key (or the exact digest) of the
//! content it wants, so a router needs at most one hash comparison and one
//! signature verification to keep forged content out of its cache.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] names, packets, the canonical TLV codec and matching rules.
//! * [`crypto`] SHA-256 digests and Ed25519 content signatures.
//! * [`forwarder`] the per-node CS/FIB/PIT state machine.
//! * [`trust`] key certificates, catalogs, Merkle proofs, trust bootstrap
//!   and a key name service.
//! * [`sim`] a deterministic discrete-event simulator for content-poisoning
//!   experiments.
//! * [`cli`] the command implementations behind the `ikb-ndn` binary.

pub mod cli;
pub mod crypto;
pub mod forwarder;
pub mod model;
pub mod sim;
pub mod time;
pub mod trust;

pub use crypto::{key_digest, keygen, sign_content, verify_content, KeyPair, PublicKey, Signature};
pub use model::{
    content_digest, decode_wire, encode_wire, interest_matches, make_scn, prefix_match,
    CodecError, ContentObject, ContentType, Digest, Interest, Name, NameError, Packet,
    UnsignedContent,
};
pub use time::Timestamp;
