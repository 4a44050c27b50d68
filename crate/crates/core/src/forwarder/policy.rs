use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{key_digest, verify_content, PublicKey};
use crate::model::ContentObject;

use super::pit::PitEntry;

/// How a router treats content arriving for key-bound (PPKD) PIT entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "p", rename_all = "snake_case")]
pub enum VerificationMode {
    /// No router-side checks beyond name matching (plain NDN).
    None,
    /// Key-digest comparison and one signature verification per content.
    IkbFull,
    /// Like `IkbFull` but only for a random fraction `p` of contents.
    IkbProbabilistic(f64),
    /// `IkbFull` at consumer-facing edge routers, nothing elsewhere.
    IkbEdgeOnly,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("verification probability {0} is outside [0, 1]")]
pub struct BadProbability(pub f64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationPolicy {
    mode: VerificationMode,
    is_edge: bool,
}

impl VerificationPolicy {
    pub fn new(mode: VerificationMode, is_edge: bool) -> Result<Self, BadProbability> {
        if let VerificationMode::IkbProbabilistic(p) = mode {
            if !(0.0..=1.0).contains(&p) {
                return Err(BadProbability(p));
            }
        }
        Ok(VerificationPolicy { mode, is_edge })
    }

    pub fn none() -> Self {
        VerificationPolicy {
            mode: VerificationMode::None,
            is_edge: false,
        }
    }

    pub fn ikb_full() -> Self {
        VerificationPolicy {
            mode: VerificationMode::IkbFull,
            is_edge: false,
        }
    }

    pub fn mode(&self) -> VerificationMode {
        self.mode
    }

    pub fn is_edge(&self) -> bool {
        self.is_edge
    }

    /// Any IKB mode: interests must carry a PPKD or an implicit digest.
    pub fn enforces_binding(&self) -> bool {
        self.mode != VerificationMode::None
    }

    /// Every key-bound content is verified, so cached objects served to
    /// key-bound interests must have been verified too.
    pub fn verifies_all(&self) -> bool {
        match self.mode {
            VerificationMode::IkbFull => true,
            VerificationMode::IkbEdgeOnly => self.is_edge,
            VerificationMode::IkbProbabilistic(p) => p >= 1.0,
            VerificationMode::None => false,
        }
    }
}

impl Default for VerificationPolicy {
    fn default() -> Self {
        Self::none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IkbVerdict {
    Pass,
    KeyMismatch,
    BadSignature,
}

/// Signature verification as seen by the forwarder; swappable so tests can
/// count invocations.
pub trait SignatureVerifier {
    fn verify(&mut self, content: &ContentObject, key: &PublicKey) -> bool;
}

impl<F: FnMut(&ContentObject, &PublicKey) -> bool> SignatureVerifier for F {
    fn verify(&mut self, content: &ContentObject, key: &PublicKey) -> bool {
        self(content, key)
    }
}

/// The production verifier.
#[derive(Debug, Default, Clone, Copy)]
pub struct Ed25519Verifier;

impl SignatureVerifier for Ed25519Verifier {
    fn verify(&mut self, content: &ContentObject, key: &PublicKey) -> bool {
        verify_content(content, key)
    }
}

/// The router half of the Interest-Key Binding rule: hash the KeyLocator,
/// compare it with the PIT entry's PPKD, and only on a match verify the
/// signature with that key. At most one verification is performed.
///
/// An entry without a PPKD binds no key and yields `KeyMismatch`.
pub fn ikb_check(content: &ContentObject, entry: &PitEntry, verifier: &mut dyn SignatureVerifier) -> IkbVerdict {
    let Some(expected) = entry.ppkd else {
        return IkbVerdict::KeyMismatch;
    };
    if key_digest(&content.key_locator) != expected {
        return IkbVerdict::KeyMismatch;
    }
    if verifier.verify(content, &content.key_locator) {
        IkbVerdict::Pass
    } else {
        IkbVerdict::BadSignature
    }
}
