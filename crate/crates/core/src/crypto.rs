//! Digest and signature primitives.
//!
//! One scheme is configured build-wide: Ed25519 (deterministic, 64-byte
//! signatures). The signature value on the wire is prefixed with a one-byte
//! scheme identifier so other schemes can be added without a format change.

use std::fmt;

use ed25519_dalek::{Signer, SigningKey, Verifier, VerifyingKey};
use rand::RngCore;
use thiserror::Error;

use crate::model::{codec_signed_fields, ContentObject, Digest, UnsignedContent};

pub const SCHEME_ED25519: u8 = 0x01;
pub const PUBLIC_KEY_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 1 + ed25519_dalek::SIGNATURE_LENGTH;

/// Raw public-key bytes as carried in a KeyLocator. Arbitrary bytes are
/// representable; only well-formed Ed25519 keys ever verify anything.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PublicKey(Vec<u8>);

impl PublicKey {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        PublicKey(bytes.to_vec())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.to_hex();
        write!(f, "PublicKey({})", &h[..h.len().min(16)])
    }
}

/// Signature value: scheme byte followed by the scheme's signature bytes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Signature(Vec<u8>);

impl Signature {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Signature(bytes.to_vec())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// An all-zero signature of the configured length; never verifies.
    pub fn zeroed() -> Self {
        Signature(vec![0; SIGNATURE_LEN])
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({} bytes)", self.0.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("ppkd does not match the digest of the key locator")]
    PpkdMismatch,
    #[error("key locator is not the signer's public key")]
    KeyLocatorMismatch,
    #[error("content cannot be encoded: {0}")]
    Encoding(#[from] crate::model::CodecError),
}

pub struct KeyPair {
    signing: SigningKey,
    public_key: PublicKey,
}

impl KeyPair {
    pub fn from_seed(seed: [u8; 32]) -> Self {
        let signing = SigningKey::from_bytes(&seed);
        let public_key = PublicKey(signing.verifying_key().to_bytes().to_vec());
        KeyPair {
            signing,
            public_key,
        }
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.public_key
    }

    /// The 32-byte Ed25519 secret seed.
    pub fn private_key(&self) -> [u8; 32] {
        self.signing.to_bytes()
    }

    pub fn sign(&self, message: &[u8]) -> Signature {
        let mut out = Vec::with_capacity(SIGNATURE_LEN);
        out.push(SCHEME_ED25519);
        out.extend_from_slice(&self.signing.sign(message).to_bytes());
        Signature(out)
    }
}

impl Clone for KeyPair {
    fn clone(&self) -> Self {
        KeyPair::from_seed(self.private_key())
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public_key", &self.public_key)
            .finish_non_exhaustive()
    }
}

/// Generates a key pair; deterministic when a seed is given.
pub fn keygen(seed: Option<[u8; 32]>) -> KeyPair {
    let seed = seed.unwrap_or_else(|| {
        let mut s = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut s);
        s
    });
    KeyPair::from_seed(seed)
}

/// SHA-256 over raw public-key bytes (the PPKD value).
pub fn key_digest(key: &PublicKey) -> Digest {
    Digest::of(key.as_bytes())
}

/// Verifies `signature` over `message` under `key`. Malformed keys or
/// signatures yield `false`.
pub fn verify(message: &[u8], signature: &Signature, key: &PublicKey) -> bool {
    let Some((&scheme, sig)) = signature.0.split_first() else {
        return false;
    };
    if scheme != SCHEME_ED25519 {
        return false;
    }
    let Ok(sig) = ed25519_dalek::Signature::from_slice(sig) else {
        return false;
    };
    let Ok(key_bytes) = <[u8; PUBLIC_KEY_LEN]>::try_from(key.as_bytes()) else {
        return false;
    };
    let Ok(vk) = VerifyingKey::from_bytes(&key_bytes) else {
        return false;
    };
    vk.verify(message, &sig).is_ok()
}

/// Signs the canonical encoding of the signed fields. The content must
/// already name the signer's key in its KeyLocator and PPKD.
pub fn sign_content(unsigned: UnsignedContent, key_pair: &KeyPair) -> Result<ContentObject, CryptoError> {
    if unsigned.key_locator != key_pair.public_key {
        return Err(CryptoError::KeyLocatorMismatch);
    }
    if unsigned.ppkd != key_digest(&unsigned.key_locator) {
        return Err(CryptoError::PpkdMismatch);
    }
    let message = codec_signed_fields(&unsigned)?;
    let signature = key_pair.sign(&message);
    Ok(unsigned.with_signature(signature))
}

/// True iff the content signature validates under `key`.
pub fn verify_content(content: &ContentObject, key: &PublicKey) -> bool {
    match crate::model::codec_signed_fields_of(content) {
        Ok(message) => verify(&message, &content.signature, key),
        Err(_) => false,
    }
}
