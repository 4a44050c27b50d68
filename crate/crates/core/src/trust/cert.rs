use thiserror::Error;

use crate::crypto::{sign_content, CryptoError, KeyPair, PublicKey};
use crate::model::{decode_name_block, encode_name_block, CodecError, ContentObject, ContentType, Name, NameError, UnsignedContent};

/// Last explicit component of every key object name.
pub const KEY_COMPONENT: &[u8] = b"key";

/// Default freshness of key objects, in seconds.
pub const KEY_FRESHNESS: u64 = 3600;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertError {
    #[error("object is not a key object")]
    NotKeyType,
    #[error("key object name does not end in /key")]
    BadName,
    #[error("malformed key payload: {0}")]
    Payload(&'static str),
    #[error("certificate must authorize at least one prefix")]
    NoPrefixes,
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Name(#[from] NameError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// The decoded view of a key object: the certified key and the prefixes it
/// may sign for. Signer identity is in `object.key_locator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyCertificate {
    pub subject_key: PublicKey,
    pub authorized_prefixes: Vec<Name>,
    pub object: ContentObject,
}

impl KeyCertificate {
    /// The authorized prefix covering `name`, longest first.
    pub fn covering_prefix(&self, name: &Name) -> Option<&Name> {
        self.authorized_prefixes
            .iter()
            .filter(|p| p.is_prefix_of(name))
            .max_by_key(|p| p.len())
    }
}

/// `<prefix>/key`.
pub fn key_name(prefix: &Name) -> Result<Name, NameError> {
    prefix.without_implicit_digest().append(KEY_COMPONENT)
}

pub fn encode_key_payload(subject_key: &PublicKey, authorized: &[Name]) -> Result<Vec<u8>, CertError> {
    if authorized.is_empty() {
        return Err(CertError::NoPrefixes);
    }
    let key = subject_key.as_bytes();
    let mut out = Vec::new();
    out.extend_from_slice(&(key.len() as u32).to_be_bytes());
    out.extend_from_slice(key);
    out.extend_from_slice(&(authorized.len() as u32).to_be_bytes());
    for p in authorized {
        let mut block = Vec::new();
        encode_name_block(p, &mut block)?;
        out.extend_from_slice(&(block.len() as u32).to_be_bytes());
        out.extend_from_slice(&block);
    }
    Ok(out)
}

fn take_u32(bytes: &[u8], pos: &mut usize) -> Result<usize, CertError> {
    let b = bytes
        .get(*pos..*pos + 4)
        .ok_or(CertError::Payload("truncated length"))?;
    *pos += 4;
    Ok(u32::from_be_bytes(b.try_into().expect("4 bytes")) as usize)
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8], CertError> {
    let end = pos.checked_add(n).ok_or(CertError::Payload("length overflow"))?;
    let b = bytes.get(*pos..end).ok_or(CertError::Payload("truncated field"))?;
    *pos = end;
    Ok(b)
}

pub fn decode_key_payload(bytes: &[u8]) -> Result<(PublicKey, Vec<Name>), CertError> {
    let mut pos = 0;
    let klen = take_u32(bytes, &mut pos)?;
    let key = PublicKey::from_bytes(take(bytes, &mut pos, klen)?);
    let count = take_u32(bytes, &mut pos)?;
    if count == 0 {
        return Err(CertError::NoPrefixes);
    }
    let mut prefixes = Vec::new();
    for _ in 0..count {
        let blen = take_u32(bytes, &mut pos)?;
        let block = take(bytes, &mut pos, blen)?;
        let (name, used) = decode_name_block(block)?;
        if used != block.len() {
            return Err(CertError::Payload("trailing bytes in name block"));
        }
        prefixes.push(name);
    }
    if pos != bytes.len() {
        return Err(CertError::Payload("trailing bytes"));
    }
    Ok((key, prefixes))
}

/// Issues a key object named `<subject_prefix>/key` certifying
/// `subject_key` for `authorized`, signed by `issuer`.
pub fn issue_certificate(
    subject_prefix: &Name,
    subject_key: &PublicKey,
    authorized: &[Name],
    issuer: &KeyPair,
) -> Result<ContentObject, CertError> {
    issue_certificate_named(key_name(subject_prefix)?, subject_key, authorized, issuer)
}

/// Like [`issue_certificate`] with an explicit object name ending in `/key`.
pub fn issue_certificate_named(
    name: Name,
    subject_key: &PublicKey,
    authorized: &[Name],
    issuer: &KeyPair,
) -> Result<ContentObject, CertError> {
    if name.last() != KEY_COMPONENT {
        return Err(CertError::BadName);
    }
    let payload = encode_key_payload(subject_key, authorized)?;
    let u = UnsignedContent::new(name, payload, ContentType::Key, KEY_FRESHNESS, issuer.public_key());
    Ok(sign_content(u, issuer)?)
}

/// Decodes a key object. The signature is not checked here.
pub fn parse_certificate(object: &ContentObject) -> Result<KeyCertificate, CertError> {
    if object.content_type != ContentType::Key {
        return Err(CertError::NotKeyType);
    }
    if object.name.last() != KEY_COMPONENT {
        return Err(CertError::BadName);
    }
    let (subject_key, authorized_prefixes) = decode_key_payload(&object.payload)?;
    Ok(KeyCertificate {
        subject_key,
        authorized_prefixes,
        object: object.clone(),
    })
}
