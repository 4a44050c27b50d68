//! Canonical TLV wire format.
//!
//! Every element is `[type: u8][length: u32 big-endian][value]`. A packet is
//! a single outer element (`0x01` interest, `0x02` content object) whose
//! value is a run of field elements in ascending type-code order. Name
//! components and exclude digests may repeat; every other field appears at
//! most once. The decoder rejects anything the encoder would not produce.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::crypto::{PublicKey, Signature};

use super::digest::{Digest, DIGEST_LEN};
use super::name::{Name, NameError, MAX_COMPONENTS};
use super::packet::{ContentObject, ContentType, Interest, Packet, UnsignedContent};

pub mod tlv {
    pub const INTEREST: u8 = 0x01;
    pub const CONTENT_OBJECT: u8 = 0x02;
    pub const NAME_COMPONENT: u8 = 0x10;
    pub const IMPLICIT_DIGEST: u8 = 0x11;
    pub const EXCLUDE_DIGEST: u8 = 0x12;
    pub const PPKD: u8 = 0x13;
    pub const PAYLOAD: u8 = 0x14;
    pub const CONTENT_TYPE: u8 = 0x15;
    pub const FRESHNESS: u8 = 0x16;
    pub const KEY_LOCATOR: u8 = 0x17;
    pub const SIGNATURE: u8 = 0x18;

    pub const HEADER_LEN: usize = 5;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("input is empty")]
    Empty,
    #[error("truncated input")]
    Truncated,
    #[error("{0} trailing bytes after packet")]
    TrailingBytes(usize),
    #[error("unknown TLV type 0x{0:02x}")]
    UnknownType(u8),
    #[error("non-canonical encoding: {0}")]
    NonCanonical(&'static str),
    #[error("field 0x{field:02x} has length {len}, expected {expected}")]
    BadLength { field: u8, len: usize, expected: usize },
    #[error("missing required field: {0}")]
    MissingField(&'static str),
    #[error("invalid content type {0}")]
    BadContentType(u8),
    #[error("invalid name: {0}")]
    Name(#[from] NameError),
    #[error("content object names cannot carry an implicit digest")]
    ContentNameHasDigest,
    #[error("field of {0} bytes does not fit a TLV length")]
    FieldTooLong(usize),
}

fn put_tlv(buf: &mut Vec<u8>, ty: u8, value: &[u8]) -> Result<(), CodecError> {
    let len = u32::try_from(value.len()).map_err(|_| CodecError::FieldTooLong(value.len()))?;
    buf.push(ty);
    buf.extend_from_slice(&len.to_be_bytes());
    buf.extend_from_slice(value);
    Ok(())
}

fn put_components(buf: &mut Vec<u8>, name: &Name) -> Result<(), CodecError> {
    for c in name.components() {
        put_tlv(buf, tlv::NAME_COMPONENT, c)?;
    }
    Ok(())
}

fn wrap(ty: u8, body: Vec<u8>) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::with_capacity(body.len() + tlv::HEADER_LEN);
    put_tlv(&mut out, ty, &body)?;
    Ok(out)
}

pub fn encode_interest(interest: &Interest) -> Result<Vec<u8>, CodecError> {
    let mut body = Vec::new();
    put_components(&mut body, &interest.name)?;
    if let Some(d) = interest.name.implicit_digest() {
        put_tlv(&mut body, tlv::IMPLICIT_DIGEST, d.as_bytes())?;
    }
    for d in &interest.exclude {
        put_tlv(&mut body, tlv::EXCLUDE_DIGEST, d.as_bytes())?;
    }
    if let Some(d) = &interest.ppkd {
        put_tlv(&mut body, tlv::PPKD, d.as_bytes())?;
    }
    wrap(tlv::INTEREST, body)
}

/// The field elements covered by a content signature: everything from the
/// name up to and including the key locator, without the outer header.
pub(crate) fn encode_signed_fields(c: &UnsignedContent) -> Result<Vec<u8>, CodecError> {
    signed_fields(
        &c.name,
        &c.payload,
        c.content_type,
        c.freshness,
        &c.key_locator,
        &c.ppkd,
    )
}

pub(crate) fn signed_fields_of(c: &ContentObject) -> Result<Vec<u8>, CodecError> {
    signed_fields(
        &c.name,
        &c.payload,
        c.content_type,
        c.freshness,
        &c.key_locator,
        &c.ppkd,
    )
}

fn signed_fields(
    name: &Name,
    payload: &[u8],
    content_type: ContentType,
    freshness: u64,
    key_locator: &PublicKey,
    ppkd: &Digest,
) -> Result<Vec<u8>, CodecError> {
    if name.is_scn() {
        return Err(CodecError::ContentNameHasDigest);
    }
    let mut body = Vec::with_capacity(payload.len() + key_locator.as_bytes().len() + 128);
    put_components(&mut body, name)?;
    put_tlv(&mut body, tlv::PPKD, ppkd.as_bytes())?;
    put_tlv(&mut body, tlv::PAYLOAD, payload)?;
    put_tlv(&mut body, tlv::CONTENT_TYPE, &[content_type as u8])?;
    put_tlv(&mut body, tlv::FRESHNESS, &freshness.to_be_bytes())?;
    put_tlv(&mut body, tlv::KEY_LOCATOR, key_locator.as_bytes())?;
    Ok(body)
}

pub fn encode_content(content: &ContentObject) -> Result<Vec<u8>, CodecError> {
    let mut body = signed_fields_of(content)?;
    put_tlv(&mut body, tlv::SIGNATURE, content.signature.as_bytes())?;
    wrap(tlv::CONTENT_OBJECT, body)
}

pub fn encode_wire(packet: &Packet) -> Result<Vec<u8>, CodecError> {
    match packet {
        Packet::Interest(i) => encode_interest(i),
        Packet::Content(c) => encode_content(c),
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn is_empty(&self) -> bool {
        self.pos == self.buf.len()
    }

    fn peek_type(&self) -> Option<u8> {
        self.buf.get(self.pos).copied()
    }

    fn next_tlv(&mut self) -> Result<(u8, &'a [u8]), CodecError> {
        let rest = &self.buf[self.pos..];
        if rest.len() < tlv::HEADER_LEN {
            return Err(CodecError::Truncated);
        }
        let ty = rest[0];
        let len = u32::from_be_bytes([rest[1], rest[2], rest[3], rest[4]]) as usize;
        let value = rest
            .get(tlv::HEADER_LEN..tlv::HEADER_LEN + len)
            .ok_or(CodecError::Truncated)?;
        self.pos += tlv::HEADER_LEN + len;
        Ok((ty, value))
    }
}

fn fixed_digest(ty: u8, value: &[u8]) -> Result<Digest, CodecError> {
    Digest::from_slice(value).ok_or(CodecError::BadLength {
        field: ty,
        len: value.len(),
        expected: DIGEST_LEN,
    })
}

/// Walks the field elements of a packet body, enforcing ascending type order
/// and single occurrence of non-repeatable fields.
fn read_fields<'a>(
    body: &'a [u8],
    allowed: &[u8],
) -> Result<Vec<(u8, &'a [u8])>, CodecError> {
    let mut r = Reader::new(body);
    let mut fields = Vec::new();
    let mut last: Option<u8> = None;
    while !r.is_empty() {
        let (ty, value) = r.next_tlv()?;
        if !allowed.contains(&ty) {
            return Err(CodecError::UnknownType(ty));
        }
        if let Some(prev) = last {
            let repeatable = ty == tlv::NAME_COMPONENT || ty == tlv::EXCLUDE_DIGEST;
            if ty < prev || (ty == prev && !repeatable) {
                return Err(CodecError::NonCanonical("fields out of order or repeated"));
            }
        }
        last = Some(ty);
        fields.push((ty, value));
    }
    Ok(fields)
}

fn name_from_fields(fields: &[(u8, &[u8])]) -> Result<Name, CodecError> {
    let comps: Vec<&[u8]> = fields
        .iter()
        .filter(|(t, _)| *t == tlv::NAME_COMPONENT)
        .map(|(_, v)| *v)
        .collect();
    if comps.is_empty() {
        return Err(CodecError::MissingField("name"));
    }
    Ok(Name::new(comps.into_iter().map(<[u8]>::to_vec))?)
}

fn single<'a>(fields: &[(u8, &'a [u8])], ty: u8) -> Option<&'a [u8]> {
    fields.iter().find(|(t, _)| *t == ty).map(|(_, v)| *v)
}

fn decode_interest(body: &[u8]) -> Result<Interest, CodecError> {
    let fields = read_fields(
        body,
        &[
            tlv::NAME_COMPONENT,
            tlv::IMPLICIT_DIGEST,
            tlv::EXCLUDE_DIGEST,
            tlv::PPKD,
        ],
    )?;
    let mut name = name_from_fields(&fields)?;
    if let Some(v) = single(&fields, tlv::IMPLICIT_DIGEST) {
        name = name.with_implicit_digest(fixed_digest(tlv::IMPLICIT_DIGEST, v)?);
    }
    let mut exclude = BTreeSet::new();
    let mut prev: Option<Digest> = None;
    for (_, v) in fields.iter().filter(|(t, _)| *t == tlv::EXCLUDE_DIGEST) {
        let d = fixed_digest(tlv::EXCLUDE_DIGEST, v)?;
        if prev.is_some_and(|p| p >= d) {
            return Err(CodecError::NonCanonical("exclude digests must be strictly ascending"));
        }
        prev = Some(d);
        exclude.insert(d);
    }
    let ppkd = single(&fields, tlv::PPKD)
        .map(|v| fixed_digest(tlv::PPKD, v))
        .transpose()?;
    Ok(Interest {
        name,
        exclude,
        ppkd,
    })
}

fn decode_content(body: &[u8]) -> Result<ContentObject, CodecError> {
    let fields = read_fields(
        body,
        &[
            tlv::NAME_COMPONENT,
            tlv::PPKD,
            tlv::PAYLOAD,
            tlv::CONTENT_TYPE,
            tlv::FRESHNESS,
            tlv::KEY_LOCATOR,
            tlv::SIGNATURE,
        ],
    )?;
    let name = name_from_fields(&fields)?;
    let ppkd = fixed_digest(
        tlv::PPKD,
        single(&fields, tlv::PPKD).ok_or(CodecError::MissingField("ppkd"))?,
    )?;
    let payload = single(&fields, tlv::PAYLOAD).ok_or(CodecError::MissingField("payload"))?;
    let ct = single(&fields, tlv::CONTENT_TYPE).ok_or(CodecError::MissingField("content type"))?;
    let content_type = match ct {
        [b] => ContentType::from_byte(*b).ok_or(CodecError::BadContentType(*b))?,
        _ => {
            return Err(CodecError::BadLength {
                field: tlv::CONTENT_TYPE,
                len: ct.len(),
                expected: 1,
            })
        }
    };
    let fr = single(&fields, tlv::FRESHNESS).ok_or(CodecError::MissingField("freshness"))?;
    let freshness = u64::from_be_bytes(<[u8; 8]>::try_from(fr).map_err(|_| CodecError::BadLength {
        field: tlv::FRESHNESS,
        len: fr.len(),
        expected: 8,
    })?);
    let key_locator =
        single(&fields, tlv::KEY_LOCATOR).ok_or(CodecError::MissingField("key locator"))?;
    let signature = single(&fields, tlv::SIGNATURE).ok_or(CodecError::MissingField("signature"))?;
    Ok(ContentObject {
        name,
        payload: payload.to_vec(),
        content_type,
        freshness,
        key_locator: PublicKey::from_bytes(key_locator),
        ppkd,
        signature: Signature::from_bytes(signature),
    })
}

pub fn decode_wire(bytes: &[u8]) -> Result<Packet, CodecError> {
    if bytes.is_empty() {
        return Err(CodecError::Empty);
    }
    let mut r = Reader::new(bytes);
    let (ty, body) = r.next_tlv()?;
    if !r.is_empty() {
        return Err(CodecError::TrailingBytes(bytes.len() - r.pos));
    }
    match ty {
        tlv::INTEREST => decode_interest(body).map(Packet::Interest),
        tlv::CONTENT_OBJECT => decode_content(body).map(Packet::Content),
        other => Err(CodecError::UnknownType(other)),
    }
}

/// Self-delimiting encoding of the explicit components of a name, used
/// inside catalog and key-certificate payloads: a one-byte component count
/// followed by that many component TLVs.
pub fn encode_name_block(name: &Name, out: &mut Vec<u8>) -> Result<(), CodecError> {
    out.push(name.len() as u8);
    put_components(out, name)
}

/// Decodes one name block from the front of `bytes`, returning the name and
/// the number of bytes consumed.
pub fn decode_name_block(bytes: &[u8]) -> Result<(Name, usize), CodecError> {
    let (&count, rest) = bytes.split_first().ok_or(CodecError::Truncated)?;
    let count = count as usize;
    if count == 0 {
        return Err(NameError::Empty.into());
    }
    if count > MAX_COMPONENTS {
        return Err(NameError::TooManyComponents(count).into());
    }
    let mut r = Reader::new(rest);
    let mut comps = Vec::with_capacity(count);
    for _ in 0..count {
        if r.peek_type() != Some(tlv::NAME_COMPONENT) {
            return Err(if r.is_empty() {
                CodecError::Truncated
            } else {
                CodecError::NonCanonical("expected a name component")
            });
        }
        let (_, v) = r.next_tlv()?;
        comps.push(v.to_vec());
    }
    Ok((Name::new(comps)?, 1 + r.pos))
}
