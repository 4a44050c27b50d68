use std::collections::BTreeSet;

use crate::crypto::{key_digest, PublicKey, Signature};

use super::digest::Digest;
use super::name::Name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContentType {
    Data = 0,
    Key = 1,
    Catalog = 2,
}

impl ContentType {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(ContentType::Data),
            1 => Some(ContentType::Key),
            2 => Some(ContentType::Catalog),
            _ => None,
        }
    }
}

/// A consumer request.
///
/// `exclude` is kept sorted so that every interest has exactly one wire
/// encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interest {
    pub name: Name,
    pub exclude: BTreeSet<Digest>,
    pub ppkd: Option<Digest>,
}

impl Interest {
    pub fn new(name: Name) -> Self {
        Interest {
            name,
            exclude: BTreeSet::new(),
            ppkd: None,
        }
    }

    pub fn with_ppkd(mut self, ppkd: Digest) -> Self {
        self.ppkd = Some(ppkd);
        self
    }

    pub fn with_exclude(mut self, exclude: impl IntoIterator<Item = Digest>) -> Self {
        self.exclude.extend(exclude);
        self
    }

    /// Whether the interest binds the content it asks for, either through a
    /// publisher key digest or a self-certifying name.
    pub fn is_bound(&self) -> bool {
        self.ppkd.is_some() || self.name.is_scn()
    }
}

/// The signed fields of a content object, before a signature is attached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnsignedContent {
    pub name: Name,
    pub payload: Vec<u8>,
    pub content_type: ContentType,
    /// Recommended cache lifetime in seconds.
    pub freshness: u64,
    pub key_locator: PublicKey,
    pub ppkd: Digest,
}

impl UnsignedContent {
    /// Builds the signed fields with the PPKD derived from `key`.
    pub fn new(
        name: Name,
        payload: impl Into<Vec<u8>>,
        content_type: ContentType,
        freshness: u64,
        key: &PublicKey,
    ) -> Self {
        UnsignedContent {
            name,
            payload: payload.into(),
            content_type,
            freshness,
            key_locator: key.clone(),
            ppkd: key_digest(key),
        }
    }

    pub fn with_signature(self, signature: Signature) -> ContentObject {
        ContentObject {
            name: self.name,
            payload: self.payload,
            content_type: self.content_type,
            freshness: self.freshness,
            key_locator: self.key_locator,
            ppkd: self.ppkd,
            signature,
        }
    }
}

/// A named, signed unit of data.
///
/// Fields are public: adversarial objects in tests and in the simulator
/// are built by hand and need not satisfy the honest-producer invariants
/// (`ppkd == key_digest(key_locator)`, valid signature).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContentObject {
    pub name: Name,
    pub payload: Vec<u8>,
    pub content_type: ContentType,
    pub freshness: u64,
    pub key_locator: PublicKey,
    pub ppkd: Digest,
    pub signature: Signature,
}

impl ContentObject {
    pub fn unsigned(&self) -> UnsignedContent {
        UnsignedContent {
            name: self.name.clone(),
            payload: self.payload.clone(),
            content_type: self.content_type,
            freshness: self.freshness,
            key_locator: self.key_locator.clone(),
            ppkd: self.ppkd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Packet {
    Interest(Interest),
    Content(ContentObject),
}

impl From<Interest> for Packet {
    fn from(i: Interest) -> Self {
        Packet::Interest(i)
    }
}

impl From<ContentObject> for Packet {
    fn from(c: ContentObject) -> Self {
        Packet::Content(c)
    }
}
