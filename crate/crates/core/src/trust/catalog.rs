use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{sign_content, verify_content, CryptoError, KeyPair, PublicKey};
use crate::model::{
    content_digest, decode_name_block, encode_name_block, CodecError, ContentObject, ContentType, Digest, Name,
    UnsignedContent, DIGEST_LEN,
};

use super::merkle::{fold_proof, merkle_depth, merkle_proof, merkle_root, MerkleProof};

const TAG_FLAT: u8 = 0;
const TAG_MERKLE: u8 = 1;

/// Default freshness of catalog objects, in seconds.
pub const CATALOG_FRESHNESS: u64 = 3600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogKind {
    Flat,
    #[default]
    Merkle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogStructure {
    Flat,
    Merkle { root: Digest, depth: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("catalog has no entries")]
    Empty,
    #[error("item {0} has the catalog's own name")]
    SelfReference(Name),
    #[error("catalog signature does not verify under the trusted key")]
    BadSignature,
    #[error("recomputed Merkle root does not match the stored root")]
    MerkleRootMismatch,
    #[error("object is not a catalog")]
    NotCatalog,
    #[error("catalog is not a Merkle catalog")]
    NotMerkle,
    #[error("entry index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("malformed catalog payload: {0}")]
    Payload(&'static str),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// A decoded catalog: explicit names with the digests that complete their
/// self-certifying names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    pub entries: Vec<(Name, Digest)>,
    pub structure: CatalogStructure,
}

impl Catalog {
    pub fn from_entries(entries: Vec<(Name, Digest)>, kind: CatalogKind) -> Result<Self, CatalogError> {
        if entries.is_empty() {
            return Err(CatalogError::Empty);
        }
        let structure = match kind {
            CatalogKind::Flat => CatalogStructure::Flat,
            CatalogKind::Merkle => CatalogStructure::Merkle {
                root: merkle_root(&leaf_hashes(&entries)?).expect("entries non-empty"),
                depth: merkle_depth(entries.len()),
            },
        };
        Ok(Catalog { entries, structure })
    }

    /// Self-certifying names of all entries, in catalog order.
    pub fn scns(&self) -> Vec<Name> {
        self.entries
            .iter()
            .map(|(n, d)| n.clone().with_implicit_digest(*d))
            .collect()
    }

    pub fn encode(&self) -> Result<Vec<u8>, CatalogError> {
        let mut out = Vec::new();
        match self.structure {
            CatalogStructure::Flat => out.push(TAG_FLAT),
            CatalogStructure::Merkle { root, .. } => {
                out.push(TAG_MERKLE);
                out.extend_from_slice(root.as_bytes());
            }
        }
        for (name, digest) in &self.entries {
            out.extend_from_slice(&entry_encoding(name, digest)?);
        }
        Ok(out)
    }

    /// Parses a payload. The stored Merkle root is taken as given; see
    /// [`verify_catalog`] for the check.
    pub fn decode(bytes: &[u8]) -> Result<Self, CatalogError> {
        let (&tag, mut rest) = bytes.split_first().ok_or(CatalogError::Payload("empty"))?;
        let stored_root = match tag {
            TAG_FLAT => None,
            TAG_MERKLE => {
                let r = rest.get(..DIGEST_LEN).ok_or(CatalogError::Payload("truncated root"))?;
                rest = &rest[DIGEST_LEN..];
                Some(Digest::from_slice(r).expect("32 bytes"))
            }
            _ => return Err(CatalogError::Payload("unknown structure tag")),
        };
        let mut entries = Vec::new();
        while !rest.is_empty() {
            let (name, used) = decode_name_block(rest)?;
            let d = rest
                .get(used..used + DIGEST_LEN)
                .ok_or(CatalogError::Payload("truncated entry digest"))?;
            entries.push((name, Digest::from_slice(d).expect("32 bytes")));
            rest = &rest[used + DIGEST_LEN..];
        }
        if entries.is_empty() {
            return Err(CatalogError::Empty);
        }
        let structure = match stored_root {
            None => CatalogStructure::Flat,
            Some(root) => CatalogStructure::Merkle {
                root,
                depth: merkle_depth(entries.len()),
            },
        };
        Ok(Catalog { entries, structure })
    }

    /// Recomputed root over the entries (regardless of structure).
    pub fn computed_root(&self) -> Result<Digest, CatalogError> {
        Ok(merkle_root(&leaf_hashes(&self.entries)?).expect("entries non-empty"))
    }

    pub fn lookup(&self, name: &Name) -> Option<Digest> {
        self.entries
            .iter()
            .find(|(n, _)| n.components() == name.components())
            .map(|(_, d)| *d)
    }
}

fn entry_encoding(name: &Name, digest: &Digest) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::new();
    encode_name_block(name, &mut out)?;
    out.extend_from_slice(digest.as_bytes());
    Ok(out)
}

/// Merkle leaf for one entry: SHA-256 of its payload encoding.
pub fn entry_leaf(name: &Name, digest: &Digest) -> Result<Digest, CodecError> {
    Ok(Digest::of(&entry_encoding(name, digest)?))
}

fn leaf_hashes(entries: &[(Name, Digest)]) -> Result<Vec<Digest>, CodecError> {
    entries.iter().map(|(n, d)| entry_leaf(n, d)).collect()
}

/// Signs a catalog named `name` listing `(item.name, content_digest(item))`
/// for every item in input order.
pub fn build_catalog(
    items: &[ContentObject],
    signer: &KeyPair,
    kind: CatalogKind,
    name: &Name,
) -> Result<ContentObject, CatalogError> {
    if items.is_empty() {
        return Err(CatalogError::Empty);
    }
    let mut entries = Vec::with_capacity(items.len());
    for item in items {
        if item.name.components() == name.components() {
            return Err(CatalogError::SelfReference(item.name.clone()));
        }
        entries.push((item.name.clone(), content_digest(item)?));
    }
    let catalog = Catalog::from_entries(entries, kind)?;
    let u = UnsignedContent::new(
        name.without_implicit_digest(),
        catalog.encode()?,
        ContentType::Catalog,
        CATALOG_FRESHNESS,
        signer.public_key(),
    );
    Ok(sign_content(u, signer)?)
}

/// Checks structure first, then the signature under `trusted_key`, and
/// returns the entries.
pub fn verify_catalog(object: &ContentObject, trusted_key: &PublicKey) -> Result<Catalog, CatalogError> {
    if object.content_type != ContentType::Catalog {
        return Err(CatalogError::NotCatalog);
    }
    let catalog = Catalog::decode(&object.payload)?;
    if let CatalogStructure::Merkle { root, .. } = catalog.structure {
        if catalog.computed_root()? != root {
            return Err(CatalogError::MerkleRootMismatch);
        }
    }
    if !verify_content(object, trusted_key) {
        return Err(CatalogError::BadSignature);
    }
    Ok(catalog)
}

pub fn merkle_prove(catalog: &Catalog, index: usize) -> Result<MerkleProof, CatalogError> {
    if !matches!(catalog.structure, CatalogStructure::Merkle { .. }) {
        return Err(CatalogError::NotMerkle);
    }
    let len = catalog.entries.len();
    merkle_proof(&leaf_hashes(&catalog.entries)?, index).ok_or(CatalogError::IndexOutOfRange { index, len })
}

pub fn merkle_verify(root: &Digest, entry: &(Name, Digest), index: usize, proof: &[Option<Digest>]) -> bool {
    match entry_leaf(&entry.0, &entry.1) {
        Ok(leaf) => fold_proof(root, &leaf, index, proof),
        Err(_) => false,
    }
}
