//! Producer- and consumer-side trust: key certificates, signed catalogs of
//! self-certifying names, trust-anchor bootstrap and a key name service.

mod bootstrap;
mod catalog;
mod cert;
mod kns;
mod merkle;

pub use bootstrap::{
    bootstrap_resolve_key, BootstrapError, BootstrapSession, BootstrapStep, KeyNetwork, TrustAnchor, TrustAnchorStore,
    DEFAULT_MAX_CHAIN_DEPTH,
};
pub use catalog::{
    build_catalog, entry_leaf, merkle_prove, merkle_verify, verify_catalog, Catalog, CatalogError, CatalogKind,
    CatalogStructure, CATALOG_FRESHNESS,
};
pub use cert::{
    decode_key_payload, encode_key_payload, issue_certificate, issue_certificate_named, key_name, parse_certificate,
    CertError, KeyCertificate, KEY_COMPONENT, KEY_FRESHNESS,
};
pub use kns::{kns_lookup, kns_query_name, kns_resolve_response, KeyNameService, KnsError, KNS_COMPONENT};
pub use merkle::{merkle_depth, merkle_root, node_hash, MerkleProof};
