use std::collections::BTreeMap;

use thiserror::Error;

use crate::crypto::{key_digest, sign_content, verify_content, KeyPair, PublicKey};
use crate::model::{decode_wire, encode_content, ContentObject, ContentType, Name, NameError, Packet, UnsignedContent};

use super::bootstrap::BootstrapError;
use super::cert::{issue_certificate, key_name, parse_certificate, CertError, KEY_FRESHNESS};

/// First component of every name the key name service answers.
pub const KNS_COMPONENT: &[u8] = b"kns";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnsError {
    #[error("no key registered for a prefix of {0}")]
    NotFound(Name),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Name(#[from] NameError),
}

/// A directory mapping name prefixes to key certificates it signs itself.
/// Clients learn the service's own key out of band (as a trust anchor).
#[derive(Debug, Clone)]
pub struct KeyNameService {
    key_pair: KeyPair,
    table: BTreeMap<Name, ContentObject>,
}

impl KeyNameService {
    pub fn new(key_pair: KeyPair) -> Self {
        KeyNameService {
            key_pair,
            table: BTreeMap::new(),
        }
    }

    pub fn public_key(&self) -> &PublicKey {
        self.key_pair.public_key()
    }

    /// Certifies `key` for `prefix` and records it.
    pub fn register(&mut self, prefix: &Name, key: &PublicKey) -> Result<&ContentObject, KnsError> {
        let prefix = prefix.without_implicit_digest();
        let cert = issue_certificate(&prefix, key, std::slice::from_ref(&prefix), &self.key_pair)?;
        Ok(self.table.entry(prefix).insert_entry(cert).into_mut())
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Answers an interest for `kns_query_name(p)`: a key object carrying
    /// the registered certificate for the longest prefix of `p`, signed by
    /// the service.
    pub fn respond(&self, query: &Name) -> Option<ContentObject> {
        let comps = query.components();
        if comps.len() < 3 || comps[0] != KNS_COMPONENT || query.last() != super::cert::KEY_COMPONENT {
            return None;
        }
        let target = Name::new(comps[1..comps.len() - 1].to_vec()).ok()?;
        let cert = kns_lookup(&target, self).ok()?;
        let u = UnsignedContent::new(
            query.without_implicit_digest(),
            encode_content(cert).ok()?,
            ContentType::Key,
            KEY_FRESHNESS,
            self.key_pair.public_key(),
        );
        sign_content(u, &self.key_pair).ok()
    }
}

/// The certificate registered for the longest prefix of `prefix`.
pub fn kns_lookup<'a>(prefix: &Name, kns: &'a KeyNameService) -> Result<&'a ContentObject, KnsError> {
    (1..=prefix.len())
        .rev()
        .filter_map(|l| prefix.prefix(l))
        .find_map(|p| kns.table.get(&p))
        .ok_or_else(|| KnsError::NotFound(prefix.clone()))
}

/// `/kns/<target...>/key`.
pub fn kns_query_name(target: &Name) -> Result<Name, NameError> {
    let mut comps = vec![KNS_COMPONENT.to_vec()];
    comps.extend(target.components().iter().cloned());
    key_name(&Name::new(comps)?)
}

/// Validates a service answer for `target` against the service key and
/// returns the certified key.
pub fn kns_resolve_response(
    response: &ContentObject,
    kns_key: &PublicKey,
    target: &Name,
) -> Result<PublicKey, BootstrapError> {
    let bad = || BootstrapError::BadSignature(response.name.clone());
    if response.content_type != ContentType::Key
        || response.ppkd != key_digest(kns_key)
        || !verify_content(response, kns_key)
    {
        return Err(bad());
    }
    let Ok(Packet::Content(inner)) = decode_wire(&response.payload) else {
        return Err(BootstrapError::Malformed(response.name.clone()));
    };
    if inner.ppkd != key_digest(kns_key) || !verify_content(&inner, kns_key) {
        return Err(bad());
    }
    let cert = parse_certificate(&inner).map_err(|_| BootstrapError::Malformed(inner.name.clone()))?;
    if cert.covering_prefix(target).is_none() {
        return Err(BootstrapError::PrefixNotAuthorized(target.clone()));
    }
    Ok(cert.subject_key)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        s.parse().unwrap()
    }

    #[test]
    fn longest_prefix_lookup() {
        let mut kns = KeyNameService::new(KeyPair::from_seed([7; 32]));
        let cnn = KeyPair::from_seed([8; 32]);
        let ndn = KeyPair::from_seed([9; 32]);
        kns.register(&n("/ndn"), ndn.public_key()).unwrap();
        kns.register(&n("/ndn/cnn"), cnn.public_key()).unwrap();
        let c = kns_lookup(&n("/ndn/cnn/news"), &kns).unwrap();
        assert_eq!(c.name, n("/ndn/cnn/key"));
        assert!(verify_content(c, kns.public_key()));
        assert_eq!(kns_lookup(&n("/ndn/bbc"), &kns).unwrap().name, n("/ndn/key"));
        assert_eq!(kns_lookup(&n("/bbc"), &kns), Err(KnsError::NotFound(n("/bbc"))));
    }

    #[test]
    fn response_round_trip() {
        let mut kns = KeyNameService::new(KeyPair::from_seed([7; 32]));
        let cnn = KeyPair::from_seed([8; 32]);
        kns.register(&n("/ndn/cnn"), cnn.public_key()).unwrap();
        let q = kns_query_name(&n("/ndn/cnn/news")).unwrap();
        assert_eq!(q, n("/kns/ndn/cnn/news/key"));
        let resp = kns.respond(&q).unwrap();
        assert_eq!(resp.name, q);
        let key = kns_resolve_response(&resp, kns.public_key(), &n("/ndn/cnn/news")).unwrap();
        assert_eq!(&key, cnn.public_key());
        let other = KeyPair::from_seed([1; 32]);
        assert!(kns_resolve_response(&resp, other.public_key(), &n("/ndn/cnn/news")).is_err());
        assert!(kns.respond(&kns_query_name(&n("/bbc")).unwrap()).is_none());
        assert!(kns.respond(&n("/ndn/cnn/key")).is_none());
    }
}
