use thiserror::Error;

use crate::crypto::{key_digest, verify_content, PublicKey};
use crate::model::{ContentObject, Interest, Name};

use super::cert::{key_name, parse_certificate};

pub const DEFAULT_MAX_CHAIN_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BootstrapError {
    #[error("no trust anchors installed")]
    NoAnchors,
    #[error("no key object could be retrieved for {0}")]
    NoRoute(Name),
    #[error("key object {0} is not validly signed by the expected key")]
    BadSignature(Name),
    #[error("no certificate authorizes {0}")]
    PrefixNotAuthorized(Name),
    #[error("certificate chain longer than {0}")]
    ChainTooDeep(usize),
    #[error("malformed key object {0}")]
    Malformed(Name),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustAnchor {
    pub key: PublicKey,
    /// Namespace the anchor may certify.
    pub prefix: Name,
}

/// Pre-installed root keys, tried in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustAnchorStore {
    anchors: Vec<TrustAnchor>,
}

impl TrustAnchorStore {
    pub fn new(anchors: Vec<TrustAnchor>) -> Result<Self, BootstrapError> {
        if anchors.is_empty() {
            return Err(BootstrapError::NoAnchors);
        }
        Ok(TrustAnchorStore { anchors })
    }

    pub fn single(key: PublicKey, prefix: Name) -> Self {
        TrustAnchorStore {
            anchors: vec![TrustAnchor { key, prefix }],
        }
    }

    pub fn anchors(&self) -> &[TrustAnchor] {
        &self.anchors
    }
}

/// Key retrieval as seen by the bootstrap routine: one interest, at most one
/// returned object.
pub trait KeyNetwork {
    fn fetch(&mut self, interest: &Interest) -> Option<ContentObject>;
}

impl<F: FnMut(&Interest) -> Option<ContentObject>> KeyNetwork for F {
    fn fetch(&mut self, interest: &Interest) -> Option<ContentObject> {
        self(interest)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BootstrapStep {
    /// Send this interest and report the answer (or its absence) back.
    Fetch(Interest),
    Resolved(PublicKey),
    Failed(BootstrapError),
}

/// Walks down the namespace from an anchor towards the target prefix. At
/// each level `L` it requests `target[..L]/key` bound to the current key's
/// digest; an accepted certificate becomes the current key. Levels nobody
/// certified are skipped, except the last one.
#[derive(Debug, Clone)]
pub struct BootstrapSession {
    target: Name,
    anchors: Vec<TrustAnchor>,
    max_depth: usize,
    anchor_idx: usize,
    level: usize,
    current_key: PublicKey,
    scope: Name,
    accepted: usize,
    pending: Option<Interest>,
    last_error: Option<BootstrapError>,
    fetches: usize,
}

impl BootstrapSession {
    pub fn new(target: &Name, anchors: &TrustAnchorStore, max_depth: usize) -> Self {
        let first = &anchors.anchors[0];
        BootstrapSession {
            target: target.without_implicit_digest(),
            anchors: anchors.anchors.clone(),
            max_depth,
            anchor_idx: 0,
            level: 0,
            current_key: first.key.clone(),
            scope: first.prefix.clone(),
            accepted: 0,
            pending: None,
            last_error: None,
            fetches: 0,
        }
    }

    /// Interests issued so far.
    pub fn fetches(&self) -> usize {
        self.fetches
    }

    pub fn start(&mut self) -> BootstrapStep {
        self.anchor_idx = 0;
        self.try_anchor()
    }

    fn try_anchor(&mut self) -> BootstrapStep {
        while let Some(a) = self.anchors.get(self.anchor_idx) {
            if a.prefix.is_prefix_of(&self.target) {
                self.current_key = a.key.clone();
                self.scope = a.prefix.clone();
                self.level = a.prefix.len();
                self.accepted = 0;
                return self.advance();
            }
            self.anchor_idx += 1;
        }
        BootstrapStep::Failed(
            self.last_error
                .clone()
                .unwrap_or_else(|| BootstrapError::PrefixNotAuthorized(self.target.clone())),
        )
    }

    fn fail_anchor(&mut self, e: BootstrapError) -> BootstrapStep {
        self.last_error = Some(e);
        self.anchor_idx += 1;
        self.try_anchor()
    }

    fn advance(&mut self) -> BootstrapStep {
        if self.level >= self.target.len() {
            return BootstrapStep::Resolved(self.current_key.clone());
        }
        self.level += 1;
        let prefix = self.target.prefix(self.level).expect("level within target");
        let name = match key_name(&prefix) {
            Ok(n) => n,
            Err(_) => return self.fail_anchor(BootstrapError::Malformed(prefix)),
        };
        let interest = Interest::new(name).with_ppkd(key_digest(&self.current_key));
        self.pending = Some(interest.clone());
        self.fetches += 1;
        BootstrapStep::Fetch(interest)
    }

    /// Feeds the answer to the last `Fetch`.
    pub fn on_response(&mut self, response: Option<ContentObject>) -> BootstrapStep {
        let Some(req) = self.pending.take() else {
            return BootstrapStep::Failed(BootstrapError::NoRoute(self.target.clone()));
        };
        let Some(obj) = response else {
            if self.level >= self.target.len() {
                return self.fail_anchor(BootstrapError::NoRoute(req.name));
            }
            return self.advance();
        };
        match self.accept(&req, &obj) {
            Ok(()) => {
                if self.accepted > self.max_depth {
                    return self.fail_anchor(BootstrapError::ChainTooDeep(self.max_depth));
                }
                self.advance()
            }
            Err(e) => self.fail_anchor(e),
        }
    }

    fn accept(&mut self, req: &Interest, obj: &ContentObject) -> Result<(), BootstrapError> {
        let expected = key_digest(&self.current_key);
        if obj.name != req.name || obj.ppkd != expected || key_digest(&obj.key_locator) != expected {
            return Err(BootstrapError::BadSignature(req.name.clone()));
        }
        if !verify_content(obj, &self.current_key) {
            return Err(BootstrapError::BadSignature(req.name.clone()));
        }
        let cert = parse_certificate(obj).map_err(|_| BootstrapError::Malformed(req.name.clone()))?;
        let covering = cert
            .covering_prefix(&self.target)
            .filter(|p| self.scope.is_prefix_of(p))
            .ok_or_else(|| BootstrapError::PrefixNotAuthorized(self.target.clone()))?
            .clone();
        self.current_key = cert.subject_key;
        self.scope = covering;
        self.accepted += 1;
        Ok(())
    }
}

/// Resolves and validates the key for `target_prefix`, starting from the
/// anchors and following certificates over `network`.
pub fn bootstrap_resolve_key(
    target_prefix: &Name,
    anchors: &TrustAnchorStore,
    network: &mut dyn KeyNetwork,
    max_depth: usize,
) -> Result<PublicKey, BootstrapError> {
    let mut session = BootstrapSession::new(target_prefix, anchors, max_depth);
    let mut step = session.start();
    loop {
        match step {
            BootstrapStep::Fetch(i) => step = session.on_response(network.fetch(&i)),
            BootstrapStep::Resolved(k) => return Ok(k),
            BootstrapStep::Failed(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::crypto::KeyPair;
    use crate::model::interest_matches;
    use crate::trust::issue_certificate;

    fn n(s: &str) -> Name {
        s.parse().unwrap()
    }

    /// A key repository answering any interest that an object satisfies.
    #[derive(Default)]
    struct Repo {
        objects: Vec<ContentObject>,
        fetched: Vec<Name>,
    }

    impl KeyNetwork for Repo {
        fn fetch(&mut self, interest: &Interest) -> Option<ContentObject> {
            self.fetched.push(interest.name.clone());
            self.objects
                .iter()
                .find(|o| o.name == interest.name && interest_matches(interest, o))
                .cloned()
        }
    }

    fn keys() -> HashMap<&'static str, KeyPair> {
        [("root", 1u8), ("ca", 2), ("prod", 3), ("evil", 4)]
            .into_iter()
            .map(|(k, s)| (k, KeyPair::from_seed([s; 32])))
            .collect()
    }

    #[test]
    fn direct_issuance() {
        let k = keys();
        let mut repo = Repo::default();
        repo.objects
            .push(issue_certificate(&n("/ndn/cnn"), k["prod"].public_key(), &[n("/ndn/cnn")], &k["root"]).unwrap());
        let anchors = TrustAnchorStore::single(k["root"].public_key().clone(), n("/ndn"));
        let key = bootstrap_resolve_key(&n("/ndn/cnn"), &anchors, &mut repo, DEFAULT_MAX_CHAIN_DEPTH).unwrap();
        assert_eq!(&key, k["prod"].public_key());
        assert_eq!(repo.fetched, vec![n("/ndn/cnn/key")]);
    }

    #[test]
    fn three_level_chain_takes_two_fetches() {
        let k = keys();
        let mut repo = Repo::default();
        repo.objects
            .push(issue_certificate(&n("/ndn/cnn"), k["ca"].public_key(), &[n("/ndn/cnn")], &k["root"]).unwrap());
        repo.objects.push(
            issue_certificate(&n("/ndn/cnn/news"), k["prod"].public_key(), &[n("/ndn/cnn/news")], &k["ca"]).unwrap(),
        );
        let anchors = TrustAnchorStore::single(k["root"].public_key().clone(), n("/ndn"));
        let key = bootstrap_resolve_key(&n("/ndn/cnn/news"), &anchors, &mut repo, DEFAULT_MAX_CHAIN_DEPTH).unwrap();
        assert_eq!(&key, k["prod"].public_key());
        assert_eq!(repo.fetched.len(), 2);
    }

    #[test]
    fn prefix_outside_authorization_rejected() {
        let k = keys();
        let mut repo = Repo::default();
        repo.objects
            .push(issue_certificate(&n("/ndn/bbc"), k["prod"].public_key(), &[n("/ndn/cnn")], &k["root"]).unwrap());
        let anchors = TrustAnchorStore::single(k["root"].public_key().clone(), n("/ndn"));
        assert_eq!(
            bootstrap_resolve_key(&n("/ndn/bbc"), &anchors, &mut repo, DEFAULT_MAX_CHAIN_DEPTH),
            Err(BootstrapError::PrefixNotAuthorized(n("/ndn/bbc")))
        );
    }

    #[test]
    fn certificate_cannot_widen_issuer_scope() {
        let k = keys();
        let mut repo = Repo::default();
        repo.objects
            .push(issue_certificate(&n("/ndn/cnn"), k["ca"].public_key(), &[n("/ndn/cnn/sport")], &k["root"]).unwrap());
        repo.objects
            .push(issue_certificate(&n("/ndn/cnn/news"), k["prod"].public_key(), &[n("/ndn/cnn")], &k["ca"]).unwrap());
        let anchors = TrustAnchorStore::single(k["root"].public_key().clone(), n("/ndn"));
        // The CA certificate does not cover /ndn/cnn/news at all.
        assert!(matches!(
            bootstrap_resolve_key(&n("/ndn/cnn/news"), &anchors, &mut repo, 4),
            Err(BootstrapError::PrefixNotAuthorized(_))
        ));
    }

    #[test]
    fn orphan_chain_never_resolves() {
        let k = keys();
        let mut repo = Repo::default();
        repo.objects
            .push(issue_certificate(&n("/ndn/cnn"), k["prod"].public_key(), &[n("/ndn/cnn")], &k["evil"]).unwrap());
        let anchors = TrustAnchorStore::single(k["root"].public_key().clone(), n("/ndn"));
        assert_eq!(
            bootstrap_resolve_key(&n("/ndn/cnn"), &anchors, &mut repo, 4),
            Err(BootstrapError::NoRoute(n("/ndn/cnn/key")))
        );
        // Served regardless of the requested key digest.
        let mut liar = |_: &Interest| repo.objects.first().cloned();
        assert_eq!(
            bootstrap_resolve_key(&n("/ndn/cnn"), &anchors, &mut liar, 4),
            Err(BootstrapError::BadSignature(n("/ndn/cnn/key")))
        );
    }

    #[test]
    fn chain_depth_limit() {
        let k = keys();
        let mut repo = Repo::default();
        let chain: Vec<KeyPair> = (10..16u8).map(|s| KeyPair::from_seed([s; 32])).collect();
        let mut issuer = &k["root"];
        let mut prefix = n("/r");
        for kp in &chain {
            prefix = prefix.append("x").unwrap();
            repo.objects
                .push(issue_certificate(&prefix, kp.public_key(), std::slice::from_ref(&prefix), issuer).unwrap());
            issuer = kp;
        }
        let anchors = TrustAnchorStore::single(k["root"].public_key().clone(), n("/r"));
        assert_eq!(
            bootstrap_resolve_key(&prefix, &anchors, &mut repo, 4),
            Err(BootstrapError::ChainTooDeep(4))
        );
        assert_eq!(bootstrap_resolve_key(&prefix, &anchors, &mut repo, 6).unwrap(), *chain[5].public_key());
    }

    #[test]
    fn falls_back_to_second_anchor() {
        let k = keys();
        let mut repo = Repo::default();
        repo.objects
            .push(issue_certificate(&n("/ndn/cnn"), k["prod"].public_key(), &[n("/ndn/cnn")], &k["root"]).unwrap());
        let anchors = TrustAnchorStore::new(vec![
            TrustAnchor {
                key: k["evil"].public_key().clone(),
                prefix: n("/ndn"),
            },
            TrustAnchor {
                key: k["root"].public_key().clone(),
                prefix: n("/ndn"),
            },
        ])
        .unwrap();
        assert_eq!(
            &bootstrap_resolve_key(&n("/ndn/cnn"), &anchors, &mut repo, 4).unwrap(),
            k["prod"].public_key()
        );
        assert_eq!(TrustAnchorStore::new(vec![]), Err(BootstrapError::NoAnchors));
    }
}
