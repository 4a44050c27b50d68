use thiserror::Error;

use super::codec::{encode_content, CodecError};
use super::digest::Digest;
use super::name::Name;
use super::packet::{ContentObject, Interest};

/// Component-wise, byte-exact prefix test on explicit components. Implicit
/// digests are ignored.
pub fn prefix_match(prefix: &Name, name: &Name) -> bool {
    prefix.is_prefix_of(name)
}

/// SHA-256 over the full wire encoding of `content`, signature included.
/// This is the value carried as the implicit last name component.
pub fn content_digest(content: &ContentObject) -> Result<Digest, CodecError> {
    Ok(Digest::of(&encode_content(content)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScnError {
    #[error("name {name} does not match content name {content}")]
    NameMismatch { name: Box<Name>, content: Box<Name> },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Self-certifying name for `content`: its explicit name plus its digest.
pub fn make_scn(name: &Name, content: &ContentObject) -> Result<Name, ScnError> {
    if name.components() != content.name.components() {
        return Err(ScnError::NameMismatch {
            name: Box::new(name.clone()),
            content: Box::new(content.name.clone()),
        });
    }
    Ok(name.without_implicit_digest().with_implicit_digest(content_digest(content)?))
}

/// Full matching rule between an interest and a content object: name prefix,
/// implicit digest, exclusion and publisher key digest must all agree.
///
/// A content object that cannot be encoded never matches.
pub fn interest_matches(interest: &Interest, content: &ContentObject) -> bool {
    match content_digest(content) {
        Ok(d) => matches_with_digest(interest, content, &d),
        Err(_) => false,
    }
}

/// [`interest_matches`] with the content digest already computed; caches
/// and PITs keep digests alongside objects.
pub fn matches_with_digest(interest: &Interest, content: &ContentObject, digest: &Digest) -> bool {
    prefix_match(&interest.name, &content.name)
        && interest.name.implicit_digest().is_none_or(|d| d == digest)
        && !interest.exclude.contains(digest)
        && interest.ppkd.is_none_or(|p| p == content.ppkd)
}
