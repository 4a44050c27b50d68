use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::digest::Digest;

pub const MAX_COMPONENTS: usize = 32;
pub const MAX_COMPONENT_LEN: usize = 255;

/// Text marker for the implicit digest component, e.g.
/// `/a/b/sha256digest=<64 hex digits>`.
const DIGEST_MARKER: &str = "sha256digest=";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("a name needs at least one component")]
    Empty,
    #[error("name has {0} components, at most {MAX_COMPONENTS} are allowed")]
    TooManyComponents(usize),
    #[error("empty name component")]
    EmptyComponent,
    #[error("name component of {0} bytes exceeds {MAX_COMPONENT_LEN}")]
    ComponentTooLong(usize),
    #[error("names must start with '/'")]
    MissingLeadingSlash,
    #[error("bad percent escape in {0:?}")]
    BadEscape(String),
    #[error("bad implicit digest {0:?}")]
    BadDigest(String),
}

/// A hierarchical NDN name: 1..=32 explicit byte-string components, plus an
/// optional implicit digest kept outside the component list so that prefix
/// and FIB logic only ever see explicit components.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    components: Vec<Vec<u8>>,
    implicit_digest: Option<Digest>,
}

fn check_component(c: &[u8]) -> Result<(), NameError> {
    if c.is_empty() {
        return Err(NameError::EmptyComponent);
    }
    if c.len() > MAX_COMPONENT_LEN {
        return Err(NameError::ComponentTooLong(c.len()));
    }
    Ok(())
}

impl Name {
    pub fn new<I, C>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = C>,
        C: Into<Vec<u8>>,
    {
        let components: Vec<Vec<u8>> = components.into_iter().map(Into::into).collect();
        if components.is_empty() {
            return Err(NameError::Empty);
        }
        if components.len() > MAX_COMPONENTS {
            return Err(NameError::TooManyComponents(components.len()));
        }
        for c in &components {
            check_component(c)?;
        }
        Ok(Name {
            components,
            implicit_digest: None,
        })
    }

    pub fn components(&self) -> &[Vec<u8>] {
        &self.components
    }

    /// Number of explicit components.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn implicit_digest(&self) -> Option<&Digest> {
        self.implicit_digest.as_ref()
    }

    pub fn is_scn(&self) -> bool {
        self.implicit_digest.is_some()
    }

    pub fn with_implicit_digest(mut self, digest: Digest) -> Self {
        self.implicit_digest = Some(digest);
        self
    }

    pub fn without_implicit_digest(&self) -> Name {
        Name {
            components: self.components.clone(),
            implicit_digest: None,
        }
    }

    /// Appends an explicit component. Any implicit digest is dropped since
    /// it would no longer name the same object.
    pub fn append(&self, component: impl Into<Vec<u8>>) -> Result<Name, NameError> {
        let component = component.into();
        check_component(&component)?;
        if self.components.len() >= MAX_COMPONENTS {
            return Err(NameError::TooManyComponents(self.components.len() + 1));
        }
        let mut components = self.components.clone();
        components.push(component);
        Ok(Name {
            components,
            implicit_digest: None,
        })
    }

    /// The first `n` explicit components, `1 <= n <= len()`.
    pub fn prefix(&self, n: usize) -> Option<Name> {
        if n == 0 || n > self.components.len() {
            return None;
        }
        Some(Name {
            components: self.components[..n].to_vec(),
            implicit_digest: None,
        })
    }

    /// True if the explicit components of `self` are a (not necessarily
    /// proper) prefix of those of `other`.
    pub fn is_prefix_of(&self, other: &Name) -> bool {
        self.components.len() <= other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a == b)
    }

    pub fn last(&self) -> &[u8] {
        self.components.last().map(Vec::as_slice).unwrap_or_default()
    }
}

fn write_component(f: &mut fmt::Formatter<'_>, c: &[u8]) -> fmt::Result {
    for &b in c {
        let plain = b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~' | b'+' | b',');
        if plain {
            write!(f, "{}", b as char)?;
        } else {
            write!(f, "%{b:02X}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.components {
            f.write_str("/")?;
            write_component(f, c)?;
        }
        if let Some(d) = &self.implicit_digest {
            write!(f, "/{DIGEST_MARKER}{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({self})")
    }
}

fn unescape(s: &str) -> Result<Vec<u8>, NameError> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s.get(i + 1..i + 3).ok_or_else(|| NameError::BadEscape(s.to_string()))?;
            let b = u8::from_str_radix(hex, 16).map_err(|_| NameError::BadEscape(s.to_string()))?;
            out.push(b);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    Ok(out)
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rest = s.strip_prefix('/').ok_or(NameError::MissingLeadingSlash)?;
        let mut parts: Vec<&str> = rest.split('/').collect();
        let mut digest = None;
        if let Some(last) = parts.last() {
            if let Some(hex) = last.strip_prefix(DIGEST_MARKER) {
                digest = Some(Digest::from_hex(hex).ok_or_else(|| NameError::BadDigest(hex.to_string()))?);
                parts.pop();
            }
        }
        if parts.len() == 1 && parts[0].is_empty() {
            return Err(NameError::Empty);
        }
        let components = parts
            .into_iter()
            .map(unescape)
            .collect::<Result<Vec<_>, _>>()?;
        let name = Name::new(components)?;
        Ok(match digest {
            Some(d) => name.with_implicit_digest(d),
            None => name,
        })
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
