use std::collections::BTreeMap;

use crate::model::Name;

use super::FaceId;

/// Name-prefix routing table stored as a component trie.
#[derive(Debug, Default, Clone)]
pub struct Fib {
    root: FibNode,
    len: usize,
}

#[derive(Debug, Default, Clone)]
struct FibNode {
    children: BTreeMap<Vec<u8>, FibNode>,
    faces: Option<Vec<FaceId>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub prefix: Name,
    pub out_faces: Vec<FaceId>,
}

impl Fib {
    pub fn new() -> Self {
        Self::default()
    }

    /// Installs or replaces the route for `prefix`.
    pub fn insert(&mut self, prefix: &Name, out_faces: Vec<FaceId>) {
        let mut node = &mut self.root;
        for c in prefix.components() {
            node = node.children.entry(c.clone()).or_default();
        }
        if node.faces.replace(out_faces).is_none() {
            self.len += 1;
        }
    }

    pub fn remove(&mut self, prefix: &Name) -> Option<Vec<FaceId>> {
        let mut node = &mut self.root;
        for c in prefix.components() {
            node = node.children.get_mut(c)?;
        }
        let removed = node.faces.take();
        if removed.is_some() {
            self.len -= 1;
        }
        removed
    }

    /// Faces of the longest prefix of `name` with a route; empty if none.
    pub fn lookup(&self, name: &Name) -> &[FaceId] {
        let mut node = &self.root;
        let mut best: &[FaceId] = &[];
        for c in name.components() {
            match node.children.get(c) {
                Some(child) => {
                    node = child;
                    if let Some(f) = &node.faces {
                        best = f;
                    }
                }
                None => break,
            }
        }
        best
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn entries(&self) -> Vec<FibEntry> {
        fn walk(node: &FibNode, path: &mut Vec<Vec<u8>>, out: &mut Vec<FibEntry>) {
            if let Some(faces) = &node.faces {
                if let Ok(prefix) = Name::new(path.clone()) {
                    out.push(FibEntry {
                        prefix,
                        out_faces: faces.clone(),
                    });
                }
            }
            for (c, child) in &node.children {
                path.push(c.clone());
                walk(child, path, out);
                path.pop();
            }
        }
        let mut out = Vec::with_capacity(self.len);
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }
}
