//! Binary hash tree over catalog entries. Leaves are SHA-256 of the entry
//! encoding; an internal node is `H(left || right)`; a node without a right
//! sibling is promoted to the next level unchanged.

use crate::model::Digest;

/// One step per level, leaf upwards. `None` marks a level where the node
/// had no sibling and was promoted.
pub type MerkleProof = Vec<Option<Digest>>;

pub fn node_hash(left: &Digest, right: &Digest) -> Digest {
    Digest::of_parts([left.as_bytes().as_slice(), right.as_bytes().as_slice()])
}

fn next_level(level: &[Digest]) -> Vec<Digest> {
    level
        .chunks(2)
        .map(|pair| match pair {
            [l, r] => node_hash(l, r),
            [only] => *only,
            _ => unreachable!(),
        })
        .collect()
}

/// Root over leaf hashes; `None` for an empty tree.
pub fn merkle_root(leaves: &[Digest]) -> Option<Digest> {
    if leaves.is_empty() {
        return None;
    }
    let mut level = leaves.to_vec();
    while level.len() > 1 {
        level = next_level(&level);
    }
    Some(level[0])
}

/// Number of levels above the leaves.
pub fn merkle_depth(leaf_count: usize) -> u32 {
    if leaf_count <= 1 {
        0
    } else {
        usize::BITS - (leaf_count - 1).leading_zeros()
    }
}

pub fn merkle_proof(leaves: &[Digest], index: usize) -> Option<MerkleProof> {
    if index >= leaves.len() {
        return None;
    }
    let mut proof = Vec::new();
    let mut level = leaves.to_vec();
    let mut idx = index;
    while level.len() > 1 {
        let sibling = idx ^ 1;
        proof.push(level.get(sibling).copied());
        level = next_level(&level);
        idx /= 2;
    }
    Some(proof)
}

/// Folds `leaf` with `proof` along the bits of `index` and compares with
/// `root`. A left-child position (bit set) must have a sibling; index bits
/// left over after the proof is used up make the proof invalid.
pub fn fold_proof(root: &Digest, leaf: &Digest, index: usize, proof: &[Option<Digest>]) -> bool {
    let mut h = *leaf;
    let mut idx = index;
    for step in proof {
        h = match (idx & 1, step) {
            (1, Some(s)) => node_hash(s, &h),
            (1, None) => return false,
            (_, Some(s)) => node_hash(&h, s),
            (_, None) => h,
        };
        idx >>= 1;
    }
    idx == 0 && h == *root
}
