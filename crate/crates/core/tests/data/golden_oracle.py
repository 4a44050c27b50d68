"""Independent reference encoder used to produce golden.json.

Uses only hashlib, struct and the `cryptography` package. Run with
`python3 golden_oracle.py > golden.json`.
"""
import hashlib
import json
import struct

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey
from cryptography.hazmat.primitives import serialization


def tlv(t, v):
    return bytes([t]) + struct.pack(">I", len(v)) + v


def sha(b):
    return hashlib.sha256(b).digest()


def comps(parts):
    return b"".join(tlv(0x10, p) for p in parts)


def interest(parts, implicit=None, exclude=(), ppkd=None):
    body = comps(parts)
    if implicit is not None:
        body += tlv(0x11, implicit)
    for d in sorted(exclude):
        body += tlv(0x12, d)
    if ppkd is not None:
        body += tlv(0x13, ppkd)
    return tlv(0x01, body)


def content(parts, payload, ctype, freshness, sk):
    pk = sk.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)
    signed = (
        comps(parts)
        + tlv(0x13, sha(pk))
        + tlv(0x14, payload)
        + tlv(0x15, bytes([ctype]))
        + tlv(0x16, struct.pack(">Q", freshness))
        + tlv(0x17, pk)
    )
    sig = b"\x01" + sk.sign(signed)
    return tlv(0x02, signed + tlv(0x18, sig))


def name_block(parts):
    return bytes([len(parts)]) + comps(parts)


def merkle_root(leaves):
    level = list(leaves)
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level), 2):
            pair = level[i:i + 2]
            nxt.append(sha(pair[0] + pair[1]) if len(pair) == 2 else pair[0])
        level = nxt
    return level[0]


seed = bytes(range(32))
sk = Ed25519PrivateKey.from_private_bytes(seed)
pk = sk.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)
video = [b"dfn", b"target", b"video"]
c1 = content(video, b"hello", 0, 3600, sk)
c2 = content([b"dfn", b"target", b"key"], b"", 1, 0, sk)
entries = [([b"dfn", b"a"], sha(b"a")), ([b"dfn", b"b"], sha(b"b")), ([b"dfn", b"c"], sha(b"c"))]
leaves = [sha(name_block(n) + d) for n, d in entries]

out = {
    "seed": seed.hex(),
    "public_key": pk.hex(),
    "ppkd": sha(pk).hex(),
    "sha256_empty": sha(b"").hex(),
    "sha256_abc": sha(b"abc").hex(),
    "interest_plain": interest([b"a", b"b"]).hex(),
    "interest_bound": interest(video, exclude=[sha(b"x"), sha(b"y")], ppkd=sha(pk)).hex(),
    "interest_scn": interest(video, implicit=sha(c1)).hex(),
    "content_data": c1.hex(),
    "content_data_digest": sha(c1).hex(),
    "content_key": c2.hex(),
    "content_key_digest": sha(c2).hex(),
    "merkle_leaves": [l.hex() for l in leaves],
    "merkle_root": merkle_root(leaves).hex(),
}
print(json.dumps(out, indent=2))
