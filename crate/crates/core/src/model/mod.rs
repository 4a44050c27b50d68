//! Names, packets, the canonical TLV wire format and interest/content
//! matching.

mod codec;
mod digest;
mod matching;
mod name;
mod packet;

pub use codec::{
    decode_name_block, decode_wire, encode_content, encode_interest, encode_name_block,
    encode_wire, tlv, CodecError,
};
pub use digest::{Digest, DIGEST_LEN};
pub use matching::{
    content_digest, interest_matches, make_scn, matches_with_digest, prefix_match, ScnError,
};
pub(crate) use codec::{
    encode_signed_fields as codec_signed_fields, signed_fields_of as codec_signed_fields_of,
};
pub use name::{Name, NameError, MAX_COMPONENTS, MAX_COMPONENT_LEN};
pub use packet::{ContentObject, ContentType, Interest, Packet, UnsignedContent};
