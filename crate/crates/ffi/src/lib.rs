//! C ABI over `ikb-ndn`.
//!
//! Conventions:
//! * every fallible function returns an [`IkbStatus`]; on anything but
//!   `IKB_STATUS_OK` a message is available from [`ikb_last_error`] on the
//!   same thread;
//! * objects are opaque handles created by `*_new`/`*_from_*` and released
//!   with the matching `*_free`;
//! * byte strings handed back to the caller are [`IkbBuffer`]s, released
//!   with [`ikb_buffer_free`];
//! * packets cross the boundary in their TLV wire encoding, names as
//!   NUL-terminated URIs such as `/a/b`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ikb_ndn::forwarder::{
    DropReason, FaceId, Forwarder, ForwarderConfig, VerificationMode, VerificationPolicy,
};
use ikb_ndn::sim::{load_scenario, load_topology, run};
use ikb_ndn::{
    content_digest, decode_wire, encode_wire, sign_content, verify_content, ContentType, KeyPair, Name, Packet,
    PublicKey, Timestamp, UnsignedContent,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IkbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Decode = 3,
    Crypto = 4,
    Io = 5,
    Panic = 6,
}

/// Why the forwarder discarded a packet; `None` when nothing was dropped.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IkbDropReason {
    None = 0,
    Unsolicited = 1,
    KeyMismatch = 2,
    BadSignature = 3,
    ScnDigestMismatch = 4,
    ExcludeMatch = 5,
    UnboundInterest = 6,
    Malformed = 7,
}

impl From<Option<DropReason>> for IkbDropReason {
    fn from(r: Option<DropReason>) -> Self {
        match r {
            None => IkbDropReason::None,
            Some(DropReason::Unsolicited) => IkbDropReason::Unsolicited,
            Some(DropReason::IkbKeyMismatch) => IkbDropReason::KeyMismatch,
            Some(DropReason::IkbBadSignature) => IkbDropReason::BadSignature,
            Some(DropReason::ScnDigestMismatch) => IkbDropReason::ScnDigestMismatch,
            Some(DropReason::ExcludeMatch) => IkbDropReason::ExcludeMatch,
            Some(DropReason::UnboundInterest) => IkbDropReason::UnboundInterest,
            Some(DropReason::Malformed) => IkbDropReason::Malformed,
        }
    }
}

/// Router verification policy.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IkbPolicy {
    None = 0,
    Full = 1,
    /// Uses the `verify_probability` argument.
    Probabilistic = 2,
    EdgeOnly = 3,
}

/// Heap bytes owned by the library.
#[repr(C)]
#[derive(Debug)]
pub struct IkbBuffer {
    pub data: *mut u8,
    pub len: usize,
}

impl IkbBuffer {
    fn empty() -> Self {
        IkbBuffer {
            data: ptr::null_mut(),
            len: 0,
        }
    }

    fn from_vec(v: Vec<u8>) -> Self {
        let mut b = v.into_boxed_slice();
        let out = IkbBuffer {
            data: b.as_mut_ptr(),
            len: b.len(),
        };
        std::mem::forget(b);
        out
    }
}

/// Summary of what the forwarder did with one packet. The packets it emitted
/// are read with [`ikb_forwarder_output`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IkbActions {
    pub forwarded_interests: u32,
    pub delivered_contents: u32,
    pub drop_reason: IkbDropReason,
    pub signature_verifications: u32,
    pub cache_hit: bool,
}

/// Opaque Ed25519 key pair.
pub struct IkbKeyPair(KeyPair);

/// Opaque forwarder with the outputs of the last handled packet.
pub struct IkbForwarder {
    inner: Forwarder,
    outputs: Vec<(FaceId, Packet)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(IkbStatus, String);

fn fail(status: IkbStatus, msg: impl std::fmt::Display) -> Failure {
    Failure(status, msg.to_string())
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IkbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IkbStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IkbStatus::Panic
        }
    }
}

unsafe fn bytes<'a>(data: *const u8, len: usize) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(IkbStatus::NullPointer, "null data pointer with nonzero length"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(fail(IkbStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(IkbStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn name_arg(s: *const c_char) -> Result<Name, Failure> {
    text(s, "name")?
        .parse()
        .map_err(|e| fail(IkbStatus::InvalidArgument, e))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(IkbStatus::NullPointer, "null output pointer"))
}

unsafe fn handle<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(IkbStatus::NullPointer, "null handle"))
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn ikb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `buffer` must be null or point to a buffer returned by this library that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn ikb_buffer_free(buffer: *mut IkbBuffer) {
    let Some(b) = buffer.as_mut() else { return };
    if !b.data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(b.data, b.len)));
    }
    *b = IkbBuffer::empty();
}

/// Derives a key pair from a 32-byte seed.
///
/// # Safety
/// `seed` must point to 32 readable bytes and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ikb_keypair_from_seed(seed: *const u8, out_key: *mut *mut IkbKeyPair) -> IkbStatus {
    guard(|| {
        let seed: [u8; 32] = bytes(seed, 32)?.try_into().expect("32 bytes");
        *out(out_key)? = Box::into_raw(Box::new(IkbKeyPair(KeyPair::from_seed(seed))));
        Ok(())
    })
}

/// # Safety
/// `key` must be null or a handle from [`ikb_keypair_from_seed`].
#[no_mangle]
pub unsafe extern "C" fn ikb_keypair_free(key: *mut IkbKeyPair) {
    if !key.is_null() {
        drop(Box::from_raw(key));
    }
}

/// Copies the 32-byte public key into `out32`.
///
/// # Safety
/// `key` must be a live handle and `out32` must have room for 32 bytes.
#[no_mangle]
pub unsafe extern "C" fn ikb_keypair_public_key(key: *const IkbKeyPair, out32: *mut u8) -> IkbStatus {
    guard(|| {
        let kp = key.as_ref().ok_or_else(|| fail(IkbStatus::NullPointer, "null handle"))?;
        if out32.is_null() {
            return Err(fail(IkbStatus::NullPointer, "null output pointer"));
        }
        let pk = kp.0.public_key().as_bytes();
        ptr::copy_nonoverlapping(pk.as_ptr(), out32, pk.len());
        Ok(())
    })
}

/// Builds and signs a data object; writes its wire encoding to `out_wire`.
///
/// # Safety
/// `key` must be a live handle, `name` a NUL-terminated string, `payload`
/// valid for `payload_len` bytes and `out_wire` writable.
#[no_mangle]
pub unsafe extern "C" fn ikb_sign_content(
    key: *const IkbKeyPair,
    name: *const c_char,
    payload: *const u8,
    payload_len: usize,
    freshness_s: u64,
    out_wire: *mut IkbBuffer,
) -> IkbStatus {
    guard(|| {
        let kp = key.as_ref().ok_or_else(|| fail(IkbStatus::NullPointer, "null handle"))?;
        let name = name_arg(name)?;
        let payload = bytes(payload, payload_len)?.to_vec();
        let u = UnsignedContent::new(name, payload, ContentType::Data, freshness_s, kp.0.public_key());
        let c = sign_content(u, &kp.0).map_err(|e| fail(IkbStatus::Crypto, e))?;
        let wire = encode_wire(&Packet::Content(c)).map_err(|e| fail(IkbStatus::InvalidArgument, e))?;
        *out(out_wire)? = IkbBuffer::from_vec(wire);
        Ok(())
    })
}

fn decode_content(wire: &[u8]) -> Result<ikb_ndn::ContentObject, Failure> {
    match decode_wire(wire).map_err(|e| fail(IkbStatus::Decode, e))? {
        Packet::Content(c) => Ok(c),
        Packet::Interest(_) => Err(fail(IkbStatus::InvalidArgument, "expected a content object, got an interest")),
    }
}

/// Sets `*out_valid` to whether the encoded content verifies under the
/// 32-byte `public_key`.
///
/// # Safety
/// `wire` must be valid for `wire_len` bytes, `public_key` for 32 bytes and
/// `out_valid` writable.
#[no_mangle]
pub unsafe extern "C" fn ikb_verify_content(
    wire: *const u8,
    wire_len: usize,
    public_key: *const u8,
    out_valid: *mut bool,
) -> IkbStatus {
    guard(|| {
        let c = decode_content(bytes(wire, wire_len)?)?;
        let pk = PublicKey::from_bytes(bytes(public_key, 32)?);
        *out(out_valid)? = verify_content(&c, &pk);
        Ok(())
    })
}

/// Writes the 32-byte implicit digest of an encoded content object.
///
/// # Safety
/// `wire` must be valid for `wire_len` bytes and `out32` for 32 bytes.
#[no_mangle]
pub unsafe extern "C" fn ikb_content_digest(wire: *const u8, wire_len: usize, out32: *mut u8) -> IkbStatus {
    guard(|| {
        let c = decode_content(bytes(wire, wire_len)?)?;
        let d = content_digest(&c).map_err(|e| fail(IkbStatus::Decode, e))?;
        if out32.is_null() {
            return Err(fail(IkbStatus::NullPointer, "null output pointer"));
        }
        ptr::copy_nonoverlapping(d.as_bytes().as_ptr(), out32, 32);
        Ok(())
    })
}

/// Creates a forwarder. `is_edge` matters only for `IkbPolicy::EdgeOnly`.
///
/// # Safety
/// `out_forwarder` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ikb_forwarder_new(
    cache_capacity: usize,
    policy: IkbPolicy,
    verify_probability: f64,
    is_edge: bool,
    rng_seed: u64,
    out_forwarder: *mut *mut IkbForwarder,
) -> IkbStatus {
    guard(|| {
        let mode = match policy {
            IkbPolicy::None => VerificationMode::None,
            IkbPolicy::Full => VerificationMode::IkbFull,
            IkbPolicy::Probabilistic => VerificationMode::IkbProbabilistic(verify_probability),
            IkbPolicy::EdgeOnly => VerificationMode::IkbEdgeOnly,
        };
        let policy = VerificationPolicy::new(mode, is_edge).map_err(|e| fail(IkbStatus::InvalidArgument, e))?;
        let f = Forwarder::new(ForwarderConfig {
            cache_capacity,
            policy,
            rng_seed,
            ..ForwarderConfig::default()
        });
        *out(out_forwarder)? = Box::into_raw(Box::new(IkbForwarder {
            inner: f,
            outputs: Vec::new(),
        }));
        Ok(())
    })
}

/// # Safety
/// `forwarder` must be null or a handle from [`ikb_forwarder_new`].
#[no_mangle]
pub unsafe extern "C" fn ikb_forwarder_free(forwarder: *mut IkbForwarder) {
    if !forwarder.is_null() {
        drop(Box::from_raw(forwarder));
    }
}

/// Adds `prefix -> face` to the forwarding table.
///
/// # Safety
/// `forwarder` must be a live handle and `prefix` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ikb_forwarder_add_route(
    forwarder: *mut IkbForwarder,
    prefix: *const c_char,
    face: u32,
) -> IkbStatus {
    guard(|| {
        let f = handle(forwarder)?;
        let prefix = name_arg(prefix)?;
        f.inner.add_route(&prefix, vec![FaceId(face)]);
        Ok(())
    })
}

/// Feeds one encoded packet (interest or content) arriving on `face` at
/// `now_us` microseconds. Replaces the previous packet's outputs.
///
/// # Safety
/// `forwarder` must be a live handle, `wire` valid for `wire_len` bytes and
/// `out_actions` writable.
#[no_mangle]
pub unsafe extern "C" fn ikb_forwarder_handle(
    forwarder: *mut IkbForwarder,
    face: u32,
    wire: *const u8,
    wire_len: usize,
    now_us: u64,
    out_actions: *mut IkbActions,
) -> IkbStatus {
    guard(|| {
        let f = handle(forwarder)?;
        let packet = decode_wire(bytes(wire, wire_len)?).map_err(|e| fail(IkbStatus::Decode, e))?;
        let now = Timestamp::from_micros(now_us);
        let a = match packet {
            Packet::Interest(i) => f.inner.handle_interest(FaceId(face), i, now),
            Packet::Content(c) => f.inner.handle_content(FaceId(face), c, now),
        };
        *out(out_actions)? = IkbActions {
            forwarded_interests: a.forwarded_interests.len() as u32,
            delivered_contents: a.delivered_contents.len() as u32,
            drop_reason: a.dropped.into(),
            signature_verifications: a.signature_verifications,
            cache_hit: a.cache_hit,
        };
        f.outputs = a
            .forwarded_interests
            .into_iter()
            .map(|(face, i)| (face, Packet::Interest(i)))
            .chain(a.delivered_contents.into_iter().map(|(face, c)| (face, Packet::Content(c))))
            .collect();
        Ok(())
    })
}

/// Number of packets emitted by the last [`ikb_forwarder_handle`] call.
///
/// # Safety
/// `forwarder` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ikb_forwarder_output_count(forwarder: *const IkbForwarder) -> usize {
    forwarder.as_ref().map_or(0, |f| f.outputs.len())
}

/// The `index`-th emitted packet: forwarded interests first, then delivered
/// contents.
///
/// # Safety
/// `forwarder` must be a live handle; `out_face` and `out_wire` writable.
#[no_mangle]
pub unsafe extern "C" fn ikb_forwarder_output(
    forwarder: *const IkbForwarder,
    index: usize,
    out_face: *mut u32,
    out_wire: *mut IkbBuffer,
) -> IkbStatus {
    guard(|| {
        let f = forwarder.as_ref().ok_or_else(|| fail(IkbStatus::NullPointer, "null handle"))?;
        let (face, packet) = f
            .outputs
            .get(index)
            .ok_or_else(|| fail(IkbStatus::InvalidArgument, format!("output {index} out of range")))?;
        let wire = encode_wire(packet).map_err(|e| fail(IkbStatus::Decode, e))?;
        *out(out_face)? = face.0;
        *out(out_wire)? = IkbBuffer::from_vec(wire);
        Ok(())
    })
}

/// Number of objects currently cached.
///
/// # Safety
/// `forwarder` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ikb_forwarder_cache_len(forwarder: *const IkbForwarder) -> usize {
    forwarder.as_ref().map_or(0, |f| f.inner.content_store().len())
}

/// Runs one simulation and reports the fraction of consumers that retrieved
/// valid content and the largest number of fakes cached at any sample.
///
/// # Safety
/// Both paths must be NUL-terminated strings; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ikb_simulate(
    topology_path: *const c_char,
    scenario_path: *const c_char,
    out_fraction_retrieved: *mut f64,
    out_max_fake_occupancy: *mut u64,
) -> IkbStatus {
    guard(|| {
        let topo = load_topology(Path::new(text(topology_path, "topology path")?))
            .map_err(|e| fail(IkbStatus::Io, e))?;
        let sc = load_scenario(Path::new(text(scenario_path, "scenario path")?)).map_err(|e| fail(IkbStatus::Io, e))?;
        let m = run(&topo, &sc).map_err(|e| fail(IkbStatus::InvalidArgument, e))?;
        *out(out_fraction_retrieved)? = m.fraction_retrieved();
        *out(out_max_fake_occupancy)? = m.max_fake_occupancy();
        Ok(())
    })
}
