use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use ikb_ndn::{encode_wire, key_digest, Interest, Packet, PublicKey};
use ikb_ndn_ffi::*;

fn buffer() -> IkbBuffer {
    IkbBuffer {
        data: ptr::null_mut(),
        len: 0,
    }
}

fn last_error() -> String {
    let p = ikb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn keypair(seed: u8) -> *mut IkbKeyPair {
    let mut kp = ptr::null_mut();
    assert_eq!(ikb_keypair_from_seed([seed; 32].as_ptr(), &mut kp), IkbStatus::Ok);
    kp
}

unsafe fn signed(kp: *const IkbKeyPair, name: &str, payload: &[u8]) -> Vec<u8> {
    let name = CString::new(name).unwrap();
    let mut out = buffer();
    assert_eq!(
        ikb_sign_content(kp, name.as_ptr(), payload.as_ptr(), payload.len(), 60, &mut out),
        IkbStatus::Ok
    );
    let v = std::slice::from_raw_parts(out.data, out.len).to_vec();
    ikb_buffer_free(&mut out);
    assert!(out.data.is_null());
    v
}

#[test]
fn sign_verify_digest() {
    unsafe {
        let kp = keypair(1);
        let wire = signed(kp, "/a/b", b"payload");
        let mut pk = [0u8; 32];
        assert_eq!(ikb_keypair_public_key(kp, pk.as_mut_ptr()), IkbStatus::Ok);
        let mut valid = false;
        assert_eq!(ikb_verify_content(wire.as_ptr(), wire.len(), pk.as_ptr(), &mut valid), IkbStatus::Ok);
        assert!(valid);
        let other = keypair(2);
        let mut pk2 = [0u8; 32];
        ikb_keypair_public_key(other, pk2.as_mut_ptr());
        assert_eq!(ikb_verify_content(wire.as_ptr(), wire.len(), pk2.as_ptr(), &mut valid), IkbStatus::Ok);
        assert!(!valid);
        let mut d = [0u8; 32];
        assert_eq!(ikb_content_digest(wire.as_ptr(), wire.len(), d.as_mut_ptr()), IkbStatus::Ok);
        assert_eq!(d, *ikb_ndn::Digest::of(&wire).as_bytes());
        ikb_keypair_free(kp);
        ikb_keypair_free(other);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut kp = ptr::null_mut();
        assert_eq!(ikb_keypair_from_seed(ptr::null(), &mut kp), IkbStatus::NullPointer);
        assert!(last_error().contains("null"));
        let junk = [0xffu8, 0, 0];
        let mut d = [0u8; 32];
        assert_eq!(ikb_content_digest(junk.as_ptr(), junk.len(), d.as_mut_ptr()), IkbStatus::Decode);
        let kp = keypair(3);
        let bad = CString::new("no-slash").unwrap();
        let mut out = buffer();
        assert_eq!(
            ikb_sign_content(kp, bad.as_ptr(), ptr::null(), 0, 1, &mut out),
            IkbStatus::InvalidArgument
        );
        // A successful call clears the message.
        let _ = signed(kp, "/ok", b"");
        assert!(ikb_last_error().is_null());
        ikb_keypair_free(kp);
        let mut f = ptr::null_mut();
        assert_eq!(
            ikb_forwarder_new(8, IkbPolicy::Probabilistic, 1.5, false, 0, &mut f),
            IkbStatus::InvalidArgument
        );
    }
}

#[test]
fn forwarder_binds_interests_to_keys() {
    unsafe {
        let producer = keypair(5);
        let attacker = keypair(6);
        let mut pk = [0u8; 32];
        ikb_keypair_public_key(producer, pk.as_mut_ptr());
        let ppkd = key_digest(&PublicKey::from_bytes(&pk));

        let mut f = ptr::null_mut();
        assert_eq!(ikb_forwarder_new(16, IkbPolicy::Full, 0.0, false, 0, &mut f), IkbStatus::Ok);
        let prefix = CString::new("/p").unwrap();
        assert_eq!(ikb_forwarder_add_route(f, prefix.as_ptr(), 1), IkbStatus::Ok);

        let interest = encode_wire(&Packet::Interest(Interest::new("/p/x".parse().unwrap()).with_ppkd(ppkd))).unwrap();
        let mut a = std::mem::zeroed::<IkbActions>();
        assert_eq!(ikb_forwarder_handle(f, 9, interest.as_ptr(), interest.len(), 0, &mut a), IkbStatus::Ok);
        assert_eq!(a.forwarded_interests, 1);
        assert_eq!(ikb_forwarder_output_count(f), 1);
        let (mut face, mut out) = (0u32, buffer());
        assert_eq!(ikb_forwarder_output(f, 0, &mut face, &mut out), IkbStatus::Ok);
        assert_eq!(face, 1);
        assert_eq!(std::slice::from_raw_parts(out.data, out.len), interest.as_slice());
        ikb_buffer_free(&mut out);

        // Forged by another key under a name that matches: not delivered.
        let mut forged = signed(attacker, "/p/x", b"evil");
        let forged_pkt = ikb_ndn::decode_wire(&forged).unwrap();
        if let Packet::Content(mut c) = forged_pkt {
            c.ppkd = ppkd;
            forged = encode_wire(&Packet::Content(c)).unwrap();
        }
        assert_eq!(ikb_forwarder_handle(f, 1, forged.as_ptr(), forged.len(), 10, &mut a), IkbStatus::Ok);
        assert_eq!(a.drop_reason, IkbDropReason::KeyMismatch);
        assert_eq!(a.signature_verifications, 0);
        assert_eq!(ikb_forwarder_cache_len(f), 0);

        let genuine = signed(producer, "/p/x", b"good");
        assert_eq!(ikb_forwarder_handle(f, 1, genuine.as_ptr(), genuine.len(), 20, &mut a), IkbStatus::Ok);
        assert_eq!(a.drop_reason, IkbDropReason::None);
        assert_eq!(a.delivered_contents, 1);
        assert_eq!(a.signature_verifications, 1);
        assert_eq!(ikb_forwarder_output(f, 0, &mut face, &mut out), IkbStatus::Ok);
        assert_eq!(face, 9);
        ikb_buffer_free(&mut out);
        assert_eq!(ikb_forwarder_cache_len(f), 1);
        assert_eq!(ikb_forwarder_output(f, 5, &mut face, &mut out), IkbStatus::InvalidArgument);

        ikb_forwarder_free(f);
        ikb_keypair_free(producer);
        ikb_keypair_free(attacker);
    }
}

#[test]
fn simulate_bundled_scenario() {
    let core = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core");
    let topo = CString::new(core.join("topologies/line3.topo").to_str().unwrap()).unwrap();
    let sc = CString::new(core.join("scenarios/ikb_ppkd.toml").to_str().unwrap()).unwrap();
    let (mut frac, mut fakes) = (0.0, 1u64);
    let status = unsafe { ikb_simulate(topo.as_ptr(), sc.as_ptr(), &mut frac, &mut fakes) };
    assert_eq!(status, IkbStatus::Ok);
    assert_eq!(frac, 1.0);
    assert_eq!(fakes, 0);
    let missing = CString::new("/nonexistent.topo").unwrap();
    let status = unsafe { ikb_simulate(missing.as_ptr(), sc.as_ptr(), &mut frac, &mut fakes) };
    assert_eq!(status, IkbStatus::Io);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ikb_ndn.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build script");
    for f in ["ikb_forwarder_handle", "ikb_sign_content", "ikb_last_error", "IKB_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"ikb_ndn.h\"\nint main(void) { IkbBuffer b = {0}; ikb_buffer_free(&b); return IKB_STATUS_OK; }\n",
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => eprintln!("skipping C compile check: {cc}: {e}"),
    }
}
