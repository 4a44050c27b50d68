use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::crypto::{key_digest, sign_content, verify_content, KeyPair, PublicKey, Signature};
use crate::model::{interest_matches, ContentType, UnsignedContent};

const CONSUMER: FaceId = FaceId(1);
const UPSTREAM: FaceId = FaceId(9);

fn n(s: &str) -> Name {
    s.parse().unwrap()
}

fn signed(name: &str, payload: &[u8], kp: &KeyPair) -> ContentObject {
    let u = UnsignedContent::new(n(name), payload.to_vec(), ContentType::Data, 100, kp.public_key());
    sign_content(u, kp).unwrap()
}

fn router(policy: VerificationPolicy) -> Forwarder {
    let mut f = Forwarder::new(ForwarderConfig {
        cache_capacity: 16,
        policy,
        ..Default::default()
    });
    f.add_route(&n("/p"), vec![UPSTREAM]);
    f
}

fn counting(policy: VerificationPolicy) -> (Forwarder, Arc<AtomicU32>) {
    let calls = Arc::new(AtomicU32::new(0));
    let c = calls.clone();
    let verifier = move |obj: &ContentObject, key: &PublicKey| {
        c.fetch_add(1, Ordering::SeqCst);
        verify_content(obj, key)
    };
    let mut f = Forwarder::with_verifier(
        ForwarderConfig {
            cache_capacity: 16,
            policy,
            ..Default::default()
        },
        Box::new(verifier),
    );
    f.add_route(&n("/p"), vec![UPSTREAM]);
    (f, calls)
}

#[test]
fn cache_hit_leaves_pit_untouched() {
    let kp = KeyPair::from_seed([1; 32]);
    let mut f = router(VerificationPolicy::none());
    let t = Timestamp::ZERO;
    f.cache_insert(signed("/p/a", b"x", &kp), t);
    let a = f.handle_interest(CONSUMER, Interest::new(n("/p/a")), t);
    assert!(a.cache_hit);
    assert_eq!(a.delivered_contents.len(), 1);
    assert_eq!(a.delivered_contents[0].0, CONSUMER);
    assert!(a.forwarded_interests.is_empty());
    assert!(f.pit().is_empty());
}

#[test]
fn second_interest_is_collapsed() {
    let kp = KeyPair::from_seed([1; 32]);
    let mut f = router(VerificationPolicy::ikb_full());
    let i = Interest::new(n("/p/a")).with_ppkd(key_digest(kp.public_key()));
    let t = Timestamp::ZERO;
    assert_eq!(f.handle_interest(FaceId(1), i.clone(), t).forwarded_interests.len(), 1);
    let second = f.handle_interest(FaceId(2), i.clone(), t);
    assert!(second.forwarded_interests.is_empty());
    assert_eq!(f.pit().find_live(&i, t).unwrap().in_faces.len(), 2);
    assert_eq!(f.stats().collapsed_interests, 1);
}

#[test]
fn ppkd_mismatch_bypasses_cache() {
    let pk1 = KeyPair::from_seed([1; 32]);
    let pk2 = KeyPair::from_seed([2; 32]);
    let mut f = router(VerificationPolicy::none());
    let t = Timestamp::ZERO;
    let cached = signed("/p/a", b"x", &pk1);
    f.cache_insert(cached.clone(), t);
    let i = Interest::new(n("/p/a")).with_ppkd(key_digest(pk2.public_key()));
    assert!(!interest_matches(&i, &cached));
    let a = f.handle_interest(CONSUMER, i.clone(), t);
    assert!(a.delivered_contents.is_empty());
    assert_eq!(a.forwarded_interests, vec![(UPSTREAM, i)]);
}

#[test]
fn no_route_is_silent() {
    let mut f = router(VerificationPolicy::none());
    let a = f.handle_interest(CONSUMER, Interest::new(n("/q")), Timestamp::ZERO);
    assert_eq!(a, ForwarderActions::default());
    assert!(f.pit().is_empty());
    assert_eq!(f.stats().no_route, 1);
}

#[test]
fn interest_is_not_sent_back_on_arrival_face() {
    let mut f = router(VerificationPolicy::none());
    let a = f.handle_interest(UPSTREAM, Interest::new(n("/p/a")), Timestamp::ZERO);
    assert!(a.forwarded_interests.is_empty());
}

#[test]
fn unbound_interest_rejected_under_ikb() {
    let mut f = router(VerificationPolicy::ikb_full());
    let a = f.handle_interest(CONSUMER, Interest::new(n("/p/a")), Timestamp::ZERO);
    assert_eq!(a.dropped, Some(DropReason::UnboundInterest));
}

#[test]
fn unsolicited_content_dropped() {
    let kp = KeyPair::from_seed([1; 32]);
    let mut f = router(VerificationPolicy::none());
    let a = f.handle_content(UPSTREAM, signed("/p/a", b"x", &kp), Timestamp::ZERO);
    assert_eq!(a.dropped, Some(DropReason::Unsolicited));
    assert!(a.delivered_contents.is_empty());
    assert!(f.content_store().is_empty());
}

#[test]
fn key_mismatch_dropped_without_verification() {
    let producer = KeyPair::from_seed([1; 32]);
    let attacker = KeyPair::from_seed([2; 32]);
    let (mut f, calls) = counting(VerificationPolicy::ikb_full());
    let t = Timestamp::ZERO;
    let i = Interest::new(n("/p/a")).with_ppkd(key_digest(producer.public_key()));
    f.handle_interest(CONSUMER, i.clone(), t);
    // Genuine PPKD field, attacker's key in the locator.
    let mut fake = signed("/p/a", b"evil", &attacker);
    fake.ppkd = key_digest(producer.public_key());
    let a = f.handle_content(UPSTREAM, fake, t);
    assert_eq!(a.dropped, Some(DropReason::IkbKeyMismatch));
    assert_eq!(calls.load(Ordering::SeqCst), 0);
    assert!(f.content_store().is_empty());
    // The entry survives so the genuine object is still delivered.
    assert!(f.pit().find_live(&i, t).is_some());
    let ok = f.handle_content(UPSTREAM, signed("/p/a", b"good", &producer), t);
    assert_eq!(ok.delivered_contents.len(), 1);
    assert_eq!(calls.load(Ordering::SeqCst), 1);
    assert!(f.pit().is_empty());
}

#[test]
fn bad_signature_dropped() {
    let producer = KeyPair::from_seed([1; 32]);
    let mut f = router(VerificationPolicy::ikb_full());
    let t = Timestamp::ZERO;
    f.handle_interest(CONSUMER, Interest::new(n("/p/a")).with_ppkd(key_digest(producer.public_key())), t);
    let mut c = signed("/p/a", b"x", &producer);
    c.signature = Signature::zeroed();
    let a = f.handle_content(UPSTREAM, c, t);
    assert_eq!(a.dropped, Some(DropReason::IkbBadSignature));
    assert_eq!(a.signature_verifications, 1);
}

#[test]
fn scn_entry_accepts_garbage_signature_by_hash() {
    let kp = KeyPair::from_seed([1; 32]);
    let (mut f, calls) = counting(VerificationPolicy::ikb_full());
    let t = Timestamp::ZERO;
    let mut c = signed("/p/a", b"x", &kp);
    c.signature = Signature::from_bytes(&[0xAB; 65]);
    let scn = make_scn_for(&c);
    f.handle_interest(CONSUMER, Interest::new(scn), t);
    let a = f.handle_content(UPSTREAM, c.clone(), t);
    assert_eq!(a.dropped, None);
    assert_eq!(a.delivered_contents, vec![(CONSUMER, c.clone())]);
    assert_eq!(calls.load(Ordering::SeqCst), 0);
    let cached = f.content_store().iter().next().unwrap();
    assert_eq!(cached.content, c);
    assert!(!cached.signature_verified);
    // Never served to a key-bound request, which would need a valid signature.
    let keyed = Interest::new(n("/p/a")).with_ppkd(c.ppkd);
    assert!(f.handle_interest(FaceId(3), keyed, t).delivered_contents.is_empty());
}

fn make_scn_for(c: &ContentObject) -> Name {
    crate::model::make_scn(&c.name, c).unwrap()
}

#[test]
fn scn_digest_mismatch_dropped() {
    let kp = KeyPair::from_seed([1; 32]);
    let mut f = router(VerificationPolicy::ikb_full());
    let t = Timestamp::ZERO;
    let wanted = signed("/p/a", b"x", &kp);
    f.handle_interest(CONSUMER, Interest::new(make_scn_for(&wanted)), t);
    let a = f.handle_content(UPSTREAM, signed("/p/a", b"y", &kp), t);
    assert_eq!(a.dropped, Some(DropReason::ScnDigestMismatch));
}

#[test]
fn excluded_digest_dropped() {
    let kp = KeyPair::from_seed([1; 32]);
    let mut f = router(VerificationPolicy::none());
    let t = Timestamp::ZERO;
    let c = signed("/p/a", b"x", &kp);
    let d = content_digest(&c).unwrap();
    f.handle_interest(CONSUMER, Interest::new(n("/p/a")).with_exclude([d]), t);
    assert_eq!(f.handle_content(UPSTREAM, c, t).dropped, Some(DropReason::ExcludeMatch));
}

#[test]
fn policy_none_never_verifies() {
    let kp = KeyPair::from_seed([1; 32]);
    let attacker = KeyPair::from_seed([2; 32]);
    let (mut f, calls) = counting(VerificationPolicy::none());
    let t = Timestamp::ZERO;
    f.handle_interest(CONSUMER, Interest::new(n("/p/a")).with_ppkd(key_digest(kp.public_key())), t);
    let mut fake = signed("/p/a", b"evil", &attacker);
    fake.ppkd = key_digest(kp.public_key());
    let a = f.handle_content(UPSTREAM, fake, t);
    assert_eq!(a.delivered_contents.len(), 1);
    assert_eq!(calls.load(Ordering::SeqCst), 0);
}

#[test]
fn several_matching_entries_cost_one_verification() {
    let kp = KeyPair::from_seed([1; 32]);
    let (mut f, calls) = counting(VerificationPolicy::ikb_full());
    let t = Timestamp::ZERO;
    let ppkd = key_digest(kp.public_key());
    f.handle_interest(FaceId(1), Interest::new(n("/p")).with_ppkd(ppkd), t);
    f.handle_interest(FaceId(2), Interest::new(n("/p/a")).with_ppkd(ppkd), t);
    let a = f.handle_content(UPSTREAM, signed("/p/a", b"x", &kp), t);
    assert_eq!(calls.load(Ordering::SeqCst), 1);
    let faces: Vec<FaceId> = a.delivered_contents.iter().map(|(f, _)| *f).collect();
    assert_eq!(faces, vec![FaceId(1), FaceId(2)]);
    assert!(f.pit().is_empty());
}

#[test]
fn collapsed_interests_all_satisfied() {
    let kp = KeyPair::from_seed([1; 32]);
    let mut f = router(VerificationPolicy::ikb_full());
    let t = Timestamp::ZERO;
    let i = Interest::new(n("/p/a")).with_ppkd(key_digest(kp.public_key()));
    let forwards: usize = (0..5)
        .map(|k| f.handle_interest(FaceId(100 + k), i.clone(), t).forwarded_interests.len())
        .sum();
    assert_eq!(forwards, 1);
    let a = f.handle_content(UPSTREAM, signed("/p/a", b"x", &kp), t);
    assert_eq!(a.delivered_contents.len(), 5);
}

#[test]
fn poisoned_cache_serves_first_inserted() {
    let producer = KeyPair::from_seed([1; 32]);
    let attacker = KeyPair::from_seed([2; 32]);
    let mut f = router(VerificationPolicy::none());
    let t = Timestamp::ZERO;
    let fakes: Vec<ContentObject> = (0..4u8).map(|i| signed("/p/a", &[i], &attacker)).collect();
    for c in &fakes {
        f.cache_insert(c.clone(), t);
    }
    let valid = signed("/p/a", b"real", &producer);
    f.cache_insert(valid.clone(), t);
    let a = f.handle_interest(CONSUMER, Interest::new(n("/p/a")), t);
    assert_eq!(a.delivered_contents[0].1, fakes[0]);
    let excl = Interest::new(n("/p/a")).with_exclude(fakes.iter().map(|c| content_digest(c).unwrap()));
    let a = f.handle_interest(CONSUMER, excl, t);
    assert_eq!(a.delivered_contents[0].1, valid);
}

#[test]
fn probabilistic_zero_forwards_and_caches_unverified() {
    let kp = KeyPair::from_seed([1; 32]);
    let attacker = KeyPair::from_seed([2; 32]);
    let policy = VerificationPolicy::new(VerificationMode::IkbProbabilistic(0.0), false).unwrap();
    let mut f = router(policy);
    let t = Timestamp::ZERO;
    let ppkd = key_digest(kp.public_key());
    f.handle_interest(CONSUMER, Interest::new(n("/p/a")).with_ppkd(ppkd), t);
    let mut fake = signed("/p/a", b"evil", &attacker);
    fake.ppkd = ppkd;
    let a = f.handle_content(UPSTREAM, fake, t);
    assert_eq!(a.delivered_contents.len(), 1);
    assert_eq!(f.content_store().len(), 1);
}

#[test]
fn pit_entries_expire() {
    let mut f = router(VerificationPolicy::none());
    f.handle_interest(CONSUMER, Interest::new(n("/p/a")), Timestamp::ZERO);
    assert_eq!(f.pit_sweep(Timestamp::from_millis(3999)), 0);
    assert_eq!(f.pit_sweep(Timestamp::from_secs_f64(4.0)), 1);
}

#[derive(Debug, Clone)]
enum Forgery {
    Honest,
    WrongKey,
    GenuineKeyBadSig,
    FlippedPayload,
    GarbageSig,
}

fn forgery() -> impl Strategy<Value = Forgery> {
    prop_oneof![
        Just(Forgery::Honest),
        Just(Forgery::WrongKey),
        Just(Forgery::GenuineKeyBadSig),
        Just(Forgery::FlippedPayload),
        Just(Forgery::GarbageSig),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ikb_full_never_delivers_or_caches_forgeries(
        pit_names in prop::collection::vec(0u8..4, 1..4),
        objs in prop::collection::vec((0u8..4, forgery(), any::<u8>()), 1..6),
    ) {
        let producer = KeyPair::from_seed([1; 32]);
        let attacker = KeyPair::from_seed([2; 32]);
        let ppkd = key_digest(producer.public_key());
        let (mut f, calls) = counting(VerificationPolicy::ikb_full());
        let t = Timestamp::ZERO;
        for (i, k) in pit_names.iter().enumerate() {
            f.handle_interest(FaceId(i as u32 + 1), Interest::new(n(&format!("/p/{k}"))).with_ppkd(ppkd), t);
        }
        for (k, forge, b) in objs {
            let name = format!("/p/{k}");
            let c = match forge {
                Forgery::Honest => signed(&name, &[b], &producer),
                Forgery::WrongKey => {
                    let mut c = signed(&name, &[b], &attacker);
                    c.ppkd = ppkd;
                    c
                }
                Forgery::GenuineKeyBadSig => {
                    let mut c = signed(&name, &[b], &producer);
                    let mut s = c.signature.as_bytes().to_vec();
                    s[1 + (b as usize % 64)] ^= 0x40;
                    c.signature = Signature::from_bytes(&s);
                    c
                }
                Forgery::FlippedPayload => {
                    let mut c = signed(&name, &[b], &producer);
                    c.payload.push(b);
                    c
                }
                Forgery::GarbageSig => {
                    let mut c = signed(&name, &[b], &producer);
                    c.signature = Signature::from_bytes(&[b; 65]);
                    c
                }
            };
            let before = calls.load(Ordering::SeqCst);
            let a = f.handle_content(UPSTREAM, c, t);
            prop_assert!(calls.load(Ordering::SeqCst) - before <= 1);
            if a.dropped.is_some() {
                prop_assert!(a.delivered_contents.is_empty());
            }
            for (_, d) in &a.delivered_contents {
                prop_assert_eq!(key_digest(&d.key_locator), ppkd);
                prop_assert!(verify_content(d, &d.key_locator));
            }
        }
        for e in f.content_store().iter() {
            prop_assert_eq!(key_digest(&e.content.key_locator), ppkd);
            prop_assert!(verify_content(&e.content, &e.content.key_locator));
        }
    }
}
