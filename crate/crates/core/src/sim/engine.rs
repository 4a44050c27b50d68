use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashSet, VecDeque};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crypto::{key_digest, keygen, sign_content, verify_content, KeyPair, PublicKey, Signature};
use crate::forwarder::{FaceId, Forwarder, ForwarderConfig, VerificationMode, VerificationPolicy};
use crate::model::{content_digest, interest_matches, ContentObject, ContentType, Digest, Interest, Name, Packet, UnsignedContent};
use crate::time::Timestamp;
use crate::trust::{
    build_catalog, issue_certificate, kns_query_name, kns_resolve_response, verify_catalog, BootstrapSession,
    BootstrapStep, KeyNameService, TrustAnchorStore, DEFAULT_MAX_CHAIN_DEPTH,
};

use super::metrics::{ConsumerRecord, Metrics, OccupancySample, Outcome, RouterRecord};
use super::scenario::{BootstrapMethod, Mode, Scenario};
use super::topology::{AdversaryRole, NodeId, NodeKind, Service, Topology};
use super::SimError;

const TARGET_PAYLOAD_LEN: usize = 1024;
const TARGET_FRESHNESS: u64 = 3600;

fn face(n: NodeId) -> FaceId {
    FaceId(n as u32)
}

fn node_of(f: FaceId) -> NodeId {
    f.0 as NodeId
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceKind {
    Interest { from: NodeId, name: Name, excluded: usize },
    Content { from: NodeId, digest: Option<Digest> },
    ConsumerStart,
    ConsumerTimer,
    Sample,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: Timestamp,
    pub node: NodeId,
    pub kind: TraceKind,
}

/// Event log plus the ground truth needed to interpret it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    /// Every fake created, in creation order (pre-population first).
    pub fakes: Vec<Digest>,
    pub genuine: Digest,
}

#[derive(Debug)]
enum EventKind {
    Deliver { to: NodeId, from: NodeId, packet: Packet },
    ConsumerStart(usize),
    ConsumerTimer { consumer: usize, generation: u64 },
    Sample,
}

#[derive(Debug)]
struct Event {
    time: Timestamp,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed: BinaryHeap is a max-heap and we want the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

enum Phase {
    Bootstrap(Box<BootstrapSession>, Interest),
    Kns,
    Catalog,
    Target,
    Done,
    Failed,
}

struct Consumer {
    node: NodeId,
    router: NodeId,
    phase: Phase,
    exclude: VecDeque<Digest>,
    outstanding: bool,
    generation: u64,
    producer_key: Option<PublicKey>,
    scn: Option<Name>,
    record: ConsumerRecord,
}

/// Builds the adversary's fake versions of the target.
struct FakeFactory {
    target: Name,
    mode: Mode,
    adversary: KeyPair,
    genuine_ppkd: Digest,
    genuine_key: PublicKey,
    made: u64,
}

impl FakeFactory {
    fn make(&mut self) -> ContentObject {
        let i = self.made;
        self.made += 1;
        let payload = format!("fake-{i}").into_bytes();
        let forged = UnsignedContent::new(self.target.clone(), payload, ContentType::Data, u64::MAX, self.adversary.public_key());
        let signed = sign_content(forged, &self.adversary).expect("adversary signs its own key");
        if !self.mode.is_ikb() {
            return signed;
        }
        if i.is_multiple_of(2) {
            // Claims the genuine key digest but carries the adversary's key.
            let mut c = signed;
            c.ppkd = self.genuine_ppkd;
            c
        } else {
            // Carries the genuine key with a signature it cannot produce.
            let mut c = signed;
            c.key_locator = self.genuine_key.clone();
            c.ppkd = self.genuine_ppkd;
            let mut sig = vec![0x01];
            sig.extend((0..64u64).map(|j| (i.wrapping_mul(31).wrapping_add(j * 7) & 0xff) as u8));
            c.signature = Signature::from_bytes(&sig);
            c
        }
    }
}

struct Victim {
    router: NodeId,
    adv_consumer: Option<NodeId>,
    adv_producer: Option<NodeId>,
}

enum NodeState {
    Router(Box<Forwarder>),
    Consumer(usize),
    Producer(Vec<ContentObject>),
    Kns(Box<KeyNameService>),
    Inert,
}

struct Engine<'a> {
    topo: &'a Topology,
    sc: &'a Scenario,
    now: Timestamp,
    seq: u64,
    queue: BinaryHeap<Event>,
    nodes: Vec<NodeState>,
    consumers: Vec<Consumer>,
    victims: Vec<Victim>,
    fakes: FakeFactory,
    fake_set: HashSet<Digest>,
    genuine_digest: Digest,
    root_key: PublicKey,
    kns_key: Option<PublicKey>,
    occupancy: Vec<OccupancySample>,
    events: u64,
    trace: Option<Trace>,
}

fn policy_for(topo: &Topology, sc: &Scenario, id: NodeId) -> Result<VerificationPolicy, SimError> {
    let n = topo.node(id);
    let mode = sc.router_policy.or(n.policy).unwrap_or(if sc.mode.is_ikb() {
        VerificationMode::IkbFull
    } else {
        VerificationMode::None
    });
    VerificationPolicy::new(mode, n.edge).map_err(|e| SimError::Scenario(format!("node {}: {e}", n.id)))
}

impl<'a> Engine<'a> {
    fn new(topo: &'a Topology, sc: &'a Scenario, tracing: bool) -> Result<Self, SimError> {
        sc.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(sc.rng_seed);
        let root = keygen(Some(rng.gen()));
        let producer = keygen(Some(rng.gen()));
        let adversary = keygen(Some(rng.gen()));
        let kns_pair = keygen(Some(rng.gen()));

        let producer_node = topo
            .producer_for(&sc.target)
            .ok_or_else(|| SimError::Topology(format!("no route to a producer of {}", sc.target)))?;

        let mut payload = vec![0u8; TARGET_PAYLOAD_LEN];
        rng.fill(payload.as_mut_slice());
        let genuine = sign_content(
            UnsignedContent::new(sc.target.clone(), payload, ContentType::Data, TARGET_FRESHNESS, producer.public_key()),
            &producer,
        )
        .map_err(|e| SimError::Scenario(e.to_string()))?;
        let genuine_digest = content_digest(&genuine).map_err(|e| SimError::Scenario(e.to_string()))?;
        let cert = issue_certificate(
            &sc.producer_prefix,
            producer.public_key(),
            std::slice::from_ref(&sc.producer_prefix),
            &root,
        )
        .map_err(|e| SimError::Scenario(e.to_string()))?;
        let catalog = build_catalog(std::slice::from_ref(&genuine), &producer, sc.catalog, &sc.catalog_name())
            .map_err(|e| SimError::Scenario(e.to_string()))?;

        let fibs = topo.compute_fibs();
        let mut nodes = Vec::with_capacity(topo.nodes().len());
        let mut consumers = Vec::new();
        let mut kns_key = None;
        for (id, n) in topo.nodes().iter().enumerate() {
            let state = match n.kind {
                NodeKind::Router => {
                    let capacity = if n.edge && !sc.edge_cache_enabled { 0 } else { n.cache_capacity };
                    let mut f = Forwarder::new(ForwarderConfig {
                        cache_capacity: capacity,
                        pit_lifetime: sc.pit_lifetime(),
                        policy: policy_for(topo, sc, id)?,
                        rng_seed: sc.rng_seed ^ ((id as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                    });
                    for (prefix, faces) in fibs.get(&id).into_iter().flatten() {
                        f.add_route(prefix, faces.clone());
                    }
                    NodeState::Router(Box::new(f))
                }
                NodeKind::Consumer => {
                    let router = topo
                        .attachment(id)
                        .ok_or_else(|| SimError::Topology(format!("consumer {} is not attached to a router", n.id)))?;
                    consumers.push(Consumer {
                        node: id,
                        router,
                        phase: Phase::Done,
                        exclude: VecDeque::new(),
                        outstanding: false,
                        generation: 0,
                        producer_key: None,
                        scn: None,
                        record: ConsumerRecord {
                            node: n.id.clone(),
                            first_valid: None,
                            interests_sent: 0,
                            fakes_received: 0,
                            unsolicited: 0,
                            bootstrap_failed: false,
                            outcomes: Vec::new(),
                        },
                    });
                    NodeState::Consumer(consumers.len() - 1)
                }
                NodeKind::Producer if n.service == Some(Service::Kns) => {
                    let mut kns = KeyNameService::new(kns_pair.clone());
                    kns.register(&sc.producer_prefix, producer.public_key())
                        .map_err(|e| SimError::Scenario(e.to_string()))?;
                    kns_key = Some(kns.public_key().clone());
                    NodeState::Kns(Box::new(kns))
                }
                NodeKind::Producer if id == producer_node => {
                    NodeState::Producer(vec![cert.clone(), catalog.clone(), genuine.clone()])
                }
                NodeKind::Producer => NodeState::Producer(Vec::new()),
                NodeKind::Adversary => NodeState::Inert,
            };
            nodes.push(state);
        }
        if sc.mode.is_ikb() && sc.bootstrap == BootstrapMethod::Kns && kns_key.is_none() {
            return Err(SimError::Scenario("bootstrap = \"kns\" needs a node with service = \"kns\"".into()));
        }

        let mut victims: Vec<Victim> = Vec::new();
        for (id, n) in topo.nodes().iter().enumerate() {
            if n.kind != NodeKind::Adversary {
                continue;
            }
            let Some(router) = topo.attachment(id) else {
                return Err(SimError::Topology(format!("adversary {} is not attached to a router", n.id)));
            };
            let pos = match victims.iter().position(|v| v.router == router) {
                Some(p) => p,
                None => {
                    victims.push(Victim {
                        router,
                        adv_consumer: None,
                        adv_producer: None,
                    });
                    victims.len() - 1
                }
            };
            match n.role {
                Some(AdversaryRole::Consumer) => victims[pos].adv_consumer.get_or_insert(id),
                _ => victims[pos].adv_producer.get_or_insert(id),
            };
        }
        victims.sort_by_key(|v| v.router);

        let mut engine = Engine {
            topo,
            sc,
            now: Timestamp::ZERO,
            seq: 0,
            queue: BinaryHeap::new(),
            nodes,
            consumers,
            victims,
            fakes: FakeFactory {
                target: sc.target.clone(),
                mode: sc.mode,
                adversary,
                genuine_ppkd: key_digest(producer.public_key()),
                genuine_key: producer.public_key().clone(),
                made: 0,
            },
            fake_set: HashSet::new(),
            genuine_digest,
            root_key: root.public_key().clone(),
            kns_key,
            occupancy: Vec::new(),
            events: 0,
            trace: tracing.then(Trace::default),
        };
        let window = Duration::from_micros(crate::time::secs_to_micros(sc.consumer_start_window_s));
        for i in 0..engine.consumers.len() {
            let jitter = if window.is_zero() {
                0
            } else {
                rng.gen_range(0..window.as_micros() as u64)
            };
            engine.schedule(Timestamp(jitter), EventKind::ConsumerStart(i));
        }
        let step = sc.sample_step();
        let horizon = sc.horizon();
        let mut t = Timestamp::ZERO;
        loop {
            engine.schedule(t, EventKind::Sample);
            let next = t + step;
            if next >= horizon {
                if t < horizon {
                    engine.schedule(horizon, EventKind::Sample);
                }
                break;
            }
            t = next;
        }
        Ok(engine)
    }

    fn schedule(&mut self, time: Timestamp, kind: EventKind) {
        self.seq += 1;
        self.queue.push(Event {
            time,
            seq: self.seq,
            kind,
        });
    }

    fn send(&mut self, from: NodeId, to: NodeId, packet: Packet, extra: Duration) {
        let latency = self.topo.latency(from, to).expect("packets only travel over links");
        self.schedule(self.now + latency + extra, EventKind::Deliver { to, from, packet });
    }

    fn new_fake(&mut self) -> ContentObject {
        let c = self.fakes.make();
        if let Ok(d) = content_digest(&c) {
            self.fake_set.insert(d);
            if let Some(t) = &mut self.trace {
                t.fakes.push(d);
            }
        }
        c
    }

    fn router_mut(&mut self, id: NodeId) -> &mut Forwarder {
        match &mut self.nodes[id] {
            NodeState::Router(f) => f,
            _ => unreachable!("node {id} is not a router"),
        }
    }

    /// Each victim's adversary pair opens a PIT entry and answers it with a
    /// fake, once per fake. The fake set is shared by all victims.
    fn prepopulate(&mut self) {
        let k = self.sc.fake_count();
        let fakes: Vec<ContentObject> = (0..k).map(|_| self.new_fake()).collect();
        let digests: Vec<Digest> = fakes.iter().filter_map(|f| content_digest(f).ok()).collect();
        let target = self.sc.target.clone();
        let scn = target.clone().with_implicit_digest(self.genuine_digest);
        let mode = self.sc.mode;
        let ppkd = self.fakes.genuine_ppkd;
        let victims: Vec<(NodeId, NodeId, NodeId)> = self
            .victims
            .iter()
            .filter_map(|v| Some((v.router, v.adv_consumer?, v.adv_producer?)))
            .collect();
        for (router, crm, pm) in victims {
            let f = self.router_mut(router);
            for (i, fake) in fakes.iter().enumerate() {
                let interest = match mode {
                    Mode::BaselineExclusion => Interest::new(target.clone()),
                    Mode::IkbPpkd => Interest::new(target.clone()).with_ppkd(ppkd),
                    Mode::IkbScnCatalog if i % 2 == 0 => Interest::new(scn.clone()),
                    Mode::IkbScnCatalog => Interest::new(target.clone()).with_ppkd(ppkd),
                }
                .with_exclude(digests[..i].iter().copied());
                f.handle_interest(face(crm), interest, Timestamp::ZERO);
                f.handle_content(face(pm), fake.clone(), Timestamp::ZERO);
            }
            f.clear_pit();
        }
    }

    fn run(mut self) -> (Metrics, Option<Trace>) {
        self.prepopulate();
        let horizon = self.sc.horizon();
        while let Some(ev) = self.queue.pop() {
            if ev.time > horizon {
                break;
            }
            self.now = ev.time;
            self.events += 1;
            self.dispatch(ev.kind);
        }
        self.finish()
    }

    fn record(&mut self, node: NodeId, kind: TraceKind) {
        if let Some(t) = &mut self.trace {
            t.events.push(TraceEvent {
                time: self.now,
                node,
                kind,
            });
        }
    }

    fn dispatch(&mut self, kind: EventKind) {
        match kind {
            EventKind::Deliver { to, from, packet } => {
                if self.trace.is_some() {
                    let k = match &packet {
                        Packet::Interest(i) => TraceKind::Interest {
                            from,
                            name: i.name.clone(),
                            excluded: i.exclude.len(),
                        },
                        Packet::Content(c) => TraceKind::Content {
                            from,
                            digest: content_digest(c).ok(),
                        },
                    };
                    self.record(to, k);
                }
                enum Handler {
                    Router,
                    Consumer(usize),
                    Reply(Option<ContentObject>),
                }
                let handler = match (&self.nodes[to], &packet) {
                    (NodeState::Router(_), _) => Handler::Router,
                    (NodeState::Consumer(i), _) => Handler::Consumer(*i),
                    (NodeState::Producer(objects), Packet::Interest(interest)) => {
                        Handler::Reply(objects.iter().find(|o| interest_matches(interest, o)).cloned())
                    }
                    (NodeState::Kns(kns), Packet::Interest(interest)) => {
                        Handler::Reply(kns.respond(&interest.name).filter(|c| interest_matches(interest, c)))
                    }
                    _ => Handler::Reply(None),
                };
                match handler {
                    Handler::Router => self.at_router(to, from, packet),
                    Handler::Consumer(i) => {
                        if let Packet::Content(c) = packet {
                            self.at_consumer(i, c);
                        }
                    }
                    Handler::Reply(Some(c)) => self.send(to, from, Packet::Content(c), Duration::ZERO),
                    Handler::Reply(None) => {}
                }
            }
            EventKind::ConsumerStart(i) => {
                let node = self.consumers[i].node;
                self.record(node, TraceKind::ConsumerStart);
                self.start_consumer(i);
            }
            EventKind::ConsumerTimer { consumer, generation } => {
                let c = &mut self.consumers[consumer];
                if c.generation != generation || matches!(c.phase, Phase::Done | Phase::Failed) {
                    return;
                }
                let node = c.node;
                if c.outstanding {
                    c.outstanding = false;
                    if matches!(c.phase, Phase::Target) {
                        c.record.outcomes.push(Outcome::Timeout);
                    }
                }
                self.record(node, TraceKind::ConsumerTimer);
                self.issue(consumer);
            }
            EventKind::Sample => {
                self.record(usize::MAX, TraceKind::Sample);
                self.sample();
            }
        }
    }

    fn at_router(&mut self, id: NodeId, from: NodeId, packet: Packet) {
        let now = self.now;
        let verify_cost = Duration::from_micros(self.sc.verify_cost_us);
        let f = self.router_mut(id);
        f.pit_sweep(now);
        let actions = match packet {
            Packet::Interest(i) => f.handle_interest(face(from), i, now),
            Packet::Content(c) => f.handle_content(face(from), c, now),
        };
        let delay = verify_cost * actions.signature_verifications;
        let target = &self.sc.target;
        let tapped = self.sc.replenish_enabled()
            && actions
                .forwarded_interests
                .iter()
                .any(|(_, i)| i.name.components() == target.components());
        for (out, interest) in actions.forwarded_interests {
            self.send(id, node_of(out), Packet::Interest(interest), delay);
        }
        for (out, content) in actions.delivered_contents {
            self.send(id, node_of(out), Packet::Content(content), delay);
        }
        if tapped {
            let pm = self.victims.iter().find(|v| v.router == id).and_then(|v| v.adv_producer);
            if let Some(pm) = pm {
                let fake = self.new_fake();
                self.send(pm, id, Packet::Content(fake), Duration::ZERO);
            }
        }
    }

    fn start_consumer(&mut self, i: usize) {
        let sc = self.sc;
        let phase = match sc.mode {
            Mode::BaselineExclusion => {
                // Baseline consumers know the producer key out of band and
                // check it themselves.
                self.consumers[i].producer_key = Some(self.fakes.genuine_key.clone());
                Phase::Target
            }
            _ => match (sc.bootstrap, &self.kns_key) {
                (BootstrapMethod::Kns, Some(_)) => Phase::Kns,
                _ => {
                    let anchors = TrustAnchorStore::single(self.root_key.clone(), sc.anchor_prefix.clone());
                    let mut s = BootstrapSession::new(&sc.producer_prefix, &anchors, DEFAULT_MAX_CHAIN_DEPTH);
                    match s.start() {
                        BootstrapStep::Fetch(interest) => Phase::Bootstrap(Box::new(s), interest),
                        BootstrapStep::Resolved(k) => {
                            self.consumers[i].producer_key = Some(k);
                            self.after_key_phase()
                        }
                        BootstrapStep::Failed(_) => {
                            self.consumers[i].record.bootstrap_failed = true;
                            Phase::Failed
                        }
                    }
                }
            },
        };
        self.consumers[i].phase = phase;
        self.issue(i);
    }

    fn after_key_phase(&self) -> Phase {
        match self.sc.mode {
            Mode::IkbScnCatalog => Phase::Catalog,
            _ => Phase::Target,
        }
    }

    fn request_for(&self, c: &Consumer) -> Option<Interest> {
        let sc = self.sc;
        let exclude = c.exclude.iter().copied();
        let ppkd = c.producer_key.as_ref().map(key_digest);
        Some(match &c.phase {
            Phase::Bootstrap(_, i) => i.clone(),
            Phase::Kns => Interest::new(kns_query_name(&sc.producer_prefix).ok()?).with_ppkd(key_digest(self.kns_key.as_ref()?)),
            Phase::Catalog => Interest::new(sc.catalog_name()).with_ppkd(ppkd?).with_exclude(exclude),
            Phase::Target => match (sc.mode, &c.scn) {
                (Mode::BaselineExclusion, _) => Interest::new(sc.target.clone()).with_exclude(exclude),
                (Mode::IkbScnCatalog, Some(scn)) => Interest::new(scn.clone()),
                _ => Interest::new(sc.target.clone()).with_ppkd(ppkd?).with_exclude(exclude),
            },
            Phase::Done | Phase::Failed => return None,
        })
    }

    /// Sends the consumer's current request and arms its timeout.
    fn issue(&mut self, i: usize) {
        let Some(interest) = self.request_for(&self.consumers[i]) else {
            return;
        };
        let timeout = self.sc.interest_timeout();
        let c = &mut self.consumers[i];
        c.outstanding = true;
        c.generation += 1;
        c.record.interests_sent += 1;
        let (node, router, generation) = (c.node, c.router, c.generation);
        self.send(node, router, Packet::Interest(interest), Duration::ZERO);
        self.schedule(self.now + timeout, EventKind::ConsumerTimer { consumer: i, generation });
    }

    fn retry_later(&mut self, i: usize) {
        let c = &mut self.consumers[i];
        c.generation += 1;
        let generation = c.generation;
        let at = self.now + self.sc.retry_interval();
        self.schedule(at, EventKind::ConsumerTimer { consumer: i, generation });
    }

    fn exclude(&mut self, i: usize, d: Digest) {
        let cap = self.sc.exclude_cap;
        let c = &mut self.consumers[i];
        if !c.exclude.contains(&d) {
            c.exclude.push_back(d);
            while c.exclude.len() > cap {
                c.exclude.pop_front();
            }
        }
    }

    fn at_consumer(&mut self, i: usize, content: ContentObject) {
        let c = &mut self.consumers[i];
        if !c.outstanding {
            c.record.unsolicited += 1;
            return;
        }
        c.outstanding = false;
        c.generation += 1;
        let digest = content_digest(&content).ok();
        let phase = std::mem::replace(&mut c.phase, Phase::Failed);
        match phase {
            Phase::Bootstrap(mut session, _) => match session.on_response(Some(content)) {
                BootstrapStep::Fetch(next) => {
                    self.consumers[i].phase = Phase::Bootstrap(session, next);
                    self.issue(i);
                }
                BootstrapStep::Resolved(k) => {
                    self.consumers[i].producer_key = Some(k);
                    self.consumers[i].phase = self.after_key_phase();
                    self.issue(i);
                }
                BootstrapStep::Failed(_) => self.consumers[i].record.bootstrap_failed = true,
            },
            Phase::Kns => {
                let kns_key = self.kns_key.clone().expect("kns phase requires a service key");
                match kns_resolve_response(&content, &kns_key, &self.sc.producer_prefix) {
                    Ok(k) => {
                        self.consumers[i].producer_key = Some(k);
                        self.consumers[i].phase = self.after_key_phase();
                        self.issue(i);
                    }
                    Err(_) => self.consumers[i].record.bootstrap_failed = true,
                }
            }
            Phase::Catalog => {
                let key = self.consumers[i].producer_key.clone().expect("catalog phase follows key resolution");
                let entry = verify_catalog(&content, &key).ok().and_then(|cat| cat.lookup(&self.sc.target));
                match entry {
                    Some(d) => {
                        let c = &mut self.consumers[i];
                        c.scn = Some(self.sc.target.clone().with_implicit_digest(d));
                        c.exclude.clear();
                        c.phase = Phase::Target;
                        self.issue(i);
                    }
                    None => {
                        self.consumers[i].phase = Phase::Catalog;
                        if let Some(d) = digest {
                            self.exclude(i, d);
                        }
                        self.retry_later(i);
                    }
                }
            }
            Phase::Target => {
                let c = &self.consumers[i];
                let key = c.producer_key.as_ref().expect("target phase has a key");
                let valid = content.name.components() == self.sc.target.components()
                    && key_digest(&content.key_locator) == key_digest(key)
                    && verify_content(&content, key)
                    && c.scn.as_ref().is_none_or(|s| s.implicit_digest() == digest.as_ref());
                let now = self.now;
                let c = &mut self.consumers[i];
                if valid {
                    c.record.outcomes.push(Outcome::Valid);
                    c.record.first_valid = Some(now);
                    c.phase = Phase::Done;
                } else {
                    c.phase = Phase::Target;
                    c.record.fakes_received += 1;
                    if let Some(d) = digest {
                        c.record.outcomes.push(Outcome::Fake(d));
                        self.exclude(i, d);
                    }
                    self.retry_later(i);
                }
            }
            Phase::Done => {
                let c = &mut self.consumers[i];
                c.phase = Phase::Done;
                c.record.unsolicited += 1;
            }
            Phase::Failed => {}
        }
    }

    fn sample(&mut self) {
        let now = self.now;
        let (mut fake, mut valid) = (0, 0);
        for n in &self.nodes {
            if let NodeState::Router(f) = n {
                for e in f.content_store().iter().filter(|e| now < e.expires_at) {
                    if self.fake_set.contains(&e.digest) {
                        fake += 1;
                    } else {
                        valid += 1;
                    }
                }
            }
        }
        self.occupancy.push(OccupancySample { t: now, fake, valid });
    }

    fn finish(self) -> (Metrics, Option<Trace>) {
        let victims: BTreeSet<NodeId> = self.victims.iter().map(|v| v.router).collect();
        let routers = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(id, n)| match n {
                NodeState::Router(f) => Some(RouterRecord {
                    node: self.topo.node(id).id.clone(),
                    edge: self.topo.node(id).edge,
                    victim: victims.contains(&id),
                    stats: *f.stats(),
                }),
                _ => None,
            })
            .collect();
        let metrics = Metrics {
            mode: self.sc.mode,
            fcp: self.sc.fcp,
            seed: self.sc.rng_seed,
            horizon: self.sc.horizon(),
            fake_count: self.sc.fake_count(),
            consumers: self.consumers.into_iter().map(|c| c.record).collect(),
            routers,
            occupancy: self.occupancy,
            fakes_injected: self.fakes.made,
            events: self.events,
        };
        let trace = self.trace.map(|mut t| {
            t.genuine = self.genuine_digest;
            t
        });
        (metrics, trace)
    }
}

/// Runs the scenario to its horizon.
pub fn run(topology: &Topology, scenario: &Scenario) -> Result<Metrics, SimError> {
    Ok(Engine::new(topology, scenario, false)?.run().0)
}

/// Like [`run`], also returning the full event trace.
pub fn run_traced(topology: &Topology, scenario: &Scenario) -> Result<(Metrics, Trace), SimError> {
    let (m, t) = Engine::new(topology, scenario, true)?.run();
    Ok((m, t.expect("tracing enabled")))
}
