use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::forwarder::{FaceId, VerificationMode};
use crate::model::Name;

use super::SimError;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Router,
    Consumer,
    Producer,
    Adversary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryRole {
    /// Issues the interests that open PIT entries at the victim.
    Consumer,
    /// Answers them with fakes.
    Producer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Service {
    /// Key name service.
    Kns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default)]
    pub cache_capacity: usize,
    /// Consumer-facing edge router.
    #[serde(default)]
    pub edge: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<VerificationMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<AdversaryRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service: Option<Service>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkSpec {
    a: String,
    b: String,
    latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteSpec {
    prefix: Name,
    producer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    #[serde(rename = "node")]
    nodes: Vec<Node>,
    #[serde(rename = "link", default)]
    links: Vec<LinkSpec>,
    #[serde(rename = "route", default)]
    routes: Vec<RouteSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub latency: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub prefix: Name,
    pub producer: NodeId,
}

/// A validated network: nodes, symmetric links and the producer routes from
/// which router FIBs are derived.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    routes: Vec<Route>,
    adjacency: Vec<Vec<(NodeId, Duration)>>,
}

fn face(n: NodeId) -> FaceId {
    FaceId(n as u32)
}

impl Topology {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let file: TopologyFile = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        Self::build(file)
    }

    fn build(file: TopologyFile) -> Result<Self, SimError> {
        if file.nodes.is_empty() {
            return Err(SimError::Topology("no nodes".into()));
        }
        let mut index = HashMap::new();
        for (i, n) in file.nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(SimError::Topology(format!("duplicate node id {}", n.id)));
            }
            if n.kind == NodeKind::Adversary && n.role.is_none() {
                return Err(SimError::Topology(format!("adversary {} needs a role", n.id)));
            }
            if n.kind != NodeKind::Adversary && n.role.is_some() {
                return Err(SimError::Topology(format!("node {} is not an adversary but has a role", n.id)));
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| SimError::Topology(format!("unknown node {id}")))
        };
        let mut links = Vec::new();
        let mut adjacency = vec![Vec::new(); file.nodes.len()];
        for l in &file.links {
            let (a, b) = (lookup(&l.a)?, lookup(&l.b)?);
            if a == b {
                return Err(SimError::Topology(format!("self-loop at {}", l.a)));
            }
            if !(l.latency_ms.is_finite() && l.latency_ms > 0.0) {
                return Err(SimError::Topology(format!("link {}-{} latency must be positive", l.a, l.b)));
            }
            if adjacency[a].iter().any(|(n, _)| *n == b) {
                return Err(SimError::Topology(format!("duplicate link {}-{}", l.a, l.b)));
            }
            let latency = Duration::from_micros((l.latency_ms * 1000.0).round() as u64);
            links.push(Link { a, b, latency });
            adjacency[a].push((b, latency));
            adjacency[b].push((a, latency));
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        let mut routes = Vec::new();
        for r in &file.routes {
            let producer = lookup(&r.producer)?;
            if file.nodes[producer].kind != NodeKind::Producer {
                return Err(SimError::Topology(format!("route target {} is not a producer", r.producer)));
            }
            routes.push(Route {
                prefix: r.prefix.without_implicit_digest(),
                producer,
            });
        }
        let topo = Topology {
            nodes: file.nodes,
            links,
            routes,
            adjacency,
        };
        topo.check_connected()?;
        Ok(topo)
    }

    fn check_connected(&self) -> Result<(), SimError> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(SimError::Topology(format!("graph is disconnected: {} unreachable", self.nodes[i].id))),
            None => Ok(()),
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn index_of(&self, id: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Neighbours sorted by id, with link latency.
    pub fn neighbours(&self, id: NodeId) -> &[(NodeId, Duration)] {
        &self.adjacency[id]
    }

    pub fn latency(&self, a: NodeId, b: NodeId) -> Option<Duration> {
        self.adjacency[a].iter().find(|(n, _)| *n == b).map(|(_, l)| *l)
    }

    /// The router a host is attached to (its lowest-id router neighbour).
    pub fn attachment(&self, host: NodeId) -> Option<NodeId> {
        self.adjacency[host]
            .iter()
            .map(|(n, _)| *n)
            .find(|n| self.nodes[*n].kind == NodeKind::Router)
    }

    /// Producer serving the longest route prefix of `name`.
    pub fn producer_for(&self, name: &Name) -> Option<NodeId> {
        self.routes
            .iter()
            .filter(|r| r.prefix.is_prefix_of(name))
            .max_by_key(|r| r.prefix.len())
            .map(|r| r.producer)
    }

    /// Hop distances from `src`, expanding only through routers.
    fn hop_distances(&self, src: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            if u != src && self.nodes[u].kind != NodeKind::Router {
                continue;
            }
            let d = dist[u].expect("queued nodes have a distance");
            for &(v, _) in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Static shortest-path FIBs by hop count: for every router, each route
    /// prefix maps to the neighbour one hop closer to the nearest producer
    /// of that prefix. Ties go to the lower node id.
    pub fn compute_fibs(&self) -> BTreeMap<NodeId, Vec<(Name, Vec<FaceId>)>> {
        let mut by_prefix: BTreeMap<Name, Vec<NodeId>> = BTreeMap::new();
        for r in &self.routes {
            by_prefix.entry(r.prefix.clone()).or_default().push(r.producer);
        }
        let mut fibs: BTreeMap<NodeId, Vec<(Name, Vec<FaceId>)>> = BTreeMap::new();
        for (prefix, producers) in by_prefix {
            let tables: Vec<Vec<Option<usize>>> = producers.iter().map(|p| self.hop_distances(*p)).collect();
            for u in 0..self.nodes.len() {
                if self.nodes[u].kind != NodeKind::Router {
                    continue;
                }
                let best = tables
                    .iter()
                    .enumerate()
                    .filter_map(|(i, t)| t[u].map(|d| (d, producers[i], i)))
                    .min();
                let Some((d, _, ti)) = best else { continue };
                let next = self.adjacency[u]
                    .iter()
                    .map(|(v, _)| *v)
                    .find(|v| tables[ti][*v] == Some(d - 1) && (self.nodes[*v].kind == NodeKind::Router || *v == producers[ti]));
                if let Some(v) = next {
                    fibs.entry(u).or_default().push((prefix.clone(), vec![face(v)]));
                }
            }
        }
        fibs
    }
}

pub fn load_topology(path: &Path) -> Result<Topology, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(path.display().to_string(), e.to_string()))?;
    Topology::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"
[[node]]
id = "c"
kind = "consumer"
[[node]]
id = "r"
kind = "router"
cache_capacity = 10
[[node]]
id = "p"
kind = "producer"
[[link]]
a = "c"
b = "r"
latency_ms = 5
[[link]]
a = "r"
b = "p"
latency_ms = 10
[[route]]
prefix = "/x"
producer = "p"
"#;

    #[test]
    fn line_fib_points_at_producer() {
        let t = Topology::from_toml_str(LINE).unwrap();
        let fibs = t.compute_fibs();
        let r = t.index_of("r").unwrap();
        let p = t.index_of("p").unwrap();
        assert_eq!(fibs[&r], vec![("/x".parse().unwrap(), vec![face(p)])]);
        assert_eq!(t.latency(r, p), Some(Duration::from_millis(10)));
        assert_eq!(t.attachment(t.index_of("c").unwrap()), Some(r));
    }

    #[test]
    fn dangling_link_rejected() {
        let bad = LINE.replace("b = \"p\"", "b = \"q\"");
        assert!(matches!(Topology::from_toml_str(&bad), Err(SimError::Topology(_))));
    }

    #[test]
    fn disconnected_rejected() {
        let bad = format!("{LINE}\n[[node]]\nid = \"lonely\"\nkind = \"router\"\n");
        assert!(matches!(Topology::from_toml_str(&bad), Err(SimError::Topology(_))));
    }

    #[test]
    fn parse_errors_reported() {
        assert!(matches!(Topology::from_toml_str("[[node]]\nid = 3"), Err(SimError::Parse(_))));
    }
}
