use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::forwarder::{VerificationMode, VerificationPolicy};
use crate::model::Name;
use crate::time::{secs_to_micros, Timestamp};
use crate::trust::CatalogKind;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Plain NDN: consumers retry with growing exclude filters.
    BaselineExclusion,
    /// Consumers bootstrap the producer key and bind interests to it.
    IkbPpkd,
    /// Consumers fetch a signed catalog and request by self-certifying name.
    IkbScnCatalog,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::BaselineExclusion, Mode::IkbPpkd, Mode::IkbScnCatalog];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::BaselineExclusion => "baseline_exclusion",
            Mode::IkbPpkd => "ikb_ppkd",
            Mode::IkbScnCatalog => "ikb_scn_catalog",
        }
    }

    pub fn is_ikb(self) -> bool {
        self != Mode::BaselineExclusion
    }
}

impl std::str::FromStr for Mode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| SimError::Scenario(format!("unknown mode {s}")))
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapMethod {
    /// Walk certificates down from a pre-installed root key.
    #[default]
    Anchor,
    /// Ask the key name service, whose key is pre-installed.
    Kns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub mode: Mode,
    /// Fraction of fake objects among cached copies of the target.
    pub fcp: f64,
    /// Overrides the fake count derived from `fcp`.
    pub fake_count: Option<usize>,
    pub horizon_s: f64,
    pub retry_interval_s: f64,
    pub interest_timeout_s: f64,
    pub pit_lifetime_s: f64,
    pub rng_seed: u64,
    pub edge_cache_enabled: bool,
    /// Adversary answers upstream interests with fresh fakes. Defaults to on
    /// only for `fcp >= 0.999`.
    pub replenish: Option<bool>,
    /// Maximum digests a consumer keeps in its exclude filter (oldest dropped).
    pub exclude_cap: usize,
    /// Consumers start uniformly at random within this window.
    pub consumer_start_window_s: f64,
    pub sample_step_s: f64,
    /// Processing delay charged per signature verification.
    pub verify_cost_us: u64,
    /// Forces one policy on every router.
    pub router_policy: Option<VerificationMode>,
    pub bootstrap: BootstrapMethod,
    pub catalog: CatalogKind,
    pub target: Name,
    pub producer_prefix: Name,
    pub anchor_prefix: Name,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            mode: Mode::BaselineExclusion,
            fcp: 0.8,
            fake_count: None,
            horizon_s: 50.0,
            retry_interval_s: 1.0,
            interest_timeout_s: 4.0,
            pit_lifetime_s: 4.0,
            rng_seed: 1,
            edge_cache_enabled: false,
            replenish: None,
            exclude_cap: 1000,
            consumer_start_window_s: 1.0,
            sample_step_s: 1.0,
            verify_cost_us: 100,
            router_policy: None,
            bootstrap: BootstrapMethod::Anchor,
            catalog: CatalogKind::Merkle,
            target: "/dfn/target/video".parse().expect("static name"),
            producer_prefix: "/dfn/target".parse().expect("static name"),
            anchor_prefix: "/dfn".parse().expect("static name"),
        }
    }
}

fn positive(v: f64, what: &str) -> Result<(), SimError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SimError::Scenario(format!("{what} must be positive, got {v}")))
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let s: Scenario = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..1.0).contains(&self.fcp) {
            return Err(SimError::Scenario(format!("fcp must be in [0, 1), got {}", self.fcp)));
        }
        positive(self.horizon_s, "horizon_s")?;
        positive(self.retry_interval_s, "retry_interval_s")?;
        positive(self.interest_timeout_s, "interest_timeout_s")?;
        positive(self.pit_lifetime_s, "pit_lifetime_s")?;
        positive(self.sample_step_s, "sample_step_s")?;
        if !(self.consumer_start_window_s.is_finite() && self.consumer_start_window_s >= 0.0) {
            return Err(SimError::Scenario("consumer_start_window_s must be >= 0".into()));
        }
        if self.exclude_cap == 0 {
            return Err(SimError::Scenario("exclude_cap must be >= 1".into()));
        }
        if let Some(m) = self.router_policy {
            VerificationPolicy::new(m, false).map_err(|e| SimError::Scenario(e.to_string()))?;
        }
        if !self.producer_prefix.is_prefix_of(&self.target) || self.producer_prefix.len() >= self.target.len() {
            return Err(SimError::Scenario("target must lie strictly under producer_prefix".into()));
        }
        if !self.anchor_prefix.is_prefix_of(&self.producer_prefix) || self.anchor_prefix.len() >= self.producer_prefix.len() {
            return Err(SimError::Scenario("producer_prefix must lie strictly under anchor_prefix".into()));
        }
        Ok(())
    }

    /// Fakes per victim cache, `k = fcp / (1 - fcp)` rounded, so that one
    /// valid copy among them makes up the remaining fraction.
    pub fn fake_count(&self) -> usize {
        self.fake_count
            .unwrap_or_else(|| (self.fcp / (1.0 - self.fcp)).round() as usize)
    }

    pub fn replenish_enabled(&self) -> bool {
        self.replenish.unwrap_or(self.fcp >= 0.999)
    }

    pub fn horizon(&self) -> Timestamp {
        Timestamp(secs_to_micros(self.horizon_s))
    }

    pub fn retry_interval(&self) -> Duration {
        Duration::from_micros(secs_to_micros(self.retry_interval_s))
    }

    pub fn interest_timeout(&self) -> Duration {
        Duration::from_micros(secs_to_micros(self.interest_timeout_s))
    }

    pub fn pit_lifetime(&self) -> Duration {
        Duration::from_micros(secs_to_micros(self.pit_lifetime_s))
    }

    pub fn sample_step(&self) -> Duration {
        Duration::from_micros(secs_to_micros(self.sample_step_s))
    }

    pub fn catalog_name(&self) -> Name {
        self.producer_prefix.append("catalog").expect("producer prefix leaves room")
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(path.display().to_string(), e.to_string()))?;
    Scenario::from_toml_str(&text)
}
