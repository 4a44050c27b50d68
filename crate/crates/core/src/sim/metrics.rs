use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::forwarder::ForwarderStats;
use crate::model::Digest;
use crate::time::{secs_to_micros, Timestamp};

use super::scenario::Mode;

/// What one consumer interest for the target ended in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Valid,
    Fake(Digest),
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsumerRecord {
    pub node: String,
    pub first_valid: Option<Timestamp>,
    pub interests_sent: u64,
    pub fakes_received: u64,
    /// Content that arrived with no interest outstanding.
    pub unsolicited: u64,
    pub bootstrap_failed: bool,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RouterRecord {
    pub node: String,
    pub edge: bool,
    pub victim: bool,
    pub stats: ForwarderStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OccupancySample {
    pub t: Timestamp,
    /// Live cached fake objects, summed over routers.
    pub fake: u64,
    pub valid: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub mode: Mode,
    pub fcp: f64,
    pub seed: u64,
    pub horizon: Timestamp,
    pub fake_count: usize,
    pub consumers: Vec<ConsumerRecord>,
    pub routers: Vec<RouterRecord>,
    pub occupancy: Vec<OccupancySample>,
    pub fakes_injected: u64,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mode: Mode,
    pub fcp: f64,
    pub seed: u64,
    pub pct_retrieved: f64,
    pub p50_time: Option<f64>,
    pub p90_time: Option<f64>,
    pub drops_by_reason: BTreeMap<&'static str, u64>,
}

impl Metrics {
    pub fn retrieved(&self) -> usize {
        self.consumers.iter().filter(|c| c.first_valid.is_some()).count()
    }

    pub fn fraction_retrieved(&self) -> f64 {
        if self.consumers.is_empty() {
            return 0.0;
        }
        self.retrieved() as f64 / self.consumers.len() as f64
    }

    /// Nearest-rank percentile of first-valid times in seconds; `None`
    /// stands for "not within the horizon".
    pub fn percentile(&self, q: f64) -> Option<f64> {
        let mut times: Vec<Option<Timestamp>> = self.consumers.iter().map(|c| c.first_valid).collect();
        if times.is_empty() {
            return None;
        }
        times.sort_by_key(|t| t.unwrap_or(Timestamp::MAX));
        let rank = ((q * times.len() as f64).ceil() as usize).clamp(1, times.len());
        times[rank - 1].map(|t| t.as_secs_f64())
    }

    pub fn drops_by_reason(&self) -> BTreeMap<&'static str, u64> {
        let mut m = BTreeMap::new();
        let mut add = |k, v| *m.entry(k).or_insert(0) += v;
        for r in &self.routers {
            let s = &r.stats;
            add("unsolicited", s.unsolicited_drops);
            add("ikb_key_mismatch", s.ikb_key_mismatch);
            add("ikb_bad_signature", s.ikb_bad_signature);
            add("scn_digest_mismatch", s.scn_drops);
            add("exclude_match", s.exclude_drops);
            add("unbound_interest", s.unbound_interests);
            add("malformed", s.malformed_drops);
        }
        m
    }

    pub fn max_fake_occupancy(&self) -> u64 {
        self.occupancy.iter().map(|s| s.fake).max().unwrap_or(0)
    }

    pub fn total_signature_verifications(&self) -> u64 {
        self.routers.iter().map(|r| r.stats.signature_verifications).sum()
    }

    pub fn summary(&self) -> Summary {
        Summary {
            mode: self.mode,
            fcp: self.fcp,
            seed: self.seed,
            pct_retrieved: 100.0 * self.fraction_retrieved(),
            p50_time: self.percentile(0.5),
            p90_time: self.percentile(0.9),
            drops_by_reason: self.drops_by_reason(),
        }
    }
}

/// Fraction of consumers whose first valid retrieval happened at or before
/// `t`, for `t = 0, step, 2*step, ...` up to and including `horizon_s`.
pub fn metrics_cdf(metrics: &Metrics, horizon_s: f64, step_s: f64) -> Vec<(f64, f64)> {
    let n = metrics.consumers.len();
    let mut times: Vec<u64> = metrics
        .consumers
        .iter()
        .filter_map(|c| c.first_valid.map(|t| t.as_micros()))
        .collect();
    times.sort_unstable();
    let steps = if step_s > 0.0 { (horizon_s / step_s + 1e-9).floor() as usize } else { 0 };
    let mut out = Vec::with_capacity(steps + 2);
    let mut push = |t: f64| {
        let tm = secs_to_micros(t);
        let k = times.partition_point(|&x| x <= tm);
        out.push((t, if n == 0 { 0.0 } else { k as f64 / n as f64 }));
    };
    for i in 0..=steps {
        push(i as f64 * step_s);
    }
    if (steps as f64 * step_s - horizon_s).abs() > 1e-9 {
        push(horizon_s);
    }
    out
}

pub fn consumers_csv(metrics: &Metrics) -> String {
    let mut s = String::from("consumer_id,first_valid_time_s\n");
    for c in &metrics.consumers {
        match c.first_valid {
            Some(t) => writeln!(s, "{},{:.6}", c.node, t.as_secs_f64()),
            None => writeln!(s, "{},inf", c.node),
        }
        .expect("writing to a String");
    }
    s
}

pub fn cdf_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("t_s,fraction\n");
    for (t, f) in points {
        writeln!(s, "{t:.3},{f:.6}").expect("writing to a String");
    }
    s
}

pub fn summary_json(metrics: &Metrics) -> String {
    serde_json::to_string_pretty(&metrics.summary()).expect("summary serializes") + "\n"
}

/// Writes `<stem>_consumers.csv`, `<stem>_cdf.csv` and `<stem>_summary.json`
/// into `dir`.
pub fn write_outputs(metrics: &Metrics, step_s: f64, dir: &Path, stem: &str) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let horizon = metrics.horizon.as_secs_f64();
    let files = [
        (format!("{stem}_consumers.csv"), consumers_csv(metrics)),
        (format!("{stem}_cdf.csv"), cdf_csv(&metrics_cdf(metrics, horizon, step_s))),
        (format!("{stem}_summary.json"), summary_json(metrics)),
    ];
    let mut out = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(times: &[Option<f64>]) -> Metrics {
        Metrics {
            mode: Mode::BaselineExclusion,
            fcp: 0.8,
            seed: 1,
            horizon: Timestamp::from_secs_f64(10.0),
            fake_count: 4,
            consumers: times
                .iter()
                .enumerate()
                .map(|(i, t)| ConsumerRecord {
                    node: format!("u{i}"),
                    first_valid: t.map(Timestamp::from_secs_f64),
                    interests_sent: 0,
                    fakes_received: 0,
                    unsolicited: 0,
                    bootstrap_failed: false,
                    outcomes: vec![],
                })
                .collect(),
            routers: vec![],
            occupancy: vec![],
            fakes_injected: 0,
            events: 0,
        }
    }

    #[test]
    fn cdf_extremes() {
        let none = metrics(&[None, None]);
        assert!(metrics_cdf(&none, 10.0, 1.0).iter().all(|(_, f)| *f == 0.0));
        let all = metrics(&[Some(0.0), Some(0.0)]);
        let c = metrics_cdf(&all, 10.0, 1.0);
        assert_eq!(c.len(), 11);
        assert!(c.iter().all(|(_, f)| *f == 1.0));
    }

    #[test]
    fn cdf_steps_and_horizon() {
        let m = metrics(&[Some(1.5), Some(3.0), None, None]);
        let c = metrics_cdf(&m, 3.5, 1.0);
        assert_eq!(c, vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.25), (3.0, 0.5), (3.5, 0.5)]);
    }

    #[test]
    fn percentiles_treat_missing_as_infinite() {
        let m = metrics(&[Some(1.0), Some(2.0), Some(3.0), None]);
        assert_eq!(m.percentile(0.5), Some(2.0));
        assert_eq!(m.percentile(0.75), Some(3.0));
        assert_eq!(m.percentile(0.9), None);
        assert_eq!(m.fraction_retrieved(), 0.75);
    }

    #[test]
    fn csv_formats() {
        let m = metrics(&[Some(1.25), None]);
        assert_eq!(consumers_csv(&m), "consumer_id,first_valid_time_s\nu0,1.250000\nu1,inf\n");
        assert_eq!(cdf_csv(&[(0.0, 0.5)]), "t_s,fraction\n0.000,0.500000\n");
    }
}
