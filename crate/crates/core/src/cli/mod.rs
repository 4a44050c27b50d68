//! Command-line front end. `main.rs` only parses arguments and maps
//! [`CliError`] to an exit code.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{keygen, sign_content, KeyPair, PublicKey};
use crate::model::{content_digest, decode_wire, encode_content, ContentType, Name, Packet, UnsignedContent};
use crate::sim::{
    cdf_csv, load_scenario, load_topology, metrics_cdf, run, write_outputs, Metrics, Mode, Scenario, SimError, Topology,
};
use crate::trust::{build_catalog, verify_catalog, CatalogKind};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: missing files, unparsable configs, invalid values.
    #[error("{0}")]
    Config(String),
    /// Anything that fails after inputs were accepted.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "ikb-ndn", version, about = "Content poisoning experiments for NDN with interest-key binding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario on one topology, once per repetition.
    Run(RunConfig),
    /// Generate an Ed25519 key pair as JSON.
    Keygen {
        /// 64 hex characters; random when omitted.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build or verify a signed catalog over a directory of files.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Run a grid of (mode, fcp) cells and write one CDF per cell.
    Sweep(SweepConfig),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the scenario seed; repetition r uses seed + r.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub reps: u32,
}

#[derive(Debug, Clone, Args)]
pub struct SweepConfig {
    #[arg(long)]
    pub topology: PathBuf,
    /// Base scenario; mode and fcp are overridden per cell.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.9, 0.99, 0.999])]
    pub fcp: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values = ["baseline_exclusion"])]
    pub mode: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CatalogStructureArg {
    Flat,
    Merkle,
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// Sign every file in DIR as `<prefix>/<file name>` and write the
    /// objects plus a catalog over them into OUT.
    Build {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        prefix: Name,
        /// Key file written by `keygen`.
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "merkle")]
        structure: CatalogStructureArg,
    },
    /// Check a catalog against its key and the files it was built from.
    Verify {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        prefix: Name,
    },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KeyFile {
    pub public_key: String,
    pub private_key: String,
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(cfg) => cmd_run(&cfg).map(|_| ()),
        Command::Keygen { seed, out } => cmd_keygen(seed.as_deref(), &out),
        Command::Catalog(c) => cmd_catalog(c),
        Command::Sweep(cfg) => cmd_sweep(&cfg).map(|_| ()),
    }
}

fn load_inputs(topology: &Path, scenario: Option<&Path>) -> Result<(Topology, Scenario), CliError> {
    let topo = load_topology(topology)?;
    let sc = match scenario {
        Some(p) => load_scenario(p)?,
        None => Scenario::default(),
    };
    Ok((topo, sc))
}

/// Runs every repetition and writes three files each; returns the paths.
pub fn cmd_run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    if cfg.reps == 0 {
        return Err(CliError::Config("--reps must be at least 1".into()));
    }
    let (topo, base) = load_inputs(&cfg.topology, Some(&cfg.scenario))?;
    let seed0 = cfg.seed.unwrap_or(base.rng_seed);
    let mut written = Vec::new();
    for rep in 0..cfg.reps {
        let sc = Scenario {
            rng_seed: seed0.wrapping_add(u64::from(rep)),
            ..base.clone()
        };
        let m = run(&topo, &sc)?;
        log::info!(
            "rep {rep}: seed {} retrieved {:.1}% of consumers",
            sc.rng_seed,
            100.0 * m.fraction_retrieved()
        );
        let stem = format!("rep{rep}_seed{}", sc.rng_seed);
        written.extend(write_outputs(&m, sc.sample_step_s, &cfg.out, &stem).map_err(|e| io_err(&cfg.out, e))?);
    }
    Ok(written)
}

fn parse_seed(hex_seed: &str) -> Result<[u8; 32], CliError> {
    let bytes = hex::decode(hex_seed).map_err(|e| CliError::Config(format!("seed: {e}")))?;
    bytes
        .try_into()
        .map_err(|_| CliError::Config("seed must be 32 bytes (64 hex characters)".into()))
}

pub fn cmd_keygen(seed: Option<&str>, out: &Path) -> Result<(), CliError> {
    let seed = seed.map(parse_seed).transpose()?;
    let kp = keygen(seed);
    let file = KeyFile {
        public_key: kp.public_key().to_hex(),
        private_key: hex::encode(kp.private_key()),
    };
    let body = serde_json::to_string_pretty(&file).expect("key file serializes") + "\n";
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    std::fs::write(out, body).map_err(|e| io_err(out, e))
}

pub fn read_key_file(path: &Path) -> Result<KeyPair, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let file: KeyFile = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let kp = KeyPair::from_seed(parse_seed(&file.private_key)?);
    let public = hex::decode(&file.public_key).map_err(|e| CliError::Config(format!("public key: {e}")))?;
    if PublicKey::from_bytes(&public) != *kp.public_key() {
        return Err(CliError::Config(format!("{}: public key does not match private key", path.display())));
    }
    Ok(kp)
}

/// Regular files of `dir` in name order.
fn list_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| io_err(dir, e))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let name = entry
            .file_name()
            .into_string()
            .map_err(|_| CliError::Config(format!("{}: file name is not UTF-8", path.display())))?;
        let body = std::fs::read(&path).map_err(|e| io_err(&path, e))?;
        files.push((name, body));
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Config(format!("{}: no files", dir.display())));
    }
    Ok(files)
}

fn sign_files(files: &[(String, Vec<u8>)], prefix: &Name, kp: &KeyPair) -> Result<Vec<crate::model::ContentObject>, CliError> {
    files
        .iter()
        .map(|(fname, body)| {
            let name = prefix
                .append(fname.as_bytes())
                .map_err(|e| CliError::Config(format!("{fname}: {e}")))?;
            let u = UnsignedContent::new(name, body.clone(), ContentType::Data, 3600, kp.public_key());
            sign_content(u, kp).map_err(|e| CliError::Runtime(e.to_string()))
        })
        .collect()
}

fn catalog_name(prefix: &Name) -> Result<Name, CliError> {
    prefix.append("catalog").map_err(|e| CliError::Config(e.to_string()))
}

pub fn cmd_catalog(cmd: CatalogCommand) -> Result<(), CliError> {
    match cmd {
        CatalogCommand::Build {
            dir,
            prefix,
            key,
            out,
            structure,
        } => {
            let kp = read_key_file(&key)?;
            let files = list_files(&dir)?;
            let objects = sign_files(&files, &prefix, &kp)?;
            let kind = match structure {
                CatalogStructureArg::Flat => CatalogKind::Flat,
                CatalogStructureArg::Merkle => CatalogKind::Merkle,
            };
            let catalog = build_catalog(&objects, &kp, kind, &catalog_name(&prefix)?).map_err(|e| CliError::Runtime(e.to_string()))?;
            std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
            for ((fname, _), obj) in files.iter().zip(&objects) {
                let bytes = encode_content(obj).map_err(|e| CliError::Runtime(e.to_string()))?;
                let p = out.join(format!("{fname}.tlv"));
                std::fs::write(&p, bytes).map_err(|e| io_err(&p, e))?;
            }
            let p = out.join("catalog.tlv");
            std::fs::write(&p, encode_content(&catalog).map_err(|e| CliError::Runtime(e.to_string()))?)
                .map_err(|e| io_err(&p, e))?;
            let mut listing = String::new();
            for obj in &objects {
                let d = content_digest(obj).map_err(|e| CliError::Runtime(e.to_string()))?;
                writeln!(listing, "{}", obj.name.clone().with_implicit_digest(d)).expect("writing to a String");
            }
            let p = out.join("scns.txt");
            std::fs::write(&p, listing).map_err(|e| io_err(&p, e))
        }
        CatalogCommand::Verify {
            catalog,
            key,
            dir,
            prefix,
        } => {
            let kp = read_key_file(&key)?;
            let bytes = std::fs::read(&catalog).map_err(|e| CliError::Config(format!("{}: {e}", catalog.display())))?;
            let Ok(Packet::Content(obj)) = decode_wire(&bytes) else {
                return Err(CliError::Runtime(format!("{}: not an encoded content object", catalog.display())));
            };
            let cat = verify_catalog(&obj, kp.public_key()).map_err(|e| CliError::Runtime(e.to_string()))?;
            let objects = sign_files(&list_files(&dir)?, &prefix, &kp)?;
            if objects.len() != cat.entries.len() {
                return Err(CliError::Runtime(format!(
                    "catalog lists {} entries, directory has {} files",
                    cat.entries.len(),
                    objects.len()
                )));
            }
            for obj in &objects {
                let d = content_digest(obj).map_err(|e| CliError::Runtime(e.to_string()))?;
                if cat.lookup(&obj.name) != Some(d) {
                    return Err(CliError::Runtime(format!("{} does not match the catalog", obj.name)));
                }
            }
            Ok(())
        }
    }
}

fn fcp_label(fcp: f64) -> String {
    let s = format!("{fcp}");
    s.replace('.', "p")
}

/// Runs all cells in parallel; writes `cdf_<mode>_<fcp>.csv` per cell and
/// `sweep_summary.csv`. Returns the metrics in cell order.
pub fn cmd_sweep(cfg: &SweepConfig) -> Result<Vec<Metrics>, CliError> {
    let (topo, base) = load_inputs(&cfg.topology, cfg.scenario.as_deref())?;
    let modes: Vec<Mode> = cfg.mode.iter().map(|m| m.parse()).collect::<Result<_, _>>()?;
    let mut cells = Vec::new();
    for &mode in &modes {
        for &fcp in &cfg.fcp {
            let sc = Scenario {
                mode,
                fcp,
                replenish: base.replenish,
                rng_seed: cfg.seed.unwrap_or(base.rng_seed),
                ..base.clone()
            };
            sc.validate()?;
            cells.push(sc);
        }
    }
    let results: Vec<Metrics> = cells
        .par_iter()
        .map(|sc| run(&topo, sc))
        .collect::<Result<_, _>>()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    let mut summary = String::from("mode,fcp,seed,pct_retrieved,p50_time_s,p90_time_s,max_fake_occupancy\n");
    let fmt_t = |t: Option<f64>| t.map_or_else(|| "inf".to_string(), |v| format!("{v:.6}"));
    for (sc, m) in cells.iter().zip(&results) {
        let p = cfg.out.join(format!("cdf_{}_{}.csv", sc.mode, fcp_label(sc.fcp)));
        std::fs::write(&p, cdf_csv(&metrics_cdf(m, sc.horizon_s, sc.sample_step_s))).map_err(|e| io_err(&p, e))?;
        writeln!(
            summary,
            "{},{},{},{:.3},{},{},{}",
            sc.mode,
            sc.fcp,
            sc.rng_seed,
            100.0 * m.fraction_retrieved(),
            fmt_t(m.percentile(0.5)),
            fmt_t(m.percentile(0.9)),
            m.max_fake_occupancy()
        )
        .expect("writing to a String");
    }
    let p = cfg.out.join("sweep_summary.csv");
    std::fs::write(&p, summary).map_err(|e| io_err(&p, e))?;
    Ok(results)
}
