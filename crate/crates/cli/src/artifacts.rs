//! Files written by `run` and read back by `baseline` and `summarize`.
//!
//! A run directory holds `draws.csv`, `positions.csv` (raw positions),
//! `positions_aligned.csv` (after Procrustes alignment, same layout),
//! `summary.json`, `counters.json` and `metadata.json`. Draws of several
//! chains are stored one chain after another.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lpcm::io::{format_draws_csv, format_positions_csv, read_draws, NetworkFormat, DRAWS_SCHEMA_VERSION};
use lpcm::postprocess::{align_draws, summarize, RunSummary};
use lpcm::synth::GenSpec;
use lpcm::{ChainOutput, DrawRecord, Hyperparams, MoveCounters, Network, RunConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const METADATA_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataInfo {
    pub path: String,
    pub sha256: String,
    pub format: String,
    pub directed: bool,
    pub n: usize,
    pub ties: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSettings {
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    pub chains: usize,
    pub draws_per_chain: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub draws_schema_version: u32,
    pub version: String,
    pub data: DataInfo,
    pub config: ChainSettings,
    pub hyperparams: Hyperparams<f64>,
}

impl Metadata {
    pub fn new(
        data: &Path,
        format: NetworkFormat,
        net: &Network,
        hp: &Hyperparams<f64>,
        cfg: &RunConfig<f64>,
        chains: usize,
        draws_per_chain: usize,
    ) -> Result<Self> {
        let bytes = std::fs::read(data).with_context(|| format!("{}: cannot read", data.display()))?;
        Ok(Self {
            schema_version: METADATA_SCHEMA_VERSION,
            draws_schema_version: DRAWS_SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").into(),
            data: DataInfo {
                path: data.display().to_string(),
                sha256: hex::encode(Sha256::digest(&bytes)),
                format: format.to_string(),
                directed: net.directed(),
                n: net.n(),
                ties: net.tie_count(),
            },
            config: ChainSettings {
                iterations: cfg.iterations,
                burnin: cfg.burnin,
                thin: cfg.thin,
                seed: cfg.seed,
                chains,
                draws_per_chain,
            },
            hyperparams: hp.clone(),
        })
    }
}

/// Latent truth written next to a simulated network.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Truth {
    pub spec: GenSpec,
    pub z: Vec<Vec<f64>>,
    /// 1-based components.
    pub alloc: Vec<usize>,
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("{}: cannot write", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    if !path.exists() {
        bail!("{}: missing file", path.display());
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: malformed", path.display()))
}

pub struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes every artifact of a run and returns the number of draws.
    pub fn write_run(&self, outputs: &[ChainOutput<f64>], meta: &Metadata) -> Result<usize> {
        std::fs::create_dir_all(&self.dir).with_context(|| format!("{}: cannot create", self.dir.display()))?;
        let draws: Vec<DrawRecord<f64>> = outputs.iter().flat_map(|o| o.draws.iter().cloned()).collect();
        let mut counters = MoveCounters::default();
        for o in outputs {
            counters.merge(&o.counters);
        }
        let (n, d) = (meta.data.n, meta.hyperparams.d);
        write_text(&self.path("draws.csv"), &format_draws_csv(&draws, n))?;
        write_text(&self.path("positions.csv"), &format_positions_csv(&draws, d))?;
        write_json(&self.path("counters.json"), &counters)?;
        write_json(&self.path("metadata.json"), meta)?;
        if draws.is_empty() {
            eprintln!("no draws retained after burn-in; summary.json not written");
            return Ok(0);
        }
        let aligned = align_draws(&draws)?;
        let aligned_draws: Vec<DrawRecord<f64>> = draws
            .iter()
            .zip(aligned.z_aligned)
            .map(|(r, z)| DrawRecord { z, ..r.clone() })
            .collect();
        write_text(&self.path("positions_aligned.csv"), &format_positions_csv(&aligned_draws, d))?;
        write_json(&self.path("summary.json"), &summarize(&draws, &counters)?)?;
        Ok(draws.len())
    }

    pub fn read_metadata(&self) -> Result<Metadata> {
        read_json(&self.path("metadata.json"))
    }

    pub fn read_counters(&self) -> Result<MoveCounters> {
        read_json(&self.path("counters.json"))
    }

    /// Draws with their chain indices restored from the metadata.
    pub fn read_draws(&self) -> Result<Vec<DrawRecord<f64>>> {
        let meta = self.read_metadata()?;
        let (draws_path, positions_path) = (self.path("draws.csv"), self.path("positions.csv"));
        for p in [&draws_path, &positions_path] {
            if !p.exists() {
                bail!("{}: missing file", p.display());
            }
        }
        let mut draws = read_draws(&draws_path, &positions_path)?;
        let per_chain = meta.config.draws_per_chain;
        if draws.len() != per_chain * meta.config.chains {
            bail!(
                "{}: expected {} draws from metadata, found {}",
                draws_path.display(),
                per_chain * meta.config.chains,
                draws.len()
            );
        }
        for (k, d) in draws.iter_mut().enumerate() {
            d.chain = k / per_chain.max(1);
        }
        Ok(draws)
    }

    pub fn summarize(&self) -> Result<RunSummary> {
        let draws = self.read_draws()?;
        if draws.is_empty() {
            bail!("{}: no draws to summarise", self.path("draws.csv").display());
        }
        Ok(summarize(&draws, &self.read_counters()?)?)
    }
}
