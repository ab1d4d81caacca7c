//! Run configuration loaded from a sectioned TOML file.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use gxesim_core::assoc::ScanConfig;
use gxesim_core::covsim::CovSimConfig;
use gxesim_core::phenosim::DiseaseModel;
use gxesim_core::pipeline::Method;
use gxesim_core::seed::fingerprint;
use gxesim_core::synth::SynthConfig;
use serde::{Deserialize, Serialize};

use crate::Validation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub qc: QcSettings,
    pub covsim: CovSimConfig,
    pub model: DiseaseModel,
    pub replicates: ReplicateSettings,
    pub scan: ScanConfig,
    pub power: PowerSettings,
    /// Only read by the `synth` subcommand.
    pub synth: SynthConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Stem of the `.bed/.bim/.fam` input.
    pub genotype: PathBuf,
    /// Optional `individual_id population` map; family ids are used otherwise.
    pub population_map: Option<PathBuf>,
    /// Optional precomputed covariate table used instead of simulation.
    pub covariates: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QcSettings {
    pub maf_min: f64,
    pub hwe_alpha: f64,
    pub pca_k: usize,
    pub pca_thin_step: usize,
    /// Recode every SNP so that dosages count the minor allele.
    pub orient_minor_allele: bool,
    /// Build the kinship from every QC'd SNP instead of the PCA subset.
    pub grm_all_snps: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplicateSettings {
    pub n_h0: usize,
    pub n_h1: usize,
    pub n_cases: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSettings {
    pub methods: Vec<Method>,
    pub regions: Vec<RegionWidth>,
    /// Index of the H1 replicate drawn in the Manhattan plots.
    pub manhattan_replicate: usize,
}

/// A region size in SNPs, or the whole scanned set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionWidth {
    Whole,
    Snps(usize),
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            genotype: PathBuf::from("data/genotypes"),
            population_map: None,
            covariates: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl Default for QcSettings {
    fn default() -> Self {
        Self {
            maf_min: 0.05,
            hwe_alpha: 1e-6,
            pca_k: 5,
            pca_thin_step: 1000,
            orient_minor_allele: true,
            grm_all_snps: false,
        }
    }
}

impl Default for ReplicateSettings {
    fn default() -> Self {
        Self {
            n_h0: 200,
            n_h1: 200,
            n_cases: 595,
        }
    }
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            regions: vec![
                RegionWidth::Whole,
                RegionWidth::Snps(8000),
                RegionWidth::Snps(2000),
                RegionWidth::Snps(800),
                RegionWidth::Snps(200),
                RegionWidth::Snps(1),
            ],
            manhattan_replicate: 0,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            paths: Paths::default(),
            qc: QcSettings::default(),
            covsim: CovSimConfig::default(),
            model: DiseaseModel::default(),
            replicates: ReplicateSettings::default(),
            scan: ScanConfig {
                interaction_covariate: Some("bmi".into()),
                ..ScanConfig::default()
            },
            power: PowerSettings::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RegionWidth {
    pub fn snps(self, m: usize) -> usize {
        match self {
            RegionWidth::Whole => m,
            RegionWidth::Snps(w) => w,
        }
    }
}

impl fmt::Display for RegionWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionWidth::Whole => f.write_str("whole"),
            RegionWidth::Snps(w) => write!(f, "{w}"),
        }
    }
}

impl std::str::FromStr for RegionWidth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "whole" {
            return Ok(RegionWidth::Whole);
        }
        match s.parse::<usize>() {
            Ok(w) if w > 0 => Ok(RegionWidth::Snps(w)),
            _ => Err(format!(
                "region width must be 'whole' or a positive integer, got '{s}'"
            )),
        }
    }
}

impl Serialize for RegionWidth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RegionWidth::Whole => s.serialize_str("whole"),
            RegionWidth::Snps(w) => s.serialize_u64(*w as u64),
        }
    }
}

impl<'de> Deserialize<'de> for RegionWidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(w) if w > 0 => Ok(RegionWidth::Snps(w as usize)),
            Raw::Int(w) => Err(serde::de::Error::custom(format!(
                "region width must be positive, got {w}"
            ))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Validation(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| Validation(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    /// Checks that do not depend on which subcommand runs.
    pub fn validate(&self) -> anyhow::Result<()> {
        let bad = |msg: String| -> anyhow::Result<()> { Err(Validation(msg).into()) };
        if !(0.0..0.5).contains(&self.qc.maf_min) {
            return bad(format!("qc.maf_min {} outside [0, 0.5)", self.qc.maf_min));
        }
        if !(self.qc.hwe_alpha > 0.0 && self.qc.hwe_alpha < 1.0) {
            return bad(format!("qc.hwe_alpha {} outside (0, 1)", self.qc.hwe_alpha));
        }
        if self.qc.pca_k == 0 || self.qc.pca_thin_step == 0 {
            return bad("qc.pca_k and qc.pca_thin_step must be positive".into());
        }
        if self.power.regions.is_empty() || self.power.methods.is_empty() {
            return bad("power.regions and power.methods must not be empty".into());
        }
        if self.replicates.n_cases == 0 {
            return bad("replicates.n_cases must be positive".into());
        }
        self.covsim.validate().context("covsim")?;
        self.model.validate().context("model")?;
        self.scan.validate().context("scan")?;
        Ok(())
    }

    /// Hash of the canonical serialisation, embedded in every artifact.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serialises");
        fingerprint(text.as_bytes())[..16].to_string()
    }

    /// Provenance line written at the top of text artifacts.
    pub fn provenance(&self) -> String {
        format!("gxesim config_hash={} seed={}", self.hash(), self.seed)
    }
}
