//! Synthetic genotypes for structured samples.
//!
//! Subpopulation allele frequencies are drawn around an ancestral frequency
//! with the Balding-Nichols model, and genotypes follow Hardy-Weinberg
//! proportions within each subpopulation.

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype_io::PlinkData;
use crate::genotype_io::{GenotypeMatrix, SampleRecord, Sex, SnpRecord, MISSING};
use crate::seed::rng_for;

/// A SNP whose ancestral allele1 frequency is fixed rather than drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedSnp {
    pub index: usize,
    pub allele_frequency: f64,
    /// Use the ancestral frequency in every subpopulation.
    #[serde(default)]
    pub undifferentiated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_individuals: usize,
    pub n_snps: usize,
    /// Subpopulation labels (written as family ids) and their weights.
    pub populations: Vec<(String, f64)>,
    /// Differentiation between subpopulations.
    pub fst: f64,
    /// Range of ancestral allele1 frequencies.
    pub frequency_range: (f64, f64),
    pub planted: Vec<PlantedSnp>,
    pub missing_rate: f64,
    pub chromosome: String,
    pub spacing_bp: u64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_individuals: 1000,
            n_snps: 2000,
            populations: vec![
                ("CEU".into(), 1.0),
                ("YRI".into(), 1.0),
                ("CHB".into(), 1.0),
            ],
            fst: 0.05,
            frequency_range: (0.08, 0.5),
            planted: Vec::new(),
            missing_rate: 0.0,
            chromosome: "6".into(),
            spacing_bp: 1000,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if self.n_individuals == 0 || self.n_snps == 0 {
            return bad("synthetic data needs individuals and SNPs");
        }
        if self.populations.is_empty() || self.populations.iter().any(|(_, w)| !(*w > 0.0)) {
            return bad("population weights must be positive");
        }
        if !(self.fst > 0.0 && self.fst < 1.0) {
            return bad("fst must lie in (0, 1)");
        }
        let (lo, hi) = self.frequency_range;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return bad("frequency range must satisfy 0 < low <= high < 1");
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return bad("missing rate must lie in [0, 1)");
        }
        for p in &self.planted {
            if p.index >= self.n_snps || !(p.allele_frequency > 0.0 && p.allele_frequency < 1.0) {
                return bad("planted SNP index or frequency out of range");
            }
        }
        Ok(())
    }
}

/// Individuals are assigned to subpopulations in contiguous blocks sized by
/// weight; sexes alternate within each block.
pub fn synthesize(config: &SynthConfig) -> Result<PlinkData> {
    config.validate()?;
    let n = config.n_individuals;
    let total: f64 = config.populations.iter().map(|(_, w)| w).sum();
    let mut pop_of = Vec::with_capacity(n);
    let mut acc = 0.0;
    for (k, (_, w)) in config.populations.iter().enumerate() {
        acc += w;
        let end = if k + 1 == config.populations.len() {
            n
        } else {
            ((acc / total) * n as f64).round() as usize
        };
        while pop_of.len() < end {
            pop_of.push(k);
        }
    }
    let samples: Vec<SampleRecord> = pop_of
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let name = &config.populations[k].0;
            SampleRecord {
                family_id: name.clone(),
                individual_id: format!("{name}_{i:05}"),
                sex: if i % 2 == 0 { Sex::Female } else { Sex::Male },
                phenotype_placeholder: -9,
                population: Some(name.clone()),
            }
        })
        .collect();

    let mut freq_rng = rng_for(config.seed, "synth/frequencies", 0);
    let mut geno_rng = rng_for(config.seed, "synth/genotypes", 0);
    let n_pops = config.populations.len();
    let (lo, hi) = config.frequency_range;
    let mut data = Vec::with_capacity(n * config.n_snps);
    for j in 0..config.n_snps {
        let planted = config.planted.iter().find(|p| p.index == j);
        let ancestral =
            planted.map_or_else(|| freq_rng.random_range(lo..=hi), |p| p.allele_frequency);
        let freqs: Vec<f64> = if planted.is_some_and(|p| p.undifferentiated) {
            vec![ancestral; n_pops]
        } else {
            let a = ancestral * (1.0 - config.fst) / config.fst;
            let b = (1.0 - ancestral) * (1.0 - config.fst) / config.fst;
            let beta = Beta::new(a, b).map_err(|e| Error::Numerical(e.to_string()))?;
            (0..n_pops).map(|_| beta.sample(&mut freq_rng)).collect()
        };
        let laws = freqs
            .iter()
            .map(|&p| Binomial::new(2, p).map_err(|e| Error::Numerical(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        for &k in &pop_of {
            let g = laws[k].sample(&mut geno_rng) as u8;
            let missing =
                config.missing_rate > 0.0 && geno_rng.random::<f64>() < config.missing_rate;
            data.push(if missing { MISSING } else { g });
        }
    }
    let snps = (0..config.n_snps)
        .map(|j| SnpRecord {
            chromosome: config.chromosome.clone(),
            snp_id: format!("snp{:05}", j + 1),
            genetic_distance: 0.0,
            bp_position: (j as u64 + 1) * config.spacing_bp,
            allele1: 'A',
            allele2: 'G',
        })
        .collect();
    Ok(PlinkData {
        matrix: GenotypeMatrix::from_snp_major(n, config.n_snps, data)?,
        samples,
        snps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genotype_io::minor_allele_frequency;

    #[test]
    fn shapes_and_labels() {
        let cfg = SynthConfig {
            n_individuals: 90,
            n_snps: 40,
            ..Default::default()
        };
        let d = synthesize(&cfg).unwrap();
        assert_eq!(d.matrix.n_individuals(), 90);
        assert_eq!(d.matrix.n_snps(), 40);
        let ceu = d.samples.iter().filter(|s| s.family_id == "CEU").count();
        assert_eq!(ceu, 30);
        assert!(d
            .samples
            .iter()
            .all(|s| s.population.as_deref() == Some(s.family_id.as_str())));
        assert_eq!(synthesize(&cfg).unwrap().matrix, d.matrix);
    }

    #[test]
    fn planted_frequency_is_respected() {
        let cfg = SynthConfig {
            n_individuals: 3000,
            n_snps: 5,
            planted: vec![PlantedSnp {
                index: 2,
                allele_frequency: 0.1,
                undifferentiated: true,
            }],
            ..Default::default()
        };
        let d = synthesize(&cfg).unwrap();
        let maf = minor_allele_frequency(d.matrix.column(2)).unwrap();
        assert!((maf - 0.1).abs() < 0.015, "{maf}");
    }

    #[test]
    fn subpopulations_differ() {
        let cfg = SynthConfig {
            n_individuals: 600,
            n_snps: 200,
            fst: 0.2,
            ..Default::default()
        };
        let d = synthesize(&cfg).unwrap();
        let mean = |j: usize, range: std::ops::Range<usize>| {
            let len = range.len() as f64;
            range.map(|i| d.matrix.get(i, j) as f64).sum::<f64>() / len
        };
        let diff: f64 = (0..200)
            .map(|j| (mean(j, 0..200) - mean(j, 200..400)).abs())
            .sum::<f64>()
            / 200.0;
        assert!(diff > 0.15, "{diff}");
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SynthConfig {
            fst: 0.0,
            ..Default::default()
        };
        assert!(synthesize(&cfg).is_err());
    }
}
