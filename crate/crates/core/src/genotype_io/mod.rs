//! Genotype storage, PLINK binary triplet I/O and SNP quality control.
//!
//! Dosages count copies of `allele1` (the first allele column of the SNP
//! table) and are stored SNP-major as `u8` with [`MISSING`] marking
//! uncalled genotypes.

mod bed;
mod qc;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bed::{read_genotype_triplet, read_population_map, write_genotype_triplet, PlinkData};
pub use qc::{dominant_encode, filter_snps, hwe_test, minor_allele_frequency, QcOutcome, QcReport};

/// Sentinel dosage for an uncalled genotype.
pub const MISSING: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
    Unknown,
}

impl Sex {
    /// Decodes the sample-table sex column (1 = male, 2 = female).
    pub fn from_code(code: &str) -> Self {
        match code {
            "1" => Sex::Male,
            "2" => Sex::Female,
            _ => Sex::Unknown,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Sex::Male => 1,
            Sex::Female => 2,
            Sex::Unknown => 0,
        }
    }

    pub fn is_male(self) -> bool {
        self == Sex::Male
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub family_id: String,
    pub individual_id: String,
    pub sex: Sex,
    pub phenotype_placeholder: i64,
    pub population: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnpRecord {
    pub chromosome: String,
    pub snp_id: String,
    pub genetic_distance: f64,
    pub bp_position: u64,
    pub allele1: char,
    pub allele2: char,
}

/// An `n x m` matrix of allele dosages, stored one SNP column at a time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenotypeMatrix {
    n: usize,
    m: usize,
    data: Vec<u8>,
}

impl GenotypeMatrix {
    /// Builds a matrix from SNP-major data (`data[j * n + i]` is individual
    /// `i` at SNP `j`).
    pub fn from_snp_major(n: usize, m: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != n * m {
            return Err(Error::InvalidInput(format!(
                "genotype buffer has {} entries, expected {n} x {m}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|&&d| d > MISSING) {
            return Err(Error::InvalidInput(format!("invalid dosage code {bad}")));
        }
        Ok(Self { n, m, data })
    }

    pub fn from_columns(n: usize, columns: &[Vec<u8>]) -> Result<Self> {
        let mut data = Vec::with_capacity(n * columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidInput(format!(
                    "column {j} has {} entries, expected {n}",
                    col.len()
                )));
            }
            data.extend_from_slice(col);
        }
        Self::from_snp_major(n, columns.len(), data)
    }

    pub fn n_individuals(&self) -> usize {
        self.n
    }

    pub fn n_snps(&self) -> usize {
        self.m
    }

    pub fn get(&self, individual: usize, snp: usize) -> u8 {
        self.data[snp * self.n + individual]
    }

    pub fn column(&self, snp: usize) -> &[u8] {
        &self.data[snp * self.n..(snp + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[u8]> {
        self.data.chunks_exact(self.n.max(1)).take(self.m)
    }

    pub fn select_snps(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.n);
        for &j in indices {
            data.extend_from_slice(self.column(j));
        }
        Self {
            n: self.n,
            m: indices.len(),
            data,
        }
    }

    /// Flips every SNP whose `allele1` is the major allele so that dosages
    /// count the minor allele. Returns the number of flipped SNPs.
    pub fn orient_to_minor_allele(&mut self, snps: &mut [SnpRecord]) -> usize {
        assert_eq!(snps.len(), self.m, "SNP table length mismatch");
        let n = self.n;
        let mut flipped = 0;
        for (j, snp) in snps.iter_mut().enumerate() {
            let col = &mut self.data[j * n..(j + 1) * n];
            let Some(f) = qc::allele1_frequency(col) else {
                continue;
            };
            if f > 0.5 {
                for d in col.iter_mut() {
                    if *d != MISSING {
                        *d = 2 - *d;
                    }
                }
                std::mem::swap(&mut snp.allele1, &mut snp.allele2);
                flipped += 1;
            }
        }
        flipped
    }
}

/// Indices `0, step, 2 * step, ...` below `m`.
pub fn thin_snps(m: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 {
        return Err(Error::InvalidInput("thinning step must be >= 1".into()));
    }
    Ok((0..m).step_by(step).collect())
}

pub fn snp_index(snps: &[SnpRecord], snp_id: &str) -> Result<usize> {
    snps.iter()
        .position(|s| s.snp_id == snp_id)
        .ok_or_else(|| Error::Lookup(format!("SNP {snp_id}")))
}

pub fn snp_index_by_position(snps: &[SnpRecord], chromosome: &str, bp: u64) -> Result<usize> {
    snps.iter()
        .position(|s| s.chromosome == chromosome && s.bp_position == bp)
        .ok_or_else(|| Error::Lookup(format!("SNP at {chromosome}:{bp}")))
}

/// Contiguous window of `min(width, m)` SNPs around `center`. Windows that
/// would cross either end are shifted inward so the width is preserved.
pub fn region_around(m: usize, center: usize, width: usize) -> Result<Range<usize>> {
    if width == 0 {
        return Err(Error::InvalidInput("region width must be >= 1".into()));
    }
    if center >= m {
        return Err(Error::Lookup(format!("SNP index {center} (m = {m})")));
    }
    let w = width.min(m);
    let start = center.saturating_sub(w / 2).min(m - w);
    Ok(start..start + w)
}

pub fn select_region(
    snps: &[SnpRecord],
    center_snp_id: &str,
    width: usize,
) -> Result<Range<usize>> {
    let center = snp_index(snps, center_snp_id)?;
    region_around(snps.len(), center, width)
}
