//! Disease model penetrance and phenotype replicates with a fixed number of
//! cases.
//!
//! Replicates under the alternative are drawn from independent Bernoulli
//! laws conditioned on the total case count ([`ConditionalSampler`]); null
//! replicates are uniform placements of the same number of cases.

mod replicates;
mod sampler;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype_io::MISSING;

pub use replicates::{
    generate_replicates, permute_phenotypes, Hypothesis, PhenotypeReplicate, ReplicatePlan,
    ReplicateSet, ReplicateSetMeta,
};
pub use sampler::{brute_force_conditional_law, waffect_sample, ConditionalSampler};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneticCoding {
    Dominant,
    Additive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiseaseModel {
    pub baseline_prevalence: f64,
    pub relative_risk: f64,
    /// SNP id of the susceptibility locus.
    pub causal_snp: String,
    pub genetic_coding: GeneticCoding,
    pub interacting_exposure: String,
}

impl Default for DiseaseModel {
    fn default() -> Self {
        Self {
            baseline_prevalence: 0.01,
            relative_risk: 50.0,
            causal_snp: String::new(),
            genetic_coding: GeneticCoding::Dominant,
            interacting_exposure: "treatment".into(),
        }
    }
}

impl DiseaseModel {
    pub fn validate(&self) -> Result<()> {
        let (f0, rr) = (self.baseline_prevalence, self.relative_risk);
        if !(0.0..=1.0).contains(&f0) {
            return Err(Error::ModelValidity(format!(
                "baseline prevalence {f0} outside [0, 1]"
            )));
        }
        if !(rr >= 0.0 && rr.is_finite()) {
            return Err(Error::ModelValidity(format!(
                "relative risk {rr} must be >= 0"
            )));
        }
        let max_dose = match self.genetic_coding {
            GeneticCoding::Dominant => 1.0,
            GeneticCoding::Additive => 2.0,
        };
        if f0 * (1.0 + max_dose * rr) > 1.0 {
            return Err(Error::ModelValidity(format!(
                "penetrance {} exceeds 1 for exposed carriers",
                f0 * (1.0 + max_dose * rr)
            )));
        }
        Ok(())
    }
}

/// Per-individual probability of being a case.
#[derive(Clone, Debug, PartialEq)]
pub struct PenetranceVector(pub Vec<f64>);

/// `p_i = f0 * (1 + RR * g_i * e_i)` with `g` the coded causal genotype.
/// Missing genotypes count as non-carriers.
pub fn penetrance(
    model: &DiseaseModel,
    causal_column: &[u8],
    exposure: &[u8],
) -> Result<PenetranceVector> {
    model.validate()?;
    if causal_column.len() != exposure.len() {
        return Err(Error::InvalidInput(format!(
            "causal column has {} entries but exposure has {}",
            causal_column.len(),
            exposure.len()
        )));
    }
    let p = causal_column
        .iter()
        .zip(exposure)
        .map(|(&d, &e)| {
            let g = match (d, model.genetic_coding) {
                (MISSING, _) | (0, _) => 0.0,
                (_, GeneticCoding::Dominant) => 1.0,
                (d, GeneticCoding::Additive) => d as f64,
            };
            let p =
                model.baseline_prevalence * (1.0 + model.relative_risk * g * (e != 0) as u8 as f64);
            if p > 1.0 {
                Err(Error::ModelValidity(format!("penetrance {p} exceeds 1")))
            } else {
                Ok(p)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PenetranceVector(p))
}
