//! Glue between scans and power summaries shared by the command line and
//! end-to-end checks.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assoc::{scan_snp, scan_snp_x_cov, AssocResult, CovariateMatrix, ScanConfig};
use crate::covsim::CovariateTable;
use crate::error::{Error, Result};
use crate::genotype_io::{region_around, GenotypeMatrix, SnpRecord};
use crate::lmm::{
    eigendecompose_kinship, lmm_scan, RotatedData, RotatedGenotypes, SpectralKinship,
};
use crate::phenosim::{Hypothesis, PhenotypeReplicate};
use crate::popstruct::Kinship;
use crate::power::{summary_min_p, PValueField, ScoreVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Snp,
    SnpXCov,
    Lmm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Snp, Method::SnpXCov, Method::Lmm];

    /// The p-value column summarised for this method.
    pub fn field(self) -> PValueField {
        match self {
            Method::SnpXCov => PValueField::PInt,
            Method::Snp | Method::Lmm => PValueField::PSnp,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Snp => "snp",
            Method::SnpXCov => "snp_x_cov",
            Method::Lmm => "lmm",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snp" => Ok(Method::Snp),
            "snp_x_cov" => Ok(Method::SnpXCov),
            "lmm" => Ok(Method::Lmm),
            _ => Err(Error::Config(format!(
                "unknown method '{s}' (expected snp, snp_x_cov or lmm)"
            ))),
        }
    }
}

/// Everything a scan needs apart from the phenotype.
pub struct Scanner<'a> {
    matrix: &'a GenotypeMatrix,
    snps: &'a [SnpRecord],
    covariates: CovariateMatrix,
    config: ScanConfig,
    method: Method,
    lmm: Option<LmmContext>,
}

struct LmmContext {
    spec: SpectralKinship,
    rotated: RotatedGenotypes,
    design: DMatrix<f64>,
}

impl<'a> Scanner<'a> {
    /// `kinship` is required for [`Method::Lmm`] and ignored otherwise.
    pub fn new(
        matrix: &'a GenotypeMatrix,
        snps: &'a [SnpRecord],
        table: &CovariateTable,
        config: &ScanConfig,
        method: Method,
        kinship: Option<&Kinship>,
    ) -> Result<Self> {
        config.validate()?;
        if method == Method::SnpXCov && config.interaction_covariate.is_none() {
            return Err(Error::Config(
                "method snp_x_cov needs interaction_covariate".into(),
            ));
        }
        if table.len() != matrix.n_individuals() {
            return Err(Error::InvalidInput(format!(
                "{} covariate rows for {} genotyped individuals",
                table.len(),
                matrix.n_individuals()
            )));
        }
        let covariates =
            CovariateMatrix::new(config.covariates.clone(), table.design(&config.covariates)?)?;
        let lmm = if method == Method::Lmm {
            let k =
                kinship.ok_or_else(|| Error::Config("method lmm needs a kinship matrix".into()))?;
            let spec = eigendecompose_kinship(k)?;
            let rotated = RotatedGenotypes::new(matrix, &spec, config.snp_coding)?;
            let n = matrix.n_individuals();
            let c = covariates.values.ncols();
            let design = DMatrix::from_fn(n, c + 1, |i, j| {
                if j == 0 {
                    1.0
                } else {
                    covariates.values[(i, j - 1)]
                }
            });
            Some(LmmContext {
                spec,
                rotated,
                design,
            })
        } else {
            None
        };
        Ok(Self {
            matrix,
            snps,
            covariates,
            config: config.clone(),
            method,
            lmm,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn scan(&self, y: &[u8]) -> Result<Vec<AssocResult>> {
        match self.method {
            Method::Snp => scan_snp(self.matrix, self.snps, y, &self.covariates, &self.config),
            Method::SnpXCov => {
                scan_snp_x_cov(self.matrix, self.snps, y, &self.covariates, &self.config)
            }
            Method::Lmm => {
                let ctx = self.lmm.as_ref().expect("lmm context built for lmm method");
                let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
                let data = RotatedData::new(&yf, &ctx.design, &ctx.spec)?;
                let fit = data.fit_null()?;
                lmm_scan(&ctx.rotated, self.snps, &data, &fit)
            }
        }
    }

    /// Scans every replicate; output order follows `replicates`.
    pub fn scan_all(&self, replicates: &[&PhenotypeReplicate]) -> Result<Vec<Vec<AssocResult>>> {
        replicates.par_iter().map(|r| self.scan(&r.y)).collect()
    }
}

/// Human label of a region width: `whole` when it spans all SNPs.
pub fn region_label(width: usize, m: usize) -> String {
    if width >= m {
        "whole".into()
    } else {
        width.to_string()
    }
}

/// SNP index range of `width` SNPs centred on `center`.
pub fn region_range(m: usize, center: usize, width: usize) -> Result<Range<usize>> {
    if width >= m {
        Ok(0..m)
    } else {
        region_around(m, center, width)
    }
}

/// Min-p scores of a set of scanned replicates for one region.
pub fn region_scores(
    scans: &[(Hypothesis, &[AssocResult])],
    method: Method,
    region: Range<usize>,
    region_name: &str,
) -> Result<(ScoreVector, ScoreVector)> {
    let mut h0 = Vec::new();
    let mut h1 = Vec::new();
    for (h, results) in scans {
        let s = summary_min_p(results, method.field(), region.clone())?;
        match h {
            Hypothesis::H0 => h0.push(s),
            Hypothesis::H1 => h1.push(s),
        }
    }
    let label = method.to_string();
    Ok((
        ScoreVector::new(Hypothesis::H0, h0, &label, region_name)?,
        ScoreVector::new(Hypothesis::H1, h1, &label, region_name)?,
    ))
}
