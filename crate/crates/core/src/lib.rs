//! Simulation and power analysis of gene-environment interaction detection in
//! case/control GWAS with a latent confounding exposure.
//!
//! The pipeline mirrors a typical power study:
//!
//! 1. [`genotype_io`] loads a PLINK-style binary genotype triplet and applies
//!    MAF/HWE quality control.
//! 2. [`popstruct`] computes principal components and the genetic
//!    relatedness matrix.
//! 3. [`covsim`] simulates smoking, bmi and a latent treatment exposure.
//! 4. [`phenosim`] computes penetrances and draws phenotype replicates with an
//!    exact number of cases.
//! 5. [`assoc`] and [`lmm`] run per-SNP scans.
//! 6. [`power`] summarises each replicate by its minimum p-value and
//!    estimates ROC curves and AUCs.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assoc;
pub mod covsim;
pub mod error;
pub mod genotype_io;
mod linalg;
pub mod lmm;
pub mod phenosim;
pub mod pipeline;
pub mod plot;
pub mod popstruct;
pub mod power;
pub mod seed;
pub mod synth;
pub mod tsv;

pub use error::{Error, Result};
