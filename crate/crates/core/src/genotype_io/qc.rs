use libm::erfc;
use serde::{Deserialize, Serialize};

use super::{GenotypeMatrix, MISSING};
use crate::error::{Error, Result};

/// Frequency of allele1 among called genotypes, `None` if all are missing.
pub(crate) fn allele1_frequency(column: &[u8]) -> Option<f64> {
    let (sum, called) = column
        .iter()
        .filter(|&&d| d != MISSING)
        .fold((0u64, 0u64), |(s, c), &d| (s + d as u64, c + 1));
    (called > 0).then(|| sum as f64 / (2 * called) as f64)
}

pub fn minor_allele_frequency(column: &[u8]) -> Result<f64> {
    let f = allele1_frequency(column).ok_or(Error::UndefinedFrequency)?;
    Ok(f.min(1.0 - f))
}

fn genotype_counts(column: &[u8]) -> [u64; 3] {
    let mut counts = [0u64; 3];
    for &d in column {
        if d != MISSING {
            counts[d as usize] += 1;
        }
    }
    counts
}

/// One-degree-of-freedom chi-square goodness-of-fit test of Hardy-Weinberg
/// proportions. Monomorphic columns return 1.
pub fn hwe_test(column: &[u8]) -> Result<f64> {
    let counts = genotype_counts(column);
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::UndefinedFrequency);
    }
    let n = total as f64;
    let f = (counts[1] + 2 * counts[2]) as f64 / (2.0 * n);
    if f <= 0.0 || f >= 1.0 {
        return Ok(1.0);
    }
    let expected = [
        n * (1.0 - f) * (1.0 - f),
        2.0 * n * f * (1.0 - f),
        n * f * f,
    ];
    let chi2: f64 = counts
        .iter()
        .zip(expected)
        .map(|(&o, e)| (o as f64 - e).powi(2) / e)
        .sum();
    // Upper tail of chi-square(1): P(Z^2 > x) = erfc(sqrt(x / 2)).
    Ok(erfc((chi2 / 2.0).sqrt()).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    pub snps_in: usize,
    pub removed_maf: usize,
    pub removed_hwe: usize,
    pub snps_out: usize,
    pub maf_min: f64,
    pub hwe_alpha: f64,
}

#[derive(Clone, Debug)]
pub struct QcOutcome {
    pub matrix: GenotypeMatrix,
    /// Indices of the retained SNPs in the input matrix, in input order.
    pub kept: Vec<usize>,
    pub report: QcReport,
}

/// Keeps SNPs with MAF >= `maf_min` and HWE p-value >= `hwe_alpha`.
///
/// A SNP failing both criteria is counted under `removed_maf` only. Columns
/// without any called genotype fail the MAF criterion.
pub fn filter_snps(matrix: &GenotypeMatrix, maf_min: f64, hwe_alpha: f64) -> Result<QcOutcome> {
    if !(0.0..0.5).contains(&maf_min) {
        return Err(Error::InvalidInput(format!(
            "maf_min {maf_min} outside [0, 0.5)"
        )));
    }
    if !(hwe_alpha > 0.0 && hwe_alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "hwe_alpha {hwe_alpha} outside (0, 1)"
        )));
    }
    let mut kept = Vec::new();
    let (mut removed_maf, mut removed_hwe) = (0, 0);
    for (j, col) in matrix.columns().enumerate() {
        match minor_allele_frequency(col) {
            Ok(maf) if maf >= maf_min => {}
            _ => {
                removed_maf += 1;
                continue;
            }
        }
        if hwe_test(col)? < hwe_alpha {
            removed_hwe += 1;
            continue;
        }
        kept.push(j);
    }
    let report = QcReport {
        snps_in: matrix.n_snps(),
        removed_maf,
        removed_hwe,
        snps_out: kept.len(),
        maf_min,
        hwe_alpha,
    };
    Ok(QcOutcome {
        matrix: matrix.select_snps(&kept),
        kept,
        report,
    })
}

/// Carrier indicator of allele1: 0 stays 0, 1 and 2 become 1.
pub fn dominant_encode(column: &[u8]) -> Vec<u8> {
    column
        .iter()
        .map(|&d| match d {
            0 => 0,
            MISSING => MISSING,
            _ => 1,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_counts(n0: usize, n1: usize, n2: usize) -> Vec<u8> {
        let mut v = vec![0u8; n0];
        v.extend(std::iter::repeat_n(1u8, n1));
        v.extend(std::iter::repeat_n(2u8, n2));
        v
    }

    #[test]
    fn maf_examples() {
        assert_eq!(minor_allele_frequency(&[0, 1, 2, 2, 1, 0]).unwrap(), 0.5);
        assert_eq!(minor_allele_frequency(&[2, 2, 2, 1]).unwrap(), 0.125);
        assert_eq!(minor_allele_frequency(&[0, 0, MISSING]).unwrap(), 0.0);
        assert!(matches!(
            minor_allele_frequency(&[MISSING, MISSING]),
            Err(Error::UndefinedFrequency)
        ));
    }

    #[test]
    fn hwe_examples() {
        assert!((hwe_test(&from_counts(25, 50, 25)).unwrap() - 1.0).abs() < 1e-12);
        let p = hwe_test(&from_counts(0, 100, 0)).unwrap();
        assert!(p < 1e-20 && p > 0.0, "p = {p}");
        assert_eq!(hwe_test(&from_counts(50, 0, 0)).unwrap(), 1.0);
        assert_eq!(hwe_test(&from_counts(0, 0, 7)).unwrap(), 1.0);
        assert!(hwe_test(&[MISSING]).is_err());
    }

    #[test]
    fn hwe_chi_square_value() {
        // counts (30, 40, 30): f = 0.5, expected (25, 50, 25), chi2 = 1 + 2 + 1 = 4.
        let p = hwe_test(&from_counts(30, 40, 30)).unwrap();
        assert!((p - 0.045_500_263_896_358_42).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn maf_filter_removes_rare() {
        // 100 individuals, 8 heterozygotes: MAF 0.04.
        let rare = from_counts(92, 8, 0);
        let common = from_counts(49, 42, 9);
        let g = GenotypeMatrix::from_columns(100, &[rare, common]).unwrap();
        let out = filter_snps(&g, 0.05, 1e-6).unwrap();
        assert_eq!(out.kept, vec![1]);
        assert_eq!(out.report.removed_maf, 1);
        assert_eq!(out.report.removed_hwe, 0);
    }

    #[test]
    fn double_failure_counts_once() {
        // all heterozygous except a few: MAF ~0.5 is fine, so build rare + HWE violation.
        let bad = from_counts(0, 6, 94); // allele1 freq 0.97 -> MAF 0.03, far from HWE
        let hwe_only = from_counts(0, 100, 0);
        let good = from_counts(25, 50, 25);
        let g = GenotypeMatrix::from_columns(100, &[bad, hwe_only, good]).unwrap();
        let out = filter_snps(&g, 0.05, 1e-6).unwrap();
        let r = &out.report;
        assert_eq!((r.removed_maf, r.removed_hwe, r.snps_out), (1, 1, 1));
        assert_eq!(r.snps_out, r.snps_in - r.removed_maf - r.removed_hwe);
        assert_eq!(out.matrix.column(0), g.column(2));
    }

    #[test]
    fn permissive_thresholds_are_identity() {
        let g = GenotypeMatrix::from_columns(
            6,
            &[
                vec![0, 0, 0, 0, 0, 0],
                vec![0, 1, 2, 1, 1, 0],
                vec![1, 1, 1, 1, 1, 1],
            ],
        )
        .unwrap();
        let out = filter_snps(&g, 0.0, 1e-300).unwrap();
        assert_eq!(out.matrix, g);
        assert_eq!(out.report.snps_out, 3);
    }

    #[test]
    fn threshold_validation() {
        let g = GenotypeMatrix::from_columns(2, &[vec![0, 1]]).unwrap();
        assert!(filter_snps(&g, 0.5, 0.01).is_err());
        assert!(filter_snps(&g, 0.05, 0.0).is_err());
        assert!(filter_snps(&g, 0.05, 1.0).is_err());
    }

    #[test]
    fn dominant_coding() {
        assert_eq!(dominant_encode(&[0, 1, 2]), vec![0, 1, 1]);
        assert_eq!(dominant_encode(&[0, 0, 0]), vec![0, 0, 0]);
        assert_eq!(dominant_encode(&[MISSING]), vec![MISSING]);
    }
}
