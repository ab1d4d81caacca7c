//! Genotype standardisation, principal components and the genetic
//! relatedness matrix.

use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::genotype_io::{thin_snps, GenotypeMatrix, SampleRecord, MISSING};
use crate::tsv::{self, Table};

/// Column-standardised genotypes.
#[derive(Clone, Debug)]
pub struct Standardized {
    /// `n x used.len()`; columns have zero mean and unit sample variance
    /// over called genotypes, with missing entries set to 0.
    pub values: DMatrix<f64>,
    pub used: Vec<usize>,
    pub excluded: Vec<usize>,
}

pub fn standardize(matrix: &GenotypeMatrix, indices: &[usize]) -> Standardized {
    let n = matrix.n_individuals();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(indices.len());
    let mut used = Vec::with_capacity(indices.len());
    let mut excluded = Vec::new();
    for &j in indices {
        let col = matrix.column(j);
        let called: Vec<f64> = col
            .iter()
            .filter(|&&d| d != MISSING)
            .map(|&d| d as f64)
            .collect();
        let c = called.len();
        let mean = called.iter().sum::<f64>() / c.max(1) as f64;
        let var = if c > 1 {
            called.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (c - 1) as f64
        } else {
            0.0
        };
        if var <= 0.0 {
            warn!("SNP column {j} has zero variance and is excluded");
            excluded.push(j);
            continue;
        }
        let sd = var.sqrt();
        cols.push(
            col.iter()
                .map(|&d| {
                    if d == MISSING {
                        0.0
                    } else {
                        (d as f64 - mean) / sd
                    }
                })
                .collect(),
        );
        used.push(j);
    }
    let values = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    Standardized {
        values,
        used,
        excluded,
    }
}

#[derive(Clone, Debug)]
pub struct PcaResult {
    /// `n x k` projections of individuals on the leading components.
    pub scores: DMatrix<f64>,
    /// `m' x k` orthonormal loading vectors.
    pub loadings: DMatrix<f64>,
    /// Nonincreasing covariance eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub snp_indices_used: Vec<usize>,
}

/// Eigenpairs sorted by decreasing eigenvalue.
fn sorted_eigen(sym: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Principal components of the standardised genotypes restricted to every
/// `thin_step`-th SNP.
pub fn pca(matrix: &GenotypeMatrix, k: usize, thin_step: usize) -> Result<PcaResult> {
    let indices = thin_snps(matrix.n_snps(), thin_step)?;
    pca_on(matrix, &indices, k)
}

pub fn pca_on(matrix: &GenotypeMatrix, indices: &[usize], k: usize) -> Result<PcaResult> {
    let std = standardize(matrix, indices);
    let s = &std.values;
    let (n, mp) = s.shape();
    if n < 2 || mp == 0 {
        return Err(Error::NoUsableData(format!(
            "PCA needs at least 2 individuals and 1 polymorphic SNP (have {n} and {mp})"
        )));
    }
    let denom = (n - 1) as f64;
    // Eigendecompose whichever Gram matrix is smaller.
    let (eigenvalues, loadings_full) = if mp <= n {
        let cov = s.tr_mul(s) / denom;
        sorted_eigen(cov)
    } else {
        let gram = s * s.transpose() / denom;
        let (values, u) = sorted_eigen(gram);
        let mut v = s.tr_mul(&u);
        for (c, &lambda) in values.iter().enumerate() {
            let norm = v.column(c).norm();
            if lambda > 0.0 && norm > 0.0 {
                v.column_mut(c).scale_mut(1.0 / norm);
            }
        }
        (values, v)
    };
    let top = eigenvalues
        .first()
        .copied()
        .unwrap_or(0.0)
        .max(f64::MIN_POSITIVE);
    let rank = eigenvalues.iter().filter(|&&l| l > 1e-9 * top).count();
    if k > rank {
        return Err(Error::Rank {
            requested: k,
            achievable: rank,
        });
    }
    let mut loadings = loadings_full.columns(0, k).into_owned();
    for mut col in loadings.column_iter_mut() {
        let (mut best, mut best_abs) = (0, -1.0);
        for (r, x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best = r;
                best_abs = x.abs();
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    let scores = s * &loadings;
    Ok(PcaResult {
        scores,
        loadings,
        eigenvalues: eigenvalues[..k].to_vec(),
        snp_indices_used: std.used,
    })
}

/// Genetic relatedness matrix `S S^T / m'`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kinship {
    pub matrix: DMatrix<f64>,
}

pub fn grm(matrix: &GenotypeMatrix, indices: &[usize]) -> Result<Kinship> {
    let std = standardize(matrix, indices);
    let mp = std.values.ncols();
    if mp == 0 {
        return Err(Error::NoUsableData(
            "no polymorphic SNPs for the GRM".into(),
        ));
    }
    let s = &std.values;
    let mut k = s * s.transpose() / mp as f64;
    // Enforce exact symmetry against rounding in the product.
    let n = k.nrows();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (k[(i, j)] + k[(j, i)]);
            k[(i, j)] = avg;
            k[(j, i)] = avg;
        }
    }
    Ok(Kinship { matrix: k })
}

pub fn write_pca_scores(
    path: impl AsRef<Path>,
    comments: &[String],
    samples: &[SampleRecord],
    pca: &PcaResult,
) -> Result<()> {
    let k = pca.scores.ncols();
    let names: Vec<String> = (1..=k).map(|c| format!("pc{c}")).collect();
    let mut header = vec!["individual_id"];
    header.extend(names.iter().map(String::as_str));
    let rows = samples.iter().enumerate().map(|(i, s)| {
        let mut row = vec![s.individual_id.clone()];
        row.extend((0..k).map(|c| tsv::fmt_f64(pca.scores[(i, c)])));
        row
    });
    tsv::write_table(path, comments, &header, rows)
}

/// Reads `individual_id, pc1..pck` and returns ids and an `n x k` matrix.
pub fn read_pca_scores(path: impl AsRef<Path>) -> Result<(Vec<String>, DMatrix<f64>)> {
    let table = Table::read(path)?;
    let k = table.header.len() - 1;
    let mut ids = Vec::with_capacity(table.rows.len());
    let mut values = Vec::with_capacity(table.rows.len() * k);
    for (line, row) in &table.rows {
        ids.push(row[0].clone());
        for f in &row[1..] {
            values.push(table.parse::<f64>(*line, f)?);
        }
    }
    Ok((ids.clone(), DMatrix::from_row_slice(ids.len(), k, &values)))
}

/// Long-format pairwise scatter data for every pair of components.
pub fn write_pca_scatter(
    path: impl AsRef<Path>,
    comments: &[String],
    samples: &[SampleRecord],
    pca: &PcaResult,
) -> Result<()> {
    let k = pca.scores.ncols();
    let mut rows = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for (i, s) in samples.iter().enumerate() {
                rows.push(vec![
                    format!("pc{}", a + 1),
                    format!("pc{}", b + 1),
                    s.individual_id.clone(),
                    s.population.clone().unwrap_or_else(|| "NA".into()),
                    tsv::fmt_f64(pca.scores[(i, a)]),
                    tsv::fmt_f64(pca.scores[(i, b)]),
                ]);
            }
        }
    }
    tsv::write_table(
        path,
        comments,
        &[
            "x_component",
            "y_component",
            "individual_id",
            "population",
            "x",
            "y",
        ],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hwe(n: usize, m: usize, seed: u64) -> GenotypeMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cols = Vec::new();
        for _ in 0..m {
            let f: f64 = rng.random_range(0.1..0.9);
            cols.push(
                (0..n)
                    .map(|_| (rng.random::<f64>() < f) as u8 + (rng.random::<f64>() < f) as u8)
                    .collect(),
            );
        }
        GenotypeMatrix::from_columns(n, &cols).unwrap()
    }

    #[test]
    fn standardize_examples() {
        let g =
            GenotypeMatrix::from_columns(3, &[vec![0, 1, 2], vec![0, MISSING, 2], vec![1, 1, 1]])
                .unwrap();
        let s = standardize(&g, &[0, 1, 2]);
        assert_eq!(s.used, vec![0, 1]);
        assert_eq!(s.excluded, vec![2]);
        let c0: Vec<f64> = s.values.column(0).iter().copied().collect();
        assert_eq!(c0, vec![-1.0, 0.0, 1.0]);
        assert_eq!(s.values[(1, 1)], 0.0);
    }

    #[test]
    fn two_clusters_split_on_pc1() {
        let a = [0u8, 2, 0, 2, 1, 0];
        let b = [2u8, 0, 1, 0, 0, 2];
        let mut cols = vec![Vec::new(); 6];
        for i in 0..10 {
            let row = if i < 5 { &a } else { &b };
            for (j, &d) in row.iter().enumerate() {
                cols[j].push(d);
            }
        }
        let g = GenotypeMatrix::from_columns(10, &cols).unwrap();
        let res = pca(&g, 1, 1).unwrap();
        let mut distinct: Vec<f64> = res
            .scores
            .column(0)
            .iter()
            .map(|x| (x * 1e9).round() / 1e9)
            .collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        assert_eq!(distinct.len(), 2);
        assert!(res.scores[(0, 0)] * res.scores[(9, 0)] < 0.0);
        // Rank one: a second component is not available.
        assert!(matches!(
            pca(&g, 2, 1),
            Err(Error::Rank {
                requested: 2,
                achievable: 1
            })
        ));
    }

    #[test]
    fn loadings_orthonormal_and_sign_fixed() {
        let g = random_hwe(40, 25, 3);
        for step in [1, 2] {
            let res = pca(&g, 5, step).unwrap();
            let gram = res.loadings.tr_mul(&res.loadings);
            assert!((gram - DMatrix::identity(5, 5)).abs().max() < 1e-8);
            for col in res.loadings.column_iter() {
                let top = col
                    .iter()
                    .copied()
                    .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                    .unwrap();
                assert!(top > 0.0);
            }
            assert!(res.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn wide_and_tall_routes_agree() {
        // 30 x 50 (wide) versus the same data viewed through the tall route on
        // a column subset is not comparable, so compare against the covariance
        // route directly.
        let g = random_hwe(30, 50, 11);
        let res = pca(&g, 4, 1).unwrap();
        let s = standardize(&g, &(0..50).collect::<Vec<_>>()).values;
        let cov = s.tr_mul(&s) / 29.0;
        for c in 0..4 {
            let v = res.loadings.column(c);
            let cv = &cov * v;
            assert!((cv - v * res.eigenvalues[c]).norm() < 1e-8);
        }
    }

    #[test]
    fn grm_properties() {
        let g = random_hwe(100, 1000, 5);
        let k = grm(&g, &(0..1000).collect::<Vec<_>>()).unwrap().matrix;
        let mean_diag = k.diagonal().mean();
        assert!((mean_diag - 1.0).abs() < 0.05, "mean diag {mean_diag}");
        assert_eq!(k, k.transpose());
        let eig = SymmetricEigen::new(k.clone());
        let min = eig.eigenvalues.min();
        assert!(min >= -1e-8 * k.trace() / 100.0);
    }

    #[test]
    fn grm_duplicate_individuals() {
        let mut cols = Vec::new();
        let base = random_hwe(6, 20, 9);
        for j in 0..20 {
            let mut c = base.column(j).to_vec();
            c.push(c[2]);
            cols.push(c);
        }
        let g = GenotypeMatrix::from_columns(7, &cols).unwrap();
        let k = grm(&g, &(0..20).collect::<Vec<_>>()).unwrap().matrix;
        assert!((k[(2, 6)] - k[(2, 2)]).abs() < 1e-12);
        assert!(grm(&g, &[]).is_err());
    }

    #[test]
    fn scores_tsv_round_trip() {
        let g = random_hwe(12, 30, 1);
        let res = pca(&g, 3, 1).unwrap();
        let samples: Vec<SampleRecord> = (0..12)
            .map(|i| SampleRecord {
                family_id: "F".into(),
                individual_id: format!("I{i}"),
                sex: crate::genotype_io::Sex::Male,
                phenotype_placeholder: -9,
                population: Some("CEU".into()),
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pca.tsv");
        write_pca_scores(&path, &["seed=1".into()], &samples, &res).unwrap();
        let (ids, scores) = read_pca_scores(&path).unwrap();
        assert_eq!(ids[11], "I11");
        assert_eq!(scores, res.scores);
        let scatter = dir.path().join("scatter.tsv");
        write_pca_scatter(&scatter, &[], &samples, &res).unwrap();
        assert_eq!(Table::read(&scatter).unwrap().rows.len(), 3 * 12);
    }
}
