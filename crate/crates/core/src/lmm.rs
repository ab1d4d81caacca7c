//! Linear mixed model scan in the spectral basis of the kinship matrix.
//!
//! With `K = U diag(s) U^T`, the model `y ~ N(X b, sg2 (K + delta I))`
//! becomes a weighted regression of `U^T y` on `U^T X` with weights
//! `1 / (s_i + delta)`. The variance ratio is estimated once on the null
//! model and held fixed for every SNP.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::assoc::{wald_p, AssocResult, FitStatus, SnpCoding};
use crate::error::{Error, Result};
use crate::genotype_io::{GenotypeMatrix, SnpRecord, MISSING};
use crate::linalg::{cholesky, cholesky_solve, min_residual_fraction};
use crate::popstruct::Kinship;

const LN_DELTA_MIN: f64 = -10.0;
const LN_DELTA_MAX: f64 = 10.0;
const GRID_POINTS: usize = 61;
const GOLDEN_REL_WIDTH: f64 = 1e-6;
const COLLINEAR_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpectralKinship {
    /// Columns are eigenvectors, ordered as `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    /// Nonincreasing, nonnegative.
    pub eigenvalues: Vec<f64>,
}

impl SpectralKinship {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let u = &self.eigenvectors;
        let scaled = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * self.eigenvalues[j]);
        scaled * u.transpose()
    }

    pub fn rotate_vector(&self, v: &[f64]) -> DVector<f64> {
        self.eigenvectors.tr_mul(&DVector::from_column_slice(v))
    }

    pub fn rotate(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.eigenvectors.tr_mul(m)
    }
}

pub fn eigendecompose_kinship(k: &Kinship) -> Result<SpectralKinship> {
    let m = &k.matrix;
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "kinship must be square and nonempty, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asym > 1e-8 * scale {
        return Err(Error::InvalidInput(format!(
            "kinship is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let floor = -1e-8 * m.trace().abs() / n as f64;
    let mut eigenvalues = Vec::with_capacity(n);
    for &j in &order {
        let v = eig.eigenvalues[j];
        if v < floor {
            return Err(Error::InvalidInput(format!(
                "kinship is not positive semidefinite (eigenvalue {v:e})"
            )));
        }
        eigenvalues.push(v.max(0.0));
    }
    let eigenvectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok(SpectralKinship {
        eigenvectors,
        eigenvalues,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmmFit {
    /// Residual-to-genetic variance ratio.
    pub delta: f64,
    pub sigma_g2: f64,
    pub log_likelihood: f64,
    pub beta: Vec<f64>,
    /// The optimum sits on the edge of the searched range.
    pub at_boundary: bool,
}

/// Phenotype and covariates expressed in the eigenbasis.
#[derive(Clone, Debug)]
pub struct RotatedData {
    pub y: DVector<f64>,
    /// Row-major `n x q`.
    x: Vec<f64>,
    q: usize,
    s: Vec<f64>,
}

impl RotatedData {
    pub fn new(y: &[f64], x: &DMatrix<f64>, spec: &SpectralKinship) -> Result<Self> {
        let n = spec.n();
        if y.len() != n || x.nrows() != n {
            return Err(Error::InvalidInput(format!(
                "phenotype ({}) and design ({}) rows must equal kinship size {n}",
                y.len(),
                x.nrows()
            )));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "phenotype and design must be finite".into(),
            ));
        }
        let q = x.ncols();
        if q == 0 || n <= q {
            return Err(Error::InvalidInput(format!(
                "design with {q} columns needs more than {q} rows"
            )));
        }
        let xr = spec.rotate(x);
        let mut rows = Vec::with_capacity(n * q);
        for i in 0..n {
            rows.extend(xr.row(i).iter());
        }
        Ok(Self {
            y: spec.rotate_vector(y),
            x: rows,
            q,
            s: spec.eigenvalues.clone(),
        })
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    fn weights(&self, delta: f64) -> Vec<f64> {
        self.s.iter().map(|s| 1.0 / (s + delta)).collect()
    }

    /// Weighted normal equations `X^T W X` and `X^T W y`.
    fn normal_equations(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let q = self.q;
        let mut a = vec![0.0; q * q];
        let mut b = vec![0.0; q];
        for (i, wi) in w.iter().enumerate() {
            let r = &self.x[i * q..(i + 1) * q];
            for j in 0..q {
                b[j] += wi * r[j] * self.y[i];
                for k in 0..=j {
                    a[j * q + k] += wi * r[j] * r[k];
                }
            }
        }
        for j in 0..q {
            for k in 0..j {
                a[k * q + j] = a[j * q + k];
            }
        }
        (a, b)
    }

    fn weighted_rss(&self, w: &[f64], beta: &[f64]) -> f64 {
        let q = self.q;
        w.iter()
            .enumerate()
            .map(|(i, wi)| {
                let fit: f64 = self.x[i * q..(i + 1) * q]
                    .iter()
                    .zip(beta)
                    .map(|(a, b)| a * b)
                    .sum();
                wi * (self.y[i] - fit).powi(2)
            })
            .sum()
    }

    /// Log-likelihood at arbitrary parameters.
    pub fn log_likelihood(&self, delta: f64, beta: &[f64], sigma_g2: f64) -> f64 {
        let n = self.n() as f64;
        let w = self.weights(delta);
        let log_det: f64 = self.s.iter().map(|s| (sigma_g2 * (s + delta)).ln()).sum();
        -0.5 * (n * (2.0 * std::f64::consts::PI).ln()
            + log_det
            + self.weighted_rss(&w, beta) / sigma_g2)
    }

    /// Generalised least squares at `delta`, with `sg2` profiled out.
    fn profile(&self, delta: f64) -> Result<(Vec<f64>, f64, f64)> {
        let w = self.weights(delta);
        let (mut a, mut beta) = self.normal_equations(&w);
        if min_residual_fraction(&a, self.q) < COLLINEAR_TOL || !cholesky(&mut a, self.q) {
            return Err(Error::ModelValidity(
                "covariate design is rank deficient".into(),
            ));
        }
        cholesky_solve(&a, self.q, &mut beta);
        let n = self.n() as f64;
        let sigma_g2 = self.weighted_rss(&w, &beta) / n;
        if !(sigma_g2 > 0.0) {
            return Err(Error::Numerical(
                "phenotype is fitted exactly by the covariates".into(),
            ));
        }
        let log_det: f64 = self.s.iter().map(|s| (s + delta).ln()).sum();
        let ll = -0.5 * (n * (2.0 * std::f64::consts::PI).ln() + log_det + n * sigma_g2.ln() + n);
        Ok((beta, sigma_g2, ll))
    }

    /// Fit with the variance ratio fixed at `delta`.
    pub fn fit_at(&self, delta: f64) -> Result<LmmFit> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "variance ratio {delta} must be positive"
            )));
        }
        let (beta, sigma_g2, log_likelihood) = self.profile(delta)?;
        Ok(LmmFit {
            delta,
            sigma_g2,
            log_likelihood,
            beta,
            at_boundary: false,
        })
    }

    fn profile_ll(&self, ln_delta: f64) -> Result<f64> {
        self.profile(ln_delta.exp()).map(|(_, _, ll)| ll)
    }

    /// Profiled maximum-likelihood fit of the variance ratio.
    pub fn fit_null(&self) -> Result<LmmFit> {
        let step = (LN_DELTA_MAX - LN_DELTA_MIN) / (GRID_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..GRID_POINTS)
            .map(|i| LN_DELTA_MIN + step * i as f64)
            .collect();
        let values = grid
            .iter()
            .map(|&g| self.profile_ll(g))
            .collect::<Result<Vec<_>>>()?;
        let best = (0..GRID_POINTS)
            .max_by(|&a, &b| values[a].total_cmp(&values[b]).then(b.cmp(&a)))
            .expect("grid is nonempty");
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(GRID_POINTS - 1)];
        let (mut ln_delta, mut ll) = (grid[best], values[best]);
        let (x, fx) = golden_section(lo, hi, |t| self.profile_ll(t))?;
        if fx > ll {
            ln_delta = x;
            ll = fx;
        }
        let at_boundary = best == 0 || best == GRID_POINTS - 1;
        if at_boundary {
            log::warn!("variance ratio optimum at search edge (ln delta = {ln_delta})");
        }
        let delta = ln_delta.exp();
        let (beta, sigma_g2, _) = self.profile(delta)?;
        Ok(LmmFit {
            delta,
            sigma_g2,
            log_likelihood: ll,
            beta,
            at_boundary,
        })
    }
}

fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a) > GOLDEN_REL_WIDTH * (a.abs() + b.abs()).max(1.0) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

pub fn fit_null_delta(y: &[f64], x: &DMatrix<f64>, spec: &SpectralKinship) -> Result<LmmFit> {
    RotatedData::new(y, x, spec)?.fit_null()
}

/// Genotypes rotated into the eigenbasis, reusable across phenotypes.
/// Missing calls are replaced by the SNP's mean dosage before rotation.
#[derive(Clone, Debug)]
pub struct RotatedGenotypes {
    /// `n x m`, column `j` is `U^T g_j`.
    pub values: DMatrix<f64>,
    pub coding: SnpCoding,
}

impl RotatedGenotypes {
    pub fn new(matrix: &GenotypeMatrix, spec: &SpectralKinship, coding: SnpCoding) -> Result<Self> {
        let n = matrix.n_individuals();
        if n != spec.n() {
            return Err(Error::InvalidInput(format!(
                "genotypes have {n} individuals, kinship has {}",
                spec.n()
            )));
        }
        let mut g = DMatrix::zeros(n, matrix.n_snps());
        for (j, col) in matrix.columns().enumerate() {
            let called: Vec<f64> = col
                .iter()
                .filter(|&&v| v != MISSING)
                .map(|&v| coding.value(v))
                .collect();
            let mean = if called.is_empty() {
                0.0
            } else {
                called.iter().sum::<f64>() / called.len() as f64
            };
            for (i, &v) in col.iter().enumerate() {
                g[(i, j)] = if v == MISSING { mean } else { coding.value(v) };
            }
        }
        Ok(Self {
            values: spec.rotate(&g),
            coding,
        })
    }
}

/// Per-SNP Wald tests with the variance ratio fixed at `null_fit.delta`.
///
/// The SNP effect is obtained from the null fit by a Schur-complement update,
/// so each SNP costs `O(n q)`. The residual variance is `RSS_w / (n - q - 1)`.
pub fn lmm_scan(
    rotated: &RotatedGenotypes,
    snps: &[SnpRecord],
    data: &RotatedData,
    null_fit: &LmmFit,
) -> Result<Vec<AssocResult>> {
    let n = data.n();
    let q = data.q;
    let m = rotated.values.ncols();
    if rotated.values.nrows() != n || snps.len() != m {
        return Err(Error::InvalidInput(
            "rotated genotypes, SNP records and phenotype disagree".into(),
        ));
    }
    if n <= q + 1 {
        return Err(Error::InvalidInput(
            "too few individuals for the scan design".into(),
        ));
    }
    let w = data.weights(null_fit.delta);
    let (mut a, _) = data.normal_equations(&w);
    if !cholesky(&mut a, q) {
        return Err(Error::ModelValidity(
            "covariate design is rank deficient".into(),
        ));
    }
    let beta0 = &null_fit.beta;
    let resid0: Vec<f64> = (0..n)
        .map(|i| {
            data.y[i]
                - data.x[i * q..(i + 1) * q]
                    .iter()
                    .zip(beta0)
                    .map(|(x, b)| x * b)
                    .sum::<f64>()
        })
        .collect();
    let rss0: f64 = resid0.iter().zip(&w).map(|(r, wi)| wi * r * r).sum();
    let dof = (n - q - 1) as f64;
    Ok((0..m)
        .into_par_iter()
        .map(|j| {
            let g = rotated.values.column(j);
            let mut b = vec![0.0; q];
            let mut c = 0.0;
            let mut e = 0.0;
            for i in 0..n {
                let wg = w[i] * g[i];
                c += wg * g[i];
                e += wg * resid0[i];
                for (bk, xk) in b.iter_mut().zip(&data.x[i * q..(i + 1) * q]) {
                    *bk += wg * xk;
                }
            }
            let mut ainv_b = b.clone();
            cholesky_solve(&a, q, &mut ainv_b);
            let d = c - b.iter().zip(&ainv_b).map(|(x, y)| x * y).sum::<f64>();
            let snp = &snps[j];
            if !(c > 0.0) || d < COLLINEAR_TOL * c {
                return AssocResult::failed(snp, rotated.coding, n, FitStatus::Degenerate);
            }
            let beta = e / d;
            let rss = (rss0 - e * e / d).max(0.0);
            let se = (rss / dof / d).sqrt();
            match wald_p(beta, se) {
                Ok(p) => {
                    let mut r = AssocResult::failed(snp, rotated.coding, n, FitStatus::Ok);
                    r.beta_snp = Some(beta);
                    r.se_snp = Some(se);
                    r.p_snp = Some(p);
                    r
                }
                Err(_) => AssocResult::failed(snp, rotated.coding, n, FitStatus::Degenerate),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, rank, |_, _| rng.random::<f64>() - 0.5);
        let k = &a * a.transpose();
        (&k + k.transpose()) * 0.5
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let spec = eigendecompose_kinship(&Kinship {
            matrix: DMatrix::identity(6, 6),
        })
        .unwrap();
        assert!(spec.eigenvalues.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn rank_one_spectrum() {
        let v = DVector::from_vec(vec![1.0, 2.0, -1.0, 0.5]);
        let spec = eigendecompose_kinship(&Kinship {
            matrix: &v * v.transpose(),
        })
        .unwrap();
        assert!((spec.eigenvalues[0] - v.norm_squared()).abs() < 1e-12);
        assert!(spec.eigenvalues[1..].iter().all(|&e| e.abs() < 1e-12));
    }

    #[test]
    fn reconstruction_and_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_psd(30, 40, &mut rng);
        let spec = eigendecompose_kinship(&Kinship { matrix: k.clone() }).unwrap();
        let err = (spec.reconstruct() - &k).norm() / k.norm();
        assert!(err < 1e-10, "{err}");
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let gram = spec.eigenvectors.tr_mul(&spec.eigenvectors);
        assert!((gram - DMatrix::<f64>::identity(30, 30)).amax() < 1e-10);
    }

    #[test]
    fn rejects_bad_kinship() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = 0.5;
        assert!(eigendecompose_kinship(&Kinship { matrix: m }).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(eigendecompose_kinship(&Kinship { matrix: m }).is_err());
    }

    /// Direct log-density of `N(X b, sg2 (K + delta I))` via a dense Cholesky.
    fn dense_log_likelihood(
        k: &DMatrix<f64>,
        x: &DMatrix<f64>,
        y: &[f64],
        delta: f64,
        beta: &[f64],
        sg2: f64,
    ) -> f64 {
        let n = y.len();
        let v = (k + DMatrix::identity(n, n) * delta) * sg2;
        let chol = v.cholesky().unwrap();
        let r = DVector::from_column_slice(y) - x * DVector::from_column_slice(beta);
        let sol = chol.solve(&r);
        let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + r.dot(&sol))
    }

    #[test]
    fn spectral_likelihood_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 20;
        let k = random_psd(n, 8, &mut rng);
        let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() });
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let spec = eigendecompose_kinship(&Kinship { matrix: k.clone() }).unwrap();
        let data = RotatedData::new(&y, &x, &spec).unwrap();
        for (delta, beta, sg2) in [
            (0.3, [0.1, 0.2], 1.5),
            (5.0, [-1.0, 2.0], 0.2),
            (1e-3, [0.0, 0.0], 3.0),
        ] {
            let a = data.log_likelihood(delta, &beta, sg2);
            let b = dense_log_likelihood(&k, &x, &y, delta, &beta, sg2);
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        let fit = data.fit_null().unwrap();
        let b = dense_log_likelihood(&k, &x, &y, fit.delta, &fit.beta, fit.sigma_g2);
        assert!((fit.log_likelihood - b).abs() < 1e-8);
    }

    #[test]
    fn identity_kinship_gives_ols_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 50;
        let x = DMatrix::from_fn(n, 3, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() });
        let y: Vec<f64> = (0..n)
            .map(|i| x[(i, 1)] * 2.0 + rng.random::<f64>())
            .collect();
        let spec = eigendecompose_kinship(&Kinship {
            matrix: DMatrix::identity(n, n),
        })
        .unwrap();
        let fit = fit_null_delta(&y, &x, &spec).unwrap();
        let ols = (x.transpose() * &x)
            .lu()
            .solve(&(x.transpose() * DVector::from_vec(y)))
            .unwrap();
        for (a, b) in fit.beta.iter().zip(ols.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    /// Ordinary least squares via QR with `sigma2 = RSS / (n - p)` and a
    /// two-sided normal p-value for the last coefficient.
    fn ols_last_p(x: &DMatrix<f64>, y: &[f64]) -> f64 {
        let (n, p) = x.shape();
        let qr = x.clone().qr();
        let yv = DVector::from_column_slice(y);
        let beta = qr
            .r()
            .solve_upper_triangular(&(qr.q().transpose() * &yv))
            .unwrap();
        let rss = (&yv - x * &beta).norm_squared();
        let rinv = qr.r().try_inverse().unwrap();
        let cov = &rinv * rinv.transpose() * (rss / (n - p) as f64);
        let z = beta[p - 1] / cov[(p - 1, p - 1)].sqrt();
        let normal = statrs::distribution::Normal::standard();
        2.0 * statrs::distribution::ContinuousCDF::sf(&normal, z.abs())
    }

    fn scan_fixture(
        seed: u64,
        n: usize,
        m: usize,
    ) -> (GenotypeMatrix, Vec<SnpRecord>, DMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<u8>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(0..3u8)).collect())
            .collect();
        let matrix = GenotypeMatrix::from_columns(n, &cols).unwrap();
        let snps = (0..m)
            .map(|j| SnpRecord {
                chromosome: "1".into(),
                snp_id: format!("s{j}"),
                genetic_distance: 0.0,
                bp_position: j as u64,
                allele1: 'A',
                allele2: 'C',
            })
            .collect();
        let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() });
        let y: Vec<f64> = (0..n)
            .map(|i| (rng.random::<f64>() < 0.3 + 0.3 * x[(i, 1)]) as u8 as f64)
            .collect();
        (matrix, snps, x, y)
    }

    fn ols_scan(matrix: &GenotypeMatrix, x: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
        let n = x.nrows();
        matrix
            .columns()
            .map(|col| {
                let full =
                    DMatrix::from_fn(n, 3, |i, j| if j < 2 { x[(i, j)] } else { col[i] as f64 });
                ols_last_p(&full, y)
            })
            .collect()
    }

    #[test]
    fn identity_kinship_scan_matches_ols() {
        let (matrix, snps, x, y) = scan_fixture(4, 120, 15);
        let spec = eigendecompose_kinship(&Kinship {
            matrix: DMatrix::identity(120, 120),
        })
        .unwrap();
        let data = RotatedData::new(&y, &x, &spec).unwrap();
        let fit = data.fit_null().unwrap();
        let rot = RotatedGenotypes::new(&matrix, &spec, SnpCoding::Additive).unwrap();
        let res = lmm_scan(&rot, &snps, &data, &fit).unwrap();
        for (r, p) in res.iter().zip(ols_scan(&matrix, &x, &y)) {
            assert!((r.p_snp.unwrap() - p).abs() < 1e-8, "{:?} vs {p}", r.p_snp);
        }
    }

    #[test]
    fn large_delta_approaches_ols() {
        let (matrix, snps, x, y) = scan_fixture(5, 80, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let spec = eigendecompose_kinship(&Kinship {
            matrix: random_psd(80, 30, &mut rng),
        })
        .unwrap();
        let data = RotatedData::new(&y, &x, &spec).unwrap();
        let fit = data.fit_at(1e8).unwrap();
        let rot = RotatedGenotypes::new(&matrix, &spec, SnpCoding::Additive).unwrap();
        let res = lmm_scan(&rot, &snps, &data, &fit).unwrap();
        for (r, p) in res.iter().zip(ols_scan(&matrix, &x, &y)) {
            assert!((r.p_snp.unwrap() - p).abs() < 1e-6);
        }
    }

    #[test]
    fn monomorphic_snp_is_degenerate() {
        let n = 30;
        let matrix = GenotypeMatrix::from_columns(n, &[vec![1; n]]).unwrap();
        let (_, snps, x, y) = scan_fixture(7, n, 1);
        let spec = eigendecompose_kinship(&Kinship {
            matrix: DMatrix::identity(n, n),
        })
        .unwrap();
        let data = RotatedData::new(&y, &x, &spec).unwrap();
        let fit = data.fit_null().unwrap();
        let rot = RotatedGenotypes::new(&matrix, &spec, SnpCoding::Additive).unwrap();
        assert_eq!(
            lmm_scan(&rot, &snps, &data, &fit).unwrap()[0].status,
            FitStatus::Degenerate
        );
    }
}
