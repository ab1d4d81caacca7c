//! Per-SNP logistic regression scans with covariate adjustment, optionally
//! with a SNP x covariate product term, reporting Wald p-values.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use libm::erfc;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype_io::{GenotypeMatrix, SnpRecord, MISSING};
use crate::linalg::{cholesky, cholesky_inverse_diag, cholesky_solve, min_residual_fraction};
use crate::tsv::{self, Table};

/// Standardised coefficients beyond this magnitude indicate separation.
const SEPARATION_LIMIT: f64 = 30.0;
/// Columns explaining more than `1 - COLLINEAR_TOL` of another are degenerate.
const COLLINEAR_TOL: f64 = 1e-9;
const MAX_HALVINGS: usize = 30;
/// Linear predictors this large after the iteration budget indicate divergence.
const DIVERGENT_ETA: f64 = 15.0;
/// Relative rounding allowance when comparing summed log-likelihoods.
const LL_ROUNDING: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnpCoding {
    Additive,
    Dominant,
}

impl SnpCoding {
    pub fn value(self, dosage: u8) -> f64 {
        match (self, dosage) {
            (SnpCoding::Additive, d) => d as f64,
            (SnpCoding::Dominant, 0) => 0.0,
            (SnpCoding::Dominant, _) => 1.0,
        }
    }
}

impl fmt::Display for SnpCoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnpCoding::Additive => "additive",
            SnpCoding::Dominant => "dominant",
        })
    }
}

impl FromStr for SnpCoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(SnpCoding::Additive),
            "dominant" => Ok(SnpCoding::Dominant),
            _ => Err(Error::InvalidInput(format!("unknown SNP coding '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    NotConverged,
    Separated,
    Degenerate,
}

impl fmt::Display for FitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitStatus::Ok => "ok",
            FitStatus::NotConverged => "not_converged",
            FitStatus::Separated => "separated",
            FitStatus::Degenerate => "degenerate",
        })
    }
}

impl FromStr for FitStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(FitStatus::Ok),
            "not_converged" => Ok(FitStatus::NotConverged),
            "separated" => Ok(FitStatus::Separated),
            "degenerate" => Ok(FitStatus::Degenerate),
            _ => Err(Error::InvalidInput(format!("unknown fit status '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IrlsOptions {
    /// Convergence threshold on the largest absolute coefficient change.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlmFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub log_likelihood: f64,
    /// Log-likelihood at the start and after every accepted update.
    pub log_likelihood_path: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Dot product with independent partial sums so the loop vectorises.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Column-major design plus scratch buffers reused across iterations.
struct Design<'a> {
    x: &'a DMatrix<f64>,
    weighted: DMatrix<f64>,
    scratch: Vec<f64>,
}

impl<'a> Design<'a> {
    fn new(x: &'a DMatrix<f64>) -> Self {
        Self {
            x,
            weighted: x.clone(),
            scratch: vec![0.0; x.nrows()],
        }
    }

    fn eta(&self, beta: &DVector<f64>, out: &mut DVector<f64>) {
        let n = self.x.nrows();
        let xs = self.x.as_slice();
        out.fill(0.0);
        for (j, b) in beta.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(&xs[j * n..(j + 1) * n]) {
                *o += b * x;
            }
        }
    }

    /// Log-likelihood at `eta`, storing fitted probabilities in `mu`.
    fn evaluate(y: &[f64], eta: &DVector<f64>, mu: &mut DVector<f64>) -> f64 {
        let mut ll = 0.0;
        for ((&yi, &e), m) in y.iter().zip(eta.iter()).zip(mu.iter_mut()) {
            let t = (-e.abs()).exp();
            let one_t = 1.0 + t;
            *m = if e >= 0.0 { 1.0 / one_t } else { t / one_t };
            ll += yi * e - (e.max(0.0) + one_t.ln());
        }
        ll
    }

    /// `X^T W X` into `hess` and `X^T (y - mu)` into `grad`.
    fn normal_equations(
        &mut self,
        y: &[f64],
        mu: &DVector<f64>,
        hess: &mut DMatrix<f64>,
        grad: &mut DVector<f64>,
    ) {
        let (n, q) = self.x.shape();
        for (sw, m) in self.scratch.iter_mut().zip(mu.iter()) {
            *sw = (m * (1.0 - m)).sqrt();
        }
        let xs = self.x.as_slice();
        let ws = self.weighted.as_mut_slice();
        for j in 0..q {
            for ((d, s), w) in ws[j * n..(j + 1) * n]
                .iter_mut()
                .zip(&xs[j * n..(j + 1) * n])
                .zip(&self.scratch)
            {
                *d = s * w;
            }
        }
        for a in 0..q {
            let ca = &ws[a * n..(a + 1) * n];
            for b in 0..=a {
                let v = dot(ca, &ws[b * n..(b + 1) * n]);
                hess[(a, b)] = v;
                hess[(b, a)] = v;
            }
        }
        for ((r, yi), m) in self.scratch.iter_mut().zip(y).zip(mu.iter()) {
            *r = yi - m;
        }
        for a in 0..q {
            grad[a] = dot(&xs[a * n..(a + 1) * n], &self.scratch);
        }
    }
}

/// `X^T X`, with only the lower triangle computed.
fn gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, q) = x.shape();
    let xs = x.as_slice();
    let mut g = DMatrix::zeros(q, q);
    for a in 0..q {
        for b in 0..=a {
            let v = dot(&xs[a * n..(a + 1) * n], &xs[b * n..(b + 1) * n]);
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    g
}

/// Sample standard deviation of each column (0 for the intercept, 1 for other
/// constant columns), read off the Gram matrix of a design whose first column
/// is all ones.
fn column_scales(gram: &DMatrix<f64>, n: usize) -> Vec<f64> {
    let n = n as f64;
    (0..gram.ncols())
        .map(|j| {
            // The intercept absorbs arbitrary covariate offsets, so its
            // magnitude says nothing about separation.
            if j == 0 {
                return 0.0;
            }
            let sum = gram[(0, j)];
            let var = (gram[(j, j)] - sum * sum / n) / (n - 1.0).max(1.0);
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}

/// IRLS on an `n x q` design whose first column is the intercept.
fn irls(
    x: &DMatrix<f64>,
    y: &[f64],
    start: Option<&[f64]>,
    opts: &IrlsOptions,
) -> std::result::Result<GlmFit, FitStatus> {
    let (n, q) = x.shape();
    let gram = gram(x);
    if n <= q || min_residual_fraction(gram.as_slice(), q) < COLLINEAR_TOL {
        return Err(FitStatus::Degenerate);
    }
    let cases: f64 = y.iter().sum();
    if cases <= 0.0 || cases >= n as f64 {
        return Err(FitStatus::Separated);
    }
    let scales = column_scales(&gram, n);
    let mut d = Design::new(x);
    let mut beta = match start {
        Some(s) => DVector::from_column_slice(s),
        None => {
            let mut b = DVector::zeros(q);
            let ybar = cases / n as f64;
            b[0] = (ybar / (1.0 - ybar)).ln();
            b
        }
    };
    let mut eta = DVector::zeros(n);
    let mut trial_eta = DVector::zeros(n);
    let mut mu = DVector::zeros(n);
    let mut trial_mu = DVector::zeros(n);
    let mut hess = DMatrix::zeros(q, q);
    let mut grad = DVector::zeros(q);
    d.eta(&beta, &mut eta);
    let mut ll = Design::evaluate(y, &eta, &mut mu);
    let mut path = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = beta.clone();
    while iterations < opts.max_iter {
        d.normal_equations(y, &mu, &mut hess, &mut grad);
        // `hess` is symmetric, so its column-major storage is also row-major.
        if !cholesky(hess.as_mut_slice(), q) {
            return Err(saturation_status(eta.as_slice()));
        }
        let mut step = grad.clone();
        cholesky_solve(hess.as_slice(), q, step.as_mut_slice());
        iterations += 1;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            trial.copy_from(&beta);
            trial.axpy(scale, &step, 1.0);
            d.eta(&trial, &mut trial_eta);
            let trial_ll = Design::evaluate(y, &trial_eta, &mut trial_mu);
            // Near the optimum the gain of a Newton step drops below the
            // rounding error of the summed log-likelihood; still take it.
            if trial_ll >= ll - LL_ROUNDING * ll.abs() {
                ll = trial_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        let change = if accepted {
            let change = (&trial - &beta).amax();
            std::mem::swap(&mut beta, &mut trial);
            std::mem::swap(&mut eta, &mut trial_eta);
            std::mem::swap(&mut mu, &mut trial_mu);
            path.push(ll);
            change
        } else {
            // No ascent possible at machine precision: stationary point.
            0.0
        };
        if beta
            .iter()
            .zip(&scales)
            .any(|(b, s)| !(b * s).is_finite() || (b * s).abs() > SEPARATION_LIMIT)
        {
            return Err(FitStatus::Separated);
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        // Coefficients still drifting with fitted probabilities pinned at 0 or 1.
        if eta.iter().any(|e| e.abs() > DIVERGENT_ETA) {
            return Err(FitStatus::Separated);
        }
        return Err(FitStatus::NotConverged);
    }
    d.normal_equations(y, &mu, &mut hess, &mut grad);
    if !cholesky(hess.as_mut_slice(), q) {
        return Err(saturation_status(eta.as_slice()));
    }
    let standard_errors: Vec<f64> = cholesky_inverse_diag(hess.as_slice(), q)
        .iter()
        .map(|v| v.sqrt())
        .collect();
    if standard_errors.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(FitStatus::Degenerate);
    }
    Ok(GlmFit {
        coefficients: beta.as_slice().to_vec(),
        standard_errors,
        log_likelihood: ll,
        log_likelihood_path: path,
        iterations,
        converged,
    })
}

fn saturation_status(eta: &[f64]) -> FitStatus {
    if eta.iter().any(|e| e.abs() > 30.0) {
        FitStatus::Separated
    } else {
        FitStatus::Degenerate
    }
}

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares. The design must contain an intercept as its first column.
pub fn logistic_irls(
    design: &DMatrix<f64>,
    y: &[f64],
    opts: &IrlsOptions,
) -> std::result::Result<GlmFit, FitStatus> {
    assert_eq!(
        y.len(),
        design.nrows(),
        "response length must match design rows"
    );
    irls(design, y, None, opts)
}

/// Two-sided normal p-value of `beta / se`.
pub fn wald_p(beta: f64, se: f64) -> Result<f64> {
    if !(se > 0.0) {
        return Err(Error::InvalidInput(format!(
            "standard error {se} must be positive"
        )));
    }
    let z = (beta / se).abs();
    Ok(erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub covariates: Vec<String>,
    pub interaction_covariate: Option<String>,
    pub snp_coding: SnpCoding,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            covariates: ["sex", "smoking", "bmi", "pc1", "pc2", "pc3", "pc4", "pc5"]
                .map(String::from)
                .to_vec(),
            interaction_covariate: None,
            snp_coding: SnpCoding::Additive,
            tol: 1e-8,
            max_iter: 25,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.interaction_covariate {
            if !self.covariates.contains(c) {
                return Err(Error::Config(format!(
                    "interaction covariate '{c}' must also be listed among the covariates"
                )));
            }
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config(
                "IRLS tolerance and iteration limit must be positive".into(),
            ));
        }
        Ok(())
    }

    fn irls(&self) -> IrlsOptions {
        IrlsOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

/// Named `n x c` covariate block without missing values.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariateMatrix {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

impl CovariateMatrix {
    pub fn new(names: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::InvalidInput(
                "covariate names and columns differ".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "covariates must be complete and finite".into(),
            ));
        }
        Ok(Self { names, values })
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Config(format!("covariate '{name}' not available")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssocResult {
    pub snp_id: String,
    pub chromosome: String,
    pub position: u64,
    pub coding: SnpCoding,
    pub n_used: usize,
    pub beta_snp: Option<f64>,
    pub se_snp: Option<f64>,
    pub p_snp: Option<f64>,
    pub beta_int: Option<f64>,
    pub se_int: Option<f64>,
    pub p_int: Option<f64>,
    pub status: FitStatus,
}

impl AssocResult {
    pub(crate) fn failed(
        snp: &SnpRecord,
        coding: SnpCoding,
        n_used: usize,
        status: FitStatus,
    ) -> Self {
        Self {
            snp_id: snp.snp_id.clone(),
            chromosome: snp.chromosome.clone(),
            position: snp.bp_position,
            coding,
            n_used,
            beta_snp: None,
            se_snp: None,
            p_snp: None,
            beta_int: None,
            se_int: None,
            p_int: None,
            status,
        }
    }
}

fn check_inputs(
    matrix: &GenotypeMatrix,
    snps: &[SnpRecord],
    y: &[u8],
    covs: &CovariateMatrix,
) -> Result<()> {
    let n = matrix.n_individuals();
    if snps.len() != matrix.n_snps() {
        return Err(Error::InvalidInput(format!(
            "{} SNP records for {} genotype columns",
            snps.len(),
            matrix.n_snps()
        )));
    }
    if y.len() != n || covs.values.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "phenotype ({}) and covariate ({}) rows must equal {n} individuals",
            y.len(),
            covs.values.nrows()
        )));
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::InvalidInput("phenotypes must be 0/1".into()));
    }
    Ok(())
}

struct ScanPlan<'a> {
    covs: &'a CovariateMatrix,
    interaction: Option<usize>,
    coding: SnpCoding,
    opts: IrlsOptions,
    /// Null-model coefficients `[intercept, covariates...]` for warm starts.
    null_beta: Option<Vec<f64>>,
}

impl ScanPlan<'_> {
    fn q(&self) -> usize {
        2 + self.covs.names.len() + self.interaction.is_some() as usize
    }

    fn fit_one(&self, column: &[u8], snp: &SnpRecord, y: &[u8]) -> AssocResult {
        let c = self.covs.names.len();
        let q = self.q();
        let used: Vec<usize> = (0..column.len())
            .filter(|&i| column[i] != MISSING)
            .collect();
        let n_used = used.len();
        let g: Vec<f64> = used.iter().map(|&i| self.coding.value(column[i])).collect();
        let x = DMatrix::from_fn(n_used, q, |r, j| match j {
            0 => 1.0,
            1 => g[r],
            j if j < c + 2 => self.covs.values[(used[r], j - 2)],
            _ => g[r] * self.covs.values[(used[r], self.interaction.expect("product column"))],
        });
        let yy: Vec<f64> = used.iter().map(|&i| y[i] as f64).collect();
        let start = self.null_beta.as_ref().map(|nb| {
            let mut s = Vec::with_capacity(q);
            s.push(nb[0]);
            s.push(0.0);
            s.extend_from_slice(&nb[1..]);
            if self.interaction.is_some() {
                s.push(0.0);
            }
            s
        });
        match irls(&x, &yy, start.as_deref(), &self.opts) {
            Ok(fit) => {
                let (b, s) = (fit.coefficients[1], fit.standard_errors[1]);
                let mut r = AssocResult::failed(snp, self.coding, n_used, FitStatus::Ok);
                r.beta_snp = Some(b);
                r.se_snp = Some(s);
                r.p_snp = wald_p(b, s).ok();
                if self.interaction.is_some() {
                    let (b, s) = (fit.coefficients[q - 1], fit.standard_errors[q - 1]);
                    r.beta_int = Some(b);
                    r.se_int = Some(s);
                    r.p_int = wald_p(b, s).ok();
                }
                r
            }
            Err(status) => AssocResult::failed(snp, self.coding, n_used, status),
        }
    }
}

fn null_fit(y: &[u8], covs: &CovariateMatrix, opts: &IrlsOptions) -> Option<Vec<f64>> {
    let n = y.len();
    let x = DMatrix::from_fn(n, covs.names.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            covs.values[(i, j - 1)]
        }
    });
    let yy: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    irls(&x, &yy, None, opts).ok().map(|f| f.coefficients)
}

fn run_scan(
    matrix: &GenotypeMatrix,
    snps: &[SnpRecord],
    y: &[u8],
    covs: &CovariateMatrix,
    config: &ScanConfig,
    interaction: Option<usize>,
) -> Result<Vec<AssocResult>> {
    config.validate()?;
    check_inputs(matrix, snps, y, covs)?;
    let opts = config.irls();
    let plan = ScanPlan {
        covs,
        interaction,
        coding: config.snp_coding,
        opts,
        null_beta: null_fit(y, covs, &opts),
    };
    Ok((0..matrix.n_snps())
        .into_par_iter()
        .map(|j| plan.fit_one(matrix.column(j), &snps[j], y))
        .collect())
}

/// Fits `[1 | snp | covariates]` per SNP and reports the SNP Wald test.
pub fn scan_snp(
    matrix: &GenotypeMatrix,
    snps: &[SnpRecord],
    y: &[u8],
    covs: &CovariateMatrix,
    config: &ScanConfig,
) -> Result<Vec<AssocResult>> {
    run_scan(matrix, snps, y, covs, config, None)
}

/// Fits `[1 | snp | covariates | snp * cov]` per SNP and reports the Wald
/// tests of the SNP and of the product term.
pub fn scan_snp_x_cov(
    matrix: &GenotypeMatrix,
    snps: &[SnpRecord],
    y: &[u8],
    covs: &CovariateMatrix,
    config: &ScanConfig,
) -> Result<Vec<AssocResult>> {
    let name = config.interaction_covariate.as_deref().ok_or_else(|| {
        Error::Config("SNP x covariate scan needs an interaction covariate".into())
    })?;
    let k = covs.index_of(name)?;
    run_scan(matrix, snps, y, covs, config, Some(k))
}

pub const RESULT_COLUMNS: [&str; 12] = [
    "snp_id",
    "chromosome",
    "position",
    "coding",
    "n_used",
    "beta_snp",
    "se_snp",
    "p_snp",
    "beta_int",
    "se_int",
    "p_int",
    "status",
];

pub fn write_results(
    path: impl AsRef<Path>,
    comments: &[String],
    results: &[AssocResult],
) -> Result<()> {
    let rows = results.iter().map(|r| {
        vec![
            r.snp_id.clone(),
            r.chromosome.clone(),
            r.position.to_string(),
            r.coding.to_string(),
            r.n_used.to_string(),
            tsv::fmt_opt(r.beta_snp),
            tsv::fmt_opt(r.se_snp),
            tsv::fmt_opt(r.p_snp),
            tsv::fmt_opt(r.beta_int),
            tsv::fmt_opt(r.se_int),
            tsv::fmt_opt(r.p_int),
            r.status.to_string(),
        ]
    });
    tsv::write_table(path, comments, &RESULT_COLUMNS, rows)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<AssocResult>> {
    let t = Table::read(path)?;
    if t.header != RESULT_COLUMNS {
        return Err(Error::Parse {
            path: t.path.clone(),
            line: 1,
            msg: "unexpected results header".into(),
        });
    }
    t.rows
        .iter()
        .map(|(line, r)| {
            Ok(AssocResult {
                snp_id: r[0].clone(),
                chromosome: r[1].clone(),
                position: t.parse(*line, &r[2])?,
                coding: r[3].parse()?,
                n_used: t.parse(*line, &r[4])?,
                beta_snp: tsv::parse_opt(&r[5]),
                se_snp: tsv::parse_opt(&r[6]),
                p_snp: tsv::parse_opt(&r[7]),
                beta_int: tsv::parse_opt(&r[8]),
                se_int: tsv::parse_opt(&r[9]),
                p_int: tsv::parse_opt(&r[10]),
                status: r[11].parse()?,
            })
        })
        .collect()
}
