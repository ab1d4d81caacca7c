//! Covariate simulation: smoking from sex and subpopulation, bmi from the
//! principal components and smoking, and a latent treatment exposure driven
//! by sex, bmi and population.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype_io::{SampleRecord, Sex};
use crate::tsv::{self, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subpopulation {
    European,
    African,
    Asian,
}

impl Subpopulation {
    const ALL: [Subpopulation; 3] = [
        Subpopulation::European,
        Subpopulation::African,
        Subpopulation::Asian,
    ];
}

/// Smoking probability per subpopulation and sex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmokingRates {
    /// `(male, female)` per subpopulation.
    pub rates: BTreeMap<Subpopulation, (f64, f64)>,
}

impl SmokingRates {
    pub fn get(&self, subpop: Subpopulation, sex: Sex) -> Result<f64> {
        let (male, female) = self
            .rates
            .get(&subpop)
            .copied()
            .ok_or_else(|| Error::Config(format!("no smoking rates for {subpop:?}")))?;
        match sex {
            Sex::Male => Ok(male),
            Sex::Female => Ok(female),
            Sex::Unknown => Err(Error::InvalidInput(
                "smoking rates are sex specific; sample has unknown sex".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (sp, &(m, f)) in &self.rates {
            if !(0.0..=1.0).contains(&m) || !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!(
                    "smoking rates for {sp:?} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

pub fn default_smoking_rates() -> SmokingRates {
    let rates = Subpopulation::ALL
        .into_iter()
        .zip([(0.37, 0.27), (0.438, 0.129), (0.457, 0.048)])
        .collect();
    SmokingRates { rates }
}

/// HapMap III population codes in the order used to index treatment
/// location shifts.
pub const HAPMAP_POPULATIONS: [&str; 11] = [
    "MEX", "YRI", "ASW", "CEU", "MKK", "CHB", "CHD", "GIH", "JPT", "LWK", "TSI",
];

pub fn default_subpopulation_map() -> BTreeMap<String, Subpopulation> {
    use Subpopulation::*;
    [
        ("CEU", European),
        ("TSI", European),
        ("MEX", European),
        ("YRI", African),
        ("ASW", African),
        ("MKK", African),
        ("LWK", African),
        ("CHB", Asian),
        ("CHD", Asian),
        ("JPT", Asian),
        ("GIH", Asian),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Treatment location shifts: population 1 gets `-inf`, populations 2..11
/// the ten published values, in [`HAPMAP_POPULATIONS`] order.
pub fn default_gamma_map() -> BTreeMap<String, f64> {
    let published = [
        f64::NEG_INFINITY,
        -0.1,
        0.0,
        0.15,
        -0.45,
        0.35,
        0.6,
        -0.4,
        0.05,
        0.1,
    ];
    std::iter::once(f64::NEG_INFINITY)
        .chain(published)
        .zip(HAPMAP_POPULATIONS)
        .map(|(g, p)| (p.to_string(), g))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovSimConfig {
    pub heritability: f64,
    pub residual_sd: f64,
    pub nonsmoker_offset: f64,
    pub bmi_baseline: f64,
    pub gamma: BTreeMap<String, f64>,
    pub subpop_map: BTreeMap<String, Subpopulation>,
    pub smoking_rates: SmokingRates,
    pub seed: u64,
}

impl Default for CovSimConfig {
    fn default() -> Self {
        Self {
            heritability: 0.60,
            residual_sd: 4.0,
            nonsmoker_offset: 1.5,
            bmi_baseline: 25.0,
            gamma: default_gamma_map(),
            subpop_map: default_subpopulation_map(),
            smoking_rates: default_smoking_rates(),
            seed: 0,
        }
    }
}

impl CovSimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.heritability) {
            return Err(Error::Config(format!(
                "heritability {} outside [0, 1)",
                self.heritability
            )));
        }
        if !(self.residual_sd > 0.0 && self.residual_sd.is_finite()) {
            return Err(Error::Config(format!(
                "residual_sd {} must be positive",
                self.residual_sd
            )));
        }
        if self
            .gamma
            .values()
            .any(|g| g.is_nan() || *g == f64::INFINITY)
        {
            return Err(Error::Config("gamma values must be finite or -inf".into()));
        }
        self.smoking_rates.validate()
    }
}

fn subpop_of(
    populations: &[String],
    subpop_map: &BTreeMap<String, Subpopulation>,
) -> Result<Vec<Subpopulation>> {
    populations
        .iter()
        .map(|p| {
            subpop_map.get(p).copied().ok_or_else(|| {
                Error::Config(format!("population '{p}' has no subpopulation mapping"))
            })
        })
        .collect()
}

pub fn simulate_smoking<R: Rng + ?Sized>(
    sexes: &[Sex],
    populations: &[String],
    subpop_map: &BTreeMap<String, Subpopulation>,
    rates: &SmokingRates,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let subpops = subpop_of(populations, subpop_map)?;
    let probs = sexes
        .iter()
        .zip(&subpops)
        .map(|(&sex, &sp)| rates.get(sp, sex))
        .collect::<Result<Vec<_>>>()?;
    Ok(probs
        .into_iter()
        .map(|p| (rng.random::<f64>() < p) as u8)
        .collect())
}

fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Polygenic bmi score `pcs * beta` with standard normal `beta`, rescaled so
/// that var(g) / (var(g) + residual_sd^2) equals the heritability exactly.
pub fn genetic_score<R: Rng + ?Sized>(
    pcs: &DMatrix<f64>,
    config: &CovSimConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = pcs.nrows();
    let h = config.heritability;
    if h == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let beta: Vec<f64> = (0..pcs.ncols())
        .map(|_| StandardNormal.sample(rng))
        .collect();
    let raw: Vec<f64> = (0..n)
        .map(|i| (0..pcs.ncols()).map(|c| pcs[(i, c)] * beta[c]).sum())
        .collect();
    let var = sample_variance(&raw);
    if !(var > 0.0) {
        return Err(Error::Numerical(
            "principal components give a constant bmi score".into(),
        ));
    }
    let target = h * config.residual_sd.powi(2) / (1.0 - h);
    let scale = (target / var).sqrt();
    Ok(raw.into_iter().map(|g| g * scale).collect())
}

/// bmi = baseline + offset * [nonsmoker] + g + e, with g from
/// [`genetic_score`] and e ~ N(0, residual_sd^2).
pub fn simulate_bmi<R: Rng + ?Sized>(
    pcs: &DMatrix<f64>,
    smoking: &[u8],
    config: &CovSimConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    config.validate()?;
    if smoking.len() != pcs.nrows() {
        return Err(Error::InvalidInput("pcs and smoking lengths differ".into()));
    }
    let genetic = genetic_score(pcs, config, rng)?;
    let noise = Normal::new(0.0, config.residual_sd).map_err(|e| Error::Config(e.to_string()))?;
    Ok(genetic
        .iter()
        .zip(smoking)
        .map(|(&g, &s)| {
            let offset = if s == 0 { config.nonsmoker_offset } else { 0.0 };
            config.bmi_baseline + offset + g + noise.sample(rng)
        })
        .collect())
}

/// `1 / ((1 + 2 [male]) (1 + exp(25 + gamma - bmi)))`.
pub fn treatment_probability(sex: Sex, bmi: f64, gamma: f64) -> f64 {
    let z = 25.0 + gamma - bmi;
    // 1 / (1 + e^z) evaluated without overflow.
    let logistic = if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    };
    let sex_factor = if sex.is_male() { 3.0 } else { 1.0 };
    logistic / sex_factor
}

pub fn simulate_treatment<R: Rng + ?Sized>(
    sexes: &[Sex],
    bmi: &[f64],
    gamma: &BTreeMap<String, f64>,
    populations: &[String],
    rng: &mut R,
) -> Result<Vec<u8>> {
    let probs = sexes
        .iter()
        .zip(bmi)
        .zip(populations)
        .map(|((&sex, &b), pop)| {
            let g = gamma
                .get(pop)
                .ok_or_else(|| Error::Config(format!("no gamma for population '{pop}'")))?;
            Ok(treatment_probability(sex, b, *g))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(probs
        .into_iter()
        .map(|p| (rng.random::<f64>() < p) as u8)
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovariateTable {
    pub individual_id: Vec<String>,
    pub sex: Vec<Sex>,
    pub smoking: Vec<u8>,
    pub bmi: Vec<f64>,
    pub treatment: Option<Vec<u8>>,
    /// `n x k` principal component scores.
    pub pcs: DMatrix<f64>,
    pub population: Vec<String>,
}

impl CovariateTable {
    pub fn len(&self) -> usize {
        self.individual_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individual_id.is_empty()
    }

    /// Numeric column by name: `sex` (1 = male), `smoking`, `bmi`,
    /// `treatment` or `pc<k>`.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        match name {
            "sex" => Ok(self.sex.iter().map(|s| s.is_male() as u8 as f64).collect()),
            "smoking" => Ok(self.smoking.iter().map(|&s| s as f64).collect()),
            "bmi" => Ok(self.bmi.clone()),
            "treatment" => self
                .treatment
                .as_ref()
                .map(|t| t.iter().map(|&x| x as f64).collect())
                .ok_or_else(|| Error::Config("covariate 'treatment' was not simulated".into())),
            _ => {
                let k = name
                    .strip_prefix("pc")
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&k| k >= 1 && k <= self.pcs.ncols())
                    .ok_or_else(|| Error::Config(format!("unknown covariate '{name}'")))?;
                Ok(self.pcs.column(k - 1).iter().copied().collect())
            }
        }
    }

    /// `n x names.len()` design block.
    pub fn design(&self, names: &[String]) -> Result<DMatrix<f64>> {
        let cols = names
            .iter()
            .map(|n| self.column(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(self.len(), cols.len(), |i, j| cols[j][i]))
    }

    pub fn write(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let k = self.pcs.ncols();
        let pc_names: Vec<String> = (1..=k).map(|c| format!("pc{c}")).collect();
        let mut header = vec!["individual_id", "sex", "smoking", "bmi", "treatment"];
        header.extend(pc_names.iter().map(String::as_str));
        header.push("population");
        let rows = (0..self.len()).map(|i| {
            let mut row = vec![
                self.individual_id[i].clone(),
                self.sex[i].code().to_string(),
                self.smoking[i].to_string(),
                tsv::fmt_f64(self.bmi[i]),
                self.treatment
                    .as_ref()
                    .map_or_else(|| "NA".to_string(), |t| t[i].to_string()),
            ];
            row.extend((0..k).map(|c| tsv::fmt_f64(self.pcs[(i, c)])));
            row.push(self.population[i].clone());
            row
        });
        tsv::write_table(path, comments, &header, rows)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let t = Table::read(path)?;
        let idx = |name: &str| t.column_index(name);
        let (c_id, c_sex, c_smk, c_bmi, c_trt, c_pop) = (
            idx("individual_id")?,
            idx("sex")?,
            idx("smoking")?,
            idx("bmi")?,
            idx("treatment")?,
            idx("population")?,
        );
        let pc_cols: Vec<usize> = (1..)
            .map_while(|k| t.column_index(&format!("pc{k}")).ok())
            .collect();
        let n = t.rows.len();
        let mut table = CovariateTable {
            individual_id: Vec::with_capacity(n),
            sex: Vec::with_capacity(n),
            smoking: Vec::with_capacity(n),
            bmi: Vec::with_capacity(n),
            treatment: None,
            pcs: DMatrix::zeros(n, pc_cols.len()),
            population: Vec::with_capacity(n),
        };
        let mut treatment = Vec::with_capacity(n);
        let mut all_na = true;
        for (i, (line, row)) in t.rows.iter().enumerate() {
            table.individual_id.push(row[c_id].clone());
            table.sex.push(Sex::from_code(&row[c_sex]));
            table.smoking.push(t.parse(*line, &row[c_smk])?);
            table.bmi.push(t.parse(*line, &row[c_bmi])?);
            if row[c_trt] != "NA" {
                all_na = false;
                treatment.push(t.parse(*line, &row[c_trt])?);
            } else {
                treatment.push(0);
            }
            for (c, &col) in pc_cols.iter().enumerate() {
                table.pcs[(i, c)] = t.parse(*line, &row[col])?;
            }
            table.population.push(row[c_pop].clone());
        }
        if !all_na {
            table.treatment = Some(treatment);
        }
        Ok(table)
    }
}

/// Runs the full cascade (smoking, bmi, treatment) from one random stream
/// seeded by `config.seed`.
pub fn simulate_covariates(
    samples: &[SampleRecord],
    pcs: &DMatrix<f64>,
    config: &CovSimConfig,
) -> Result<CovariateTable> {
    config.validate()?;
    if pcs.nrows() != samples.len() {
        return Err(Error::InvalidInput(format!(
            "{} PC rows for {} samples",
            pcs.nrows(),
            samples.len()
        )));
    }
    let sex: Vec<Sex> = samples.iter().map(|s| s.sex).collect();
    let population = samples
        .iter()
        .map(|s| {
            s.population.clone().ok_or_else(|| {
                Error::Config(format!("individual {} has no population", s.individual_id))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let smoking = simulate_smoking(
        &sex,
        &population,
        &config.subpop_map,
        &config.smoking_rates,
        &mut rng,
    )?;
    let bmi = simulate_bmi(pcs, &smoking, config, &mut rng)?;
    let treatment = simulate_treatment(&sex, &bmi, &config.gamma, &population, &mut rng)?;
    Ok(CovariateTable {
        individual_id: samples.iter().map(|s| s.individual_id.clone()).collect(),
        sex,
        smoking,
        bmi,
        treatment: Some(treatment),
        pcs: pcs.clone(),
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn default_rates() {
        let r = default_smoking_rates();
        assert_eq!(r.get(Subpopulation::European, Sex::Male).unwrap(), 0.37);
        assert_eq!(r.get(Subpopulation::European, Sex::Female).unwrap(), 0.27);
        assert_eq!(r.get(Subpopulation::African, Sex::Male).unwrap(), 0.438);
        assert_eq!(r.get(Subpopulation::African, Sex::Female).unwrap(), 0.129);
        assert_eq!(r.get(Subpopulation::Asian, Sex::Male).unwrap(), 0.457);
        assert_eq!(r.get(Subpopulation::Asian, Sex::Female).unwrap(), 0.048);
    }

    #[test]
    fn default_gamma_assignment() {
        let g = default_gamma_map();
        assert_eq!(g.len(), 11);
        assert_eq!(g["MEX"], f64::NEG_INFINITY);
        assert_eq!(g["YRI"], f64::NEG_INFINITY);
        assert_eq!(g["ASW"], -0.1);
        assert_eq!(g["TSI"], 0.1);
        let m = default_subpopulation_map();
        assert!(HAPMAP_POPULATIONS.iter().all(|p| m.contains_key(*p)));
    }

    #[test]
    fn smoking_extreme_rates() {
        let pops = vec!["CEU".to_string(); 50];
        let sexes = vec![Sex::Female; 50];
        let map = default_subpopulation_map();
        let mut rates = default_smoking_rates();
        rates.rates.insert(Subpopulation::European, (0.0, 0.0));
        let s = simulate_smoking(&sexes, &pops, &map, &rates, &mut rng(1)).unwrap();
        assert!(s.iter().all(|&x| x == 0));
        rates.rates.insert(Subpopulation::European, (1.0, 1.0));
        let s = simulate_smoking(&sexes, &pops, &map, &rates, &mut rng(1)).unwrap();
        assert!(s.iter().all(|&x| x == 1));
    }

    #[test]
    fn smoking_empirical_rate() {
        let n = 10_000;
        let pops = vec!["CEU".to_string(); n];
        let sexes = vec![Sex::Male; n];
        let s = simulate_smoking(
            &sexes,
            &pops,
            &default_subpopulation_map(),
            &default_smoking_rates(),
            &mut rng(2),
        )
        .unwrap();
        let rate = s.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
        // 3 sigma = 3 * sqrt(0.37 * 0.63 / 10000) = 0.0145
        assert!((rate - 0.37).abs() < 0.015, "rate {rate}");
    }

    #[test]
    fn smoking_errors() {
        let map = default_subpopulation_map();
        let rates = default_smoking_rates();
        let err =
            simulate_smoking(&[Sex::Male], &["XYZ".into()], &map, &rates, &mut rng(0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(
            simulate_smoking(&[Sex::Unknown], &["CEU".into()], &map, &rates, &mut rng(0)).is_err()
        );
    }

    fn random_pcs(n: usize, seed: u64) -> DMatrix<f64> {
        let mut r = rng(seed);
        DMatrix::from_fn(n, 5, |_, _| StandardNormal.sample(&mut r))
    }

    #[test]
    fn bmi_heritability_is_exact() {
        let pcs = random_pcs(500, 4);
        let cfg = CovSimConfig::default();
        for seed in 0..5 {
            let g = genetic_score(&pcs, &cfg, &mut rng(seed)).unwrap();
            let vg = sample_variance(&g);
            assert!((vg / (vg + 16.0) - 0.6).abs() < 1e-12);
        }
        let zero = CovSimConfig {
            heritability: 0.0,
            ..Default::default()
        };
        assert!(genetic_score(&pcs, &zero, &mut rng(0))
            .unwrap()
            .iter()
            .all(|&g| g == 0.0));
    }

    #[test]
    fn bmi_zero_heritability() {
        let n = 10_000;
        let pcs = random_pcs(n, 5);
        let smoking: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let cfg = CovSimConfig {
            heritability: 0.0,
            ..Default::default()
        };
        let bmi = simulate_bmi(&pcs, &smoking, &cfg, &mut rng(3)).unwrap();
        let smokers: Vec<f64> = bmi
            .iter()
            .zip(&smoking)
            .filter(|(_, &s)| s == 1)
            .map(|(b, _)| *b)
            .collect();
        let v = sample_variance(&smokers);
        assert!((v - 16.0).abs() < 1.0, "var {v}");
    }

    #[test]
    fn bmi_smoking_offset() {
        let n = 10_000;
        let pcs = random_pcs(n, 6);
        let smoking: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
        let bmi = simulate_bmi(&pcs, &smoking, &CovSimConfig::default(), &mut rng(8)).unwrap();
        let mean = |flag: u8| {
            let v: Vec<f64> = bmi
                .iter()
                .zip(&smoking)
                .filter(|(_, &s)| s == flag)
                .map(|(b, _)| *b)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let diff = mean(0) - mean(1);
        assert!((diff - 1.5).abs() < 0.2, "diff {diff}");
    }

    #[test]
    fn bmi_degenerate_pcs() {
        let pcs = DMatrix::from_element(10, 5, 1.0);
        let err = simulate_bmi(&pcs, &[0; 10], &CovSimConfig::default(), &mut rng(0)).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn treatment_probability_examples() {
        assert!((treatment_probability(Sex::Male, 25.0, 0.0) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(treatment_probability(Sex::Female, 25.0, 0.0), 0.5);
        assert_eq!(
            treatment_probability(Sex::Female, 25.0, f64::NEG_INFINITY),
            1.0
        );
        assert!(
            (treatment_probability(Sex::Male, 25.0, f64::NEG_INFINITY) - 1.0 / 3.0).abs() < 1e-15
        );
        assert_eq!(treatment_probability(Sex::Female, -1e6, 0.0), 0.0);
        assert!(treatment_probability(Sex::Female, 1e6, 0.0) > 0.0);
    }

    #[test]
    fn treatment_rates() {
        let n = 10_000;
        let gamma: BTreeMap<String, f64> = [("P".to_string(), 0.0)].into();
        let pops = vec!["P".to_string(); n];
        let f = simulate_treatment(
            &vec![Sex::Female; n],
            &vec![25.0; n],
            &gamma,
            &pops,
            &mut rng(1),
        )
        .unwrap();
        let rate = f.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
        assert!((rate - 0.5).abs() < 0.015, "rate {rate}");
        let low = simulate_treatment(
            &vec![Sex::Female; n],
            &vec![-1e9; n],
            &gamma,
            &pops,
            &mut rng(1),
        )
        .unwrap();
        assert!(low.iter().all(|&x| x == 0));
        let n = 60_000;
        let pops = vec!["P".to_string(); n];
        let m = simulate_treatment(
            &vec![Sex::Male; n],
            &vec![25.0; n],
            &gamma,
            &pops,
            &mut rng(2),
        )
        .unwrap();
        let f = simulate_treatment(
            &vec![Sex::Female; n],
            &vec![25.0; n],
            &gamma,
            &pops,
            &mut rng(3),
        )
        .unwrap();
        let ratio =
            f.iter().map(|&x| x as f64).sum::<f64>() / m.iter().map(|&x| x as f64).sum::<f64>();
        assert!((ratio - 3.0).abs() < 0.15, "ratio {ratio}");
        assert!(
            simulate_treatment(&[Sex::Male], &[25.0], &gamma, &["Q".into()], &mut rng(0)).is_err()
        );
    }

    #[test]
    fn config_validation() {
        let c = CovSimConfig {
            heritability: 1.0,
            ..CovSimConfig::default()
        };
        assert!(c.validate().is_err());
        let c = CovSimConfig {
            residual_sd: 0.0,
            ..CovSimConfig::default()
        };
        assert!(c.validate().is_err());
    }

    fn samples(n: usize) -> Vec<SampleRecord> {
        (0..n)
            .map(|i| SampleRecord {
                family_id: "F".into(),
                individual_id: format!("I{i}"),
                sex: if i % 2 == 0 { Sex::Male } else { Sex::Female },
                phenotype_placeholder: -9,
                population: Some(HAPMAP_POPULATIONS[i % 11].to_string()),
            })
            .collect()
    }

    #[test]
    fn cascade_is_deterministic_and_round_trips() {
        let s = samples(200);
        let pcs = random_pcs(200, 1);
        let cfg = CovSimConfig {
            seed: 42,
            ..Default::default()
        };
        let a = simulate_covariates(&s, &pcs, &cfg).unwrap();
        let b = simulate_covariates(&s, &pcs, &cfg).unwrap();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cov.tsv");
        a.write(&p, &["seed=42".into()]).unwrap();
        assert_eq!(CovariateTable::read(&p).unwrap(), a);
        assert_eq!(a.design(&["sex".into(), "pc2".into()]).unwrap().ncols(), 2);
        assert!(a.column("pc6").is_err());
    }
}
