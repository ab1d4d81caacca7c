mod common;

use gxesim_core::assoc::{
    logistic_irls, scan_snp, scan_snp_x_cov, CovariateMatrix, FitStatus, IrlsOptions, ScanConfig,
};
use gxesim_core::covsim::{simulate_covariates, CovSimConfig};
use gxesim_core::genotype_io::{filter_snps, snp_index, GenotypeMatrix, SnpRecord};
use gxesim_core::phenosim::{generate_replicates, DiseaseModel, ReplicatePlan};
use gxesim_core::popstruct::pca;
use gxesim_core::synth::{synthesize, PlantedSnp, SynthConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hwe_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (GenotypeMatrix, Vec<SnpRecord>) {
    let cols: Vec<Vec<u8>> = (0..m)
        .map(|_| {
            let f = rng.random_range(0.1..0.5);
            (0..n)
                .map(|_| (rng.random::<f64>() < f) as u8 + (rng.random::<f64>() < f) as u8)
                .collect()
        })
        .collect();
    let snps = (0..m)
        .map(|j| SnpRecord {
            chromosome: "1".into(),
            snp_id: format!("s{j}"),
            genetic_distance: 0.0,
            bp_position: j as u64 + 1,
            allele1: 'A',
            allele2: 'G',
        })
        .collect();
    (GenotypeMatrix::from_columns(n, &cols).unwrap(), snps)
}

fn bernoulli_logit(rng: &mut ChaCha8Rng, eta: f64) -> u8 {
    (rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())) as u8
}

fn two_covariates(rng: &mut ChaCha8Rng, n: usize) -> CovariateMatrix {
    let values = DMatrix::from_fn(n, 2, |i, j| {
        if j == 0 {
            (i % 2) as f64
        } else {
            rng.random::<f64>() * 4.0
        }
    });
    CovariateMatrix::new(vec!["sex".into(), "e".into()], values).unwrap()
}

fn config(interaction: bool) -> ScanConfig {
    ScanConfig {
        covariates: vec!["sex".into(), "e".into()],
        interaction_covariate: interaction.then(|| "e".into()),
        ..Default::default()
    }
}

#[test]
fn planted_marginal_effect_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 2000;
    let (matrix, snps) = hwe_matrix(&mut rng, n, 3);
    let covs = two_covariates(&mut rng, n);
    let y: Vec<u8> = (0..n)
        .map(|i| {
            let eta = -1.5 + 1.0 * matrix.get(i, 0) as f64 + 0.3 * covs.values[(i, 0)]
                - 0.2 * covs.values[(i, 1)];
            bernoulli_logit(&mut rng, eta)
        })
        .collect();
    let res = scan_snp(&matrix, &snps, &y, &covs, &config(false)).unwrap();
    let beta = res[0].beta_snp.unwrap();
    assert!((beta - 1.0).abs() < 0.15, "{beta}");
    assert!(res[0].p_snp.unwrap() < 1e-20);
}

#[test]
fn null_interaction_p_values_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 1000;
    let (matrix, snps) = hwe_matrix(&mut rng, n, 2000);
    let covs = two_covariates(&mut rng, n);
    let y: Vec<u8> = (0..n).map(|_| (rng.random::<f64>() < 0.4) as u8).collect();
    let res = scan_snp_x_cov(&matrix, &snps, &y, &covs, &config(true)).unwrap();
    let ps: Vec<f64> = res.iter().filter_map(|r| r.p_int).collect();
    assert_eq!(ps.len(), 2000);
    let (d, p) = common::ks_uniform(&ps);
    assert!(p > 0.01, "KS D = {d}, p = {p}");
}

#[test]
fn causal_snp_tops_the_interaction_scan_when_treatment_is_observed() {
    let synth = SynthConfig {
        n_individuals: 1000,
        n_snps: 300,
        planted: vec![PlantedSnp {
            index: 150,
            allele_frequency: 0.5,
            undifferentiated: false,
        }],
        seed: 13,
        ..Default::default()
    };
    let data = synthesize(&synth).unwrap();
    let qc = filter_snps(&data.matrix, 0.05, 1e-6).unwrap();
    let snps: Vec<SnpRecord> = qc.kept.iter().map(|&j| data.snps[j].clone()).collect();
    let causal = snp_index(&snps, "snp00151").unwrap();
    let pcs = pca(&qc.matrix, 5, 1).unwrap();
    let table = simulate_covariates(
        &data.samples,
        &pcs.scores,
        &CovSimConfig {
            seed: 13,
            ..Default::default()
        },
    )
    .unwrap();
    let model = DiseaseModel {
        causal_snp: "snp00151".into(),
        ..Default::default()
    };
    let plan = ReplicatePlan {
        n_h0: 0,
        n_h1: 50,
        n_cases: 500,
        seed: 13,
    };
    let treatment = table.treatment.clone().unwrap();
    let reps = generate_replicates(&model, qc.matrix.column(causal), &treatment, &plan).unwrap();
    let mut names: Vec<String> = ["sex", "smoking", "treatment"].map(String::from).to_vec();
    names.extend((1..=5).map(|k| format!("pc{k}")));
    let covs = CovariateMatrix::new(names.clone(), table.design(&names).unwrap()).unwrap();
    let cfg = ScanConfig {
        covariates: names,
        interaction_covariate: Some("treatment".into()),
        ..Default::default()
    };
    let hits = reps
        .replicates
        .iter()
        .filter(|r| {
            let res = scan_snp_x_cov(&qc.matrix, &snps, &r.y, &covs, &cfg).unwrap();
            let best = (0..res.len())
                .filter(|&j| res[j].p_int.is_some())
                .min_by(|&a, &b| res[a].p_int.unwrap().total_cmp(&res[b].p_int.unwrap()));
            best == Some(causal)
        })
        .count();
    assert!(
        hits > 45,
        "causal SNP had the minimum p_int in {hits}/50 replicates"
    );
}

#[test]
fn scan_output_does_not_depend_on_order_or_threads() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let n = 300;
    let (matrix, snps) = hwe_matrix(&mut rng, n, 40);
    let covs = two_covariates(&mut rng, n);
    let y: Vec<u8> = (0..n).map(|_| (rng.random::<f64>() < 0.5) as u8).collect();
    let cfg = config(true);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| scan_snp_x_cov(&matrix, &snps, &y, &covs, &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));

    let order: Vec<usize> = (0..40).rev().collect();
    let reversed = scan_snp_x_cov(
        &matrix.select_snps(&order),
        &order.iter().map(|&j| snps[j].clone()).collect::<Vec<_>>(),
        &y,
        &covs,
        &cfg,
    )
    .unwrap();
    let restored: Vec<_> = reversed.into_iter().rev().collect();
    assert_eq!(one, restored);
}

fn random_design(seed: u64, n: usize) -> (DMatrix<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, 4, |i, j| match j {
        0 => 1.0,
        1 => (rng.random::<f64>() < 0.3) as u8 as f64 + (rng.random::<f64>() < 0.3) as u8 as f64,
        2 => (i % 2) as f64,
        _ => rng.random::<f64>() * 10.0 + 20.0,
    });
    let y = (0..n)
        .map(|i| {
            let eta = -4.0 + 0.5 * x[(i, 1)] + 0.4 * x[(i, 2)] + 0.15 * x[(i, 3)];
            bernoulli_logit(&mut rng, eta) as f64
        })
        .collect();
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn irls_climbs_to_a_stationary_point(seed in any::<u64>(), n in 150usize..400) {
        let (x, y) = random_design(seed, n);
        match logistic_irls(&x, &y, &IrlsOptions::default()) {
            Ok(fit) => {
                prop_assert!(fit.converged);
                for w in fit.log_likelihood_path.windows(2) {
                    prop_assert!(w[1] >= w[0] - 1e-12 * w[0].abs());
                }
                let beta = nalgebra::DVector::from_column_slice(&fit.coefficients);
                let eta = &x * beta;
                let resid = nalgebra::DVector::from_iterator(n, (0..n).map(|i| y[i] - 1.0 / (1.0 + (-eta[i]).exp())));
                let score = x.transpose() * resid;
                prop_assert!(score.amax() < 1e-6, "score {}", score.amax());
            }
            Err(status) => prop_assert!(status == FitStatus::Separated || status == FitStatus::Degenerate),
        }
    }

    #[test]
    fn coefficients_follow_affine_rescaling(seed in any::<u64>(), a in prop_oneof![-20.0f64..-0.05, 0.05f64..20.0], b in -50.0f64..50.0) {
        let (x, y) = random_design(seed, 300);
        let Ok(base) = logistic_irls(&x, &y, &IrlsOptions::default()) else {
            return Ok(());
        };
        let mut x2 = x.clone();
        x2.column_mut(3).apply(|v| *v = a * *v + b);
        let fit = logistic_irls(&x2, &y, &IrlsOptions::default()).unwrap();
        let expect = [
            base.coefficients[0] - base.coefficients[3] * b / a,
            base.coefficients[1],
            base.coefficients[2],
            base.coefficients[3] / a,
        ];
        for (got, want) in fit.coefficients.iter().zip(expect) {
            prop_assert!((got - want).abs() < 1e-8 * (1.0 + want.abs()), "{got} vs {want}");
        }
        prop_assert!((fit.standard_errors[1] - base.standard_errors[1]).abs() < 1e-8 * base.standard_errors[1]);
        prop_assert!((fit.log_likelihood - base.log_likelihood).abs() < 1e-8 * base.log_likelihood.abs());
    }
}
