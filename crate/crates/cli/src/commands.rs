//! The subcommands. Each reads its inputs from the configured paths and the
//! output directory and writes artifacts carrying the config hash and seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use gxesim_core::assoc::{self, AssocResult};
use gxesim_core::covsim::{simulate_covariates, CovariateTable};
use gxesim_core::genotype_io::{
    filter_snps, read_genotype_triplet, read_population_map, snp_index, thin_snps,
    write_genotype_triplet, PlinkData,
};
use gxesim_core::phenosim::{
    generate_replicates, Hypothesis, PhenotypeReplicate, ReplicatePlan, ReplicateSet,
};
use gxesim_core::pipeline::{region_range, region_scores, Method, Scanner};
use gxesim_core::popstruct::{
    grm, pca, read_pca_scores, write_pca_scatter, write_pca_scores, Kinship,
};
use gxesim_core::power::{auc, roc, write_roc, AucTable, PValueField};
use gxesim_core::seed::derive_seed;
use gxesim_core::synth::synthesize;
use gxesim_core::{plot, Error};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{RegionWidth, RunConfig};
use crate::Validation;

const QC_STEM: &str = "qc";
const PHENOTYPE_STEM: &str = "phenotypes";

fn out(config: &RunConfig, name: &str) -> PathBuf {
    config.paths.output_dir.join(name)
}

fn require(path: &Path, hint: &str) -> anyhow::Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Validation(format!("missing input {} ({hint})", path.display())).into())
    }
}

fn require_triplet(stem: &Path, hint: &str) -> anyhow::Result<()> {
    for ext in ["bed", "bim", "fam"] {
        require(&stem.with_extension(ext), hint)?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes through a temporary sibling and renames, so an interrupted run
/// never leaves a truncated artifact behind.
fn atomic<T>(
    path: &Path,
    write: impl FnOnce(&Path) -> gxesim_core::Result<T>,
) -> anyhow::Result<T> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let value = write(&tmp)?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {}", tmp.display()))?;
    Ok(value)
}

fn with_provenance(svg: &str, provenance: &str) -> String {
    let close = svg
        .find("<svg")
        .and_then(|s| svg[s..].find('>').map(|e| s + e + 1));
    match close {
        Some(at) => format!("{}\n<!-- {provenance} -->{}", &svg[..at], &svg[at..]),
        None => svg.to_string(),
    }
}

fn load_genotypes(config: &RunConfig, stem: &Path) -> anyhow::Result<PlinkData> {
    let mut data = read_genotype_triplet(stem)?;
    match &config.paths.population_map {
        Some(map) => {
            require(map, "paths.population_map")?;
            data.attach_populations(&read_population_map(map)?)?;
        }
        None => data.populations_from_family_ids(),
    }
    Ok(data)
}

pub fn synth(config: &RunConfig) -> anyhow::Result<()> {
    let mut synth = config.synth.clone();
    synth.seed = derive_seed(config.seed, "synth", 0);
    let data = synthesize(&synth)?;
    let stem = &config.paths.genotype;
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    write_genotype_triplet(&data, stem)?;
    log::info!(
        "wrote {} individuals x {} SNPs to {}",
        data.matrix.n_individuals(),
        data.matrix.n_snps(),
        stem.display()
    );
    Ok(())
}

pub fn qc_pca(config: &RunConfig) -> anyhow::Result<()> {
    let stem = &config.paths.genotype;
    require_triplet(stem, "paths.genotype")?;
    let mut data = load_genotypes(config, stem)?;
    if config.qc.orient_minor_allele {
        let flipped = data.matrix.orient_to_minor_allele(&mut data.snps);
        log::info!("recoded {flipped} SNPs to count the minor allele");
    }
    let dir = &config.paths.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let qc = filter_snps(&data.matrix, config.qc.maf_min, config.qc.hwe_alpha)?;
    let kept = data.select_snps(&qc.kept);
    write_genotype_triplet(&kept, out(config, QC_STEM))?;
    let report = json!({
        "config_hash": config.hash(),
        "seed": config.seed,
        "qc": qc.report,
    });
    log::info!("{}", serde_json::to_string(&report)?);
    write_json(&out(config, "qc_report.json"), &report)?;

    let pcs = pca(&kept.matrix, config.qc.pca_k, config.qc.pca_thin_step)?;
    let comments = [config.provenance()];
    write_pca_scores(out(config, "pcs.tsv"), &comments, &kept.samples, &pcs)?;
    write_pca_scatter(
        out(config, "pca_scatter.tsv"),
        &comments,
        &kept.samples,
        &pcs,
    )?;
    log::info!(
        "wrote {} principal components for {} individuals",
        config.qc.pca_k,
        kept.samples.len()
    );
    Ok(())
}

fn load_qc(config: &RunConfig) -> anyhow::Result<PlinkData> {
    let stem = out(config, QC_STEM);
    require_triplet(&stem, "run `gxesim qc-pca` first")?;
    load_genotypes(config, &stem)
}

fn binary_column(table: &CovariateTable, name: &str) -> anyhow::Result<Vec<u8>> {
    table
        .column(name)?
        .into_iter()
        .map(|v| match v {
            0.0 => Ok(0),
            1.0 => Ok(1),
            _ => Err(Validation(format!("exposure '{name}' must be 0/1, found {v}")).into()),
        })
        .collect()
}

fn check_ids(table: &CovariateTable, data: &PlinkData, source: &Path) -> anyhow::Result<()> {
    let same = table.len() == data.samples.len()
        && table
            .individual_id
            .iter()
            .zip(&data.samples)
            .all(|(a, s)| *a == s.individual_id);
    if !same {
        bail!(Error::InvalidInput(format!(
            "{}: individuals do not match the genotype sample table",
            source.display()
        )));
    }
    Ok(())
}

pub fn simulate(config: &RunConfig) -> anyhow::Result<()> {
    if config.model.causal_snp.is_empty() {
        return Err(Validation("model.causal_snp must name a SNP".into()).into());
    }
    let data = load_qc(config)?;
    let comments = [config.provenance()];
    let table = match &config.paths.covariates {
        Some(path) => {
            require(path, "paths.covariates")?;
            let table = CovariateTable::read(path)?;
            check_ids(&table, &data, path)?;
            table
        }
        None => {
            let pcs_path = out(config, "pcs.tsv");
            require(&pcs_path, "run `gxesim qc-pca` first")?;
            let (ids, pcs) = read_pca_scores(&pcs_path)?;
            if ids.iter().ne(data.samples.iter().map(|s| &s.individual_id)) {
                bail!(Error::InvalidInput(format!(
                    "{}: individuals do not match the genotype sample table",
                    pcs_path.display()
                )));
            }
            let mut covsim = config.covsim.clone();
            covsim.seed = derive_seed(config.seed, "covsim", 0);
            simulate_covariates(&data.samples, &pcs, &covsim)?
        }
    };
    table.write(out(config, "covariates.tsv"), &comments)?;

    let causal = snp_index(&data.snps, &config.model.causal_snp)
        .with_context(|| "model.causal_snp is not among the QC'd SNPs")?;
    let exposure = binary_column(&table, &config.model.interacting_exposure)?;
    let plan = ReplicatePlan {
        n_h0: config.replicates.n_h0,
        n_h1: config.replicates.n_h1,
        n_cases: config.replicates.n_cases,
        seed: derive_seed(config.seed, "replicates", 0),
    };
    let mut set = generate_replicates(&config.model, data.matrix.column(causal), &exposure, &plan)?;
    set.meta.provenance = BTreeMap::from([
        ("config_hash".to_string(), config.hash()),
        ("seed".to_string(), config.seed.to_string()),
    ]);
    set.write(
        &config.paths.output_dir,
        PHENOTYPE_STEM,
        &table.individual_id,
        &comments,
    )?;
    log::info!(
        "wrote {} H0 and {} H1 replicates with {} cases each",
        plan.n_h0,
        plan.n_h1,
        plan.n_cases
    );
    Ok(())
}

fn select_replicates<'a>(
    set: &'a ReplicateSet,
    selector: &str,
) -> anyhow::Result<Vec<&'a PhenotypeReplicate>> {
    match selector.to_ascii_lowercase().as_str() {
        "all" => return Ok(set.replicates.iter().collect()),
        "h0" => return Ok(set.of(Hypothesis::H0).collect()),
        "h1" => return Ok(set.of(Hypothesis::H1).collect()),
        _ => {}
    }
    selector
        .split(',')
        .map(|label| {
            set.replicates
                .iter()
                .find(|r| r.label() == label.trim())
                .ok_or_else(|| Validation(format!("no replicate labelled '{label}'")).into())
        })
        .collect()
}

fn kinship(config: &RunConfig, data: &PlinkData) -> anyhow::Result<Kinship> {
    let m = data.matrix.n_snps();
    let snps = if config.qc.grm_all_snps {
        (0..m).collect()
    } else {
        thin_snps(m, config.qc.pca_thin_step)?
    };
    Ok(grm(&data.matrix, &snps)?)
}

fn scan_path(config: &RunConfig, method: Method, label: &str) -> PathBuf {
    out(config, "scans")
        .join(method.to_string())
        .join(format!("{label}.tsv"))
}

/// Whether `path` holds a finished scan made under the same configuration.
fn is_current(path: &Path, provenance: &str) -> bool {
    fs::read_to_string(path)
        .ok()
        .and_then(|text| text.lines().next().map(|l| l == format!("# {provenance}")))
        .unwrap_or(false)
}

fn methods_or_default(config: &RunConfig, methods: &[Method]) -> Vec<Method> {
    if methods.is_empty() {
        config.power.methods.clone()
    } else {
        methods.to_vec()
    }
}

pub fn scan(config: &RunConfig, methods: &[Method], selector: &str) -> anyhow::Result<()> {
    let data = load_qc(config)?;
    let cov_path = out(config, "covariates.tsv");
    require(&cov_path, "run `gxesim simulate` first")?;
    require(
        &out(config, &format!("{PHENOTYPE_STEM}.tsv")),
        "run `gxesim simulate` first",
    )?;
    let table = CovariateTable::read(&cov_path)?;
    check_ids(&table, &data, &cov_path)?;
    let (set, _) = ReplicateSet::read(&config.paths.output_dir, PHENOTYPE_STEM)?;
    let selected = select_replicates(&set, selector)?;
    let provenance = config.provenance();
    let comments = [provenance.clone()];

    for method in methods_or_default(config, methods) {
        let dir = out(config, "scans").join(method.to_string());
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let pending: Vec<&PhenotypeReplicate> = selected
            .iter()
            .copied()
            .filter(|r| !is_current(&scan_path(config, method, &r.label()), &provenance))
            .collect();
        log::info!(
            "{method}: {} of {} replicates to scan, {} already complete",
            pending.len(),
            selected.len(),
            selected.len() - pending.len()
        );
        if pending.is_empty() {
            continue;
        }
        let kin = if method == Method::Lmm {
            Some(kinship(config, &data)?)
        } else {
            None
        };
        let scanner = Scanner::new(
            &data.matrix,
            &data.snps,
            &table,
            &config.scan,
            method,
            kin.as_ref(),
        )?;
        pending.par_iter().try_for_each(|r| -> anyhow::Result<()> {
            let results = scanner.scan(&r.y)?;
            let path = scan_path(config, method, &r.label());
            atomic(&path, |tmp| assoc::write_results(tmp, &comments, &results))
        })?;
    }
    Ok(())
}

fn load_scans(
    config: &RunConfig,
    method: Method,
    set: &ReplicateSet,
    m: usize,
) -> anyhow::Result<Vec<(Hypothesis, Vec<AssocResult>)>> {
    let dir = out(config, "scans").join(method.to_string());
    let empty = fs::read_dir(&dir)
        .map(|mut d| d.next().is_none())
        .unwrap_or(true);
    if empty {
        bail!(Error::NoUsableData(format!(
            "no scan results in {}; run `gxesim scan --method {method}` first",
            dir.display()
        )));
    }
    set.replicates
        .par_iter()
        .map(|r| {
            let path = scan_path(config, method, &r.label());
            if !path.exists() {
                bail!(Error::NoUsableData(format!(
                    "{} is missing; run `gxesim scan --method {method}` to complete the scans",
                    path.display()
                )));
            }
            let results = assoc::read_results(&path)?;
            if results.len() != m {
                bail!(Error::InvalidInput(format!(
                    "{}: {} rows for {m} SNPs",
                    path.display(),
                    results.len()
                )));
            }
            Ok((r.hypothesis, results))
        })
        .collect()
}

fn neg_log10(p: Option<f64>) -> f64 {
    p.map_or(f64::NAN, |p| -p.max(f64::MIN_POSITIVE).log10())
}

pub fn power(
    config: &RunConfig,
    regions: &[RegionWidth],
    methods: &[Method],
) -> anyhow::Result<()> {
    let regions = if regions.is_empty() {
        config.power.regions.clone()
    } else {
        regions.to_vec()
    };
    let methods = methods_or_default(config, methods);
    let data = load_qc(config)?;
    require(
        &out(config, &format!("{PHENOTYPE_STEM}.tsv")),
        "run `gxesim simulate` first",
    )?;
    let (set, _) = ReplicateSet::read(&config.paths.output_dir, PHENOTYPE_STEM)?;
    let m = data.snps.len();
    let causal = snp_index(&data.snps, &set.meta.model.causal_snp)?;
    let provenance = config.provenance();
    let comments = [provenance.clone()];
    let region_names: Vec<String> = regions.iter().map(RegionWidth::to_string).collect();

    let mut cells = vec![Vec::new(); regions.len()];
    let mut curves = Vec::new();
    for &method in &methods {
        let scans = load_scans(config, method, &set, m)?;
        let pairs: Vec<(Hypothesis, &[AssocResult])> =
            scans.iter().map(|(h, r)| (*h, r.as_slice())).collect();
        for (ri, (&width, name)) in regions.iter().zip(&region_names).enumerate() {
            let range = region_range(m, causal, width.snps(m))?;
            let (h0, h1) = region_scores(&pairs, method, range, name)?;
            let estimate = auc(&h0, &h1)?;
            log::info!("{method} region {name}: AUC {estimate}");
            cells[ri].push(estimate);
            curves.push((method.to_string(), name.clone(), roc(&h0, &h1)));
        }

        let h1 = set
            .replicates
            .iter()
            .zip(&scans)
            .filter(|(r, _)| r.hypothesis == Hypothesis::H1)
            .nth(config.power.manhattan_replicate)
            .or_else(|| {
                set.replicates
                    .iter()
                    .zip(&scans)
                    .nth(config.power.manhattan_replicate)
            });
        if let Some((rep, (_, results))) = h1 {
            let points: Vec<(f64, f64)> = results
                .iter()
                .map(|r| {
                    let p = match method.field() {
                        PValueField::PSnp => r.p_snp,
                        PValueField::PInt => r.p_int,
                    };
                    (r.position as f64, neg_log10(p))
                })
                .collect();
            let title = format!("{method}: replicate {}", rep.label());
            let svg =
                plot::manhattan_svg(&title, &points, Some(data.snps[causal].bp_position as f64));
            plot::write_svg(
                out(config, &format!("manhattan_{method}.svg")),
                &with_provenance(&svg, &provenance),
            )?;
        }
    }

    let table = AucTable {
        regions: region_names.clone(),
        methods: methods.iter().map(Method::to_string).collect(),
        cells,
    };
    table.write(out(config, "auc.tsv"), &comments)?;
    table.write_long(out(config, "auc_long.tsv"), &comments)?;
    write_roc(out(config, "roc.tsv"), &comments, &curves)?;
    for name in &region_names {
        let region_curves: Vec<_> = curves
            .iter()
            .filter(|(_, r, _)| r == name)
            .map(|(m, _, c)| (m.clone(), c.clone()))
            .collect();
        let svg = plot::roc_svg(&format!("ROC, region {name}"), &region_curves);
        plot::write_svg(
            out(config, &format!("roc_{name}.svg")),
            &with_provenance(&svg, &provenance),
        )?;
    }
    Ok(())
}
