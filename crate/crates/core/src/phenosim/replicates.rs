use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{penetrance, ConditionalSampler, DiseaseModel};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, fingerprint};
use crate::tsv::{self, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
        })
    }
}

impl std::str::FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H0" | "h0" => Ok(Hypothesis::H0),
            "H1" | "h1" => Ok(Hypothesis::H1),
            _ => Err(Error::InvalidInput(format!("unknown hypothesis '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhenotypeReplicate {
    pub y: Vec<u8>,
    pub n_cases: usize,
    pub hypothesis: Hypothesis,
    pub replicate_index: usize,
    pub seed: u64,
}

impl PhenotypeReplicate {
    /// Column label used in replicate tables and result file names.
    pub fn label(&self) -> String {
        format!("{}_{}", self.hypothesis, self.replicate_index)
    }
}

/// Uniform draw among the 0/1 vectors of length `n` with `n_cases` ones.
pub fn permute_phenotypes<R: Rng + ?Sized>(
    n: usize,
    n_cases: usize,
    rng: &mut R,
) -> Result<Vec<u8>> {
    if n_cases > n {
        return Err(Error::Feasibility(format!(
            "{n_cases} cases among {n} individuals"
        )));
    }
    let mut y = vec![0u8; n];
    for i in rand::seq::index::sample(rng, n, n_cases) {
        y[i] = 1;
    }
    Ok(y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicatePlan {
    pub n_h0: usize,
    pub n_h1: usize,
    pub n_cases: usize,
    pub seed: u64,
}

impl Default for ReplicatePlan {
    fn default() -> Self {
        Self {
            n_h0: 200,
            n_h1: 200,
            n_cases: 595,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSetMeta {
    pub n: usize,
    pub n_cases: usize,
    pub n_h0: usize,
    pub n_h1: usize,
    pub seed: u64,
    pub model: DiseaseModel,
    pub model_hash: String,
    /// Derived seed of each replicate, in table column order.
    pub replicate_seeds: Vec<(String, u64)>,
    /// Free-form key/value provenance added by callers.
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateSet {
    pub meta: ReplicateSetMeta,
    pub replicates: Vec<PhenotypeReplicate>,
}

fn replicate_seed(master: u64, hypothesis: Hypothesis, index: usize) -> u64 {
    derive_seed(master, &format!("phenotype/{hypothesis}"), index as u64)
}

/// H0 replicates first, then H1. Each replicate draws from its own stream
/// derived from `(seed, hypothesis, index)`.
pub fn generate_replicates(
    model: &DiseaseModel,
    causal_column: &[u8],
    exposure: &[u8],
    plan: &ReplicatePlan,
) -> Result<ReplicateSet> {
    let p = penetrance(model, causal_column, exposure)?;
    let n = p.0.len();
    let sampler = if plan.n_h1 > 0 {
        Some(ConditionalSampler::new(&p.0, plan.n_cases)?)
    } else if plan.n_cases > n {
        return Err(Error::Feasibility(format!(
            "{} cases among {n}",
            plan.n_cases
        )));
    } else {
        None
    };
    let jobs: Vec<(Hypothesis, usize)> = (0..plan.n_h0)
        .map(|r| (Hypothesis::H0, r))
        .chain((0..plan.n_h1).map(|r| (Hypothesis::H1, r)))
        .collect();
    let replicates = jobs
        .par_iter()
        .map(|&(hypothesis, index)| {
            let seed = replicate_seed(plan.seed, hypothesis, index);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let y = match hypothesis {
                Hypothesis::H0 => permute_phenotypes(n, plan.n_cases, &mut rng)?,
                Hypothesis::H1 => sampler
                    .as_ref()
                    .expect("sampler built for H1")
                    .sample(&mut rng),
            };
            assert_eq!(y.iter().map(|&v| v as usize).sum::<usize>(), plan.n_cases);
            Ok(PhenotypeReplicate {
                y,
                n_cases: plan.n_cases,
                hypothesis,
                replicate_index: index,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let model_json = serde_json::to_vec(model).expect("model serialises");
    let meta = ReplicateSetMeta {
        n,
        n_cases: plan.n_cases,
        n_h0: plan.n_h0,
        n_h1: plan.n_h1,
        seed: plan.seed,
        model: model.clone(),
        model_hash: fingerprint(&model_json),
        replicate_seeds: replicates.iter().map(|r| (r.label(), r.seed)).collect(),
        provenance: BTreeMap::new(),
    };
    Ok(ReplicateSet { meta, replicates })
}

impl ReplicateSet {
    pub fn of(&self, hypothesis: Hypothesis) -> impl Iterator<Item = &PhenotypeReplicate> {
        self.replicates
            .iter()
            .filter(move |r| r.hypothesis == hypothesis)
    }

    /// Writes `<stem>.tsv` (individuals by replicates) and `<stem>.meta.json`.
    pub fn write(
        &self,
        dir: impl AsRef<Path>,
        stem: &str,
        ids: &[String],
        comments: &[String],
    ) -> Result<()> {
        let dir = dir.as_ref();
        if ids.len() != self.meta.n {
            return Err(Error::InvalidInput(format!(
                "{} ids for {} individuals",
                ids.len(),
                self.meta.n
            )));
        }
        let labels: Vec<String> = self
            .replicates
            .iter()
            .map(PhenotypeReplicate::label)
            .collect();
        let mut header = vec!["individual_id"];
        header.extend(labels.iter().map(String::as_str));
        let rows = ids.iter().enumerate().map(|(i, id)| {
            let mut row = Vec::with_capacity(self.replicates.len() + 1);
            row.push(id.clone());
            row.extend(self.replicates.iter().map(|r| r.y[i].to_string()));
            row
        });
        tsv::write_table(dir.join(format!("{stem}.tsv")), comments, &header, rows)?;
        let meta_path = dir.join(format!("{stem}.meta.json"));
        let json = serde_json::to_string_pretty(&self.meta).expect("metadata serialises");
        std::fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))
    }

    /// Reads a set written by [`ReplicateSet::write`]; returns it with the
    /// individual ids.
    pub fn read(dir: impl AsRef<Path>, stem: &str) -> Result<(Self, Vec<String>)> {
        let dir = dir.as_ref();
        let meta_path = dir.join(format!("{stem}.meta.json"));
        let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: ReplicateSetMeta = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: meta_path.clone(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        let table = Table::read(dir.join(format!("{stem}.tsv")))?;
        let ids: Vec<String> = table.rows.iter().map(|(_, r)| r[0].clone()).collect();
        let seeds: std::collections::HashMap<&str, u64> = meta
            .replicate_seeds
            .iter()
            .map(|(l, s)| (l.as_str(), *s))
            .collect();
        let mut replicates = Vec::with_capacity(table.header.len() - 1);
        for (c, label) in table.header.iter().enumerate().skip(1) {
            let (h, idx) = label.split_once('_').ok_or_else(|| Error::Parse {
                path: table.path.clone(),
                line: 1,
                msg: format!("bad replicate label '{label}'"),
            })?;
            let y = table
                .rows
                .iter()
                .map(|(line, r)| table.parse::<u8>(*line, &r[c]))
                .collect::<Result<Vec<_>>>()?;
            let n_cases = y.iter().map(|&v| v as usize).sum();
            if n_cases != meta.n_cases {
                return Err(Error::Parse {
                    path: table.path.clone(),
                    line: 1,
                    msg: format!(
                        "replicate {label} has {n_cases} cases, expected {}",
                        meta.n_cases
                    ),
                });
            }
            replicates.push(PhenotypeReplicate {
                y,
                n_cases,
                hypothesis: h.parse()?,
                replicate_index: table.parse(1, idx)?,
                seed: seeds.get(label.as_str()).copied().unwrap_or_default(),
            });
        }
        Ok((Self { meta, replicates }, ids))
    }
}
