//! Replicate-level power estimation: min-p summaries, ROC curves and AUC
//! with DeLong confidence intervals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assoc::{AssocResult, FitStatus};
use crate::error::{Error, Result};
use crate::phenosim::Hypothesis;
use crate::tsv::{self, Table};

/// Two-sided 95% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVector {
    pub hypothesis: Hypothesis,
    /// One score per replicate; larger means more H1-like.
    pub scores: Vec<f64>,
    pub method: String,
    pub region: String,
}

impl ScoreVector {
    pub fn new(
        hypothesis: Hypothesis,
        scores: Vec<f64>,
        method: &str,
        region: &str,
    ) -> Result<Self> {
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!("score {i} is not finite")));
        }
        Ok(Self {
            hypothesis,
            scores,
            method: method.to_owned(),
            region: region.to_owned(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueField {
    PSnp,
    PInt,
}

/// `-log10` of the smallest usable p-value among `results[region]`.
/// p-values that underflowed to zero are floored at the smallest normal f64.
pub fn summary_min_p(
    results: &[AssocResult],
    field: PValueField,
    region: Range<usize>,
) -> Result<f64> {
    if region.end > results.len() || region.start >= region.end {
        return Err(Error::InvalidInput(format!(
            "region {region:?} outside {} results",
            results.len()
        )));
    }
    let min = results[region.clone()]
        .iter()
        .filter(|r| r.status == FitStatus::Ok)
        .filter_map(|r| match field {
            PValueField::PSnp => r.p_snp,
            PValueField::PInt => r.p_int,
        })
        .filter(|p| p.is_finite())
        .fold(None, |acc: Option<f64>, p| {
            Some(acc.map_or(p, |a| a.min(p)))
        })
        .ok_or_else(|| Error::NoUsableData(format!("no usable p-value in region {region:?}")))?;
    Ok(-min.max(f64::MIN_POSITIVE).log10())
}

/// Reads `replicate_index<TAB>score` rows covering replicates `0..expected`
/// (or `0..=max index` when `expected` is `None`).
pub fn ingest_external_scores(
    path: impl AsRef<Path>,
    hypothesis: Hypothesis,
    method: &str,
    region: &str,
    expected: Option<usize>,
) -> Result<ScoreVector> {
    let t = Table::read(path)?;
    let ic = t.column_index("replicate_index")?;
    let sc = t.column_index("score")?;
    let mut by_index = BTreeMap::new();
    for (line, row) in &t.rows {
        let idx: usize = t.parse(*line, &row[ic])?;
        let score: f64 = t.parse(*line, &row[sc])?;
        if by_index.insert(idx, score).is_some() {
            return Err(Error::Parse {
                path: t.path.clone(),
                line: *line,
                msg: format!("duplicate replicate index {idx}"),
            });
        }
    }
    let count = expected.unwrap_or_else(|| by_index.keys().next_back().map_or(0, |m| m + 1));
    let gaps: Vec<usize> = (0..count).filter(|i| !by_index.contains_key(i)).collect();
    if !gaps.is_empty() {
        return Err(Error::Format {
            path: t.path.clone(),
            msg: format!("missing replicate indices {gaps:?}"),
        });
    }
    if let Some(extra) = by_index.keys().find(|&&i| i >= count) {
        return Err(Error::Format {
            path: t.path.clone(),
            msg: format!("replicate index {extra} beyond expected count {count}"),
        });
    }
    ScoreVector::new(hypothesis, by_index.into_values().collect(), method, region)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)` from `(0,0)` to `(1,1)`.
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5)
            .sum()
    }
}

/// Empirical ROC; each distinct score value is one step, so tied H0/H1
/// scores produce a diagonal segment.
pub fn roc(h0: &ScoreVector, h1: &ScoreVector) -> RocCurve {
    let m = h0.scores.len() as f64;
    let n = h1.scores.len() as f64;
    let mut all: Vec<(f64, bool)> = h0
        .scores
        .iter()
        .map(|&s| (s, false))
        .chain(h1.scores.iter().map(|&s| (s, true)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = vec![(0.0, 0.0)];
    let (mut fp, mut tp) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let t = all[i].0;
        while i < all.len() && all[i].0 == t {
            if all[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / m, tp as f64 / n));
    }
    RocCurve { points }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualitativeLabel {
    Fail,
    Poor,
    Fair,
    Good,
    Excellent,
}

impl fmt::Display for QualitativeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QualitativeLabel::Fail => "fail",
            QualitativeLabel::Poor => "poor",
            QualitativeLabel::Fair => "fair",
            QualitativeLabel::Good => "good",
            QualitativeLabel::Excellent => "excellent",
        })
    }
}

pub fn qualitative_label(auc: f64) -> QualitativeLabel {
    if auc <= 0.6 {
        QualitativeLabel::Fail
    } else if auc <= 0.7 {
        QualitativeLabel::Poor
    } else if auc <= 0.8 {
        QualitativeLabel::Fair
    } else if auc <= 0.9 {
        QualitativeLabel::Good
    } else {
        QualitativeLabel::Excellent
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AucEstimate {
    pub auc: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub label: QualitativeLabel,
}

impl fmt::Display for AucEstimate {
    /// Percent scale, e.g. `64.69 [59.26-70.13]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.2} [{:.2}-{:.2}]",
            100.0 * self.auc,
            100.0 * self.ci_low,
            100.0 * self.ci_high
        )
    }
}

/// Midranks (1-based, ties averaged) returned doubled so they stay integral.
fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 averaged, doubled
        let r2 = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = r2;
        }
        i = j + 1;
    }
    ranks
}

fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// Mann-Whitney AUC (ties count one half) with a DeLong 95% interval.
pub fn auc(h0: &ScoreVector, h1: &ScoreVector) -> Result<AucEstimate> {
    let m = h0.scores.len();
    let n = h1.scores.len();
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(
            "AUC needs nonempty H0 and H1 score vectors".into(),
        ));
    }
    let combined: Vec<f64> = h0.scores.iter().chain(&h1.scores).copied().collect();
    let r_all = doubled_midranks(&combined);
    let r_h0 = doubled_midranks(&h0.scores);
    let r_h1 = doubled_midranks(&h1.scores);
    // Twice the number of (H0 < H1) pairs plus once the tied pairs.
    let u2: u64 = r_all[m..].iter().sum::<u64>() - (n * (n + 1)) as u64;
    let d2 = (2 * m * n) as u64;
    // Evaluate from the nearer end so that swapping the arguments gives an
    // exact complement.
    let auc = if 2 * u2 <= d2 {
        u2 as f64 / d2 as f64
    } else {
        1.0 - (d2 - u2) as f64 / d2 as f64
    };
    let v10: Vec<f64> = (0..n)
        .map(|j| (r_all[m + j] - r_h1[j]) as f64 / (2.0 * m as f64))
        .collect();
    let v01: Vec<f64> = (0..m)
        .map(|i| 1.0 - (r_all[i] - r_h0[i]) as f64 / (2.0 * n as f64))
        .collect();
    let se = (sample_variance(&v10) / n as f64 + sample_variance(&v01) / m as f64).sqrt();
    Ok(AucEstimate {
        auc,
        se,
        ci_low: (auc - Z_95 * se).clamp(0.0, 1.0),
        ci_high: (auc + Z_95 * se).clamp(0.0, 1.0),
        label: qualitative_label(auc),
    })
}

/// AUC estimates for every (region, method) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct AucTable {
    pub regions: Vec<String>,
    pub methods: Vec<String>,
    /// `cells[region][method]`.
    pub cells: Vec<Vec<AucEstimate>>,
}

impl AucTable {
    pub fn get(&self, region: &str, method: &str) -> Option<&AucEstimate> {
        let r = self.regions.iter().position(|x| x == region)?;
        let m = self.methods.iter().position(|x| x == method)?;
        Some(&self.cells[r][m])
    }

    /// One row per region, one `auc [low-high]` percent cell per method.
    pub fn write(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let mut header = vec!["region".to_owned()];
        header.extend(self.methods.iter().cloned());
        let rows = self.regions.iter().zip(&self.cells).map(|(region, cells)| {
            let mut row = vec![region.clone()];
            row.extend(cells.iter().map(|c| c.to_string()));
            row
        });
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        tsv::write_table(path, comments, &header, rows)
    }

    /// Long numeric form: region, method, auc, se, ci_low, ci_high, label.
    pub fn write_long(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let mut rows = Vec::new();
        for (region, cells) in self.regions.iter().zip(&self.cells) {
            for (method, c) in self.methods.iter().zip(cells) {
                rows.push(vec![
                    region.clone(),
                    method.clone(),
                    tsv::fmt_f64(c.auc),
                    tsv::fmt_f64(c.se),
                    tsv::fmt_f64(c.ci_low),
                    tsv::fmt_f64(c.ci_high),
                    c.label.to_string(),
                ]);
            }
        }
        tsv::write_table(
            path,
            comments,
            &[
                "region", "method", "auc", "se", "ci_low", "ci_high", "label",
            ],
            rows,
        )
    }
}

/// ROC polylines in long form: method, region, fpr, tpr.
pub fn write_roc(
    path: impl AsRef<Path>,
    comments: &[String],
    curves: &[(String, String, RocCurve)],
) -> Result<()> {
    let rows = curves.iter().flat_map(|(method, region, c)| {
        c.points.iter().map(move |&(x, y)| {
            vec![
                method.clone(),
                region.clone(),
                tsv::fmt_f64(x),
                tsv::fmt_f64(y),
            ]
        })
    });
    tsv::write_table(path, comments, &["method", "region", "fpr", "tpr"], rows)
}
