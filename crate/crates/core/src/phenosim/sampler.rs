use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};

/// Above this many table cells the tail table is kept only at checkpoint
/// rows and recomputed block by block while sampling.
const FULL_TABLE_CELLS: usize = 1 << 22;

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Exact sampler for independent Bernoulli(`p_i`) variables conditioned on
/// their sum.
///
/// Row `i` of the tail table holds `log P(k cases among individuals i..n)`
/// for `k = 0..=n_cases`. Individuals are then visited in order and made a
/// case with probability `p_i T(i+1, k-1) / T(i, k)`, where `k` is the number
/// of cases still to place.
#[derive(Clone, Debug)]
pub struct ConditionalSampler {
    log_p: Vec<f64>,
    log_q: Vec<f64>,
    n_cases: usize,
    block: usize,
    /// Rows `0, block, 2 * block, ...` and row `n`, or every row when
    /// `block == 1`.
    checkpoints: Vec<Vec<f64>>,
}

impl ConditionalSampler {
    pub fn new(p: &[f64], n_cases: usize) -> Result<Self> {
        Self::with_cell_limit(p, n_cases, FULL_TABLE_CELLS)
    }

    pub(crate) fn with_cell_limit(p: &[f64], n_cases: usize, cell_limit: usize) -> Result<Self> {
        let n = p.len();
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidInput(format!(
                "probability {bad} outside [0, 1]"
            )));
        }
        if n_cases > n {
            return Err(Error::Feasibility(format!(
                "{n_cases} cases requested among {n} individuals"
            )));
        }
        let forced_cases = p.iter().filter(|&&x| x == 1.0).count();
        let forced_controls = p.iter().filter(|&&x| x == 0.0).count();
        if n_cases < forced_cases || n_cases > n - forced_controls {
            return Err(Error::Feasibility(format!(
                "{n_cases} cases requested but {forced_cases} individuals are certain cases and \
                 {forced_controls} certain controls among {n}"
            )));
        }
        let log_p: Vec<f64> = p.iter().map(|x| x.ln()).collect();
        let log_q: Vec<f64> = p.iter().map(|x| (-x).ln_1p()).collect();
        let block = if (n + 1) * (n_cases + 1) <= cell_limit {
            1
        } else {
            ((n as f64).sqrt().ceil() as usize).max(1)
        };
        let mut sampler = Self {
            log_p,
            log_q,
            n_cases,
            block,
            checkpoints: Vec::new(),
        };
        let mut row = sampler.last_row();
        let mut checkpoints = vec![Vec::new(); n / block + 1];
        let mut stored_last = None;
        for i in (0..=n).rev() {
            if i < n {
                row = sampler.step(i, &row);
            }
            if i % block == 0 {
                checkpoints[i / block] = row.clone();
            } else if i == n {
                stored_last = Some(row.clone());
            }
        }
        if let Some(last) = stored_last {
            checkpoints.push(last);
        }
        if checkpoints[0][n_cases] == f64::NEG_INFINITY {
            return Err(Error::Feasibility(format!(
                "probability of exactly {n_cases} cases underflows to zero"
            )));
        }
        sampler.checkpoints = checkpoints;
        Ok(sampler)
    }

    pub fn n(&self) -> usize {
        self.log_p.len()
    }

    pub fn n_cases(&self) -> usize {
        self.n_cases
    }

    /// `log P(sum = n_cases)` under the unconditioned Bernoulli law.
    pub fn log_total(&self) -> f64 {
        self.checkpoints[0][self.n_cases]
    }

    fn last_row(&self) -> Vec<f64> {
        let mut row = vec![f64::NEG_INFINITY; self.n_cases + 1];
        row[0] = 0.0;
        row
    }

    /// Row `i` from row `i + 1`, restricted to the counts reachable when
    /// sampling forward.
    fn step(&self, i: usize, next: &[f64]) -> Vec<f64> {
        let n = self.n();
        let k_total = self.n_cases;
        let mut row = vec![f64::NEG_INFINITY; k_total + 1];
        let lo = k_total.saturating_sub(i);
        let hi = k_total.min(n - i);
        let (lp, lq) = (self.log_p[i], self.log_q[i]);
        for k in lo..=hi {
            let stay = lq + next[k];
            let case = if k > 0 {
                lp + next[k - 1]
            } else {
                f64::NEG_INFINITY
            };
            row[k] = log_add(case, stay);
        }
        row
    }

    /// Row `row_index` as stored (only valid for checkpoint rows).
    fn checkpoint(&self, row_index: usize) -> &[f64] {
        let n = self.n();
        if row_index.is_multiple_of(self.block) {
            &self.checkpoints[row_index / self.block]
        } else {
            debug_assert_eq!(row_index, n);
            self.checkpoints.last().expect("last row stored")
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let n = self.n();
        let mut y = vec![0u8; n];
        let mut k = self.n_cases;
        if self.block == 1 {
            let rows = &self.checkpoints;
            for i in 0..n {
                if k == 0 {
                    break;
                }
                let prob = (self.log_p[i] + rows[i + 1][k - 1] - rows[i][k]).exp();
                if rng.random::<f64>() < prob {
                    y[i] = 1;
                    k -= 1;
                }
            }
            debug_assert_eq!(k, 0);
            return y;
        }
        let mut start = 0;
        while start < n && k > 0 {
            let end = (start + self.block).min(n);
            // Rows start..=end of the tail table, rebuilt from the checkpoint at `end`.
            let mut rows = vec![Vec::new(); end - start + 1];
            rows[end - start] = self.checkpoint(end).to_vec();
            for i in (start + 1..end).rev() {
                rows[i - start] = self.step(i, &rows[i - start + 1]);
            }
            rows[0] = self.checkpoint(start).to_vec();
            for i in start..end {
                if k == 0 {
                    break;
                }
                let prob = (self.log_p[i] + rows[i - start + 1][k - 1] - rows[i - start][k]).exp();
                if rng.random::<f64>() < prob {
                    y[i] = 1;
                    k -= 1;
                }
            }
            start = end;
        }
        debug_assert_eq!(k, 0);
        y
    }
}

/// One draw of `n_cases` cases from Bernoulli(`p`) conditioned on the total.
pub fn waffect_sample<R: Rng + ?Sized>(p: &[f64], n_cases: usize, rng: &mut R) -> Result<Vec<u8>> {
    Ok(ConditionalSampler::new(p, n_cases)?.sample(rng))
}

/// Exact conditional law by enumeration of all configurations with
/// `n_cases` ones. Limited to `n <= 20`.
pub fn brute_force_conditional_law(p: &[f64], n_cases: usize) -> Result<BTreeMap<Vec<u8>, f64>> {
    let n = p.len();
    if n > 20 {
        return Err(Error::InvalidInput(format!(
            "enumeration refused for n = {n} > 20"
        )));
    }
    if n_cases > n {
        return Err(Error::Feasibility(format!("{n_cases} cases among {n}")));
    }
    let mut law = BTreeMap::new();
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n_cases {
            continue;
        }
        let config: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
        let w: f64 = config
            .iter()
            .zip(p)
            .map(|(&y, &pi)| if y == 1 { pi } else { 1.0 - pi })
            .product();
        total += w;
        law.insert(config, w);
    }
    if !(total > 0.0) {
        return Err(Error::Feasibility(
            "every configuration has probability zero".into(),
        ));
    }
    for w in law.values_mut() {
        *w /= total;
    }
    law.retain(|_, w| *w > 0.0);
    Ok(law)
}
