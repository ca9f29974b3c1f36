//! Verdict machinery: count histograms, chi-square goodness-of-fit with
//! expected-count binning, a two-sample homogeneity test, and sample moments.
//!
//! Binning convention: cells are merged until every expected count is at
//! least [`MIN_EXPECTED`]. Ordered supports merge from both tails inward;
//! unordered cell sets (joint histograms) pool their lightest cells.
//! Degrees of freedom are `bins - 1` since every law tested here is fully
//! specified in advance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::Pmf;
use crate::error::{invalid, Error, Result};
pub use crate::special::regularized_gamma_q;

/// Minimum expected count per chi-square cell.
pub const MIN_EXPECTED: f64 = 5.0;

/// Minimum number of replicas for a goodness-of-fit test.
pub const MIN_REPLICAS: u64 = 50;

/// Replica frequencies keyed by count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountHistogram {
    frequencies: BTreeMap<u64, u64>,
    total: u64,
}

impl CountHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, count: u64) {
        self.add_n(count, 1);
    }

    pub fn add_n(&mut self, count: u64, times: u64) {
        if times == 0 {
            return;
        }
        *self.frequencies.entry(count).or_insert(0) += times;
        self.total += times;
    }

    pub fn merge(&mut self, other: &CountHistogram) {
        for (&x, &f) in &other.frequencies {
            self.add_n(x, f);
        }
    }

    /// Number of replicas `N_t`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn frequency(&self, count: u64) -> u64 {
        self.frequencies.get(&count).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// `(count, frequency)` pairs in increasing count order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.frequencies.iter().map(|(&x, &f)| (x, f))
    }

    pub fn min_count(&self) -> Option<u64> {
        self.frequencies.keys().next().copied()
    }

    pub fn max_count(&self) -> Option<u64> {
        self.frequencies.keys().next_back().copied()
    }
}

impl FromIterator<u64> for CountHistogram {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut h = Self::new();
        for x in iter {
            h.add(x);
        }
        h
    }
}

/// Outcome of a chi-square test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
    pub bins_used: u64,
}

impl GofResult {
    fn from_statistic(statistic: f64, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::Undefined(format!(
                "chi-square needs at least 2 bins after merging, got {bins}"
            )));
        }
        let dof = bins as u64 - 1;
        let p_value = regularized_gamma_q(dof as f64 / 2.0, statistic / 2.0)?;
        Ok(Self {
            statistic,
            dof,
            p_value,
            bins_used: bins as u64,
        })
    }

    /// True when the test rejects at significance `alpha`.
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// A chi-square cell: expected weight and the observed counts of one or
/// more samples.
#[derive(Debug, Clone)]
struct Cell<const K: usize> {
    weight: f64,
    observed: [u64; K],
}

impl<const K: usize> Cell<K> {
    fn absorb(&mut self, other: &Cell<K>) {
        self.weight += other.weight;
        for (a, b) in self.observed.iter_mut().zip(other.observed) {
            *a += b;
        }
    }
}

/// Merge an ordered cell sequence from both tails inward, then fold any
/// light interior cell into its lighter neighbour.
fn merge_ordered<const K: usize>(mut cells: Vec<Cell<K>>, min: f64) -> Vec<Cell<K>> {
    while cells.len() > 1 && cells[0].weight < min {
        let first = cells.remove(0);
        cells[0].absorb(&first);
    }
    while cells.len() > 1 && cells[cells.len() - 1].weight < min {
        let last = cells.pop().unwrap();
        let n = cells.len();
        cells[n - 1].absorb(&last);
    }
    loop {
        let light = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.weight < min)
            .min_by(|a, b| a.1.weight.total_cmp(&b.1.weight))
            .map(|(i, _)| i);
        let Some(i) = light else { break };
        if cells.len() < 2 {
            break;
        }
        let target = if i == 0 {
            1
        } else if i == cells.len() - 1 || cells[i - 1].weight <= cells[i + 1].weight {
            i - 1
        } else {
            i + 1
        };
        let cell = cells.remove(i);
        let target = if target > i { target - 1 } else { target };
        cells[target].absorb(&cell);
    }
    cells
}

/// Pool the lightest cells of an unordered cell set until every cell
/// reaches `min`.
fn merge_unordered<const K: usize>(mut cells: Vec<Cell<K>>, min: f64) -> Vec<Cell<K>> {
    cells.sort_by(|a, b| a.weight.total_cmp(&b.weight));
    let mut out: Vec<Cell<K>> = Vec::new();
    let mut pool: Option<Cell<K>> = None;
    for cell in cells {
        match pool.as_mut() {
            Some(p) if p.weight < min => p.absorb(&cell),
            Some(_) => out.push(cell),
            None if cell.weight < min => pool = Some(cell),
            None => out.push(cell),
        }
    }
    if let Some(p) = pool {
        if p.weight < min && !out.is_empty() {
            // Still light after absorbing everything lighter: join the lightest full cell.
            out[0].absorb(&p);
        } else {
            out.push(p);
        }
    }
    out
}

fn pearson_statistic(cells: &[Cell<1>]) -> f64 {
    cells
        .iter()
        .map(|c| {
            let e = c.weight;
            let o = c.observed[0] as f64;
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum()
}

fn check_replicas(total: u64) -> Result<()> {
    if total < MIN_REPLICAS {
        return Err(invalid(
            "histogram",
            format!("needs at least {MIN_REPLICAS} replicas, got {total}"),
        ));
    }
    Ok(())
}

/// Chi-square goodness of fit of a count histogram against a table.
///
/// Observations below or above the tabulated support land in the first or
/// last cell; the table's untabulated tail mass is assigned to the last cell.
pub fn chi_square_gof(hist: &CountHistogram, expected: &Pmf) -> Result<GofResult> {
    check_replicas(hist.total())?;
    let n = hist.total() as f64;
    let mut cells: Vec<Cell<1>> = expected
        .iter()
        .map(|(x, p)| Cell {
            weight: n * p,
            observed: [hist.frequency(x)],
        })
        .collect();
    if cells.is_empty() {
        return Err(Error::Undefined("expected table is empty".into()));
    }
    let below: u64 = hist
        .iter()
        .filter(|(x, _)| *x < expected.offset())
        .map(|(_, f)| f)
        .sum();
    let above: u64 = hist
        .iter()
        .filter(|(x, _)| *x >= expected.end())
        .map(|(_, f)| f)
        .sum();
    cells[0].observed[0] += below;
    let last = cells.len() - 1;
    cells[last].observed[0] += above;
    cells[last].weight += n * expected.tail_bound();

    let cells = merge_ordered(cells, MIN_EXPECTED);
    GofResult::from_statistic(pearson_statistic(&cells), cells.len())
}

/// Chi-square goodness of fit over an ordered sequence of cells with
/// expected probabilities `probs` (which must sum to 1).
pub fn chi_square_cells(observed: &[u64], probs: &[f64]) -> Result<GofResult> {
    if observed.len() != probs.len() {
        return Err(invalid("observed", "length must match probs"));
    }
    let total: u64 = observed.iter().sum();
    check_replicas(total)?;
    let n = total as f64;
    let cells = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| Cell {
            weight: n * p,
            observed: [o],
        })
        .collect();
    let cells = merge_ordered(cells, MIN_EXPECTED);
    GofResult::from_statistic(pearson_statistic(&cells), cells.len())
}

/// Chi-square goodness of fit over unordered cells (e.g. joint count
/// vectors). Cells are pooled lightest-first.
pub fn chi_square_unordered_cells(observed: &[u64], probs: &[f64]) -> Result<GofResult> {
    if observed.len() != probs.len() {
        return Err(invalid("observed", "length must match probs"));
    }
    let total: u64 = observed.iter().sum();
    check_replicas(total)?;
    let n = total as f64;
    let cells = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| Cell {
            weight: n * p,
            observed: [o],
        })
        .collect();
    let cells = merge_unordered(cells, MIN_EXPECTED);
    GofResult::from_statistic(pearson_statistic(&cells), cells.len())
}

/// Equal-width bin counts of `values` over `(lo, hi]`.
pub fn uniform_bin_counts(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Vec<u64>> {
    if !(hi > lo) || bins == 0 {
        return Err(invalid("bins", "need hi > lo and at least one bin"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in values {
        if !(v > lo && v <= hi) {
            return Err(invalid("values", format!("{v} lies outside ({lo}, {hi}]")));
        }
        let k = (((v - lo) / width).ceil() as usize).clamp(1, bins) - 1;
        counts[k] += 1;
    }
    Ok(counts)
}

/// Chi-square test that `values` are uniform on `(lo, hi]` over `bins`
/// equal-width bins.
pub fn uniformity_gof(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<GofResult> {
    let counts = uniform_bin_counts(values, lo, hi, bins)?;
    chi_square_cells(&counts, &vec![1.0 / bins as f64; bins])
}

/// Two-sample chi-square homogeneity test between two count histograms.
///
/// Cells cover the union support; merging is driven by the smaller
/// sample's expected count under the pooled law.
pub fn two_sample_chi_square(a: &CountHistogram, b: &CountHistogram) -> Result<GofResult> {
    check_replicas(a.total())?;
    check_replicas(b.total())?;
    let (na, nb) = (a.total() as f64, b.total() as f64);
    let lo = a.min_count().unwrap().min(b.min_count().unwrap());
    let hi = a.max_count().unwrap().max(b.max_count().unwrap());
    let scale = na.min(nb) / (na + nb);
    let cells: Vec<Cell<2>> = (lo..=hi)
        .map(|x| {
            let (oa, ob) = (a.frequency(x), b.frequency(x));
            Cell {
                weight: scale * (oa + ob) as f64,
                observed: [oa, ob],
            }
        })
        .filter(|c| c.observed != [0, 0])
        .collect();
    let cells = merge_ordered(cells, MIN_EXPECTED);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let statistic = cells
        .iter()
        .map(|c| {
            let (oa, ob) = (c.observed[0] as f64, c.observed[1] as f64);
            (ka * oa - kb * ob).powi(2) / (oa + ob)
        })
        .sum();
    GofResult::from_statistic(statistic, cells.len())
}

/// Sample mean and unbiased sample variance of a histogram.
pub fn empirical_moments(hist: &CountHistogram) -> Result<(f64, f64)> {
    if hist.total() < 2 {
        return Err(invalid(
            "histogram",
            format!("needs at least 2 replicas, got {}", hist.total()),
        ));
    }
    let n = hist.total() as f64;
    let mean = hist.iter().map(|(x, f)| x as f64 * f as f64).sum::<f64>() / n;
    let ss: f64 = hist
        .iter()
        .map(|(x, f)| f as f64 * (x as f64 - mean).powi(2))
        .sum();
    Ok((mean, ss / (n - 1.0)))
}

/// Sample Pearson correlation of paired observations; `None` when either
/// side has zero variance.
pub fn pearson_correlation(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
