//! Exact counting laws: Poisson, binomial and multinomial point
//! probabilities, truncated probability tables, and the total-variation
//! distance used to quantify the binomial-to-Poisson limit.
//!
//! All point probabilities are evaluated in log space through the
//! saddle-point form `exp(-stirling_error(x) - bd0(x, mu)) / sqrt(2 pi x)`,
//! which stays accurate to a few ulps far beyond the range where `x!`
//! overflows.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::special::{bd0, regularized_gamma_p, regularized_gamma_q, stirling_error};

/// Normalization slack allowed for any [`Pmf`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Tail mass used by the limit sweeps when tabulating the Poisson side.
pub const SWEEP_TABLE_TOL: f64 = 1e-15;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Expected count `mu` of a Poisson law (`mu = rate * extent`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonParams {
    mu: f64,
}

impl PoissonParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(invalid("mu", format!("must be finite and > 0, got {mu}")));
        }
        Ok(Self { mu })
    }

    /// Poisson law of the count on an extent `extent` at intensity `rate`.
    pub fn from_rate(rate: f64, extent: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(invalid(
                "rate",
                format!("must be finite and > 0, got {rate}"),
            ));
        }
        if !extent.is_finite() || extent <= 0.0 {
            return Err(invalid(
                "extent",
                format!("must be finite and > 0, got {extent}"),
            ));
        }
        Self::new(rate * extent)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// `n` trials with success probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialParams {
    n: u64,
    p: f64,
}

impl BinomialParams {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

/// `n` draws over categories with probabilities `probs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialParams {
    n: u64,
    probs: Vec<f64>,
}

impl MultinomialParams {
    pub fn new(n: u64, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("probs", "needs at least one category"));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(invalid(
                "probs",
                format!("entries must be finite and >= 0, got {p}"),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(invalid("probs", format!("must sum to 1, got {total}")));
        }
        Ok(Self { n, probs })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// The equivalent binomial law when there are exactly two categories.
    pub fn as_binomial(&self) -> Option<BinomialParams> {
        match self.probs.as_slice() {
            [p, _] => BinomialParams::new(self.n, *p).ok(),
            _ => None,
        }
    }
}

/// A probability table over consecutive counts `offset, offset + 1, ...`
/// plus the mass left outside the table.
///
/// The tail is recorded rather than folded back in, so distances computed
/// from truncated tables never understate the truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    offset: u64,
    probs: Vec<f64>,
    tail_bound: f64,
}

impl Pmf {
    pub fn new(offset: u64, probs: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid(
                "probs",
                format!("entries must lie in [0, 1], got {p}"),
            ));
        }
        if !(0.0..=1.0).contains(&tail_bound) {
            return Err(invalid(
                "tail_bound",
                format!("must lie in [0, 1], got {tail_bound}"),
            ));
        }
        let total: f64 = probs.iter().sum::<f64>() + tail_bound;
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(invalid(
                "probs",
                format!("table mass plus tail must be 1 within {NORMALIZATION_TOL}, got {total}"),
            ));
        }
        Ok(Self {
            offset,
            probs,
            tail_bound,
        })
    }

    /// All mass on the single count `x`.
    pub fn point_mass(x: u64) -> Self {
        Self {
            offset: x,
            probs: vec![1.0],
            tail_bound: 0.0,
        }
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// One past the last tabulated count.
    pub fn end(&self) -> u64 {
        self.offset + self.probs.len() as u64
    }

    /// Tabulated probability of `x`; zero outside the table.
    pub fn prob(&self, x: u64) -> f64 {
        if x < self.offset || x >= self.end() {
            0.0
        } else {
            self.probs[(x - self.offset) as usize]
        }
    }

    pub fn ln_prob(&self, x: u64) -> f64 {
        self.prob(x).ln()
    }

    /// `(count, probability)` pairs in increasing count order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.offset + i as u64, *p))
    }

    pub fn captured_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Mean over the tabulated support.
    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, p)| x as f64 * p).sum()
    }

    /// Variance over the tabulated support.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(x, p)| (x as f64 - m).powi(2) * p).sum()
    }
}

/// `ln P(x; mu)`.
pub fn ln_poisson_pmf(x: u64, params: &PoissonParams) -> f64 {
    let mu = params.mu;
    if x == 0 {
        return -mu;
    }
    let xf = x as f64;
    -stirling_error(xf) - bd0(xf, mu) - 0.5 * (LN_2PI + xf.ln())
}

/// `P(x; mu) = mu^x e^{-mu} / x!`.
pub fn poisson_pmf(x: u64, params: &PoissonParams) -> f64 {
    ln_poisson_pmf(x, params).exp()
}

/// `P(X < lo) + P(X > hi)` for `X ~ Poisson(mu)`.
fn poisson_outside_mass(lo: u64, hi: u64, mu: f64) -> Result<f64> {
    let lower = if lo == 0 {
        0.0
    } else {
        regularized_gamma_q(lo as f64, mu)?
    };
    let upper = regularized_gamma_p((hi + 1) as f64, mu)?;
    Ok(lower + upper)
}

/// Truncated Poisson table holding at least `1 - mass_tol` of the mass.
///
/// The support grows outward from `floor(mu)`, always toward the heavier
/// neighbour. The mass outside the final support is evaluated through the
/// incomplete gamma function and stored as `tail_bound`.
pub fn poisson_pmf_table(params: &PoissonParams, mass_tol: f64) -> Result<Pmf> {
    if !(mass_tol > 0.0 && mass_tol < 1.0) {
        return Err(invalid(
            "mass_tol",
            format!("must lie in (0, 1), got {mass_tol}"),
        ));
    }
    let mu = params.mu;
    let mode = mu.floor() as u64;
    let (mut lo, mut hi) = (mode, mode);
    let mut lower_side: Vec<f64> = Vec::new();
    let mut upper_side: Vec<f64> = vec![poisson_pmf(mode, params)];
    let mut captured = upper_side[0];
    let mut next_up = poisson_pmf(hi + 1, params);
    let mut next_down = if lo > 0 {
        poisson_pmf(lo - 1, params)
    } else {
        0.0
    };

    loop {
        // The running sum is only a cheap pre-filter; the exact tail decides.
        if 1.0 - captured <= mass_tol + 1e-12 {
            let outside = poisson_outside_mass(lo, hi, mu)?;
            if outside <= mass_tol {
                lower_side.reverse();
                lower_side.extend(upper_side);
                return Pmf::new(lo, lower_side, outside);
            }
        }
        if lo > 0 && next_down >= next_up {
            lower_side.push(next_down);
            captured += next_down;
            lo -= 1;
            next_down = if lo > 0 {
                poisson_pmf(lo - 1, params)
            } else {
                0.0
            };
        } else {
            upper_side.push(next_up);
            captured += next_up;
            hi += 1;
            next_up = poisson_pmf(hi + 1, params);
        }
    }
}

fn ln_binomial_raw(x: u64, n: u64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if x == 0 {
        if n == 0 {
            return 0.0;
        }
        return if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
    }
    if x == n {
        return if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let xf = x as f64;
    let rest = (n - x) as f64;
    let lc = stirling_error(nf)
        - stirling_error(xf)
        - stirling_error(rest)
        - bd0(xf, nf * p)
        - bd0(rest, nf * q);
    let lf = LN_2PI + xf.ln() + (-xf / nf).ln_1p();
    lc - 0.5 * lf
}

/// `ln B(x; n, p)`.
pub fn ln_binomial_pmf(x: u64, params: &BinomialParams) -> Result<f64> {
    if x > params.n {
        return Err(invalid(
            "x",
            format!("must be <= n = {}, got {x}", params.n),
        ));
    }
    Ok(ln_binomial_raw(x, params.n, params.p, params.q()))
}

/// `B(x; n, p) = C(n, x) p^x q^(n - x)`.
pub fn binomial_pmf(x: u64, params: &BinomialParams) -> Result<f64> {
    ln_binomial_pmf(x, params).map(f64::exp)
}

/// Full binomial table over `0..=n`.
pub fn binomial_pmf_table(params: &BinomialParams) -> Result<Pmf> {
    let probs = (0..=params.n)
        .map(|x| ln_binomial_raw(x, params.n, params.p, params.q()).exp())
        .collect();
    Pmf::new(0, probs, 0.0)
}

/// `ln M(counts; n, probs)`.
///
/// Factored as a chain of binomials, category by category, each
/// conditioned on what the earlier categories used up. With two
/// categories this is the binomial law itself.
pub fn ln_multinomial_pmf(counts: &[u64], params: &MultinomialParams) -> Result<f64> {
    if counts.len() != params.probs.len() {
        return Err(invalid(
            "counts",
            format!(
                "expected {} categories, got {}",
                params.probs.len(),
                counts.len()
            ),
        ));
    }
    let total: u64 = counts.iter().sum();
    if total != params.n {
        return Err(invalid(
            "counts",
            format!("must sum to n = {}, got {total}", params.n),
        ));
    }
    let mut remaining_n = params.n;
    let mut remaining_p = 1.0f64;
    let mut ln_p = 0.0;
    let last = counts.len() - 1;
    for (i, (&x, &p)) in counts.iter().zip(&params.probs).enumerate() {
        if i == last {
            // Whatever is left must land here.
            if x > 0 && p == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            break;
        }
        let cond = if remaining_p > 0.0 {
            (p / remaining_p).clamp(0.0, 1.0)
        } else {
            0.0
        };
        ln_p += ln_binomial_raw(x, remaining_n, cond, 1.0 - cond);
        remaining_n -= x;
        remaining_p -= p;
    }
    Ok(ln_p)
}

pub fn multinomial_pmf(counts: &[u64], params: &MultinomialParams) -> Result<f64> {
    ln_multinomial_pmf(counts, params).map(f64::exp)
}

/// Conditional law of the counts in sub-extents `sub_extents` of a total
/// extent `total_extent` given `n` points overall.
///
/// Returns `k + 1` categories: one per sub-extent with probability
/// `extent / total`, then the remainder.
pub fn conditional_subcount_law(
    n: u64,
    sub_extents: &[f64],
    total_extent: f64,
) -> Result<MultinomialParams> {
    if !total_extent.is_finite() || total_extent <= 0.0 {
        return Err(invalid(
            "total_extent",
            format!("must be finite and > 0, got {total_extent}"),
        ));
    }
    if let Some(e) = sub_extents.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(invalid(
            "sub_extents",
            format!("must be finite and > 0, got {e}"),
        ));
    }
    let covered: f64 = sub_extents.iter().sum();
    if covered > total_extent {
        return Err(invalid(
            "sub_extents",
            format!("sum {covered} exceeds total extent {total_extent}"),
        ));
    }
    let mut probs: Vec<f64> = sub_extents.iter().map(|e| e / total_extent).collect();
    let used: f64 = probs.iter().sum();
    probs.push((1.0 - used).max(0.0));
    MultinomialParams::new(n, probs)
}

/// Total-variation distance between two tables.
///
/// Half the L1 distance over the union of the supports, with the two
/// untabulated tails compared as one lumped cell.
pub fn tv_distance(a: &Pmf, b: &Pmf) -> f64 {
    let start = a.offset.min(b.offset);
    let end = a.end().max(b.end());
    let l1: f64 = (start..end).map(|x| (a.prob(x) - b.prob(x)).abs()).sum();
    (0.5 * (l1 + (a.tail_bound - b.tail_bound).abs())).clamp(0.0, 1.0)
}

/// `TV(Binomial(n, mu / n), Poisson(mu))` for each `n`.
pub fn poisson_limit_sweep(mu: f64, n_values: &[u64]) -> Result<Vec<(u64, f64)>> {
    let poisson = PoissonParams::new(mu)?;
    let table = poisson_pmf_table(&poisson, SWEEP_TABLE_TOL)?;
    n_values
        .iter()
        .map(|&n| {
            if (n as f64) < mu {
                return Err(invalid(
                    "n",
                    format!(
                        "must be >= ceil(mu) = {} so that mu / n <= 1, got {n}",
                        mu.ceil()
                    ),
                ));
            }
            let binomial = binomial_pmf_table(&BinomialParams::new(n, mu / n as f64)?)?;
            Ok((n, tv_distance(&binomial, &table)))
        })
        .collect()
}
