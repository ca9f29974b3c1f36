//! Homogeneous Poisson process on the timeline `(0, t]`.
//!
//! Two generators that must agree with each other:
//!
//! * [`GenerationMethod::Interarrival`] accumulates exponential gaps until
//!   the horizon is passed;
//! * [`GenerationMethod::ConditionalUniform`] draws the total count from
//!   `Poisson(rate * t)` and scatters that many uniform points on `(0, t]`.
//!
//! On top of the generators sit the empirical checks of the defining
//! properties: rarity of multiple events in short bins, independence of
//! counts in disjoint intervals, stationarity of equal-length intervals,
//! conditional uniformity of event times, and the rate estimate.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::Pmf;
use crate::error::{invalid, Error, Result};
use crate::rng::{replica_rng, replicate, ReplicaRng};
use crate::stats::{
    pearson_correlation, two_sample_chi_square, uniformity_gof, CountHistogram, GofResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMethod {
    Interarrival,
    ConditionalUniform,
}

impl GenerationMethod {
    pub const ALL: [GenerationMethod; 2] = [Self::Interarrival, Self::ConditionalUniform];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    rate: f64,
    horizon: f64,
    seed: u64,
    method: GenerationMethod,
}

impl ProcessConfig {
    pub fn new(rate: f64, horizon: f64, seed: u64, method: GenerationMethod) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid(
                "rate",
                format!("must be finite and > 0, got {rate}"),
            ));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid(
                "horizon",
                format!("must be finite and > 0, got {horizon}"),
            ));
        }
        Ok(Self {
            rate,
            horizon,
            seed,
            method,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn method(&self) -> GenerationMethod {
        self.method
    }

    /// Expected count `rate * horizon`.
    pub fn mu(&self) -> f64 {
        self.rate * self.horizon
    }

    pub fn with_method(mut self, method: GenerationMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Strictly increasing event times in `(0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    times: Vec<f64>,
    horizon: f64,
}

impl EventSequence {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid(
                "horizon",
                format!("must be finite and > 0, got {horizon}"),
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("times", "must be strictly increasing"));
        }
        if let Some(t) = times.iter().find(|t| !(**t > 0.0 && **t <= horizon)) {
            return Err(invalid("times", format!("{t} lies outside (0, {horizon}]")));
        }
        Ok(Self { times, horizon })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Half-open interval `(start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(invalid(
                "interval",
                format!("need start < end, got ({start}, {end}]"),
            ));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.start && t <= self.end
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Pairwise disjoint intervals inside `(0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subdivision {
    intervals: Vec<Interval>,
}

impl Subdivision {
    pub fn new(intervals: Vec<Interval>, horizon: f64) -> Result<Self> {
        for (i, a) in intervals.iter().enumerate() {
            if a.start < 0.0 || a.end > horizon {
                return Err(invalid(
                    "subdivision",
                    format!("({}, {}] is not inside (0, {horizon}]", a.start, a.end),
                ));
            }
            if intervals[..i].iter().any(|b| a.overlaps(b)) {
                return Err(invalid(
                    "subdivision",
                    "intervals must be pairwise disjoint",
                ));
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }
}

fn uniform_in_horizon(rng: &mut ReplicaRng, horizon: f64) -> f64 {
    horizon * (1.0 - rng.random::<f64>())
}

fn sample_times(
    rng: &mut ReplicaRng,
    rate: f64,
    horizon: f64,
    method: GenerationMethod,
) -> Vec<f64> {
    match method {
        GenerationMethod::Interarrival => {
            let gaps = Exp::new(rate).expect("rate validated");
            let mut times = Vec::new();
            let mut last = 0.0f64;
            loop {
                let next = last + gaps.sample(rng);
                if next <= last {
                    // Zero gap or absorbed by rounding: redraw.
                    continue;
                }
                if next > horizon {
                    return times;
                }
                times.push(next);
                last = next;
            }
        }
        GenerationMethod::ConditionalUniform => {
            let count = Poisson::new(rate * horizon)
                .expect("mu validated")
                .sample(rng) as usize;
            let mut times: Vec<f64> = (0..count)
                .map(|_| uniform_in_horizon(rng, horizon))
                .collect();
            loop {
                times.sort_by(f64::total_cmp);
                match times.windows(2).position(|w| w[0] == w[1]) {
                    Some(i) => times[i + 1] = uniform_in_horizon(rng, horizon),
                    None => return times,
                }
            }
        }
    }
}

/// Event sequence of replica `replica` under `config`.
pub fn generate_replica(config: &ProcessConfig, replica: u64) -> EventSequence {
    let mut rng = replica_rng(config.seed, replica);
    EventSequence {
        times: sample_times(&mut rng, config.rate, config.horizon, config.method),
        horizon: config.horizon,
    }
}

/// One realization of the process (replica 0 of `config.seed`).
pub fn generate(config: &ProcessConfig) -> EventSequence {
    generate_replica(config, 0)
}

/// Event counts per interval, using the `(a, b]` convention.
pub fn count_in(events: &EventSequence, subdivision: &Subdivision) -> Vec<u64> {
    subdivision
        .intervals
        .iter()
        .map(|iv| {
            // Times are sorted: count = #{t <= end} - #{t <= start}.
            let upto = |x: f64| events.times.partition_point(|&t| t <= x);
            (upto(iv.end) - upto(iv.start)) as u64
        })
        .collect()
}

/// Applies `f` to every replica's event sequence, in replica order.
pub fn map_replicas<T, F>(config: &ProcessConfig, replicas: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&EventSequence) -> T + Sync,
{
    replicate(config.seed, replicas, |rng, _| {
        let events = EventSequence {
            times: sample_times(rng, config.rate, config.horizon, config.method),
            horizon: config.horizon,
        };
        f(&events)
    })
}

/// Histogram of full-horizon event counts over `replicas` replicas.
pub fn replicate_counts(config: &ProcessConfig, replicas: u64) -> CountHistogram {
    map_replicas(config, replicas, |e| e.len() as u64)
        .into_iter()
        .collect()
}

/// Relative frequencies `N_t(x) / N_t` as a table with zero tail.
pub fn empirical_pmf(hist: &CountHistogram) -> Result<Pmf> {
    if hist.is_empty() {
        return Err(invalid("histogram", "is empty"));
    }
    let lo = hist.min_count().unwrap();
    let hi = hist.max_count().unwrap();
    let n = hist.total() as f64;
    let probs = (lo..=hi).map(|x| hist.frequency(x) as f64 / n).collect();
    Pmf::new(lo, probs, 0.0)
}

/// One width of the rarity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RarityPoint {
    pub width: f64,
    pub bins: u64,
    /// Bins holding exactly one event.
    pub singles: u64,
    /// Bins holding two or more events.
    pub multiples: u64,
    /// `multiples / singles`; `None` when no bin held exactly one event.
    pub ratio: Option<f64>,
    /// `(1 - e^{-m} - m e^{-m}) / (m e^{-m})` with `m = rate * width`.
    pub reference_ratio: f64,
    /// Delta-method standard error of `ratio` around the reference.
    pub std_error: f64,
}

/// Exact `P[>= 2] / P[= 1]` for a bin of expected count `m`.
pub fn rarity_reference_ratio(m: f64) -> f64 {
    // (e^m - 1 - m) / m, via expm1 to survive m -> 0.
    (m.exp_m1() - m) / m
}

/// Empirical ratio of bins with two or more events to bins with exactly
/// one, pooled over replicas, for each bin width.
///
/// Each replica's horizon is cut into `floor(t / width)` bins
/// `(k w, (k+1) w]`.
pub fn axiom_rarity_check(
    config: &ProcessConfig,
    bin_widths: &[f64],
    replicas: u64,
) -> Result<Vec<RarityPoint>> {
    if bin_widths.is_empty() {
        return Err(invalid("bin_widths", "needs at least one width"));
    }
    for w in bin_widths {
        if !(*w > 0.0 && *w <= config.horizon) {
            return Err(invalid(
                "bin_widths",
                format!("each width must lie in (0, {}], got {w}", config.horizon),
            ));
        }
    }
    if bin_widths.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("bin_widths", "must be strictly decreasing"));
    }
    if replicas == 0 {
        return Err(invalid("replicas", "must be > 0"));
    }

    let layouts: Vec<(f64, u64)> = bin_widths
        .iter()
        .map(|&w| (w, (config.horizon / w * (1.0 + 1e-12)).floor() as u64))
        .collect();

    let tallies: Vec<Vec<(u64, u64)>> = map_replicas(config, replicas, |events| {
        layouts
            .iter()
            .map(|&(w, bins)| {
                let (mut singles, mut multiples) = (0u64, 0u64);
                let mut current: Option<(u64, u64)> = None;
                let mut flush = |c: Option<(u64, u64)>| match c {
                    Some((_, 1)) => singles += 1,
                    Some((_, n)) if n >= 2 => multiples += 1,
                    _ => {}
                };
                for &t in events.times() {
                    let k = ((t / w).ceil() as u64).max(1) - 1;
                    if k >= bins {
                        break;
                    }
                    match current {
                        Some((b, n)) if b == k => current = Some((b, n + 1)),
                        other => {
                            flush(other);
                            current = Some((k, 1));
                        }
                    }
                }
                flush(current);
                (singles, multiples)
            })
            .collect()
    });

    Ok(layouts
        .iter()
        .enumerate()
        .map(|(i, &(width, bins))| {
            let (singles, multiples) = tallies
                .iter()
                .fold((0, 0), |acc, r| (acc.0 + r[i].0, acc.1 + r[i].1));
            let m = config.rate * width;
            let p1 = m * (-m).exp();
            let p2 = -(-m).exp_m1() - p1;
            let total_bins = (bins * replicas) as f64;
            // Var(ln n2 - ln n1) under multinomial bin counts.
            let var_log =
                (1.0 - p2) / (total_bins * p2) + (1.0 - p1) / (total_bins * p1) + 2.0 / total_bins;
            let reference_ratio = rarity_reference_ratio(m);
            RarityPoint {
                width,
                bins,
                singles,
                multiples,
                ratio: (singles > 0).then(|| multiples as f64 / singles as f64),
                reference_ratio,
                std_error: reference_ratio * var_log.sqrt(),
            }
        })
        .collect())
}

/// Correlation of counts in two disjoint intervals across replicas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    /// `None` when either count has zero sample variance.
    pub correlation: Option<f64>,
    /// `1 / sqrt(replicas)`, the null standard error.
    pub std_error: f64,
    pub replicas: u64,
}

pub fn axiom_independence_check(
    config: &ProcessConfig,
    first: Interval,
    second: Interval,
    replicas: u64,
) -> Result<IndependenceReport> {
    let sub = Subdivision::new(vec![first, second], config.horizon)?;
    if replicas < 2 {
        return Err(invalid("replicas", "needs at least 2"));
    }
    let pairs: Vec<(f64, f64)> = map_replicas(config, replicas, |e| {
        let c = count_in(e, &sub);
        (c[0] as f64, c[1] as f64)
    });
    Ok(IndependenceReport {
        correlation: pearson_correlation(&pairs),
        std_error: 1.0 / (replicas as f64).sqrt(),
        replicas,
    })
}

/// Two-sample chi-square between the count histograms of two disjoint
/// intervals of equal length.
pub fn stationarity_check(
    config: &ProcessConfig,
    first: Interval,
    second: Interval,
    replicas: u64,
) -> Result<GofResult> {
    if ((first.len() - second.len()) / first.len()).abs() > 1e-12 {
        return Err(invalid("intervals", "must have equal length"));
    }
    let sub = Subdivision::new(vec![first, second], config.horizon)?;
    let counts = map_replicas(config, replicas, |e| count_in(e, &sub));
    let a: CountHistogram = counts.iter().map(|c| c[0]).collect();
    let b: CountHistogram = counts.iter().map(|c| c[1]).collect();
    two_sample_chi_square(&a, &b)
}

/// Pooled event times of the replicas holding exactly `total_count`
/// events, tested for uniformity on `(0, t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub matched_replicas: u64,
    pub pooled_times: u64,
    pub gof: GofResult,
}

pub fn conditional_uniformity_check(
    config: &ProcessConfig,
    total_count: u64,
    replicas: u64,
    bins: usize,
) -> Result<UniformityReport> {
    if total_count == 0 {
        return Err(invalid("total_count", "must be >= 1"));
    }
    let matched: Vec<Vec<f64>> = map_replicas(config, replicas, |e| {
        (e.len() as u64 == total_count).then(|| e.times().to_vec())
    })
    .into_iter()
    .flatten()
    .collect();
    if matched.is_empty() {
        return Err(Error::Undefined(format!(
            "no replica held exactly {total_count} events"
        )));
    }
    let pooled: Vec<f64> = matched.iter().flatten().copied().collect();
    let gof = uniformity_gof(&pooled, 0.0, config.horizon, bins)?;
    Ok(UniformityReport {
        matched_replicas: matched.len() as u64,
        pooled_times: pooled.len() as u64,
        gof,
    })
}

/// Per-window rates `x_i / t_i` and the pooled rate `sum x / sum t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub ratios: Vec<f64>,
    pub pooled: f64,
}

pub fn rate_estimate(windows: &[(u64, f64)]) -> Result<RateEstimate> {
    if windows.is_empty() {
        return Err(invalid("windows", "needs at least one window"));
    }
    if let Some((_, t)) = windows.iter().find(|(_, t)| !(t.is_finite() && *t > 0.0)) {
        return Err(invalid("windows", format!("extents must be > 0, got {t}")));
    }
    let ratios = windows.iter().map(|&(x, t)| x as f64 / t).collect();
    let (count, extent) = windows
        .iter()
        .fold((0u64, 0.0f64), |acc, &(x, t)| (acc.0 + x, acc.1 + t));
    Ok(RateEstimate {
        ratios,
        pooled: count as f64 / extent,
    })
}

/// `(count, horizon)` windows from `replicas` replicas of `config`.
pub fn observation_windows(config: &ProcessConfig, replicas: u64) -> Vec<(u64, f64)> {
    map_replicas(config, replicas, |e| (e.len() as u64, e.horizon()))
}

/// True when every replica sequence is strictly increasing inside `(0, t]`.
pub fn all_sequences_valid(config: &ProcessConfig, replicas: u64) -> bool {
    (0..replicas).into_par_iter().all(|i| {
        let e = generate_replica(config, i);
        EventSequence::new(e.times.clone(), e.horizon).is_ok()
    })
}
