//! Classical point particles in a 3D box.
//!
//! Each particle is uniform in the container and independent of the rest.
//! With the particle number fixed, the count in a sub-region of volume `v`
//! is `Binomial(N, v / V)` and counts in disjoint regions are jointly
//! multinomial. With the density fixed instead, the total is drawn from
//! `Poisson(density * V)` before placement, so region counts are exactly
//! `Poisson(density * v)`. Letting `N` and `V` grow at fixed `N / V` turns the
//! first picture into the second; [`thermodynamic_limit_sweep`] measures
//! that convergence analytically.
//!
//! Coordinates use half-open intervals `[lo, hi)` on every axis.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{
    binomial_pmf_table, multinomial_pmf, poisson_pmf_table, tv_distance, BinomialParams,
    MultinomialParams, PoissonParams, SWEEP_TABLE_TOL,
};
use crate::error::{invalid, Result};
use crate::rng::{replica_rng, ReplicaRng};
use crate::stats::{
    chi_square_gof, chi_square_unordered_cells, two_sample_chi_square, CountHistogram, GofResult,
};

pub type Position = [f64; 3];

/// The container `[0, Lx) x [0, Ly) x [0, Lz)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Container {
    extents: [f64; 3],
}

impl Container {
    pub fn new(extents: [f64; 3]) -> Result<Self> {
        if let Some(e) = extents.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(invalid(
                "extents",
                format!("must be finite and > 0, got {e}"),
            ));
        }
        Ok(Self { extents })
    }

    /// Cube of volume `volume`.
    pub fn cube(volume: f64) -> Result<Self> {
        let side = volume.cbrt();
        Self::new([side; 3])
    }

    pub fn extents(&self) -> [f64; 3] {
        self.extents
    }

    pub fn volume(&self) -> f64 {
        self.extents.iter().product()
    }

    /// The whole container as a region.
    pub fn as_region(&self) -> Region {
        Region {
            lo: [0.0; 3],
            hi: self.extents,
        }
    }
}

/// Axis-aligned sub-box `[lo, hi)` of the container.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Region {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        for axis in 0..3 {
            if !(lo[axis].is_finite() && hi[axis].is_finite() && lo[axis] < hi[axis]) {
                return Err(invalid(
                    "region",
                    format!(
                        "axis {axis}: need lo < hi, got [{}, {})",
                        lo[axis], hi[axis]
                    ),
                ));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Slab `[start, start + thickness)` along the x axis spanning the other two axes.
    pub fn slab_x(container: &Container, start: f64, thickness: f64) -> Result<Self> {
        let e = container.extents;
        Self::new([start, 0.0, 0.0], [start + thickness, e[1], e[2]])
    }

    pub fn lo(&self) -> [f64; 3] {
        self.lo
    }

    pub fn hi(&self) -> [f64; 3] {
        self.hi
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn contains(&self, p: &Position) -> bool {
        (0..3).all(|a| p[a] >= self.lo[a] && p[a] < self.hi[a])
    }

    pub fn is_inside(&self, container: &Container) -> bool {
        (0..3).all(|a| self.lo[a] >= 0.0 && self.hi[a] <= container.extents[a])
    }

    pub fn overlaps(&self, other: &Region) -> bool {
        (0..3).all(|a| self.lo[a] < other.hi[a] && other.lo[a] < self.hi[a])
    }
}

/// How many particles a replica holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    /// Exactly `N` particles.
    FixedCount(u64),
    /// `Poisson(density * V)` particles.
    FixedDensity(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasConfig {
    population: Population,
    container: Container,
    regions: Vec<Region>,
    seed: u64,
}

impl GasConfig {
    pub fn new(
        population: Population,
        container: Container,
        regions: Vec<Region>,
        seed: u64,
    ) -> Result<Self> {
        if let Population::FixedDensity(d) = population {
            if !(d.is_finite() && d > 0.0) {
                return Err(invalid(
                    "density",
                    format!("must be finite and > 0, got {d}"),
                ));
            }
        }
        for (i, r) in regions.iter().enumerate() {
            if !r.is_inside(&container) {
                return Err(invalid(
                    "regions",
                    format!("region {i} is not inside the container"),
                ));
            }
            if regions[..i].iter().any(|o| o.overlaps(r)) {
                return Err(invalid("regions", "regions must be pairwise disjoint"));
            }
        }
        Ok(Self {
            population,
            container,
            regions,
            seed,
        })
    }

    pub fn population(&self) -> Population {
        self.population
    }

    pub fn container(&self) -> &Container {
        &self.container
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn fixed_count(&self) -> Result<u64> {
        match self.population {
            Population::FixedCount(n) => Ok(n),
            Population::FixedDensity(_) => Err(invalid(
                "population",
                "experiment needs a fixed particle number",
            )),
        }
    }
}

fn uniform_coordinate(rng: &mut ReplicaRng, extent: f64) -> f64 {
    loop {
        // Rounding can carry extent * U up to extent itself.
        let v = extent * rng.random::<f64>();
        if v < extent {
            return v;
        }
    }
}

fn uniform_position(rng: &mut ReplicaRng, extents: &[f64; 3]) -> Position {
    [
        uniform_coordinate(rng, extents[0]),
        uniform_coordinate(rng, extents[1]),
        uniform_coordinate(rng, extents[2]),
    ]
}

fn sample_positions(rng: &mut ReplicaRng, config: &GasConfig) -> Vec<Position> {
    let extents = config.container.extents;
    let n = match config.population {
        Population::FixedCount(n) => n,
        Population::FixedDensity(d) => Poisson::new(d * config.container.volume())
            .expect("density validated")
            .sample(rng) as u64,
    };
    let mut positions: Vec<Position> = (0..n).map(|_| uniform_position(rng, &extents)).collect();
    // Coincident particles have probability zero; redraw if rounding makes one.
    loop {
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            let (p, q) = (&positions[a], &positions[b]);
            p[0].total_cmp(&q[0])
                .then(p[1].total_cmp(&q[1]))
                .then(p[2].total_cmp(&q[2]))
        });
        match order
            .windows(2)
            .find(|w| positions[w[0]] == positions[w[1]])
        {
            Some(w) => positions[w[1]] = uniform_position(rng, &extents),
            None => return positions,
        }
    }
}

/// Particle positions of replica `replica`.
pub fn place_particles_replica(config: &GasConfig, replica: u64) -> Vec<Position> {
    sample_positions(&mut replica_rng(config.seed, replica), config)
}

/// One configuration of the gas (replica 0 of `config.seed`).
pub fn place_particles(config: &GasConfig) -> Vec<Position> {
    place_particles_replica(config, 0)
}

pub fn count_in_region(positions: &[Position], region: &Region) -> u64 {
    positions.iter().filter(|p| region.contains(p)).count() as u64
}

/// Per-replica `(total particles, count in each configured region)`.
pub fn region_counts(config: &GasConfig, replicas: u64) -> Vec<(u64, Vec<u64>)> {
    region_counts_from(config, 0, replicas)
}

fn region_counts_from(
    config: &GasConfig,
    first_replica: u64,
    replicas: u64,
) -> Vec<(u64, Vec<u64>)> {
    (first_replica..first_replica + replicas)
        .into_par_iter()
        .map(|i| {
            let positions = place_particles_replica(config, i);
            let counts = config
                .regions
                .iter()
                .map(|r| count_in_region(&positions, r))
                .collect();
            (positions.len() as u64, counts)
        })
        .collect()
}

/// Histogram of counts in region `index` over `replicas` replicas.
pub fn region_histogram(config: &GasConfig, index: usize, replicas: u64) -> Result<CountHistogram> {
    if index >= config.regions.len() {
        return Err(invalid("index", format!("no region {index}")));
    }
    Ok(region_counts(config, replicas)
        .into_iter()
        .map(|(_, c)| c[index])
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialExperiment {
    pub law: BinomialParams,
    pub histogram: CountHistogram,
    pub gof: GofResult,
}

/// Counts in the single configured region at fixed `N`, tested against
/// `Binomial(N, v / V)`.
pub fn conditional_binomial_experiment(
    config: &GasConfig,
    replicas: u64,
) -> Result<BinomialExperiment> {
    let n = config.fixed_count()?;
    if config.regions.len() != 1 {
        return Err(invalid(
            "regions",
            format!("expected exactly one region, got {}", config.regions.len()),
        ));
    }
    let law = BinomialParams::new(n, config.regions[0].volume() / config.container.volume())?;
    let histogram = region_histogram(config, 0, replicas)?;
    let gof = chi_square_gof(&histogram, &binomial_pmf_table(&law)?)?;
    Ok(BinomialExperiment {
        law,
        histogram,
        gof,
    })
}

/// Joint frequencies of the count vectors `(x_1, ..., x_k)`.
pub type JointHistogram = BTreeMap<Vec<u64>, u64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialExperiment {
    /// Region probabilities `v_i / V` followed by the remainder.
    pub law: MultinomialParams,
    pub joint: JointHistogram,
    pub gof: GofResult,
    /// Per-region histograms with their binomial tests.
    pub marginals: Vec<BinomialExperiment>,
    /// Histogram of the remainder count `x_r = N - sum x_i`.
    pub remainder: CountHistogram,
}

/// Count range `[lo, hi]` of a binomial holding all but `1e-12` of its mass.
fn binomial_core_range(law: &BinomialParams) -> Result<(u64, u64)> {
    let table = binomial_pmf_table(law)?;
    let probs = table.probs();
    let mut lo = 0usize;
    let mut cut = 0.0;
    while lo + 1 < probs.len() && cut + probs[lo] < 0.5e-12 {
        cut += probs[lo];
        lo += 1;
    }
    let mut hi = probs.len() - 1;
    let mut cut = 0.0;
    while hi > lo && cut + probs[hi] < 0.5e-12 {
        cut += probs[hi];
        hi -= 1;
    }
    Ok((lo as u64, hi as u64))
}

fn enumerate_cells(ranges: &[(u64, u64)], n: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                let used: u64 = prefix.iter().sum();
                (lo..=hi.min(n.saturating_sub(used))).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

/// Joint counts in `k` disjoint regions at fixed `N`, tested against the
/// multinomial law with `p_i = v_i / V`; marginals are tested against their
/// binomial laws.
///
/// With one region this is [`conditional_binomial_experiment`]. Otherwise
/// the joint cells cover every count vector inside the marginals' central
/// ranges plus one cell for everything else, pooled lightest-first.
pub fn multinomial_partition_experiment(
    config: &GasConfig,
    replicas: u64,
) -> Result<MultinomialExperiment> {
    let n = config.fixed_count()?;
    let k = config.regions.len();
    if k == 0 {
        return Err(invalid("regions", "need at least one region"));
    }
    let volume = config.container.volume();
    let extents: Vec<f64> = config.regions.iter().map(Region::volume).collect();
    let mut probs: Vec<f64> = extents.iter().map(|v| v / volume).collect();
    let used: f64 = probs.iter().sum();
    probs.push((1.0 - used).max(0.0));
    let law = MultinomialParams::new(n, probs)?;

    let samples = region_counts(config, replicas);
    let mut joint = JointHistogram::new();
    let mut remainder = CountHistogram::new();
    for (_, counts) in &samples {
        *joint.entry(counts.clone()).or_insert(0) += 1;
        remainder.add(n - counts.iter().sum::<u64>());
    }

    let mut marginals = Vec::with_capacity(k);
    for i in 0..k {
        let m_law = BinomialParams::new(n, law.probs()[i])?;
        let histogram: CountHistogram = samples.iter().map(|(_, c)| c[i]).collect();
        let gof = chi_square_gof(&histogram, &binomial_pmf_table(&m_law)?)?;
        marginals.push(BinomialExperiment {
            law: m_law,
            histogram,
            gof,
        });
    }

    let gof = if k == 1 {
        marginals[0].gof
    } else {
        let ranges = marginals
            .iter()
            .map(|m| binomial_core_range(&m.law))
            .collect::<Result<Vec<_>>>()?;
        let cells = enumerate_cells(&ranges, n);
        let mut observed = Vec::with_capacity(cells.len() + 1);
        let mut expected = Vec::with_capacity(cells.len() + 1);
        let mut covered_obs = 0u64;
        let mut covered_prob = 0.0;
        for cell in &cells {
            let mut full = cell.clone();
            full.push(n - cell.iter().sum::<u64>());
            let p = multinomial_pmf(&full, &law)?;
            let o = joint.get(cell).copied().unwrap_or(0);
            covered_obs += o;
            covered_prob += p;
            observed.push(o);
            expected.push(p);
        }
        observed.push(replicas - covered_obs);
        expected.push((1.0 - covered_prob).max(0.0));
        chi_square_unordered_cells(&observed, &expected)?
    };

    Ok(MultinomialExperiment {
        law,
        joint,
        gof,
        marginals,
        remainder,
    })
}

/// Region counts at fixed density conditioned on the total, compared with
/// fixed-`N` replicas at that total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningReport {
    pub condition_total: u64,
    /// Fixed-density replicas whose total equalled `condition_total`.
    pub matched_replicas: u64,
    pub conditional: CountHistogram,
    pub fixed: CountHistogram,
    pub test: GofResult,
}

/// Fixed-density replicas `0..density_replicas` and fixed-`N` replicas on
/// the following streams of the same seed; the first configured region is
/// counted in both.
pub fn conditioning_equivalence_experiment(
    density_config: &GasConfig,
    condition_total: u64,
    density_replicas: u64,
    fixed_replicas: u64,
) -> Result<ConditioningReport> {
    if !matches!(density_config.population, Population::FixedDensity(_)) {
        return Err(invalid("population", "experiment needs a fixed density"));
    }
    if density_config.regions.is_empty() {
        return Err(invalid("regions", "need at least one region"));
    }
    let conditional: CountHistogram = region_counts(density_config, density_replicas)
        .into_iter()
        .filter(|(total, _)| *total == condition_total)
        .map(|(_, c)| c[0])
        .collect();
    let fixed_config = GasConfig {
        population: Population::FixedCount(condition_total),
        ..density_config.clone()
    };
    let fixed: CountHistogram = region_counts_from(&fixed_config, density_replicas, fixed_replicas)
        .into_iter()
        .map(|(_, c)| c[0])
        .collect();
    let test = two_sample_chi_square(&conditional, &fixed)?;
    Ok(ConditioningReport {
        condition_total,
        matched_replicas: conditional.total(),
        conditional,
        fixed,
        test,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub particles: u64,
    pub volume: f64,
    pub tv: f64,
}

/// Exact `TV(Binomial(N, v / V), Poisson(density * v))` along a sequence of
/// `(N, V)` pairs at fixed `N / V = density`.
pub fn thermodynamic_limit_sweep(
    density: f64,
    sub_volume: f64,
    pairs: &[(u64, f64)],
) -> Result<Vec<ThermoPoint>> {
    let poisson = PoissonParams::new(density * sub_volume)?;
    let table = poisson_pmf_table(&poisson, SWEEP_TABLE_TOL)?;
    pairs
        .iter()
        .map(|&(n, volume)| {
            if !(volume.is_finite() && volume > 0.0) {
                return Err(invalid(
                    "pairs",
                    format!("volume must be > 0, got {volume}"),
                ));
            }
            if ((n as f64 / volume - density) / density).abs() > 1e-12 {
                return Err(invalid(
                    "pairs",
                    format!("N / V = {n} / {volume} does not equal the density {density}"),
                ));
            }
            if sub_volume > volume {
                return Err(invalid(
                    "sub_volume",
                    format!("{sub_volume} exceeds V = {volume}"),
                ));
            }
            let binomial = binomial_pmf_table(&BinomialParams::new(n, sub_volume / volume)?)?;
            Ok(ThermoPoint {
                particles: n,
                volume,
                tv: tv_distance(&binomial, &table),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::empirical_moments;

    fn unit_cube() -> Container {
        Container::new([1.0; 3]).unwrap()
    }

    fn fixed(n: u64, container: Container, regions: Vec<Region>, seed: u64) -> GasConfig {
        GasConfig::new(Population::FixedCount(n), container, regions, seed).unwrap()
    }

    #[test]
    fn validation() {
        let c = unit_cube();
        assert!(Container::new([1.0, 0.0, 1.0]).is_err());
        assert!(Region::new([0.0; 3], [0.0, 1.0, 1.0]).is_err());
        let a = Region::new([0.0; 3], [0.5, 1.0, 1.0]).unwrap();
        let b = Region::new([0.4, 0.0, 0.0], [0.6, 1.0, 1.0]).unwrap();
        let outside = Region::new([0.5, 0.0, 0.0], [1.5, 1.0, 1.0]).unwrap();
        assert!(GasConfig::new(Population::FixedCount(3), c, vec![a, b], 0).is_err());
        assert!(GasConfig::new(Population::FixedCount(3), c, vec![outside], 0).is_err());
        assert!(GasConfig::new(Population::FixedDensity(0.0), c, vec![a], 0).is_err());
        // Touching faces are disjoint under [lo, hi).
        let touching = Region::new([0.5, 0.0, 0.0], [1.0, 1.0, 1.0]).unwrap();
        assert!(GasConfig::new(Population::FixedCount(3), c, vec![a, touching], 0).is_ok());
    }

    #[test]
    fn placement_basics() {
        let empty = fixed(0, unit_cube(), vec![], 1);
        assert!(place_particles(&empty).is_empty());
        let g = fixed(500, Container::new([2.0, 3.0, 4.0]).unwrap(), vec![], 1);
        let p = place_particles(&g);
        assert_eq!(p.len(), 500);
        assert_eq!(p, place_particles(&g));
        let whole = g.container().as_region();
        assert_eq!(count_in_region(&p, &whole), 500);
    }

    #[test]
    fn boundary_convention() {
        let r = Region::new([0.0; 3], [0.5, 1.0, 1.0]).unwrap();
        assert_eq!(count_in_region(&[[0.5, 0.2, 0.2]], &r), 0);
        assert_eq!(count_in_region(&[[0.0, 0.2, 0.2]], &r), 1);
        assert_eq!(count_in_region(&[], &r), 0);
    }

    #[test]
    fn partition_counts_sum_to_total() {
        let c = unit_cube();
        let regions: Vec<Region> = (0..4)
            .map(|i| Region::slab_x(&c, i as f64 * 0.25, 0.25).unwrap())
            .collect();
        let g = GasConfig::new(Population::FixedDensity(300.0), c, regions, 4).unwrap();
        for (total, counts) in region_counts(&g, 200) {
            assert_eq!(counts.iter().sum::<u64>(), total);
        }
    }

    #[test]
    fn fixed_n_region_mean() {
        let c = unit_cube();
        let r = Region::slab_x(&c, 0.3, 0.1).unwrap();
        let g = fixed(10_000, c, vec![r], 6);
        let h = region_histogram(&g, 0, 10_000).unwrap();
        let (mean, _) = empirical_moments(&h).unwrap();
        let p = r.volume();
        let sd = (10_000.0 * p * (1.0 - p) / 10_000.0).sqrt();
        assert!((mean - 1000.0).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn fixed_density_is_poisson() {
        let c = Container::cube(1000.0).unwrap();
        let g = GasConfig::new(Population::FixedDensity(1.0), c, vec![c.as_region()], 8).unwrap();
        let h = region_histogram(&g, 0, 20_000).unwrap();
        let table = poisson_pmf_table(&PoissonParams::new(1000.0).unwrap(), 1e-12).unwrap();
        assert!(!chi_square_gof(&h, &table).unwrap().rejects(0.001));
    }

    #[test]
    fn single_bernoulli_particle() {
        let c = unit_cube();
        let g = fixed(1, c, vec![Region::slab_x(&c, 0.0, 0.5).unwrap()], 2);
        let e = conditional_binomial_experiment(&g, 10_000).unwrap();
        let frac = e.histogram.frequency(1) as f64 / 10_000.0;
        assert!((frac - 0.5).abs() < 3.0 * (0.25f64 / 10_000.0).sqrt());
    }

    #[test]
    fn experiment_preconditions() {
        let c = unit_cube();
        let r = Region::slab_x(&c, 0.0, 0.5).unwrap();
        let dens = GasConfig::new(Population::FixedDensity(5.0), c, vec![r], 0).unwrap();
        assert!(conditional_binomial_experiment(&dens, 100).is_err());
        assert!(multinomial_partition_experiment(&dens, 100).is_err());
        let none = fixed(5, c, vec![], 0);
        assert!(conditional_binomial_experiment(&none, 100).is_err());
        let fixed_cfg = fixed(5, c, vec![r], 0);
        assert!(conditioning_equivalence_experiment(&fixed_cfg, 5, 100, 100).is_err());
    }

    #[test]
    fn multinomial_with_one_region_is_binomial() {
        let c = unit_cube();
        let g = fixed(50, c, vec![Region::slab_x(&c, 0.2, 0.3).unwrap()], 12);
        let b = conditional_binomial_experiment(&g, 5_000).unwrap();
        let m = multinomial_partition_experiment(&g, 5_000).unwrap();
        assert_eq!(m.gof, b.gof);
        assert_eq!(m.marginals[0].histogram, b.histogram);
        assert_eq!(m.law.as_binomial().unwrap(), b.law);
    }

    #[test]
    fn multinomial_two_quarter_regions() {
        let c = Container::new([4.0, 1.0, 1.0]).unwrap();
        let regions = vec![
            Region::slab_x(&c, 0.0, 1.0).unwrap(),
            Region::slab_x(&c, 1.0, 1.0).unwrap(),
        ];
        let g = fixed(100, c, regions, 21);
        let m = multinomial_partition_experiment(&g, 100_000).unwrap();
        assert!(!m.gof.rejects(0.001), "{:?}", m.gof);
        assert_eq!(m.marginals[0].law, BinomialParams::new(100, 0.25).unwrap());
        for marginal in &m.marginals {
            assert!(!marginal.gof.rejects(0.001), "{:?}", marginal.gof);
        }
    }

    #[test]
    fn exhaustive_partition_leaves_no_remainder() {
        let c = unit_cube();
        let regions: Vec<Region> = (0..3)
            .map(|i| Region::slab_x(&c, i as f64 / 3.0, 1.0 / 3.0).unwrap())
            .collect();
        // Slab boundaries at 1/3 and 2/3 rounded; close the last slab at the wall.
        let mut regions = regions;
        regions[2] = Region::new(regions[2].lo(), [1.0, 1.0, 1.0]).unwrap();
        let g = fixed(20, c, regions, 3);
        let m = multinomial_partition_experiment(&g, 500).unwrap();
        assert_eq!(m.remainder.frequency(0), 500);
    }

    #[test]
    fn variance_ordering() {
        // Matched means: fixed N = 100 in V = 10 vs density 10; region v = 2.
        let c = Container::new([10.0, 1.0, 1.0]).unwrap();
        let r = Region::slab_x(&c, 0.0, 2.0).unwrap();
        let fixed_cfg = fixed(100, c, vec![r], 30);
        let dens_cfg = GasConfig::new(Population::FixedDensity(10.0), c, vec![r], 31).unwrap();
        let replicas = 50_000;
        let (m1, v1) =
            empirical_moments(&region_histogram(&fixed_cfg, 0, replicas).unwrap()).unwrap();
        let (m2, v2) =
            empirical_moments(&region_histogram(&dens_cfg, 0, replicas).unwrap()).unwrap();
        let n = replicas as f64;
        assert!((m1 - 20.0).abs() < 3.0 * (16.0 / n).sqrt());
        assert!((m2 - 20.0).abs() < 3.0 * (20.0 / n).sqrt());
        // Var(s^2) ~ (mu4 - sigma^4) / n with binomial mu4 = Npq(1 + 3(N-2)pq)
        // and Poisson mu4 = mu + 3 mu^2.
        let binomial_mu4 = 16.0 * (1.0 + 3.0 * 98.0 * 0.16);
        assert!((v1 - 16.0).abs() < 3.0 * ((binomial_mu4 - 256.0) / n).sqrt());
        assert!((v2 - 20.0).abs() < 3.0 * ((20.0 + 2.0 * 400.0) / n).sqrt());
        assert!(v1 < v2);
    }

    #[test]
    fn conditioning_matches_fixed_n() {
        let c = Container::new([10.0, 10.0, 1.0]).unwrap();
        let r = Region::slab_x(&c, 0.0, 1.0).unwrap();
        let g = GasConfig::new(Population::FixedDensity(1.0), c, vec![r], 40).unwrap();
        let report = conditioning_equivalence_experiment(&g, 100, 100_000, 20_000).unwrap();
        assert!(report.matched_replicas > 2000);
        assert!(!report.test.rejects(0.001), "{:?}", report.test);
    }

    #[test]
    fn thermo_sweep() {
        let pts = thermodynamic_limit_sweep(1.0, 1.0, &[(10, 10.0), (100, 100.0), (1000, 1000.0)])
            .unwrap();
        assert!(pts.windows(2).all(|w| w[1].tv < w[0].tv));
        assert!(pts[2].tv < 1e-3);
        assert!(thermodynamic_limit_sweep(1.0, 1.0, &[(10, 11.0)]).is_err());
        assert!(thermodynamic_limit_sweep(1.0, 20.0, &[(10, 10.0)]).is_err());
        // v = V: Binomial(N, 1) is a point mass at N.
        let edge = thermodynamic_limit_sweep(1.0, 10.0, &[(10, 10.0)]).unwrap();
        let p10 = crate::dist::poisson_pmf(10, &PoissonParams::new(10.0).unwrap());
        assert!((edge[0].tv - (1.0 - p10)).abs() < 1e-12);
    }

    #[test]
    fn binomial_vs_poisson_ten() {
        let b = binomial_pmf_table(&BinomialParams::new(1000, 0.01).unwrap()).unwrap();
        let p = poisson_pmf_table(&PoissonParams::new(10.0).unwrap(), 1e-15).unwrap();
        assert!(tv_distance(&b, &p) < 0.005);
    }
}
