//! Volume of the ordered region `0 < t_1 < ... < t_x <= t`.
//!
//! Three independent routes to the same number:
//!
//! * closed form `t^x / x!`, evaluated in log space;
//! * the cumulative recursion `V_{k+1}(u) = ∫_0^u V_k(s) ds` from
//!   `V_1(u) = u`, integrated numerically on a uniform grid;
//! * Monte Carlo: the fraction of uniform tuples in the cube `(0, t]^x`
//!   that come out strictly ascending, times the cube volume `t^x`.
//!
//! The reciprocal of the volume is the conditional density of `x` ordered
//! event times given `x` events on `(0, t]`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::replica_rng;
use crate::special::ln_factorial;

const MAX_DIMENSION: u64 = 1_000_000;
const MAX_EXTENT: f64 = 1e6;
const MC_CHUNK: u64 = 1 << 16;

/// Dimension `x` and extent `t` of the ordered region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthantSpec {
    dimension: u64,
    extent: f64,
}

impl OrthantSpec {
    pub fn new(dimension: u64, extent: f64) -> Result<Self> {
        if !(1..=MAX_DIMENSION).contains(&dimension) {
            return Err(invalid(
                "dimension",
                format!("must lie in 1..={MAX_DIMENSION}, got {dimension}"),
            ));
        }
        if !(extent > 0.0 && extent <= MAX_EXTENT) {
            return Err(invalid(
                "extent",
                format!("must lie in (0, {MAX_EXTENT}], got {extent}"),
            ));
        }
        Ok(Self { dimension, extent })
    }

    pub fn dimension(&self) -> u64 {
        self.dimension
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }
}

/// A Monte Carlo volume estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub hits: u64,
}

/// `ln(t^x / x!)`.
pub fn ln_orthant_volume(spec: &OrthantSpec) -> f64 {
    spec.dimension as f64 * spec.extent.ln() - ln_factorial(spec.dimension)
}

/// `t^x / x!`.
pub fn orthant_volume_exact(spec: &OrthantSpec) -> f64 {
    ln_orthant_volume(spec).exp()
}

/// Volume `t^x` of the enclosing cube.
pub fn rectangle_volume(spec: &OrthantSpec) -> f64 {
    (spec.dimension as f64 * spec.extent.ln()).exp()
}

/// Iterated cumulative trapezoid integration of `V_1(u) = u` over a
/// uniform grid of `quad_steps` intervals on `[0, t]`.
pub fn orthant_volume_recursive(spec: &OrthantSpec, quad_steps: usize) -> Result<f64> {
    Ok(*orthant_volume_recursive_table(spec, quad_steps)?
        .last()
        .expect("dimension >= 1"))
}

/// Recursive volumes `V_1(t), ..., V_x(t)` from a single pass.
pub fn orthant_volume_recursive_table(spec: &OrthantSpec, quad_steps: usize) -> Result<Vec<f64>> {
    if quad_steps < 10 {
        return Err(invalid(
            "quad_steps",
            format!("must be >= 10, got {quad_steps}"),
        ));
    }
    let t = spec.extent;
    let h = t / quad_steps as f64;
    let mut values: Vec<f64> = (0..=quad_steps)
        .map(|i| (i as f64 / quad_steps as f64) * t)
        .collect();
    let mut next = vec![0.0; values.len()];
    let mut out = Vec::with_capacity(spec.dimension as usize);
    out.push(values[quad_steps]);
    for _ in 1..spec.dimension {
        next[0] = 0.0;
        for i in 1..values.len() {
            next[i] = next[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
        }
        std::mem::swap(&mut values, &mut next);
        out.push(values[quad_steps]);
    }
    Ok(out)
}

fn count_ascending(rng: &mut impl Rng, dimension: u64, extent: f64, samples: u64) -> u64 {
    let mut hits = 0;
    'sample: for _ in 0..samples {
        // (0, t]: 1 - U maps [0, 1) onto (0, 1].
        let mut prev = extent * (1.0 - rng.random::<f64>());
        for _ in 1..dimension {
            let next = extent * (1.0 - rng.random::<f64>());
            // Ties count as not ascending.
            if next <= prev {
                continue 'sample;
            }
            prev = next;
        }
        hits += 1;
    }
    hits
}

/// Hit-fraction estimate of the ordered-region volume.
///
/// Samples are split into fixed chunks of 2^16, chunk `c` drawing from
/// stream `c` of `seed`, so the estimate does not depend on thread count.
/// A tuple is rejected as soon as it stops ascending.
pub fn orthant_volume_mc(spec: &OrthantSpec, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    if samples < 1000 {
        return Err(invalid(
            "samples",
            format!("must be >= 1000, got {samples}"),
        ));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            count_ascending(&mut replica_rng(seed, c), spec.dimension, spec.extent, n)
        })
        .sum();
    let frac = hits as f64 / samples as f64;
    let cube = rectangle_volume(spec);
    Ok(VolumeEstimate {
        value: cube * frac,
        std_error: cube * (frac * (1.0 - frac) / samples as f64).sqrt(),
        samples,
        hits,
    })
}

/// `ln(x! / t^x)`.
pub fn ln_conditional_event_density(x: u64, t: f64) -> Result<f64> {
    if x == 0 {
        return Err(invalid("x", "density of zero event times is undefined"));
    }
    Ok(-ln_orthant_volume(&OrthantSpec::new(x, t)?))
}

/// Joint density `x! / t^x` of the ordered event times given `x` events
/// on `(0, t]`; uniform over the ordered region.
pub fn conditional_event_density(x: u64, t: f64) -> Result<f64> {
    ln_conditional_event_density(x, t).map(f64::exp)
}
