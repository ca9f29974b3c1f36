//! A laboratory for the homogeneous Poisson process.
//!
//! The crate derives the Poisson counting law the direct way: from the
//! volume `t^x / x!` of the ordered region `0 < t_1 < ... < t_x <= t`,
//! rather than as a limit of binomials. Every piece of that argument is
//! available as code and checked against an independent route:
//!
//! * [`dist`]: exact Poisson, binomial and multinomial laws, truncated
//!   tables, total-variation distance and the binomial-to-Poisson sweep.
//! * [`simplex`]: the ordered-region volume in closed form, by iterated
//!   quadrature, and by Monte Carlo.
//! * [`process`]: two independent timeline generators and empirical checks
//!   of rarity, independence, stationarity and conditional uniformity.
//! * [`gas`]: ideal-gas particles in a box, sub-volume counts at fixed
//!   number or fixed density, and the thermodynamic limit.
//! * [`stats`]: chi-square tests, moments and the incomplete gamma function.
//!
//! ```
//! use poisson_lab::dist::{poisson_pmf, PoissonParams};
//! use poisson_lab::simplex::{orthant_volume_exact, OrthantSpec};
//!
//! // P(3; 2) = 2^3 e^{-2} / 3!, and 2^3 / 3! is the ordered-region volume.
//! let mu = PoissonParams::new(2.0)?;
//! let volume = orthant_volume_exact(&OrthantSpec::new(3, 2.0)?);
//! assert!((poisson_pmf(3, &mu) - volume * (-2.0f64).exp()).abs() < 1e-15);
//! # Ok::<(), poisson_lab::Error>(())
//! ```
//!
//! A longer guide lives in the `book/` directory of the repository; its
//! code listings are compiled and run as doc-tests of this crate.

// `!(a < b)` style comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
mod error;
pub mod gas;
pub mod process;
pub mod rng;
pub mod simplex;
pub mod special;
pub mod stats;

#[cfg(test)]
pub(crate) mod oracle;

pub use error::{Error, Result};

// `cargo test --doc` runs every listing in the guide.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/counting-law.md")]
    pub mod counting_law {}
    #[doc = include_str!("../../../book/src/ordered-region.md")]
    pub mod ordered_region {}
    #[doc = include_str!("../../../book/src/timeline.md")]
    pub mod timeline {}
    #[doc = include_str!("../../../book/src/conditional-laws.md")]
    pub mod conditional_laws {}
    #[doc = include_str!("../../../book/src/ideal-gas.md")]
    pub mod ideal_gas {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
