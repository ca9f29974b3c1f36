//! Exact rational-arithmetic reference values for tests.
//!
//! Shares no code with the log-space evaluators it checks: every value
//! here is a ratio of big integers, rounded to `f64` only at the end.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn pow(base: &BigRational, exp: u64) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// `e^{-mu}` by its Taylor series, truncated once the remainder is far
/// below `f64` resolution.
pub fn exp_neg(mu: &BigRational) -> BigRational {
    let mu_f = to_f64(mu);
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    let mut k = 0u64;
    loop {
        sum += &term;
        k += 1;
        term = -term * mu / BigRational::from_integer(BigInt::from(k));
        // Alternating tail is bounded by the first omitted term.
        if k as f64 > 2.0 * mu_f + 10.0 && to_f64(&term.abs()) < 1e-60 {
            break;
        }
    }
    sum
}

pub fn poisson_pmf(x: u64, mu: &BigRational) -> BigRational {
    pow(mu, x) / BigRational::from_integer(factorial(x)) * exp_neg(mu)
}

pub fn binomial_coefficient(n: u64, k: u64) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

pub fn binomial_pmf(x: u64, n: u64, p: &BigRational) -> BigRational {
    let q = BigRational::one() - p;
    BigRational::from_integer(binomial_coefficient(n, x)) * pow(p, x) * pow(&q, n - x)
}

pub fn multinomial_pmf(counts: &[u64], probs: &[BigRational]) -> BigRational {
    let n: u64 = counts.iter().sum();
    let mut coeff = BigRational::from_integer(factorial(n));
    for (&x, p) in counts.iter().zip(probs) {
        coeff = coeff / BigRational::from_integer(factorial(x)) * pow(p, x);
    }
    coeff
}

/// `TV(Binomial(n, mu / n), Poisson(mu))` for rational `mu = num / den`,
/// summed term by term over `0..=n` plus the Poisson mass above `n`.
pub fn tv_binomial_poisson(n: u64, num: i64, den: i64) -> f64 {
    let mu = ratio(num, den);
    let p = &mu / BigRational::from_integer(BigInt::from(n));
    let q = BigRational::one() - &p;
    let e = exp_neg(&mu);
    let mut poisson_term = e.clone();
    let mut binomial_term = pow(&q, n);
    let mut poisson_below = BigRational::zero();
    let mut l1 = 0.0f64;
    for x in 0..=n {
        if x > 0 {
            let k = BigRational::from_integer(BigInt::from(x));
            poisson_term = poisson_term * &mu / &k;
            let remaining = BigRational::from_integer(BigInt::from(n - x + 1));
            binomial_term = binomial_term * remaining * &p / (k * &q);
        }
        poisson_below += &poisson_term;
        l1 += to_f64(&(&binomial_term - &poisson_term).abs());
    }
    let poisson_above = BigRational::one() - poisson_below;
    0.5 * (l1 + to_f64(&poisson_above))
}
