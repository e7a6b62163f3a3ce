//! Chi-square goodness of fit.

use crate::error::{Error, Result};

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;

/// Regularized upper incomplete gamma `Q(a, x) = Γ(a, x) / Γ(a)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    let log_prefix = a * libm::log(x) - x - libm::lgamma(a);
    if x < a + 1.0 {
        // series for P(a, x)
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        1.0 - sum * libm::exp(log_prefix)
    } else {
        // modified Lentz continued fraction for Q(a, x)
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        libm::exp(log_prefix) * h
    }
}

/// Survival function of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    gamma_q(dof as f64 / 2.0, statistic.max(0.0) / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of observed counts against category probabilities.
///
/// With a single category the law is degenerate; the statistic is 0 and p = 1.
pub fn chi_square_test(counts: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if counts.len() != probs.len() || counts.is_empty() {
        return Err(Error::invalid("counts and probabilities must be non-empty and equal length"));
    }
    if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) || libm::fabs(probs.iter().sum::<f64>() - 1.0) > 1e-9 {
        return Err(Error::invalid("probabilities must lie in [0, 1] and sum to 1"));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::invalid("no observations"));
    }
    let total = total as f64;
    let mut statistic = 0.0;
    for (&c, &p) in counts.iter().zip(probs) {
        let expected = p * total;
        if expected <= 0.0 {
            if c > 0 {
                return Err(Error::invalid("observation in a zero-probability category"));
            }
            continue;
        }
        let diff = c as f64 - expected;
        statistic += diff * diff / expected;
    }
    let dof = probs.iter().filter(|&&p| p > 0.0).count().saturating_sub(1);
    let p_value = if dof == 0 { 1.0 } else { chi_square_sf(statistic, dof) };
    Ok(ChiSquare { statistic, dof, p_value })
}
