//! Discrete photon-number distributions and the two transformations every
//! source model needs: Poisson generation and binomial thinning by a
//! per-photon survival probability.
//!
//! All distributions are truncated probability vectors over photon counts
//! `0..=n_max`. Truncation folds the residual tail into the last entry so
//! every vector sums to one.

use crate::error::{check_probability, Error, Result};

/// Tail mass below which the Poisson series is truncated.
const TAIL_EPS: f64 = 1e-12;
/// Truncation bound clamp.
const N_MAX_MIN: usize = 16;
const N_MAX_MAX: usize = 64;
/// Tolerance on the pre-normalization sum of a probability vector.
const NORM_TOL: f64 = 1e-9;

/// Truncated probability vector over photon counts `0..=n_max`.
///
/// Invariants (checked on construction): every entry lies in [0, 1] and the
/// entries sum to one within [`NORM_TOL`] before an exact renormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
}

impl PhotonNumberDistribution {
    /// Builds a distribution from raw weights, validating and renormalizing.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter {
                name: "probs",
                value: 0.0,
                reason: "distribution must have at least one entry",
            });
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !(0.0..=1.0 + NORM_TOL).contains(&p) || p.is_nan() {
                return Err(Error::InvalidParameter {
                    name: "probs",
                    value: p,
                    reason: "entries must lie in [0, 1]",
                });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter {
                name: "probs",
                value: sum,
                reason: "entries must sum to 1 within 1e-9",
            });
        }
        let probs = probs.into_iter().map(|p| p / sum).collect();
        Ok(Self { probs })
    }

    /// Point mass at photon number `n`.
    pub fn delta(n: usize) -> Self {
        let len = (n + 1).max(N_MAX_MIN + 1);
        let mut probs = vec![0.0; len];
        probs[n] = 1.0;
        Self { probs }
    }

    /// Probability of exactly `n` photons (zero beyond the truncation bound).
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// Truncation bound: the largest representable photon number.
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Expected value of `1 - (1 - eta)^n`: the chance at least one photon
    /// survives independent thinning with survival probability `eta`.
    pub fn detection_prob(&self, eta: f64) -> f64 {
        let miss = 1.0 - eta;
        let mut acc = 0.0;
        let mut miss_n = 1.0; // miss^0
        for &p in &self.probs {
            acc += p * (1.0 - miss_n);
            miss_n *= miss;
        }
        acc.clamp(0.0, 1.0)
    }
}

/// Poisson distribution with mean `mu`, truncated at the smallest `n` whose
/// upper tail is below `1e-12` (clamped to `[16, 64]`). The residual tail is
/// folded into the last entry.
pub fn poisson_pmf(mu: f64) -> Result<PhotonNumberDistribution> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            reason: "mean photon number must be finite and non-negative",
        });
    }
    let mut term = (-mu).exp();
    let mut cum = term;
    let mut probs = vec![term];
    let mut n_max = N_MAX_MAX;
    for n in 1..=N_MAX_MAX {
        if 1.0 - cum < TAIL_EPS && n > N_MAX_MIN {
            n_max = n - 1;
            break;
        }
        term *= mu / n as f64;
        cum += term;
        probs.push(term);
        n_max = n;
    }
    probs.truncate(n_max + 1);
    let sum: f64 = probs.iter().sum();
    let last = probs.len() - 1;
    probs[last] += (1.0 - sum).max(0.0);
    PhotonNumberDistribution::from_probs(probs)
}

/// Binomial pmf over `0..=n` with success probability `p`, computed with the
/// stable recurrence (mirrored for `p > 1/2` so the seed term never
/// underflows for `n <= 64`).
pub(crate) fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p > 0.5 {
        let mut v = binomial_pmf(n, 1.0 - p);
        v.reverse();
        return v;
    }
    let mut out = vec![0.0; n + 1];
    if p <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    let q = 1.0 - p;
    let ratio = p / q;
    let mut term = q.powi(n as i32);
    out[0] = term;
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        term *= ratio * (n - k + 1) as f64 / k as f64;
        *slot = term;
    }
    out
}

/// Thins a distribution by per-photon survival probability `eta`:
/// `result[k] = sum_n dist[n] C(n,k) eta^k (1-eta)^(n-k)`.
pub fn binomial_thin(
    dist: &PhotonNumberDistribution,
    eta: f64,
) -> Result<PhotonNumberDistribution> {
    check_probability("eta", eta)?;
    let n_max = dist.n_max();
    let mut out = vec![0.0; n_max + 1];
    for n in 0..=n_max {
        let p_n = dist.prob(n);
        if p_n == 0.0 {
            continue;
        }
        for (k, b) in binomial_pmf(n, eta).into_iter().enumerate() {
            out[k] += p_n * b;
        }
    }
    PhotonNumberDistribution::from_probs(out)
}

/// Probability that a pulse carries more than one photon: `1 - p0 - p1`.
pub fn multi_photon_prob(dist: &PhotonNumberDistribution) -> f64 {
    (1.0 - dist.prob(0) - dist.prob(1)).clamp(0.0, 1.0)
}

/// Binary entropy in bits, with the continuous extension `H(0) = H(1) = 0`.
pub fn binary_entropy(eps: f64) -> Result<f64> {
    check_probability("eps", eps)?;
    if eps == 0.0 || eps == 1.0 {
        return Ok(0.0);
    }
    Ok(-(eps * eps.log2() + (1.0 - eps) * (1.0 - eps).log2()))
}
