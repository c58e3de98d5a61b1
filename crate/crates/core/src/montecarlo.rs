//! Stochastic end-to-end pulse simulator used to falsify the analytic
//! pipeline: every pump pulse is drawn individually through pair creation,
//! trigger detection, channel loss, background, and error assignment, and
//! the empirical rates are compared against the closed-form models.
//!
//! Each pulse owns a counter-derived random stream, so tallies are bitwise
//! reproducible for a fixed seed regardless of how pulses are partitioned
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::link::transmittance;
use crate::optimize::{Scenario, SourceKind};

/// Pulses per work unit handed to the thread pool.
const BLOCK_SIZE: u64 = 1 << 16;

/// Event counts from a simulation run, with nested denominators:
/// multi-photon and detection counts are conditional on the trigger, error
/// counts conditional on detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialTally {
    pub n_pulses: u64,
    pub n_triggered: u64,
    pub n_multi_given_trigger: u64,
    pub n_detected_given_trigger: u64,
    pub n_errors_given_detected: u64,
}

impl TrialTally {
    pub fn merge(&mut self, other: &TrialTally) {
        self.n_pulses += other.n_pulses;
        self.n_triggered += other.n_triggered;
        self.n_multi_given_trigger += other.n_multi_given_trigger;
        self.n_detected_given_trigger += other.n_detected_given_trigger;
        self.n_errors_given_detected += other.n_errors_given_detected;
    }

    pub fn p_s(&self) -> f64 {
        rate(self.n_triggered, self.n_pulses)
    }

    pub fn s_m(&self) -> f64 {
        rate(self.n_multi_given_trigger, self.n_triggered)
    }

    pub fn p_exp(&self) -> f64 {
        rate(self.n_detected_given_trigger, self.n_triggered)
    }

    pub fn eps(&self) -> f64 {
        rate(self.n_errors_given_detected, self.n_detected_given_trigger)
    }

    pub fn se_p_s(&self) -> f64 {
        std_err(self.p_s(), self.n_pulses)
    }

    pub fn se_s_m(&self) -> f64 {
        std_err(self.s_m(), self.n_triggered)
    }

    pub fn se_p_exp(&self) -> f64 {
        std_err(self.p_exp(), self.n_triggered)
    }

    pub fn se_eps(&self) -> f64 {
        std_err(self.eps(), self.n_detected_given_trigger)
    }
}

fn rate(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn std_err(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

/// z-score of an empirical rate against its analytic target, using the
/// analytic rate for the binomial standard error so rare events with zero
/// observed counts still score finitely.
pub fn z_score(empirical: f64, analytic: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let se = (analytic * (1.0 - analytic) / n as f64).sqrt();
    if se == 0.0 {
        if empirical == analytic {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (empirical - analytic) / se
    }
}

/// Simulates `n_pulses` pump pulses of the scenario at distance `d` and pump
/// parameter `mu`. Deterministic for a fixed seed.
pub fn simulate(scn: &Scenario, d: f64, mu: f64, n_pulses: u64, seed: u64) -> Result<TrialTally> {
    scn.validate()?;
    if n_pulses == 0 {
        return Err(Error::InvalidParameter {
            name: "n_pulses",
            value: 0.0,
            reason: "pulse count must be at least 1",
        });
    }
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            reason: "mean photon number must be finite and non-negative",
        });
    }
    let eta_tot = transmittance(&scn.channel, d)? * scn.receiver.efficiency;

    let n_blocks = n_pulses.div_ceil(BLOCK_SIZE);
    let tally = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let start = block * BLOCK_SIZE;
            let end = (start + BLOCK_SIZE).min(n_pulses);
            let mut acc = TrialTally::default();
            for pulse in start..end {
                simulate_pulse(scn, mu, eta_tot, pulse_rng(seed, pulse), &mut acc);
            }
            acc
        })
        .reduce(TrialTally::default, |mut a, b| {
            a.merge(&b);
            a
        });
    Ok(tally)
}

/// One stream per pulse index: parallel execution reproduces serial results.
fn pulse_rng(seed: u64, pulse: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ pulse.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn simulate_pulse(scn: &Scenario, mu: f64, eta_tot: f64, mut rng: ChaCha8Rng, acc: &mut TrialTally) {
    acc.n_pulses += 1;
    let n = poisson_draw(&mut rng, mu);

    let triggered = match scn.source_kind {
        SourceKind::Wcp => true,
        SourceKind::Cps => {
            let trig = scn.trigger.as_ref().expect("validated");
            let no_click = (1.0 - trig.efficiency).powi(n as i32)
                * (1.0 - trig.dark_prob_per_gate);
            rng.random::<f64>() >= no_click
        }
        SourceKind::CpsPnr => {
            let trig = scn.trigger.as_ref().expect("validated");
            let mut events = binomial_draw(&mut rng, n, trig.efficiency);
            if rng.random::<f64>() < trig.dark_prob_per_gate {
                events += 1;
            }
            let report = misreport(&mut rng, events, trig.discrimination_error);
            report == 1
        }
    };
    if !triggered {
        return;
    }
    acc.n_triggered += 1;
    if n >= 2 {
        acc.n_multi_given_trigger += 1;
    }

    let survivors = binomial_draw(&mut rng, n, eta_tot);
    let background = rng.random::<f64>() < scn.receiver.dark_prob_per_pulse;
    if survivors == 0 && !background {
        return;
    }
    acc.n_detected_given_trigger += 1;

    // Signal detections err at the baseline rate; background-only
    // detections are random.
    let err_prob = if survivors >= 1 { scn.receiver.baseline_error } else { 0.5 };
    if rng.random::<f64>() < err_prob {
        acc.n_errors_given_detected += 1;
    }
}

/// Adjacent-count misreport of nonzero counts: same kernel as the analytic
/// trigger model. Empty gates report zero.
fn misreport(rng: &mut ChaCha8Rng, count: u64, disc: f64) -> u64 {
    if count == 0 {
        return 0;
    }
    let u = rng.random::<f64>();
    if u >= disc {
        return count;
    }
    if u < disc / 2.0 {
        count + 1
    } else {
        count - 1
    }
}

/// Inversion by sequential search; exact for the small means used here.
fn poisson_draw(rng: &mut ChaCha8Rng, mu: f64) -> u64 {
    if mu == 0.0 {
        return 0;
    }
    let u = rng.random::<f64>();
    let mut term = (-mu).exp();
    let mut cum = term;
    let mut n = 0u64;
    while u >= cum && n < 1024 {
        n += 1;
        term *= mu / n as f64;
        cum += term;
    }
    n
}

fn binomial_draw(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    let mut k = 0;
    for _ in 0..n {
        if rng.random::<f64>() < p {
            k += 1;
        }
    }
    k
}
