//! Characterization of the three source designs: what fraction of pump
//! pulses launch a signal, and what photon-number statistics the launched
//! signal carries.
//!
//! Every characterization reports the triple `(p_s, s_m, signal_dist)` with
//! `s_m` and `signal_dist` conditional on the trigger firing; `p_s` carries
//! the per-pulse trigger rate separately so downstream rate formulas never
//! double count.

use crate::error::{check_probability, Error, Result};
use crate::photon_stats::{
    binomial_pmf, multi_photon_prob, poisson_pmf, PhotonNumberDistribution,
};

/// Alice's trigger detector on the idler beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerDetectorParams {
    /// Probability an idler photon yields a photoelectron.
    pub efficiency: f64,
    /// Probability of a spurious count within one gate.
    pub dark_prob_per_gate: f64,
    /// Probability the reported count differs from the true photoelectron
    /// count. Ignored by the click/no-click trigger.
    pub discrimination_error: f64,
}

impl TriggerDetectorParams {
    pub fn new(efficiency: f64, dark_prob_per_gate: f64, discrimination_error: f64) -> Result<Self> {
        let params = Self {
            efficiency,
            dark_prob_per_gate,
            discrimination_error,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("trigger.efficiency", self.efficiency)?;
        check_probability("trigger.dark_per_gate", self.dark_prob_per_gate)?;
        check_probability("trigger.discrimination_error", self.discrimination_error)?;
        Ok(())
    }
}

/// The triple `(p_s, s_m, signal_dist)` produced by each source model.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceCharacterization {
    /// Trigger probability per pump pulse.
    pub p_s: f64,
    /// Multi-photon probability of the launched pulse, conditional on trigger.
    pub s_m: f64,
    /// Photon-number distribution of the signal beam, conditional on trigger.
    pub signal_dist: PhotonNumberDistribution,
}

impl SourceCharacterization {
    fn from_weights(p_s: f64, weights: Vec<f64>) -> Result<Self> {
        if p_s <= 0.0 {
            return Err(Error::DegenerateSource);
        }
        let signal_dist =
            PhotonNumberDistribution::from_probs(weights.iter().map(|w| w / p_s).collect())?;
        let s_m = multi_photon_prob(&signal_dist);
        Ok(Self { p_s, s_m, signal_dist })
    }
}

/// Weak coherent pulse: untriggered attenuated laser light with Poissonian
/// photon number.
pub fn characterize_wcp(mu: f64) -> Result<SourceCharacterization> {
    let signal_dist = poisson_pmf(mu)?;
    let s_m = multi_photon_prob(&signal_dist);
    Ok(SourceCharacterization { p_s: 1.0, s_m, signal_dist })
}

/// Correlated photon source with a click/no-click trigger on the idler beam.
///
/// Pair number is Poissonian; a click occurs unless every idler photon is
/// missed and no dark count fires. Any click gates the pulse out regardless
/// of photon multiplicity.
pub fn characterize_cps(mu: f64, trig: &TriggerDetectorParams) -> Result<SourceCharacterization> {
    trig.validate()?;
    let pairs = poisson_pmf(mu)?;
    let no_dark = 1.0 - trig.dark_prob_per_gate;
    let miss = 1.0 - trig.efficiency;
    let mut p_s = 0.0;
    let mut miss_n = 1.0; // miss^n
    let weights: Vec<f64> = pairs
        .probs()
        .iter()
        .map(|&p_n| {
            let click = 1.0 - miss_n * no_dark;
            miss_n *= miss;
            let w = p_n * click;
            p_s += w;
            w
        })
        .collect();
    SourceCharacterization::from_weights(p_s, weights)
}

/// Distribution of the count reported by the photon-number-resolving trigger
/// given `n_pairs` idler photons.
///
/// Photoelectrons are a binomial thinning of the arrivals; a dark count adds
/// one with probability `dark_prob_per_gate`; with probability
/// `discrimination_error` the report of a nonzero count moves to an adjacent
/// count (half share up, half share down). An empty gate has no
/// multiplication events to misjudge, so it reports zero: false positives
/// enter only through the dark term. The misreport kernel is the one
/// modeling choice the device data does not pin down, so it is isolated
/// here.
pub fn pnr_report_distribution(
    n_pairs: usize,
    trig: &TriggerDetectorParams,
) -> Result<PhotonNumberDistribution> {
    trig.validate()?;
    let photoelectrons = binomial_pmf(n_pairs, trig.efficiency);

    // Dark count adds one photoelectron-equivalent event.
    let dark = trig.dark_prob_per_gate;
    let mut with_dark = vec![0.0; n_pairs + 2];
    for (m, &p) in photoelectrons.iter().enumerate() {
        with_dark[m] += p * (1.0 - dark);
        with_dark[m + 1] += p * dark;
    }

    // Adjacent-count misreport of nonzero counts.
    let disc = trig.discrimination_error;
    let mut report = vec![0.0; n_pairs + 3];
    for (m, &p) in with_dark.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        if m == 0 {
            report[0] += p;
        } else {
            report[m] += p * (1.0 - disc);
            report[m + 1] += p * (disc / 2.0);
            report[m - 1] += p * (disc / 2.0);
        }
    }
    PhotonNumberDistribution::from_probs(report)
}

/// Correlated photon source gated on the PNR trigger reporting exactly one
/// photon.
pub fn characterize_cps_pnr(
    mu: f64,
    trig: &TriggerDetectorParams,
) -> Result<SourceCharacterization> {
    trig.validate()?;
    let pairs = poisson_pmf(mu)?;
    let mut p_s = 0.0;
    let weights: Vec<f64> = pairs
        .probs()
        .iter()
        .enumerate()
        .map(|(n, &p_n)| {
            let report_one = pnr_report_distribution(n, trig)
                .expect("trigger already validated")
                .prob(1);
            let w = p_n * report_one;
            p_s += w;
            w
        })
        .collect();
    SourceCharacterization::from_weights(p_s, weights)
}
