//! Secure-key-rate models for BB84 quantum key distribution with three
//! source designs: weak coherent pulses, a correlated photon source with a
//! click/no-click trigger, and a correlated photon source gated by a
//! photon-number-resolving detector.
//!
//! The crate is organized as a pipeline. [`photon_stats`] supplies truncated
//! photon-number distributions; [`sources`] turns pump power and trigger
//! detector figures into the `(p_s, s_m, signal distribution)` triple;
//! [`link`] propagates the signal through a fiber or free-space channel into
//! Bob's receiver, yielding detection and error probabilities; [`gain`]
//! folds everything into secure bits per pump pulse; [`optimize`] maximizes
//! that gain over pump power and sweeps it over distance; [`montecarlo`] is
//! an independent pulse-level simulator used to validate the analytic path.

pub mod error;
pub mod gain;
pub mod link;
pub mod montecarlo;
pub mod optimize;
pub mod photon_stats;
pub mod sources;

pub use error::{Error, Result};
pub use gain::{r1, secure_gain, FormulaVariant, GainInputs};
pub use link::{link_outcome, transmittance, ChannelModel, LinkOutcome, ReceiverParams};
pub use montecarlo::{simulate, z_score, TrialTally};
pub use optimize::{
    evaluate, find_cutoff, gain_at, optimize_mu, sweep_distance, MuOptimum, PointEval, Scenario,
    SourceKind, SweepPoint, GAIN_FLOOR,
};
pub use photon_stats::{
    binary_entropy, binomial_thin, multi_photon_prob, poisson_pmf, PhotonNumberDistribution,
};
pub use sources::{
    characterize_cps, characterize_cps_pnr, characterize_wcp, pnr_report_distribution,
    SourceCharacterization, TriggerDetectorParams,
};
