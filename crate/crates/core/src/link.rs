//! Channel transmittance versus distance for the three deployment scenarios,
//! and Bob's receiver model turning a source characterization into detection
//! and error probabilities.

use crate::error::{check_probability, Error, Result};
use crate::sources::SourceCharacterization;

/// Channel attenuation law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// Optical fiber with exponential loss in dB per km.
    Fiber { alpha_db_per_km: f64 },
    /// Horizontal free-space path: inverse-square beam diffraction anchored
    /// at a reference distance.
    FreeSpaceGround { ref_coupling: f64, ref_distance_km: f64 },
    /// Ground-to-satellite path: same inverse-square law, kept as its own
    /// variant because its calibration inputs are distinct.
    Satellite { ref_coupling: f64, ref_distance_km: f64 },
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Fiber { alpha_db_per_km } => {
                if !alpha_db_per_km.is_finite() || alpha_db_per_km < 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "channel.alpha_db_per_km",
                        value: alpha_db_per_km,
                        reason: "attenuation must be finite and non-negative",
                    });
                }
            }
            ChannelModel::FreeSpaceGround { ref_coupling, ref_distance_km }
            | ChannelModel::Satellite { ref_coupling, ref_distance_km } => {
                if !(ref_coupling > 0.0 && ref_coupling <= 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "channel.ref_coupling",
                        value: ref_coupling,
                        reason: "reference coupling must lie in (0, 1]",
                    });
                }
                if !ref_distance_km.is_finite() || ref_distance_km <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "channel.ref_distance_km",
                        value: ref_distance_km,
                        reason: "reference distance must be positive",
                    });
                }
            }
        }
        Ok(())
    }
}

/// Bob's detection unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverParams {
    /// Detector quantum efficiency.
    pub efficiency: f64,
    /// Background-plus-dark count probability per gated pulse.
    pub dark_prob_per_pulse: f64,
    /// Intrinsic misalignment error probability on true signal detections.
    pub baseline_error: f64,
}

impl ReceiverParams {
    pub fn new(efficiency: f64, dark_prob_per_pulse: f64, baseline_error: f64) -> Result<Self> {
        let params = Self { efficiency, dark_prob_per_pulse, baseline_error };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("receiver.efficiency", self.efficiency)?;
        check_probability("receiver.dark_per_pulse", self.dark_prob_per_pulse)?;
        check_probability("receiver.baseline_error", self.baseline_error)?;
        Ok(())
    }
}

/// Detection and error probabilities at Bob's end, per triggered pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkOutcome {
    /// Detection probability, including background and dark counts.
    pub p_exp: f64,
    /// Observed error rate conditional on detection.
    pub eps: f64,
    /// Signal-only detection probability (diagnostic).
    pub p_signal: f64,
}

/// End-to-end channel survival probability at distance `d` km.
///
/// Fiber attenuates exponentially; free-space coupling follows the
/// inverse-square diffraction law anchored at the reference distance and is
/// capped at one inside it.
pub fn transmittance(chan: &ChannelModel, d: f64) -> Result<f64> {
    chan.validate()?;
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d,
            reason: "distance must be positive",
        });
    }
    Ok(match *chan {
        ChannelModel::Fiber { alpha_db_per_km } => 10f64.powf(-alpha_db_per_km * d / 10.0),
        ChannelModel::FreeSpaceGround { ref_coupling, ref_distance_km }
        | ChannelModel::Satellite { ref_coupling, ref_distance_km } => {
            let ratio = ref_distance_km / d;
            (ref_coupling * ratio * ratio).min(1.0)
        }
    })
}

/// Propagates a triggered signal pulse through the channel and Bob's
/// receiver.
///
/// Signal detections err with the baseline misalignment probability;
/// background and dark detections are random, so they err with probability
/// one half. Double-fire coincidences are folded into the dark term.
pub fn link_outcome(
    src: &SourceCharacterization,
    chan: &ChannelModel,
    d: f64,
    rx: &ReceiverParams,
) -> Result<LinkOutcome> {
    rx.validate()?;
    let eta_tot = transmittance(chan, d)? * rx.efficiency;
    let p_signal = src.signal_dist.detection_prob(eta_tot);
    let p_exp = if rx.dark_prob_per_pulse == 0.0 {
        p_signal
    } else {
        1.0 - (1.0 - p_signal) * (1.0 - rx.dark_prob_per_pulse)
    };
    let eps = if p_exp == 0.0 {
        0.0
    } else {
        (rx.baseline_error * p_signal + 0.5 * (p_exp - p_signal)) / p_exp
    };
    Ok(LinkOutcome { p_exp, eps, p_signal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon_stats::PhotonNumberDistribution;
    use crate::sources::{characterize_cps_pnr, characterize_wcp, TriggerDetectorParams};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn delta_source(n: usize) -> SourceCharacterization {
        let signal_dist = PhotonNumberDistribution::delta(n);
        let s_m = crate::photon_stats::multi_photon_prob(&signal_dist);
        SourceCharacterization { p_s: 1.0, s_m, signal_dist }
    }

    #[test]
    fn fiber_transmittance_frozen_value() {
        let chan = ChannelModel::Fiber { alpha_db_per_km: 0.38 };
        assert_close(
            transmittance(&chan, 50.0).unwrap(),
            0.012_589_254_117_941_675,
            1e-15,
        );
    }

    #[test]
    fn free_space_inverse_square() {
        let chan = ChannelModel::FreeSpaceGround { ref_coupling: 0.4, ref_distance_km: 1.0 };
        assert_close(transmittance(&chan, 1.0).unwrap(), 0.4, 1e-15);
        assert_close(transmittance(&chan, 2.0).unwrap(), 0.1, 1e-15);
        // Capped at one inside the reference distance.
        assert_eq!(transmittance(&chan, 0.1).unwrap(), 1.0);
    }

    #[test]
    fn distance_must_be_positive() {
        let chan = ChannelModel::Fiber { alpha_db_per_km: 0.38 };
        assert!(transmittance(&chan, 0.0).is_err());
        assert!(transmittance(&chan, -5.0).is_err());
        assert!(transmittance(&chan, f64::NAN).is_err());
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelModel::Fiber { alpha_db_per_km: -1.0 }.validate().is_err());
        assert!(ChannelModel::FreeSpaceGround { ref_coupling: 0.0, ref_distance_km: 1.0 }
            .validate()
            .is_err());
        assert!(ChannelModel::Satellite { ref_coupling: 0.5, ref_distance_km: 0.0 }
            .validate()
            .is_err());
    }

    #[test]
    fn noiseless_link_has_no_errors() {
        let src = characterize_wcp(0.2).unwrap();
        let chan = ChannelModel::Fiber { alpha_db_per_km: 0.38 };
        let rx = ReceiverParams::new(0.11, 0.0, 0.0).unwrap();
        let out = link_outcome(&src, &chan, 10.0, &rx).unwrap();
        assert_eq!(out.eps, 0.0);
        assert_eq!(out.p_exp, out.p_signal);
    }

    #[test]
    fn background_only_detections_are_random() {
        let src = delta_source(0);
        let chan = ChannelModel::Fiber { alpha_db_per_km: 0.38 };
        let rx = ReceiverParams::new(0.11, 1e-4, 0.01).unwrap();
        let out = link_outcome(&src, &chan, 10.0, &rx).unwrap();
        assert_close(out.p_exp, 1e-4, 1e-15);
        assert_close(out.eps, 0.5, 1e-12);
        assert_eq!(out.p_signal, 0.0);
    }

    #[test]
    fn identity_link_reproduces_source_statistics() {
        let trig = TriggerDetectorParams::new(0.7, 1e-5, 0.0063).unwrap();
        let src = characterize_cps_pnr(0.3, &trig).unwrap();
        let chan = ChannelModel::FreeSpaceGround { ref_coupling: 1.0, ref_distance_km: 1.0 };
        let rx = ReceiverParams::new(1.0, 0.0, 0.0).unwrap();
        let out = link_outcome(&src, &chan, 1.0, &rx).unwrap();
        assert_close(out.p_exp, 1.0 - src.signal_dist.prob(0), 1e-12);
    }

    #[test]
    fn zero_detection_probability_zeroes_eps() {
        let src = delta_source(0);
        let chan = ChannelModel::Fiber { alpha_db_per_km: 0.38 };
        let rx = ReceiverParams::new(0.11, 0.0, 0.01).unwrap();
        let out = link_outcome(&src, &chan, 10.0, &rx).unwrap();
        assert_eq!(out.p_exp, 0.0);
        assert_eq!(out.eps, 0.0);
    }

    #[test]
    fn monotone_in_distance_for_all_channels() {
        let src = characterize_wcp(0.1).unwrap();
        let rx = ReceiverParams::new(0.11, 1e-5, 0.01).unwrap();
        let channels = [
            ChannelModel::Fiber { alpha_db_per_km: 0.38 },
            ChannelModel::FreeSpaceGround { ref_coupling: 0.25, ref_distance_km: 1.0 },
            ChannelModel::Satellite { ref_coupling: 4e-3, ref_distance_km: 300.0 },
        ];
        for chan in channels {
            let mut prev_p = f64::INFINITY;
            let mut prev_eps = -1.0;
            for i in 1..=30 {
                let d = i as f64 * 3.0;
                let out = link_outcome(&src, &chan, d, &rx).unwrap();
                assert!(out.p_exp <= prev_p + 1e-15, "p_exp rose at d = {d}");
                assert!(out.eps >= prev_eps - 1e-15, "eps fell at d = {d}");
                assert!(out.p_signal <= out.p_exp && out.p_exp <= 1.0);
                prev_p = out.p_exp;
                prev_eps = out.eps;
            }
        }
    }

    #[test]
    fn eps_bounded_by_baseline_and_half() {
        let rx_grid = [(0.11, 1e-5, 0.0), (0.5, 1e-3, 0.03), (1.0, 0.1, 0.4)];
        let src = characterize_wcp(0.3).unwrap();
        let chan = ChannelModel::Fiber { alpha_db_per_km: 0.38 };
        for (eff, dark, base) in rx_grid {
            let rx = ReceiverParams::new(eff, dark, base).unwrap();
            for i in 1..=20 {
                let d = i as f64 * 5.0;
                let out = link_outcome(&src, &chan, d, &rx).unwrap();
                if out.p_exp > 0.0 {
                    assert!(out.eps >= base.min(0.5) - 1e-12);
                    assert!(out.eps <= 0.5 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn receiver_validation() {
        assert!(ReceiverParams::new(1.5, 0.0, 0.0).is_err());
        assert!(ReceiverParams::new(0.5, -0.1, 0.0).is_err());
        assert!(ReceiverParams::new(0.5, 0.0, f64::NAN).is_err());
    }
}
