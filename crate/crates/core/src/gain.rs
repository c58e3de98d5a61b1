//! The secure-gain formula: expected perfectly secret bits per pump pulse
//! after error correction and privacy amplification, as a function of the
//! observed error rate, trigger probability, multi-photon probability, and
//! detection probability.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_probability, Error, Result};
use crate::photon_stats::binary_entropy;

/// Error-correction inefficiency prefactor on the binary-entropy cost.
pub const ERROR_CORRECTION_FACTOR: f64 = 1.35;

/// The four probabilities the gain depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainInputs {
    /// Observed error rate among detections.
    pub eps: f64,
    /// Trigger probability per pump pulse.
    pub p_s: f64,
    /// Multi-photon probability of a launched pulse, conditional on trigger.
    pub s_m: f64,
    /// Detection probability per triggered pulse.
    pub p_exp: f64,
}

impl GainInputs {
    pub fn new(eps: f64, p_s: f64, s_m: f64, p_exp: f64) -> Result<Self> {
        check_probability("eps", eps)?;
        check_probability("p_s", p_s)?;
        check_probability("s_m", s_m)?;
        check_probability("p_exp", p_exp)?;
        Ok(Self { eps, p_s, s_m, p_exp })
    }
}

/// Which argument the privacy-amplification logarithm receives.
///
/// `AsPrinted` uses `t = eps * R1`, reproducing the published equation
/// literally. `SinglePhotonFraction` uses `t = eps / R1`, the error rate
/// referred to the single-photon detections; it is the default because the
/// printed form loses its error sensitivity as `R1` shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormulaVariant {
    AsPrinted,
    #[default]
    SinglePhotonFraction,
}

impl FormulaVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaVariant::AsPrinted => "as-printed",
            FormulaVariant::SinglePhotonFraction => "single-photon-fraction",
        }
    }
}

impl fmt::Display for FormulaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormulaVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "as-printed" => Ok(FormulaVariant::AsPrinted),
            "single-photon-fraction" => Ok(FormulaVariant::SinglePhotonFraction),
            other => Err(format!(
                "unknown formula variant `{other}` (expected `as-printed` or `single-photon-fraction`)"
            )),
        }
    }
}

/// Fraction of detections that cannot be blamed on multi-photon pulses:
/// `(p_exp - s_m) / p_exp`, clamped below at zero.
pub fn r1(p_exp: f64, s_m: f64) -> Result<f64> {
    check_probability("p_exp", p_exp)?;
    check_probability("s_m", s_m)?;
    if p_exp == 0.0 {
        return Err(Error::UndefinedFraction);
    }
    Ok(((p_exp - s_m) / p_exp).max(0.0))
}

/// Secure bits per pump pulse.
///
/// `G = 1/2 p_s p_exp { -R1 log2[1/2 + 2t - 2t^2] - 1.35 H(eps) }` with
/// `t` per [`FormulaVariant`], clamped below at zero. Zero when `R1 = 0`
/// or `p_exp = 0`; under `SinglePhotonFraction` the privacy term is zero
/// once `t >= 1/2` (the single-photon detections are fully compromised).
pub fn secure_gain(inputs: &GainInputs, variant: FormulaVariant) -> f64 {
    if inputs.p_exp == 0.0 {
        return 0.0;
    }
    let r1 = (inputs.p_exp - inputs.s_m).max(0.0) / inputs.p_exp;
    if r1 == 0.0 {
        return 0.0;
    }
    let privacy = match variant {
        FormulaVariant::AsPrinted => privacy_term(r1, inputs.eps * r1),
        FormulaVariant::SinglePhotonFraction => {
            let t = inputs.eps / r1;
            if t >= 0.5 {
                0.0
            } else {
                privacy_term(r1, t)
            }
        }
    };
    let correction = ERROR_CORRECTION_FACTOR * binary_entropy(inputs.eps).expect("eps validated");
    // Grouped so the gain is exactly linear in p_s.
    let per_trigger = 0.5 * inputs.p_exp * (privacy - correction);
    (inputs.p_s * per_trigger).max(0.0)
}

fn privacy_term(r1: f64, t: f64) -> f64 {
    let arg = 0.5 + 2.0 * t - 2.0 * t * t;
    if arg <= 0.0 {
        // Fully compromised: no privacy amplification survives.
        return 0.0;
    }
    -r1 * arg.log2()
}
