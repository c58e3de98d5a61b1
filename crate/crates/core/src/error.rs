use thiserror::Error;

/// Errors produced by the model layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric argument fell outside its allowed domain.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The trigger never fires, so no conditional signal state exists.
    /// Callers that compute a gain treat this as zero gain.
    #[error("degenerate source: trigger probability is zero")]
    DegenerateSource,

    /// The single-photon fraction is undefined because no detections occur.
    #[error("undefined fraction: detection probability is zero")]
    UndefinedFraction,

    /// A search bracket does not straddle the requested threshold.
    #[error("bracket [{lo}, {hi}] does not straddle the threshold")]
    Bracket { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || value.is_nan() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a probability in [0, 1]",
        });
    }
    Ok(())
}
