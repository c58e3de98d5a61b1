//! Pump-power optimization of the secure gain, distance sweeps, and
//! secure-distance cutoffs.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gain::{secure_gain, FormulaVariant, GainInputs};
use crate::link::{link_outcome, ChannelModel, ReceiverParams};
use crate::sources::{
    characterize_cps, characterize_cps_pnr, characterize_wcp, SourceCharacterization,
    TriggerDetectorParams,
};

/// Gains below this are floating-point dust; outputs flag them insecure.
pub const GAIN_FLOOR: f64 = 1e-15;

/// Number of coarse log-spaced pump values scanned before refinement.
const COARSE_GRID: usize = 64;
/// Relative width of the pump bracket at which golden-section refinement stops.
const MU_REL_TOL: f64 = 1e-4;
/// Distance tolerance of the cutoff bisection, in km.
const CUTOFF_TOL_KM: f64 = 0.05;

/// Which source design drives the pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Wcp,
    Cps,
    CpsPnr,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Wcp => "wcp",
            SourceKind::Cps => "cps",
            SourceKind::CpsPnr => "cps_pnr",
        }
    }

    pub fn needs_trigger(self) -> bool {
        !matches!(self, SourceKind::Wcp)
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "wcp" => Ok(SourceKind::Wcp),
            "cps" => Ok(SourceKind::Cps),
            "cps_pnr" => Ok(SourceKind::CpsPnr),
            other => Err(format!(
                "unknown source kind `{other}` (expected `wcp`, `cps`, or `cps_pnr`)"
            )),
        }
    }
}

/// A complete experiment description: source, channel, receiver, and run
/// parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub source_kind: SourceKind,
    /// Alice's idler detector; absent for the untriggered WCP source.
    pub trigger: Option<TriggerDetectorParams>,
    pub channel: ChannelModel,
    pub receiver: ReceiverParams,
    /// Pump pulse rate in Hz.
    pub rep_rate_hz: f64,
    pub variant: FormulaVariant,
    /// Search interval for the pump parameter.
    pub mu_bounds: (f64, f64),
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.receiver.validate()?;
        if let Some(trig) = &self.trigger {
            trig.validate()?;
        }
        if self.source_kind.needs_trigger() && self.trigger.is_none() {
            return Err(Error::InvalidParameter {
                name: "source.trigger",
                value: f64::NAN,
                reason: "detector-triggered sources need trigger parameters",
            });
        }
        if !self.rep_rate_hz.is_finite() || self.rep_rate_hz <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "run.rep_rate_hz",
                value: self.rep_rate_hz,
                reason: "repetition rate must be positive",
            });
        }
        let (lo, hi) = self.mu_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(Error::InvalidParameter {
                name: "run.mu_bounds",
                value: lo,
                reason: "pump bounds must be positive with mu_lo < mu_hi",
            });
        }
        Ok(())
    }

    /// The source triple at pump parameter `mu`.
    pub fn characterize(&self, mu: f64) -> Result<SourceCharacterization> {
        match self.source_kind {
            SourceKind::Wcp => characterize_wcp(mu),
            SourceKind::Cps => {
                characterize_cps(mu, self.trigger.as_ref().ok_or(Error::DegenerateSource)?)
            }
            SourceKind::CpsPnr => {
                characterize_cps_pnr(mu, self.trigger.as_ref().ok_or(Error::DegenerateSource)?)
            }
        }
    }
}

/// All intermediate probabilities plus the gain at one `(d, mu)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEval {
    pub p_s: f64,
    pub s_m: f64,
    pub p_exp: f64,
    pub eps: f64,
    pub gain: f64,
}

/// Per-distance record of the optimized operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub d_km: f64,
    pub mu_opt: f64,
    pub gain: f64,
    pub bits_per_sec: f64,
    pub p_s: f64,
    pub s_m: f64,
    pub p_exp: f64,
    pub eps: f64,
}

impl SweepPoint {
    pub fn secure(&self) -> bool {
        self.gain > GAIN_FLOOR
    }
}

/// Runs the full source -> channel -> gain pipeline at one point.
///
/// A degenerate source (the trigger never fires) evaluates to zero gain with
/// zeroed rates rather than an error, since it is a valid corner of the
/// search domain.
pub fn evaluate(scn: &Scenario, d: f64, mu: f64) -> Result<PointEval> {
    scn.validate()?;
    let src = match scn.characterize(mu) {
        Ok(src) => src,
        Err(Error::DegenerateSource) => {
            return Ok(PointEval { p_s: 0.0, s_m: 0.0, p_exp: 0.0, eps: 0.0, gain: 0.0 })
        }
        Err(e) => return Err(e),
    };
    let out = link_outcome(&src, &scn.channel, d, &scn.receiver)?;
    let inputs = GainInputs::new(out.eps, src.p_s, src.s_m, out.p_exp)?;
    Ok(PointEval {
        p_s: src.p_s,
        s_m: src.s_m,
        p_exp: out.p_exp,
        eps: out.eps,
        gain: secure_gain(&inputs, scn.variant),
    })
}

/// Secure gain at one `(d, mu)` point.
pub fn gain_at(scn: &Scenario, d: f64, mu: f64) -> Result<f64> {
    Ok(evaluate(scn, d, mu)?.gain)
}

/// Result of a pump-power optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuOptimum {
    pub mu_opt: f64,
    pub gain: f64,
}

/// Maximizes the gain over the pump parameter at fixed distance.
///
/// Scans a 64-point log-spaced grid over the pump bounds, then refines
/// around the best grid point with golden-section search to a relative
/// pump tolerance of `1e-4`. The refined value is guarded against the grid
/// optimum, so the result never falls below the coarse scan; when the gain
/// vanishes everywhere the lower bound is returned with zero gain.
pub fn optimize_mu(scn: &Scenario, d: f64) -> Result<MuOptimum> {
    scn.validate()?;
    let (lo, hi) = scn.mu_bounds;
    let log_lo = lo.ln();
    let log_hi = hi.ln();
    let mut best_idx = 0;
    let mut best_gain = f64::NEG_INFINITY;
    let mut grid = Vec::with_capacity(COARSE_GRID);
    for i in 0..COARSE_GRID {
        let frac = i as f64 / (COARSE_GRID - 1) as f64;
        let mu = (log_lo + frac * (log_hi - log_lo)).exp();
        let g = gain_at(scn, d, mu)?;
        if g > best_gain {
            best_gain = g;
            best_idx = i;
        }
        grid.push((mu, g));
    }
    if best_gain <= 0.0 {
        return Ok(MuOptimum { mu_opt: lo, gain: 0.0 });
    }

    let bracket_lo = grid[best_idx.saturating_sub(1)].0;
    let bracket_hi = grid[(best_idx + 1).min(COARSE_GRID - 1)].0;
    let refined = golden_section_max(
        |mu| gain_at(scn, d, mu),
        bracket_lo,
        bracket_hi,
    )?;

    let (grid_mu, grid_gain) = grid[best_idx];
    if refined.gain >= grid_gain {
        Ok(refined)
    } else {
        // Unimodality is unproven; fall back to the coarse optimum.
        Ok(MuOptimum { mu_opt: grid_mu, gain: grid_gain })
    }
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
fn golden_section_max(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
) -> Result<MuOptimum> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > MU_REL_TOL * b.abs() {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 > f2 {
        MuOptimum { mu_opt: x1, gain: f1 }
    } else {
        MuOptimum { mu_opt: x2, gain: f2 }
    })
}

/// Optimizes the pump at every distance in `d_values` (ascending).
///
/// Points are independent and evaluated in parallel; results keep the input
/// order, so the output is deterministic regardless of thread count.
pub fn sweep_distance(scn: &Scenario, d_values: &[f64]) -> Result<Vec<SweepPoint>> {
    scn.validate()?;
    d_values
        .par_iter()
        .map(|&d| {
            let opt = optimize_mu(scn, d)?;
            let eval = evaluate(scn, d, opt.mu_opt)?;
            Ok(SweepPoint {
                d_km: d,
                mu_opt: opt.mu_opt,
                gain: opt.gain,
                bits_per_sec: opt.gain * scn.rep_rate_hz,
                p_s: eval.p_s,
                s_m: eval.s_m,
                p_exp: eval.p_exp,
                eps: eval.eps,
            })
        })
        .collect()
}

/// Largest distance at which the optimized gain still exceeds `g_min`,
/// located by bisection to 0.05 km.
///
/// Requires `gain(d_lo) >= g_min >= gain(d_hi)` with the gain actually
/// crossing the threshold inside the bracket.
pub fn find_cutoff(scn: &Scenario, g_min: f64, d_lo: f64, d_hi: f64) -> Result<f64> {
    scn.validate()?;
    if !(g_min.is_finite() && g_min >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "g_min",
            value: g_min,
            reason: "gain threshold must be finite and non-negative",
        });
    }
    if !(d_lo.is_finite() && d_hi.is_finite() && 0.0 < d_lo && d_lo < d_hi) {
        return Err(Error::InvalidParameter {
            name: "d_lo",
            value: d_lo,
            reason: "bracket must satisfy 0 < d_lo < d_hi",
        });
    }
    let g_lo = optimize_mu(scn, d_lo)?.gain;
    let g_hi = optimize_mu(scn, d_hi)?.gain;
    if !(g_lo >= g_min && g_min >= g_hi && g_lo > g_hi) {
        return Err(Error::Bracket { lo: d_lo, hi: d_hi });
    }
    let mut inside = d_lo;
    let mut outside = d_hi;
    while outside - inside > CUTOFF_TOL_KM {
        let mid = 0.5 * (inside + outside);
        if optimize_mu(scn, mid)?.gain > g_min {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(inside)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fiber_scenario(kind: SourceKind, baseline_error: f64) -> Scenario {
        let trigger = if kind.needs_trigger() {
            Some(TriggerDetectorParams::new(0.7, 1e-5, 0.0063).unwrap())
        } else {
            None
        };
        Scenario {
            source_kind: kind,
            trigger,
            channel: ChannelModel::Fiber { alpha_db_per_km: 0.38 },
            receiver: ReceiverParams::new(0.11, 1e-5, baseline_error).unwrap(),
            rep_rate_hz: 1e8,
            variant: FormulaVariant::SinglePhotonFraction,
            mu_bounds: (1e-6, 10.0),
        }
    }

    fn identity_scenario() -> Scenario {
        Scenario {
            source_kind: SourceKind::Wcp,
            trigger: None,
            channel: ChannelModel::FreeSpaceGround { ref_coupling: 1.0, ref_distance_km: 1.0 },
            receiver: ReceiverParams::new(1.0, 0.0, 0.0).unwrap(),
            rep_rate_hz: 1e8,
            variant: FormulaVariant::SinglePhotonFraction,
            mu_bounds: (1e-6, 10.0),
        }
    }

    #[test]
    fn zero_pump_means_zero_gain() {
        for kind in [SourceKind::Wcp, SourceKind::Cps, SourceKind::CpsPnr] {
            let scn = fiber_scenario(kind, 0.01);
            assert_eq!(gain_at(&scn, 5.0, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn ideal_wcp_link_is_profitable() {
        let scn = identity_scenario();
        assert!(gain_at(&scn, 1.0, 0.1).unwrap() > 0.0);
    }

    #[test]
    fn blind_receiver_returns_insecure_lower_bound() {
        let mut scn = fiber_scenario(SourceKind::Wcp, 0.01);
        scn.receiver = ReceiverParams::new(0.0, 0.0, 0.01).unwrap();
        let opt = optimize_mu(&scn, 10.0).unwrap();
        assert_eq!(opt.mu_opt, scn.mu_bounds.0);
        assert_eq!(opt.gain, 0.0);
    }

    #[test]
    fn optimizer_dominates_conventional_fixed_pump() {
        for kind in [SourceKind::Wcp, SourceKind::Cps, SourceKind::CpsPnr] {
            let scn = fiber_scenario(kind, 0.01);
            for &d in &[1.0, 5.0, 15.0] {
                let opt = optimize_mu(&scn, d).unwrap();
                let fixed = gain_at(&scn, d, 0.1).unwrap();
                assert!(
                    opt.gain >= fixed - 1e-15,
                    "{kind:?} at {d} km: optimized {} < fixed-pump {fixed}",
                    opt.gain
                );
            }
        }
    }

    #[test]
    fn wcp_optimum_tracks_transmittance() {
        // Brute-force fine grid as the oracle for both location and value.
        let scn = fiber_scenario(SourceKind::Wcp, 0.01);
        let d = 10.0;
        let opt = optimize_mu(&scn, d).unwrap();

        let eta_tot =
            crate::link::transmittance(&scn.channel, d).unwrap() * scn.receiver.efficiency;
        assert!(
            opt.mu_opt >= eta_tot / 2.0 && opt.mu_opt <= eta_tot * 2.0,
            "mu_opt {} vs eta_tot {eta_tot}",
            opt.mu_opt
        );

        let mut brute = 0.0f64;
        for i in 0..10_000 {
            let mu = 1e-6 * (1e7f64).powf(i as f64 / 9_999.0);
            brute = brute.max(gain_at(&scn, d, mu).unwrap());
        }
        assert!(opt.gain >= brute - 1e-9 * brute.abs());
    }

    #[test]
    fn optimizer_sound_against_validation_grid() {
        // Pseudo-random scenario family; the optimizer must dominate a
        // 1000-point validation grid.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for case in 0..20 {
            let kind = match case % 3 {
                0 => SourceKind::Wcp,
                1 => SourceKind::Cps,
                _ => SourceKind::CpsPnr,
            };
            let mut scn = fiber_scenario(kind, 0.005 + 0.04 * next());
            scn.channel = ChannelModel::Fiber { alpha_db_per_km: 0.1 + 0.5 * next() };
            scn.receiver =
                ReceiverParams::new(0.05 + 0.6 * next(), 1e-6 + 1e-4 * next(), 0.02).unwrap();
            let d = 1.0 + 20.0 * next();
            let opt = optimize_mu(&scn, d).unwrap();
            let mut grid_max = 0.0f64;
            for i in 0..1000 {
                let mu = 1e-6 * (1e7f64).powf(i as f64 / 999.0);
                grid_max = grid_max.max(gain_at(&scn, d, mu).unwrap());
            }
            assert!(
                opt.gain >= grid_max - 1e-12,
                "case {case}: optimizer {} below grid {grid_max}",
                opt.gain
            );
        }
    }

    #[test]
    fn sweep_constant_channel_is_flat() {
        let mut scn = fiber_scenario(SourceKind::Wcp, 0.01);
        scn.channel = ChannelModel::Fiber { alpha_db_per_km: 0.0 };
        let points = sweep_distance(&scn, &[1.0, 10.0, 50.0, 200.0]).unwrap();
        for p in &points[1..] {
            assert!((p.gain - points[0].gain).abs() <= 1e-9);
        }
    }

    #[test]
    fn sweep_fiber_wcp_non_increasing() {
        let scn = fiber_scenario(SourceKind::Wcp, 0.01);
        let d_values: Vec<f64> = (0..24).map(|i| 1.0 + i as f64 * (79.0 / 23.0)).collect();
        let points = sweep_distance(&scn, &d_values).unwrap();
        for w in points.windows(2) {
            assert!(
                w[1].gain <= w[0].gain * (1.0 + 1e-6) + 1e-18,
                "gain rose between {} and {} km",
                w[0].d_km,
                w[1].d_km
            );
        }
        for p in &points {
            assert!((p.bits_per_sec - p.gain * scn.rep_rate_hz).abs() <= 1e-9 * p.bits_per_sec.abs());
        }
    }

    #[test]
    fn sweep_pnr_dominates_click_trigger() {
        let cps = fiber_scenario(SourceKind::Cps, 0.01);
        let pnr = fiber_scenario(SourceKind::CpsPnr, 0.01);
        let d_values = [1.0, 10.0, 25.0, 40.0];
        let g_cps = sweep_distance(&cps, &d_values).unwrap();
        let g_pnr = sweep_distance(&pnr, &d_values).unwrap();
        for (c, p) in g_cps.iter().zip(&g_pnr) {
            assert!(
                p.gain >= c.gain - 1e-15,
                "PNR below click trigger at {} km",
                c.d_km
            );
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let scn = fiber_scenario(SourceKind::CpsPnr, 0.01);
        let d_values = [1.0, 5.0, 20.0];
        let a = sweep_distance(&scn, &d_values).unwrap();
        let b = sweep_distance(&scn, &d_values).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cutoff_requires_straddling_bracket() {
        let mut scn = fiber_scenario(SourceKind::Wcp, 0.01);
        scn.channel = ChannelModel::Fiber { alpha_db_per_km: 0.0 };
        assert!(matches!(
            find_cutoff(&scn, 1e-9, 1.0, 100.0),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn cutoff_matches_linear_scan() {
        let scn = fiber_scenario(SourceKind::Wcp, 0.01);
        let cutoff = find_cutoff(&scn, 0.0, 1.0, 60.0).unwrap();

        // 0.1 km brute-force scan oracle.
        let mut scan = 1.0;
        let mut d = 1.0;
        while d <= 60.0 {
            if optimize_mu(&scn, d).unwrap().gain > 0.0 {
                scan = d;
            }
            d += 0.1;
        }
        assert!(
            (cutoff - scan).abs() <= 0.1 + CUTOFF_TOL_KM,
            "bisection {cutoff} vs scan {scan}"
        );
    }

    #[test]
    fn cutoff_non_increasing_in_threshold() {
        let scn = fiber_scenario(SourceKind::Wcp, 0.01);
        let g = 1e-7;
        let c1 = find_cutoff(&scn, g, 1.0, 60.0).unwrap();
        let c2 = find_cutoff(&scn, 2.0 * g, 1.0, 60.0).unwrap();
        assert!(c2 <= c1 + CUTOFF_TOL_KM);
    }

    #[test]
    fn wcp_gain_collapses_at_cutoff() {
        // Within 20% extra distance of the cutoff the gain loses at least
        // two orders of magnitude.
        let scn = fiber_scenario(SourceKind::Wcp, 0.01);
        let cutoff = find_cutoff(&scn, 0.0, 1.0, 60.0).unwrap();
        let d0 = cutoff - 2.0 * CUTOFF_TOL_KM;
        let g0 = optimize_mu(&scn, d0).unwrap().gain;
        let g1 = optimize_mu(&scn, 1.2 * d0).unwrap().gain;
        assert!(g0 > 0.0);
        assert!(g1 <= g0 / 100.0, "gain {g0} -> {g1} near cutoff {cutoff}");
    }

    #[test]
    fn scenario_validation_rejects_missing_trigger() {
        let mut scn = fiber_scenario(SourceKind::Cps, 0.01);
        scn.trigger = None;
        assert!(scn.validate().is_err());
        let mut scn = fiber_scenario(SourceKind::Wcp, 0.01);
        scn.mu_bounds = (1.0, 0.5);
        assert!(scn.validate().is_err());
        scn.mu_bounds = (1e-6, 10.0);
        scn.rep_rate_hz = 0.0;
        assert!(scn.validate().is_err());
    }

    #[test]
    fn source_kind_text_round_trip() {
        for kind in [SourceKind::Wcp, SourceKind::Cps, SourceKind::CpsPnr] {
            assert_eq!(kind.as_str().parse::<SourceKind>().unwrap(), kind);
        }
        assert!("cpspnr".parse::<SourceKind>().is_err());
    }
}
