//! Subcommand implementations. Each returns its stdout payload as a string
//! so tests can assert on bytes without spawning a process.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use keyrate_core::{
    evaluate, find_cutoff, optimize_mu, simulate, sweep_distance, z_score, FormulaVariant,
    Scenario, GAIN_FLOOR,
};

use crate::csv_out::{fmt_sig, log_spaced, sweep_to_csv};
use crate::scenario_file::parse_scenario;
use crate::CliError;

pub fn load_scenario(path: &Path, variant: Option<FormulaVariant>) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read scenario `{}`", path.display()), e))?;
    let mut scn = parse_scenario(&text)?;
    if let Some(v) = variant {
        scn.variant = v;
    }
    Ok(scn)
}

fn check_distance(d: f64) -> Result<(), CliError> {
    if !d.is_finite() || d <= 0.0 {
        return Err(CliError::config(format!(
            "invalid value for --distance: d = {d} must be positive"
        )));
    }
    Ok(())
}

/// Optimizes the pump at one distance and prints one machine-parsable line.
pub fn cmd_optimize(
    scenario_path: &Path,
    d: f64,
    variant: Option<FormulaVariant>,
) -> Result<String, CliError> {
    check_distance(d)?;
    let scn = load_scenario(scenario_path, variant)?;
    let opt = optimize_mu(&scn, d).map_err(CliError::from_core)?;
    Ok(format!(
        "distance_km={} mu_opt={} gain={} bits_per_sec={} secure={}\n",
        fmt_sig(d),
        fmt_sig(opt.mu_opt),
        fmt_sig(opt.gain),
        fmt_sig(opt.gain * scn.rep_rate_hz),
        u8::from(opt.gain > GAIN_FLOOR),
    ))
}

/// Sweeps log-spaced distances and writes the CSV to `out_path`.
pub fn cmd_sweep(
    scenario_path: &Path,
    d_lo: f64,
    d_hi: f64,
    n_points: usize,
    out_path: &Path,
    variant: Option<FormulaVariant>,
) -> Result<(), CliError> {
    if !(d_lo.is_finite() && d_lo > 0.0) {
        return Err(CliError::config(format!(
            "invalid value for --from: d = {d_lo} must be positive"
        )));
    }
    if !(d_hi.is_finite() && d_hi > d_lo) {
        return Err(CliError::config(format!(
            "invalid value for --to: d = {d_hi} must exceed --from"
        )));
    }
    if n_points < 2 {
        return Err(CliError::config("invalid value for --points: need at least 2"));
    }
    let scn = load_scenario(scenario_path, variant)?;
    let grid = log_spaced(d_lo, d_hi, n_points);
    let points = sweep_distance(&scn, &grid).map_err(CliError::from_core)?;
    let csv = sweep_to_csv(&points);
    fs::write(out_path, csv)
        .map_err(|e| CliError::io(format!("cannot write `{}`", out_path.display()), e))?;
    Ok(())
}

/// Bisects for the largest distance whose optimized gain exceeds `g_min`.
pub fn cmd_cutoff(
    scenario_path: &Path,
    d_lo: f64,
    d_hi: f64,
    g_min: f64,
    variant: Option<FormulaVariant>,
) -> Result<String, CliError> {
    let scn = load_scenario(scenario_path, variant)?;
    let cutoff = find_cutoff(&scn, g_min, d_lo, d_hi).map_err(CliError::from_core)?;
    Ok(format!("cutoff_km={}\n", fmt_sig(cutoff)))
}

/// Runs the pulse simulator and prints empirical rates against the analytic
/// model with z-scores.
pub fn cmd_montecarlo(
    scenario_path: &Path,
    d: f64,
    mu: f64,
    n_pulses: u64,
    seed: u64,
    variant: Option<FormulaVariant>,
) -> Result<String, CliError> {
    check_distance(d)?;
    let scn = load_scenario(scenario_path, variant)?;
    let tally = simulate(&scn, d, mu, n_pulses, seed).map_err(CliError::from_core)?;
    let analytic = evaluate(&scn, d, mu).map_err(CliError::from_core)?;

    let mut out = String::new();
    let _ = writeln!(out, "pulses={n_pulses} seed={seed} distance_km={} mu={}", fmt_sig(d), fmt_sig(mu));
    let rows = [
        ("p_s", tally.p_s(), analytic.p_s, tally.n_pulses),
        ("s_m", tally.s_m(), analytic.s_m, tally.n_triggered),
        ("p_exp", tally.p_exp(), analytic.p_exp, tally.n_triggered),
        ("eps", tally.eps(), analytic.eps, tally.n_detected_given_trigger),
    ];
    let _ = writeln!(out, "quantity empirical analytic z");
    for (name, emp, ana, n) in rows {
        let _ = writeln!(
            out,
            "{name} {} {} {:+.3}",
            fmt_sig(emp),
            fmt_sig(ana),
            z_score(emp, ana, n)
        );
    }
    let _ = writeln!(out, "gain_analytic={}", fmt_sig(analytic.gain));
    Ok(out)
}
