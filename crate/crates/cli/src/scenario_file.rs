//! Plain-text scenario files: a line-oriented `key = value` format with
//! `[source]`, `[channel]`, `[receiver]`, and `[run]` sections.
//!
//! Parsing is strict: unknown keys and missing required keys are errors that
//! name the offending key, so a typo never silently falls back to a default.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use keyrate_core::{
    ChannelModel, ReceiverParams, Scenario, SourceKind, TriggerDetectorParams,
};

use crate::CliError;

/// Parses a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                CliError::config(format!("line {}: malformed section header `{line}`", lineno + 1))
            })?;
            section = name.trim().to_string();
            match section.as_str() {
                "source" | "channel" | "receiver" | "run" => {}
                other => {
                    return Err(CliError::config(format!("unknown section `[{other}]`")));
                }
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        if section.is_empty() {
            return Err(CliError::config(format!(
                "line {}: key `{}` appears before any section header",
                lineno + 1,
                key.trim()
            )));
        }
        let full = format!("{section}.{}", key.trim());
        if entries.insert(full.clone(), (value.trim().to_string(), lineno)).is_some() {
            return Err(CliError::config(format!("duplicate key `{full}`")));
        }
    }

    let mut fields = Fields { entries };

    let kind: SourceKind = fields.parse_with("source.kind", str::parse)?;
    let channel_kind = fields.require("channel.kind")?;

    // With both kinds known, the full key set is fixed: anything not in it
    // is rejected by name before any value is read.
    let mut expected = vec![
        "receiver.efficiency",
        "receiver.dark_per_pulse",
        "receiver.baseline_error",
        "run.rep_rate_hz",
        "run.formula_variant",
        "run.mu_lo",
        "run.mu_hi",
    ];
    if kind.needs_trigger() {
        expected.extend([
            "source.trigger.efficiency",
            "source.trigger.dark_per_gate",
            "source.trigger.discrimination_error",
        ]);
    }
    match channel_kind.as_str() {
        "fiber" => expected.push("channel.alpha_db_per_km"),
        "freespace" | "satellite" => {
            expected.extend(["channel.ref_coupling", "channel.ref_distance_km"])
        }
        other => {
            return Err(CliError::config(format!(
                "invalid value `{other}` for `channel.kind` (expected `fiber`, `freespace`, or `satellite`)"
            )))
        }
    }
    fields.reject_unknown(&expected)?;

    let trigger = if kind.needs_trigger() {
        Some(
            TriggerDetectorParams::new(
                fields.number("source.trigger.efficiency")?,
                fields.number("source.trigger.dark_per_gate")?,
                fields.number("source.trigger.discrimination_error")?,
            )
            .map_err(CliError::from_core)?,
        )
    } else {
        None
    };

    let channel = match channel_kind.as_str() {
        "fiber" => ChannelModel::Fiber { alpha_db_per_km: fields.number("channel.alpha_db_per_km")? },
        "freespace" => ChannelModel::FreeSpaceGround {
            ref_coupling: fields.number("channel.ref_coupling")?,
            ref_distance_km: fields.number("channel.ref_distance_km")?,
        },
        _ => ChannelModel::Satellite {
            ref_coupling: fields.number("channel.ref_coupling")?,
            ref_distance_km: fields.number("channel.ref_distance_km")?,
        },
    };

    let receiver = ReceiverParams::new(
        fields.number("receiver.efficiency")?,
        fields.number("receiver.dark_per_pulse")?,
        fields.number("receiver.baseline_error")?,
    )
    .map_err(CliError::from_core)?;

    let scenario = Scenario {
        source_kind: kind,
        trigger,
        channel,
        receiver,
        rep_rate_hz: fields.number("run.rep_rate_hz")?,
        variant: fields.parse_with("run.formula_variant", str::parse)?,
        mu_bounds: (fields.number("run.mu_lo")?, fields.number("run.mu_hi")?),
    };

    scenario.validate().map_err(CliError::from_core)?;
    Ok(scenario)
}

/// Renders a scenario back into the file format. Numbers use the shortest
/// round-trip form, so parsing the output reproduces the scenario exactly.
pub fn write_scenario(scn: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[source]");
    let _ = writeln!(out, "kind = {}", scn.source_kind);
    if let Some(t) = &scn.trigger {
        let _ = writeln!(out, "trigger.efficiency = {}", t.efficiency);
        let _ = writeln!(out, "trigger.dark_per_gate = {}", t.dark_prob_per_gate);
        let _ = writeln!(out, "trigger.discrimination_error = {}", t.discrimination_error);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[channel]");
    match scn.channel {
        ChannelModel::Fiber { alpha_db_per_km } => {
            let _ = writeln!(out, "kind = fiber");
            let _ = writeln!(out, "alpha_db_per_km = {alpha_db_per_km}");
        }
        ChannelModel::FreeSpaceGround { ref_coupling, ref_distance_km } => {
            let _ = writeln!(out, "kind = freespace");
            let _ = writeln!(out, "ref_coupling = {ref_coupling}");
            let _ = writeln!(out, "ref_distance_km = {ref_distance_km}");
        }
        ChannelModel::Satellite { ref_coupling, ref_distance_km } => {
            let _ = writeln!(out, "kind = satellite");
            let _ = writeln!(out, "ref_coupling = {ref_coupling}");
            let _ = writeln!(out, "ref_distance_km = {ref_distance_km}");
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[receiver]");
    let _ = writeln!(out, "efficiency = {}", scn.receiver.efficiency);
    let _ = writeln!(out, "dark_per_pulse = {}", scn.receiver.dark_prob_per_pulse);
    let _ = writeln!(out, "baseline_error = {}", scn.receiver.baseline_error);
    let _ = writeln!(out);
    let _ = writeln!(out, "[run]");
    let _ = writeln!(out, "rep_rate_hz = {}", scn.rep_rate_hz);
    let _ = writeln!(out, "formula_variant = {}", scn.variant);
    let _ = writeln!(out, "mu_lo = {}", scn.mu_bounds.0);
    let _ = writeln!(out, "mu_hi = {}", scn.mu_bounds.1);
    out
}

struct Fields {
    entries: BTreeMap<String, (String, usize)>,
}

impl Fields {
    fn require(&mut self, key: &str) -> Result<String, CliError> {
        self.entries
            .remove(key)
            .map(|(v, _)| v)
            .ok_or_else(|| CliError::config(format!("missing required key `{key}`")))
    }

    fn number(&mut self, key: &str) -> Result<f64, CliError> {
        let raw = self.require(key)?;
        raw.parse::<f64>().map_err(|_| {
            CliError::config(format!("invalid number `{raw}` for key `{key}`"))
        })
    }

    fn parse_with<T>(
        &mut self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, CliError> {
        let raw = self.require(key)?;
        parse(&raw).map_err(|e| CliError::config(format!("invalid value for `{key}`: {e}")))
    }

    fn reject_unknown(&self, expected: &[&str]) -> Result<(), CliError> {
        // Report the unknown key that appears earliest in the file.
        if let Some((key, _)) = self
            .entries
            .iter()
            .filter(|(key, _)| !expected.contains(&key.as_str()))
            .min_by_key(|(_, (_, line))| *line)
        {
            return Err(CliError::config(format!("unknown key `{key}`")));
        }
        Ok(())
    }
}
