//! Command-line front end, run configuration and file emission.

mod commands;
mod structure_io;
mod tables;

pub use commands::execute;
pub use structure_io::{
    emit_interchange, emit_structure, emit_xyz, parse_interchange, parse_structure, parse_xyz,
    StructureFormat,
};
pub use tables::{dbs_csv, fit_csv, scan_csv, sci, sweep_csv, trace_csv};

use crate::crystal::EdgeVariant;
use crate::error::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

/// Converts a TOML error into a parse error carrying a line number.
///
/// Errors raised after buffering (tagged enums) carry no span; the line is then
/// the first one defining the offending key.
pub fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let message = e.message().to_string();
    let named = message.split('`').nth(1).map(str::to_string);
    let line = match e.span() {
        Some(span) => text[..span.start.min(text.len())].matches('\n').count() + 1,
        None => named
            .as_deref()
            .and_then(|key| text.lines().position(|l| line_key(l) == Some(key)))
            .map_or(0, |i| i + 1),
    };
    let field = named
        .or_else(|| {
            text.lines()
                .nth(line.saturating_sub(1))
                .and_then(line_key)
                .map(str::to_string)
        })
        .unwrap_or_else(|| "document".into());
    Error::Parse {
        line,
        field,
        message,
    }
}

fn line_key(line: &str) -> Option<&str> {
    let l = line.trim();
    let key = if l.starts_with('[') {
        l.trim_matches(['[', ']'])
    } else {
        l.split_once('=')?.0
    };
    Some(key.trim().trim_matches('"')).filter(|k| !k.is_empty())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Preset {
    /// Stepped 6×6 model with one buried dangling bond.
    #[default]
    #[serde(rename = "paper-step")]
    PaperStep,
    /// Unterminated flat slab.
    #[serde(rename = "flat")]
    Flat,
    /// Flat slab with every dangling bond capped by H.
    #[serde(rename = "flat-h")]
    FlatH,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-step" => Ok(Preset::PaperStep),
            "flat" => Ok(Preset::Flat),
            "flat-h" => Ok(Preset::FlatH),
            other => Err(Error::InvalidInput(format!(
                "unknown preset `{other}` (paper-step, flat, flat-h)"
            ))),
        }
    }
}

fn default_lattice() -> f64 {
    crate::constants::DIAMOND_LATTICE_A
}
fn default_layers() -> usize {
    9
}
fn default_repeat() -> usize {
    6
}
fn default_vacuum() -> f64 {
    10.0
}
fn default_terrace() -> usize {
    3
}
fn default_threshold() -> f64 {
    10.0
}
fn default_isotope() -> String {
    "1H".into()
}
fn default_tau_max() -> f64 {
    2.0
}
fn default_trace_steps() -> usize {
    401
}
fn default_prefactor() -> f64 {
    crate::kinetics::PAPER_PREFACTOR
}
fn default_order() -> f64 {
    1.0
}
fn default_barrier() -> f64 {
    1.12
}
fn default_barriers() -> Vec<f64> {
    crate::kinetics::PAPER_BARRIERS_EV.to_vec()
}
fn default_duration() -> f64 {
    3600.0
}
fn default_n0() -> f64 {
    4.4e13
}
fn default_trajectory_steps() -> usize {
    101
}
fn default_low_c() -> f64 {
    465.0
}
fn default_high_c() -> f64 {
    600.0
}
fn default_sweep_steps() -> usize {
    41
}

/// Geometry options shared by the structure-producing commands.
#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelArgs {
    /// Read the structure from a file instead of building a preset.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// paper-step, flat or flat-h.
    #[arg(long, default_value = "paper-step")]
    #[serde(default)]
    pub preset: Preset,
    /// O/H/H, O/OH/OH or OH/OH.
    #[arg(long, default_value = "O/H/H")]
    #[serde(default)]
    pub edge_variant: EdgeVariant,
    /// Lattice parameter, Å.
    #[arg(long, default_value_t = default_lattice())]
    #[serde(default = "default_lattice")]
    pub lattice: f64,
    #[arg(long, default_value_t = default_layers())]
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[arg(long, default_value_t = default_repeat())]
    #[serde(default = "default_repeat")]
    pub nx: usize,
    #[arg(long, default_value_t = default_repeat())]
    #[serde(default = "default_repeat")]
    pub ny: usize,
    /// Vacuum gap, Å.
    #[arg(long, default_value_t = default_vacuum())]
    #[serde(default = "default_vacuum")]
    pub vacuum: f64,
    /// Upper terrace width in surface rows.
    #[arg(long, default_value_t = default_terrace())]
    #[serde(default = "default_terrace")]
    pub terrace_width: usize,
}

impl Default for ModelArgs {
    fn default() -> Self {
        ModelArgs {
            input: None,
            preset: Preset::default(),
            edge_variant: EdgeVariant::default(),
            lattice: default_lattice(),
            layers: default_layers(),
            nx: default_repeat(),
            ny: default_repeat(),
            vacuum: default_vacuum(),
            terrace_width: default_terrace(),
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BuildArgs {
    #[command(flatten)]
    #[serde(default)]
    pub model: ModelArgs,
    /// Output file; `.xyz` selects XYZ, anything else the interchange format.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DbsArgs {
    #[command(flatten)]
    #[serde(default)]
    pub model: ModelArgs,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct HfiArgs {
    #[command(flatten)]
    #[serde(default)]
    pub model: ModelArgs,
    /// Fermi-contact fixture file; the bundled paper fixture when omitted.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<PathBuf>,
    /// Flag nuclei with max(|a|, b) at or above this value, MHz.
    #[arg(long, default_value_t = default_threshold())]
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Field direction "x,y,z"; the fixture's direction when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_dir: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FitArgs {
    /// Secular coupling a, MHz.
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Pseudo-secular coupling b, MHz.
    #[arg(long)]
    pub b: f64,
    /// Fermi-contact term, MHz.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    #[serde(default)]
    pub a_iso: f64,
    /// 1H or 13C.
    #[arg(long, default_value = "1H")]
    #[serde(default = "default_isotope")]
    pub isotope: String,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EseemArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    /// Nuclear Larmor frequency, MHz.
    #[arg(long, conflicts_with = "field_t")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_i: Option<f64>,
    /// Field in tesla; the Larmor frequency follows from the isotope.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_t: Option<f64>,
    #[arg(long, default_value = "1H")]
    #[serde(default = "default_isotope")]
    pub isotope: String,
    /// Longest τ, µs.
    #[arg(long, default_value_t = default_tau_max())]
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    #[arg(long, default_value_t = default_trace_steps())]
    #[serde(default = "default_trace_steps")]
    pub steps: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn kelvin(temp_c: Option<f64>, temp_k: Option<f64>, what: &str) -> Result<f64> {
    match (temp_c, temp_k) {
        (Some(c), None) => Ok(c + crate::constants::CELSIUS_OFFSET),
        (None, Some(k)) => Ok(k),
        (Some(_), Some(_)) => Err(Error::InvalidInput(format!(
            "give the {what} once, in °C or in K"
        ))),
        (None, None) => Err(Error::InvalidInput(format!("the {what} is required (°C or K flag)"))),
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DesorbArgs {
    /// Desorption barrier, eV.
    #[arg(long, default_value_t = default_barrier())]
    #[serde(default = "default_barrier")]
    pub barrier: f64,
    /// Attempt frequency, 1/s.
    #[arg(long, default_value_t = default_prefactor())]
    #[serde(default = "default_prefactor")]
    pub prefactor: f64,
    #[arg(long, default_value_t = default_order())]
    #[serde(default = "default_order")]
    pub order: f64,
    /// Temperature, °C.
    #[arg(long, conflicts_with = "temp_k", allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temp_c: Option<f64>,
    /// Temperature, K.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temp_k: Option<f64>,
    /// Annealing time, s.
    #[arg(long, default_value_t = default_duration())]
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Initial spin density, cm⁻².
    #[arg(long, default_value_t = default_n0())]
    #[serde(default = "default_n0")]
    pub n0: f64,
    /// Trajectory samples between 0 and the duration.
    #[arg(long, default_value_t = default_trajectory_steps())]
    #[serde(default = "default_trajectory_steps")]
    pub steps: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AnnealArgs {
    /// Barriers, eV, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = default_barriers())]
    #[serde(default = "default_barriers")]
    pub barriers: Vec<f64>,
    #[arg(long, default_value_t = default_prefactor())]
    #[serde(default = "default_prefactor")]
    pub prefactor: f64,
    /// Lower annealing temperature, °C.
    #[arg(long, default_value_t = default_low_c())]
    #[serde(default = "default_low_c")]
    pub low_c: f64,
    /// Higher annealing temperature, °C.
    #[arg(long, default_value_t = default_high_c())]
    #[serde(default = "default_high_c")]
    pub high_c: f64,
    #[arg(long, default_value_t = default_duration())]
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[arg(long, default_value_t = default_n0())]
    #[serde(default = "default_n0")]
    pub n0: f64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = default_barriers())]
    #[serde(default = "default_barriers")]
    pub barriers: Vec<f64>,
    #[arg(long, default_value_t = default_prefactor())]
    #[serde(default = "default_prefactor")]
    pub prefactor: f64,
    #[arg(long, conflicts_with = "t_min_k", allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min_c: Option<f64>,
    #[arg(long, conflicts_with = "t_max_k", allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_c: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min_k: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_k: Option<f64>,
    #[arg(long, default_value_t = default_sweep_steps())]
    #[serde(default = "default_sweep_steps")]
    pub steps: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// One command with all of its parameters; doubles as the config file schema.
#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    /// Build a structure and report its dangling bonds.
    Build(BuildArgs),
    /// List dangling bonds of a structure.
    Dbs(DbsArgs),
    /// Scan hyperfine couplings of every 1H and 13C nucleus.
    Hfi(HfiArgs),
    /// Invert (a, b) to electron–nucleus distance and angle.
    Fit(FitArgs),
    /// Two-pulse echo modulation trace.
    Eseem(EseemArgs),
    /// Coverage decay at one temperature.
    Desorb(DesorbArgs),
    /// Annealing comparison at two temperatures.
    Anneal(AnnealArgs),
    /// Desorption rate against temperature.
    Sweep(SweepArgs),
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| toml_error(text, &e))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidInput(format!("cannot serialize config: {e}")))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "surfspin",
    version,
    about = "Stepped (100) diamond dangling-bond model, hyperfine couplings and desorption kinetics",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    /// Read the command and its parameters from a config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<RunConfig>,
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    let config = match (cli.config, cli.command) {
        (Some(path), None) => std::fs::read_to_string(&path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
            .and_then(|text| RunConfig::from_toml(&text)),
        (None, Some(cmd)) => Ok(cmd),
        _ => Err(Error::InvalidInput(
            "give a subcommand or --config <path>; see --help".into(),
        )),
    };
    let result = config.and_then(|c| execute(&c));
    match result {
        Ok(outcome) => {
            if let Some(data) = &outcome.stdout {
                let _ = stdout.write_all(data.as_bytes());
                let _ = writeln!(stderr, "{}", outcome.summary);
            } else {
                let _ = writeln!(stdout, "{}", outcome.summary);
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::line_key;

    #[test]
    fn keys_of_lines() {
        assert_eq!(line_key("threshold = 5.0"), Some("threshold"));
        assert_eq!(line_key("  [model]"), Some("model"));
        assert_eq!(line_key("\"edge-variant\" = \"OH/OH\""), Some("edge-variant"));
        assert_eq!(line_key("# comment"), None);
    }
}
