//! Command-line arguments. The same structs serialise into run manifests, so a
//! manifest holds every resolved setting.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permwave_core::ambiguity::DEFAULT_GRID_POINTS;
use permwave_core::bounds::SpectrumMode;
use permwave_core::channel::{build_model, ChannelKind, ChannelModel, LosSpec};
use permwave_core::sim::ReceiverKind;
use permwave_core::waveform::DEFAULT_OVERSAMPLING;
use permwave_core::{WaveformParams, WaveformSymbol};
use serde::{Deserialize, Serialize};

use crate::table::Format;

#[derive(Debug, Parser)]
#[command(
    name = "permwave",
    version,
    about = "Phase-modulated frequency-permutation waveforms: codec, ambiguity, CRLB, detection and error bounds",
    after_help = "SNR is 10*log10(E/N0) in dB everywhere; it excludes the array gain (E[h^H h] = N).\n\
                  Exit status: 0 success, 1 runtime error, 2 usage error."
)]
pub struct Cli {
    /// Worker threads [count]; defaults to the available parallelism. Output does not depend on it.
    #[arg(long, env = "PERMWAVE_THREADS", global = true, value_name = "COUNT")]
    pub threads: Option<usize>,

    /// Output file, or directory for multi-file commands [path]; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Output format for tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Where to write the run manifest [path]; defaults next to the output, or stderr for stdout runs.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    /// Re-run the command recorded in a manifest and check the outputs hash the same [path].
    #[arg(long, value_name = "MANIFEST", conflicts_with = "format")]
    pub replay: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Map a 1-based message index to its tone permutation and phase digits.
    Encode(EncodeArgs),
    /// Map tone permutations and phase digits back to message indices.
    Decode(DecodeArgs),
    /// Sample the complex baseband waveform of one symbol (columns t [s], re, im).
    Synth(SynthArgs),
    /// Ambiguity surface |A(tau, omega)| on a grid (columns tau [s], omega [rad/s], value).
    Af(AfArgs),
    /// Zero-Doppler and zero-delay cuts of the ambiguity function (two files).
    AfCuts(AfArgs),
    /// Peak sidelobe statistics over random symbols (samples table + summary JSON).
    PslStats(PslArgs),
    /// Normalised Cramér–Rao bounds versus SNR (CRLB_tau/T^2, CRLB_omega*(LT)^2).
    Crlb(CrlbArgs),
    /// Monte Carlo block error rate versus SNR.
    Bler(BlerArgs),
    /// Union bound, nearest-neighbour approximation and gain-threshold bound versus SNR.
    Bounds(BoundsArgs),
    /// Simulated and analytic BLER curves for one channel family (directory of tables).
    Reproduce(ReproduceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Encode(_) => "encode",
            Command::Decode(_) => "decode",
            Command::Synth(_) => "synth",
            Command::Af(_) => "af",
            Command::AfCuts(_) => "af-cuts",
            Command::PslStats(_) => "psl-stats",
            Command::Crlb(_) => "crlb",
            Command::Bler(_) => "bler",
            Command::Bounds(_) => "bounds",
            Command::Reproduce(_) => "reproduce",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WaveformArgs {
    /// Subpulses L, also the number of tones [count].
    #[arg(long = "L", default_value_t = 8, value_name = "COUNT")]
    pub subpulses: usize,
    /// PSK order M [count].
    #[arg(long = "M", default_value_t = 4, value_name = "COUNT")]
    pub psk_order: usize,
    /// Subpulse duration T [s].
    #[arg(long = "T", default_value_t = 1e-6, value_name = "SECONDS")]
    pub subpulse_duration: f64,
    /// First tone f0 [Hz].
    #[arg(long = "f0", default_value_t = 0.0, value_name = "HZ")]
    pub first_tone: f64,
    /// Tone step multiple n, so the spacing is n/T [integer].
    #[arg(long = "n-step", default_value_t = 1, value_name = "INT")]
    pub step_multiple: u32,
    /// Total waveform energy E [J].
    #[arg(long = "E", default_value_t = 1.0, value_name = "JOULES")]
    pub energy: f64,
}

impl WaveformArgs {
    pub fn params(&self) -> permwave_core::Result<WaveformParams> {
        let p = WaveformParams {
            subpulses: self.subpulses,
            psk_order: self.psk_order,
            subpulse_duration: self.subpulse_duration,
            first_tone: self.first_tone,
            step_multiple: self.step_multiple,
            energy: self.energy,
        };
        p.validate()?;
        Ok(p)
    }
}

/// A symbol given by index or by explicit tone and phase sequences.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SymbolArgs {
    /// 1-based message index [integer]; ignored when --perm is given.
    #[arg(long, default_value_t = 1, value_name = "INDEX")]
    pub index: u128,
    /// Tone index per subpulse, comma separated [integers in 0..L].
    #[arg(long, value_name = "LIST", requires = "phases")]
    pub perm: Option<String>,
    /// Phase digit per subpulse, comma separated [integers in 0..M].
    #[arg(long, value_name = "LIST", requires = "perm")]
    pub phases: Option<String>,
}

impl SymbolArgs {
    pub fn symbol(&self, params: &WaveformParams) -> anyhow::Result<WaveformSymbol> {
        match (&self.perm, &self.phases) {
            (Some(perm), Some(phases)) => {
                Ok(WaveformSymbol::from_parts(parse_list(perm)?, parse_list(phases)?, params)?)
            }
            _ => Ok(permwave_core::codec::encode_index(self.index, params)?),
        }
    }
}

pub fn parse_list(text: &str) -> anyhow::Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| anyhow::anyhow!("bad list entry {s:?}: {e}")))
        .collect()
}

pub fn format_list(values: &[usize]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelChoice {
    Awgn,
    Rayleigh,
    Rician,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ChannelArgs {
    /// Channel model.
    #[arg(long, value_enum, default_value_t = ChannelChoice::Awgn)]
    pub channel: ChannelChoice,
    /// Receive antennas N [count].
    #[arg(long = "antennas", visible_alias = "N", default_value_t = 2, value_name = "COUNT")]
    pub antennas: usize,
    /// Rician factor K, LOS to scattered power [linear ratio]; Rician only.
    #[arg(long = "K", default_value_t = 2.5, value_name = "RATIO")]
    pub rician_k: f64,
    /// Exponential antenna correlation rho [0 <= rho < 1]; fading channels only.
    #[arg(long, default_value_t = 0.5, value_name = "RHO")]
    pub rho: f64,
    /// Line-of-sight steering angle [rad]; broadside (all ones) when omitted.
    #[arg(long = "los-angle", value_name = "RADIANS", allow_hyphen_values = true)]
    pub los_angle: Option<f64>,
}

impl ChannelArgs {
    pub fn model(&self) -> permwave_core::Result<ChannelModel> {
        let kind = match self.channel {
            ChannelChoice::Awgn => ChannelKind::Awgn,
            ChannelChoice::Rayleigh => ChannelKind::Rayleigh,
            ChannelChoice::Rician => ChannelKind::Rician,
        };
        let los = self.los_angle.map_or(LosSpec::Broadside, LosSpec::Steering);
        build_model(kind, self.antennas, self.rician_k, self.rho, los)
    }
}

/// Inclusive `start:step:stop` list in dB, or a single value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SnrRange {
    text: String,
    values: Vec<f64>,
}

impl SnrRange {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl FromStr for SnrRange {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let parts: Vec<f64> = text
            .split(':')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("{s:?} is not a number")))
            .collect::<Result<_, _>>()?;
        if parts.iter().any(|v| !v.is_finite()) {
            return Err("SNR values must be finite".into());
        }
        let values = match parts[..] {
            [single] => vec![single],
            [start, step, stop] => {
                if step == 0.0 || (stop - start) * step < 0.0 {
                    return Err("step must be nonzero and point from start towards stop".into());
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > 100_000 {
                    return Err("too many SNR points".into());
                }
                // Rounded to 12 decimals so 0.1 steps print as written.
                (0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
            }
            _ => return Err("expected start:step:stop or a single value".into()),
        };
        Ok(Self { text: text.to_owned(), values })
    }
}

impl TryFrom<String> for SnrRange {
    type Error = String;

    fn try_from(text: String) -> Result<Self, String> {
        text.parse()
    }
}

impl From<SnrRange> for String {
    fn from(r: SnrRange) -> String {
        r.text
    }
}

impl fmt::Display for SnrRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    /// 1-based message index [integer in 1..=L!*M^L].
    #[arg(long, value_name = "INDEX")]
    pub index: u128,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    /// Tone index per subpulse, comma separated [integers in 0..L].
    #[arg(long, value_name = "LIST", requires = "phases", conflicts_with = "input")]
    pub perm: Option<String>,
    /// Phase digit per subpulse, comma separated [integers in 0..M].
    #[arg(long, value_name = "LIST", requires = "perm")]
    pub phases: Option<String>,
    /// CSV with perm and phases columns, such as `encode` output; '-' reads stdin [path].
    #[arg(long, value_name = "PATH", required_unless_present = "perm")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// Samples per subpulse divided by L*n [factor].
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLING, value_name = "FACTOR")]
    pub oversampling: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AfArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// Grid points per axis over tau in [-LT, LT] and omega in [-2*pi*L*n/T, 2*pi*L*n/T] [count].
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS, value_name = "COUNT")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PslArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    /// Random symbols to draw [count].
    #[arg(long, default_value_t = 2000, value_name = "COUNT")]
    pub samples: usize,
    /// Random seed [integer].
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Force every phase to zero (frequency permutation only).
    #[arg(long)]
    pub no_phases: bool,
    /// Grid points per axis, same axes as `af` [count].
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS, value_name = "COUNT")]
    pub points: usize,
    /// Main-lobe exclusion half-width in delay [s]; defaults to T.
    #[arg(long, value_name = "SECONDS")]
    pub exclude_tau: Option<f64>,
    /// Main-lobe exclusion half-width in Doppler [rad/s]; unbounded when omitted.
    #[arg(long, value_name = "RAD_PER_S")]
    pub exclude_omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CrlbArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// SNR grid 10*log10(1/N0) as start:step:stop [dB].
    #[arg(long, default_value = "-10:2:30", value_name = "DB", allow_hyphen_values = true)]
    pub snr: SnrRange,
    /// Subpulse bandwidth B [Hz]; defaults to 10/T.
    #[arg(long, value_name = "HZ")]
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverChoice {
    Efficient,
    Exhaustive,
    Both,
}

impl From<ReceiverChoice> for ReceiverKind {
    fn from(r: ReceiverChoice) -> Self {
        match r {
            ReceiverChoice::Efficient => ReceiverKind::Efficient,
            ReceiverChoice::Exhaustive => ReceiverKind::Exhaustive,
            ReceiverChoice::Both => ReceiverKind::Both,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StoppingArgs {
    /// Trial cap per SNR point [count].
    #[arg(long, default_value_t = 1_000_000, value_name = "COUNT")]
    pub max_trials: u64,
    /// Stop a point after this many block errors [count].
    #[arg(long, default_value_t = 200, value_name = "COUNT")]
    pub target_errors: u64,
    /// Random seed [integer].
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BlerArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// SNR grid 10*log10(E/N0) as start:step:stop [dB].
    #[arg(long, default_value = "0:2:20", value_name = "DB", allow_hyphen_values = true)]
    pub snr: SnrRange,
    #[command(flatten)]
    pub stopping: StoppingArgs,
    /// Detector: assignment-based, exhaustive search, or both with a per-trial agreement check.
    #[arg(long, value_enum, default_value_t = ReceiverChoice::Efficient)]
    pub receiver: ReceiverChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumChoice {
    /// Group symbols by distance from counts of fixed points and phase offsets.
    Aggregate,
    /// Visit every symbol (at most 10^6).
    Enumerate,
}

impl From<SpectrumChoice> for SpectrumMode {
    fn from(s: SpectrumChoice) -> Self {
        match s {
            SpectrumChoice::Aggregate => SpectrumMode::Aggregate,
            SpectrumChoice::Enumerate => SpectrumMode::Enumerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// SNR grid 10*log10(E/N0) as start:step:stop [dB].
    #[arg(long, default_value = "0:2:20", value_name = "DB", allow_hyphen_values = true)]
    pub snr: SnrRange,
    /// How the union bound visits the constellation.
    #[arg(long, value_enum, default_value_t = SpectrumChoice::Aggregate)]
    pub spectrum: SpectrumChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// AWGN, N in {2, 4}: simulation, union bound and nearest-neighbour approximation.
    Awgn,
    /// Correlated Rician, rho = 0.5, K in {0.25, 2.5, 10}: simulation and nearest neighbours.
    Rician,
    /// Correlated Rayleigh, rho = 0.5, N in {2, 4}: simulation, gain-threshold bound and nearest neighbours.
    Rayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// L = 4, M = 4, union bound by enumeration where shown.
    Desk,
    /// L = 8, M = 4, nearest-neighbour and gain-threshold curves only.
    Paper,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub figure: Figure,
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    /// SNR grid 10*log10(E/N0) as start:step:stop [dB]; figure default when omitted.
    #[arg(long, value_name = "DB", allow_hyphen_values = true)]
    pub snr: Option<SnrRange>,
    #[command(flatten)]
    pub stopping: StoppingArgs,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_ranges() {
        assert_eq!("0:2:6".parse::<SnrRange>().unwrap().values(), &[0.0, 2.0, 4.0, 6.0]);
        assert_eq!("-5".parse::<SnrRange>().unwrap().values(), &[-5.0]);
        assert_eq!("0:0.1:0.3".parse::<SnrRange>().unwrap().values(), &[0.0, 0.1, 0.2, 0.3]);
        assert_eq!("10:-5:0".parse::<SnrRange>().unwrap().values(), &[10.0, 5.0, 0.0]);
        assert_eq!("0:3:7".parse::<SnrRange>().unwrap().values(), &[0.0, 3.0, 6.0]);
        for bad in ["", "a", "0:0:1", "0:1", "5:1:0", "0:1:inf"] {
            assert!(bad.parse::<SnrRange>().is_err(), "{bad}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
