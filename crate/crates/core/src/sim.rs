//! Monte Carlo block-error-rate simulation.
//!
//! Trial `t` at SNR index `i` draws everything from its own stream
//! `rng::stream(seed, [i, t])`, and trials are merged in order, so results do
//! not depend on how trials are scheduled across workers.

use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use crate::bounds::noise_psd_for_snr;
use crate::channel::{sample_channel, ChannelKind, ChannelModel};
use crate::codec::{encode_index, total_waveforms, WaveformParams};
use crate::receiver::{detect_efficient, detect_exhaustive, observe};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverKind {
    Efficient,
    Exhaustive,
    /// Runs both receivers and fails on the first disagreement.
    Both,
}

impl ReceiverKind {
    pub fn name(self) -> &'static str {
        match self {
            ReceiverKind::Efficient => "efficient",
            ReceiverKind::Exhaustive => "exhaustive",
            ReceiverKind::Both => "both",
        }
    }
}

/// Channel parameters echoed into every record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSummary {
    pub kind: ChannelKind,
    pub antennas: usize,
    pub rician_k: f64,
    pub rho: f64,
}

impl From<&ChannelModel> for ChannelSummary {
    fn from(m: &ChannelModel) -> Self {
        Self { kind: m.kind, antennas: m.antennas, rician_k: m.rician_k, rho: m.rho }
    }
}

/// Outcome at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerRecord {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub bler: f64,
    /// Half-width of the 95% Wilson score interval.
    pub ci95: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub channel: ChannelSummary,
    pub receiver: ReceiverKind,
}

/// 95% Wilson score interval `(low, high)` for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z / denom * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    let low = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: WaveformParams,
    pub channel: ChannelModel,
    pub snr_db: Vec<f64>,
    pub max_trials: u64,
    pub target_errors: u64,
    pub seed: u64,
    pub receiver: ReceiverKind,
    /// Trials handed to the executor at once.
    pub batch_size: u64,
}

impl SimConfig {
    pub fn new(params: WaveformParams, channel: ChannelModel, snr_db: Vec<f64>, seed: u64) -> Self {
        Self {
            params,
            channel,
            snr_db,
            max_trials: 1_000_000,
            target_errors: 200,
            seed,
            receiver: ReceiverKind::Efficient,
            batch_size: 4096,
        }
    }

    /// Whether trial `trial` at SNR index `snr_idx` ends in a block error.
    pub fn trial(&self, snr_idx: usize, trial: u64) -> Result<bool> {
        let params = &self.params;
        let mut rng = rng::stream(self.seed, &[snr_idx as u64, trial]);
        let total = total_waveforms(params)?;
        let sent = encode_index(rng.random_range(1..=total), params)?;
        let h = sample_channel(&self.channel, &mut rng);
        let n0 = noise_psd_for_snr(params, self.snr_db[snr_idx]);
        let obs = observe(&sent, &h, params, n0, &mut rng);
        let decided = match self.receiver {
            ReceiverKind::Efficient => detect_efficient(&obs, &h, params)?,
            ReceiverKind::Exhaustive => detect_exhaustive(&obs, &h, params)?,
            ReceiverKind::Both => {
                let efficient = detect_efficient(&obs, &h, params)?;
                let exhaustive = detect_exhaustive(&obs, &h, params)?;
                if efficient != exhaustive {
                    return Err(Error::ReceiverMismatch {
                        snr_db: self.snr_db[snr_idx],
                        trial,
                        transmitted: sent.index,
                        efficient,
                        exhaustive,
                    });
                }
                efficient
            }
        };
        Ok(decided != sent.index)
    }
}

/// Evaluates a contiguous range of trials and returns outcomes in order.
pub trait TrialExecutor {
    fn run(&self, trials: Range<u64>, trial: &(dyn Fn(u64) -> Result<bool> + Sync)) -> Result<Vec<bool>>;
}

/// Runs trials one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl TrialExecutor for Sequential {
    fn run(&self, trials: Range<u64>, trial: &(dyn Fn(u64) -> Result<bool> + Sync)) -> Result<Vec<bool>> {
        trials.map(trial).collect()
    }
}

/// Sweeps every SNR point, stopping each at `target_errors` errors or
/// `max_trials` trials, whichever comes first.
pub fn run_bler(config: &SimConfig, executor: &dyn TrialExecutor) -> Result<Vec<BlerRecord>> {
    if config.max_trials == 0 {
        return Err(Error::InvalidParameter("max_trials must be at least 1"));
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be at least 1"));
    }
    config.params.validate()?;
    let mut records = Vec::with_capacity(config.snr_db.len());
    for (idx, &snr_db) in config.snr_db.iter().enumerate() {
        let mut trials = 0u64;
        let mut errors = 0u64;
        'point: while trials < config.max_trials {
            let end = (trials + config.batch_size).min(config.max_trials);
            let outcomes = executor.run(trials..end, &|t| config.trial(idx, t))?;
            for failed in outcomes {
                trials += 1;
                errors += failed as u64;
                if errors >= config.target_errors {
                    break 'point;
                }
            }
        }
        let (ci_low, ci_high) = wilson_interval(errors, trials);
        let bler = errors as f64 / trials as f64;
        records.push(BlerRecord {
            snr_db,
            trials,
            errors,
            bler,
            ci95: 0.5 * (ci_high - ci_low),
            ci_low,
            ci_high,
            seed: config.seed,
            channel: ChannelSummary::from(&config.channel),
            receiver: config.receiver,
        });
    }
    Ok(records)
}
