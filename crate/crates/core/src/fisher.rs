//! Fisher information for joint delay–Doppler estimation and the resulting
//! Cramér–Rao bounds.

use core::f64::consts::PI;

use crate::codec::{WaveformParams, WaveformSymbol};
use crate::{Error, Result};

/// Noise level and occupied subpulse bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherParams {
    pub noise_psd: f64,
    pub bandwidth: f64,
}

impl FisherParams {
    pub fn new(noise_psd: f64, bandwidth: f64) -> Result<Self> {
        if !(noise_psd > 0.0 && noise_psd.is_finite()) {
            return Err(Error::InvalidParameter("noise PSD must be positive"));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter("bandwidth must be positive"));
        }
        Ok(Self { noise_psd, bandwidth })
    }

    /// Noise PSD for an SNR of `snr_db = 10 log10(1 / N0)`.
    pub fn from_snr_db(snr_db: f64, bandwidth: f64) -> Result<Self> {
        Self::new(libm::pow(10.0, -snr_db / 10.0), bandwidth)
    }

    /// `2 / (N0 (1 + N0))`.
    pub fn information_scale(&self) -> f64 {
        2.0 / (self.noise_psd * (1.0 + self.noise_psd))
    }
}

/// Symmetric 2x2 Fisher information matrix over `(τ, ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fim {
    pub delay: f64,
    pub cross: f64,
    pub doppler: f64,
}

impl Fim {
    pub fn determinant(&self) -> f64 {
        self.delay * self.doppler - self.cross * self.cross
    }
}

/// `L - Σ cos(ω0 T + θ_l - θ_{l+1})`; at least 1 for every symbol.
pub fn phase_transition_sum(symbol: &WaveformSymbol, params: &WaveformParams) -> f64 {
    let shift = 2.0 * PI * params.first_tone * params.subpulse_duration;
    let cos_sum: f64 = (0..params.subpulses.saturating_sub(1))
        .map(|l| libm::cos(shift + symbol.phase(params, l) - symbol.phase(params, l + 1)))
        .sum();
    params.subpulses as f64 - cos_sum
}

/// `Σ_l (2l + 1) ω_l`.
pub fn weighted_frequency_sum(symbol: &WaveformSymbol, params: &WaveformParams) -> f64 {
    (0..params.subpulses)
        .map(|l| (2 * l + 1) as f64 * symbol.angular_frequency(params, l))
        .sum()
}

pub fn fim(symbol: &WaveformSymbol, params: &WaveformParams, fp: &FisherParams) -> Fim {
    let c = fp.information_scale();
    let t = params.subpulse_duration;
    let big_l = params.subpulses as f64;
    Fim {
        delay: 2.0 * c * fp.bandwidth * phase_transition_sum(symbol, params) / (big_l * t),
        cross: -c * t * t * weighted_frequency_sum(symbol, params) / 2.0,
        doppler: c * big_l * big_l * t * t / 12.0,
    }
}

/// Delay and Doppler bounds in s² and (rad/s)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crlb {
    pub delay: f64,
    pub doppler: f64,
}

impl Crlb {
    /// `CRLB_τ / T²` and `CRLB_ω (L T)²`.
    pub fn normalised(&self, params: &WaveformParams) -> Crlb {
        let t = params.subpulse_duration;
        let lt = params.duration();
        Crlb { delay: self.delay / (t * t), doppler: self.doppler * lt * lt }
    }
}

/// Bounds from the full information matrix, including the delay–Doppler
/// coupling term.
pub fn crlb_full(symbol: &WaveformSymbol, params: &WaveformParams, fp: &FisherParams) -> Result<Crlb> {
    let c = fp.information_scale();
    let t = params.subpulse_duration;
    let big_l = params.subpulses as f64;
    let b = fp.bandwidth;
    let s = phase_transition_sum(symbol, params);
    let w = weighted_frequency_sum(symbol, params);
    let t3 = t * t * t;
    let denom = 2.0 * big_l * b * s - 3.0 * t3 * w * w;
    if !(denom > 0.0) {
        return Err(Error::SingularFim { determinant: fim(symbol, params, fp).determinant() });
    }
    let delay = big_l * big_l * t / (c * denom);
    let doppler = 24.0 * b * s / (c * big_l * t * t * denom);
    Ok(Crlb { delay, doppler })
}

/// Bounds that ignore the coupling term. The delay bound is `+∞` when every
/// phase transition cosine equals one.
pub fn crlb_simplified(symbol: &WaveformSymbol, params: &WaveformParams, fp: &FisherParams) -> Crlb {
    let c = fp.information_scale();
    let t = params.subpulse_duration;
    let big_l = params.subpulses as f64;
    let s = phase_transition_sum(symbol, params);
    let delay = if s > 0.0 { big_l * t / (c * 2.0 * fp.bandwidth * s) } else { f64::INFINITY };
    Crlb { delay, doppler: 12.0 / (c * big_l * big_l * t * t) }
}
