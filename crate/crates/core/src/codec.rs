//! Message index <-> waveform mapping.
//!
//! Index `i` (1-based) splits into a permutation rank `(i - 1) / M^L` and a
//! phase word `(i - 1) mod M^L`. The rank is unranked with the Lehmer code in
//! lexicographic order, so rank 0 is the ascending tone sequence. The phase
//! word is written in base `M` with the most significant digit on subpulse 0.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result};

/// Static design parameters shared by every waveform in the constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformParams {
    /// Number of subpulses `L`, which is also the number of tones.
    pub subpulses: usize,
    /// PSK order `M`.
    pub psk_order: usize,
    /// Subpulse duration `T` in seconds.
    pub subpulse_duration: f64,
    /// First tone `f0` in Hz.
    pub first_tone: f64,
    /// Tone spacing multiple `n`, so the step is `n / T` Hz.
    pub step_multiple: u32,
    /// Total waveform energy `E`.
    pub energy: f64,
}

impl WaveformParams {
    /// `L` subpulses, `M`-PSK, unit duration and energy, `f0 = 0`, `Δf = 1/T`.
    pub fn new(subpulses: usize, psk_order: usize) -> Self {
        Self {
            subpulses,
            psk_order,
            subpulse_duration: 1.0,
            first_tone: 0.0,
            step_multiple: 1,
            energy: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subpulses == 0 {
            return Err(Error::InvalidParameter("L must be at least 1"));
        }
        if self.psk_order == 0 {
            return Err(Error::InvalidParameter("M must be at least 1"));
        }
        if !(self.subpulse_duration > 0.0) || !self.subpulse_duration.is_finite() {
            return Err(Error::InvalidParameter("T must be positive"));
        }
        if self.step_multiple == 0 {
            return Err(Error::InvalidParameter("tone step multiple must be positive"));
        }
        if !(self.energy > 0.0) || !self.energy.is_finite() {
            return Err(Error::InvalidParameter("E must be positive"));
        }
        if !self.first_tone.is_finite() {
            return Err(Error::InvalidParameter("f0 must be finite"));
        }
        Ok(())
    }

    /// Tone spacing `Δf = n / T` in Hz.
    pub fn tone_spacing(&self) -> f64 {
        f64::from(self.step_multiple) / self.subpulse_duration
    }

    /// Frequency of tone `k` (0-based) in Hz.
    pub fn tone_frequency(&self, tone: usize) -> f64 {
        self.first_tone + self.tone_spacing() * tone as f64
    }

    /// Angular frequency of tone `k` in rad/s.
    pub fn tone_angular(&self, tone: usize) -> f64 {
        2.0 * PI * self.tone_frequency(tone)
    }

    /// PSK phase of digit `m` in radians.
    pub fn phase(&self, digit: usize) -> f64 {
        2.0 * PI * digit as f64 / self.psk_order as f64
    }

    /// Whole waveform duration `L T`.
    pub fn duration(&self) -> f64 {
        self.subpulses as f64 * self.subpulse_duration
    }
}

/// One transmittable waveform.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WaveformSymbol {
    /// 1-based message index.
    pub index: u128,
    /// Tone index carried by each subpulse.
    pub perm: Vec<usize>,
    /// PSK digit carried by each subpulse.
    pub phase_idx: Vec<usize>,
}

impl WaveformSymbol {
    /// Builds a symbol from its tone and phase sequences, computing its index.
    pub fn from_parts(perm: Vec<usize>, phase_idx: Vec<usize>, params: &WaveformParams) -> Result<Self> {
        let index = decode_parts(&perm, &phase_idx, params)?;
        Ok(Self { index, perm, phase_idx })
    }

    /// Phase of subpulse `l` in radians.
    pub fn phase(&self, params: &WaveformParams, subpulse: usize) -> f64 {
        params.phase(self.phase_idx[subpulse])
    }

    /// Angular frequency of subpulse `l` in rad/s.
    pub fn angular_frequency(&self, params: &WaveformParams, subpulse: usize) -> f64 {
        params.tone_angular(self.perm[subpulse])
    }
}

pub fn factorial(n: usize) -> Result<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k)).ok_or(Error::Overflow("L!"))
}

/// `M^L`, the number of phase words.
pub fn phase_words(params: &WaveformParams) -> Result<u128> {
    let exp = u32::try_from(params.subpulses).map_err(|_| Error::Overflow("M^L"))?;
    (params.psk_order as u128).checked_pow(exp).ok_or(Error::Overflow("M^L"))
}

/// Constellation size `M_T = L! * M^L`.
pub fn total_waveforms(params: &WaveformParams) -> Result<u128> {
    params.validate()?;
    factorial(params.subpulses)?
        .checked_mul(phase_words(params)?)
        .ok_or(Error::Overflow("L! * M^L"))
}

/// `floor(log2 M_T)`, computed on the integer.
pub fn bits_per_block(params: &WaveformParams) -> Result<u32> {
    let total = total_waveforms(params)?;
    Ok(127 - total.leading_zeros())
}

/// Lexicographic unranking of a permutation of `0..n`.
pub fn unrank_permutation(mut rank: u128, n: usize) -> Result<Vec<usize>> {
    if rank >= factorial(n)? {
        return Err(Error::IndexOutOfRange { index: rank, max: factorial(n)? - 1 });
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut perm = Vec::with_capacity(n);
    for pos in 0..n {
        let radix = factorial(n - 1 - pos)?;
        let digit = (rank / radix) as usize;
        rank %= radix;
        perm.push(remaining.remove(digit));
    }
    Ok(perm)
}

/// Lexicographic rank of a permutation of `0..n`.
pub fn rank_permutation(perm: &[usize]) -> Result<u128> {
    let n = perm.len();
    let mut seen = alloc::vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation);
        }
        seen[p] = true;
    }
    let mut rank = 0u128;
    for (pos, &p) in perm.iter().enumerate() {
        let smaller_later = perm[pos + 1..].iter().filter(|&&q| q < p).count() as u128;
        rank += smaller_later * factorial(n - 1 - pos)?;
    }
    Ok(rank)
}

/// Maps a 1-based index to its waveform.
pub fn encode_index(index: u128, params: &WaveformParams) -> Result<WaveformSymbol> {
    let total = total_waveforms(params)?;
    if index == 0 || index > total {
        return Err(Error::IndexOutOfRange { index, max: total });
    }
    let words = phase_words(params)?;
    let zero_based = index - 1;
    let perm = unrank_permutation(zero_based / words, params.subpulses)?;
    let mut word = zero_based % words;
    let m = params.psk_order as u128;
    let mut phase_idx = alloc::vec![0usize; params.subpulses];
    for digit in phase_idx.iter_mut().rev() {
        *digit = (word % m) as usize;
        word /= m;
    }
    Ok(WaveformSymbol { index, perm, phase_idx })
}

/// Inverse of [`encode_index`] on raw tone and phase sequences.
pub fn decode_parts(perm: &[usize], phase_idx: &[usize], params: &WaveformParams) -> Result<u128> {
    params.validate()?;
    if perm.len() != params.subpulses || phase_idx.len() != params.subpulses {
        return Err(Error::InvalidParameter("tone and phase sequences must have length L"));
    }
    let rank = rank_permutation(perm)?;
    let m = params.psk_order as u128;
    let mut word = 0u128;
    for (position, &digit) in phase_idx.iter().enumerate() {
        if digit >= params.psk_order {
            return Err(Error::PhaseOutOfRange { position, digit, order: params.psk_order });
        }
        word = word * m + digit as u128;
    }
    let words = phase_words(params)?;
    rank.checked_mul(words)
        .and_then(|v| v.checked_add(word + 1))
        .ok_or(Error::Overflow("index"))
}

/// Inverse of [`encode_index`].
pub fn decode_symbol(symbol: &WaveformSymbol, params: &WaveformParams) -> Result<u128> {
    decode_parts(&symbol.perm, &symbol.phase_idx, params)
}

/// Steps `perm` to its lexicographic successor. Returns `false` after the last one.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}
