//! Coherent ML detection in the tone/subpulse basis.
//!
//! The efficient receiver takes the best phase per (tone, subpulse) cell and
//! then solves a maximum-weight assignment of tones to subpulses. Because the
//! ML metric is additive over subpulses this is exactly the joint argmax.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::assignment::assign_max;
use crate::channel::complex_normal;
use crate::codec::{decode_parts, next_permutation, total_waveforms, WaveformParams, WaveformSymbol};
use crate::linalg::Matrix;
use crate::{Error, Result};

/// Largest constellation the exhaustive receiver will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Matched-filter outputs, one complex value per (antenna, tone, subpulse).
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub antennas: usize,
    pub subpulses: usize,
    data: Vec<Complex64>,
}

impl Observation {
    pub fn zeros(antennas: usize, subpulses: usize) -> Self {
        Self { antennas, subpulses, data: alloc::vec![Complex64::new(0.0, 0.0); antennas * subpulses * subpulses] }
    }

    fn offset(&self, antenna: usize, tone: usize, subpulse: usize) -> usize {
        (antenna * self.subpulses + tone) * self.subpulses + subpulse
    }

    pub fn get(&self, antenna: usize, tone: usize, subpulse: usize) -> Complex64 {
        self.data[self.offset(antenna, tone, subpulse)]
    }

    pub fn set(&mut self, antenna: usize, tone: usize, subpulse: usize, value: Complex64) {
        let i = self.offset(antenna, tone, subpulse);
        self.data[i] = value;
    }
}

/// Received projections for `symbol` through channel `h`, with complex
/// Gaussian noise of variance `noise_psd` per dimension.
pub fn observe<R: Rng + ?Sized>(
    symbol: &WaveformSymbol,
    h: &[Complex64],
    params: &WaveformParams,
    noise_psd: f64,
    rng: &mut R,
) -> Observation {
    let big_l = params.subpulses;
    let mut obs = Observation::zeros(h.len(), big_l);
    let amp = libm::sqrt(params.energy / big_l as f64);
    let sigma = libm::sqrt(noise_psd);
    for (a, &ha) in h.iter().enumerate() {
        for n in 0..big_l {
            for l in 0..big_l {
                let mut v = if noise_psd > 0.0 { complex_normal(rng) * sigma } else { Complex64::new(0.0, 0.0) };
                if symbol.perm[l] == n {
                    v += ha * Complex64::from_polar(amp, symbol.phase(params, l));
                }
                obs.set(a, n, l, v);
            }
        }
    }
    obs
}

/// Maximal-ratio combining `z[n][l] = Σ_a conj(h_a) r[a][n][l]`.
pub fn combine(obs: &Observation, h: &[Complex64]) -> Matrix<Complex64> {
    Matrix::from_fn(obs.subpulses, obs.subpulses, |n, l| {
        h.iter().enumerate().map(|(a, ha)| ha.conj() * obs.get(a, n, l)).sum()
    })
}

/// `(M L) x L` real correlations; row `n M + m` holds tone `n` at phase `m`.
pub fn correlation_matrix(obs: &Observation, h: &[Complex64], params: &WaveformParams) -> Matrix<f64> {
    let z = combine(obs, h);
    let m_order = params.psk_order;
    let rotations: Vec<Complex64> =
        (0..m_order).map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 / m_order as f64)).collect();
    Matrix::from_fn(m_order * obs.subpulses, obs.subpulses, |row, l| {
        (rotations[row % m_order] * z[(row / m_order, l)]).re
    })
}

/// Per-cell phase maximum. Returns `Y` (tone x subpulse) and the winning row
/// of `X` for every cell; ties go to the smaller phase.
pub fn block_max(x: &Matrix<f64>, psk_order: usize) -> (Matrix<f64>, Matrix<usize>) {
    let big_l = x.cols();
    let mut best = Matrix::filled(big_l, big_l, f64::NEG_INFINITY);
    let mut rows = Matrix::filled(big_l, big_l, 0usize);
    for n in 0..big_l {
        for l in 0..big_l {
            for m in 0..psk_order {
                let row = n * psk_order + m;
                if x[(row, l)] > best[(n, l)] {
                    best[(n, l)] = x[(row, l)];
                    rows[(n, l)] = row;
                }
            }
        }
    }
    (best, rows)
}

/// Block-max followed by assignment. Returns the 1-based symbol index.
pub fn detect_efficient(obs: &Observation, h: &[Complex64], params: &WaveformParams) -> Result<u128> {
    let x = correlation_matrix(obs, h, params);
    let (y, rows) = block_max(&x, params.psk_order);
    let assignment = assign_max(&y)?;
    let perm = assignment.rows;
    // Within-block offset of the winning row is the phase digit.
    let phases: Vec<usize> = perm.iter().enumerate().map(|(l, &n)| rows[(n, l)] % params.psk_order).collect();
    decode_parts(&perm, &phases, params)
}

fn metric(x: &Matrix<f64>, perm: &[usize], phases: &[usize], psk_order: usize) -> f64 {
    let mut acc = 0.0;
    for l in 0..perm.len() {
        acc += x[(perm[l] * psk_order + phases[l], l)];
    }
    acc
}

/// `ξ = Re{Σ_l conj(s_l) (h^H r)_l}` for a candidate symbol.
pub fn decision_variable(symbol: &WaveformSymbol, x: &Matrix<f64>, params: &WaveformParams) -> f64 {
    libm::sqrt(params.energy / params.subpulses as f64) * metric(x, &symbol.perm, &symbol.phase_idx, params.psk_order)
}

/// Brute-force ML over every symbol in index order; ties keep the first.
pub fn detect_exhaustive(obs: &Observation, h: &[Complex64], params: &WaveformParams) -> Result<u128> {
    let total = total_waveforms(params)?;
    if total > EXHAUSTIVE_LIMIT {
        return Err(Error::EnumerationTooLarge { size: total, limit: EXHAUSTIVE_LIMIT });
    }
    let x = correlation_matrix(obs, h, params);
    let big_l = params.subpulses;
    let m_order = params.psk_order;
    let mut perm: Vec<usize> = (0..big_l).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_index = 1u128;
    let mut index = 1u128;
    loop {
        let mut phases = alloc::vec![0usize; big_l];
        loop {
            let v = metric(&x, &perm, &phases, m_order);
            if v > best {
                best = v;
                best_index = index;
            }
            index += 1;
            // Odometer with the last subpulse as least significant digit.
            let mut pos = big_l;
            while pos > 0 {
                pos -= 1;
                phases[pos] += 1;
                if phases[pos] < m_order {
                    break;
                }
                phases[pos] = 0;
            }
            if phases.iter().all(|&d| d == 0) {
                break;
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best_index)
}
