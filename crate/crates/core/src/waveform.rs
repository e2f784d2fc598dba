//! Complex baseband synthesis and the orthogonal-basis view of a symbol.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::codec::{WaveformParams, WaveformSymbol};
use crate::{Error, Result};

/// Oversampling used when none is requested.
pub const DEFAULT_OVERSAMPLING: usize = 16;

/// Uniformly sampled complex envelope, `s[k] = s(k / sample_rate)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub duration: f64,
}

impl BasebandSignal {
    /// Rectangle-rule energy `sum |s[k]|^2 / fs`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.sample_rate
    }

    /// Rectangle-rule inner product `∫ a(t) b*(t) dt`.
    pub fn inner(&self, other: &BasebandSignal) -> Complex64 {
        let acc: Complex64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b.conj()).sum();
        acc / self.sample_rate
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.sample_rate
    }

    /// Rectangle-rule `∫ s(t) s*(t - τ) e^{jωt} dt` with `τ = shift / fs`.
    ///
    /// Unnormalised; divide by the energy to compare with
    /// [`crate::ambiguity::caf`]. The error is a power series in `1/fs`, so
    /// results at several sample rates extrapolate to a sharper estimate.
    pub fn sampled_ambiguity(&self, shift: i64, omega: f64) -> Complex64 {
        let n = self.samples.len() as i64;
        let start = shift.max(0);
        let end = (n + shift).min(n);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in start..end {
            let lagged = self.samples[(k - shift) as usize].conj();
            acc += self.samples[k as usize] * lagged * Complex64::from_polar(1.0, omega * self.time(k as usize));
        }
        acc / self.sample_rate
    }
}

/// Samples per subpulse for a given oversampling factor.
pub fn samples_per_subpulse(params: &WaveformParams, oversampling: usize) -> usize {
    oversampling * params.subpulses * params.step_multiple as usize
}

/// Samples the envelope with `oversampling * L * n` samples per subpulse.
///
/// The phase reference restarts at every subpulse boundary.
pub fn synthesize(symbol: &WaveformSymbol, params: &WaveformParams, oversampling: usize) -> Result<BasebandSignal> {
    params.validate()?;
    if oversampling == 0 {
        return Err(Error::InvalidParameter("oversampling must be positive"));
    }
    let per = samples_per_subpulse(params, oversampling);
    let t = params.subpulse_duration;
    let sample_rate = per as f64 / t;
    let amplitude = libm::sqrt(params.energy / params.duration());
    let mut samples = Vec::with_capacity(per * params.subpulses);
    for l in 0..params.subpulses {
        let f = params.tone_frequency(symbol.perm[l]);
        let theta = symbol.phase(params, l);
        for k in 0..per {
            let local = k as f64 / sample_rate;
            samples.push(Complex64::from_polar(amplitude, 2.0 * PI * f * local + theta));
        }
    }
    Ok(BasebandSignal { samples, sample_rate, duration: params.duration() })
}

/// A symbol as an `L x L` one-hot matrix: column `l` holds
/// `sqrt(E/L) * exp(j theta_l)` in row `perm[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSymbolMatrix {
    pub tones: Vec<usize>,
    pub phases: Vec<usize>,
    pub amplitude: f64,
    pub psk_order: usize,
}

impl BasisSymbolMatrix {
    pub fn size(&self) -> usize {
        self.tones.len()
    }

    pub fn entry(&self, tone: usize, subpulse: usize) -> Complex64 {
        if self.tones[subpulse] == tone {
            let theta = 2.0 * PI * self.phases[subpulse] as f64 / self.psk_order as f64;
            Complex64::from_polar(self.amplitude, theta)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Row-major dense form.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.size();
        (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| self.entry(r, c)).collect()
    }

    /// Reads tones and phases back from a dense one-hot matrix.
    pub fn from_dense(dense: &[Complex64], size: usize, psk_order: usize) -> Result<Self> {
        if dense.len() != size * size {
            return Err(Error::Shape { rows: dense.len(), cols: size });
        }
        let mut tones = Vec::with_capacity(size);
        let mut phases = Vec::with_capacity(size);
        let mut amplitude = 0.0;
        for c in 0..size {
            let mut hot = (0..size).filter(|&r| dense[r * size + c].norm() > 0.0);
            let row = hot.next().ok_or(Error::InvalidPermutation)?;
            if hot.next().is_some() {
                return Err(Error::InvalidPermutation);
            }
            let z = dense[row * size + c];
            let step = 2.0 * PI / psk_order as f64;
            let angle = z.arg();
            let angle = if angle < 0.0 { angle + 2.0 * PI } else { angle };
            let digit = libm::round(angle / step) as usize % psk_order;
            amplitude = z.norm();
            tones.push(row);
            phases.push(digit);
        }
        let mut seen = alloc::vec![false; size];
        for &t in &tones {
            if seen[t] {
                return Err(Error::InvalidPermutation);
            }
            seen[t] = true;
        }
        Ok(Self { tones, phases, amplitude, psk_order })
    }
}

pub fn to_basis(symbol: &WaveformSymbol, params: &WaveformParams) -> BasisSymbolMatrix {
    BasisSymbolMatrix {
        tones: symbol.perm.clone(),
        phases: symbol.phase_idx.clone(),
        amplitude: libm::sqrt(params.energy / params.subpulses as f64),
        psk_order: params.psk_order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode_index, total_waveforms};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_tone_has_constant_modulus_and_energy() {
        let mut p = WaveformParams::new(1, 1);
        p.energy = 2.5;
        p.subpulse_duration = 1e-6;
        let s = synthesize(&encode_index(1, &p).unwrap(), &p, 16).unwrap();
        let amp = (p.energy / p.duration()).sqrt();
        assert!(s.samples.iter().all(|z| (z.norm() - amp).abs() < 1e-9 * amp));
        assert!((s.energy() - p.energy).abs() < 1e-3 * p.energy);
    }

    #[test]
    fn energy_does_not_depend_on_symbol() {
        let mut p = WaveformParams::new(4, 4);
        p.energy = 3.0;
        p.first_tone = 1.5;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let total = total_waveforms(&p).unwrap();
        for _ in 0..20 {
            let s = encode_index(rng.random_range(1..=total), &p).unwrap();
            let e = synthesize(&s, &p, DEFAULT_OVERSAMPLING).unwrap().energy();
            assert!((e - 3.0).abs() < 1e-3 * 3.0);
        }
    }

    #[test]
    fn tones_are_orthogonal_over_a_subpulse() {
        let p = WaveformParams::new(4, 1);
        let fs = samples_per_subpulse(&p, 64) as f64 / p.subpulse_duration;
        let per = samples_per_subpulse(&p, 64);
        let tone = |k: usize| -> Vec<Complex64> {
            (0..per)
                .map(|i| Complex64::from_polar(1.0, 2.0 * PI * p.tone_frequency(k) * i as f64 / fs))
                .collect()
        };
        for m in 0..4 {
            for n in 0..4 {
                let a = tone(m);
                let b = tone(n);
                let ip: Complex64 = a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum::<Complex64>() / fs;
                if m == n {
                    assert!((ip.re - p.subpulse_duration).abs() < 1e-9);
                } else {
                    assert!(ip.norm() < 1e-6 * p.subpulse_duration);
                }
            }
        }
    }

    #[test]
    fn first_symbol_tones_two_subpulses() {
        let p = WaveformParams::new(2, 2);
        let s = synthesize(&encode_index(1, &p).unwrap(), &p, 8).unwrap();
        let per = samples_per_subpulse(&p, 8);
        let amp = (0.5f64).sqrt();
        for z in &s.samples[..per] {
            assert!((z - Complex64::new(amp, 0.0)).norm() < 1e-12);
        }
        // One full cycle across subpulse 1, starting at zero phase.
        let second = &s.samples[per..];
        assert!((second[0] - Complex64::new(amp, 0.0)).norm() < 1e-12);
        assert!((second[per / 4] - Complex64::new(0.0, amp)).norm() < 1e-12);
        assert!((second[per / 2] - Complex64::new(-amp, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sampled_inner_products_match_basis_geometry() {
        let p = WaveformParams::new(4, 4);
        let total = total_waveforms(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let a = encode_index(rng.random_range(1..=total), &p).unwrap();
            let b = encode_index(rng.random_range(1..=total), &p).unwrap();
            let sa = synthesize(&a, &p, DEFAULT_OVERSAMPLING).unwrap();
            let sb = synthesize(&b, &p, DEFAULT_OVERSAMPLING).unwrap();
            let analytic: f64 = (0..4)
                .filter(|&l| a.perm[l] == b.perm[l])
                .map(|l| (b.phase(&p, l) - a.phase(&p, l)).cos())
                .sum::<f64>()
                * p.energy
                / 4.0;
            let numeric = sa.inner(&sb).re;
            assert!((numeric - analytic).abs() <= 1e-4 * analytic.abs().max(p.energy / 4.0));
        }
    }

    #[test]
    fn zero_oversampling_is_rejected() {
        let p = WaveformParams::new(2, 2);
        assert!(synthesize(&encode_index(1, &p).unwrap(), &p, 0).is_err());
    }

    #[test]
    fn basis_view_round_trips() {
        let mut p = WaveformParams::new(5, 4);
        p.energy = 5.0;
        let total = total_waveforms(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let id = to_basis(&encode_index(1, &p).unwrap(), &p);
        for r in 0..5 {
            for c in 0..5 {
                let e = id.entry(r, c);
                if r == c {
                    assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-12);
                } else {
                    assert_eq!(e, Complex64::new(0.0, 0.0));
                }
            }
        }
        for _ in 0..50 {
            let s = encode_index(rng.random_range(1..=total), &p).unwrap();
            let b = to_basis(&s, &p);
            let dense = b.to_dense();
            for c in 0..5 {
                let col: f64 = (0..5).map(|r| dense[r * 5 + c].norm_sqr()).sum();
                assert!((col - p.energy / 5.0).abs() < 1e-12);
            }
            let back = BasisSymbolMatrix::from_dense(&dense, 5, 4).unwrap();
            assert_eq!(back.tones, s.perm);
            assert_eq!(back.phases, s.phase_idx);
        }
    }
}
