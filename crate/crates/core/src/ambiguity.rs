//! Analytic ambiguity function of a permuted, phase-coded stepped-frequency
//! waveform.
//!
//! All evaluations use the unit-energy envelope, so `|A(0, 0)| = 1`.
//! The complex AF is a double sum over subpulse pairs `(l, n)` of shifted
//! single-subpulse AFs; only pairs with `|τ + (n - l) T| < T` contribute.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::codec::{encode_index, total_waveforms, WaveformParams, WaveformSymbol};
use crate::rng;
use crate::{Error, Result};

/// Below this `|ω T|` the single-subpulse AF switches to its Taylor series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// `(e^{jωa} - 1) / (jω)` for a subpulse overlap of length `a`.
fn overlap_integral(omega: f64, a: f64, t: f64) -> Complex64 {
    if (omega * t).abs() < SERIES_THRESHOLD {
        let x = omega * a;
        // a * (1 + jx/2 - x^2/6)
        return Complex64::new(a * (1.0 - x * x / 6.0), a * x / 2.0);
    }
    let x = omega * a;
    let half = libm::sin(0.5 * x);
    // e^{jx} - 1 = -2 sin^2(x/2) + j sin x
    let num = Complex64::new(-2.0 * half * half, libm::sin(x));
    Complex64::new(num.im / omega, -num.re / omega)
}

/// Complex AF of a unit-amplitude rectangular pulse of length `T`.
pub fn subpulse_caf(tau: f64, omega: f64, t: f64) -> Complex64 {
    if tau <= -t || tau >= t {
        return Complex64::new(0.0, 0.0);
    }
    if tau < 0.0 {
        overlap_integral(omega, tau + t, t)
    } else {
        Complex64::from_polar(1.0, omega * tau) * overlap_integral(omega, t - tau, t)
    }
}

/// Range of `n - l` offsets whose subpulses overlap at delay `tau`.
fn offset_range(tau: f64, t: f64, subpulses: usize) -> (i64, i64) {
    let centre = -tau / t;
    let lo = libm::floor(centre - 1.0) as i64;
    let hi = libm::ceil(centre + 1.0) as i64;
    let max = subpulses as i64 - 1;
    (lo.max(-max), hi.min(max))
}

/// Complex ambiguity function `∫ s(t) s*(t - τ) e^{jωt} dt` of the unit-energy
/// waveform.
pub fn caf(symbol: &WaveformSymbol, params: &WaveformParams, tau: f64, omega: f64) -> Complex64 {
    let t = params.subpulse_duration;
    let big_l = params.subpulses;
    let (lo, hi) = offset_range(tau, t, big_l);
    let mut acc = Complex64::new(0.0, 0.0);
    for offset in lo..=hi {
        for l in 0..big_l {
            let n = l as i64 + offset;
            if n < 0 || n >= big_l as i64 {
                continue;
            }
            let n = n as usize;
            let shifted = tau + offset as f64 * t;
            let w_l = symbol.angular_frequency(params, l);
            let w_n = symbol.angular_frequency(params, n);
            let base = subpulse_caf(shifted, omega - (w_n - w_l), t);
            if base == Complex64::new(0.0, 0.0) {
                continue;
            }
            let phase = omega * l as f64 * t + w_n * shifted + symbol.phase(params, l) - symbol.phase(params, n);
            acc += base * Complex64::from_polar(1.0, phase);
        }
    }
    acc / params.duration()
}

/// `|A(τ, 0)|` along `taus`.
pub fn zero_doppler_cut(symbol: &WaveformSymbol, params: &WaveformParams, taus: &[f64]) -> Vec<f64> {
    taus.iter().map(|&tau| caf(symbol, params, tau, 0.0).norm()).collect()
}

/// Symbol-independent zero-delay cut
/// `|Â_p(0, ω)| |Σ_l e^{jωlT}| / (L T)`, via the Dirichlet kernel.
pub fn zero_delay_cut(params: &WaveformParams, omegas: &[f64]) -> Vec<f64> {
    let t = params.subpulse_duration;
    let big_l = params.subpulses as f64;
    omegas
        .iter()
        .map(|&omega| {
            let pulse = subpulse_caf(0.0, omega, t).norm();
            let half = 0.5 * omega * t;
            let denom = libm::sin(half);
            let dirichlet = if denom.abs() < 1e-6 {
                (0..params.subpulses)
                    .map(|l| Complex64::from_polar(1.0, omega * l as f64 * t))
                    .sum::<Complex64>()
                    .norm()
            } else {
                (libm::sin(big_l * half) / denom).abs()
            };
            pulse * dirichlet / params.duration()
        })
        .collect()
}

/// Points per axis of the default grid.
pub const DEFAULT_GRID_POINTS: usize = 513;

/// Uniform, origin-symmetric delay–Doppler grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub tau_max: f64,
    pub tau_points: usize,
    pub omega_max: f64,
    pub omega_points: usize,
}

fn symmetric_axis(max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return alloc::vec![0.0];
    }
    let span = (points - 1) as f64;
    (0..points).map(|k| max * (2.0 * k as f64 - span) / span).collect()
}

impl GridSpec {
    /// `τ ∈ [-LT, LT]`, `ω ∈ [-2π L Δf, 2π L Δf]`, `points x points`.
    pub fn covering(params: &WaveformParams, points: usize) -> Self {
        Self {
            tau_max: params.duration(),
            tau_points: points,
            omega_max: 2.0 * PI * params.subpulses as f64 * params.tone_spacing(),
            omega_points: points,
        }
    }

    /// The grid PSL statistics are quoted on: 512 cells per axis, so 513
    /// points. An odd count keeps the origin and every `τ = kT`,
    /// `ω = 2πk/T` lattice point on the grid, which is where the
    /// stepped-frequency sidelobe ridges peak.
    pub fn default_for(params: &WaveformParams) -> Self {
        Self::covering(params, DEFAULT_GRID_POINTS)
    }

    pub fn taus(&self) -> Vec<f64> {
        symmetric_axis(self.tau_max, self.tau_points)
    }

    pub fn omegas(&self) -> Vec<f64> {
        symmetric_axis(self.omega_max, self.omega_points)
    }

    pub fn tau_step(&self) -> f64 {
        if self.tau_points > 1 { 2.0 * self.tau_max / (self.tau_points - 1) as f64 } else { 0.0 }
    }

    pub fn omega_step(&self) -> f64 {
        if self.omega_points > 1 { 2.0 * self.omega_max / (self.omega_points - 1) as f64 } else { 0.0 }
    }
}

/// Main-lobe region removed before taking the peak sidelobe: points with
/// `|τ| < tau_half_width` and `|ω| < omega_half_width` are excluded.
///
/// Inside `|τ| < T` every subpulse still overlaps itself, and for a permuted
/// tone order that self-overlap forms a tilted ridge reaching well past the
/// first zero-delay null. The default therefore removes the whole strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExclusionSpec {
    pub tau_half_width: f64,
    pub omega_half_width: f64,
}

impl ExclusionSpec {
    /// `|τ| < T` at every Doppler.
    pub fn default_for(params: &WaveformParams) -> Self {
        Self { tau_half_width: params.subpulse_duration, omega_half_width: f64::INFINITY }
    }

    pub fn excludes(&self, tau: f64, omega: f64) -> bool {
        tau.abs() < self.tau_half_width && omega.abs() < self.omega_half_width
    }

    fn excludes_row(&self, tau: f64, grid: &GridSpec) -> bool {
        tau.abs() < self.tau_half_width && grid.omega_max < self.omega_half_width
    }
}

/// Evaluates `|A(τ, ω)|` along a uniform Doppler axis for one delay at a time.
///
/// Each overlapping pair contributes
/// `e^{j(c - Δ s)} e^{jω(lT + s)} (e^{j(ω - Δ) a} - 1) / (j(ω - Δ))`, and both
/// exponentials advance by a fixed phasor per grid step.
#[derive(Debug, Clone)]
pub struct RowEvaluator<'a> {
    symbol: &'a WaveformSymbol,
    params: &'a WaveformParams,
    omega_start: f64,
    omega_step: f64,
    acc: Vec<Complex64>,
    /// `1 / (ω_k - Δ_d)` for every tone-index difference `d`, row-major by `d + L - 1`.
    reciprocals: Vec<f64>,
}

impl<'a> RowEvaluator<'a> {
    pub fn new(symbol: &'a WaveformSymbol, params: &'a WaveformParams, omega_start: f64, omega_step: f64, points: usize) -> Self {
        let big_l = params.subpulses as i64;
        let mut reciprocals = Vec::with_capacity((2 * big_l as usize - 1) * points);
        for d in -(big_l - 1)..big_l {
            let delta = 2.0 * PI * params.tone_spacing() * d as f64;
            reciprocals.extend((0..points).map(|k| 1.0 / (omega_start + k as f64 * omega_step - delta)));
        }
        Self {
            symbol,
            params,
            omega_start,
            omega_step,
            acc: alloc::vec![Complex64::new(0.0, 0.0); points],
            reciprocals,
        }
    }

    pub fn for_grid(symbol: &'a WaveformSymbol, params: &'a WaveformParams, grid: &GridSpec) -> Self {
        let start = if grid.omega_points > 1 { -grid.omega_max } else { 0.0 };
        Self::new(symbol, params, start, grid.omega_step(), grid.omega_points)
    }

    /// `|A(τ, ω_k)|` for every grid Doppler `ω_k`.
    pub fn row(&mut self, tau: f64, out: &mut [f64]) {
        let params = self.params;
        let symbol = self.symbol;
        let t = params.subpulse_duration;
        let big_l = params.subpulses;
        let points = self.acc.len();
        assert_eq!(out.len(), points);
        self.acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));

        let (lo, hi) = offset_range(tau, t, big_l);
        for offset in lo..=hi {
            let shifted = tau + offset as f64 * t;
            if shifted <= -t || shifted >= t {
                continue;
            }
            let start = shifted.max(0.0);
            let overlap = t - shifted.abs();
            for l in 0..big_l {
                let n = l as i64 + offset;
                if n < 0 || n >= big_l as i64 {
                    continue;
                }
                let n = n as usize;
                let w_l = symbol.angular_frequency(params, l);
                let w_n = symbol.angular_frequency(params, n);
                let delta = w_n - w_l;
                let constant = w_n * shifted + symbol.phase(params, l) - symbol.phase(params, n) - delta * start;
                let lead = l as f64 * t + start;
                let d = symbol.perm[n] as i64 - symbol.perm[l] as i64 + big_l as i64 - 1;
                let recip = &self.reciprocals[d as usize * points..(d as usize + 1) * points];

                let mut outer = Complex64::from_polar(1.0, constant + self.omega_start * lead);
                let outer_step = Complex64::from_polar(1.0, self.omega_step * lead);
                let mut inner = Complex64::from_polar(1.0, (self.omega_start - delta) * overlap);
                let inner_step = Complex64::from_polar(1.0, self.omega_step * overlap);

                for (k, (slot, &r)) in self.acc.iter_mut().zip(recip).enumerate() {
                    let w = self.omega_start + k as f64 * self.omega_step - delta;
                    let g = if (w * overlap).abs() < 1e-3 {
                        let x = w * overlap;
                        let x2 = x * x;
                        Complex64::new(
                            overlap * (1.0 - x2 / 6.0 + x2 * x2 / 120.0),
                            overlap * (x / 2.0 - x * x2 / 24.0),
                        )
                    } else {
                        let num = inner - 1.0;
                        Complex64::new(num.im * r, -num.re * r)
                    };
                    *slot += outer * g;
                    outer *= outer_step;
                    inner *= inner_step;
                }
            }
        }
        let scale = 1.0 / params.duration();
        for (o, z) in out.iter_mut().zip(&self.acc) {
            *o = z.norm() * scale;
        }
    }
}

/// Sampled `|A(τ, ω)|` with its axes. `values[i][k]` pairs `taus[i]` with `omegas[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface {
    pub taus: Vec<f64>,
    pub omegas: Vec<f64>,
    /// Row-major, one row per delay.
    pub values: Vec<f64>,
    /// `|A(0, 0)|`, which is 1 under the unit-energy convention.
    pub normalisation: f64,
    pub exclusion: Option<ExclusionSpec>,
}

impl AmbiguitySurface {
    pub fn value(&self, tau_idx: usize, omega_idx: usize) -> f64 {
        self.values[tau_idx * self.omegas.len() + omega_idx]
    }
}

pub fn surface(symbol: &WaveformSymbol, params: &WaveformParams, grid: &GridSpec) -> AmbiguitySurface {
    let taus = grid.taus();
    let omegas = grid.omegas();
    let mut values = alloc::vec![0.0; taus.len() * omegas.len()];
    let mut eval = RowEvaluator::for_grid(symbol, params, grid);
    for (i, &tau) in taus.iter().enumerate() {
        eval.row(tau, &mut values[i * omegas.len()..(i + 1) * omegas.len()]);
    }
    AmbiguitySurface {
        taus,
        omegas,
        values,
        normalisation: caf(symbol, params, 0.0, 0.0).norm(),
        exclusion: None,
    }
}

/// Largest `|A|` over grid points outside the main-lobe exclusion, relative
/// to `|A(0, 0)|`.
///
/// Only rows with `τ >= 0` are evaluated: the grid and the exclusion are
/// origin-symmetric and `|A(-τ, -ω)| = |A(τ, ω)|`.
pub fn peak_sidelobe(
    symbol: &WaveformSymbol,
    params: &WaveformParams,
    grid: &GridSpec,
    exclusion: &ExclusionSpec,
) -> Result<f64> {
    let taus = grid.taus();
    let omegas = grid.omegas();
    let mut row = alloc::vec![0.0; omegas.len()];
    let mut eval = RowEvaluator::for_grid(symbol, params, grid);
    let mut peak: Option<f64> = None;
    for &tau in taus.iter().filter(|&&tau| tau >= 0.0) {
        if exclusion.excludes_row(tau, grid) {
            continue;
        }
        eval.row(tau, &mut row);
        for (&omega, &v) in omegas.iter().zip(&row) {
            if !exclusion.excludes(tau, omega) {
                peak = Some(peak.map_or(v, |p: f64| p.max(v)));
            }
        }
    }
    let peak = peak.ok_or(Error::EmptyGrid)?;
    Ok(peak / caf(symbol, params, 0.0, 0.0).norm())
}

/// Draws sample `index` of a PSL study: a uniform random waveform, with its
/// phases cleared when `phase_modulation` is off.
pub fn random_symbol(params: &WaveformParams, seed: u64, index: u64, phase_modulation: bool) -> Result<WaveformSymbol> {
    let total = total_waveforms(params)?;
    let mut rng = rng::stream(seed, &[index]);
    let mut symbol = encode_index(rng.random_range(1..=total), params)?;
    if !phase_modulation {
        symbol.phase_idx.iter_mut().for_each(|d| *d = 0);
        symbol = WaveformSymbol::from_parts(symbol.perm, symbol.phase_idx, params)?;
    }
    Ok(symbol)
}

/// Settings for a peak-sidelobe study.
#[derive(Debug, Clone, PartialEq)]
pub struct PslStudy {
    pub params: WaveformParams,
    pub samples: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub exclusion: ExclusionSpec,
    pub phase_modulation: bool,
}

impl PslStudy {
    pub fn new(params: WaveformParams, samples: usize, seed: u64, phase_modulation: bool) -> Self {
        let grid = GridSpec::default_for(&params);
        let exclusion = ExclusionSpec::default_for(&params);
        Self { params, samples, seed, grid, exclusion, phase_modulation }
    }

    /// PSL of sample `index`; independent of every other sample.
    pub fn sample(&self, index: u64) -> Result<f64> {
        let symbol = random_symbol(&self.params, self.seed, index, self.phase_modulation)?;
        peak_sidelobe(&symbol, &self.params, &self.grid, &self.exclusion)
    }
}

/// Empirical distribution of peak sidelobe levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PslStats {
    pub samples: Vec<f64>,
    pub mean: f64,
    /// `(level, F(level))` at every sorted sample.
    pub cdf: Vec<(f64, f64)>,
    /// `(bin centre, density)` on equal-width bins over `[0, 1]`.
    pub pdf: Vec<(f64, f64)>,
}

impl PslStats {
    pub fn from_samples(samples: Vec<f64>, bins: usize) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let cdf = sorted.iter().enumerate().map(|(i, &v)| (v, (i + 1) as f64 / n as f64)).collect();
        let bins = bins.max(1);
        let width = 1.0 / bins as f64;
        let mut counts = alloc::vec![0usize; bins];
        for &v in &samples {
            let b = ((v / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let pdf = counts
            .iter()
            .enumerate()
            .map(|(b, &c)| ((b as f64 + 0.5) * width, c as f64 / (n as f64 * width)))
            .collect();
        Self { samples, mean, cdf, pdf }
    }
}

/// Sequential PSL study. The parallel runner in `permwave` produces identical
/// samples because each one owns its random stream.
pub fn psl_statistics(study: &PslStudy) -> Result<PslStats> {
    if study.samples == 0 {
        return Err(Error::InvalidParameter("PSL study needs at least one sample"));
    }
    let samples = (0..study.samples as u64).map(|i| study.sample(i)).collect::<Result<Vec<_>>>()?;
    Ok(PslStats::from_samples(samples, 50))
}
