//! Pairwise error probabilities and block-error bounds for coherent ML
//! detection over AWGN, correlated Rician and correlated Rayleigh channels.
//!
//! By symmetry every symbol sees the same set of pairwise distances, so all
//! bounds are taken with respect to symbol 1 (identity permutation, zero
//! phases). A pair's geometry reduces to one number, the normalised distance
//! `L - Σ cos(Δθ)` over tone-matched subpulses.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::channel::{gain_cdf, gain_quantile, gain_survival, gain_weights, ChannelKind, ChannelModel};
use crate::codec::{factorial, next_permutation, total_waveforms, WaveformParams, WaveformSymbol};
use crate::quad::{integrate, QuadConfig};
use crate::special::{q_function, CompensatedSum};
use crate::{Error, Result};

/// Largest constellation the direct union-bound enumeration will visit.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Relationship between two symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGeometry {
    /// Subpulses whose tones differ.
    pub differing: usize,
    /// `counts[δ]` tone-matched subpulses whose phase digits differ by `δ` mod `M`.
    pub phase_offsets: Vec<usize>,
}

impl PairGeometry {
    pub fn between(a: &WaveformSymbol, b: &WaveformSymbol, params: &WaveformParams) -> Self {
        let m = params.psk_order;
        let mut phase_offsets = alloc::vec![0; m];
        let mut differing = 0;
        for l in 0..params.subpulses {
            if a.perm[l] == b.perm[l] {
                phase_offsets[(b.phase_idx[l] + m - a.phase_idx[l]) % m] += 1;
            } else {
                differing += 1;
            }
        }
        Self { differing, phase_offsets }
    }

    /// `Σ cos(θ^b - θ^a)` over tone-matched subpulses.
    pub fn cos_sum(&self, psk_order: usize) -> f64 {
        let matched: usize = self.phase_offsets.iter().sum();
        matched as f64 - (self.distance(psk_order) - self.differing as f64)
    }

    /// `L - cos_sum`, accumulated as `d + Σ 2 sin²(πδ/M)` to avoid cancellation.
    pub fn distance(&self, psk_order: usize) -> f64 {
        distance_from_offsets(self.differing, &self.phase_offsets, psk_order)
    }
}

fn distance_from_offsets(differing: usize, offsets: &[usize], psk_order: usize) -> f64 {
    // Offsets δ and M - δ are the same distance; fold them first so the
    // result is bit-identical for (a, b) and (b, a).
    let half = psk_order / 2;
    let mut acc = differing as f64;
    for delta in 1..=half {
        let mirror = psk_order - delta;
        let count = offsets[delta] + if mirror != delta { offsets[mirror] } else { 0 };
        if count > 0 {
            let s = libm::sin(PI * delta as f64 / psk_order as f64);
            acc += count as f64 * 2.0 * s * s;
        }
    }
    acc
}

/// `sqrt(L N0 / (E · distance))`.
pub fn alpha_for_distance(distance: f64, params: &WaveformParams, noise_psd: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::InvalidParameter("pairwise distance must be positive; symbols coincide"));
    }
    Ok(libm::sqrt(params.subpulses as f64 * noise_psd / (params.energy * distance)))
}

pub fn alpha(a: &WaveformSymbol, b: &WaveformSymbol, params: &WaveformParams, noise_psd: f64) -> Result<f64> {
    alpha_for_distance(PairGeometry::between(a, b, params).distance(params.psk_order), params, noise_psd)
}

/// `N0` for `snr_db = 10 log10(E / N0)`.
pub fn noise_psd_for_snr(params: &WaveformParams, snr_db: f64) -> f64 {
    params.energy * libm::pow(10.0, -snr_db / 10.0)
}

pub fn pep_awgn(alpha: f64, antennas: usize) -> f64 {
    q_function(libm::sqrt(antennas as f64) / alpha)
}

fn craig_config() -> QuadConfig {
    QuadConfig { abs_tol: 1e-10, rel_tol: 0.0, max_evals: 10_000 }
}

/// Craig-form average of `Q(sqrt(g)/α)` over a correlated fading gain with
/// Rician factor `k` and LOS projections `los_power[j] = |(V^H Δ)_j|²`.
fn pep_fading(alpha: f64, eigenvalues: &[f64], k: f64, los_power: &[f64]) -> Result<f64> {
    let integrand = |theta: f64| {
        let s = libm::sin(theta);
        let scaled = 2.0 * (k + 1.0) * alpha * alpha * s * s;
        let mut product = 1.0;
        let mut exponent = 0.0;
        for (j, &lambda) in eigenvalues.iter().enumerate() {
            let denom = lambda + scaled;
            product *= scaled / denom;
            exponent += los_power.get(j).copied().unwrap_or(0.0) / denom;
        }
        product * libm::exp(-k * exponent) / PI
    };
    Ok(integrate(integrand, 0.0, FRAC_PI_2, craig_config())?.value)
}

/// `(1/π) ∫_0^{π/2} Π_j 2α² sin²θ / (λ_j + 2α² sin²θ) dθ`.
pub fn pep_rayleigh(alpha: f64, eigenvalues: &[f64]) -> Result<f64> {
    pep_fading(alpha, eigenvalues, 0.0, &[])
}

pub fn pep_rician(alpha: f64, model: &ChannelModel) -> Result<f64> {
    let los_power: Vec<f64> = model.los_in_eigenbasis().iter().map(|z| z.norm_sqr()).collect();
    pep_fading(alpha, &model.eigenvalues, model.rician_k, &los_power)
}

/// PEP for the channel kind of `model`.
pub fn pep(alpha: f64, model: &ChannelModel) -> Result<f64> {
    match model.kind {
        ChannelKind::Awgn => Ok(pep_awgn(alpha, model.antennas)),
        ChannelKind::Rayleigh => pep_rayleigh(alpha, &model.eigenvalues),
        ChannelKind::Rician => pep_rician(alpha, model),
    }
}

/// All symbols at one pairwise distance from the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceGroup {
    pub distance: f64,
    pub multiplicity: u128,
}

/// How the distance spectrum is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumMode {
    /// Visit every symbol; limited to `ENUMERATION_LIMIT`.
    Enumerate,
    /// Combinatorial counting; any size.
    #[default]
    Aggregate,
}

fn collect(map: BTreeMap<u64, u128>) -> Vec<DistanceGroup> {
    map.into_iter().map(|(bits, multiplicity)| DistanceGroup { distance: f64::from_bits(bits), multiplicity }).collect()
}

/// Distance spectrum by visiting every symbol other than the reference.
pub fn spectrum_enumerated(params: &WaveformParams) -> Result<Vec<DistanceGroup>> {
    let total = total_waveforms(params)?;
    if total > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge { size: total, limit: ENUMERATION_LIMIT });
    }
    let big_l = params.subpulses;
    let m = params.psk_order;
    let mut map = BTreeMap::new();
    let mut perm: Vec<usize> = (0..big_l).collect();
    let mut offsets = alloc::vec![0usize; m];
    loop {
        let mut phases = alloc::vec![0usize; big_l];
        loop {
            offsets.iter_mut().for_each(|c| *c = 0);
            let mut differing = 0;
            for l in 0..big_l {
                if perm[l] == l {
                    offsets[phases[l]] += 1;
                } else {
                    differing += 1;
                }
            }
            if differing > 0 || offsets[0] < big_l {
                let key = distance_from_offsets(differing, &offsets, m).to_bits();
                *map.entry(key).or_insert(0u128) += 1;
            }
            let mut pos = big_l;
            while pos > 0 {
                pos -= 1;
                phases[pos] += 1;
                if phases[pos] < m {
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
    Ok(collect(map))
}

/// Number of permutations of `n` items with exactly `f` fixed points, for
/// `f = 0..=n`, by scanning all permutations.
pub fn fixed_point_counts_scan(n: usize) -> Vec<u128> {
    let mut counts = alloc::vec![0u128; n + 1];
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        counts[perm.iter().enumerate().filter(|(i, &p)| *i == p).count()] += 1;
        if !next_permutation(&mut perm) {
            return counts;
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Rencontres numbers `C(n, f) · !(n - f)`.
pub fn fixed_point_counts_formula(n: usize) -> Result<Vec<u128>> {
    let mut derangements = alloc::vec![1u128, 0];
    for k in 2..=n {
        let v = (derangements[k - 1].checked_add(derangements[k - 2]))
            .and_then(|s| s.checked_mul((k - 1) as u128))
            .ok_or(Error::Overflow("derangement count"))?;
        derangements.push(v);
    }
    (0..=n)
        .map(|f| binomial(n, f).checked_mul(derangements[n - f]).ok_or(Error::Overflow("fixed-point count")))
        .collect()
}

fn fixed_point_counts(n: usize) -> Result<Vec<u128>> {
    if n <= 8 { Ok(fixed_point_counts_scan(n)) } else { fixed_point_counts_formula(n) }
}

/// Calls `visit` with every composition of `total` into `parts` parts.
fn compositions(total: usize, parts: usize, current: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if current.len() + 1 == parts {
        current.push(total);
        let r = visit(current);
        current.pop();
        return r;
    }
    for first in (0..=total).rev() {
        current.push(first);
        compositions(total - first, parts, current, visit)?;
        current.pop();
    }
    Ok(())
}

/// Distance spectrum by counting: fixed-point distribution of the
/// permutation times the multinomial spread of phase offsets over the
/// matched subpulses, times `M^d` free phases elsewhere.
pub fn spectrum_aggregated(params: &WaveformParams) -> Result<Vec<DistanceGroup>> {
    params.validate()?;
    let big_l = params.subpulses;
    let m = params.psk_order;
    let fixed = fixed_point_counts(big_l)?;
    let mut map = BTreeMap::new();
    for (matched, &perms) in fixed.iter().enumerate() {
        if perms == 0 {
            continue;
        }
        let differing = big_l - matched;
        let free = (m as u128).checked_pow(differing as u32).ok_or(Error::Overflow("free phase words"))?;
        let base = perms.checked_mul(free).ok_or(Error::Overflow("multiplicity"))?;
        let spread = factorial(matched)?;
        compositions(matched, m, &mut Vec::with_capacity(m), &mut |offsets| {
            if differing == 0 && offsets[0] == big_l {
                return Ok(());
            }
            let mut ways = spread;
            for &c in offsets {
                ways /= factorial(c)?;
            }
            let count = base.checked_mul(ways).ok_or(Error::Overflow("multiplicity"))?;
            let key = distance_from_offsets(differing, offsets, m).to_bits();
            let slot = map.entry(key).or_insert(0u128);
            *slot = slot.checked_add(count).ok_or(Error::Overflow("multiplicity"))?;
            Ok(())
        })?;
    }
    Ok(collect(map))
}

pub fn distance_spectrum(params: &WaveformParams, mode: SpectrumMode) -> Result<Vec<DistanceGroup>> {
    match mode {
        SpectrumMode::Enumerate => spectrum_enumerated(params),
        SpectrumMode::Aggregate => spectrum_aggregated(params),
    }
}

/// `Σ_{k≠1} P_{1k}` over a precomputed distance spectrum.
pub fn union_bound_from_spectrum(
    spectrum: &[DistanceGroup],
    params: &WaveformParams,
    model: &ChannelModel,
    noise_psd: f64,
) -> Result<f64> {
    let mut sum = CompensatedSum::default();
    for g in spectrum {
        let a = alpha_for_distance(g.distance, params, noise_psd)?;
        sum.add(g.multiplicity as f64 * pep(a, model)?);
    }
    Ok(sum.value())
}

pub fn union_bound(params: &WaveformParams, model: &ChannelModel, noise_psd: f64, mode: SpectrumMode) -> Result<f64> {
    union_bound_from_spectrum(&distance_spectrum(params, mode)?, params, model, noise_psd)
}

/// Nearest-neighbour distance and count: a single phase step for `M > 2`;
/// for `M = 2` a phase flip or a tone swap, `2L² - L` neighbours.
pub fn nearest_neighbours(params: &WaveformParams) -> Result<DistanceGroup> {
    let big_l = params.subpulses as u128;
    match params.psk_order {
        0 | 1 => Err(Error::InvalidParameter("nearest-neighbour approximation needs M >= 2")),
        2 => Ok(DistanceGroup { distance: 2.0, multiplicity: 2 * big_l * big_l - big_l }),
        m => {
            let s = libm::sin(PI / m as f64);
            Ok(DistanceGroup { distance: 2.0 * s * s, multiplicity: 2 * big_l })
        }
    }
}

pub fn nn_approximation(params: &WaveformParams, model: &ChannelModel, noise_psd: f64) -> Result<f64> {
    let nn = nearest_neighbours(params)?;
    let a = alpha_for_distance(nn.distance, params, noise_psd)?;
    Ok(nn.multiplicity as f64 * pep(a, model)?)
}

/// Controls for the threshold search of the gain-conditioned bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSearch {
    pub coarse_points: usize,
    pub rel_tol: f64,
    /// The first coarse grid covers `[0, gain quantile at this probability]`.
    pub upper_quantile: f64,
    /// While the grid minimum sits on its upper end, the range is doubled up
    /// to this many times.
    pub max_extensions: usize,
}

impl Default for GammaSearch {
    fn default() -> Self {
        Self { coarse_points: 64, rel_tol: 1e-4, upper_quantile: 0.9999, max_extensions: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainThresholdBound {
    pub value: f64,
    pub gamma: f64,
}

/// Terms of the gain-conditioned bound that do not depend on `γ`.
#[derive(Debug, Clone)]
pub struct GainThresholdObjective<'a> {
    model: &'a ChannelModel,
    alphas: Vec<(f64, f64)>,
    weights: Vec<f64>,
}

impl<'a> GainThresholdObjective<'a> {
    pub fn new(spectrum: &[DistanceGroup], params: &WaveformParams, model: &'a ChannelModel, noise_psd: f64) -> Result<Self> {
        if model.kind != ChannelKind::Rayleigh {
            return Err(Error::UnsupportedModel("gain-threshold bound is derived for Rayleigh channels only"));
        }
        let weights = gain_weights(model)?;
        let alphas = spectrum
            .iter()
            .map(|g| Ok((alpha_for_distance(g.distance, params, noise_psd)?, g.multiplicity as f64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { model, alphas, weights })
    }

    /// `∫_γ^∞ Q(sqrt(x)/α) f(x) dx` via Craig's form; the inner gain integral
    /// is closed-form for each exponential component of the pdf. The
    /// tolerance follows `Pr[gain > γ]`, which bounds the result.
    fn conditioned_pep(&self, alpha: f64, gamma: f64, survival: f64) -> Result<f64> {
        let lambdas = &self.model.eigenvalues;
        let integrand = |theta: f64| {
            let s = libm::sin(theta);
            if s == 0.0 {
                return 0.0;
            }
            let rate = 1.0 / (2.0 * alpha * alpha * s * s);
            let mut acc = 0.0;
            for (&b, &lambda) in self.weights.iter().zip(lambdas) {
                let c = rate + 1.0 / lambda;
                acc += b / lambda * libm::exp(-gamma * c) / c;
            }
            acc / PI
        };
        let mut config = craig_config();
        config.abs_tol *= survival.min(1.0);
        Ok(integrate(integrand, 0.0, FRAC_PI_2, config)?.value)
    }

    /// `F(γ) + Σ_k ∫_γ^∞ P(error | x) f(x) dx`.
    pub fn evaluate(&self, gamma: f64) -> Result<f64> {
        let survival = gain_survival(self.model, gamma)?;
        let mut sum = CompensatedSum::default();
        sum.add(gain_cdf(self.model, gamma)?);
        for &(a, mult) in &self.alphas {
            sum.add(mult * self.conditioned_pep(a, gamma, survival)?);
        }
        Ok(sum.value())
    }
}

/// Minimises the gain-conditioned bound over `γ` with a coarse grid followed
/// by golden-section refinement around the best grid point.
///
/// At low SNR the objective can keep falling towards 1 far beyond the
/// initial range, so the range doubles while the minimum sits on its edge.
pub fn minimise_gain_threshold(objective: &GainThresholdObjective<'_>, search: &GammaSearch) -> Result<GainThresholdBound> {
    let n = search.coarse_points.max(2);
    let mut lo = 0.0;
    let mut hi = gain_quantile(objective.model, search.upper_quantile)?;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for extension in 0..=search.max_extensions {
        let first = if samples.is_empty() { 0 } else { 1 };
        for k in first..n {
            let g = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            samples.push((g, objective.evaluate(g)?));
        }
        let best_k = argmin(&samples);
        let on_edge = best_k + 1 == samples.len();
        if !on_edge || extension == search.max_extensions || gain_survival(objective.model, hi)? == 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    let best_k = argmin(&samples);
    let mut best = GainThresholdBound { value: samples[best_k].1, gamma: samples[best_k].0 };
    let mut a = samples[best_k.saturating_sub(1)].0;
    let mut b = samples[(best_k + 1).min(samples.len() - 1)].0;
    let cell = b - a;
    let ratio = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = objective.evaluate(x1)?;
    let mut f2 = objective.evaluate(x2)?;
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < best.value {
            best = GainThresholdBound { value: f, gamma: x };
        }
    }
    while b - a > search.rel_tol * best.gamma.max(cell * 1e-3) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = objective.evaluate(x1)?;
            if f1 < best.value {
                best = GainThresholdBound { value: f1, gamma: x1 };
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = objective.evaluate(x2)?;
            if f2 < best.value {
                best = GainThresholdBound { value: f2, gamma: x2 };
            }
        }
    }
    Ok(best)
}

fn argmin(samples: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, s) in samples.iter().enumerate() {
        if s.1 < samples[best].1 {
            best = i;
        }
    }
    best
}

/// Gain-thresholded upper bound on the block error rate over Rayleigh fading.
pub fn new_upper_bound_rayleigh(
    params: &WaveformParams,
    model: &ChannelModel,
    noise_psd: f64,
    search: &GammaSearch,
) -> Result<GainThresholdBound> {
    let spectrum = spectrum_aggregated(params)?;
    let objective = GainThresholdObjective::new(&spectrum, params, model, noise_psd)?;
    minimise_gain_threshold(&objective, search)
}
