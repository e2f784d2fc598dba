//! End-to-end acceptance suite. Runs every criterion, prints one PASS/FAIL
//! line each and exits non-zero if any failed.
//!
//! Run with `cargo test -p permwave --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use permwave::parallel::{psl_statistics, Parallel};
use permwave_core::ambiguity::{caf, zero_delay_cut, GridSpec, PslStudy};
use permwave_core::assignment::assign_max;
use permwave_core::bounds::{
    alpha_for_distance, distance_spectrum, nearest_neighbours, new_upper_bound_rayleigh, nn_approximation,
    noise_psd_for_snr, pep, union_bound, union_bound_from_spectrum, GammaSearch, SpectrumMode,
};
use permwave_core::channel::{gain_cdf, gain_weights, sample_channel, ChannelModel};
use permwave_core::codec::{decode_symbol, encode_index, next_permutation, total_waveforms};
use permwave_core::fisher::{crlb_full, crlb_simplified, fim, FisherParams};
use permwave_core::linalg::Matrix;
use permwave_core::rng::stream;
use permwave_core::sim::{run_bler, BlerRecord, ReceiverKind, SimConfig};
use permwave_core::waveform::synthesize;
use permwave_core::{WaveformParams, WaveformSymbol};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn codec_round_trip() -> Outcome {
    let mut checked = 0;
    for (l, m) in [(4, 2), (3, 4)] {
        let p = WaveformParams::new(l, m);
        let total = total_waveforms(&p).map_err(fail)?;
        if total != 384 {
            return Err(format!("L={l} M={m}: {total} waveforms, expected 384"));
        }
        for i in 1..=total {
            let back = decode_symbol(&encode_index(i, &p).map_err(fail)?, &p).map_err(fail)?;
            if back != i {
                return Err(format!("L={l} M={m}: {i} decoded as {back}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} indices round-trip"))
}

/// `|A(τ, ω)|` from the synthesized signal: sampled integration at three
/// rates, extrapolated so the first- and second-order step errors cancel.
fn integrated_caf(symbol: &WaveformSymbol, params: &WaveformParams, coarse_steps: i64, omega: f64) -> f64 {
    let at = |factor: i64| {
        let signal = synthesize(symbol, params, 64 * factor as usize).expect("valid symbol");
        signal.sampled_ambiguity(factor * coarse_steps, omega)
    };
    ((at(4) * 8.0 - at(2) * 6.0 + at(1)) / (3.0 * params.energy)).norm()
}

fn caf_oracle() -> Outcome {
    const REL_TOL: f64 = 1e-3;
    let mut rng = stream(2, &[]);
    let mut worst: f64 = 0.0;
    let mut smallest = f64::INFINITY;
    for _ in 0..10 {
        let l = rng.random_range(4..=8usize);
        let p = WaveformParams::new(l, 4);
        let total = total_waveforms(&p).map_err(fail)?;
        let s = encode_index(rng.random_range(1..=total), &p).map_err(fail)?;
        let fs = (64 * l) as f64 / p.subpulse_duration;
        for _ in 0..10 {
            let reach = (64 * l * l) as i64;
            let steps = rng.random_range(1 - reach..reach);
            let omega = rng.random_range(-1.0..1.0) * 2.0 * PI * l as f64 / p.subpulse_duration;
            let analytic = caf(&s, &p, steps as f64 / fs, omega).norm();
            let numeric = integrated_caf(&s, &p, steps, omega);
            worst = worst.max((analytic - numeric).abs() / analytic);
            smallest = smallest.min(analytic);
        }
    }
    ensure(worst < REL_TOL, format!("worst relative error {worst:.2e} (< {REL_TOL:e}) over 100 points, smallest |A| {smallest:.1e}"))
}

fn zero_delay_invariance() -> Outcome {
    const TOL: f64 = 1e-9;
    let p = WaveformParams::new(8, 4);
    let omegas = GridSpec::covering(&p, 512).omegas();
    let closed = zero_delay_cut(&p, &omegas);
    let total = total_waveforms(&p).map_err(fail)?;
    let mut rng = stream(3, &[]);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = encode_index(rng.random_range(1..=total), &p).map_err(fail)?;
        for (&w, &c) in omegas.iter().zip(&closed) {
            worst = worst.max((caf(&s, &p, 0.0, w).norm() - c).abs());
        }
    }
    ensure(worst < TOL, format!("sup deviation {worst:.2e} (< {TOL:e})"))
}

fn psl_means() -> Outcome {
    const MODULATED: f64 = 0.303;
    const UNMODULATED: f64 = 0.326;
    const TOL: f64 = 0.02;
    let p = WaveformParams::new(8, 4);
    let modulated = psl_statistics(&PslStudy::new(p.clone(), 2000, 1, true)).map_err(fail)?.mean;
    let plain = psl_statistics(&PslStudy::new(p, 2000, 1, false)).map_err(fail)?.mean;
    ensure(
        (modulated - MODULATED).abs() <= TOL && (plain - UNMODULATED).abs() <= TOL,
        format!("mean PSL modulated {modulated:.4} (target {MODULATED} ± {TOL}), unmodulated {plain:.4} (target {UNMODULATED} ± {TOL})"),
    )
}

fn fisher_consistency() -> Outcome {
    const INVERSE_TOL: f64 = 1e-10;
    // The two closed forms round differently when the coupling is negligible.
    const ORDER_SLACK: f64 = 1e-12;
    let mut p = WaveformParams::new(8, 4);
    p.subpulse_duration = 1e-6;
    let fp = FisherParams::from_snr_db(10.0, 10.0 / p.subpulse_duration).map_err(fail)?;
    let total = total_waveforms(&p).map_err(fail)?;
    let mut rng = stream(5, &[]);
    let mut worst: f64 = 0.0;
    let mut doppler_simplified = None;
    for _ in 0..200 {
        let s = encode_index(rng.random_range(1..=total), &p).map_err(fail)?;
        let j = fim(&s, &p, &fp);
        let det = j.determinant();
        let (inv_delay, inv_doppler) = (j.doppler / det, j.delay / det);
        let full = crlb_full(&s, &p, &fp).map_err(fail)?;
        let simple = crlb_simplified(&s, &p, &fp);
        worst = worst
            .max((full.delay - inv_delay).abs() / inv_delay)
            .max((full.doppler - inv_doppler).abs() / inv_doppler);
        match doppler_simplified {
            None => doppler_simplified = Some(simple.doppler),
            Some(d) if d.to_bits() != simple.doppler.to_bits() => {
                return Err(format!("simplified Doppler bound varies: {d:e} vs {:e}", simple.doppler));
            }
            Some(_) => {}
        }
        if full.delay < simple.delay * (1.0 - ORDER_SLACK) || full.doppler < simple.doppler * (1.0 - ORDER_SLACK) {
            return Err(format!("full {full:?} below simplified {simple:?}"));
        }
    }
    ensure(
        worst < INVERSE_TOL,
        format!("worst relative gap to the FIM inverse {worst:.2e} (< {INVERSE_TOL:e}); simplified Doppler identical; full >= simplified"),
    )
}

fn receivers_agree() -> Outcome {
    let p = WaveformParams::new(4, 2);
    let mut cfg = SimConfig::new(p, ChannelModel::awgn(2).map_err(fail)?, vec![0.0], 6);
    cfg.receiver = ReceiverKind::Both;
    cfg.max_trials = 1000;
    cfg.target_errors = u64::MAX;
    let r = run_bler(&cfg, &Parallel).map_err(fail)?;
    Ok(format!("{} trials, {} block errors, no disagreement", r[0].trials, r[0].errors))
}

fn assignment_vs_brute_force() -> Outcome {
    let n = 5;
    let mut rng = stream(7, &[]);
    for case in 0..100 {
        let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-10.0..10.0));
        let sum = |rows: &[usize]| -> f64 { rows.iter().enumerate().map(|(col, &row)| m[(row, col)]).sum() };
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::NEG_INFINITY;
        loop {
            best = best.max(sum(&perm));
            if !next_permutation(&mut perm) {
                break;
            }
        }
        let got = assign_max(&m).map_err(fail)?;
        if sum(&got.rows) != best || got.total != best {
            return Err(format!("case {case}: solver {} vs brute force {best}", got.total));
        }
    }
    Ok("100 matrices, totals equal brute force over 120 permutations".into())
}

fn snr_grid(start: i32, stop: i32) -> Vec<f64> {
    (start..=stop).map(f64::from).collect()
}

fn simulate(params: &WaveformParams, model: &ChannelModel, snr: &[f64], seed: u64) -> Result<Vec<BlerRecord>, String> {
    let cfg = SimConfig::new(params.clone(), model.clone(), snr.to_vec(), seed);
    run_bler(&cfg, &Parallel).map_err(fail)
}

fn awgn_sandwich() -> Outcome {
    const TARGET_ERRORS: u64 = 200;
    const NN_FACTOR: f64 = 2.0;
    const NN_REGION: f64 = 1e-2;
    let p = WaveformParams::new(4, 4);
    let model = ChannelModel::awgn(2).map_err(fail)?;
    let snr = snr_grid(0, 20);
    let records = simulate(&p, &model, &snr, 1)?;
    let spectrum = distance_spectrum(&p, SpectrumMode::Aggregate).map_err(fail)?;
    let mut violations = Vec::new();
    let mut above_point = 0;
    let mut resolved = Vec::new();
    for r in &records {
        let n0 = noise_psd_for_snr(&p, r.snr_db);
        let union = union_bound_from_spectrum(&spectrum, &p, &model, n0).map_err(fail)?;
        // The bound is rejected only if it lies below the whole 95% interval.
        if union < r.ci_low {
            violations.push(r.snr_db);
        }
        if r.bler > union {
            above_point += 1;
        }
        if r.errors >= TARGET_ERRORS && r.bler < NN_REGION {
            resolved.push((r.snr_db, r.bler, nn_approximation(&p, &model, n0).map_err(fail)?));
        }
    }
    let top: Vec<_> = resolved.iter().rev().take(2).collect();
    let nn_ok = top.len() == 2 && top.iter().all(|(_, sim, nn)| nn / sim <= NN_FACTOR && sim / nn <= NN_FACTOR);
    let ratios: Vec<String> = top.iter().map(|(s, sim, nn)| format!("{s} dB nn/sim {:.3}", nn / sim)).collect();
    let short = records.iter().filter(|r| r.errors < TARGET_ERRORS).count();
    ensure(
        violations.is_empty() && nn_ok,
        format!(
            "union >= 95% lower limit at {}/{} points (point estimate above union at {above_point}); {}; {short} points hit the trial cap before {TARGET_ERRORS} errors",
            records.len() - violations.len(),
            records.len(),
            ratios.join(", "),
        ),
    )
}

/// Fraction of draws with `sqrt(h^H h) <= α Z`.
fn sampled_pep(model: &ChannelModel, alpha: f64, draws: usize, seed: u64) -> f64 {
    let mut rng = stream(seed, &[]);
    let hits = (0..draws)
        .filter(|_| {
            let gain: f64 = sample_channel(model, &mut rng).iter().map(|z| z.norm_sqr()).sum();
            let z: f64 = StandardNormal.sample(&mut rng);
            gain.sqrt() <= alpha * z
        })
        .count();
    hits as f64 / draws as f64
}

fn rician_pep() -> Outcome {
    const TOL: f64 = 0.02;
    let p = WaveformParams::new(8, 4);
    let nn = nearest_neighbours(&p).map_err(fail)?;
    let alpha = alpha_for_distance(nn.distance, &p, noise_psd_for_snr(&p, 10.0)).map_err(fail)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, k) in [0.25, 2.5, 10.0].into_iter().enumerate() {
        let model = ChannelModel::rician(2, k, 0.5).map_err(fail)?;
        let analytic = pep(alpha, &model).map_err(fail)?;
        let sampled = sampled_pep(&model, alpha, 1_000_000, 90 + i as u64);
        let rel = (analytic - sampled).abs() / analytic;
        worst = worst.max(rel);
        parts.push(format!("K={k}: {analytic:.4e} vs {sampled:.4e}"));
    }
    ensure(worst < TOL, format!("{}; worst relative {worst:.2e} (< {TOL})", parts.join(", ")))
}

fn rayleigh_gain() -> Outcome {
    const SUP_TOL: f64 = 0.005;
    const WEIGHT_TOL: f64 = 1e-10;
    let model = ChannelModel::rayleigh(2, 0.5).map_err(fail)?;
    let weight_sum: f64 = gain_weights(&model).map_err(fail)?.iter().sum();
    let mut rng = stream(10, &[]);
    let n = 1_000_000;
    let mut draws: Vec<f64> =
        (0..n).map(|_| sample_channel(&model, &mut rng).iter().map(|z| z.norm_sqr()).sum()).collect();
    draws.sort_by(f64::total_cmp);
    let mut sup: f64 = 0.0;
    for (i, &x) in draws.iter().enumerate() {
        let f = gain_cdf(&model, x).map_err(fail)?;
        sup = sup.max((f - i as f64 / n as f64).abs()).max((f - (i + 1) as f64 / n as f64).abs());
    }
    ensure(
        sup < SUP_TOL && (weight_sum - 1.0).abs() < WEIGHT_TOL,
        format!("sup |F - F_n| {sup:.2e} (< {SUP_TOL}); |Σb - 1| {:.1e} (< {WEIGHT_TOL:e})", (weight_sum - 1.0).abs()),
    )
}

fn new_bound_behaviour() -> Outcome {
    let p = WaveformParams::new(4, 2);
    let model = ChannelModel::rayleigh(2, 0.5).map_err(fail)?;
    let snr = snr_grid(-5, 15);
    let records = simulate(&p, &model, &snr, 11)?;
    let mut problems = Vec::new();
    let mut first_saturated = None;
    for r in &records {
        let n0 = noise_psd_for_snr(&p, r.snr_db);
        let bound = new_upper_bound_rayleigh(&p, &model, n0, &GammaSearch::default()).map_err(fail)?.value;
        let union = union_bound(&p, &model, n0, SpectrumMode::Aggregate).map_err(fail)?;
        if bound < r.bler {
            problems.push(format!("{} dB: bound {bound:.4e} < simulated {:.4e}", r.snr_db, r.bler));
        }
        if bound > union {
            problems.push(format!("{} dB: bound {bound:.4e} > union {union:.4e}", r.snr_db));
        }
        if union >= 1.0 && first_saturated.is_none() {
            first_saturated = Some((r.snr_db, bound, union));
        }
    }
    match first_saturated {
        None => problems.push("union bound never reaches 1 on this grid".into()),
        Some((_, bound, _)) if bound >= 1.0 => problems.push(format!("bound {bound} not below 1 where union >= 1")),
        Some(_) => {}
    }
    let (s, bound, union) = first_saturated.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    let detail = format!("sim <= bound <= union at {} points; at {s} dB union {union:.3} and bound {bound:.10}", records.len());
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", problems.join("; ")))
    }
}

fn union_aggregation() -> Outcome {
    const TOL: f64 = 1e-14;
    const L8_BUDGET: Duration = secs(60);
    let start = Instant::now();
    let p8 = WaveformParams::new(8, 4);
    let awgn = ChannelModel::awgn(2).map_err(fail)?;
    let full_size = union_bound(&p8, &awgn, noise_psd_for_snr(&p8, 10.0), SpectrumMode::Aggregate).map_err(fail)?;
    let elapsed = start.elapsed();
    let models = [awgn, ChannelModel::rayleigh(2, 0.5).map_err(fail)?, ChannelModel::rician(2, 2.5, 0.5).map_err(fail)?];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for l in 2..=4 {
        for m in [1, 2, 4, 8] {
            let p = WaveformParams::new(l, m);
            for model in &models {
                for snr in [0.0, 10.0, 20.0] {
                    let n0 = noise_psd_for_snr(&p, snr);
                    let a = union_bound(&p, model, n0, SpectrumMode::Aggregate).map_err(fail)?;
                    let e = union_bound(&p, model, n0, SpectrumMode::Enumerate).map_err(fail)?;
                    worst = worst.max((a - e).abs() / e);
                    cases += 1;
                }
            }
        }
    }
    ensure(
        elapsed < L8_BUDGET && worst <= TOL,
        format!(
            "L=8 M=4 union at 10 dB = {full_size:.4e} in {:.3} s (< {} s); aggregate vs enumerate over {cases} cases worst relative {worst:.1e} (<= {TOL:e})",
            elapsed.as_secs_f64(),
            L8_BUDGET.as_secs()
        ),
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "codec round trip", budget: secs(1), check: codec_round_trip },
        Criterion { id: 2, name: "ambiguity vs numeric integration", budget: secs(60), check: caf_oracle },
        Criterion { id: 3, name: "zero-delay cut invariance", budget: secs(60), check: zero_delay_invariance },
        Criterion { id: 4, name: "peak sidelobe statistics", budget: secs(600), check: psl_means },
        Criterion { id: 5, name: "Fisher information and CRLB", budget: secs(5), check: fisher_consistency },
        Criterion { id: 6, name: "efficient and exhaustive receivers agree", budget: secs(60), check: receivers_agree },
        Criterion { id: 7, name: "assignment vs brute force", budget: secs(1), check: assignment_vs_brute_force },
        Criterion { id: 8, name: "AWGN union and nearest-neighbour sandwich", budget: secs(900), check: awgn_sandwich },
        Criterion { id: 9, name: "Rician PEP vs sampling", budget: secs(120), check: rician_pep },
        Criterion { id: 10, name: "Rayleigh gain distribution", budget: secs(60), check: rayleigh_gain },
        Criterion { id: 11, name: "gain-threshold bound behaviour", budget: secs(900), check: new_bound_behaviour },
        Criterion { id: 12, name: "aggregated union bound", budget: secs(60), check: union_aggregation },
    ];
    let mut failed = 0;
    let suite = Instant::now();
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > c.budget => Err(format!("{d}; over the {} s budget", c.budget.as_secs())),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += outcome.is_err() as usize;
        println!("{tag} {:>2} {} [{:.2} s] {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        criteria.len() - failed,
        suite.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
