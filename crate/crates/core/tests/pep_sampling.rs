use permwave_core::bounds::{alpha_for_distance, nearest_neighbours, noise_psd_for_snr, pep, pep_awgn};
use permwave_core::channel::{sample_channel, ChannelModel};
use permwave_core::codec::WaveformParams;
use permwave_core::rng::stream;
use rand_distr::{Distribution, StandardNormal};

/// Fraction of draws with `sqrt(h^H h) <= α Z`.
fn sampled_pep(model: &ChannelModel, alpha: f64, draws: usize, seed: u64) -> f64 {
    let mut rng = stream(seed, &[]);
    let mut hits = 0usize;
    for _ in 0..draws {
        let gain: f64 = sample_channel(model, &mut rng).iter().map(|z| z.norm_sqr()).sum();
        let z: f64 = StandardNormal.sample(&mut rng);
        if gain.sqrt() <= alpha * z {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}

fn nearest_alpha(snr_db: f64) -> f64 {
    let p = WaveformParams::new(8, 4);
    let nn = nearest_neighbours(&p).unwrap();
    alpha_for_distance(nn.distance, &p, noise_psd_for_snr(&p, snr_db)).unwrap()
}

#[test]
fn rician_quadrature_matches_sampling() {
    let model = ChannelModel::rician(2, 2.5, 0.5).unwrap();
    let alpha = nearest_alpha(10.0);
    let analytic = pep(alpha, &model).unwrap();
    let sampled = sampled_pep(&model, alpha, 1_000_000, 21);
    assert!((analytic - sampled).abs() < 0.02 * analytic, "{analytic} vs {sampled}");
}

#[test]
fn rayleigh_quadrature_matches_sampling() {
    let model = ChannelModel::rayleigh(2, 0.5).unwrap();
    let alpha = nearest_alpha(5.0);
    let analytic = pep(alpha, &model).unwrap();
    let sampled = sampled_pep(&model, alpha, 1_000_000, 22);
    assert!((analytic - sampled).abs() < 0.02 * analytic, "{analytic} vs {sampled}");
}

#[test]
fn awgn_pep_matches_sampling() {
    let model = ChannelModel::awgn(2).unwrap();
    let alpha = 1.1;
    let sampled = sampled_pep(&model, alpha, 1_000_000, 23);
    let analytic = pep_awgn(alpha, 2);
    assert!((analytic - sampled).abs() < 0.02 * analytic, "{analytic} vs {sampled}");
}
