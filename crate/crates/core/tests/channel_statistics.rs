use permwave_core::channel::{gain_cdf, gain_pdf, gain_weights, sample_channel, ChannelModel};
use permwave_core::rng::stream;
use permwave_core::Complex64;

#[test]
fn scattered_covariance_is_recovered() {
    let k = 2.5;
    let model = ChannelModel::rician(3, k, 0.5).unwrap();
    let los_scale = (k / (k + 1.0)).sqrt();
    let draws = 100_000;
    let mut rng = stream(3, &[0]);
    let n = model.antennas;
    let mut acc = vec![Complex64::new(0.0, 0.0); n * n];
    for _ in 0..draws {
        let h = sample_channel(&model, &mut rng);
        let w: Vec<Complex64> = h.iter().zip(&model.los).map(|(h, d)| h - d * los_scale).collect();
        for i in 0..n {
            for j in 0..n {
                acc[i * n + j] += w[i] * w[j].conj();
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let got = acc[i * n + j] / draws as f64;
            let want = model.correlation[(i, j)] / (k + 1.0);
            // Each of re/im has standard error at most sqrt(R_ii R_jj / 2n) / (K + 1).
            let se = (1.0 / (2.0 * draws as f64)).sqrt() / (k + 1.0);
            assert!((got.re - want).abs() < 3.0 * se, "({i},{j}) re {} vs {want}", got.re);
            assert!(got.im.abs() < 3.0 * se, "({i},{j}) im {}", got.im);
        }
    }
}

#[test]
fn mean_gain_equals_antenna_count() {
    for model in [
        ChannelModel::rayleigh(2, 0.5).unwrap(),
        ChannelModel::rician(4, 10.0, 0.5).unwrap(),
        ChannelModel::rician(3, 0.25, 0.9).unwrap(),
    ] {
        let mut rng = stream(4, &[model.antennas as u64]);
        let draws = 100_000;
        let total: f64 = (0..draws)
            .map(|_| sample_channel(&model, &mut rng).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        let mean = total / draws as f64;
        let n = model.antennas as f64;
        assert!((mean - n).abs() < 0.02 * n, "{mean} vs {n}");
    }
}

#[test]
fn rayleigh_channel_has_zero_mean() {
    let model = ChannelModel::rayleigh(4, 0.7).unwrap();
    let mut rng = stream(5, &[]);
    let draws = 100_000;
    let mut mean = [Complex64::new(0.0, 0.0); 4];
    for _ in 0..draws {
        for (m, h) in mean.iter_mut().zip(sample_channel(&model, &mut rng)) {
            *m += h / draws as f64;
        }
    }
    let norm = mean.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm < 0.02 * 2.0, "{norm}");
}

#[test]
fn gain_density_matches_histogram() {
    let model = ChannelModel::rayleigh(2, 0.5).unwrap();
    let weights = gain_weights(&model).unwrap();
    assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);

    let draws = 1_000_000;
    let width = 0.1;
    let bins = 80;
    let mut counts = vec![0u64; bins];
    let mut rng = stream(6, &[]);
    for _ in 0..draws {
        let g: f64 = sample_channel(&model, &mut rng).iter().map(|z| z.norm_sqr()).sum();
        let b = (g / width) as usize;
        if b < bins {
            counts[b] += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for (b, &c) in counts.iter().enumerate() {
        let (lo, hi) = (b as f64 * width, (b + 1) as f64 * width);
        let analytic = (gain_cdf(&model, hi).unwrap() - gain_cdf(&model, lo).unwrap()) / width;
        let empirical = c as f64 / (draws as f64 * width);
        worst = worst.max((analytic - empirical).abs());
    }
    assert!(worst < 0.01, "sup density gap {worst}");

    // The density integrates to the cdf.
    let mid = 1.3;
    let steps = 2000;
    let h = mid / steps as f64;
    let simpson: f64 = (0..=steps)
        .map(|i| {
            let w = if i == 0 || i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * gain_pdf(&model, i as f64 * h).unwrap()
        })
        .sum::<f64>()
        * h
        / 3.0;
    assert!((simpson - gain_cdf(&model, mid).unwrap()).abs() < 1e-10);
}
