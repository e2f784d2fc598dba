//! Subcommand bodies. Each returns its output files in memory; placing them on
//! disk and writing the manifest is left to the caller.

use std::io::Read;

use anyhow::{bail, Context};
use permwave_core::ambiguity::{zero_delay_cut, zero_doppler_cut, ExclusionSpec, GridSpec, PslStudy};
use permwave_core::bounds::{
    distance_spectrum, new_upper_bound_rayleigh, nn_approximation, noise_psd_for_snr, union_bound_from_spectrum,
    GammaSearch,
};
use permwave_core::channel::ChannelKind;
use permwave_core::codec::{decode_parts, encode_index};
use permwave_core::fisher::{crlb_full, crlb_simplified, FisherParams};
use permwave_core::sim::{run_bler, SimConfig};
use permwave_core::waveform::synthesize;
use permwave_core::Error;
use serde_json::json;

use crate::args::{
    format_list, parse_list, AfArgs, BlerArgs, BoundsArgs, Command, CrlbArgs, DecodeArgs, EncodeArgs, PslArgs,
    SynthArgs,
};
use crate::parallel::{self, Parallel};
use crate::reproduce;
use crate::table::{json_bytes, Cell, Format, Table};

/// One output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn table(stem: &str, table: &Table, format: Format) -> Self {
        Self { name: format!("{stem}.{}", format.extension()), bytes: table.render(format) }
    }
}

/// Whether the command always writes a directory of files.
pub fn writes_directory(command: &Command) -> bool {
    matches!(command, Command::AfCuts(_) | Command::PslStats(_) | Command::Reproduce(_))
}

pub fn execute(command: &Command, format: Format) -> anyhow::Result<Vec<Artifact>> {
    match command {
        Command::Encode(a) => encode(a, format),
        Command::Decode(a) => decode(a, format),
        Command::Synth(a) => synth(a, format),
        Command::Af(a) => af(a, format),
        Command::AfCuts(a) => af_cuts(a, format),
        Command::PslStats(a) => psl_stats(a, format),
        Command::Crlb(a) => crlb(a, format),
        Command::Bler(a) => bler(a, format),
        Command::Bounds(a) => bounds(a, format),
        Command::Reproduce(a) => reproduce::run(a, format),
    }
}

fn symbol_table() -> Table {
    Table::new(&["index", "perm", "phases"])
}

fn encode(args: &EncodeArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let params = args.waveform.params()?;
    let s = encode_index(args.index, &params)?;
    let mut t = symbol_table();
    t.push(vec![s.index.into(), format_list(&s.perm).into(), format_list(&s.phase_idx).into()]);
    Ok(vec![Artifact::table("encode", &t, format)])
}

fn decode(args: &DecodeArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let params = args.waveform.params()?;
    let pairs: Vec<(String, String)> = match (&args.perm, &args.phases, &args.input) {
        (Some(perm), Some(phases), _) => vec![(perm.clone(), phases.clone())],
        (_, _, Some(path)) => {
            let mut text = String::new();
            if path.as_os_str() == "-" {
                std::io::stdin().read_to_string(&mut text)?;
            } else {
                text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            }
            read_symbol_rows(&text)?
        }
        _ => bail!("decode needs --perm and --phases, or --input"),
    };
    let mut t = symbol_table();
    for (perm, phases) in pairs {
        let (perm, phases) = (parse_list(&perm)?, parse_list(&phases)?);
        let index = decode_parts(&perm, &phases, &params)?;
        t.push(vec![index.into(), format_list(&perm).into(), format_list(&phases).into()]);
    }
    Ok(vec![Artifact::table("decode", &t, format)])
}

fn read_symbol_rows(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).with_context(|| format!("input has no {name:?} column"))
    };
    let (perm, phases) = (column("perm")?, column("phases")?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push((record[perm].to_owned(), record[phases].to_owned()));
    }
    Ok(rows)
}

fn synth(args: &SynthArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let params = args.waveform.params()?;
    let s = args.symbol.symbol(&params)?;
    let signal = synthesize(&s, &params, args.oversampling)?;
    let mut t = Table::new(&["t", "re", "im"]);
    for (k, z) in signal.samples.iter().enumerate() {
        t.push(vec![signal.time(k).into(), z.re.into(), z.im.into()]);
    }
    Ok(vec![Artifact::table("synth", &t, format)])
}

fn grid(params: &permwave_core::WaveformParams, points: usize) -> anyhow::Result<GridSpec> {
    if points == 0 {
        bail!("--points must be at least 1");
    }
    Ok(GridSpec::covering(params, points))
}

fn af(args: &AfArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let params = args.waveform.params()?;
    let s = args.symbol.symbol(&params)?;
    let surface = parallel::surface(&s, &params, &grid(&params, args.points)?);
    let mut t = Table::new(&["tau", "omega", "value"]);
    for (i, &tau) in surface.taus.iter().enumerate() {
        for (k, &omega) in surface.omegas.iter().enumerate() {
            t.push(vec![tau.into(), omega.into(), surface.value(i, k).into()]);
        }
    }
    Ok(vec![Artifact::table("af", &t, format)])
}

fn af_cuts(args: &AfArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let params = args.waveform.params()?;
    let s = args.symbol.symbol(&params)?;
    let grid = grid(&params, args.points)?;
    let taus = grid.taus();
    let omegas = grid.omegas();
    let mut delay = Table::new(&["tau", "value"]);
    for (tau, v) in taus.iter().zip(zero_doppler_cut(&s, &params, &taus)) {
        delay.push(vec![(*tau).into(), v.into()]);
    }
    let mut doppler = Table::new(&["omega", "value"]);
    for (omega, v) in omegas.iter().zip(zero_delay_cut(&params, &omegas)) {
        doppler.push(vec![(*omega).into(), v.into()]);
    }
    Ok(vec![Artifact::table("zero_doppler", &delay, format), Artifact::table("zero_delay", &doppler, format)])
}

fn psl_stats(args: &PslArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let params = args.waveform.params()?;
    let exclusion = ExclusionSpec {
        tau_half_width: args.exclude_tau.unwrap_or(params.subpulse_duration),
        omega_half_width: args.exclude_omega.unwrap_or(f64::INFINITY),
    };
    let study = PslStudy {
        grid: grid(&params, args.points)?,
        params,
        samples: args.samples,
        seed: args.seed,
        exclusion,
        phase_modulation: !args.no_phases,
    };
    let stats = parallel::psl_statistics(&study)?;
    let mut t = Table::new(&["sample", "psl"]);
    for (i, &v) in stats.samples.iter().enumerate() {
        t.push(vec![i.into(), v.into()]);
    }
    let omega_half_width = exclusion.omega_half_width.is_finite().then_some(exclusion.omega_half_width);
    let summary = json!({
        "samples": stats.samples.len(),
        "mean": stats.mean,
        "phase_modulation": study.phase_modulation,
        "seed": study.seed,
        "grid_points": args.points,
        "exclusion": { "tau_half_width": exclusion.tau_half_width, "omega_half_width": omega_half_width },
        "cdf": stats.cdf,
        "pdf": stats.pdf,
    });
    Ok(vec![
        Artifact::table("psl_samples", &t, format),
        Artifact { name: "psl_summary.json".into(), bytes: json_bytes(&summary) },
    ])
}

fn crlb(args: &CrlbArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let params = args.waveform.params()?;
    let s = args.symbol.symbol(&params)?;
    let bandwidth = args.bandwidth.unwrap_or(10.0 / params.subpulse_duration);
    let mut t = Table::new(&["snr_db", "crlb_tau_full", "crlb_tau_simpl", "crlb_omega_full", "crlb_omega_simpl"]);
    let mut singular = false;
    for &snr in args.snr.values() {
        let fp = FisherParams::from_snr_db(snr, bandwidth)?;
        let full = match crlb_full(&s, &params, &fp) {
            Ok(c) => Some(c.normalised(&params)),
            Err(Error::SingularFim { .. }) => {
                singular = true;
                None
            }
            Err(e) => return Err(e.into()),
        };
        let simple = crlb_simplified(&s, &params, &fp).normalised(&params);
        t.push(vec![
            snr.into(),
            full.map(|c| c.delay).into(),
            simple.delay.into(),
            full.map(|c| c.doppler).into(),
            simple.doppler.into(),
        ]);
    }
    if singular {
        eprintln!(
            "warning: the Fisher information is not positive definite at B = {bandwidth} Hz; \
             full CRLB fields are empty (increase --bandwidth)"
        );
    }
    Ok(vec![Artifact::table("crlb", &t, format)])
}

fn bler(args: &BlerArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let mut cfg = SimConfig::new(
        args.waveform.params()?,
        args.channel.model()?,
        args.snr.values().to_vec(),
        args.stopping.seed,
    );
    cfg.max_trials = args.stopping.max_trials;
    cfg.target_errors = args.stopping.target_errors;
    cfg.receiver = args.receiver.into();
    let records = run_bler(&cfg, &Parallel)?;
    let mut t = Table::new(&["snr_db", "trials", "errors", "bler", "ci95"]);
    for r in records {
        t.push(vec![r.snr_db.into(), r.trials.into(), r.errors.into(), r.bler.into(), r.ci95.into()]);
    }
    Ok(vec![Artifact::table("bler", &t, format)])
}

fn bounds(args: &BoundsArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let params = args.waveform.params()?;
    let model = args.channel.model()?;
    let spectrum = distance_spectrum(&params, args.spectrum.into())?;
    let mut t = Table::new(&["snr_db", "union", "nn", "new_upper"]);
    for &snr in args.snr.values() {
        let n0 = noise_psd_for_snr(&params, snr);
        let union = union_bound_from_spectrum(&spectrum, &params, &model, n0)?;
        let nn = nn_approximation(&params, &model, n0).ok();
        let new_upper = match model.kind {
            ChannelKind::Rayleigh => Some(new_upper_bound_rayleigh(&params, &model, n0, &GammaSearch::default())?.value),
            _ => None,
        };
        t.push(vec![snr.into(), union.into(), nn.into(), new_upper.map(Cell::Float).unwrap_or(Cell::Empty)]);
    }
    Ok(vec![Artifact::table("bounds", &t, format)])
}
