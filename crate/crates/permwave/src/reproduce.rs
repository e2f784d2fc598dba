//! Figure bundles: simulated BLER with the analytic curves that apply to each
//! channel, in one long-format table.

use permwave_core::bounds::{
    distance_spectrum, new_upper_bound_rayleigh, nn_approximation, noise_psd_for_snr, union_bound_from_spectrum,
    GammaSearch, SpectrumMode,
};
use permwave_core::channel::ChannelModel;
use permwave_core::rng::derive_seed;
use permwave_core::sim::{run_bler, SimConfig};
use permwave_core::WaveformParams;

use crate::args::{Figure, ReproduceArgs, Scale, SnrRange};
use crate::commands::Artifact;
use crate::parallel::Parallel;
use crate::table::{Cell, Format, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Series {
    Simulation,
    Union,
    NearestNeighbour,
    NewUpper,
}

impl Series {
    fn name(self) -> &'static str {
        match self {
            Series::Simulation => "simulation",
            Series::Union => "union",
            Series::NearestNeighbour => "nn",
            Series::NewUpper => "new_upper",
        }
    }
}

/// Everything one figure draws.
#[derive(Debug, Clone)]
pub struct FigurePlan {
    pub params: WaveformParams,
    pub channels: Vec<ChannelModel>,
    series: Vec<Series>,
    pub default_snr: &'static str,
}

const RHO: f64 = 0.5;

pub fn plan(figure: Figure, scale: Scale) -> permwave_core::Result<FigurePlan> {
    let subpulses = match scale {
        Scale::Desk => 4,
        Scale::Paper => 8,
    };
    let params = WaveformParams::new(subpulses, 4);
    let desk = scale == Scale::Desk;
    let plan = match figure {
        Figure::Awgn => FigurePlan {
            params,
            channels: vec![ChannelModel::awgn(2)?, ChannelModel::awgn(4)?],
            series: if desk {
                vec![Series::Simulation, Series::Union, Series::NearestNeighbour]
            } else {
                vec![Series::Simulation, Series::NearestNeighbour]
            },
            default_snr: "0:2:20",
        },
        Figure::Rician => FigurePlan {
            params,
            channels: [0.25, 2.5, 10.0]
                .into_iter()
                .map(|k| ChannelModel::rician(2, k, RHO))
                .collect::<permwave_core::Result<_>>()?,
            series: vec![Series::Simulation, Series::NearestNeighbour],
            default_snr: "0:3:30",
        },
        Figure::Rayleigh => FigurePlan {
            params,
            channels: vec![ChannelModel::rayleigh(2, RHO)?, ChannelModel::rayleigh(4, RHO)?],
            series: vec![Series::Simulation, Series::NewUpper, Series::NearestNeighbour],
            default_snr: "0:3:30",
        },
    };
    Ok(plan)
}

pub fn run(args: &ReproduceArgs, format: Format) -> anyhow::Result<Vec<Artifact>> {
    let plan = plan(args.figure, args.scale)?;
    let snr = match &args.snr {
        Some(range) => range.clone(),
        None => plan.default_snr.parse::<SnrRange>().map_err(anyhow::Error::msg)?,
    };
    let snr = snr.values();
    let params = &plan.params;
    let mut t = Table::new(&["series", "antennas", "rician_k", "snr_db", "value", "trials", "errors", "ci95"]);
    for (curve, model) in plan.channels.iter().enumerate() {
        let k: Cell = if model.kind == permwave_core::channel::ChannelKind::Rician {
            model.rician_k.into()
        } else {
            Cell::Empty
        };
        let analytic_row = |series: Series, snr_db: f64, value: f64| {
            vec![
                series.name().into(),
                model.antennas.into(),
                k.clone(),
                snr_db.into(),
                value.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ]
        };
        for &series in &plan.series {
            match series {
                Series::Simulation => {
                    let seed = derive_seed(args.stopping.seed, &[curve as u64]);
                    let mut cfg = SimConfig::new(params.clone(), model.clone(), snr.to_vec(), seed);
                    cfg.max_trials = args.stopping.max_trials;
                    cfg.target_errors = args.stopping.target_errors;
                    for r in run_bler(&cfg, &Parallel)? {
                        t.push(vec![
                            series.name().into(),
                            model.antennas.into(),
                            k.clone(),
                            r.snr_db.into(),
                            r.bler.into(),
                            r.trials.into(),
                            r.errors.into(),
                            r.ci95.into(),
                        ]);
                    }
                }
                Series::Union => {
                    let spectrum = distance_spectrum(params, SpectrumMode::Aggregate)?;
                    for &s in snr {
                        let v = union_bound_from_spectrum(&spectrum, params, model, noise_psd_for_snr(params, s))?;
                        t.push(analytic_row(series, s, v));
                    }
                }
                Series::NearestNeighbour => {
                    for &s in snr {
                        let v = nn_approximation(params, model, noise_psd_for_snr(params, s))?;
                        t.push(analytic_row(series, s, v));
                    }
                }
                Series::NewUpper => {
                    for &s in snr {
                        let n0 = noise_psd_for_snr(params, s);
                        let v = new_upper_bound_rayleigh(params, model, n0, &GammaSearch::default())?.value;
                        t.push(analytic_row(series, s, v));
                    }
                }
            }
        }
    }
    let stem = format!("{}_{}", figure_name(args.figure), scale_name(args.scale));
    Ok(vec![Artifact::table(&stem, &t, format)])
}

fn figure_name(f: Figure) -> &'static str {
    match f {
        Figure::Awgn => "awgn",
        Figure::Rician => "rician",
        Figure::Rayleigh => "rayleigh",
    }
}

fn scale_name(s: Scale) -> &'static str {
    match s {
        Scale::Desk => "desk",
        Scale::Paper => "paper",
    }
}
