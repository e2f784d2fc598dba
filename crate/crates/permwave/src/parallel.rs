//! Rayon-backed runners.
//!
//! Every task owns its random stream and results are merged in task order, so
//! the output is bit-identical to the sequential core functions for any
//! number of workers.

use std::ops::Range;

use permwave_core::ambiguity::{caf, AmbiguitySurface, GridSpec, PslStats, PslStudy, RowEvaluator};
use permwave_core::sim::TrialExecutor;
use permwave_core::{Error, Result, WaveformParams, WaveformSymbol};
use rayon::prelude::*;

/// Bins of the PSL density estimate.
pub const PSL_BINS: usize = 50;

/// Runs trials on the current rayon pool.
#[derive(Debug, Clone, Copy, Default)]
pub struct Parallel;

impl TrialExecutor for Parallel {
    fn run(&self, trials: Range<u64>, trial: &(dyn Fn(u64) -> Result<bool> + Sync)) -> Result<Vec<bool>> {
        let outcomes: Vec<Result<bool>> = (trials.start as usize..trials.end as usize)
            .into_par_iter()
            .map(|t| trial(t as u64))
            .collect();
        // Report the earliest failing trial, as the sequential runner would.
        outcomes.into_iter().collect()
    }
}

/// Parallel counterpart of [`permwave_core::ambiguity::psl_statistics`].
pub fn psl_statistics(study: &PslStudy) -> Result<PslStats> {
    if study.samples == 0 {
        return Err(Error::InvalidParameter("PSL study needs at least one sample"));
    }
    let samples: Vec<Result<f64>> = (0..study.samples).into_par_iter().map(|i| study.sample(i as u64)).collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(PslStats::from_samples(samples, PSL_BINS))
}

/// Parallel counterpart of [`permwave_core::ambiguity::surface`], one task per delay row.
pub fn surface(symbol: &WaveformSymbol, params: &WaveformParams, grid: &GridSpec) -> AmbiguitySurface {
    let taus = grid.taus();
    let omegas = grid.omegas();
    let rows: Vec<Vec<f64>> = taus
        .par_iter()
        .map_init(
            || RowEvaluator::for_grid(symbol, params, grid),
            |eval, &tau| {
                let mut row = vec![0.0; omegas.len()];
                eval.row(tau, &mut row);
                row
            },
        )
        .collect();
    AmbiguitySurface {
        taus,
        omegas,
        values: rows.concat(),
        normalisation: caf(symbol, params, 0.0, 0.0).norm(),
        exclusion: None,
    }
}

/// A pool with `threads` workers, or one per available core.
pub fn thread_pool(threads: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let threads = match threads {
        Some(0) => anyhow::bail!("--threads must be at least 1"),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}
