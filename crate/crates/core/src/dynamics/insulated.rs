use std::ops::Range;

use super::{bernoulli_sites, default_max_events, ClockScheme, Event, Model, Observer, RateParams, RunRecord, Runner};
use crate::error::{Error, Result};
use crate::lattice::{LatticeConfig, Topology};
use crate::rng::substream;

const MAX_RESAMPLES: u64 = 10_000;

/// Range from the first `00` pair to the last one, both pairs included.
pub fn trim_to_insulated(sites: &[u8]) -> Option<Range<usize>> {
    let pair = |i: &usize| sites[*i] == 0 && sites[*i + 1] == 0;
    let n = sites.len();
    if n < 4 {
        return None;
    }
    let first = (0..n - 1).find(pair)?;
    let last = (0..n - 1).rev().find(pair)?;
    (last >= first + 2).then(|| first..last + 2)
}

/// Facilitated dynamics in a closed window, run until no move is enabled.
///
/// At `p = 0` or `p = 1` particles can pile up against an end so the final
/// configuration need not be frozen there; the region between surviving `00`
/// pairs is always frozen.
pub fn run_insulated(
    window: &LatticeConfig,
    params: RateParams,
    scheme: ClockScheme,
    seed: u64,
    stream: u64,
) -> Result<RunRecord> {
    run_insulated_observed(window, params, scheme, seed, stream, &mut |_: &Event<'_>| {})
}

pub fn run_insulated_observed(
    window: &LatticeConfig,
    params: RateParams,
    scheme: ClockScheme,
    seed: u64,
    stream: u64,
    observer: &mut dyn Observer,
) -> Result<RunRecord> {
    let window = LatticeConfig::new(Topology::ClosedWindow, window.sites().to_vec())?;
    Runner::new(Model::Fasep, params, scheme, seed)
        .stream(stream)
        .observer(observer)
        .run_to_absorption(&window, default_max_events(window.len()))
}

/// Samples a Bernoulli window of `len` sites, cuts it down to the part
/// enclosed by its outermost `00` pairs and evolves it to absorption.
pub fn insulated_window_experiment(
    density: f64,
    len: usize,
    params: RateParams,
    scheme: ClockScheme,
    seed: u64,
) -> Result<RunRecord> {
    insulated_window_observed(density, len, params, scheme, seed, &mut |_: &Event<'_>| {})
}

pub fn insulated_window_observed(
    density: f64,
    len: usize,
    params: RateParams,
    scheme: ClockScheme,
    seed: u64,
    observer: &mut dyn Observer,
) -> Result<RunRecord> {
    if !(density > 0.0 && density < 0.5) {
        return Err(Error::InvalidParameter(format!("density {density} outside (0, 1/2)")));
    }
    for attempt in 0..MAX_RESAMPLES {
        let mut rng = substream(seed, 2 * attempt);
        let sites = bernoulli_sites(&mut rng, len, density);
        if let Some(r) = trim_to_insulated(&sites) {
            let window = LatticeConfig::new(Topology::ClosedWindow, sites[r].to_vec())?;
            return run_insulated_observed(&window, params, scheme, seed, 2 * attempt + 1, observer);
        }
    }
    Err(Error::InvalidParameter(format!(
        "no pair of empty sites found in {MAX_RESAMPLES} windows of {len} sites"
    )))
}
