use serde::{Deserialize, Serialize};

use super::engine::{Engine, Step};
use super::{ClockScheme, Model, Move, RateParams};
use crate::error::{Error, Result};
use crate::lattice::{LatticeConfig, Topology};
use crate::rng::{substream, SimRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub config: LatticeConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: Model,
    pub seed: u64,
    pub params: RateParams,
    pub scheme: ClockScheme,
    pub initial: LatticeConfig,
    #[serde(rename = "final")]
    pub final_config: LatticeConfig,
    pub events: u64,
    pub process_time: f64,
    pub bond_current: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<Snapshot>,
}

/// State right after an accepted jump.
pub struct Event<'a> {
    pub time: f64,
    pub events: u64,
    pub mv: Move,
    pub sites: &'a [u8],
    pub topology: Topology,
    pub bond_current: i64,
}

pub trait Observer {
    fn on_event(&mut self, ev: &Event<'_>);
}

impl<F: FnMut(&Event<'_>)> Observer for F {
    fn on_event(&mut self, ev: &Event<'_>) {
        self(ev)
    }
}

pub fn default_max_events(len: usize) -> u64 {
    100 * (len as u64) * (len as u64)
}

/// Configurable driver around [`Engine`].
pub struct Runner<'o> {
    model: Model,
    params: RateParams,
    scheme: ClockScheme,
    seed: u64,
    stream: u64,
    snapshot_every: Option<f64>,
    observer: Option<&'o mut dyn Observer>,
}

impl<'o> Runner<'o> {
    pub fn new(model: Model, params: RateParams, scheme: ClockScheme, seed: u64) -> Self {
        Self {
            model,
            params,
            scheme,
            seed,
            stream: 0,
            snapshot_every: None,
            observer: None,
        }
    }

    pub fn stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn snapshot_every(mut self, dt: Option<f64>) -> Self {
        self.snapshot_every = dt.filter(|d| *d > 0.0 && d.is_finite());
        self
    }

    pub fn observer(mut self, obs: &'o mut dyn Observer) -> Self {
        self.observer = Some(obs);
        self
    }

    /// Runs until process time `t_end`.
    pub fn run_for_time(self, initial: &LatticeConfig, t_end: f64) -> Result<RunRecord> {
        if t_end.is_nan() || t_end < 0.0 {
            return Err(Error::InvalidParameter(format!("t_end = {t_end} must be >= 0")));
        }
        let (record, _) = self.drive(initial, t_end, u64::MAX)?;
        Ok(record)
    }

    /// Runs until no positive-rate move is enabled.
    pub fn run_to_absorption(self, initial: &LatticeConfig, max_events: u64) -> Result<RunRecord> {
        if max_events == 0 {
            return Err(Error::InvalidParameter("max_events must be positive".into()));
        }
        match self.drive(initial, f64::INFINITY, max_events)? {
            (record, true) => Ok(record),
            (_, false) => Err(Error::MaxEventsExceeded(max_events)),
        }
    }

    fn drive(mut self, initial: &LatticeConfig, t_end: f64, max_events: u64) -> Result<(RunRecord, bool)> {
        let mut rng: SimRng = substream(self.seed, self.stream);
        let mut engine = Engine::new(initial, self.model, self.params);
        let mut grid = self.snapshot_every.map(|dt| SnapshotGrid { dt, next: 0, t_end });
        let mut snapshots = Vec::new();
        let absorbed = loop {
            if engine.events() >= max_events {
                break engine.is_absorbed();
            }
            match engine.step(&mut rng, self.scheme, t_end) {
                Step::Moved(mv) => {
                    if let Some(g) = grid.as_mut() {
                        if g.due_before(engine.time()) {
                            let mut prev = engine.config().into_sites();
                            let n = prev.len();
                            prev.swap(mv.bond, (mv.bond + 1) % n);
                            let prev = LatticeConfig::new(engine.topology(), prev)?;
                            g.fill(engine.time(), false, &prev, &mut snapshots);
                        }
                    }
                    if let Some(obs) = self.observer.as_deref_mut() {
                        obs.on_event(&Event {
                            time: engine.time(),
                            events: engine.events(),
                            mv,
                            sites: engine.sites(),
                            topology: engine.topology(),
                            bond_current: engine.bond_current(),
                        });
                    }
                }
                Step::Rejected => {}
                Step::Absorbed => break true,
                Step::Horizon => break engine.is_absorbed(),
            }
        };
        let last = engine.config();
        let process_time = if t_end.is_finite() && (absorbed || engine.time() >= t_end) {
            t_end
        } else {
            engine.time()
        };
        if let Some(g) = grid.as_mut() {
            g.fill(process_time, true, &last, &mut snapshots);
        }
        let record = RunRecord {
            model: self.model,
            seed: self.seed,
            params: self.params,
            scheme: self.scheme,
            initial: initial.clone(),
            final_config: last,
            events: engine.events(),
            process_time,
            bond_current: engine.bond_current(),
            snapshots,
        };
        Ok((record, absorbed))
    }
}

struct SnapshotGrid {
    dt: f64,
    next: u64,
    t_end: f64,
}

impl SnapshotGrid {
    fn time(&self) -> f64 {
        self.next as f64 * self.dt
    }

    fn due_before(&self, t: f64) -> bool {
        self.time() < t && self.time() <= self.t_end
    }

    /// Records `cfg` at every grid time before `upto` (or at it, if `inclusive`).
    fn fill(&mut self, upto: f64, inclusive: bool, cfg: &LatticeConfig, out: &mut Vec<Snapshot>) {
        loop {
            let t = self.time();
            if t > self.t_end || t > upto || (!inclusive && t == upto) {
                break;
            }
            out.push(Snapshot {
                time: t,
                config: cfg.clone(),
            });
            self.next += 1;
        }
    }
}

/// Facilitated dynamics until a frozen configuration is reached.
pub fn run_to_frozen(
    cfg: &LatticeConfig,
    params: RateParams,
    scheme: ClockScheme,
    seed: u64,
    max_events: u64,
) -> Result<RunRecord> {
    let record = Runner::new(Model::Fasep, params, scheme, seed).run_to_absorption(cfg, max_events)?;
    if !record.final_config.is_frozen() {
        return Err(Error::StuckAtBoundary);
    }
    Ok(record)
}

pub fn run_for_time(
    cfg: &LatticeConfig,
    params: RateParams,
    scheme: ClockScheme,
    seed: u64,
    t_end: f64,
) -> Result<RunRecord> {
    Runner::new(Model::Fasep, params, scheme, seed).run_for_time(cfg, t_end)
}

pub fn run_asep_for_time(
    cfg: &LatticeConfig,
    params: RateParams,
    scheme: ClockScheme,
    seed: u64,
    t_end: f64,
) -> Result<RunRecord> {
    Runner::new(Model::Asep, params, scheme, seed).run_for_time(cfg, t_end)
}

/// Configurations seen every `spacing` events after `burn_in` events of a
/// single long trajectory. A trajectory that gets absorbed repeats its final
/// configuration.
#[allow(clippy::too_many_arguments)]
pub fn spaced_snapshots(
    initial: &LatticeConfig,
    model: Model,
    params: RateParams,
    scheme: ClockScheme,
    seed: u64,
    burn_in: u64,
    spacing: u64,
    count: usize,
    observer: &mut dyn Observer,
) -> Vec<LatticeConfig> {
    let mut rng = substream(seed, 0);
    let mut engine = Engine::new(initial, model, params);
    let mut advance = |engine: &mut Engine, events: u64| {
        let stop = engine.events() + events;
        while engine.events() < stop {
            match engine.step(&mut rng, scheme, f64::INFINITY) {
                Step::Moved(mv) => observer.on_event(&Event {
                    time: engine.time(),
                    events: engine.events(),
                    mv,
                    sites: engine.sites(),
                    topology: engine.topology(),
                    bond_current: engine.bond_current(),
                }),
                Step::Rejected => {}
                Step::Absorbed | Step::Horizon => break,
            }
        }
    };
    advance(&mut engine, burn_in);
    (0..count)
        .map(|_| {
            advance(&mut engine, spacing);
            engine.config()
        })
        .collect()
}
