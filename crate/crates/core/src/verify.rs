//! Reproducible checks of the exact and statistical properties of the model,
//! one runner per numbered criterion. Used by the acceptance test target and
//! by `fasep verify`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coupling::{
    apply_substitution, cylinder_probability, high_density_start, run_coupled_with, CouplingOptions, CylinderPattern, SubstitutionMap,
};
use crate::dynamics::{
    insulated_window_observed, sample_uniform_ring, spaced_snapshots, ClockScheme, Event, InvariantMonitor,
    InvariantTally, Model, Observer, RateParams, Runner,
};
use crate::error::{Error, Result};
use crate::exact::{
    absorption_distribution, build_generator, enumerate_states, marginal_at_time, parse_rational,
    stationary_distribution, ExactDistribution,
};
use crate::lattice::LatticeConfig;
use crate::rng::substream;
use crate::stats::{add_gaps_with_margin, binomial_band_check, cylinder_counts_strided, tv_distance, EmpiricalDistribution, TestVerdict};
use crate::tasep::{final_config_tasep, gap_law_pooled, record_set, ring_final_measure};

pub const TV_TOLERANCE: f64 = 0.02;
pub const BAND_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Smaller grids and sample sizes; tolerances are unchanged.
    pub quick: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 2024, quick: false }
    }
}

impl VerifyOptions {
    fn scale(&self, full: u64, quick: u64) -> u64 {
        if self.quick {
            quick
        } else {
            full
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub summary: String,
    pub verdicts: Vec<TestVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantTally>,
    pub seconds: f64,
}

impl CriterionReport {
    fn new(id: u32, title: &str) -> Self {
        Self {
            id,
            title: title.into(),
            pass: true,
            summary: String::new(),
            verdicts: Vec::new(),
            invariants: None,
            seconds: 0.0,
        }
    }

    fn push(&mut self, v: TestVerdict) {
        self.pass &= v.pass;
        self.verdicts.push(v);
    }

    fn exact(&mut self, description: String, ok: bool) {
        self.push(TestVerdict {
            description,
            statistic: if ok { 0.0 } else { 1.0 },
            threshold: 0.0,
            pass: ok,
            samples: 0,
        });
    }

    fn finish(mut self, started: Instant) -> Self {
        self.seconds = started.elapsed().as_secs_f64();
        let failed = self.verdicts.iter().filter(|v| !v.pass).count();
        let head = format!("{}/{} checks passed", self.verdicts.len() - failed, self.verdicts.len());
        self.summary = match self.verdicts.iter().find(|v| !v.pass) {
            Some(v) => format!("{head}; first failure: {} = {:.4e} > {:.4e}", v.description, v.statistic, v.threshold),
            None => head,
        };
        self.pass &= !self.verdicts.is_empty();
        self
    }

    /// One line: `criterion N PASS|FAIL title: summary (seconds)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {} {} {}: {} ({:.1}s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.summary,
            self.seconds
        )
    }
}

const P_GRID: [&str; 5] = ["0", "1/4", "1/2", "3/4", "1"];

type ConfigLaw = BTreeMap<LatticeConfig, BigRational>;

/// Exact absorption laws from the uniform initial state, by `(L, N)` and `p`.
pub struct AbsorptionGrid {
    pub laws: BTreeMap<(usize, usize), Vec<(String, ConfigLaw)>>,
}

pub fn absorption_grid(max_len: usize) -> Result<AbsorptionGrid> {
    let mut laws = BTreeMap::new();
    for len in 4..=max_len {
        for particles in 1..len.div_ceil(2) {
            let space = enumerate_states(len, particles)?;
            let uniform = ExactDistribution::uniform(&space);
            let mut by_p = Vec::new();
            for p in P_GRID {
                let gen = build_generator(&space, &parse_rational(p)?, Model::Fasep)?;
                let law = absorption_distribution(&uniform, &gen, &space)?.by_config(&space);
                by_p.push((p.to_string(), law));
            }
            laws.insert((len, particles), by_p);
        }
    }
    Ok(AbsorptionGrid { laws })
}

fn grid_len(opts: &VerifyOptions) -> usize {
    if opts.quick {
        8
    } else {
        10
    }
}

pub fn criterion_1(grid: &AbsorptionGrid) -> CriterionReport {
    let started = Instant::now();
    let mut rep = CriterionReport::new(1, "absorption law does not depend on p");
    for (&(len, particles), by_p) in &grid.laws {
        let reference = &by_p[0].1;
        let same = by_p.iter().all(|(_, law)| law == reference);
        rep.exact(format!("L={len} N={particles}: identical for p in {{0,1/4,1/2,3/4,1}}"), same);
    }
    rep.finish(started)
}

pub fn criterion_2(grid: &AbsorptionGrid) -> CriterionReport {
    let started = Instant::now();
    let mut rep = CriterionReport::new(2, "absorption law equals the closed-form ring measure");
    for (&(len, particles), by_p) in &grid.laws {
        let closed = match ring_final_measure(len, particles) {
            Ok(m) => m,
            Err(e) => {
                rep.exact(format!("L={len} N={particles}: {e}"), false);
                continue;
            }
        };
        for (p, law) in by_p {
            rep.exact(format!("L={len} N={particles} p={p}"), *law == closed);
        }
    }
    rep.finish(started)
}

/// Tracks the record set along a trajectory.
struct RecordWatch {
    records: Vec<usize>,
    changed: u64,
}

impl Observer for RecordWatch {
    fn on_event(&mut self, ev: &Event<'_>) {
        let cfg = LatticeConfig::new(ev.topology, ev.sites.to_vec()).expect("binary sites");
        let same = record_set(&cfg).map(|r| r.sites == self.records).unwrap_or(false);
        self.changed += u64::from(!same);
    }
}

struct Both<'a, A, B>(&'a mut A, &'a mut B);

impl<A: Observer, B: Observer> Observer for Both<'_, A, B> {
    fn on_event(&mut self, ev: &Event<'_>) {
        self.0.on_event(ev);
        self.1.on_event(ev);
    }
}

pub fn criterion_3(opts: &VerifyOptions, tally: &mut InvariantTally) -> CriterionReport {
    let started = Instant::now();
    let mut rep = CriterionReport::new(3, "totally asymmetric final state matches the record construction");
    let configs = opts.scale(1000, 100);
    let params = RateParams::new(1.0).expect("p = 1");
    let mut seeds = substream(opts.seed, 3);
    for (len, particles) in [(12, 3), (16, 5), (20, 7)] {
        for scheme in [ClockScheme::SiteAssociated, ClockScheme::ParticleAssociated] {
            let mut mismatches = 0u64;
            let mut record_changes = 0u64;
            let mut failures = 0u64;
            for _ in 0..configs {
                let cfg = match sample_uniform_ring(len, particles, seeds.random()) {
                    Ok(c) => c,
                    Err(_) => {
                        failures += 1;
                        continue;
                    }
                };
                let expected = final_config_tasep(&cfg);
                let mut monitor = InvariantMonitor::new(&cfg);
                let mut watch = RecordWatch {
                    records: record_set(&cfg).map(|r| r.sites).unwrap_or_default(),
                    changed: 0,
                };
                let mut both = Both(&mut monitor, &mut watch);
                let run = Runner::new(Model::Fasep, params, scheme, seeds.random())
                    .observer(&mut both)
                    .run_to_absorption(&cfg, crate::dynamics::default_max_events(len));
                match (run, expected) {
                    (Ok(r), Ok(e)) => mismatches += u64::from(r.final_config != e || !e.is_frozen()),
                    _ => failures += 1,
                }
                record_changes += watch.changed;
                tally.add(monitor.tally());
            }
            let tag = format!("L={len} N={particles} {scheme:?}");
            rep.push(TestVerdict::at_most(
                format!("{tag}: final configurations differing from the record construction"),
                (mismatches + failures) as f64,
                0.0,
                configs,
            ));
            rep.push(TestVerdict::at_most(
                format!("{tag}: events changing the record set"),
                record_changes as f64,
                0.0,
                configs,
            ));
        }
    }
    rep.finish(started)
}

/// Gap sizes from windows this close to either end are not counted.
const WINDOW_MARGIN: usize = 100;
const WINDOW_LEN: usize = 4000;
const GAP_POOL: u64 = 20;

pub fn criterion_4(opts: &VerifyOptions, tally: &mut InvariantTally) -> CriterionReport {
    let started = Instant::now();
    let mut rep = CriterionReport::new(4, "insulated-window gap law");
    let target = opts.scale(100_000, 20_000);
    let mut seeds = substream(opts.seed, 4);
    for density in [0.25, 0.35] {
        let model = match gap_law_pooled(GAP_POOL, density) {
            Ok(v) => v.into_iter().enumerate().map(|(n, w)| (n as u64, w)).collect::<BTreeMap<u64, f64>>(),
            Err(e) => {
                rep.exact(format!("rho={density}: {e}"), false);
                continue;
            }
        };
        let mut per_p: Vec<(f64, BTreeMap<u64, f64>)> = Vec::new();
        for p in [0.0, 0.5, 1.0] {
            let params = RateParams::new(p).expect("p in [0, 1]");
            let mut hist = EmpiricalDistribution::new();
            let mut monitor = InvariantMonitor::default();
            let mut runs = 0u64;
            while hist.total() < target && runs < 100_000 {
                runs += 1;
                let run = insulated_window_observed(
                    density,
                    WINDOW_LEN,
                    params,
                    ClockScheme::SiteAssociated,
                    seeds.random(),
                    &mut monitor,
                );
                match run {
                    Ok(r) => add_gaps_with_margin(r.final_config.sites(), WINDOW_MARGIN, &mut hist),
                    Err(e) => {
                        rep.exact(format!("rho={density} p={p}: {e}"), false);
                        break;
                    }
                }
            }
            tally.add(monitor.tally());
            let pooled = hist.map_keys(|&n| n.min(GAP_POOL)).weights();
            let tv = tv_distance(&pooled, &model).unwrap_or(f64::INFINITY);
            rep.push(TestVerdict::at_most(
                format!("rho={density} p={p}: TV to the gap law"),
                tv,
                TV_TOLERANCE,
                hist.total(),
            ));
            per_p.push((p, pooled));
        }
        for i in 0..per_p.len() {
            for j in i + 1..per_p.len() {
                let tv = tv_distance(&per_p[i].1, &per_p[j].1).unwrap_or(f64::INFINITY);
                rep.push(TestVerdict::at_most(
                    format!("rho={density}: TV between p={} and p={}", per_p[i].0, per_p[j].0),
                    tv,
                    TV_TOLERANCE,
                    target,
                ));
            }
        }
    }
    rep.finish(started)
}

pub fn criterion_5(_opts: &VerifyOptions) -> CriterionReport {
    let started = Instant::now();
    let mut rep = CriterionReport::new(5, "stationary law is uniform on configurations without adjacent holes");
    for (len, particles) in [(6, 4), (7, 4), (8, 5), (9, 5), (10, 6)] {
        for p in ["1/4", "1/2", "3/4"] {
            let tag = format!("L={len} N={particles} p={p}");
            let result = (|| -> Result<bool> {
                let space = enumerate_states(len, particles)?;
                let gen = build_generator(&space, &parse_rational(p)?, Model::Fasep)?;
                let pi = stationary_distribution(&gen)?;
                let support: BTreeSet<usize> = (0..space.len())
                    .filter(|&i| space.config(i).is_no_adjacent_holes())
                    .collect();
                let mass = BigRational::new(1.into(), support.len().into());
                Ok(pi.weights.keys().copied().collect::<BTreeSet<_>>() == support
                    && pi.weights.values().all(|w| *w == mass))
            })();
            match result {
                Ok(ok) => rep.exact(tag, ok),
                Err(e) => rep.exact(format!("{tag}: {e}"), false),
            }
        }
    }
    rep.finish(started)
}

/// Stationary facilitated rings: independent chains, each started from an
/// exact stationary sample and run for a burn-in before its snapshots are
/// taken. Lengths are in events per site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderExperiment {
    pub density: f64,
    pub len: usize,
    pub p: f64,
    pub scheme: ClockScheme,
    pub chains: usize,
    pub snapshots_per_chain: usize,
    pub burn_in_sweeps: u64,
    pub spacing_sweeps: u64,
    /// Distance between sampled positions along a snapshot.
    pub stride: usize,
    pub max_m: usize,
}

impl CylinderExperiment {
    pub fn new(density: f64, len: usize, chains: usize) -> Self {
        Self {
            density,
            len,
            p: 0.75,
            scheme: ClockScheme::SiteAssociated,
            chains,
            snapshots_per_chain: 1,
            burn_in_sweeps: 100,
            spacing_sweeps: 50,
            stride: 8,
            max_m: 4,
        }
    }

    /// Pattern counts for `m = 1..=max_m`.
    pub fn run(&self, seed: u64, observer: &mut dyn Observer) -> Result<Vec<EmpiricalDistribution<String>>> {
        let params = RateParams::new(self.p)?;
        let mut seeds = substream(seed, 6);
        let mut configs = Vec::with_capacity(self.chains * self.snapshots_per_chain);
        for _ in 0..self.chains {
            let chain_seed: u64 = seeds.random();
            let start = high_density_start(self.len, self.density, chain_seed)?;
            let l = start.len() as u64;
            configs.extend(spaced_snapshots(
                &start,
                Model::Fasep,
                params,
                self.scheme,
                chain_seed,
                self.burn_in_sweeps * l,
                self.spacing_sweeps * l,
                self.snapshots_per_chain,
                observer,
            ));
        }
        (1..=self.max_m)
            .map(|m| cylinder_counts_strided(&configs, m, self.stride))
            .collect()
    }

    /// Density of the sampled ring, which can differ from the requested one by rounding.
    pub fn actual_density(&self) -> f64 {
        (self.density * self.len as f64).round() / self.len as f64
    }
}

pub fn cylinder_model(m: usize, density: f64) -> Result<BTreeMap<String, f64>> {
    CylinderPattern::all(m)
        .into_iter()
        .map(|t| Ok((t.to_string(), cylinder_probability(&t, density)?)))
        .collect()
}

pub fn criterion_6(opts: &VerifyOptions, tally: &mut InvariantTally) -> CriterionReport {
    let started = Instant::now();
    let mut rep = CriterionReport::new(6, "stationary cylinder probabilities at density 0.7");
    let density = 0.7;
    for m in 1..=4 {
        let mut worst: f64 = 0.0;
        for theta in CylinderPattern::all(m) {
            let base = cylinder_probability(&theta, density).unwrap_or(f64::NAN);
            let mut right = 0.0;
            let mut left = 0.0;
            for b in [0u8, 1] {
                let mut r = theta.bits().to_vec();
                r.push(b);
                let mut l = vec![b];
                l.extend_from_slice(theta.bits());
                right += CylinderPattern::new(r).and_then(|t| cylinder_probability(&t, density)).unwrap_or(f64::NAN);
                left += CylinderPattern::new(l).and_then(|t| cylinder_probability(&t, density)).unwrap_or(f64::NAN);
            }
            worst = worst.max((base - right).abs()).max((base - left).abs());
        }
        let total: f64 = CylinderPattern::all(m)
            .iter()
            .map(|t| cylinder_probability(t, density).unwrap_or(f64::NAN))
            .sum();
        worst = worst.max((total - 1.0).abs());
        rep.push(TestVerdict::at_most(format!("m={m}: formula consistency"), worst, 1e-12, 0));
    }

    let exp = CylinderExperiment::new(density, 1000, opts.scale(1000, 200) as usize);
    let mut monitor = InvariantMonitor::watching_holes();
    let counts = match exp.run(opts.seed, &mut monitor) {
        Ok(c) => c,
        Err(e) => {
            rep.exact(e.to_string(), false);
            return rep.finish(started);
        }
    };
    tally.add(monitor.tally());
    rep.push(TestVerdict::at_most(
        "events checked by the no-adjacent-holes monitor",
        if monitor.events_checked > 0 { 0.0 } else { 1.0 },
        0.0,
        monitor.events_checked,
    ));
    for (emp, m) in counts.iter().zip(1..) {
        let verdict = cylinder_model(m, density).and_then(|model| binomial_band_check(emp, &model, BAND_SIGMAS));
        match verdict {
            Ok(mut v) => {
                v.description = format!("m={m}: {}", v.description);
                rep.push(v);
            }
            Err(e) => rep.exact(format!("m={m}: {e}"), false),
        }
    }
    rep.finish(started)
}

fn law_from_samples(samples: &EmpiricalDistribution<LatticeConfig>) -> BTreeMap<LatticeConfig, f64> {
    samples.weights()
}

/// Exact law at time `t` from a point mass, keyed by configuration.
fn exact_marginal(initial: &LatticeConfig, p: &str, t: f64) -> Result<BTreeMap<LatticeConfig, f64>> {
    let space = enumerate_states(initial.len(), initial.particle_count())?;
    let gen = build_generator(&space, &parse_rational(p)?, Model::Fasep)?;
    let idx = space.index_of(initial).ok_or_else(|| Error::InvalidParameter("initial state not in space".into()))?;
    let dense = marginal_at_time(&ExactDistribution::point(idx).to_dense_f64(space.len()), &gen, t)?;
    Ok(dense
        .into_iter()
        .enumerate()
        .filter(|(_, w)| *w > 0.0)
        .map(|(i, w)| (space.config(i), w))
        .collect())
}

pub fn criterion_7(opts: &VerifyOptions, tally: &mut InvariantTally) -> CriterionReport {
    let started = Instant::now();
    let mut rep = CriterionReport::new(7, "coupling with plain exclusion");
    let mut seeds = substream(opts.seed, 7);
    let initials = opts.scale(100, 20);
    let (mut checks, mut violations, mut hole_pairs) = (0u64, 0u64, 0u64);
    for i in 0..initials {
        let particles = seeds.random_range(1..50);
        let p = [0.0, 0.3, 0.5, 0.8, 1.0][i as usize % 5];
        let asep = match sample_uniform_ring(50, particles, seeds.random()) {
            Ok(a) => a,
            Err(e) => {
                rep.exact(e.to_string(), false);
                continue;
            }
        };
        let copts = CouplingOptions {
            max_events: Some(10_000),
            ..CouplingOptions::default()
        };
        match run_coupled_with(&asep, RateParams::new(p).expect("valid p"), seeds.random(), copts) {
            Ok(run) => {
                checks += run.checks;
                violations += run.violations;
                hole_pairs += run.hole_pair_violations;
            }
            Err(e) => rep.exact(e.to_string(), false),
        }
    }
    tally.add(InvariantTally {
        events_checked: checks,
        double_zero_violations: 0,
        no_adjacent_holes_violations: hole_pairs,
    });
    rep.push(TestVerdict::at_most(
        format!("{initials} coupled runs: correspondence failures"),
        violations as f64,
        0.0,
        checks,
    ));

    let samples = opts.scale(100_000, 20_000);
    let t = 1.0;
    for (asep_str, p) in [("11000", "0.7"), ("111000", "0.3")] {
        let asep: LatticeConfig = format!("ring:{asep_str}").parse().expect("valid ring");
        let (image, _) = apply_substitution(SubstitutionMap::HighDensity, &asep);
        let pf: f64 = p.parse().expect("decimal");
        let params = RateParams::new(pf).expect("valid p");
        let exact = match exact_marginal(&image, p, t) {
            Ok(e) => e,
            Err(e) => {
                rep.exact(e.to_string(), false);
                continue;
            }
        };
        let mut coupled = EmpiricalDistribution::new();
        let mut direct = EmpiricalDistribution::new();
        let mut monitor = InvariantMonitor::new(&image);
        for _ in 0..samples {
            let copts = CouplingOptions {
                t_end: t,
                ..CouplingOptions::default()
            };
            if let Ok(run) = run_coupled_with(&asep, params, seeds.random(), copts) {
                coupled.add(run.final_state.fasep);
            }
            if let Ok(run) = Runner::new(Model::Fasep, params, ClockScheme::ParticleAssociated, seeds.random())
                .observer(&mut monitor)
                .run_for_time(&image, t)
            {
                direct.add(run.final_config);
            }
        }
        tally.add(monitor.tally());
        for (name, emp) in [("coupled", &coupled), ("direct", &direct)] {
            let tv = tv_distance(&law_from_samples(emp), &exact).unwrap_or(f64::INFINITY);
            rep.push(TestVerdict::at_most(
                format!("image of {asep_str} p={p} t={t}: TV of {name} run to exact marginal"),
                tv,
                TV_TOLERANCE,
                emp.total(),
            ));
        }
    }
    rep.finish(started)
}

pub fn criterion_8(opts: &VerifyOptions, tally: &mut InvariantTally) -> CriterionReport {
    let started = Instant::now();
    let mut rep = CriterionReport::new(8, "both clock schemes reproduce the exact time marginal");
    let initial: LatticeConfig = "ring:111000".parse().expect("valid ring");
    let (p, t) = ("0.7", 1.0);
    let exact = match exact_marginal(&initial, p, t) {
        Ok(e) => e,
        Err(e) => {
            rep.exact(e.to_string(), false);
            return rep.finish(started);
        }
    };
    let params = RateParams::new(0.7).expect("valid p");
    let samples = opts.scale(100_000, 20_000);
    for (k, scheme) in [ClockScheme::SiteAssociated, ClockScheme::ParticleAssociated].into_iter().enumerate() {
        let mut emp = EmpiricalDistribution::new();
        let mut monitor = InvariantMonitor::new(&initial);
        for s in 0..samples {
            let run = Runner::new(Model::Fasep, params, scheme, opts.seed)
                .stream(8 * (s + 1) + k as u64)
                .observer(&mut monitor)
                .run_for_time(&initial, t);
            if let Ok(r) = run {
                emp.add(r.final_config);
            }
        }
        tally.add(monitor.tally());
        let tv = tv_distance(&emp.weights(), &exact).unwrap_or(f64::INFINITY);
        rep.push(TestVerdict::at_most(
            format!("L=6 N=3 p={p} t={t} {scheme:?}: TV to exact marginal"),
            tv,
            TV_TOLERANCE,
            emp.total(),
        ));
    }
    rep.finish(started)
}

pub fn criterion_9(tally: InvariantTally, elapsed: f64) -> CriterionReport {
    let mut rep = CriterionReport::new(9, "dynamical invariants over all stochastic runs");
    rep.push(TestVerdict::at_most(
        format!("new 00 pairs over {} monitored events", tally.events_checked),
        tally.double_zero_violations as f64,
        0.0,
        tally.events_checked,
    ));
    rep.push(TestVerdict::at_most(
        "adjacent holes appearing in runs started without them",
        tally.no_adjacent_holes_violations as f64,
        0.0,
        tally.events_checked,
    ));
    rep.pass &= tally.events_checked > 0;
    rep.invariants = Some(tally);
    let mut rep = rep.finish(Instant::now());
    rep.seconds = elapsed;
    rep
}

/// Runs criteria 1 to 9 in order, handing each report to `on_report` as soon
/// as it is available.
pub fn run_all(opts: &VerifyOptions, mut on_report: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    let mut reports = Vec::new();
    let mut emit = |r: CriterionReport, reports: &mut Vec<CriterionReport>| {
        on_report(&r);
        reports.push(r);
    };
    let started = Instant::now();
    match absorption_grid(grid_len(opts)) {
        Ok(grid) => {
            let mut r1 = criterion_1(&grid);
            r1.seconds += started.elapsed().as_secs_f64();
            emit(r1, &mut reports);
            emit(criterion_2(&grid), &mut reports);
        }
        Err(e) => {
            for (id, title) in [(1, "absorption law does not depend on p"), (2, "absorption law equals the closed-form ring measure")] {
                let mut r = CriterionReport::new(id, title);
                r.exact(format!("exact solver: {e}"), false);
                emit(r.finish(started), &mut reports);
            }
        }
    }
    let mut tally = InvariantTally::default();
    let mut stochastic = 0.0;
    let r = criterion_3(opts, &mut tally);
    stochastic += r.seconds;
    emit(r, &mut reports);
    let r = criterion_4(opts, &mut tally);
    stochastic += r.seconds;
    emit(r, &mut reports);
    emit(criterion_5(opts), &mut reports);
    for f in [criterion_6, criterion_7, criterion_8] {
        let r = f(opts, &mut tally);
        stochastic += r.seconds;
        emit(r, &mut reports);
    }
    emit(criterion_9(tally, stochastic), &mut reports);
    reports
}

/// Runs a single criterion; 9 needs the stochastic criteria and runs them too.
pub fn run_one(opts: &VerifyOptions, id: u32) -> Result<Vec<CriterionReport>> {
    let mut tally = InvariantTally::default();
    let r = match id {
        1 | 2 => {
            let started = Instant::now();
            let grid = absorption_grid(grid_len(opts))?;
            let mut r = if id == 1 { criterion_1(&grid) } else { criterion_2(&grid) };
            r.seconds = started.elapsed().as_secs_f64();
            r
        }
        3 => criterion_3(opts, &mut tally),
        4 => criterion_4(opts, &mut tally),
        5 => criterion_5(opts),
        6 => criterion_6(opts, &mut tally),
        7 => criterion_7(opts, &mut tally),
        8 => criterion_8(opts, &mut tally),
        9 => return Ok(run_all(opts, |_| {}).into_iter().filter(|r| r.id == 9).collect()),
        _ => return Err(Error::InvalidParameter(format!("no criterion {id}"))),
    };
    Ok(vec![r])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_passes() {
        let grid = absorption_grid(6).unwrap();
        assert!(criterion_1(&grid).pass);
        assert!(criterion_2(&grid).pass);
    }

    #[test]
    fn report_line() {
        let mut r = CriterionReport::new(3, "x");
        r.exact("a".into(), true);
        let r = r.finish(Instant::now());
        assert!(r.line().starts_with("criterion 3 PASS x: 1/1 checks passed"));
    }
}
