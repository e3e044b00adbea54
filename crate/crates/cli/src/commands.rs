use std::collections::BTreeMap;

use fasep_core::coupling::{run_coupled_with, CoupledRun, CouplingOptions};
use fasep_core::dynamics::{
    bernoulli_sites, default_max_events, insulated_window_experiment, uniform_ring_sites, RunRecord, Runner,
};
use fasep_core::exact::{
    absorption_distribution, build_generator, enumerate_states, parse_rational, stationary_distribution,
    ExactDistribution,
};
use fasep_core::rng::substream;
use fasep_core::stats::{add_gaps_with_margin, binomial_band_check, tv_distance, EmpiricalDistribution};
use fasep_core::tasep::{gap_law_pooled, ring_final_measure};
use fasep_core::verify::{cylinder_model, run_all, run_one, CylinderExperiment, VerifyOptions};
use fasep_core::{Error, LatticeConfig, Model, RateParams, Topology};
use num::{BigRational, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::fail::CliError;
use crate::output::Output;
use crate::spec::{ExperimentSpec, LawArg, TopologyArg};

fn rate(text: &str) -> Result<(BigRational, RateParams), CliError> {
    let r = parse_rational(text)?;
    let p = RateParams::new(r.to_f64().unwrap_or(f64::NAN))?;
    Ok((r, p))
}

/// `1/4` becomes `1_4`, for file names.
fn tag(p: &str) -> String {
    p.replace('/', "_")
}

fn initial_config(spec: &ExperimentSpec, seed: u64) -> Result<LatticeConfig, CliError> {
    if let Some(text) = &spec.initial {
        return Ok(text.parse()?);
    }
    let len = ExperimentSpec::require(spec.len, "len")?;
    let topology = match spec.topology.unwrap_or(TopologyArg::Ring) {
        TopologyArg::Ring => Topology::Ring,
        TopologyArg::Window => Topology::ClosedWindow,
    };
    let mut rng = substream(seed, 1);
    let sites = match (spec.particles, spec.density) {
        (Some(n), None) => uniform_ring_sites(&mut rng, len, n)?,
        (None, Some(rho)) if (0.0..=1.0).contains(&rho) => bernoulli_sites(&mut rng, len, rho),
        (None, Some(rho)) => return Err(CliError::Spec(format!("density {rho} outside [0, 1]"))),
        _ => return Err(CliError::Spec("give exactly one of --particles and --density".into())),
    };
    Ok(LatticeConfig::new(topology, sites)?)
}

pub fn simulate(spec: &ExperimentSpec, out: &mut Output) -> Result<(), CliError> {
    let model = spec.model();
    let ps = spec.p_list(&[]);
    if ps.is_empty() {
        return Err(CliError::Spec("missing --p".into()));
    }
    if spec.t_end.is_some() == spec.to_frozen {
        return Err(CliError::Spec("give exactly one of --t-end and --to-frozen".into()));
    }
    if spec.to_frozen && model == Model::Asep {
        return Err(CliError::Spec("--to-frozen applies to the facilitated model only".into()));
    }
    let mut records: Vec<RunRecord> = Vec::new();
    for p in &ps {
        let (_, params) = rate(p)?;
        for seed in spec.seed_list() {
            let initial = initial_config(spec, seed)?;
            let runner = Runner::new(model, params, spec.scheme(), seed).snapshot_every(spec.snapshot_every);
            let record = match spec.t_end {
                Some(t) => runner.run_for_time(&initial, t)?,
                None => {
                    let (l, n) = (initial.len(), initial.particle_count());
                    if initial.is_ring() && 2 * n >= l {
                        return Err(CliError::Dynamics(format!(
                            "ring with N = {n} >= L/2 = {} has no frozen final state to run to",
                            l as f64 / 2.0
                        )));
                    }
                    let max = spec.max_events.unwrap_or_else(|| default_max_events(l));
                    let r = runner.run_to_absorption(&initial, max)?;
                    if !r.final_config.is_frozen() {
                        return Err(Error::StuckAtBoundary.into());
                    }
                    r
                }
            };
            records.push(record);
        }
    }
    out.jsonl("simulate.jsonl", &records)?;
    for r in &records {
        println!(
            "seed {} p {}: {} -> {} after {} events (t = {:.4})",
            r.seed,
            r.params.p(),
            r.initial,
            r.final_config,
            r.events,
            r.process_time
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct ExactVerdict {
    law: &'static str,
    sites: usize,
    particles: usize,
    states: usize,
    p_values: Vec<String>,
    p_independent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    matches_closed_form: Option<bool>,
}

fn law_rows(law: &BTreeMap<LatticeConfig, BigRational>) -> Vec<Vec<String>> {
    law.iter()
        .map(|(c, w)| vec![c.to_string(), w.numer().to_string(), w.denom().to_string()])
        .collect()
}

pub fn exact(spec: &ExperimentSpec, out: &mut Output) -> Result<(), CliError> {
    let len = ExperimentSpec::require(spec.len, "len")?;
    let particles = ExperimentSpec::require(spec.particles, "particles")?;
    let model = spec.model();
    let ps = spec.p_list(&["1/4", "3/4"]);
    let space = enumerate_states(len, particles)?;
    let absorption = match spec.law.unwrap_or(LawArg::Auto) {
        LawArg::Auto => model == Model::Fasep && 2 * particles < len,
        LawArg::Absorption => true,
        LawArg::Stationary => false,
    };
    let start = match &spec.initial {
        Some(text) => {
            let cfg: LatticeConfig = text.parse()?;
            let idx = space
                .index_of(&cfg)
                .ok_or_else(|| CliError::Spec(format!("{cfg} is not a ring with L = {len}, N = {particles}")))?;
            ExactDistribution::point(idx)
        }
        None => ExactDistribution::uniform(&space),
    };
    let mut laws = Vec::new();
    for p in &ps {
        let (r, _) = rate(p)?;
        let gen = build_generator(&space, &r, model)?;
        let dist = if absorption {
            absorption_distribution(&start, &gen, &space)?
        } else {
            stationary_distribution(&gen)?
        };
        let law = dist.by_config(&space);
        out.csv(&format!("exact_p{}.csv", tag(p)), &["config", "numerator", "denominator"], &law_rows(&law))?;
        laws.push(law);
    }
    let p_independent = laws.windows(2).all(|w| w[0] == w[1]);
    let mut matches_closed_form = None;
    if absorption && model == Model::Fasep && spec.initial.is_none() {
        let closed = ring_final_measure(len, particles)?;
        out.csv("closed_form.csv", &["config", "numerator", "denominator"], &law_rows(&closed))?;
        matches_closed_form = Some(laws.iter().all(|l| *l == closed));
    }
    let verdict = ExactVerdict {
        law: if absorption { "absorption" } else { "stationary" },
        sites: len,
        particles,
        states: space.len(),
        p_values: ps,
        p_independent,
        matches_closed_form,
    };
    out.json("exact_verdict.json", &verdict)?;
    println!(
        "{} law, L = {len}, N = {particles}, {} states, {} configurations in support; p-independent: {}{}",
        verdict.law,
        verdict.states,
        laws.first().map_or(0, BTreeMap::len),
        p_independent,
        matches_closed_form.map_or(String::new(), |m| format!("; equals closed form: {m}"))
    );
    Ok(())
}

pub fn couple(spec: &ExperimentSpec, out: &mut Output) -> Result<(), CliError> {
    let ps = spec.p_list(&[]);
    if ps.is_empty() {
        return Err(CliError::Spec("missing --p".into()));
    }
    if spec.t_end.is_none() && spec.max_events.is_none() {
        return Err(CliError::Spec("give --t-end or --max-events".into()));
    }
    let opts = CouplingOptions {
        t_end: spec.t_end.unwrap_or(f64::INFINITY),
        max_events: spec.max_events,
        snapshot_every: spec.snapshot_every,
        check_every: 1,
    };
    let mut runs: Vec<CoupledRun> = Vec::new();
    for p in &ps {
        let (_, params) = rate(p)?;
        for seed in spec.seed_list() {
            let asep = initial_config(spec, seed)?;
            runs.push(run_coupled_with(&asep, params, seed, opts)?);
        }
    }
    out.jsonl("couple.jsonl", &runs)?;
    let mut failed = 0;
    for r in &runs {
        println!(
            "seed {} p {}: {} events, {} checks, {} violations; final {} / {}",
            r.seed,
            r.params.p(),
            r.final_state.events,
            r.checks,
            r.violations + r.hole_pair_violations,
            r.final_state.asep,
            r.final_state.fasep
        );
        failed += r.violations + r.hole_pair_violations;
    }
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} coupling checks failed")));
    }
    Ok(())
}

const GAP_POOL: u64 = 20;

#[derive(Serialize)]
struct GapSummary {
    density: f64,
    p: String,
    windows: u64,
    gaps: u64,
    tv_to_law: f64,
}

pub fn gaps(spec: &ExperimentSpec, out: &mut Output) -> Result<(), CliError> {
    let density = ExperimentSpec::require(spec.density, "density")?;
    let ps = spec.p_list(&["0", "0.5", "1"]);
    let window_len = spec.window_len.unwrap_or(4000);
    let target = spec.target_gaps.unwrap_or(if spec.quick { 20_000 } else { 100_000 });
    let margin = spec.margin.unwrap_or(100);
    let law: BTreeMap<u64, f64> = gap_law_pooled(GAP_POOL, density)?
        .into_iter()
        .enumerate()
        .map(|(n, w)| (n as u64, w))
        .collect();
    let law_rows: Vec<Vec<String>> = law
        .iter()
        .map(|(n, w)| {
            let key = if *n == GAP_POOL { format!("{n}+") } else { n.to_string() };
            vec![key, format!("{w:.17e}")]
        })
        .collect();
    out.csv("gap_law.csv", &["n", "probability"], &law_rows)?;
    let base = spec.seed.unwrap_or(1);
    let mut summaries = Vec::new();
    let mut pooled = Vec::new();
    for (k, p) in ps.iter().enumerate() {
        let (_, params) = rate(p)?;
        let mut seeds = substream(base, k as u64);
        let mut hist = EmpiricalDistribution::new();
        let mut windows = 0u64;
        while hist.total() < target {
            let r = insulated_window_experiment(density, window_len, params, spec.scheme(), seeds.random())?;
            add_gaps_with_margin(r.final_config.sites(), margin, &mut hist);
            windows += 1;
            if windows > 1_000_000 {
                return Err(CliError::Spec("windows too short to collect gaps; raise --window-len".into()));
            }
        }
        let rows: Vec<Vec<String>> = hist.counts().iter().map(|(n, c)| vec![n.to_string(), c.to_string()]).collect();
        out.csv(&format!("gaps_p{}.csv", tag(p)), &["n", "count"], &rows)?;
        let emp = hist.map_keys(|&n| n.min(GAP_POOL)).weights();
        let tv = tv_distance(&emp, &law)?;
        println!("p {p}: {} gaps from {windows} windows, TV to the gap law {tv:.5}", hist.total());
        summaries.push(GapSummary {
            density,
            p: p.clone(),
            windows,
            gaps: hist.total(),
            tv_to_law: tv,
        });
        pooled.push(emp);
    }
    let mut pairwise = Vec::new();
    for i in 0..pooled.len() {
        for j in i + 1..pooled.len() {
            let tv = tv_distance(&pooled[i], &pooled[j])?;
            println!("TV between p {} and p {}: {tv:.5}", ps[i], ps[j]);
            pairwise.push((ps[i].clone(), ps[j].clone(), tv));
        }
    }
    out.json(
        "gaps_summary.json",
        &serde_json::json!({ "per_p": summaries, "pairwise_tv": pairwise }),
    )?;
    Ok(())
}

pub fn cylinders(spec: &ExperimentSpec, out: &mut Output) -> Result<(), CliError> {
    let density = spec.density.unwrap_or(0.7);
    let len = spec.len.unwrap_or(1000);
    let mut exp = CylinderExperiment::new(density, len, spec.chains.unwrap_or(if spec.quick { 200 } else { 1000 }));
    exp.snapshots_per_chain = spec.snapshots.unwrap_or(1).max(1);
    if let Some(p) = spec.p.first() {
        exp.p = rate(&p.text())?.1.p();
    }
    if let Some(s) = spec.scheme {
        exp.scheme = s.into();
    }
    exp.burn_in_sweeps = spec.burn_in.unwrap_or(exp.burn_in_sweeps);
    exp.spacing_sweeps = spec.spacing.unwrap_or(exp.spacing_sweeps);
    exp.stride = spec.stride.unwrap_or(exp.stride).max(1);
    exp.max_m = spec.max_m.unwrap_or(exp.max_m);
    let counts = exp.run(spec.seed.unwrap_or(1), &mut |_: &fasep_core::dynamics::Event<'_>| {})?;
    let rho = exp.actual_density();
    let mut rows = Vec::new();
    let mut bands = Vec::new();
    for (emp, m) in counts.iter().zip(1..) {
        let model = cylinder_model(m, rho)?;
        for bits in 0..1u32 << m {
            let pattern: String = (0..m).rev().map(|k| if bits >> k & 1 == 1 { '1' } else { '0' }).collect();
            let count = emp.count(&pattern);
            let formula = model.get(&pattern).copied().unwrap_or(0.0);
            rows.push(vec![
                m.to_string(),
                pattern,
                count.to_string(),
                format!("{:.17e}", count as f64 / emp.total() as f64),
                format!("{formula:.17e}"),
            ]);
        }
        let v = binomial_band_check(emp, &model, 3.0)?;
        println!("m = {m}: {} samples, largest deviation {:.3} standard deviations", v.samples, v.statistic);
        bands.push(v);
    }
    out.csv("cylinders.csv", &["m", "pattern", "count", "frequency", "formula"], &rows)?;
    out.json("cylinders_summary.json", &serde_json::json!({ "experiment": exp, "density": rho, "bands": bands }))?;
    Ok(())
}

pub fn verify(spec: &ExperimentSpec, out: &mut Output) -> Result<(), CliError> {
    let mut opts = VerifyOptions {
        quick: spec.quick,
        ..VerifyOptions::default()
    };
    if let Some(seed) = spec.seed {
        opts.seed = seed;
    }
    let reports = match spec.criterion {
        Some(id) => {
            let r = run_one(&opts, id)?;
            r.iter().for_each(|r| println!("{}", r.line()));
            r
        }
        None => run_all(&opts, |r| println!("{}", r.line())),
    };
    out.json("verify_report.json", &reports)?;
    let failed: Vec<u32> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("criteria {failed:?}")))
    }
}
