//! Empirical distributions and the comparisons used to turn Monte Carlo
//! output into pass/fail verdicts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dynamics::RunRecord;
use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDistribution<K: Ord> {
    counts: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> Default for EmpiricalDistribution<K> {
    fn default() -> Self {
        Self {
            counts: BTreeMap::new(),
            total: 0,
        }
    }
}

impl<K: Ord + Clone> EmpiricalDistribution<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K) {
        self.add_n(key, 1);
    }

    pub fn add_n(&mut self, key: K, n: u64) {
        *self.counts.entry(key).or_insert(0) += n;
        self.total += n;
    }

    pub fn merge(&mut self, other: &Self) {
        for (k, &c) in &other.counts {
            self.add_n(k.clone(), c);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<K, u64> {
        &self.counts
    }

    pub fn weights(&self) -> BTreeMap<K, f64> {
        self.counts.iter().map(|(k, &c)| (k.clone(), c as f64)).collect()
    }

    /// Re-keys by `f`, adding counts of keys that collide.
    pub fn map_keys<J: Ord + Clone>(&self, mut f: impl FnMut(&K) -> J) -> EmpiricalDistribution<J> {
        let mut out = EmpiricalDistribution::new();
        for (k, &c) in &self.counts {
            out.add_n(f(k), c);
        }
        out
    }
}

impl<K: Ord + Clone> FromIterator<K> for EmpiricalDistribution<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut d = Self::new();
        for k in iter {
            d.add(k);
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub description: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: u64,
}

impl TestVerdict {
    /// Passes when `statistic <= threshold`.
    pub fn at_most(description: impl Into<String>, statistic: f64, threshold: f64, samples: u64) -> Self {
        Self {
            description: description.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
            samples,
        }
    }
}

fn normalized<K: Ord + Clone>(w: &BTreeMap<K, f64>) -> Result<BTreeMap<K, f64>> {
    let total: f64 = w.values().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(w.iter().map(|(k, v)| (k.clone(), v / total)).collect())
}

/// Total variation distance between two weightings, each normalized first.
pub fn tv_distance<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> Result<f64> {
    let a = normalized(a)?;
    let b = normalized(b)?;
    let mut sum = 0.0;
    for (k, x) in &a {
        sum += (x - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, y) in &b {
        if !a.contains_key(k) {
            sum += y;
        }
    }
    Ok(sum / 2.0)
}

/// Pearson goodness-of-fit test of `emp` against `model` at level `alpha`.
/// Cells with expected count below `min_expected`, and observed keys absent
/// from the model, are pooled into one cell.
pub fn chi_square_gof<K: Ord + Clone>(
    emp: &EmpiricalDistribution<K>,
    model: &BTreeMap<K, f64>,
    min_expected: f64,
    alpha: f64,
) -> Result<TestVerdict> {
    if emp.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let model = normalized(model)?;
    let n = emp.total() as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (k, p) in &model {
        let e = n * p;
        let o = emp.count(k) as f64;
        if e >= min_expected {
            cells.push((o, e));
        } else {
            pooled.0 += o;
            pooled.1 += e;
        }
    }
    for (k, &c) in emp.counts() {
        if !model.contains_key(k) {
            pooled.0 += c as f64;
        }
    }
    if pooled.0 > 0.0 || pooled.1 > 0.0 {
        cells.push(pooled);
    }
    if cells.len() < 2 {
        return Err(Error::InsufficientSamples);
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else { f64::INFINITY })
        .sum();
    let dof = (cells.len() - 1) as f64;
    let critical = ChiSquared::new(dof)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf(1.0 - alpha);
    Ok(TestVerdict::at_most(
        format!("chi-square goodness of fit, {} cells, alpha {alpha}", cells.len()),
        statistic,
        critical,
        emp.total(),
    ))
}

/// Largest standardized deviation `|c - n p| / sqrt(n p (1-p))` over the
/// model's cells, compared against `sigmas`.
pub fn binomial_band_check<K: Ord + Clone>(
    emp: &EmpiricalDistribution<K>,
    model: &BTreeMap<K, f64>,
    sigmas: f64,
) -> Result<TestVerdict> {
    if emp.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let n = emp.total() as f64;
    let mut worst: f64 = 0.0;
    for (k, &p) in model {
        let sd = (n * p * (1.0 - p)).sqrt();
        let dev = (emp.count(k) as f64 - n * p).abs();
        let z = if sd > 0.0 { dev / sd } else if dev > 0.0 { f64::INFINITY } else { 0.0 };
        worst = worst.max(z);
    }
    for (k, &c) in emp.counts() {
        if !model.contains_key(k) && c > 0 {
            worst = f64::INFINITY;
        }
    }
    Ok(TestVerdict::at_most(
        format!("largest deviation in standard deviations over {} cells", model.len()),
        worst,
        sigmas,
        emp.total(),
    ))
}

/// Sites `q >= 1` of a window with `η(q-1) = η(q) = 0`.
fn double_zero_ends(s: &[u8]) -> Vec<usize> {
    (1..s.len()).filter(|&q| s[q - 1] == 0 && s[q] == 0).collect()
}

/// Gap sizes between consecutive `00` pairs of the frozen window finals;
/// segments touching either window end are dropped.
pub fn gap_histogram(records: &[RunRecord]) -> EmpiricalDistribution<u64> {
    let mut hist = EmpiricalDistribution::new();
    for r in records {
        add_gaps(r.final_config.sites(), &mut hist);
    }
    hist
}

pub fn add_gaps(sites: &[u8], hist: &mut EmpiricalDistribution<u64>) {
    add_gaps_with_margin(sites, 0, hist);
}

/// As [`add_gaps`], also dropping segments that reach within `margin` sites
/// of either window end.
pub fn add_gaps_with_margin(sites: &[u8], margin: usize, hist: &mut EmpiricalDistribution<u64>) {
    let ends = double_zero_ends(sites);
    for w in ends.windows(2) {
        if w[0] < margin || w[1] + margin >= sites.len() {
            continue;
        }
        let seg = &sites[w[0] + 1..=w[1]];
        let n = seg.len() / 2;
        let frozen_segment = seg.len() % 2 == 1 && seg.iter().enumerate().all(|(i, &x)| x == u8::from(i % 2 == 0 && i < 2 * n));
        if frozen_segment {
            hist.add(n as u64);
        }
    }
}

fn pattern_at(cfg: &LatticeConfig, start: usize, m: usize) -> String {
    let n = cfg.len();
    (0..m)
        .map(|d| if cfg.get((start + d) % n) == 1 { '1' } else { '0' })
        .collect()
}

/// Counts of every length-`m` pattern at every position (with wrap on rings).
pub fn cylinder_counts<'a>(
    configs: impl IntoIterator<Item = &'a LatticeConfig>,
    m: usize,
) -> Result<EmpiricalDistribution<String>> {
    cylinder_counts_strided(configs, m, 1)
}

/// As [`cylinder_counts`] but only at positions `0, stride, 2 stride, ...`.
pub fn cylinder_counts_strided<'a>(
    configs: impl IntoIterator<Item = &'a LatticeConfig>,
    m: usize,
    stride: usize,
) -> Result<EmpiricalDistribution<String>> {
    let mut hist = EmpiricalDistribution::new();
    for cfg in configs {
        let l = cfg.len();
        if m == 0 || m > l {
            return Err(Error::InvalidWindow { m, sites: l });
        }
        let positions = if cfg.is_ring() { l } else { l - m + 1 };
        for start in (0..positions).step_by(stride.max(1)) {
            hist.add(pattern_at(cfg, start, m));
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ClockScheme, Model, RateParams};
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    fn w(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn tv_examples() {
        let a = w(&[("A", 3.0), ("B", 1.0)]);
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&a, &w(&[("C", 1.0)])).unwrap(), 1.0);
        assert!((tv_distance(&a, &w(&[("A", 1.0), ("B", 1.0)])).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(tv_distance(&a, &w(&[])).unwrap_err(), Error::EmptyDistribution);
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(x in proptest::collection::vec(0.0f64..1.0, 4), y in proptest::collection::vec(0.0f64..1.0, 4), z in proptest::collection::vec(0.0f64..1.0, 4)) {
            let m = |v: &[f64]| -> BTreeMap<usize, f64> { v.iter().cloned().enumerate().collect() };
            let (a, b, c) = (m(&x), m(&y), m(&z));
            prop_assume!(x.iter().sum::<f64>() > 0.0 && y.iter().sum::<f64>() > 0.0 && z.iter().sum::<f64>() > 0.0);
            let ab = tv_distance(&a, &b).unwrap();
            prop_assert!((ab - tv_distance(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap() + 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        }
    }

    fn sample(model: &[f64], n: usize, rng: &mut crate::rng::SimRng) -> EmpiricalDistribution<usize> {
        let mut d = EmpiricalDistribution::new();
        for _ in 0..n {
            let mut u: f64 = rng.random();
            let mut k = 0;
            while k + 1 < model.len() && u >= model[k] {
                u -= model[k];
                k += 1;
            }
            d.add(k);
        }
        d
    }

    #[test]
    fn chi_square_calibration_and_power() {
        let model = [0.4, 0.3, 0.2, 0.07, 0.02, 0.01];
        let m: BTreeMap<usize, f64> = model.iter().cloned().enumerate().collect();
        let mut rng = seeded(21);
        let passes = (0..100)
            .filter(|_| chi_square_gof(&sample(&model, 2000, &mut rng), &m, 5.0, 0.01).unwrap().pass)
            .count();
        assert!(passes >= 97, "{passes}");
        let shifted = [0.35, 0.35, 0.2, 0.07, 0.02, 0.01];
        let v = chi_square_gof(&sample(&shifted, 50_000, &mut rng), &m, 5.0, 0.01).unwrap();
        assert!(!v.pass);
        let single: EmpiricalDistribution<usize> = [0usize; 10].into_iter().collect();
        let one: BTreeMap<usize, f64> = [(0usize, 1.0)].into_iter().collect();
        assert_eq!(chi_square_gof(&single, &one, 5.0, 0.01).unwrap_err(), Error::InsufficientSamples);
    }

    fn frozen_record(bits: &str) -> RunRecord {
        let cfg = LatticeConfig::window(bits).unwrap();
        RunRecord {
            model: Model::Fasep,
            seed: 0,
            params: RateParams::new(0.5).unwrap(),
            scheme: ClockScheme::SiteAssociated,
            initial: cfg.clone(),
            final_config: cfg,
            events: 0,
            process_time: 0.0,
            bond_current: 0,
            snapshots: vec![],
        }
    }

    #[test]
    fn gap_examples() {
        let h = gap_histogram(&[frozen_record("001010000")]);
        assert_eq!(h.counts(), &[(0u64, 2u64), (2, 1)].into_iter().collect());
        let h = gap_histogram(&[frozen_record("00100101010010100")]);
        assert_eq!(h.counts(), &[(1u64, 1u64), (2, 1), (3, 1)].into_iter().collect());
        // boundary segments are not counted
        let h = gap_histogram(&[frozen_record("1010010100101")]);
        assert_eq!(h.counts(), &[(2u64, 1u64)].into_iter().collect());
        assert!(gap_histogram(&[]).is_empty());
    }

    #[test]
    fn cylinder_examples() {
        let c = LatticeConfig::ring("1101").unwrap();
        let h = cylinder_counts([&c], 2).unwrap();
        assert_eq!(h.count(&"11".into()), 2);
        assert_eq!(h.count(&"10".into()), 1);
        assert_eq!(h.count(&"01".into()), 1);
        let h = cylinder_counts([&c], 1).unwrap();
        assert_eq!((h.count(&"1".into()), h.count(&"0".into())), (3, 1));
        assert_eq!(cylinder_counts([&c], 5).unwrap_err(), Error::InvalidWindow { m: 5, sites: 4 });
        let w = LatticeConfig::window("1101").unwrap();
        assert_eq!(cylinder_counts([&w], 2).unwrap().total(), 3);
        assert_eq!(cylinder_counts_strided([&c], 2, 2).unwrap().total(), 2);
    }

    #[test]
    fn band_check() {
        let m = w(&[("a", 0.5), ("b", 0.5)]);
        let mut e = EmpiricalDistribution::new();
        e.add_n("a".to_string(), 510);
        e.add_n("b".to_string(), 490);
        assert!(binomial_band_check(&e, &m, 3.0).unwrap().pass);
        e.add_n("c".to_string(), 1);
        assert!(!binomial_band_check(&e, &m, 3.0).unwrap().pass);
    }
}
