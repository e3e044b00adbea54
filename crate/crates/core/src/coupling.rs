//! Substitution maps between plain and facilitated exclusion, the explicit
//! cylinder weights of the high-density stationary state, and the coupled
//! simulation of both processes on a ring.
//!
//! Under the high-density map every source site becomes a block, `1 -> 1` and
//! `0 -> 10`, so the image has no two adjacent holes and each source particle
//! becomes a *true* particle (one followed by another particle).

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::dynamics::{uniform_ring_sites, RateParams};
use crate::error::{Error, Result};
use crate::lattice::{LatticeConfig, Topology};
use crate::rng::{seeded, substream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubstitutionMap {
    /// `1 -> 1`, `0 -> 10`.
    HighDensity,
    /// `0 -> 0`, `1 -> 01`.
    LowDensity,
}

impl SubstitutionMap {
    fn block(self, s: u8) -> &'static [u8] {
        match (self, s) {
            (SubstitutionMap::HighDensity, 1) => &[1],
            (SubstitutionMap::HighDensity, _) => &[1, 0],
            (SubstitutionMap::LowDensity, 1) => &[0, 1],
            (SubstitutionMap::LowDensity, _) => &[0],
        }
    }

    fn image_ok(self, cfg: &LatticeConfig) -> bool {
        let forbidden = match self {
            SubstitutionMap::HighDensity => 0,
            SubstitutionMap::LowDensity => 1,
        };
        !cfg.bonds().any(|(a, b)| cfg.get(a) == forbidden && cfg.get(b) == forbidden)
    }
}

/// Image start site `γ(i)` of the block substituted for source site `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteCorrespondence {
    /// Index of the first source site.
    pub source_first: i64,
    /// `starts[k] = γ(source_first + k)`, plus one trailing entry for the end.
    pub starts: Vec<i64>,
}

impl SiteCorrespondence {
    pub fn gamma(&self, i: i64) -> Option<i64> {
        let k = i - self.source_first;
        (k >= 0 && (k as usize) + 1 < self.starts.len()).then(|| self.starts[k as usize])
    }

    /// Index of the first image site.
    pub fn image_first(&self) -> i64 {
        self.starts[0]
    }
}

/// Substitutes every site of `src`; source site 0 maps to image site 0.
pub fn apply_substitution(map: SubstitutionMap, src: &LatticeConfig) -> (LatticeConfig, SiteCorrespondence) {
    let mut image = Vec::new();
    let mut starts = Vec::with_capacity(src.len() + 1);
    for &s in src.sites() {
        starts.push(image.len() as i64);
        image.extend_from_slice(map.block(s));
    }
    starts.push(image.len() as i64);
    let cfg = LatticeConfig::new(src.topology(), image).expect("binary sites");
    (
        cfg,
        SiteCorrespondence {
            source_first: 0,
            starts,
        },
    )
}

/// Substitution with source sites numbered from `first`, placed so the block of
/// source site 1 begins at image site 1. Needs `first <= 1 <= first + L`.
pub fn apply_substitution_anchored(
    map: SubstitutionMap,
    src: &LatticeConfig,
    first: i64,
) -> Result<(LatticeConfig, SiteCorrespondence)> {
    let (img, mut corr) = apply_substitution(map, src);
    let k = 1 - first;
    if k < 0 || k as usize >= corr.starts.len() {
        return Err(Error::InvalidParameter(format!(
            "source range {first}..{} does not reach site 1",
            first + src.len() as i64
        )));
    }
    let shift = 1 - corr.starts[k as usize];
    for s in corr.starts.iter_mut() {
        *s += shift;
    }
    corr.source_first = first;
    Ok((img, corr))
}

/// Reads the preimage of `img` block by block starting at site `anchor`.
/// Windows are read to their right end; rings once around.
pub fn invert_substitution(map: SubstitutionMap, img: &LatticeConfig, anchor: usize) -> Result<LatticeConfig> {
    if anchor >= img.len() {
        return Err(Error::BadAnchor(anchor));
    }
    if !map.image_ok(img) {
        return Err(Error::NotInImage);
    }
    let (lead, tail) = match map {
        SubstitutionMap::HighDensity => (1u8, 0u8),
        SubstitutionMap::LowDensity => (0u8, 1u8),
    };
    if img.get(anchor) != lead {
        return Err(Error::BadAnchor(anchor));
    }
    let n = img.len();
    let span = match img.topology() {
        Topology::Ring => n,
        Topology::ClosedWindow => n - anchor,
    };
    let at = |k: usize| img.get((anchor + k) % n);
    let mut out = Vec::new();
    let mut k = 0;
    while k < span {
        if at(k) != lead {
            return Err(Error::NotInImage);
        }
        let long = k + 1 < span && at(k + 1) == tail;
        out.push(match (map, long) {
            (SubstitutionMap::HighDensity, true) | (SubstitutionMap::LowDensity, false) => 0,
            _ => 1,
        });
        k += if long { 2 } else { 1 };
    }
    LatticeConfig::new(img.topology(), out)
}

/// Sites holding a particle immediately followed by another particle.
pub fn true_particles(cfg: &LatticeConfig) -> Vec<usize> {
    let n = cfg.len();
    (0..n)
        .filter(|&i| {
            let next = if cfg.is_ring() { Some((i + 1) % n) } else { (i + 1 < n).then_some(i + 1) };
            cfg.get(i) == 1 && next.is_some_and(|j| j != i && cfg.get(j) == 1)
        })
        .collect()
}

/// Finite pattern with no two adjacent holes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CylinderPattern {
    bits: Vec<u8>,
}

impl CylinderPattern {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        let text: String = bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
        if bits.is_empty() || bits.iter().any(|&b| b > 1) || bits.windows(2).any(|w| w == [0, 0]) {
            return Err(Error::InvalidPattern(text));
        }
        Ok(Self { bits })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidPattern(s.to_string())),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// All valid patterns of length `m`, in lexicographic order.
    pub fn all(m: usize) -> Vec<CylinderPattern> {
        (0u32..1 << m)
            .map(|x| (0..m).map(|i| ((x >> (m - 1 - i)) & 1) as u8).collect::<Vec<u8>>())
            .filter_map(|b| Self::new(b).ok())
            .collect()
    }
}

impl std::fmt::Display for CylinderPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Uniform sample from the facilitated rings of `len` sites with
/// `round(density * len)` particles and no adjacent holes, drawn as the image
/// of a uniform plain-exclusion ring under a uniform rotation.
pub fn high_density_start(len: usize, density: f64, seed: u64) -> Result<LatticeConfig> {
    if !(density > 0.5 && density <= 1.0) {
        return Err(Error::Domain(format!("density {density} outside (1/2, 1]")));
    }
    let particles = (density * len as f64).round() as usize;
    if 2 * particles <= len || particles > len {
        return Err(Error::InvalidCount { particles, sites: len });
    }
    let mut rng = substream(seed, 1);
    let asep = LatticeConfig::new(Topology::Ring, uniform_ring_sites(&mut rng, particles, 2 * particles - len)?)?;
    let shift = rng.random_range(0..len);
    Ok(apply_substitution(SubstitutionMap::HighDensity, &asep).0.rotated(shift))
}

/// Probability of `θ` on consecutive sites under the translation invariant
/// stationary state of density `ρ ∈ (1/2, 1)`.
pub fn cylinder_probability(theta: &CylinderPattern, density: f64) -> Result<f64> {
    if !(density > 0.5 && density < 1.0) {
        return Err(Error::Domain(format!("density {density} outside (1/2, 1)")));
    }
    let b = theta.bits();
    let m = b.len() as i32;
    let ones: i32 = b.iter().map(|&x| i32::from(x)).sum();
    let first = i32::from(b[0]);
    let last = i32::from(b[b.len() - 1]);
    let hole_ratio = (1.0 - density) / density;
    let pair_ratio = (2.0 * density - 1.0) / density;
    Ok((1.0 - density) * hole_ratio.powi(m - 1 - ones) * pair_ratio.powi(2 * ones + 1 - m - first - last))
}

/// F-ASEP density produced by substituting an ASEP state of density `ρ̂`.
pub fn mapped_density(asep_density: f64) -> f64 {
    1.0 / (2.0 - asep_density)
}

/// Inverse of [`mapped_density`].
pub fn asep_density(density: f64) -> f64 {
    (2.0 * density - 1.0) / density
}

/// Cylinder weight of the image of the Bernoulli(`ρ̂`) ASEP state.
pub fn mapped_measure_weight(theta: &CylinderPattern, asep_density: f64) -> Result<f64> {
    if !(asep_density > 0.0 && asep_density < 1.0) {
        return Err(Error::Domain(format!("ASEP density {asep_density} outside (0, 1)")));
    }
    cylinder_probability(theta, mapped_density(asep_density))
}

/// Both processes at one instant. Label `k` is the `k`-th ASEP particle in the
/// initial configuration; it drives the true particle at `fasep_positions[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledState {
    pub time: f64,
    pub events: u64,
    pub asep: LatticeConfig,
    pub fasep: LatticeConfig,
    pub asep_positions: Vec<usize>,
    pub fasep_positions: Vec<usize>,
    /// `fasep` is `φ(asep)` rotated right by this many sites.
    pub offset: usize,
}

impl CoupledState {
    /// Recomputes the correspondence from scratch.
    pub fn check(&self) -> bool {
        let (img, corr) = apply_substitution(SubstitutionMap::HighDensity, &self.asep);
        let m = img.len();
        if self.fasep.len() != m || img.rotated(self.offset) != self.fasep {
            return false;
        }
        let labels_ok = self.asep_positions.iter().zip(&self.fasep_positions).all(|(&x, &y)| {
            self.asep.get(x) == 1 && (corr.starts[x] as usize + self.offset) % m == y
        });
        let mut ys = self.fasep_positions.clone();
        ys.sort_unstable();
        labels_ok && ys == true_particles(&self.fasep) && self.spacing_ok()
    }

    /// `k'_{i+1} - k'_i = 2 (k_{i+1} - k_i) - 1` around the ring.
    fn spacing_ok(&self) -> bool {
        let l = self.asep.len();
        let m = self.fasep.len();
        let n = self.asep_positions.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&k| self.asep_positions[k]);
        (0..n).all(|i| {
            let (a, b) = (order[i], order[(i + 1) % n]);
            let dk = (self.asep_positions[b] + l - self.asep_positions[a]) % l;
            let dk = if dk == 0 { l } else { dk };
            let dy = (self.fasep_positions[b] + m - self.fasep_positions[a]) % m;
            let dy = if dy == 0 { m } else { dy };
            n == 1 || dy == 2 * dk - 1
        })
    }

    /// Offsets `r` with `rotate(φ(asep), r) == fasep`, found by exhaustive search.
    pub fn matching_rotations(&self) -> Vec<usize> {
        let (img, _) = apply_substitution(SubstitutionMap::HighDensity, &self.asep);
        (0..img.len()).filter(|&r| img.rotated(r) == self.fasep).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledRun {
    pub seed: u64,
    pub params: RateParams,
    pub snapshots: Vec<CoupledState>,
    pub final_state: CoupledState,
    pub checks: u64,
    /// Checks at which the correspondence with the substituted ASEP state failed.
    pub violations: u64,
    /// Checks at which the facilitated configuration had two adjacent holes.
    pub hole_pair_violations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingOptions {
    pub t_end: f64,
    pub max_events: Option<u64>,
    pub snapshot_every: Option<f64>,
    /// Recheck the correspondence every this many accepted events.
    pub check_every: u64,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        Self {
            t_end: f64::INFINITY,
            max_events: None,
            snapshot_every: None,
            check_every: 1,
        }
    }
}

/// The offset is tracked incrementally; an exhaustive rotation search
/// confirms it this often.
const ROTATION_SEARCH_EVERY: u64 = 64;

struct Coupled {
    asep: Vec<u8>,
    fasep: Vec<u8>,
    xs: Vec<usize>,
    ys: Vec<usize>,
    offset: usize,
    time: f64,
    events: u64,
}

impl Coupled {
    fn snapshot(&self) -> CoupledState {
        CoupledState {
            time: self.time,
            events: self.events,
            asep: LatticeConfig::new(Topology::Ring, self.asep.clone()).expect("binary"),
            fasep: LatticeConfig::new(Topology::Ring, self.fasep.clone()).expect("binary"),
            asep_positions: self.xs.clone(),
            fasep_positions: self.ys.clone(),
            offset: self.offset,
        }
    }

    /// Applies a clock ring of label `k`; returns whether anything moved.
    fn ring(&mut self, k: usize, right: bool) -> bool {
        let l = self.asep.len();
        let m = self.fasep.len();
        let x = self.xs[k];
        let y = self.ys[k];
        let target = if right { (x + 1) % l } else { (x + l - 1) % l };
        if self.asep[target] == 1 {
            return false;
        }
        self.asep.swap(x, target);
        self.xs[k] = target;
        if right {
            // 1 10 -> 10 1
            self.fasep[(y + 1) % m] = 0;
            self.fasep[(y + 2) % m] = 1;
            self.ys[k] = (y + 2) % m;
            if x == l - 1 {
                self.offset = (self.offset + 1) % m;
            }
        } else {
            // 10 1 1 -> 1 10 1
            self.fasep[(y + m - 1) % m] = 1;
            self.fasep[y] = 0;
            self.ys[k] = (y + m - 2) % m;
            if x == 0 {
                self.offset = (self.offset + m - 1) % m;
            }
        }
        self.events += 1;
        true
    }
}

/// Runs plain exclusion from `asep0` together with facilitated exclusion from
/// its substitution image, both driven by the same particle clocks.
pub fn run_coupled_with(
    asep0: &LatticeConfig,
    params: RateParams,
    seed: u64,
    opts: CouplingOptions,
) -> Result<CoupledRun> {
    if !asep0.is_ring() {
        return Err(Error::InvalidParameter("coupled runs need a ring".into()));
    }
    let n = asep0.particle_count();
    if n == 0 {
        return Err(Error::InvalidCount {
            particles: 0,
            sites: asep0.len(),
        });
    }
    let (img, corr) = apply_substitution(SubstitutionMap::HighDensity, asep0);
    let xs: Vec<usize> = (0..asep0.len()).filter(|&i| asep0.get(i) == 1).collect();
    let ys = xs.iter().map(|&x| corr.starts[x] as usize).collect();
    let mut st = Coupled {
        asep: asep0.sites().to_vec(),
        fasep: img.into_sites(),
        xs,
        ys,
        offset: 0,
        time: 0.0,
        events: 0,
    };
    let mut rng = seeded(seed);
    let mut snapshots = vec![st.snapshot()];
    let mut next_snap = opts.snapshot_every.map(|dt| (dt, 1u64));
    let mut checks = 1u64;
    let mut violations = u64::from(!snapshots[0].check());
    let mut hole_pair_violations = 0u64;
    let frozen = n == asep0.len();
    let max_events = opts.max_events.unwrap_or(u64::MAX);
    let check_every = opts.check_every.max(1);
    while !frozen && st.events < max_events {
        let e: f64 = rng.sample(Exp1);
        let t = st.time + e / n as f64;
        if let Some((dt, k)) = next_snap.as_mut() {
            while (*k as f64) * *dt < t.min(opts.t_end) {
                let mut s = st.snapshot();
                s.time = *k as f64 * *dt;
                snapshots.push(s);
                *k += 1;
            }
        }
        if t > opts.t_end {
            st.time = opts.t_end;
            break;
        }
        st.time = t;
        let k = rng.random_range(0..n);
        let right = rng.random::<f64>() < params.p();
        if st.ring(k, right) && st.events % check_every == 0 {
            let s = st.snapshot();
            checks += 1;
            let mut ok = s.check();
            if st.events % ROTATION_SEARCH_EVERY == 0 {
                ok &= s.matching_rotations().contains(&s.offset);
            }
            violations += u64::from(!ok);
            hole_pair_violations += u64::from(!s.fasep.is_no_adjacent_holes());
        }
    }
    if frozen && opts.t_end.is_finite() {
        st.time = opts.t_end;
    }
    let final_state = st.snapshot();
    checks += 1;
    violations += u64::from(!final_state.check());
    Ok(CoupledRun {
        seed,
        params,
        snapshots,
        final_state,
        checks,
        violations,
        hole_pair_violations,
    })
}

pub fn run_coupled(asep0: &LatticeConfig, params: RateParams, seed: u64, t_end: f64) -> Result<CoupledRun> {
    run_coupled_with(
        asep0,
        params,
        seed,
        CouplingOptions {
            t_end,
            ..CouplingOptions::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HD: SubstitutionMap = SubstitutionMap::HighDensity;
    const LD: SubstitutionMap = SubstitutionMap::LowDensity;

    fn window(b: &str) -> LatticeConfig {
        LatticeConfig::window(b).unwrap()
    }

    fn ring(b: &str) -> LatticeConfig {
        LatticeConfig::ring(b).unwrap()
    }

    #[test]
    fn substitution_examples() {
        let (img, corr) = apply_substitution_anchored(HD, &window("011001"), -1).unwrap();
        assert_eq!(img.bits(), "101110101");
        assert_eq!(corr.image_first(), -2);
        let g: Vec<i64> = (-1..=4).map(|i| corr.gamma(i).unwrap()).collect();
        assert_eq!(g, vec![-2, 0, 1, 2, 4, 6]);
        let (img, corr) = apply_substitution(HD, &window("111"));
        assert_eq!((img.bits().as_str(), corr.starts.as_slice()), ("111", &[0, 1, 2, 3][..]));
        assert_eq!(apply_substitution(LD, &window("11")).0.bits(), "0101");
    }

    #[test]
    fn high_density_start_is_uniform() {
        let mut counts = std::collections::BTreeMap::new();
        for seed in 0..16_000 {
            let cfg = high_density_start(8, 0.625, seed).unwrap();
            assert_eq!(cfg.particle_count(), 5);
            assert!(cfg.is_no_adjacent_holes());
            *counts.entry(cfg.bits()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 16);
        assert!(counts.values().all(|&c| (850..1150).contains(&c)), "{counts:?}");
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(invert_substitution(HD, &window("101110101"), 0).unwrap().bits(), "011001");
        assert_eq!(invert_substitution(HD, &ring("1111"), 2).unwrap().bits(), "1111");
        assert_eq!(invert_substitution(HD, &window("1001"), 0).unwrap_err(), Error::NotInImage);
        assert_eq!(invert_substitution(HD, &ring("0111"), 0).unwrap_err(), Error::BadAnchor(0));
        assert_eq!(invert_substitution(LD, &window("0101"), 0).unwrap().bits(), "11");
        assert_eq!(invert_substitution(LD, &window("0110"), 0).unwrap_err(), Error::NotInImage);
    }

    #[test]
    fn true_particle_examples() {
        assert_eq!(true_particles(&ring("1101")), vec![0, 3]);
        assert!(true_particles(&ring("1010")).is_empty());
        assert_eq!(true_particles(&ring("111")), vec![0, 1, 2]);
        assert_eq!(true_particles(&window("0111")), vec![1, 2]);
    }

    #[test]
    fn cylinder_examples() {
        let c = |s: &str, r: f64| cylinder_probability(&CylinderPattern::parse(s).unwrap(), r).unwrap();
        assert!((c("1", 0.7) - 0.7).abs() < 1e-15);
        assert!((c("0", 0.7) - 0.3).abs() < 1e-15);
        assert!((c("11", 0.7) - 0.4).abs() < 1e-12);
        assert!((c("11", 0.7) + c("10", 0.7) + c("01", 0.7) - 1.0).abs() < 1e-12);
        assert!(cylinder_probability(&CylinderPattern::parse("1").unwrap(), 0.5).is_err());
        assert!(CylinderPattern::parse("1001").is_err());
        let one = CylinderPattern::parse("1").unwrap();
        assert!((mapped_measure_weight(&one, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        for rh in [0.1, 0.4, 0.9] {
            assert!((mapped_measure_weight(&one, rh).unwrap() - 1.0 / (2.0 - rh)).abs() < 1e-15);
            assert!((asep_density(mapped_density(rh)) - rh).abs() < 1e-15);
        }
        assert_eq!(CylinderPattern::all(2).iter().map(|p| p.to_string()).collect::<Vec<_>>(), ["01", "10", "11"]);
    }

    #[test]
    fn cylinder_marginalization() {
        for rho in [0.55, 0.7, 0.9] {
            for m in 1..=6 {
                for theta in CylinderPattern::all(m) {
                    let base = cylinder_probability(&theta, rho).unwrap();
                    let mut right = 0.0;
                    let mut left = 0.0;
                    for b in [0u8, 1] {
                        let mut r = theta.bits().to_vec();
                        r.push(b);
                        if let Ok(t) = CylinderPattern::new(r) {
                            right += cylinder_probability(&t, rho).unwrap();
                        }
                        let mut l = vec![b];
                        l.extend_from_slice(theta.bits());
                        if let Ok(t) = CylinderPattern::new(l) {
                            left += cylinder_probability(&t, rho).unwrap();
                        }
                    }
                    assert!((right - base).abs() < 1e-12 && (left - base).abs() < 1e-12, "{theta} {rho}");
                }
            }
        }
    }

    #[test]
    fn full_ring_never_moves() {
        let run = run_coupled(&ring("111"), RateParams::new(0.5).unwrap(), 1, 10.0).unwrap();
        assert_eq!(run.final_state.fasep.bits(), "111");
        assert_eq!(run.final_state.events, 0);
        assert_eq!(run.violations, 0);
    }

    #[test]
    fn invariant_holds_at_every_event() {
        for (bits, p) in [("0101", 0.3), ("1101000110", 0.5), ("1000000", 1.0), ("0111110", 0.0)] {
            let run = run_coupled_with(
                &ring(bits),
                RateParams::new(p).unwrap(),
                7,
                CouplingOptions {
                    max_events: Some(1000),
                    check_every: 1,
                    ..CouplingOptions::default()
                },
            )
            .unwrap();
            assert_eq!(run.final_state.events, 1000);
            assert_eq!(run.checks, 1002);
            assert_eq!(run.violations, 0, "{bits}");
        }
    }

    #[test]
    fn snapshots_follow_grid() {
        let run = run_coupled_with(
            &ring("110100"),
            RateParams::new(0.6).unwrap(),
            2,
            CouplingOptions {
                t_end: 3.0,
                snapshot_every: Some(0.5),
                ..CouplingOptions::default()
            },
        )
        .unwrap();
        let times: Vec<f64> = run.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times, vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5]);
        assert!(run.snapshots.iter().all(CoupledState::check));
        assert_eq!(run.final_state.time, 3.0);
    }

    proptest! {
        #[test]
        fn round_trip(bits in proptest::collection::vec(0u8..2, 1..40), ringy in any::<bool>(), low in any::<bool>()) {
            let topo = if ringy { Topology::Ring } else { Topology::ClosedWindow };
            let src = LatticeConfig::new(topo, bits).unwrap();
            let map = if low { LD } else { HD };
            let (img, corr) = apply_substitution(map, &src);
            prop_assert!(map.image_ok(&img));
            prop_assert_eq!(invert_substitution(map, &img, 0).unwrap(), src.clone());
            for i in 0..src.len() {
                let step = corr.starts[i + 1] - corr.starts[i];
                let want = match map { SubstitutionMap::HighDensity => 2 - src.get(i), SubstitutionMap::LowDensity => 1 + src.get(i) };
                prop_assert_eq!(step, i64::from(want));
            }
            if !low && ringy {
                let n = src.particle_count();
                prop_assert_eq!(img.len(), 2 * src.len() - n);
                prop_assert_eq!(img.particle_count(), src.len());
                prop_assert!(img.is_no_adjacent_holes() || src.len() == 1);
                let tp: Vec<usize> = (0..src.len()).filter(|&x| src.get(x) == 1).map(|x| corr.starts[x] as usize).collect();
                if n > 0 && n < src.len() {
                    prop_assert_eq!(true_particles(&img), tp);
                }
            }
        }
    }
}
