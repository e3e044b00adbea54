//! Height profiles, record sets and closed-form final measures.
//!
//! The height profile of `η` satisfies `h(i) - h(i-1) = 1 - 2η(i)` with
//! `h(0) = 2J`. A site `q` is a record if `h(q)` exceeds every earlier height.
//! Under totally asymmetric facilitated dynamics the records never move, and
//! the frozen limit places `(10)^n 0` between consecutive records.
//!
//! For windows the sites of the configuration are numbered `1..=L` in the
//! profile, and everything outside the window is taken to be empty.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, BigUint, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeConfig, Topology};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightProfile {
    /// Profile index of `heights[0]`.
    pub base: i64,
    pub heights: Vec<i64>,
}

impl HeightProfile {
    pub fn get(&self, i: i64) -> Option<i64> {
        let k = i - self.base;
        (k >= 0).then(|| self.heights.get(k as usize).copied()).flatten()
    }

    pub fn range(&self) -> std::ops::Range<i64> {
        self.base..self.base + self.heights.len() as i64
    }
}

/// Record sites, as indices into the configuration's sites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordSet {
    pub sites: Vec<usize>,
    /// Ring length, or `None` for a window.
    pub period: Option<usize>,
}

impl RecordSet {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Gaps between cyclically consecutive records, starting at the first one.
    pub fn gaps(&self) -> Option<GapSequence> {
        let l = self.period?;
        let q = &self.sites;
        let gaps = (0..q.len())
            .map(|k| {
                let next = if k + 1 < q.len() { q[k + 1] } else { q[0] + l };
                (next - q[k] - 1) / 2
            })
            .collect();
        Some(GapSequence { gaps })
    }
}

/// `n_k` with consecutive records `2 n_k + 1` apart.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GapSequence {
    pub gaps: Vec<usize>,
}

impl GapSequence {
    pub fn span(&self) -> usize {
        self.gaps.iter().map(|n| 2 * n + 1).sum()
    }
}

fn step(site: u8) -> i64 {
    1 - 2 * i64::from(site)
}

/// Profile over indices `0..=L` with `h(0) = 2J`. Ring sites are read
/// periodically, so `h(L)` uses site 0.
pub fn height_profile(cfg: &LatticeConfig, j: i64) -> HeightProfile {
    let s = cfg.sites();
    let l = s.len();
    let mut heights = Vec::with_capacity(l + 1);
    heights.push(2 * j);
    let mut h = 2 * j;
    for i in 1..=l {
        let site = match cfg.topology() {
            Topology::Ring => s[i % l],
            Topology::ClosedWindow => s[i - 1],
        };
        h += step(site);
        heights.push(h);
    }
    HeightProfile { base: 0, heights }
}

fn ring_records(s: &[u8]) -> Result<Vec<usize>> {
    let l = s.len();
    let n = s.iter().filter(|&&x| x == 1).count();
    if 2 * n >= l {
        return Err(Error::NoRecords {
            particles: n,
            sites: l,
        });
    }
    // h over indices -L..L, h(0) = 0
    let mut h = vec![0i64; 2 * l];
    for i in (0..l).rev() {
        h[i] = h[i + 1] - step(s[(i + 1) % l]);
    }
    for i in l + 1..2 * l {
        h[i] = h[i - 1] + step(s[(i - l) % l]);
    }
    // the profile gains L - 2N per period, so only the preceding L sites matter
    let mut records = Vec::new();
    let mut window: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for i in 0..2 * l {
        if i >= l {
            while window.front().is_some_and(|&f| f + l < i) {
                window.pop_front();
            }
            let best = window.front().map(|&f| h[f]).unwrap_or(i64::MIN);
            if h[i] > best {
                records.push(i - l);
            }
        }
        while window.back().is_some_and(|&b| h[b] <= h[i]) {
            window.pop_back();
        }
        window.push_back(i);
    }
    Ok(records)
}

/// Window records in profile indices `1..=L`; index 0 is always a record.
fn window_records(s: &[u8]) -> Vec<usize> {
    let mut best = 0i64;
    let mut h = 0i64;
    let mut out = Vec::new();
    for (k, &x) in s.iter().enumerate() {
        h += step(x);
        if h > best {
            best = h;
            out.push(k + 1);
        }
    }
    out
}

/// Record sites of `cfg`. On a ring these are the records of its periodic
/// extension that fall in `0..L`.
pub fn record_set(cfg: &LatticeConfig) -> Result<RecordSet> {
    match cfg.topology() {
        Topology::Ring => Ok(RecordSet {
            sites: ring_records(cfg.sites())?,
            period: Some(cfg.len()),
        }),
        Topology::ClosedWindow => Ok(RecordSet {
            sites: window_records(cfg.sites()).into_iter().map(|q| q - 1).collect(),
            period: None,
        }),
    }
}

fn fill_segment(out: &mut [u8], from: usize, n: usize, modulo: usize) {
    for k in 0..n {
        out[(from + 2 * k) % modulo] = 1;
    }
}

/// Frozen configuration reached by the totally asymmetric dynamics.
pub fn final_config_tasep(cfg: &LatticeConfig) -> Result<LatticeConfig> {
    let s = cfg.sites();
    let l = s.len();
    match cfg.topology() {
        Topology::Ring => {
            let q = ring_records(s)?;
            let mut out = vec![0u8; l];
            for k in 0..q.len() {
                let next = if k + 1 < q.len() { q[k + 1] } else { q[0] + l };
                fill_segment(&mut out, q[k] + 1, (next - q[k] - 1) / 2, l);
            }
            LatticeConfig::new(Topology::Ring, out)
        }
        Topology::ClosedWindow => {
            let mut q = vec![0usize];
            q.extend(window_records(s));
            let mut out = vec![0u8; l];
            for w in q.windows(2) {
                // profile index i is window site i - 1
                fill_segment(&mut out, w[0], (w[1] - w[0] - 1) / 2, usize::MAX);
            }
            let last = *q.last().unwrap();
            let tail = s[last..].iter().filter(|&&x| x == 1).count();
            if tail > 0 {
                // next record of the zero-padded profile after `last`
                if last + 2 * tail - 1 > l {
                    return Err(Error::BoundaryJam);
                }
                fill_segment(&mut out, last, tail, usize::MAX);
            }
            LatticeConfig::new(Topology::ClosedWindow, out)
        }
    }
}

/// Catalan number `binom(2n, n) / (n + 1)`.
pub fn catalan(n: u64) -> Result<u128> {
    let mut c: u128 = 1;
    for k in 0..n {
        // c_{k+1} = c_k * 2(2k+1) / (k+2), exact at every step
        let num = 2 * (2 * k as u128 + 1);
        let g = gcd(c, k as u128 + 2);
        let (c_red, d) = (c / g, (k as u128 + 2) / g);
        let next = c_red.checked_mul(num).ok_or(Error::Overflow(n))? / d;
        c = next;
    }
    Ok(c)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn catalan_big(n: u64) -> BigUint {
    let mut c = BigUint::one();
    for k in 0..n {
        c = c * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    c
}

fn check_density(density: f64) -> Result<()> {
    if density > 0.0 && density < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("density {density} outside (0, 1/2)")))
    }
}

/// Probability that a gap between consecutive records has `n` particles:
/// `c_n ρ^n (1-ρ)^(n+1)`.
pub fn gap_law(n: u64, density: f64) -> Result<f64> {
    check_density(density)?;
    let x = density * (1.0 - density);
    let mut t = 1.0 - density;
    for k in 0..n {
        t *= 2.0 * (2 * k + 1) as f64 / (k + 2) as f64 * x;
    }
    Ok(t)
}

/// `gap_law(0..n_max)` followed by the tail mass at `n >= n_max`.
pub fn gap_law_pooled(n_max: u64, density: f64) -> Result<Vec<f64>> {
    check_density(density)?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    let x = density * (1.0 - density);
    let mut t = 1.0 - density;
    for k in 0..n_max {
        out.push(t);
        t *= 2.0 * (2 * k + 1) as f64 / (k + 2) as f64 * x;
    }
    let head: f64 = out.iter().sum();
    out.push((1.0 - head).max(0.0));
    Ok(out)
}

fn binomial(n: usize, k: usize) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

/// Probability, given that site 0 is a record, of the frozen ring
/// configuration whose gaps from record 0 onwards are `gaps`.
pub fn ring_final_weight(gaps: &GapSequence, len: usize, particles: usize) -> Result<BigRational> {
    let records = len.checked_sub(2 * particles).filter(|&k| k > 0);
    let consistent = records == Some(gaps.gaps.len())
        && gaps.span() == len
        && gaps.gaps.iter().sum::<usize>() == particles;
    if !consistent {
        return Err(Error::InconsistentGaps {
            sites: len,
            particles,
        });
    }
    let k = len - 2 * particles;
    let mut num = BigUint::from(len);
    for &n in &gaps.gaps {
        num *= catalan_big(n as u64);
    }
    let den = BigUint::from(k) * binomial(len, particles);
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// Frozen ring configuration with a record at 0 and the given gaps.
pub fn config_from_gaps(gaps: &GapSequence) -> LatticeConfig {
    let l = gaps.span();
    let mut out = vec![0u8; l];
    let mut q = 0usize;
    for &n in &gaps.gaps {
        fill_segment(&mut out, q + 1, n, l);
        q += 2 * n + 1;
    }
    LatticeConfig::new(Topology::Ring, out).expect("binary sites")
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if parts == 1 {
        prefix.push(total);
        out(prefix);
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// Exact law of the frozen limit from a uniform ring start with `particles`
/// particles on `len` sites.
pub fn ring_final_measure(len: usize, particles: usize) -> Result<BTreeMap<LatticeConfig, BigRational>> {
    if len == 0 || 2 * particles >= len {
        return Err(Error::NoRecords {
            particles,
            sites: len,
        });
    }
    let k = len - 2 * particles;
    let share = BigRational::new(BigInt::one(), BigInt::from(len));
    let mut measure: BTreeMap<LatticeConfig, BigRational> = BTreeMap::new();
    let mut err = None;
    compositions(particles, k, &mut Vec::new(), &mut |parts| {
        let gaps = GapSequence {
            gaps: parts.to_vec(),
        };
        let w = match ring_final_weight(&gaps, len, particles) {
            Ok(w) => w * &share,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let base = config_from_gaps(&gaps);
        for r in 0..len {
            let e = measure.entry(base.rotated(r)).or_insert_with(BigRational::zero);
            *e += &w;
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(measure),
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
