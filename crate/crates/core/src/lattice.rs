//! Configurations on a ring or a closed window, and the structural predicates
//! shared by every other module: the frozen set (no `11`), the set of
//! configurations without adjacent holes (no `00`), components and density.

use std::fmt;
use std::str::FromStr;

use num::rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topology {
    /// Periodic boundary, index arithmetic mod `L`.
    Ring,
    /// Finite line segment; no bond crosses either end.
    ClosedWindow,
}

impl Topology {
    pub fn prefix(self) -> &'static str {
        match self {
            Topology::Ring => "ring",
            Topology::ClosedWindow => "window",
        }
    }
}

/// Occupancy of `L >= 1` sites: `1` is a particle, `0` a hole.
///
/// The text form is `ring:0110` or `window:0110`, site 0 first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeConfig {
    topology: Topology,
    sites: Vec<u8>,
}

impl LatticeConfig {
    pub fn new(topology: Topology, sites: Vec<u8>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Parse("empty configuration".into()));
        }
        if let Some(bad) = sites.iter().find(|&&s| s > 1) {
            return Err(Error::Parse(format!("site value {bad}")));
        }
        Ok(Self { topology, sites })
    }

    /// Parses a bare `0`/`1` string with the given topology.
    pub fn from_bits(topology: Topology, bits: &str) -> Result<Self> {
        let sites = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(bits.to_string())),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(topology, sites)
    }

    pub fn ring(bits: &str) -> Result<Self> {
        Self::from_bits(Topology::Ring, bits)
    }

    pub fn window(bits: &str) -> Result<Self> {
        Self::from_bits(Topology::ClosedWindow, bits)
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_ring(&self) -> bool {
        self.topology == Topology::Ring
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[u8] {
        &self.sites
    }

    pub fn into_sites(self) -> Vec<u8> {
        self.sites
    }

    pub fn get(&self, i: usize) -> u8 {
        self.sites[i]
    }

    /// Site values as a `0`/`1` string without the topology prefix.
    pub fn bits(&self) -> String {
        self.sites.iter().map(|&s| if s == 1 { '1' } else { '0' }).collect()
    }

    /// Nearest-neighbour pairs `(i, i+1)`. A ring of `L >= 2` sites has `L` bonds
    /// (the last one wraps); a window has `L - 1`.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let l = self.len();
        let count = match self.topology {
            Topology::Ring if l >= 2 => l,
            Topology::Ring => 0,
            Topology::ClosedWindow => l - 1,
        };
        (0..count).map(move |i| (i, (i + 1) % l))
    }

    pub fn particle_count(&self) -> usize {
        self.sites.iter().filter(|&&s| s == 1).count()
    }

    /// No two adjacent occupied sites: the absorbing set of the dynamics.
    pub fn is_frozen(&self) -> bool {
        self.bonds()
            .all(|(a, b)| !(self.sites[a] == 1 && self.sites[b] == 1))
    }

    /// No two adjacent empty sites.
    pub fn is_no_adjacent_holes(&self) -> bool {
        self.bonds()
            .all(|(a, b)| !(self.sites[a] == 0 && self.sites[b] == 0))
    }

    pub fn density(&self) -> DensityValue {
        DensityValue {
            particles: self.particle_count(),
            sites: self.len(),
        }
    }

    /// Ring rotation: site `i` of the result holds site `i - k` of `self`.
    /// Windows are returned unchanged.
    pub fn rotated(&self, k: usize) -> Self {
        if !self.is_ring() {
            return self.clone();
        }
        let l = self.len();
        let mut sites = self.sites.clone();
        sites.rotate_right(k % l);
        Self {
            topology: self.topology,
            sites,
        }
    }

    /// Components: maximal blocks of particles in which consecutive particles are
    /// separated by at most one hole. Outside a window everything is empty.
    /// A ring without any `00` pair is a single component by convention.
    pub fn components(&self) -> ComponentList {
        let particles: Vec<usize> = (0..self.len()).filter(|&i| self.sites[i] == 1).collect();
        if particles.is_empty() {
            return ComponentList::default();
        }
        let l = self.len();
        let mut intervals = Vec::new();
        match self.topology {
            Topology::ClosedWindow => {
                let mut start = particles[0];
                for w in particles.windows(2) {
                    if w[1] - w[0] > 2 {
                        intervals.push(Component { start, end: w[0] });
                        start = w[1];
                    }
                }
                intervals.push(Component {
                    start,
                    end: *particles.last().unwrap(),
                });
            }
            Topology::Ring => {
                let n = particles.len();
                // cyclic distance from particle k to particle k+1
                let gap = |k: usize| {
                    let a = particles[k];
                    let b = particles[(k + 1) % n];
                    (b + l - a) % l
                };
                let breaks: Vec<usize> = (0..n).filter(|&k| n == 1 || gap(k) > 2).collect();
                if breaks.is_empty() {
                    intervals.push(Component {
                        start: particles[0],
                        end: particles[n - 1],
                    });
                } else {
                    for (idx, &k) in breaks.iter().enumerate() {
                        let next_break = breaks[(idx + 1) % breaks.len()];
                        intervals.push(Component {
                            start: particles[(k + 1) % n],
                            end: particles[next_break],
                        });
                    }
                    intervals.sort_by_key(|c| c.start);
                }
            }
        }
        ComponentList { intervals }
    }
}

impl fmt::Display for LatticeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.topology.prefix(), self.bits())
    }
}

impl fmt::Debug for LatticeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for LatticeConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (prefix, bits) = s.split_once(':').ok_or_else(|| Error::Parse(s.to_string()))?;
        let topology = match prefix {
            "ring" => Topology::Ring,
            "window" => Topology::ClosedWindow,
            _ => return Err(Error::Parse(s.to_string())),
        };
        Self::from_bits(topology, bits)
    }
}

impl Serialize for LatticeConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LatticeConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive site interval `start..=end`; on a ring `start > end` means the
/// component wraps through site 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Component {
    pub start: usize,
    pub end: usize,
}

impl Component {
    pub fn sites(&self, l: usize) -> impl Iterator<Item = usize> {
        let span = (self.end + l - self.start) % l + 1;
        let start = self.start;
        (0..span).map(move |k| (start + k) % l)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComponentList {
    pub intervals: Vec<Component>,
}

impl ComponentList {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DensityValue {
    pub particles: usize,
    pub sites: usize,
}

impl DensityValue {
    pub fn ratio(&self) -> Ratio<usize> {
        Ratio::new(self.particles, self.sites)
    }

    pub fn as_f64(&self) -> f64 {
        self.particles as f64 / self.sites as f64
    }
}
