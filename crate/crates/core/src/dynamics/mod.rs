//! Continuous-time evolution of the facilitated exclusion process (and of the
//! plain exclusion process it is coupled to).
//!
//! A move is an exchange across bond `b`, i.e. of sites `b` and `b + 1`
//! (mod `L` on a ring). In the facilitated model
//!
//! * a right move across `b` (particle `b -> b+1`) has rate `p` and needs `110`
//!   on sites `b-1, b, b+1`;
//! * a left move across `b` (particle `b+1 -> b`) has rate `1 - p` and needs
//!   `011` on sites `b, b+1, b+2`.
//!
//! Two clock schemes drive the same law: site clocks, simulated with the
//! Gillespie embedded chain over enabled moves, and particle clocks, simulated
//! by thinning one rate-1 clock per particle.

mod engine;
mod insulated;
mod monitor;
mod run;
mod sample;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;

pub use engine::{Engine, Step};
pub use insulated::{
    insulated_window_experiment, insulated_window_observed, run_insulated, run_insulated_observed, trim_to_insulated,
};
pub use monitor::{InvariantMonitor, InvariantTally};
pub use run::{
    default_max_events, run_asep_for_time, run_for_time, run_to_frozen, spaced_snapshots, Event, Observer,
    RunRecord, Runner, Snapshot,
};
pub use sample::{bernoulli_sites, sample_bernoulli_window, sample_uniform_ring, uniform_ring_sites};

/// Asymmetry: right jumps at rate `p`, left jumps at rate `1 - p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    p: f64,
}

impl RateParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn right_rate(&self) -> f64 {
        self.p
    }

    pub fn left_rate(&self) -> f64 {
        1.0 - self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClockScheme {
    SiteAssociated,
    ParticleAssociated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Facilitated exclusion: a particle needs an occupied neighbour behind it.
    Fasep,
    /// Plain exclusion.
    Asep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Right,
    Left,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub bond: usize,
    pub direction: Direction,
}

impl Move {
    pub fn right(bond: usize) -> Self {
        Self {
            bond,
            direction: Direction::Right,
        }
    }

    pub fn left(bond: usize) -> Self {
        Self {
            bond,
            direction: Direction::Left,
        }
    }
}

/// Currently enabled exchanges with their rates. Zero-rate moves are omitted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MoveSet {
    pub moves: Vec<(Move, f64)>,
}

impl MoveSet {
    pub fn total_rate(&self) -> f64 {
        self.moves.iter().map(|(_, r)| r).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }
}

pub(crate) fn bond_count(len: usize, ring: bool) -> usize {
    match (ring, len) {
        (true, l) if l >= 2 => l,
        (true, _) => 0,
        (false, l) => l - 1,
    }
}

/// Site at signed offset `d` from `i`, or `None` outside a window.
#[inline]
pub(crate) fn offset(i: usize, d: isize, len: usize, ring: bool) -> Option<usize> {
    let j = i as isize + d;
    if ring {
        Some(j.rem_euclid(len as isize) as usize)
    } else if j >= 0 && (j as usize) < len {
        Some(j as usize)
    } else {
        None
    }
}

#[inline]
pub(crate) fn occupied(sites: &[u8], i: usize, d: isize, ring: bool) -> Option<bool> {
    offset(i, d, sites.len(), ring).map(|j| sites[j] == 1)
}

/// Structural enablement of the right (`b -> b+1`) and left (`b+1 -> b`) move
/// across bond `b`, ignoring rates.
#[inline]
pub(crate) fn bond_enabled(sites: &[u8], ring: bool, model: Model, b: usize) -> (bool, bool) {
    let here = sites[b] == 1;
    let Some(next) = occupied(sites, b, 1, ring) else {
        return (false, false);
    };
    match model {
        Model::Asep => (here && !next, !here && next),
        Model::Fasep => {
            let right = here && !next && occupied(sites, b, -1, ring) == Some(true);
            let left = !here && next && occupied(sites, b, 2, ring) == Some(true);
            (right, left)
        }
    }
}

fn moves_for(cfg: &LatticeConfig, params: RateParams, model: Model) -> MoveSet {
    let ring = cfg.is_ring();
    let sites = cfg.sites();
    let mut moves = Vec::new();
    for b in 0..bond_count(sites.len(), ring) {
        let (r, l) = bond_enabled(sites, ring, model, b);
        if r && params.right_rate() > 0.0 {
            moves.push((Move::right(b), params.right_rate()));
        }
        if l && params.left_rate() > 0.0 {
            moves.push((Move::left(b), params.left_rate()));
        }
    }
    MoveSet { moves }
}

/// Facilitated moves permitted in `cfg`.
pub fn enabled_moves(cfg: &LatticeConfig, params: RateParams) -> MoveSet {
    moves_for(cfg, params, Model::Fasep)
}

pub fn asep_enabled_moves(cfg: &LatticeConfig, params: RateParams) -> MoveSet {
    moves_for(cfg, params, Model::Asep)
}

/// Applies the exchange across `mv.bond` to a copy of `cfg`.
pub fn apply_move(cfg: &LatticeConfig, mv: Move) -> LatticeConfig {
    let mut sites = cfg.sites().to_vec();
    let a = mv.bond;
    let b = (a + 1) % sites.len();
    sites.swap(a, b);
    LatticeConfig::new(cfg.topology(), sites).expect("swap keeps sites binary")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> RateParams {
        RateParams::new(v).unwrap()
    }

    #[test]
    fn enabled_moves_on_1100() {
        let cfg = LatticeConfig::ring("1100").unwrap();
        let set = enabled_moves(&cfg, p(0.7));
        assert_eq!(set.moves, vec![(Move::right(1), 0.7), (Move::left(3), 1.0 - 0.7)]);
        assert_eq!(apply_move(&cfg, Move::left(3)).bits(), "0101");
        assert_eq!(apply_move(&cfg, Move::right(1)).bits(), "1010");
    }

    #[test]
    fn no_moves_when_frozen_or_full() {
        assert!(enabled_moves(&LatticeConfig::ring("10100").unwrap(), p(0.3)).is_empty());
        assert!(enabled_moves(&LatticeConfig::ring("11111").unwrap(), p(0.3)).is_empty());
    }

    #[test]
    fn total_rate_counts_patterns() {
        // 110 patterns at bonds 1 and 6, 011 patterns at bonds 3 and 5 (wrap included)
        let cfg = LatticeConfig::ring("11011011").unwrap();
        let set = enabled_moves(&cfg, p(0.25));
        let right = set.moves.iter().filter(|(m, _)| m.direction == Direction::Right).count();
        let left = set.len() - right;
        assert!((set.total_rate() - (0.25 * right as f64 + 0.75 * left as f64)).abs() < 1e-15);
        assert_eq!((right, left), (2, 2));
    }

    #[test]
    fn zero_rate_moves_are_dropped() {
        let cfg = LatticeConfig::ring("1100").unwrap();
        assert_eq!(enabled_moves(&cfg, p(1.0)).moves, vec![(Move::right(1), 1.0)]);
        assert_eq!(enabled_moves(&cfg, p(0.0)).moves, vec![(Move::left(3), 1.0)]);
    }

    #[test]
    fn window_ends_block_facilitation() {
        // particle at site 0 has no neighbour behind it
        let w = LatticeConfig::window("1100").unwrap();
        assert_eq!(enabled_moves(&w, p(0.5)).moves, vec![(Move::right(1), 0.5)]);
        let w = LatticeConfig::window("011").unwrap();
        assert_eq!(enabled_moves(&w, p(0.5)).moves, vec![(Move::left(0), 0.5)]);
    }

    #[test]
    fn asep_moves() {
        let cfg = LatticeConfig::ring("1100").unwrap();
        let set = asep_enabled_moves(&cfg, p(1.0));
        assert_eq!(set.moves, vec![(Move::right(1), 1.0)]);
        let set = asep_enabled_moves(&cfg, p(0.5));
        assert_eq!(set.moves, vec![(Move::right(1), 0.5), (Move::left(3), 0.5)]);
    }

    #[test]
    fn rate_params_validated() {
        assert!(RateParams::new(-0.1).is_err());
        assert!(RateParams::new(1.5).is_err());
        assert!(RateParams::new(f64::NAN).is_err());
        assert_eq!(p(0.3).left_rate(), 0.7);
    }
}
