use rand::Rng;
use rand_distr::Exp1;

use super::{bond_count, bond_enabled, offset, ClockScheme, Direction, Model, Move, RateParams};
use crate::lattice::{LatticeConfig, Topology};
use crate::rng::SimRng;

const NONE: u32 = u32::MAX;

/// Set of bonds with O(1) insert, remove and uniform choice.
#[derive(Clone, Debug)]
struct BondSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl BondSet {
    fn new(n: usize) -> Self {
        Self {
            items: Vec::new(),
            pos: vec![NONE; n],
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn contains(&self, b: usize) -> bool {
        self.pos[b] != NONE
    }

    fn set(&mut self, b: usize, on: bool) {
        match (on, self.contains(b)) {
            (true, false) => {
                self.pos[b] = self.items.len() as u32;
                self.items.push(b as u32);
            }
            (false, true) => {
                let i = self.pos[b] as usize;
                let last = *self.items.last().unwrap();
                self.items[i] = last;
                self.pos[last as usize] = i as u32;
                self.items.pop();
                self.pos[b] = NONE;
            }
            _ => {}
        }
    }

    fn pick(&self, rng: &mut SimRng) -> usize {
        self.items[rng.random_range(0..self.items.len())] as usize
    }
}

/// Outcome of one clock ring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    Moved(Move),
    /// A particle clock rang but its jump was suppressed.
    Rejected,
    /// No positive-rate move is enabled.
    Absorbed,
    /// The next ring would fall after the requested horizon; time was set to it.
    Horizon,
}

/// Mutable simulation state with incrementally maintained enabled moves.
#[derive(Clone, Debug)]
pub struct Engine {
    sites: Vec<u8>,
    topology: Topology,
    model: Model,
    params: RateParams,
    right: BondSet,
    left: BondSet,
    particle_at: Vec<u32>,
    positions: Vec<u32>,
    time: f64,
    events: u64,
    current: i64,
}

impl Engine {
    pub fn new(cfg: &LatticeConfig, model: Model, params: RateParams) -> Self {
        let sites = cfg.sites().to_vec();
        let ring = cfg.is_ring();
        let nb = bond_count(sites.len(), ring);
        let mut right = BondSet::new(nb);
        let mut left = BondSet::new(nb);
        for b in 0..nb {
            let (r, l) = bond_enabled(&sites, ring, model, b);
            right.set(b, r);
            left.set(b, l);
        }
        let mut particle_at = vec![NONE; sites.len()];
        let mut positions = Vec::new();
        for (i, &s) in sites.iter().enumerate() {
            if s == 1 {
                particle_at[i] = positions.len() as u32;
                positions.push(i as u32);
            }
        }
        Self {
            sites,
            topology: cfg.topology(),
            model,
            params,
            right,
            left,
            particle_at,
            positions,
            time: 0.0,
            events: 0,
            current: 0,
        }
    }

    pub fn sites(&self) -> &[u8] {
        &self.sites
    }

    pub fn config(&self) -> LatticeConfig {
        LatticeConfig::new(self.topology, self.sites.clone()).expect("binary sites")
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Net number of particles that crossed from site 0 to site 1.
    pub fn bond_current(&self) -> i64 {
        self.current
    }

    pub fn total_rate(&self) -> f64 {
        let mut r = 0.0;
        if self.params.right_rate() > 0.0 {
            r += self.params.right_rate() * self.right.len() as f64;
        }
        if self.params.left_rate() > 0.0 {
            r += self.params.left_rate() * self.left.len() as f64;
        }
        r
    }

    pub fn is_absorbed(&self) -> bool {
        self.total_rate() == 0.0
    }

    fn ring(&self) -> bool {
        self.topology == Topology::Ring
    }

    fn refresh(&mut self, b: usize) {
        let (r, l) = bond_enabled(&self.sites, self.ring(), self.model, b);
        self.right.set(b, r);
        self.left.set(b, l);
    }

    /// Performs the exchange `mv`, which must be structurally enabled.
    pub fn apply(&mut self, mv: Move) {
        let len = self.sites.len();
        let ring = self.ring();
        let a = mv.bond;
        let c = (a + 1) % len;
        let (from, to) = match mv.direction {
            Direction::Right => (a, c),
            Direction::Left => (c, a),
        };
        debug_assert!(self.sites[from] == 1 && self.sites[to] == 0);
        self.sites.swap(a, c);
        let id = self.particle_at[from];
        self.particle_at[from] = NONE;
        self.particle_at[to] = id;
        self.positions[id as usize] = to as u32;
        if a == 0 && (ring || len > 1) {
            self.current += match mv.direction {
                Direction::Right => 1,
                Direction::Left => -1,
            };
        }
        let reach: isize = match self.model {
            Model::Fasep => 2,
            Model::Asep => 1,
        };
        let nb = bond_count(len, ring);
        for d in -reach..=reach {
            if let Some(b) = offset(a, d, len, ring) {
                if b < nb {
                    self.refresh(b);
                }
            }
        }
        self.events += 1;
    }

    fn wait(&self, rng: &mut SimRng, rate: f64) -> f64 {
        let e: f64 = rng.sample(Exp1);
        e / rate
    }

    /// Advances by one clock ring of `scheme`, never past `horizon`.
    pub fn step(&mut self, rng: &mut SimRng, scheme: ClockScheme, horizon: f64) -> Step {
        if self.is_absorbed() {
            return Step::Absorbed;
        }
        match scheme {
            ClockScheme::SiteAssociated => {
                let total = self.total_rate();
                let dt = self.wait(rng, total);
                if self.time + dt > horizon {
                    self.time = horizon;
                    return Step::Horizon;
                }
                self.time += dt;
                let pr = if self.params.right_rate() > 0.0 {
                    self.params.right_rate() * self.right.len() as f64
                } else {
                    0.0
                };
                let u = rng.random::<f64>() * total;
                let mv = if u < pr {
                    Move::right(self.right.pick(rng))
                } else {
                    Move::left(self.left.pick(rng))
                };
                self.apply(mv);
                Step::Moved(mv)
            }
            ClockScheme::ParticleAssociated => {
                let n = self.positions.len();
                let dt = self.wait(rng, n as f64);
                if self.time + dt > horizon {
                    self.time = horizon;
                    return Step::Horizon;
                }
                self.time += dt;
                let i = self.positions[rng.random_range(0..n)] as usize;
                let go_right = rng.random::<f64>() < self.params.p();
                let len = self.sites.len();
                let ring = self.ring();
                let nb = bond_count(len, ring);
                let mv = if go_right {
                    (i < nb && self.right.contains(i)).then(|| Move::right(i))
                } else {
                    offset(i, -1, len, ring)
                        .filter(|&b| b < nb && self.left.contains(b))
                        .map(Move::left)
                };
                match mv {
                    Some(mv) => {
                        self.apply(mv);
                        Step::Moved(mv)
                    }
                    None => Step::Rejected,
                }
            }
        }
    }
}
