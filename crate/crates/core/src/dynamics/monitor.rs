use serde::{Deserialize, Serialize};

use super::{offset, Event, Observer};
use crate::lattice::{LatticeConfig, Topology};

/// Checks after every jump that no `00` pair was created and, for runs
/// started without adjacent holes, that none appears.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantMonitor {
    pub events_checked: u64,
    pub double_zero_violations: u64,
    pub no_adjacent_holes_violations: u64,
    watch_holes: bool,
}

impl InvariantMonitor {
    pub fn new(initial: &LatticeConfig) -> Self {
        Self {
            watch_holes: initial.is_ring() && initial.is_no_adjacent_holes(),
            ..Self::default()
        }
    }

    /// Monitor for trajectories known to start without adjacent holes.
    pub fn watching_holes() -> Self {
        Self {
            watch_holes: true,
            ..Self::default()
        }
    }

    pub fn violations(&self) -> u64 {
        self.double_zero_violations + self.no_adjacent_holes_violations
    }

    pub fn tally(&self) -> InvariantTally {
        InvariantTally {
            events_checked: self.events_checked,
            double_zero_violations: self.double_zero_violations,
            no_adjacent_holes_violations: self.no_adjacent_holes_violations,
        }
    }

    pub fn merge(&mut self, other: &InvariantMonitor) {
        self.events_checked += other.events_checked;
        self.double_zero_violations += other.double_zero_violations;
        self.no_adjacent_holes_violations += other.no_adjacent_holes_violations;
    }
}

/// Serializable counts from one or more monitors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantTally {
    pub events_checked: u64,
    pub double_zero_violations: u64,
    pub no_adjacent_holes_violations: u64,
}

impl InvariantTally {
    pub fn add(&mut self, other: InvariantTally) {
        self.events_checked += other.events_checked;
        self.double_zero_violations += other.double_zero_violations;
        self.no_adjacent_holes_violations += other.no_adjacent_holes_violations;
    }

    pub fn violations(&self) -> u64 {
        self.double_zero_violations + self.no_adjacent_holes_violations
    }
}

impl Observer for InvariantMonitor {
    fn on_event(&mut self, ev: &Event<'_>) {
        self.events_checked += 1;
        let ring = ev.topology == Topology::Ring;
        let n = ev.sites.len();
        let a = ev.mv.bond;
        let c = (a + 1) % n;
        let prev = |i: usize| -> u8 {
            if i == a {
                ev.sites[c]
            } else if i == c {
                ev.sites[a]
            } else {
                ev.sites[i]
            }
        };
        // only the pairs on bonds a-1, a, a+1 changed
        let idx: Vec<Option<usize>> = (-1isize..=2).map(|d| offset(a, d, n, ring)).collect();
        for w in idx.windows(2) {
            let (Some(x), Some(y)) = (w[0], w[1]) else {
                continue;
            };
            if x == y {
                continue;
            }
            let now = ev.sites[x] == 0 && ev.sites[y] == 0;
            let was = prev(x) == 0 && prev(y) == 0;
            if now && !was {
                self.double_zero_violations += 1;
            }
            if now && self.watch_holes {
                self.no_adjacent_holes_violations += 1;
            }
        }
    }
}
