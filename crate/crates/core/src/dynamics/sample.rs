use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{LatticeConfig, Topology};
use crate::rng::{seeded, SimRng};

/// `N` particles placed uniformly on `L` sites.
pub fn uniform_ring_sites(rng: &mut SimRng, len: usize, particles: usize) -> Result<Vec<u8>> {
    if particles > len {
        return Err(Error::InvalidCount {
            particles,
            sites: len,
        });
    }
    let mut sites = vec![0u8; len];
    for i in index::sample(rng, len, particles) {
        sites[i] = 1;
    }
    Ok(sites)
}

pub fn bernoulli_sites(rng: &mut SimRng, len: usize, density: f64) -> Vec<u8> {
    (0..len).map(|_| u8::from(rng.random::<f64>() < density)).collect()
}

/// Uniform sample from the ring configurations with `particles` particles.
pub fn sample_uniform_ring(len: usize, particles: usize, seed: u64) -> Result<LatticeConfig> {
    let sites = uniform_ring_sites(&mut seeded(seed), len, particles)?;
    LatticeConfig::new(Topology::Ring, sites)
}

/// i.i.d. Bernoulli(`density`) sites on a closed window.
pub fn sample_bernoulli_window(len: usize, density: f64, seed: u64) -> Result<LatticeConfig> {
    if !(density > 0.0 && density < 1.0) {
        return Err(Error::InvalidParameter(format!("density {density} outside (0, 1)")));
    }
    LatticeConfig::new(Topology::ClosedWindow, bernoulli_sites(&mut seeded(seed), len, density))
}
