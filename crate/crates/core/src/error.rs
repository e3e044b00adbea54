use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot parse configuration `{0}`")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot place {particles} particles on {sites} sites")]
    InvalidCount { particles: usize, sites: usize },

    /// Absorption was not reached. On a ring this almost always means `N >= L/2`.
    #[error("no absorbing configuration reached within {0} events")]
    MaxEventsExceeded(u64),

    /// Totally asymmetric dynamics in a closed window can pile particles against
    /// an end so that no move is enabled although the configuration is not frozen.
    #[error("dynamics jammed against a closed window end before freezing")]
    StuckAtBoundary,

    #[error("height profile has no records ({particles} particles on {sites} sites)")]
    NoRecords { particles: usize, sites: usize },

    #[error("analytic final state would push particles through the closed right end")]
    BoundaryJam,

    #[error("Catalan number c_{0} overflows 128-bit arithmetic")]
    Overflow(u64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gap sequence inconsistent with L={sites}, N={particles}")]
    InconsistentGaps { sites: usize, particles: usize },

    #[error("configuration is not in the image of the substitution")]
    NotInImage,

    #[error("anchor site {0} does not start a substituted block")]
    BadAnchor(usize),

    #[error("state space too large: {0}")]
    TooLarge(String),

    #[error("chain is not absorbing: a recurrent class with {0} states is not a single frozen state")]
    NotAbsorbing(usize),

    /// Several closed classes; carries the closed classes as state indices.
    #[error("chain has {} closed classes", .0.len())]
    Reducible(Vec<Vec<usize>>),

    #[error("empty distribution")]
    EmptyDistribution,

    #[error("fewer than two cells remain after pooling")]
    InsufficientSamples,

    #[error("window length {m} invalid for lattice of {sites} sites")]
    InvalidWindow { m: usize, sites: usize },

    #[error("pattern `{0}` contains two adjacent holes")]
    InvalidPattern(String),
}
