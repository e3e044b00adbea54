use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fasep_core::{ClockScheme, Model};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fail::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Fasep,
    Asep,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Fasep => Model::Fasep,
            ModelArg::Asep => Model::Asep,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyArg {
    Ring,
    Window,
}

/// `sapp`: one clock per bond direction; `papp`: one clock per particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Sapp,
    Papp,
}

impl From<SchemeArg> for ClockScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Sapp => ClockScheme::SiteAssociated,
            SchemeArg::Papp => ClockScheme::ParticleAssociated,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawArg {
    /// Absorption law when `2N < L`, stationary law otherwise.
    Auto,
    Absorption,
    Stationary,
}

/// A rate given as a number or as a decimal / fraction string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Num(f64),
    Text(String),
}

impl PValue {
    pub fn text(&self) -> String {
        match self {
            PValue::Num(x) => format!("{x}"),
            PValue::Text(s) => s.trim().to_string(),
        }
    }
}

/// Every experiment parameter; read from `--config` and overridden by flags.
#[derive(Clone, Debug, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Subcommand to run when none is given on the command line.
    #[arg(skip)]
    pub command: Option<String>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long, value_enum)]
    pub topology: Option<TopologyArg>,
    /// Initial configuration, e.g. `ring:110100`.
    #[arg(long)]
    pub initial: Option<String>,
    /// Number of sites L.
    #[arg(long = "len", short = 'L')]
    pub len: Option<usize>,
    /// Number of particles N.
    #[arg(long, short = 'N')]
    pub particles: Option<usize>,
    /// Particle density ρ.
    #[arg(long)]
    pub density: Option<f64>,
    /// Right-jump rate; repeat or comma-separate for several values. Fractions allowed.
    #[arg(long = "p", value_delimiter = ',', value_parser = parse_p)]
    pub p: Vec<PValue>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(skip)]
    pub seed: Option<u64>,
    /// Explicit seed list; otherwise `--runs` consecutive seeds from `--seed`.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub to_frozen: bool,
    #[arg(long)]
    pub max_events: Option<u64>,
    #[arg(long)]
    pub snapshot_every: Option<f64>,
    #[arg(long, value_enum)]
    pub law: Option<LawArg>,
    /// Sites per insulated window before trimming.
    #[arg(long)]
    pub window_len: Option<usize>,
    #[arg(long)]
    pub target_gaps: Option<u64>,
    /// Gaps this close to a window end are not counted.
    #[arg(long)]
    pub margin: Option<usize>,
    #[arg(long)]
    pub max_m: Option<usize>,
    /// Independent chains for `cylinders`.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Snapshots per chain.
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// Events per site between snapshots.
    #[arg(long)]
    pub spacing: Option<u64>,
    /// Events per site discarded before the first snapshot.
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Run a single acceptance criterion.
    #[arg(long)]
    pub criterion: Option<u32>,
    #[arg(skip)]
    pub quick: bool,
    #[arg(skip)]
    pub out_dir: Option<PathBuf>,
}

fn parse_p(s: &str) -> Result<PValue, String> {
    Ok(PValue::Text(s.to_string()))
}

macro_rules! overlay {
    ($base:ident, $top:ident; opt: $($o:ident),*; vec: $($v:ident),*; flag: $($f:ident),*) => {
        $( if $top.$o.is_some() { $base.$o = $top.$o; } )*
        $( if !$top.$v.is_empty() { $base.$v = $top.$v; } )*
        $( $base.$f |= $top.$f; )*
    };
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Spec(format!("cannot read {}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|e| e == "toml");
        let parsed = if is_toml {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Spec(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `top` replace those of `self`.
    pub fn overlay(mut self, top: ExperimentSpec) -> Self {
        let s = &mut self;
        overlay!(s, top;
            opt: command, model, topology, initial, len, particles, density, scheme, seed, runs, t_end,
                max_events, snapshot_every, law, window_len, target_gaps, margin, max_m, chains, snapshots, spacing,
                burn_in, stride, criterion, out_dir;
            vec: p, seeds;
            flag: to_frozen, quick);
        self
    }

    /// SHA-256 of the canonical JSON form, leaving out the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = None;
        let json = serde_json::to_string(&canonical).expect("spec serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }

    pub fn seed_list(&self) -> Vec<u64> {
        if !self.seeds.is_empty() {
            return self.seeds.clone();
        }
        let base = self.seed.unwrap_or(1);
        (0..self.runs.unwrap_or(1).max(1)).map(|k| base + k).collect()
    }

    pub fn p_list(&self, default: &[&str]) -> Vec<String> {
        if self.p.is_empty() {
            default.iter().map(|s| s.to_string()).collect()
        } else {
            self.p.iter().map(PValue::text).collect()
        }
    }

    pub fn scheme(&self) -> ClockScheme {
        self.scheme.unwrap_or(SchemeArg::Sapp).into()
    }

    pub fn model(&self) -> Model {
        self.model.unwrap_or(ModelArg::Fasep).into()
    }

    pub fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T, CliError> {
        value.ok_or_else(|| CliError::Spec(format!("missing --{name}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_flags() {
        let file = ExperimentSpec {
            len: Some(8),
            particles: Some(3),
            p: vec![PValue::Num(0.25)],
            ..Default::default()
        };
        let flags = ExperimentSpec {
            particles: Some(2),
            ..Default::default()
        };
        let s = file.overlay(flags);
        assert_eq!((s.len, s.particles), (Some(8), Some(2)));
        assert_eq!(s.p_list(&[]), vec!["0.25".to_string()]);
    }

    #[test]
    fn hash_ignores_out_dir() {
        let a = ExperimentSpec {
            len: Some(8),
            ..Default::default()
        };
        let mut b = a.clone();
        b.out_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn p_values_from_toml() {
        let s: ExperimentSpec = toml::from_str("p = [0.5, \"1/4\"]\nlen = 6").unwrap();
        assert_eq!(s.p_list(&[]), vec!["0.5".to_string(), "1/4".to_string()]);
    }
}
