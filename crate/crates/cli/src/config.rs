use std::path::Path;

use diracwalk::lattice::{BoundarySpec, Lattice, SiteId, Sublattice};
use diracwalk::operators::Perturbation;
use diracwalk::spectral::{linspace, ScalingFamily};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteRef {
    pub alpha: i64,
    pub beta: i64,
    pub sublattice: Sublattice,
}

impl SiteRef {
    pub fn resolve(&self, lat: &Lattice) -> Result<SiteId, CliError> {
        lat.site(self.alpha, self.beta, self.sublattice).map_err(CliError::from)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationConfig {
    ThreeBond { site: SiteRef },
    SingleBond { cell: (i64, i64) },
    ExtraSite { site: SiteRef, #[serde(default)] onsite_gamma: f64 },
}

impl PerturbationConfig {
    pub fn resolve(&self, lat: &Lattice) -> Result<Perturbation, CliError> {
        let p = match self {
            PerturbationConfig::ThreeBond { site } => Perturbation::ThreeBond { marked: site.resolve(lat)? },
            PerturbationConfig::SingleBond { cell } => Perturbation::SingleBond { cell: *cell },
            PerturbationConfig::ExtraSite { site, onsite_gamma } => {
                Perturbation::ExtraSite { attach: site.resolve(lat)?, onsite_gamma: *onsite_gamma }
            }
        };
        Ok(p.resolve(lat)?)
    }

    pub fn site(&self) -> Option<SiteRef> {
        match self {
            PerturbationConfig::ThreeBond { site } | PerturbationConfig::ExtraSite { site, .. } => Some(*site),
            PerturbationConfig::SingleBond { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaGrid {
    List(Vec<f64>),
    Range { min: f64, max: f64, points: usize },
}

impl GammaGrid {
    pub fn values(&self, points_override: Option<usize>) -> Vec<f64> {
        match self {
            GammaGrid::List(v) => v.clone(),
            GammaGrid::Range { min, max, points } => linspace(*min, *max, points_override.unwrap_or(*points)),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
}

fn default_steps() -> usize {
    600
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartConfig {
    /// Optimal Dirac superposition (tori), Dirac projection (nanotubes),
    /// first delocalized state (sheets).
    #[default]
    Default,
    /// Every optimal start state of both sublattices, one run each.
    AllOptimal,
    /// Positive edge state closest to zero (sheets).
    EdgeState,
    /// Single-bond start from the even bond state.
    Even,
    /// Single-bond start from the odd bond state.
    Odd,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
    /// Second perturbation (communication target).
    #[serde(default)]
    pub target: Option<PerturbationConfig>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub gamma_grid: Option<GammaGrid>,
    #[serde(default)]
    pub time: Option<TimeGrid>,
    #[serde(default)]
    pub tracked_sites: Option<Vec<SiteRef>>,
    #[serde(default)]
    pub start: StartConfig,
    /// Torus side lengths m = n for scaling and theory families.
    #[serde(default)]
    pub sizes: Option<Vec<i64>>,
    #[serde(default)]
    pub family: ScalingFamily,
    /// Energy half-window for sweep plots.
    #[serde(default)]
    pub window: Option<f64>,
    /// Prefix for output file names.
    #[serde(default)]
    pub name: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn lattice(&self) -> Result<Lattice, CliError> {
        Ok(self.boundary.build()?)
    }

    pub fn perturbation(&self, lat: &Lattice) -> Result<Perturbation, CliError> {
        self.perturbation
            .as_ref()
            .ok_or_else(|| CliError::Config("missing field `perturbation`".into()))?
            .resolve(lat)
    }

    pub fn target(&self, lat: &Lattice) -> Result<Perturbation, CliError> {
        self.target.as_ref().ok_or_else(|| CliError::Config("missing field `target`".into()))?.resolve(lat)
    }

    pub fn prefix(&self, default: &str) -> String {
        self.name.clone().unwrap_or_else(|| default.to_string())
    }
}
