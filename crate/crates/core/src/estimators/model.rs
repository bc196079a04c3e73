use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderSampler, SingleSiteDensity};
use crate::error::{Error, Result};
use crate::grid::{assemble_laplacian, Background, BoundarySpec, Domain, Hamiltonian, PotentialStencil, SingleSiteProfile};
use crate::DEFAULT_SEED;

/// Energy window assumed localized in one dimension at unit disorder.
pub const DEFAULT_LOCALIZED_WINDOW: (f64, f64) = (0.3, 0.7);
/// Smallest box side accepted by the reverse Wegner experiment.
pub const DEFAULT_MIN_SIDE: f64 = 16.0;
/// Disorder strength from which two-dimensional runs are treated as localized.
pub const STRONG_DISORDER_2D: f64 = 8.0;

/// Everything that defines the random operator, apart from the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub dim: usize,
    pub spacing: f64,
    #[serde(rename = "lambda")]
    pub strength: f64,
    pub background: Background,
    pub profile: SingleSiteProfile,
    pub density: SingleSiteDensity,
    pub seed: u64,
    /// Overrides [`DEFAULT_LOCALIZED_WINDOW`].
    pub localized_window: Option<(f64, f64)>,
    pub min_side: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            spacing: 0.5,
            strength: 1.0,
            background: Background::Zero,
            profile: SingleSiteProfile::CellIndicator,
            density: SingleSiteDensity::Uniform01,
            seed: DEFAULT_SEED,
            localized_window: None,
            min_side: DEFAULT_MIN_SIDE,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidArgument(format!("spacing must be positive, got {}", self.spacing)));
        }
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {}", self.strength)));
        }
        self.profile.validate()?;
        self.density.validate()
    }

    pub fn localized_window(&self) -> (f64, f64) {
        self.localized_window.unwrap_or(DEFAULT_LOCALIZED_WINDOW)
    }

    pub fn sampler(&self) -> Result<DisorderSampler> {
        DisorderSampler::new(self.seed, self.density.clone())
    }

    /// Box `Λ_L` (or punctured box) for this model.
    pub fn domain(&self, side: f64, puncture: Option<(f64, &[f64])>) -> Result<Arc<Domain>> {
        self.validate()?;
        Ok(Arc::new(Domain::new(self.dim, side, self.spacing, puncture)?))
    }
}

/// Random operators on a fixed domain, one per boundary specification,
/// sharing the disorder realization of each sample.
#[derive(Clone, Debug)]
pub struct Ensemble {
    domain: Arc<Domain>,
    bases: Vec<Hamiltonian>,
    background: Vec<f64>,
    stencil: PotentialStencil,
    sampler: DisorderSampler,
    strength: f64,
}

impl Ensemble {
    pub fn new(config: &ModelConfig, domain: Arc<Domain>, bcs: &[BoundarySpec]) -> Result<Self> {
        config.validate()?;
        let bases = bcs.iter().map(|&bc| assemble_laplacian(&domain, bc)).collect();
        let background = config.background.sample(&domain)?;
        let stencil = PotentialStencil::new(&domain, &config.profile);
        Ok(Self {
            bases,
            background,
            stencil,
            sampler: config.sampler()?,
            strength: config.strength,
            domain,
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn seed(&self) -> u64 {
        self.sampler.seed()
    }

    /// Random part `λ Σ_k ω_k u(x - k)` alone.
    pub fn random_potential(&self, sample: u64) -> Vec<f64> {
        if self.strength == 0.0 {
            return vec![0.0; self.domain.len()];
        }
        let omega = self.sampler.sample_vector(self.stencil.lattice(), sample);
        self.stencil.apply(&omega).into_iter().map(|w| self.strength * w).collect()
    }

    /// Site potential `V_0 + λ V_ω` for disorder sample `sample`.
    pub fn potential(&self, sample: u64) -> Vec<f64> {
        let mut v = self.background.clone();
        if self.strength != 0.0 {
            for (vi, w) in v.iter_mut().zip(self.random_potential(sample)) {
                *vi += w;
            }
        }
        v
    }

    /// The operators for sample `sample`, in the order of the boundary specs.
    pub fn hamiltonians(&self, sample: u64) -> Result<Vec<Hamiltonian>> {
        let v = self.potential(sample);
        self.bases.iter().map(|h| h.with_potential(&v)).collect()
    }

    /// The operator for the first boundary spec.
    pub fn hamiltonian(&self, sample: u64) -> Result<Hamiltonian> {
        self.bases[0].with_potential(&self.potential(sample))
    }
}
