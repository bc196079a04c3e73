//! Resolvent block norms, fractional-moment probes and Combes-Thomas decay.
//!
//! All diagnostics here are heuristic: they sample single energies on boxes
//! and never certify localization.

mod band;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

pub use band::BandLu;

use crate::error::{Error, Result};
use crate::estimators::{least_squares, sample_map, Ensemble, McEstimate, ModelConfig};
use crate::grid::{BoundarySpec, Domain, Hamiltonian};

/// Largest singular value of a resolvent block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockNorm {
    /// Lattice norm times `h^d`.
    pub norm: f64,
    /// Plain matrix norm of the block.
    pub raw: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// `μ` in `value ≈ C e^{-μ d}`.
    pub rate: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
    pub distance_min: f64,
    pub distance_max: f64,
    pub n_points: usize,
}

/// Resolvent-norm profile along one axis together with its exponential fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayProfile {
    pub energy: f64,
    /// `(distance, block norm)`.
    pub points: Vec<(f64, f64)>,
    pub fit: DecayFit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FmbProbe {
    pub energy: f64,
    pub eta: f64,
    pub s: f64,
    pub x0: Vec<f64>,
    pub distances: Vec<f64>,
    /// `E[‖χ_x0 R χ_y‖^s]` per distance.
    pub estimates: Vec<McEstimate>,
    /// Samples whose lattice block norm exceeded `1/|η|`.
    pub bound_violations: usize,
    /// Largest lattice block norm seen.
    pub max_raw_norm: f64,
    pub heuristic: bool,
}

impl FmbProbe {
    /// Exponential fit of the mean profile over the distances with a positive mean.
    pub fn fit(&self) -> Result<DecayFit> {
        let pts: Vec<(f64, f64)> = self
            .distances
            .iter()
            .zip(&self.estimates)
            .filter(|(_, e)| e.mean > 0.0)
            .map(|(&d, e)| (d, e.mean))
            .collect();
        decay_fit(&pts)
    }
}

/// `(H - z)^{-1}` restricted to a few columns.
struct ResolventColumns {
    cols: Vec<usize>,
    // column-major: values[c][i] = G(i, cols[c])
    values: Vec<Vec<Complex64>>,
}

fn check_shift(h: &Hamiltonian, z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re >= h.floor() {
        return Err(Error::SingularShift(z.re));
    }
    Ok(())
}

impl ResolventColumns {
    fn new(h: &Hamiltonian, z: Complex64, cols: &[usize]) -> Result<Self> {
        check_shift(h, z)?;
        let mut values = Vec::with_capacity(cols.len());
        if !cols.is_empty() {
            let lu = BandLu::new(h.matrix(), z).map_err(|e| match e {
                Error::SolveFailed(_) if z.im == 0.0 => Error::SingularShift(z.re),
                other => other,
            })?;
            for &c in cols {
                let mut x = vec![Complex64::new(0.0, 0.0); h.dim()];
                x[c] = Complex64::new(1.0, 0.0);
                lu.solve_in_place(&mut x);
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::SolveFailed(format!("non-finite resolvent column {c}")));
                }
                values.push(x);
            }
        }
        Ok(Self {
            cols: cols.to_vec(),
            values,
        })
    }

    fn block_norm(&self, rows: &[usize], cell_volume: f64) -> BlockNorm {
        if rows.is_empty() || self.cols.is_empty() {
            return BlockNorm { norm: 0.0, raw: 0.0 };
        }
        let block = DMatrix::from_fn(rows.len(), self.cols.len(), |r, c| self.values[c][rows[r]]);
        let raw = block.singular_values().max();
        BlockNorm {
            norm: raw * cell_volume,
            raw,
        }
    }
}

fn cell_volume(domain: &Domain) -> f64 {
    domain.spacing().powi(domain.dim() as i32)
}

fn require_domain(h: &Hamiltonian) -> Result<&Domain> {
    h.domain()
        .map(|d| d.as_ref())
        .ok_or_else(|| Error::InvalidArgument("operator carries no geometry".into()))
}

/// Norm of `P_rows (H - z)^{-1} P_cols` for explicit site sets, scaled by `cell_volume`.
pub fn resolvent_block_norm_sites(
    h: &Hamiltonian,
    z: Complex64,
    rows: &[usize],
    cols: &[usize],
    cell_volume: f64,
) -> Result<BlockNorm> {
    if rows.is_empty() || cols.is_empty() {
        check_shift(h, z)?;
        return Ok(BlockNorm { norm: 0.0, raw: 0.0 });
    }
    Ok(ResolventColumns::new(h, z, cols)?.block_norm(rows, cell_volume))
}

/// `‖χ_x (H - z)^{-1} χ_y‖` with `χ` the unit cube around each point.
pub fn resolvent_block_norm(h: &Hamiltonian, z: Complex64, x: &[f64], y: &[f64]) -> Result<BlockNorm> {
    let domain = require_domain(h)?;
    resolvent_block_norm_sites(h, z, &domain.unit_block(x), &domain.unit_block(y), cell_volume(domain))
}

fn along_axis(x0: &[f64], distance: f64) -> Vec<f64> {
    let mut y = x0.to_vec();
    y[0] += distance;
    y
}

/// Monte Carlo fractional moments `E[‖χ_x0 R_{E+iη} χ_y‖^s]` for `y = x0 + d e_1`
/// on the Dirichlet box of side `side`.
#[allow(clippy::too_many_arguments)]
pub fn fractional_moment_probe(
    config: &ModelConfig,
    side: f64,
    energy: f64,
    eta: f64,
    s: f64,
    x0: &[f64],
    distances: &[f64],
    n: usize,
) -> Result<FmbProbe> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("fraction s must lie in (0, 1), got {s}")));
    }
    if eta == 0.0 || !eta.is_finite() {
        return Err(Error::InvalidArgument("eta must be a nonzero real".into()));
    }
    if x0.len() != config.dim {
        return Err(Error::GeometryMismatch(format!("x0 has {} coordinates in dimension {}", x0.len(), config.dim)));
    }
    let ens = Ensemble::new(config, config.domain(side, None)?, &[BoundarySpec::DIRICHLET])?;
    let domain = ens.domain().clone();
    let cols = domain.unit_block(x0);
    let row_sets: Vec<Vec<usize>> = distances.iter().map(|&d| domain.unit_block(&along_axis(x0, d))).collect();
    let vol = cell_volume(&domain);
    let bound = 1.0 / eta.abs();
    let z = Complex64::new(energy, eta);
    let per_sample = sample_map(n, |sample| {
        let h = ens.hamiltonian(sample)?;
        // (H - z)^{-1} is complex symmetric, so the x0 columns give every block pair
        let res = ResolventColumns::new(&h, z, &cols)?;
        let norms: Vec<BlockNorm> = row_sets.iter().map(|rows| res.block_norm(rows, vol)).collect();
        Ok(norms)
    })?;
    let mut bound_violations = 0;
    let mut max_raw_norm = 0.0f64;
    for norms in &per_sample {
        for b in norms {
            max_raw_norm = max_raw_norm.max(b.raw);
            if b.raw > bound * (1.0 + 1e-9) {
                bound_violations += 1;
            }
        }
    }
    let estimates = (0..distances.len())
        .map(|j| {
            let v: Vec<f64> = per_sample.iter().map(|norms| norms[j].norm.powf(s)).collect();
            McEstimate::from_samples(&v, config.seed)
        })
        .collect();
    Ok(FmbProbe {
        energy,
        eta,
        s,
        x0: x0.to_vec(),
        distances: distances.to_vec(),
        estimates,
        bound_violations,
        max_raw_norm,
        heuristic: true,
    })
}

/// Least-squares fit of `ln value` against distance.
pub fn decay_fit(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(Error::DegenerateFit(format!("value {} at distance {} is not positive", p.1, p.0)));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let fit = least_squares(&x, &y)?;
    Ok(DecayFit {
        rate: -fit.slope,
        log_prefactor: fit.intercept,
        r_squared: fit.r_squared,
        distance_min: x.iter().copied().fold(f64::INFINITY, f64::min),
        distance_max: x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        n_points: points.len(),
    })
}

/// Deterministic decay of `‖χ_x0 (H - E)^{-1} χ_y‖` for `E` below the spectrum floor.
pub fn combes_thomas_profile(h: &Hamiltonian, energy: f64, x0: &[f64], distances: &[f64]) -> Result<DecayProfile> {
    if !(energy < h.floor()) {
        return Err(Error::EnergyInSpectrum {
            energy,
            floor: h.floor(),
        });
    }
    if distances.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 distances, got {}", distances.len())));
    }
    let domain = require_domain(h)?;
    let res = ResolventColumns::new(h, Complex64::new(energy, 0.0), &domain.unit_block(x0))?;
    let vol = cell_volume(domain);
    let points: Vec<(f64, f64)> = distances
        .iter()
        .map(|&d| (d, res.block_norm(&domain.unit_block(&along_axis(x0, d)), vol).norm))
        .collect();
    let fit = decay_fit(&points)?;
    Ok(DecayProfile { energy, points, fit })
}

/// Decay rate per unit length of the free 1-D lattice Green's function at
/// depth `depth` below the band bottom: `arccosh(1 + h^2 depth / 2) / h`.
pub fn lattice_green_decay_rate(spacing: f64, depth: f64) -> f64 {
    (1.0 + spacing * spacing * depth / 2.0).acosh() / spacing
}
