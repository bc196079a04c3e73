//! Counting-function averages: Wegner ratios, IDOS and DOS.

use serde::Serialize;

use super::mc::{sample_map, McEstimate};
use super::model::{Ensemble, ModelConfig, STRONG_DISORDER_2D};
use crate::error::{Error, Result};
use crate::grid::{covering_bounds, BoundarySpec};
use crate::spectra::counts_at;

/// Absolute slack on window endpoints, so grids like `0.3 + 0.1 k` stay admissible.
const WINDOW_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WegnerReport {
    pub e1: f64,
    pub e2: f64,
    pub side: f64,
    /// `E[N_L(E2) - N_L(E1)] / (L^d (E2 - E1))`.
    pub ratio: f64,
    pub direction: Direction,
    /// Increment estimate scaled like `ratio`.
    pub estimate: McEstimate,
    /// Set in two dimensions, where localization is assumed rather than known.
    pub empirical_localization: bool,
}

fn box_ensemble(config: &ModelConfig, side: f64) -> Result<Ensemble> {
    Ensemble::new(config, config.domain(side, None)?, &[BoundarySpec::DIRICHLET])
}

/// Per sample, the Dirichlet counts at every energy in `energies`.
fn sampled_counts(ens: &Ensemble, energies: &[f64], n: usize) -> Result<Vec<Vec<usize>>> {
    sample_map(n, |s| counts_at(&ens.hamiltonian(s)?, energies))
}

fn check_samples(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    Ok(())
}

fn check_interval(e1: f64, e2: f64) -> Result<()> {
    if !(e1 < e2) {
        return Err(Error::InvalidArgument(format!("empty interval [{e1}, {e2}]")));
    }
    Ok(())
}

/// Monte Carlo estimate of `E[N_L(E2) - N_L(E1)]` on the Dirichlet box of side `side`.
pub fn expected_counting_increment(config: &ModelConfig, e1: f64, e2: f64, side: f64, n: usize) -> Result<McEstimate> {
    check_interval(e1, e2)?;
    check_samples(n)?;
    let ens = box_ensemble(config, side)?;
    let counts = sampled_counts(&ens, &[e1, e2], n)?;
    let inc: Vec<f64> = counts.iter().map(|c| c[1] as f64 - c[0] as f64).collect();
    Ok(McEstimate::from_samples(&inc, config.seed))
}

fn ratios(
    config: &ModelConfig,
    intervals: &[(f64, f64)],
    sides: &[f64],
    n: usize,
    direction: Direction,
) -> Result<Vec<WegnerReport>> {
    check_samples(n)?;
    for &(a, b) in intervals {
        check_interval(a, b)?;
    }
    let mut energies: Vec<f64> = intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
    energies.sort_by(f64::total_cmp);
    energies.dedup();
    let slot = |e: f64| energies.binary_search_by(|x| x.total_cmp(&e)).expect("endpoint listed");
    let mut out = Vec::with_capacity(intervals.len() * sides.len());
    for &side in sides {
        let ens = box_ensemble(config, side)?;
        let counts = sampled_counts(&ens, &energies, n)?;
        let volume = ens.domain().volume();
        for &(e1, e2) in intervals {
            let (i1, i2) = (slot(e1), slot(e2));
            let inc: Vec<f64> = counts.iter().map(|c| c[i2] as f64 - c[i1] as f64).collect();
            let estimate = McEstimate::from_samples(&inc, config.seed).scaled(1.0 / (volume * (e2 - e1)));
            out.push(WegnerReport {
                e1,
                e2,
                side,
                ratio: estimate.mean,
                direction,
                estimate,
                empirical_localization: config.dim == 2,
            });
        }
    }
    Ok(out)
}

/// Upper Wegner ratios for every (interval, side) pair, sides outermost.
pub fn wegner_ratio(config: &ModelConfig, intervals: &[(f64, f64)], sides: &[f64], n: usize) -> Result<Vec<WegnerReport>> {
    ratios(config, intervals, sides, n, Direction::Upper)
}

/// Rejects setups outside the hypotheses of the reverse Wegner bound.
pub fn check_reverse_wegner_admissible(config: &ModelConfig, intervals: &[(f64, f64)], sides: &[f64]) -> Result<()> {
    config.validate()?;
    if !config.density.satisfies_v1prime() {
        return Err(Error::AssumptionViolated(
            "V1': the single-site density must be bounded below by a positive constant on [0, 1]".into(),
        ));
    }
    if !config.background.is_zero() {
        return Err(Error::AssumptionViolated(
            "the admissible window is only implemented for a vanishing background V0".into(),
        ));
    }
    if !(config.strength > 0.0) {
        return Err(Error::AssumptionViolated("localized window: lambda must be positive".into()));
    }
    if config.dim == 2 && config.strength < STRONG_DISORDER_2D {
        return Err(Error::AssumptionViolated(format!(
            "localized window: two-dimensional runs need lambda >= {STRONG_DISORDER_2D}"
        )));
    }
    let (w1, w2) = config.localized_window();
    let band = 4.0 * config.dim as f64 / (config.spacing * config.spacing);
    for &side in sides {
        if side < config.min_side {
            return Err(Error::AssumptionViolated(format!(
                "box side {side} is below the minimal side {}",
                config.min_side
            )));
        }
        let (c_minus, _) = covering_bounds(&config.profile, &*config.domain(side, None)?)?;
        let top = band + c_minus * config.strength;
        for &(e1, e2) in intervals {
            if e1 < w1 - WINDOW_SLACK || e2 > w2 + WINDOW_SLACK {
                return Err(Error::AssumptionViolated(format!(
                    "interval [{e1}, {e2}] leaves the localized window [{w1}, {w2}]"
                )));
            }
            if !(e1 > 0.0 && e2 < top) {
                return Err(Error::AssumptionViolated(format!(
                    "interval [{e1}, {e2}] is not inside the interior of [0, {top}]"
                )));
            }
        }
    }
    Ok(())
}

/// Lower (reverse) Wegner ratios; the empirical constant is the minimum ratio.
pub fn reverse_wegner_ratio(
    config: &ModelConfig,
    intervals: &[(f64, f64)],
    sides: &[f64],
    n: usize,
) -> Result<Vec<WegnerReport>> {
    check_reverse_wegner_admissible(config, intervals, sides)?;
    ratios(config, intervals, sides, n, Direction::Lower)
}

/// `E[N_L(E)] / L^d` at each energy.
pub fn idos_curve(config: &ModelConfig, energies: &[f64], side: f64, n: usize) -> Result<Vec<McEstimate>> {
    check_samples(n)?;
    let ens = box_ensemble(config, side)?;
    let counts = sampled_counts(&ens, energies, n)?;
    let volume = ens.domain().volume();
    Ok((0..energies.len())
        .map(|j| {
            let v: Vec<f64> = counts.iter().map(|c| c[j] as f64 / volume).collect();
            McEstimate::from_samples(&v, config.seed)
        })
        .collect())
}

/// Forward-difference density of states `E[N_L(E+ε) - N_L(E)] / (L^d ε)`.
pub fn dos_estimate(config: &ModelConfig, energy: f64, eps: f64, side: f64, n: usize) -> Result<McEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    let volume = side.powi(config.dim as i32);
    Ok(expected_counting_increment(config, energy, energy + eps, side, n)?.scaled(1.0 / (volume * eps)))
}
