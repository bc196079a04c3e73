//! Disorder-averaged Neumann-minus-Dirichlet spectral shift on punctured boxes.

use serde::Serialize;

use super::mc::{least_squares, sample_map, McEstimate};
use super::model::{Ensemble, ModelConfig};
use crate::error::{Error, Result};
use crate::grid::{assemble_laplacian, make_domain, BoundarySpec, Condition, REQUIRED_BOUNDARY_DISTANCE};
use crate::spectra::ssf;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SsfReport {
    pub side: f64,
    pub l: f64,
    pub energy: f64,
    pub estimate: McEstimate,
    /// Number of inner-boundary sites; bounds `ξ` for every sample.
    pub rank_bound: usize,
    pub distance_ok: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SsfScalingReport {
    pub energy: f64,
    pub points: Vec<SsfReport>,
    /// `l` values entering the fit (positive means only).
    pub fitted_l: Vec<f64>,
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub target: f64,
}

/// Outer side used for an inner side `l` when none is given: `2l + 8`.
pub fn default_side_rule(l: f64) -> f64 {
    2.0 * l + 8.0
}

/// `E[ξ(E, H^N_{L,l}, H^D_{L,l})]` with a Dirichlet outer boundary.
pub fn averaged_ssf(config: &ModelConfig, side: f64, l: f64, x0: &[f64], energy: f64, n: usize) -> Result<SsfReport> {
    if n < 1 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let domain = config.domain(side, Some((l, x0)))?;
    let ens = Ensemble::new(
        config,
        domain.clone(),
        &[BoundarySpec::punctured(Condition::Neumann), BoundarySpec::punctured(Condition::Dirichlet)],
    )?;
    let xi = sample_map(n, |s| {
        let hs = ens.hamiltonians(s)?;
        Ok(ssf(energy, &hs[0], &hs[1])?.xi as f64)
    })?;
    let mut warnings = Vec::new();
    if !domain.distance_ok() {
        warnings.push(format!(
            "distance between puncture and outer boundary is {} < {REQUIRED_BOUNDARY_DISTANCE}",
            domain.boundary_distance().unwrap_or(0.0)
        ));
    }
    Ok(SsfReport {
        side,
        l,
        energy,
        estimate: McEstimate::from_samples(&xi, config.seed),
        rank_bound: domain.inner_boundary_sites().len(),
        distance_ok: domain.distance_ok(),
        warnings,
    })
}

/// Fits `log E[ξ] ≈ log C + α log l` over the puncture sizes `ls`, with the
/// puncture centred at the origin and outer side `side_rule(l)`.
pub fn ssf_scaling_exponent(
    config: &ModelConfig,
    ls: &[f64],
    side_rule: impl Fn(f64) -> f64,
    energy: f64,
    n: usize,
) -> Result<SsfScalingReport> {
    let mut distinct = ls.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 distinct l values, got {}", distinct.len())));
    }
    let origin = [0.0; 2];
    let points = ls
        .iter()
        .map(|&l| averaged_ssf(config, side_rule(l), l, &origin[..config.dim], energy, n))
        .collect::<Result<Vec<_>>>()?;
    let positive: Vec<&SsfReport> = points.iter().filter(|p| p.estimate.mean > 0.0).collect();
    if positive.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "only {} of {} puncture sizes have a positive mean shift",
            positive.len(),
            points.len()
        )));
    }
    let x: Vec<f64> = positive.iter().map(|p| p.l.ln()).collect();
    let y: Vec<f64> = positive.iter().map(|p| p.estimate.mean.ln()).collect();
    let fit = least_squares(&x, &y)?;
    Ok(SsfScalingReport {
        energy,
        fitted_l: positive.iter().map(|p| p.l).collect(),
        points,
        alpha: fit.slope,
        alpha_stderr: fit.slope_stderr,
        prefactor: fit.intercept.exp(),
        r_squared: fit.r_squared,
        target: config.dim as f64 - 1.0,
    })
}

/// `ξ(E, -Δ^N_{L,l}, -Δ^D_{L,l})` of the free operator for each outer side.
pub fn kirsch_series(l: f64, energy: f64, sides: &[f64], spacing: f64, dim: usize) -> Result<Vec<(f64, i64)>> {
    if dim != 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    sides
        .iter()
        .map(|&side| {
            let d = Arc::new(make_domain(dim, side, spacing, Some((l, &[0.0, 0.0])))?);
            let hn = assemble_laplacian(&d, BoundarySpec::punctured(Condition::Neumann));
            let hd = assemble_laplacian(&d, BoundarySpec::punctured(Condition::Dirichlet));
            Ok((side, ssf(energy, &hn, &hd)?.xi))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::dense_eigenvalues;

    #[test]
    fn rank_bound_and_sign() {
        let cfg = ModelConfig {
            dim: 2,
            strength: 8.0,
            ..ModelConfig::default()
        };
        let r = averaged_ssf(&cfg, 12.0, 2.0, &[0.0, 0.0], 5.0, 6).unwrap();
        assert_eq!(r.rank_bound, 4 * 5);
        assert!(r.estimate.mean >= 0.0 && r.estimate.mean <= r.rank_bound as f64);
        assert!(r.distance_ok && r.warnings.is_empty());
    }

    #[test]
    fn below_floor_vanishes() {
        let cfg = ModelConfig::default();
        let r = averaged_ssf(&cfg, 16.0, 2.0, &[0.0], -1.0, 4).unwrap();
        assert_eq!((r.estimate.mean, r.estimate.stderr), (0.0, 0.0));
    }

    #[test]
    fn close_puncture_warns() {
        let cfg = ModelConfig::default();
        let r = averaged_ssf(&cfg, 8.0, 2.0, &[2.0], 1.0, 2).unwrap();
        assert!(!r.distance_ok);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn one_dimensional_shift_at_most_two() {
        let cfg = ModelConfig::default();
        for l in [1.0, 2.0, 4.0] {
            for e in [0.5, 2.0, 6.0] {
                let r = averaged_ssf(&cfg, default_side_rule(l), l, &[0.0], e, 5).unwrap();
                assert_eq!(r.rank_bound, 2);
                assert!(r.estimate.mean <= 2.0);
            }
        }
    }

    #[test]
    fn scaling_needs_positive_means() {
        let cfg = ModelConfig {
            dim: 2,
            strength: 8.0,
            spacing: 1.0,
            ..ModelConfig::default()
        };
        let err = ssf_scaling_exponent(&cfg, &[2.0, 4.0, 6.0], default_side_rule, -1.0, 2).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit(_)));
        assert!(ssf_scaling_exponent(&cfg, &[2.0, 2.0, 4.0], default_side_rule, 1.0, 2).is_err());
    }

    #[test]
    fn kirsch_against_dense_counts() {
        let series = kirsch_series(2.0, 2.0, &[6.0, 8.0], 0.5, 2).unwrap();
        for &(side, xi) in &series {
            let d = Arc::new(make_domain(2, side, 0.5, Some((2.0, &[0.0, 0.0]))).unwrap());
            let count = |c| {
                let h = assemble_laplacian(&d, BoundarySpec::punctured(c));
                dense_eigenvalues(&h).unwrap().iter().filter(|&&l| l <= 2.0).count() as i64
            };
            assert_eq!(xi, count(Condition::Neumann) - count(Condition::Dirichlet));
        }
        assert!(kirsch_series(2.0, -1.0, &[6.0, 8.0], 0.5, 2).unwrap().iter().all(|&(_, xi)| xi == 0));
        assert!(kirsch_series(2.0, 1.0, &[6.0], 0.5, 1).is_err());
    }
}
