//! Alloy-type potentials `V_0 + λ Σ_k ω_k u(· - k)` sampled on the grid.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::domain::{Domain, GEOM_EPS};
use crate::error::{Error, Result};

/// A point of `Z^d`; the second coordinate is 0 when `d = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(pub [i64; 2]);

/// Coupling constants `ω_k` keyed by lattice point.
pub type Couplings = BTreeMap<LatticePoint, f64>;

/// Single-site bump `u`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SingleSiteProfile {
    /// Indicator of the half-open unit cube `[-1/2, 1/2)^d`; its translates
    /// partition the grid exactly.
    #[default]
    CellIndicator,
    /// Indicator of the closed cube `|y|_inf <= side/2`.
    ClosedCube { side: f64 },
    /// `height * max(0, 1 - |y|_inf / radius)`.
    Tent { radius: f64, height: f64 },
}

impl SingleSiteProfile {
    /// Max-norm radius `R_u` of the support.
    pub fn support_radius(&self) -> f64 {
        match *self {
            Self::CellIndicator => 0.5,
            Self::ClosedCube { side } => side / 2.0,
            Self::Tent { radius, .. } => radius,
        }
    }

    /// `u(y)` for an offset `y` (only the first `dim` entries are read).
    pub fn value(&self, offset: &[f64], dim: usize) -> f64 {
        let y = &offset[..dim];
        match *self {
            Self::CellIndicator => {
                let inside = y.iter().all(|t| (-0.5 - GEOM_EPS..0.5 - GEOM_EPS).contains(t));
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            Self::ClosedCube { side } => {
                if y.iter().all(|&t| t.abs() <= side / 2.0 + GEOM_EPS) {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tent { radius, height } => {
                let r = y.iter().fold(0.0f64, |m, t| m.max(t.abs()));
                height * (1.0 - r / radius).max(0.0)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::CellIndicator => true,
            Self::ClosedCube { side } => side > 0.0 && side.is_finite(),
            Self::Tent { radius, height } => radius > 0.0 && height >= 0.0 && radius.is_finite() && height.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid single-site profile {self:?}")))
        }
    }

    /// Lattice points `k` with `u(x - k) != 0`, together with the value.
    fn contributions(&self, x: [f64; 2], dim: usize) -> Vec<(LatticePoint, f64)> {
        let r = self.support_radius();
        let lo: Vec<i64> = (0..dim).map(|a| (x[a] - r - GEOM_EPS).ceil() as i64).collect();
        let hi: Vec<i64> = (0..dim).map(|a| (x[a] + r + GEOM_EPS).floor() as i64).collect();
        let mut out = Vec::new();
        let second = if dim == 1 { 0..=0 } else { lo[1]..=hi[1] };
        for k0 in lo[0]..=hi[0] {
            for k1 in second.clone() {
                let off = [x[0] - k0 as f64, x[1] - k1 as f64];
                let v = self.value(&off, dim);
                if v != 0.0 {
                    out.push((LatticePoint([k0, k1]), v));
                }
            }
        }
        out
    }
}

/// Deterministic `Z^d`-periodic background `V_0`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Background {
    #[default]
    Zero,
    /// Samples on the `m^d` grid points of one unit cell `[k-1/2, k+1/2)^d`,
    /// `m = 1/h`, starting at the lower corner and tiled periodically.
    /// Row-major with the first axis slowest.
    Periodic { per_axis: usize, values: Vec<f64> },
}

impl Background {
    fn sampler(&self, domain: &Domain) -> Result<Option<(usize, &[f64])>> {
        match self {
            Self::Zero => Ok(None),
            Self::Periodic { per_axis, values } => {
                let m = *per_axis;
                if m == 0 || (m as f64 * domain.spacing() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "periodic background with {m} samples per axis does not tile spacing {}",
                        domain.spacing()
                    )));
                }
                if values.len() != m.pow(domain.dim() as u32) {
                    return Err(Error::InvalidArgument(format!(
                        "periodic background needs {} values, got {}",
                        m.pow(domain.dim() as u32),
                        values.len()
                    )));
                }
                Ok(Some((m, values)))
            }
        }
    }

    /// Values at every active site of `domain`.
    pub fn sample(&self, domain: &Domain) -> Result<Vec<f64>> {
        let Some((m, values)) = self.sampler(domain)? else {
            return Ok(vec![0.0; domain.len()]);
        };
        let h = domain.spacing();
        Ok((0..domain.len())
            .map(|i| {
                let x = domain.site_position(i);
                let mut flat = 0usize;
                for xa in x.iter().take(domain.dim()) {
                    let t = xa + 0.5 - (xa + 0.5 + GEOM_EPS).floor();
                    let local = ((t / h).round() as usize) % m;
                    flat = flat * m + local;
                }
                values[flat]
            })
            .collect())
    }

    pub fn min_max(&self) -> (f64, f64) {
        match self {
            Self::Zero => (0.0, 0.0),
            Self::Periodic { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Periodic { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }
}

/// Every lattice point whose bump is nonzero at some active site.
pub fn needed_lattice_points(domain: &Domain, profile: &SingleSiteProfile) -> Vec<LatticePoint> {
    let mut set = BTreeSet::new();
    for i in 0..domain.len() {
        for (k, _) in profile.contributions(domain.site_position(i), domain.dim()) {
            set.insert(k);
        }
    }
    set.into_iter().collect()
}

/// Per-site sparse weights `u(x - k)`; reused across disorder samples.
#[derive(Clone, Debug)]
pub struct PotentialStencil {
    lattice: Vec<LatticePoint>,
    entries: Vec<Vec<(usize, f64)>>,
}

impl PotentialStencil {
    pub fn new(domain: &Domain, profile: &SingleSiteProfile) -> Self {
        let lattice = needed_lattice_points(domain, profile);
        let entries = (0..domain.len())
            .map(|i| {
                profile
                    .contributions(domain.site_position(i), domain.dim())
                    .into_iter()
                    .map(|(k, v)| (lattice.binary_search(&k).expect("lattice point enumerated"), v))
                    .collect()
            })
            .collect();
        Self { lattice, entries }
    }

    /// Lattice points the stencil reads, sorted.
    pub fn lattice(&self) -> &[LatticePoint] {
        &self.lattice
    }

    /// `Σ_k ω_k u(x - k)` per site, with `omega` aligned to [`Self::lattice`].
    pub fn apply(&self, omega: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|&(k, u)| omega[k] * u).sum())
            .collect()
    }

    /// `Σ_k u(x - k)` per site.
    pub fn covering(&self) -> Vec<f64> {
        self.entries.iter().map(|row| row.iter().map(|&(_, u)| u).sum()).collect()
    }
}

/// `v(x) = V_0(x) + λ Σ_k ω_k u(x - k)` at each active site.
pub fn assemble_potential(
    domain: &Domain,
    background: &Background,
    profile: &SingleSiteProfile,
    couplings: &Couplings,
    strength: f64,
) -> Result<Vec<f64>> {
    let mut v = background.sample(domain)?;
    for (i, vi) in v.iter_mut().enumerate() {
        let mut sum = 0.0;
        for (k, u) in profile.contributions(domain.site_position(i), domain.dim()) {
            let w = couplings.get(&k).ok_or(Error::MissingCoupling(k.0))?;
            sum += w * u;
        }
        *vi += strength * sum;
    }
    Ok(v)
}

/// Exact `(min, max)` over active sites of `Σ_k u(x - k)`.
pub fn covering_bounds(profile: &SingleSiteProfile, domain: &Domain) -> Result<(f64, f64)> {
    let cover = PotentialStencil::new(domain, profile).covering();
    let lo = cover.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cover.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) {
        return Err(Error::CoveringViolated(if lo.is_finite() { lo } else { 0.0 }));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_domain;

    fn constant_couplings(domain: &Domain, profile: &SingleSiteProfile, c: f64) -> Couplings {
        needed_lattice_points(domain, profile).into_iter().map(|k| (k, c)).collect()
    }

    #[test]
    fn unit_cells_cover_exactly() {
        for (dim, side, h) in [(1, 8.0, 0.5), (2, 6.0, 0.5), (2, 5.0, 1.0), (1, 6.0, 0.25)] {
            let d = make_domain(dim, side, h, None).unwrap();
            let p = SingleSiteProfile::CellIndicator;
            let v = assemble_potential(&d, &Background::Zero, &p, &constant_couplings(&d, &p, 1.0), 1.0).unwrap();
            assert!(v.iter().all(|&x| x == 1.0));
            assert_eq!(covering_bounds(&p, &d).unwrap(), (1.0, 1.0));
        }
    }

    #[test]
    fn zero_couplings_give_zero() {
        let d = make_domain(2, 6.0, 0.5, None).unwrap();
        let p = SingleSiteProfile::CellIndicator;
        let v = assemble_potential(&d, &Background::Zero, &p, &constant_couplings(&d, &p, 0.0), 3.0).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_bump_scaled() {
        let p = SingleSiteProfile::CellIndicator;
        for h in [1.0, 1.0 / 3.0] {
            let d = make_domain(1, 6.0, h, None).unwrap();
            let mut c = constant_couplings(&d, &p, 0.0);
            c.insert(LatticePoint([0, 0]), 0.5);
            let v = assemble_potential(&d, &Background::Zero, &p, &c, 2.0).unwrap();
            for (i, vi) in v.iter().enumerate() {
                let x = d.site_position(i)[0];
                let want = if x.abs() <= 0.5 { 1.0 } else { 0.0 };
                assert_eq!(*vi, want, "x = {x}");
            }
        }
    }

    #[test]
    fn missing_coupling_is_reported() {
        let d = make_domain(1, 6.0, 1.0, None).unwrap();
        let p = SingleSiteProfile::CellIndicator;
        let mut c = constant_couplings(&d, &p, 1.0);
        c.remove(&LatticePoint([1, 0]));
        assert_eq!(
            assemble_potential(&d, &Background::Zero, &p, &c, 1.0),
            Err(Error::MissingCoupling([1, 0]))
        );
    }

    #[test]
    fn small_cube_leaves_gaps() {
        let d = make_domain(1, 8.0, 0.25, None).unwrap();
        let p = SingleSiteProfile::ClosedCube { side: 0.5 };
        assert!(matches!(covering_bounds(&p, &d), Err(Error::CoveringViolated(_))));
    }

    #[test]
    fn tent_covering_matches_brute_force() {
        let d = make_domain(1, 4.0, 0.5, None).unwrap();
        let p = SingleSiteProfile::Tent { radius: 1.0, height: 1.0 };
        let brute: Vec<f64> = (0..d.len())
            .map(|i| {
                let x = d.site_position(i)[0];
                (-3i64..=3).map(|k| (1.0 - (x - k as f64).abs()).max(0.0)).sum()
            })
            .collect();
        let lo = brute.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = brute.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (cm, cp) = covering_bounds(&p, &d).unwrap();
        assert!((cm - lo).abs() < 1e-15 && (cp - hi).abs() < 1e-15);
    }

    #[test]
    fn needed_points_extend_past_the_box() {
        let d = make_domain(1, 4.0, 0.5, None).unwrap();
        let p = SingleSiteProfile::Tent { radius: 1.0, height: 1.0 };
        let pts = needed_lattice_points(&d, &p);
        assert_eq!(pts.first(), Some(&LatticePoint([-2, 0])));
        assert_eq!(pts.last(), Some(&LatticePoint([2, 0])));
    }

    #[test]
    fn periodic_background_tiles() {
        let d = make_domain(1, 4.0, 0.5, None).unwrap();
        let bg = Background::Periodic { per_axis: 2, values: vec![1.0, -1.0] };
        let v = bg.sample(&d).unwrap();
        // sites at -1.5, -1, ..., 1.5; local sample 0 sits on the lower cell corner (half-integers)
        let xs: Vec<f64> = (0..d.len()).map(|i| d.site_position(i)[0]).collect();
        for (x, vi) in xs.iter().zip(&v) {
            let want = if x.fract() == 0.0 { -1.0 } else { 1.0 };
            assert_eq!(*vi, want, "x = {x}");
        }
        let p = SingleSiteProfile::CellIndicator;
        let pot = assemble_potential(&d, &bg, &p, &constant_couplings(&d, &p, 1.0), 0.5).unwrap();
        assert!(pot.iter().zip(&v).all(|(a, b)| (a - b - 0.5).abs() < 1e-15));
        assert!(Background::Periodic { per_axis: 3, values: vec![0.0; 3] }.sample(&d).is_err());
    }
}
