//! Lattice discretizations of open boxes and punctured boxes.
//!
//! Grid points sit at `-L/2 + i*h` along every axis for `i = 0..=n`, `n = L/h`.
//! The nodes with `i = 0` or `i = n` lie on the outer boundary and are never
//! active. When a puncture is present, every node `x` with
//! `|x - x0|_inf <= l/2` is removed as well (the closed inner cube).

use crate::error::{Error, Result};

/// Tolerance used when comparing grid positions against cube faces.
pub(crate) const GEOM_EPS: f64 = 1e-9;

/// Distance between inner and outer boundary required by the SSF volume bound.
pub const REQUIRED_BOUNDARY_DISTANCE: f64 = 3.0;

/// Integer grid coordinates of a node; the second entry is 0 when `d = 1`.
pub type GridPoint = [usize; 2];

/// Boundary condition on one part of the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Dirichlet,
    Neumann,
}

/// Conditions on the outer box face and, for punctured domains, the inner cube face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundarySpec {
    pub outer: Condition,
    pub inner: Condition,
}

impl BoundarySpec {
    pub const DIRICHLET: BoundarySpec = BoundarySpec {
        outer: Condition::Dirichlet,
        inner: Condition::Dirichlet,
    };
    pub const NEUMANN: BoundarySpec = BoundarySpec {
        outer: Condition::Neumann,
        inner: Condition::Neumann,
    };

    pub fn new(outer: Condition, inner: Condition) -> Self {
        Self { outer, inner }
    }

    /// Dirichlet outside, `inner` on the puncture.
    pub fn punctured(inner: Condition) -> Self {
        Self {
            outer: Condition::Dirichlet,
            inner,
        }
    }
}

/// Removed closed cube `closure(Λ_l(x0))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Puncture {
    pub side: f64,
    pub center: [f64; 2],
}

/// What lies at a neighbouring grid position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Neighbor {
    Active(usize),
    Outer,
    Inner,
}

#[derive(Clone, Debug)]
pub struct Domain {
    dim: usize,
    side: f64,
    spacing: f64,
    cells: usize,
    puncture: Option<Puncture>,
    boundary_distance: Option<f64>,
    sites: Vec<GridPoint>,
    index: Vec<u32>,
}

const INACTIVE: u32 = u32::MAX;

fn integral_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let ratio = num / den;
    let rounded = ratio.round();
    if !ratio.is_finite() || rounded < 1.0 || (ratio - rounded).abs() > GEOM_EPS * ratio.abs().max(1.0) {
        return Err(Error::NonIntegralGrid(format!("{what} = {ratio} is not an integer")));
    }
    Ok(rounded as usize)
}

impl Domain {
    /// Builds the active-site list of `Λ_L` or `Λ_L \ closure(Λ_l(x0))`.
    ///
    /// `puncture` is `(l, x0)` with `x0.len() == d`.
    pub fn new(dim: usize, side: f64, spacing: f64, puncture: Option<(f64, &[f64])>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(side > 0.0) || !(spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "side {side} and spacing {spacing} must be positive"
            )));
        }
        let cells = integral_ratio(side, spacing, "L/h")?;
        if cells < 4 {
            return Err(Error::NonIntegralGrid(format!("L/h = {cells} must be at least 4")));
        }

        let (puncture, boundary_distance) = match puncture {
            None => (None, None),
            Some((inner, center)) => {
                if center.len() != dim {
                    return Err(Error::InvalidArgument(format!(
                        "puncture center has {} coordinates, expected {dim}",
                        center.len()
                    )));
                }
                if !(inner > 0.0) {
                    return Err(Error::InvalidArgument(format!("inner side {inner} must be positive")));
                }
                integral_ratio(inner, spacing, "l/h")?;
                let mut dist = f64::INFINITY;
                for &c in center {
                    let lo = c - inner / 2.0 + side / 2.0;
                    let hi = side / 2.0 - (c + inner / 2.0);
                    if lo <= GEOM_EPS || hi <= GEOM_EPS {
                        return Err(Error::PunctureNotInterior(format!(
                            "cube of side {inner} at {center:?} reaches the boundary of the box of side {side}"
                        )));
                    }
                    dist = dist.min(lo).min(hi);
                }
                let mut c = [0.0; 2];
                c[..dim].copy_from_slice(center);
                (Some(Puncture { side: inner, center: c }), Some(dist))
            }
        };

        let nodes = cells + 1;
        let total = if dim == 1 { nodes } else { nodes * nodes };
        let mut index = vec![INACTIVE; total];
        let mut sites = Vec::new();
        let second_range = if dim == 1 { 0..1 } else { 1..cells };
        let mut domain = Self {
            dim,
            side,
            spacing,
            cells,
            puncture,
            boundary_distance,
            sites: Vec::new(),
            index: Vec::new(),
        };
        for i0 in 1..cells {
            for i1 in second_range.clone() {
                let p = [i0, i1];
                if domain.in_puncture(p) {
                    continue;
                }
                index[domain.flat(p)] = sites.len() as u32;
                sites.push(p);
            }
        }
        domain.sites = sites;
        domain.index = index;
        Ok(domain)
    }

    fn flat(&self, p: GridPoint) -> usize {
        if self.dim == 1 {
            p[0]
        } else {
            p[0] * (self.cells + 1) + p[1]
        }
    }

    fn in_puncture(&self, p: GridPoint) -> bool {
        let Some(punct) = &self.puncture else {
            return false;
        };
        let x = self.position(p);
        (0..self.dim).all(|a| (x[a] - punct.center[a]).abs() <= punct.side / 2.0 + GEOM_EPS * self.spacing)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Outer side length `L`.
    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `n = L/h`, the number of grid intervals per axis.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn puncture(&self) -> Option<&Puncture> {
        self.puncture.as_ref()
    }

    /// `dist(∂Λ_l(x0), ∂Λ_L)` in the max norm, if punctured.
    pub fn boundary_distance(&self) -> Option<f64> {
        self.boundary_distance
    }

    /// Whether the inner cube keeps distance at least 3 from the outer boundary.
    /// Unpunctured domains report `true`.
    pub fn distance_ok(&self) -> bool {
        self.boundary_distance
            .is_none_or(|d| d >= REQUIRED_BOUNDARY_DISTANCE - GEOM_EPS)
    }

    /// Continuum volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[GridPoint] {
        &self.sites
    }

    pub fn site(&self, index: usize) -> GridPoint {
        self.sites[index]
    }

    /// Matrix row of an active node.
    pub fn index_of(&self, p: GridPoint) -> Option<usize> {
        if p[0] > self.cells || p[1] > self.cells || (self.dim == 1 && p[1] != 0) {
            return None;
        }
        match self.index[self.flat(p)] {
            INACTIVE => None,
            i => Some(i as usize),
        }
    }

    /// Physical coordinates of a grid node; unused axes are 0.
    pub fn position(&self, p: GridPoint) -> [f64; 2] {
        let mut x = [0.0; 2];
        for (a, xa) in x.iter_mut().enumerate().take(self.dim) {
            *xa = -self.side / 2.0 + p[a] as f64 * self.spacing;
        }
        x
    }

    pub fn site_position(&self, index: usize) -> [f64; 2] {
        self.position(self.sites[index])
    }

    /// Classifies the node one step away from `p` along `axis` in direction `step` (±1).
    pub fn neighbor(&self, p: GridPoint, axis: usize, step: isize) -> Neighbor {
        let coord = p[axis] as isize + step;
        if coord <= 0 || coord >= self.cells as isize {
            return Neighbor::Outer;
        }
        let mut q = p;
        q[axis] = coord as usize;
        match self.index[self.flat(q)] {
            INACTIVE => Neighbor::Inner,
            i => Neighbor::Active(i as usize),
        }
    }

    /// Iterates the `2d` neighbours of active site `index`.
    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = Neighbor> + '_ {
        let p = self.sites[index];
        (0..self.dim).flat_map(move |axis| [-1isize, 1].into_iter().map(move |s| self.neighbor(p, axis, s)))
    }

    /// Active sites with at least one removed (punctured) neighbour.
    pub fn inner_boundary_sites(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.neighbors(i).any(|n| n == Neighbor::Inner))
            .collect()
    }

    /// Active sites in the closed unit cube `|x - center|_inf <= 1/2`.
    pub fn unit_block(&self, center: &[f64]) -> Vec<usize> {
        self.sites_within(center, 0.5)
    }

    /// Active sites with `|x - center|_inf <= radius`, in index order.
    pub fn sites_within(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let tol = radius + GEOM_EPS * self.spacing;
        (0..self.len())
            .filter(|&i| {
                let x = self.site_position(i);
                (0..self.dim).all(|a| (x[a] - center.get(a).copied().unwrap_or(0.0)).abs() <= tol)
            })
            .collect()
    }

    /// Nearest active site to a physical point, if any lies within half a spacing.
    pub fn nearest_site(&self, point: &[f64]) -> Option<usize> {
        let mut p = [0usize; 2];
        for a in 0..self.dim {
            let t = (point[a] + self.side / 2.0) / self.spacing;
            let r = t.round();
            if r < 0.0 || (t - r).abs() > 0.5 {
                return None;
            }
            p[a] = r as usize;
        }
        self.index_of(p)
    }
}

/// Convenience constructor mirroring [`Domain::new`].
pub fn make_domain(dim: usize, side: f64, spacing: f64, puncture: Option<(f64, &[f64])>) -> Result<Domain> {
    Domain::new(dim, side, spacing, puncture)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn one_dimensional_box_drops_boundary_nodes() {
        let d = make_domain(1, 4.0, 1.0, None).unwrap();
        assert_eq!(d.len(), 3);
        let xs: Vec<f64> = (0..3).map(|i| d.site_position(i)[0]).collect();
        assert_eq!(xs, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn square_interior() {
        let d = make_domain(2, 4.0, 1.0, None).unwrap();
        assert_eq!(d.len(), 9);
        assert!(d.distance_ok());
    }

    #[test]
    fn punctured_square_matches_enumeration() {
        let d = make_domain(2, 10.0, 1.0, Some((2.0, &[0.0, 0.0]))).unwrap();
        // oracle: integer points strictly inside (-5,5)^2 minus the closed cube [-1,1]^2
        let mut expected = BTreeSet::new();
        for x in -4i32..=4 {
            for y in -4i32..=4 {
                if !(x.abs() <= 1 && y.abs() <= 1) {
                    expected.insert((x, y));
                }
            }
        }
        let got: BTreeSet<(i32, i32)> = (0..d.len())
            .map(|i| {
                let p = d.site_position(i);
                (p[0].round() as i32, p[1].round() as i32)
            })
            .collect();
        assert_eq!(got, expected);
        assert_eq!(d.len(), 72);
        assert_eq!(d.boundary_distance(), Some(4.0));
        assert!(d.distance_ok());
    }

    #[test]
    fn distance_flag_false_near_wall() {
        let d = make_domain(2, 8.0, 1.0, Some((2.0, &[2.0, 0.0]))).unwrap();
        assert_eq!(d.boundary_distance(), Some(1.0));
        assert!(!d.distance_ok());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(make_domain(3, 4.0, 1.0, None), Err(Error::UnsupportedDimension(3))));
        assert!(matches!(make_domain(1, 4.5, 1.0, None), Err(Error::NonIntegralGrid(_))));
        assert!(matches!(make_domain(1, 3.0, 1.0, None), Err(Error::NonIntegralGrid(_))));
        assert!(matches!(
            make_domain(2, 10.0, 1.0, Some((2.5, &[0.0, 0.0]))),
            Err(Error::NonIntegralGrid(_))
        ));
        assert!(matches!(
            make_domain(2, 10.0, 1.0, Some((4.0, &[3.0, 0.0]))),
            Err(Error::PunctureNotInterior(_))
        ));
        assert!(matches!(
            make_domain(2, 10.0, 1.0, Some((10.0, &[0.0, 0.0]))),
            Err(Error::PunctureNotInterior(_))
        ));
    }

    #[test]
    fn index_map_round_trips() {
        for d in [
            make_domain(1, 7.0, 0.5, Some((1.0, &[0.5]))).unwrap(),
            make_domain(2, 12.0, 0.5, Some((3.0, &[1.0, -0.5]))).unwrap(),
        ] {
            for (i, &p) in d.sites().iter().enumerate() {
                assert_eq!(d.index_of(p), Some(i));
            }
        }
    }

    #[test]
    fn inner_boundary_of_small_puncture() {
        let d = make_domain(2, 10.0, 1.0, Some((2.0, &[0.0, 0.0]))).unwrap();
        // four faces of a 3x3 removed block
        assert_eq!(d.inner_boundary_sites().len(), 12);
        let d1 = make_domain(1, 10.0, 0.5, Some((2.0, &[0.0]))).unwrap();
        assert_eq!(d1.inner_boundary_sites().len(), 2);
    }

    #[test]
    fn unit_blocks() {
        let d = make_domain(1, 8.0, 0.5, None).unwrap();
        assert_eq!(d.unit_block(&[0.0]).len(), 3);
        assert!(d.unit_block(&[10.0]).is_empty());
        let d2 = make_domain(2, 8.0, 1.0, None).unwrap();
        assert_eq!(d2.unit_block(&[0.0, 0.0]).len(), 1);
        assert_eq!(d2.nearest_site(&[1.0, -2.0]).map(|i| d2.site_position(i)), Some([1.0, -2.0]));
    }
}
