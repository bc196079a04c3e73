#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use specshift_core::estimators::{Ensemble, ModelConfig};
use specshift_core::grid::{BoundarySpec, Domain};

/// Integer description of a random (possibly punctured) box.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub dim: usize,
    pub spacing: f64,
    pub cells: usize,
    /// `(puncture cells, lower offset per axis)`.
    pub puncture: Option<(usize, [usize; 2])>,
}

impl Geometry {
    pub fn side(&self) -> f64 {
        self.cells as f64 * self.spacing
    }

    pub fn domain(&self) -> Arc<Domain> {
        let side = self.side();
        let punct = self.puncture.map(|(m, off)| {
            let l = m as f64 * self.spacing;
            let c: Vec<f64> = (0..self.dim)
                .map(|a| -side / 2.0 + off[a] as f64 * self.spacing + l / 2.0)
                .collect();
            (l, c)
        });
        let d = Domain::new(self.dim, side, self.spacing, punct.as_ref().map(|(l, c)| (*l, &c[..]))).unwrap();
        Arc::new(d)
    }
}

fn spacing() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(0.5)]
}

/// Unpunctured boxes with at most `max_sites` active sites.
pub fn box_geometry(max_sites: usize) -> impl Strategy<Value = Geometry> {
    (1usize..=2, spacing()).prop_flat_map(move |(dim, spacing)| {
        let max_cells = if dim == 1 { max_sites + 1 } else { (max_sites as f64).sqrt() as usize + 1 };
        (4usize..=max_cells.max(4)).prop_map(move |cells| Geometry {
            dim,
            spacing,
            cells,
            puncture: None,
        })
    })
}

/// Punctured boxes whose puncture closure is interior.
pub fn punctured_geometry(max_cells_1d: usize, max_cells_2d: usize) -> impl Strategy<Value = Geometry> {
    (1usize..=2, spacing())
        .prop_flat_map(move |(dim, spacing)| {
            let hi = if dim == 1 { max_cells_1d } else { max_cells_2d };
            (Just(dim), Just(spacing), 6usize..=hi)
        })
        .prop_flat_map(|(dim, spacing, cells)| {
            // puncture spans m cells, lower edge at node j with 1 <= j and j + m <= cells - 1
            (Just(dim), Just(spacing), Just(cells), 1usize..=cells - 4)
        })
        .prop_flat_map(|(dim, spacing, cells, m)| {
            let offs = 1usize..=cells - 1 - m;
            (Just(dim), Just(spacing), Just(cells), Just(m), offs.clone(), offs)
        })
        .prop_map(|(dim, spacing, cells, m, o0, o1)| Geometry {
            dim,
            spacing,
            cells,
            puncture: Some((m, [o0, if dim == 1 { 0 } else { o1 }])),
        })
}

pub fn model(dim: usize, spacing: f64, strength: f64, seed: u64) -> ModelConfig {
    ModelConfig {
        dim,
        spacing,
        strength,
        seed,
        ..ModelConfig::default()
    }
}

pub fn ensemble(geom: &Geometry, strength: f64, seed: u64, bcs: &[BoundarySpec]) -> Ensemble {
    Ensemble::new(&model(geom.dim, geom.spacing, strength, seed), geom.domain(), bcs).unwrap()
}
