//! Quadrature check of the trace identity
//! `∫_δ^{1-δ} Tr(U f'(H + ηU)) dη = Tr f(H + (1-δ)U) - Tr f(H + δU)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Hamiltonian;
use crate::spectra::DEFAULT_DENSE_THRESHOLD;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BirmanSolomyakReport {
    pub quad_order: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Cubic smoothstep switching from 0 at `E` to 1 at `E + ε`.
pub fn smoothstep(x: f64, energy: f64, eps: f64) -> f64 {
    let t = ((x - energy) / eps).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

pub fn smoothstep_derivative(x: f64, energy: f64, eps: f64) -> f64 {
    let t = (x - energy) / eps;
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        6.0 * t * (1.0 - t) / eps
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let step = pn / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn shifted(base: &DMatrix<f64>, u: &[f64], eta: f64) -> DMatrix<f64> {
    let mut m = base.clone();
    for (i, ui) in u.iter().enumerate() {
        m[(i, i)] += eta * ui;
    }
    m
}

fn trace_f(base: &DMatrix<f64>, u: &[f64], eta: f64, energy: f64, eps: f64) -> f64 {
    shifted(base, u, eta)
        .symmetric_eigenvalues()
        .iter()
        .map(|&l| smoothstep(l, energy, eps))
        .sum()
}

fn trace_u_fprime(base: &DMatrix<f64>, u: &[f64], eta: f64, energy: f64, eps: f64) -> f64 {
    let eig = SymmetricEigen::new(shifted(base, u, eta));
    let mut total = 0.0;
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let w = smoothstep_derivative(l, energy, eps);
        if w == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(j);
        let diag: f64 = u.iter().zip(v.iter()).map(|(ui, vi)| ui * vi * vi).sum();
        total += w * diag;
    }
    total
}

/// Both sides of the identity for the smoothstep switch on `[E, E + ε]`,
/// the left side by Gauss-Legendre quadrature of order `quad_order`.
pub fn birman_solomyak_residual(
    h_base: &Hamiltonian,
    u: &[f64],
    energy: f64,
    eps: f64,
    delta: f64,
    quad_order: usize,
) -> Result<BirmanSolomyakReport> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::InvalidDelta(delta));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    if quad_order == 0 {
        return Err(Error::InvalidArgument("quadrature order must be positive".into()));
    }
    if u.len() != h_base.dim() {
        return Err(Error::GeometryMismatch(format!("U has {} entries, H has dimension {}", u.len(), h_base.dim())));
    }
    if u.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument("U must be nonnegative".into()));
    }
    if h_base.dim() > DEFAULT_DENSE_THRESHOLD {
        return Err(Error::DimensionTooLarge {
            dim: h_base.dim(),
            threshold: DEFAULT_DENSE_THRESHOLD,
        });
    }
    let base = h_base.matrix().to_dense();
    let (a, b) = (delta, 1.0 - delta);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut lhs = 0.0;
    for (x, w) in gauss_legendre(quad_order) {
        lhs += w * half * trace_u_fprime(&base, u, mid + half * x, energy, eps);
    }
    let rhs = trace_f(&base, u, b, energy, eps) - trace_f(&base, u, a, energy, eps);
    Ok(BirmanSolomyakReport {
        quad_order,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}
