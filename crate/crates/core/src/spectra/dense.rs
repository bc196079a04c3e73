use nalgebra::SymmetricEigen;

use super::count::{CountMethod, CountResult, TIE_TOL};
use crate::error::{Error, Result};
use crate::grid::Hamiltonian;

/// Largest dimension the dense oracle accepts by default.
pub const DEFAULT_DENSE_THRESHOLD: usize = 2000;

fn check_dim(h: &Hamiltonian, threshold: usize) -> Result<()> {
    if h.dim() > threshold {
        return Err(Error::DimensionTooLarge {
            dim: h.dim(),
            threshold,
        });
    }
    Ok(())
}

/// All eigenvalues, ascending, from a dense symmetric eigensolver.
pub fn dense_eigenvalues(h: &Hamiltonian) -> Result<Vec<f64>> {
    dense_eigenvalues_with_threshold(h, DEFAULT_DENSE_THRESHOLD)
}

pub fn dense_eigenvalues_with_threshold(h: &Hamiltonian, threshold: usize) -> Result<Vec<f64>> {
    check_dim(h, threshold)?;
    let mut e: Vec<f64> = h.matrix().to_dense().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Eigenpairs sorted by eigenvalue; eigenvectors are the columns of the matrix.
pub fn dense_eigensystem(h: &Hamiltonian) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    check_dim(h, DEFAULT_DENSE_THRESHOLD)?;
    Ok(SymmetricEigen::new(h.matrix().to_dense()))
}

/// Oracle count `#{λ <= E + TIE_TOL * scale}` by full diagonalization.
pub fn dense_count(h: &Hamiltonian, energy: f64) -> Result<CountResult> {
    let eig = dense_eigenvalues(h)?;
    let scale = h.scale();
    let tol = TIE_TOL * if scale > 0.0 { scale } else { 1.0 };
    Ok(CountResult {
        count: eig.iter().filter(|&&l| l <= energy + tol).count(),
        energy,
        method: CountMethod::DenseOracle,
        zero_pivot_count: eig.iter().filter(|&&l| (l - energy).abs() <= tol).count(),
        jitter_applied: 0.0,
    })
}
