//! Dirichlet-Neumann bracketing as integer counting inequalities.
//!
//! A split cuts every coupling `a_ij` between the inner and outer site sets.
//! The Neumann split moves `-|a_ij|` onto both diagonals and the Dirichlet
//! split moves `+|a_ij|`, so that `H^N ≤ H ≤ H^D` as quadratic forms.

use serde::Serialize;

use super::count::count_at_or_below;
use crate::error::{Error, Result};
use crate::grid::{Condition, CsrMatrix, Hamiltonian};

/// Restrictions of `full` to `inner` and to its complement, decoupled with
/// condition `bc` on the cut.
pub fn split_hamiltonian(full: &Hamiltonian, inner: &[usize], bc: Condition) -> Result<(Hamiltonian, Hamiltonian)> {
    let n = full.dim();
    let mut is_inner = vec![false; n];
    for &i in inner {
        if i >= n || is_inner[i] {
            return Err(Error::GeometryMismatch(format!("invalid or repeated inner site {i}")));
        }
        is_inner[i] = true;
    }
    let sign = match bc {
        Condition::Dirichlet => 1.0,
        Condition::Neumann => -1.0,
    };
    let m = full.matrix();
    let mut extra = vec![0.0; n];
    for i in 0..n {
        for (j, v) in m.row(i) {
            if is_inner[i] != is_inner[j] {
                extra[i] += sign * v.abs();
            }
        }
    }
    let shifted = m.add_diagonal(&extra);
    let outer: Vec<usize> = (0..n).filter(|&i| !is_inner[i]).collect();
    let mut inner_sorted = inner.to_vec();
    inner_sorted.sort_unstable();
    let restrict = |rows: &[usize]| -> Result<Hamiltonian> {
        Hamiltonian::from_matrix(CsrMatrix::principal_submatrix(&shifted, rows))
    };
    Ok((restrict(&inner_sorted)?, restrict(&outer)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BracketingCounts {
    pub full: usize,
    pub inner: usize,
    pub outer: usize,
}

/// Checks `N(E; H) >= N(E; H_in ⊕ H_out)` for a Dirichlet split and
/// `N(E; H) <= N(E; H_in ⊕ H_out)` for a Neumann split.
pub fn bracketing_check(
    full: &Hamiltonian,
    inner: &Hamiltonian,
    outer: &Hamiltonian,
    bc: Condition,
    energy: f64,
) -> Result<(bool, BracketingCounts)> {
    if inner.dim() + outer.dim() != full.dim() {
        return Err(Error::GeometryMismatch(format!(
            "split parts have {} + {} sites, full operator {}",
            inner.dim(),
            outer.dim(),
            full.dim()
        )));
    }
    let counts = BracketingCounts {
        full: count_at_or_below(full, energy)?.count,
        inner: count_at_or_below(inner, energy)?.count,
        outer: count_at_or_below(outer, energy)?.count,
    };
    let split = counts.inner + counts.outer;
    let holds = match bc {
        Condition::Dirichlet => counts.full >= split,
        Condition::Neumann => counts.full <= split,
    };
    Ok((holds, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{assemble_laplacian, make_domain, BoundarySpec};
    use crate::spectra::dense_eigenvalues;
    use std::sync::Arc;

    fn free_line() -> Hamiltonian {
        let d = Arc::new(make_domain(1, 10.0, 1.0, None).unwrap());
        assemble_laplacian(&d, BoundarySpec::DIRICHLET)
    }

    fn oracle(h: &Hamiltonian, e: f64) -> usize {
        dense_eigenvalues(h).unwrap().iter().filter(|&&l| l <= e).count()
    }

    #[test]
    fn dirichlet_split_of_free_line() {
        let h = free_line();
        assert_eq!(h.dim(), 9);
        let (a, b) = split_hamiltonian(&h, &[0, 1, 2, 3], Condition::Dirichlet).unwrap();
        let (holds, c) = bracketing_check(&h, &a, &b, Condition::Dirichlet, 1.0).unwrap();
        assert!(holds);
        assert_eq!((c.full, c.inner, c.outer), (oracle(&h, 1.0), oracle(&a, 1.0), oracle(&b, 1.0)));
    }

    #[test]
    fn neumann_split_of_free_line() {
        let h = free_line();
        let (a, b) = split_hamiltonian(&h, &[0, 1, 2, 3], Condition::Neumann).unwrap();
        let (holds, c) = bracketing_check(&h, &a, &b, Condition::Neumann, 1.0).unwrap();
        assert!(holds);
        assert!(c.full <= c.inner + c.outer);
        assert_eq!((c.inner, c.outer), (oracle(&a, 1.0), oracle(&b, 1.0)));
    }

    #[test]
    fn below_floor_counts_vanish() {
        let h = free_line();
        for bc in [Condition::Dirichlet, Condition::Neumann] {
            let (a, b) = split_hamiltonian(&h, &[4], bc).unwrap();
            let e = h.floor().min(a.floor()).min(b.floor()) - 1.0;
            let (holds, c) = bracketing_check(&h, &a, &b, bc, e).unwrap();
            assert!(holds);
            assert_eq!((c.full, c.inner, c.outer), (0, 0, 0));
        }
    }

    #[test]
    fn size_mismatch() {
        let h = free_line();
        let (a, _) = split_hamiltonian(&h, &[0, 1], Condition::Dirichlet).unwrap();
        assert!(matches!(
            bracketing_check(&h, &a, &a, Condition::Dirichlet, 1.0),
            Err(Error::GeometryMismatch(_))
        ));
    }
}
