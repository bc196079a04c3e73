use serde::Serialize;

use super::count::{count_at_or_below, CountResult};
use crate::error::{Error, Result};
use crate::grid::{BoundarySpec, Hamiltonian};

/// `ξ(E) = N(E; H_A) - N(E; H_B)` with the counts that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SsfResult {
    pub xi: i64,
    pub energy: f64,
    #[serde(skip)]
    pub boundaries: [BoundarySpec; 2],
    pub counts: [CountResult; 2],
}

/// Spectral shift between two operators on the same active sites
/// (typically `A` Neumann-type, `B` Dirichlet-type).
pub fn ssf(energy: f64, a: &Hamiltonian, b: &Hamiltonian) -> Result<SsfResult> {
    if !a.same_geometry(b) {
        return Err(Error::GeometryMismatch(format!(
            "operators of dimension {} and {} do not share a domain",
            a.dim(),
            b.dim()
        )));
    }
    let ca = count_at_or_below(a, energy)?;
    let cb = count_at_or_below(b, energy)?;
    Ok(SsfResult {
        xi: ca.count as i64 - cb.count as i64,
        energy,
        boundaries: [a.boundary(), b.boundary()],
        counts: [ca, cb],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{assemble_laplacian, make_domain};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn one_dimensional_free_pair() {
        let d = Arc::new(make_domain(1, 5.0, 1.0, None).unwrap());
        let hn = assemble_laplacian(&d, BoundarySpec::NEUMANN);
        let hd = assemble_laplacian(&d, BoundarySpec::DIRICHLET);
        let e = 2.1;
        let neu = (0..4).filter(|&k| 2.0 * (1.0 - (k as f64 * PI / 4.0).cos()) <= e).count();
        let dir = (1..=4).filter(|&k| 2.0 * (1.0 - (k as f64 * PI / 5.0).cos()) <= e).count();
        assert_eq!((neu, dir), (3, 2));
        let r = ssf(e, &hn, &hd).unwrap();
        assert_eq!(r.xi, 1);
        assert_eq!((r.counts[0].count, r.counts[1].count), (3, 2));
    }

    #[test]
    fn identical_and_below_floor() {
        let d = Arc::new(make_domain(2, 6.0, 1.0, Some((2.0, &[0.0, 0.0]))).unwrap());
        let hn = assemble_laplacian(&d, BoundarySpec::punctured(crate::grid::Condition::Neumann));
        let hd = assemble_laplacian(&d, BoundarySpec::punctured(crate::grid::Condition::Dirichlet));
        assert_eq!(ssf(3.3, &hd, &hd).unwrap().xi, 0);
        assert_eq!(ssf(hn.floor().min(hd.floor()) - 0.1, &hn, &hd).unwrap().xi, 0);
    }

    #[test]
    fn mismatched_geometry() {
        let a = Arc::new(make_domain(1, 5.0, 1.0, None).unwrap());
        let b = Arc::new(make_domain(1, 6.0, 1.0, None).unwrap());
        let r = ssf(
            1.0,
            &assemble_laplacian(&a, BoundarySpec::NEUMANN),
            &assemble_laplacian(&b, BoundarySpec::DIRICHLET),
        );
        assert!(matches!(r, Err(Error::GeometryMismatch(_))));
    }
}
