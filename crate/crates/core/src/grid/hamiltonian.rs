use std::io::{self, Write};
use std::sync::Arc;

use super::domain::{BoundarySpec, Condition, Domain, Neighbor};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Sparse symmetric operator `-Δ_h + V` on a discretized domain.
///
/// Matrices built without a domain (see [`Hamiltonian::from_matrix`]) carry
/// no geometry and a zero potential vector.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    matrix: CsrMatrix,
    domain: Option<Arc<Domain>>,
    bc: BoundarySpec,
    potential: Vec<f64>,
    floor: f64,
    ceiling: f64,
}

impl Hamiltonian {
    /// Wraps an arbitrary symmetric matrix.
    pub fn from_matrix(matrix: CsrMatrix) -> Result<Self> {
        if matrix.max_asymmetry() != 0.0 {
            return Err(Error::InvalidArgument("matrix is not exactly symmetric".into()));
        }
        let (floor, ceiling) = matrix.gershgorin();
        let n = matrix.dim();
        Ok(Self {
            matrix,
            domain: None,
            bc: BoundarySpec::DIRICHLET,
            potential: vec![0.0; n],
            floor,
            ceiling,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn domain(&self) -> Option<&Arc<Domain>> {
        self.domain.as_ref()
    }

    pub fn boundary(&self) -> BoundarySpec {
        self.bc
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Gershgorin lower bound on the spectrum.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Gershgorin upper bound on the spectrum.
    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    /// Magnitude used to scale pivot and tie tolerances.
    pub fn scale(&self) -> f64 {
        self.matrix.scale()
    }

    /// Same kinetic part with the diagonal potential replaced by `potential`.
    pub fn with_potential(&self, potential: &[f64]) -> Result<Self> {
        if potential.len() != self.dim() {
            return Err(Error::GeometryMismatch(format!(
                "potential has {} entries, operator has dimension {}",
                potential.len(),
                self.dim()
            )));
        }
        let delta: Vec<f64> = potential.iter().zip(&self.potential).map(|(v, old)| v - old).collect();
        let matrix = self.matrix.add_diagonal(&delta);
        let (floor, ceiling) = matrix.gershgorin();
        Ok(Self {
            matrix,
            domain: self.domain.clone(),
            bc: self.bc,
            potential: potential.to_vec(),
            floor,
            ceiling,
        })
    }

    /// True when both operators live on the same active-site geometry.
    pub fn same_geometry(&self, other: &Hamiltonian) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        match (&self.domain, &other.domain) {
            (Some(a), Some(b)) => {
                Arc::ptr_eq(a, b)
                    || (a.dim() == b.dim()
                        && a.side() == b.side()
                        && a.spacing() == b.spacing()
                        && a.puncture() == b.puncture()
                        && a.sites() == b.sites())
            }
            (None, None) => true,
            _ => false,
        }
    }

    /// Coordinate-list dump: one `row col value` line per stored entry,
    /// values with 17 significant digits.
    pub fn write_coo<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# n={} nnz={}", self.dim(), self.matrix.nnz())?;
        for (i, j, v) in self.matrix.triplets() {
            writeln!(out, "{i} {j} {v:.16e}")?;
        }
        Ok(())
    }
}

/// Discrete Laplacian `-Δ_h` with second-order central differences.
///
/// Neighbours across a Dirichlet face count toward the diagonal with weight
/// `1/h^2`; neighbours across a Neumann face are dropped (mirror ghost point).
pub fn assemble_laplacian(domain: &Arc<Domain>, bc: BoundarySpec) -> Hamiltonian {
    let w = 1.0 / (domain.spacing() * domain.spacing());
    let mut triplets = Vec::with_capacity(domain.len() * (2 * domain.dim() + 1));
    for i in 0..domain.len() {
        let mut stencil = 0usize;
        for nb in domain.neighbors(i) {
            match nb {
                Neighbor::Active(j) => {
                    stencil += 1;
                    triplets.push((i, j, -w));
                }
                Neighbor::Outer => {
                    if bc.outer == Condition::Dirichlet {
                        stencil += 1;
                    }
                }
                Neighbor::Inner => {
                    if bc.inner == Condition::Dirichlet {
                        stencil += 1;
                    }
                }
            }
        }
        triplets.push((i, i, stencil as f64 * w));
    }
    let matrix = CsrMatrix::from_triplets(domain.len(), &triplets);
    let (floor, ceiling) = matrix.gershgorin();
    Hamiltonian {
        matrix,
        domain: Some(domain.clone()),
        bc,
        potential: vec![0.0; domain.len()],
        floor,
        ceiling,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_domain;

    fn dense_eigs(h: &Hamiltonian) -> Vec<f64> {
        let mut e: Vec<f64> = h.matrix().to_dense().symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn dirichlet_tridiagonal() {
        let d = Arc::new(make_domain(1, 4.0, 1.0, None).unwrap());
        let h = assemble_laplacian(&d, BoundarySpec::DIRICHLET);
        let dense = h.matrix().to_dense();
        let expected = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(dense[(i, j)], expected[i][j]);
            }
        }
        assert_eq!(h.floor(), 0.0);
    }

    #[test]
    fn neumann_path_graph() {
        let d = Arc::new(make_domain(1, 5.0, 1.0, None).unwrap());
        let h = assemble_laplacian(&d, BoundarySpec::NEUMANN);
        assert_eq!(h.matrix().diagonal(), vec![1.0, 2.0, 2.0, 1.0]);
        let e = dense_eigs(&h);
        let s = 2f64.sqrt();
        for (got, want) in e.iter().zip([0.0, 2.0 - s, 2.0, 2.0 + s]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn punctured_dirichlet_is_principal_submatrix() {
        let full = Arc::new(make_domain(2, 8.0, 1.0, None).unwrap());
        let punct = Arc::new(make_domain(2, 8.0, 1.0, Some((2.0, &[0.0, 0.0]))).unwrap());
        let hf = assemble_laplacian(&full, BoundarySpec::DIRICHLET);
        let hp = assemble_laplacian(&punct, BoundarySpec::punctured(Condition::Dirichlet));
        let rows: Vec<usize> = punct.sites().iter().map(|&p| full.index_of(p).unwrap()).collect();
        assert_eq!(hf.matrix().principal_submatrix(&rows), *hp.matrix());
    }

    #[test]
    fn neumann_inner_lowers_boundary_diagonal() {
        let d = Arc::new(make_domain(2, 10.0, 1.0, Some((2.0, &[0.0, 0.0]))).unwrap());
        let hd = assemble_laplacian(&d, BoundarySpec::punctured(Condition::Dirichlet));
        let hn = assemble_laplacian(&d, BoundarySpec::punctured(Condition::Neumann));
        let dd = hd.matrix().diagonal();
        let dn = hn.matrix().diagonal();
        let changed: Vec<usize> = (0..d.len()).filter(|&i| dd[i] != dn[i]).collect();
        assert_eq!(changed, d.inner_boundary_sites());
        assert!(changed.iter().all(|&i| dd[i] - dn[i] >= 1.0));
    }

    #[test]
    fn coo_dump_has_full_precision() {
        let d = Arc::new(make_domain(1, 3.0, 0.3, None).unwrap());
        let h = assemble_laplacian(&d, BoundarySpec::DIRICHLET);
        let mut buf = Vec::new();
        h.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        let v: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert_eq!(v, h.matrix().get(0, 0));
        assert_eq!(text.lines().count(), 1 + h.matrix().nnz());
    }

    #[test]
    fn with_potential_replaces_diagonal() {
        let d = Arc::new(make_domain(1, 4.0, 1.0, None).unwrap());
        let h = assemble_laplacian(&d, BoundarySpec::DIRICHLET);
        let h1 = h.with_potential(&[1.0, 2.0, 3.0]).unwrap();
        let h2 = h1.with_potential(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(h2.matrix().diagonal(), vec![2.5, 2.5, 2.5]);
        assert!(h.with_potential(&[0.0]).is_err());
    }
}
