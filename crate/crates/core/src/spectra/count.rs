//! Exact eigenvalue counting `N(E) = #{λ <= E}` by Sylvester inertia.
//!
//! Tridiagonal operators use a Sturm sequence. Wider banded operators are
//! cut into consecutive blocks of the half-bandwidth, which makes them block
//! tridiagonal; the Schur complements `S_k = A_k - σ - B_k S_{k-1}^{-1} B_k^T`
//! are factored with Bunch-Kaufman and their inertias add up to the inertia
//! of `H - σ`.

use serde::Serialize;

use super::bunch_kaufman::{Inertia, LdltFactor};
use crate::error::{Error, Result};
use crate::grid::{CsrMatrix, Hamiltonian};

/// Relative tie tolerance: eigenvalues within `TIE_TOL * scale` of `E` count as `<= E`.
pub const TIE_TOL: f64 = 1e-12;
/// Relative step of each jitter retry.
pub const JITTER_STEP: f64 = 1e-9;
/// Retries after a factorization breakdown.
pub const MAX_JITTER_RETRIES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CountMethod {
    Sturm,
    SparseLdl,
    DenseOracle,
}

/// Outcome of one eigenvalue count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CountResult {
    pub count: usize,
    pub energy: f64,
    pub method: CountMethod,
    pub zero_pivot_count: usize,
    pub jitter_applied: f64,
}

struct Breakdown;

fn tolerance(matrix: &CsrMatrix) -> (f64, f64) {
    let scale = matrix.scale();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    (scale, TIE_TOL * scale)
}

fn sturm_inertia(matrix: &CsrMatrix, shift: f64, tol: f64) -> std::result::Result<Inertia, Breakdown> {
    let n = matrix.dim();
    let mut inertia = Inertia::default();
    let mut q = 0.0f64;
    for i in 0..n {
        let d = matrix.get(i, i) - shift;
        q = if i == 0 {
            d
        } else {
            let e = matrix.get(i, i - 1);
            d - e * e / q
        };
        if !q.is_finite() {
            return Err(Breakdown);
        }
        if q.abs() <= tol {
            inertia.zero += 1;
            // continue as if the shift sat just above the eigenvalue
            q = -tol;
        } else if q < 0.0 {
            inertia.negative += 1;
        } else {
            inertia.positive += 1;
        }
    }
    Ok(inertia)
}

fn dense_block(matrix: &CsrMatrix, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Vec<f64> {
    let m = cols.len();
    let mut out = vec![0.0; rows.len() * m];
    for (r, i) in rows.enumerate() {
        for (j, v) in matrix.row(i) {
            if cols.contains(&j) {
                out[r * m + (j - cols.start)] = v;
            }
        }
    }
    out
}

fn block_inertia(matrix: &CsrMatrix, shift: f64, tol: f64) -> std::result::Result<Inertia, Breakdown> {
    let n = matrix.dim();
    let width = matrix.half_bandwidth().max(1);
    let mut inertia = Inertia::default();
    let mut prev: Option<(LdltFactor, std::ops::Range<usize>)> = None;
    let mut start = 0;
    while start < n {
        let end = (start + width).min(n);
        let r = start..end;
        let m = r.len();
        let mut s = dense_block(matrix, r.clone(), r.clone());
        for i in 0..m {
            s[i * m + i] -= shift;
        }
        if let Some((factor, pr)) = &prev {
            // C = A[r, pr]; S -= C * F^{-1} C^T
            let c = dense_block(matrix, r.clone(), pr.clone());
            let pm = pr.len();
            let mut x = vec![0.0; pm * m]; // column j = F^{-1} C[j, :]^T
            let mut col = vec![0.0; pm];
            for j in 0..m {
                let row = &c[j * pm..(j + 1) * pm];
                if row.iter().all(|&v| v == 0.0) {
                    continue;
                }
                col.copy_from_slice(row);
                factor.solve_in_place(&mut col);
                for (t, v) in col.iter().enumerate() {
                    x[t * m + j] = *v;
                }
            }
            for i in 0..m {
                let ci = &c[i * pm..(i + 1) * pm];
                for (t, &cit) in ci.iter().enumerate() {
                    if cit == 0.0 {
                        continue;
                    }
                    let xr = &x[t * m..(t + 1) * m];
                    let srow = &mut s[i * m..(i + 1) * m];
                    for (sv, xv) in srow.iter_mut().zip(xr) {
                        *sv -= cit * xv;
                    }
                }
            }
            // symmetrize against rounding
            for i in 0..m {
                for j in 0..i {
                    let v = 0.5 * (s[i * m + j] + s[j * m + i]);
                    s[i * m + j] = v;
                    s[j * m + i] = v;
                }
            }
        }
        let factor = LdltFactor::new(s, m, tol);
        if !factor.is_finite() {
            return Err(Breakdown);
        }
        let last = end == n;
        if !last && factor.inertia().zero > 0 {
            return Err(Breakdown);
        }
        inertia += factor.inertia();
        prev = Some((factor, r));
        start = end;
    }
    Ok(inertia)
}

/// The inertia-based method that [`count_at_or_below`] picks for `h`.
pub fn inertia_method(h: &Hamiltonian) -> CountMethod {
    if h.matrix().half_bandwidth() <= 1 {
        CountMethod::Sturm
    } else {
        CountMethod::SparseLdl
    }
}

/// Number of eigenvalues `<= E`, including those within the tie tolerance.
pub fn count_at_or_below(h: &Hamiltonian, energy: f64) -> Result<CountResult> {
    let method = inertia_method(h);
    let matrix = h.matrix();
    let (scale, tol) = tolerance(matrix);
    if matrix.dim() == 0 {
        return Ok(CountResult {
            count: 0,
            energy,
            method,
            zero_pivot_count: 0,
            jitter_applied: 0.0,
        });
    }
    for attempt in 0..=MAX_JITTER_RETRIES {
        let jitter = attempt as f64 * JITTER_STEP * scale;
        let shift = energy + jitter;
        let outcome = match method {
            CountMethod::Sturm => sturm_inertia(matrix, shift, tol),
            _ => block_inertia(matrix, shift, tol),
        };
        if let Ok(inertia) = outcome {
            return Ok(CountResult {
                count: inertia.negative + inertia.zero,
                energy,
                method,
                zero_pivot_count: inertia.zero,
                jitter_applied: jitter,
            });
        }
    }
    Err(Error::FactorizationFailed {
        energy,
        attempts: MAX_JITTER_RETRIES,
    })
}

/// Counts at several energies.
pub fn counts_at(h: &Hamiltonian, energies: &[f64]) -> Result<Vec<usize>> {
    energies.iter().map(|&e| count_at_or_below(h, e).map(|c| c.count)).collect()
}
