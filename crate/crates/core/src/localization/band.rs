//! Complex banded LU with partial pivoting for `(H - z) x = b`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::CsrMatrix;

/// Row `i` stores columns `i - b ..= i + 2b`; the extra `b` upper diagonals
/// hold fill-in from row interchanges.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    b: usize,
    width: usize,
    data: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.b - i)
    }

    /// Factors `matrix - z`.
    pub fn new(matrix: &CsrMatrix, z: Complex64) -> Result<Self> {
        let n = matrix.dim();
        let b = matrix.half_bandwidth();
        let width = 3 * b + 1;
        let mut lu = Self {
            n,
            b,
            width,
            data: vec![Complex64::new(0.0, 0.0); n * width],
            pivots: Vec::with_capacity(n),
        };
        for i in 0..n {
            for (j, v) in matrix.row(i) {
                let k = lu.at(i, j);
                lu.data[k] += v;
            }
            let k = lu.at(i, i);
            lu.data[k] -= z;
        }
        lu.factor()?;
        Ok(lu)
    }

    fn factor(&mut self) -> Result<()> {
        let (n, b) = (self.n, self.b);
        for k in 0..n {
            let last_row = (k + b).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.at(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SolveFailed(format!("zero pivot in column {k}")));
            }
            self.pivots.push(p);
            let last_col = (k + 2 * b).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, c) = (self.at(k, j), self.at(p, j));
                    self.data.swap(a, c);
                }
            }
            let pivot = self.data[self.at(k, k)];
            for i in k + 1..=last_row {
                let ik = self.at(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = self.data[self.at(k, j)];
                    let ij = self.at(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let (n, b) = (self.n, self.b);
        assert_eq!(x.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            x.swap(k, p);
            let xk = x[k];
            for i in k + 1..=(k + b).min(n - 1) {
                x[i] -= self.data[self.at(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + 2 * b).min(n - 1) {
                s -= self.data[self.at(i, j)] * x[j];
            }
            x[i] = s / self.data[self.at(i, i)];
        }
    }
}
