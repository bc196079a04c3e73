//! Dense symmetric indefinite factorization `P A P^T = L D L^T` with
//! Bunch-Kaufman partial pivoting (1x1 and 2x2 diagonal blocks).

/// `(1 + sqrt(17)) / 8`, the growth-optimal pivot threshold.
const ALPHA: f64 = 0.640_388_203_202_208_4;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Pivot {
    One(f64),
    Two(f64, f64, f64),
}

/// Signature of a symmetric matrix as seen through its pivots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl Inertia {
    fn add_eigen(&mut self, lambda: f64, tol: f64) {
        if lambda.abs() <= tol {
            self.zero += 1;
        } else if lambda < 0.0 {
            self.negative += 1;
        } else {
            self.positive += 1;
        }
    }
}

impl std::ops::AddAssign for Inertia {
    fn add_assign(&mut self, rhs: Self) {
        self.negative += rhs.negative;
        self.zero += rhs.zero;
        self.positive += rhs.positive;
    }
}

/// Factorization of a dense symmetric matrix.
#[derive(Clone, Debug)]
pub struct LdltFactor {
    n: usize,
    // row-major; strictly lower part holds L (unit diagonal implied)
    l: Vec<f64>,
    perm: Vec<usize>,
    pivots: Vec<(usize, Pivot)>,
    inertia: Inertia,
    finite: bool,
}

impl LdltFactor {
    /// Factors the symmetric `n x n` row-major matrix `a` (both triangles read).
    /// Pivots with magnitude at most `tol` are reported as zero.
    pub fn new(mut a: Vec<f64>, n: usize, tol: f64) -> Self {
        assert_eq!(a.len(), n * n);
        let idx = |i: usize, j: usize| i * n + j;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivots = Vec::with_capacity(n);
        let mut inertia = Inertia::default();

        let swap = |a: &mut Vec<f64>, perm: &mut Vec<usize>, k: usize, p: usize| {
            if k == p {
                return;
            }
            perm.swap(k, p);
            // rows of the finished L columns
            for j in 0..k {
                a.swap(idx(k, j), idx(p, j));
            }
            // symmetric swap inside the trailing block
            for j in k..n {
                a.swap(idx(k, j), idx(p, j));
            }
            for i in k..n {
                a.swap(idx(i, k), idx(i, p));
            }
        };

        let mut k = 0;
        while k < n {
            let absakk = a[idx(k, k)].abs();
            let (mut imax, mut colmax) = (k, 0.0f64);
            for i in k + 1..n {
                let v = a[idx(i, k)].abs();
                if v > colmax {
                    colmax = v;
                    imax = i;
                }
            }

            let two_by_two;
            if absakk.max(colmax) == 0.0 || absakk >= ALPHA * colmax {
                two_by_two = false;
            } else {
                let mut rowmax = 0.0f64;
                for j in k..n {
                    if j != imax {
                        rowmax = rowmax.max(a[idx(imax, j)].abs());
                    }
                }
                if absakk * rowmax >= ALPHA * colmax * colmax {
                    two_by_two = false;
                } else if a[idx(imax, imax)].abs() >= ALPHA * rowmax {
                    swap(&mut a, &mut perm, k, imax);
                    two_by_two = false;
                } else {
                    swap(&mut a, &mut perm, k + 1, imax);
                    two_by_two = true;
                }
            }

            if !two_by_two {
                let d = a[idx(k, k)];
                inertia.add_eigen(d, tol);
                pivots.push((k, Pivot::One(d)));
                if d != 0.0 {
                    for i in k + 1..n {
                        a[idx(i, k)] /= d;
                    }
                    for i in k + 1..n {
                        let li = a[idx(i, k)];
                        if li == 0.0 {
                            continue;
                        }
                        let lid = li * d;
                        for j in k + 1..=i {
                            a[idx(i, j)] -= lid * a[idx(j, k)];
                        }
                    }
                    for i in k + 1..n {
                        for j in i + 1..n {
                            a[idx(i, j)] = a[idx(j, i)];
                        }
                    }
                }
                k += 1;
            } else {
                let (p, q, r) = (a[idx(k, k)], a[idx(k + 1, k)], a[idx(k + 1, k + 1)]);
                let det = p * r - q * q;
                let mean = 0.5 * (p + r);
                let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
                inertia.add_eigen(mean - rad, tol);
                inertia.add_eigen(mean + rad, tol);
                pivots.push((k, Pivot::Two(p, q, r)));
                // the off-diagonal of D is not part of L
                a[idx(k + 1, k)] = 0.0;
                for i in k + 2..n {
                    let (x, y) = (a[idx(i, k)], a[idx(i, k + 1)]);
                    // [l1 l2] = [x y] D^{-1}
                    a[idx(i, k)] = (x * r - y * q) / det;
                    a[idx(i, k + 1)] = (y * p - x * q) / det;
                }
                for i in k + 2..n {
                    let (x, y) = (a[idx(i, k)], a[idx(i, k + 1)]);
                    let (wx, wy) = (x * p + y * q, x * q + y * r);
                    for j in k + 2..=i {
                        a[idx(i, j)] -= wx * a[idx(j, k)] + wy * a[idx(j, k + 1)];
                    }
                }
                for i in k + 2..n {
                    for j in i + 1..n {
                        a[idx(i, j)] = a[idx(j, i)];
                    }
                }
                k += 2;
            }
        }
        let finite = a.iter().all(|v| v.is_finite());
        Self {
            n,
            l: a,
            perm,
            pivots,
            inertia,
            finite,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    /// False if a non-finite value appeared during elimination.
    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// True when no pivot was classified as zero and all entries are finite.
    pub fn is_regular(&self) -> bool {
        self.finite && self.inertia.zero == 0
    }

    /// Solves `A x = b` in place. Requires a regular factorization.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // L y = P b
        for i in 0..n {
            let mut s = y[i];
            let row = &self.l[i * n..i * n + i];
            for (j, lij) in row.iter().enumerate() {
                s -= lij * y[j];
            }
            y[i] = s;
        }
        // D z = y
        for &(k, piv) in &self.pivots {
            match piv {
                Pivot::One(d) => y[k] /= d,
                Pivot::Two(p, q, r) => {
                    let det = p * r - q * q;
                    let (u, v) = (y[k], y[k + 1]);
                    y[k] = (r * u - q * v) / det;
                    y[k + 1] = (p * v - q * u) / det;
                }
            }
        }
        // L^T x' = z
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.l[j * n + i] * y[j];
            }
            y[i] = s;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = y[i];
        }
    }
}
