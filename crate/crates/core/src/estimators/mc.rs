use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Monte Carlo mean with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_samples)`; zero for a single sample.
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

impl McEstimate {
    /// Reduces `values` in index order.
    pub fn from_samples(values: &[f64], seed: u64) -> Self {
        let n = values.len();
        let mut sum = 0.0;
        for v in values {
            sum += v;
        }
        let mean = if n == 0 { 0.0 } else { sum / n as f64 };
        let stderr = if n < 2 {
            0.0
        } else {
            let mut ss = 0.0;
            for v in values {
                ss += (v - mean) * (v - mean);
            }
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        };
        Self {
            mean,
            stderr,
            n_samples: n,
            seed,
            samples: None,
        }
    }

    /// Same as [`Self::from_samples`] but keeps the per-sample values.
    pub fn retaining(values: Vec<f64>, seed: u64) -> Self {
        let mut est = Self::from_samples(&values, seed);
        est.samples = Some(values);
        est
    }

    /// Estimate of `c * X`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mean: self.mean * c,
            stderr: self.stderr * c.abs(),
            n_samples: self.n_samples,
            seed: self.seed,
            samples: self.samples.as_ref().map(|s| s.iter().map(|v| v * c).collect()),
        }
    }
}

/// Evaluates `f(0), ..., f(n-1)` on the current rayon pool and returns the
/// results in index order.
pub fn sample_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Ordinary least squares `y ≈ intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares fit of `y` on `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::DegenerateFit(format!("need at least 2 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let slope_stderr = if n > 2 { (ss_res / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_mean_and_stderr() {
        let e = McEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0], 7);
        assert_eq!(e.mean, 2.5);
        // sd = sqrt(5/3)
        assert!((e.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(e.n_samples, 4);
        assert!(e.samples.is_none());
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let e = McEstimate::from_samples(&[3.0; 10], 0);
        assert_eq!((e.mean, e.stderr), (3.0, 0.0));
    }

    #[test]
    fn sample_map_keeps_order() {
        let v = sample_map(100, |i| Ok(i * i)).unwrap();
        assert!(v.iter().enumerate().all(|(i, &x)| x == (i * i) as u64));
        let err = sample_map(10, |i| if i == 3 { Err(Error::InvalidArgument("x".into())) } else { Ok(i) });
        assert!(err.is_err());
    }

    #[test]
    fn exact_line() {
        let f = least_squares(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert_eq!((f.slope, f.intercept, f.r_squared), (2.0, 1.0, 1.0));
        assert!(least_squares(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
