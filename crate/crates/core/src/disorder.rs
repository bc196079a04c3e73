//! I.i.d. coupling constants `ω_k` with counter-based, order-free generation.
//!
//! Each `ω_k` for sample `s` is a pure function of `(seed, s, k)`: the seed
//! keys a ChaCha8 stream cipher, `s` selects the stream and the lattice point
//! selects the word position inside it. Nothing depends on thread count,
//! iteration order or which other lattice points were requested.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Couplings, LatticePoint};

/// Tolerance on `∫ρ = 1`.
const MASS_TOL: f64 = 1e-12;

/// Lebesgue density `ρ` of the single-site distribution, supported in `[0, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SingleSiteDensity {
    #[default]
    Uniform01,
    /// `ρ = values[i]` on `[breakpoints[i], breakpoints[i+1])`.
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl SingleSiteDensity {
    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let d = Self::PiecewiseConstant { breakpoints, values };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let Self::PiecewiseConstant { breakpoints, values } = self else {
            return Ok(());
        };
        let bad = |msg: String| Err(Error::InvalidDensity(msg));
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return bad(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            ));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return bad("breakpoints must start at 0 and end at 1".into());
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("breakpoints must be strictly increasing".into());
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("density values must be finite and nonnegative".into());
        }
        let mass: f64 = self.pieces().map(|(a, b, v)| (b - a) * v).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return bad(format!("density integrates to {mass}, not 1"));
        }
        Ok(())
    }

    /// `(left, right, value)` for each piece.
    fn pieces(&self) -> Box<dyn Iterator<Item = (f64, f64, f64)> + '_> {
        match self {
            Self::Uniform01 => Box::new(std::iter::once((0.0, 1.0, 1.0))),
            Self::PiecewiseConstant { breakpoints, values } => Box::new(
                breakpoints
                    .windows(2)
                    .zip(values)
                    .map(|(w, &v)| (w[0], w[1], v)),
            ),
        }
    }

    /// `(ρ_-, ρ_sup)`: essential infimum and supremum of `ρ` on `[0, 1]`.
    pub fn bounds(&self) -> (f64, f64) {
        self.pieces()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, _, v)| (lo.min(v), hi.max(v)))
    }

    /// `ρ_- > 0`, the extra hypothesis of the reverse Wegner bound.
    pub fn satisfies_v1prime(&self) -> bool {
        self.bounds().0 > 0.0
    }

    /// Exact inverse CDF on `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut cum = 0.0;
        let mut last = (0.0, 1.0, 1.0);
        for (a, b, v) in self.pieces() {
            if v == 0.0 {
                continue;
            }
            let mass = (b - a) * v;
            last = (a, b, v);
            if u < cum + mass {
                return (a + (u - cum) / v).clamp(a, b);
            }
            cum += mass;
        }
        // rounding in the cumulative sum: fall back to the last charged piece
        let (a, b, v) = last;
        (a + (u - cum + (b - a) * v) / v).clamp(a, b)
    }
}

/// `(ρ_-, ρ_sup)` of a density.
pub fn density_bounds(density: &SingleSiteDensity) -> (f64, f64) {
    density.bounds()
}

/// Stateless sampler of coupling families.
#[derive(Clone, Debug)]
pub struct DisorderSampler {
    seed: u64,
    density: SingleSiteDensity,
    keyed: ChaCha8Rng,
}

fn zigzag(v: i64) -> u64 {
    let v32 = i32::try_from(v).expect("lattice coordinate exceeds 32 bits");
    ((v32 << 1) ^ (v32 >> 31)) as u32 as u64
}

fn lattice_code(k: LatticePoint) -> u64 {
    zigzag(k.0[0]) | (zigzag(k.0[1]) << 32)
}

impl DisorderSampler {
    pub fn new(seed: u64, density: SingleSiteDensity) -> Result<Self> {
        density.validate()?;
        Ok(Self {
            seed,
            density,
            keyed: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn density(&self) -> &SingleSiteDensity {
        &self.density
    }

    /// Raw uniform variate in `[0, 1)` for `(sample, k)`.
    pub fn uniform(&self, sample: u64, k: LatticePoint) -> f64 {
        let mut rng = self.keyed.clone();
        rng.set_stream(sample);
        rng.set_word_pos(u128::from(lattice_code(k)) * 2);
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `ω_k` for disorder sample `sample`.
    pub fn coupling(&self, sample: u64, k: LatticePoint) -> f64 {
        self.density.quantile(self.uniform(sample, k))
    }

    /// `ω_k` for every requested lattice point.
    pub fn sample_couplings<'a, I>(&self, sites: I, sample: u64) -> Couplings
    where
        I: IntoIterator<Item = &'a LatticePoint>,
    {
        sites.into_iter().map(|&k| (k, self.coupling(sample, k))).collect()
    }

    /// Couplings aligned with `lattice`.
    pub fn sample_vector(&self, lattice: &[LatticePoint], sample: u64) -> Vec<f64> {
        lattice.iter().map(|&k| self.coupling(sample, k)).collect()
    }
}
