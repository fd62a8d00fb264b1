//! Truncated probability mass functions on `{0, …, r_max}` with an explicit
//! tail bucket for everything above `r_max`.

use crate::error::{invalid, Result};
use crate::scalar::{ln_factorials, Scalar};
use rand::Rng;
use std::io::Write;

#[derive(Clone, Debug, PartialEq)]
pub struct PmfVector<F> {
    /// `masses[r] = P(X = r)` for `r = 0..=r_max`.
    pub masses: Vec<F>,
    /// `P(X > r_max)`.
    pub tail_mass: F,
    /// Per-entry Monte Carlo standard errors; `None` for exact pmfs.
    pub stderr: Option<Vec<F>>,
}

impl<F: Scalar> PmfVector<F> {
    /// Builds a pmf from masses, assigning the residual `1 - Σ` to the tail.
    /// Tiny negative residuals from rounding are clamped to zero.
    pub fn from_masses(masses: Vec<F>) -> Self {
        let total = crate::scalar::compensated_sum(masses.iter().copied());
        let tail_mass = (F::one() - total).max(F::zero());
        PmfVector { masses, tail_mass, stderr: None }
    }

    pub fn point_mass(at: usize, r_max: usize) -> Self {
        let mut masses = vec![F::zero(); r_max + 1];
        if at <= r_max {
            masses[at] = F::one();
            PmfVector { masses, tail_mass: F::zero(), stderr: None }
        } else {
            PmfVector { masses, tail_mass: F::one(), stderr: None }
        }
    }

    /// Poisson(`mean`) truncated at `r_max`.
    pub fn poisson(mean: F, r_max: usize) -> Self {
        Self::from_masses(poisson_masses(mean, r_max, &ln_factorials(r_max)))
    }

    /// Geometric law `P(r) = (1 - s) s^r` with `s = θ / (1 + θ)`: the
    /// Poisson mixture over an exponential mean `θ`.
    pub fn geometric_from_mean(theta: F, r_max: usize) -> Self {
        let s = theta / (F::one() + theta);
        let masses = (0..=r_max).map(|r| (F::one() - s) * s.powi(r as i32)).collect();
        PmfVector { masses, tail_mass: s.powi(r_max as i32 + 1), stderr: None }
    }

    pub fn r_max(&self) -> usize {
        self.masses.len() - 1
    }

    /// `Σ masses + tail`.
    pub fn total(&self) -> F {
        crate::scalar::compensated_sum(self.masses.iter().copied().chain(std::iter::once(self.tail_mass)))
    }

    /// Checks nonnegativity and normalization.
    pub fn validate(&self) -> Result<()> {
        if self.masses.is_empty() {
            return Err(invalid("masses", "at least one entry (r = 0) required"));
        }
        if self.masses.iter().chain(std::iter::once(&self.tail_mass)).any(|&p| !(p >= F::zero())) {
            return Err(invalid("masses", "entries must be nonnegative"));
        }
        let total = self.total();
        if (total - F::one()).abs() > F::normalization_tolerance() {
            return Err(invalid("masses", format!("total mass {total} is not 1")));
        }
        if let Some(se) = &self.stderr {
            if se.len() != self.masses.len() {
                return Err(invalid("stderr", "length must match masses"));
            }
        }
        Ok(())
    }

    /// Truncated mean `Σ_{r ≤ r_max} r P(r)` (the tail is not included).
    pub fn mean(&self) -> F {
        crate::scalar::compensated_sum(self.masses.iter().enumerate().map(|(r, &p)| F::from_count(r) * p))
    }

    /// Same law viewed at a different truncation point. Growing pads with
    /// zeros (the tail stays pooled); shrinking pools the excess into the tail.
    pub fn rebucket(&self, r_max: usize) -> Self {
        let mut out = self.clone();
        if r_max < self.r_max() {
            let excess = crate::scalar::compensated_sum(self.masses[r_max + 1..].iter().copied());
            out.masses.truncate(r_max + 1);
            out.tail_mass += excess;
            if let Some(se) = &mut out.stderr {
                se.truncate(r_max + 1);
            }
        } else {
            out.masses.resize(r_max + 1, F::zero());
            if let Some(se) = &mut out.stderr {
                se.resize(r_max + 1, F::zero());
            }
        }
        out
    }

    /// Standard error of entry `r` (zero for exact pmfs).
    pub fn stderr_at(&self, r: usize) -> F {
        self.stderr.as_ref().map_or(F::zero(), |s| s[r])
    }

    /// CSV with columns `r,mass,stderr` and a trailing `tail,<tail_mass>` row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,mass,stderr")?;
        for (r, p) in self.masses.iter().enumerate() {
            writeln!(w, "{r},{:e},{:e}", p.as_f64(), self.stderr_at(r).as_f64())?;
        }
        writeln!(w, "tail,{:e}", self.tail_mass.as_f64())?;
        Ok(())
    }
}

/// Poisson masses for `r = 0..=r_max` evaluated in log space.
/// `ln_fact` must hold at least `r_max + 1` entries of `ln(r!)`.
pub fn poisson_masses<F: Scalar>(mean: F, r_max: usize, ln_fact: &[F]) -> Vec<F> {
    let mut out = vec![F::zero(); r_max + 1];
    poisson_masses_into(mean, ln_fact, &mut out);
    out
}

pub(crate) fn poisson_masses_into<F: Scalar>(mean: F, ln_fact: &[F], out: &mut [F]) {
    if mean <= F::zero() {
        out.iter_mut().for_each(|p| *p = F::zero());
        out[0] = F::one();
        return;
    }
    let ln_mean = mean.ln();
    for (r, p) in out.iter_mut().enumerate() {
        *p = (F::from_count(r) * ln_mean - mean - ln_fact[r]).exp();
    }
}

/// Inversion sampler over a pmf. Draws landing in the tail return `r_max + 1`.
#[derive(Clone, Debug)]
pub struct PmfSampler {
    cdf: Vec<f64>,
}

impl PmfSampler {
    pub fn new<F: Scalar>(pmf: &PmfVector<F>) -> Self {
        let mut acc = 0.0;
        let cdf = pmf
            .masses
            .iter()
            .map(|p| {
                acc += p.as_f64();
                acc
            })
            .collect();
        PmfSampler { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u) as u64
    }
}
