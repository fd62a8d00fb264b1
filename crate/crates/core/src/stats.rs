//! Empirical pmfs, total variation distance and Hill tail-index estimation.

use crate::error::{Error, Result};
use crate::pmf::PmfVector;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Relative frequencies of `samples`; values above `r_max` are pooled into the tail.
pub fn empirical_pmf<F: Scalar>(samples: &[u64], r_max: usize) -> Result<PmfVector<F>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("empirical_pmf needs at least one sample"));
    }
    let mut counts = vec![0u64; r_max + 1];
    let mut beyond = 0u64;
    for &s in samples {
        match usize::try_from(s).ok().and_then(|i| counts.get_mut(i)) {
            Some(c) => *c += 1,
            None => beyond += 1,
        }
    }
    let total = F::from_count(samples.len());
    let to_f = |c: u64| F::from_u64(c).unwrap() / total;
    Ok(PmfVector { masses: counts.into_iter().map(to_f).collect(), tail_mass: to_f(beyond), stderr: None })
}

/// Per-bucket `|p_r - q_r| / 2` on a common truncation; the last entry is the tail bucket.
pub fn tv_contributions<F: Scalar>(p: &PmfVector<F>, q: &PmfVector<F>) -> Vec<F> {
    let r_max = p.r_max().min(q.r_max());
    let (p, q) = (p.rebucket(r_max), q.rebucket(r_max));
    let half = F::lit(0.5);
    p.masses
        .iter()
        .zip(&q.masses)
        .map(|(a, b)| (*a - *b).abs() * half)
        .chain(std::iter::once((p.tail_mass - q.tail_mass).abs() * half))
        .collect()
}

/// `½ (Σ_r |p_r - q_r| + |tail_p - tail_q|)` after pooling the larger
/// truncation's excess into its tail.
pub fn total_variation<F: Scalar>(p: &PmfVector<F>, q: &PmfVector<F>) -> F {
    crate::scalar::compensated_sum(tv_contributions(p, q)).min(F::one())
}

/// Hill estimate `k / Σ_{i ≤ k} ln(x_(i) / x_(k+1))` from the `k + 1` largest
/// positive samples. Zero samples are ignored; ties are kept.
pub fn hill_tail_index<F: Scalar>(samples: &[u64], k: usize) -> Result<F> {
    if k < 10 {
        return Err(Error::InsufficientData(format!("Hill estimator needs k >= 10, got {k}")));
    }
    let mut positive: Vec<u64> = samples.iter().copied().filter(|&s| s > 0).collect();
    if k >= positive.len() {
        return Err(Error::InsufficientData(format!(
            "Hill estimator with k = {k} needs more than k positive samples, got {}",
            positive.len()
        )));
    }
    positive.sort_unstable_by(|a, b| b.cmp(a));
    let threshold = (positive[k] as f64).ln();
    let denom: f64 = positive[..k].iter().map(|&x| (x as f64).ln() - threshold).sum();
    if denom <= 0.0 {
        return Err(Error::InsufficientData("top order statistics are all tied".into()));
    }
    Ok(F::lit(k as f64 / denom))
}

/// Default Hill cut: 1% of the positive samples, at least 10.
pub fn default_hill_k(samples: &[u64]) -> usize {
    (samples.iter().filter(|&&s| s > 0).count() / 100).max(10)
}

/// Pooled two-proportion z statistic for `H1: p1 > p2`, with `x` successes
/// out of `n` trials in each group.
pub fn two_proportion_z(x1: u64, n1: u64, x2: u64, n2: u64) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let (p1, p2) = (x1 as f64 / n1f, x2 as f64 / n2f);
    let pooled = (x1 + x2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return if p1 > p2 { f64::INFINITY } else { 0.0 };
    }
    (p1 - p2) / se
}

/// One-sided standard normal critical value at level 0.01.
pub const Z_CRIT_ONE_SIDED_001: f64 = 2.326_347_874_040_841;

/// Distance between an empirical and a reference pmf, with provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub tv: f64,
    pub n_samples: u64,
    pub r_max: usize,
    pub seed: u64,
    pub regime: String,
    pub runtime_ms: u64,
    /// Per-bucket contributions (tail bucket last); `tv` is their sum.
    #[serde(default)]
    pub contributions: Vec<f64>,
}

impl ComparisonReport {
    pub fn new<F: Scalar>(
        empirical: &PmfVector<F>,
        reference: &PmfVector<F>,
        n_samples: u64,
        seed: u64,
        regime: &str,
    ) -> Self {
        let contributions: Vec<f64> = tv_contributions(empirical, reference).iter().map(|c| c.as_f64()).collect();
        ComparisonReport {
            tv: total_variation(empirical, reference).as_f64(),
            n_samples,
            r_max: empirical.r_max().min(reference.r_max()),
            seed,
            regime: regime.to_string(),
            runtime_ms: 0,
            contributions,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
