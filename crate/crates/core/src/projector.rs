//! Degrees of the intersection graph induced by a bipartite instance.
//!
//! Two vertices are adjacent when they share an attribute. The projected
//! edge list is never materialized; only degrees are computed.

use crate::bipartite::{generate_fast, BipartiteInstance};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::weights::WeightModel;
use rand::Rng;
use std::io::Write;

/// Default cap on `Σ_i u_i²`, the work bound of [`degrees`].
pub const DEFAULT_PAIR_WORK_CAP: u128 = 1_000_000_000;

/// Degree vector of one replicate plus the empirical weight moments.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSample<F> {
    pub degrees: Vec<u32>,
    pub replicate_id: u64,
    pub a1_hat: F,
    pub a2_hat: F,
    pub b1_hat: F,
    pub b2_hat: F,
}

fn mean_power<F: Scalar>(ws: &[F], k: i32) -> F {
    if ws.is_empty() {
        return F::zero();
    }
    ws.iter().map(|w| w.powi(k)).sum::<F>() / F::from_count(ws.len())
}

/// `Σ_i u_i²` where `u_i` is the size of attribute `i`.
pub fn pair_work(b: &BipartiteInstance<impl Scalar>) -> u128 {
    b.adjacency.iter().map(|a| (a.len() as u128).pow(2)).sum()
}

/// Degrees of the vertices in `vertices` (in that order).
///
/// Cost is the sum over the queried vertices of the sizes of the attributes
/// they belong to, so a handful of vertices is cheap on any instance.
pub fn degrees_of_subset<F: Scalar>(b: &BipartiteInstance<F>, vertices: &[usize]) -> Result<Vec<u32>> {
    if let Some(&bad) = vertices.iter().find(|&&j| j >= b.n) {
        return Err(Error::IndexOutOfRange { index: bad, len: b.n });
    }
    let memberships = b.memberships();
    let mut stamp = vec![u32::MAX; b.n];
    Ok(vertices
        .iter()
        .enumerate()
        .map(|(k, &j)| count_neighbours(b, &memberships[j], j, k as u32, &mut stamp))
        .collect())
}

fn count_neighbours<F>(b: &BipartiteInstance<F>, attrs: &[u32], j: usize, tag: u32, stamp: &mut [u32]) -> u32 {
    let mut count = 0;
    stamp[j] = tag;
    for &i in attrs {
        for &other in &b.adjacency[i as usize] {
            let slot = &mut stamp[other as usize];
            if *slot != tag {
                *slot = tag;
                count += 1;
            }
        }
    }
    count
}

/// Degrees of all vertices, refusing instances whose `Σ u_i²` exceeds `cap`.
pub fn degrees_with_cap<F: Scalar>(b: &BipartiteInstance<F>, replicate_id: u64, cap: u128) -> Result<DegreeSample<F>> {
    let work = pair_work(b);
    if work > cap {
        return Err(Error::SizeGuard {
            what: "attribute membership work Σu_i²",
            size: work,
            cap,
            advice: "use degrees_of_subset for selected vertices",
        });
    }
    let memberships = b.memberships();
    let mut stamp = vec![u32::MAX; b.n];
    let degrees = (0..b.n).map(|j| count_neighbours(b, &memberships[j], j, j as u32, &mut stamp)).collect();
    Ok(DegreeSample {
        degrees,
        replicate_id,
        a1_hat: mean_power(&b.x_weights, 1),
        a2_hat: mean_power(&b.x_weights, 2),
        b1_hat: mean_power(&b.y_weights, 1),
        b2_hat: mean_power(&b.y_weights, 2),
    })
}

/// Degrees of all vertices with the default work cap.
pub fn degrees<F: Scalar>(b: &BipartiteInstance<F>) -> Result<DegreeSample<F>> {
    degrees_with_cap(b, 0, DEFAULT_PAIR_WORK_CAP)
}

/// `L = Σ_{i ∋ j} (|w_i| - 1)`: co-members of `j` counted with multiplicity.
pub fn l_statistic<F: Scalar>(b: &BipartiteInstance<F>, j: usize) -> Result<u64> {
    if j >= b.n {
        return Err(Error::IndexOutOfRange { index: j, len: b.n });
    }
    let target = j as u32;
    Ok(b.adjacency.iter().filter(|a| a.binary_search(&target).is_ok()).map(|a| a.len() as u64 - 1).sum())
}

/// Size and weight laws for generating one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationParams<F> {
    pub n: usize,
    pub m: usize,
    pub p1: WeightModel<F>,
    pub p2: WeightModel<F>,
}

impl<F: Scalar> GenerationParams<F> {
    /// Fresh weights and a fast-generated instance.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BipartiteInstance<F>> {
        let x = self.p1.sample(self.m, rng);
        let y = self.p2.sample(self.n, rng);
        generate_fast(x, y, rng)
    }
}

/// Whether `d(v_0) != L(v_0)` on one instance.
pub fn coincidence_fails<F: Scalar>(b: &BipartiteInstance<F>) -> Result<bool> {
    let d = degrees_of_subset(b, &[0])?[0] as u64;
    Ok(d != l_statistic(b, 0)?)
}

/// Fraction of `replicates` fresh instances on which `d(v_0) != L(v_0)`.
pub fn coincidence_rate<F: Scalar, R: Rng + ?Sized>(
    params: &GenerationParams<F>,
    replicates: usize,
    rng: &mut R,
) -> Result<f64> {
    if replicates == 0 {
        return Err(crate::error::invalid("replicates", "must be positive"));
    }
    params.p1.validate()?;
    params.p2.validate()?;
    let mut misses = 0usize;
    for _ in 0..replicates {
        let b = params.generate(rng)?;
        if coincidence_fails(&b)? {
            misses += 1;
        }
    }
    Ok(misses as f64 / replicates as f64)
}

/// CSV rows `replicate_id,vertex_id,degree`.
pub fn write_degrees_csv<W: Write, F>(samples: &[DegreeSample<F>], mut w: W) -> Result<()> {
    writeln!(w, "replicate_id,vertex_id,degree")?;
    for s in samples {
        for (j, d) in s.degrees.iter().enumerate() {
            writeln!(w, "{},{},{}", s.replicate_id, j, d)?;
        }
    }
    Ok(())
}

/// CSV rows `degree,count` pooled over all samples.
pub fn write_degree_histogram_csv<W: Write, F>(samples: &[DegreeSample<F>], mut w: W) -> Result<()> {
    let max = samples.iter().flat_map(|s| s.degrees.iter()).copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; max + 1];
    for d in samples.iter().flat_map(|s| s.degrees.iter()) {
        counts[*d as usize] += 1;
    }
    writeln!(w, "degree,count")?;
    for (d, c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
        writeln!(w, "{d},{c}")?;
    }
    Ok(())
}
