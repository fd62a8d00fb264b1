//! Random bipartite attribute graphs.
//!
//! Attribute `w_i` (weight `x_i`) is joined to vertex `v_j` (weight `y_j`)
//! independently with probability `min{1, x_i y_j / sqrt(n m)}`. Indices are
//! 0-based throughout.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use rand::Rng;
use std::io::{BufRead, Write};

/// Largest `m * n` the quadratic reference generator accepts.
pub const NAIVE_MAX_PAIRS: u128 = 10_000_000;

/// Un-clamped intensity `x y / sqrt(n m)`.
#[inline]
pub fn edge_intensity<F: Scalar>(x: F, y: F, n: usize, m: usize) -> F {
    x * y / (F::from_count(n) * F::from_count(m)).sqrt()
}

/// Inclusion probability `min{1, x y / sqrt(n m)}`.
#[inline]
pub fn edge_probability<F: Scalar>(x: F, y: F, n: usize, m: usize) -> F {
    edge_intensity(x, y, n, m).min(F::one())
}

/// A realized attribute graph together with the weights that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteInstance<F> {
    pub n: usize,
    pub m: usize,
    pub x_weights: Vec<F>,
    pub y_weights: Vec<F>,
    /// For each attribute, the sorted distinct vertices it contains.
    pub adjacency: Vec<Vec<u32>>,
    /// Number of candidate pairs the generator examined.
    pub proposals: u64,
}

impl<F: Scalar> BipartiteInstance<F> {
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Attribute lists per vertex (vertex-major view), each sorted ascending.
    pub fn memberships(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.n];
        for (i, members) in self.adjacency.iter().enumerate() {
            for &j in members {
                out[j as usize].push(i as u32);
            }
        }
        out
    }

    /// Whether attribute `i` contains vertex `j`.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&(j as u32)).is_ok()
    }

    /// Check the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.x_weights.len() != self.m || self.adjacency.len() != self.m {
            return Err(invalid("x_weights", "length must equal m"));
        }
        if self.y_weights.len() != self.n {
            return Err(invalid("y_weights", "length must equal n"));
        }
        for (i, members) in self.adjacency.iter().enumerate() {
            if members.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("adjacency", format!("attribute {i} list not strictly increasing")));
            }
            for &j in members {
                let j = j as usize;
                if j >= self.n {
                    return Err(Error::IndexOutOfRange { index: j, len: self.n });
                }
                if edge_probability(self.x_weights[i], self.y_weights[j], self.n, self.m) <= F::zero() {
                    return Err(invalid("adjacency", format!("edge ({i}, {j}) has zero probability")));
                }
            }
        }
        Ok(())
    }

    /// Text dump: `n m edge_count`, one line per attribute (`i j1 j2 ...`),
    /// then the `x` weights on one line and the `y` weights on one line.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.n, self.m, self.edge_count())?;
        for (i, members) in self.adjacency.iter().enumerate() {
            write!(w, "{i}")?;
            for j in members {
                write!(w, " {j}")?;
            }
            writeln!(w)?;
        }
        let join = |ws: &[F]| ws.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ");
        writeln!(w, "{}", join(&self.x_weights))?;
        writeln!(w, "{}", join(&self.y_weights))?;
        Ok(())
    }

    /// Inverse of [`write_dump`](Self::write_dump). `proposals` is not stored and reads back as 0.
    pub fn read_dump<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((k, Ok(l))) => Ok((k + 1, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(Error::Dump { line: 0, reason: format!("missing {what}") }),
            }
        };
        let dump_err = |line: usize, reason: &str| Error::Dump { line, reason: reason.to_string() };
        let parse_usize = |line: usize, s: &str| s.parse::<usize>().map_err(|_| dump_err(line, "expected an integer"));

        let (ln, header) = next("header")?;
        let head: Vec<usize> = header.split_whitespace().map(|s| parse_usize(ln, s)).collect::<Result<_>>()?;
        let [n, m, edges] = head[..] else {
            return Err(dump_err(ln, "header must be `n m edge_count`"));
        };
        let mut adjacency = Vec::with_capacity(m);
        for i in 0..m {
            let (ln, l) = next("attribute line")?;
            let mut it = l.split_whitespace();
            let idx = parse_usize(ln, it.next().unwrap_or(""))?;
            if idx != i {
                return Err(dump_err(ln, "attribute index out of order"));
            }
            let members: Vec<u32> = it.map(|s| parse_usize(ln, s).map(|v| v as u32)).collect::<Result<_>>()?;
            adjacency.push(members);
        }
        let mut parse_weights = |len: usize| -> Result<Vec<F>> {
            let (ln, l) = next("weight block")?;
            let ws: Vec<F> = l
                .split_whitespace()
                .map(|s| s.parse::<f64>().map(F::lit).map_err(|_| dump_err(ln, "expected a number")))
                .collect::<Result<_>>()?;
            if ws.len() != len {
                return Err(dump_err(ln, "weight block has the wrong length"));
            }
            Ok(ws)
        };
        let x_weights = parse_weights(m)?;
        let y_weights = parse_weights(n)?;
        let inst = BipartiteInstance { n, m, x_weights, y_weights, adjacency, proposals: 0 };
        if inst.edge_count() != edges {
            return Err(dump_err(1, "edge_count does not match attribute lists"));
        }
        inst.validate()?;
        Ok(inst)
    }
}

fn check_weights<F: Scalar>(x: &[F], y: &[F]) -> Result<()> {
    if x.is_empty() {
        return Err(invalid("x_weights", "need at least one attribute"));
    }
    if y.is_empty() {
        return Err(invalid("y_weights", "need at least one vertex"));
    }
    if y.len() > u32::MAX as usize {
        return Err(invalid("y_weights", "too many vertices"));
    }
    if x.iter().chain(y).any(|w| !(w.is_finite() && *w >= F::zero())) {
        return Err(invalid("weights", "must be finite and nonnegative"));
    }
    Ok(())
}

/// Reference generator: one Bernoulli trial per pair. Guarded to
/// `m * n <= NAIVE_MAX_PAIRS`.
pub fn generate_naive<F: Scalar, R: Rng + ?Sized>(
    x_weights: Vec<F>,
    y_weights: Vec<F>,
    rng: &mut R,
) -> Result<BipartiteInstance<F>> {
    check_weights(&x_weights, &y_weights)?;
    let (m, n) = (x_weights.len(), y_weights.len());
    let pairs = m as u128 * n as u128;
    if pairs > NAIVE_MAX_PAIRS {
        return Err(Error::SizeGuard {
            what: "naive generator pair count",
            size: pairs,
            cap: NAIVE_MAX_PAIRS,
            advice: "use generate_fast",
        });
    }
    let mut adjacency = Vec::with_capacity(m);
    for &x in &x_weights {
        let mut members = Vec::new();
        for (j, &y) in y_weights.iter().enumerate() {
            let p = edge_probability(x, y, n, m);
            if F::lit(rng.random::<f64>()) < p {
                members.push(j as u32);
            }
        }
        adjacency.push(members);
    }
    Ok(BipartiteInstance { n, m, x_weights, y_weights, adjacency, proposals: pairs as u64 })
}

/// Fast generator with expected cost `O(#edges + m + n log n)`.
///
/// Vertices are visited in order of decreasing weight. For attribute `i` the
/// envelope at the next unvisited position is the inclusion probability of
/// that position, which dominates every later one; positions are skipped
/// geometrically under the envelope and a proposal at position `k` is kept
/// with probability `p_ik / q`.
pub fn generate_fast<F: Scalar, R: Rng + ?Sized>(
    x_weights: Vec<F>,
    y_weights: Vec<F>,
    rng: &mut R,
) -> Result<BipartiteInstance<F>> {
    check_weights(&x_weights, &y_weights)?;
    let (m, n) = (x_weights.len(), y_weights.len());

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| y_weights[b as usize].partial_cmp(&y_weights[a as usize]).unwrap().then(a.cmp(&b)));
    let sorted_y: Vec<f64> = order.iter().map(|&j| y_weights[j as usize].as_f64()).collect();
    let norm = (n as f64 * m as f64).sqrt();

    let mut proposals = 0u64;
    let mut adjacency = Vec::with_capacity(m);
    for &x in &x_weights {
        let x = x.as_f64() / norm;
        let mut members = Vec::new();
        let mut k = 0usize;
        while k < n {
            let q = (x * sorted_y[k]).min(1.0);
            if q <= 0.0 {
                break;
            }
            if q < 1.0 {
                // number of failures before the first success of Bernoulli(q)
                let u = 1.0 - rng.random::<f64>();
                let skip = (u.ln() / (-q).ln_1p()).floor();
                if skip >= (n - k) as f64 {
                    break;
                }
                k += skip as usize;
            }
            proposals += 1;
            let p = (x * sorted_y[k]).min(1.0);
            if p >= q || rng.random::<f64>() * q < p {
                members.push(order[k]);
            }
            k += 1;
        }
        members.sort_unstable();
        adjacency.push(members);
    }
    Ok(BipartiteInstance { n, m, x_weights, y_weights, adjacency, proposals })
}

/// `Σ_ij p_ij`, the conditional mean edge count given the weights.
pub fn expected_edge_count<F: Scalar>(x_weights: &[F], y_weights: &[F]) -> F {
    let (m, n) = (x_weights.len(), y_weights.len());
    crate::scalar::compensated_sum(
        x_weights.iter().flat_map(|&x| y_weights.iter().map(move |&y| edge_probability(x, y, n, m))),
    )
}
