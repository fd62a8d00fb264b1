//! Vertex and attribute weight distributions.
//!
//! A [`WeightModel`] describes the law of the attribute weights `X_i` or the
//! vertex weights `Y_j`. Moments are analytic; divergent moments are reported
//! as [`MomentValue::Infinite`] rather than as errors.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use rand::Rng;
use std::fmt;
use std::str::FromStr;

/// Nonnegative weight law.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightModel<F> {
    /// Point mass at `value` (zero allowed).
    Degenerate { value: F },
    /// Exponential with the given rate, mean `1 / rate`.
    Exponential { rate: F },
    /// Density `alpha * xmin^alpha * x^(-alpha - 1)` on `[xmin, ∞)`.
    Pareto { alpha: F, xmin: F },
    /// Finitely many `(value, probability)` atoms.
    FiniteDiscrete { atoms: Vec<(F, F)> },
}

/// Analytic moment, possibly divergent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentValue<F> {
    Finite(F),
    Infinite,
}

impl<F: Scalar> MomentValue<F> {
    pub fn is_finite(&self) -> bool {
        matches!(self, MomentValue::Finite(_))
    }

    /// The value if finite.
    pub fn finite(self) -> Option<F> {
        match self {
            MomentValue::Finite(v) => Some(v),
            MomentValue::Infinite => None,
        }
    }

    /// The value, with `+∞` standing in for a divergent moment.
    pub fn value(self) -> F {
        self.finite().unwrap_or_else(F::infinity)
    }
}

fn positive<F: Scalar>(field: &'static str, v: F) -> Result<()> {
    if v.is_finite() && v > F::zero() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be a finite positive number, got {v}")))
    }
}

impl<F: Scalar> WeightModel<F> {
    pub fn degenerate(value: F) -> Self {
        WeightModel::Degenerate { value }
    }

    pub fn exponential(rate: F) -> Self {
        WeightModel::Exponential { rate }
    }

    pub fn pareto(alpha: F, xmin: F) -> Self {
        WeightModel::Pareto { alpha, xmin }
    }

    pub fn discrete(atoms: Vec<(F, F)>) -> Self {
        WeightModel::FiniteDiscrete { atoms }
    }

    /// Check every parameter-domain invariant.
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightModel::Degenerate { value } => {
                if value.is_finite() && *value >= F::zero() {
                    Ok(())
                } else {
                    Err(invalid("value", format!("must be finite and nonnegative, got {value}")))
                }
            }
            WeightModel::Exponential { rate } => positive("rate", *rate),
            WeightModel::Pareto { alpha, xmin } => {
                positive("alpha", *alpha)?;
                positive("xmin", *xmin)
            }
            WeightModel::FiniteDiscrete { atoms } => {
                if atoms.is_empty() {
                    return Err(invalid("atoms", "at least one atom required"));
                }
                for &(v, p) in atoms {
                    if !(v.is_finite() && v >= F::zero()) {
                        return Err(invalid("atoms.value", format!("must be finite and nonnegative, got {v}")));
                    }
                    if !(p >= F::zero() && p <= F::one()) {
                        return Err(invalid("atoms.prob", format!("must lie in [0, 1], got {p}")));
                    }
                }
                let total: F = atoms.iter().map(|&(_, p)| p).sum();
                let tol = F::lit(1e-12).max(F::epsilon() * F::from_count(4 * atoms.len()));
                if (total - F::one()).abs() > tol {
                    return Err(invalid("atoms.prob", format!("probabilities sum to {total}, expected 1")));
                }
                Ok(())
            }
        }
    }

    /// Exact `E W^k` for `k ∈ 1..=4`.
    pub fn moment(&self, k: u32) -> Result<MomentValue<F>> {
        if !(1..=4).contains(&k) {
            return Err(Error::UnsupportedMoment(k));
        }
        let kf = F::from_u32(k).unwrap();
        let m = match self {
            WeightModel::Degenerate { value } => MomentValue::Finite(value.powi(k as i32)),
            WeightModel::Exponential { rate } => {
                let fact: F = (1..=k).map(|i| F::from_u32(i).unwrap()).fold(F::one(), |a, b| a * b);
                MomentValue::Finite(fact / rate.powi(k as i32))
            }
            WeightModel::Pareto { alpha, xmin } => {
                if *alpha <= kf {
                    MomentValue::Infinite
                } else {
                    MomentValue::Finite(*alpha * xmin.powi(k as i32) / (*alpha - kf))
                }
            }
            WeightModel::FiniteDiscrete { atoms } => {
                MomentValue::Finite(atoms.iter().map(|&(v, p)| p * v.powi(k as i32)).sum())
            }
        };
        Ok(m)
    }

    /// One draw.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> F {
        match self {
            WeightModel::Degenerate { value } => *value,
            WeightModel::Exponential { rate } => {
                // 1 - U lies in (0, 1]
                let u: f64 = 1.0 - rng.random::<f64>();
                F::lit(-u.ln()) / *rate
            }
            WeightModel::Pareto { alpha, xmin } => {
                let u: f64 = 1.0 - rng.random::<f64>();
                *xmin * F::lit(u).powf(-F::one() / *alpha)
            }
            WeightModel::FiniteDiscrete { atoms } => {
                let u = F::lit(rng.random::<f64>());
                let mut acc = F::zero();
                for &(v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                // rounding slack: fall back to the last atom with positive mass
                atoms.iter().rev().find(|a| a.1 > F::zero()).map_or(atoms[atoms.len() - 1].0, |a| a.0)
            }
        }
    }

    /// `count` independent draws.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<F> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }

    /// Probability of the atom at zero.
    pub fn zero_mass(&self) -> F {
        match self {
            WeightModel::Degenerate { value } if value.is_zero() => F::one(),
            WeightModel::FiniteDiscrete { atoms } => atoms.iter().filter(|a| a.0.is_zero()).map(|a| a.1).sum(),
            _ => F::zero(),
        }
    }
}

impl<F: Scalar> fmt::Display for WeightModel<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightModel::Degenerate { value } => write!(f, "degenerate:{value}"),
            WeightModel::Exponential { rate } => write!(f, "exp:{rate}"),
            WeightModel::Pareto { alpha, xmin } => write!(f, "pareto:{alpha},{xmin}"),
            WeightModel::FiniteDiscrete { atoms } => {
                f.write_str("discrete:")?;
                for (i, (v, p)) in atoms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}:{p}")?;
                }
                Ok(())
            }
        }
    }
}

fn spec_error(position: usize, reason: impl Into<String>) -> Error {
    Error::WeightSpec { position, reason: reason.into() }
}

fn parse_number<F: Scalar>(s: &str, position: usize) -> Result<F> {
    let t = s.trim();
    let v: f64 = t.parse().map_err(|_| spec_error(position, format!("expected a number, found {s:?}")))?;
    Ok(F::lit(v))
}

/// Parse `"degenerate:c"`, `"exp:rate"`, `"pareto:alpha,xmin"` or
/// `"discrete:v1:p1,v2:p2,..."`. The result is validated.
///
/// Error positions are 0-based byte offsets into `text`.
pub fn parse_weight_model<F: Scalar>(text: &str) -> Result<WeightModel<F>> {
    let colon = text.find(':').ok_or_else(|| spec_error(text.len(), "missing ':' after model kind"))?;
    let kind = &text[..colon];
    let body = &text[colon + 1..];
    let body_start = colon + 1;

    // split on commas while tracking byte offsets
    let fields: Vec<(usize, &str)> = {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, c) in body.char_indices() {
            if c == ',' {
                out.push((body_start + start, &body[start..i]));
                start = i + 1;
            }
        }
        out.push((body_start + start, &body[start..]));
        out
    };
    let expect_fields = |n: usize| -> Result<()> {
        if fields.len() != n {
            let pos = fields.get(n).map_or(text.len(), |f| f.0);
            return Err(spec_error(pos, format!("`{kind}` takes {n} parameter(s), found {}", fields.len())));
        }
        Ok(())
    };

    let model = match kind {
        "degenerate" => {
            expect_fields(1)?;
            WeightModel::Degenerate { value: parse_number(fields[0].1, fields[0].0)? }
        }
        "exp" => {
            expect_fields(1)?;
            WeightModel::Exponential { rate: parse_number(fields[0].1, fields[0].0)? }
        }
        "pareto" => {
            expect_fields(2)?;
            WeightModel::Pareto {
                alpha: parse_number(fields[0].1, fields[0].0)?,
                xmin: parse_number(fields[1].1, fields[1].0)?,
            }
        }
        "discrete" => {
            let mut atoms = Vec::with_capacity(fields.len());
            for &(pos, field) in &fields {
                let sep = field.find(':').ok_or_else(|| spec_error(pos + field.len(), "expected `value:prob`"))?;
                let v = parse_number(&field[..sep], pos)?;
                let p = parse_number(&field[sep + 1..], pos + sep + 1)?;
                atoms.push((v, p));
            }
            WeightModel::FiniteDiscrete { atoms }
        }
        other => return Err(spec_error(0, format!("unknown model kind {other:?}"))),
    };
    model.validate().map_err(|e| spec_error(body_start, e.to_string()))?;
    Ok(model)
}

impl<F: Scalar> FromStr for WeightModel<F> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_weight_model(s)
    }
}
