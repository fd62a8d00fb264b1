//! Experiment configuration: flat `key = value` text with optional
//! per-regime sections, plus `key=value` overrides that win over the file.
//!
//! ```text
//! regime = balanced
//! n_grid = 1000, 30000
//! p1 = exp:1
//! p2 = exp:1
//! replicates = 10
//! master_seed = 7
//!
//! [balanced]
//! beta = 1
//!
//! [dense]
//! m_rule = pow:1.5
//! ```
//!
//! Only the section named by `regime` is read; the others may be present
//! so one file can drive every regime through an override.

use crate::error::{Error, Result};
use crate::limit_laws::{RegimeLimit, DEFAULT_N_MIX, DEFAULT_R_MAX, MAX_R_MAX};
use crate::weights::WeightModel;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Sparse,
    Balanced,
    Dense,
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sparse" => Ok(Regime::Sparse),
            "balanced" => Ok(Regime::Balanced),
            "dense" => Ok(Regime::Dense),
            other => Err(format!("unknown regime {other:?} (expected sparse, balanced or dense)")),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Sparse => "sparse",
            Regime::Balanced => "balanced",
            Regime::Dense => "dense",
        })
    }
}

/// How the attribute count `m` follows the vertex count `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MRule {
    /// `m = round(n^exponent)`
    Pow(f64),
    /// `m = round(c n)`
    Lin(f64),
}

impl MRule {
    pub fn attributes(&self, n: usize) -> usize {
        let m = match *self {
            MRule::Pow(e) => (n as f64).powf(e).round(),
            MRule::Lin(c) => (c * n as f64).round(),
        };
        m as usize
    }
}

impl FromStr for MRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, value) = s.split_once(':').ok_or_else(|| format!("expected `pow:<e>` or `lin:<c>`, got {s:?}"))?;
        let v: f64 = value.trim().parse().map_err(|_| format!("not a number: {value:?}"))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(format!("parameter must be finite and positive, got {v}"));
        }
        match kind.trim() {
            "pow" => Ok(MRule::Pow(v)),
            "lin" => Ok(MRule::Lin(v)),
            other => Err(format!("unknown m_rule form {other:?}")),
        }
    }
}

impl fmt::Display for MRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MRule::Pow(e) => write!(f, "pow:{e}"),
            MRule::Lin(c) => write!(f, "lin:{c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeEstimator {
    /// Pool the degrees of all `n` vertices of each replicate.
    AllVertices,
    /// Use only `d(v_1)` from each replicate.
    V1Only,
}

impl FromStr for DegreeEstimator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "all_vertices" => Ok(DegreeEstimator::AllVertices),
            "v1_only" => Ok(DegreeEstimator::V1Only),
            other => Err(format!("unknown degree_estimator {other:?} (expected all_vertices or v1_only)")),
        }
    }
}

impl fmt::Display for DegreeEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DegreeEstimator::AllVertices => "all_vertices",
            DegreeEstimator::V1Only => "v1_only",
        })
    }
}

/// One convergence experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub regime: Regime,
    pub beta: Option<f64>,
    pub m_rule: Option<MRule>,
    pub n_grid: Vec<usize>,
    pub p1: WeightModel<f64>,
    pub p2: WeightModel<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub r_max: usize,
    pub n_mix: usize,
    pub degree_estimator: DegreeEstimator,
    pub output_dir: Option<PathBuf>,
    /// Write wall-clock runtimes; outputs are then no longer byte-reproducible.
    pub record_runtime: bool,
    pub allow_infinite_a2: bool,
}

const KEYS: &[&str] = &[
    "regime",
    "beta",
    "m_rule",
    "n_grid",
    "p1",
    "p2",
    "replicates",
    "master_seed",
    "r_max",
    "n_mix",
    "degree_estimator",
    "output_dir",
    "record_runtime",
    "allow_infinite_a2",
];
const SECTIONS: &[&str] = &["sparse", "balanced", "dense"];

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: String,
}

fn config_err(line: usize, field: &str, reason: impl Into<String>) -> Error {
    Error::Config { line, field: field.to_string(), reason: reason.into() }
}

#[derive(Default)]
struct RawConfig {
    top: BTreeMap<String, Entry>,
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (idx, full) in text.lines().enumerate() {
            let line = idx + 1;
            let body = full.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name =
                    name.strip_suffix(']').ok_or_else(|| config_err(line, "section", "missing closing `]`"))?.trim();
                if !SECTIONS.contains(&name) {
                    return Err(config_err(line, "section", format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| config_err(line, body, "expected `key = value`"))?;
            raw.insert(section.as_deref(), key.trim(), value.trim(), line)?;
        }
        Ok(raw)
    }

    fn insert(&mut self, section: Option<&str>, key: &str, value: &str, line: usize) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(config_err(line, key, "unknown key"));
        }
        let map = match section {
            Some(s) => self.sections.entry(s.to_string()).or_default(),
            None => &mut self.top,
        };
        let entry = Entry { line, value: value.trim_matches('"').to_string() };
        if map.insert(key.to_string(), entry).is_some() {
            return Err(config_err(line, key, "duplicate key"));
        }
        Ok(())
    }

    /// `key=value` or `section.key=value`; replaces any file value.
    fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (lhs, value) = spec.split_once('=').ok_or_else(|| config_err(0, spec, "override must be `key=value`"))?;
        let (section, key) = match lhs.trim().split_once('.') {
            Some((s, k)) if SECTIONS.contains(&s) => (Some(s), k),
            Some((s, _)) => return Err(config_err(0, lhs, format!("unknown section {s:?}"))),
            None => (None, lhs.trim()),
        };
        if !KEYS.contains(&key) {
            return Err(config_err(0, key, "unknown key"));
        }
        match section {
            Some(s) => {
                self.top.remove(key);
                self.sections.entry(s.to_string()).or_default().remove(key);
            }
            None => {
                self.top.remove(key);
                self.sections.values_mut().for_each(|m| {
                    m.remove(key);
                });
            }
        }
        self.insert(section, key, value.trim(), 0)
    }

    fn resolve(mut self) -> Result<BTreeMap<String, Entry>> {
        let regime =
            self.top.get("regime").ok_or_else(|| config_err(0, "regime", "missing required key"))?.value.clone();
        let mut merged = std::mem::take(&mut self.top);
        if let Some(section) = self.sections.remove(&regime) {
            for (k, e) in section {
                if k == "regime" {
                    return Err(config_err(e.line, "regime", "must be set outside sections"));
                }
                if let Some(prev) = merged.get(&k) {
                    return Err(config_err(e.line, &k, format!("also set at line {}", prev.line)));
                }
                merged.insert(k, e);
            }
        }
        Ok(merged)
    }
}

fn take<T: FromStr>(map: &mut BTreeMap<String, Entry>, key: &str) -> Result<Option<(usize, T)>>
where
    T::Err: fmt::Display,
{
    match map.remove(key) {
        None => Ok(None),
        Some(e) => {
            e.value.parse::<T>().map(|v| Some((e.line, v))).map_err(|err| config_err(e.line, key, err.to_string()))
        }
    }
}

fn require<T: FromStr>(map: &mut BTreeMap<String, Entry>, key: &str) -> Result<(usize, T)>
where
    T::Err: fmt::Display,
{
    take(map, key)?.ok_or_else(|| config_err(0, key, "missing required key"))
}

fn parse_grid(line: usize, text: &str) -> Result<Vec<usize>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.replace('_', "")
                .parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0 && *v >= 1.0 && *v <= u32::MAX as f64)
                .map(|v| v as usize)
                .ok_or_else(|| config_err(line, "n_grid", format!("not a positive integer: {s:?}")))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[] as &[&str])
    }

    pub fn parse_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Self> {
        let mut raw = RawConfig::parse(text)?;
        for o in overrides {
            raw.apply_override(o.as_ref())?;
        }
        let mut map = raw.resolve()?;

        let (regime_line, regime) = require::<Regime>(&mut map, "regime")?;
        let beta = take::<f64>(&mut map, "beta")?;
        let m_rule = take::<MRule>(&mut map, "m_rule")?;
        let grid_entry = map.remove("n_grid").ok_or_else(|| config_err(0, "n_grid", "missing required key"))?;
        let n_grid = parse_grid(grid_entry.line, &grid_entry.value)?;
        let (_, p1) = require::<WeightModel<f64>>(&mut map, "p1")?;
        let (_, p2) = require::<WeightModel<f64>>(&mut map, "p2")?;
        let (rep_line, replicates) = require::<usize>(&mut map, "replicates")?;
        let (_, master_seed) = require::<u64>(&mut map, "master_seed")?;
        let r_max = take::<usize>(&mut map, "r_max")?;
        let n_mix = take::<usize>(&mut map, "n_mix")?;
        let degree_estimator = take::<DegreeEstimator>(&mut map, "degree_estimator")?;
        let output_dir = take::<PathBuf>(&mut map, "output_dir")?;
        let record_runtime = take::<bool>(&mut map, "record_runtime")?;
        let allow_infinite_a2 = take::<bool>(&mut map, "allow_infinite_a2")?;
        debug_assert!(map.is_empty(), "unconsumed keys {map:?}");

        if replicates == 0 {
            return Err(config_err(rep_line, "replicates", "must be positive"));
        }
        if let Some((line, r)) = r_max {
            if r > MAX_R_MAX {
                return Err(config_err(line, "r_max", format!("must not exceed {MAX_R_MAX}")));
            }
        }
        if let Some((line, 0)) = n_mix {
            return Err(config_err(line, "n_mix", "must be positive"));
        }
        if n_grid.is_empty() {
            return Err(config_err(grid_entry.line, "n_grid", "must not be empty"));
        }
        if n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err(grid_entry.line, "n_grid", "must be strictly increasing"));
        }

        let config = ExperimentConfig {
            regime,
            beta: beta.map(|b| b.1),
            m_rule: m_rule.map(|r| r.1),
            n_grid,
            p1,
            p2,
            replicates,
            master_seed,
            r_max: r_max.map_or(DEFAULT_R_MAX, |r| r.1),
            n_mix: n_mix.map_or(DEFAULT_N_MIX, |r| r.1),
            degree_estimator: degree_estimator.map_or(DegreeEstimator::AllVertices, |d| d.1),
            output_dir: output_dir.map(|d| d.1),
            record_runtime: record_runtime.is_some_and(|r| r.1),
            allow_infinite_a2: allow_infinite_a2.is_some_and(|r| r.1),
        };
        config.check_regime(regime_line, beta.map(|b| b.0), m_rule.map(|r| r.0))?;
        Ok(config)
    }

    fn check_regime(&self, regime_line: usize, beta_line: Option<usize>, rule_line: Option<usize>) -> Result<()> {
        let rule_line = rule_line.unwrap_or(regime_line);
        match self.regime {
            Regime::Balanced => {
                let beta = self.beta.ok_or_else(|| config_err(regime_line, "beta", "balanced regime requires beta"))?;
                if !(beta.is_finite() && beta > 0.0) {
                    return Err(config_err(beta_line.unwrap_or(0), "beta", "must be finite and positive"));
                }
                if self.m_rule.is_some() {
                    return Err(config_err(rule_line, "m_rule", "balanced regime fixes m = round(beta n)"));
                }
            }
            Regime::Sparse | Regime::Dense => {
                let rule = self.m_rule.ok_or_else(|| {
                    config_err(regime_line, "m_rule", format!("{} regime requires m_rule", self.regime))
                })?;
                let (first, last) = (self.n_grid[0], *self.n_grid.last().unwrap());
                let ratio = |n: usize| rule.attributes(n) as f64 / n as f64;
                let ok = match (self.regime, rule) {
                    (Regime::Sparse, MRule::Pow(e)) => e < 1.0 && (first == last || ratio(last) < ratio(first)),
                    (Regime::Dense, MRule::Pow(e)) => e > 1.0 && (first == last || ratio(last) > ratio(first)),
                    _ => false,
                };
                if !ok {
                    let want = if self.regime == Regime::Sparse { "m/n -> 0" } else { "m/n increasing" };
                    return Err(config_err(rule_line, "m_rule", format!("{rule} is inconsistent with {want}")));
                }
                if self.beta.is_some() {
                    return Err(config_err(beta_line.unwrap_or(0), "beta", "only meaningful in the balanced regime"));
                }
            }
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| self.attributes(n) == 0) {
            return Err(config_err(rule_line, "m_rule", format!("gives m = 0 at n = {n}")));
        }
        self.limit().parameters(self.allow_infinite_a2).map_err(|e| config_err(0, "p1/p2", e.to_string()))?;
        Ok(())
    }

    /// Attribute count used at vertex count `n`.
    pub fn attributes(&self, n: usize) -> usize {
        match self.regime {
            Regime::Balanced => (self.beta.unwrap_or(1.0) * n as f64).round() as usize,
            _ => self.m_rule.map_or(0, |r| r.attributes(n)),
        }
    }

    pub fn limit(&self) -> RegimeLimit<f64> {
        match self.regime {
            Regime::Sparse => RegimeLimit::Sparse,
            Regime::Balanced => {
                RegimeLimit::Balanced { beta: self.beta.unwrap_or(1.0), p1: self.p1.clone(), p2: self.p2.clone() }
            }
            Regime::Dense => RegimeLimit::Dense { p1: self.p1.clone(), p2: self.p2.clone() },
        }
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let grid: Vec<String> = self.n_grid.iter().map(ToString::to_string).collect();
        let mut s = format!("regime = {}\n", self.regime);
        if let Some(b) = self.beta {
            s += &format!("beta = {b}\n");
        }
        if let Some(r) = self.m_rule {
            s += &format!("m_rule = {r}\n");
        }
        s += &format!(
            "n_grid = {}\np1 = {}\np2 = {}\nreplicates = {}\nmaster_seed = {}\nr_max = {}\nn_mix = {}\ndegree_estimator = {}\n",
            grid.join(", "),
            self.p1,
            self.p2,
            self.replicates,
            self.master_seed,
            self.r_max,
            self.n_mix,
            self.degree_estimator
        );
        if let Some(d) = &self.output_dir {
            s += &format!("output_dir = {}\n", d.display());
        }
        s += &format!("record_runtime = {}\nallow_infinite_a2 = {}\n", self.record_runtime, self.allow_infinite_a2);
        s
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Free-function form of [`ExperimentConfig::parse`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
        regime = balanced
        n_grid = 1000, 5000
        p1 = exp:1
        p2 = exp:1
        replicates = 4
        master_seed = 9
        [balanced]
        beta = 1
    ";

    fn field_of(err: Error) -> (usize, String) {
        match err {
            Error::Config { line, field, .. } => (line, field),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_balanced_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.regime, Regime::Balanced);
        assert_eq!(c.beta, Some(1.0));
        assert_eq!(c.r_max, 200);
        assert_eq!(c.n_mix, 100_000);
        assert_eq!(c.degree_estimator, DegreeEstimator::AllVertices);
        assert_eq!(c.attributes(5000), 5000);
        assert!(!c.record_runtime);
    }

    #[test]
    fn text_form_round_trips() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn sparse_with_linear_rule_is_rejected() {
        let text = "regime = sparse\nm_rule = lin:2\nn_grid = 100, 1000\np1 = exp:1\np2 = exp:1\nreplicates = 1\nmaster_seed = 1\n";
        assert_eq!(field_of(parse_config(text).unwrap_err()), (2, "m_rule".into()));
        let dense = text.replace("sparse", "dense").replace("lin:2", "pow:0.5");
        assert_eq!(field_of(parse_config(&dense).unwrap_err()).1, "m_rule");
        let ok = text.replace("lin:2", "pow:0.4");
        assert_eq!(parse_config(&ok).unwrap().attributes(100_000), 100);
    }

    #[test]
    fn grid_must_increase() {
        let text = MINIMAL.replace("1000, 5000", "[1000, 500]");
        assert_eq!(field_of(parse_config(&text).unwrap_err()), (3, "n_grid".into()));
        let text = MINIMAL.replace("1000, 5000", "1000, 1e3");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn unknown_and_malformed_entries() {
        assert_eq!(field_of(parse_config(&MINIMAL.replace("balanced\n", "cubic\n")).unwrap_err()).1, "regime");
        assert_eq!(field_of(parse_config(&format!("{MINIMAL}\ncolour = red")).unwrap_err()).1, "colour");
        let bad_weight = MINIMAL.replace("p2 = exp:1", "p2 = exp:-3");
        assert_eq!(field_of(parse_config(&bad_weight).unwrap_err()), (5, "p2".into()));
        assert!(parse_config(&format!("{MINIMAL}\n[cubic]")).is_err());
        assert!(parse_config(&format!("{MINIMAL}\njust words")).is_err());
        let missing_beta = MINIMAL.replace("beta = 1", "");
        assert_eq!(field_of(parse_config(&missing_beta).unwrap_err()).1, "beta");
    }

    #[test]
    fn other_sections_are_ignored_until_selected() {
        let text = format!("{MINIMAL}\n[dense]\nm_rule = pow:1.5\n");
        assert_eq!(parse_config(&text).unwrap().regime, Regime::Balanced);
        let dense = ExperimentConfig::parse_with_overrides(&text, &["regime=dense"]).unwrap();
        assert_eq!(dense.m_rule, Some(MRule::Pow(1.5)));
        assert_eq!(dense.beta, None);
    }

    #[test]
    fn overrides_win() {
        let c = ExperimentConfig::parse_with_overrides(
            MINIMAL,
            &["beta=2.5", "replicates=7", "degree_estimator=v1_only", "balanced.beta=3"],
        )
        .unwrap();
        assert_eq!(c.beta, Some(3.0));
        assert_eq!(c.replicates, 7);
        assert_eq!(c.degree_estimator, DegreeEstimator::V1Only);
        let err = ExperimentConfig::parse_with_overrides(MINIMAL, &["nope=1"]).unwrap_err();
        assert_eq!(field_of(err), (0, "nope".into()));
    }

    #[test]
    fn balanced_requires_finite_second_moment_unless_overridden() {
        let heavy = MINIMAL.replace("p1 = exp:1", "p1 = pareto:1.5,1");
        assert!(parse_config(&heavy).is_err());
        let c = ExperimentConfig::parse_with_overrides(&heavy, &["allow_infinite_a2=true"]).unwrap();
        assert!(c.allow_infinite_a2);
    }
}
