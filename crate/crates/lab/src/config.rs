//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! experiment = g-parseval, poisson-dilates   # or `all`
//! seed = 7
//! output = out
//! N = 512
//! p_grid = 1.5, 2, 4
//! ```
//!
//! Keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `experiment` | comma-separated catalog names, or `all` (required) |
//! | `output` | output directory (required) |
//! | `seed` | root seed for every random stream |
//! | `d`, `N`, `L` | dimension, samples per axis, line period |
//! | `t_min`, `t_max`, `nodes` | log-time grid |
//! | `p_grid` | comma-separated exponents |
//! | `family_size` | number of family members (or terms, per experiment) |
//! | `draws` | Monte Carlo sample count |
//! | `tolerance` | replaces the experiment's acceptance tolerance |
//!
//! Unknown or repeated keys are errors.

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{LabError, Result};

/// Parameter values set in the file; `None` keeps the experiment's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub dim: Option<usize>,
    pub samples: Option<usize>,
    pub period: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub nodes: Option<usize>,
    pub ps: Option<Vec<f64>>,
    pub family: Option<usize>,
    pub draws: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Catalog names, in run order.
    pub experiments: Vec<String>,
    pub output: PathBuf,
    pub overrides: Overrides,
}

pub const KEYS: [&str; 13] = [
    "experiment",
    "output",
    "seed",
    "d",
    "N",
    "L",
    "t_min",
    "t_max",
    "nodes",
    "p_grid",
    "family_size",
    "draws",
    "tolerance",
];

fn bad(line: usize, message: impl Into<String>) -> LabError {
    LabError::Config { line, message: message.into() }
}

fn number<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(line, format!("`{key}` expects a number, got `{v}`")))
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

impl ExperimentConfig {
    /// Parses the text. Experiment names are checked against `catalog`.
    pub fn parse(text: &str, catalog: &[&str]) -> Result<Self> {
        let mut seen: Vec<&str> = Vec::new();
        let mut experiments = None;
        let mut output = None;
        let mut o = Overrides::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(bad(line, format!("expected `key = value`, got `{body}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&key) = KEYS.iter().find(|&&k| k == key) else {
                return Err(bad(line, format!("unknown key `{key}`")));
            };
            if seen.contains(&key) {
                return Err(bad(line, format!("key `{key}` given twice")));
            }
            seen.push(key);
            if value.is_empty() {
                return Err(bad(line, format!("key `{key}` has no value")));
            }
            match key {
                "experiment" => {
                    let names = list(value);
                    experiments = Some(if names == ["all"] {
                        catalog.iter().map(|s| s.to_string()).collect()
                    } else {
                        for n in &names {
                            if !catalog.contains(&n.as_str()) {
                                return Err(LabError::UnknownExperiment(n.clone()));
                            }
                        }
                        names
                    });
                }
                "output" => output = Some(PathBuf::from(value)),
                "seed" => o.seed = Some(number(line, key, value)?),
                "d" => o.dim = Some(number(line, key, value)?),
                "N" => o.samples = Some(number(line, key, value)?),
                "L" => o.period = Some(number(line, key, value)?),
                "t_min" => o.t_min = Some(number(line, key, value)?),
                "t_max" => o.t_max = Some(number(line, key, value)?),
                "nodes" => o.nodes = Some(number(line, key, value)?),
                "p_grid" => {
                    o.ps = Some(list(value).iter().map(|v| number(line, key, v)).collect::<Result<_>>()?);
                }
                "family_size" => o.family = Some(number(line, key, value)?),
                "draws" => o.draws = Some(number(line, key, value)?),
                "tolerance" => o.tolerance = Some(number(line, key, value)?),
                _ => unreachable!("key list and match agree"),
            }
        }
        let experiments = experiments.ok_or_else(|| bad(0, "missing required key `experiment`"))?;
        let output = output.ok_or_else(|| bad(0, "missing required key `output`"))?;
        if experiments.is_empty() {
            return Err(bad(0, "`experiment` names no experiment"));
        }
        Ok(Self { experiments, output, overrides: o })
    }

    pub fn from_file(path: &std::path::Path, catalog: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text, catalog)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAT: [&str; 2] = ["a", "b"];

    #[test]
    fn parses_documented_keys() {
        let text = "# run\nexperiment = b, a\noutput = out # trailing\nseed=3\nN = 512\np_grid = 1.5, 2,4\ntolerance = 0.1\n";
        let c = ExperimentConfig::parse(text, &CAT).unwrap();
        assert_eq!(c.experiments, ["b", "a"]);
        assert_eq!(c.output, PathBuf::from("out"));
        assert_eq!(c.overrides.seed, Some(3));
        assert_eq!(c.overrides.samples, Some(512));
        assert_eq!(c.overrides.ps, Some(vec![1.5, 2.0, 4.0]));
        assert_eq!(c.overrides.tolerance, Some(0.1));
        let all = ExperimentConfig::parse("experiment = all\noutput = o", &CAT).unwrap();
        assert_eq!(all.experiments, ["a", "b"]);
    }

    #[test]
    fn rejects_mistakes() {
        let err = |t: &str| ExperimentConfig::parse(t, &CAT).unwrap_err().to_string();
        assert!(err("experiment = a\noutput = o\nsamples = 3").contains("unknown key `samples`"));
        assert!(err("experiment = a\noutput = o\nseed = 1\nseed = 2").contains("twice"));
        assert!(err("experiment = a\noutput = o\nN = many").contains("expects a number"));
        assert!(err("experiment = c\noutput = o").contains("unknown experiment"));
        assert!(err("output = o").contains("experiment"));
        assert!(err("experiment = a").contains("output"));
        assert!(err("experiment = a\noutput = o\njunk").contains("line 3"));
    }
}
