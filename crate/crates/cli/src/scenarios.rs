//! Seeded scenario generation. Every draw comes from `ChaCha8Rng::seed_from_u64(seed)`,
//! row by row, column by column.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioDistribution {
    /// Uniform on `[a, b)`.
    Uniform {
        a: f64,
        b: f64,
    },
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// Rows copied from a headed CSV file.
    FromFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGenSpec {
    pub distribution: ScenarioDistribution,
    #[serde(default)]
    pub count: usize,
    #[serde(default)]
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    /// Output CSV inside the output directory; `scenarios.csv` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ScenarioGenSpec {
    pub fn validate(&self) -> Result<()> {
        match &self.distribution {
            ScenarioDistribution::FromFile { .. } => return Ok(()),
            ScenarioDistribution::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    bail!("uniform distribution requires finite a < b, got a = {a}, b = {b}");
                }
            }
            ScenarioDistribution::Gaussian { mean, sd } => {
                if !(mean.is_finite() && sd.is_finite() && *sd > 0.0) {
                    bail!("gaussian distribution requires a finite mean and sd > 0, got mean = {mean}, sd = {sd}");
                }
            }
        }
        if self.count < 1 {
            bail!("count must be ≥ 1");
        }
        if self.dimension < 1 {
            bail!("dimension must be ≥ 1");
        }
        Ok(())
    }
}

/// `base` resolves a relative `from_file` path.
pub fn generate(spec: &ScenarioGenSpec, base: &Path) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rows = match &spec.distribution {
        ScenarioDistribution::Uniform { a, b } => {
            (0..spec.count).map(|_| (0..spec.dimension).map(|_| rng.random_range(*a..*b)).collect()).collect()
        }
        ScenarioDistribution::Gaussian { mean, sd } => {
            let normal = Normal::new(*mean, *sd).context("invalid gaussian parameters")?;
            (0..spec.count).map(|_| (0..spec.dimension).map(|_| normal.sample(&mut rng)).collect()).collect()
        }
        ScenarioDistribution::FromFile { path } => {
            let p = if path.is_absolute() { path.clone() } else { base.join(path) };
            let rows = io::read_samples(&p)?.rows().to_vec();
            if spec.dimension > 0 && rows[0].len() != spec.dimension {
                bail!("{} has {} columns, spec says {}", p.display(), rows[0].len(), spec.dimension);
            }
            rows
        }
    };
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(count: usize, seed: u64) -> ScenarioGenSpec {
        ScenarioGenSpec { distribution: ScenarioDistribution::Uniform { a: 0.0, b: 1.0 }, count, dimension: 3, seed, output: None }
    }

    #[test]
    fn same_seed_same_rows() {
        let a = generate(&uniform(20, 7), Path::new(".")).unwrap();
        let b = generate(&uniform(20, 7), Path::new(".")).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate(&uniform(20, 8), Path::new(".")).unwrap());
        assert!(a.iter().flatten().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn gaussian_mean_is_close() {
        let spec = ScenarioGenSpec {
            distribution: ScenarioDistribution::Gaussian { mean: 0.0, sd: 1.0 },
            count: 10_000,
            dimension: 1,
            seed: 3,
            output: None,
        };
        let rows = generate(&spec, Path::new(".")).unwrap();
        let mean = rows.iter().map(|r| r[0]).sum::<f64>() / rows.len() as f64;
        assert!(mean.abs() < 0.05, "{mean}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = uniform(5, 0);
        s.distribution = ScenarioDistribution::Uniform { a: 1.0, b: 1.0 };
        assert!(s.validate().is_err());
        assert!(uniform(0, 0).validate().is_err());
        s.distribution = ScenarioDistribution::Gaussian { mean: 0.0, sd: 0.0 };
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s: ScenarioGenSpec =
            serde_json::from_str(r#"{"distribution": {"gaussian": {"mean": 1, "sd": 2}}, "count": 4, "dimension": 2, "seed": 9}"#).unwrap();
        assert_eq!(s.distribution, ScenarioDistribution::Gaussian { mean: 1.0, sd: 2.0 });
    }
}
