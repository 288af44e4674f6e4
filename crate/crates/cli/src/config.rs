//! Run configuration: defaults, then the config file, then environment and flags.

use crate::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use transcrit::experiments::claims::{Sizes, SuiteConfig, EXIT_BAND};
use transcrit::experiments::sweep::{logspace, SweepAxis, SweepSpec};
use transcrit::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

/// Every key of the config file. The file is flat `key = value` TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    pub rho: f64,
    pub delta: f64,
    pub eps: f64,
    pub h: f64,
    /// Seeds the sample grids only; the dynamics are deterministic.
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    /// Worker threads, 0 for one per core.
    pub threads: usize,

    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub nus: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub exit_band: [f64; 2],
    pub conjugacy_samples: usize,
    pub round_trip_samples: usize,
    pub drift_orbits: usize,
    pub passage_samples: usize,
    pub containment_samples: usize,
    pub composition_samples: usize,

    pub sweep_axis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_values: Option<Vec<f64>>,
    pub sweep_lo: f64,
    pub sweep_hi: f64,
    pub sweep_n: usize,
    pub sweep_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_h_over_eps: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let suite = SuiteConfig::default();
        let sizes = suite.sizes;
        RunConfig {
            lambda: 0.5,
            rho: suite.rho,
            delta: 0.1,
            eps: suite.eps,
            h: suite.h,
            seed: suite.seed,
            out: PathBuf::from("out"),
            format: Format::Csv,
            threads: 0,
            lambdas: suite.lambdas,
            deltas: suite.deltas,
            nus: suite.nus,
            omega: None,
            exit_band: [EXIT_BAND.0, EXIT_BAND.1],
            conjugacy_samples: sizes.conjugacy,
            round_trip_samples: sizes.round_trip,
            drift_orbits: sizes.drift_trajectories,
            passage_samples: sizes.passage,
            containment_samples: sizes.containment,
            composition_samples: sizes.composition,
            sweep_axis: "eps".into(),
            sweep_values: None,
            sweep_lo: 1e-3,
            sweep_hi: 1e-2,
            sweep_n: 8,
            sweep_samples: 3,
            sweep_h_over_eps: Some(0.1),
        }
    }
}

/// Values given on the command line or through the environment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub eps: Option<f64>,
    pub h: Option<f64>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// Applies overrides. A `lambda` or `delta` given here also replaces the
    /// corresponding suite grid with that single value.
    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(v) = o.lambda {
            self.lambda = v;
            self.lambdas = vec![v];
        }
        if let Some(v) = o.delta {
            self.delta = v;
            self.deltas = vec![v];
        }
        if let Some(v) = o.eps {
            self.eps = v;
        }
        if let Some(v) = o.h {
            self.h = v;
        }
        if let Some(v) = o.rho {
            self.rho = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.format {
            self.format = v;
        }
        if let Some(v) = o.threads {
            self.threads = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        self
    }

    pub fn params(&self) -> Result<Params, CliError> {
        Ok(Params::new(self.lambda, self.rho, self.delta, self.eps, self.h)?)
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            lambdas: self.lambdas.clone(),
            deltas: self.deltas.clone(),
            nus: self.nus.clone(),
            rho: self.rho,
            eps: self.eps,
            h: self.h,
            omega: self.omega,
            exit_band: (self.exit_band[0], self.exit_band[1]),
            seed: self.seed,
            sizes: Sizes {
                conjugacy: self.conjugacy_samples,
                round_trip: self.round_trip_samples,
                drift_trajectories: self.drift_orbits,
                passage: self.passage_samples,
                containment: self.containment_samples,
                composition: self.composition_samples,
            },
        }
    }

    /// The sweep described by the config. A sweep at `lambda = 1`
    /// is refused unless `lambda` itself is the swept axis.
    pub fn sweep(&self) -> Result<SweepSpec, CliError> {
        let axis: SweepAxis = self.sweep_axis.parse()?;
        let base = self.params()?;
        if base.is_canard() && axis != SweepAxis::Lambda {
            return Err(CliError::Usage(
                "lambda = 1 is the canard case, outside the passage regime; sweep another lambda".into(),
            ));
        }
        let values = match &self.sweep_values {
            Some(v) => v.clone(),
            None if self.sweep_n == 0 => Vec::new(),
            None => logspace(self.sweep_lo, self.sweep_hi, self.sweep_n)?,
        };
        if values.is_empty() {
            return Err(CliError::Usage("empty sweep grid".into()));
        }
        Ok(SweepSpec {
            axis,
            values,
            base,
            samples: self.sweep_samples,
            h_over_eps: if axis == SweepAxis::Eps { self.sweep_h_over_eps } else { None },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_defaults_parse_back() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn file_values_then_overrides() {
        let c = RunConfig::from_toml("lambda = 2.0\nlambdas = [2.0, -0.5]\neps = 0.02\n").unwrap();
        assert_eq!(c.lambdas, vec![2.0, -0.5]);
        assert_eq!(c.rho, 1.0);
        let c = c.apply(&Overrides { lambda: Some(0.5), ..Default::default() });
        assert_eq!((c.lambda, c.lambdas.clone(), c.eps), (0.5, vec![0.5], 0.02));
        assert!(RunConfig::from_toml("lamda = 1").is_err());
    }

    #[test]
    fn canard_sweep_is_refused() {
        let c = RunConfig { lambda: 1.0, ..Default::default() };
        let e = c.sweep().unwrap_err();
        assert!(e.to_string().contains("canard"));
        let c = RunConfig { lambda: 1.0, sweep_axis: "lambda".into(), sweep_values: Some(vec![0.5, 2.0]), ..Default::default() };
        assert!(c.sweep().is_ok());
    }
}
