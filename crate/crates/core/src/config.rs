//! JSON configuration for the experiment sweep.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::optics::{EncoderSetup, ImperfectionParams};

pub const SCHEMA_VERSION: u32 = 1;

/// A list of angles in degrees, either explicit or as an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl AngleGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            AngleGrid::List(v) => {
                if v.is_empty() {
                    return Err(invalid("angles", "empty angle list"));
                }
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(invalid("angles", format!("non-finite angle {bad}")));
                }
                Ok(v.clone())
            }
            &AngleGrid::Range { start, stop, step } => {
                if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
                    return Err(invalid(
                        "angles",
                        format!("range needs step > 0 and stop >= start, got {start}:{step}:{stop}"),
                    ));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if n > 100_000 {
                    return Err(invalid("angles", format!("range has {n} points")));
                }
                Ok((0..n).map(|k| start + k as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMode {
    /// Analytic expected rates, drift averaged per block.
    #[default]
    Expected,
    /// Poisson counts per measurement block with sampled drift.
    ShotNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(invalid("format", format!("expected csv or json, got {other}"))),
        }
    }
}

/// Fixed state of the qubit that is not being verified, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartnerState {
    pub theta: f64,
    pub phi: f64,
}

/// One family of states: the verified qubit runs over `theta × phi` while
/// the other qubit stays in `partner`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub qubit: u8,
    pub theta: AngleGrid,
    pub phi: AngleGrid,
    pub partner: PartnerState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default = "quarter")]
    pub reflectance: f64,
    pub params: ImperfectionParams,
    #[serde(default)]
    pub mode: SimulationMode,
    /// Measurement blocks per grid point in shot-noise mode.
    #[serde(default = "default_blocks")]
    pub blocks: u32,
    #[serde(default)]
    pub seed: u64,
    pub sweeps: Vec<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn quarter() -> f64 {
    0.25
}

fn default_blocks() -> u32 {
    12
}

impl ExperimentConfig {
    /// The grid of the published measurement series with the given
    /// imperfections: two families for qubit 1 and three for qubit 2.
    pub fn reference_grid(params: ImperfectionParams) -> Self {
        let phi = AngleGrid::Range {
            start: 0.0,
            stop: 180.0,
            step: 10.0,
        };
        let partner = PartnerState { theta: 90.0, phi: 0.0 };
        let sweep = |qubit, theta: &[f64]| Sweep {
            qubit,
            theta: AngleGrid::List(theta.to_vec()),
            phi: phi.clone(),
            partner,
        };
        Self {
            schema_version: SCHEMA_VERSION,
            reflectance: 0.25,
            params,
            mode: SimulationMode::Expected,
            blocks: default_blocks(),
            seed: 0,
            sweeps: vec![sweep(1, &[90.0, 78.46]), sweep(2, &[90.0, 78.46, 70.53])],
            output: None,
            format: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| invalid("config", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        EncoderSetup::new(self.reflectance, true)?;
        self.params.validate()?;
        if self.blocks == 0 {
            return Err(invalid("blocks", "must be at least 1"));
        }
        if self.sweeps.is_empty() {
            return Err(invalid("sweeps", "at least one sweep is required"));
        }
        for sweep in &self.sweeps {
            if !matches!(sweep.qubit, 1 | 2) {
                return Err(invalid("qubit", format!("must be 1 or 2, got {}", sweep.qubit)));
            }
            let thetas = sweep.theta.values()?;
            sweep.phi.values()?;
            for t in thetas.iter().chain([&sweep.partner.theta]) {
                if !(0.0..=180.0).contains(t) {
                    return Err(invalid("theta", format!("must lie in [0, 180] degrees, got {t}")));
                }
            }
        }
        Ok(())
    }
}
