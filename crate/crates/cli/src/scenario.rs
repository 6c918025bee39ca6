//! TOML scenario files.
//!
//! Rates are ordinary frequencies in Hz (the `x/2π` values quoted for
//! devices) and are converted to rad/s once, in [`ScenarioFile::to_config`].
//! Temperature is in kelvin, the force amplitude in 1/s.

use std::f64::consts::PI;
use std::path::Path;

use kerrcat::fock::DEFAULT_GRID_SIZE;
use kerrcat::{Complex64, Engine, ExperimentConfig, ForceShape, ForceSpec, LossParams, LossRates, ProtocolParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    /// `Re[α₀]`.
    pub alpha: f64,
    #[serde(default)]
    pub alpha_imag: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "yes")]
    pub apply_offset: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

fn yes() -> bool {
    true
}

/// Loss section; presence switches the transfer model on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    /// Kerr-oscillator damping, Hz.
    pub kappa: f64,
    /// Mechanical damping, Hz.
    pub gamma: f64,
    /// Swap coupling, Hz.
    pub g: f64,
    /// Mechanical frequency, Hz.
    pub omega_m: f64,
    /// Kerr rate, Hz.
    pub lambda_kerr: f64,
    /// Bath temperature, K.
    #[serde(default)]
    pub temp: f64,
}

impl LossSection {
    pub fn reference() -> Self {
        let r = LossRates::reference();
        let hz = |w: f64| w / (2.0 * PI);
        Self {
            kappa: hz(r.kappa),
            gamma: hz(r.gamma),
            g: hz(r.g),
            omega_m: hz(r.omega_m),
            lambda_kerr: hz(r.lambda_kerr),
            temp: r.temp,
        }
    }

    pub fn rates(&self) -> LossRates {
        let w = 2.0 * PI;
        LossRates {
            kappa: w * self.kappa,
            gamma: w * self.gamma,
            g: w * self.g,
            omega_m: w * self.omega_m,
            lambda_kerr: w * self.lambda_kerr,
            temp: self.temp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeName {
    ResonantCosine,
    Constant,
    Samples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceSection {
    /// Scaled force amplitude, 1/s.
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
    pub shape: ShapeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "analytic")]
    pub engine: Engine,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
}

fn analytic() -> Engine {
    Engine::Analytic
}

fn default_grid() -> usize {
    DEFAULT_GRID_SIZE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub protocol: ProtocolSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<ForceSection>,
    pub run: RunSection,
}

impl Default for ScenarioFile {
    /// Lossless protocol at α = 2 with a small kick and the offset applied.
    fn default() -> Self {
        Self {
            protocol: ProtocolSection { alpha: 2.0, alpha_imag: 0.0, delta: 0.01, apply_offset: true, truncation: None },
            loss: None,
            force: None,
            run: RunSection { shots: 100_000, seed: 0, engine: Engine::Analytic, grid_size: DEFAULT_GRID_SIZE },
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Self = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Structural checks; physical preconditions surface in [`Self::to_config`].
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |key: &str, why: &str| Err(CliError::Parse(format!("{key}: {why}")));
        let p = &self.protocol;
        if !(p.alpha.is_finite() && p.alpha_imag.is_finite() && p.delta.is_finite()) {
            return bad("protocol", "values must be finite");
        }
        if let Some(l) = &self.loss {
            for (k, v) in [
                ("loss.kappa", l.kappa),
                ("loss.gamma", l.gamma),
                ("loss.g", l.g),
                ("loss.omega_m", l.omega_m),
                ("loss.lambda_kerr", l.lambda_kerr),
                ("loss.temp", l.temp),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return bad(k, "must be finite and non-negative");
                }
            }
        }
        if let Some(f) = &self.force {
            match (f.shape, &f.samples) {
                (ShapeName::Samples, None) => return bad("force.samples", "required for shape = \"samples\""),
                (ShapeName::Samples, Some(_)) | (_, None) => {}
                (_, Some(_)) => return bad("force.samples", "only allowed with shape = \"samples\""),
            }
        }
        if self.run.shots == 0 {
            return bad("run.shots", "must be at least 1");
        }
        Ok(())
    }

    pub fn to_config(&self) -> Result<ExperimentConfig, CliError> {
        self.check()?;
        let p = &self.protocol;
        let mut protocol =
            ProtocolParams::new(Complex64::new(p.alpha, p.alpha_imag), p.delta, p.apply_offset)?;
        if let Some(n) = p.truncation {
            protocol = protocol.with_truncation(n);
        }
        let loss = match &self.loss {
            Some(l) => Some(LossParams::new(l.rates())?),
            None => None,
        };
        let force = self.force.as_ref().map(|f| ForceSpec {
            amplitude: f.amplitude,
            phase: f.phase,
            shape: match f.shape {
                ShapeName::ResonantCosine => ForceShape::ResonantCosine,
                ShapeName::Constant => ForceShape::Constant,
                ShapeName::Samples => ForceShape::Samples(f.samples.clone().unwrap_or_default()),
            },
        });
        let cfg = ExperimentConfig {
            protocol,
            loss,
            force,
            shots: self.run.shots,
            seed: self.run.seed,
            engine: self.run.engine,
            grid_size: self.run.grid_size,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let s = ScenarioFile::default();
        assert_eq!(ScenarioFile::parse(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn hz_converted_once() {
        let l = LossSection::reference();
        assert!((l.kappa - 100e3).abs() < 1e-6);
        assert!((l.rates().kappa - 2.0 * PI * 100e3).abs() < 1e-6);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = "[protocol]\nalpha = 1.0\nmass = 3\n[run]\nshots = 10\n";
        assert!(matches!(ScenarioFile::parse(text), Err(CliError::Parse(_))));
    }

    #[test]
    fn negative_rate_rejected() {
        let mut s = ScenarioFile::default();
        s.loss = Some(LossSection { kappa: -1.0, ..LossSection::reference() });
        assert!(matches!(s.check(), Err(CliError::Parse(_))));
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let s = ScenarioFile::parse("[protocol]\nalpha = 1.5\n[run]\nshots = 10\n").unwrap();
        assert!(s.protocol.apply_offset);
        assert_eq!(s.run.engine, Engine::Analytic);
        assert_eq!(s.run.grid_size, DEFAULT_GRID_SIZE);
        assert!(s.to_config().unwrap().loss.is_none());
    }
}
