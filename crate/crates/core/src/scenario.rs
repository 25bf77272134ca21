//! Scenario files: TOML with one section per concern.
//!
//! ```toml
//! name = "ball_example"
//! dimension = 2
//! horizon = 1.0
//! x0 = [0.0, 0.0]
//!
//! [model]
//! preset = "ball_example"
//! alpha = 10.088189532
//!
//! [region]
//! kind = "ball"
//! radius = 1.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::krasovskij::EnvelopeOptions;
use crate::presets::{self, BallExample};
use crate::regions::{
    ball_pair, band_pair, example_band45_pair, EnvelopeMode, PiecewiseFn, Polynomial, ViablePair,
};
use crate::rhs::{BranchConvention, RhsModel};
use crate::verify::CertOptions;

/// Environment variable overriding the scenario seed.
pub const SEED_ENV: &str = "REGION_ODE_SEED";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelForm {
    #[default]
    Factored,
    Direct,
}

fn default_q() -> u32 {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    BallExample {
        alpha: f64,
        #[serde(default = "default_q")]
        q: u32,
        #[serde(default)]
        form: ModelForm,
        #[serde(default)]
        branch: BranchConvention,
    },
    BandExample,
    /// `x′ = gain·sign(x)`.
    Sign {
        gain: f64,
    },
    Constant {
        value: Vec<f64>,
    },
    /// `x′ = rate·x`.
    Radial {
        rate: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Ball {
        radius: f64,
    },
    Band {
        alpha: PiecewiseFn,
        beta: PiecewiseFn,
    },
    ExampleBand45,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    /// Complement samples for the region check and the classification.
    pub samples: usize,
    /// Located surface points per level for transversality.
    pub transversality_samples: usize,
    pub region_tolerance: f64,
    pub transversality_margin: f64,
    pub mode: EnvelopeMode,
    /// Grid intervals for the lower/upper checks.
    pub bound_grid: usize,
    pub bound_tolerance: f64,
    pub envelope: EnvelopeOptions,
    pub certify: CertOptions,
    /// Candidates for the lower/upper checks; default to the band's bounds.
    pub lower: Option<PiecewiseFn>,
    pub upper: Option<PiecewiseFn>,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            samples: default_samples(),
            transversality_samples: 64,
            region_tolerance: 0.0,
            transversality_margin: crate::regions::TRANSVERSALITY_MARGIN,
            mode: EnvelopeMode::Projected,
            bound_grid: 1000,
            bound_tolerance: 0.0,
            envelope: EnvelopeOptions::default(),
            certify: CertOptions::default(),
            lower: None,
            upper: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub dimension: usize,
    pub horizon: f64,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Accept `h(0, x0) > 0`.
    #[serde(default)]
    pub allow_outside_start: bool,
    pub model: ModelSpec,
    pub region: RegionSpec,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
}

/// Model and pair built from a scenario.
pub struct Built {
    pub model: RhsModel,
    pub pair: ViablePair,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Scenario(msg) => Error::Scenario(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Apply `REGION_ODE_SEED` if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| {
                Error::Scenario(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))
            })?;
        }
        Ok(())
    }

    /// Canonical text: re-parses to an identical config.
    pub fn to_canonical(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn build(&self) -> Result<Built> {
        let model = match &self.model {
            ModelSpec::BallExample { alpha, q, form, .. } => {
                let mut be = BallExample::new(*alpha, *q);
                be.horizon = self.horizon;
                if let RegionSpec::Ball { radius } = self.region {
                    be = be.with_reach(radius.max(1.0));
                }
                match form {
                    ModelForm::Factored => be.factored()?,
                    ModelForm::Direct => be.direct()?,
                }
            }
            ModelSpec::BandExample => presets::band_example()?,
            ModelSpec::Sign { gain } => presets::sign_model(*gain, self.horizon)?,
            ModelSpec::Constant { value } => presets::constant(value.clone(), self.horizon)?,
            ModelSpec::Radial { rate } => presets::radial(*rate, self.dimension, self.horizon)?,
        };
        let pair = match &self.region {
            RegionSpec::Ball { radius } => ball_pair(*radius, self.dimension)?,
            RegionSpec::Band { alpha, beta } => {
                band_pair(alpha.clone(), beta.clone(), self.horizon)?
            }
            RegionSpec::ExampleBand45 => example_band45_pair(),
        };
        Ok(Built { model, pair })
    }

    fn fail(msg: impl Into<String>) -> Error {
        Error::Scenario(msg.into())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Self::fail(format!(
                "horizon: must be positive, got {}",
                self.horizon
            )));
        }
        if self.x0.len() != self.dimension {
            return Err(Self::fail(format!(
                "x0: has {} entries but dimension is {}",
                self.x0.len(),
                self.dimension
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Self::fail("x0: entries must be finite"));
        }
        let fixed = match &self.model {
            ModelSpec::BallExample { q, .. } => {
                if *q == 0 {
                    return Err(Self::fail("model.q: must be positive"));
                }
                Some((2, None))
            }
            ModelSpec::BandExample => Some((1, Some(1.0))),
            ModelSpec::Sign { .. } => Some((1, None)),
            ModelSpec::Constant { value } => Some((value.len(), None)),
            ModelSpec::Radial { .. } => None,
        };
        if let Some((dim, horizon)) = fixed {
            if dim != self.dimension {
                return Err(Self::fail(format!(
                    "model: preset has dimension {dim}, scenario declares {}",
                    self.dimension
                )));
            }
            if let Some(h) = horizon {
                if h != self.horizon {
                    return Err(Self::fail(format!(
                        "horizon: preset is defined on [0, {h}]"
                    )));
                }
            }
        }
        match &self.region {
            RegionSpec::Ball { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                return Err(Self::fail("region.radius: must be positive"));
            }
            RegionSpec::Band { .. } | RegionSpec::ExampleBand45 if self.dimension != 1 => {
                return Err(Self::fail(
                    "region: band regions are scalar (dimension = 1)",
                ));
            }
            _ => {}
        }
        if self.checks.samples == 0
            || self.checks.transversality_samples == 0
            || self.checks.bound_grid == 0
        {
            return Err(Self::fail("checks: sample counts must be positive"));
        }
        self.checks
            .envelope
            .schedule
            .validate()
            .map_err(|e| Self::fail(format!("checks.envelope: {e}")))?;
        self.integrator
            .resolve(self.horizon)
            .map_err(|e| Self::fail(format!("integrator: {e}")))?;
        let built = self
            .build()
            .map_err(|e| Self::fail(format!("model/region: {e}")))?;
        let h0 = built.pair.h(0.0, &self.x0);
        if h0 > 0.0 && !self.allow_outside_start {
            return Err(Self::fail(format!(
                "x0: h(0, x0) = {h0} > 0; set allow_outside_start = true to run anyway"
            )));
        }
        Ok(())
    }

    /// Names accepted by [`ScenarioConfig::set_param`].
    pub const PARAMS: &'static [&'static str] = &[
        "alpha",
        "q",
        "step",
        "event_tol",
        "seed",
        "radius",
        "gain",
        "rate",
        "samples",
        "horizon",
    ];

    /// Set one numeric parameter; used by sweeps.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let bad = || {
            Error::usage(format!(
                "parameter {name} does not apply to scenario {}",
                self.name
            ))
        };
        let as_count = |v: f64| -> Result<u64> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
                Ok(v as u64)
            } else {
                Err(Error::usage(format!(
                    "{name} must be a nonnegative integer, got {v}"
                )))
            }
        };
        match name {
            "alpha" => match &mut self.model {
                ModelSpec::BallExample { alpha, .. } => *alpha = value,
                _ => return Err(bad()),
            },
            "q" => {
                let v = as_count(value)? as u32;
                match &mut self.model {
                    ModelSpec::BallExample { q, .. } => *q = v,
                    _ => return Err(bad()),
                }
            }
            "gain" => match &mut self.model {
                ModelSpec::Sign { gain } => *gain = value,
                _ => return Err(bad()),
            },
            "rate" => match &mut self.model {
                ModelSpec::Radial { rate } => *rate = value,
                _ => return Err(bad()),
            },
            "radius" => match &mut self.region {
                RegionSpec::Ball { radius } => *radius = value,
                _ => return Err(bad()),
            },
            "step" => self.integrator.step = Some(value),
            "event_tol" => self.integrator.event_tol = Some(value),
            "seed" => self.seed = as_count(value)?,
            "samples" => self.checks.samples = as_count(value)? as usize,
            "horizon" => self.horizon = value,
            _ => {
                return Err(Error::usage(format!(
                    "unknown parameter {name}; expected one of {}",
                    Self::PARAMS.join(", ")
                )))
            }
        }
        self.validate()
    }

    /// `α(t) = t` and the discontinuous `β` for the built-in band pair;
    /// the band's own bounds otherwise.
    pub fn bound_candidates(&self) -> (Option<PiecewiseFn>, Option<PiecewiseFn>) {
        let (lo, hi) = match &self.region {
            RegionSpec::Band { alpha, beta } => (Some(alpha.clone()), Some(beta.clone())),
            RegionSpec::ExampleBand45 => (
                Some(PiecewiseFn::linear(0.0, 1.0)),
                PiecewiseFn::new(
                    vec![0.5],
                    vec![Polynomial(vec![1.0]), Polynomial(vec![2.0])],
                    vec![true],
                )
                .ok(),
            ),
            RegionSpec::Ball { .. } => (None, None),
        };
        (
            self.checks.lower.clone().or(lo),
            self.checks.upper.clone().or(hi),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALL: &str = r#"
name = "ball"
dimension = 2
horizon = 1.0
x0 = [0.0, 0.0]

[model]
preset = "ball_example"
alpha = 10.0

[region]
kind = "ball"
radius = 1.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ScenarioConfig::from_toml(BALL).unwrap();
        assert_eq!(cfg.checks.samples, 10_000);
        let text = cfg.to_canonical().unwrap();
        let back = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_canonical().unwrap(), text);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err =
            ScenarioConfig::from_toml(&BALL.replace("x0 = [0.0, 0.0]", "x0 = [0.0]")).unwrap_err();
        assert!(err.to_string().contains("x0"), "{err}");
        let err =
            ScenarioConfig::from_toml(&BALL.replace("alpha = 10.0", "alpha = 10.0\nbeta = 1"))
                .unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
        let err = ScenarioConfig::from_toml(&BALL.replace("radius = 1.0", "radius = \"one\""))
            .unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
        let err = ScenarioConfig::from_toml(&BALL.replace("[0.0, 0.0]", "[2.0, 0.0]")).unwrap_err();
        assert!(err.to_string().contains("allow_outside_start"), "{err}");
    }

    #[test]
    fn set_param_checks_applicability() {
        let mut cfg = ScenarioConfig::from_toml(BALL).unwrap();
        cfg.set_param("alpha", 3.0).unwrap();
        assert!(matches!(cfg.model, ModelSpec::BallExample { alpha, .. } if alpha == 3.0));
        assert!(cfg.set_param("gain", 1.0).is_err());
        assert!(cfg.set_param("nope", 1.0).is_err());
        assert!(cfg.set_param("seed", 1.5).is_err());
    }
}
