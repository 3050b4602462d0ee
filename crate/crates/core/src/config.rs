//! TOML experiment configuration. Unknown keys are rejected everywhere.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{ProjectionPair, Sampling, TemporalConfig};
use crate::error::{ConfigError, Error, Result};
use crate::events::SimConfig;
use crate::jones::{standard_state, Complex, JonesVector, Polarization};
use crate::modes::{make_named_mode, run_pipeline, ElementKind, ModeField, NamedMode, OpticalElement, RadialProfile};

/// The annotated configuration printed by `print-default-config`.
pub const DEFAULT_CONFIG: &str = r#"# homcorr experiment configuration (TOML).
# Every key below is shown with its default value; misspelled keys are errors.

# Azimuthal sectors per output port.
grid_n = 28
# "in" (indistinguishable), "out" (delayed, distinguishable) or "both".
temporal = "both"
# Points per sector along each axis: 1 samples sector centres, more averages.
sector_samples = 1
output_dir = "out"

# Shared radial envelope: kind = "unit" | "gaussian" (waist) | "lg_ring" (waist, oam_abs).
[radial_profile]
kind = "unit"

# A mode is either a named family ...
#   kind = "named", name = "radial_vv" | "pi_vv" | "oam_circular", l = 1
# ... or a uniform input state sent through optical elements:
#   kind = "pipeline"
#   input = "H"                                  # H V D A L R, or { h = [re, im], v = [re, im] }
#   elements = [{ kind = "qplate", q = 0.5 }, { kind = "hwp", angle_deg = 0.0 }]
# Element kinds: hwp, qwp, polarizer (angle_deg), qplate (q, angle_deg, delta_deg = 180).
[mode_a]
kind = "named"
name = "radial_vv"
l = 1

[mode_b]
kind = "named"
name = "pi_vv"
l = 1

# Polarizers in front of the cameras; omit a port (or the table) for no polarizer.
# States are named (H V D A L R) or explicit unit vectors { h = [re, im], v = [re, im] }.
[projection]
# c = "H"
# d = "A"

# Event simulation and analysis (simulate / analyze).
[sim]
pairs = 1000000
coincidence_window_ns = 50.0
psf_sigma_px = 1.5
sensor_width_px = 256
sensor_height_px = 256
ring_radius_px = 60.0
ring_width_px = 40.0
seed = 1592598564
pair_rate_hz = 100000.0
mean_pixels_per_hit = 5.0
jitter_ns = 1.0
pixel_time_spread_ns = 5.0
background_rate_hz = 0.0
oversample = 9
cluster_gap_px = 6.0
cluster_gap_ns = 20.0
min_out_counts = 1

# Inputs for `analyze`; paths are relative to the working directory.
# [analyze]
# in_events = "out/events_in.csv"
# out_events = "out/events_out.csv"
# reference = "out/visibility.csv"   # optional grid check against an existing map
"#;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JonesComponents {
    pub h: [f64; 2],
    pub v: [f64; 2],
}

/// A polarization state: a standard name or explicit components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Components(JonesComponents),
}

impl StateSpec {
    pub fn vector(&self) -> Result<JonesVector, ConfigError> {
        match self {
            StateSpec::Named(s) => Ok(standard_state(s.parse::<Polarization>()?)),
            StateSpec::Components(c) => Ok(JonesVector::new(
                Complex::new(c.h[0], c.h[1]),
                Complex::new(c.v[0], c.v[1]),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub kind: ElementKind,
    #[serde(default)]
    pub angle_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_deg: Option<f64>,
}

impl ElementSpec {
    pub fn element(&self) -> Result<OpticalElement, ConfigError> {
        let angle = self.angle_deg.to_radians();
        let no_q = |what: &str| {
            if self.q.is_some() {
                Err(ConfigError::Invalid(format!("`q` only applies to qplate, not {what}")))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ElementKind::Qplate => {
                let q = self
                    .q
                    .ok_or_else(|| ConfigError::Invalid("qplate needs `q`".into()))?;
                let delta = self.delta_deg.map_or(PI, f64::to_radians);
                Ok(OpticalElement::qplate_with(q, angle, delta))
            }
            kind => {
                no_q(&format!("{kind:?}").to_lowercase())?;
                if self.delta_deg.is_some() {
                    return Err(ConfigError::Invalid("`delta_deg` only applies to qplate".into()));
                }
                Ok(match kind {
                    ElementKind::Hwp => OpticalElement::hwp(angle),
                    ElementKind::Qwp => OpticalElement::qwp(angle),
                    _ => OpticalElement::polarizer(angle),
                })
            }
        }
    }
}

fn default_l() -> i32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpec {
    Named {
        name: NamedMode,
        #[serde(default = "default_l")]
        l: i32,
    },
    Pipeline {
        input: StateSpec,
        elements: Vec<ElementSpec>,
    },
}

impl ModeSpec {
    pub fn build(&self, profile: RadialProfile) -> Result<ModeField, ConfigError> {
        let field = match self {
            ModeSpec::Named { name, l } => make_named_mode(*name, *l),
            ModeSpec::Pipeline { input, elements } => {
                let v = input.vector()?;
                if !v.is_unit() {
                    return Err(ConfigError::Invalid(format!(
                        "pipeline input is not unit norm (|e|² = {})",
                        v.norm_sqr()
                    )));
                }
                let elems = elements
                    .iter()
                    .map(ElementSpec::element)
                    .collect::<Result<Vec<_>, _>>()?;
                run_pipeline(v, &elems)
            }
        };
        Ok(field.with_envelope(profile))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<StateSpec>,
}

impl ProjectionSpec {
    pub fn pair(&self) -> Result<ProjectionPair, ConfigError> {
        let c = self.c.as_ref().map(StateSpec::vector).transpose()?;
        let d = self.d.as_ref().map(StateSpec::vector).transpose()?;
        ProjectionPair::new(c, d)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalChoice {
    In,
    Out,
    #[default]
    Both,
}

impl TemporalChoice {
    pub fn configs(&self) -> &'static [TemporalConfig] {
        match self {
            TemporalChoice::In => &[TemporalConfig::In],
            TemporalChoice::Out => &[TemporalConfig::Out],
            TemporalChoice::Both => &[TemporalConfig::In, TemporalConfig::Out],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub in_events: PathBuf,
    pub out_events: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
}

fn default_grid() -> usize {
    28
}

fn default_samples() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default)]
    pub temporal: TemporalChoice,
    #[serde(default = "default_samples")]
    pub sector_samples: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub radial_profile: RadialProfile,
    pub mode_a: ModeSpec,
    pub mode_b: ModeSpec,
    #[serde(default)]
    pub projection: ProjectionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyze: Option<AnalyzeConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid_n: default_grid(),
            temporal: TemporalChoice::Both,
            sector_samples: 1,
            output_dir: default_output(),
            radial_profile: RadialProfile::Unit,
            mode_a: ModeSpec::Named {
                name: NamedMode::RadialVv,
                l: 1,
            },
            mode_b: ModeSpec::Named {
                name: NamedMode::PiVv,
                l: 1,
            },
            projection: ProjectionSpec::default(),
            sim: Some(SimConfig::default()),
            analyze: None,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Invalid(msg) => ConfigError::Invalid(format!("{}: {msg}", path.display())).into(),
            other => other.into(),
        })
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<(), ConfigError> {
        crate::engine::AngularGrid::new(self.grid_n)?;
        if self.sector_samples == 0 {
            return Err(ConfigError::Invalid("sector_samples must be >= 1".into()));
        }
        self.radial_profile.validate()?;
        self.modes()?;
        self.projection.pair()?;
        if let Some(sim) = &self.sim {
            sim.validate()?;
        }
        Ok(())
    }

    pub fn modes(&self) -> Result<(ModeField, ModeField), ConfigError> {
        Ok((
            self.mode_a.build(self.radial_profile)?,
            self.mode_b.build(self.radial_profile)?,
        ))
    }

    pub fn sampling(&self) -> Sampling {
        if self.sector_samples <= 1 {
            Sampling::Center
        } else {
            Sampling::SectorAverage(self.sector_samples)
        }
    }

    pub fn sim_or_default(&self) -> SimConfig {
        self.sim.clone().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_text_matches_default_value() {
        let parsed = ExperimentConfig::parse(DEFAULT_CONFIG).unwrap();
        assert_eq!(parsed, ExperimentConfig::default());
    }

    #[test]
    fn misspelled_keys_rejected() {
        for bad in [
            "grid_m = 4\n[mode_a]\nkind=\"named\"\nname=\"pi_vv\"\n[mode_b]\nkind=\"named\"\nname=\"pi_vv\"\n",
            "[mode_a]\nkind=\"named\"\nnam=\"pi_vv\"\n[mode_b]\nkind=\"named\"\nname=\"pi_vv\"\n",
            "[mode_a]\nkind=\"named\"\nname=\"pi_vv\"\n[mode_b]\nkind=\"named\"\nname=\"pi_vv\"\n[sim]\npair=3\n",
            "[mode_a]\nkind=\"named\"\nname=\"pi_vv\"\n[mode_b]\nkind=\"pipeline\"\ninput=\"H\"\nelements=[{kind=\"hwp\", angle=3}]\n",
            "[mode_a]\nkind=\"named\"\nname=\"pi_vv\"\n[mode_b]\nkind=\"named\"\nname=\"pi_vv\"\n[projection]\nc={h=[1,0],v=[0,0],w=[0,0]}\n",
        ] {
            assert!(ExperimentConfig::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn pipeline_and_projection_parse() {
        let text = r#"
            grid_n = 8
            [mode_a]
            kind = "pipeline"
            input = "H"
            elements = [{ kind = "qplate", q = 0.5 }]
            [mode_b]
            kind = "named"
            name = "oam_circular"
            [projection]
            c = "H"
            d = { h = [0.7071067811865476, 0.0], v = [-0.7071067811865476, 0.0] }
        "#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        let (a, _) = cfg.modes().unwrap();
        let rad = make_named_mode(NamedMode::RadialVv, 0);
        let phis = crate::modes::phi_samples(90);
        assert!(crate::modes::max_deviation_up_to_phase(&a, &rad, 1.0, &phis) < 1e-12);
        let proj = cfg.projection.pair().unwrap();
        assert!(proj.pc().is_some() && proj.pd().is_some());
    }

    #[test]
    fn invalid_values_rejected() {
        let base = "[mode_a]\nkind=\"named\"\nname=\"pi_vv\"\n[mode_b]\nkind=\"named\"\nname=\"pi_vv\"\n";
        assert!(ExperimentConfig::parse(&format!("grid_n = 1\n{base}")).is_err());
        assert!(ExperimentConfig::parse(&format!("{base}[projection]\nc = \"Q\"\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{base}[projection]\nc = {{ h = [1, 0], v = [1, 0] }}\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{base}[radial_profile]\nkind = \"gaussian\"\nwaist = -1\n")).is_err());
    }
}
