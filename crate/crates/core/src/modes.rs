//! Spatially varying polarization modes `e(r, φ)`.
//!
//! Fields are evaluated at a single detection plane. A [`ModeField`] carries
//! the polarization part only; its optional [`RadialProfile`] is kept
//! separately and enters coincidence rates through the fluence factor.
//!
//! Preparation conventions (uniform input state → element list):
//!
//! | mode           | input | elements                    |
//! |----------------|-------|-----------------------------|
//! | `radial_vv`    | H     | q-plate (q = ½)             |
//! | `pi_vv`        | H     | q-plate (q = ½), HWP(0)     |
//! | `oam_circular` | L     | q-plate (q = l/2), HWP(0)   |
//!
//! Each pipeline reproduces the closed form up to one global phase.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};
use crate::jones::{inner, standard_state, Complex, JonesMatrix, JonesVector, Polarization};

/// Transverse position in polar coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub r: f64,
    pub phi: f64,
}

impl Point {
    pub fn new(r: f64, phi: f64) -> Self {
        Self { r, phi }
    }

    /// A point at the reference radius used for azimuth-only fields.
    pub fn at_angle(phi: f64) -> Self {
        Self { r: 1.0, phi }
    }
}

/// Radial amplitude envelope at the detection plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfile {
    #[default]
    Unit,
    Gaussian { waist: f64 },
    LgRing { waist: f64, oam_abs: u32 },
}

impl RadialProfile {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            RadialProfile::Unit => Ok(()),
            RadialProfile::Gaussian { waist } | RadialProfile::LgRing { waist, .. } => {
                if waist.is_finite() && waist > 0.0 {
                    Ok(())
                } else {
                    Err(ConfigError::Invalid(format!("waist must be positive, got {waist}")))
                }
            }
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, RadialProfile::Unit)
    }

    /// Radius of the fluence maximum.
    pub fn peak_radius(&self) -> f64 {
        match *self {
            RadialProfile::Unit | RadialProfile::Gaussian { .. } => 0.0,
            RadialProfile::LgRing { waist, oam_abs } => waist * (oam_abs as f64 / 2.0).sqrt(),
        }
    }

    /// Radius beyond which the fluence is negligible (< e^-18 of peak).
    pub fn extent(&self) -> f64 {
        match *self {
            RadialProfile::Unit => 1.0,
            RadialProfile::Gaussian { waist } => 3.0 * waist,
            RadialProfile::LgRing { waist, oam_abs } => {
                waist * (3.0 + (oam_abs as f64 / 2.0).sqrt())
            }
        }
    }
}

/// Time-integrated squared radial profile, normalized to a peak value of 1.
///
/// Gaussian: `exp(−2r²/w²)`. LG ring: `(2r²/w²)^|l| exp(−2r²/w²)` divided by
/// its maximum `|l|^|l| e^{−|l|}`.
pub fn fluence(profile: &RadialProfile, r: f64) -> Result<f64> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("fluence requires finite r >= 0, got {r}")));
    }
    Ok(match *profile {
        RadialProfile::Unit => 1.0,
        RadialProfile::Gaussian { waist } => (-2.0 * r * r / (waist * waist)).exp(),
        RadialProfile::LgRing { waist, oam_abs } => {
            let x = 2.0 * r * r / (waist * waist);
            if oam_abs == 0 {
                (-x).exp()
            } else {
                let l = oam_abs as f64;
                // (x/l)^l e^{l - x}
                ((l * (x / l).ln()) + l - x).exp()
            }
        }
    })
}

type EvalFn = dyn Fn(f64, f64) -> JonesVector + Send + Sync;

/// A spatially varying polarization field.
#[derive(Clone)]
pub struct ModeField {
    eval: Arc<EvalFn>,
    label: String,
    radial_envelope: Option<RadialProfile>,
}

impl fmt::Debug for ModeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModeField")
            .field("label", &self.label)
            .field("radial_envelope", &self.radial_envelope)
            .finish()
    }
}

impl ModeField {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> JonesVector + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            label: label.into(),
            radial_envelope: None,
        }
    }

    pub fn uniform(label: impl Into<String>, state: JonesVector) -> Self {
        Self::from_fn(label, move |_, _| state)
    }

    pub fn uniform_state(p: Polarization) -> Self {
        Self::uniform(format!("uniform_{p}"), standard_state(p))
    }

    pub fn with_envelope(mut self, profile: RadialProfile) -> Self {
        self.radial_envelope = Some(profile);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn eval(&self, r: f64, phi: f64) -> JonesVector {
        (self.eval)(r, phi)
    }

    pub fn at(&self, p: Point) -> JonesVector {
        (self.eval)(p.r, p.phi)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn radial_envelope(&self) -> Option<&RadialProfile> {
        self.radial_envelope.as_ref()
    }

    /// Multiplies the whole field by a constant complex factor.
    pub fn times(&self, c: Complex) -> ModeField {
        let inner_fn = Arc::clone(&self.eval);
        ModeField {
            eval: Arc::new(move |r, phi| inner_fn(r, phi) * c),
            label: self.label.clone(),
            radial_envelope: self.radial_envelope,
        }
    }

    /// Largest `| |e|² − 1 |` over the sampled points.
    pub fn max_norm_defect(&self, r: f64, phis: &[f64]) -> f64 {
        phis.iter()
            .map(|&phi| (self.eval(r, phi).norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// The closed-form mode families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedMode {
    RadialVv,
    PiVv,
    OamCircular,
}

impl fmt::Display for NamedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamedMode::RadialVv => "radial_vv",
            NamedMode::PiVv => "pi_vv",
            NamedMode::OamCircular => "oam_circular",
        })
    }
}

impl FromStr for NamedMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "radial_vv" => Ok(NamedMode::RadialVv),
            "pi_vv" => Ok(NamedMode::PiVv),
            "oam_circular" => Ok(NamedMode::OamCircular),
            other => Err(ConfigError::UnknownName {
                kind: "mode",
                name: other.to_string(),
            }),
        }
    }
}

/// Builds a closed-form mode. `l` is only used by `oam_circular`.
///
/// * `radial_vv`: `(cos φ, sin φ)`
/// * `pi_vv`: `(cos φ, −sin φ)`
/// * `oam_circular`: `(1, i) e^{ilφ}/√2`
pub fn make_named_mode(name: NamedMode, l: i32) -> ModeField {
    match name {
        NamedMode::RadialVv => ModeField::from_fn("radial_vv", |_, phi| {
            let (s, c) = phi.sin_cos();
            JonesVector::real(c, s)
        }),
        NamedMode::PiVv => ModeField::from_fn("pi_vv", |_, phi| {
            let (s, c) = phi.sin_cos();
            JonesVector::real(c, -s)
        }),
        NamedMode::OamCircular => {
            let lf = l as f64;
            ModeField::from_fn(format!("oam_circular_l{l}"), move |_, phi| {
                let ph = Complex::from_polar(FRAC_1_SQRT_2, lf * phi);
                JonesVector::new(ph, ph * Complex::new(0.0, 1.0))
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Hwp,
    Qwp,
    Polarizer,
    Qplate,
}

/// A waveplate, polarizer or q-plate.
///
/// For a q-plate the local fast axis sits at `q φ + angle` and `delta` is
/// its retardance (π when tuned).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpticalElement {
    pub kind: ElementKind,
    pub angle: f64,
    pub q: f64,
    pub delta: f64,
}

impl OpticalElement {
    pub fn hwp(angle: f64) -> Self {
        Self { kind: ElementKind::Hwp, angle, q: 0.0, delta: PI }
    }

    pub fn qwp(angle: f64) -> Self {
        Self { kind: ElementKind::Qwp, angle, q: 0.0, delta: PI / 2.0 }
    }

    pub fn polarizer(angle: f64) -> Self {
        Self { kind: ElementKind::Polarizer, angle, q: 0.0, delta: 0.0 }
    }

    pub fn qplate(q: f64) -> Self {
        Self { kind: ElementKind::Qplate, angle: 0.0, q, delta: PI }
    }

    pub fn qplate_with(q: f64, angle: f64, delta: f64) -> Self {
        Self { kind: ElementKind::Qplate, angle, q, delta }
    }

    /// Jones matrix at azimuth `phi` (only the q-plate depends on it).
    pub fn matrix_at(&self, phi: f64) -> JonesMatrix {
        match self.kind {
            ElementKind::Hwp => JonesMatrix::retarder(self.angle, PI),
            ElementKind::Qwp => JonesMatrix::retarder(self.angle, PI / 2.0),
            ElementKind::Polarizer => JonesMatrix::polarizer(self.angle),
            ElementKind::Qplate => JonesMatrix::retarder(self.q * phi + self.angle, self.delta),
        }
    }
}

/// Pointwise Jones-matrix multiplication of a field by an element.
pub fn apply_element(field: &ModeField, elem: OpticalElement) -> ModeField {
    let prev = Arc::clone(&field.eval);
    let label = format!("{}|{:?}", field.label, elem.kind).to_lowercase();
    match elem.kind {
        ElementKind::Qplate => ModeField {
            eval: Arc::new(move |r, phi| elem.matrix_at(phi).apply(&prev(r, phi))),
            label,
            radial_envelope: field.radial_envelope,
        },
        _ => {
            let m = elem.matrix_at(0.0);
            ModeField {
                eval: Arc::new(move |r, phi| m.apply(&prev(r, phi))),
                label,
                radial_envelope: field.radial_envelope,
            }
        }
    }
}

/// Runs a uniform input state through an ordered element list.
pub fn run_pipeline(input: JonesVector, elements: &[OpticalElement]) -> ModeField {
    elements
        .iter()
        .fold(ModeField::uniform("pipeline", input), |f, e| apply_element(&f, *e))
}

/// The documented preparation for each named mode (see module docs).
pub fn preparation_pipeline(name: NamedMode, l: i32) -> (JonesVector, Vec<OpticalElement>) {
    match name {
        NamedMode::RadialVv => (standard_state(Polarization::H), vec![OpticalElement::qplate(0.5)]),
        NamedMode::PiVv => (
            standard_state(Polarization::H),
            vec![OpticalElement::qplate(0.5), OpticalElement::hwp(0.0)],
        ),
        NamedMode::OamCircular => (
            standard_state(Polarization::L),
            vec![OpticalElement::qplate(l as f64 / 2.0), OpticalElement::hwp(0.0)],
        ),
    }
}

/// Best-fit global phase `e^{iθ}` such that `a·e^{iθ} ≈ b` on the samples.
pub fn best_global_phase(a: &ModeField, b: &ModeField, r: f64, phis: &[f64]) -> Complex {
    let s: Complex = phis
        .iter()
        .map(|&phi| inner(&a.eval(r, phi), &b.eval(r, phi)))
        .sum();
    if s.norm() < 1e-300 {
        Complex::new(1.0, 0.0)
    } else {
        s / s.norm()
    }
}

/// Max pointwise `|a e^{iθ} − b|` after aligning the global phase.
pub fn max_deviation_up_to_phase(a: &ModeField, b: &ModeField, r: f64, phis: &[f64]) -> f64 {
    let ph = best_global_phase(a, b, r, phis);
    phis.iter()
        .map(|&phi| (a.eval(r, phi) * ph - b.eval(r, phi)).norm())
        .fold(0.0, f64::max)
}

/// `n` uniformly spaced angles `2πk/n`.
pub fn phi_samples(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}
