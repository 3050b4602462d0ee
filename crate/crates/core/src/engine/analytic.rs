//! Closed-form visibility maps for the documented mode/projection pairs.
//!
//! These serve as test oracles for [`correlation_map`](super::correlation_map).
//! Where a formula is 0/0 the value is `NaN`.

use std::fmt;
use std::str::FromStr;

use super::ProjectionPair;
use crate::error::ConfigError;
use crate::jones::{standard_state, Polarization};
use crate::modes::{make_named_mode, ModeField, NamedMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnalyticCase {
    /// radial VV / π-VV, no projection: `cos2φ_C cos2φ_D`.
    Checkerboard,
    /// radial VV / OAM l=1, no projection: `½ cos2(φ_C − φ_D)`.
    Stripes,
    /// radial VV / OAM l=1, H-H projection.
    BowtieHH,
    /// radial VV / OAM l=1, H-A projection.
    TriangleHA,
    RadPiHH,
    RadPiHV,
    RadPiHA,
    /// radial VV / OAM l=1, H-V projection.
    OamHV,
}

impl AnalyticCase {
    pub const ALL: [AnalyticCase; 8] = [
        AnalyticCase::Checkerboard,
        AnalyticCase::Stripes,
        AnalyticCase::BowtieHH,
        AnalyticCase::TriangleHA,
        AnalyticCase::RadPiHH,
        AnalyticCase::RadPiHV,
        AnalyticCase::RadPiHA,
        AnalyticCase::OamHV,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticCase::Checkerboard => "checkerboard",
            AnalyticCase::Stripes => "stripes",
            AnalyticCase::BowtieHH => "bowtie_HH",
            AnalyticCase::TriangleHA => "triangle_HA",
            AnalyticCase::RadPiHH => "rad_pi_HH",
            AnalyticCase::RadPiHV => "rad_pi_HV",
            AnalyticCase::RadPiHA => "rad_pi_HA",
            AnalyticCase::OamHV => "oam_HV",
        }
    }

    /// Input modes and projections realizing this case.
    pub fn setup(&self) -> (ModeField, ModeField, ProjectionPair) {
        let rad = make_named_mode(NamedMode::RadialVv, 0);
        let pi = make_named_mode(NamedMode::PiVv, 0);
        let oam = make_named_mode(NamedMode::OamCircular, 1);
        let proj = |c: Polarization, d: Polarization| {
            ProjectionPair::both(standard_state(c), standard_state(d))
                .expect("standard states are unit vectors")
        };
        use Polarization::{A, H, V};
        match self {
            AnalyticCase::Checkerboard => (rad, pi, ProjectionPair::none()),
            AnalyticCase::Stripes => (rad, oam, ProjectionPair::none()),
            AnalyticCase::BowtieHH => (rad, oam, proj(H, H)),
            AnalyticCase::TriangleHA => (rad, oam, proj(H, A)),
            AnalyticCase::RadPiHH => (rad, pi, proj(H, H)),
            AnalyticCase::RadPiHV => (rad, pi, proj(H, V)),
            AnalyticCase::RadPiHA => (rad, pi, proj(H, A)),
            AnalyticCase::OamHV => (rad, oam, proj(H, V)),
        }
    }
}

impl fmt::Display for AnalyticCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnalyticCase {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AnalyticCase::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| ConfigError::UnknownName {
                kind: "analytic case",
                name: s.to_string(),
            })
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den.abs() <= 1e-300 {
        f64::NAN
    } else {
        num / den
    }
}

/// Closed-form visibility for `case` at `(φ_C, φ_D)`.
pub fn analytic_visibility(case: AnalyticCase, phi_c: f64, phi_d: f64) -> f64 {
    let cc = phi_c.cos();
    let (sd, cd) = phi_d.sin_cos();
    match case {
        AnalyticCase::Checkerboard => (2.0 * phi_c).cos() * (2.0 * phi_d).cos(),
        AnalyticCase::Stripes => 0.5 * (2.0 * (phi_c - phi_d)).cos(),
        AnalyticCase::BowtieHH => ratio(
            2.0 * cc * cd * (phi_c - phi_d).cos(),
            cc * cc + cd * cd,
        ),
        AnalyticCase::TriangleHA => ratio(
            (2.0 * phi_d).cos() - (2.0 * phi_c).sin() + (2.0 * (phi_c - phi_d)).cos(),
            2.0 + (2.0 * phi_c).cos() - (2.0 * phi_d).sin(),
        ),
        AnalyticCase::RadPiHH => 1.0,
        AnalyticCase::RadPiHV => -1.0,
        AnalyticCase::RadPiHA => (2.0 * phi_d).cos(),
        AnalyticCase::OamHV => ratio(
            2.0 * cc * sd * (phi_c - phi_d).sin(),
            cc * cc + sd * sd,
        ),
    }
}

/// The alternative stripes formula `½ cos(φ_C − φ_D)` (period 2π), kept for
/// the discrepancy report.
pub fn alternative_stripes(phi_c: f64, phi_d: f64) -> f64 {
    0.5 * (phi_c - phi_d).cos()
}
