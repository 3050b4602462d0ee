//! Coincidence and visibility computation.
//!
//! For photons in modes `e_A`, `e_B` detected at `r_C` (port C) and `r_D`
//! (port D), with polarization directions `u_α` in C and `u_β` in D:
//!
//! ```text
//! direct    = <u_α, e_A(r_C)> <u_β, e_B(r_D)>
//! exchanged = <u_α, e_B(r_C)> <u_β, e_A(r_D)>
//! C_in  = A/4 Σ |direct − exchanged|²
//! C_out = A/4 Σ (|direct|² + |exchanged|²)
//! V     = (C_out − C_in) / C_out
//! ```
//!
//! The sum runs over an orthonormal basis in each unprojected port, and
//! collapses to the single polarizer direction in a projected one.
//! `A = F(r_C) F(r_D)` is the fluence product of the shared radial profile.

mod analytic;
mod map;

pub use analytic::{analytic_visibility, alternative_stripes, AnalyticCase};
pub use map::{
    bucket_visibility, correlation_map, heralded_distribution, AngularGrid, Axis,
    BucketVisibility, CorrelationMap, HeraldedDistribution, MapOptions, Sampling,
};

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Result};
use crate::jones::{inner, JonesVector, PolarizationBasis, UNIT_TOL};
use crate::modes::{fluence, ModeField, Point, RadialProfile};

/// Threshold below which `C_out` is treated as zero and `V` is undefined.
pub const EPS_ZERO: f64 = 1e-12;

/// Relative arrival of the two photons at the beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalConfig {
    /// Temporally indistinguishable (same time bin).
    In,
    /// Temporally distinguishable (disjoint time bins).
    Out,
}

/// Optional polarizers in the output ports.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProjectionPair {
    pc: Option<JonesVector>,
    pd: Option<JonesVector>,
}

impl ProjectionPair {
    pub fn new(pc: Option<JonesVector>, pd: Option<JonesVector>) -> Result<Self, ConfigError> {
        for (port, u) in [('C', pc), ('D', pd)] {
            if let Some(u) = u {
                let n = u.norm_sqr();
                if !u.is_finite() || (n - 1.0).abs() > UNIT_TOL {
                    return Err(ConfigError::NonUnitProjection { port, norm_sqr: n });
                }
            }
        }
        Ok(Self { pc, pd })
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Both ports projected.
    pub fn both(pc: JonesVector, pd: JonesVector) -> Result<Self, ConfigError> {
        Self::new(Some(pc), Some(pd))
    }

    pub fn pc(&self) -> Option<JonesVector> {
        self.pc
    }

    pub fn pd(&self) -> Option<JonesVector> {
        self.pd
    }

    pub fn is_none(&self) -> bool {
        self.pc.is_none() && self.pd.is_none()
    }

    fn directions(u: Option<JonesVector>, basis: &PolarizationBasis) -> Vec<JonesVector> {
        match u {
            Some(u) => vec![u],
            None => basis.vectors().to_vec(),
        }
    }
}

/// `C_in` and `C_out` at one pair of points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coincidences {
    pub c_in: f64,
    pub c_out: f64,
}

impl Coincidences {
    pub fn get(&self, t: TemporalConfig) -> f64 {
        match t {
            TemporalConfig::In => self.c_in,
            TemporalConfig::Out => self.c_out,
        }
    }

    /// `(C_out − C_in)/C_out`, or `None` when `C_out <= threshold`.
    pub fn visibility(&self, threshold: f64) -> Option<f64> {
        if self.c_out > threshold {
            Some((self.c_out - self.c_in) / self.c_out)
        } else {
            None
        }
    }
}

/// Picks the radial profile shared by the two photons.
pub fn shared_profile(a: &ModeField, b: &ModeField) -> Result<RadialProfile, ConfigError> {
    match (a.radial_envelope(), b.radial_envelope()) {
        (None, None) => Ok(RadialProfile::Unit),
        (Some(p), None) | (None, Some(p)) => Ok(*p),
        (Some(p), Some(q)) if p == q => Ok(*p),
        (Some(p), Some(q)) => Err(ConfigError::Invalid(format!(
            "photons must share a radial profile, got {p:?} and {q:?}"
        ))),
    }
}

/// Coincidence evaluator with a fixed summation basis for unprojected ports.
#[derive(Clone, Copy, Debug, Default)]
pub struct Engine {
    basis: PolarizationBasis,
}

impl Engine {
    pub fn new(basis: PolarizationBasis) -> Self {
        Self { basis }
    }

    pub fn basis(&self) -> &PolarizationBasis {
        &self.basis
    }

    /// Both coincidence rates from precomputed field values, with fluence
    /// product `a`.
    pub fn from_values(
        &self,
        a_at_c: &JonesVector,
        b_at_d: &JonesVector,
        b_at_c: &JonesVector,
        a_at_d: &JonesVector,
        proj: &ProjectionPair,
        a: f64,
    ) -> Coincidences {
        let us = ProjectionPair::directions(proj.pc, &self.basis);
        let vs = ProjectionPair::directions(proj.pd, &self.basis);
        let mut c_in = 0.0;
        let mut c_out = 0.0;
        for u in &us {
            let ac = inner(u, a_at_c);
            let bc = inner(u, b_at_c);
            for v in &vs {
                let direct = ac * inner(v, b_at_d);
                let exchanged = bc * inner(v, a_at_d);
                c_in += (direct - exchanged).norm_sqr();
                c_out += direct.norm_sqr() + exchanged.norm_sqr();
            }
        }
        Coincidences {
            c_in: 0.25 * a * c_in,
            c_out: 0.25 * a * c_out,
        }
    }

    pub fn coincidences(
        &self,
        ea: &ModeField,
        eb: &ModeField,
        rc: Point,
        rd: Point,
        proj: &ProjectionPair,
    ) -> Result<Coincidences> {
        let profile = shared_profile(ea, eb)?;
        let a = fluence(&profile, rc.r)? * fluence(&profile, rd.r)?;
        Ok(self.from_values(&ea.at(rc), &eb.at(rd), &eb.at(rc), &ea.at(rd), proj, a))
    }
}

/// `C_in` at one pair of points, summed over the {H, V} basis.
pub fn coincidence_in(
    ea: &ModeField,
    eb: &ModeField,
    rc: Point,
    rd: Point,
    proj: &ProjectionPair,
) -> Result<f64> {
    Ok(Engine::default().coincidences(ea, eb, rc, rd, proj)?.c_in)
}

/// `C_out` at one pair of points, summed over the {H, V} basis.
pub fn coincidence_out(
    ea: &ModeField,
    eb: &ModeField,
    rc: Point,
    rd: Point,
    proj: &ProjectionPair,
) -> Result<f64> {
    Ok(Engine::default().coincidences(ea, eb, rc, rd, proj)?.c_out)
}

/// Pointwise visibility; `None` where `C_out <= EPS_ZERO`.
///
/// Unit fields at unit fluence have `C_out <= 1/2`, so the absolute
/// threshold here matches the map-level relative one up to that factor.
pub fn visibility(
    ea: &ModeField,
    eb: &ModeField,
    rc: Point,
    rd: Point,
    proj: &ProjectionPair,
) -> Result<Option<f64>> {
    Ok(Engine::default()
        .coincidences(ea, eb, rc, rd, proj)?
        .visibility(EPS_ZERO))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jones::{standard_state, Complex, Polarization};
    use crate::modes::{make_named_mode, NamedMode};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn rad() -> ModeField {
        make_named_mode(NamedMode::RadialVv, 0)
    }
    fn pi() -> ModeField {
        make_named_mode(NamedMode::PiVv, 0)
    }
    fn oam() -> ModeField {
        make_named_mode(NamedMode::OamCircular, 1)
    }
    fn p(phi: f64) -> Point {
        Point::at_angle(phi)
    }
    fn st(x: Polarization) -> JonesVector {
        standard_state(x)
    }

    #[test]
    fn identical_modes_never_coincide_in() {
        let none = ProjectionPair::none();
        for (a, b) in [(0.1, 2.0), (1.3, -0.4), (3.0, 3.0)] {
            assert!(coincidence_in(&oam(), &oam(), p(a), p(b), &none).unwrap() < 1e-15);
            assert!(coincidence_in(&rad(), &rad(), p(a), p(b), &none).unwrap() < 1e-15);
        }
    }

    #[test]
    fn rad_pi_unprojected() {
        let none = ProjectionPair::none();
        assert!(coincidence_in(&rad(), &pi(), p(0.0), p(0.0), &none).unwrap().abs() < 1e-15);
        for (a, b) in [(0.0, 0.0), (0.7, 2.1), (-1.0, 4.0)] {
            let out = coincidence_out(&rad(), &pi(), p(a), p(b), &none).unwrap();
            assert_abs_diff_eq!(out, 0.5, epsilon = 1e-15);
            let cin = coincidence_in(&rad(), &pi(), p(a), p(b), &none).unwrap();
            let expected = 0.5 * (1.0 - (2.0 * a).cos() * (2.0 * b).cos());
            assert_abs_diff_eq!(cin, expected, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(
            visibility(&rad(), &pi(), p(0.0), p(0.0), &none).unwrap().unwrap(),
            1.0,
            epsilon = 1e-15
        );
        for b in [0.0, 0.3, 2.0] {
            let v = visibility(&rad(), &pi(), p(FRAC_PI_4), p(b), &none).unwrap().unwrap();
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn rad_oam_unprojected() {
        // Unit-norm OAM mode: C_out = A/2 and C_in = (A/4)(2 − cos 2Δ).
        let none = ProjectionPair::none();
        let cin = coincidence_in(&rad(), &oam(), p(0.0), p(0.0), &none).unwrap();
        assert_abs_diff_eq!(cin, 0.25, epsilon = 1e-15);
        for (a, b) in [(0.0, 0.0), (0.4, 1.9), (2.5, -0.3)] {
            let out = coincidence_out(&rad(), &oam(), p(a), p(b), &none).unwrap();
            assert_abs_diff_eq!(out, 0.5, epsilon = 1e-15);
        }
        // With photon B carrying |e|² = 2 the values are A and (A/2)(2 − cos 2Δ).
        let oam2 = oam().times(Complex::new(std::f64::consts::SQRT_2, 0.0));
        let c = Engine::default()
            .coincidences(&rad(), &oam2, p(0.0), p(0.0), &none)
            .unwrap();
        assert_abs_diff_eq!(c.c_out, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.c_in, 0.5, epsilon = 1e-14);
        for phi in [0.0, 1.0, 2.2] {
            let v = visibility(&rad(), &oam(), p(phi), p(phi), &none).unwrap().unwrap();
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn rad_pi_hh_projection() {
        let hh = ProjectionPair::both(st(Polarization::H), st(Polarization::H)).unwrap();
        let out = coincidence_out(&rad(), &pi(), p(0.0), p(0.0), &hh).unwrap();
        assert_abs_diff_eq!(out, 0.5, epsilon = 1e-15);
        let v = visibility(&rad(), &pi(), p(FRAC_PI_2), p(0.3), &hh).unwrap();
        assert!(v.is_none(), "C_out vanishes at φ_C = π/2");
    }

    #[test]
    fn projection_must_be_unit() {
        assert!(ProjectionPair::new(Some(JonesVector::real(1.0, 1.0)), None).is_err());
    }

    #[test]
    fn mismatched_profiles_rejected() {
        let a = rad().with_envelope(RadialProfile::Gaussian { waist: 1.0 });
        let b = pi().with_envelope(RadialProfile::Gaussian { waist: 2.0 });
        assert!(coincidence_in(&a, &b, p(0.0), p(0.0), &ProjectionPair::none()).is_err());
    }

    #[test]
    fn fluence_enters_as_product() {
        let prof = RadialProfile::Gaussian { waist: 1.0 };
        let a = rad().with_envelope(prof);
        let c = coincidence_out(&a, &pi(), Point::new(0.5, 0.0), Point::new(1.0, 0.0), &ProjectionPair::none()).unwrap();
        let expected = 0.5 * fluence(&prof, 0.5).unwrap() * fluence(&prof, 1.0).unwrap();
        assert_abs_diff_eq!(c, expected, epsilon = 1e-15);
    }
}
