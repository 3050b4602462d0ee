//! Jones-calculus primitives.
//!
//! All inner products in this crate conjugate the *first* argument:
//! `inner(a, b) = conj(a_h) b_h + conj(a_v) b_v`. Coincidence rates only
//! ever use `|inner(u, e)|²`-type quantities, so any consistent choice gives
//! the same physics; this one makes `inner(u, e)` the amplitude for a photon
//! in state `e` to pass a polarizer aligned with `u`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Complex amplitude type used throughout.
pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

/// Tolerance used to accept a vector as unit norm or a pair as orthonormal.
pub const UNIT_TOL: f64 = 1e-12;

/// Transverse polarization amplitude `(H, V)` at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JonesVector {
    pub h: Complex,
    pub v: Complex,
}

impl JonesVector {
    pub const fn new(h: Complex, v: Complex) -> Self {
        Self { h, v }
    }

    pub fn real(h: f64, v: f64) -> Self {
        Self::new(Complex::new(h, 0.0), Complex::new(v, 0.0))
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.v.is_finite()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= UNIT_TOL
    }

    /// Returns the vector scaled to unit norm, or `None` for a (near-)zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if !n.is_finite() || n < 1e-300 {
            return None;
        }
        Some(*self * (1.0 / n))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.h.conj(), self.v.conj())
    }

    /// The orthogonal complement `(-conj(v), conj(h))`.
    pub fn orthogonal(&self) -> Self {
        Self::new(-self.v.conj(), self.h.conj())
    }

    pub fn scale(&self, c: Complex) -> Self {
        Self::new(self.h * c, self.v * c)
    }
}

impl Add for JonesVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.h + rhs.h, self.v + rhs.v)
    }
}

impl Sub for JonesVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.h - rhs.h, self.v - rhs.v)
    }
}

impl Neg for JonesVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.h, -self.v)
    }
}

impl Mul<Complex> for JonesVector {
    type Output = Self;
    fn mul(self, rhs: Complex) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for JonesVector {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.h * rhs, self.v * rhs)
    }
}

/// Sesquilinear inner product, conjugate on the first argument.
pub fn inner(a: &JonesVector, b: &JonesVector) -> Complex {
    a.h.conj() * b.h + a.v.conj() * b.v
}

/// The six standard polarization states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    D,
    A,
    L,
    R,
}

impl Polarization {
    pub const ALL: [Polarization; 6] = [
        Polarization::H,
        Polarization::V,
        Polarization::D,
        Polarization::A,
        Polarization::L,
        Polarization::R,
    ];
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Polarization::H => "H",
            Polarization::V => "V",
            Polarization::D => "D",
            Polarization::A => "A",
            Polarization::L => "L",
            Polarization::R => "R",
        };
        f.write_str(s)
    }
}

impl FromStr for Polarization {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            "D" | "d" => Ok(Polarization::D),
            "A" | "a" => Ok(Polarization::A),
            "L" | "l" => Ok(Polarization::L),
            "R" | "r" => Ok(Polarization::R),
            other => Err(ConfigError::UnknownName {
                kind: "polarization state",
                name: other.to_string(),
            }),
        }
    }
}

/// Jones vector of a standard state.
///
/// `L = (1, i)/√2`, i.e. `e_H + e^{iπ/2} e_V`; `R` is its orthogonal partner.
pub fn standard_state(p: Polarization) -> JonesVector {
    let s = FRAC_1_SQRT_2;
    match p {
        Polarization::H => JonesVector::real(1.0, 0.0),
        Polarization::V => JonesVector::real(0.0, 1.0),
        Polarization::D => JonesVector::real(s, s),
        Polarization::A => JonesVector::real(s, -s),
        Polarization::L => JonesVector::new(Complex::new(s, 0.0), Complex::new(0.0, s)),
        Polarization::R => JonesVector::new(Complex::new(s, 0.0), Complex::new(0.0, -s)),
    }
}

/// An orthonormal pair of polarization states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationBasis {
    u1: JonesVector,
    u2: JonesVector,
}

impl PolarizationBasis {
    pub fn new(u1: JonesVector, u2: JonesVector) -> Result<Self, ConfigError> {
        let ok = (inner(&u1, &u1).re - 1.0).abs() <= UNIT_TOL
            && (inner(&u2, &u2).re - 1.0).abs() <= UNIT_TOL
            && inner(&u1, &u2).norm() <= UNIT_TOL;
        if ok {
            Ok(Self { u1, u2 })
        } else {
            Err(ConfigError::NotOrthonormal)
        }
    }

    /// Completes a single unit vector into a basis with its orthogonal complement.
    pub fn from_first(u1: JonesVector) -> Result<Self, ConfigError> {
        Self::new(u1, u1.orthogonal())
    }

    pub fn hv() -> Self {
        Self {
            u1: standard_state(Polarization::H),
            u2: standard_state(Polarization::V),
        }
    }

    pub fn da() -> Self {
        Self {
            u1: standard_state(Polarization::D),
            u2: standard_state(Polarization::A),
        }
    }

    pub fn lr() -> Self {
        Self {
            u1: standard_state(Polarization::L),
            u2: standard_state(Polarization::R),
        }
    }

    pub fn vectors(&self) -> [JonesVector; 2] {
        [self.u1, self.u2]
    }

    pub fn u1(&self) -> JonesVector {
        self.u1
    }

    pub fn u2(&self) -> JonesVector {
        self.u2
    }
}

impl Default for PolarizationBasis {
    fn default() -> Self {
        Self::hv()
    }
}

/// 2×2 complex Jones matrix, row-major `[[m00, m01], [m10, m11]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesMatrix(pub [[Complex; 2]; 2]);

impl JonesMatrix {
    pub fn identity() -> Self {
        JonesMatrix([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn apply(&self, x: &JonesVector) -> JonesVector {
        let m = &self.0;
        JonesVector::new(m[0][0] * x.h + m[0][1] * x.v, m[1][0] * x.h + m[1][1] * x.v)
    }

    pub fn mul(&self, rhs: &JonesMatrix) -> JonesMatrix {
        let a = &self.0;
        let b = &rhs.0;
        let mut c = [[ZERO; 2]; 2];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        JonesMatrix(c)
    }

    /// Linear retarder with fast axis at `angle` and retardance `delta`.
    ///
    /// Symmetric-phase form `cos(δ/2) I − i sin(δ/2) [[cos2θ, sin2θ], [sin2θ, −cos2θ]]`.
    pub fn retarder(angle: f64, delta: f64) -> Self {
        let (s2, c2) = (2.0 * angle).sin_cos();
        let (sh, ch) = (0.5 * delta).sin_cos();
        let a = Complex::new(ch, 0.0);
        let b = Complex::new(0.0, -sh);
        JonesMatrix([[a + b * c2, b * s2], [b * s2, a - b * c2]])
    }

    /// Ideal linear polarizer with transmission axis at `angle`.
    pub fn polarizer(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let r = |x: f64| Complex::new(x, 0.0);
        JonesMatrix([[r(c * c), r(c * s)], [r(c * s), r(s * s)]])
    }
}
