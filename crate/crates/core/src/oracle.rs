//! Brute-force two-photon Fock-space model of the beam-splitter experiment.
//!
//! Each photon is expanded on a discrete single-photon mode space
//! (path × angular sector × polarization × time bin), the creation operators
//! are pushed through the 50:50 beam splitter symbolically, and joint
//! detection probabilities are read off the post-selected amplitudes. Nothing
//! here uses the closed-form coincidence sums of [`crate::engine`]; the two
//! are compared in [`verify`].

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::engine::{
    analytic_visibility, correlation_map, alternative_stripes, AnalyticCase, AngularGrid,
    CorrelationMap, MapOptions, ProjectionPair, TemporalConfig, EPS_ZERO,
};
use crate::error::{ConfigError, Error, Result};
use crate::jones::{Complex, JonesVector, ZERO};
use crate::matrix::Matrix;
use crate::modes::ModeField;

/// Largest sector count accepted by [`verify`].
pub const MAX_ORACLE_SECTORS: usize = 32;

/// Oracle/engine agreement required by [`verify`].
pub const VERIFY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    fn component(self, v: &JonesVector) -> Complex {
        match self {
            Pol::H => v.h,
            Pol::V => v.v,
        }
    }
}

/// One discrete single-photon mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub path: Path,
    pub sector: u32,
    pub pol: Pol,
    pub tbin: u8,
}

impl ModeIndex {
    fn on_path(self, path: Path) -> Self {
        Self { path, ..self }
    }
}

/// Two-photon state in the occupation-number basis.
///
/// Keys are ordered pairs `(m1, m2)` with `m1 <= m2`. For `m1 != m2` the value
/// is the amplitude of `|1_{m1} 1_{m2}>`; for `m1 == m2` it is the amplitude
/// of `|2_{m1}>`, which equals √2 times the coefficient of `(a†)²`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TwoPhotonState {
    amplitudes: BTreeMap<(ModeIndex, ModeIndex), Complex>,
}

fn key(x: ModeIndex, y: ModeIndex) -> (ModeIndex, ModeIndex) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

impl TwoPhotonState {
    /// Builds a state from creation-operator monomial coefficients
    /// `Σ c_{xy} a†_x a†_y |0>`.
    pub fn from_monomials(terms: impl IntoIterator<Item = (ModeIndex, ModeIndex, Complex)>) -> Self {
        let mut poly: BTreeMap<(ModeIndex, ModeIndex), Complex> = BTreeMap::new();
        for (x, y, c) in terms {
            *poly.entry(key(x, y)).or_insert(ZERO) += c;
        }
        let amplitudes = poly
            .into_iter()
            .map(|((x, y), c)| ((x, y), if x == y { c * std::f64::consts::SQRT_2 } else { c }))
            .filter(|(_, a)| *a != ZERO)
            .collect();
        Self { amplitudes }
    }

    fn monomials(&self) -> impl Iterator<Item = (ModeIndex, ModeIndex, Complex)> + '_ {
        self.amplitudes.iter().map(|(&(x, y), &a)| {
            let c = if x == y { a * FRAC_1_SQRT_2 } else { a };
            (x, y, c)
        })
    }

    pub fn amplitude(&self, x: ModeIndex, y: ModeIndex) -> Complex {
        self.amplitudes.get(&key(x, y)).copied().unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(ModeIndex, ModeIndex), &Complex)> {
        self.amplitudes.iter()
    }
}

/// Input state plus the sampled photon norms `Σ_k |e(φ_k)|²`, which rescale
/// oracle probabilities to engine units.
#[derive(Clone, Debug)]
pub struct PreparedInput {
    pub state: TwoPhotonState,
    pub norm_a: f64,
    pub norm_b: f64,
}

fn sample_photon(field: &ModeField, grid: AngularGrid, path: Path, tbin: u8) -> Vec<(ModeIndex, Complex)> {
    let mut out = Vec::with_capacity(2 * grid.n());
    for k in 0..grid.n() {
        let e = field.eval(1.0, grid.center(k));
        for pol in [Pol::H, Pol::V] {
            let mode = ModeIndex { path, sector: k as u32, pol, tbin };
            out.push((mode, pol.component(&e)));
        }
    }
    out
}

/// Product state `a†(e_A) b†(e_B)|0>` sampled at the sector centres.
///
/// Photon A sits in time bin 0; photon B in bin 0 (`In`) or 1 (`Out`).
pub fn prepare_input(
    ea: &ModeField,
    eb: &ModeField,
    grid: AngularGrid,
    temporal: TemporalConfig,
) -> Result<PreparedInput> {
    let tb = match temporal {
        TemporalConfig::In => 0,
        TemporalConfig::Out => 1,
    };
    let a = sample_photon(ea, grid, Path::A, 0);
    let b = sample_photon(eb, grid, Path::B, tb);
    let norm_a: f64 = a.iter().map(|(_, c)| c.norm_sqr()).sum();
    let norm_b: f64 = b.iter().map(|(_, c)| c.norm_sqr()).sum();
    for (name, n) in [("A", norm_a), ("B", norm_b)] {
        if !n.is_finite() || n <= 0.0 {
            return Err(ConfigError::Invalid(format!("photon {name} has zero sampled norm")).into());
        }
    }
    let scale = 1.0 / (norm_a * norm_b).sqrt();
    let terms = a
        .iter()
        .flat_map(|&(x, cx)| b.iter().map(move |&(y, cy)| (x, y, cx * cy * scale)));
    Ok(PreparedInput {
        state: TwoPhotonState::from_monomials(terms),
        norm_a,
        norm_b,
    })
}

/// Substitutes `a† → (c† + d†)/√2`, `b† → (c† − d†)/√2` in every monomial.
pub fn apply_beamsplitter(state: &TwoPhotonState) -> Result<TwoPhotonState> {
    let s = FRAC_1_SQRT_2;
    let image = |m: ModeIndex| -> Result<[(ModeIndex, f64); 2]> {
        match m.path {
            Path::A => Ok([(m.on_path(Path::C), s), (m.on_path(Path::D), s)]),
            Path::B => Ok([(m.on_path(Path::C), s), (m.on_path(Path::D), -s)]),
            _ => Err(Error::Domain(format!("mode {m:?} is not a beam-splitter input"))),
        }
    };
    let mut terms = Vec::with_capacity(4 * state.len());
    for (x, y, c) in state.monomials() {
        for (x2, cx) in image(x)? {
            for (y2, cy) in image(y)? {
                terms.push((x2, y2, c * (cx * cy)));
            }
        }
    }
    Ok(TwoPhotonState::from_monomials(terms))
}

/// Joint C/D detection probabilities per sector pair.
#[derive(Clone, Debug)]
pub struct PostSelection {
    /// Unnormalized probability of one photon in C-sector `i` and one in
    /// D-sector `j`, summed over polarization (or projected) and time bins.
    pub joint: Matrix<f64>,
    /// Probability that both photons left through the same port.
    pub bunching_fraction: f64,
}

/// Keeps the one-photon-per-port outcomes and sums `|amp|²` per sector pair.
pub fn postselect_and_probabilities(
    state: &TwoPhotonState,
    proj: &ProjectionPair,
    n_c: usize,
    n_d: usize,
) -> Result<PostSelection> {
    // (sector_c, tbin_c, pol_c, sector_d, tbin_d, pol_d); pol is None once projected
    type Outcome = (u32, u8, Option<Pol>, u32, u8, Option<Pol>);
    let mut amps: HashMap<Outcome, Complex> = HashMap::new();
    let mut bunched = 0.0;
    let project = |u: Option<JonesVector>, pol: Pol| -> (Option<Pol>, Complex) {
        match u {
            Some(u) => (None, pol.component(&u).conj()),
            None => (Some(pol), Complex::new(1.0, 0.0)),
        }
    };
    for (&(x, y), &a) in state.iter() {
        let (c, d) = match (x.path, y.path) {
            (Path::C, Path::D) => (x, y),
            (Path::D, Path::C) => (y, x),
            (Path::C, Path::C) | (Path::D, Path::D) => {
                bunched += a.norm_sqr();
                continue;
            }
            _ => return Err(Error::Domain("state has photons before the beam splitter".into())),
        };
        if c.sector as usize >= n_c || d.sector as usize >= n_d {
            return Err(Error::GridMismatch(format!(
                "sector ({}, {}) outside {n_c}x{n_d}",
                c.sector, d.sector
            )));
        }
        let (pc, wc) = project(proj.pc(), c.pol);
        let (pd, wd) = project(proj.pd(), d.pol);
        *amps
            .entry((c.sector, c.tbin, pc, d.sector, d.tbin, pd))
            .or_insert(ZERO) += a * wc * wd;
    }
    let mut joint = Matrix::filled(n_c, n_d, 0.0);
    for ((sc, _, _, sd, _, _), a) in amps {
        joint[(sc as usize, sd as usize)] += a.norm_sqr();
    }
    Ok(PostSelection {
        joint,
        bunching_fraction: bunched,
    })
}

/// Runs both temporal configurations through the oracle and returns the
/// result in engine units (`C = joint · N_A · N_B`).
pub fn oracle_map(
    ea: &ModeField,
    eb: &ModeField,
    grid: AngularGrid,
    proj: &ProjectionPair,
) -> Result<CorrelationMap> {
    let run = |t: TemporalConfig| -> Result<Matrix<f64>> {
        let input = prepare_input(ea, eb, grid, t)?;
        let out = apply_beamsplitter(&input.state)?;
        let ps = postselect_and_probabilities(&out, proj, grid.n(), grid.n())?;
        let scale = input.norm_a * input.norm_b;
        Ok(ps.joint.map(|p| p * scale))
    };
    CorrelationMap::from_rates(grid, grid, run(TemporalConfig::In)?, run(TemporalConfig::Out)?, EPS_ZERO)
}

/// Deviation between an engine map and the oracle for one case.
#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub n: usize,
    pub max_abs_c_in: f64,
    pub max_abs_c_out: f64,
    pub max_abs_visibility: f64,
    /// Cells defined in one map but not the other.
    pub definedness_mismatches: usize,
}

impl CaseReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_abs_c_in.max(self.max_abs_c_out).max(self.max_abs_visibility)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.definedness_mismatches == 0 && self.max_deviation() <= tol
    }
}

/// Compares two maps on the same grid.
pub fn compare_maps(case: &str, engine: &CorrelationMap, oracle: &CorrelationMap) -> Result<CaseReport> {
    if engine.c_in.shape() != oracle.c_in.shape() {
        return Err(Error::GridMismatch(format!(
            "{:?} vs {:?}",
            engine.c_in.shape(),
            oracle.c_in.shape()
        )));
    }
    let max_diff = |a: &Matrix<f64>, b: &Matrix<f64>| {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let mut max_v: f64 = 0.0;
    let mut mismatches = 0;
    for (x, y) in engine.visibility.iter().zip(oracle.visibility.iter()) {
        match (x, y) {
            (Some(x), Some(y)) => max_v = max_v.max((x - y).abs()),
            (None, None) => {}
            _ => mismatches += 1,
        }
    }
    Ok(CaseReport {
        case: case.to_string(),
        n: engine.grid_c.n(),
        max_abs_c_in: max_diff(&engine.c_in, &oracle.c_in),
        max_abs_c_out: max_diff(&engine.c_out, &oracle.c_out),
        max_abs_visibility: max_v,
        definedness_mismatches: mismatches,
    })
}

/// Oracle versus engine for one documented case at `n` sectors.
pub fn check_case(case: AnalyticCase, n: usize) -> Result<CaseReport> {
    let grid = AngularGrid::new(n)?;
    let (ea, eb, proj) = case.setup();
    let engine = correlation_map(&ea, &eb, grid, grid, &proj, &MapOptions::default())?;
    let oracle = oracle_map(&ea, &eb, grid, &proj)?;
    compare_maps(case.name(), &engine, &oracle)
}

/// Which stripes formula the oracle supports.
#[derive(Clone, Debug, Serialize)]
pub struct StripesReport {
    pub n: usize,
    /// max |V_oracle − ½cos2(φ_C − φ_D)|
    pub max_dev_half_cos_2delta: f64,
    /// max |V_oracle − ½cos(φ_C − φ_D)|
    pub max_dev_half_cos_delta: f64,
    pub confirmed: String,
}

pub fn stripes_discrepancy(n: usize) -> Result<StripesReport> {
    let grid = AngularGrid::new(n)?;
    let (ea, eb, proj) = AnalyticCase::Stripes.setup();
    let oracle = oracle_map(&ea, &eb, grid, &proj)?;
    let (mut d2, mut d1): (f64, f64) = (0.0, 0.0);
    for (i, j, v) in oracle.visibility.indexed() {
        let v = v.ok_or_else(|| Error::Numerical("undefined stripes cell".into()))?;
        let (pc, pd) = (grid.center(i), grid.center(j));
        d2 = d2.max((v - analytic_visibility(AnalyticCase::Stripes, pc, pd)).abs());
        d1 = d1.max((v - alternative_stripes(pc, pd)).abs());
    }
    let confirmed = if d2 <= VERIFY_TOL && d1 > VERIFY_TOL {
        "V = 1/2 cos 2(phi_C - phi_D)"
    } else if d1 <= VERIFY_TOL && d2 > VERIFY_TOL {
        "V = 1/2 cos(phi_C - phi_D)"
    } else {
        "neither"
    };
    Ok(StripesReport {
        n,
        max_dev_half_cos_2delta: d2,
        max_dev_half_cos_delta: d1,
        confirmed: confirmed.to_string(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub cases: Vec<CaseReport>,
    pub stripes: StripesReport,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed(self.tolerance))
    }
}

/// Runs every documented case at each sector count.
pub fn verify(ns: &[usize]) -> Result<VerifyReport> {
    let mut cases = Vec::new();
    for &n in ns {
        if n > MAX_ORACLE_SECTORS {
            return Err(ConfigError::Invalid(format!(
                "verify supports at most {MAX_ORACLE_SECTORS} sectors, got {n}"
            ))
            .into());
        }
        for case in AnalyticCase::ALL {
            cases.push(check_case(case, n)?);
        }
    }
    let n_stripes = ns.iter().copied().max().unwrap_or(16);
    Ok(VerifyReport {
        tolerance: VERIFY_TOL,
        cases,
        stripes: stripes_discrepancy(n_stripes)?,
    })
}
