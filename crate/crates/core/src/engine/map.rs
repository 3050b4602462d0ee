use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{shared_profile, Engine, ProjectionPair, TemporalConfig, EPS_ZERO};
use crate::error::{ConfigError, Error, Result};
use crate::matrix::Matrix;
use crate::modes::{fluence, ModeField, RadialProfile};

/// `n` azimuthal sectors; sector `k` is centred on `2πk/n` and spans
/// `[2π(k − ½)/n, 2π(k + ½)/n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngularGrid {
    n: usize,
}

impl AngularGrid {
    pub fn new(n: usize) -> Result<Self, ConfigError> {
        if n < 2 {
            return Err(ConfigError::Invalid(format!("angular grid needs n >= 2, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.center(k)).collect()
    }

    /// Sector containing azimuth `phi` (any real value).
    pub fn sector_of(&self, phi: f64) -> usize {
        let x = (phi / self.width()).round();
        (x.rem_euclid(self.n as f64) as usize) % self.n
    }
}

/// How a map cell is valued.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Value at the sector centres.
    Center,
    /// Mean over an `m × m` midpoint grid inside the sector pair.
    SectorAverage(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct MapOptions {
    pub sampling: Sampling,
    pub engine: Engine,
    /// Reference radius for unit radial profiles.
    pub radius: f64,
    /// Midpoint nodes for radial integration of non-unit profiles.
    pub radial_nodes: usize,
    pub eps_zero: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            sampling: Sampling::Center,
            engine: Engine::default(),
            radius: 1.0,
            radial_nodes: 48,
            eps_zero: EPS_ZERO,
        }
    }
}

/// `C_in`, `C_out` and visibility over port-C sectors (rows) × port-D
/// sectors (columns).
///
/// A visibility cell is `None` iff its `C_out <= eps_zero · max(C_out)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMap {
    pub grid_c: AngularGrid,
    pub grid_d: AngularGrid,
    pub c_in: Matrix<f64>,
    pub c_out: Matrix<f64>,
    pub visibility: Matrix<Option<f64>>,
    pub eps_zero: f64,
}

impl CorrelationMap {
    /// Assembles a map and derives the visibility from the two rate matrices.
    pub fn from_rates(
        grid_c: AngularGrid,
        grid_d: AngularGrid,
        c_in: Matrix<f64>,
        c_out: Matrix<f64>,
        eps_zero: f64,
    ) -> Result<Self> {
        let shape = (grid_c.n(), grid_d.n());
        if c_in.shape() != shape || c_out.shape() != shape {
            return Err(Error::GridMismatch(format!(
                "rates {:?}/{:?} vs grid {:?}",
                c_in.shape(),
                c_out.shape(),
                shape
            )));
        }
        let max_out = c_out.iter().cloned().fold(0.0, f64::max);
        let threshold = eps_zero * max_out;
        let visibility = Matrix::from_fn(shape.0, shape.1, |i, j| {
            let out = c_out[(i, j)];
            if max_out > 0.0 && out > threshold {
                Some((out - c_in[(i, j)]) / out)
            } else {
                None
            }
        });
        Ok(Self {
            grid_c,
            grid_d,
            c_in,
            c_out,
            visibility,
            eps_zero,
        })
    }

    pub fn rates(&self, t: TemporalConfig) -> &Matrix<f64> {
        match t {
            TemporalConfig::In => &self.c_in,
            TemporalConfig::Out => &self.c_out,
        }
    }

    pub fn defined_cells(&self) -> usize {
        self.visibility.iter().filter(|v| v.is_some()).count()
    }
}

struct RadialQuadrature {
    nodes: Vec<(f64, f64)>,
}

impl RadialQuadrature {
    /// Midpoint rule on `[0, extent]` with weights `F(r) r dr`.
    fn new(profile: &RadialProfile, n: usize) -> Result<Self> {
        let extent = profile.extent();
        let dr = extent / n as f64;
        let nodes = (0..n)
            .map(|i| {
                let r = (i as f64 + 0.5) * dr;
                fluence(profile, r).map(|f| (r, f * r * dr))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes })
    }
}

/// Evaluates `C_in`, `C_out` and visibility on the product of two grids.
///
/// Unit radial profiles are evaluated at `opts.radius`; other profiles are
/// integrated over both radial coordinates.
pub fn correlation_map(
    ea: &ModeField,
    eb: &ModeField,
    grid_c: AngularGrid,
    grid_d: AngularGrid,
    proj: &ProjectionPair,
    opts: &MapOptions,
) -> Result<CorrelationMap> {
    let profile = shared_profile(ea, eb)?;
    let quad = if profile.is_unit() {
        RadialQuadrature {
            nodes: vec![(opts.radius, 1.0)],
        }
    } else {
        if opts.radial_nodes == 0 {
            return Err(ConfigError::Invalid("radial_nodes must be positive".into()).into());
        }
        RadialQuadrature::new(&profile, opts.radial_nodes)?
    };
    let offsets = |grid: &AngularGrid| -> Vec<f64> {
        match opts.sampling {
            Sampling::Center => vec![0.0],
            Sampling::SectorAverage(m) => {
                let m = m.max(1);
                let w = grid.width();
                (0..m).map(|k| ((k as f64 + 0.5) / m as f64 - 0.5) * w).collect()
            }
        }
    };
    let off_c = offsets(&grid_c);
    let off_d = offsets(&grid_d);
    let norm = 1.0 / (off_c.len() * off_d.len()) as f64;
    let (nc, nd) = (grid_c.n(), grid_d.n());

    let rows: Vec<Vec<(f64, f64)>> = (0..nc)
        .into_par_iter()
        .map(|i| {
            // Field values at all (r, φ_C) samples of this row.
            let phis_c: Vec<f64> = off_c.iter().map(|o| grid_c.center(i) + o).collect();
            let at_c: Vec<_> = quad
                .nodes
                .iter()
                .flat_map(|&(r, w)| phis_c.iter().map(move |&phi| (r, w, phi)))
                .map(|(r, w, phi)| (w, ea.eval(r, phi), eb.eval(r, phi)))
                .collect();
            (0..nd)
                .map(|j| {
                    let mut c_in = 0.0;
                    let mut c_out = 0.0;
                    for &(r, wd) in &quad.nodes {
                        for o in &off_d {
                            let phi = grid_d.center(j) + o;
                            let b_d = eb.eval(r, phi);
                            let a_d = ea.eval(r, phi);
                            for (wc, a_c, b_c) in &at_c {
                                let c = opts
                                    .engine
                                    .from_values(a_c, &b_d, b_c, &a_d, proj, wc * wd);
                                c_in += c.c_in;
                                c_out += c.c_out;
                            }
                        }
                    }
                    (c_in * norm, c_out * norm)
                })
                .collect()
        })
        .collect();

    let c_in = Matrix::from_fn(nc, nd, |i, j| rows[i][j].0);
    let c_out = Matrix::from_fn(nc, nd, |i, j| rows[i][j].1);
    if c_in.iter().chain(c_out.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite coincidence rate".into()));
    }
    CorrelationMap::from_rates(grid_c, grid_d, c_in, c_out, opts.eps_zero)
}

/// Port-D distribution conditioned on a detection in one port-C sector.
#[derive(Clone, Debug, PartialEq)]
pub struct HeraldedDistribution {
    pub probabilities: Vec<f64>,
    /// Set when the heralding row carries no coincidences (sum at or below
    /// `eps_zero` times the largest cell of the matrix).
    pub empty: bool,
}

pub fn heralded_distribution(
    map: &CorrelationMap,
    herald_sector: usize,
    temporal: TemporalConfig,
) -> Result<HeraldedDistribution> {
    if herald_sector >= map.grid_c.n() {
        return Err(ConfigError::Invalid(format!(
            "herald sector {herald_sector} out of range 0..{}",
            map.grid_c.n()
        ))
        .into());
    }
    let rates = map.rates(temporal);
    let row = rates.row(herald_sector);
    let total: f64 = row.iter().sum();
    let floor = map.eps_zero * rates.iter().cloned().fold(0.0, f64::max);
    if total > floor {
        Ok(HeraldedDistribution {
            probabilities: row.iter().map(|v| v / total).collect(),
            empty: false,
        })
    } else {
        Ok(HeraldedDistribution {
            probabilities: vec![0.0; row.len()],
            empty: true,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Keep the port-C coordinate, integrate over port D.
    C,
    /// Keep the port-D coordinate, integrate over port C.
    D,
}

/// Visibility with one port read out as a bucket detector.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketVisibility {
    /// `(ΣC_out − ΣC_in)/ΣC_out` over the integrated coordinate.
    pub ratio_of_integrals: Vec<Option<f64>>,
    /// Mean of the pointwise visibility over the integrated coordinate,
    /// i.e. `(1/2π)∫V dφ`.
    pub integral_of_visibility: Vec<Option<f64>>,
}

pub fn bucket_visibility(map: &CorrelationMap, axis: Axis) -> BucketVisibility {
    let (n_keep, n_sum) = match axis {
        Axis::C => (map.grid_c.n(), map.grid_d.n()),
        Axis::D => (map.grid_d.n(), map.grid_c.n()),
    };
    let cell = |k: usize, s: usize| match axis {
        Axis::C => (k, s),
        Axis::D => (s, k),
    };
    let mut ratio = Vec::with_capacity(n_keep);
    let mut mean = Vec::with_capacity(n_keep);
    for k in 0..n_keep {
        let (mut sin, mut sout, mut sv, mut nv) = (0.0, 0.0, 0.0, 0usize);
        for s in 0..n_sum {
            let ij = cell(k, s);
            if let Some(v) = map.visibility[ij] {
                sin += map.c_in[ij];
                sout += map.c_out[ij];
                sv += v;
                nv += 1;
            }
        }
        ratio.push((sout > 0.0).then(|| (sout - sin) / sout));
        mean.push((nv > 0).then(|| sv / n_sum as f64));
    }
    BucketVisibility {
        ratio_of_integrals: ratio,
        integral_of_visibility: mean,
    }
}
