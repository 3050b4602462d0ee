use super::{ClusterHit, Coincidence};
use crate::engine::{AngularGrid, CorrelationMap};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Maps hit centroids to azimuthal sectors, rejecting hits off the annulus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorBinner {
    pub grid: AngularGrid,
    pub center: (f64, f64),
    pub r_min: f64,
    pub r_max: f64,
}

impl SectorBinner {
    pub fn sector(&self, hit: &ClusterHit) -> Option<usize> {
        let (dx, dy) = (hit.cx - self.center.0, hit.cy - self.center.1);
        let r = dx.hypot(dy);
        (r >= self.r_min && r <= self.r_max).then(|| self.grid.sector_of(dy.atan2(dx)))
    }
}

/// Coincidence counts over C sectors (rows) × D sectors (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct CountMatrix {
    pub grid_c: AngularGrid,
    pub grid_d: AngularGrid,
    pub counts: Matrix<u64>,
}

impl CountMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn bin_coincidences(
    hits: &[ClusterHit],
    pairs: &[Coincidence],
    binner_c: &SectorBinner,
    binner_d: &SectorBinner,
) -> CountMatrix {
    let mut counts = Matrix::filled(binner_c.grid.n(), binner_d.grid.n(), 0u64);
    for p in pairs {
        if let (Some(i), Some(j)) = (binner_c.sector(&hits[p.c]), binner_d.sector(&hits[p.d])) {
            counts[(i, j)] += 1;
        }
    }
    CountMatrix {
        grid_c: binner_c.grid,
        grid_d: binner_d.grid,
        counts,
    }
}

/// Measured visibility `(N_out − N_in) / N_out` from runs of equal exposure.
///
/// Cells with `N_out < min_out` are undefined.
pub fn bin_and_normalize(c_in: &CountMatrix, c_out: &CountMatrix, min_out: u64) -> Result<CorrelationMap> {
    if c_in.grid_c != c_out.grid_c || c_in.grid_d != c_out.grid_d {
        return Err(Error::GridMismatch(format!(
            "in-run {}x{} vs out-run {}x{}",
            c_in.grid_c.n(),
            c_in.grid_d.n(),
            c_out.grid_c.n(),
            c_out.grid_d.n()
        )));
    }
    let floor = min_out.max(1);
    let (n, m) = c_in.counts.shape();
    let visibility = Matrix::from_fn(n, m, |i, j| {
        let out = c_out.counts[(i, j)];
        (out >= floor).then(|| (out as f64 - c_in.counts[(i, j)] as f64) / out as f64)
    });
    Ok(CorrelationMap {
        grid_c: c_in.grid_c,
        grid_d: c_in.grid_d,
        c_in: c_in.counts.map(|&v| v as f64),
        c_out: c_out.counts.map(|&v| v as f64),
        visibility,
        eps_zero: 0.0,
    })
}
