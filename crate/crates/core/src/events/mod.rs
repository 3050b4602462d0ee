//! Synthetic single-photon camera data and the analysis chain that turns it
//! back into a measured correlation map:
//!
//! generate → cluster → find coincidences → bin into sectors → normalize
//! against the temporally distinguishable run.
//!
//! Each output port images onto its own `width × height` pixel region with
//! the beam centred at `(width/2, height/2)`; azimuth is `atan2(y − cy, x − cx)`.

mod binning;
mod cluster;
mod coincidence;
mod format;
mod generate;

pub use binning::{bin_and_normalize, bin_coincidences, CountMatrix, SectorBinner};
pub use cluster::{cluster, Clusterer};
pub use coincidence::{find_coincidences, Coincidence};
pub use format::{read_events, write_events, EventReader, EVENT_HEADER};
pub use generate::{generate_events, simulation_map, EventGenerator, GenerationStats};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{AngularGrid, CorrelationMap};
use crate::error::{ConfigError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Port {
    C,
    D,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::C => "C",
            Port::D => "D",
        })
    }
}

impl FromStr for Port {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "C" => Ok(Port::C),
            "D" => Ok(Port::D),
            other => Err(ConfigError::UnknownName {
                kind: "port",
                name: other.to_string(),
            }),
        }
    }
}

/// One time-stamped pixel hit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonEvent {
    pub port: Port,
    pub x: f64,
    pub y: f64,
    /// Nanoseconds.
    pub t: f64,
}

/// A reconstructed photon: centroid of one pixel cluster.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterHit {
    pub port: Port,
    pub cx: f64,
    pub cy: f64,
    /// Earliest pixel time in the cluster (ns).
    pub t: f64,
    pub n_pixels: usize,
}

/// Simulation and analysis parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Emitted photon pairs per run.
    pub pairs: u64,
    pub coincidence_window_ns: f64,
    pub psf_sigma_px: f64,
    pub sensor_width_px: u32,
    pub sensor_height_px: u32,
    /// Radius of the doughnut maximum.
    pub ring_radius_px: f64,
    /// Half-width of the radial annulus kept by generator and analyzer.
    pub ring_width_px: f64,
    pub seed: u64,
    pub pair_rate_hz: f64,
    pub mean_pixels_per_hit: f64,
    /// Gaussian timing jitter per photon (σ, truncated at 5σ).
    pub jitter_ns: f64,
    /// Spread of pixel times inside one cluster.
    pub pixel_time_spread_ns: f64,
    /// Uncorrelated single-photon hits (0 disables).
    pub background_rate_hz: f64,
    /// Sub-sectors per analysis sector used to sample angles (odd).
    pub oversample: usize,
    pub cluster_gap_px: f64,
    pub cluster_gap_ns: f64,
    /// Out-run counts below this leave the visibility cell undefined.
    pub min_out_counts: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            pairs: 1_000_000,
            coincidence_window_ns: 50.0,
            psf_sigma_px: 1.5,
            sensor_width_px: 256,
            sensor_height_px: 256,
            ring_radius_px: 60.0,
            ring_width_px: 40.0,
            seed: 0x5eed_2024,
            pair_rate_hz: 1.0e5,
            mean_pixels_per_hit: 5.0,
            jitter_ns: 1.0,
            pixel_time_spread_ns: 5.0,
            background_rate_hz: 0.0,
            oversample: 9,
            cluster_gap_px: 6.0,
            cluster_gap_ns: 20.0,
            min_out_counts: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("coincidence_window_ns", self.coincidence_window_ns),
            ("psf_sigma_px", self.psf_sigma_px),
            ("ring_radius_px", self.ring_radius_px),
            ("ring_width_px", self.ring_width_px),
            ("pair_rate_hz", self.pair_rate_hz),
            ("mean_pixels_per_hit", self.mean_pixels_per_hit),
            ("jitter_ns", self.jitter_ns),
            ("pixel_time_spread_ns", self.pixel_time_spread_ns),
            ("cluster_gap_px", self.cluster_gap_px),
            ("cluster_gap_ns", self.cluster_gap_ns),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!("sim.{name} must be positive, got {v}")));
            }
        }
        if self.pairs == 0 {
            return Err(ConfigError::Invalid("sim.pairs must be positive".into()));
        }
        if self.mean_pixels_per_hit < 1.0 {
            return Err(ConfigError::Invalid("sim.mean_pixels_per_hit must be >= 1".into()));
        }
        if !(self.background_rate_hz.is_finite() && self.background_rate_hz >= 0.0) {
            return Err(ConfigError::Invalid("sim.background_rate_hz must be >= 0".into()));
        }
        if self.oversample == 0 || self.oversample.is_multiple_of(2) {
            return Err(ConfigError::Invalid("sim.oversample must be odd".into()));
        }
        let half = 0.5 * self.sensor_width_px.min(self.sensor_height_px) as f64;
        let outer = self.ring_radius_px + self.ring_width_px + 4.0 * self.psf_sigma_px;
        if outer >= half {
            return Err(ConfigError::Invalid(format!(
                "ring (outer radius {outer} px incl. PSF) does not fit the {}x{} sensor",
                self.sensor_width_px, self.sensor_height_px
            )));
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * self.sensor_width_px as f64, 0.5 * self.sensor_height_px as f64)
    }

    pub fn annulus(&self) -> (f64, f64) {
        (
            (self.ring_radius_px - self.ring_width_px).max(0.0),
            self.ring_radius_px + self.ring_width_px,
        )
    }

    pub fn binner(&self, grid: AngularGrid) -> SectorBinner {
        let (r_min, r_max) = self.annulus();
        SectorBinner {
            grid,
            center: self.center(),
            r_min,
            r_max,
        }
    }
}

/// Counts at each analysis stage of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub events: u64,
    pub hits: u64,
    pub coincidences: u64,
    pub binned: u64,
}

/// Clusters, pairs and bins one time-sorted event stream.
pub fn analyze_stream<I>(events: I, cfg: &SimConfig, grid: AngularGrid) -> Result<(CountMatrix, StageCounts)>
where
    I: IntoIterator<Item = Result<PhotonEvent>>,
{
    let mut clusterer = Clusterer::new(cfg.cluster_gap_px, cfg.cluster_gap_ns);
    let mut n_events = 0u64;
    for ev in events {
        clusterer.push(ev?)?;
        n_events += 1;
    }
    let hits = clusterer.finish();
    let pairs = find_coincidences(&hits, cfg.coincidence_window_ns)?;
    let binner = cfg.binner(grid);
    let counts = bin_coincidences(&hits, &pairs, &binner, &binner);
    let stats = StageCounts {
        events: n_events,
        hits: hits.len() as u64,
        coincidences: pairs.len() as u64,
        binned: counts.total(),
    };
    Ok((counts, stats))
}

/// A measured map together with the per-run stage counts.
#[derive(Clone, Debug)]
pub struct MeasuredRun {
    pub map: CorrelationMap,
    pub stats_in: StageCounts,
    pub stats_out: StageCounts,
}

/// Analyzes an in-run against an out-run of equal exposure.
pub fn analyze_runs<I, O>(in_events: I, out_events: O, cfg: &SimConfig, grid: AngularGrid) -> Result<MeasuredRun>
where
    I: IntoIterator<Item = Result<PhotonEvent>>,
    O: IntoIterator<Item = Result<PhotonEvent>>,
{
    let (c_in, stats_in) = analyze_stream(in_events, cfg, grid)?;
    let (c_out, stats_out) = analyze_stream(out_events, cfg, grid)?;
    let map = bin_and_normalize(&c_in, &c_out, cfg.min_out_counts)?;
    Ok(MeasuredRun {
        map,
        stats_in,
        stats_out,
    })
}
