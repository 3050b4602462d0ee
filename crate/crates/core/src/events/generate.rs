//! Seeded, streaming event generator.
//!
//! Each emitted pair either splits (one photon per port) with probability
//! equal to the mean coincidence rate of the oversampled map, or leaves both
//! photons in one port. Split pairs draw their sector cell from the map and a
//! uniform azimuth within it. Events come out sorted by time.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};

use super::{PhotonEvent, Port, SimConfig};
use crate::engine::{correlation_map, AngularGrid, CorrelationMap, MapOptions, ProjectionPair, TemporalConfig};
use crate::error::{ConfigError, Error, Result};
use crate::modes::{fluence, ModeField, RadialProfile};

/// Pairs per RNG stream; batches are independent of how many were consumed before.
const BATCH: u64 = 4096;
const JITTER_CUT: f64 = 5.0;

/// Angular map on the fine grid `n · oversample` used to drive the generator.
///
/// Radial envelopes are ignored here; the generator draws radii itself.
pub fn simulation_map(
    ea: &ModeField,
    eb: &ModeField,
    proj: &ProjectionPair,
    n: usize,
    oversample: usize,
) -> Result<CorrelationMap> {
    let fine = AngularGrid::new(n * oversample)?;
    let a = ea.clone().with_envelope(RadialProfile::Unit);
    let b = eb.clone().with_envelope(RadialProfile::Unit);
    correlation_map(&a, &b, fine, fine, proj, &MapOptions::default())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct GenerationStats {
    pub pairs: u64,
    pub split_pairs: u64,
    pub bunched_pairs: u64,
    pub background_hits: u64,
    pub hits: u64,
    pub events: u64,
}

/// Radii with density `r F(r)` of an |l| = 1 ring peaking at `ring_radius`,
/// restricted to the annulus.
#[derive(Clone, Debug)]
struct RingSampler {
    profile: RadialProfile,
    lo: f64,
    hi: f64,
    bound: f64,
}

impl RingSampler {
    fn new(cfg: &SimConfig) -> Result<Self> {
        let (lo, hi) = cfg.annulus();
        let profile = RadialProfile::LgRing {
            waist: cfg.ring_radius_px * std::f64::consts::SQRT_2,
            oam_abs: 1,
        };
        let mut bound: f64 = 0.0;
        for k in 0..=1000 {
            let r = lo + (hi - lo) * k as f64 / 1000.0;
            bound = bound.max(r * fluence(&profile, r)?);
        }
        if bound <= 0.0 {
            return Err(Error::Numerical("radial density vanishes on the annulus".into()));
        }
        Ok(Self {
            profile,
            lo,
            hi,
            bound: bound * 1.01,
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let r = rng.gen_range(self.lo..self.hi);
            let f = r * fluence(&self.profile, r).unwrap_or(0.0);
            if rng.gen::<f64>() * self.bound <= f {
                return r;
            }
        }
    }
}

#[derive(Debug)]
struct Queued {
    seq: u64,
    ev: PhotonEvent,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ev.t.total_cmp(&other.ev.t).then(self.seq.cmp(&other.seq))
    }
}

/// Iterator over the time-sorted pixel events of one run.
pub struct EventGenerator {
    cfg: SimConfig,
    temporal: TemporalConfig,
    grid_c: AngularGrid,
    grid_d: AngularGrid,
    cumulative: Vec<f64>,
    p_split: f64,
    ring: RingSampler,
    rng: ChaCha8Rng,
    gap: Exp<f64>,
    jitter: Normal<f64>,
    psf: Normal<f64>,
    extra_pixels: Option<Poisson<f64>>,
    clock: f64,
    queue: BinaryHeap<Reverse<Queued>>,
    seq: u64,
    stats: GenerationStats,
}

impl EventGenerator {
    /// `map` must come from [`simulation_map`]; its `temporal` rates drive the run.
    pub fn new(map: &CorrelationMap, temporal: TemporalConfig, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let rates = map.rates(temporal);
        let mut cumulative = Vec::with_capacity(rates.as_slice().len());
        let mut acc = 0.0;
        for &c in rates.iter() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Numerical(format!("invalid coincidence rate {c}")));
            }
            acc += c;
            cumulative.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::Empty("coincidence map is zero everywhere".into()));
        }
        let p_split = acc / cumulative.len() as f64;
        if p_split > 1.0 + 1e-9 {
            return Err(Error::Numerical(format!("mean coincidence rate {p_split} exceeds 1")));
        }
        let invalid = |what: &str| Error::Config(ConfigError::Invalid(what.to_string()));
        Ok(Self {
            cfg: cfg.clone(),
            temporal,
            grid_c: map.grid_c,
            grid_d: map.grid_d,
            cumulative,
            p_split: p_split.min(1.0),
            ring: RingSampler::new(cfg)?,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            gap: Exp::new(cfg.pair_rate_hz * 1e-9).map_err(|_| invalid("pair rate"))?,
            jitter: Normal::new(0.0, cfg.jitter_ns).map_err(|_| invalid("jitter"))?,
            psf: Normal::new(0.0, cfg.psf_sigma_px).map_err(|_| invalid("psf sigma"))?,
            extra_pixels: if cfg.mean_pixels_per_hit > 1.0 {
                Some(Poisson::new(cfg.mean_pixels_per_hit - 1.0).map_err(|_| invalid("pixels per hit"))?)
            } else {
                None
            },
            clock: 0.0,
            queue: BinaryHeap::new(),
            seq: 0,
            stats: GenerationStats::default(),
        })
    }

    /// Probability that a pair yields one photon in each port.
    pub fn split_probability(&self) -> f64 {
        self.p_split
    }

    pub fn stats(&self) -> GenerationStats {
        self.stats
    }

    fn done(&self) -> bool {
        self.stats.pairs >= self.cfg.pairs
    }

    fn emit_pair(&mut self) {
        let idx = self.stats.pairs;
        if idx.is_multiple_of(BATCH) {
            self.rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
            let tag = matches!(self.temporal, TemporalConfig::Out) as u64;
            self.rng.set_stream(2 * (idx / BATCH) + tag);
        }
        let t0 = self.clock;
        let t = t0 + self.gap.sample(&mut self.rng);
        self.clock = t;
        self.stats.pairs += 1;

        if self.cfg.background_rate_hz > 0.0 {
            let mean = self.cfg.background_rate_hz * 1e-9 * (t - t0);
            let n = if mean > 0.0 {
                Poisson::new(mean).map(|p| p.sample(&mut self.rng) as u64).unwrap_or(0)
            } else {
                0
            };
            for _ in 0..n {
                let tb = self.rng.gen_range(t0..=t);
                let port = if self.rng.gen::<bool>() { Port::C } else { Port::D };
                let phi = self.rng.gen_range(0.0..std::f64::consts::TAU);
                self.emit_hit(port, phi, tb);
                self.stats.background_hits += 1;
            }
        }

        if self.rng.gen::<f64>() < self.p_split {
            self.stats.split_pairs += 1;
            let total = *self.cumulative.last().expect("non-empty map");
            let u = self.rng.gen::<f64>() * total;
            let cell = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
            let (i, j) = (cell / self.grid_d.n(), cell % self.grid_d.n());
            let phi_c = self.grid_c.center(i) + self.grid_c.width() * (self.rng.gen::<f64>() - 0.5);
            let phi_d = self.grid_d.center(j) + self.grid_d.width() * (self.rng.gen::<f64>() - 0.5);
            self.emit_photon(Port::C, phi_c, t);
            self.emit_photon(Port::D, phi_d, t);
        } else {
            self.stats.bunched_pairs += 1;
            let port = if self.rng.gen::<bool>() { Port::C } else { Port::D };
            for _ in 0..2 {
                let phi = self.rng.gen_range(0.0..std::f64::consts::TAU);
                self.emit_photon(port, phi, t);
            }
        }
    }

    fn emit_photon(&mut self, port: Port, phi: f64, t: f64) {
        let cut = JITTER_CUT * self.cfg.jitter_ns;
        let dt = self.jitter.sample(&mut self.rng).clamp(-cut, cut);
        self.emit_hit(port, phi, t + dt);
    }

    fn emit_hit(&mut self, port: Port, phi: f64, t: f64) {
        self.stats.hits += 1;
        let r = self.ring.sample(&mut self.rng);
        let (cx, cy) = self.cfg.center();
        let (x, y) = (cx + r * phi.cos(), cy + r * phi.sin());
        let n = 1 + self.extra_pixels.map_or(0, |p| p.sample(&mut self.rng) as usize);
        let max_x = (self.cfg.sensor_width_px - 1) as f64;
        let max_y = (self.cfg.sensor_height_px - 1) as f64;
        let mut pixels: Vec<(f64, f64)> = Vec::with_capacity(n);
        for _ in 0..n {
            let px = (x + self.psf.sample(&mut self.rng)).round().clamp(0.0, max_x);
            let py = (y + self.psf.sample(&mut self.rng)).round().clamp(0.0, max_y);
            let tp = t + self.rng.gen::<f64>() * self.cfg.pixel_time_spread_ns;
            if pixels.contains(&(px, py)) {
                continue;
            }
            pixels.push((px, py));
            self.seq += 1;
            self.queue.push(Reverse(Queued {
                seq: self.seq,
                ev: PhotonEvent { port, x: px, y: py, t: tp },
            }));
        }
    }
}

impl Iterator for EventGenerator {
    type Item = PhotonEvent;

    fn next(&mut self) -> Option<PhotonEvent> {
        loop {
            // Later pairs cannot produce anything earlier than this.
            let safe = self.clock - JITTER_CUT * self.cfg.jitter_ns;
            if let Some(Reverse(top)) = self.queue.peek() {
                if self.done() || top.ev.t < safe {
                    let Reverse(q) = self.queue.pop().expect("peeked");
                    self.stats.events += 1;
                    return Some(q.ev);
                }
            }
            if self.done() {
                return None;
            }
            self.emit_pair();
        }
    }
}

/// Collects a whole run.
pub fn generate_events(
    map: &CorrelationMap,
    temporal: TemporalConfig,
    cfg: &SimConfig,
) -> Result<(Vec<PhotonEvent>, GenerationStats)> {
    let mut gen = EventGenerator::new(map, temporal, cfg)?;
    let events: Vec<PhotonEvent> = gen.by_ref().collect();
    Ok((events, gen.stats()))
}
