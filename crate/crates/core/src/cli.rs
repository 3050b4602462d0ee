//! Command-line surface. [`run`] returns the process exit code:
//! 0 ok, 1 verification failure, 2 configuration error, 3 runtime error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{ExperimentConfig, DEFAULT_CONFIG};
use crate::engine::{correlation_map, AngularGrid, CorrelationMap, MapOptions, Sampling, TemporalConfig};
use crate::error::{ConfigError, Error, Result};
use crate::events::{analyze_runs, simulation_map, write_events, EventGenerator, EventReader};
use crate::io::{read_matrix_csv, write_json, write_map, write_visibility_pgm, MapFiles, MapMeta};
use crate::modes::RadialProfile;
use crate::oracle::{compare_maps, oracle_map, verify, MAX_ORACLE_SECTORS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "homcorr", version, about = "Spatially resolved two-photon interference maps")]
pub struct Cli {
    /// Experiment configuration (TOML); built-in defaults if omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Simulation seed (overrides `sim.seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sectors per port (overrides `grid_n`).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute C_in, C_out and visibility maps.
    Map,
    /// Cross-check the engine against the Fock-space oracle.
    Verify,
    /// Generate in/out event streams.
    Simulate,
    /// Turn in/out event streams into a measured map.
    Analyze,
    /// Print the annotated default configuration.
    PrintDefaultConfig,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Command::PrintDefaultConfig = cli.command {
        print!("{DEFAULT_CONFIG}");
        return EXIT_OK;
    }
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = match cli.command {
        Command::Map => cmd_map(&cfg, cli.quiet).map(|_| EXIT_OK),
        Command::Verify => cmd_verify(&cfg, cli.quiet),
        Command::Simulate => cmd_simulate(&cfg, cli.quiet).map(|_| EXIT_OK),
        Command::Analyze => cmd_analyze(&cfg, cli.quiet).map(|_| EXIT_OK),
        Command::PrintDefaultConfig => unreachable!(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => EXIT_CONFIG,
                _ => EXIT_RUNTIME,
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = cli.grid {
        cfg.grid_n = n;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.sim.get_or_insert_with(Default::default).seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn say(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        println!("{}", msg.as_ref());
    }
}

fn meta(cfg: &ExperimentConfig, map: &CorrelationMap, source: &str, extra: serde_json::Value) -> MapMeta {
    MapMeta {
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        source: source.to_string(),
        mode_a: serde_json::to_value(&cfg.mode_a).unwrap_or_default(),
        mode_b: serde_json::to_value(&cfg.mode_b).unwrap_or_default(),
        projection: serde_json::to_value(&cfg.projection).unwrap_or_default(),
        grid_c: map.grid_c.n(),
        grid_d: map.grid_d.n(),
        eps_zero: map.eps_zero,
        temporal: serde_json::to_value(cfg.temporal)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        extra,
    }
}

fn engine_map(cfg: &ExperimentConfig, sampling: Sampling) -> Result<CorrelationMap> {
    let (a, b) = cfg.modes()?;
    let proj = cfg.projection.pair()?;
    let grid = AngularGrid::new(cfg.grid_n)?;
    let opts = MapOptions {
        sampling,
        ..MapOptions::default()
    };
    correlation_map(&a, &b, grid, grid, &proj, &opts)
}

pub fn cmd_map(cfg: &ExperimentConfig, quiet: bool) -> Result<Vec<PathBuf>> {
    let map = engine_map(cfg, cfg.sampling())?;
    let temporal = cfg.temporal.configs();
    let both = temporal.len() == 2;
    let files = MapFiles {
        c_in: temporal.contains(&TemporalConfig::In),
        c_out: temporal.contains(&TemporalConfig::Out),
        visibility: both,
    };
    let dir = &cfg.output_dir;
    let extra = json!({ "radial_profile": cfg.radial_profile, "sector_samples": cfg.sector_samples });
    let mut written = write_map(dir, &map, files, &meta(cfg, &map, "engine", extra))?;
    if both {
        let (pgm, mask) = (dir.join("visibility.pgm"), dir.join("visibility_mask.pgm"));
        write_visibility_pgm(&pgm, &mask, &map.visibility)?;
        written.extend([pgm, mask]);
        say(
            quiet,
            format!(
                "{}x{} map, {} of {} visibility cells defined",
                map.grid_c.n(),
                map.grid_d.n(),
                map.defined_cells(),
                map.grid_c.n() * map.grid_d.n()
            ),
        );
    }
    for p in &written {
        say(quiet, format!("wrote {}", p.display()));
    }
    Ok(written)
}

/// Returns [`EXIT_OK`] or [`EXIT_VERIFY`].
pub fn cmd_verify(cfg: &ExperimentConfig, quiet: bool) -> Result<i32> {
    let n = cfg.grid_n;
    if n > MAX_ORACLE_SECTORS {
        return Err(ConfigError::Invalid(format!(
            "verify supports at most {MAX_ORACLE_SECTORS} sectors per port, got {n}"
        ))
        .into());
    }
    let report = verify(&[n])?;
    let mut cases = report.cases.clone();

    // The configured pair itself, evaluated at the reference radius.
    let (a, b) = cfg.modes()?;
    let (a, b) = (a.with_envelope(RadialProfile::Unit), b.with_envelope(RadialProfile::Unit));
    let proj = cfg.projection.pair()?;
    let grid = AngularGrid::new(n)?;
    let engine = correlation_map(&a, &b, grid, grid, &proj, &MapOptions::default())?;
    cases.push(compare_maps("configured", &engine, &oracle_map(&a, &b, grid, &proj)?)?);

    let tol = report.tolerance;
    say(quiet, format!("{:<14} {:>4} {:>12} {:>12} {:>12} {:>6}  result", "case", "n", "c_in", "c_out", "visibility", "undef"));
    let mut ok = true;
    for c in &cases {
        let pass = c.passed(tol);
        ok &= pass;
        say(
            quiet,
            format!(
                "{:<14} {:>4} {:>12.3e} {:>12.3e} {:>12.3e} {:>6}  {}",
                c.case,
                c.n,
                c.max_abs_c_in,
                c.max_abs_c_out,
                c.max_abs_visibility,
                c.definedness_mismatches,
                if pass { "ok" } else { "FAIL" }
            ),
        );
    }
    let s = &report.stripes;
    say(
        quiet,
        format!(
            "stripes (n={}): max|V - 1/2 cos2(dphi)| = {:.3e}, max|V - 1/2 cos(dphi)| = {:.3e}; confirmed: {}",
            s.n, s.max_dev_half_cos_2delta, s.max_dev_half_cos_delta, s.confirmed
        ),
    );
    say(quiet, format!("tolerance {tol:e}: {}", if ok { "PASS" } else { "FAIL" }));
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
}

pub fn cmd_simulate(cfg: &ExperimentConfig, quiet: bool) -> Result<Vec<PathBuf>> {
    let sim = cfg.sim_or_default();
    let (a, b) = cfg.modes()?;
    let proj = cfg.projection.pair()?;
    let fine = simulation_map(&a, &b, &proj, cfg.grid_n, sim.oversample)?;
    let dir = &cfg.output_dir;
    let mut written = Vec::new();
    let mut stats = serde_json::Map::new();
    for (t, name) in [(TemporalConfig::In, "in"), (TemporalConfig::Out, "out")] {
        let mut gen = EventGenerator::new(&fine, t, &sim)?;
        let path = dir.join(format!("events_{name}.csv"));
        write_events(&path, gen.by_ref())?;
        let st = gen.stats();
        say(
            quiet,
            format!(
                "{name}: {} pairs ({} split), {} hits, {} pixel events -> {}",
                st.pairs,
                st.split_pairs,
                st.hits,
                st.events,
                path.display()
            ),
        );
        stats.insert(name.to_string(), json!(st));
        written.push(path);
    }
    let p = dir.join("simulation.json");
    write_json(&p, &json!({ "grid_n": cfg.grid_n, "sim": sim, "runs": stats }))?;
    written.push(p);
    Ok(written)
}

fn default_events(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join("events_in.csv"), dir.join("events_out.csv"))
}

pub fn cmd_analyze(cfg: &ExperimentConfig, quiet: bool) -> Result<Vec<PathBuf>> {
    let sim = cfg.sim_or_default();
    let grid = AngularGrid::new(cfg.grid_n)?;
    let (in_path, out_path, reference) = match &cfg.analyze {
        Some(a) => (a.in_events.clone(), a.out_events.clone(), a.reference.clone()),
        None => {
            let (i, o) = default_events(&cfg.output_dir);
            (i, o, None)
        }
    };
    if let Some(r) = &reference {
        read_matrix_csv(r)?.check_grid(grid, grid)?;
    }
    let run = analyze_runs(EventReader::open(&in_path)?, EventReader::open(&out_path)?, &sim, grid)?;
    if run.stats_out.binned == 0 {
        return Err(Error::Empty(format!("no binned coincidences in {}", out_path.display())));
    }

    let predicted = engine_map(cfg, Sampling::SectorAverage(sim.oversample))?;
    let mut max_dev: f64 = 0.0;
    let (mut compared, mut within) = (0usize, 0usize);
    for (m, p) in run.map.visibility.iter().zip(predicted.visibility.iter()) {
        if let (Some(m), Some(p)) = (m, p) {
            let d = (m - p).abs();
            max_dev = max_dev.max(d);
            compared += 1;
            within += usize::from(d <= 0.05);
        }
    }
    let extra = json!({
        "in_events": in_path,
        "out_events": out_path,
        "min_out_counts": sim.min_out_counts,
        "stages_in": run.stats_in,
        "stages_out": run.stats_out,
        "compared_cells": compared,
        "cells_within_0_05": within,
        "max_abs_deviation": max_dev,
    });
    let dir = cfg.output_dir.join("measured");
    let mut written = write_map(&dir, &run.map, MapFiles::ALL, &meta(cfg, &run.map, "measured", extra))?;
    let (pgm, mask) = (dir.join("visibility.pgm"), dir.join("visibility_mask.pgm"));
    write_visibility_pgm(&pgm, &mask, &run.map.visibility)?;
    written.extend([pgm, mask]);
    for (name, s) in [("in", run.stats_in), ("out", run.stats_out)] {
        say(
            quiet,
            format!(
                "{name}: {} events, {} hits, {} coincidences, {} binned",
                s.events, s.hits, s.coincidences, s.binned
            ),
        );
    }
    if compared > 0 {
        say(
            quiet,
            format!(
                "vs engine: {within}/{compared} cells within 0.05 ({:.1}%), max deviation {max_dev:.3}",
                100.0 * within as f64 / compared as f64
            ),
        );
    }
    for p in &written {
        say(quiet, format!("wrote {}", p.display()));
    }
    Ok(written)
}
