use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use homcorr::engine::{analytic_visibility, correlation_map, AnalyticCase, AngularGrid, MapOptions};
use homcorr::io::read_matrix_csv;

fn homcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homcorr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const RAD_OAM_HA: &str = r#"
grid_n = 12
[mode_a]
kind = "named"
name = "radial_vv"
[mode_b]
kind = "named"
name = "oam_circular"
l = 1
[projection]
c = "H"
d = "A"
"#;

#[test]
fn map_checkerboard_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = homcorr(&["map", "--quiet", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());

    let vis = read_matrix_csv(&out.join("visibility.csv")).unwrap();
    let g = AngularGrid::new(28).unwrap();
    vis.check_grid(g, g).unwrap();
    for (i, j, v) in vis.values.indexed() {
        let want = analytic_visibility(AnalyticCase::Checkerboard, g.center(i), g.center(j));
        assert!((v.unwrap() - want).abs() <= 1e-12);
    }

    let (a, b, p) = AnalyticCase::Checkerboard.setup();
    let map = correlation_map(&a, &b, g, g, &p, &MapOptions::default()).unwrap();
    assert_eq!(vis.values, map.visibility);
    let cin = read_matrix_csv(&out.join("c_in.csv")).unwrap();
    assert_eq!(cin.dense(), map.c_in);
    assert!(out.join("meta.json").exists());
    let pgm = fs::read(out.join("visibility.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n28 28\n255\n"));
}

#[test]
fn map_triangle_with_projection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RAD_OAM_HA);
    let out = dir.path().join("m");
    let o = homcorr(&["map", "-q", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let vis = read_matrix_csv(&out.join("visibility.csv")).unwrap();
    let g = AngularGrid::new(12).unwrap();
    for (i, j, v) in vis.values.indexed() {
        let want = analytic_visibility(AnalyticCase::TriangleHA, g.center(i), g.center(j));
        match v {
            Some(v) => assert!((v - want).abs() <= 1e-12, "{i},{j}: {v} vs {want}"),
            None => assert!(want.is_nan()),
        }
    }
}

#[test]
fn single_temporal_config_writes_one_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("temporal = \"in\"\n{RAD_OAM_HA}"));
    let out = dir.path().join("m");
    let o = homcorr(&["map", "-q", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("c_in.csv").exists());
    assert!(!out.join("c_out.csv").exists());
    assert!(!out.join("visibility.csv").exists());
}

#[test]
fn misspelled_key_fails_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RAD_OAM_HA.replace("grid_n", "grid_size"));
    let out = dir.path().join("m");
    let o = homcorr(&["map", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid_size"));
    assert!(!out.exists());
}

#[test]
fn missing_config_file_is_config_error() {
    let o = homcorr(&["map", "--config", "/nonexistent/homcorr.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let o = homcorr(&["verify", "--grid", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    for case in AnalyticCase::ALL {
        assert!(text.contains(case.name()));
    }
    assert!(text.contains("confirmed: V = 1/2 cos 2(phi_C - phi_D)"));
    let o = homcorr(&["verify", "--grid", "33"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn default_config_is_printable_and_loadable() {
    let o = homcorr(&["print-default-config"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &String::from_utf8(o.stdout).unwrap());
    let o = homcorr(&["verify", "-q", "--config", &cfg, "--grid", "4"]);
    assert_eq!(o.status.code(), Some(0));
}

fn small_sim(dir: &Path) -> String {
    write_config(
        dir,
        r#"
grid_n = 4
[mode_a]
kind = "named"
name = "radial_vv"
[mode_b]
kind = "named"
name = "pi_vv"
[sim]
pairs = 3000
oversample = 3
"#,
    )
}

#[test]
fn simulate_is_deterministic_and_analyzable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sim(dir.path());
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = homcorr(&["simulate", "-q", "--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "11");
    let b = run("b", "11");
    let c = run("c", "12");
    let bytes = |d: &Path| fs::read(d.join("events_in.csv")).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    assert_ne!(bytes(&a), bytes(&c));

    let o = homcorr(&["analyze", "-q", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let vis = read_matrix_csv(&a.join("measured/visibility.csv")).unwrap();
    assert_eq!(vis.values.shape(), (4, 4));
}

#[test]
fn analyze_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let empty = d.join("empty.csv");
    fs::write(&empty, "").unwrap();
    let bad = d.join("bad.csv");
    fs::write(&bad, "port,x,y,t_ns\nC,1,2,3\nD,1,x,4\n").unwrap();
    let base = fs::read_to_string(small_sim(d)).unwrap();

    let with = |inp: &Path, reference: Option<&Path>| {
        let mut body = format!(
            "{base}[analyze]\nin_events = {:?}\nout_events = {:?}\n",
            inp.to_str().unwrap(),
            inp.to_str().unwrap()
        );
        if let Some(r) = reference {
            body.push_str(&format!("reference = {:?}\n", r.to_str().unwrap()));
        }
        write_config(d, &body)
    };

    let o = homcorr(&["analyze", "--config", &with(&empty, None), "--out", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let o = homcorr(&["analyze", "--config", &with(&bad, None), "--out", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3:"));

    let mapdir = d.join("ref");
    let o = homcorr(&["map", "-q", "--grid", "6", "--out", mapdir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let sim_out = d.join("sim");
    let o = homcorr(&["simulate", "-q", "--config", &small_sim(d), "--out", sim_out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = homcorr(&[
        "analyze",
        "--config",
        &with(&sim_out.join("events_in.csv"), Some(&mapdir.join("visibility.csv"))),
        "--out",
        d.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid mismatch"));
}
