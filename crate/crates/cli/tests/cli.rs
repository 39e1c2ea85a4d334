use std::path::Path;
use std::process::{Command, Output};

use shrinkdist::normal::{cdf, pdf};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shrinkdist"));
    c.env_remove("SHRINKDIST_SEED");
    c
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out").arg(out).args(args).output().expect("spawn")
}

fn ok(out: &Path, args: &[&str]) {
    let o = run(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

/// Data rows (skipping `#` meta and header) as floats.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn figure_one_atom_row() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["figure", "1"]);
    let r = rows(&d.path().join("figure1.csv"));
    let atoms: Vec<_> = r.iter().filter(|row| row[2] == 1.0).collect();
    assert_eq!(atoms.len(), 1);
    assert!((atoms[0][1] - 0.1513).abs() < 1e-4);
    assert!((atoms[0][0] + 40f64.sqrt() * 0.16).abs() < 1e-15);
    assert!(r.iter().filter(|row| row[2] == 0.0).count() >= 2000);
    let svg = std::fs::read_to_string(d.path().join("figure1.svg")).unwrap();
    assert!(svg.contains("<polyline") && svg.contains("stroke-dasharray"));
}

#[test]
fn figure_two_has_both_shifted_branches() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["figure", "2"]);
    let (t, e) = (40f64.sqrt() * 0.16, 40f64.sqrt() * 0.05);
    let r = rows(&d.path().join("figure2.csv"));
    // left and right limits at the atom location
    let at: Vec<f64> = r.iter().filter(|row| row[2] == 0.0 && row[0] == -t).map(|row| row[1]).collect();
    assert_eq!(at, vec![pdf(-t - e), pdf(-t + e)]);
    for row in r.iter().filter(|row| row[2] == 0.0) {
        let x = row[0];
        if x < -t {
            assert!((row[1] - pdf(x - e)).abs() < 1e-15);
        } else if x > -t {
            assert!((row[1] - pdf(x + e)).abs() < 1e-15);
        }
    }
}

#[test]
fn figure_three_integrates_to_continuous_mass() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["figure", "3", "--a", "2.5"]);
    let r = rows(&d.path().join("figure3.csv"));
    let curve: Vec<_> = r.iter().filter(|row| row[2] == 0.0).collect();
    let trap: f64 = curve.windows(2).map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[1][1] + w[0][1])).sum();
    let atom = r.iter().find(|row| row[2] == 1.0).unwrap()[1];
    let (t, e) = (40f64.sqrt() * 0.16, 40f64.sqrt() * 0.05);
    // closed-form law of the continuous part on [-5, 5]
    let law = shrinkdist::finite_sample_dist(
        shrinkdist::EstimatorKind::Scad,
        &shrinkdist::ModelPoint::new(40, 0.16).unwrap(),
        &shrinkdist::TuningPlan::new(0.05, 2.5).unwrap(),
    )
    .unwrap();
    let exact = law.cdf(5.0) - law.cdf_left(-5.0) - atom;
    assert!((trap - exact).abs() < 1e-7, "{trap} vs {exact}");
    assert!((exact + atom + law.cdf_left(-5.0) + 1.0 - law.cdf(5.0) - 1.0).abs() < 1e-12);
    assert!((atom - (cdf(-t + e) - cdf(-t - e))).abs() < 1e-15);
}

#[test]
fn dist_soft_matches_closed_form_and_rescales() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    let (n, th, eta) = (100u64, 0.12, 0.07);
    let common = ["dist", "--kind", "soft", "--n", "100", "--theta", "0.12", "--eta", "0.07"];
    let mut args_a = common.to_vec();
    args_a.extend(["--lo", "-5", "--hi", "5", "--points", "101"]);
    ok(&a, &args_a);
    let (t, e) = ((n as f64).sqrt() * th, (n as f64).sqrt() * eta);
    let ra = rows(&a.join("dist.csv"));
    for row in &ra {
        let x = row[0];
        let f = if x < -t { cdf(x - e) } else { cdf(x + e) };
        assert!((row[1] - f).abs() < 1e-15, "{x}");
    }
    let mut args_b = common.to_vec();
    args_b.extend(["--scaling", "inv_eta", "--lo", "-5", "--hi", "5", "--points", "101"]);
    let (lo, hi) = (format!("{}", -5.0 / e), format!("{}", 5.0 / e));
    let last = args_b.len();
    args_b[last - 5] = &lo;
    args_b[last - 3] = &hi;
    ok(&b, &args_b);
    let rb = rows(&b.join("dist.csv"));
    for (p, q) in ra.iter().zip(&rb) {
        assert!((p[0] / e - q[0]).abs() < 1e-12);
        assert!((p[1] - q[1]).abs() < 1e-12);
    }
}

#[test]
fn invalid_scad_parameter_is_named() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.cfg");
    std::fs::write(&cfg, "scenario=custom\nkind=scad\na=1.5\nzeta=1\n").unwrap();
    let o = run(&d.path().join("o"), &["experiment", "limits", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("scad_a > 2"));
    let o = run(&d.path().join("o"), &["dist", "--eta", "0"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("eta > 0"));
}

#[test]
fn missing_boundary_offset_surfaces_regime_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.cfg");
    std::fs::write(&cfg, "scenario=custom\nkind=hard\nzeta=-1\n").unwrap();
    let o = run(&d.path().join("o"), &["experiment", "limits", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("regime underdetermined"));
}

#[test]
fn limits_boundary_scenario_passes() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario": "consistent-hard-boundary"}"#).unwrap();
    ok(d.path(), &["experiment", "limits", "--config", cfg.to_str().unwrap()]);
    let v = json(&d.path().join("verdict.json"));
    assert_eq!(v["pass"], true);
    let text = std::fs::read_to_string(d.path().join("limits.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("scenario,mode,n,sup_gap"));
}

#[test]
fn failing_verdict_exits_nonzero() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.cfg");
    std::fs::write(&cfg, "scenario=consistent-hard-boundary\ntol=1e-9\n").unwrap();
    let o = run(d.path(), &["experiment", "limits", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&d.path().join("verdict.json"))["pass"], false);
}

#[test]
fn oracle_impossibility_passes_with_zero_sup() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.cfg");
    std::fs::write(&cfg, "estimator=oracle_cheat\ngrid=11\n").unwrap();
    ok(d.path(), &["experiment", "impossibility", "--config", cfg.to_str().unwrap(), "--reps", "200"]);
    assert_eq!(json(&d.path().join("verdict.json"))["pass"], true);
    assert_eq!(json(&d.path().join("summary.json"))["sup"], 0.0);
    let r = rows(&d.path().join("impossibility.csv"));
    assert_eq!(r.len(), 17);
}

#[test]
fn seed_flag_beats_environment() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.cfg");
    std::fs::write(&cfg, "estimator=plug_in\ngrid=5\nreps=50\n").unwrap();
    let c = cfg.to_str().unwrap();
    let seed_of = |dir: &Path| json(&dir.join("manifest.json"))["seed"].as_u64();
    let o = bin()
        .env("SHRINKDIST_SEED", "42")
        .args(["--out", d.path().join("env").to_str().unwrap(), "experiment", "impossibility", "--config", c])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(seed_of(&d.path().join("env")), Some(42));
    let o = bin()
        .env("SHRINKDIST_SEED", "42")
        .args(["--seed", "7", "--out", d.path().join("flag").to_str().unwrap()])
        .args(["experiment", "impossibility", "--config", c])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(seed_of(&d.path().join("flag")), Some(7));
    ok(&d.path().join("none"), &["experiment", "impossibility", "--config", c]);
    assert_eq!(seed_of(&d.path().join("none")), Some(1));
}

#[test]
fn manifest_lists_every_output_and_replay_detects_tampering() {
    let d = tempfile::tempdir().unwrap();
    let first = d.path().join("first");
    ok(&first, &["figure", "2"]);
    let mut m = json(&first.join("manifest.json"));
    let listed: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap()).collect();
    assert_eq!(listed, ["figure2.csv", "figure2.svg"]);
    m["outputs"][0]["sha256"] = "00".into();
    let bad = d.path().join("bad.json");
    std::fs::write(&bad, m.to_string()).unwrap();
    let o = run(&d.path().join("again"), &["replay", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("figure2.csv"));
}
