//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shrinkdist::impossibility::{estimator_worst_case, CdfEstimatorSpec, MRule};
use shrinkdist::limits::ConvergenceMode;
use shrinkdist::montecarlo::{rate_sharpness, uniform_rate_bound};
use shrinkdist::normal::gaussian_tv;
use shrinkdist::quad::integrate;
use shrinkdist::{
    atom_weight, canonical_scenarios, consistent_limit, conservative_limit, estimand_gap, estimate, finite_sample_dist,
    ks_distance, rescaled_dist, rescaled_limit, simulate_estimates, uniform_rate_experiment, zero_event_threshold,
    EstimatorKind, ExtReal, MixtureDistribution, ModelPoint, RegimeSpec, SimConfig, ThetaGridRule, TuningPath, TuningPlan,
    TwoPointProblem,
};

type Res<T, E> = std::result::Result<T, E>;
type Outcome = Res<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Res<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn tuning(eta: f64, a: f64) -> TuningPlan {
    TuningPlan::new(eta, a).expect("valid tuning")
}

fn point(n: u64, th: f64) -> ModelPoint {
    ModelPoint::new(n, th).expect("valid point")
}

/// Atom weight for the figure configuration.
fn criterion_1() -> Outcome {
    let w = atom_weight(&point(40, 0.16), &tuning(0.05, 3.7));
    ensure((w - 0.1513).abs() <= 0.005, || format!("weight {w}"))?;
    Ok(format!("weight {w:.6}"))
}

/// Exact laws against 10⁶-replication Monte Carlo.
fn criterion_2() -> Outcome {
    let configs = [
        (40u64, 0.16, 0.05),
        (100, 0.0, 0.2),
        (1000, -0.05, 0.05),
        (25, 0.3, 0.1),
        (10_000, 0.05, 0.1), // η = n^{-1/4}
    ];
    let band = 1.63e-3 + 0.001;
    let mut worst_ks = 0.0f64;
    let mut worst_z = 0.0f64;
    for (i, &(n, th, eta)) in configs.iter().enumerate() {
        for kind in EstimatorKind::ALL {
            let cfg = SimConfig { seed: 1000 + i as u64, replications: 1_000_000, point: point(n, th), tuning: tuning(eta, 3.7) };
            let emp = simulate_estimates(kind, &cfg).map_err(e2s)?;
            let dist = finite_sample_dist(kind, &cfg.point, &cfg.tuning).map_err(e2s)?;
            let ks = ks_distance(&emp, &dist);
            ensure(ks <= band, || format!("{kind} {n} {th} {eta}: KS {ks}"))?;
            let w = atom_weight(&cfg.point, &cfg.tuning);
            let frac = emp.fraction_at(-cfg.point.sqrt_n() * th);
            let sd = (w * (1.0 - w) / 1e6).sqrt();
            let z = if sd > 0.0 { (frac - w).abs() / sd } else { (frac - w).abs() * f64::INFINITY };
            ensure(z <= 4.0 || frac == w, || format!("{kind} {n} {th} {eta}: atom fraction {frac} vs {w}"))?;
            worst_ks = worst_ks.max(ks);
            worst_z = worst_z.max(if z.is_nan() { 0.0 } else { z });
        }
    }
    Ok(format!("max KS {worst_ks:.2e} (band {band:.2e}), max atom z {worst_z:.2}"))
}

/// Structural identities on random inputs.
fn criterion_3() -> Outcome {
    use EstimatorKind::*;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100_000 {
        let y: f64 = rng.random_range(-10.0..10.0);
        let t = tuning(rng.random_range(1e-3..3.0), rng.random_range(2.001..10.0));
        let (h, s, c) = (estimate(Hard, y, &t), estimate(Soft, y, &t), estimate(Scad, y, &t));
        let sign = |x: f64| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
        ensure(s == h - sign(h) * t.eta, || format!("soft/hard relation at y={y}"))?;
        let sandwich = if s >= 0.0 && s <= c && c <= h { true } else { s <= 0.0 && h <= c && c <= s };
        ensure(sandwich, || format!("sandwich at y={y}"))?;
        let zero = y.abs() <= zero_event_threshold(&t);
        for (k, v) in [(Hard, h), (Soft, s), (Scad, c)] {
            ensure((v == 0.0) == zero, || format!("{k} zero set at y={y}"))?;
            ensure(estimate(k, -y, &t) == -v, || format!("{k} odd symmetry at y={y}"))?;
        }
    }
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1u64..100_000);
        let th = rng.random_range(-1.0..1.0);
        let x = rng.random_range(-6.0..6.0);
        let t = tuning(rng.random_range(1e-3..0.5), rng.random_range(2.001..10.0));
        for k in EstimatorKind::ALL {
            let f = finite_sample_dist(k, &point(n, th), &t).map_err(e2s)?;
            let g = finite_sample_dist(k, &point(n, -th), &t).map_err(e2s)?;
            worst = worst.max((g.cdf(x) - (1.0 - f.cdf_left(-x))).abs());
        }
    }
    ensure(worst < 1e-12, || format!("reflection error {worst}"))?;
    Ok(format!("10^5 estimator points exact; reflection max error {worst:.1e}"))
}

fn cdf_by_quadrature(d: &MixtureDistribution, x: f64) -> f64 {
    let br = d.breakpoints();
    let lo = br.first().copied().unwrap_or(0.0).min(x) - 40.0;
    let ac = integrate(|u| d.density_ac(u), lo, x, &br, 0.25);
    ac + d.atoms.iter().filter(|a| a.loc <= ExtReal::Finite(x)).map(|a| a.weight).sum::<f64>()
}

/// Mass conservation and CDF against quadrature.
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..2000 {
        let n = rng.random_range(1u64..10_000_000);
        let th = rng.random_range(-2.0..2.0);
        let t = tuning(rng.random_range(1e-4..1.0), rng.random_range(2.01..8.0));
        for k in EstimatorKind::ALL {
            for d in [
                finite_sample_dist(k, &point(n, th), &t).map_err(e2s)?,
                rescaled_dist(k, &point(n, th), &t).map_err(e2s)?,
            ] {
                worst = worst.max((d.total_mass() - 1.0).abs());
                count += 1;
            }
        }
    }
    let a = 3.7;
    let mut laws = Vec::new();
    for sc in canonical_scenarios(a).map_err(e2s)? {
        laws.push(sc.limit().map_err(e2s)?);
    }
    let nus = [ExtReal::NegInf, ExtReal::Finite(-1.3), ExtReal::ZERO, ExtReal::Finite(0.7), ExtReal::PosInf];
    for k in EstimatorKind::ALL {
        for nu in nus {
            for e in [0.0, 0.5, 2.0] {
                laws.push(conservative_limit(k, nu, e, a).map_err(e2s)?);
            }
        }
        for (z, r) in [(0.5, None), (1.0, Some(0.3)), (-1.0, Some(-0.4)), (2.0, None), (a, Some(1.0)), (-a, Some(0.2)), (a, Some(f64::INFINITY)), (5.0, None)] {
            let r = r.map(ExtReal::new).transpose().map_err(e2s)?;
            let reg = RegimeSpec::consistent_zeta(ExtReal::new(z).map_err(e2s)?, r).map_err(e2s)?;
            laws.push(consistent_limit(k, &reg, a).map_err(e2s)?);
            laws.push(rescaled_limit(k, &reg, a).map_err(e2s)?);
        }
    }
    let mut finite_laws = 0;
    for l in &laws {
        worst = worst.max((l.dist.total_mass() - 1.0).abs());
        if l.mode != ConvergenceMode::MassEscape {
            worst = worst.max((l.finite_mass() - 1.0).abs());
            finite_laws += 1;
        }
    }
    ensure(worst < 1e-10, || format!("mass error {worst}"))?;
    let mut qworst = 0.0f64;
    let p = point(40, 0.16);
    for k in EstimatorKind::ALL {
        let d = finite_sample_dist(k, &p, &tuning(0.05, 3.7)).map_err(e2s)?;
        for i in 0..100 {
            let x = -5.0 + 0.1 * i as f64 + 0.0123;
            qworst = qworst.max((d.cdf(x) - cdf_by_quadrature(&d, x)).abs());
        }
    }
    ensure(qworst < 1e-10, || format!("quadrature error {qworst}"))?;
    Ok(format!(
        "{count} laws + {} limit laws ({finite_laws} finite-mass): mass error {worst:.1e}; quadrature {qworst:.1e}",
        laws.len()
    ))
}

/// Every limit-theorem case converges on an atom-avoiding grid.
fn criterion_5() -> Outcome {
    let scenarios = canonical_scenarios(3.7).map_err(e2s)?;
    let mut worst = 0.0f64;
    for sc in &scenarios {
        let rep = sc.check(&[1_000, 1_000_000]).map_err(e2s)?;
        let g = rep.column("sup_gap");
        let (g3, g6) = (g[0].unwrap_or(f64::NAN), g[1].unwrap_or(f64::NAN));
        ensure(g6 < 0.02 && g6 < g3, || format!("{}: gap {g3} at 1e3, {g6} at 1e6", sc.name))?;
        worst = worst.max(g6);
    }
    Ok(format!("{} scenarios, largest gap at n=1e6 {worst:.2e}", scenarios.len()))
}

/// Uniform rate bound and failure of uniform √n-consistency.
fn criterion_6() -> Outcome {
    let m = 6.0;
    let bound = uniform_rate_bound(m);
    ensure((bound - 0.0254).abs() < 1e-4, || format!("bound {bound}"))?;
    let mut worst = 0.0f64;
    for kind in EstimatorKind::ALL {
        for path in [TuningPath::new(1.0, 0.25).map_err(e2s)?, TuningPath::conservative(1.0).map_err(e2s)?] {
            let rep = uniform_rate_experiment(kind, &path, m, &[100, 10_000, 1_000_000], &ThetaGridRule::default())
                .map_err(e2s)?;
            for p in rep.column("sup_prob") {
                let p = p.unwrap_or(f64::NAN);
                ensure(p <= bound, || format!("{kind} gamma={}: sup {p} > {bound}", path.gamma))?;
                worst = worst.max(p);
            }
        }
    }
    let sharp = rate_sharpness(EstimatorKind::Hard, &TuningPath::new(1.0, 0.25).map_err(e2s)?, m, &[1_000_000])
        .map_err(e2s)?;
    let p = sharp.column("prob")[0].unwrap_or(f64::NAN);
    ensure(p >= 0.99, || format!("sqrt-n escape probability {p}"))?;
    Ok(format!("max sup {worst:.2e} <= {bound:.4}; escape probability at 1e6 {p:.4}"))
}

/// Two-point lower bounds and worst-case error of concrete estimators.
fn criterion_7() -> Outcome {
    for kind in EstimatorKind::ALL {
        for (n, t, eta) in [(100u64, 0.0, 0.196), (10_000, 0.5, 0.03), (40, -0.7, 0.05)] {
            let mut prev = f64::INFINITY;
            let mut d = 0.1;
            let mut last = f64::NAN;
            while d >= 1e-4 * (1.0 - 1e-9) {
                let p = TwoPointProblem::new(kind, n, t, d, 2.0, tuning(eta, 3.7)).map_err(e2s)?;
                last = estimand_gap(&p).map_err(e2s)?.remainder.abs();
                ensure(last <= prev + 1e-15, || format!("{kind} {n}: remainder grew at delta {d}"))?;
                prev = last;
                d /= 2.0;
            }
            let p = TwoPointProblem::new(kind, n, t, 1e-4, 2.0, tuning(eta, 3.7)).map_err(e2s)?;
            last = last.max(estimand_gap(&p).map_err(e2s)?.remainder.abs());
            ensure(last < 0.01, || format!("{kind} {n}: final remainder {last}"))?;
        }
    }
    for n in [1u64, 40, 10_000, 100_000_000] {
        let p = TwoPointProblem::new(EstimatorKind::Hard, n, 0.0, 1e-6, 2.0, tuning(0.1, 3.7)).map_err(e2s)?;
        let b = 0.5 * (1.0 - gaussian_tv(n, p.theta(1e-6), p.theta(-1e-6)));
        ensure(b >= 0.4999, || format!("two-point bound {b} at n={n}"))?;
    }
    let path = TuningPath::new(1.0, 0.25).map_err(e2s)?;
    let specs = [
        CdfEstimatorSpec::PretestPlugin { gamma: 0.25 },
        CdfEstimatorSpec::MOutOfNBootstrap { m: MRule::Sqrt, resamples: 0 },
    ];
    let mut line = Vec::new();
    for kind in EstimatorKind::ALL {
        let plug = estimator_worst_case(&CdfEstimatorSpec::PlugIn, kind, 100_000, 0.0, &path, 2.0, 41, 77, 10_000)
            .map_err(e2s)?
            .summary
            .sup;
        for spec in &specs {
            let mut sups = Vec::new();
            for n in [1_000u64, 10_000, 100_000] {
                let wc = estimator_worst_case(spec, kind, n, 0.0, &path, 2.0, 41, 77, 10_000).map_err(e2s)?;
                sups.push(wc.summary.sup);
            }
            ensure(sups[1] >= 0.5 - 0.05, || format!("{kind} {}: sup {} at 1e4", spec.name(), sups[1]))?;
            ensure(sups.windows(2).all(|w| w[1] >= w[0]), || format!("{kind} {}: sups {sups:?}", spec.name()))?;
            if matches!(spec, CdfEstimatorSpec::MOutOfNBootstrap { .. }) {
                ensure(sups[2] > plug, || format!("{kind}: bootstrap {} vs plug-in {plug}", sups[2]))?;
            }
            line.push(format!("{kind}/{}={:.3}", spec.name(), sups[1]));
        }
        line.push(format!("{kind}/plug_in={plug:.3}"));
    }
    Ok(format!("sups at 1e4 (non-decreasing over 1e3..1e5): {}", line.join(" ")))
}

/// Rescaled SCAD law concentrates at −(a − ζ)/(a − 2).
fn criterion_8() -> Outcome {
    let (a, zeta, n) = (3.7, 3.0, 100_000_000u64);
    let target = -(a - zeta) / (a - 2.0);
    let mass = |gamma: f64| -> Res<f64, String> {
        let path = TuningPath::with_a(1.0, gamma, a).map_err(e2s)?;
        let t = path.plan(n).map_err(e2s)?;
        let g = rescaled_dist(EstimatorKind::Scad, &point(n, zeta * t.eta), &t).map_err(e2s)?;
        Ok(g.cdf(target + 0.01) - g.cdf_left(target - 0.01))
    };
    let m8 = mass(0.125)?;
    let m4 = mass(0.25)?;
    // with η = n^{-1/4} the spread (a−1)/((a−2)√nη) is still 0.016: check it against its closed form
    let e4 = (n as f64).sqrt() * (n as f64).powf(-0.25);
    let closed = 2.0 * shrinkdist::normal::cdf(0.01 * e4 * (a - 2.0) / (a - 1.0)) - 1.0;
    ensure((m4 - closed).abs() < 1e-3, || format!("n^-1/4 mass {m4} vs {closed}"))?;
    ensure(m8 >= 0.999, || format!("mass {m8}"))?;
    Ok(format!("mass within 0.01 of {target:.5}: {m8:.6} (eta = n^-1/8); {m4:.4} with eta = n^-1/4"))
}

fn sh(bin: &Path, out: &Path, args: &[&str]) -> Res<(), String> {
    let o = Command::new(bin)
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("SHRINKDIST_SEED")
        .output()
        .map_err(e2s)?;
    ensure(o.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn data_files(dir: &Path) -> Res<Vec<(String, Vec<u8>)>, String> {
    let mut v = Vec::new();
    for e in std::fs::read_dir(dir).map_err(e2s)? {
        let p = e.map_err(e2s)?.path();
        let name = p.file_name().unwrap_or_default().to_string_lossy().to_string();
        if name.ends_with(".csv") || name.ends_with(".json") {
            v.push((name, std::fs::read(&p).map_err(e2s)?));
        }
    }
    v.sort();
    Ok(v)
}

/// Every CLI command replays byte-identically from its manifest.
fn criterion_9() -> Outcome {
    let bin = Path::new(env!("CARGO_BIN_EXE_shrinkdist"));
    let tmp = tempfile::tempdir().map_err(e2s)?;
    let root = tmp.path();
    std::fs::write(root.join("imp.cfg"), "estimator=m_out_of_n_bootstrap\nreps=300\ngrid=11\nseed=5\n").map_err(e2s)?;
    std::fs::write(root.join("lim.cfg"), "scenario=consistent-scad-boundary\n").map_err(e2s)?;
    let imp = root.join("imp.cfg").to_string_lossy().to_string();
    let lim = root.join("lim.cfg").to_string_lossy().to_string();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("fig1", vec!["figure", "1"]),
        ("fig2", vec!["figure", "2"]),
        ("fig3", vec!["figure", "3", "--a", "2.5"]),
        ("dist", vec!["dist", "--kind", "soft", "--scaling", "inv_eta"]),
        ("sel", vec!["experiment", "selection"]),
        ("lim", vec!["experiment", "limits", "--config", &lim]),
        ("ur", vec!["experiment", "uniform-rate"]),
        ("imp", vec!["experiment", "impossibility", "--config", &imp]),
    ];
    let mut files = 0;
    for (name, args) in &runs {
        let first = root.join(name);
        sh(bin, &first, args)?;
        let dist_json = first.join("dist.json");
        let again = root.join(format!("{name}-replay"));
        sh(bin, &again, &["replay", &first.join("manifest.json").to_string_lossy()])?;
        let (a, b) = (data_files(&first)?, data_files(&again)?);
        ensure(a == b && !a.is_empty(), || format!("{name}: replay output differs"))?;
        files += a.len();
        if dist_json.exists() {
            let reload = root.join(format!("{name}-reload"));
            sh(bin, &reload, &["dist", "--from-json", &dist_json.to_string_lossy()])?;
            let same = std::fs::read(reload.join("dist.csv")).map_err(e2s)? == std::fs::read(first.join("dist.csv")).map_err(e2s)?;
            ensure(same, || "dist JSON reload changed the CSV".into())?;
            let again = root.join(format!("{name}-reload-replay"));
            sh(bin, &again, &["replay", &reload.join("manifest.json").to_string_lossy()])?;
            ensure(data_files(&again)? == data_files(&reload)?, || "reload replay differs".into())?;
        }
    }
    Ok(format!("{} commands, {files} CSV/JSON files identical on replay", runs.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("figure-1 atom weight", criterion_1),
        ("closed form vs Monte Carlo", criterion_2),
        ("structural identities", criterion_3),
        ("mass conservation", criterion_4),
        ("limit convergence", criterion_5),
        ("uniform rate", criterion_6),
        ("impossibility", criterion_7),
        ("rescaled SCAD point mass", criterion_8),
        ("CLI determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {}: PASS  {title} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {title} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
