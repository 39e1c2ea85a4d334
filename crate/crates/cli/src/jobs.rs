//! Every command is a serialisable [`Job`]; the manifest stores the job so a
//! replay runs exactly the same thing.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use serde_json::json;
use shrinkdist::impossibility::{estimator_worst_case, CdfEstimatorSpec, MRule};
use shrinkdist::limits::Scenario;
use shrinkdist::montecarlo::{rate_sharpness, uniform_rate_bound, uniform_rate_experiment, ThetaGridRule};
use shrinkdist::report::{fmt_real, Cell, ExperimentReport};
use shrinkdist::{
    canonical_scenarios, finite_sample_dist, rescaled_dist, selection_convergence_table, EstimatorKind, ExtReal,
    MixtureDistribution, ModelPoint, RegimeSpec, ThetaRule, TuningPath, TuningPlan,
};

use crate::args::{Cli, Cmd, ExperimentName, ScalingArg};
use crate::manifest::{self, RunManifest};
use crate::{config, svg};

const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Job {
    Figure(FigureJob),
    Dist(DistJob),
    Selection(SelectionConfig),
    Limits(LimitsConfig),
    UniformRate(UniformRateConfig),
    Impossibility(ImpossibilityConfig),
}

impl Job {
    pub fn command(&self) -> &'static str {
        match self {
            Job::Figure(_) => "figure",
            Job::Dist(_) => "dist",
            Job::Selection(_) => "experiment selection",
            Job::Limits(_) => "experiment limits",
            Job::UniformRate(_) => "experiment uniform-rate",
            Job::Impossibility(_) => "experiment impossibility",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Impossibility(c) => Some(c.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureJob {
    pub which: u8,
    pub kind: EstimatorKind,
    pub n: u64,
    pub theta: f64,
    pub eta: f64,
    pub a: f64,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistJob {
    pub kind: EstimatorKind,
    pub n: u64,
    pub theta: f64,
    pub eta: f64,
    pub a: f64,
    pub scaling: ScalingArg,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Set when tabulating a distribution loaded from JSON.
    pub source: Option<MixtureDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub eta_c: f64,
    pub eta_gamma: f64,
    pub a: f64,
    pub theta: Option<f64>,
    pub nu: Option<f64>,
    pub zeta: Option<f64>,
    pub offset: Option<f64>,
    pub r: Option<f64>,
    pub drift: f64,
    pub n_list: Vec<u64>,
    pub tol: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            eta_c: 1.0,
            eta_gamma: 0.25,
            a: 3.7,
            theta: None,
            nu: Some(1.0),
            zeta: None,
            offset: None,
            r: None,
            drift: 0.0,
            n_list: vec![100, 10_000, 1_000_000],
            tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsConfig {
    /// `all`, a canonical scenario name, or `custom`.
    pub scenario: String,
    pub kind: EstimatorKind,
    pub scaling: ScalingArg,
    pub eta_c: f64,
    pub eta_gamma: f64,
    pub a: f64,
    pub theta: Option<f64>,
    pub nu: Option<f64>,
    pub zeta: Option<f64>,
    pub offset: Option<f64>,
    pub r: Option<f64>,
    pub drift: f64,
    pub n_list: Vec<u64>,
    pub tol: f64,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        LimitsConfig {
            scenario: "all".into(),
            kind: EstimatorKind::Hard,
            scaling: ScalingArg::SqrtN,
            eta_c: 1.0,
            eta_gamma: 0.25,
            a: 3.7,
            theta: None,
            nu: None,
            zeta: None,
            offset: None,
            r: None,
            drift: 0.5,
            n_list: vec![1_000, 1_000_000],
            tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformRateConfig {
    pub kind: EstimatorKind,
    pub eta_c: f64,
    pub eta_gamma: f64,
    pub a: f64,
    pub m: f64,
    pub n_list: Vec<u64>,
    pub grid_points: usize,
    /// Also tabulate `P(√n|θ̂ − θ_n| > M)` along `θ_n = η_n/2`.
    pub sharpness: bool,
}

impl Default for UniformRateConfig {
    fn default() -> Self {
        UniformRateConfig {
            kind: EstimatorKind::Hard,
            eta_c: 1.0,
            eta_gamma: 0.25,
            a: 3.7,
            m: 6.0,
            n_list: vec![100, 10_000, 1_000_000],
            grid_points: ThetaGridRule::default().points,
            sharpness: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpossibilityConfig {
    /// `pretest_plugin`, `m_out_of_n_bootstrap`, `plug_in` or `oracle_cheat`.
    pub estimator: String,
    pub cutoff_gamma: f64,
    /// `sqrt`, `power` or `full`.
    pub m_rule: String,
    pub m_power: f64,
    pub resamples: usize,
    pub kind: EstimatorKind,
    pub n: u64,
    pub t: f64,
    pub c: f64,
    pub eta_c: f64,
    pub eta_gamma: f64,
    pub a: f64,
    pub grid: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for ImpossibilityConfig {
    fn default() -> Self {
        ImpossibilityConfig {
            estimator: "pretest_plugin".into(),
            cutoff_gamma: 0.25,
            m_rule: "sqrt".into(),
            m_power: 0.5,
            resamples: 0,
            kind: EstimatorKind::Hard,
            n: 10_000,
            t: 0.0,
            c: 2.0,
            eta_c: 1.0,
            eta_gamma: 0.25,
            a: 3.7,
            grid: 41,
            reps: 10_000,
            seed: DEFAULT_SEED,
        }
    }
}

impl ImpossibilityConfig {
    fn spec(&self) -> anyhow::Result<CdfEstimatorSpec> {
        let m = match self.m_rule.as_str() {
            "sqrt" => MRule::Sqrt,
            "full" => MRule::Full,
            "power" => MRule::Power { p: self.m_power },
            other => bail!("unknown m_rule {other:?} (expected sqrt, power or full)"),
        };
        Ok(match self.estimator.as_str() {
            "pretest_plugin" => CdfEstimatorSpec::PretestPlugin { gamma: self.cutoff_gamma },
            "m_out_of_n_bootstrap" => CdfEstimatorSpec::MOutOfNBootstrap { m, resamples: self.resamples },
            "plug_in" => CdfEstimatorSpec::PlugIn,
            "oracle_cheat" => CdfEstimatorSpec::OracleCheat,
            other => bail!("unknown estimator {other:?}"),
        })
    }
}

struct RuleFields {
    theta: Option<f64>,
    nu: Option<f64>,
    zeta: Option<f64>,
    offset: Option<f64>,
    r: Option<f64>,
    drift: f64,
}

/// θ-sequence from config keys: `zeta` (with `r` or `offset`), else `nu`, else `theta`.
/// Under consistent tuning a `zeta` on the boundary without `r` is rejected by the regime itself.
fn theta_rule(f: &RuleFields, path: &TuningPath, boundary: Option<f64>) -> anyhow::Result<ThetaRule> {
    let rule = if let Some(z) = f.zeta {
        if path.is_consistent() {
            let r = f.r.map(ExtReal::new).transpose()?;
            let regime = RegimeSpec::consistent_zeta(ExtReal::new(z)?, r)?;
            if let Some(b) = boundary.filter(|b| z.abs() == *b) {
                regime.r_at_boundary(b)?;
            }
        }
        match f.r {
            Some(r) if !r.is_finite() => bail!("r must be finite for a realisable sequence"),
            Some(r) => ThetaRule::boundary(z, r),
            None => ThetaRule::eta_multiple(z, f.offset.unwrap_or(0.0)),
        }
    } else if let Some(nu) = f.nu {
        ThetaRule::local(nu)
    } else {
        ThetaRule::Fixed { theta: f.theta.unwrap_or(0.0) }
    };
    Ok(rule.with_drift(f.drift))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Check {
    name: String,
    value: f64,
    relation: &'static str,
    threshold: f64,
    pass: bool,
}

impl Check {
    fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, relation: "<=", threshold, pass: value <= threshold }
    }
    fn lt(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, relation: "<", threshold, pass: value < threshold }
    }
    fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, relation: ">=", threshold, pass: value >= threshold }
    }
}

type Files = Vec<(String, Vec<u8>)>;

fn verdict(name: &str, checks: &[Check]) -> (bool, Vec<u8>) {
    let pass = checks.iter().all(|c| c.pass);
    let v = json!({ "experiment": name, "pass": pass, "checks": checks });
    (pass, json_bytes(&v))
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s.into_bytes()
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![lo],
        _ => (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect(),
    }
}

fn figure_defaults(which: u8) -> EstimatorKind {
    match which {
        1 => EstimatorKind::Hard,
        2 => EstimatorKind::Soft,
        _ => EstimatorKind::Scad,
    }
}

fn run_figure(j: &FigureJob) -> anyhow::Result<Files> {
    let tuning = TuningPlan::new(j.eta, j.a)?;
    let d = finite_sample_dist(j.kind, &ModelPoint::new(j.n, j.theta)?, &tuning)?;
    let mut rows: Vec<(f64, f64)> = linspace(j.lo, j.hi, j.points).into_iter().map(|x| (x, d.density_ac(x))).collect();
    for b in d.breakpoints() {
        if b >= j.lo && b <= j.hi {
            rows.push((b, d.density_ac(b)));
            rows.push((b, d.density_ac_right(b)));
        }
    }
    // stable: at a jump the left limit precedes the right one
    rows.sort_by(|p, q| p.0.total_cmp(&q.0));
    rows.dedup();
    let mut csv = String::from("x,density,atom\n");
    for &(x, y) in &rows {
        csv.push_str(&format!("{},{},0\n", fmt_real(x), fmt_real(y)));
    }
    let mut markers = Vec::new();
    for a in &d.atoms {
        if let ExtReal::Finite(x) = a.loc {
            csv.push_str(&format!("{},{},1\n", fmt_real(x), fmt_real(a.weight)));
            markers.push(x);
        }
    }
    let plot = svg::density_plot(&rows, &markers, &format!("figure {}", j.which));
    Ok(vec![
        (format!("figure{}.csv", j.which), csv.into_bytes()),
        (format!("figure{}.svg", j.which), plot.into_bytes()),
    ])
}

fn run_dist(j: &DistJob) -> anyhow::Result<Files> {
    let law = match &j.source {
        Some(d) => d.clone(),
        None => {
            let tuning = TuningPlan::new(j.eta, j.a)?;
            let point = ModelPoint::new(j.n, j.theta)?;
            match j.scaling {
                ScalingArg::SqrtN => finite_sample_dist(j.kind, &point, &tuning)?,
                ScalingArg::InvEta => rescaled_dist(j.kind, &point, &tuning)?,
            }
        }
    };
    let mut csv = String::from("x,cdf,ac_density\n");
    for x in linspace(j.lo, j.hi, j.points) {
        csv.push_str(&format!("{},{},{}\n", fmt_real(x), fmt_real(law.cdf(x)), fmt_real(law.density_ac(x))));
    }
    Ok(vec![("dist.csv".into(), csv.into_bytes()), ("dist.json".into(), json_bytes(&law))])
}

fn last_two(rep: &ExperimentReport, col: &str) -> (f64, f64) {
    let v = rep.column(col);
    let first = v.first().copied().flatten().unwrap_or(f64::NAN);
    let last = v.last().copied().flatten().unwrap_or(f64::NAN);
    (first, last)
}

fn run_selection(c: &SelectionConfig) -> anyhow::Result<(Files, bool)> {
    let path = TuningPath::with_a(c.eta_c, c.eta_gamma, c.a)?;
    let f = RuleFields { theta: c.theta, nu: c.nu, zeta: c.zeta, offset: c.offset, r: c.r, drift: c.drift };
    let rule = theta_rule(&f, &path, Some(1.0))?;
    let rep = selection_convergence_table(&path, &rule, &c.n_list)?;
    let (first, last) = last_two(&rep, "gap");
    let checks = [
        Check::lt("gap at largest n", last, c.tol),
        Check::le("gap at largest n vs smallest n", last, first + 1e-12),
    ];
    let (pass, v) = verdict("selection", &checks);
    Ok((vec![("selection.csv".into(), rep.to_csv().into_bytes()), ("verdict.json".into(), v)], pass))
}

fn run_limits(c: &LimitsConfig) -> anyhow::Result<(Files, bool)> {
    if c.n_list.len() < 2 {
        bail!("n_list needs at least two sample sizes");
    }
    let scenarios: Vec<Scenario> = match c.scenario.as_str() {
        "all" => canonical_scenarios(c.a)?,
        "custom" => {
            let path = TuningPath::with_a(c.eta_c, c.eta_gamma, c.a)?;
            let f = RuleFields { theta: c.theta, nu: c.nu, zeta: c.zeta, offset: c.offset, r: c.r, drift: c.drift };
            let boundary = match c.kind {
                EstimatorKind::Hard => Some(1.0),
                EstimatorKind::Scad => Some(c.a),
                EstimatorKind::Soft => None,
            };
            let rule = theta_rule(&f, &path, boundary)?;
            vec![Scenario { name: "custom", kind: c.kind, scaling: c.scaling.into(), path, rule }]
        }
        name => {
            let all = canonical_scenarios(c.a)?;
            let known: Vec<&str> = all.iter().map(|s| s.name).collect();
            match all.iter().find(|s| s.name == name) {
                Some(s) => vec![*s],
                None => bail!("unknown scenario {name:?}; known: all, custom, {}", known.join(", ")),
            }
        }
    };
    let mut table = ExperimentReport::new("limits", &["scenario", "mode", "n", "sup_gap", "argmax", "ac_l1"]);
    let mut checks = Vec::new();
    let mut metas = Vec::new();
    for sc in &scenarios {
        let rep = sc.check(&c.n_list)?;
        let mode = rep.meta["mode"].as_str().unwrap_or("").to_string();
        for row in &rep.rows {
            let mut r = vec![Cell::from(sc.name), Cell::Text(mode.clone())];
            r.extend(row.iter().cloned());
            table.push(r);
        }
        let (first, last) = last_two(&rep, "sup_gap");
        checks.push(Check::lt(format!("{}: sup gap at largest n", sc.name), last, c.tol));
        checks.push(Check::lt(format!("{}: sup gap below smallest-n value", sc.name), last, first));
        metas.push(rep.meta);
    }
    table.meta = json!({ "scenarios": metas, "n_list": c.n_list });
    let (pass, v) = verdict("limits", &checks);
    Ok((vec![("limits.csv".into(), table.to_csv().into_bytes()), ("verdict.json".into(), v)], pass))
}

fn run_uniform_rate(c: &UniformRateConfig) -> anyhow::Result<(Files, bool)> {
    let path = TuningPath::with_a(c.eta_c, c.eta_gamma, c.a)?;
    let rep = uniform_rate_experiment(c.kind, &path, c.m, &c.n_list, &ThetaGridRule { points: c.grid_points })?;
    let bound = uniform_rate_bound(c.m);
    let mut checks: Vec<Check> = rep
        .column("sup_prob")
        .iter()
        .zip(&c.n_list)
        .map(|(p, n)| Check::le(format!("sup P(a_n|err| > M) at n = {n}"), p.unwrap_or(f64::NAN), bound))
        .collect();
    let mut files = vec![("uniform_rate.csv".to_string(), rep.to_csv().into_bytes())];
    if c.sharpness && path.is_consistent() {
        let sharp = rate_sharpness(c.kind, &path, c.m, &c.n_list)?;
        let (_, last) = last_two(&sharp, "prob");
        checks.push(Check::ge("P(sqrt(n)|err| > M) at theta = eta/2, largest n", last, 0.99));
        files.push(("sharpness.csv".into(), sharp.to_csv().into_bytes()));
    }
    let (pass, v) = verdict("uniform-rate", &checks);
    files.push(("verdict.json".into(), v));
    Ok((files, pass))
}

fn run_impossibility(c: &ImpossibilityConfig) -> anyhow::Result<(Files, bool)> {
    let path = TuningPath::with_a(c.eta_c, c.eta_gamma, c.a)?;
    let spec = c.spec()?;
    let wc = estimator_worst_case(&spec, c.kind, c.n, c.t, &path, c.c, c.grid, c.seed, c.reps)?;
    let check = match spec {
        CdfEstimatorSpec::OracleCheat => Check::le("worst-case error probability", wc.summary.sup, 0.0),
        _ => Check::ge("worst-case error probability", wc.summary.sup, 0.5 - 0.05),
    };
    let (pass, v) = verdict("impossibility", &[check]);
    Ok((
        vec![
            ("impossibility.csv".into(), wc.report.to_csv().into_bytes()),
            ("summary.json".into(), json_bytes(&wc.summary)),
            ("verdict.json".into(), v),
        ],
        pass,
    ))
}

/// Runs a job and returns its output files (name, bytes) and whether every verdict passed.
pub fn run(job: &Job) -> anyhow::Result<(Files, bool)> {
    match job {
        Job::Figure(j) => Ok((run_figure(j)?, true)),
        Job::Dist(j) => Ok((run_dist(j)?, true)),
        Job::Selection(c) => run_selection(c),
        Job::Limits(c) => run_limits(c),
        Job::UniformRate(c) => run_uniform_rate(c),
        Job::Impossibility(c) => run_impossibility(c),
    }
}

fn write_all(out: &Path, files: &Files, job: &Job) -> anyhow::Result<RunManifest> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (name, bytes) in files {
        let p = out.join(name);
        std::fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
    }
    let m = RunManifest::new(job.clone(), files);
    let p = out.join(manifest::FILE);
    std::fs::write(&p, json_bytes(&m)).with_context(|| format!("writing {}", p.display()))?;
    Ok(m)
}

fn build_job(cli: &Cli) -> anyhow::Result<Job> {
    Ok(match &cli.cmd {
        Cmd::Figure { which, n, theta, eta, a } => Job::Figure(FigureJob {
            which: *which,
            kind: figure_defaults(*which),
            n: n.unwrap_or(40),
            theta: theta.unwrap_or(0.16),
            eta: eta.unwrap_or(0.05),
            a: a.unwrap_or(3.7),
            lo: -5.0,
            hi: 5.0,
            points: 2000,
        }),
        Cmd::Dist { kind, n, theta, eta, a, scaling, lo, hi, points, from_json } => {
            let source = match from_json {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?)
                }
                None => None,
            };
            Job::Dist(DistJob {
                kind: *kind,
                n: *n,
                theta: *theta,
                eta: *eta,
                a: *a,
                scaling: *scaling,
                lo: *lo,
                hi: *hi,
                points: *points,
                source,
            })
        }
        Cmd::Experiment { name, config, reps } => {
            let path = config.as_deref();
            match name {
                ExperimentName::Selection => Job::Selection(config::load(path)?),
                ExperimentName::Limits => Job::Limits(config::load(path)?),
                ExperimentName::UniformRate => Job::UniformRate(config::load(path)?),
                ExperimentName::Impossibility => {
                    let mut c: ImpossibilityConfig = config::load(path)?;
                    if let Some(s) = cli.seed {
                        c.seed = s;
                    }
                    if let Some(r) = reps {
                        c.reps = *r;
                    }
                    Job::Impossibility(c)
                }
            }
        }
        Cmd::Replay { .. } => unreachable!("replay has no job of its own"),
    })
}

/// Runs the parsed command line; `Ok(false)` means a verdict failed.
pub fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    if let Cmd::Replay { manifest: mpath } = &cli.cmd {
        let recorded = RunManifest::read(mpath)?;
        let (files, pass) = run(&recorded.job)?;
        let fresh = write_all(&cli.out, &files, &recorded.job)?;
        let mismatched: Vec<&str> = recorded
            .outputs
            .iter()
            .filter(|o| !fresh.outputs.contains(o))
            .map(|o| o.file.as_str())
            .collect();
        if !mismatched.is_empty() {
            bail!("replay differs from manifest in: {}", mismatched.join(", "));
        }
        println!("replay of {} reproduced {} files", recorded.command, recorded.outputs.len());
        return Ok(pass);
    }
    let job = build_job(&cli)?;
    let (files, pass) = run(&job)?;
    let m = write_all(&cli.out, &files, &job)?;
    for o in &m.outputs {
        println!("{}", cli.out.join(&o.file).display());
    }
    Ok(pass)
}
