use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use shrinkdist::{EstimatorKind, Scaling};

#[derive(Debug, Parser)]
#[command(name = "shrinkdist", version, about = "Finite-sample and limit laws of thresholding estimators")]
pub struct Cli {
    /// Seed for Monte Carlo work; falls back to SHRINKDIST_SEED.
    #[arg(long, global = true, env = "SHRINKDIST_SEED")]
    pub seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Density of the finite-sample law for figure 1 (hard), 2 (soft) or 3 (SCAD).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
    },
    /// CDF and density table plus the distribution as JSON.
    Dist {
        #[arg(long, default_value = "hard")]
        kind: EstimatorKind,
        #[arg(long, default_value_t = 40)]
        n: u64,
        #[arg(long, default_value_t = 0.16, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = 3.7)]
        a: f64,
        #[arg(long, value_enum, default_value = "sqrt_n")]
        scaling: ScalingArg,
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Tabulate a distribution previously written by this command instead.
        #[arg(long)]
        from_json: Option<PathBuf>,
    },
    /// Run an experiment from a key=value (or JSON) config file.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replications per θ (impossibility only).
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Re-run the command recorded in a manifest and compare output hashes.
    Replay { manifest: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum ScalingArg {
    SqrtN,
    InvEta,
}

impl From<ScalingArg> for Scaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::SqrtN => Scaling::SqrtN,
            ScalingArg::InvEta => Scaling::InvEta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    Selection,
    Limits,
    UniformRate,
    Impossibility,
}
