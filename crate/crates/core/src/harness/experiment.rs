use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bpbcorrect::{bpb_correct, CorrectionConfig};
use crate::cmodulus::{DeltaProfile, ProfileSpec};
use crate::coperator::OracleConfig;
use crate::cspace::SpaceDescriptor;
use crate::error::{Error, Result};
use crate::harness::{gen_instance_with_profile, InstanceMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub seed: u64,
    /// Inclusive range for the column count `n`.
    pub n_range: (usize, usize),
    pub spaces: Vec<SpaceDescriptor>,
    pub epsilons: Vec<f64>,
    pub mode: InstanceMode,
    pub profile: ProfileSpec,
    pub oracle: OracleConfig,
    /// Records `wall_time`; off by default so outputs are reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: 10,
            seed: 0,
            n_range: (2, 6),
            spaces: vec![SpaceDescriptor::complex_line()],
            epsilons: vec![0.3, 0.6, 0.9],
            mode: InstanceMode::Attain,
            profile: ProfileSpec::Auto,
            oracle: OracleConfig::default(),
            timing: false,
        }
    }
}

/// One `(trial, space, ε)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub seed: u64,
    pub n: usize,
    pub space: String,
    pub epsilon: f64,
    pub mode: InstanceMode,
    pub succeeded: bool,
    pub dist_op: Option<f64>,
    pub dist_fn: Option<f64>,
    #[serde(rename = "norm_S")]
    pub norm_s: Option<f64>,
    pub min_cert_slack: Option<f64>,
    pub wall_time: Option<f64>,
    pub error: Option<String>,
}

const CSV_HEADER: [&str; 12] = [
    "seed",
    "n",
    "space",
    "epsilon",
    "mode",
    "succeeded",
    "dist_op",
    "dist_fn",
    "norm_S",
    "min_cert_slack",
    "wall_time",
    "error",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub rows: usize,
    pub succeeded: usize,
    /// `None` for an empty batch.
    pub success_rate: Option<f64>,
    pub worst_min_cert_slack: Option<f64>,
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let (lo, hi) = cfg.n_range;
    if lo == 0 || lo > hi {
        return Err(Error::InvalidConfig(format!("bad n range {lo}..={hi}")));
    }
    if let Some(e) = cfg.epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::InvalidConfig(format!(
            "epsilon {e} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Instance seed of a trial.
fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

fn trial_n(seed: u64, (lo, hi): (usize, usize)) -> usize {
    // SplitMix64 finalizer: spreads consecutive seeds over the range.
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    lo + (z % (hi - lo + 1) as u64) as usize
}

fn run_cell(
    seed: u64,
    n: usize,
    space: SpaceDescriptor,
    eps: f64,
    cfg: &ExperimentConfig,
    (generator, profile): &(DeltaProfile, DeltaProfile),
) -> ExperimentRow {
    let start = Instant::now();
    let mut row = ExperimentRow {
        seed,
        n,
        space: space.to_string(),
        epsilon: eps,
        mode: cfg.mode,
        succeeded: false,
        dist_op: None,
        dist_fn: None,
        norm_s: None,
        min_cert_slack: None,
        wall_time: None,
        error: None,
    };
    let outcome = gen_instance_with_profile(seed, n, generator, cfg.mode, eps).and_then(|inst| {
        let mut ccfg = CorrectionConfig::new(profile.clone());
        ccfg.oracle = cfg.oracle;
        ccfg.seed = seed;
        bpb_correct(&inst.operator, &inst.f0, eps, &ccfg)
    });
    match outcome {
        Ok(done) => {
            let cert = &done.certificate;
            let out = cert.outputs.as_ref().expect("completed runs carry outputs");
            row.dist_op = Some(out.dist_op);
            row.dist_fn = Some(out.dist_fn);
            row.norm_s = Some(out.norm_s);
            row.min_cert_slack = cert.min_slack();
            row.succeeded = cert.all_hold() && out.dist_op < eps && out.dist_fn < eps;
            if !cert.all_hold() {
                let failed: Vec<&str> = cert
                    .entries
                    .iter()
                    .filter(|e| !e.holds)
                    .map(|e| e.label.as_str())
                    .collect();
                row.error = Some(format!("failed entries: {}", failed.join(" ")));
            }
        }
        Err(err) => {
            if let Error::EmptySet { certificate, .. } = &err {
                row.min_cert_slack = certificate.min_slack();
            }
            row.error = Some(err.to_string());
        }
    }
    if cfg.timing {
        row.wall_time = Some(start.elapsed().as_secs_f64());
    }
    row
}

/// Runs every `(trial, space, ε)` cell. Rows come back in that nesting
/// order regardless of thread count; failures are recorded, not raised.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    validate(cfg)?;
    let mut profiles = HashMap::new();
    for space in &cfg.spaces {
        if let std::collections::hash_map::Entry::Vacant(e) = profiles.entry(space.to_string()) {
            // Instances are sized by the default profile, corrections use the
            // configured one.
            let generator = DeltaProfile::new(*space, ProfileSpec::Auto)?;
            let correction = DeltaProfile::new(*space, cfg.profile)?;
            e.insert((generator, correction));
        }
    }
    let cells: Vec<(u64, usize, SpaceDescriptor, f64)> = (0..cfg.trials)
        .flat_map(|trial| {
            let seed = trial_seed(cfg.seed, trial);
            let n = trial_n(seed, cfg.n_range);
            cfg.spaces
                .iter()
                .flat_map(move |&space| cfg.epsilons.iter().map(move |&eps| (seed, n, space, eps)))
        })
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(seed, n, space, eps)| {
            run_cell(seed, n, space, eps, cfg, &profiles[&space.to_string()])
        })
        .collect())
}

pub fn summarize(rows: &[ExperimentRow]) -> ExperimentSummary {
    let succeeded = rows.iter().filter(|r| r.succeeded).count();
    ExperimentSummary {
        rows: rows.len(),
        succeeded,
        success_rate: (!rows.is_empty()).then(|| succeeded as f64 / rows.len() as f64),
        worst_min_cert_slack: rows
            .iter()
            .filter_map(|r| r.min_cert_slack)
            .reduce(f64::min),
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    rows: &'a [ExperimentRow],
    summary: ExperimentSummary,
}

/// Writes rows as CSV (header always present) or as `{rows, summary}` JSON.
pub fn write_report(
    path: impl AsRef<Path>,
    rows: &[ExperimentRow],
    format: OutputFormat,
) -> Result<()> {
    match format {
        OutputFormat::Json => {
            let report = JsonReport {
                rows,
                summary: summarize(rows),
            };
            fs::write(path, crate::harness::io::to_canonical_json(&report)?)?;
        }
        OutputFormat::Csv => {
            let mut wtr = csv::WriterBuilder::new()
                .has_headers(false)
                .from_path(path)?;
            wtr.write_record(CSV_HEADER)?;
            for row in rows {
                wtr.serialize(row)?;
            }
            wtr.flush()?;
        }
    }
    Ok(())
}
