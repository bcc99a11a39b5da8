use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bpb_core::harness::io::{
    read_certificate, read_instance, to_canonical_json, write_certificate,
};
use bpb_core::harness::{
    basic_l_suite, gen_instance, run_experiment, summarize, tail_bound_suite, write_report,
    ExperimentConfig, InstanceMode, OutputFormat,
};
use bpb_core::{
    bpb_correct, estimate_delta, op_norm, verify_certificate, CorrectionConfig, DeltaProfile,
    Error, EstimatorConfig, OracleConfig, ProfileKind, ProfileSpec, SpaceDescriptor, CERT_TOL,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "bpb",
    version,
    about = "Norm-attaining corrections of operators on C(K)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Attain,
    Perturb,
}

impl From<Mode> for InstanceMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Attain => InstanceMode::Attain,
            Mode::Perturb => InstanceMode::Perturb,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen {
        #[arg(long)]
        n: usize,
        /// `c` or `lp:<p>:<dim>`.
        #[arg(long)]
        space: SpaceDescriptor,
        #[arg(long, value_enum, default_value = "attain")]
        mode: Mode,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator norm of an instance's operator.
    Norm {
        instance: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Value of the modulus of convexity used by the correction.
    Delta {
        #[arg(long)]
        space: SpaceDescriptor,
        #[arg(long)]
        eps: f64,
        /// `auto`, `analytic:c`, `analytic:l2` or `estimated[:safety=<r>]`.
        #[arg(long, default_value = "auto")]
        estimator: ProfileSpec,
    },
    /// Run the correction and write its certificate.
    Correct {
        instance: PathBuf,
        /// Defaults to the instance's epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value = "auto")]
        profile: ProfileSpec,
        #[arg(long)]
        relaxed_eta: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = CERT_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Batch of seeded corrections, written as CSV or JSON.
    Experiment {
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "c")]
        spaces: Vec<SpaceDescriptor>,
        /// Comma-separated; an empty string gives an empty batch.
        #[arg(long, default_value = "0.3,0.6,0.9")]
        epsilons: String,
        #[arg(long, value_enum, default_value = "attain")]
        mode: Mode,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value = "auto")]
        profile: ProfileSpec,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Record per-row wall time (makes output run-dependent).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded property suites for the disc and tail lemmas.
    Lemmas {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1000)]
        triples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-check a certificate at a given tolerance.
    Verify {
        certificate: PathBuf,
        #[arg(long, default_value_t = CERT_TOL)]
        tol: f64,
    },
}

/// Failures mapped to exit codes: 1 for failed checks or algorithm errors,
/// 2 for bad input.
enum Failure {
    Check(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Gen {
            n,
            space,
            mode,
            epsilon,
            seed,
            out,
        } => {
            let inst = gen_instance(seed, n, space, mode.into(), epsilon)?;
            emit(&to_canonical_json(&inst)?, out.as_deref())?;
        }
        Command::Norm {
            instance,
            seed,
            starts,
        } => {
            let inst = read_instance(&instance)?;
            let defaults = OracleConfig::default();
            let cfg = OracleConfig {
                seed: seed.unwrap_or(defaults.seed),
                starts: starts.unwrap_or(defaults.starts),
                ..defaults
            };
            let r = op_norm(&inst.operator, &cfg);
            let report = json!({
                "value": r.value,
                "maximizer": r.maximizer,
                "converged": r.converged,
                "iterations": r.iterations,
            });
            emit(&to_canonical_json(&report)?, None)?;
            if !r.converged {
                return Err(Failure::Run(Error::OracleNotConverged {
                    sweeps: r.iterations,
                }));
            }
        }
        Command::Delta {
            space,
            eps,
            estimator,
        } => {
            if !(eps > 0.0 && eps <= 2.0) {
                return Err(Error::InvalidConfig(format!("eps = {eps} must lie in (0, 2]")).into());
            }
            let profile = DeltaProfile::new(space, estimator)?;
            let mut report = json!({
                "space": space.to_string(),
                "epsilon": eps,
                "profile": profile.spec().to_string(),
                "delta": profile.evaluate(eps),
            });
            if profile.kind() == ProfileKind::Estimated {
                report["estimate"] =
                    json!(estimate_delta(&space, eps, &EstimatorConfig::default()));
                report["safety"] = json!(profile.safety());
            }
            emit(&to_canonical_json(&report)?, None)?;
        }
        Command::Correct {
            instance,
            epsilon,
            profile,
            relaxed_eta,
            seed,
            tol,
            out,
        } => {
            let inst = read_instance(&instance)?;
            let eps = epsilon.unwrap_or(inst.epsilon);
            let mut cfg = CorrectionConfig::new(DeltaProfile::new(inst.space, profile)?);
            cfg.relaxed_eta = relaxed_eta;
            cfg.tol = tol;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            match bpb_correct(&inst.operator, &inst.f0, eps, &cfg) {
                Ok(done) => {
                    let cert = &done.certificate;
                    write_certificate(&out, cert)?;
                    let o = cert.outputs.as_ref().expect("completed run");
                    println!(
                        "dist_op {:.6e}  dist_fn {:.6e}  norm_S {:.12}  min slack {:.3e}",
                        o.dist_op,
                        o.dist_fn,
                        o.norm_s,
                        cert.min_slack().unwrap_or(0.0)
                    );
                    let failed: Vec<&str> = cert
                        .entries
                        .iter()
                        .filter(|e| !e.holds)
                        .map(|e| e.label.as_str())
                        .collect();
                    if !failed.is_empty() {
                        return Err(Failure::Check(format!(
                            "failed entries: {}",
                            failed.join(" ")
                        )));
                    }
                }
                Err(Error::EmptySet { which, certificate }) => {
                    write_certificate(&out, &certificate)?;
                    return Err(Failure::Run(Error::EmptySet { which, certificate }));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Experiment {
            trials,
            seed,
            spaces,
            epsilons,
            mode,
            n_min,
            n_max,
            profile,
            format,
            timing,
            out,
        } => {
            let epsilons = epsilons
                .split(',')
                .map(str::trim)
                .filter(|e| !e.is_empty())
                .map(|e| {
                    e.parse::<f64>()
                        .map_err(|_| Error::InvalidConfig(format!("bad epsilon `{e}`")))
                })
                .collect::<Result<Vec<f64>, Error>>()?;
            let cfg = ExperimentConfig {
                trials,
                seed,
                n_range: (n_min, n_max),
                spaces,
                epsilons,
                mode: mode.into(),
                profile,
                oracle: OracleConfig::default(),
                timing,
            };
            let rows = run_experiment(&cfg)?;
            let format = match format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            write_report(&out, &rows, format)?;
            let summary = summarize(&rows);
            println!(
                "{} rows, {} succeeded, worst min slack {}",
                summary.rows,
                summary.succeeded,
                summary
                    .worst_min_cert_slack
                    .map_or("n/a".to_string(), |s| format!("{s:.3e}"))
            );
            if summary.succeeded < summary.rows {
                return Err(Failure::Check(format!(
                    "{} rows did not succeed",
                    summary.rows - summary.succeeded
                )));
            }
        }
        Command::Lemmas {
            samples,
            triples,
            seed,
        } => {
            let basic = basic_l_suite(samples, seed)?;
            println!(
                "disc lemma: {} samples ({} draws), {} exceptions, min slack {:.3e}",
                basic.samples, basic.draws, basic.exceptions, basic.min_slack
            );
            let tail = tail_bound_suite(triples, seed, CERT_TOL)?;
            println!(
                "tail lemma: {} triples ({} draws), {} exceptions, min slack {:.3e}",
                tail.triples, tail.draws, tail.exceptions, tail.min_slack
            );
            if basic.exceptions + tail.exceptions > 0 {
                return Err(Failure::Check("lemma suites reported exceptions".into()));
            }
        }
        Command::Verify { certificate, tol } => {
            let cert = read_certificate(&certificate)?;
            let report = verify_certificate(&cert, tol);
            for e in &report.entries {
                println!(
                    "{} {:<24} slack {:.6e}",
                    if e.pass { "ok  " } else { "FAIL" },
                    e.label,
                    e.slack
                );
            }
            if !report.all_pass {
                return Err(Failure::Check("certificate does not verify".into()));
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("BPB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("BPB_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            let usage = matches!(
                e,
                Error::Parse { .. } | Error::InvalidConfig(_) | Error::Io(_)
            );
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
