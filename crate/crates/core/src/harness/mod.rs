//! Instance generation, batch experiments, lemma suites and file formats.

mod experiment;
mod instance;
pub mod io;
mod lemmas;

pub use experiment::{
    run_experiment, summarize, write_report, ExperimentConfig, ExperimentRow, ExperimentSummary,
    OutputFormat,
};
pub use instance::{gen_instance, gen_instance_with_profile, Instance, InstanceMode};
pub use lemmas::{basic_l_suite, tail_bound_suite, BasicLReport, TailSuiteReport};
