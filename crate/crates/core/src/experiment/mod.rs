//! Configuration, initial data, seeded ensembles and result files for the
//! ratio sweep and the consistency checks.

mod checks;
mod config;
mod init;
mod output;
mod run;

pub use checks::{transform_check, wick_check, PhiProfile, TransformCheck, WickCheck};
pub use config::{fundamental_period, ExperimentConfig, InitKind, DEFAULT_BETA_N, DEFAULT_SIZES, FULL_SIZES};
pub use init::{init_out_of_equilibrium, init_thermal, initial_field};
pub use output::{
    create_output, emit_outputs, fmt_f64, load_records, read_records, records_to_csv, render_svg, write_records,
    write_table, EmitOptions, PLOT_FILE, RESULTS_FILE, RUN_RECORD_HEADER,
};
pub use run::{
    ratio_sweep, ratio_sweep_timed, run_single, trajectory_seed, CellTiming, RunRecord, SweepOutput, TraceRow,
    TrajectoryOutcome, TrajectorySpec, DRIFT_TOLERANCE,
};
