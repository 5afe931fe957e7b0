use std::time::{Duration, Instant};

use log::{info, warn};
use rayon::prelude::*;

use super::config::{fundamental_period, ExperimentConfig, InitKind};
use super::init::initial_field;
use crate::diagnostics::{QuarticKernel, RatioEstimate, Window, WindowAverage};
use crate::error::{Error, Result};
use crate::integrator::{evolve, IntegratorConfig, Observer};
use crate::lattice::{hamiltonian_physical, ChainState, LatticeParams};
use crate::seed::mix_seed;
use crate::spectral::ModeTransform;

/// Largest accepted `|H(t) - H(0)| / |H(0)|` along a trajectory.
pub const DRIFT_TOLERANCE: f64 = 1e-6;

/// Seed of one trajectory, independent of every other cell.
pub fn trajectory_seed(base_seed: u64, n: usize, beta_n_index: usize, init: InitKind, ensemble: usize) -> u64 {
    mix_seed(&[base_seed, n as u64, beta_n_index as u64, init.tag(), ensemble as u64])
}

/// Everything needed to run one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    pub params: LatticeParams,
    pub init: InitKind,
    pub seed: u64,
    pub integrator: IntegratorConfig,
    pub t_max: f64,
    pub window: Window,
}

impl TrajectorySpec {
    pub fn from_config(
        config: &ExperimentConfig,
        n: usize,
        beta_n_index: usize,
        init: InitKind,
        ensemble: usize,
    ) -> Result<Self> {
        let beta_n = *config.beta_n_values.get(beta_n_index).ok_or_else(|| {
            Error::Config(format!("betaN index {beta_n_index} out of range"))
        })?;
        let params = LatticeParams::from_beta_n(n, config.m, config.kappa, beta_n)?;
        let tf = fundamental_period(&params);
        Ok(Self {
            params,
            init,
            seed: trajectory_seed(config.base_seed, n, beta_n_index, init, ensemble),
            integrator: config.integrator(),
            t_max: config.t_max_in_tf * tf,
            window: Window {
                start: config.window_in_tf[0] * tf,
                end: config.window_in_tf[1] * tf,
            },
        })
    }
}

/// One sample of a trajectory trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// Total physical energy.
    pub energy: f64,
}

impl TraceRow {
    pub const CSV_HEADER: [&'static str; 5] = ["t", "S1", "S2", "S3", "H"];
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    pub average: WindowAverage,
    /// Largest relative energy error seen at any sample or at the end.
    pub energy_drift: f64,
    pub initial_energy: f64,
    /// `|Σp(t_max) - Σp(0)|`.
    pub momentum_drift: f64,
    pub final_state: ChainState,
    pub steps: usize,
    pub wall_time: Duration,
}

impl TrajectoryOutcome {
    pub fn passes_drift_audit(&self) -> bool {
        self.energy_drift <= DRIFT_TOLERANCE
    }
}

struct Sampler<'a> {
    params: LatticeParams,
    modes: ModeTransform,
    kernel: QuarticKernel,
    average: WindowAverage,
    h0: f64,
    drift: f64,
    trace: Option<&'a mut Vec<TraceRow>>,
}

impl Sampler<'_> {
    fn energy_drift(&self, energy: f64) -> f64 {
        let scale = if self.h0 != 0.0 { self.h0.abs() } else { 1.0 };
        (energy - self.h0).abs() / scale
    }
}

impl Observer for Sampler<'_> {
    fn observe(&mut self, state: &ChainState) -> std::result::Result<(), String> {
        let energy = hamiltonian_physical(state, &self.params).map_err(|e| e.to_string())?;
        self.drift = self.drift.max(self.energy_drift(energy));
        if self.trace.is_none() && !self.average.window.contains(state.t) {
            return Ok(());
        }
        let field = self.modes.to_normal_modes(state).map_err(|e| e.to_string())?;
        let sums = self.kernel.sums(&field).map_err(|e| e.to_string())?;
        self.average.push(state.t, &sums);
        if let Some(trace) = self.trace.as_deref_mut() {
            trace.push(TraceRow {
                t: state.t,
                s1: sums.s1.re,
                s2: sums.s2.re,
                s3: sums.s3.re,
                energy,
            });
        }
        Ok(())
    }
}

/// Integrates one trajectory, sampling the quartic sums inside the window.
///
/// A drift above [`DRIFT_TOLERANCE`] is reported in the outcome, not raised;
/// blow-ups are errors.
pub fn run_single(spec: &TrajectorySpec, trace: Option<&mut Vec<TraceRow>>) -> Result<TrajectoryOutcome> {
    let started = Instant::now();
    let params = spec.params;
    let field = initial_field(spec.init, &params, spec.seed);
    let modes = ModeTransform::new(&params);
    let state = modes.from_normal_modes(&field)?;
    let h0 = hamiltonian_physical(&state, &params)?;
    let p0 = state.total_momentum();

    let mut sampler = Sampler {
        params,
        modes,
        kernel: QuarticKernel::new(&params),
        average: WindowAverage::new(spec.window),
        h0,
        drift: 0.0,
        trace,
    };
    // Include t = 0 when it lies in the window or a trace is requested.
    sampler
        .observe(&state)
        .map_err(|message| Error::Observer { t: 0.0, message })?;
    let (final_state, log) = evolve(&state, &params, &spec.integrator, spec.t_max, &mut [&mut sampler])?;
    let h_end = hamiltonian_physical(&final_state, &params)?;
    let energy_drift = sampler.drift.max(sampler.energy_drift(h_end));
    Ok(TrajectoryOutcome {
        average: sampler.average,
        energy_drift,
        initial_energy: h0,
        momentum_drift: (final_state.total_momentum() - p0).abs(),
        final_state,
        steps: log.steps,
        wall_time: started.elapsed(),
    })
}

/// One averaged result row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub n: usize,
    pub beta: f64,
    pub beta_n: f64,
    pub init: InitKind,
    pub r: f64,
    pub spread: f64,
    pub s1_mean: f64,
    pub s2_mean: f64,
    pub s3_mean: f64,
    /// Worst relative energy drift over the cell's trajectories.
    pub energy_drift: f64,
    /// Base seed the cell's trajectory seeds were derived from.
    pub seed: u64,
    pub valid: bool,
    /// Reason a record is invalid; empty otherwise.
    pub note: String,
}

/// Wall-clock cost of one sweep cell, kept out of the results for reproducibility.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTiming {
    pub n: usize,
    pub beta_n: f64,
    pub init: InitKind,
    pub wall_time: f64,
}

impl CellTiming {
    pub const CSV_HEADER: [&'static str; 4] = ["N", "betaN", "init", "wall_time"];
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<RunRecord>,
    pub timings: Vec<CellTiming>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    n: usize,
    beta_n_index: usize,
    init: InitKind,
}

/// Runs every `(N, βN, init)` cell of the sweep.
pub fn ratio_sweep(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    Ok(ratio_sweep_timed(config)?.records)
}

/// [`ratio_sweep`] plus per-cell wall times.
///
/// Trajectories run in the current rayon pool; results are reduced in
/// `(N, βN, init, ensemble)` order so the output does not depend on scheduling.
pub fn ratio_sweep_timed(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    let mut cells = Vec::new();
    for &n in &config.n {
        for beta_n_index in 0..config.beta_n_values.len() {
            for &init in &config.init {
                cells.push(Cell { n, beta_n_index, init });
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.n_ensembles).map(move |e| (c, e)))
        .collect();
    let outcomes: Vec<Result<TrajectoryOutcome>> = jobs
        .par_iter()
        .map(|&(c, e)| {
            let cell = cells[c];
            let spec = TrajectorySpec::from_config(config, cell.n, cell.beta_n_index, cell.init, e)?;
            let out = run_single(&spec, None);
            match &out {
                Ok(o) => info!(
                    "N={} betaN={} init={} ensemble={e}: {} steps, drift {:.2e}, {:.1}s",
                    cell.n,
                    config.beta_n_values[cell.beta_n_index],
                    cell.init,
                    o.steps,
                    o.energy_drift,
                    o.wall_time.as_secs_f64()
                ),
                Err(err) => warn!(
                    "N={} betaN={} init={} ensemble={e}: {err}",
                    cell.n, config.beta_n_values[cell.beta_n_index], cell.init
                ),
            }
            out
        })
        .collect();

    let mut records = Vec::with_capacity(cells.len());
    let mut timings = Vec::with_capacity(cells.len());
    let mut outcomes = outcomes.into_iter();
    for cell in &cells {
        let chunk: Vec<_> = outcomes.by_ref().take(config.n_ensembles).collect();
        let beta_n = config.beta_n_values[cell.beta_n_index];
        timings.push(CellTiming {
            n: cell.n,
            beta_n,
            init: cell.init,
            wall_time: chunk
                .iter()
                .filter_map(|o| o.as_ref().ok())
                .map(|o| o.wall_time.as_secs_f64())
                .sum(),
        });
        records.push(aggregate_cell(config, cell, beta_n, chunk));
    }
    Ok(SweepOutput { records, timings })
}

fn aggregate_cell(
    config: &ExperimentConfig,
    cell: &Cell,
    beta_n: f64,
    chunk: Vec<Result<TrajectoryOutcome>>,
) -> RunRecord {
    let mut record = RunRecord {
        n: cell.n,
        beta: beta_n / cell.n as f64,
        beta_n,
        init: cell.init,
        r: f64::NAN,
        spread: f64::NAN,
        s1_mean: f64::NAN,
        s2_mean: f64::NAN,
        s3_mean: f64::NAN,
        energy_drift: f64::NAN,
        seed: config.base_seed,
        valid: false,
        note: String::new(),
    };
    let mut averages = Vec::with_capacity(chunk.len());
    let mut drift = 0.0f64;
    for (e, outcome) in chunk.into_iter().enumerate() {
        match outcome {
            Ok(o) => {
                drift = drift.max(o.energy_drift);
                averages.push(o.average);
            }
            Err(err) => {
                record.note = format!("ensemble {e}: {err}");
                return record;
            }
        }
    }
    record.energy_drift = drift;
    match RatioEstimate::from_averages(&averages) {
        Ok(est) => {
            record.r = est.r;
            record.spread = est.spread;
            record.s1_mean = est.s1_mean;
            record.s2_mean = est.s2_mean;
            record.s3_mean = est.s3_mean;
            if drift <= DRIFT_TOLERANCE {
                record.valid = true;
            } else {
                record.note = format!("energy drift {drift:e} exceeds {DRIFT_TOLERANCE:e}");
            }
        }
        Err(err) => record.note = err.to_string(),
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            n: vec![16],
            beta_n_values: vec![0.5],
            init: vec![InitKind::Thermal],
            t_max_in_tf: 2.0,
            window_in_tf: [1.0, 2.0],
            n_ensembles: 2,
            sample_cadence: 10,
            base_seed: 9,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn linear_chain_is_stationary() {
        let mut config = small_config();
        config.n = vec![32];
        let mut spec = TrajectorySpec::from_config(&config, 32, 0, InitKind::Thermal, 0).unwrap();
        spec.params = spec.params.with_beta(0.0).unwrap();
        let mut trace = Vec::new();
        let out = run_single(&spec, Some(&mut trace)).unwrap();
        assert!(out.energy_drift <= 1e-10, "{}", out.energy_drift);
        assert!(out.momentum_drift <= 1e-10);
        // Σω|a|² = H/N and every thermal mode carries ω|a|² = 1.
        assert!((out.initial_energy - 32.0 * 31.0).abs() < 1e-9);
        assert!(trace.len() > 10 && trace[0].t == 0.0);
    }

    #[test]
    fn sweep_records_are_reproducible_and_flagged() {
        let config = small_config();
        let a = ratio_sweep(&config).unwrap();
        let b = ratio_sweep(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
        let rec = &a[0];
        assert!(rec.valid, "{}", rec.note);
        assert!(rec.r.is_finite() && rec.r >= 0.0);
        assert!((rec.beta * rec.n as f64 - rec.beta_n).abs() <= 1e-12 * rec.beta_n);
        assert!(rec.energy_drift <= DRIFT_TOLERANCE);
    }

    #[test]
    fn seeds_differ_between_cells() {
        let mut seen = std::collections::HashSet::new();
        for n in [200, 500] {
            for b in 0..5 {
                for init in InitKind::ALL {
                    for e in 0..5 {
                        assert!(seen.insert(trajectory_seed(1, n, b, init, e)));
                    }
                }
            }
        }
    }

    #[test]
    fn blow_up_is_flagged_not_fatal() {
        let mut config = small_config();
        // A huge step on a stiff chain diverges.
        config.h = 0.9;
        config.beta_n_values = vec![50.0];
        let records = ratio_sweep(&config).unwrap();
        assert!(!records[0].valid);
        assert!(!records[0].note.is_empty());
    }
}
