use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use fput_core::diagnostics::{RatioEstimate, QUARTIC_NORMALIZATION};
use fput_core::experiment::{
    create_output, emit_outputs, load_records, ratio_sweep_timed, render_svg, run_single, transform_check,
    wick_check, write_table, CellTiming, EmitOptions, ExperimentConfig, InitKind, PhiProfile, TraceRow,
    TrajectorySpec, TransformCheck, WickCheck, DRIFT_TOLERANCE, FULL_SIZES, PLOT_FILE, RESULTS_FILE,
};
use fput_core::experiment::fmt_f64;
use fput_core::normalform::{scan_bound, BoundScanResult};
use fput_core::LatticeParams;

#[derive(Parser)]
#[command(name = "fput", version, about = "Normal-form diagnostics for the periodic beta-FPUT chain")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML experiment configuration; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Base seed, overriding the configuration.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "INT")]
    threads: Option<usize>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write its (t, S1, S2, S3, H) trace.
    Simulate {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long = "beta-n", default_value_t = 1.0)]
        beta_n: f64,
        #[arg(long, default_value = "thermal", value_parser = parse_init)]
        init: InitKind,
        /// Ensemble index used in seed derivation.
        #[arg(long, default_value_t = 0)]
        ensemble: usize,
    },
    /// Ensemble-averaged ratio r over the (N, betaN, init) grid.
    RatioSweep {
        /// Chain sizes, overriding the configuration.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// betaN grid, overriding the configuration.
        #[arg(long = "beta-n", value_delimiter = ',')]
        beta_n: Vec<f64>,
        /// Use the full size grid 200, 500, 800, 1000.
        #[arg(long)]
        full: bool,
        /// Skip the SVG plot.
        #[arg(long)]
        no_plot: bool,
    },
    /// Coefficient-sum totals over all quartets with a fixed k1.
    ScanBound {
        #[arg(long, value_delimiter = ',', default_values_t = [64, 128, 256, 512, 1024])]
        n: Vec<usize>,
        /// k1 to scan (default N/2).
        #[arg(long)]
        k1: Option<usize>,
        /// Scan every k1 in 1..N.
        #[arg(long, conflicts_with = "k1")]
        all_k1: bool,
    },
    /// Monte-Carlo second moment against the Wick contraction.
    WickCheck {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        k1: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Deviation of the normal-form transformation on thermal fields.
    TransformCheck {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long = "beta-n", value_delimiter = ',', default_values_t = [0.01, 0.1, 1.0])]
        beta_n: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        samples: u64,
    },
    /// Render a ratio-sweep CSV as SVG.
    Plot {
        /// Sweep results (default: <out>/ratio_sweep.csv).
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn parse_init(s: &str) -> std::result::Result<InitKind, String> {
    s.parse().map_err(|e: fput_core::Error| e.to_string())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let g = &cli.global;
    match cli.command {
        Command::Simulate { n, beta_n, init, ensemble } => simulate(g, n, beta_n, init, ensemble),
        Command::RatioSweep { n, beta_n, full, no_plot } => sweep(g, n, beta_n, full, !no_plot),
        Command::ScanBound { n, k1, all_k1 } => scan(g, &n, k1, all_k1),
        Command::WickCheck { n, k1, samples } => wick(g, n, k1, samples),
        Command::TransformCheck { n, beta_n, samples } => transform(g, n, &beta_n, samples),
        Command::Plot { input } => plot(g, input),
    }
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut config = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = g.seed {
        config.base_seed = seed;
    }
    Ok(config)
}

fn write_csv(g: &Global, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
    let path = g.out.join(name);
    let file = create_output(&path, g.force)?;
    write_table(BufWriter::new(file), header, rows).with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(path)
}

fn log_normalization() {
    info!(
        "spectral energy uses H/N = sum w|a|^2 + c * beta * (S1 + S2 + S3) with c = {QUARTIC_NORMALIZATION:.17}"
    );
}

fn simulate(g: &Global, n: usize, beta_n: f64, init: InitKind, ensemble: usize) -> Result<()> {
    let mut config = load_config(g)?;
    config.n = vec![n];
    config.beta_n_values = vec![beta_n];
    config.init = vec![init];
    config.validate()?;
    log_normalization();
    let spec = TrajectorySpec::from_config(&config, n, 0, init, ensemble)?;
    let mut trace = Vec::new();
    let outcome = run_single(&spec, Some(&mut trace))?;
    write_csv(
        g,
        "trace.csv",
        &TraceRow::CSV_HEADER,
        trace
            .iter()
            .map(|r| vec![fmt_f64(r.t), fmt_f64(r.s1), fmt_f64(r.s2), fmt_f64(r.s3), fmt_f64(r.energy)]),
    )?;
    let est = RatioEstimate::from_averages(&[outcome.average])?;
    println!(
        "N={n} betaN={beta_n} init={init} seed={}: r={:.6} over {} samples, energy drift {:.3e}{}",
        spec.seed,
        est.r,
        est.n_samples,
        outcome.energy_drift,
        if outcome.passes_drift_audit() { "" } else { " (exceeds tolerance)" }
    );
    Ok(())
}

fn sweep(g: &Global, n: Vec<usize>, beta_n: Vec<f64>, full: bool, svg: bool) -> Result<()> {
    let mut config = load_config(g)?;
    if full {
        config.n = FULL_SIZES.to_vec();
    }
    if !n.is_empty() {
        config.n = n;
    }
    if !beta_n.is_empty() {
        config.beta_n_values = beta_n;
    }
    config.validate()?;
    log_normalization();
    info!(
        "sweep: N={:?} betaN={:?} init={:?} ensembles={} seed={}",
        config.n, config.beta_n_values, config.init, config.n_ensembles, config.base_seed
    );
    let output = ratio_sweep_timed(&config)?;
    let written = emit_outputs(&output.records, &g.out, EmitOptions { svg, force: g.force })?;
    for path in &written {
        info!("wrote {}", path.display());
    }
    write_csv(
        g,
        "timings.csv",
        &CellTiming::CSV_HEADER,
        output
            .timings
            .iter()
            .map(|t| vec![t.n.to_string(), fmt_f64(t.beta_n), t.init.to_string(), format!("{:.3}", t.wall_time)]),
    )?;
    let config_path = g.out.join("config.toml");
    create_output(&config_path, g.force)?
        .write_all(config.to_toml_string().as_bytes())
        .with_context(|| format!("writing {}", config_path.display()))?;

    let mut invalid = 0;
    for r in &output.records {
        println!(
            "N={:<5} betaN={:<6} {:<19} r={:.4} ± {:.4}  drift={:.1e}{}",
            r.n,
            r.beta_n,
            r.init,
            r.r,
            r.spread,
            r.energy_drift,
            if r.valid { String::new() } else { format!("  INVALID: {}", r.note) }
        );
        invalid += usize::from(!r.valid);
    }
    if invalid > 0 {
        bail!("{invalid} of {} cells are invalid (drift tolerance {DRIFT_TOLERANCE:e})", output.records.len());
    }
    Ok(())
}

fn scan(g: &Global, sizes: &[usize], k1: Option<usize>, all: bool) -> Result<()> {
    let mut rows: Vec<BoundScanResult> = Vec::new();
    for &n in sizes {
        let params = LatticeParams::unit(n, 0.0)?;
        if all {
            rows.extend(fput_core::normalform::scan_bound_all(&params)?);
        } else {
            rows.push(scan_bound(k1.unwrap_or(n / 2), &params)?);
        }
    }
    for r in rows.iter().filter(|r| all || r.k1 == k1.unwrap_or(r.n / 2)) {
        println!("N={:<5} k1={:<5} total={:.6e} normalized={:.6}", r.n, r.k1, r.total, r.normalized);
    }
    write_csv(
        g,
        "scan_bound.csv",
        &BoundScanResult::CSV_HEADER,
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.k1.to_string(),
                fmt_f64(r.sums[0]),
                fmt_f64(r.sums[1]),
                fmt_f64(r.sums[2]),
                fmt_f64(r.total),
                fmt_f64(r.normalized),
            ]
        }),
    )?;
    Ok(())
}

fn wick(g: &Global, n: usize, k1: usize, samples: usize) -> Result<()> {
    let seed = load_config(g)?.base_seed;
    let checks = PhiProfile::ALL
        .iter()
        .map(|&p| wick_check(n, k1, p, samples, seed))
        .collect::<fput_core::Result<Vec<_>>>()?;
    for c in &checks {
        println!(
            "phi={:<13} M={:.6e} mc={:.6e} ± {:.2e} z={:+.2} tail={:.4} {}",
            c.profile.to_string(),
            c.wick_m,
            c.mc_mean,
            c.mc_stderr,
            c.z,
            c.tail_fraction,
            if c.passes() { "ok" } else { "MISMATCH" }
        );
    }
    write_csv(g, "wick_check.csv", &WickCheck::CSV_HEADER, checks.iter().map(WickCheck::csv_fields))?;
    if checks.iter().any(|c| !c.passes()) {
        bail!("Monte-Carlo estimate disagrees with the Wick moment");
    }
    Ok(())
}

fn transform(g: &Global, n: usize, beta_n: &[f64], samples: u64) -> Result<()> {
    let seed = load_config(g)?.base_seed;
    let rows = transform_check(n, beta_n, samples, seed)?;
    for (i, &b) in beta_n.iter().enumerate() {
        let mut dev: Vec<f64> = rows.iter().skip(i).step_by(beta_n.len()).map(|r| r.relative_l2).collect();
        dev.sort_by(f64::total_cmp);
        println!(
            "betaN={b:<6} median deviation={:.4e} max={:.4e}",
            dev[dev.len() / 2],
            dev[dev.len() - 1]
        );
    }
    write_csv(g, "transform_check.csv", &TransformCheck::CSV_HEADER, rows.iter().map(TransformCheck::csv_fields))?;
    Ok(())
}

fn plot(g: &Global, input: Option<PathBuf>) -> Result<()> {
    let input = input.unwrap_or_else(|| g.out.join(RESULTS_FILE));
    let records = load_records(Path::new(&input))?;
    let path = g.out.join(PLOT_FILE);
    create_output(&path, g.force)?
        .write_all(render_svg(&records).as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}
