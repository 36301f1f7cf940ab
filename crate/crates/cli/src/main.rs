//! Command-line driver: parses a price CSV, runs the requested stage of
//! the reconstruction pipeline, and writes plot-ready CSVs plus JSON
//! reports into the output directory. Every file written is listed on
//! stdout; all randomness flows from `--seed`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use market_recon::coder;
use market_recon::forecast::{self, ForecastParams};
use market_recon::ingest::{self, PriceSeries};
use market_recon::preprocess;
use market_recon::randomwalk;
use market_recon::seed;
use market_recon::stylized;

/// Environment variable that overrides `--output-dir`.
const OUTPUT_DIR_ENV: &str = "MARKET_RECON_OUT";

#[derive(Parser)]
#[command(
    name = "market-recon",
    version,
    about = "Reconstructs the process behind a daily price series with an order-K Markov model over an N-symbol return alphabet"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Inclusive integer range written as `a..b`.
#[derive(Debug, Clone, Copy)]
struct InclusiveRange {
    start: usize,
    end: usize,
}

impl FromStr for InclusiveRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected `a..b`, got {s:?}"))?;
        let start: usize = a.trim().parse().map_err(|_| format!("bad start {a:?}"))?;
        let end: usize = b.trim().parse().map_err(|_| format!("bad end {b:?}"))?;
        if start == 0 || end < start {
            return Err(format!("range {s:?} must satisfy 1 <= a <= b"));
        }
        Ok(Self { start, end })
    }
}

fn odd_alphabet(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("bad alphabet size {s:?}"))?;
    if n < 3 || n.is_multiple_of(2) {
        return Err(format!("alphabet size must be odd and >= 3, got {n}"));
    }
    Ok(n)
}

fn positive(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("bad count {s:?}"))?;
    if v == 0 {
        return Err("count must be positive".into());
    }
    Ok(v)
}

#[derive(Args)]
struct IoArgs {
    /// Price history CSV (Date,Open,High,Low,Close,Adj Close,Volume).
    #[arg(long)]
    input: PathBuf,
    /// Directory for output files (env MARKET_RECON_OUT overrides).
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Alphabet size N (odd, >= 3).
    #[arg(long, default_value_t = 3, value_parser = odd_alphabet)]
    symbols: usize,
    /// Markov chain length K.
    #[arg(long, default_value_t = 1, value_parser = positive)]
    order: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Stationarity diagnostics: trend fit, volatility windows, return
    /// maxima, moment scaling, autocorrelations.
    Stats {
        #[command(flatten)]
        io: IoArgs,
        /// Polynomial trend degree.
        #[arg(long, default_value_t = 3)]
        degree: usize,
        /// Sliding volatility window (days).
        #[arg(long, default_value_t = 10, value_parser = positive)]
        window: usize,
        /// Horizon range for the chi(q) log-log fit.
        #[arg(long, default_value = "1..100")]
        fit_range: InclusiveRange,
    },
    /// Code the series into symbols and dump the estimated transition
    /// matrix/tensor.
    Encode {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// One seeded forecast run reconstructed into price space.
    Reconstruct {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Train on the second half and forecast the first.
        #[arg(long)]
        reverse: bool,
    },
    /// Monte Carlo comparison of the Markov forecast against the
    /// uniform random baseline.
    Montecarlo {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Number of simulations.
        #[arg(long, default_value_t = 500, value_parser = positive)]
        sims: usize,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Train on the second half and forecast the first.
        #[arg(long)]
        reverse: bool,
    },
    /// Sweep the chain length K and tabulate average errors.
    Ksweep {
        #[command(flatten)]
        io: IoArgs,
        /// Alphabet size N (odd, >= 3).
        #[arg(long, default_value_t = 3, value_parser = odd_alphabet)]
        symbols: usize,
        /// Inclusive K range, e.g. 2..8.
        #[arg(long, default_value = "2..8")]
        k_range: InclusiveRange,
        /// Simulations per K.
        #[arg(long, default_value_t = 500, value_parser = positive)]
        sims: usize,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Unit-step coin-toss walks (50 / 100 / 1000 / 10000 steps).
    Randomwalk {
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for output files (env MARKET_RECON_OUT overrides).
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Stats {
            io,
            degree,
            window,
            fit_range,
        } => cmd_stats(&io, degree, window, fit_range),
        Command::Encode { io, model } => cmd_encode(&io, &model),
        Command::Reconstruct {
            io,
            model,
            seed,
            reverse,
        } => cmd_reconstruct(&io, &model, seed, reverse),
        Command::Montecarlo {
            io,
            model,
            sims,
            seed,
            reverse,
        } => cmd_montecarlo(&io, &model, sims, seed, reverse),
        Command::Ksweep {
            io,
            symbols,
            k_range,
            sims,
            seed,
        } => cmd_ksweep(&io, symbols, k_range, sims, seed),
        Command::Randomwalk { seed, output_dir } => cmd_randomwalk(seed, &output_dir),
    }
}

fn load_series(input: &Path) -> Result<PriceSeries> {
    let file = fs::File::open(input)
        .with_context(|| format!("cannot open {}", input.display()))?;
    let parsed = ingest::parse_price_csv(file)
        .with_context(|| format!("cannot parse {}", input.display()))?;
    if parsed.skipped_rows > 0 {
        eprintln!(
            "warning: skipped {} row(s) with missing adjusted close",
            parsed.skipped_rows
        );
    }
    let label = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(parsed.series.with_label(label))
}

/// Resolves the output directory (environment override first) and
/// makes sure it exists.
fn output_dir(flag_value: &Path) -> Result<PathBuf> {
    let dir = match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag_value.to_path_buf(),
    };
    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

/// Writes a file and lists its path on stdout.
fn emit(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

fn emit_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    emit(dir, name, &body)
}

fn cmd_stats(io: &IoArgs, degree: usize, window: usize, fit_range: InclusiveRange) -> Result<()> {
    let dir = output_dir(&io.output_dir)?;
    let series = load_series(&io.input)?;
    let returns = preprocess::log_returns(&series, 1)?;
    let trend = preprocess::fit_polynomial_trend(&series, degree)?;
    let detrended = preprocess::detrend(&series, &trend);
    let rescaled = preprocess::rescale(&detrended, &series, &trend)?;

    let mut params = stylized::StylizedParams::for_series_len(series.len());
    params.window = window;
    params.fit_min_n = fit_range.start;
    params.fit_max_n = fit_range.end;
    let report = stylized::stylized_report(&series, &returns, &params)?;

    let mut fig4 = String::from("t,date,price,trend\n");
    for (t, (date, price)) in series.dates().iter().zip(series.prices()).enumerate() {
        let _ = writeln!(fig4, "{t},{date},{price},{}", trend.evaluate(t as f64));
    }
    emit(&dir, "fig4_price_trend.csv", &fig4)?;

    let mut fig5 = String::from("t,detrended,rescaled\n");
    for (t, (d, x)) in detrended.iter().zip(&rescaled).enumerate() {
        let _ = writeln!(fig5, "{t},{d},{x}");
    }
    emit(&dir, "fig5_detrended_rescaled.csv", &fig5)?;

    let mut fig6 = String::from("t,log_return\n");
    for (t, r) in returns.values().iter().enumerate() {
        let _ = writeln!(fig6, "{t},{r}");
    }
    emit(&dir, "fig6_returns.csv", &fig6)?;

    let mut fig7a = String::from("t,sigma\n");
    for &(t, v) in &report.sliding_volatility {
        let _ = writeln!(fig7a, "{t},{v}");
    }
    emit(&dir, "fig7a_sliding_volatility.csv", &fig7a)?;

    let mut fig7b = String::from("t,accumulated_sigma\n");
    for (&(t, _), v) in report
        .sliding_volatility
        .iter()
        .zip(&report.accumulated_volatility)
    {
        let _ = writeln!(fig7b, "{t},{v}");
    }
    emit(&dir, "fig7b_accumulated_volatility.csv", &fig7b)?;

    let mut fig8a = String::from("n,delta\n");
    for &(n, d) in &report.delta_curve {
        let _ = writeln!(fig8a, "{n},{d}");
    }
    emit(&dir, "fig8a_max_return.csv", &fig8a)?;

    let mut fig8b = String::from("n");
    for q in &report.moment_table.q_values {
        let _ = write!(fig8b, ",s_q{q}");
    }
    fig8b.push('\n');
    for (ni, n) in report.moment_table.n_values.iter().enumerate() {
        let _ = write!(fig8b, "{n}");
        for qi in 0..report.moment_table.q_values.len() {
            let _ = write!(fig8b, ",{}", report.moment_table.values[qi][ni]);
        }
        fig8b.push('\n');
    }
    emit(&dir, "fig8b_moments.csv", &fig8b)?;

    let mut fig9 = String::from("q,chi,residual_norm\n");
    for point in &report.chi_curve {
        let _ = writeln!(fig9, "{},{},{}", point.q, point.chi, point.residual_norm);
    }
    emit(&dir, "fig9_scaling_exponent.csv", &fig9)?;

    let mut fig10 = String::from("lag,raw,absolute,normalized\n");
    for (lag, ((r, a), n)) in report
        .correlation_curves
        .raw
        .iter()
        .zip(&report.correlation_curves.absolute)
        .zip(&report.correlation_curves.normalized)
        .enumerate()
    {
        let _ = writeln!(fig10, "{lag},{r},{a},{n}");
    }
    emit(&dir, "fig10_correlations.csv", &fig10)?;

    #[derive(Serialize)]
    struct StatsDocument<'a> {
        params: StatsParams<'a>,
        #[serde(flatten)]
        report: &'a stylized::StylizedReport,
    }
    #[derive(Serialize)]
    struct StatsParams<'a> {
        input: String,
        label: &'a str,
        degree: usize,
        window: usize,
        fit_range: [usize; 2],
        trend_coefficients: &'a [f64],
    }
    emit_json(
        &dir,
        "stylized.json",
        &StatsDocument {
            params: StatsParams {
                input: io.input.display().to_string(),
                label: series.label(),
                degree,
                window,
                fit_range: [fit_range.start, fit_range.end],
                trend_coefficients: trend.coefficients(),
            },
            report: &report,
        },
    )?;
    Ok(())
}

fn cmd_encode(io: &IoArgs, model_args: &ModelArgs) -> Result<()> {
    let dir = output_dir(&io.output_dir)?;
    let series = load_series(&io.input)?;
    let params = ForecastParams::new(model_args.symbols, model_args.order);
    let prepared = forecast::prepare(&series, &params)?;

    let mut symbols = prepared.coded.to_line();
    symbols.push('\n');
    emit(&dir, "symbols.txt", &symbols)?;

    #[derive(Serialize)]
    struct ModelDocument<'a> {
        params: ModelParams<'a>,
        rows: Vec<market_recon::markov::TransitionRow>,
    }
    #[derive(Serialize)]
    struct ModelParams<'a> {
        input: String,
        label: &'a str,
        symbols: usize,
        order: usize,
        scheme_mean: f64,
        scheme_sigma: f64,
        train_len: usize,
    }
    emit_json(
        &dir,
        "model.json",
        &ModelDocument {
            params: ModelParams {
                input: io.input.display().to_string(),
                label: series.label(),
                symbols: model_args.symbols,
                order: model_args.order,
                scheme_mean: prepared.scheme.mean(),
                scheme_sigma: prepared.scheme.sigma(),
                train_len: prepared.train.len(),
            },
            rows: prepared.model.export_rows(),
        },
    )?;

    emit(&dir, "matrix.txt", &prepared.model.render_full_order())?;
    Ok(())
}

fn cmd_reconstruct(io: &IoArgs, model_args: &ModelArgs, seed_value: u64, reverse: bool) -> Result<()> {
    let dir = output_dir(&io.output_dir)?;
    let series = load_series(&io.input)?;
    let mut params = ForecastParams::new(model_args.symbols, model_args.order);
    if reverse {
        params = params.reversed();
    }
    let prepared = forecast::prepare(&series, &params)?;
    let run = forecast::forecast_run(&prepared, seed::derive(seed_value, 0));

    let markov_path = coder::reconstruct_prices(
        prepared.anchor_price,
        &coder::decode_sequence(&run.forecast),
    )?;
    let random_path = coder::reconstruct_prices(
        prepared.anchor_price,
        &coder::decode_sequence(&run.baseline),
    )?;

    let mut fig12 = String::from("step,date,actual,markov,random\n");
    for (t, ((actual, markov), random)) in prepared
        .actual_prices
        .iter()
        .zip(&markov_path)
        .zip(&random_path)
        .enumerate()
    {
        let date = series.dates()[prepared.price_offset + t];
        let _ = writeln!(fig12, "{t},{date},{actual},{markov},{random}");
    }
    emit(&dir, "fig12_reconstruction.csv", &fig12)?;

    #[derive(Serialize)]
    struct ReconstructDocument<'a> {
        params: RunParams<'a>,
        markov_error: f64,
        baseline_error: f64,
    }
    #[derive(Serialize)]
    struct RunParams<'a> {
        input: String,
        label: &'a str,
        symbols: usize,
        order: usize,
        seed: u64,
        reverse: bool,
    }
    emit_json(
        &dir,
        "reconstruct.json",
        &ReconstructDocument {
            params: RunParams {
                input: io.input.display().to_string(),
                label: series.label(),
                symbols: model_args.symbols,
                order: model_args.order,
                seed: seed_value,
                reverse,
            },
            markov_error: run.markov_error,
            baseline_error: run.baseline_error,
        },
    )?;
    Ok(())
}

fn cmd_montecarlo(
    io: &IoArgs,
    model_args: &ModelArgs,
    sims: usize,
    seed_value: u64,
    reverse: bool,
) -> Result<()> {
    let dir = output_dir(&io.output_dir)?;
    let series = load_series(&io.input)?;
    let mut params = ForecastParams::new(model_args.symbols, model_args.order);
    if reverse {
        params = params.reversed();
    }
    let report = forecast::monte_carlo(&series, &params, sims, seed_value)?;

    let mut fig11 = String::from("run,seed,markov_error,baseline_error\n");
    for run in &report.runs {
        let _ = writeln!(
            fig11,
            "{},{},{},{}",
            run.run, run.seed, run.markov_error, run.baseline_error
        );
    }
    emit(&dir, "fig11_errors.csv", &fig11)?;

    let mut fig13 = String::from("step,markov_mad,baseline_mad\n");
    for (t, (m, b)) in report
        .price_deviation_curves
        .markov
        .iter()
        .zip(&report.price_deviation_curves.baseline)
        .enumerate()
    {
        let _ = writeln!(fig13, "{t},{m},{b}");
    }
    emit(&dir, "fig13_price_deviation.csv", &fig13)?;

    #[derive(Serialize)]
    struct MonteCarloDocument<'a> {
        params: McParams<'a>,
        #[serde(flatten)]
        report: &'a forecast::MonteCarloReport,
    }
    #[derive(Serialize)]
    struct McParams<'a> {
        input: String,
        label: &'a str,
        symbols: usize,
        order: usize,
        sims: usize,
        seed: u64,
        reverse: bool,
    }
    emit_json(
        &dir,
        "montecarlo.json",
        &MonteCarloDocument {
            params: McParams {
                input: io.input.display().to_string(),
                label: series.label(),
                symbols: model_args.symbols,
                order: model_args.order,
                sims,
                seed: seed_value,
                reverse,
            },
            report: &report,
        },
    )?;
    Ok(())
}

fn cmd_ksweep(
    io: &IoArgs,
    symbols: usize,
    k_range: InclusiveRange,
    sims: usize,
    seed_value: u64,
) -> Result<()> {
    let dir = output_dir(&io.output_dir)?;
    let series = load_series(&io.input)?;
    let k_values: Vec<usize> = (k_range.start..=k_range.end).collect();
    let rows = forecast::k_sweep(&series, symbols, &k_values, sims, seed_value)?;

    let mut table = String::from("k,mean_markov_error,mean_baseline_error\n");
    for row in &rows {
        let _ = writeln!(
            table,
            "{},{},{}",
            row.k, row.mean_markov_error, row.mean_baseline_error
        );
    }
    emit(&dir, "fig14_ksweep.csv", &table)?;

    #[derive(Serialize)]
    struct KSweepDocument<'a> {
        params: KSweepParams<'a>,
        rows: &'a [forecast::KSweepRow],
    }
    #[derive(Serialize)]
    struct KSweepParams<'a> {
        input: String,
        label: &'a str,
        symbols: usize,
        k_range: [usize; 2],
        sims: usize,
        seed: u64,
    }
    emit_json(
        &dir,
        "ksweep.json",
        &KSweepDocument {
            params: KSweepParams {
                input: io.input.display().to_string(),
                label: series.label(),
                symbols,
                k_range: [k_range.start, k_range.end],
                sims,
                seed: seed_value,
            },
            rows: &rows,
        },
    )?;
    Ok(())
}

fn cmd_randomwalk(seed_value: u64, flag_dir: &Path) -> Result<()> {
    let dir = output_dir(flag_dir)?;
    let panels: [(&str, usize); 4] = [
        ("fig1a_walk_50.csv", 50),
        ("fig1b_walk_100.csv", 100),
        ("fig1c_walk_1000.csv", 1000),
        ("fig1d_walk_10000.csv", 10000),
    ];
    for (stream, (name, steps)) in panels.iter().enumerate() {
        let mut rng = seed::rng_for(seed_value, stream as u64);
        let path = randomwalk::simulate_walk(0.0, *steps, &mut rng);
        let mut csv = String::from("step,value\n");
        let _ = writeln!(csv, "0,{}", path.start_price());
        for (i, v) in path.values().iter().enumerate() {
            let _ = writeln!(csv, "{},{v}", i + 1);
        }
        emit(&dir, name, &csv)?;
    }
    Ok(())
}
