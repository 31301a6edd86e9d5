use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uavcov::cli::{
    emit_csv, emit_report, load_config, run_analyze, run_sweep, run_validate, write_csv, ResultRow, Scenario,
    ScenarioFile, SweepSpec, ValidateOptions,
};
use uavcov::Error;

#[derive(Parser)]
#[command(name = "uavcov", version, about = "Coverage probability of mmWave UAV networks")]
struct Cli {
    /// Scenario file (TOML). Defaults to the built-in urban 28 GHz scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads, or `auto`.
    #[arg(long, global = true, default_value = "auto", value_parser = parse_workers)]
    workers: usize,

    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic coverage at one network point.
    Analyze(PointArgs),
    /// Analytic coverage over a parameter grid.
    Sweep(GridArgs),
    /// Sweep plus Monte Carlo estimates; flags disagreeing points.
    Validate {
        #[command(flatten)]
        grid: GridArgs,
        /// Realizations per grid point.
        #[arg(long, default_value_t = 1000)]
        realizations: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Confidence level of the Wilson interval.
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        /// Largest tolerated fraction of flagged points.
        #[arg(long, default_value_t = 0.05)]
        max_flagged: f64,
    },
    /// Print the built-in scenario file.
    Defaults,
}

#[derive(Args)]
struct PointArgs {
    /// Altitude (m).
    #[arg(long)]
    height: Option<f64>,
    /// UAV density (per km²).
    #[arg(long)]
    lambda: Option<f64>,
    /// SNR threshold (dB).
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
    /// Antenna arrays as `N_UAVxN_UE`, e.g. `8x8`.
    #[arg(long, value_parser = parse_antenna)]
    antenna: Option<(u32, u32)>,
}

#[derive(Args)]
struct GridArgs {
    /// Altitudes (m): `start:step:stop` or a comma list.
    #[arg(long, value_parser = parse_grid)]
    heights: Option<Grid>,
    /// Densities (per km²): `start:step:stop` or a comma list.
    #[arg(long, value_parser = parse_grid)]
    lambdas: Option<Grid>,
    /// SNR thresholds (dB): `start:step:stop` or a comma list.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    thresholds: Option<Grid>,
    /// Antenna arrays, e.g. `8x4,8x8`.
    #[arg(long, value_parser = parse_antennas)]
    antennas: Option<Antennas>,
}

#[derive(Clone)]
struct Grid(Vec<f64>);

#[derive(Clone)]
struct Antennas(Vec<(u32, u32)>);

fn parse_workers(s: &str) -> Result<usize, String> {
    if s == "auto" {
        return Ok(0);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    parse_values(s).map(Grid)
}

fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}`"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(format!("bad range `{s}`"));
        }
        // Index-based so that accumulated rounding cannot drop the endpoint.
        let count = ((stop - start) / step + 1e-9).floor();
        if count < 0.0 {
            return Ok(Vec::new());
        }
        return Ok((0..=count as u64).map(|i| start + i as f64 * step).collect());
    }
    s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect()
}

fn parse_antenna(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected N_UAVxN_UE, got `{s}`"))?;
    let n = |t: &str| t.parse::<u32>().map_err(|_| format!("bad element count `{t}`"));
    Ok((n(a)?, n(b)?))
}

fn parse_antennas(s: &str) -> Result<Antennas, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_antenna)
        .collect::<Result<_, _>>()
        .map(Antennas)
}

fn scenario(config: Option<&Path>, tol: Option<f64>) -> Result<Scenario, Error> {
    let mut s = match config {
        Some(path) => load_config(path)?,
        None => Scenario::default(),
    };
    if let Some(tol) = tol {
        s.quadrature.abs_tol = tol;
        s.quadrature.validate()?;
    }
    Ok(s)
}

fn apply_grid(s: &mut Scenario, g: GridArgs) -> Result<(), Error> {
    let sw = &s.sweep;
    s.sweep = SweepSpec::new(
        g.heights.map_or_else(|| sw.heights.clone(), |g| g.0),
        g.lambdas.map_or_else(|| sw.densities_per_km2.clone(), |g| g.0),
        g.thresholds.map_or_else(|| sw.thresholds_db.clone(), |g| g.0),
        g.antennas.map_or_else(|| sw.antenna_configs.clone(), |a| a.0),
    )?;
    Ok(())
}

fn apply_point(s: &mut Scenario, p: PointArgs) -> Result<(), Error> {
    let mut n = s.network;
    if let Some(h) = p.height {
        n = n.with_height(h);
    }
    if let Some(l) = p.lambda {
        n = n.with_density_per_km2(l);
    }
    if let Some(t) = p.threshold {
        n = n.with_threshold_db(t)?;
    }
    if let Some((a, b)) = p.antenna {
        n = n.with_antennas(a, b);
    }
    n.validate()?;
    s.network = n;
    Ok(())
}

fn emit(output: Option<&Path>, rows: &[ResultRow], report: &str) -> Result<(), Error> {
    match output {
        Some(path) => {
            write_csv(rows, path)?;
            print!("{report}");
        }
        None => {
            let mut lock = std::io::stdout().lock();
            emit_csv(rows, &mut lock)?;
            let _ = lock.flush();
            eprint!("{report}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, Error> {
    let Cli {
        config,
        output,
        workers,
        tol,
        command,
    } = cli;
    if matches!(command, Command::Defaults) {
        print!("{}", ScenarioFile::default().to_toml_string());
        return Ok(0);
    }
    let mut s = scenario(config.as_deref(), tol)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let output = output.as_deref();
    match command {
        Command::Defaults => unreachable!(),
        Command::Analyze(point) => {
            apply_point(&mut s, point)?;
            let row = pool.install(|| run_analyze(&s))?;
            let rows = [row];
            emit(output, &rows, &emit_report(&rows, None))?;
            Ok(0)
        }
        Command::Sweep(grid) => {
            apply_grid(&mut s, grid)?;
            let rows = pool.install(|| run_sweep(&s))?;
            emit(output, &rows, &emit_report(&rows, None))?;
            Ok(if rows.iter().any(|r| r.failure.is_some()) { 3 } else { 0 })
        }
        Command::Validate {
            grid,
            realizations,
            seed,
            confidence,
            max_flagged,
        } => {
            apply_grid(&mut s, grid)?;
            let opts = ValidateOptions {
                realizations,
                seed,
                confidence,
                max_flagged,
            };
            let (rows, summary) = pool.install(|| run_validate(&s, &opts))?;
            emit(output, &rows, &emit_report(&rows, Some(&summary)))?;
            Ok(summary.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("uavcov: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
