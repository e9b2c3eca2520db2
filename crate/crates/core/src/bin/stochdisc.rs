use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stochdisc::analytics::{NondimParams, DEFAULT_REGIME_TOL};
use stochdisc::montecarlo::DEFAULT_MAX_PATH_STEPS;
use stochdisc::report::{self, CurveRequest, Engine, McOptions, OutputFormat, RunConfig};
use stochdisc::{EstimationReport, FellerParams, LognormalParams, ModelKind, OuParams};

#[derive(Parser)]
#[command(name = "stochdisc", version, about = "Discount functions under stochastic real interest rates")]
struct Cli {
    /// Base seed for Monte Carlo runs [default: 42, or the config's seed].
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for Monte Carlo; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Band around μ = κ²/2 treated as the asymptotically constant regime.
    #[arg(long, global = true)]
    regime_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate OU parameters for every country in a config file.
    Fit {
        #[arg(long)]
        config: PathBuf,
    },
    /// Discount curve for given parameters or a fitted report.
    Curve(CurveArgs),
    /// Phase-plane coordinates from a directory of report_*.json files.
    Phase {
        #[arg(long)]
        reports: PathBuf,
    },
    /// Stationary negative-rate probability on a (κ, μ) grid.
    Negprob {
        #[arg(long)]
        kappa_max: f64,
        #[arg(long)]
        mu_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Ou,
    Feller,
    Lognormal,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Ou)]
    model: ModelArg,
    /// Take m, α and k from a fitted report instead (OU, started at m).
    #[arg(long, conflicts_with_all = ["m", "alpha", "k"])]
    report: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    /// Initial rate; defaults to m.
    #[arg(long, allow_negative_numbers = true)]
    r0: Option<f64>,
    /// Log-normal drift.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Log-normal volatility.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, default_value_t = 100.0)]
    tmax: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Engine::ClosedForm)]
    engine: Engine,
    #[arg(long, default_value_t = 20_000)]
    paths: usize,
    /// Monte Carlo step in years.
    #[arg(long)]
    dt: Option<f64>,
    /// Keep a coarse Feller step instead of refining it.
    #[arg(long)]
    allow_coarse_dt: bool,
}

fn need(v: Option<f64>, name: &str) -> Result<f64, String> {
    v.ok_or_else(|| format!("--{name} is required for this model"))
}

fn curve_model(args: &CurveArgs) -> Result<(ModelKind, String), String> {
    if let Some(path) = &args.report {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let r: EstimationReport = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let p = OuParams::new(r.m_hat, r.alpha_hat, r.k_hat, args.r0.unwrap_or(r.m_hat)).map_err(|e| e.to_string())?;
        return Ok((p.into(), format!("curve_{}", report::file_stem(&r.country))));
    }
    let model: ModelKind = match args.model {
        ModelArg::Ou => {
            let m = need(args.m, "m")?;
            OuParams::new(m, need(args.alpha, "alpha")?, need(args.k, "k")?, args.r0.unwrap_or(m))
                .map_err(|e| e.to_string())?
                .into()
        }
        ModelArg::Feller => {
            let m = need(args.m, "m")?;
            FellerParams::new(m, need(args.alpha, "alpha")?, need(args.k, "k")?, args.r0.unwrap_or(m))
                .map_err(|e| e.to_string())?
                .into()
        }
        ModelArg::Lognormal => LognormalParams::new(need(args.a, "a")?, need(args.b, "b")?, need(args.r0, "r0")?)
            .map_err(|e| e.to_string())?
            .into(),
    };
    Ok((model, "curve".to_string()))
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let out: &Path = &cli.out;
    let tol = cli.regime_tol.unwrap_or(DEFAULT_REGIME_TOL);
    match &cli.command {
        Command::Fit { config } => {
            let mut cfg = RunConfig::load(config).map_err(|e| e.to_string())?;
            if let Some(t) = cli.regime_tol {
                cfg.regime_tolerance = t;
            }
            let outcome = report::run_fit(&cfg);
            let seed = cli.seed.unwrap_or(cfg.mc.seed);
            report::write_fit_outputs(&outcome, &cfg, out, cli.format, seed, cli.threads).map_err(|e| e.to_string())?;
            print!("{}", report::render_table(&outcome));
            Ok(ExitCode::from(outcome.exit_code() as u8))
        }
        Command::Curve(args) => {
            let (model, stem) = curve_model(args)?;
            let req = CurveRequest {
                model,
                t_max: args.tmax,
                points: args.points,
                engine: args.engine,
                mc: McOptions {
                    paths: args.paths,
                    seed: cli.seed.unwrap_or(42),
                    dt: args.dt,
                    threads: cli.threads,
                    allow_coarse_feller_dt: args.allow_coarse_dt,
                    max_path_steps: DEFAULT_MAX_PATH_STEPS,
                },
            };
            let outcome = report::run_curve(&req).map_err(|e| e.to_string())?;
            for path in report::write_curves(&outcome, out, cli.format, &stem).map_err(|e| e.to_string())? {
                println!("wrote {}", path.display());
            }
            if let Some(z) = outcome.max_abs_z {
                println!("max |z| (mc vs closed form) = {z}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Phase { reports } => {
            let loaded = report::load_reports(reports).map_err(|e| e.to_string())?;
            let rows = report::phase_rows(&loaded, tol);
            let path = match cli.format {
                OutputFormat::Csv => {
                    report::write_text(&out.join("phase.csv"), &report::phase_csv(&rows).map_err(|e| e.to_string())?)
                }
                OutputFormat::Json => report::write_json(&out.join("phase.json"), &rows),
            }
            .map_err(|e| e.to_string())?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Negprob { kappa_max, mu_max, steps } => {
            let grid = report::negprob_grid(*kappa_max, *mu_max, *steps).map_err(|e| e.to_string())?;
            let path = match cli.format {
                OutputFormat::Csv => report::write_text(
                    &out.join("negprob.csv"),
                    &report::negprob_csv(&grid).map_err(|e| e.to_string())?,
                ),
                OutputFormat::Json => report::write_json(&out.join("negprob.json"), &grid),
            }
            .map_err(|e| e.to_string())?;
            let diag = NondimParams { mu: 1.0, kappa: 1.0, alpha: 1.0 };
            println!(
                "wrote {} ({} points; P(r<0) on the diagonal = {})",
                path.display(),
                grid.len(),
                stochdisc::analytics::prob_negative_stationary(&diag)
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
