//! Command-line front end to the experiment harness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use online_dr::harness::{
    emit_gamma_sweep, emit_window_sweep, gen_synthetic_prices, run_suite, write_prices_csv,
    ExperimentConfig, PriceSource, SyntheticParams,
};
use online_dr::model::ConsumerConfig;
use online_dr::online::Method;
use online_dr::{Error, Result};

#[derive(Parser)]
#[command(name = "dr-bench", version, about = "Online demand response experiments")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// First synthetic seed, or the seed to generate with `gen-prices`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every configured method on the first day.
    Run,
    /// Every configured method on every configured day.
    Suite,
    /// Profit and run time over look-ahead windows.
    SweepW {
        #[arg(long, default_value = "rhgd")]
        method: String,
        #[arg(long, value_delimiter = ',', default_value = "1,3,6,12")]
        windows: Vec<usize>,
    },
    /// Rolling robust profit over uncertainty budgets.
    SweepGamma {
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
        gammas: Vec<f64>,
    },
    /// Writes one synthetic day as `prices_<seed>.csv`.
    GenPrices,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Parameter("--config is required for this command".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        match &mut cfg.prices {
            PriceSource::Synthetic {
                first_seed, seeds, ..
            } => {
                *first_seed = seed;
                *seeds = None;
            }
            PriceSource::Csv { .. } => {
                return Err(Error::Parameter("--seed needs a synthetic price source".into()))
            }
        }
    }
    Ok(cfg)
}

fn report(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn gen_prices(cli: &Cli) -> Result<()> {
    let seed = cli
        .seed
        .ok_or_else(|| Error::Parameter("gen-prices needs --seed".into()))?;
    let (horizon, params, out) = match &cli.config {
        Some(_) => {
            let cfg = load(cli)?;
            let params = match cfg.prices {
                PriceSource::Synthetic { params, .. } => params,
                PriceSource::Csv { .. } => SyntheticParams::default(),
            };
            (cfg.consumer.horizon, params, cfg.out_dir)
        }
        None => (
            ConsumerConfig::reference_consumer().horizon,
            SyntheticParams::default(),
            cli.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        ),
    };
    let prices = gen_synthetic_prices(seed, horizon, &params)?;
    std::fs::create_dir_all(&out).map_err(|e| io(&out, e))?;
    let path = out.join(format!("prices_{seed}.csv"));
    write_prices_csv(&path, &prices)?;
    report(&[path]);
    Ok(())
}

fn io(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run => {
            let mut cfg = load(cli)?;
            cfg.days = 1;
            let (report_, files) = run_suite(&cfg)?;
            for row in &report_.summary {
                println!("{}: profit {:.4}, ratio {:.2}%", row.method, row.mean_profit, row.mean_ratio_pct);
            }
            report(&files[files.len() - 1..]);
        }
        Command::Suite => {
            let cfg = load(cli)?;
            let (report_, files) = run_suite(&cfg)?;
            for row in &report_.summary {
                println!(
                    "{}: mean profit {:.4}, mean ratio {:.2}%, shortfall {:.4} MWh",
                    row.method, row.mean_profit, row.mean_ratio_pct, row.mean_shortfall_mwh
                );
            }
            if !report_.unprofitable_days.is_empty() {
                println!(
                    "ratios exclude {} day(s) with no offline profit: {:?}",
                    report_.unprofitable_days.len(),
                    report_.unprofitable_days
                );
            }
            report(&files[files.len() - 1..]);
        }
        Command::SweepW { method, windows } => {
            let cfg = load(cli)?;
            let method: Method = method.parse()?;
            let (_, path) = emit_window_sweep(&cfg, method, windows)?;
            report(&[path]);
        }
        Command::SweepGamma { gammas } => {
            let cfg = load(cli)?;
            let (_, path) = emit_gamma_sweep(&cfg, gammas)?;
            report(&[path]);
        }
        Command::GenPrices => gen_prices(cli)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
