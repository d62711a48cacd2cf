use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod plot;

/// Exact-propagator laboratory for wave equations with scale-invariant damping.
#[derive(Parser, Debug)]
#[command(name = "dampwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one configuration and write its norm series as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// write the field at every output time as raw f64 arrays plus JSON sidecars
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
    /// Compare the Bessel multipliers with the mode ODE on a grid of points.
    MultiplierCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print Bessel identity residuals as CSV.
    SpecfunSelftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a decay exponent to one track of a series CSV.
    Decay {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "L2")]
        track: String,
        #[arg(long, default_value_t = 0.5)]
        window: f64,
    },
    /// Run a (p, epsilon, mu, gamma) scan.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the threshold and decay-rate catalog as JSON.
    Exponents {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Check the Gagliardo-Nirenberg inequality on random fields.
    Gn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Write gnuplot data and scripts for a series or a scan.
    Plotdata {
        /// series CSV (loglog_decay) or scan directory / outcomes CSV (phase_map)
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        style: Style,
        #[arg(long)]
        out: PathBuf,
        /// dimension used for the reference exponents
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        gamma: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Style {
    LoglogDecay,
    PhaseMap,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Simulate { config, out, snapshots } => commands::simulate(&config, &out, snapshots.as_deref()),
        Command::MultiplierCheck { config, out } => commands::multiplier_check(&config, &out),
        Command::SpecfunSelftest { out } => commands::specfun_selftest(out.as_deref()),
        Command::Decay { input, track, window } => commands::decay(&input, &track, window),
        Command::Scan { config, out } => commands::scan(&config, &out),
        Command::Exponents { n, gamma, m, mu } => commands::exponents(n, gamma, m, mu),
        Command::Gn { n, q, samples, seed } => commands::gn(n, q, samples, seed),
        Command::Plotdata { input, style, out, n, mu, m, gamma } => {
            plot::plotdata(&input, style, &out, &plot::Reference { n, mu, m, gamma })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(output::exit_code(&e))
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("DAMPWAVE_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| output::invalid(format!("DAMPWAVE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}
