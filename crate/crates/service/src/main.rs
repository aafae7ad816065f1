use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use chrono::DateTime;
use clap::{Args, Parser, Subcommand};
use mailalias::app::{parse_mode, parse_viewer, IssueBody};
use mailalias::{App, Clock, FixedClock, ServiceConfig, ServiceError, SystemClock};
use mailalias_core::sim::report::comparison_table;
use mailalias_core::sim::{run_all, ScenarioConfig};
use mailalias_core::RawAddress;
use serde::Serialize;

/// Issue and manage mailing address aliases, run the carrier API, or simulate strategies.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Service config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's data directory.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Overrides the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Pin the clock to an RFC 3339 instant instead of the system time.
    #[arg(long)]
    now: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct AddressArgs {
    #[arg(long)]
    name: String,
    #[arg(long)]
    line1: String,
    #[arg(long)]
    line2: Option<String>,
    #[arg(long)]
    city: String,
    #[arg(long)]
    state: String,
    #[arg(long)]
    zip: String,
}

impl AddressArgs {
    fn raw(&self) -> RawAddress {
        RawAddress::new(
            &self.name,
            &self.line1,
            self.line2.as_deref(),
            &self.city,
            &self.state,
            &self.zip,
        )
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Create aliases for a true address.
    Issue {
        #[command(flatten)]
        address: AddressArgs,
        #[arg(long)]
        merchant: Option<String>,
        #[arg(long)]
        validity_days: Option<u32>,
        #[arg(long)]
        subscription: bool,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Revoke an alias by `ZIP-digits` handle or bare digits.
    Revoke { handle: String },
    /// Show one alias by handle, or by `--short-code`; with neither, list all.
    Show {
        handle: Option<String>,
        #[arg(long)]
        short_code: Option<String>,
    },
    /// Check an address against the validation gateway.
    Validate {
        #[command(flatten)]
        address: AddressArgs,
        /// hard or soft
        #[arg(long)]
        mode: Option<String>,
    },
    /// Hand a parcel to the carrier.
    Intake {
        #[arg(long)]
        sender: String,
        #[command(flatten)]
        label: AddressArgs,
    },
    /// Move a parcel on: dispatch, deliver or return.
    Parcel { id: String, action: ParcelAction },
    /// Tracking view of a parcel.
    Track {
        id: String,
        /// merchant, customer or carrier
        #[arg(long, default_value = "merchant")]
        viewer: String,
    },
    /// Expire lapsed aliases; with --retention, purge records from past years.
    Sweep {
        #[arg(long)]
        retention: bool,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        bind: Option<String>,
    },
    /// Run the strategy comparison scenario.
    Simulate {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write machine-readable reports here as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum ParcelAction {
    Dispatch,
    Deliver,
    Return,
}

fn print<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("output serializes"));
}

fn service_config(cli: &Cli) -> Result<ServiceConfig, ServiceError> {
    let mut cfg = match &cli.config {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::default(),
    };
    if let Some(d) = &cli.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn clock(cli: &Cli) -> Result<Arc<dyn Clock>, ServiceError> {
    match &cli.now {
        Some(s) => {
            let t = DateTime::parse_from_rfc3339(s)
                .map_err(|e| ServiceError::BadRequest(format!("--now {s}: {e}")))?;
            Ok(Arc::new(FixedClock::new(t.to_utc())))
        }
        None => Ok(Arc::new(SystemClock)),
    }
}

fn simulate(config: Option<PathBuf>, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), ServiceError> {
    let mut cfg = match config {
        Some(p) => ScenarioConfig::load(&p).map_err(|e| ServiceError::Config(e.to_string()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let reports = run_all(&cfg);
    for r in &reports {
        println!("{r}\n");
    }
    print!("{}", comparison_table(&reports));
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&reports).expect("reports serialize");
        std::fs::write(&path, text).map_err(|e| ServiceError::Storage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), ServiceError> {
    if let Command::Simulate { config, seed, out } = cli.command {
        return simulate(config, seed, out);
    }
    let mut cfg = service_config(&cli)?;
    if let Command::Serve { port, bind } = &cli.command {
        if let Some(p) = port {
            cfg.port = *p;
        }
        if let Some(b) = bind {
            cfg.bind = b.clone();
        }
    }
    let app = App::open(cfg, clock(&cli)?)?;
    match cli.command {
        Command::Issue {
            address,
            merchant,
            validity_days,
            subscription,
            count,
        } => print(&app.issue(&IssueBody {
            true_address: address.raw(),
            merchant_domain: merchant,
            validity_days,
            subscription,
            count: Some(count),
        })?),
        Command::Revoke { handle } => print(&app.revoke(&handle)?),
        Command::Show { handle, short_code } => match (handle, short_code) {
            (Some(h), _) => print(&app.get(&h)?),
            (None, Some(sc)) => print(&app.by_short_code(&sc)?),
            (None, None) => print(&app.list()),
        },
        Command::Validate { address, mode } => {
            let mode = mode.as_deref().map(parse_mode).transpose()?;
            print(&app.validate(address.raw(), mode)?)
        }
        Command::Intake { sender, label } => print(&app.intake(&sender, label.raw())?),
        Command::Parcel { id, action } => print(&match action {
            ParcelAction::Dispatch => app.dispatch(&id)?,
            ParcelAction::Deliver => app.deliver(&id)?,
            ParcelAction::Return => app.return_parcel(&id)?,
        }),
        Command::Track { id, viewer } => print(&app.tracking(&id, parse_viewer(&viewer)?)?),
        Command::Sweep { retention } => print(&app.sweep(retention)?),
        Command::Serve { .. } => {
            let runtime = tokio::runtime::Runtime::new().map_err(|e| ServiceError::Storage(e.to_string()))?;
            runtime.block_on(mailalias::serve(Arc::new(app), mailalias::shutdown_signal()))?;
            return Ok(());
        }
        Command::Simulate { .. } => unreachable!("handled above"),
    }
    app.flush()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
