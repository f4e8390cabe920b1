use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};
use windform_cli::commands::{self, InterpolateOptions};
use windform_core::config::Project;

#[derive(Parser)]
#[command(name = "windform", version, about = "Wind-field driven form generation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Interpolate a station CSV into speed / dir_x / dir_y ASCII grids.
    Interpolate {
        stations: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        power: f64,
        #[arg(long, default_value_t = 64)]
        cols: usize,
        #[arg(long, default_value_t = 64)]
        rows: usize,
        /// Padding around the stations, as a fraction of their extent.
        #[arg(long, default_value_t = 0.1)]
        pad: f64,
        /// Output directory (default: $WINDFORM_OUTPUT_DIR or the current one).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scatter morph-target instances over the terrain.
    Scatter { config: PathBuf },
    /// Accumulate IK sweep snapshots into one form.
    Iktrail { config: PathBuf },
    /// Run swarm scenarios; writes trail tubes and a metrics CSV.
    Swarm {
        config: PathBuf,
        /// Run only the scenario with this name.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run the interactive session service.
    Serve {
        config: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

fn run(cli: Cli) -> Result<()> {
    let written = match cli.command {
        Cmd::Interpolate {
            stations,
            power,
            cols,
            rows,
            pad,
            out,
        } => commands::interpolate(&InterpolateOptions {
            stations,
            power,
            cols,
            rows,
            pad,
            out,
        })?,
        Cmd::Scatter { config } => commands::scatter(&config)?,
        Cmd::Iktrail { config } => commands::iktrail(&config)?,
        Cmd::Swarm { config, scenario } => commands::swarm(&config, scenario.as_deref())?,
        Cmd::Serve { config, port, host } => {
            let project = Project::from_path(&config)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(windform_cli::service::serve(project, SocketAddr::new(host, port)))?;
            Vec::new()
        }
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
