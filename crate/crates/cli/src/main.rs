use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dlo_cli::{cmd_eval, cmd_gen_scene, cmd_plot, cmd_run, RunArgs};

/// Visuo-tactile cable shape reconstruction on simulated scenes.
#[derive(Parser)]
#[command(name = "dlo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a scenario file from a template name or a scenario config.
    GenScene {
        /// cs1_plain, cs1_occluded, cs2_plain, cs2_occluded, or a scenario file
        template: String,
        #[arg(long, env = "DLO_SEED", default_value_t = 0)]
        seed: u64,
        /// Output file (default `<name>_seed<seed>.toml`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the reconstruction and write every intermediate.
    Run {
        scenario: PathBuf,
        /// Parameter overrides (TOML)
        #[arg(long)]
        params: Option<PathBuf>,
        /// Override the scenario seed
        #[arg(long, env = "DLO_SEED")]
        seed: Option<u64>,
        /// Vision only
        #[arg(long)]
        no_tactile: bool,
        #[arg(long, default_value = "run")]
        out: PathBuf,
    },
    /// Compare a run with a reference run directory or scenario file.
    Eval {
        run: PathBuf,
        reference: PathBuf,
        /// Report directory (default: the run directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the intermediates of a run as SVG.
    Plot {
        run: PathBuf,
        /// Output directory (default `<run>/plots`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenScene { template, seed, out } => cmd_gen_scene(&template, seed, out.as_deref()).map(|p| {
            println!("{}", p.display());
            0
        }),
        Command::Run {
            scenario,
            params,
            seed,
            no_tactile,
            out,
        } => cmd_run(&RunArgs {
            scenario,
            params,
            seed,
            tactile: !no_tactile,
            out,
        })
        .map(|o| {
            let m = &o.manifest;
            println!("{}: {:?}", m.output_dir, m.status);
            if let Some(e) = &m.error {
                eprintln!("{e}");
            }
            m.exit_code
        }),
        Command::Eval { run, reference, out } => cmd_eval(&run, &reference, out.as_deref()).map(|r| {
            for c in &r.cables {
                println!(
                    "cluster {}: rmse {:.6} m, curve mean {:.6} m, max {:.6} m, {} segment(s)",
                    c.cluster, c.rmse, c.curve_mean, c.curve_max, c.segments
                );
            }
            0
        }),
        Command::Plot { run, out } => cmd_plot(&run, out.as_deref()).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
