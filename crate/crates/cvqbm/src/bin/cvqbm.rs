use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cvqbm::noise::LossPlacement;
use cvqbm::runner::{list_bundled, resolve_config, run_case, run_sweep};

#[derive(Parser)]
#[command(name = "cvqbm", about = "Continuous-variable quantum Boltzmann machine trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a case study from a bundled name or a config file and write its
    /// report artifacts.
    Run {
        /// Bundled case name (see `cvqbm list`) or path to a config document.
        config: String,
        /// Override the training seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the ancilla post-selection outcome (0 or 1).
        #[arg(long, value_parser = clap::value_parser!(u64).range(0..=1))]
        post_select: Option<u64>,
        /// Enforce the config's assert block (exit code 4 on a miss).
        #[arg(long)]
        assert: bool,
    },
    /// Run a photon-loss sweep over transmissivities on a base case config.
    Sweep {
        /// Bundled case name or path to a config document.
        config: String,
        /// Comma-separated transmissivities in [0, 1].
        #[arg(long, value_delimiter = ',', default_value = "1.0,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1")]
        t_values: Vec<f64>,
        /// Training repeats per transmissivity.
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Apply loss to the hidden marginal as well.
        #[arg(long)]
        all_modes: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(0..=1))]
        post_select: Option<u64>,
    },
    /// List the bundled case studies.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> cvqbm::Result<()> {
    match cli.command {
        Command::Run { config, seed, out_dir, post_select, assert } => {
            let mut cfg = resolve_config(&config)?;
            if let Some(s) = seed {
                cfg.train.seed = s;
            }
            if let Some(dir) = out_dir {
                cfg.outputs = dir;
            }
            if let Some(p) = post_select {
                cfg.qbm.post_select_outcome = p as usize;
            }
            let outcome = run_case(&cfg, assert)?;
            let s = &outcome.summary;
            println!(
                "{}: fidelity = {:.6}, kl = {:.6}, success_prob = {:.6} -> {}",
                s.name,
                s.fidelity,
                s.kl,
                s.success_prob,
                s.out_dir.display()
            );
            Ok(())
        }
        Command::Sweep { config, t_values, repeats, all_modes, seed, out_dir, post_select } => {
            let mut cfg = resolve_config(&config)?;
            if let Some(s) = seed {
                cfg.train.seed = s;
            }
            if let Some(dir) = out_dir {
                cfg.outputs = dir;
            }
            if let Some(p) = post_select {
                cfg.qbm.post_select_outcome = p as usize;
            }
            let placement =
                if all_modes { LossPlacement::AllModes } else { LossPlacement::VisibleOnly };
            let table = run_sweep(&cfg, &t_values, repeats, placement)?;
            for a in &table.aggregates {
                println!(
                    "T = {:.2}: mean fidelity = {:.4} (std {:.4}), mean kl = {:.4} (std {:.4}), runs = {}",
                    a.t, a.mean_fidelity, a.std_fidelity, a.mean_kl, a.std_kl, a.runs
                );
            }
            println!("wrote {}", cfg.outputs.join("sweep.csv").display());
            Ok(())
        }
        Command::List => {
            for name in list_bundled() {
                println!("{name}");
            }
            Ok(())
        }
    }
}
