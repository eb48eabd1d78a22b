use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use permcrack::Mode;
use permcrack_cli::commands;
use permcrack_cli::load_key;
use permcrack_cli::sweep::{ExperimentConfig, Source};

/// Bit-level chaotic permutation cipher and its plaintext attacks.
#[derive(Parser)]
#[command(name = "permcrack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a binary PGM.
    Encrypt {
        #[arg(long, value_name = "FILE")]
        key: PathBuf,
        input: PathBuf,
        output: PathBuf,
    },
    /// Decrypt a binary PGM.
    Decrypt {
        #[arg(long, value_name = "FILE")]
        key: PathBuf,
        input: PathBuf,
        output: PathBuf,
    },
    /// Recover the permutation from known plain/cipher pairs listed in a
    /// tab-separated manifest; writes map.txt and report.csv.
    AttackKnown {
        manifest: PathBuf,
        #[arg(long, default_value = "bit")]
        mode: Mode,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Write the chosen plaintexts, and their ciphers plus a manifest when a
    /// key is given.
    GenChosen {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value = "bit")]
        mode: Mode,
        #[arg(long, value_name = "FILE")]
        key: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Known-plaintext accuracy sweep over n0; writes a CSV.
    Sweep {
        #[arg(long, default_value_t = 16)]
        rows: usize,
        #[arg(long, default_value_t = 16)]
        cols: usize,
        #[arg(long, default_value = "bit")]
        mode: Mode,
        #[arg(long, default_value_t = 1)]
        n0_min: usize,
        #[arg(long, default_value_t = 20)]
        n0_max: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use this key for every trial instead of a random one.
        #[arg(long, value_name = "FILE")]
        key: Option<PathBuf>,
        /// Directory of PGM images to draw plaintexts from.
        #[arg(long, value_name = "DIR")]
        corpus: Option<PathBuf>,
        /// Output CSV file.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Property checks for a key and logistic trajectory histograms, as CSV.
    Diagnostics {
        #[arg(long, value_name = "FILE")]
        key: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for diagnostics.csv; stdout otherwise.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encrypt { key, input, output } => commands::encrypt_file(&load_key(&key)?, &input, &output),
        Command::Decrypt { key, input, output } => commands::decrypt_file(&load_key(&key)?, &input, &output),
        Command::AttackKnown { manifest, mode, out } => {
            let report = commands::attack_known(&manifest, mode, &out)?;
            println!("{}", permcrack::AttackReport::CSV_HEADER);
            println!("{}", report.csv_row());
            Ok(())
        }
        Command::GenChosen { rows, cols, mode, key, out } => {
            let key = key.as_deref().map(load_key).transpose()?;
            let written = commands::gen_chosen(rows, cols, mode, key.as_ref(), &out)?;
            println!("{}", written.len());
            Ok(())
        }
        Command::Sweep { rows, cols, mode, n0_min, n0_max, trials, seed, key, corpus, out } => {
            let cfg = ExperimentConfig {
                rows,
                cols,
                mode,
                n0_min,
                n0_max,
                trials,
                seed,
                key: key.as_deref().map(load_key).transpose()?,
                source: corpus.map_or(Source::Synthetic, Source::Corpus),
            };
            cfg.validate()?;
            commands::sweep(&cfg, &out)
        }
        Command::Diagnostics { key, seed, out } => {
            let key = load_key(&key)?;
            let ok = match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let path = dir.join("diagnostics.csv");
                    let f = std::fs::File::create(&path)?;
                    commands::diagnostics(&key, seed, std::io::BufWriter::new(f))?
                }
                None => commands::diagnostics(&key, seed, std::io::stdout().lock())?,
            };
            if !ok {
                bail!("a property check failed for this key");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
