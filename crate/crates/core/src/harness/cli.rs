//! Command-line front end. [`run`] returns the process exit code.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use super::{
    check_gradients, evaluate, evaluate_with_gt_captions, train, AblationConfig, Checkpoint, EvalReport, TrainConfig,
    GRADCHECK_TOLERANCE,
};
use crate::canonical_json;
use crate::error::{Error, Result};
use crate::latentvqa::{CombineMode, ModelConfig};
use crate::synthdata::{generate_dataset, read_dataset, write_dataset, Split, SynthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_GRADCHECK_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lvvqa", version, about = "Latent-variable VQA on a synthetic shapes world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset as JSON lines.
    GenData {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        sigma_v: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "train")]
        split: Split,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model and write the best-validation checkpoint.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-epoch log as JSON.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a dataset.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// Draw z from the caption posterior instead of the prior.
        #[arg(long)]
        gt_captions: bool,
        #[arg(long)]
        combine: Option<CombineMode>,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the latent-configuration ablation and write report.txt and report.json.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Finite-difference gradient check on four synthetic records.
    Gradcheck {
        /// Training config whose model section is checked; defaults to all dims = 4.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
    },
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::GenData {
            n,
            sigma_v,
            seed,
            split,
            out,
        } => {
            let cfg = SynthConfig::new(n, sigma_v, seed, split);
            let records = generate_dataset(&cfg)?;
            write_dataset(&records, &out)?;
            println!("wrote {} {} records to {}", records.len(), split.name(), out.display());
        }
        Command::Train {
            data,
            val,
            config,
            out,
            log,
        } => {
            let cfg = TrainConfig::load(&config)?;
            let train_records = read_dataset(&data)?;
            let val_records = read_dataset(&val)?;
            let result = train(&cfg, &train_records, &val_records)?;
            println!(
                "{:>5} {:>9} {:>9} {:>9} {:>9} {:>8}",
                "epoch", "loss", "nll_a", "nll_d", "kl", "val_acc"
            );
            for e in &result.log {
                println!(
                    "{:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>8.4}",
                    e.epoch, e.loss, e.nll_answer, e.nll_category, e.kl, e.val_accuracy
                );
            }
            result.checkpoint.save(&out)?;
            println!(
                "best epoch {}; checkpoint written to {}",
                result.best_epoch,
                out.display()
            );
            if let Some(path) = log {
                write_json(&path, &result.log)?;
            }
        }
        Command::Eval {
            ckpt,
            data,
            k,
            gt_captions,
            combine,
            out,
        } => {
            let checkpoint = Checkpoint::load(&ckpt)?;
            let records = read_dataset(&data)?;
            let report = if gt_captions {
                evaluate_with_gt_captions(&checkpoint, &records, k, combine)?
            } else {
                evaluate(&checkpoint, &records, k, combine)?
            };
            print_report(&report);
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
        }
        Command::Ablate { config, outdir } => {
            let cfg = AblationConfig::load(&config)?;
            let report = cfg.run()?;
            report.write(&outdir)?;
            print!("{}", report.to_text());
        }
        Command::Gradcheck { config, h } => {
            let (model, seed) = match config {
                Some(path) => {
                    let cfg = TrainConfig::load(&path)?;
                    (cfg.model, cfg.seed)
                }
                None => (ModelConfig::tiny(4), TrainConfig::default().seed),
            };
            let report = check_gradients(&model, seed, h)?;
            println!(
                "max relative error {:.3e} at {}[{}] (analytic {:.6e}, numeric {:.6e}) over {} entries",
                report.max_rel_error,
                report.worst_param,
                report.worst_index,
                report.worst_analytic,
                report.worst_numeric,
                report.n_checked
            );
            if !report.passed(GRADCHECK_TOLERANCE) {
                eprintln!("gradient check failed: tolerance {GRADCHECK_TOLERANCE:e}");
                return Ok(EXIT_GRADCHECK_FAILED);
            }
            println!("gradient check passed (tolerance {GRADCHECK_TOLERANCE:e})");
        }
    }
    Ok(EXIT_OK)
}

fn print_report(r: &EvalReport) {
    println!("records            {}", r.n_records);
    println!("accuracy           {:.4}", r.accuracy);
    for (cat, acc) in &r.per_category {
        println!("  {:<16} {:.4}  (n = {})", cat, acc, r.per_category_count[cat]);
    }
    println!("category accuracy  {:.4}", r.category_accuracy);
    println!("mean kl            {:.4}", r.mean_kl);
    if r.n_unseen_answers > 0 {
        println!("unseen answers     {}", r.n_unseen_answers);
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = canonical_json::to_string(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
