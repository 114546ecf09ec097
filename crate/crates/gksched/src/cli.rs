//! Command-line front end over the harness: generate, label, train, eval,
//! and bench, with exit code 0 on success, 1 on validation errors, and 2 on
//! I/O errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::error::Result;
use crate::harness::{
    bench, eval_field, label_field, pooled_model_path, train_field, train_pooled,
    write_results_csv, ExperimentSpec, FieldPaths, generate_field,
};
use crate::svm::SvmModel;

#[derive(Parser, Debug)]
#[command(
    name = "gksched",
    version,
    about = "Link scheduling for D2D networks with SPD graph embeddings and a log-Euclidean kernel SVM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config: a JSON file path, or "default" for built-in
    /// defaults.
    #[arg(long, global = true, default_value = "default")]
    config: String,

    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Run a single field length (meters) instead of the config's list.
    #[arg(long, global = true)]
    field_length: Option<f64>,

    /// Override the number of D2D pairs.
    #[arg(long, global = true)]
    k: Option<usize>,

    /// Measure per-scheme scheduling times; off by default so reruns are
    /// byte-identical.
    #[arg(long, global = true)]
    timing: bool,

    /// Train one model across all field lengths instead of one per field.
    #[arg(long, global = true)]
    pooled: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write layouts, embedding checksums, and a manifest per field.
    Generate,
    /// Label every layout with the exhaustive optimum.
    Label,
    /// Select a kernel bandwidth by cross validation and fit the SVM.
    Train,
    /// Score all schemes on the held-out split and write CSV reports.
    Eval,
    /// Full pipeline: generate, label, train, eval, combined results.csv.
    Bench,
}

/// Runs the CLI against the given argument vector and returns the process
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_model(out: &Path, field_length_m: f64, pooled: bool) -> Result<SvmModel> {
    let path = if pooled {
        pooled_model_path(out)
    } else {
        FieldPaths::new(out, field_length_m).model()
    };
    SvmModel::load(&path)
}

fn execute(cli: Cli) -> Result<()> {
    let mut spec = ExperimentSpec::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        spec.master_seed = seed;
    }
    if let Some(k) = cli.k {
        spec.sim.pair_count = k;
    }
    spec.validate()?;
    let fields: Vec<f64> = match cli.field_length {
        Some(f) => vec![f],
        None => spec.field_lengths.clone(),
    };
    for &f in &fields {
        spec.field_sim(f).validate()?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| crate::error::Error::io(&cli.out, e))?;

    match cli.command {
        Command::Generate => {
            for &f in &fields {
                let n = generate_field(&spec, f, &cli.out)?;
                println!("generated {n} layouts at {f} m under {}", cli.out.display());
            }
        }
        Command::Label => {
            for &f in &fields {
                let n = label_field(&spec, f, &cli.out)?;
                println!("labeled {n} layouts at {f} m");
            }
        }
        Command::Train => {
            if cli.pooled {
                let s = train_pooled(&spec, &fields, &cli.out)?;
                println!(
                    "trained pooled model on {} samples: gamma {}, cv accuracy {:.4}",
                    s.samples, s.cv.gamma, s.cv.mean_accuracy
                );
            } else {
                for &f in &fields {
                    let s = train_field(&spec, f, &cli.out)?;
                    println!(
                        "trained {f} m model on {} samples: gamma {}, cv accuracy {:.4}",
                        s.samples, s.cv.gamma, s.cv.mean_accuracy
                    );
                }
            }
        }
        Command::Eval => {
            let mut reports = Vec::with_capacity(fields.len());
            for &f in &fields {
                let model = load_model(&cli.out, f, cli.pooled)?;
                let report = eval_field(&spec, f, &cli.out, &model, cli.timing)?;
                print_field_summary(&report);
                reports.push(report);
            }
            let path = write_results_csv(&cli.out, &reports)?;
            println!("wrote {}", path.display());
        }
        Command::Bench => {
            let report = bench(&spec, &cli.out, &fields, cli.pooled, cli.timing)?;
            for field in &report.fields {
                print_field_summary(field);
            }
            println!("wrote {}", report.results_csv.display());
        }
    }
    Ok(())
}

fn print_field_summary(report: &crate::harness::FieldReport) {
    let gkernel = report
        .schemes
        .iter()
        .find(|s| s.scheme == "gkernel")
        .expect("gkernel row is always present");
    println!(
        "{} m: gkernel ratio {:.2}%, activation {:.2}%, accuracy {:.2}%",
        report.field_length_m, gkernel.ratio_pct, gkernel.activation_pct, gkernel.accuracy_pct
    );
}
