use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use corclust::assignment::{read_assignment, write_assignment};
use corclust::engine::Algorithm;
use corclust::graph::{
    gen_gnp, gen_planted, load_edge_list, save_edge_list, stats, Graph, LoadOptions,
};
use corclust::harness::{
    read_rows, repetition_permutation, round_bound_check, run_cell, run_plan, sampling_seed,
    summarize, BenchPlan, CsvSink,
};
use corclust::ordering::parse_seed;
use corclust::quality::disagreements;
use corclust::{Assignment, Error};

#[derive(Parser)]
#[command(name = "corclust", version, about = "Parallel correlation clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Gnp,
    Planted,
}

#[derive(clap::Args)]
struct GraphArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// Keep only arcs present in both directions.
    #[arg(long)]
    no_symmetrize: bool,
    /// Renumber vertex ids densely in order of first appearance.
    #[arg(long)]
    compact: bool,
}

impl GraphArgs {
    fn load(&self) -> corclust::Result<Graph> {
        let loaded = load_edge_list(
            &self.graph,
            LoadOptions {
                symmetrize: !self.no_symmetrize,
                compact: self.compact,
            },
        )?;
        if loaded.self_loops > 0 {
            warn!("dropped {} self-loops", loaded.self_loops);
        }
        Ok(loaded.graph)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph as an edge list.
    Gen {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: usize,
        /// Edge probability (gnp).
        #[arg(long)]
        p: Option<f64>,
        /// Number of blocks (planted).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        pin: Option<f64>,
        #[arg(long)]
        pout: Option<f64>,
        #[arg(long, value_parser = seed_arg, default_value = "0")]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster a graph.
    Run {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_parser = algorithm_arg)]
        algo: Algorithm,
        #[arg(long, default_value_t = 0.9)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Root seed; the permutation and batch seeds derive from it.
        #[arg(long, value_parser = seed_arg, default_value = "0")]
        seed: u64,
        #[arg(long)]
        out_assignment: Option<PathBuf>,
        /// Write the run report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Renumber labels 0, 1, ... by first appearance.
        #[arg(long)]
        canonical: bool,
        #[arg(long)]
        watchdog_secs: Option<u64>,
    },
    /// Check an assignment file and print its objective.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        assignment: PathBuf,
    },
    /// Run a JSON bench plan and write result rows as CSV.
    Bench {
        #[arg(long)]
        plan: PathBuf,
        /// Overrides the plan's output path; standard output if neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 3 if a C4 row differs from serial or a round bound is missed.
        #[arg(long)]
        check: bool,
    },
    /// Summarize a result CSV as JSON.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print graph statistics as JSON.
    Stats {
        #[command(flatten)]
        graph: GraphArgs,
    },
}

fn seed_arg(text: &str) -> Result<u64, String> {
    parse_seed(text).map_err(|e| e.to_string())
}

fn algorithm_arg(text: &str) -> Result<Algorithm, String> {
    text.parse::<Algorithm>().map_err(|e| e.to_string())
}

enum Failure {
    Runtime(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn required<T>(value: Option<T>, flag: &str, model: &str) -> Result<T, Failure> {
    value.ok_or_else(|| {
        Failure::Runtime(Error::InvalidArgument(format!(
            "--{flag} is required for --model {model}"
        )))
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen {
            model,
            n,
            p,
            k,
            pin,
            pout,
            seed,
            out,
        } => {
            let g = match model {
                Model::Gnp => gen_gnp(n, required(p, "p", "gnp")?, seed)?,
                Model::Planted => gen_planted(
                    n,
                    required(k, "k", "planted")?,
                    required(pin, "pin", "planted")?,
                    required(pout, "pout", "planted")?,
                    seed,
                )?,
            };
            save_edge_list(&g, &out)?;
            info!("wrote n={} m={} to {}", g.n(), g.m(), out.display());
        }
        Command::Run {
            graph,
            algo,
            epsilon,
            threads,
            seed,
            out_assignment,
            report,
            canonical,
            watchdog_secs,
        } => {
            let g = graph.load()?;
            let perm = repetition_permutation(g.n(), seed, 0);
            let (a, mut rep) = run_cell(
                &g,
                &perm,
                algo,
                epsilon,
                threads,
                sampling_seed(seed, 0),
                watchdog_secs.map(Duration::from_secs),
            )?;
            rep.metadata.insert("root_seed".into(), seed.to_string());
            info!(
                "{algo}: objective {} in {} rounds",
                rep.objective, rep.rounds
            );
            if let Some(path) = out_assignment {
                let labels = if canonical {
                    a.canonical()
                } else {
                    a.labels().to_vec()
                };
                write_assignment(&labels, File::create(path)?)?;
            }
            write_output(report.as_deref(), &rep.to_json()?)?;
        }
        Command::Verify { graph, assignment } => {
            let g = graph.load()?;
            let labels = read_assignment(BufReader::new(File::open(&assignment)?), &assignment)?;
            if labels.len() != g.n() {
                return Err(Failure::Check(format!(
                    "assignment covers {} vertices, graph has {}",
                    labels.len(),
                    g.n()
                )));
            }
            let a = Assignment::from_labels(labels);
            if let Err(e) = a.check_complete() {
                return Err(Failure::Check(e.to_string()));
            }
            let breakdown = disagreements(&g, &a)?;
            let text = serde_json::json!({
                "valid": true,
                "clusters": a.cluster_count(),
                "objective": breakdown,
            });
            write_output(
                None,
                &serde_json::to_string_pretty(&text).map_err(Error::from)?,
            )?;
        }
        Command::Bench { plan, out, check } => {
            let plan = BenchPlan::load(&plan)?;
            let target = out.or_else(|| plan.output.clone());
            let mut sink: CsvSink<Box<dyn Write>> = match &target {
                Some(p) => CsvSink::new(Box::new(File::create(p)?)),
                None => CsvSink::new(Box::new(io::stdout())),
            };
            let rows = run_plan(&plan, |row| sink.write(row))?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            info!("{} rows, {failed} failed", rows.len());
            if check {
                let mismatched = rows
                    .iter()
                    .filter(|r| matches!(r.variant, Algorithm::C4Bsp | Algorithm::C4Async))
                    .filter(|r| r.matches_serial == Some(false))
                    .count();
                let rounds = round_bound_check(&rows);
                if mismatched > 0 || !rounds.passed || failed > 0 {
                    return Err(Failure::Check(format!(
                        "{mismatched} C4 rows differ from serial, {failed} rows failed, round bound: {}",
                        rounds.detail
                    )));
                }
            }
        }
        Command::Summarize { input, out } => {
            let rows = read_rows(File::open(&input)?)?;
            if rows.is_empty() {
                return Err(Failure::Runtime(Error::EmptyInput(input)));
            }
            let summary = summarize(&rows);
            write_output(
                out.as_deref(),
                &serde_json::to_string_pretty(&summary).map_err(Error::from)?,
            )?;
        }
        Command::Stats { graph } => {
            let g = graph.load()?;
            write_output(
                None,
                &serde_json::to_string_pretty(&stats(&g)).map_err(Error::from)?,
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
    }
}
