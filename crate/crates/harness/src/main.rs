use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use cotune_core::landscape::{Landscape, LoadOptions, Shape};
use cotune_core::ranking::{RankConfig, SplitTest};
use cotune_core::reqgen::{generate_suite, write_suite, GenSpec};
use cotune_harness::config::{synth_spec, ExperimentConfig};
use cotune_harness::experiment::{
    best_rank_counts, render_table, run_experiment, summarize, write_summary, RunRecord,
};
use cotune_harness::trajectories::{aggregate, collect_runs, curves_csv};

#[derive(Parser)]
#[command(name = "cotune", version, about = "Requirement-guided configuration tuning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Keep spending budget after the target is fully satisfied.
        #[arg(long)]
        no_early_stop: bool,
    },
    /// Generate target requirements at given satisfiability levels.
    GenReqs {
        #[arg(long)]
        landscape: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.05,0.2,0.5,0.9")]
        d: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        types: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        fragments: usize,
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
        /// The landscape's metric is maximized.
        #[arg(long)]
        maximize: bool,
        /// Output directory (default: next to the landscape).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-rank a results directory and aggregate its trajectories.
    Rank {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value = "sk")]
        test: SplitTest,
        /// Minimum Cohen's d for a split.
        #[arg(long, default_value_t = 0.2)]
        effect: f64,
    },
    /// Write a synthetic landscape CSV.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        options: usize,
        #[arg(long, default_value = "rugged")]
        shape: Shape,
        /// Per-option domain sizes; overrides the binary default.
        #[arg(long, value_delimiter = ',')]
        domain_sizes: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run { config, jobs, no_early_stop } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if no_early_stop {
                cfg.early_stop = false;
            }
            let outcome = run_experiment(&cfg, jobs)?;
            print!("{}", render_table(&outcome.summary));
            let failed = outcome.failed_runs();
            println!("{} runs, {failed} failed; results in {}", outcome.records.len(), outcome.output.display());
            Ok(if failed > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::GenReqs { landscape, d, types, seed, fragments, tolerance, maximize, out } => {
            let data = Landscape::<f64>::load_csv(&landscape, LoadOptions { maximize })
                .with_context(|| format!("loading {}", landscape.display()))?;
            let spec = GenSpec {
                fragment_count: fragments,
                d_levels: d,
                replicates: types,
                tolerance,
                seed,
            };
            let suite = generate_suite(&data, &spec)?;
            let name = landscape
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "landscape".into());
            let dir = out.unwrap_or_else(|| {
                landscape.parent().unwrap_or(std::path::Path::new(".")).join(format!("{name}_reqs"))
            });
            let manifest = write_suite(&dir, &name, &spec.d_levels, spec.replicates, &suite)?;
            let failed = suite.iter().filter(|r| r.is_err()).count();
            for e in suite.iter().filter_map(|r| r.as_ref().err()) {
                eprintln!("{e}");
            }
            println!("{} requirements, {failed} failed; manifest {}", suite.len(), manifest.display());
            Ok(if failed > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Rank { results, test, effect } => {
            let runs = collect_runs(&results)?;
            let records: Vec<RunRecord> = runs
                .iter()
                .map(|r| RunRecord {
                    landscape: r.landscape.clone(),
                    requirement: r.requirement.clone(),
                    tuner: r.tuner.clone(),
                    seed: r.seed,
                    best_score: r.final_score(),
                    budget_used: r.points.last().map_or(0, |p| p.0),
                    error: None,
                    curve: r.points.clone(),
                })
                .collect();
            let cfg = RankConfig { effect_threshold: effect, test, ..RankConfig::default() };
            let summary = summarize(&records, &cfg);
            write_summary(&results, &summary, &best_rank_counts(&summary))?;
            std::fs::write(results.join("trajectories.csv"), curves_csv(&aggregate(&runs)))?;
            print!("{}", render_table(&summary));
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { seed, options, shape, domain_sizes, out } => {
            let spec = synth_spec(seed, options, shape, domain_sizes);
            let land = Landscape::<f64>::synth(&spec)?;
            land.write_csv(&out)?;
            println!("{} configurations written to {}", land.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
