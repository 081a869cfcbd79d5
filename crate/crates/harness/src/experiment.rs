use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cotune_core::landscape::Landscape;
use cotune_core::ranking::{mean, scott_knott_esd, std_dev, RankConfig};
use cotune_core::reqgen::{generate_suite, requirement_stem, write_suite};
use cotune_core::requirement::Proposition;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, RequirementSource};
use crate::trajectories::{aggregate, curves_csv, RunTrajectory};

pub const SUMMARY_HEADER: &str = "landscape,requirement,tuner,runs,failed,mean,std,rank";
pub const FAILED_MARK: &str = "✗";

/// A requirement for one landscape; `proposition` is `None` when generating it failed.
#[derive(Clone, Debug)]
pub struct Requirement {
    pub name: String,
    pub proposition: Option<Proposition<f64>>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub landscape: String,
    pub requirement: String,
    pub tuner: String,
    pub seed: u64,
    /// Best target satisfaction, or `None` for a failed run.
    pub best_score: Option<f64>,
    pub budget_used: usize,
    pub error: Option<String>,
    /// `(budget_used, best_pt_score)` after every iteration.
    pub curve: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub landscape: String,
    pub requirement: String,
    pub tuner: String,
    pub runs: usize,
    pub failed: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub rank: Option<usize>,
}

impl SummaryRow {
    fn csv_line(&self) -> String {
        let num = |x: Option<f64>| x.map_or(FAILED_MARK.to_string(), |v| format!("{v:.6}"));
        format!(
            "{},{},{},{},{},{},{},{}",
            self.landscape,
            self.requirement,
            self.tuner,
            self.runs,
            self.failed,
            num(self.mean),
            num(self.std),
            self.rank.map_or(String::new(), |r| r.to_string()),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestRankCount {
    pub tuner: String,
    pub best: usize,
    pub ranked_cells: usize,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub best_counts: Vec<BestRankCount>,
    pub output: PathBuf,
}

impl ExperimentOutcome {
    pub fn failed_runs(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

pub fn trajectory_path(out: &Path, landscape: &str, requirement: &str, tuner: &str, seed: u64) -> PathBuf {
    out.join(landscape)
        .join(requirement)
        .join(tuner)
        .join(format!("seed{seed}.csv"))
}

/// Requirements for `landscape`, generating (and writing) a suite if configured.
pub fn resolve_requirements(
    cfg: &ExperimentConfig,
    landscape_name: &str,
    landscape: &Landscape<f64>,
) -> Result<Vec<Requirement>> {
    match &cfg.requirements {
        RequirementSource::Files(files) => files
            .iter()
            .map(|f| {
                let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
                let name = f
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| f.display().to_string());
                Ok(match Proposition::from_json(&text) {
                    Ok(p) => Requirement {
                        name,
                        proposition: Some(p),
                        error: None,
                    },
                    Err(e) => Requirement {
                        name,
                        proposition: None,
                        error: Some(e.to_string()),
                    },
                })
            })
            .collect(),
        RequirementSource::Generate(spec) => {
            let suite = generate_suite(landscape, spec)?;
            let dir = cfg.output.join(landscape_name).join("requirements");
            write_suite(&dir, landscape_name, &spec.d_levels, spec.replicates, &suite)?;
            let cells = (1..=spec.replicates).flat_map(|t| spec.d_levels.iter().map(move |&d| (t, d)));
            Ok(cells
                .zip(suite)
                .map(|((t, d), r)| {
                    let name = requirement_stem(t, d);
                    match r {
                        Ok(g) => Requirement {
                            name,
                            proposition: Some(g.proposition),
                            error: None,
                        },
                        Err(e) => Requirement {
                            name,
                            proposition: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect())
        }
    }
}

struct Job<'a> {
    landscape: &'a str,
    data: &'a Landscape<f64>,
    requirement: &'a Requirement,
    tuner: usize,
    seed: u64,
}

fn execute(cfg: &ExperimentConfig, job: &Job<'_>) -> RunRecord {
    let spec = &cfg.tuners[job.tuner];
    let label = spec.label();
    let mut rec = RunRecord {
        landscape: job.landscape.to_string(),
        requirement: job.requirement.name.clone(),
        tuner: label.clone(),
        seed: job.seed,
        best_score: None,
        budget_used: 0,
        error: None,
        curve: Vec::new(),
    };
    let Some(p) = &job.requirement.proposition else {
        rec.error = job.requirement.error.clone().or(Some("requirement unavailable".into()));
        return rec;
    };
    let params = spec.params(&cfg.run_params());
    let outcome = spec.build().run(job.data, p, &params, job.seed);
    match outcome {
        Ok(r) => {
            let path = trajectory_path(&cfg.output, job.landscape, &job.requirement.name, &label, job.seed);
            let written = path
                .parent()
                .map_or(Ok(()), fs::create_dir_all)
                .and_then(|_| fs::write(&path, r.trajectory_csv()));
            if let Err(e) = written {
                rec.error = Some(format!("writing {}: {e}", path.display()));
                return rec;
            }
            rec.best_score = Some(r.best_score);
            rec.budget_used = r.budget_used;
            rec.curve = r.trajectory.iter().map(|t| (t.budget_used, t.best_pt_score)).collect();
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Runs every (landscape, requirement, tuner, seed) combination and writes
/// trajectories, `summary.csv`, `best_rank_counts.csv`, `trajectories.csv` and
/// `manifest.json`.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentOutcome> {
    fs::create_dir_all(&cfg.output)
        .with_context(|| format!("creating {}", cfg.output.display()))?;
    let mut landscapes = Vec::with_capacity(cfg.landscapes.len());
    for src in &cfg.landscapes {
        let data = src.load()?;
        let reqs = resolve_requirements(cfg, src.name(), &data)?;
        landscapes.push((src.name().to_string(), data, reqs));
    }
    let mut work = Vec::new();
    for (name, data, reqs) in &landscapes {
        for req in reqs {
            for tuner in 0..cfg.tuners.len() {
                for repeat in 0..cfg.repeats {
                    work.push(Job {
                        landscape: name,
                        data,
                        requirement: req,
                        tuner,
                        seed: cfg.seed_base + repeat as u64,
                    });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    let records: Vec<RunRecord> = pool.install(|| work.par_iter().map(|j| execute(cfg, j)).collect());

    let summary = summarize(&records, &cfg.ranking);
    let best_counts = best_rank_counts(&summary);
    write_summary(&cfg.output, &summary, &best_counts)?;
    let runs: Vec<RunTrajectory> = records.iter().filter(|r| r.error.is_none()).map(Into::into).collect();
    fs::write(cfg.output.join("trajectories.csv"), curves_csv(&aggregate(&runs)))?;
    let manifest = serde_json::json!({
        "config": cfg,
        "crate_version": env!("CARGO_PKG_VERSION"),
        "runs": records.len(),
        "failed_runs": records.iter().filter(|r| r.error.is_some()).count(),
        "failures": records
            .iter()
            .filter_map(|r| r.error.as_ref().map(|e| serde_json::json!({
                "landscape": r.landscape,
                "requirement": r.requirement,
                "tuner": r.tuner,
                "seed": r.seed,
                "error": e,
            })))
            .collect::<Vec<_>>(),
    });
    fs::write(
        cfg.output.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(ExperimentOutcome {
        records,
        summary,
        best_counts,
        output: cfg.output.clone(),
    })
}

/// Mean, std and Scott-Knott rank per (landscape, requirement, tuner). Cells
/// keep input order; tuners keep first-appearance order within a cell.
pub fn summarize(records: &[RunRecord], ranking: &RankConfig) -> Vec<SummaryRow> {
    let mut cells: Vec<(String, String)> = Vec::new();
    let mut by_cell: BTreeMap<(String, String), Vec<(String, Vec<f64>, usize, usize)>> = BTreeMap::new();
    for r in records {
        let key = (r.landscape.clone(), r.requirement.clone());
        if !by_cell.contains_key(&key) {
            cells.push(key.clone());
        }
        let tuners = by_cell.entry(key).or_default();
        let slot = match tuners.iter().position(|t| t.0 == r.tuner) {
            Some(i) => i,
            None => {
                tuners.push((r.tuner.clone(), Vec::new(), 0, 0));
                tuners.len() - 1
            }
        };
        let t = &mut tuners[slot];
        t.2 += 1;
        match r.best_score {
            Some(s) => t.1.push(s),
            None => t.3 += 1,
        }
    }
    let mut out = Vec::new();
    for key in cells {
        let tuners = &by_cell[&key];
        let rankable: Vec<(String, Vec<f64>)> = tuners
            .iter()
            .filter(|t| t.3 == 0 && t.1.len() >= 2)
            .map(|t| (t.0.clone(), t.1.clone()))
            .collect();
        let ranks: BTreeMap<String, usize> = if rankable.len() >= 2 {
            scott_knott_esd(&rankable, ranking)
                .map(|rs| rs.into_iter().map(|r| (r.name, r.rank)).collect())
                .unwrap_or_default()
        } else if rankable.len() == 1 {
            [(rankable[0].0.clone(), 1)].into_iter().collect()
        } else {
            BTreeMap::new()
        };
        for (tuner, scores, runs, failed) in tuners {
            let ok = *failed == 0 && !scores.is_empty();
            out.push(SummaryRow {
                landscape: key.0.clone(),
                requirement: key.1.clone(),
                tuner: tuner.clone(),
                runs: *runs,
                failed: *failed,
                mean: ok.then(|| mean(scores)),
                std: ok.then(|| std_dev(scores)),
                rank: ranks.get(tuner).copied(),
            });
        }
    }
    out
}

/// How many ranked cells each tuner shares the best rank in.
pub fn best_rank_counts(summary: &[SummaryRow]) -> Vec<BestRankCount> {
    let mut order: Vec<String> = Vec::new();
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for row in summary {
        if !counts.contains_key(&row.tuner) {
            order.push(row.tuner.clone());
        }
        let c = counts.entry(row.tuner.clone()).or_default();
        if let Some(rank) = row.rank {
            c.1 += 1;
            if rank == 1 {
                c.0 += 1;
            }
        }
    }
    order
        .into_iter()
        .map(|t| {
            let (best, ranked_cells) = counts[&t];
            BestRankCount {
                tuner: t,
                best,
                ranked_cells,
            }
        })
        .collect()
}

pub fn write_summary(out: &Path, summary: &[SummaryRow], counts: &[BestRankCount]) -> Result<()> {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for row in summary {
        s.push_str(&row.csv_line());
        s.push('\n');
    }
    fs::write(out.join("summary.csv"), s)?;
    let mut c = String::from("tuner,best_rank_cells,ranked_cells,fraction\n");
    for b in counts {
        let frac = if b.ranked_cells > 0 {
            b.best as f64 / b.ranked_cells as f64
        } else {
            0.0
        };
        c.push_str(&format!("{},{},{},{frac:.4}\n", b.tuner, b.best, b.ranked_cells));
    }
    fs::write(out.join("best_rank_counts.csv"), c)?;
    Ok(())
}

/// Human-readable `mean±std (rank)` table, one line per summary row.
pub fn render_table(summary: &[SummaryRow]) -> String {
    let mut s = String::new();
    for r in summary {
        let cell = match (r.mean, r.std) {
            (Some(m), Some(sd)) => format!(
                "{m:.3}±{sd:.3} ({})",
                r.rank.map_or("-".to_string(), |k| k.to_string())
            ),
            _ => FAILED_MARK.to_string(),
        };
        s.push_str(&format!("{:<16} {:<16} {:<14} {cell}\n", r.landscape, r.requirement, r.tuner));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(cell: &str, tuner: &str, seed: u64, score: Option<f64>) -> RunRecord {
        RunRecord {
            landscape: "L".into(),
            requirement: cell.into(),
            tuner: tuner.into(),
            seed,
            best_score: score,
            budget_used: 0,
            error: score.is_none().then(|| "boom".into()),
            curve: Vec::new(),
        }
    }

    #[test]
    fn summary_means_are_exact_and_failures_marked() {
        let mut records = Vec::new();
        for seed in 0..4 {
            records.push(rec("r1", "A", seed, Some(if seed % 2 == 0 { 0.9 } else { 0.7 })));
        }
        for seed in 0..4 {
            records.push(rec("r1", "B", seed, Some(0.1)));
        }
        for seed in 0..2 {
            records.push(rec("r2", "A", seed, None));
        }
        for seed in 0..2 {
            records.push(rec("r2", "B", seed, Some(0.5)));
        }
        let s = summarize(&records, &RankConfig::default());
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].mean, Some((0.9 + 0.7) / 2.0));
        assert_eq!(s[0].rank, Some(1));
        assert_eq!(s[1].rank, Some(2));
        assert_eq!(s[2].mean, None);
        assert_eq!(s[2].failed, 2);
        assert!(s[2].csv_line().contains(FAILED_MARK));
        assert_eq!(s[3].rank, Some(1));
        let counts = best_rank_counts(&s);
        assert_eq!(counts[0], BestRankCount { tuner: "A".into(), best: 1, ranked_cells: 1 });
        assert_eq!(counts[1], BestRankCount { tuner: "B".into(), best: 1, ranked_cells: 2 });
    }
}
