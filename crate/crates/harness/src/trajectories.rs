use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::experiment::RunRecord;

pub const CURVE_HEADER: &str = "tuner,budget,mean,ci_low,ci_high,runs";
const Z95: f64 = 1.959963984540054;

/// One run's best-so-far curve.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrajectory {
    pub landscape: String,
    pub requirement: String,
    pub tuner: String,
    pub seed: u64,
    pub points: Vec<(usize, f64)>,
}

impl From<&RunRecord> for RunTrajectory {
    fn from(r: &RunRecord) -> Self {
        RunTrajectory {
            landscape: r.landscape.clone(),
            requirement: r.requirement.clone(),
            tuner: r.tuner.clone(),
            seed: r.seed,
            points: r.curve.clone(),
        }
    }
}

impl RunTrajectory {
    /// Best-so-far at `budget`: the last point measured within it.
    pub fn at(&self, budget: usize) -> Option<f64> {
        let i = self.points.partition_point(|p| p.0 <= budget);
        (i > 0).then(|| self.points[i - 1].1)
    }

    pub fn final_score(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub tuner: String,
    pub budget: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub runs: usize,
}

#[derive(Deserialize)]
struct Row {
    budget_used: usize,
    best_pt_score: f64,
}

pub fn read_trajectory(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    rdr.deserialize::<Row>()
        .map(|r| {
            r.map(|r| (r.budget_used, r.best_pt_score))
                .with_context(|| format!("parsing {}", path.display()))
        })
        .collect()
}

fn subdirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    out.sort();
    Ok(out)
}

fn name_of(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Every `<landscape>/<requirement>/<tuner>/seed<k>.csv` below `dir`.
pub fn collect_runs(dir: &Path) -> Result<Vec<RunTrajectory>> {
    let mut runs = Vec::new();
    for land in subdirs(dir)? {
        for req in subdirs(&land)? {
            for tuner in subdirs(&req)? {
                let mut files: Vec<(u64, PathBuf)> = fs::read_dir(&tuner)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter_map(|p| {
                        let stem = p.file_stem()?.to_str()?;
                        let seed = stem.strip_prefix("seed")?.parse().ok()?;
                        (p.extension()? == "csv").then_some((seed, p))
                    })
                    .collect();
                files.sort();
                for (seed, path) in files {
                    runs.push(RunTrajectory {
                        landscape: name_of(&land),
                        requirement: name_of(&req),
                        tuner: name_of(&tuner),
                        seed,
                        points: read_trajectory(&path)?,
                    });
                }
            }
        }
    }
    if runs.is_empty() {
        bail!("no trajectories found under {}", dir.display());
    }
    Ok(runs)
}

/// Mean best-so-far per tuner on the union of observed budgets, from the first
/// budget every run has reached. Runs that ended early hold their last value.
pub fn aggregate(runs: &[RunTrajectory]) -> Vec<CurvePoint> {
    let mut by_tuner: BTreeMap<&str, Vec<&RunTrajectory>> = BTreeMap::new();
    for r in runs.iter().filter(|r| !r.points.is_empty()) {
        by_tuner.entry(&r.tuner).or_default().push(r);
    }
    let mut out = Vec::new();
    for (tuner, rs) in by_tuner {
        let start = rs.iter().map(|r| r.points[0].0).max().unwrap_or(0);
        let mut budgets: Vec<usize> = rs
            .iter()
            .flat_map(|r| r.points.iter().map(|p| p.0))
            .filter(|&b| b >= start)
            .collect();
        budgets.sort_unstable();
        budgets.dedup();
        for b in budgets {
            let xs: Vec<f64> = rs.iter().filter_map(|r| r.at(b)).collect();
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            let half = if xs.len() > 1 {
                let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                Z95 * sd / n.sqrt()
            } else {
                0.0
            };
            out.push(CurvePoint {
                tuner: tuner.to_string(),
                budget: b,
                mean: m,
                ci_low: m - half,
                ci_high: m + half,
                runs: xs.len(),
            });
        }
    }
    out
}

pub fn curves_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for p in points {
        s.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{}\n",
            p.tuner, p.budget, p.mean, p.ci_low, p.ci_high, p.runs
        ));
    }
    s
}

/// Writes `<dir>/trajectories.csv` aggregated over every run found under `dir`.
pub fn emit_trajectory_plots_data(dir: &Path) -> Result<PathBuf> {
    let runs = collect_runs(dir)?;
    let path = dir.join("trajectories.csv");
    fs::write(&path, curves_csv(&aggregate(&runs)))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(tuner: &str, seed: u64, points: Vec<(usize, f64)>) -> RunTrajectory {
        RunTrajectory {
            landscape: "L".into(),
            requirement: "R".into(),
            tuner: tuner.into(),
            seed,
            points,
        }
    }

    #[test]
    fn single_run_echoes_with_zero_width() {
        let r = run("A", 0, vec![(10, 0.1), (20, 0.4), (30, 0.4)]);
        let c = aggregate(&[r]);
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|p| p.ci_low == p.mean && p.ci_high == p.mean));
        assert_eq!(c[1].mean, 0.4);
    }

    #[test]
    fn three_seed_aggregation_by_hand() {
        let runs = vec![
            run("A", 0, vec![(10, 0.0), (20, 0.3)]),
            run("A", 1, vec![(10, 0.3), (20, 0.6)]),
            // stopped early: holds 0.9 at budget 20
            run("A", 2, vec![(10, 0.9)]),
        ];
        let c = aggregate(&runs);
        assert_eq!(c.len(), 2);
        assert!((c[0].mean - 0.4).abs() < 1e-12);
        // sd of {0.3, 0.6, 0.9} = 0.3; half width 1.96 * 0.3 / sqrt 3
        assert!((c[1].mean - 0.6).abs() < 1e-12);
        let half = Z95 * 0.3 / 3f64.sqrt();
        assert!((c[1].ci_high - 0.6 - half).abs() < 1e-9);
        assert_eq!(c[1].runs, 3);
    }

    #[test]
    fn step_lookup() {
        let r = run("A", 0, vec![(10, 0.1), (25, 0.5)]);
        assert_eq!(r.at(9), None);
        assert_eq!(r.at(24), Some(0.1));
        assert_eq!(r.at(300), Some(0.5));
    }
}
