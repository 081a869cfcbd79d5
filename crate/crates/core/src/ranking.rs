//! Scott-Knott ranking with an effect-size guard.
//!
//! Treatments are sorted by mean (best first) and split recursively where the
//! between-group sum of squares peaks. A split stands only if it is
//! statistically significant and the two sides differ by a non-negligible
//! Cohen's d.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RankError {
    #[error("at least two treatments are needed, got {0}")]
    TooFewTreatments(usize),
    #[error("treatment {0} has fewer than two observations")]
    SampleTooSmall(String),
    #[error("treatment {0} has a non-finite observation")]
    NonFinite(String),
    #[error("duplicate treatment name {0}")]
    DuplicateName(String),
}

/// Significance test used to accept a split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTest {
    /// The Scott-Knott likelihood-ratio statistic on treatment means.
    #[default]
    #[serde(rename = "sk")]
    ScottKnott,
    /// Kruskal-Wallis on the pooled observations of each side.
    Kruskal,
}

impl FromStr for SplitTest {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sk" | "scott-knott" | "scottknott" => Ok(SplitTest::ScottKnott),
            "kruskal" | "kw" => Ok(SplitTest::Kruskal),
            other => Err(format!("unknown split test {other:?} (expected sk or kruskal)")),
        }
    }
}

impl fmt::Display for SplitTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitTest::ScottKnott => "sk",
            SplitTest::Kruskal => "kruskal",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankConfig {
    /// Minimum Cohen's d for a split.
    pub effect_threshold: f64,
    pub alpha: f64,
    pub test: SplitTest,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            effect_threshold: 0.2,
            alpha: 0.05,
            test: SplitTest::ScottKnott,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    /// 1 is the best (highest-mean) group.
    pub rank: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// |Cohen's d| with pooled standard deviation. Infinite when the pooled spread
/// is zero but the means differ.
pub fn cohens_d(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let diff = (mean(a) - mean(b)).abs();
    let pooled = (((na - 1.0) * std_dev(a).powi(2) + (nb - 1.0) * std_dev(b).powi(2))
        / (na + nb - 2.0))
        .sqrt();
    if pooled > 0.0 {
        diff / pooled
    } else if diff > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Kruskal-Wallis H with tie correction; returns the p-value.
pub fn kruskal_wallis(groups: &[&[f64]]) -> f64 {
    let mut all: Vec<(f64, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, xs)| xs.iter().map(move |&x| (x, g)))
        .collect();
    let n = all.len() as f64;
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = vec![0.0; groups.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for item in &all[i..=j] {
            rank_sum[item.1] += avg;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        return 1.0;
    }
    let h = 12.0 / (n * (n + 1.0))
        * groups
            .iter()
            .zip(&rank_sum)
            .map(|(g, r)| r * r / g.len() as f64)
            .sum::<f64>()
        - 3.0 * (n + 1.0);
    let h = h / correction;
    let chi = ChiSquared::new((groups.len() - 1) as f64).expect("positive df");
    1.0 - chi.cdf(h.max(0.0))
}

struct Treatment<'a> {
    name: &'a str,
    xs: &'a [f64],
    mean: f64,
}

struct Context {
    /// Pooled within-treatment variance of the whole experiment.
    mse: f64,
    /// Its degrees of freedom.
    df_error: f64,
    /// Harmonic mean of sample sizes.
    r: f64,
    cfg: RankConfig,
}

impl Context {
    fn significant(&self, group: &[Treatment<'_>], cut: usize, b0: f64) -> bool {
        match self.cfg.test {
            SplitTest::ScottKnott => {
                let k = group.len() as f64;
                let grand = group.iter().map(|t| t.mean).sum::<f64>() / k;
                let ss = group.iter().map(|t| (t.mean - grand).powi(2)).sum::<f64>();
                let sigma0 = (ss + self.df_error * self.mse / self.r) / (k + self.df_error);
                if !(sigma0 > 0.0) {
                    return false;
                }
                let pi = std::f64::consts::PI;
                let lambda = pi / (2.0 * (pi - 2.0)) * b0 / sigma0;
                let chi = ChiSquared::new(k / (pi - 2.0)).expect("positive df");
                lambda > chi.inverse_cdf(1.0 - self.cfg.alpha)
            }
            SplitTest::Kruskal => {
                let (left, right) = pooled(group, cut);
                kruskal_wallis(&[&left, &right]) < self.cfg.alpha
            }
        }
    }
}

fn pooled(group: &[Treatment<'_>], cut: usize) -> (Vec<f64>, Vec<f64>) {
    let flat = |ts: &[Treatment<'_>]| ts.iter().flat_map(|t| t.xs.iter().copied()).collect();
    (flat(&group[..cut]), flat(&group[cut..]))
}

/// Split point maximizing the between-group sum of squares of treatment means.
fn best_cut(group: &[Treatment<'_>]) -> (usize, f64) {
    let k = group.len() as f64;
    let grand = group.iter().map(|t| t.mean).sum::<f64>() / k;
    let mut best = (1, f64::NEG_INFINITY);
    for cut in 1..group.len() {
        let side = |ts: &[Treatment<'_>]| {
            let m = ts.iter().map(|t| t.mean).sum::<f64>() / ts.len() as f64;
            ts.len() as f64 * (m - grand).powi(2)
        };
        let b0 = side(&group[..cut]) + side(&group[cut..]);
        if b0 > best.1 {
            best = (cut, b0);
        }
    }
    best
}

fn partition(group: &[Treatment<'_>], ctx: &Context, out: &mut Vec<usize>) {
    if group.len() < 2 {
        out.push(group.len());
        return;
    }
    let (cut, b0) = best_cut(group);
    let (left, right) = pooled(group, cut);
    let effect = cohens_d(&left, &right);
    if b0 > 0.0 && effect >= ctx.cfg.effect_threshold && ctx.significant(group, cut, b0) {
        partition(&group[..cut], ctx, out);
        partition(&group[cut..], ctx, out);
    } else {
        out.push(group.len());
    }
}

/// Ranks treatments into contiguous groups by mean satisfaction. The result is
/// ordered best first; mean ties are ordered by name.
pub fn scott_knott_esd(
    samples: &[(String, Vec<f64>)],
    cfg: &RankConfig,
) -> Result<Vec<Ranked>, RankError> {
    if samples.len() < 2 {
        return Err(RankError::TooFewTreatments(samples.len()));
    }
    let mut seen = std::collections::HashSet::new();
    for (name, xs) in samples {
        if !seen.insert(name.as_str()) {
            return Err(RankError::DuplicateName(name.clone()));
        }
        if xs.len() < 2 {
            return Err(RankError::SampleTooSmall(name.clone()));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(RankError::NonFinite(name.clone()));
        }
    }
    let mut ts: Vec<Treatment<'_>> = samples
        .iter()
        .map(|(name, xs)| Treatment {
            name,
            xs,
            mean: mean(xs),
        })
        .collect();
    ts.sort_by(|a, b| {
        b.mean
            .partial_cmp(&a.mean)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.name.cmp(b.name))
    });

    let total: usize = ts.iter().map(|t| t.xs.len()).sum();
    let k = ts.len();
    let ss_within: f64 = ts
        .iter()
        .map(|t| t.xs.iter().map(|x| (x - t.mean).powi(2)).sum::<f64>())
        .sum();
    let df_error = (total - k) as f64;
    let ctx = Context {
        mse: ss_within / df_error,
        df_error,
        r: k as f64 / ts.iter().map(|t| 1.0 / t.xs.len() as f64).sum::<f64>(),
        cfg: *cfg,
    };
    let mut sizes = Vec::new();
    partition(&ts, &ctx, &mut sizes);

    let mut out = Vec::with_capacity(k);
    let mut it = ts.iter();
    for (g, size) in sizes.into_iter().enumerate() {
        for t in it.by_ref().take(size) {
            out.push(Ranked {
                name: t.name.to_string(),
                mean: t.mean,
                std: std_dev(t.xs),
                n: t.xs.len(),
                rank: g + 1,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn around(m: f64, s: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| if i % 2 == 0 { m - s } else { m + s }).collect()
    }

    fn ranks(r: &[Ranked]) -> Vec<(String, usize)> {
        let mut v: Vec<_> = r.iter().map(|x| (x.name.clone(), x.rank)).collect();
        v.sort();
        v
    }

    #[test]
    fn identical_samples_form_one_group() {
        let s = vec![("A".into(), vec![0.5; 30]), ("B".into(), vec![0.5; 30])];
        let r = scott_knott_esd(&s, &RankConfig::default()).unwrap();
        assert!(r.iter().all(|x| x.rank == 1));
    }

    #[test]
    fn separated_constant_samples_split() {
        let s = vec![("B".into(), vec![0.1; 30]), ("A".into(), vec![0.9; 30])];
        let r = scott_knott_esd(&s, &RankConfig::default()).unwrap();
        assert_eq!(ranks(&r), vec![("A".into(), 1), ("B".into(), 2)]);
        assert_eq!(r[0].name, "A");
    }

    #[test]
    fn close_pair_merges_far_one_splits() {
        let s = vec![
            ("A".into(), around(0.9, 0.05, 30)),
            ("B".into(), around(0.88, 0.05, 30)),
            ("C".into(), around(0.1, 0.05, 30)),
        ];
        let r = scott_knott_esd(&s, &RankConfig::default()).unwrap();
        assert_eq!(
            ranks(&r),
            vec![("A".into(), 1), ("B".into(), 1), ("C".into(), 2)]
        );
    }

    #[test]
    fn kruskal_variant_splits_far_groups_only() {
        let s = vec![
            ("A".into(), vec![0.9, 0.7, 0.8, 0.6, 0.85]),
            ("B".into(), vec![0.88, 0.75, 0.65, 0.8, 0.7]),
            ("C".into(), vec![0.1, 0.2, 0.05, 0.15, 0.0]),
        ];
        let cfg = RankConfig {
            test: SplitTest::Kruskal,
            ..RankConfig::default()
        };
        let r = scott_knott_esd(&s, &cfg).unwrap();
        assert_eq!(
            ranks(&r),
            vec![("A".into(), 1), ("B".into(), 1), ("C".into(), 2)]
        );
    }

    #[test]
    fn effect_threshold_blocks_tiny_differences() {
        // highly significant with many observations, but d is about 0.1
        let a: Vec<f64> = (0..2000).map(|i| (i % 100) as f64 / 100.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.03).collect();
        let s = vec![("A".into(), a), ("B".into(), b)];
        let r = scott_knott_esd(&s, &RankConfig::default()).unwrap();
        assert!(r.iter().all(|x| x.rank == 1));
        let loose = RankConfig {
            effect_threshold: 0.05,
            ..RankConfig::default()
        };
        let r = scott_knott_esd(&s, &loose).unwrap();
        assert_eq!(r[0].name, "B");
        assert_eq!(r[1].rank, 2);
    }

    #[test]
    fn cohens_d_values() {
        assert_eq!(cohens_d(&[1.0, 1.0], &[1.0, 1.0]), 0.0);
        assert_eq!(cohens_d(&[1.0, 1.0], &[2.0, 2.0]), f64::INFINITY);
        // means 2 and 4, both sd 1
        assert!((cohens_d(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kruskal_matches_reference() {
        // scipy.stats.kruskal([1,2,3,4,5],[6,7,8,9,10]) -> H = 6.818..., p = 0.009023
        let p = kruskal_wallis(&[&[1.0, 2.0, 3.0, 4.0, 5.0], &[6.0, 7.0, 8.0, 9.0, 10.0]]);
        assert!((p - 0.009023438818080334).abs() < 1e-9, "{p}");
        assert_eq!(kruskal_wallis(&[&[1.0, 1.0], &[1.0, 1.0]]), 1.0);
    }

    #[test]
    fn input_errors() {
        let cfg = RankConfig::default();
        assert_eq!(
            scott_knott_esd(&[("A".into(), vec![1.0, 2.0])], &cfg),
            Err(RankError::TooFewTreatments(1))
        );
        let s = vec![("A".into(), vec![1.0]), ("B".into(), vec![1.0, 2.0])];
        assert_eq!(scott_knott_esd(&s, &cfg), Err(RankError::SampleTooSmall("A".into())));
        let s = vec![("A".into(), vec![1.0, 2.0]), ("A".into(), vec![1.0, 2.0])];
        assert!(matches!(scott_knott_esd(&s, &cfg), Err(RankError::DuplicateName(_))));
    }

    #[test]
    fn split_test_parses() {
        assert_eq!("kruskal".parse::<SplitTest>().unwrap(), SplitTest::Kruskal);
        assert_eq!("sk".parse::<SplitTest>().unwrap(), SplitTest::ScottKnott);
        assert!("t".parse::<SplitTest>().is_err());
    }
}
