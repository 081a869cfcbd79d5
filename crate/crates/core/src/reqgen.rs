//! Synthetic target requirements at controlled satisfiability levels.
//!
//! A generated proposition has `fragment_count - 1` decreasing S/E fragments
//! followed by an E fragment at score 0. Scaling every boundary toward the
//! lower bound by a factor `λ` makes the requirement stricter, so the
//! satisfiable fraction is monotone in `λ` and can be found by bisection.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landscape::Landscape;
use crate::requirement::{Fragment, FragmentKind, Proposition};
use crate::scalar::Scalar;

pub const DEFAULT_D_LEVELS: [f64; 6] = [0.001, 0.01, 0.05, 0.2, 0.5, 0.9];
/// Satisfiability evaluations allowed per generated proposition.
pub const ORACLE_QUERY_CAP: usize = 10_000;
/// The zero region may start this far (relative to the observed span) past the
/// largest observed value, so that full satisfiability is representable.
pub const DOMAIN_MARGIN: f64 = 0.25;
const MIN_BOUNDARY_GAP: f64 = 1e-3;
const BISECTION_STEPS: usize = 64;

#[derive(Debug, Error)]
pub enum ReqGenError {
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
    #[error("could not reach satisfiability {d} (type {type_index}) within tolerance after {queries} queries; closest was {closest}")]
    Calibration {
        type_index: usize,
        d: f64,
        closest: f64,
        queries: usize,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenSpec {
    pub fragment_count: usize,
    pub d_levels: Vec<f64>,
    /// Independent requirement types per level.
    pub replicates: usize,
    /// Relative tolerance on the achieved fraction; never tighter than one configuration.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            fragment_count: 5,
            d_levels: DEFAULT_D_LEVELS.to_vec(),
            replicates: 3,
            tolerance: 0.1,
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), ReqGenError> {
        if self.fragment_count < 2 {
            return Err(ReqGenError::InvalidSpec("fragment_count must be at least 2".into()));
        }
        if let Some(d) = self.d_levels.iter().find(|d| !(**d > 0.0 && **d <= 1.0)) {
            return Err(ReqGenError::InvalidSpec(format!("d level {d} is outside (0, 1]")));
        }
        if !(self.tolerance > 0.0) {
            return Err(ReqGenError::InvalidSpec("tolerance must be positive".into()));
        }
        if self.replicates == 0 {
            return Err(ReqGenError::InvalidSpec("replicates must be positive".into()));
        }
        Ok(())
    }

    /// Allowed absolute deviation from `d` on a table of `n_configs` rows.
    pub fn tolerance_for(&self, d: f64, n_configs: usize) -> f64 {
        (self.tolerance * d).max(1.0 / n_configs as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedTarget<T> {
    pub proposition: Proposition<T>,
    pub type_index: usize,
    pub d_requested: f64,
    pub d_achieved: f64,
    pub tolerance: f64,
    pub queries: usize,
}

#[derive(Serialize)]
struct Meta {
    type_index: usize,
    d_requested: f64,
    d_achieved: f64,
    tolerance: f64,
    queries: usize,
}

impl<T: Scalar> GeneratedTarget<T> {
    /// Proposition JSON with an extra `meta` object; it still loads with
    /// [`Proposition::from_json`].
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(&self.proposition).expect("proposition serializes");
        let meta = Meta {
            type_index: self.type_index,
            d_requested: self.d_requested,
            d_achieved: self.d_achieved,
            tolerance: self.tolerance,
            queries: self.queries,
        };
        v["meta"] = serde_json::to_value(meta).expect("meta serializes");
        serde_json::to_string_pretty(&v).expect("json value serializes")
    }
}

/// Boundary positions as fractions of the domain, plus per-fragment scores.
#[derive(Clone, Debug)]
struct Skeleton {
    cuts: Vec<f64>,
    fragments: Vec<(FragmentKind, f64, f64)>,
}

fn draw_skeleton<R: Rng + ?Sized>(fragment_count: usize, rng: &mut R) -> Skeleton {
    let live = fragment_count - 1;
    let cuts = loop {
        let mut c: Vec<f64> = (0..live).map(|_| rng.gen_range(0.0..1.0)).collect();
        c.sort_by(f64::total_cmp);
        let ok = c[0] >= MIN_BOUNDARY_GAP
            && c.windows(2).all(|w| w[1] - w[0] >= MIN_BOUNDARY_GAP)
            && 1.0 - c[live - 1] >= MIN_BOUNDARY_GAP;
        if ok {
            break c;
        }
    };
    let mut q: Vec<f64> = (0..2 * live).map(|_| rng.gen_range(f64::EPSILON..1.0)).collect();
    q.sort_by(|a, b| b.total_cmp(a));
    q[0] = 1.0;
    let fragments = q
        .chunks(2)
        .map(|pair| {
            let (hi, lo) = (pair[0], pair[1]);
            if rng.gen_bool(0.5) && hi > lo {
                (FragmentKind::S, hi, lo)
            } else {
                (FragmentKind::E, hi, hi)
            }
        })
        .collect();
    Skeleton { cuts, fragments }
}

fn build<T: Scalar>(sk: &Skeleton, lo: f64, hi: f64, lambda: f64) -> Option<Proposition<T>> {
    let mut edges = vec![T::lit(lo)];
    edges.extend(sk.cuts.iter().map(|u| T::lit(lo + u * (hi - lo) * lambda)));
    edges.push(T::lit(hi));
    let mut frags: Vec<Fragment<T>> = sk
        .fragments
        .iter()
        .enumerate()
        .map(|(i, &(kind, s_lo, s_hi))| {
            Fragment::new(kind, edges[i], edges[i + 1], T::lit(s_lo), T::lit(s_hi))
        })
        .collect();
    let last = edges.len() - 1;
    frags.push(Fragment::constant(edges[last - 1], edges[last], T::zero()));
    Proposition::new(T::lit(lo), T::lit(hi), frags).ok()
}

/// Generation domain: observed bounds with room for a zero region past the maximum.
fn domain<T: Scalar>(landscape: &Landscape<T>) -> (f64, f64) {
    let (lo, hi) = landscape.proposition_bounds();
    let (lo, hi) = (lo.as_f64(), hi.as_f64());
    (lo, hi + DOMAIN_MARGIN * (hi - lo))
}

struct Oracle<'a, T> {
    landscape: &'a Landscape<T>,
    queries: usize,
    cap: usize,
    closest: f64,
    d: f64,
}

impl<'a, T: Scalar> Oracle<'a, T> {
    fn fraction(&mut self, p: &Proposition<T>) -> Option<f64> {
        if self.queries >= self.cap {
            return None;
        }
        self.queries += 1;
        let f = self.landscape.satisfiability_fraction(p);
        if (f - self.d).abs() < (self.closest - self.d).abs() {
            self.closest = f;
        }
        Some(f)
    }
}

/// Bisection on the compression factor for one skeleton.
fn calibrate<T: Scalar>(
    sk: &Skeleton,
    (lo, hi): (f64, f64),
    tol: f64,
    oracle: &mut Oracle<'_, T>,
) -> Option<(Proposition<T>, f64)> {
    let d = oracle.d;
    let mut l_hi = (1.0 / sk.cuts[sk.cuts.len() - 1]) * (1.0 - 1e-9);
    let mut l_lo = 0.0;
    let top = build::<T>(sk, lo, hi, l_hi)?;
    let f_top = oracle.fraction(&top)?;
    if (f_top - d).abs() <= tol {
        return Some((top, f_top));
    }
    if f_top < d {
        return None;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (l_lo + l_hi);
        let Some(p) = build::<T>(sk, lo, hi, mid) else {
            l_lo = mid;
            continue;
        };
        let f = oracle.fraction(&p)?;
        if (f - d).abs() <= tol {
            return Some((p, f));
        }
        if f < d {
            l_lo = mid;
        } else {
            l_hi = mid;
        }
    }
    None
}

fn calibrate_with_redraws<T: Scalar, R: Rng + ?Sized>(
    landscape: &Landscape<T>,
    d: f64,
    type_index: usize,
    first: Option<&Skeleton>,
    spec: &GenSpec,
    rng: &mut R,
) -> Result<GeneratedTarget<T>, ReqGenError> {
    let dom = domain(landscape);
    let tol = spec.tolerance_for(d, landscape.len());
    let mut oracle = Oracle {
        landscape,
        queries: 0,
        cap: ORACLE_QUERY_CAP,
        closest: f64::NAN,
        d,
    };
    let mut sk = first.cloned().unwrap_or_else(|| draw_skeleton(spec.fragment_count, rng));
    while oracle.queries < oracle.cap {
        if let Some((proposition, d_achieved)) = calibrate(&sk, dom, tol, &mut oracle) {
            if proposition.effective_fragment_count() == spec.fragment_count && d_achieved > 0.0 {
                return Ok(GeneratedTarget {
                    proposition,
                    type_index,
                    d_requested: d,
                    d_achieved,
                    tolerance: tol,
                    queries: oracle.queries,
                });
            }
        }
        sk = draw_skeleton(spec.fragment_count, rng);
    }
    Err(ReqGenError::Calibration {
        type_index,
        d,
        closest: oracle.closest,
        queries: oracle.queries,
    })
}

/// One random proposition whose satisfiable fraction on `landscape` is within
/// tolerance of `d`.
pub fn generate_target<T: Scalar, R: Rng + ?Sized>(
    landscape: &Landscape<T>,
    d: f64,
    spec: &GenSpec,
    rng: &mut R,
) -> Result<GeneratedTarget<T>, ReqGenError> {
    let spec = GenSpec {
        d_levels: vec![d],
        ..spec.clone()
    };
    spec.validate()?;
    calibrate_with_redraws(landscape, d, 0, None, &spec, rng)
}

/// `replicates × d_levels` requirements. Each type shares one skeleton across
/// its levels, so achieved fractions follow the requested order. Failures are
/// reported per cell.
pub fn generate_suite<T: Scalar>(
    landscape: &Landscape<T>,
    spec: &GenSpec,
) -> Result<Vec<Result<GeneratedTarget<T>, ReqGenError>>, ReqGenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.replicates * spec.d_levels.len());
    for type_index in 1..=spec.replicates {
        let sk = draw_skeleton(spec.fragment_count, &mut rng);
        for &d in &spec.d_levels {
            out.push(calibrate_with_redraws(landscape, d, type_index, Some(&sk), spec, &mut rng));
        }
    }
    Ok(out)
}

/// File stem for a generated requirement, e.g. `t2_d0.05`.
pub fn requirement_stem(type_index: usize, d: f64) -> String {
    format!("t{type_index}_d{d}")
}

pub const MANIFEST_HEADER: &str = "landscape,type_index,d_requested,d_achieved,file";

/// Writes one JSON file per generated cell and `manifest.csv`. Failed cells get
/// a manifest row with empty `d_achieved` and `file`.
pub fn write_suite<T: Scalar>(
    dir: impl AsRef<Path>,
    landscape_name: &str,
    d_levels: &[f64],
    replicates: usize,
    suite: &[Result<GeneratedTarget<T>, ReqGenError>],
) -> Result<PathBuf, ReqGenError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    let cells = (1..=replicates).flat_map(|t| d_levels.iter().map(move |&d| (t, d)));
    for ((type_index, d), cell) in cells.zip(suite) {
        match cell {
            Ok(g) => {
                let file = format!("{}.json", requirement_stem(type_index, d));
                fs::write(dir.join(&file), g.to_json())?;
                manifest.push_str(&format!(
                    "{landscape_name},{type_index},{d},{},{file}\n",
                    g.d_achieved
                ));
            }
            Err(_) => manifest.push_str(&format!("{landscape_name},{type_index},{d},,\n")),
        }
    }
    let path = dir.join("manifest.csv");
    fs::write(&path, manifest)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{Configuration, OptionSpec, Shape, Space, SynthSpec};

    /// 64 configurations with performance 0..63, evenly spread.
    fn uniform64() -> Landscape<f64> {
        let space = Space::new(vec![OptionSpec::numeric("x", (0..64).map(f64::from))]);
        let rows = (0..64u32).map(|i| (Configuration(vec![i]), f64::from(i))).collect();
        Landscape::new(space, rows).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GenSpec::default().validate().is_ok());
        let bad = |f: fn(&mut GenSpec)| {
            let mut s = GenSpec::default();
            f(&mut s);
            s.validate().is_err()
        };
        assert!(bad(|s| s.d_levels = vec![0.0]));
        assert!(bad(|s| s.d_levels = vec![1.5]));
        assert!(bad(|s| s.tolerance = 0.0));
        assert!(bad(|s| s.fragment_count = 1));
    }

    #[test]
    fn tolerance_has_one_config_floor() {
        let s = GenSpec::default();
        assert_eq!(s.tolerance_for(0.5, 64), 0.05);
        assert_eq!(s.tolerance_for(0.001, 64), 1.0 / 64.0);
    }

    #[test]
    fn half_satisfiable_on_uniform_table() {
        let l = uniform64();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = generate_target(&l, 0.5, &GenSpec::default(), &mut rng).unwrap();
        let brute = l.performance_values().filter(|&v| g.proposition.evaluate(v) > 0.0).count();
        assert_eq!(g.d_achieved, brute as f64 / 64.0);
        assert!((0.45..=0.55).contains(&g.d_achieved), "{}", g.d_achieved);
        assert!(g.proposition.validate().is_empty());
        assert_eq!(g.proposition.effective_fragment_count(), 5);
        assert_eq!(g.proposition.len(), 5);
    }

    #[test]
    fn full_satisfiability_pushes_zero_region_past_all_values() {
        let l = uniform64();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = generate_target(&l, 1.0, &GenSpec::default(), &mut rng).unwrap();
        assert_eq!(g.d_achieved, 1.0);
        let zero_start = g.proposition.fragments().last().unwrap().v_lo;
        assert!(zero_start > l.v_max());
    }

    #[test]
    fn replicates_differ() {
        let l = uniform64();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = GenSpec::default();
        let ps: Vec<_> = (0..3)
            .map(|_| generate_target(&l, 0.2, &spec, &mut rng).unwrap().proposition)
            .collect();
        assert_ne!(ps[0], ps[1]);
        assert_ne!(ps[1], ps[2]);
        assert_ne!(ps[0], ps[2]);
    }

    #[test]
    fn suite_is_full_monotone_and_deterministic() {
        let l = Landscape::<f64>::synth(&SynthSpec::binary(2, 10, Shape::Rugged)).unwrap();
        let spec = GenSpec {
            seed: 11,
            ..GenSpec::default()
        };
        let suite = generate_suite(&l, &spec).unwrap();
        assert_eq!(suite.len(), 18);
        let ok: Vec<_> = suite.iter().map(|r| r.as_ref().unwrap()).collect();
        for g in &ok {
            assert!(g.proposition.validate().is_empty());
            assert!((g.d_achieved - g.d_requested).abs() <= g.tolerance);
        }
        for t in ok.chunks(6) {
            assert!(t.windows(2).all(|w| w[0].d_achieved <= w[1].d_achieved));
        }
        let again = generate_suite(&l, &spec).unwrap();
        let same = suite
            .iter()
            .zip(&again)
            .all(|(a, b)| a.as_ref().unwrap() == b.as_ref().unwrap());
        assert!(same);
    }

    #[test]
    fn unreachable_level_fails_calibration() {
        // every configuration ties, so only 0% or 100% is achievable
        let space = Space::new(vec![OptionSpec::numeric("x", [0.0, 1.0, 2.0, 3.0])]);
        let rows = (0..4u32).map(|i| (Configuration(vec![i]), 5.0)).collect();
        let l = Landscape::new(space, rows).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = generate_target(&l, 0.5, &GenSpec::default(), &mut rng).unwrap_err();
        assert!(matches!(err, ReqGenError::Calibration { queries, .. } if queries == ORACLE_QUERY_CAP));
    }

    #[test]
    fn written_suite_round_trips() {
        let l = uniform64();
        let spec = GenSpec {
            d_levels: vec![0.1, 0.5],
            replicates: 1,
            ..GenSpec::default()
        };
        let suite = generate_suite(&l, &spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_suite(dir.path(), "u64", &spec.d_levels, 1, &suite).unwrap();
        let text = fs::read_to_string(manifest).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(MANIFEST_HEADER));
        let json = fs::read_to_string(dir.path().join("t1_d0.5.json")).unwrap();
        let p = Proposition::<f64>::from_json(&json).unwrap();
        assert_eq!(&p, &suite[1].as_ref().unwrap().proposition);
        assert!(json.contains("d_achieved"));
    }
}
