//! Finite configuration spaces and the measurement oracles over them.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::requirement::Proposition;
use crate::scalar::Scalar;

/// Name of the performance column written by [`Landscape::write_csv`].
pub const PERFORMANCE_COLUMN: &str = "performance";

/// Default upper bound on the number of configurations a synthetic landscape may enumerate.
pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum LandscapeError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv error at row {row}: {source}")]
    Csv {
        row: usize,
        #[source]
        source: csv::Error,
    },
    #[error("empty dataset: {0}")]
    Empty(String),
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: cannot parse performance value {value:?}")]
    Performance { row: usize, value: String },
    #[error("row {row}: duplicate configuration")]
    DuplicateConfiguration { row: usize },
    #[error("configuration {0} is not part of the landscape")]
    UnknownConfiguration(Configuration),
    #[error("configuration {0} does not fit the option space")]
    InvalidConfiguration(Configuration),
    #[error("budget of {cap} measurements exhausted")]
    BudgetExhausted { cap: usize },
    #[error("configuration space of {size} exceeds the enumeration cap {cap}")]
    SpaceTooLarge { size: u128, cap: usize },
    #[error("invalid synthetic landscape spec: {0}")]
    InvalidSynth(String),
}

/// A value an option can take.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Number(f64),
    Text(String),
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Number(x) => write!(f, "{x}"),
            Level::Text(s) => write!(f, "{s}"),
        }
    }
}

/// One tunable option and its ordered finite domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub name: String,
    pub domain: Vec<Level>,
}

impl OptionSpec {
    pub fn numeric(name: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Self {
        OptionSpec {
            name: name.into(),
            domain: values.into_iter().map(Level::Number).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }
}

/// Domain indices, one per option in space order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration(pub Vec<u32>);

impl Configuration {
    pub fn genes(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl From<Vec<u32>> for Configuration {
    fn from(v: Vec<u32>) -> Self {
        Configuration(v)
    }
}

/// Cross-product of option domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Space {
    pub options: Vec<OptionSpec>,
}

impl Space {
    pub fn new(options: Vec<OptionSpec>) -> Self {
        Space { options }
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.options.iter().map(OptionSpec::size).collect()
    }

    pub fn size(&self) -> u128 {
        self.options
            .iter()
            .map(|o| o.size() as u128)
            .fold(1u128, |acc, s| acc.saturating_mul(s))
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        c.len() == self.options.len()
            && c.0
                .iter()
                .zip(&self.options)
                .all(|(&g, o)| (g as usize) < o.size())
    }

    /// All configurations in mixed-radix order, last option fastest.
    pub fn enumerate(&self) -> Vec<Configuration> {
        let sizes = self.domain_sizes();
        let total = self.size() as usize;
        let mut out = Vec::with_capacity(total);
        let mut cur = vec![0u32; sizes.len()];
        for _ in 0..total {
            out.push(Configuration(cur.clone()));
            for i in (0..sizes.len()).rev() {
                cur[i] += 1;
                if (cur[i] as usize) < sizes[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
        out
    }
}

/// Shape of a synthetic landscape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// NK-style random epistatic interactions.
    Rugged,
    /// Independent per-option contributions.
    Additive,
    /// Additive values capped at their median, so at least half the space ties.
    Plateau,
}

impl FromStr for Shape {
    type Err = LandscapeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rugged" => Ok(Shape::Rugged),
            "additive" => Ok(Shape::Additive),
            "plateau" => Ok(Shape::Plateau),
            other => Err(LandscapeError::InvalidSynth(format!("unknown shape {other:?}"))),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Shape::Rugged => "rugged",
            Shape::Additive => "additive",
            Shape::Plateau => "plateau",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    /// One entry per option; every size must be at least 1.
    pub domain_sizes: Vec<usize>,
    pub shape: Shape,
    #[serde(default = "default_cap")]
    pub enumeration_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_ENUMERATION_CAP
}

impl SynthSpec {
    /// `n_options` binary options.
    pub fn binary(seed: u64, n_options: usize, shape: Shape) -> Self {
        SynthSpec {
            seed,
            domain_sizes: vec![2; n_options],
            shape,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn with_domain_sizes(mut self, sizes: Vec<usize>) -> Self {
        self.domain_sizes = sizes;
        self
    }
}

/// Options for [`Landscape::load_csv`].
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// The metric is maximized; values are negated on ingestion.
    pub maximize: bool,
}

/// A measurement oracle over a finite configuration space.
#[derive(Clone, Debug)]
pub struct Landscape<T> {
    space: Space,
    rows: Vec<(Configuration, T)>,
    index: HashMap<Configuration, usize>,
    v_min: T,
    v_max: T,
}

impl<T: Scalar> PartialEq for Landscape<T> {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.rows == other.rows
    }
}

impl<T: Scalar> Landscape<T> {
    /// Builds from measured rows; bounds come from the observed extremes.
    pub fn new(space: Space, rows: Vec<(Configuration, T)>) -> Result<Self, LandscapeError> {
        if rows.is_empty() {
            return Err(LandscapeError::Empty("no measured configurations".into()));
        }
        let mut index = HashMap::with_capacity(rows.len());
        for (i, (c, v)) in rows.iter().enumerate() {
            if !space.contains(c) {
                return Err(LandscapeError::InvalidConfiguration(c.clone()));
            }
            if !v.is_finite() {
                return Err(LandscapeError::Performance {
                    row: i + 1,
                    value: v.to_string(),
                });
            }
            if index.insert(c.clone(), i).is_some() {
                return Err(LandscapeError::DuplicateConfiguration { row: i + 1 });
            }
        }
        let (lo, hi) = rows.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), (_, v)| {
            (lo.min(*v), hi.max(*v))
        });
        Ok(Landscape {
            space,
            rows,
            index,
            v_min: lo,
            v_max: hi,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn rows(&self) -> &[(Configuration, T)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Smallest observed performance value.
    pub fn v_min(&self) -> T {
        self.v_min
    }

    /// Largest observed performance value.
    pub fn v_max(&self) -> T {
        self.v_max
    }

    /// Bounds usable for a proposition; a constant landscape is widened by one unit.
    pub fn proposition_bounds(&self) -> (T, T) {
        if self.v_max > self.v_min {
            (self.v_min, self.v_max)
        } else {
            (self.v_min, self.v_min + T::one())
        }
    }

    /// Every configuration of the space has a measurement.
    pub fn is_exhaustive(&self) -> bool {
        self.rows.len() as u128 == self.space.size()
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        self.index.contains_key(c)
    }

    /// Oracle lookup that bypasses any budget.
    pub fn lookup(&self, c: &Configuration) -> Result<T, LandscapeError> {
        self.index
            .get(c)
            .map(|&i| self.rows[i].1)
            .ok_or_else(|| LandscapeError::UnknownConfiguration(c.clone()))
    }

    pub fn performance_values(&self) -> impl Iterator<Item = T> + '_ {
        self.rows.iter().map(|(_, v)| *v)
    }

    /// Fraction of configurations that `prop` satisfies at least partially.
    /// Reads the whole table without spending budget.
    pub fn satisfiability_fraction(&self, prop: &Proposition<T>) -> f64 {
        let hits = self
            .rows
            .iter()
            .filter(|(_, v)| prop.evaluate(*v) > T::zero())
            .count();
        hits as f64 / self.rows.len() as f64
    }

    /// `n` distinct measured configurations drawn uniformly (fewer if the table is smaller).
    pub fn sample_distinct<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Configuration> {
        let n = n.min(self.rows.len());
        sample(rng, self.rows.len(), n)
            .into_iter()
            .map(|i| self.rows[i].0.clone())
            .collect()
    }

    pub fn load_csv(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Self, LandscapeError> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file, opts)
    }

    /// Header row, option columns, then the performance column.
    pub fn from_csv_reader<R: Read>(reader: R, opts: LoadOptions) -> Result<Self, LandscapeError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|source| LandscapeError::Csv { row: 0, source })?
            .clone();
        if headers.len() < 2 {
            return Err(LandscapeError::Empty(
                "need at least one option column and a performance column".into(),
            ));
        }
        let n_opts = headers.len() - 1;
        let mut cells: Vec<Vec<String>> = Vec::new();
        let mut perf: Vec<T> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|source| LandscapeError::Csv { row, source })?;
            if rec.len() != headers.len() {
                return Err(LandscapeError::ColumnCount {
                    row,
                    expected: headers.len(),
                    found: rec.len(),
                });
            }
            let raw = &rec[n_opts];
            let v: T = raw
                .parse()
                .ok()
                .filter(|v: &T| v.is_finite())
                .ok_or_else(|| LandscapeError::Performance {
                    row,
                    value: raw.to_string(),
                })?;
            perf.push(if opts.maximize { -v } else { v });
            cells.push(rec.iter().take(n_opts).map(str::to_string).collect());
        }
        if cells.is_empty() {
            return Err(LandscapeError::Empty("no data rows".into()));
        }

        let mut options = Vec::with_capacity(n_opts);
        let mut columns: Vec<HashMap<String, u32>> = Vec::with_capacity(n_opts);
        for j in 0..n_opts {
            let raw: Vec<&str> = cells.iter().map(|r| r[j].as_str()).collect();
            let numeric: Option<Vec<f64>> = raw.iter().map(|s| s.parse::<f64>().ok()).collect();
            let (domain, lookup) = match numeric {
                Some(mut nums) if nums.iter().all(|x| x.is_finite()) => {
                    nums.sort_by(f64::total_cmp);
                    nums.dedup();
                    let lookup = raw
                        .iter()
                        .map(|s| {
                            let x: f64 = s.parse().expect("checked numeric");
                            let idx = nums.partition_point(|y| *y < x) as u32;
                            (s.to_string(), idx)
                        })
                        .collect::<HashMap<_, _>>();
                    (nums.into_iter().map(Level::Number).collect(), lookup)
                }
                _ => {
                    let mut texts: Vec<String> = raw.iter().map(|s| s.to_string()).collect();
                    texts.sort();
                    texts.dedup();
                    let lookup = texts
                        .iter()
                        .enumerate()
                        .map(|(i, s)| (s.clone(), i as u32))
                        .collect::<HashMap<_, _>>();
                    (texts.into_iter().map(Level::Text).collect::<Vec<_>>(), lookup)
                }
            };
            options.push(OptionSpec {
                name: headers[j].to_string(),
                domain,
            });
            columns.push(lookup);
        }

        let mut seen = HashSet::with_capacity(cells.len());
        let mut rows = Vec::with_capacity(cells.len());
        for (i, (r, v)) in cells.iter().zip(perf).enumerate() {
            let c = Configuration(r.iter().enumerate().map(|(j, s)| columns[j][s]).collect());
            if !seen.insert(c.clone()) {
                return Err(LandscapeError::DuplicateConfiguration { row: i + 1 });
            }
            rows.push((c, v));
        }
        Self::new(Space::new(options), rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), LandscapeError> {
        let file = std::fs::File::create(path.as_ref())?;
        self.to_csv_writer(file)
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<(), LandscapeError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.space.options.iter().map(|o| o.name.as_str()).collect();
        header.push(PERFORMANCE_COLUMN);
        let wrap = |source| LandscapeError::Csv { row: 0, source };
        w.write_record(&header).map_err(wrap)?;
        for (i, (c, v)) in self.rows.iter().enumerate() {
            let mut rec: Vec<String> = c
                .0
                .iter()
                .zip(&self.space.options)
                .map(|(&g, o)| o.domain[g as usize].to_string())
                .collect();
            rec.push(v.to_string());
            w.write_record(&rec)
                .map_err(|source| LandscapeError::Csv { row: i + 1, source })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Deterministic synthetic landscape, fully enumerated.
    pub fn synth(spec: &SynthSpec) -> Result<Self, LandscapeError> {
        if spec.domain_sizes.is_empty() {
            return Err(LandscapeError::InvalidSynth("no options".into()));
        }
        if spec.domain_sizes.contains(&0) {
            return Err(LandscapeError::InvalidSynth("empty option domain".into()));
        }
        let options: Vec<OptionSpec> = spec
            .domain_sizes
            .iter()
            .enumerate()
            .map(|(i, &d)| OptionSpec::numeric(format!("o{i}"), (0..d).map(|x| x as f64)))
            .collect();
        let space = Space::new(options);
        let size = space.size();
        if size > spec.enumeration_cap as u128 {
            return Err(LandscapeError::SpaceTooLarge {
                size,
                cap: spec.enumeration_cap,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let configs = space.enumerate();
        let values: Vec<f64> = match spec.shape {
            Shape::Additive => {
                let terms = additive_terms(&spec.domain_sizes, &mut rng);
                configs.iter().map(|c| additive_value(&terms, c)).collect()
            }
            Shape::Plateau => {
                let terms = additive_terms(&spec.domain_sizes, &mut rng);
                let raw: Vec<f64> = configs.iter().map(|c| additive_value(&terms, c)).collect();
                let mut sorted = raw.clone();
                sorted.sort_by(f64::total_cmp);
                let cap = sorted[sorted.len() / 2];
                raw.into_iter().map(|v| v.min(cap)).collect()
            }
            Shape::Rugged => {
                let model = NkModel::random(&spec.domain_sizes, &mut rng);
                configs.iter().map(|c| model.value(c)).collect()
            }
        };
        let rows = configs
            .into_iter()
            .zip(values)
            .map(|(c, v)| (c, T::lit(v)))
            .collect();
        Self::new(space, rows)
    }
}

fn additive_terms(sizes: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    sizes
        .iter()
        .map(|&d| (0..d).map(|_| rng.gen_range(0.0..10.0)).collect())
        .collect()
}

fn additive_value(terms: &[Vec<f64>], c: &Configuration) -> f64 {
    1.0 + c
        .0
        .iter()
        .zip(terms)
        .map(|(&g, t)| t[g as usize])
        .sum::<f64>()
}

/// Each option's contribution depends on its own level and up to two random neighbours.
struct NkModel {
    neighbours: Vec<Vec<usize>>,
    sizes: Vec<usize>,
    tables: Vec<Vec<f64>>,
}

impl NkModel {
    fn random(sizes: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let n = sizes.len();
        let k = 2.min(n.saturating_sub(1));
        let mut neighbours = Vec::with_capacity(n);
        let mut tables = Vec::with_capacity(n);
        for i in 0..n {
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let nb: Vec<usize> = sample(rng, others.len(), k)
                .into_iter()
                .map(|x| others[x])
                .collect();
            let entries = sizes[i] * nb.iter().map(|&j| sizes[j]).product::<usize>();
            tables.push((0..entries).map(|_| rng.gen::<f64>()).collect());
            neighbours.push(nb);
        }
        NkModel {
            neighbours,
            sizes: sizes.to_vec(),
            tables,
        }
    }

    fn value(&self, c: &Configuration) -> f64 {
        let g = c.genes();
        let total: f64 = (0..self.sizes.len())
            .map(|i| {
                let mut idx = g[i] as usize;
                for &j in &self.neighbours[i] {
                    idx = idx * self.sizes[j] + g[j] as usize;
                }
                self.tables[i][idx]
            })
            .sum();
        1.0 + 10.0 * total / self.sizes.len() as f64
    }
}

/// Counts distinct measurements against a cap and caches their results.
#[derive(Clone, Debug)]
pub struct BudgetMeter<T> {
    cap: usize,
    consumed: usize,
    cache: HashMap<Configuration, T>,
    log: Vec<Configuration>,
    recount_cached: bool,
}

impl<T: Scalar> BudgetMeter<T> {
    pub fn new(cap: usize) -> Self {
        BudgetMeter {
            cap,
            consumed: 0,
            cache: HashMap::new(),
            log: Vec::new(),
            recount_cached: false,
        }
    }

    /// Charge cached re-measurements as well.
    pub fn recounting_cached(mut self, on: bool) -> Self {
        self.recount_cached = on;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn remaining(&self) -> usize {
        self.cap - self.consumed
    }

    pub fn is_cached(&self, c: &Configuration) -> bool {
        self.cache.contains_key(c)
    }

    /// Distinct configurations measured so far.
    pub fn distinct_measured(&self) -> usize {
        self.cache.len()
    }

    /// First-time measurements in order.
    pub fn history(&self) -> &[Configuration] {
        &self.log
    }

    pub fn measure(
        &mut self,
        landscape: &Landscape<T>,
        c: &Configuration,
    ) -> Result<T, LandscapeError> {
        if let Some(&v) = self.cache.get(c) {
            if self.recount_cached {
                if self.consumed >= self.cap {
                    return Err(LandscapeError::BudgetExhausted { cap: self.cap });
                }
                self.consumed += 1;
            }
            return Ok(v);
        }
        if self.consumed >= self.cap {
            return Err(LandscapeError::BudgetExhausted { cap: self.cap });
        }
        let v = landscape.lookup(c)?;
        self.consumed += 1;
        self.cache.insert(c.clone(), v);
        self.log.push(c.clone());
        Ok(v)
    }
}
