//! Genetic-algorithm operators over configurations.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landscape::Configuration;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum GaError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("parents have different lengths ({0} vs {1})")]
    MismatchedParents(usize, usize),
    #[error("invalid GA parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub population_size: usize,
    /// Nominal generation count; tuner runs stop on budget instead.
    pub generations: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            mutation_rate: 0.1,
            crossover_rate: 0.9,
            population_size: 10,
            generations: 30,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), GaError> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rate_ok(self.mutation_rate) || !rate_ok(self.crossover_rate) {
            return Err(GaError::InvalidParams("rates must lie in [0, 1]".into()));
        }
        if self.population_size < 2 {
            return Err(GaError::InvalidParams("population size must be at least 2".into()));
        }
        Ok(())
    }
}

/// A measured configuration. `order` is its position in the run's measurement sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate<T> {
    pub config: Configuration,
    pub performance: T,
    pub order: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member<T> {
    pub config: Configuration,
    pub performance: T,
    pub fitness: T,
    pub order: u64,
}

impl<T: Scalar> Member<T> {
    fn scored(c: &Candidate<T>, fitness: &dyn Fn(T) -> T) -> Self {
        Member {
            config: c.config.clone(),
            performance: c.performance,
            fitness: fitness(c.performance),
            order: c.order,
        }
    }

    pub fn candidate(&self) -> Candidate<T> {
        Candidate {
            config: self.config.clone(),
            performance: self.performance,
            order: self.order,
        }
    }
}

/// Elitist population kept sorted by fitness (best first, older first on ties).
#[derive(Clone, Debug, PartialEq)]
pub struct Population<T> {
    members: Vec<Member<T>>,
    capacity: usize,
}

impl<T: Scalar> Population<T> {
    pub fn new(capacity: usize) -> Self {
        Population {
            members: Vec::new(),
            capacity,
        }
    }

    /// Scores `candidates` and keeps the best `capacity`.
    pub fn from_candidates(
        capacity: usize,
        candidates: &[Candidate<T>],
        fitness: &dyn Fn(T) -> T,
    ) -> Self {
        preserve_top(&Population::new(capacity), candidates, fitness)
    }

    pub fn members(&self) -> &[Member<T>] {
        &self.members
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> Option<&Member<T>> {
        self.members.first()
    }

    pub fn best_fitness(&self) -> Option<T> {
        self.best().map(|m| m.fitness)
    }

    pub fn performances(&self) -> Vec<T> {
        self.members.iter().map(|m| m.performance).collect()
    }

    pub fn candidates(&self) -> Vec<Candidate<T>> {
        self.members.iter().map(Member::candidate).collect()
    }

    /// Recomputes every fitness, e.g. after the governing proposition changed.
    pub fn rescore(&mut self, fitness: &dyn Fn(T) -> T) {
        for m in &mut self.members {
            m.fitness = fitness(m.performance);
        }
        sort_members(&mut self.members);
    }
}

fn sort_members<T: Scalar>(members: &mut [Member<T>]) {
    members.sort_by(|a, b| {
        b.fitness
            .partial_cmp(&a.fitness)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.order.cmp(&b.order))
    });
}

/// Binary tournament with replacement; ties go to a fair coin.
pub fn tournament_select<'a, T: Scalar, R: Rng + ?Sized>(
    pop: &'a Population<T>,
    rng: &mut R,
) -> Result<&'a Configuration, GaError> {
    let m = pop.members();
    if m.is_empty() {
        return Err(GaError::EmptyPopulation);
    }
    let a = &m[rng.gen_range(0..m.len())];
    let b = &m[rng.gen_range(0..m.len())];
    let winner = if a.fitness > b.fitness {
        a
    } else if b.fitness > a.fitness {
        b
    } else if rng.gen_bool(0.5) {
        a
    } else {
        b
    };
    Ok(&winner.config)
}

/// With probability `rate`, each gene of the first child comes from either parent
/// with equal chance and the second child takes the other parent's gene.
pub fn uniform_crossover<R: Rng + ?Sized>(
    a: &Configuration,
    b: &Configuration,
    rate: f64,
    rng: &mut R,
) -> Result<(Configuration, Configuration), GaError> {
    if a.len() != b.len() {
        return Err(GaError::MismatchedParents(a.len(), b.len()));
    }
    if rng.gen::<f64>() >= rate {
        return Ok((a.clone(), b.clone()));
    }
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(a.len());
    for (&x, &y) in a.genes().iter().zip(b.genes()) {
        if rng.gen_bool(0.5) {
            c1.push(x);
            c2.push(y);
        } else {
            c1.push(y);
            c2.push(x);
        }
    }
    Ok((Configuration(c1), Configuration(c2)))
}

/// Each gene, with probability `rate`, moves to a different level of its domain.
pub fn mutate<R: Rng + ?Sized>(
    c: &Configuration,
    domain_sizes: &[usize],
    rate: f64,
    rng: &mut R,
) -> Configuration {
    let genes = c
        .genes()
        .iter()
        .zip(domain_sizes)
        .map(|(&g, &size)| {
            if rng.gen::<f64>() >= rate || size < 2 {
                return g;
            }
            let mut v = rng.gen_range(0..size as u32 - 1);
            if v >= g {
                v += 1;
            }
            v
        })
        .collect();
    Configuration(genes)
}

/// Breeds up to `params.population_size` distinct children from `pop`.
///
/// `accept` filters children that cannot be measured (absent from a partial
/// dataset). Children may repeat configurations measured in earlier generations.
/// Gives up after `100 * n` parent pairs, so the batch can come back short on
/// tiny spaces.
pub fn make_offspring<T: Scalar, R: Rng + ?Sized>(
    pop: &Population<T>,
    domain_sizes: &[usize],
    params: &GaParams,
    accept: &dyn Fn(&Configuration) -> bool,
    rng: &mut R,
) -> Result<Vec<Configuration>, GaError> {
    let n = params.population_size;
    let mut out = Vec::with_capacity(n);
    let mut seen = HashSet::with_capacity(n);
    let mut pairs = 0;
    while out.len() < n && pairs < 100 * n {
        pairs += 1;
        let p1 = tournament_select(pop, rng)?;
        let p2 = tournament_select(pop, rng)?;
        let (c1, c2) = uniform_crossover(p1, p2, params.crossover_rate, rng)?;
        for child in [c1, c2] {
            let child = mutate(&child, domain_sizes, params.mutation_rate, rng);
            if out.len() < n && accept(&child) && seen.insert(child.clone()) {
                out.push(child);
            }
        }
    }
    Ok(out)
}

/// Keeps the best `capacity` of `pop ∪ newcomers` under `fitness`.
/// A configuration already present keeps its older entry.
pub fn preserve_top<T: Scalar>(
    pop: &Population<T>,
    newcomers: &[Candidate<T>],
    fitness: &dyn Fn(T) -> T,
) -> Population<T> {
    let existing = pop.candidates();
    let mut seen: HashSet<&Configuration> = HashSet::new();
    let mut all: Vec<Member<T>> = Vec::with_capacity(existing.len() + newcomers.len());
    for c in existing.iter().chain(newcomers) {
        if seen.insert(&c.config) {
            all.push(Member::scored(c, fitness));
        }
    }
    sort_members(&mut all);
    all.truncate(pop.capacity);
    Population {
        members: all,
        capacity: pop.capacity,
    }
}
