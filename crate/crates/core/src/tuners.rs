//! Tuners: the co-evolutionary tuner and its single-population baselines.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coevolution::{
    detect_case, escape_case2, relax_case0, score_entropy, tighten_case1, CaseLabel,
    EvolutionError, MutationBudget, ShiftOutcome,
};
use crate::entropy::EntropyValue;
use crate::evolution::{make_offspring, preserve_top, Candidate, GaError, GaParams, Population};
use crate::landscape::{BudgetMeter, Configuration, Landscape, LandscapeError};
use crate::requirement::{Proposition, Violation};
use crate::scalar::Scalar;

/// Iterations allowed per unit of budget.
pub const ITERATION_CAP_PER_BUDGET: usize = 10;

#[derive(Debug, Error)]
pub enum TunerError {
    #[error("budget {budget} is below the {needed} measurements initialization needs")]
    BudgetTooSmall { budget: usize, needed: usize },
    #[error("target proposition is invalid: {0:?}")]
    InvalidTarget(Vec<Violation>),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TunerParams {
    /// Distinct measurements allowed.
    pub budget: usize,
    pub ga: GaParams,
    /// Stagnation cap.
    pub k: usize,
    /// Return as soon as a configuration fully satisfies the target.
    pub early_stop: bool,
    /// Charge cache hits against the budget too.
    pub recount_cached: bool,
}

impl Default for TunerParams {
    fn default() -> Self {
        TunerParams {
            budget: 300,
            ga: GaParams::default(),
            k: 3,
            early_stop: true,
            recount_cached: false,
        }
    }
}

impl TunerParams {
    fn n(&self) -> usize {
        self.ga.population_size
    }
}

/// Which proposition drove the offspring of an iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Guide {
    Target,
    Auxiliary,
}

impl fmt::Display for Guide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Guide::Target => "t",
            Guide::Auxiliary => "a",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow<T> {
    pub iteration: usize,
    pub budget_used: usize,
    pub best_pt_score: T,
    pub guide: Option<Guide>,
    pub case: CaseLabel,
    pub theta: Option<T>,
    pub entropy_pa: Option<EntropyValue<T>>,
}

pub const TRAJECTORY_HEADER: &str = "iteration,budget_used,best_pt_score,guide,case,theta,entropy_pa";

impl<T: Scalar> TrajectoryRow<T> {
    fn csv_line(&self) -> String {
        let opt = |x: Option<String>| x.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.iteration,
            self.budget_used,
            self.best_pt_score,
            opt(self.guide.map(|g| g.to_string())),
            self.case,
            opt(self.theta.map(|t| t.to_string())),
            opt(self.entropy_pa.map(|h| match h {
                EntropyValue::Degenerate => "-inf".to_string(),
                EntropyValue::Finite(x) => x.to_string(),
            })),
        )
    }
}

/// One auxiliary-proposition evolution step.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionEvent<T> {
    pub iteration: usize,
    pub case: CaseLabel,
    pub old_encoding: String,
    pub new_encoding: String,
    pub old_entropy: Option<EntropyValue<T>>,
    pub new_entropy: Option<EntropyValue<T>>,
    pub old_integral: T,
    pub new_integral: T,
    /// Why the step fell short of its goal, if it did.
    pub flag: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TunerResult<T> {
    pub best: Configuration,
    pub best_performance: T,
    pub best_score: T,
    pub trajectory: Vec<TrajectoryRow<T>>,
    pub events: Vec<EvolutionEvent<T>>,
    /// First-time measurements in order.
    pub measured: Vec<Configuration>,
    pub budget_used: usize,
    pub final_auxiliary: Option<Proposition<T>>,
}

impl<T: Scalar> TunerResult<T> {
    pub fn trajectory_csv(&self) -> String {
        let mut s = String::from(TRAJECTORY_HEADER);
        s.push('\n');
        for r in &self.trajectory {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    /// The search itself, without guidance diagnostics: per-iteration budget and
    /// best score, then every measured configuration in order.
    pub fn search_trace(&self) -> String {
        let mut s = String::from("iteration,budget_used,best_pt_score\n");
        for r in &self.trajectory {
            let _ = writeln!(s, "{},{},{}", r.iteration, r.budget_used, r.best_pt_score);
        }
        for c in &self.measured {
            let _ = writeln!(s, "{c}");
        }
        let _ = writeln!(s, "best {} {}", self.best, self.best_score);
        s
    }

    /// Guidance was forced onto the auxiliary proposition right after each change.
    pub fn cases_fired(&self) -> Vec<CaseLabel> {
        self.events.iter().map(|e| e.case).collect()
    }
}

/// Guidance weights and the probability of letting the auxiliary proposition lead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuidanceWeights<T> {
    pub w_a: T,
    pub w_t: T,
    pub theta: T,
}

/// `θ = w_a / (w_a + w_t)`, or 1 when both weights are zero.
pub fn theta_from_weights<T: Scalar>(w_a: T, w_t: T) -> GuidanceWeights<T> {
    let den = w_a + w_t;
    let theta = if den > T::zero() { w_a / den } else { T::one() };
    GuidanceWeights { w_a, w_t, theta }
}

/// Best fitness of each population at the end of the previous iteration, both
/// measured under the current propositions. `None` on the first iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PreviousBests<T> {
    pub auxiliary: Option<T>,
    pub target: Option<T>,
}

/// Each weight is the population's mean target score plus the non-negative
/// improvement of its best fitness under its own proposition.
pub fn compute_theta<T: Scalar>(
    pop_t: &Population<T>,
    pop_a: &Population<T>,
    p_t: &Proposition<T>,
    p_a: &Proposition<T>,
    prev: &PreviousBests<T>,
) -> GuidanceWeights<T> {
    let mean_on_target = |pop: &Population<T>| {
        if pop.is_empty() {
            return T::zero();
        }
        pop.members().iter().map(|m| p_t.evaluate(m.performance)).sum::<T>()
            / T::from_usize_lossy(pop.len())
    };
    let best_under = |pop: &Population<T>, p: &Proposition<T>| {
        pop.members()
            .iter()
            .map(|m| p.evaluate(m.performance))
            .fold(T::zero(), T::max)
    };
    let gain = |now: T, before: Option<T>| before.map_or(T::zero(), |b| (now - b).max(T::zero()));
    let w_a = mean_on_target(pop_a) + gain(best_under(pop_a, p_a), prev.auxiliary);
    let w_t = mean_on_target(pop_t) + gain(best_under(pop_t, p_t), prev.target);
    theta_from_weights(w_a, w_t)
}

/// A tuner run: `run(landscape, p_t, params, seed)`.
pub trait Tuner<T: Scalar>: Send + Sync {
    fn name(&self) -> String;

    fn run(
        &self,
        landscape: &Landscape<T>,
        p_t: &Proposition<T>,
        params: &TunerParams,
        seed: u64,
    ) -> Result<TunerResult<T>, TunerError>;
}

/// Which cases may evolve the auxiliary proposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSwitches {
    pub case0: bool,
    pub case1: bool,
    pub case2: bool,
}

impl CaseSwitches {
    pub const ALL: CaseSwitches = CaseSwitches {
        case0: true,
        case1: true,
        case2: true,
    };
    pub const NONE: CaseSwitches = CaseSwitches {
        case0: false,
        case1: false,
        case2: false,
    };

    pub fn only(case: CaseLabel) -> Self {
        CaseSwitches {
            case0: case == CaseLabel::Case0,
            case1: case == CaseLabel::Case1,
            case2: case == CaseLabel::Case2,
        }
    }

    fn allows(&self, case: CaseLabel) -> bool {
        match case {
            CaseLabel::Case0 => self.case0,
            CaseLabel::Case1 => self.case1,
            CaseLabel::Case2 => self.case2,
            CaseLabel::None => false,
        }
    }
}

impl Default for CaseSwitches {
    fn default() -> Self {
        CaseSwitches::ALL
    }
}

/// Random streams of one run: configuration evolution and proposition evolution
/// draw from separate streams of the same seed.
fn streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let evo = ChaCha8Rng::seed_from_u64(seed);
    let mut co = ChaCha8Rng::seed_from_u64(seed);
    co.set_stream(1);
    (evo, co)
}

/// Measurement bookkeeping shared by the population-based tuners.
struct Recorder<T> {
    meter: BudgetMeter<T>,
    order: HashMap<Configuration, u64>,
    history: Vec<Candidate<T>>,
}

impl<T: Scalar> Recorder<T> {
    fn new(params: &TunerParams) -> Self {
        Recorder {
            meter: BudgetMeter::new(params.budget).recounting_cached(params.recount_cached),
            order: HashMap::new(),
            history: Vec::new(),
        }
    }

    /// Measures `configs`, stopping quietly if the budget runs out. Returns the
    /// candidates (revisits keep their original order) and how many are new.
    fn measure_batch(
        &mut self,
        landscape: &Landscape<T>,
        configs: &[Configuration],
    ) -> Result<(Vec<Candidate<T>>, usize), TunerError> {
        let mut out = Vec::with_capacity(configs.len());
        let start = self.history.len();
        for c in configs {
            let v = match self.meter.measure(landscape, c) {
                Ok(v) => v,
                Err(LandscapeError::BudgetExhausted { .. }) => break,
                Err(e) => return Err(e.into()),
            };
            let next = self.order.len() as u64;
            let order = *self.order.entry(c.clone()).or_insert(next);
            let cand = Candidate {
                config: c.clone(),
                performance: v,
                order,
            };
            if order == next {
                self.history.push(cand.clone());
            }
            out.push(cand);
        }
        Ok((out, self.history.len() - start))
    }

    fn consumed(&self) -> usize {
        self.meter.consumed()
    }

    /// False once the table is exhausted or the iteration cap is hit; both
    /// only matter when offspring keep landing on cached configurations.
    fn may_continue(&self, landscape: &Landscape<T>, iteration: usize) -> bool {
        self.history.len() < landscape.len() && iteration < ITERATION_CAP_PER_BUDGET * self.meter.cap()
    }
}

/// Tracks the historical argmax of a fitness; ties keep the earliest.
struct BestTracker<T> {
    best: Option<Candidate<T>>,
    fitness: T,
}

impl<T: Scalar> BestTracker<T> {
    fn new() -> Self {
        BestTracker {
            best: None,
            fitness: T::neg_infinity(),
        }
    }

    /// True when the best strictly improved.
    fn offer(&mut self, cands: &[Candidate<T>], fitness: &dyn Fn(T) -> T) -> bool {
        let mut improved = false;
        for c in cands {
            let f = fitness(c.performance);
            if f > self.fitness {
                self.fitness = f;
                self.best = Some(c.clone());
                improved = true;
            }
        }
        improved
    }

    fn best(&self) -> &Candidate<T> {
        self.best.as_ref().expect("tracker fed before use")
    }
}

fn check_inputs<T: Scalar>(p_t: &Proposition<T>, params: &TunerParams) -> Result<(), TunerError> {
    let v = p_t.validate();
    if !v.is_empty() {
        return Err(TunerError::InvalidTarget(v));
    }
    params.ga.validate()?;
    let needed = 2 * params.n();
    if params.budget < needed {
        return Err(TunerError::BudgetTooSmall {
            budget: params.budget,
            needed,
        });
    }
    Ok(())
}

/// Co-evolves an auxiliary proposition with two configuration populations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoTune {
    pub cases: CaseSwitches,
    /// Report the best of the final two populations instead of the whole history.
    pub literal_best: bool,
}

impl Default for CoTune {
    fn default() -> Self {
        CoTune {
            cases: CaseSwitches::ALL,
            literal_best: false,
        }
    }
}

impl CoTune {
    pub fn with_cases(cases: CaseSwitches) -> Self {
        CoTune {
            cases,
            ..CoTune::default()
        }
    }
}

impl<T: Scalar> Tuner<T> for CoTune {
    fn name(&self) -> String {
        let c = self.cases;
        match (c.case0, c.case1, c.case2) {
            (true, true, true) => "CoTune".into(),
            (true, false, false) => "CoTune0".into(),
            (false, true, false) => "CoTune1".into(),
            (false, false, true) => "CoTune2".into(),
            (false, false, false) => "CoTune-none".into(),
            _ => format!("CoTune[{}{}{}]", c.case0 as u8, c.case1 as u8, c.case2 as u8),
        }
    }

    fn run(
        &self,
        landscape: &Landscape<T>,
        p_t: &Proposition<T>,
        params: &TunerParams,
        seed: u64,
    ) -> Result<TunerResult<T>, TunerError> {
        check_inputs(p_t, params)?;
        let n = params.n();
        let sizes = landscape.space().domain_sizes();
        let (mut evo_rng, mut co_rng) = streams(seed);
        let mut rec = Recorder::new(params);
        let mut events = Vec::new();
        let mut trajectory = Vec::new();

        let score_t = |v: T| p_t.evaluate(v);
        let mut p_a = p_t.clone();

        let init = landscape.sample_distinct(n, &mut evo_rng);
        let (init, _) = rec.measure_batch(landscape, &init)?;
        let mut pop_t = Population::from_candidates(n, &init, &score_t);
        let mut pop_a = Population::from_candidates(n, &init, &|v| p_a.evaluate(v));
        let mut best = BestTracker::new();
        best.offer(&init, &score_t);
        let mut best_score = best.fitness;

        let entropy_of = |p: &Proposition<T>, pop: &Population<T>| {
            score_entropy(p, &pop.performances()).ok()
        };
        trajectory.push(TrajectoryRow {
            iteration: 0,
            budget_used: rec.consumed(),
            best_pt_score: best_score,
            guide: None,
            case: CaseLabel::None,
            theta: None,
            entropy_pa: entropy_of(&p_a, &pop_a),
        });

        let mut stagnation = 0usize;
        let mut pa_changed_last = false;
        let mut prev_pop_a: Option<Vec<T>> = None;
        let mut prev_best_t: Option<T> = None;
        let mut iteration = 0;

        let done_early = |score: T| params.early_stop && score >= T::one();
        if !done_early(best_score) {
            while rec.consumed() + n < params.budget && rec.may_continue(landscape, iteration) {
                iteration += 1;
                let prev = PreviousBests {
                    auxiliary: prev_pop_a.as_ref().map(|perfs| {
                        perfs.iter().map(|&v| p_a.evaluate(v)).fold(T::zero(), T::max)
                    }),
                    target: prev_best_t,
                };
                let weights = compute_theta(&pop_t, &pop_a, p_t, &p_a, &prev);
                let alpha: f64 = co_rng.gen();
                let guide = if alpha < weights.theta.as_f64() || pa_changed_last {
                    Guide::Auxiliary
                } else {
                    Guide::Target
                };
                prev_pop_a = Some(pop_a.performances());
                prev_best_t = pop_t.best_fitness();

                let parents = match guide {
                    Guide::Auxiliary => &pop_a,
                    Guide::Target => &pop_t,
                };
                let kids = make_offspring(
                    parents,
                    &sizes,
                    &params.ga,
                    &|c| landscape.contains(c),
                    &mut evo_rng,
                )?;
                let (fresh, _) = rec.measure_batch(landscape, &kids)?;
                pop_t = preserve_top(&pop_t, &fresh, &score_t);
                pop_a = preserve_top(&pop_a, &fresh, &|v| p_a.evaluate(v));

                let case = detect_case(&pop_t, &pop_a, p_t, &p_a, stagnation, params.k);
                let mut changed = false;
                if self.cases.allows(case) {
                    let perfs = pop_a.performances();
                    let mut event = EvolutionEvent {
                        iteration,
                        case,
                        old_encoding: p_a.to_string(),
                        new_encoding: p_a.to_string(),
                        old_entropy: None,
                        new_entropy: None,
                        old_integral: p_a.integral(),
                        new_integral: p_a.integral(),
                        flag: None,
                    };
                    let shifted = match case {
                        CaseLabel::Case0 => Some(relax_case0(&p_a, &perfs, &mut co_rng)),
                        CaseLabel::Case1 => Some(tighten_case1(&p_a, &perfs, &mut co_rng)),
                        _ => None,
                    };
                    match shifted {
                        Some(Ok(shift)) => {
                            if shift.outcome == ShiftOutcome::Pinned {
                                event.flag = Some("pinned".into());
                            }
                            event.old_entropy = Some(shift.old_entropy);
                            event.new_entropy = Some(shift.new_entropy);
                            p_a = shift.proposition;
                            changed = true;
                        }
                        Some(Err(e)) => {
                            event.old_entropy = score_entropy(&p_a, &perfs).ok();
                            event.new_entropy = event.old_entropy;
                            event.flag = Some(e.to_string());
                        }
                        None => {
                            let esc = escape_case2(
                                &p_a,
                                &perfs,
                                MutationBudget::for_population(n),
                                &mut co_rng,
                            )?;
                            if esc.capped {
                                event.flag = Some(format!("capped after {} draws", esc.attempts));
                            }
                            event.old_entropy = Some(esc.old_entropy);
                            event.new_entropy = Some(esc.new_entropy);
                            changed = esc.proposition != p_a;
                            p_a = esc.proposition;
                        }
                    }
                    event.new_encoding = p_a.to_string();
                    event.new_integral = p_a.integral();
                    events.push(event);
                }
                if changed {
                    pop_a.rescore(&|v| p_a.evaluate(v));
                }
                pa_changed_last = changed;

                let improved = if self.literal_best {
                    let mut pool = pop_t.candidates();
                    pool.extend(pop_a.candidates());
                    let mut cur = BestTracker::new();
                    cur.offer(&pool, &score_t);
                    let better = cur.fitness > best_score;
                    best = cur;
                    better
                } else {
                    best.offer(&fresh, &score_t)
                };
                if improved {
                    best_score = best.fitness;
                    stagnation = 0;
                } else {
                    stagnation += 1;
                }
                trajectory.push(TrajectoryRow {
                    iteration,
                    budget_used: rec.consumed(),
                    best_pt_score: best_score.max(best.fitness),
                    guide: Some(guide),
                    case,
                    theta: Some(weights.theta),
                    entropy_pa: entropy_of(&p_a, &pop_a),
                });
                if improved && done_early(best_score) {
                    break;
                }
            }
        }

        let b = best.best().clone();
        Ok(TunerResult {
            best_score: p_t.evaluate(b.performance),
            best: b.config,
            best_performance: b.performance,
            trajectory,
            events,
            measured: rec.meter.history().to_vec(),
            budget_used: rec.consumed(),
            final_auxiliary: Some(p_a),
        })
    }
}

/// What a single-population GA optimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    /// Satisfaction under the target proposition.
    Proposition,
    /// The raw (minimized) performance value.
    RawPerformance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ga {
    pub objective: Objective,
}

impl Ga {
    pub fn requirement_guided() -> Self {
        Ga {
            objective: Objective::Proposition,
        }
    }

    pub fn performance_guided() -> Self {
        Ga {
            objective: Objective::RawPerformance,
        }
    }
}

impl<T: Scalar> Tuner<T> for Ga {
    fn name(&self) -> String {
        match self.objective {
            Objective::Proposition => "GA_p".into(),
            Objective::RawPerformance => "GA_r".into(),
        }
    }

    fn run(
        &self,
        landscape: &Landscape<T>,
        p_t: &Proposition<T>,
        params: &TunerParams,
        seed: u64,
    ) -> Result<TunerResult<T>, TunerError> {
        check_inputs(p_t, params)?;
        let n = params.n();
        let sizes = landscape.space().domain_sizes();
        let (mut evo_rng, _) = streams(seed);
        let mut rec = Recorder::new(params);
        let fitness: Box<dyn Fn(T) -> T + '_> = match self.objective {
            Objective::Proposition => Box::new(|v| p_t.evaluate(v)),
            Objective::RawPerformance => Box::new(|v: T| -v),
        };

        let init = landscape.sample_distinct(n, &mut evo_rng);
        let (init, _) = rec.measure_batch(landscape, &init)?;
        let mut pop = Population::from_candidates(n, &init, &*fitness);
        let mut best = BestTracker::new();
        best.offer(&init, &*fitness);
        let pt_of_best = |b: &BestTracker<T>| p_t.evaluate(b.best().performance);

        let mut trajectory = vec![TrajectoryRow {
            iteration: 0,
            budget_used: rec.consumed(),
            best_pt_score: pt_of_best(&best),
            guide: None,
            case: CaseLabel::None,
            theta: None,
            entropy_pa: None,
        }];
        let done_early = |score: T| params.early_stop && score >= T::one();
        let mut iteration = 0;
        if !done_early(pt_of_best(&best)) {
            while rec.consumed() + n < params.budget && rec.may_continue(landscape, iteration) {
                iteration += 1;
                let kids = make_offspring(
                    &pop,
                    &sizes,
                    &params.ga,
                    &|c| landscape.contains(c),
                    &mut evo_rng,
                )?;
                let (fresh, _) = rec.measure_batch(landscape, &kids)?;
                pop = preserve_top(&pop, &fresh, &*fitness);
                let improved = best.offer(&fresh, &*fitness);
                let score = pt_of_best(&best);
                trajectory.push(TrajectoryRow {
                    iteration,
                    budget_used: rec.consumed(),
                    best_pt_score: score,
                    guide: Some(Guide::Target),
                    case: CaseLabel::None,
                    theta: None,
                    entropy_pa: None,
                });
                if improved && done_early(score) {
                    break;
                }
            }
        }
        let b = best.best().clone();
        Ok(TunerResult {
            best_score: p_t.evaluate(b.performance),
            best: b.config,
            best_performance: b.performance,
            trajectory,
            events: Vec::new(),
            measured: rec.meter.history().to_vec(),
            budget_used: rec.consumed(),
            final_auxiliary: None,
        })
    }
}

/// Uniform random sampling of distinct configurations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSearch;

impl<T: Scalar> Tuner<T> for RandomSearch {
    fn name(&self) -> String {
        "Random".into()
    }

    fn run(
        &self,
        landscape: &Landscape<T>,
        p_t: &Proposition<T>,
        params: &TunerParams,
        seed: u64,
    ) -> Result<TunerResult<T>, TunerError> {
        let v = p_t.validate();
        if !v.is_empty() {
            return Err(TunerError::InvalidTarget(v));
        }
        if params.budget < 1 {
            return Err(TunerError::BudgetTooSmall {
                budget: params.budget,
                needed: 1,
            });
        }
        let (mut rng, _) = streams(seed);
        let mut rec = Recorder::new(params);
        let picks = landscape.sample_distinct(params.budget, &mut rng);
        let score = |v: T| p_t.evaluate(v);
        let mut best = BestTracker::new();
        let mut trajectory = Vec::with_capacity(picks.len());
        for (i, c) in picks.iter().enumerate() {
            let (cands, _) = rec.measure_batch(landscape, std::slice::from_ref(c))?;
            let improved = best.offer(&cands, &score);
            trajectory.push(TrajectoryRow {
                iteration: i,
                budget_used: rec.consumed(),
                best_pt_score: best.fitness,
                guide: None,
                case: CaseLabel::None,
                theta: None,
                entropy_pa: None,
            });
            if improved && params.early_stop && best.fitness >= T::one() {
                break;
            }
        }
        let b = best.best().clone();
        Ok(TunerResult {
            best_score: best.fitness,
            best: b.config,
            best_performance: b.performance,
            trajectory,
            events: Vec::new(),
            measured: rec.meter.history().to_vec(),
            budget_used: rec.consumed(),
            final_auxiliary: None,
        })
    }
}
