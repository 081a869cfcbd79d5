//! Evolution of the auxiliary proposition.
//!
//! Three situations trigger a change:
//! - every configuration scores 0 under both propositions: a boundary is pushed
//!   right until the population's scores spread out (relaxing);
//! - every configuration scores 1 under the auxiliary proposition: a boundary is
//!   pulled left (tightening);
//! - the best configuration stagnates: a random search looks for a mutant that
//!   spreads the population's scores as little as possible.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{differential_entropy, EntropyError, EntropyValue};
use crate::evolution::Population;
use crate::requirement::{FragmentKind, Proposition, Violation};
use crate::scalar::Scalar;

/// Redraws allowed inside one [`mutate_proposition`] call.
pub const MUTATION_REDRAWS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum EvolutionError {
    #[error("proposition has no distinguishable fragment")]
    NoDistinguishableFragment,
    #[error("every distinguishable fragment already has its boundary at the metric bound")]
    BoundaryPinned,
    #[error("no valid mutant after {0} draws")]
    MutationCapExhausted(usize),
    #[error("input proposition is invalid: {0:?}")]
    InvalidInput(Vec<Violation>),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Both populations are fully unsatisfied.
    Case0,
    /// The auxiliary population is fully satisfied.
    Case1,
    /// The best configuration on the target has not improved for `k` iterations.
    Case2,
    None,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseLabel::Case0 => "case0",
            CaseLabel::Case1 => "case1",
            CaseLabel::Case2 => "case2",
            CaseLabel::None => "none",
        };
        f.write_str(s)
    }
}

/// Case detection with priority Case0 > Case1 > Case2.
pub fn detect_case<T: Scalar>(
    pop_t: &Population<T>,
    pop_a: &Population<T>,
    p_t: &Proposition<T>,
    p_a: &Proposition<T>,
    stagnation: usize,
    k: usize,
) -> CaseLabel {
    let all = |pop: &Population<T>, p: &Proposition<T>, s: T| {
        !pop.is_empty() && pop.members().iter().all(|m| p.evaluate(m.performance) == s)
    };
    if all(pop_a, p_a, T::zero()) && all(pop_t, p_t, T::zero()) {
        CaseLabel::Case0
    } else if all(pop_a, p_a, T::one()) {
        CaseLabel::Case1
    } else if stagnation >= k {
        CaseLabel::Case2
    } else {
        CaseLabel::None
    }
}

/// Entropy of the scores `prop` assigns to `performances`.
pub fn score_entropy<T: Scalar>(
    prop: &Proposition<T>,
    performances: &[T],
) -> Result<EntropyValue<T>, EntropyError> {
    let scores: Vec<T> = performances.iter().map(|&v| prop.evaluate(v)).collect();
    differential_entropy(&scores)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftOutcome {
    /// Stopped because the population's score entropy rose.
    EntropyGain,
    /// Stopped because the boundary reached the metric bound.
    Pinned,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryShift<T> {
    pub proposition: Proposition<T>,
    pub outcome: ShiftOutcome,
    pub old_entropy: EntropyValue<T>,
    pub new_entropy: EntropyValue<T>,
    /// Index of the moved fragment in the input proposition.
    pub fragment: usize,
    pub moves: usize,
}

fn require_valid<T: Scalar>(p: &Proposition<T>) -> Result<(), EvolutionError> {
    let v = p.validate();
    if v.is_empty() {
        Ok(())
    } else {
        Err(EvolutionError::InvalidInput(v))
    }
}

/// Moves the right boundary of fragment `idx` to `nb`; fragments it fully
/// overtakes are dropped and a partially overtaken one starts at `nb`.
fn push_right_boundary<T: Scalar>(p: &Proposition<T>, idx: usize, nb: T) -> Proposition<T> {
    let mut out = Vec::with_capacity(p.len());
    out.extend_from_slice(&p.fragments()[..idx]);
    let moved = p.fragments()[idx];
    out.push(moved.respanned(moved.v_lo, nb));
    for f in &p.fragments()[idx + 1..] {
        if f.v_hi <= nb {
            continue;
        }
        out.push(f.respanned(f.v_lo.max(nb), f.v_hi));
    }
    Proposition::from_parts(p.v_min(), p.v_max(), out)
}

/// Mirror of [`push_right_boundary`] for the left boundary.
fn pull_left_boundary<T: Scalar>(p: &Proposition<T>, idx: usize, nb: T) -> Proposition<T> {
    let mut out = Vec::with_capacity(p.len());
    for f in &p.fragments()[..idx] {
        if f.v_lo >= nb {
            continue;
        }
        out.push(f.respanned(f.v_lo, f.v_hi.min(nb)));
    }
    let moved = p.fragments()[idx];
    out.push(moved.respanned(nb, moved.v_hi));
    out.extend_from_slice(&p.fragments()[idx + 1..]);
    Proposition::from_parts(p.v_min(), p.v_max(), out)
}

fn draw_delta<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.gen_range(0.5..=1.0))
}

/// Case 0: relaxes `p_a` by pushing the right boundary of the rightmost movable
/// distinguishable fragment to `v_min + (b - v_min)(1 + Δ)`, clamped to `v_max`,
/// redrawing `Δ ∈ [0.5, 1]` per move until the population's score entropy rises
/// or the boundary pins at `v_max`. The area under the result is strictly larger.
pub fn relax_case0<T: Scalar, R: Rng + ?Sized>(
    p_a: &Proposition<T>,
    performances: &[T],
    rng: &mut R,
) -> Result<BoundaryShift<T>, EvolutionError> {
    require_valid(p_a)?;
    let frags = p_a.fragments();
    if !frags.iter().any(|f| f.is_distinguishable()) {
        return Err(EvolutionError::NoDistinguishableFragment);
    }
    let idx = (0..frags.len())
        .rev()
        .find(|&i| frags[i].is_distinguishable() && frags[i].v_hi < p_a.v_max())
        .ok_or(EvolutionError::BoundaryPinned)?;
    let old_entropy = score_entropy(p_a, performances)?;
    let (v_min, v_max) = (p_a.v_min(), p_a.v_max());
    let mut cur = p_a.clone();
    let mut b = frags[idx].v_hi;
    let mut moves = 0;
    loop {
        let delta: T = draw_delta(rng);
        b = (v_min + (b - v_min) * (T::one() + delta)).min(v_max);
        cur = push_right_boundary(&cur, idx, b);
        moves += 1;
        let h = score_entropy(&cur, performances)?;
        let outcome = if h.exceeds(&old_entropy) {
            Some(ShiftOutcome::EntropyGain)
        } else if b >= v_max {
            Some(ShiftOutcome::Pinned)
        } else {
            None
        };
        if let Some(outcome) = outcome {
            debug_assert!(cur.validate().is_empty());
            debug_assert!(cur.integral() > p_a.integral());
            return Ok(BoundaryShift {
                proposition: cur,
                outcome,
                old_entropy,
                new_entropy: h,
                fragment: idx,
                moves,
            });
        }
    }
}

/// Case 1: tightens `p_a` by pulling the left boundary of the leftmost movable
/// distinguishable fragment to `v_min + (b - v_min)(1 - Δ)`, until the
/// population's score entropy rises or the boundary pins at `v_min`. The area
/// under the result is strictly smaller.
pub fn tighten_case1<T: Scalar, R: Rng + ?Sized>(
    p_a: &Proposition<T>,
    performances: &[T],
    rng: &mut R,
) -> Result<BoundaryShift<T>, EvolutionError> {
    require_valid(p_a)?;
    let frags = p_a.fragments();
    if !frags.iter().any(|f| f.is_distinguishable()) {
        return Err(EvolutionError::NoDistinguishableFragment);
    }
    let idx = (0..frags.len())
        .find(|&i| frags[i].is_distinguishable() && frags[i].v_lo > p_a.v_min())
        .ok_or(EvolutionError::BoundaryPinned)?;
    let old_entropy = score_entropy(p_a, performances)?;
    let v_min = p_a.v_min();
    let mut cur = p_a.clone();
    let mut b = frags[idx].v_lo;
    // index of the moved fragment shifts as predecessors are absorbed
    let mut at = idx;
    let mut moves = 0;
    loop {
        let delta: T = draw_delta(rng);
        b = (v_min + (b - v_min) * (T::one() - delta)).max(v_min);
        let before = cur.len();
        cur = pull_left_boundary(&cur, at, b);
        at -= before - cur.len();
        moves += 1;
        let h = score_entropy(&cur, performances)?;
        let outcome = if h.exceeds(&old_entropy) {
            Some(ShiftOutcome::EntropyGain)
        } else if b <= v_min {
            Some(ShiftOutcome::Pinned)
        } else {
            None
        };
        if let Some(outcome) = outcome {
            debug_assert!(cur.validate().is_empty());
            debug_assert!(cur.integral() < p_a.integral());
            return Ok(BoundaryShift {
                proposition: cur,
                outcome,
                old_entropy,
                new_entropy: h,
                fragment: idx,
                moves,
            });
        }
    }
}

/// Re-derives scores for fragment `i` switched to `kind`. E keeps the left score;
/// S falls from the left score to the successor's left score (0 for the last
/// fragment); G rises from the left score to 1.
fn switched_scores<T: Scalar>(p: &Proposition<T>, i: usize, kind: FragmentKind) -> (T, T) {
    let f = p.fragments()[i];
    match kind {
        FragmentKind::E => (f.s_lo, f.s_lo),
        FragmentKind::S => {
            let next = p.fragments().get(i + 1).map_or(T::zero(), |n| n.s_lo);
            (f.s_lo, next)
        }
        FragmentKind::G => (f.s_lo, T::one()),
    }
}

fn switch_fragment<T: Scalar, R: Rng + ?Sized>(p: &mut Proposition<T>, rng: &mut R) {
    let i = rng.gen_range(0..p.len());
    let current = p.fragments()[i].kind;
    let others: Vec<FragmentKind> = FragmentKind::ALL
        .into_iter()
        .filter(|&k| k != current)
        .collect();
    let kind = others[rng.gen_range(0..others.len())];
    let (s_lo, s_hi) = switched_scores(p, i, kind);
    let f = &mut p.fragments_mut()[i];
    f.kind = kind;
    f.s_lo = s_lo;
    f.s_hi = s_hi;
}

fn move_boundary<T: Scalar, R: Rng + ?Sized>(p: &mut Proposition<T>, rng: &mut R) {
    let j = rng.gen_range(0..p.len() - 1);
    let lo = p.fragments()[j].v_lo;
    let hi = p.fragments()[j + 1].v_hi;
    let mut nb = lo;
    // open interval: reject the endpoints, which a float draw can hit
    for _ in 0..64 {
        let u: T = T::lit(rng.gen::<f64>());
        nb = lo + u * (hi - lo);
        if nb > lo && nb < hi {
            break;
        }
    }
    let frags = p.fragments_mut();
    frags[j].v_hi = nb;
    frags[j + 1].v_lo = nb;
}

/// One random mutant of `p_a`: a kind switch, a boundary move, or both.
/// Invalid mutants (non-monotone, degenerate) are redrawn.
pub fn mutate_proposition<T: Scalar, R: Rng + ?Sized>(
    p_a: &Proposition<T>,
    rng: &mut R,
) -> Result<Proposition<T>, EvolutionError> {
    require_valid(p_a)?;
    for _ in 0..MUTATION_REDRAWS {
        let mut cand = p_a.clone();
        let op = if cand.len() > 1 { rng.gen_range(0..3) } else { 0 };
        if op != 1 {
            switch_fragment(&mut cand, rng);
        }
        if op != 0 {
            move_boundary(&mut cand, rng);
        }
        if cand.validate().is_empty() {
            return Ok(cand);
        }
    }
    Err(EvolutionError::MutationCapExhausted(MUTATION_REDRAWS))
}

/// Size and draw limit for the Case 2 mutant pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MutationBudget {
    pub pool_target: usize,
    pub attempt_cap: usize,
}

impl MutationBudget {
    /// Pool of `n` with a cap of `50 n` draws.
    pub fn for_population(n: usize) -> Self {
        let n = n.max(1);
        MutationBudget {
            pool_target: n,
            attempt_cap: 50 * n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Escape<T> {
    pub proposition: Proposition<T>,
    pub old_entropy: EntropyValue<T>,
    pub new_entropy: EntropyValue<T>,
    /// Entropies of the final pool, in pool order.
    pub pool_entropies: Vec<EntropyValue<T>>,
    pub attempts: usize,
    /// The draw cap fired before a lower-entropy mutant was found.
    pub capped: bool,
}

/// Case 2: random search for a proposition that discriminates the population
/// less. Keeps a pool of at most `pool_target` mutants, evicting the highest
/// entropy, until the pool is full and holds one mutant with strictly lower
/// entropy than `p_a`, or the draw cap fires. Returns the pool's entropy argmin.
pub fn escape_case2<T: Scalar, R: Rng + ?Sized>(
    p_a: &Proposition<T>,
    performances: &[T],
    budget: MutationBudget,
    rng: &mut R,
) -> Result<Escape<T>, EvolutionError> {
    require_valid(p_a)?;
    let old_entropy = score_entropy(p_a, performances)?;
    let mut pool: Vec<(Proposition<T>, EntropyValue<T>)> = Vec::with_capacity(budget.pool_target + 1);
    let mut attempts = 0;
    let done = |pool: &[(Proposition<T>, EntropyValue<T>)]| {
        pool.len() >= budget.pool_target && pool.iter().any(|(_, h)| old_entropy.exceeds(h))
    };
    while !done(&pool) && attempts < budget.attempt_cap {
        attempts += 1;
        let Ok(mutant) = mutate_proposition(p_a, rng) else {
            continue;
        };
        let h = score_entropy(&mutant, performances)?;
        pool.push((mutant, h));
        if pool.len() > budget.pool_target {
            let worst = argmax(&pool);
            pool.remove(worst);
        }
    }
    let capped = !done(&pool);
    let pool_entropies: Vec<_> = pool.iter().map(|(_, h)| *h).collect();
    let (proposition, new_entropy) = if pool.is_empty() {
        (p_a.clone(), old_entropy)
    } else {
        pool.swap_remove(argmin(&pool))
    };
    Ok(Escape {
        proposition,
        old_entropy,
        new_entropy,
        pool_entropies,
        attempts,
        capped,
    })
}

fn argmax<T: Scalar>(pool: &[(Proposition<T>, EntropyValue<T>)]) -> usize {
    let mut best = 0;
    for i in 1..pool.len() {
        if pool[i].1.exceeds(&pool[best].1) {
            best = i;
        }
    }
    best
}

fn argmin<T: Scalar>(pool: &[(Proposition<T>, EntropyValue<T>)]) -> usize {
    let mut best = 0;
    for i in 1..pool.len() {
        if pool[best].1.exceeds(&pool[i].1) {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Candidate;
    use crate::requirement::Fragment;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use FragmentKind::*;

    fn strict() -> Proposition<f64> {
        Proposition::new(
            0.0,
            10.0,
            vec![
                Fragment::new(S, 0.0, 4.0, 1.0, 0.0),
                Fragment::constant(4.0, 10.0, 0.0),
            ],
        )
        .unwrap()
    }

    fn lenient() -> Proposition<f64> {
        Proposition::new(
            0.0,
            10.0,
            vec![
                Fragment::constant(0.0, 6.0, 1.0),
                Fragment::new(S, 6.0, 10.0, 1.0, 0.0),
            ],
        )
        .unwrap()
    }

    fn example() -> Proposition<f64> {
        Proposition::new(
            0.0,
            10.0,
            vec![
                Fragment::constant(0.0, 2.0, 1.0),
                Fragment::new(S, 2.0, 3.5, 1.0, 0.6),
                Fragment::constant(3.5, 5.0, 0.6),
                Fragment::new(S, 5.0, 10.0, 0.6, 0.0),
            ],
        )
        .unwrap()
    }

    fn pop(perfs: &[f64], p: &Proposition<f64>) -> Population<f64> {
        let cands: Vec<_> = perfs
            .iter()
            .enumerate()
            .map(|(i, &v)| Candidate {
                config: crate::landscape::Configuration(vec![i as u32]),
                performance: v,
                order: i as u64,
            })
            .collect();
        Population::from_candidates(perfs.len(), &cands, &|v| p.evaluate(v))
    }

    #[test]
    fn detects_cases_in_priority_order() {
        let p = strict();
        let hopeless = pop(&[6.0, 7.0, 9.0], &p);
        assert_eq!(detect_case(&hopeless, &hopeless, &p, &p, 5, 3), CaseLabel::Case0);

        let easy = lenient();
        let happy = pop(&[1.0, 2.0, 3.0], &easy);
        assert_eq!(detect_case(&happy, &happy, &easy, &easy, 0, 3), CaseLabel::Case1);

        let mixed = pop(&[1.0, 5.0, 8.0], &easy);
        assert_eq!(detect_case(&mixed, &mixed, &easy, &easy, 3, 3), CaseLabel::Case2);
        assert_eq!(detect_case(&mixed, &mixed, &easy, &easy, 2, 3), CaseLabel::None);
    }

    #[test]
    fn relax_spreads_hopeless_scores() {
        let perfs = [6.0, 6.5, 7.0, 8.0, 9.0, 10.0];
        let p = strict();
        assert!(perfs.iter().all(|&v| p.evaluate(v) == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = relax_case0(&p, &perfs, &mut rng).unwrap();
        assert!(out.proposition.integral() > 2.0);
        assert!(perfs.iter().any(|&v| out.proposition.evaluate(v) > 0.0));
        assert_eq!(out.outcome, ShiftOutcome::EntropyGain);
        assert!(out.new_entropy.exceeds(&out.old_entropy));
        assert!(out.proposition.validate().is_empty());
    }

    #[test]
    fn relax_absorbs_overtaken_tail() {
        // perfs all at v_max stay unsatisfied, so the boundary runs to the end
        let perfs = [10.0, 10.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = relax_case0(&strict(), &perfs, &mut rng).unwrap();
        assert_eq!(out.outcome, ShiftOutcome::Pinned);
        let f = out.proposition.fragments();
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].kind, f[0].v_lo, f[0].v_hi), (S, 0.0, 10.0));
        assert_eq!((f[0].s_lo, f[0].s_hi), (1.0, 0.0));
        assert_eq!(out.proposition.integral(), 5.0);
    }

    #[test]
    fn relax_rejects_flat_propositions() {
        let flat = Proposition::constant(0.0, 10.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            relax_case0(&flat, &[1.0, 2.0], &mut rng),
            Err(EvolutionError::NoDistinguishableFragment)
        );
        let full = Proposition::ramp(0.0, 10.0, 1.0, 0.0).unwrap();
        assert_eq!(
            relax_case0(&full, &[1.0, 2.0], &mut rng),
            Err(EvolutionError::BoundaryPinned)
        );
    }

    #[test]
    fn tighten_spreads_happy_scores() {
        let perfs = [0.0, 1.0, 2.5, 4.0, 5.0];
        let p = lenient();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = tighten_case1(&p, &perfs, &mut rng).unwrap();
        assert!(out.proposition.integral() < p.integral());
        assert!(perfs.iter().any(|&v| out.proposition.evaluate(v) < 1.0));
        assert!(out.new_entropy.exceeds(&out.old_entropy));
        assert!(out.proposition.validate().is_empty());
    }

    #[test]
    fn tighten_pinned_at_lower_bound() {
        let p = Proposition::ramp(0.0, 10.0, 1.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            tighten_case1(&p, &[1.0], &mut rng),
            Err(EvolutionError::BoundaryPinned)
        );
    }

    #[test]
    fn tighten_absorbs_leading_fragments() {
        let p = Proposition::new(
            0.0,
            10.0,
            vec![
                Fragment::constant(0.0, 1.0, 1.0),
                Fragment::constant(1.0, 6.0, 1.0),
                Fragment::new(S, 6.0, 10.0, 1.0, 0.0),
            ],
        )
        .unwrap();
        // values at 0 stay at score 1 until the boundary reaches v_min
        let perfs = [0.0, 0.0, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = tighten_case1(&p, &perfs, &mut rng).unwrap();
        assert_eq!(out.outcome, ShiftOutcome::Pinned);
        assert_eq!(out.proposition.len(), 1);
        assert_eq!(out.proposition.integral(), 5.0);
    }

    #[test]
    fn switching_s_to_e_collapses_to_left_score() {
        let p = example();
        let (lo, hi) = switched_scores(&p, 1, E);
        assert_eq!((lo, hi), (1.0, 1.0));
        let (lo, hi) = switched_scores(&p, 2, S);
        assert_eq!((lo, hi), (0.6, 0.6));
        let (lo, hi) = switched_scores(&p, 3, S);
        assert_eq!((lo, hi), (0.6, 0.0));
        let (lo, hi) = switched_scores(&p, 0, G);
        assert_eq!((lo, hi), (1.0, 1.0));
    }

    #[test]
    fn boundary_moves_stay_between_neighbours() {
        let p = example();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let mut q = p.clone();
            move_boundary(&mut q, &mut rng);
            let before = p.boundaries();
            let after = q.boundaries();
            let changed: Vec<usize> = (0..3).filter(|&i| before[i] != after[i]).collect();
            assert!(changed.len() <= 1);
            if let Some(&i) = changed.first() {
                let lo = if i == 0 { 0.0 } else { before[i - 1] };
                let hi = if i == 2 { 10.0 } else { before[i + 1] };
                assert!(after[i] > lo && after[i] < hi);
            }
        }
    }

    #[test]
    fn mutants_are_valid() {
        let p = example();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let m = mutate_proposition(&p, &mut rng).unwrap();
            assert!(m.validate().is_empty());
            assert_eq!(m.len(), p.len());
        }
    }

    #[test]
    fn escape_from_sentinel_hits_cap() {
        let p = strict();
        let perfs = [6.0, 7.0, 8.0];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = escape_case2(&p, &perfs, MutationBudget::for_population(3), &mut rng).unwrap();
        assert!(out.capped);
        assert_eq!(out.attempts, 150);
        assert!(out.old_entropy.is_degenerate());
    }

    #[test]
    fn escape_finds_flattening_mutant() {
        // every score sits on the single S ramp; any kind switch flattens them
        let p = Proposition::ramp(0.0, 10.0, 1.0, 0.0).unwrap();
        let perfs = [1.0, 3.0, 5.0, 7.0, 9.0];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let out = escape_case2(&p, &perfs, MutationBudget::for_population(1), &mut rng).unwrap();
        assert!(!out.capped);
        assert!(out.new_entropy.is_degenerate());
        let f = &out.proposition.fragments()[0];
        assert_ne!(f.kind, S);
        assert_eq!(f.s_lo, f.s_hi);
    }

    #[test]
    fn escape_returns_pool_argmin() {
        let p = example();
        let perfs = [1.0, 2.5, 3.0, 4.0, 6.0, 8.0, 9.5];
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let out = escape_case2(&p, &perfs, MutationBudget::for_population(5), &mut rng).unwrap();
        for h in &out.pool_entropies {
            assert!(!out.new_entropy.exceeds(h));
        }
        if !out.capped {
            assert!(out.old_entropy.exceeds(&out.new_entropy));
        }
    }
}
