mod common;

use std::collections::HashSet;

use cotune_core::entropy::{differential_entropy, differential_entropy_with_grid, silverman_bandwidth, EntropyValue};
use cotune_core::landscape::{Landscape, Shape, Space, SynthSpec};
use cotune_core::requirement::{Fragment, FragmentKind, Proposition};
use cotune_core::tuners::{CaseSwitches, CoTune, Ga, RandomSearch, Tuner, TunerParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normal_sample(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (u1, u2): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect()
}

fn finite(h: EntropyValue<f64>) -> f64 {
    match h {
        EntropyValue::Finite(x) => x,
        EntropyValue::Degenerate => panic!("unexpected degenerate sample"),
    }
}

#[test]
fn gaussian_entropy_matches_closed_form() {
    // KDE of a normal sample is close to a normal with variance s^2 + bw^2
    let xs = normal_sample(4000, 1);
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let bw = silverman_bandwidth(&xs);
    let closed = 0.5 * (std::f64::consts::TAU * std::f64::consts::E * (var + bw * bw)).ln();
    let h = finite(differential_entropy(&xs).unwrap());
    assert!((h - closed).abs() < 0.02, "{h} vs {closed}");
}

#[test]
fn grid_refinement_barely_moves_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let xs = common::spread(&mut rng, 10, 0.0, 1.0);
        let coarse = finite(differential_entropy_with_grid(&xs, 512).unwrap());
        let fine = finite(differential_entropy_with_grid(&xs, 4096).unwrap());
        assert!((coarse - fine).abs() < 1e-3, "{coarse} vs {fine}");
    }
}

fn target(l: &Landscape<f64>, frac: f64) -> Proposition<f64> {
    let (lo, hi) = l.proposition_bounds();
    let mid = lo + (hi - lo) * frac;
    Proposition::new(
        lo,
        hi,
        vec![
            Fragment::new(FragmentKind::S, lo, mid, 1.0, 0.05),
            Fragment::constant(mid, hi, 0.0),
        ],
    )
    .unwrap()
}

#[test]
fn random_search_best_is_the_measured_maximum() {
    let l = Landscape::<f64>::synth(&SynthSpec::binary(4, 10, Shape::Rugged)).unwrap();
    let p = target(&l, 0.4);
    let params = TunerParams { budget: 120, early_stop: false, ..TunerParams::default() };
    for seed in 0..10 {
        let r = RandomSearch.run(&l, &p, &params, seed).unwrap();
        let brute = r
            .measured
            .iter()
            .map(|c| p.evaluate(l.lookup(c).unwrap()))
            .fold(0.0, f64::max);
        assert_eq!(r.best_score, brute);
        assert_eq!(r.measured.len(), 120);
    }
}

#[test]
fn exhaustive_random_search_finds_the_global_optimum() {
    let l = Landscape::<f64>::synth(&SynthSpec::binary(2, 7, Shape::Additive)).unwrap();
    let p = target(&l, 0.1);
    let params = TunerParams { budget: 128, early_stop: false, ..TunerParams::default() };
    let r = RandomSearch.run(&l, &p, &params, 3).unwrap();
    assert_eq!(r.best_performance, l.v_min());
}

#[test]
fn disabled_cases_reduce_to_the_requirement_guided_ga() {
    let l = Landscape::<f64>::synth(&SynthSpec::binary(8, 12, Shape::Rugged)).unwrap();
    let p = target(&l, 0.02);
    let params = TunerParams { early_stop: false, ..TunerParams::default() };
    let co = CoTune::with_cases(CaseSwitches::NONE);
    for seed in 0..5 {
        let a = co.run(&l, &p, &params, seed).unwrap();
        let b = Tuner::<f64>::run(&Ga::requirement_guided(), &l, &p, &params, seed).unwrap();
        assert_eq!(a.search_trace(), b.search_trace());
        assert!(a.events.is_empty());
    }
}

#[test]
fn tuners_stay_within_budget_on_partial_tables() {
    let full = Landscape::<f64>::synth(&SynthSpec::binary(6, 9, Shape::Plateau)).unwrap();
    let rows: Vec<_> = full.rows().iter().step_by(3).cloned().collect();
    let l = Landscape::new(Space::new(full.space().options.clone()), rows).unwrap();
    let p = target(&l, 0.05);
    let params = TunerParams { budget: 100, early_stop: false, ..TunerParams::default() };
    let tuners: Vec<Box<dyn Tuner<f64>>> = vec![
        Box::new(CoTune::default()),
        Box::new(Ga::requirement_guided()),
        Box::new(Ga::performance_guided()),
        Box::new(RandomSearch),
    ];
    for t in &tuners {
        let r = t.run(&l, &p, &params, 12).unwrap();
        let distinct: HashSet<_> = r.measured.iter().collect();
        assert_eq!(distinct.len(), r.measured.len());
        assert!(r.budget_used <= 100, "{}", t.name());
        assert!(r.measured.iter().all(|c| l.contains(c)));
    }
}
