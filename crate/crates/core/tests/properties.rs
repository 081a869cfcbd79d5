mod common;

use cotune_core::coevolution::{escape_case2, relax_case0, tighten_case1, MutationBudget};
use cotune_core::entropy::kde;
use cotune_core::evolution::{preserve_top, Candidate, Population};
use cotune_core::landscape::Configuration;
use cotune_core::requirement::{Proposition, PropositionEncoding};
use cotune_core::tuners::theta_from_weights;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn prop_from_seed(seed: u64) -> Proposition<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    common::random_proposition(&mut rng, 0.0, 10.0, 6)
}

proptest! {
    #[test]
    fn evaluation_is_bounded_and_non_increasing(seed in any::<u64>(), a in -5.0..15.0f64, b in -5.0..15.0f64) {
        let p = prop_from_seed(seed);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (s_lo, s_hi) = (p.evaluate(lo), p.evaluate(hi));
        prop_assert!((0.0..=1.0).contains(&s_lo));
        prop_assert!(s_lo >= s_hi);
    }

    #[test]
    fn encoding_round_trips(seed in any::<u64>()) {
        let p = prop_from_seed(seed);
        let text = p.encode().to_string();
        let enc = PropositionEncoding::<f64>::parse(&text).unwrap();
        let back = Proposition::decode(&enc, &p.scores(), p.v_min(), p.v_max()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn json_round_trips(seed in any::<u64>()) {
        let p = prop_from_seed(seed);
        prop_assert_eq!(Proposition::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn theta_is_a_probability(w_a in 0.0..10.0f64, w_t in 0.0..10.0f64) {
        let t = theta_from_weights(w_a, w_t).theta;
        prop_assert!((0.0..=1.0).contains(&t));
    }

    #[test]
    fn relax_widens_and_tighten_narrows(seed in any::<u64>()) {
        let p = prop_from_seed(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let perfs = common::spread(&mut rng, 10, 0.0, 10.0);
        if let Ok(r) = relax_case0(&p, &perfs, &mut rng) {
            prop_assert!(r.proposition.integral() > p.integral());
            prop_assert!(r.proposition.validate().is_empty());
        }
        if let Ok(t) = tighten_case1(&p, &perfs, &mut rng) {
            prop_assert!(t.proposition.integral() < p.integral());
            prop_assert!(t.proposition.validate().is_empty());
        }
    }

    #[test]
    fn escape_returns_valid_argmin(seed in any::<u64>()) {
        let p = prop_from_seed(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perfs = common::spread(&mut rng, 10, 0.0, 10.0);
        let e = escape_case2(&p, &perfs, MutationBudget::for_population(4), &mut rng).unwrap();
        prop_assert!(e.proposition.validate().is_empty());
        prop_assert!(e.pool_entropies.iter().all(|h| !e.new_entropy.exceeds(h)));
    }

    #[test]
    fn preserve_top_keeps_the_best(perfs in prop::collection::vec(0.0..100.0f64, 2..30), n in 1usize..8) {
        let cands: Vec<Candidate<f64>> = perfs.iter().enumerate().map(|(i, &v)| Candidate {
            config: Configuration(vec![i as u32]),
            performance: v,
            order: i as u64,
        }).collect();
        let fit = |v: f64| -v;
        let pop = Population::from_candidates(n, &cands[..1], &fit);
        let kept = preserve_top(&pop, &cands[1..], &fit);
        let mut sorted = perfs.clone();
        sorted.sort_by(f64::total_cmp);
        let want: Vec<f64> = sorted.into_iter().take(n).collect();
        prop_assert_eq!(kept.performances(), want);
    }

    #[test]
    fn density_has_unit_mass(xs in prop::collection::vec(0.0..1.0f64, 2..40)) {
        let d = kde(&xs).unwrap();
        if !d.is_degenerate() {
            prop_assert!((d.total_mass() - 1.0).abs() < 1e-3, "{}", d.total_mass());
        }
    }
}
