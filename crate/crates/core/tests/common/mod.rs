#![allow(dead_code)]

use cotune_core::requirement::{Fragment, FragmentKind, Proposition};
use rand::Rng;

/// A random valid monotone proposition on `[lo, hi]` with 1..=`max_fragments`
/// fragments whose widths are at least `(hi - lo) / 1000`.
pub fn random_proposition<R: Rng>(rng: &mut R, lo: f64, hi: f64, max_fragments: usize) -> Proposition<f64> {
    let n = rng.gen_range(1..=max_fragments);
    let span = hi - lo;
    let mut cuts: Vec<f64> = loop {
        let mut c: Vec<f64> = (1..n).map(|_| lo + span * rng.gen_range(0.0..1.0)).collect();
        c.sort_by(f64::total_cmp);
        let mut edges = vec![lo];
        edges.extend(&c);
        edges.push(hi);
        if edges.windows(2).all(|w| w[1] - w[0] >= span / 1000.0) {
            break edges;
        }
    };
    cuts.dedup();
    let mut scores: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(0.0..=1.0)).collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    let frags = (0..n)
        .map(|i| {
            let (a, b) = (scores[2 * i], scores[2 * i + 1]);
            match rng.gen_range(0..3) {
                0 => Fragment::constant(cuts[i], cuts[i + 1], a),
                1 => Fragment::new(FragmentKind::S, cuts[i], cuts[i + 1], a, b),
                // G can only be flat under a non-increasing requirement
                _ => Fragment::new(FragmentKind::G, cuts[i], cuts[i + 1], a, a),
            }
        })
        .collect();
    Proposition::new(lo, hi, frags).expect("generator builds valid propositions")
}

/// Performance values spread over `[lo, hi]`.
pub fn spread<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}
