mod oracle;

use std::collections::HashSet;

use argimg_core::eval::{
    average_precision, evaluate, fleiss_kappa, fleiss_kappa_counts, mean_ap, paired_t_test, precision_at_k,
    EvalConfig, Qrels,
};
use argimg_core::{Annotation, Label, RunEntry, Stance};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_qrels(rng: &mut ChaCha8Rng, topics: &[u32], pool: usize) -> Qrels {
    let mut q = Qrels::new();
    for &t in topics {
        for i in 0..pool {
            if rng.random_bool(0.6) {
                let label = Label::ALL[rng.random_range(0..4)];
                q.insert((t, format!("img{i:03}")), label);
            }
        }
    }
    q
}

fn random_run(rng: &mut ChaCha8Rng, topics: &[u32], pool: usize) -> Vec<RunEntry> {
    let mut run = Vec::new();
    for &t in topics {
        for stance in Stance::BOTH {
            // some groups are missing entirely
            if rng.random_bool(0.1) {
                continue;
            }
            let mut ids: Vec<usize> = (0..pool).collect();
            ids.shuffle(rng);
            let depth = rng.random_range(1..=15);
            for (r, id) in ids.into_iter().take(depth).enumerate() {
                run.push(RunEntry {
                    topic_id: t,
                    stance,
                    image_id: format!("img{id:03}"),
                    rank: r as u32 + 1,
                    score: (100 - r) as f64,
                    tag: "rand".into(),
                });
            }
        }
    }
    run
}

fn relevant_set(q: &Qrels, topic: u32, stance: Stance, neutral: bool) -> HashSet<String> {
    q.iter()
        .filter(|((t, _), l)| {
            *t == topic
                && match (**l, stance) {
                    (Label::Pro, Stance::Pro) | (Label::Con, Stance::Con) => true,
                    (Label::Neutral, _) => neutral,
                    _ => false,
                }
        })
        .map(|((_, id), _)| id.clone())
        .collect()
}

#[test]
fn metrics_equal_brute_force_on_random_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let topics = [1u32, 2, 3, 5];
    for _ in 0..100 {
        let qrels = random_qrels(&mut rng, &topics, 25);
        let run = random_run(&mut rng, &topics, 25);
        let neutral = rng.random_bool(0.5);
        let cfg = EvalConfig { neutral_relevant: neutral, ap_depth: Some(10) };
        let mut ap_sum = 0.0;
        let mut p10_sum = 0.0;
        for &t in &topics {
            for stance in Stance::BOTH {
                let ranked: Vec<String> = run
                    .iter()
                    .filter(|e| e.topic_id == t && e.stance == stance)
                    .map(|e| e.image_id.clone())
                    .collect();
                let refs: Vec<&str> = ranked.iter().map(String::as_str).collect();
                let rel = relevant_set(&qrels, t, stance, neutral);
                for k in [1, 5, 10] {
                    assert_eq!(
                        precision_at_k(&refs, &qrels, t, stance, k, neutral),
                        oracle::precision_at_k(&ranked, &rel, k)
                    );
                }
                let ap = average_precision(&refs, &qrels, t, stance, Some(10), neutral);
                let want = oracle::average_precision(&ranked, &rel, 10);
                assert_eq!(ap, want);
                let full = average_precision(&refs, &qrels, t, stance, None, neutral);
                assert_eq!(full, oracle::average_precision(&ranked, &rel, usize::MAX));
                ap_sum += want;
                p10_sum += oracle::precision_at_k(&ranked, &rel, 10);
            }
        }
        let groups = (topics.len() * 2) as f64;
        assert_eq!(mean_ap(&run, &qrels, &topics, &cfg), ap_sum / groups);
        let report = evaluate(&run, &qrels, &topics, None, &cfg).unwrap();
        assert_eq!(report.precision_at_10, p10_sum / groups);
        assert_eq!(report.groups, topics.len() * 2);
    }
}

fn annotations(items: &[[Label; 3]]) -> Vec<Annotation> {
    items
        .iter()
        .enumerate()
        .flat_map(|(i, labels)| {
            labels.iter().enumerate().map(move |(a, &label)| Annotation {
                image_id: format!("img{i}"),
                topic_id: 1,
                annotator_id: format!("a{a}"),
                label,
            })
        })
        .collect()
}

#[test]
fn kappa_worked_example_and_perfect_agreement() {
    use Label::*;
    let k = fleiss_kappa(&annotations(&[[Pro, Pro, Con], [Con, Con, Con]]), 3).unwrap();
    assert!((k - 0.25).abs() <= 1e-12, "{k}");
    let k = fleiss_kappa(&annotations(&[[Pro, Pro, Pro], [Con, Con, Con], [Neutral, Neutral, Neutral]]), 3).unwrap();
    assert_eq!(k, 1.0);
}

#[test]
fn kappa_equals_definition_on_random_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let n = rng.random_range(2..30);
        let ratings: Vec<Vec<usize>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(0..4)).collect()).collect();
        let counts: Vec<Vec<usize>> = ratings
            .iter()
            .map(|r| (0..4).map(|c| r.iter().filter(|&&x| x == c).count()).collect())
            .collect();
        let want = oracle::fleiss_kappa(&ratings, 4);
        match fleiss_kappa_counts(&counts, 3) {
            Ok(k) => assert!((k - want).abs() < 1e-12, "{k} vs {want}"),
            Err(_) => assert!(!want.is_finite()),
        }
    }
}

#[test]
fn t_test_worked_example() {
    let a = [2.0, 3.0, 4.0, 5.0, 6.0];
    let b = [1.0, 1.0, 1.0, 1.0, 1.0];
    let t = paired_t_test(&a, &b).unwrap();
    assert!((t.t - 4.2426).abs() < 1e-4, "{}", t.t);
    assert!((t.p - 0.0132).abs() < 1e-4, "{}", t.p);
    let (ot, op) = oracle::paired_t(&a, &b);
    assert!((t.t - ot).abs() < 1e-10 && (t.p - op).abs() < 1e-4);
}

proptest! {
    #[test]
    fn t_test_matches_cdf_oracle(
        pairs in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..60)
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let t = paired_t_test(&a, &b).unwrap();
        let (ot, op) = oracle::paired_t(&a, &b);
        prop_assert!((t.t - ot).abs() <= 1e-9 * ot.abs().max(1.0));
        prop_assert!((t.p - op).abs() <= 1e-4, "{} vs {}", t.p, op);
    }

    #[test]
    fn ap_is_bounded_and_monotone_in_hits(
        rel in proptest::collection::vec(any::<bool>(), 1..20)
    ) {
        let mut qrels = Qrels::new();
        let ids: Vec<String> = (0..rel.len()).map(|i| format!("i{i}")).collect();
        for (id, &r) in ids.iter().zip(&rel) {
            qrels.insert((1, id.clone()), if r { Label::Pro } else { Label::Con });
        }
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let ap = average_precision(&refs, &qrels, 1, Stance::Pro, None, false);
        prop_assert!((0.0..=1.0).contains(&ap));
        // moving relevant items to the front cannot lower AP
        let mut sorted: Vec<&str> = refs.clone();
        sorted.sort_by_key(|id| qrels[&(1, id.to_string())] != Label::Pro);
        let best = average_precision(&sorted, &qrels, 1, Stance::Pro, None, false);
        prop_assert!(best + 1e-12 >= ap);
        if rel.iter().any(|&r| r) {
            prop_assert!((best - 1.0).abs() < 1e-12);
        }
    }
}
