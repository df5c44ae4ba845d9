mod oracle;

use argimg_core::bm25::{Bm25Params, Index, DEFAULT_MAX_CHARS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_corpus(rng: &mut ChaCha8Rng, docs: usize, vocab: usize) -> Vec<(String, String)> {
    (0..docs)
        .map(|i| {
            let len = rng.random_range(3..40);
            let words: Vec<String> = (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect();
            (format!("doc{i:02}"), words.join(" "))
        })
        .collect()
}

fn random_query(rng: &mut ChaCha8Rng, vocab: usize) -> Vec<String> {
    let len = rng.random_range(1..6);
    // vocab + 3 leaves room for terms absent from the corpus
    (0..len).map(|_| format!("w{}", rng.random_range(0..vocab + 3))).collect()
}

#[test]
fn scores_and_order_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let params = Bm25Params::default();
    for round in 0..5 {
        let corpus = toy_corpus(&mut rng, 20, 25);
        let index = Index::build(corpus.iter().map(|(i, t)| (i.as_str(), t.as_str())), DEFAULT_MAX_CHARS).unwrap();
        let docs: Vec<Vec<String>> = corpus.iter().map(|(_, t)| oracle::naive_terms(t)).collect();
        let ids: Vec<String> = corpus.iter().map(|(i, _)| i.clone()).collect();
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let q = random_query(&mut rng, 25);
            let expected = oracle::bm25_scores(&docs, &q, params.k1, params.b);
            for (ord, e) in expected.iter().enumerate() {
                worst = worst.max((index.score(&q, ord, params) - e).abs());
            }
            let got: Vec<(String, f64)> = index
                .retrieve(&q, 50, params)
                .into_iter()
                .map(|s| (s.image_id, s.score))
                .collect();
            let want = oracle::bm25_ranking(&ids, &expected, 50);
            assert_eq!(
                got.iter().map(|g| &g.0).collect::<Vec<_>>(),
                want.iter().map(|w| &w.0).collect::<Vec<_>>(),
                "round {round}, query {q:?}"
            );
            for (g, w) in got.iter().zip(&want) {
                worst = worst.max((g.1 - w.1).abs());
            }
        }
        assert!(worst <= 1e-9, "max abs difference {worst}");
    }
}

#[test]
fn truncation_counts_unicode_characters() {
    let text = "é".repeat(10) + " tail";
    let index = Index::build([("a", text.as_str())], 10).unwrap();
    assert_eq!(index.doc_len(), &[1]);
    let index = Index::build([("a", text.as_str())], 4096).unwrap();
    assert_eq!(index.doc_len(), &[2]);
}

#[test]
fn k_limits_and_zero_scores_are_dropped() {
    let index = Index::build([("a", "x y"), ("b", "x"), ("c", "z")], 100).unwrap();
    let q = vec!["x".to_string()];
    let hits = index.retrieve(&q, 1, Bm25Params::default());
    assert_eq!(hits.len(), 1);
    let hits = index.retrieve(&q, 10, Bm25Params::default());
    assert_eq!(hits.iter().map(|h| h.image_id.as_str()).collect::<Vec<_>>(), ["b", "a"]);
    assert!(index.retrieve(&["nothing".to_string()], 10, Bm25Params::default()).is_empty());
}
