use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{Annotation, Label};

/// Fleiss' kappa from per-item category counts; every row must sum to
/// `raters`.
pub fn fleiss_kappa_counts(counts: &[Vec<usize>], raters: usize) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::InvalidArgument("kappa needs at least one item"));
    }
    if raters < 2 {
        return Err(Error::InvalidArgument("kappa needs at least two raters"));
    }
    let categories = counts[0].len();
    let n = raters as f64;
    let items = counts.len() as f64;
    let mut p_bar = 0.0;
    let mut totals = alloc::vec![0.0f64; categories];
    for row in counts {
        let sum: usize = row.iter().sum();
        if row.len() != categories || sum != raters {
            return Err(Error::InvalidArgument("every item needs exactly `raters` ratings"));
        }
        let sq: f64 = row.iter().map(|&c| (c * c) as f64).sum();
        p_bar += (sq - n) / (n * (n - 1.0));
        for (t, &c) in totals.iter_mut().zip(row) {
            *t += c as f64;
        }
    }
    p_bar /= items;
    let p_e: f64 = totals.iter().map(|t| { let r = t / (items * n); r * r }).sum();
    if libm::fabs(1.0 - p_e) < 1e-15 {
        return if (p_bar - 1.0).abs() < 1e-15 {
            Ok(1.0)
        } else {
            Err(Error::UndefinedKappa)
        };
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Fleiss' kappa over the four relevance labels, one item per
/// `(topic, image)`.
pub fn fleiss_kappa(annotations: &[Annotation], raters: usize) -> Result<f64> {
    let mut items: BTreeMap<(u32, &String), Vec<usize>> = BTreeMap::new();
    for a in annotations {
        items
            .entry((a.topic_id, &a.image_id))
            .or_insert_with(|| alloc::vec![0; Label::ALL.len()])[a.label.index()] += 1;
    }
    for ((topic_id, image_id), row) in &items {
        let found: usize = row.iter().sum();
        if found != raters {
            return Err(Error::RaterCount {
                topic_id: *topic_id,
                image_id: (*image_id).clone(),
                found,
                expected: raters,
            });
        }
    }
    let counts: Vec<Vec<usize>> = items.into_values().collect();
    fleiss_kappa_counts(&counts, raters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    fn anns(items: &[[Label; 3]]) -> Vec<Annotation> {
        let mut out = Vec::new();
        for (i, labels) in items.iter().enumerate() {
            for (r, l) in labels.iter().enumerate() {
                out.push(Annotation {
                    image_id: alloc::format!("img{i}"),
                    topic_id: 1,
                    annotator_id: alloc::format!("r{r}"),
                    label: *l,
                });
            }
        }
        out
    }

    #[test]
    fn hand_derived_example() {
        // P̄ = 2/3, P̄e = 5/9 => κ = 1/4
        let k = fleiss_kappa(&anns(&[[Pro, Pro, Con], [Con, Con, Con]]), 3).unwrap();
        assert!((k - 0.25).abs() < 1e-12);
    }

    #[test]
    fn perfect_agreement() {
        let k = fleiss_kappa(&anns(&[[Pro, Pro, Pro], [Con, Con, Con], [OffTopic; 3]]), 3).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
        // single category everywhere: P̄e == 1
        assert_eq!(fleiss_kappa(&anns(&[[Pro; 3], [Pro; 3]]), 3).unwrap(), 1.0);
    }

    #[test]
    fn wrong_rater_count() {
        let mut a = anns(&[[Pro, Pro, Con]]);
        a.pop();
        assert!(matches!(fleiss_kappa(&a, 3), Err(Error::RaterCount { found: 2, .. })));
    }

    #[test]
    fn invariant_under_category_relabeling() {
        let items = [[Pro, Con, Con], [Neutral, Neutral, OffTopic], [Pro, Pro, Pro], [Con, Neutral, Pro]];
        let k = fleiss_kappa(&anns(&items), 3).unwrap();
        let swap = |l: Label| match l {
            Pro => Neutral,
            Neutral => OffTopic,
            OffTopic => Con,
            Con => Pro,
        };
        let relabeled: Vec<[Label; 3]> = items.iter().map(|t| t.map(swap)).collect();
        let k2 = fleiss_kappa(&anns(&relabeled), 3).unwrap();
        assert!((k - k2).abs() < 1e-12);
    }
}
