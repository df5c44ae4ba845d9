//! Relevance judgments and run evaluation: annotation curation, precision
//! at k, (mean) average precision, Fleiss' kappa and the paired t-test.

pub mod kappa;
pub mod metrics;
pub mod qrels;
pub mod ttest;

pub use kappa::{fleiss_kappa, fleiss_kappa_counts};
pub use metrics::{average_precision, evaluate, Comparison, mean_ap, precision_at_k, EvalConfig, EvalReport, GroupMetrics};
pub use qrels::{curate, curate_all, relevance, Qrels};
pub use ttest::{paired_t_test, regularized_incomplete_beta, student_t_two_sided_p, TTest};
