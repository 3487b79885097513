//! Synthetic workloads shared by the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toxgate_core::{CommentRecord, Corpus, LabelRow};

const BENIGN: &[&str] = &[
    "article", "edit", "source", "page", "history", "thanks", "citation", "section", "talk",
    "discussion", "reference", "image", "template", "user", "wikipedia", "policy", "review",
];
const ABUSIVE: &[&str] = &["idiot", "stupid", "moron", "loser", "hate", "kill", "crap", "dumb"];

/// `n` comments of 5-40 words; roughly one in ten is abusive.
pub fn synthetic_corpus(n: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|i| {
            let toxic = rng.gen_bool(0.1);
            let len = rng.gen_range(5..40);
            let words: Vec<&str> = (0..len)
                .map(|_| {
                    if toxic && rng.gen_bool(0.3) {
                        ABUSIVE[rng.gen_range(0..ABUSIVE.len())]
                    } else {
                        BENIGN[rng.gen_range(0..BENIGN.len())]
                    }
                })
                .collect();
            let mut labels = [false; 6];
            labels[0] = toxic;
            labels[2] = toxic && rng.gen_bool(0.5);
            labels[4] = toxic && rng.gen_bool(0.5);
            labels[1] = toxic && rng.gen_bool(0.1);
            CommentRecord {
                id: format!("{i:016x}"),
                text: words.join(" "),
                labels: LabelRow(labels),
            }
        })
        .collect();
    Corpus::new(records)
}
