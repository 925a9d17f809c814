//! Diversity and serendipity of recommendation lists, and a greedy re-ranker
//! trading accuracy against diversity.
//!
//! Hashtag similarity is the cosine of tweet-level co-occurrence vectors:
//! entry `(a, b)` counts the tweets carrying both `a` and `b`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::Serialize;

use crate::corpus::{Corpus, TagId, TweetId, UserId};
use crate::fxmap::{map_with_capacity, pair_key};
use crate::recommend::{cosine, RankedList, Scored, UsageIndex};

#[derive(Debug, Clone, PartialEq)]
pub struct HashtagSimilarityIndex {
    vectors: Vec<Vec<(TagId, u32)>>,
}

impl HashtagSimilarityIndex {
    /// Co-occurrence over the tweets accepted by `include`.
    pub fn build(corpus: &Corpus, mut include: impl FnMut(TweetId) -> bool) -> Self {
        let mut counts = map_with_capacity::<u64, u32>(corpus.n_tags());
        let assignments = corpus.assignments();
        let mut start = 0;
        while start < assignments.len() {
            let tweet = assignments[start].tweet;
            let len = assignments[start..]
                .iter()
                .take_while(|a| a.tweet == tweet)
                .count();
            if len > 1 && include(tweet) {
                let group = &assignments[start..start + len];
                for a in group {
                    for b in group.iter().filter(|b| b.tag != a.tag) {
                        *counts.entry(pair_key(a.tag.0, b.tag.0)).or_insert(0) += 1;
                    }
                }
            }
            start += len;
        }
        let mut vectors: Vec<Vec<(TagId, u32)>> = alloc::vec![Vec::new(); corpus.n_tags()];
        for (key, n) in counts {
            vectors[(key >> 32) as usize].push((TagId(key as u32), n));
        }
        for v in &mut vectors {
            v.sort_unstable_by_key(|&(t, _)| t);
        }
        Self { vectors }
    }

    /// Co-occurrence over every tweet.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self::build(corpus, |_| true)
    }

    pub fn vector(&self, tag: TagId) -> &[(TagId, u32)] {
        self.vectors.get(tag.index()).map_or(&[], Vec::as_slice)
    }
}

/// Cosine of the two co-occurrence vectors, 0 if either is empty.
pub fn pairwise_similarity(index: &HashtagSimilarityIndex, a: TagId, b: TagId) -> f64 {
    cosine(index.vector(a), index.vector(b)).clamp(0.0, 1.0)
}

/// One minus the mean pairwise similarity; 0 for lists shorter than two.
pub fn intra_list_diversity(tags: &[TagId], index: &HashtagSimilarityIndex) -> f64 {
    if tags.len() < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (i, &a) in tags.iter().enumerate() {
        for &b in &tags[i + 1..] {
            sum += pairwise_similarity(index, a, b);
            pairs += 1;
        }
    }
    1.0 - sum / pairs as f64
}

/// Share of recommended hashtags outside the user's individual and social
/// history. An empty list scores 0.
pub fn serendipity(tags: &[TagId], individual: &BTreeSet<TagId>, social: &BTreeSet<TagId>) -> f64 {
    if tags.is_empty() {
        return 0.0;
    }
    let novel = tags
        .iter()
        .filter(|t| !individual.contains(t) && !social.contains(t))
        .count();
    novel as f64 / tags.len() as f64
}

/// Hashtags used by the user, and by the user's followees, before `ref_time`.
pub fn user_bubble(
    index: &UsageIndex<'_>,
    user: UserId,
    ref_time: i64,
) -> (BTreeSet<TagId>, BTreeSet<TagId>) {
    let individual = index.prior_usages(user, ref_time).map(|(t, _)| t).collect();
    let social = index
        .corpus()
        .followees(user)
        .unwrap_or(&[])
        .iter()
        .flat_map(|&f| index.prior_usages(f, ref_time).map(|(t, _)| t))
        .collect();
    (individual, social)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("lambda must lie in [0, 1], got {0}")]
pub struct InvalidLambda(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HybridParams {
    /// Weight on accuracy; `1 - lambda` goes to dissimilarity.
    pub lambda: f64,
}

impl Default for HybridParams {
    fn default() -> Self {
        Self { lambda: 0.7 }
    }
}

impl HybridParams {
    pub fn new(lambda: f64) -> Result<Self, InvalidLambda> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(Self { lambda })
        } else {
            Err(InvalidLambda(lambda))
        }
    }
}

/// Min-max rescales scores to [0, 1], keeping the order. Equal scores map
/// to 1.
pub fn normalize_scores(list: &RankedList) -> RankedList {
    let (lo, hi) = list
        .items
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.score), hi.max(s.score))
        });
    let span = hi - lo;
    RankedList {
        items: list
            .items
            .iter()
            .map(|s| Scored {
                tag: s.tag,
                score: if span > 0.0 {
                    (s.score - lo) / span
                } else {
                    1.0
                },
            })
            .collect(),
    }
}

/// Greedy selection of up to `k` candidates maximizing
/// `lambda * accuracy + (1 - lambda) * (1 - max similarity to the picks so far)`.
///
/// Candidate scores are taken as accuracies in [0, 1]. Ties go to the
/// earlier candidate, so `lambda = 1` returns the input prefix unchanged.
pub fn rerank_hybrid(
    candidates: &RankedList,
    k: usize,
    params: &HybridParams,
    index: &HashtagSimilarityIndex,
) -> RankedList {
    let lambda = params.lambda;
    let mut remaining: Vec<(Scored, f64)> = candidates.items.iter().map(|&c| (c, 0.0)).collect();
    let mut picked: Vec<Scored> = Vec::with_capacity(k.min(remaining.len()));
    while picked.len() < k && !remaining.is_empty() {
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (i, (c, max_sim)) in remaining.iter().enumerate() {
            let value = lambda * c.score + (1.0 - lambda) * (1.0 - max_sim);
            if value > best_value {
                best = i;
                best_value = value;
            }
        }
        let (chosen, _) = remaining.remove(best);
        if lambda < 1.0 {
            for (c, max_sim) in &mut remaining {
                *max_sim = max_sim.max(pairwise_similarity(index, chosen.tag, c.tag));
            }
        }
        picked.push(chosen);
    }
    RankedList { items: picked }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusBuilder;
    use alloc::format;

    /// Four tweets: {a, b}, {a, b}, {c, d}, {a, c}.
    fn four_tweets() -> Corpus {
        let mut b = CorpusBuilder::new();
        for (i, tags) in [["a", "b"], ["a", "b"], ["c", "d"], ["a", "c"]]
            .iter()
            .enumerate()
        {
            let tweet = format!("t{i}");
            for t in tags {
                b.add_assignment("u", &tweet, 10 + i as i64, t).unwrap();
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn co_occurrence_vectors() {
        let c = four_tweets();
        let idx = HashtagSimilarityIndex::from_corpus(&c);
        let id = |n: &str| c.tag_id(n).unwrap();
        assert_eq!(idx.vector(id("a")), [(id("b"), 2), (id("c"), 1)]);
        assert_eq!(idx.vector(id("c")), [(id("a"), 1), (id("d"), 1)]);
    }

    #[test]
    fn similarity_fixture() {
        // a = (b:2, c:1), b = (a:2), c = (a:1, d:1), d = (c:1).
        // sim(b, c) = (2·1) / (2·√2) = 1/√2; sim(a, b) = 0; sim(b, d) = 0.
        // sim(a, d) = (1·1) / (√5·1) = 1/√5.
        let c = four_tweets();
        let idx = HashtagSimilarityIndex::from_corpus(&c);
        let id = |n: &str| c.tag_id(n).unwrap();
        assert!(
            (pairwise_similarity(&idx, id("b"), id("c")) - 1.0 / libm::sqrt(2.0)).abs() < 1e-12
        );
        assert_eq!(pairwise_similarity(&idx, id("a"), id("b")), 0.0);
        assert!(
            (pairwise_similarity(&idx, id("a"), id("d")) - 1.0 / libm::sqrt(5.0)).abs() < 1e-12
        );
        assert!((pairwise_similarity(&idx, id("a"), id("a")) - 1.0).abs() < 1e-12);

        // ILD over {b, c, d}: pairs bc = 1/√2, bd = 0, cd = 0.
        let ild = intra_list_diversity(&[id("b"), id("c"), id("d")], &idx);
        assert!((ild - (1.0 - (1.0 / libm::sqrt(2.0)) / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn diversity_extremes() {
        let c = four_tweets();
        let idx = HashtagSimilarityIndex::from_corpus(&c);
        let id = |n: &str| c.tag_id(n).unwrap();
        assert_eq!(intra_list_diversity(&[id("a")], &idx), 0.0);
        assert_eq!(intra_list_diversity(&[], &idx), 0.0);
        assert_eq!(intra_list_diversity(&[id("a"), id("b")], &idx), 1.0);
        assert!(intra_list_diversity(&[id("b"), id("b")], &idx).abs() < 1e-12);
    }

    #[test]
    fn tweet_filter_applies() {
        let c = four_tweets();
        let last = c.tweet_id("t3").unwrap();
        let idx = HashtagSimilarityIndex::build(&c, |t| t != last);
        assert_eq!(
            idx.vector(c.tag_id("a").unwrap()),
            [(c.tag_id("b").unwrap(), 2)]
        );
    }

    #[test]
    fn serendipity_fractions() {
        let set = |xs: &[u32]| xs.iter().map(|&x| TagId(x)).collect::<BTreeSet<_>>();
        let list: Vec<TagId> = (0..5).map(TagId).collect();
        assert_eq!(serendipity(&list, &set(&[0, 1, 2, 3, 4]), &set(&[])), 0.0);
        assert_eq!(serendipity(&list, &set(&[]), &set(&[])), 1.0);
        assert!((serendipity(&list, &set(&[0, 1]), &set(&[1, 2])) - 0.4).abs() < 1e-12);
        assert_eq!(serendipity(&[], &set(&[]), &set(&[])), 0.0);
    }

    fn scored(items: &[(TagId, f64)]) -> RankedList {
        RankedList {
            items: items
                .iter()
                .map(|&(tag, score)| Scored { tag, score })
                .collect(),
        }
    }

    #[test]
    fn lambda_one_keeps_order() {
        let c = four_tweets();
        let idx = HashtagSimilarityIndex::from_corpus(&c);
        let list = scored(&[
            (TagId(2), 1.0),
            (TagId(0), 0.5),
            (TagId(1), 0.5),
            (TagId(3), 0.0),
        ]);
        assert_eq!(
            rerank_hybrid(&list, 4, &HybridParams { lambda: 1.0 }, &idx),
            list
        );
        assert_eq!(
            rerank_hybrid(&list, 2, &HybridParams { lambda: 1.0 }, &idx),
            list.truncated(2)
        );
    }

    #[test]
    fn near_duplicate_is_demoted() {
        // Candidates b (1.0), c (0.9), d (0.5). After b: sim(b,c) = 1/√2, sim(b,d) = 0.
        // lambda = 0: c -> 1 - 0.707 = 0.293, d -> 1.0, so d comes second.
        let c = four_tweets();
        let idx = HashtagSimilarityIndex::from_corpus(&c);
        let id = |n: &str| c.tag_id(n).unwrap();
        let list = scored(&[(id("b"), 1.0), (id("c"), 0.9), (id("d"), 0.5)]);
        let out = rerank_hybrid(&list, 3, &HybridParams { lambda: 0.0 }, &idx);
        assert_eq!(out.tags(), [id("b"), id("d"), id("c")]);
    }

    #[test]
    fn single_candidate_unchanged() {
        let idx = HashtagSimilarityIndex::from_corpus(&four_tweets());
        let list = scored(&[(TagId(1), 0.3)]);
        assert_eq!(
            rerank_hybrid(&list, 5, &HybridParams { lambda: 0.2 }, &idx),
            list
        );
    }

    #[test]
    fn normalization() {
        let list = scored(&[(TagId(0), -1.0), (TagId(1), -2.0), (TagId(2), -3.0)]);
        let n = normalize_scores(&list);
        assert_eq!(
            n.items.iter().map(|s| s.score).collect::<Vec<_>>(),
            [1.0, 0.5, 0.0]
        );
        let flat = normalize_scores(&scored(&[(TagId(0), 4.0), (TagId(1), 4.0)]));
        assert!(flat.items.iter().all(|s| s.score == 1.0));
    }

    #[test]
    fn lambda_validation() {
        assert!(HybridParams::new(1.01).is_err());
        assert!(HybridParams::new(-0.1).is_err());
        assert!(HybridParams::new(0.3).is_ok());
    }
}
