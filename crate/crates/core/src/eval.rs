//! Leave-latest-out evaluation of the recommenders.
//!
//! Each seed user's most recent hashtagged tweet is held out. The user is
//! queried at that tweet's timestamp, so only strictly earlier usages (by
//! anyone) are visible. Metrics are macro-averaged over users in user-id
//! order, which keeps the floating-point sums reproducible.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::Serialize;

use crate::beyond::{
    intra_list_diversity, normalize_scores, rerank_hybrid, serendipity, user_bubble,
    HashtagSimilarityIndex, HybridParams,
};
use crate::corpus::{Corpus, TagId, TweetId, UserId};
use crate::recommend::{recommend, Algorithm, RankedList, RecommenderParams, UsageIndex};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("the test set is empty")]
    EmptyTestSet,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("no seed user has a hashtagged tweet before their latest one")]
    NoEvaluableUsers,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitUser {
    pub user: UserId,
    pub test_tweet: TweetId,
    pub ref_time: i64,
    /// Hashtags of the held-out tweet, sorted.
    pub test_hashtags: Vec<TagId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalSplit {
    /// Evaluable users in id order.
    pub users: Vec<SplitUser>,
}

/// Holds out each seed user's latest hashtagged tweet. Users without an
/// earlier hashtagged tweet (strictly before it in time) are skipped.
pub fn make_split(corpus: &Corpus) -> EvalSplit {
    // Latest hashtagged tweet and earliest hashtag timestamp per user.
    let mut latest: Vec<Option<(i64, TweetId)>> = alloc::vec![None; corpus.n_users()];
    let mut earliest: Vec<Option<i64>> = alloc::vec![None; corpus.n_users()];
    for a in corpus.assignments() {
        if !corpus.is_seed(a.user) {
            continue;
        }
        let u = a.user.index();
        latest[u] = Some((a.timestamp, a.tweet));
        earliest[u].get_or_insert(a.timestamp);
    }

    let mut tests: Vec<Vec<TagId>> = alloc::vec![Vec::new(); corpus.n_users()];
    for a in corpus.assignments() {
        if latest[a.user.index()].is_some_and(|(_, t)| t == a.tweet) {
            tests[a.user.index()].push(a.tag);
        }
    }

    let users = corpus
        .seeds()
        .iter()
        .filter_map(|&user| {
            let (ref_time, test_tweet) = latest[user.index()]?;
            if earliest[user.index()]? >= ref_time {
                return None;
            }
            let mut test_hashtags = core::mem::take(&mut tests[user.index()]);
            test_hashtags.sort_unstable();
            Some(SplitUser {
                user,
                test_tweet,
                ref_time,
                test_hashtags,
            })
        })
        .collect();
    EvalSplit { users }
}

/// Number of the first `k` recommendations found in the test set.
pub fn hits_at_k(recommended: &[TagId], test_hashtags: &[TagId], k: usize) -> usize {
    recommended
        .iter()
        .take(k)
        .filter(|t| test_hashtags.contains(t))
        .count()
}

/// `(hits / k, hits / |test|)`.
pub fn precision_recall_at_k(
    recommended: &[TagId],
    test_hashtags: &[TagId],
    k: usize,
) -> Result<(f64, f64), EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    if test_hashtags.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let hits = hits_at_k(recommended, test_hashtags, k) as f64;
    Ok((hits / k as f64, hits / test_hashtags.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    pub k_max: usize,
    pub params: RecommenderParams,
    /// Re-rank a candidate pool with the hybrid re-ranker before cutting.
    pub rerank: Option<HybridParams>,
    /// Candidates fetched per query when re-ranking.
    pub candidate_pool: usize,
    /// Report intra-list diversity and serendipity.
    pub beyond_accuracy: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k_max: 10,
            params: RecommenderParams::default(),
            rerank: None,
            candidate_pool: 50,
            beyond_accuracy: false,
        }
    }
}

/// Shared read-only state for evaluating many users.
pub struct EvalContext<'c> {
    pub usage: UsageIndex<'c>,
    pub similarity: Option<HashtagSimilarityIndex>,
    pub config: EvalConfig,
}

impl<'c> EvalContext<'c> {
    /// The similarity index, when needed, is built from every tweet that is
    /// not held out.
    pub fn new(corpus: &'c Corpus, split: &EvalSplit, config: EvalConfig) -> Self {
        let similarity = (config.rerank.is_some() || config.beyond_accuracy).then(|| {
            let held_out: BTreeSet<TweetId> = split.users.iter().map(|u| u.test_tweet).collect();
            HashtagSimilarityIndex::build(corpus, |t| !held_out.contains(&t))
        });
        Self {
            usage: UsageIndex::new(corpus),
            similarity,
            config,
        }
    }

    /// The final list for one query, re-ranked if configured.
    pub fn recommendations(&self, algorithm: Algorithm, user: UserId, ref_time: i64) -> RankedList {
        let k = self.config.k_max;
        let fetch = match self.config.rerank {
            Some(_) => self.config.candidate_pool.max(k),
            None => k,
        };
        let list = recommend(
            &self.usage,
            algorithm,
            user,
            ref_time,
            fetch,
            &self.config.params,
        )
        .expect("split users are seed users");
        match (self.config.rerank, &self.similarity) {
            (Some(params), Some(sim)) => rerank_hybrid(&normalize_scores(&list), k, &params, sim),
            _ => list,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmUserEval {
    pub algorithm: Algorithm,
    /// `hits[k - 1]` is the hit count within the top `k`.
    pub hits: Vec<u32>,
    pub ild: Vec<f64>,
    pub serendipity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserEval {
    pub user: UserId,
    pub test_size: usize,
    pub algorithms: Vec<AlgorithmUserEval>,
}

pub fn evaluate_user(
    ctx: &EvalContext<'_>,
    split_user: &SplitUser,
    algorithms: &[Algorithm],
) -> UserEval {
    let k_max = ctx.config.k_max;
    let bubble = ctx
        .config
        .beyond_accuracy
        .then(|| user_bubble(&ctx.usage, split_user.user, split_user.ref_time));
    let algorithms = algorithms
        .iter()
        .map(|&algorithm| {
            let tags = ctx
                .recommendations(algorithm, split_user.user, split_user.ref_time)
                .tags();
            let hits = (1..=k_max)
                .map(|k| hits_at_k(&tags, &split_user.test_hashtags, k) as u32)
                .collect();
            let (ild, serendipity) = match (&bubble, &ctx.similarity) {
                (Some((individual, social)), Some(sim)) => (1..=k_max)
                    .map(|k| {
                        let top = &tags[..k.min(tags.len())];
                        (
                            intra_list_diversity(top, sim),
                            serendipity(top, individual, social),
                        )
                    })
                    .unzip(),
                _ => (Vec::new(), Vec::new()),
            };
            AlgorithmUserEval {
                algorithm,
                hits,
                ild,
                serendipity,
            }
        })
        .collect();
    UserEval {
        user: split_user.user,
        test_size: split_user.test_hashtags.len(),
        algorithms,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricPoint {
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ild: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub serendipity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmCurve {
    pub algorithm: Algorithm,
    pub points: Vec<MetricPoint>,
}

impl AlgorithmCurve {
    pub fn at(&self, k: usize) -> &MetricPoint {
        &self.points[k - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub n_users_evaluated: usize,
    pub k_max: usize,
    pub algorithms: Vec<AlgorithmCurve>,
    #[serde(skip)]
    pub per_user: Vec<UserEval>,
}

impl EvalReport {
    pub fn curve(&self, algorithm: Algorithm) -> Option<&AlgorithmCurve> {
        self.algorithms.iter().find(|c| c.algorithm == algorithm)
    }
}

/// Macro-averages per-user results. `per_user` must be in a fixed order
/// (user id order for reproducible sums).
pub fn aggregate(
    per_user: Vec<UserEval>,
    algorithms: &[Algorithm],
    config: &EvalConfig,
) -> EvalReport {
    let n = per_user.len() as f64;
    let curves = algorithms
        .iter()
        .enumerate()
        .map(|(ai, &algorithm)| {
            let points = (1..=config.k_max)
                .map(|k| {
                    let (mut p, mut r, mut ild, mut ser) = (0.0, 0.0, 0.0, 0.0);
                    for u in &per_user {
                        let row = &u.algorithms[ai];
                        let hits = f64::from(row.hits[k - 1]);
                        p += hits / k as f64;
                        r += hits / u.test_size as f64;
                        if config.beyond_accuracy {
                            ild += row.ild[k - 1];
                            ser += row.serendipity[k - 1];
                        }
                    }
                    let beyond = config.beyond_accuracy;
                    MetricPoint {
                        k,
                        precision: p / n,
                        recall: r / n,
                        ild: beyond.then_some(ild / n),
                        serendipity: beyond.then_some(ser / n),
                    }
                })
                .collect();
            AlgorithmCurve { algorithm, points }
        })
        .collect();
    EvalReport {
        n_users_evaluated: per_user.len(),
        k_max: config.k_max,
        algorithms: curves,
        per_user,
    }
}

/// Split, query every algorithm for every evaluable user and average.
pub fn evaluate(
    corpus: &Corpus,
    algorithms: &[Algorithm],
    config: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    if config.k_max == 0 {
        return Err(EvalError::ZeroK);
    }
    let split = make_split(corpus);
    if split.users.is_empty() {
        return Err(EvalError::NoEvaluableUsers);
    }
    let ctx = EvalContext::new(corpus, &split, *config);
    let per_user = split
        .users
        .iter()
        .map(|u| evaluate_user(&ctx, u, algorithms))
        .collect();
    Ok(aggregate(per_user, algorithms, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusBuilder;
    use crate::recommend::{bll_activation, BllParams};
    use alloc::vec;

    fn t(x: u32) -> TagId {
        TagId(x)
    }

    #[test]
    fn precision_recall_examples() {
        let rec = [t(0), t(2), t(3), t(1), t(4)];
        assert_eq!(
            precision_recall_at_k(&rec, &[t(0), t(1)], 5).unwrap(),
            (0.4, 1.0)
        );
        assert_eq!(precision_recall_at_k(&rec, &[t(9)], 5).unwrap(), (0.0, 0.0));
        assert_eq!(precision_recall_at_k(&rec, &[t(0)], 1).unwrap(), (1.0, 1.0));
        assert_eq!(
            precision_recall_at_k(&rec, &[t(0), t(1)], 1).unwrap(),
            (1.0, 0.5)
        );
        assert_eq!(
            precision_recall_at_k(&rec, &[], 1),
            Err(EvalError::EmptyTestSet)
        );
        assert_eq!(
            precision_recall_at_k(&rec, &[t(0)], 0),
            Err(EvalError::ZeroK)
        );
        // Short lists still divide by k.
        assert_eq!(
            precision_recall_at_k(&[t(0)], &[t(0)], 4).unwrap(),
            (0.25, 1.0)
        );
    }

    fn three_users() -> Corpus {
        let mut b = CorpusBuilder::new();
        b.add_follow("A", "F").unwrap();
        b.add_seed("B").unwrap();
        b.add_seed("C").unwrap();
        // A: tweets at 1, 2, 3; the last carries x and y.
        b.add_assignment("A", "a1", 1, "x").unwrap();
        b.add_assignment("A", "a2", 2, "z").unwrap();
        b.add_assignment("A", "a3", 3, "x").unwrap();
        b.add_assignment("A", "a3", 3, "y").unwrap();
        // B: a single tweet.
        b.add_assignment("B", "b1", 5, "x").unwrap();
        // C: two tweets at the same second, nothing strictly earlier.
        b.add_assignment("C", "c1", 7, "x").unwrap();
        b.add_assignment("C", "c2", 7, "y").unwrap();
        b.add_assignment("F", "f1", 2, "y").unwrap();
        b.build().unwrap()
    }

    #[test]
    fn split_by_hand() {
        let c = three_users();
        let split = make_split(&c);
        assert_eq!(
            split.users,
            vec![SplitUser {
                user: c.user_id("A").unwrap(),
                test_tweet: c.tweet_id("a3").unwrap(),
                ref_time: 3,
                test_hashtags: vec![c.tag_id("x").unwrap(), c.tag_id("y").unwrap()],
            }]
        );
    }

    #[test]
    fn single_user_report() {
        // A at ref 3: own history x@1, z@2 -> BLL_I ranks z (age 1) over x (age 2).
        // Test {x, y}: BLL_I hits at k=1: 0, k=2: 1.
        // BLL_S: y@2 from F -> hits at k=1: 1.
        let c = three_users();
        let config = EvalConfig {
            k_max: 3,
            ..EvalConfig::default()
        };
        let report = evaluate(&c, &[Algorithm::BllI, Algorithm::BllS], &config).unwrap();
        assert_eq!(report.n_users_evaluated, 1);
        let p = BllParams::default();
        assert!(bll_activation(&[2], 3, &p).unwrap() > bll_activation(&[1], 3, &p).unwrap());

        let i = report.curve(Algorithm::BllI).unwrap();
        let got: Vec<(f64, f64)> = i.points.iter().map(|m| (m.precision, m.recall)).collect();
        assert_eq!(got, vec![(0.0, 0.0), (0.5, 0.5), (1.0 / 3.0, 0.5)]);
        let s = report.curve(Algorithm::BllS).unwrap();
        let got: Vec<(f64, f64)> = s.points.iter().map(|m| (m.precision, m.recall)).collect();
        assert_eq!(got, vec![(1.0, 0.5), (0.5, 0.5), (1.0 / 3.0, 0.5)]);
        assert!(i.points[0].ild.is_none());
    }

    #[test]
    fn no_evaluable_users() {
        let mut b = CorpusBuilder::new();
        b.add_seed("A").unwrap();
        b.add_assignment("A", "t", 1, "x").unwrap();
        let c = b.build().unwrap();
        assert_eq!(
            evaluate(&c, &[Algorithm::BllI], &EvalConfig::default()),
            Err(EvalError::NoEvaluableUsers)
        );
    }

    #[test]
    fn empty_lists_score_zero() {
        // A's followee list is empty, so BLL_S never recommends anything.
        let mut b = CorpusBuilder::new();
        b.add_seed("A").unwrap();
        b.add_assignment("A", "t1", 1, "x").unwrap();
        b.add_assignment("A", "t2", 2, "x").unwrap();
        let c = b.build().unwrap();
        let report = evaluate(&c, &[Algorithm::BllS], &EvalConfig::default()).unwrap();
        let curve = report.curve(Algorithm::BllS).unwrap();
        assert_eq!(curve.points.len(), 10);
        assert!(curve
            .points
            .iter()
            .all(|m| m.precision == 0.0 && m.recall == 0.0));
    }

    #[test]
    fn beyond_accuracy_columns() {
        let c = three_users();
        let config = EvalConfig {
            k_max: 2,
            beyond_accuracy: true,
            ..EvalConfig::default()
        };
        let report = evaluate(&c, &[Algorithm::MostPopular], &config).unwrap();
        let m = report.curve(Algorithm::MostPopular).unwrap().at(2);
        // Before t=3: x (1 use), z (1), y (1) -> ties by name: x, y. Both in A's bubble.
        assert_eq!(m.serendipity, Some(0.0));
        assert!(m.ild.is_some());
    }
}
