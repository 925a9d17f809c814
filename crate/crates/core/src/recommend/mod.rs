//! Hashtag recommenders for a seed user at a reference time.
//!
//! Every recommender only looks at usages strictly before the reference
//! time. Rankings are ordered by score, then by global usage count before the
//! reference time, then by hashtag (lexicographic), all descending except the
//! last.

mod bll;
mod cf;

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::Serialize;

use crate::corpus::{Corpus, TagId, UserId};

pub use bll::{
    bll_activation, mix_normalized, recommend_bll_i, recommend_bll_is, recommend_bll_s, BllError,
    BllParams, MixNormalization, MixParams,
};
pub use cf::{cosine, recommend_cf, user_profile, CfParams};

/// Per-user and per-hashtag usage timelines, ascending in time.
pub struct UsageIndex<'c> {
    corpus: &'c Corpus,
    user_tags: Vec<Vec<(TagId, Vec<i64>)>>,
    tag_times: Vec<Vec<i64>>,
}

impl<'c> UsageIndex<'c> {
    pub fn new(corpus: &'c Corpus) -> Self {
        let mut per_user: Vec<Vec<(TagId, i64)>> = alloc::vec![Vec::new(); corpus.n_users()];
        let mut tag_times: Vec<Vec<i64>> = alloc::vec![Vec::new(); corpus.n_tags()];
        for a in corpus.assignments() {
            per_user[a.user.index()].push((a.tag, a.timestamp));
            tag_times[a.tag.index()].push(a.timestamp);
        }
        let user_tags = per_user
            .into_iter()
            .map(|mut events| {
                // Stable sort keeps the time order inside each hashtag.
                events.sort_by_key(|&(tag, _)| tag);
                let mut out: Vec<(TagId, Vec<i64>)> = Vec::new();
                for (tag, ts) in events {
                    match out.last_mut() {
                        Some((t, times)) if *t == tag => times.push(ts),
                        _ => out.push((tag, alloc::vec![ts])),
                    }
                }
                out
            })
            .collect();
        Self {
            corpus,
            user_tags,
            tag_times,
        }
    }

    pub fn corpus(&self) -> &'c Corpus {
        self.corpus
    }

    /// The user's hashtags with all usage times, including future ones.
    pub fn user_timelines(&self, user: UserId) -> &[(TagId, Vec<i64>)] {
        &self.user_tags[user.index()]
    }

    /// The user's hashtags with their usage times strictly before `ref_time`.
    pub fn prior_usages(
        &self,
        user: UserId,
        ref_time: i64,
    ) -> impl Iterator<Item = (TagId, &[i64])> {
        self.user_tags[user.index()]
            .iter()
            .filter_map(move |(tag, times)| {
                let n = times.partition_point(|&t| t < ref_time);
                (n > 0).then(|| (*tag, &times[..n]))
            })
    }

    /// Number of usages of `tag` by anyone strictly before `ref_time`.
    pub fn global_count(&self, tag: TagId, ref_time: i64) -> usize {
        self.tag_times[tag.index()].partition_point(|&t| t < ref_time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scored {
    pub tag: TagId,
    pub score: f64,
}

/// Ordered recommendations without duplicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankedList {
    pub items: Vec<Scored>,
}

impl RankedList {
    /// Sorts candidates into the deterministic order and keeps the top `k`.
    /// Candidates must not repeat a hashtag.
    pub fn rank(
        mut candidates: Vec<Scored>,
        index: &UsageIndex<'_>,
        ref_time: i64,
        k: usize,
    ) -> Self {
        let mut keyed: Vec<(Scored, usize)> = candidates
            .drain(..)
            .map(|c| (c, index.global_count(c.tag, ref_time)))
            .collect();
        keyed.sort_by(|(a, fa), (b, fb)| rank_order(a, *fa, b, *fb));
        keyed.truncate(k);
        Self {
            items: keyed.into_iter().map(|(c, _)| c).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn tags(&self) -> Vec<TagId> {
        self.items.iter().map(|s| s.tag).collect()
    }

    pub fn truncated(&self, k: usize) -> Self {
        Self {
            items: self.items.iter().take(k).copied().collect(),
        }
    }
}

fn rank_order(a: &Scored, freq_a: usize, b: &Scored, freq_b: usize) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(freq_b.cmp(&freq_a))
        .then(a.tag.cmp(&b.tag))
}

/// Global usage count before `ref_time`.
pub fn recommend_most_popular(index: &UsageIndex<'_>, ref_time: i64, k: usize) -> RankedList {
    let candidates = (0..index.corpus.n_tags() as u32)
        .map(TagId)
        .filter_map(|tag| {
            let n = index.global_count(tag, ref_time);
            (n > 0).then_some(Scored {
                tag,
                score: n as f64,
            })
        })
        .collect();
    RankedList::rank(candidates, index, ref_time, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Algorithm {
    #[serde(rename = "bll_i")]
    BllI,
    #[serde(rename = "bll_s")]
    BllS,
    #[serde(rename = "bll_is")]
    BllIS,
    #[serde(rename = "cf")]
    Cf,
    #[serde(rename = "mp")]
    MostPopular,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::BllI,
        Algorithm::BllS,
        Algorithm::BllIS,
        Algorithm::Cf,
        Algorithm::MostPopular,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::BllI => "bll_i",
            Algorithm::BllS => "bll_s",
            Algorithm::BllIS => "bll_is",
            Algorithm::Cf => "cf",
            Algorithm::MostPopular => "mp",
        }
    }
}

impl core::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown algorithm {0:?} (expected bll_i, bll_s, bll_is, cf or mp)")]
pub struct UnknownAlgorithm(pub alloc::string::String);

impl core::str::FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownAlgorithm(s.into()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RecommenderParams {
    pub bll: BllParams,
    pub mix: MixParams,
    pub cf: CfParams,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecommendError {
    #[error("user {0:?} is not a seed user")]
    NotSeedUser(UserId),
}

/// Runs one recommender.
pub fn recommend(
    index: &UsageIndex<'_>,
    algorithm: Algorithm,
    user: UserId,
    ref_time: i64,
    k: usize,
    params: &RecommenderParams,
) -> Result<RankedList, RecommendError> {
    if algorithm != Algorithm::MostPopular && !index.corpus.is_seed(user) {
        return Err(RecommendError::NotSeedUser(user));
    }
    Ok(match algorithm {
        Algorithm::BllI => recommend_bll_i(index, user, ref_time, k, &params.bll),
        Algorithm::BllS => recommend_bll_s(index, user, ref_time, k, &params.bll),
        Algorithm::BllIS => recommend_bll_is(index, user, ref_time, k, &params.bll, &params.mix),
        Algorithm::Cf => recommend_cf(index, user, ref_time, k, &params.cf),
        Algorithm::MostPopular => recommend_most_popular(index, ref_time, k),
    })
}
