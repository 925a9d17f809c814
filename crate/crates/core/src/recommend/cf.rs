//! User-based collaborative filtering over hashtag count profiles.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::Serialize;

use super::{RankedList, Scored, UsageIndex};
use crate::corpus::{TagId, UserId};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Similarity {
    #[default]
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CfParams {
    pub n_neighbors: usize,
    pub similarity: Similarity,
}

impl Default for CfParams {
    fn default() -> Self {
        Self {
            n_neighbors: 20,
            similarity: Similarity::Cosine,
        }
    }
}

/// Hashtag counts of `user` before `ref_time`, sorted by hashtag.
pub fn user_profile(index: &UsageIndex<'_>, user: UserId, ref_time: i64) -> Vec<(TagId, u32)> {
    index
        .prior_usages(user, ref_time)
        .map(|(tag, times)| (tag, times.len() as u32))
        .collect()
}

/// Cosine of two sparse count vectors sorted by hashtag; 0 if either is empty.
pub fn cosine(a: &[(TagId, u32)], b: &[(TagId, u32)]) -> f64 {
    let norm =
        |v: &[(TagId, u32)]| libm::sqrt(v.iter().map(|&(_, c)| f64::from(c) * f64::from(c)).sum());
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                dot += f64::from(a[i].1) * f64::from(b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    (dot / (na * nb)).min(1.0)
}

/// Scores hashtags by `sum over neighbours v of sim(u, v) * count_v(tag)`,
/// where the neighbours are the `n_neighbors` most similar other users.
/// Returns an empty list for an empty profile.
pub fn recommend_cf(
    index: &UsageIndex<'_>,
    user: UserId,
    ref_time: i64,
    k: usize,
    params: &CfParams,
) -> RankedList {
    let me = user_profile(index, user, ref_time);
    if me.is_empty() {
        return RankedList::default();
    }

    let mut neighbors: Vec<(f64, UserId, Vec<(TagId, u32)>)> = (0..index.corpus().n_users() as u32)
        .map(UserId)
        .filter(|&v| v != user)
        .filter_map(|v| {
            let profile = user_profile(index, v, ref_time);
            let sim = cosine(&me, &profile);
            (sim > 0.0).then_some((sim, v, profile))
        })
        .collect();
    neighbors.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    neighbors.truncate(params.n_neighbors);

    let mut scores: BTreeMap<TagId, f64> = BTreeMap::new();
    for (sim, _, profile) in &neighbors {
        for &(tag, count) in profile {
            *scores.entry(tag).or_insert(0.0) += sim * f64::from(count);
        }
    }
    let candidates = scores
        .into_iter()
        .map(|(tag, score)| Scored { tag, score })
        .collect();
    RankedList::rank(candidates, index, ref_time, k)
}
