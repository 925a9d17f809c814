//! Base-level learning (BLL) activation from ACT-R and the recommenders
//! built on it.
//!
//! ```text
//! B(ref) = ln( sum_j max(ref - t_j, min_delta)^(-d) )    over t_j < ref
//! ```
//!
//! The number of terms carries frequency, the size of each term recency.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::Serialize;

use super::{RankedList, Scored, UsageIndex};
use crate::corpus::{TagId, UserId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BllError {
    #[error("no usage precedes the reference time")]
    NoPriorUsage,
    #[error("decay exponent must be positive, got {0}")]
    InvalidDecay(f64),
    #[error("min_delta_seconds must be at least 1")]
    InvalidClamp,
    #[error("beta must lie in [0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("unknown normalization (expected softmax or minmax)")]
    UnknownNormalization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BllParams {
    /// Decay exponent `d`.
    pub d: f64,
    /// Lower clamp on the age of a usage, in seconds.
    pub min_delta_seconds: u64,
}

impl Default for BllParams {
    fn default() -> Self {
        Self {
            d: 0.5,
            min_delta_seconds: 1,
        }
    }
}

impl BllParams {
    pub fn new(d: f64, min_delta_seconds: u64) -> Result<Self, BllError> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(BllError::InvalidDecay(d));
        }
        if min_delta_seconds == 0 {
            return Err(BllError::InvalidClamp);
        }
        Ok(Self {
            d,
            min_delta_seconds,
        })
    }
}

/// How each BLL_I,S component is rescaled before blending.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MixNormalization {
    /// `exp(B) / sum exp(B)` over the component's candidates, i.e. each
    /// hashtag's share of the component's total decayed usage mass.
    #[default]
    Softmax,
    /// `(B - min) / (max - min)` over the component's candidates.
    MinMax,
}

impl MixNormalization {
    pub fn as_str(self) -> &'static str {
        match self {
            MixNormalization::Softmax => "softmax",
            MixNormalization::MinMax => "minmax",
        }
    }
}

impl core::str::FromStr for MixNormalization {
    type Err = BllError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "softmax" => Ok(MixNormalization::Softmax),
            "minmax" => Ok(MixNormalization::MinMax),
            _ => Err(BllError::UnknownNormalization),
        }
    }
}

/// Weight of the individual component in BLL_I,S, and the rescaling applied
/// to both components first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixParams {
    pub beta: f64,
    pub normalization: MixNormalization,
}

impl Default for MixParams {
    fn default() -> Self {
        Self {
            beta: 0.5,
            normalization: MixNormalization::Softmax,
        }
    }
}

impl MixParams {
    pub fn new(beta: f64, normalization: MixNormalization) -> Result<Self, BllError> {
        if (0.0..=1.0).contains(&beta) {
            Ok(Self {
                beta,
                normalization,
            })
        } else {
            Err(BllError::InvalidBeta(beta))
        }
    }
}

/// Sum of decayed terms over usages before `ref_time`, plus the term count.
fn decay_sum(times: &[i64], ref_time: i64, params: &BllParams) -> (f64, usize) {
    let min = params.min_delta_seconds as i64;
    times
        .iter()
        .filter(|&&t| t < ref_time)
        .fold((0.0, 0), |(sum, n), &t| {
            let age = (ref_time - t).max(min) as f64;
            (sum + libm::pow(age, -params.d), n + 1)
        })
}

pub fn bll_activation(
    usage_timestamps: &[i64],
    ref_time: i64,
    params: &BllParams,
) -> Result<f64, BllError> {
    match decay_sum(usage_timestamps, ref_time, params) {
        (_, 0) => Err(BllError::NoPriorUsage),
        (sum, _) => Ok(libm::log(sum)),
    }
}

/// Unranked BLL scores over the user's own hashtags.
pub(crate) fn individual_scores(
    index: &UsageIndex<'_>,
    user: UserId,
    ref_time: i64,
    params: &BllParams,
) -> Vec<Scored> {
    index
        .prior_usages(user, ref_time)
        .map(|(tag, times)| Scored {
            tag,
            score: libm::log(decay_sum(times, ref_time, params).0),
        })
        .collect()
}

/// Unranked BLL scores over the pooled usages of all followees.
pub(crate) fn social_scores(
    index: &UsageIndex<'_>,
    user: UserId,
    ref_time: i64,
    params: &BllParams,
) -> Vec<Scored> {
    let mut pooled: BTreeMap<TagId, f64> = BTreeMap::new();
    for &f in index.corpus().followees(user).unwrap_or(&[]) {
        for (tag, times) in index.prior_usages(f, ref_time) {
            *pooled.entry(tag).or_insert(0.0) += decay_sum(times, ref_time, params).0;
        }
    }
    pooled
        .into_iter()
        .map(|(tag, sum)| Scored {
            tag,
            score: libm::log(sum),
        })
        .collect()
}

pub fn recommend_bll_i(
    index: &UsageIndex<'_>,
    user: UserId,
    ref_time: i64,
    k: usize,
    params: &BllParams,
) -> RankedList {
    RankedList::rank(
        individual_scores(index, user, ref_time, params),
        index,
        ref_time,
        k,
    )
}

pub fn recommend_bll_s(
    index: &UsageIndex<'_>,
    user: UserId,
    ref_time: i64,
    k: usize,
    params: &BllParams,
) -> RankedList {
    RankedList::rank(
        social_scores(index, user, ref_time, params),
        index,
        ref_time,
        k,
    )
}

pub fn recommend_bll_is(
    index: &UsageIndex<'_>,
    user: UserId,
    ref_time: i64,
    k: usize,
    params: &BllParams,
    mix: &MixParams,
) -> RankedList {
    let individual = individual_scores(index, user, ref_time, params);
    let social = social_scores(index, user, ref_time, params);
    RankedList::rank(
        mix_normalized(&individual, &social, mix),
        index,
        ref_time,
        k,
    )
}

/// Rescales each component and blends them as
/// `beta * individual + (1 - beta) * social`. A hashtag missing from a
/// component gets 0 there. Under min-max, a component whose scores are all
/// equal (including a single candidate) maps to 1.
pub fn mix_normalized(individual: &[Scored], social: &[Scored], mix: &MixParams) -> Vec<Scored> {
    let norm = |scores: &[Scored]| match mix.normalization {
        MixNormalization::Softmax => softmax(scores),
        MixNormalization::MinMax => min_max(scores),
    };
    let mut merged: BTreeMap<TagId, (f64, f64)> = BTreeMap::new();
    for (s, n) in individual.iter().zip(norm(individual)) {
        merged.entry(s.tag).or_default().0 = n;
    }
    for (s, n) in social.iter().zip(norm(social)) {
        merged.entry(s.tag).or_default().1 = n;
    }
    let beta = mix.beta;
    merged
        .into_iter()
        .map(|(tag, (i, s))| Scored {
            tag,
            score: beta * i + (1.0 - beta) * s,
        })
        .collect()
}

fn softmax(scores: &[Scored]) -> Vec<f64> {
    let max = scores.iter().fold(f64::NEG_INFINITY, |m, s| m.max(s.score));
    let weights: Vec<f64> = scores.iter().map(|s| libm::exp(s.score - max)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn min_max(scores: &[Scored]) -> Vec<f64> {
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.score), hi.max(s.score))
        });
    let span = hi - lo;
    scores
        .iter()
        .map(|s| {
            if span > 0.0 {
                (s.score - lo) / span
            } else {
                1.0
            }
        })
        .collect()
}
