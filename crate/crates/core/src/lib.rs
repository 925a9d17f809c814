//! Hashtag reuse analysis and hashtag recommendation.
//!
//! This crate is the allocation-only core: it has no IO and builds under
//! `no_std`. It provides
//!
//! - [`corpus`]: the in-memory dataset (hashtag assignments plus a static
//!   follow network) and its summary statistics,
//! - [`reuse`]: the five-way reuse classifier (individual, social,
//!   individual/social, network, external) driven by a causal index,
//! - [`temporal`]: recency samples, log-spaced histograms and daily peak
//!   detection,
//! - [`recommend`]: base-level learning (BLL) activation, BLL and
//!   collaborative-filtering recommenders and a popularity baseline,
//! - [`beyond`]: co-occurrence similarity, intra-list diversity,
//!   serendipity and a greedy accuracy/diversity re-ranker,
//! - [`eval`]: leave-latest-out evaluation with precision/recall@k,
//! - [`synth`]: a seeded corpus generator with ground-truth reuse sources.
//!
//! File formats, configuration and the command-line interface live in the
//! `hashreuse` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod beyond;
pub mod corpus;
pub mod eval;
pub mod recommend;
pub mod reuse;
pub mod synth;
pub mod temporal;

mod fxmap;

pub use corpus::{
    normalize_hashtag, Assignment, Corpus, CorpusBuilder, CorpusError, CorpusStats,
    HashtagAssignment, TagId, TweetId, UserId,
};
pub use reuse::{classify_all, Classification, ReuseBreakdown, ReuseLabel};
