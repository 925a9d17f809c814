#![allow(dead_code)]

use hashreuse_core::{Corpus, CorpusBuilder, ReuseLabel};
use proptest::prelude::*;

/// A raw dataset: tweets with hashtags, plus seeds and follow edges.
#[derive(Debug, Clone)]
pub struct RawCorpus {
    /// (user, tweet, timestamp, hashtags)
    pub tweets: Vec<(String, String, i64, Vec<String>)>,
    pub seeds: Vec<String>,
    pub edges: Vec<(String, String)>,
}

impl RawCorpus {
    pub fn build(&self) -> Corpus {
        self.build_with(|s| s.to_string())
    }

    /// Builds with every user name passed through `rename`.
    pub fn build_with(&self, rename: impl Fn(&str) -> String) -> Corpus {
        let mut b = CorpusBuilder::new();
        for s in &self.seeds {
            b.add_seed(&rename(s)).unwrap();
        }
        for (s, f) in &self.edges {
            b.add_follow(&rename(s), &rename(f)).unwrap();
        }
        for (u, t, ts, tags) in &self.tweets {
            b.add_tweet(&rename(u), t, *ts).unwrap();
            for h in tags {
                b.add_assignment(&rename(u), t, *ts, h).unwrap();
            }
        }
        b.build().unwrap()
    }
}

/// Small corpora with many timestamp ties and repeated hashtags.
pub fn raw_corpus(
    max_users: usize,
    max_tweets: usize,
    max_time: i64,
) -> impl Strategy<Value = RawCorpus> {
    (2..=max_users).prop_flat_map(move |n_users| {
        let user = 0..n_users;
        let tweets = prop::collection::vec(
            (
                user.clone(),
                1..=max_time,
                prop::collection::vec(0..12u8, 0..4),
            ),
            0..=max_tweets,
        );
        let seeds = prop::collection::vec(any::<bool>(), n_users);
        let edges = prop::collection::vec((0..n_users, 0..n_users), 0..(n_users * 3));
        (tweets, seeds, edges).prop_map(move |(tweets, seed_flags, edges)| {
            let name = |u: usize| format!("u{u}");
            let seeds: Vec<String> = (0..n_users).filter(|&u| seed_flags[u]).map(name).collect();
            let edges = edges
                .into_iter()
                .filter(|&(s, f)| s != f && seed_flags[s])
                .map(|(s, f)| (name(s), name(f)))
                .collect();
            let tweets = tweets
                .into_iter()
                .enumerate()
                .map(|(i, (u, ts, tags))| {
                    let tags = tags.into_iter().map(|h| format!("h{h}")).collect();
                    (name(u), format!("t{i:03}"), ts, tags)
                })
                .collect();
            RawCorpus { tweets, seeds, edges }
        })
    })
}

/// What a quadratic scan over all strictly earlier assignments finds for
/// the assignment at `i`: the label, and the latest own and followee usage.
pub fn brute_force(corpus: &Corpus, i: usize) -> (ReuseLabel, Option<i64>, Option<i64>) {
    let all = corpus.assignments();
    let a = all[i];
    let followees = corpus.followees(a.user).unwrap();
    let (mut own, mut social, mut other) = (None::<i64>, None::<i64>, false);
    for b in all {
        if b.tag != a.tag || b.timestamp >= a.timestamp {
            continue;
        }
        if b.user == a.user {
            own = own.max(Some(b.timestamp));
        } else if followees.contains(&b.user) {
            social = social.max(Some(b.timestamp));
        } else {
            other = true;
        }
    }
    let label = ReuseLabel::from_flags(own.is_some(), social.is_some(), other);
    (label, own, social)
}
