//! The in-memory dataset: hashtag assignments, tweets and a static follow
//! network.
//!
//! User ids, tweet ids and hashtags are interned in byte-lexicographic order,
//! so comparing two [`TagId`]s (or [`UserId`]s, [`TweetId`]s) gives the same
//! answer as comparing the strings they stand for. Assignments are kept
//! sorted by `(timestamp, tweet_id, hashtag)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Serialize;
use unicode_normalization::UnicodeNormalization;

use crate::fxmap::FxHashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("hashtag {0:?} is empty after normalization")]
    EmptyAfterNormalization(String),
    #[error("hashtag {0:?} contains whitespace")]
    HashtagWhitespace(String),
    #[error("timestamp must be a positive number of seconds, got {0}")]
    NonPositiveTimestamp(i64),
    #[error("empty {0} id")]
    EmptyId(&'static str),
    #[error("tweet {0:?} appears with conflicting user or timestamp")]
    InconsistentTweet(String),
    #[error("user {0:?} follows itself")]
    SelfFollow(String),
    #[error("follow edge references seed {0:?}, which is absent from the seed list")]
    InconsistentNetwork(String),
}

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Interned user id.
    UserId
);
id_type!(
    /// Interned hashtag.
    TagId
);
id_type!(
    /// Interned tweet id.
    TweetId
);

/// One hashtag in one tweet, in interned form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub user: UserId,
    pub tweet: TweetId,
    pub tag: TagId,
    pub timestamp: i64,
}

/// One hashtag in one tweet with all ids spelled out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HashtagAssignment {
    pub user_id: String,
    pub tweet_id: String,
    pub hashtag: String,
    pub timestamp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TweetRecord {
    pub user: UserId,
    pub timestamp: i64,
}

/// Dataset size summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    #[serde(rename = "seed_users")]
    pub n_seed_users: u64,
    #[serde(rename = "users")]
    pub n_users: u64,
    #[serde(rename = "tweets")]
    pub n_tweets: u64,
    #[serde(rename = "distinct_hashtags")]
    pub n_distinct_hashtags: u64,
    #[serde(rename = "hashtag_assignments")]
    pub n_assignments: u64,
}

/// Strips leading `#` characters, applies canonical composition (NFC) and
/// lowercases.
///
/// ```
/// use hashreuse_core::normalize_hashtag;
/// assert_eq!(normalize_hashtag("#MAGA").unwrap(), "maga");
/// assert_eq!(
///     normalize_hashtag("#FakePresident").unwrap(),
///     normalize_hashtag("fakepresident").unwrap(),
/// );
/// ```
pub fn normalize_hashtag(raw: &str) -> Result<String, CorpusError> {
    let stripped = raw.trim().trim_start_matches('#');
    let composed: String = stripped.nfc().collect();
    // Lowercasing can emit combining marks, so compose once more.
    let normalized: String = composed.to_lowercase().nfc().collect();
    if normalized.is_empty() {
        return Err(CorpusError::EmptyAfterNormalization(raw.to_string()));
    }
    if normalized.chars().any(char::is_whitespace) {
        return Err(CorpusError::HashtagWhitespace(raw.to_string()));
    }
    Ok(normalized)
}

/// Strings numbered in first-seen order; renumbered lexicographically at
/// build time.
#[derive(Debug, Clone, Default)]
struct Interner {
    ids: FxHashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    /// Sorted names, and the new id of every first-seen id.
    fn into_sorted(self) -> (Vec<String>, Vec<u32>) {
        let mut order: Vec<u32> = (0..self.names.len() as u32).collect();
        order.sort_unstable_by(|&a, &b| self.names[a as usize].cmp(&self.names[b as usize]));
        let mut rank = alloc::vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old as usize] = new as u32;
        }
        let mut names: Vec<Option<String>> = self.names.into_iter().map(Some).collect();
        let sorted = order
            .iter()
            .map(|&old| names[old as usize].take().expect("each id once"))
            .collect();
        (sorted, rank)
    }
}

/// Accumulates raw records and validates them into a [`Corpus`].
#[derive(Debug, Clone, Default)]
pub struct CorpusBuilder {
    users: Interner,
    tweet_ids: Interner,
    /// (user, timestamp) per first-seen tweet id.
    tweets: Vec<(u32, i64)>,
    tag_ids: Interner,
    /// (tweet, hashtag) per occurrence, first-seen ids.
    tags: Vec<(u32, u32)>,
    edges: BTreeMap<String, BTreeSet<String>>,
    seed_list: Option<BTreeSet<String>>,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a tweet. A tweet without hashtags still counts toward the
    /// tweet total.
    pub fn add_tweet(
        &mut self,
        user: &str,
        tweet: &str,
        timestamp: i64,
    ) -> Result<(), CorpusError> {
        self.register_tweet(user, tweet, timestamp).map(|_| ())
    }

    fn register_tweet(
        &mut self,
        user: &str,
        tweet: &str,
        timestamp: i64,
    ) -> Result<u32, CorpusError> {
        if user.is_empty() {
            return Err(CorpusError::EmptyId("user"));
        }
        if tweet.is_empty() {
            return Err(CorpusError::EmptyId("tweet"));
        }
        if timestamp <= 0 {
            return Err(CorpusError::NonPositiveTimestamp(timestamp));
        }
        match self.tweet_ids.get(tweet) {
            Some(id) => {
                let (u, ts) = self.tweets[id as usize];
                if self.users.get(user) != Some(u) || ts != timestamp {
                    return Err(CorpusError::InconsistentTweet(tweet.to_string()));
                }
                Ok(id)
            }
            None => {
                let u = self.users.intern(user);
                self.tweets.push((u, timestamp));
                Ok(self.tweet_ids.intern(tweet))
            }
        }
    }

    /// Adds one hashtag occurrence; `raw_hashtag` is normalized here.
    /// Repeating a hashtag within a tweet collapses to one assignment.
    pub fn add_assignment(
        &mut self,
        user: &str,
        tweet: &str,
        timestamp: i64,
        raw_hashtag: &str,
    ) -> Result<(), CorpusError> {
        let tag = normalize_hashtag(raw_hashtag)?;
        let tweet = self.register_tweet(user, tweet, timestamp)?;
        let tag = self.tag_ids.intern(&tag);
        self.tags.push((tweet, tag));
        Ok(())
    }

    /// Declares a seed user, possibly without followees.
    pub fn add_seed(&mut self, seed: &str) -> Result<(), CorpusError> {
        if seed.is_empty() {
            return Err(CorpusError::EmptyId("seed user"));
        }
        self.edges.entry(seed.to_string()).or_default();
        Ok(())
    }

    pub fn add_follow(&mut self, seed: &str, followee: &str) -> Result<(), CorpusError> {
        if followee.is_empty() {
            return Err(CorpusError::EmptyId("followee"));
        }
        if seed == followee {
            return Err(CorpusError::SelfFollow(seed.to_string()));
        }
        self.add_seed(seed)?;
        self.edges
            .get_mut(seed)
            .expect("seed inserted")
            .insert(followee.to_string());
        Ok(())
    }

    /// Pins the seed list. [`build`](Self::build) then rejects any edge whose
    /// seed is not listed; listed seeds without edges get empty followee sets.
    pub fn restrict_seeds<I, S>(&mut self, seeds: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.seed_list = Some(seeds.into_iter().map(Into::into).collect());
    }

    pub fn build(mut self) -> Result<Corpus, CorpusError> {
        if let Some(list) = self.seed_list.take() {
            if let Some(bad) = self.edges.keys().find(|s| !list.contains(*s)) {
                return Err(CorpusError::InconsistentNetwork(bad.clone()));
            }
            for seed in list {
                self.add_seed(&seed)?;
            }
        }

        let mut user_ids = self.users;
        for (seed, followees) in &self.edges {
            user_ids.intern(seed);
            for f in followees {
                user_ids.intern(f);
            }
        }
        let (users, user_rank) = user_ids.into_sorted();
        let user = |name: &str, ids: &[String]| {
            UserId(
                ids.binary_search_by(|s| s.as_str().cmp(name))
                    .expect("interned") as u32,
            )
        };
        let (tags, tag_rank) = self.tag_ids.into_sorted();
        let (tweet_names, tweet_rank) = self.tweet_ids.into_sorted();

        let mut tweets = alloc::vec![
            TweetRecord {
                user: UserId(0),
                timestamp: 0
            };
            tweet_names.len()
        ];
        for (old, &(u, ts)) in self.tweets.iter().enumerate() {
            tweets[tweet_rank[old] as usize] = TweetRecord {
                user: UserId(user_rank[u as usize]),
                timestamp: ts,
            };
        }

        let mut assignments: Vec<Assignment> = self
            .tags
            .iter()
            .map(|&(tweet, tag)| {
                let tweet = TweetId(tweet_rank[tweet as usize]);
                let rec = tweets[tweet.index()];
                Assignment {
                    user: rec.user,
                    tweet,
                    tag: TagId(tag_rank[tag as usize]),
                    timestamp: rec.timestamp,
                }
            })
            .collect();
        assignments.sort_unstable_by_key(|a| (a.timestamp, a.tweet, a.tag));
        assignments.dedup_by_key(|a| (a.tweet, a.tag));

        let mut followees: Vec<Option<Vec<UserId>>> = alloc::vec![None; users.len()];
        let mut seeds = Vec::with_capacity(self.edges.len());
        for (seed, fs) in &self.edges {
            let id = user(seed, &users);
            seeds.push(id);
            followees[id.index()] = Some(fs.iter().map(|f| user(f, &users)).collect());
        }

        Ok(Corpus {
            users,
            tags,
            tweet_names,
            tweets,
            assignments,
            seeds,
            followees,
        })
    }
}

fn lookup(sorted: &[String], key: &str) -> Option<u32> {
    sorted
        .binary_search_by(|s| s.as_str().cmp(key))
        .ok()
        .map(|i| i as u32)
}

/// Immutable dataset. Build it with [`CorpusBuilder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    users: Vec<String>,
    tags: Vec<String>,
    tweet_names: Vec<String>,
    tweets: Vec<TweetRecord>,
    assignments: Vec<Assignment>,
    seeds: Vec<UserId>,
    followees: Vec<Option<Vec<UserId>>>,
}

impl Corpus {
    pub fn empty() -> Self {
        CorpusBuilder::new().build().expect("empty corpus is valid")
    }

    /// All assignments, ascending by `(timestamp, tweet_id, hashtag)`.
    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn n_tweets(&self) -> usize {
        self.tweets.len()
    }

    pub fn user_name(&self, id: UserId) -> &str {
        &self.users[id.index()]
    }

    pub fn user_id(&self, name: &str) -> Option<UserId> {
        lookup(&self.users, name).map(UserId)
    }

    pub fn tag_name(&self, id: TagId) -> &str {
        &self.tags[id.index()]
    }

    pub fn tag_id(&self, name: &str) -> Option<TagId> {
        lookup(&self.tags, name).map(TagId)
    }

    pub fn tweet_name(&self, id: TweetId) -> &str {
        &self.tweet_names[id.index()]
    }

    pub fn tweet_id(&self, name: &str) -> Option<TweetId> {
        lookup(&self.tweet_names, name).map(TweetId)
    }

    pub fn tweet(&self, id: TweetId) -> TweetRecord {
        self.tweets[id.index()]
    }

    /// Tweets in id order.
    pub fn tweets(&self) -> impl Iterator<Item = (TweetId, TweetRecord)> + '_ {
        self.tweets
            .iter()
            .enumerate()
            .map(|(i, r)| (TweetId(i as u32), *r))
    }

    /// Seed users in id order.
    pub fn seeds(&self) -> &[UserId] {
        &self.seeds
    }

    pub fn is_seed(&self, user: UserId) -> bool {
        self.followees[user.index()].is_some()
    }

    /// Sorted followees of a seed user; `None` for non-seed users.
    pub fn followees(&self, user: UserId) -> Option<&[UserId]> {
        self.followees[user.index()].as_deref()
    }

    pub fn resolve(&self, a: &Assignment) -> HashtagAssignment {
        HashtagAssignment {
            user_id: self.user_name(a.user).to_string(),
            tweet_id: self.tweet_name(a.tweet).to_string(),
            hashtag: self.tag_name(a.tag).to_string(),
            timestamp: a.timestamp,
        }
    }

    pub fn stats(&self) -> CorpusStats {
        CorpusStats {
            n_seed_users: self.seeds.len() as u64,
            n_users: self.users.len() as u64,
            n_tweets: self.tweets.len() as u64,
            n_distinct_hashtags: self.tags.len() as u64,
            n_assignments: self.assignments.len() as u64,
        }
    }
}

pub fn compute_stats(corpus: &Corpus) -> CorpusStats {
    corpus.stats()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn normalizes_case_and_hash() {
        assert_eq!(normalize_hashtag("#MAGA").unwrap(), "maga");
        assert_eq!(normalize_hashtag("fakepresident").unwrap(), "fakepresident");
        assert_eq!(
            normalize_hashtag("#FakePresident").unwrap(),
            normalize_hashtag("#fakepresident").unwrap()
        );
    }

    #[test]
    fn composes_unicode() {
        // "e" + combining acute vs precomposed "é"
        assert_eq!(normalize_hashtag("#Cafe\u{301}").unwrap(), "caf\u{e9}");
        assert_eq!(normalize_hashtag("#CAF\u{c9}").unwrap(), "caf\u{e9}");
    }

    #[test]
    fn rejects_empty_and_whitespace() {
        assert!(matches!(
            normalize_hashtag("#"),
            Err(CorpusError::EmptyAfterNormalization(_))
        ));
        assert!(matches!(
            normalize_hashtag("  "),
            Err(CorpusError::EmptyAfterNormalization(_))
        ));
        assert!(matches!(
            normalize_hashtag("#a b"),
            Err(CorpusError::HashtagWhitespace(_))
        ));
    }

    #[test]
    fn duplicate_hashtag_in_tweet_collapses() {
        let mut b = CorpusBuilder::new();
        b.add_assignment("u", "t1", 10, "#X").unwrap();
        b.add_assignment("u", "t1", 10, "x").unwrap();
        b.add_assignment("u", "t1", 10, "y").unwrap();
        let c = b.build().unwrap();
        assert_eq!(c.assignments().len(), 2);
    }

    #[test]
    fn conflicting_tweet_is_rejected() {
        let mut b = CorpusBuilder::new();
        b.add_assignment("u", "t1", 10, "x").unwrap();
        assert_eq!(
            b.add_assignment("u", "t1", 11, "y"),
            Err(CorpusError::InconsistentTweet("t1".into()))
        );
        assert_eq!(
            b.add_assignment("v", "t1", 10, "y"),
            Err(CorpusError::InconsistentTweet("t1".into()))
        );
    }

    #[test]
    fn rejects_bad_network() {
        let mut b = CorpusBuilder::new();
        assert_eq!(
            b.add_follow("a", "a"),
            Err(CorpusError::SelfFollow("a".into()))
        );

        let mut b = CorpusBuilder::new();
        b.add_follow("a", "b").unwrap();
        b.add_follow("c", "b").unwrap();
        b.restrict_seeds(["a"]);
        assert_eq!(b.build(), Err(CorpusError::InconsistentNetwork("c".into())));
    }

    #[test]
    fn rejects_non_positive_timestamp() {
        let mut b = CorpusBuilder::new();
        assert_eq!(
            b.add_tweet("u", "t", 0),
            Err(CorpusError::NonPositiveTimestamp(0))
        );
    }

    #[test]
    fn sort_order_and_interning() {
        let mut b = CorpusBuilder::new();
        b.add_assignment("u", "t2", 5, "b").unwrap();
        b.add_assignment("u", "t2", 5, "a").unwrap();
        b.add_assignment("v", "t1", 5, "z").unwrap();
        b.add_assignment("v", "t0", 9, "a").unwrap();
        let c = b.build().unwrap();
        let seen: Vec<_> = c
            .assignments()
            .iter()
            .map(|a| (a.timestamp, c.tweet_name(a.tweet), c.tag_name(a.tag)))
            .collect();
        assert_eq!(
            seen,
            vec![
                (5, "t1", "z"),
                (5, "t2", "a"),
                (5, "t2", "b"),
                (9, "t0", "a")
            ]
        );
    }

    #[test]
    fn stats_fixture() {
        // 2 seeds (s1, s2), 3 users (s1, s2, f), 4 tweets, 3 hashtags, 6 assignments.
        let mut b = CorpusBuilder::new();
        b.add_follow("s1", "f").unwrap();
        b.add_follow("s2", "f").unwrap();
        b.add_assignment("s1", "t1", 10, "a").unwrap();
        b.add_assignment("s1", "t1", 10, "b").unwrap();
        b.add_assignment("s2", "t2", 20, "a").unwrap();
        b.add_assignment("f", "t3", 30, "c").unwrap();
        b.add_assignment("f", "t3", 30, "a").unwrap();
        b.add_assignment("s1", "t4", 40, "c").unwrap();
        let c = b.build().unwrap();
        let s = compute_stats(&c);
        assert_eq!(
            (
                s.n_seed_users,
                s.n_users,
                s.n_tweets,
                s.n_distinct_hashtags,
                s.n_assignments
            ),
            (2, 3, 4, 3, 6)
        );
    }

    #[test]
    fn empty_corpus_stats() {
        assert_eq!(Corpus::empty().stats(), CorpusStats::default());
    }

    #[test]
    fn followee_only_users_count() {
        let mut b = CorpusBuilder::new();
        b.add_follow("s", "quiet").unwrap();
        b.add_seed("lonely").unwrap();
        let c = b.build().unwrap();
        assert_eq!(c.stats().n_users, 3);
        assert_eq!(c.stats().n_seed_users, 2);
        let lonely = c.user_id("lonely").unwrap();
        assert_eq!(c.followees(lonely), Some(&[][..]));
        assert_eq!(c.followees(c.user_id("quiet").unwrap()), None);
    }
}
