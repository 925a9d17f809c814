//! Seeded corpus generator with ground-truth reuse sources.
//!
//! Users tweet on a Poisson schedule whose rate follows a shared daily
//! activity window. Each hashtag of a seed user's tweet picks a source from
//! the configured mixture:
//!
//! - individual: one of the user's own earlier hashtags,
//! - social: a followee's earlier hashtag the user has not used yet,
//! - network: an earlier hashtag used by neither the user nor a followee,
//! - external: a hashtag nobody has used.
//!
//! Individual and social picks are weighted by `age^(-recency_exponent)`,
//! where age is the time since the hashtag's latest qualifying usage;
//! network picks are proportional to global usage counts. An empty pool
//! falls back to external, and the ground truth records the fallback.
//! Background users (the followees and everyone else) use the same mixture
//! with the social share moved to individual, since nobody feeds them.
//!
//! Pools only see usages strictly before the current timestamp, matching
//! the classifier's notion of "before".

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Corpus, CorpusBuilder};
use crate::fxmap::FxHashMap;
use crate::reuse::ReuseLabel;

const DAY_SECONDS: f64 = 86_400.0;
/// Individual and social draws consider at most this many most recent
/// candidates.
const RECENT_CANDIDATES: usize = 512;
const NETWORK_TRIES: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid generator parameters: {0}")]
pub struct InvalidParams(pub &'static str);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenParams {
    pub n_seed_users: usize,
    pub n_followees_per_seed: usize,
    pub n_background_users: usize,
    /// Size of the base vocabulary external hashtags are drawn from, in a
    /// seeded random order; names continue past it once exhausted.
    pub vocab_size: usize,
    pub n_tweets_per_user: usize,
    pub max_hashtags_per_tweet: usize,
    pub p_individual: f64,
    pub p_social: f64,
    pub p_network: f64,
    pub p_external: f64,
    pub recency_exponent: f64,
    /// Share of activity concentrated in the daily window, in [0, 1].
    pub daily_amplitude: f64,
    pub active_window_hours: f64,
    pub mean_gap_hours: f64,
    pub start_time: i64,
    pub rng_seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n_seed_users: 50,
            n_followees_per_seed: 10,
            n_background_users: 100,
            vocab_size: 100_000,
            n_tweets_per_user: 100,
            max_hashtags_per_tweet: 2,
            p_individual: 0.4,
            p_social: 0.3,
            p_network: 0.2,
            p_external: 0.1,
            recency_exponent: 1.5,
            daily_amplitude: 0.8,
            active_window_hours: 3.0,
            mean_gap_hours: 4.0,
            start_time: 1_500_000_000,
            rng_seed: 42,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), InvalidParams> {
        let counts = [
            self.n_seed_users,
            self.n_followees_per_seed,
            self.n_background_users,
            self.vocab_size,
            self.n_tweets_per_user,
            self.max_hashtags_per_tweet,
        ];
        if counts.contains(&0) {
            return Err(InvalidParams("all counts must be at least 1"));
        }
        if self.n_followees_per_seed > self.n_background_users {
            return Err(InvalidParams(
                "n_followees_per_seed exceeds n_background_users",
            ));
        }
        let p = [
            self.p_individual,
            self.p_social,
            self.p_network,
            self.p_external,
        ];
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(InvalidParams("source probabilities must lie in [0, 1]"));
        }
        if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(InvalidParams("source probabilities must sum to 1"));
        }
        if !(self.recency_exponent > 0.0 && self.recency_exponent.is_finite()) {
            return Err(InvalidParams("recency_exponent must be positive"));
        }
        if !(0.0..=1.0).contains(&self.daily_amplitude) {
            return Err(InvalidParams("daily_amplitude must lie in [0, 1]"));
        }
        if !(self.active_window_hours > 0.0 && self.active_window_hours <= 24.0) {
            return Err(InvalidParams("active_window_hours must lie in (0, 24]"));
        }
        if !(self.mean_gap_hours > 0.0 && self.mean_gap_hours.is_finite()) {
            return Err(InvalidParams("mean_gap_hours must be positive"));
        }
        if self.start_time <= 0 {
            return Err(InvalidParams("start_time must be positive"));
        }
        Ok(())
    }
}

/// Where a generated hashtag came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Individual,
    Social,
    Network,
    External,
}

impl Source {
    pub const ALL: [Source; 4] = [
        Source::Individual,
        Source::Social,
        Source::Network,
        Source::External,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Individual => "individual",
            Source::Social => "social",
            Source::Network => "network",
            Source::External => "external",
        }
    }

    /// Whether a classifier label is consistent with this source.
    pub fn admits(self, label: ReuseLabel) -> bool {
        match self {
            Source::Individual => label.has_individual(),
            Source::Social => label.has_social(),
            Source::Network => label == ReuseLabel::Network,
            Source::External => label == ReuseLabel::External,
        }
    }
}

/// Sources aligned with [`Corpus::assignments`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub sources: Vec<Source>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub corpus: Corpus,
    pub truth: GroundTruth,
}

/// Hashtag last-use times for one user (own usage or followee exposure),
/// with a time-ordered view for recency-weighted draws.
#[derive(Default)]
struct History {
    last: FxHashMap<u32, i64>,
    by_time: BTreeSet<(i64, u32)>,
}

impl History {
    fn touch(&mut self, tag: u32, ts: i64) {
        if let Some(prev) = self.last.insert(tag, ts) {
            if prev == ts {
                return;
            }
            self.by_time.remove(&(prev, tag));
        }
        self.by_time.insert((ts, tag));
    }

    fn contains(&self, tag: u32) -> bool {
        self.last.contains_key(&tag)
    }
}

struct Event {
    ts: i64,
    tweet: String,
    user: usize,
    n_tags: usize,
}

struct Generator<'p> {
    params: &'p GenParams,
    rng: ChaCha8Rng,
    user_names: Vec<String>,
    /// Seeds following each background user, by seed index.
    followers: Vec<Vec<usize>>,
    own: Vec<History>,
    exposure: Vec<History>,
    /// Every committed usage's hashtag, in commit order.
    log: Vec<u32>,
    counts: Vec<u32>,
    tag_names: Vec<String>,
    vocabulary: Vec<u32>,
    weights: Vec<(f64, u32)>,
}

pub fn generate(params: &GenParams) -> Result<Generated, InvalidParams> {
    params.validate()?;
    let mut g = Generator::new(params);
    let edges = g.follow_edges();
    let events = g.schedule();

    let mut builder = CorpusBuilder::new();
    for (seed, followees) in edges.iter().enumerate() {
        builder.add_seed(&g.user_names[seed]).expect("valid id");
        for &f in followees {
            builder
                .add_follow(&g.user_names[seed], &g.user_names[params.n_seed_users + f])
                .expect("valid edge");
        }
    }
    let mut records: Vec<(usize, u32, Source)> = Vec::new();
    let mut start = 0;
    while start < events.len() {
        let ts = events[start].ts;
        let end = start + events[start..].partition_point(|e| e.ts == ts);
        let mut pending: Vec<(usize, u32)> = Vec::new();
        for (ei, e) in events.iter().enumerate().take(end).skip(start) {
            let mut in_tweet: Vec<u32> = Vec::with_capacity(e.n_tags);
            for _ in 0..e.n_tags {
                let (tag, source) = g.draw(e.user, ts, &in_tweet);
                in_tweet.push(tag);
                records.push((ei, tag, source));
                pending.push((e.user, tag));
            }
        }
        for (user, tag) in pending {
            g.commit(user, tag, ts);
        }
        start = end;
    }

    for &(ei, tag, _) in &records {
        let e = &events[ei];
        builder
            .add_assignment(
                &g.user_names[e.user],
                &e.tweet,
                e.ts,
                &g.tag_names[tag as usize],
            )
            .expect("generated records are valid");
    }
    let corpus = builder.build().expect("generated corpus is valid");

    // Events are already in corpus order (timestamp, then tweet id); within
    // a tweet the corpus orders hashtags by name.
    records.sort_by(|x, y| {
        x.0.cmp(&y.0)
            .then_with(|| g.tag_names[x.1 as usize].cmp(&g.tag_names[y.1 as usize]))
    });
    let sources: Vec<Source> = records.iter().map(|r| r.2).collect();
    debug_assert_eq!(sources.len(), corpus.assignments().len());
    Ok(Generated {
        corpus,
        truth: GroundTruth { sources },
    })
}

impl<'p> Generator<'p> {
    fn new(params: &'p GenParams) -> Self {
        let n_users = params.n_seed_users + params.n_background_users;
        let width = digits(n_users.max(params.n_seed_users.max(params.n_background_users)));
        let user_names = (0..params.n_seed_users)
            .map(|i| format!("s{i:0width$}"))
            .chain((0..params.n_background_users).map(|i| format!("b{i:0width$}")))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        let mut vocabulary: Vec<u32> = (0..params.vocab_size as u32).collect();
        // Reversed so pop() yields the shuffled order front to back.
        shuffle(&mut vocabulary, &mut rng);
        vocabulary.reverse();
        Self {
            params,
            rng,
            user_names,
            followers: alloc::vec![Vec::new(); params.n_background_users],
            own: (0..n_users).map(|_| History::default()).collect(),
            exposure: (0..params.n_seed_users)
                .map(|_| History::default())
                .collect(),
            log: Vec::new(),
            counts: Vec::new(),
            tag_names: Vec::new(),
            vocabulary,
            weights: Vec::with_capacity(RECENT_CANDIDATES),
        }
    }

    /// Sorted followee indices (into the background users) per seed.
    fn follow_edges(&mut self) -> Vec<Vec<usize>> {
        let p = self.params;
        (0..p.n_seed_users)
            .map(|seed| {
                let mut picked: Vec<usize> = rand::seq::index::sample(
                    &mut self.rng,
                    p.n_background_users,
                    p.n_followees_per_seed,
                )
                .into_vec();
                picked.sort_unstable();
                for &f in &picked {
                    self.followers[f].push(seed);
                }
                picked
            })
            .collect()
    }

    /// Tweet times for every user, sorted by `(timestamp, tweet id)`.
    fn schedule(&mut self) -> Vec<Event> {
        let p = self.params;
        let amp = p.daily_amplitude;
        let window = p.active_window_hours * 3600.0;
        let base = 1.0 / (p.mean_gap_hours * 3600.0);
        let peak_factor = (1.0 - amp) + amp * DAY_SECONDS / window;
        let max_rate = base * peak_factor;
        // All users share one time zone: the window opens at 18:00 UTC.
        let window_open = 18.0 * 3600.0;
        let tweet_width = digits(p.n_tweets_per_user);

        let mut events = Vec::with_capacity(self.user_names.len() * p.n_tweets_per_user);
        for user in 0..self.user_names.len() {
            let jitter = (self.rng.gen::<f64>() - 0.5) * 1800.0;
            let mut t = p.start_time as f64 + self.rng.gen::<f64>() * 3600.0;
            let mut seq = 0;
            while seq < p.n_tweets_per_user {
                let u: f64 = self.rng.gen();
                t += -libm::log(1.0 - u) / max_rate;
                let phase = rem_day(t - window_open - jitter);
                let factor = (1.0 - amp)
                    + if phase < window {
                        amp * DAY_SECONDS / window
                    } else {
                        0.0
                    };
                if self.rng.gen::<f64>() * peak_factor >= factor {
                    continue;
                }
                let n_tags = self.rng.gen_range(1..=p.max_hashtags_per_tweet);
                let tweet = format!("{}-{seq:0tweet_width$}", self.user_names[user]);
                events.push(Event {
                    ts: libm::floor(t) as i64,
                    tweet,
                    user,
                    n_tags,
                });
                seq += 1;
            }
        }
        events.sort_unstable_by(|a, b| a.ts.cmp(&b.ts).then_with(|| a.tweet.cmp(&b.tweet)));
        events
    }

    fn pick_source(&mut self, is_seed: bool) -> Source {
        let p = self.params;
        let (pi, ps) = if is_seed {
            (p.p_individual, p.p_social)
        } else {
            (p.p_individual + p.p_social, 0.0)
        };
        let r: f64 = self.rng.gen();
        if r < pi {
            Source::Individual
        } else if r < pi + ps {
            Source::Social
        } else if r < pi + ps + p.p_network {
            Source::Network
        } else {
            Source::External
        }
    }

    fn draw(&mut self, user: usize, ts: i64, in_tweet: &[u32]) -> (u32, Source) {
        let is_seed = user < self.params.n_seed_users;
        let source = self.pick_source(is_seed);
        let tag = match source {
            Source::Individual => self.recent_draw(user, None, ts, in_tweet),
            Source::Social => self.recent_draw(user, Some(user), ts, in_tweet),
            Source::Network => self.network_draw(user, is_seed, in_tweet),
            Source::External => None,
        };
        match tag {
            Some(tag) => (tag, source),
            None => (self.fresh_tag(), Source::External),
        }
    }

    /// Recency-weighted draw from the user's own history, or (with
    /// `exposure_of`) from the seed's followee exposure minus its own history.
    fn recent_draw(
        &mut self,
        user: usize,
        exposure_of: Option<usize>,
        ts: i64,
        in_tweet: &[u32],
    ) -> Option<u32> {
        let own = &self.own[user];
        let history = match exposure_of {
            Some(seed) => &self.exposure[seed],
            None => own,
        };
        let alpha = self.params.recency_exponent;
        self.weights.clear();
        let mut total = 0.0;
        for &(last, tag) in history.by_time.iter().rev() {
            if in_tweet.contains(&tag) || (exposure_of.is_some() && own.contains(tag)) {
                continue;
            }
            let age = (ts - last).max(1) as f64;
            total += libm::pow(age, -alpha);
            self.weights.push((total, tag));
            if self.weights.len() == RECENT_CANDIDATES {
                break;
            }
        }
        if self.weights.is_empty() {
            return None;
        }
        let x = self.rng.gen::<f64>() * total;
        let i = self
            .weights
            .partition_point(|&(cum, _)| cum <= x)
            .min(self.weights.len() - 1);
        Some(self.weights[i].1)
    }

    fn outside_bubble(&self, user: usize, is_seed: bool, tag: u32, in_tweet: &[u32]) -> bool {
        !in_tweet.contains(&tag)
            && !self.own[user].contains(tag)
            && !(is_seed && self.exposure[user].contains(tag))
    }

    /// Popularity-weighted draw of a hashtag outside the user's bubble.
    fn network_draw(&mut self, user: usize, is_seed: bool, in_tweet: &[u32]) -> Option<u32> {
        if self.log.is_empty() {
            return None;
        }
        for _ in 0..NETWORK_TRIES {
            let tag = self.log[self.rng.gen_range(0..self.log.len())];
            if self.outside_bubble(user, is_seed, tag, in_tweet) {
                return Some(tag);
            }
        }
        // Rejection kept failing; fall back to an exact pass.
        let eligible: Vec<(u32, u32)> = (0..self.counts.len() as u32)
            .filter(|&t| {
                self.counts[t as usize] > 0 && self.outside_bubble(user, is_seed, t, in_tweet)
            })
            .map(|t| (t, self.counts[t as usize]))
            .collect();
        let total: u64 = eligible.iter().map(|&(_, c)| u64::from(c)).sum();
        if total == 0 {
            return None;
        }
        let mut x = self.rng.gen_range(0..total);
        for (t, c) in eligible {
            if x < u64::from(c) {
                return Some(t);
            }
            x -= u64::from(c);
        }
        unreachable!("x < total")
    }

    fn fresh_tag(&mut self) -> u32 {
        let id = self.tag_names.len() as u32;
        let width = digits(self.params.vocab_size.saturating_sub(1).max(1));
        let name = match self.vocabulary.pop() {
            Some(word) => format!("h{word:0width$}"),
            None => format!("h{}", self.params.vocab_size + (id as usize)),
        };
        self.tag_names.push(name);
        self.counts.push(0);
        id
    }

    fn commit(&mut self, user: usize, tag: u32, ts: i64) {
        self.own[user].touch(tag, ts);
        self.log.push(tag);
        self.counts[tag as usize] += 1;
        if let Some(b) = user.checked_sub(self.params.n_seed_users) {
            for &seed in &self.followers[b] {
                self.exposure[seed].touch(tag, ts);
            }
        }
    }
}

fn rem_day(t: f64) -> f64 {
    let r = libm::fmod(t, DAY_SECONDS);
    if r < 0.0 {
        r + DAY_SECONDS
    } else {
        r
    }
}

fn digits(n: usize) -> usize {
    let mut d = 1;
    let mut n = n / 10;
    while n > 0 {
        d += 1;
        n /= 10;
    }
    d
}

fn shuffle<T>(xs: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..xs.len()).rev() {
        let j = rng.gen_range(0..=i);
        xs.swap(i, j);
    }
}
