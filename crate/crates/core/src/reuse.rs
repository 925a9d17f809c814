//! Reuse-type classification of seed-user hashtag assignments.
//!
//! For an assignment of hashtag `h` by seed user `u` at time `t`, the label
//! depends only on usages of `h` strictly before `t`:
//!
//! | used by `u` | used by a followee of `u` | used by anyone else | label |
//! |---|---|---|---|
//! | yes | yes | - | individual/social |
//! | yes | no | - | individual |
//! | no | yes | - | social |
//! | no | no | yes | network |
//! | no | no | no | external |
//!
//! Equal timestamps are never prior to each other. [`classify_all`] sweeps
//! the corpus once in time order, querying a [`ReuseIndex`] before
//! inserting each timestamp group, and records the recency of the most
//! recent own and followee usage alongside each label.

use alloc::vec::Vec;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::corpus::{Assignment, Corpus, TagId, UserId};
use crate::fxmap::{map_with_capacity, pair_key, FxHashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReuseLabel {
    Individual,
    Social,
    IndividualSocial,
    Network,
    External,
}

impl ReuseLabel {
    pub const ALL: [ReuseLabel; 5] = [
        ReuseLabel::Individual,
        ReuseLabel::Social,
        ReuseLabel::IndividualSocial,
        ReuseLabel::Network,
        ReuseLabel::External,
    ];

    pub fn from_flags(individual: bool, social: bool, network: bool) -> Self {
        match (individual, social, network) {
            (true, true, _) => ReuseLabel::IndividualSocial,
            (true, false, _) => ReuseLabel::Individual,
            (false, true, _) => ReuseLabel::Social,
            (false, false, true) => ReuseLabel::Network,
            (false, false, false) => ReuseLabel::External,
        }
    }

    pub fn has_individual(self) -> bool {
        matches!(self, ReuseLabel::Individual | ReuseLabel::IndividualSocial)
    }

    pub fn has_social(self) -> bool {
        matches!(self, ReuseLabel::Social | ReuseLabel::IndividualSocial)
    }

    /// Individual, social or both.
    pub fn is_explained(self) -> bool {
        self.has_individual() || self.has_social()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReuseLabel::Individual => "individual",
            ReuseLabel::Social => "social",
            ReuseLabel::IndividualSocial => "individual_social",
            ReuseLabel::Network => "network",
            ReuseLabel::External => "external",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl core::fmt::Display for ReuseLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReuseError {
    #[error("user {0:?} is not a seed user")]
    NotSeedUser(UserId),
}

/// What the causal index knows about one (user, hashtag) query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exposure {
    pub last_own: Option<i64>,
    pub last_social: Option<i64>,
    pub others: bool,
}

impl Exposure {
    pub fn label(&self) -> ReuseLabel {
        ReuseLabel::from_flags(
            self.last_own.is_some(),
            self.last_social.is_some(),
            self.others,
        )
    }
}

/// Incremental last-use index over the assignments inserted so far.
///
/// Per (user, hashtag) it keeps the latest usage time; per hashtag it keeps
/// the list of distinct users. A social query walks whichever is shorter:
/// the followee list or the hashtag's user list.
pub struct ReuseIndex<'c> {
    corpus: &'c Corpus,
    last_use: FxHashMap<u64, i64>,
    tag_users: Vec<Vec<UserId>>,
}

impl<'c> ReuseIndex<'c> {
    pub fn new(corpus: &'c Corpus) -> Self {
        Self {
            corpus,
            last_use: map_with_capacity(corpus.assignments().len() / 2),
            tag_users: alloc::vec![Vec::new(); corpus.n_tags()],
        }
    }

    /// Records a usage. Callers must insert in non-decreasing time order.
    pub fn insert(&mut self, a: &Assignment) {
        let slot = self.last_use.entry(pair_key(a.user.0, a.tag.0));
        match slot {
            hashbrown::hash_map::Entry::Occupied(mut e) => {
                if *e.get() < a.timestamp {
                    e.insert(a.timestamp);
                }
            }
            hashbrown::hash_map::Entry::Vacant(e) => {
                e.insert(a.timestamp);
                self.tag_users[a.tag.index()].push(a.user);
            }
        }
    }

    pub fn last_use(&self, user: UserId, tag: TagId) -> Option<i64> {
        self.last_use.get(&pair_key(user.0, tag.0)).copied()
    }

    pub fn query(&self, user: UserId, tag: TagId) -> Result<Exposure, ReuseError> {
        let followees = self
            .corpus
            .followees(user)
            .ok_or(ReuseError::NotSeedUser(user))?;
        let users = &self.tag_users[tag.index()];
        let last_own = self.last_use(user, tag);

        let mut social_users = 0usize;
        let mut last_social: Option<i64> = None;
        let mut visit = |ts: i64| {
            social_users += 1;
            last_social = Some(last_social.map_or(ts, |m: i64| m.max(ts)));
        };
        if followees.len() <= users.len() {
            for &f in followees {
                if let Some(ts) = self.last_use(f, tag) {
                    visit(ts);
                }
            }
        } else {
            for &v in users {
                if followees.binary_search(&v).is_ok() {
                    visit(self.last_use(v, tag).expect("indexed user"));
                }
            }
        }

        let others = users.len() - usize::from(last_own.is_some()) - social_users > 0;
        Ok(Exposure {
            last_own,
            last_social,
            others,
        })
    }
}

/// Labels one assignment against an index holding exactly the strictly
/// earlier assignments.
pub fn classify_assignment(
    index: &ReuseIndex<'_>,
    a: &Assignment,
) -> Result<ReuseLabel, ReuseError> {
    index.query(a.user, a.tag).map(|e| e.label())
}

/// Classification result for one seed-user assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReuseRecord {
    /// Position in [`Corpus::assignments`].
    pub assignment: usize,
    pub label: ReuseLabel,
    /// Seconds since the user's own latest prior usage (at least 1).
    pub individual_delta: Option<u64>,
    /// Seconds since the latest prior followee usage (at least 1).
    pub social_delta: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReuseBreakdown {
    counts: [u64; 5],
}

impl ReuseBreakdown {
    pub fn add(&mut self, label: ReuseLabel) {
        self.counts[label.slot()] += 1;
    }

    pub fn merge(&mut self, other: &ReuseBreakdown) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }

    pub fn count(&self, label: ReuseLabel) -> u64 {
        self.counts[label.slot()]
    }

    pub fn n_classified(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `None` when nothing was classified.
    pub fn fraction(&self, label: ReuseLabel) -> Option<f64> {
        let n = self.n_classified();
        (n > 0).then(|| self.count(label) as f64 / n as f64)
    }

    /// Share of assignments explained by individual or social reuse.
    pub fn explained_fraction(&self) -> Option<f64> {
        let n = self.n_classified();
        let explained = self.count(ReuseLabel::Individual)
            + self.count(ReuseLabel::Social)
            + self.count(ReuseLabel::IndividualSocial);
        (n > 0).then(|| explained as f64 / n as f64)
    }
}

impl FromIterator<ReuseLabel> for ReuseBreakdown {
    fn from_iter<I: IntoIterator<Item = ReuseLabel>>(iter: I) -> Self {
        let mut b = ReuseBreakdown::default();
        for label in iter {
            b.add(label);
        }
        b
    }
}

#[derive(Serialize)]
struct LabelEntry {
    count: u64,
    fraction: Option<f64>,
}

impl Serialize for ReuseBreakdown {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ReuseBreakdown", 7)?;
        for label in ReuseLabel::ALL {
            s.serialize_field(
                label.as_str(),
                &LabelEntry {
                    count: self.count(label),
                    fraction: self.fraction(label),
                },
            )?;
        }
        s.serialize_field("n_classified", &self.n_classified())?;
        s.serialize_field("explained_fraction", &self.explained_fraction())?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    /// One record per seed-user assignment, in corpus order.
    pub records: Vec<ReuseRecord>,
    pub breakdown: ReuseBreakdown,
}

/// Labels every seed-user assignment.
///
/// Hashtag timelines are independent, so assignments are bucketed by
/// hashtag (keeping time order) into compact entries and each timeline is
/// swept on its own, with per-user state in flat arrays stamped by the
/// current hashtag. The sweep then reads memory sequentially; a single pass
/// over one global (user, hashtag) map stops fitting in cache on large
/// corpora and slows down super-linearly.
pub fn classify_all(corpus: &Corpus) -> Classification {
    const NONE: u32 = u32::MAX;

    #[derive(Clone, Copy)]
    struct Entry {
        ts: i64,
        user: u32,
        /// Index into `records`, or `NONE` for non-seed users.
        record: u32,
    }

    let assignments = corpus.assignments();
    let mut offsets = alloc::vec![0u32; corpus.n_tags() + 1];
    for a in assignments {
        offsets[a.tag.index() + 1] += 1;
    }
    for t in 0..corpus.n_tags() {
        offsets[t + 1] += offsets[t];
    }

    let mut records = Vec::new();
    let mut next = offsets.clone();
    let mut entries = alloc::vec![
        Entry {
            ts: 0,
            user: 0,
            record: NONE
        };
        assignments.len()
    ];
    for (i, a) in assignments.iter().enumerate() {
        let record = if corpus.is_seed(a.user) {
            records.push(ReuseRecord {
                assignment: i,
                label: ReuseLabel::External,
                individual_delta: None,
                social_delta: None,
            });
            records.len() as u32 - 1
        } else {
            NONE
        };
        let pos = &mut next[a.tag.index()];
        entries[*pos as usize] = Entry {
            ts: a.timestamp,
            user: a.user.0,
            record,
        };
        *pos += 1;
    }

    let mut stamp = alloc::vec![NONE; corpus.n_users()];
    let mut last = alloc::vec![0i64; corpus.n_users()];
    let mut seen: Vec<UserId> = Vec::new();
    for tag in 0..corpus.n_tags() {
        let timeline = &entries[offsets[tag] as usize..offsets[tag + 1] as usize];
        let tag = tag as u32;
        seen.clear();
        let mut start = 0;
        while start < timeline.len() {
            let ts = timeline[start].ts;
            let end = start + timeline[start..].partition_point(|e| e.ts == ts);
            for e in &timeline[start..end] {
                if e.record == NONE {
                    continue;
                }
                let user = e.user as usize;
                let followees = corpus.followees(UserId(e.user)).expect("seed user");
                let last_own = (stamp[user] == tag).then(|| last[user]);
                let mut social_users = 0usize;
                let mut last_social: Option<i64> = None;
                let mut visit = |f: UserId| {
                    if stamp[f.index()] == tag {
                        social_users += 1;
                        let t = last[f.index()];
                        last_social = Some(last_social.map_or(t, |m| m.max(t)));
                    }
                };
                if followees.len() <= seen.len() {
                    followees.iter().for_each(|&f| visit(f));
                } else {
                    seen.iter()
                        .filter(|v| followees.binary_search(v).is_ok())
                        .for_each(|&v| visit(v));
                }
                let exposure = Exposure {
                    last_own,
                    last_social,
                    others: seen.len() - usize::from(last_own.is_some()) - social_users > 0,
                };
                let delta = |t: i64| (ts - t).max(1) as u64;
                let record = &mut records[e.record as usize];
                record.label = exposure.label();
                record.individual_delta = exposure.last_own.map(delta);
                record.social_delta = exposure.last_social.map(delta);
            }
            for e in &timeline[start..end] {
                let user = e.user as usize;
                if stamp[user] != tag {
                    stamp[user] = tag;
                    seen.push(UserId(e.user));
                }
                last[user] = ts;
            }
            start = end;
        }
    }

    let breakdown = records.iter().map(|r| r.label).collect();
    Classification { records, breakdown }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusBuilder;

    fn fixture(a_follows_b: bool) -> Corpus {
        let mut b = CorpusBuilder::new();
        if a_follows_b {
            b.add_follow("A", "B").unwrap();
        } else {
            b.add_seed("A").unwrap();
        }
        b.add_assignment("C", "t1", 10, "x").unwrap();
        b.add_assignment("B", "t2", 20, "x").unwrap();
        b.add_assignment("A", "t3", 30, "x").unwrap();
        b.add_assignment("A", "t4", 40, "x").unwrap();
        b.add_assignment("A", "t5", 50, "y").unwrap();
        b.build().unwrap()
    }

    fn labels(c: &Corpus) -> Vec<ReuseLabel> {
        classify_all(c).records.iter().map(|r| r.label).collect()
    }

    #[test]
    fn fixture_with_follow() {
        let c = fixture(true);
        assert_eq!(
            labels(&c),
            [
                ReuseLabel::Social,
                ReuseLabel::IndividualSocial,
                ReuseLabel::External
            ]
        );
        let b = classify_all(&c).breakdown;
        assert_eq!(b.n_classified(), 3);
        for l in [
            ReuseLabel::Social,
            ReuseLabel::IndividualSocial,
            ReuseLabel::External,
        ] {
            assert_eq!(b.count(l), 1);
            assert!((b.fraction(l).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(b.count(ReuseLabel::Individual), 0);
    }

    #[test]
    fn fixture_without_follow() {
        let c = fixture(false);
        assert_eq!(
            labels(&c),
            [
                ReuseLabel::Network,
                ReuseLabel::Individual,
                ReuseLabel::External
            ]
        );
    }

    #[test]
    fn first_occurrence_is_external() {
        let mut b = CorpusBuilder::new();
        b.add_follow("A", "B").unwrap();
        b.add_assignment("A", "t1", 10, "new").unwrap();
        assert_eq!(labels(&b.build().unwrap()), [ReuseLabel::External]);
    }

    #[test]
    fn ties_are_not_prior() {
        let mut b = CorpusBuilder::new();
        b.add_follow("A", "B").unwrap();
        b.add_assignment("B", "t1", 10, "x").unwrap();
        b.add_assignment("A", "t2", 10, "x").unwrap();
        b.add_assignment("A", "t3", 10, "x").unwrap();
        assert_eq!(
            labels(&b.build().unwrap()),
            [ReuseLabel::External, ReuseLabel::External]
        );
    }

    #[test]
    fn non_seed_query_errors() {
        let c = fixture(true);
        let index = ReuseIndex::new(&c);
        let first = c.assignments()[0];
        assert_eq!(
            classify_assignment(&index, &first),
            Err(ReuseError::NotSeedUser(c.user_id("C").unwrap()))
        );
    }

    #[test]
    fn no_seed_assignments() {
        let mut b = CorpusBuilder::new();
        b.add_assignment("x", "t", 1, "a").unwrap();
        let cls = classify_all(&b.build().unwrap());
        assert_eq!(cls.breakdown.n_classified(), 0);
        assert_eq!(cls.breakdown.fraction(ReuseLabel::External), None);
        assert_eq!(cls.breakdown.explained_fraction(), None);
    }

    #[test]
    fn deltas_recorded() {
        let c = fixture(true);
        let r = classify_all(&c).records;
        assert_eq!((r[0].individual_delta, r[0].social_delta), (None, Some(10)));
        assert_eq!(
            (r[1].individual_delta, r[1].social_delta),
            (Some(10), Some(20))
        );
    }

    #[test]
    fn walks_tag_users_when_followee_list_is_longer() {
        let mut b = CorpusBuilder::new();
        for f in ["f1", "f2", "f3", "f4"] {
            b.add_follow("A", f).unwrap();
        }
        b.add_assignment("f3", "t1", 5, "x").unwrap();
        b.add_assignment("A", "t2", 9, "x").unwrap();
        let c = b.build().unwrap();
        let r = classify_all(&c).records;
        assert_eq!(r[0].label, ReuseLabel::Social);
        assert_eq!(r[0].social_delta, Some(4));
    }
}
