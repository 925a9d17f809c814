//! Dataset file formats.
//!
//! Assignments, TSV: `user_id \t tweet_id \t timestamp \t hashtag`, one row
//! per hashtag occurrence. Assignments, JSONL: one object per tweet,
//! `{"user": .., "tweet": .., "ts": .., "hashtags": [..]}`; ids may be
//! strings or integers. Network, TSV: `seed_user_id \t followee_user_id`; a
//! row holding only a seed id declares a seed without followees.
//!
//! Blank lines are skipped and a trailing `\r` is ignored. By default the
//! first malformed line aborts loading; in lenient mode malformed lines are
//! skipped and counted.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hashreuse_core::{Corpus, CorpusBuilder, CorpusError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Malformed lines quoted in a load report; the rest are only counted.
const QUOTED_ERRORS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Tsv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "jsonl" => Ok(Format::Jsonl),
            _ => Err(format!("unknown format {s:?} (expected tsv or jsonl)")),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Tsv => "tsv",
            Format::Jsonl => "jsonl",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileReport {
    pub sha256: String,
    /// Non-blank lines accepted.
    pub records: u64,
    pub malformed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub first_errors: Vec<LineError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub assignments: FileReport,
    pub network: FileReport,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn read_file(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_corpus(
    assignments: &Path,
    network: &Path,
    format: Format,
    lenient: bool,
) -> Result<(Corpus, LoadReport), LoadError> {
    let assignments_text = read_file(assignments)?;
    let network_text = read_file(network)?;
    let mut builder = CorpusBuilder::new();
    let network_report = parse_lines(&network_text, network, lenient, |line| {
        parse_network_line(&mut builder, line)
    })?;
    let assignments_report = parse_lines(&assignments_text, assignments, lenient, |line| {
        match format {
            Format::Tsv => parse_tsv_line(&mut builder, line),
            Format::Jsonl => parse_jsonl_line(&mut builder, line),
        }
    })?;
    let corpus = builder.build()?;
    Ok((
        corpus,
        LoadReport {
            assignments: assignments_report,
            network: network_report,
        },
    ))
}

fn parse_lines(
    text: &str,
    path: &Path,
    lenient: bool,
    mut parse: impl FnMut(&str) -> Result<(), String>,
) -> Result<FileReport, LoadError> {
    let mut report = FileReport {
        sha256: sha256_hex(text.as_bytes()),
        records: 0,
        malformed: 0,
        first_errors: Vec::new(),
    };
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        match parse(line) {
            Ok(()) => report.records += 1,
            Err(reason) if lenient => {
                report.malformed += 1;
                if report.first_errors.len() < QUOTED_ERRORS {
                    report.first_errors.push(LineError { line: i + 1, reason });
                }
            }
            Err(reason) => {
                return Err(LoadError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    reason,
                })
            }
        }
    }
    Ok(report)
}

fn parse_tsv_line(builder: &mut CorpusBuilder, line: &str) -> Result<(), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [user, tweet, ts, hashtag] = fields[..] else {
        return Err(format!("expected 4 tab-separated fields, found {}", fields.len()));
    };
    let ts: i64 = ts
        .trim()
        .parse()
        .map_err(|_| format!("invalid timestamp {ts:?}"))?;
    builder
        .add_assignment(user, tweet, ts, hashtag)
        .map_err(|e| e.to_string())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Id {
    Text(String),
    Number(u64),
}

impl Id {
    fn into_string(self) -> String {
        match self {
            Id::Text(s) => s,
            Id::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TweetLine {
    user: Id,
    tweet: Id,
    ts: i64,
    hashtags: Vec<String>,
}

fn parse_jsonl_line(builder: &mut CorpusBuilder, line: &str) -> Result<(), String> {
    let t: TweetLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let (user, tweet) = (t.user.into_string(), t.tweet.into_string());
    // Validate every hashtag before touching the builder so a rejected
    // line leaves no trace.
    for h in &t.hashtags {
        hashreuse_core::normalize_hashtag(h).map_err(|e| e.to_string())?;
    }
    builder
        .add_tweet(&user, &tweet, t.ts)
        .map_err(|e| e.to_string())?;
    for h in &t.hashtags {
        builder
            .add_assignment(&user, &tweet, t.ts, h)
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn parse_network_line(builder: &mut CorpusBuilder, line: &str) -> Result<(), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    match fields[..] {
        [seed] | [seed, ""] => builder.add_seed(seed),
        [seed, followee] => {
            if seed.is_empty() {
                return Err("empty seed id".into());
            }
            builder.add_follow(seed, followee)
        }
        _ => return Err(format!("expected 2 tab-separated fields, found {}", fields.len())),
    }
    .map_err(|e| e.to_string())
}

/// Assignments as TSV, in corpus order.
pub fn assignments_tsv(corpus: &Corpus) -> String {
    let mut out = String::new();
    for a in corpus.assignments() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            corpus.user_name(a.user),
            corpus.tweet_name(a.tweet),
            a.timestamp,
            corpus.tag_name(a.tag)
        );
    }
    out
}

/// Tweets as JSONL ordered by (timestamp, tweet id), including tweets
/// without hashtags.
pub fn assignments_jsonl(corpus: &Corpus) -> String {
    #[derive(Serialize)]
    struct Row<'a> {
        user: &'a str,
        tweet: &'a str,
        ts: i64,
        hashtags: Vec<&'a str>,
    }
    let mut tags: Vec<Vec<&str>> = vec![Vec::new(); corpus.n_tweets()];
    for a in corpus.assignments() {
        tags[a.tweet.index()].push(corpus.tag_name(a.tag));
    }
    let mut tweets: Vec<_> = corpus.tweets().collect();
    tweets.sort_by_key(|(id, rec)| (rec.timestamp, *id));
    let mut out = String::new();
    for (id, rec) in tweets {
        let row = Row {
            user: corpus.user_name(rec.user),
            tweet: corpus.tweet_name(id),
            ts: rec.timestamp,
            hashtags: std::mem::take(&mut tags[id.index()]),
        };
        out.push_str(&serde_json::to_string(&row).expect("serializable"));
        out.push('\n');
    }
    out
}

/// Follow network as TSV: seeds in id order, followees sorted.
pub fn network_tsv(corpus: &Corpus) -> String {
    let mut out = String::new();
    for &seed in corpus.seeds() {
        let followees = corpus.followees(seed).unwrap_or(&[]);
        if followees.is_empty() {
            let _ = writeln!(out, "{}", corpus.user_name(seed));
        }
        for &f in followees {
            let _ = writeln!(out, "{}\t{}", corpus.user_name(seed), corpus.user_name(f));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn three_line_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.tsv", "u\tt1\t100\t#One\nu\tt1\t100\ttwo\n\n");
        let n = write(dir.path(), "n.tsv", "u\tv\n");
        let (c, report) = load_corpus(&a, &n, Format::Tsv, false).unwrap();
        assert_eq!(c.assignments().len(), 2);
        assert_eq!(report.assignments.records, 2);
        assert_eq!(report.network.records, 1);
    }

    #[test]
    fn empty_files_give_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.tsv", "");
        let n = write(dir.path(), "n.tsv", "");
        let (c, _) = load_corpus(&a, &n, Format::Tsv, false).unwrap();
        assert_eq!(c, Corpus::empty());
    }

    #[test]
    fn bad_timestamp_is_reported_with_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.tsv", "u\tt1\t1\tx\nu\tt2\tabc\ty\n");
        let n = write(dir.path(), "n.tsv", "");
        match load_corpus(&a, &n, Format::Tsv, false) {
            Err(LoadError::Parse { line, reason, .. }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let (c, report) = load_corpus(&a, &n, Format::Tsv, true).unwrap();
        assert_eq!(c.assignments().len(), 1);
        assert_eq!(report.assignments.malformed, 1);
        assert_eq!(report.assignments.first_errors[0].line, 2);
    }

    #[test]
    fn missing_file_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let n = write(dir.path(), "n.tsv", "");
        let err = load_corpus(&dir.path().join("nope.tsv"), &n, Format::Tsv, false).unwrap_err();
        assert!(err.to_string().contains("nope.tsv"));
    }

    #[test]
    fn jsonl_matches_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a.jsonl",
            "{\"user\": 7, \"tweet\": \"t1\", \"ts\": 5, \"hashtags\": [\"#A\", \"b\"]}\n\
             {\"user\": \"7\", \"tweet\": 2, \"ts\": 9, \"hashtags\": []}\n",
        );
        let t = write(dir.path(), "a.tsv", "7\tt1\t5\ta\n7\tt1\t5\tb\n");
        let n = write(dir.path(), "n.tsv", "7\n");
        let (j, _) = load_corpus(&a, &n, Format::Jsonl, false).unwrap();
        let (s, _) = load_corpus(&t, &n, Format::Tsv, false).unwrap();
        assert_eq!(j.assignments().len(), 2);
        assert_eq!(j.n_tweets(), 2);
        assert_eq!(s.n_tweets(), 1);
        assert_eq!(j.stats().n_distinct_hashtags, s.stats().n_distinct_hashtags);
        assert!(j.is_seed(j.user_id("7").unwrap()));
    }

    #[test]
    fn rejected_jsonl_line_leaves_no_trace() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a.jsonl",
            "{\"user\": \"u\", \"tweet\": \"t\", \"ts\": 5, \"hashtags\": [\"ok\", \"#\"]}\n",
        );
        let n = write(dir.path(), "n.tsv", "");
        let (c, report) = load_corpus(&a, &n, Format::Jsonl, true).unwrap();
        assert_eq!(report.assignments.malformed, 1);
        assert_eq!(c.n_tweets(), 0);
        assert_eq!(c.n_users(), 0);
    }

    #[test]
    fn network_rows() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.tsv", "");
        let n = write(dir.path(), "n.tsv", "s\tf\ns\tg\nlonely\t\nx\tx\n");
        assert!(matches!(
            load_corpus(&a, &n, Format::Tsv, false),
            Err(LoadError::Parse { line: 4, .. })
        ));
        let (c, _) = load_corpus(&a, &n, Format::Tsv, true).unwrap();
        assert_eq!(c.seeds().len(), 2);
        assert_eq!(network_tsv(&c), "lonely\ns\tf\ns\tg\n");
    }

    #[test]
    fn writers_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a.tsv",
            "b\tt2\t20\tx\na\tt1\t10\ty\r\na\tt1\t10\tx\nc\tt3\t20\tz\n",
        );
        let n = write(dir.path(), "n.tsv", "a\tb\nc\n");
        let (c, _) = load_corpus(&a, &n, Format::Tsv, false).unwrap();
        let a2 = write(dir.path(), "a2.tsv", &assignments_tsv(&c));
        let j2 = write(dir.path(), "a2.jsonl", &assignments_jsonl(&c));
        let n2 = write(dir.path(), "n2.tsv", &network_tsv(&c));
        assert_eq!(load_corpus(&a2, &n2, Format::Tsv, false).unwrap().0, c);
        assert_eq!(load_corpus(&j2, &n2, Format::Jsonl, false).unwrap().0, c);
    }
}
