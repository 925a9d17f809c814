#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

/// Runs the binary from the tests directory, so fixture paths are
/// `fixtures/...`.
pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hashreuse"))
        .args(args)
        .current_dir(tests_dir())
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

pub const DATA: [&str; 4] = [
    "--assignments",
    "fixtures/assignments.tsv",
    "--network",
    "fixtures/network.tsv",
];

/// One invocation of every subcommand on the fixtures; `{out}` stands for
/// the output directory.
pub fn cases() -> Vec<(&'static str, Vec<&'static str>)> {
    let on = |data: [&'static str; 4], cmd: &'static str, extra: &[&'static str]| {
        let mut v = vec![cmd];
        v.extend(data);
        v.extend(extra);
        v
    };
    let with_data = |cmd, extra: &[&'static str]| on(DATA, cmd, extra);
    let synthetic = |cmd, extra: &[&'static str]| on(SYNTHETIC, cmd, extra);
    vec![
        ("stats", with_data("stats", &["--out-dir", "{out}"])),
        (
            "stats_jsonl",
            vec![
                "stats",
                "--assignments",
                "fixtures/assignments.jsonl",
                "--network",
                "fixtures/network.tsv",
                "--format",
                "jsonl",
            ],
        ),
        (
            "stats_lenient",
            vec![
                "stats",
                "--assignments",
                "fixtures/malformed.tsv",
                "--network",
                "fixtures/network.tsv",
                "--lenient",
            ],
        ),
        ("classify", with_data("classify", &["--labels", "--out-dir", "{out}"])),
        ("recency", synthetic("recency", &["--bins", "12", "--out-dir", "{out}"])),
        (
            "recency_small",
            with_data("recency", &["--bins", "8", "--min-hours", "0.01", "--max-hours", "100"]),
        ),
        ("recommend", with_data("recommend", &["--user", "a", "--at", "401", "--k", "3"])),
        (
            "recommend_rerank",
            with_data(
                "recommend",
                &["--user", "b", "--at", "401", "--algo", "bll_s", "--rerank", "hybrid", "--lambda", "0.3"],
            ),
        ),
        (
            "recommend_synthetic",
            synthetic("recommend", &["--user", "s02", "--at", "1500500000", "--algo", "cf", "--neighbors", "3"]),
        ),
        ("recommend_mp", with_data("recommend", &["--user", "nobody", "--at", "301", "--algo", "mp"])),
        ("evaluate", synthetic("evaluate", &["--kmax", "5", "--out-dir", "{out}"])),
        ("evaluate_small", with_data("evaluate", &["--kmax", "3"])),
        (
            "evaluate_config",
            synthetic("evaluate", &["--config", "fixtures/evaluate.conf", "--algos", "bll_is,mp", "--out-dir", "{out}"]),
        ),
        (
            "generate",
            vec![
                "generate",
                "--out-dir",
                "{out}",
                "--n-seed-users",
                "3",
                "--n-followees-per-seed",
                "2",
                "--n-background-users",
                "4",
                "--n-tweets-per-user",
                "4",
                "--rng-seed",
                "7",
            ],
        ),
    ]
}

pub const SYNTHETIC: [&str; 4] = [
    "--assignments",
    "fixtures/synthetic_assignments.tsv",
    "--network",
    "fixtures/synthetic_network.tsv",
];

pub fn substitute<'a>(args: &'a [&'a str], out: &'a str) -> Vec<&'a str> {
    args.iter().map(|a| if *a == "{out}" { out } else { a }).collect()
}
