//! Subcommand implementations.
//!
//! Each subcommand resolves all of its parameters first, so the metadata
//! header is known before any work starts, then prints its JSON report to
//! stdout. With an output directory the report and any columnar files are
//! also written there.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::PathBuf;

use hashreuse_core::beyond::{normalize_scores, rerank_hybrid, HashtagSimilarityIndex, HybridParams};
use hashreuse_core::eval::{aggregate, evaluate_user, make_split, EvalConfig, EvalContext, EvalReport};
use hashreuse_core::recommend::{
    recommend, recommend_most_popular, Algorithm, BllParams, CfParams, MixNormalization, MixParams,
    RankedList, RecommendError, RecommenderParams, UsageIndex,
};
use hashreuse_core::synth::{generate, GenParams, Source};
use hashreuse_core::temporal::{
    build_histogram, detect_daily_peak, samples_from, HistogramSpec, RecencyKind,
};
use hashreuse_core::{classify_all, Corpus, CorpusStats, ReuseBreakdown};
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::{
    ClassifyArgs, Cli, Command, DataArgs, EvaluateArgs, GenerateArgs, ModelArgs, RecencyArgs,
    RecommendArgs,
};
use crate::config::{load_config, Resolver};
use crate::io::{self, Format, LoadReport};
use crate::output::{ensure_dir, to_json, write_atomic, Meta, TOOL, VERSION};
use crate::CliError;

const DEFAULT_ALGOS: &str = "bll_i,bll_s,bll_is,cf,mp";

struct Log(u8);

impl Log {
    fn info(&self, msg: impl FnOnce() -> String) {
        if self.0 > 0 {
            eprintln!("[{TOOL}] {}", msg());
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let mut r = Resolver::new(file);
    // Thread count never reaches an output, so it is not part of the
    // echoed config.
    let workers = r.lookup("workers", cli.workers)?.unwrap_or(0);
    let log = Log(cli.verbose);
    match cli.command {
        Command::Stats(a) => stats(&mut r, &a, &log),
        Command::Classify(a) => classify(&mut r, &a, &log),
        Command::Recency(a) => recency(&mut r, &a, &log),
        Command::Recommend(a) => recommend_cmd(&mut r, &a, &log),
        Command::Evaluate(a) => evaluate_cmd(&mut r, &a, workers, &log),
        Command::Generate(a) => generate_cmd(&mut r, &a, &log),
    }
}

/// Where a subcommand's outputs go.
struct Sink {
    command: &'static str,
    out_dir: Option<PathBuf>,
    meta: Meta,
}

impl Sink {
    fn new(r: &Resolver, command: &'static str, out_dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(dir) = &out_dir {
            ensure_dir(dir)?;
        }
        Ok(Self {
            command,
            out_dir,
            meta: Meta {
                tool: TOOL,
                version: VERSION,
                command: command.to_string(),
                config: r.effective().clone(),
                config_hash: r.config_hash(command),
            },
        })
    }

    /// Prints the report and writes `<command>.json`.
    fn report<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        let json = to_json(value);
        if let Some(dir) = &self.out_dir {
            write_atomic(&dir.join(format!("{}.json", self.command)), &json)?;
        }
        let _ = std::io::stdout().lock().write_all(json.as_bytes());
        Ok(())
    }

    /// Writes a columnar file with the metadata header, if there is an
    /// output directory.
    fn table(&self, name: &str, columns: &[&str], rows: &str) -> Result<(), CliError> {
        self.file(name, &format!("{}{rows}", self.meta.text_header(columns)))
    }

    fn file(&self, name: &str, contents: &str) -> Result<(), CliError> {
        match &self.out_dir {
            Some(dir) => write_atomic(&dir.join(name), contents),
            None => Ok(()),
        }
    }
}

struct DataSpec {
    assignments: PathBuf,
    network: PathBuf,
    format: Format,
    lenient: bool,
    out_dir: Option<PathBuf>,
}

fn data_spec(r: &mut Resolver, a: &DataArgs) -> Result<DataSpec, CliError> {
    let missing = |flag: &str| usage(format!("missing required parameter --{flag}"));
    Ok(DataSpec {
        assignments: r
            .lookup("assignments", a.assignments.clone())?
            .ok_or_else(|| missing("assignments"))?,
        network: r
            .lookup("network", a.network.clone())?
            .ok_or_else(|| missing("network"))?,
        format: r.get("format", a.format, Format::Tsv)?,
        lenient: r.switch("lenient", a.lenient)?,
        out_dir: r.lookup("out_dir", a.out_dir.clone())?,
    })
}

fn load(spec: &DataSpec, log: &Log) -> Result<(Corpus, LoadReport), CliError> {
    log.info(|| {
        format!(
            "loading {} ({}) and {}",
            spec.assignments.display(),
            spec.format,
            spec.network.display()
        )
    });
    let (corpus, report) =
        io::load_corpus(&spec.assignments, &spec.network, spec.format, spec.lenient)?;
    for (path, file) in [
        (&spec.assignments, &report.assignments),
        (&spec.network, &report.network),
    ] {
        if file.malformed > 0 {
            eprintln!(
                "[{TOOL}] warning: skipped {} malformed line(s) in {}",
                file.malformed,
                path.display()
            );
        }
    }
    log.info(|| {
        let s = corpus.stats();
        format!(
            "loaded {} assignments, {} tweets, {} users ({} seeds)",
            s.n_assignments, s.n_tweets, s.n_users, s.n_seed_users
        )
    });
    Ok((corpus, report))
}

fn stats(r: &mut Resolver, a: &DataArgs, log: &Log) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Report<'a> {
        meta: &'a Meta,
        input: &'a LoadReport,
        #[serde(flatten)]
        stats: CorpusStats,
    }
    let spec = data_spec(r, a)?;
    let sink = Sink::new(r, "stats", spec.out_dir.clone())?;
    let (corpus, input) = load(&spec, log)?;
    sink.report(&Report {
        meta: &sink.meta,
        input: &input,
        stats: corpus.stats(),
    })
}

fn classify(r: &mut Resolver, a: &ClassifyArgs, log: &Log) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Report<'a> {
        meta: &'a Meta,
        input: &'a LoadReport,
        #[serde(flatten)]
        breakdown: ReuseBreakdown,
    }
    let spec = data_spec(r, &a.data)?;
    let labels = r.switch("labels", a.labels)?;
    if labels && spec.out_dir.is_none() {
        return Err(usage("--labels needs --out-dir"));
    }
    let sink = Sink::new(r, "classify", spec.out_dir.clone())?;
    let (corpus, input) = load(&spec, log)?;
    let result = classify_all(&corpus);
    log.info(|| format!("classified {} assignments", result.records.len()));
    if labels {
        let mut rows = String::new();
        for rec in &result.records {
            let x = corpus.resolve(&corpus.assignments()[rec.assignment]);
            rows.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                x.user_id,
                x.tweet_id,
                x.timestamp,
                x.hashtag,
                rec.label.as_str()
            ));
        }
        sink.table("labels.tsv", &["user", "tweet", "ts", "hashtag", "label"], &rows)?;
    }
    sink.report(&Report {
        meta: &sink.meta,
        input: &input,
        breakdown: result.breakdown,
    })
}

fn recency(r: &mut Resolver, a: &RecencyArgs, log: &Log) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Bin {
        lo_hours: f64,
        hi_hours: f64,
        center_hours: f64,
        count: u64,
    }
    #[derive(Serialize)]
    struct Peak {
        is_peak: bool,
        bin_index: usize,
        bin_center_hours: f64,
    }
    #[derive(Serialize)]
    struct KindReport {
        kind: RecencyKind,
        n_samples: u64,
        daily_peak: Option<Peak>,
        #[serde(skip_serializing_if = "Option::is_none")]
        peak_error: Option<String>,
        bins: Vec<Bin>,
    }
    #[derive(Serialize)]
    struct Report<'a> {
        meta: &'a Meta,
        input: &'a LoadReport,
        histograms: Vec<KindReport>,
    }

    let spec = data_spec(r, &a.data)?;
    let defaults = HistogramSpec::default();
    let hist_spec = HistogramSpec {
        n_bins: r.get("bins", a.bins, defaults.n_bins)?,
        min_hours: r.get("min_hours", a.min_hours, defaults.min_hours)?,
        max_hours: r.get("max_hours", a.max_hours, defaults.max_hours)?,
    };
    hist_spec.validate().map_err(usage)?;
    let sink = Sink::new(r, "recency", spec.out_dir.clone())?;
    let (corpus, input) = load(&spec, log)?;
    let classification = classify_all(&corpus);

    let mut histograms = Vec::new();
    for kind in [RecencyKind::Individual, RecencyKind::Social] {
        let samples = samples_from(&classification, kind);
        let hist = build_histogram(&samples, kind, &hist_spec).map_err(usage)?;
        let centers = hist.bin_centers_hours();
        let (daily_peak, peak_error) = match detect_daily_peak(&hist) {
            Ok(p) => (
                Some(Peak {
                    is_peak: p.is_peak,
                    bin_index: p.bin_index,
                    bin_center_hours: centers[p.bin_index],
                }),
                None,
            ),
            Err(e) => (None, Some(e.to_string())),
        };
        let rows: String = centers
            .iter()
            .zip(&hist.counts)
            .map(|(c, n)| format!("{c}\t{n}\n"))
            .collect();
        sink.table(
            &format!("recency_{}.tsv", kind.as_str()),
            &["bin_center_hours", "count"],
            &rows,
        )?;
        histograms.push(KindReport {
            kind,
            n_samples: hist.total(),
            daily_peak,
            peak_error,
            bins: (0..hist.n_bins())
                .map(|i| Bin {
                    lo_hours: hist.bin_edges_hours[i],
                    hi_hours: hist.bin_edges_hours[i + 1],
                    center_hours: centers[i],
                    count: hist.counts[i],
                })
                .collect(),
        });
    }
    sink.report(&Report {
        meta: &sink.meta,
        input: &input,
        histograms,
    })
}

struct Model {
    params: RecommenderParams,
    rerank: Option<HybridParams>,
    candidates: usize,
}

fn model(r: &mut Resolver, m: &ModelArgs) -> Result<Model, CliError> {
    let bll_defaults = BllParams::default();
    let bll = BllParams::new(
        r.get("d", m.d, bll_defaults.d)?,
        r.get("min_delta", m.min_delta, bll_defaults.min_delta_seconds)?,
    )
    .map_err(usage)?;
    let mix_defaults = MixParams::default();
    let mix = MixParams::new(
        r.get("beta", m.beta, mix_defaults.beta)?,
        r.get::<MixNormalization>("mix_norm", m.mix_norm, mix_defaults.normalization)?,
    )
    .map_err(usage)?;
    let n_neighbors = r.get("neighbors", m.neighbors, CfParams::default().n_neighbors)?;
    if n_neighbors == 0 {
        return Err(usage("--neighbors must be at least 1"));
    }
    let cf = CfParams {
        n_neighbors,
        ..CfParams::default()
    };
    let mode: String = r.get("rerank", m.rerank.clone(), "none".to_string())?;
    let (rerank, candidates) = match mode.as_str() {
        "none" => (None, 0),
        "hybrid" => {
            let lambda = r.get("lambda", m.lambda, HybridParams::default().lambda)?;
            let pool = r.get("candidates", m.candidates, EvalConfig::default().candidate_pool)?;
            (Some(HybridParams::new(lambda).map_err(usage)?), pool)
        }
        other => return Err(usage(format!("unknown --rerank mode {other:?} (expected hybrid)"))),
    };
    Ok(Model {
        params: RecommenderParams { bll, mix, cf },
        rerank,
        candidates,
    })
}

fn recommend_cmd(r: &mut Resolver, a: &RecommendArgs, log: &Log) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Item<'a> {
        hashtag: &'a str,
        score: f64,
    }
    #[derive(Serialize)]
    struct Report<'a> {
        meta: &'a Meta,
        input: &'a LoadReport,
        algorithm: Algorithm,
        user: &'a str,
        at: i64,
        recommendations: Vec<Item<'a>>,
    }

    let spec = data_spec(r, &a.data)?;
    let algorithm = r.get("algo", a.algo, Algorithm::BllIS)?;
    let user: String = r.require("user", a.user.clone())?;
    let at: i64 = r.require("at", a.at)?;
    let k = r.get("k", a.k, 10usize)?;
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let model = model(r, &a.model)?;
    let sink = Sink::new(r, "recommend", spec.out_dir.clone())?;
    let (corpus, input) = load(&spec, log)?;

    let index = UsageIndex::new(&corpus);
    let fetch = match model.rerank {
        Some(_) => model.candidates.max(k),
        None => k,
    };
    let list = if algorithm == Algorithm::MostPopular {
        recommend_most_popular(&index, at, fetch)
    } else {
        let id = corpus
            .user_id(&user)
            .ok_or_else(|| CliError::Data(format!("unknown user {user:?}")))?;
        recommend(&index, algorithm, id, at, fetch, &model.params).map_err(
            |RecommendError::NotSeedUser(_)| {
                CliError::Data(format!("user {user:?} is not a seed user"))
            },
        )?
    };
    let list = match model.rerank {
        Some(params) => {
            let sim = HashtagSimilarityIndex::build(&corpus, |t| corpus.tweet(t).timestamp < at);
            rerank_hybrid(&normalize_scores(&list), k, &params, &sim)
        }
        None => list,
    };
    sink.report(&Report {
        meta: &sink.meta,
        input: &input,
        algorithm,
        user: &user,
        at,
        recommendations: items(&corpus, &list)
            .map(|(hashtag, score)| Item { hashtag, score })
            .collect(),
    })
}

fn items<'c>(corpus: &'c Corpus, list: &'c RankedList) -> impl Iterator<Item = (&'c str, f64)> + 'c {
    list.items.iter().map(|s| (corpus.tag_name(s.tag), s.score))
}

fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>, CliError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let a: Algorithm = name.parse().map_err(usage)?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    if out.is_empty() {
        return Err(usage("--algos names no algorithm"));
    }
    Ok(out)
}

fn evaluate_cmd(
    r: &mut Resolver,
    a: &EvaluateArgs,
    workers: usize,
    log: &Log,
) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Report<'a> {
        meta: &'a Meta,
        input: &'a LoadReport,
        #[serde(flatten)]
        report: &'a EvalReport,
    }

    let spec = data_spec(r, &a.data)?;
    let algorithms = parse_algorithms(
        &r.lookup("algos", a.algos.clone())?
            .unwrap_or_else(|| DEFAULT_ALGOS.to_string()),
    )?;
    r.record("algos", &algorithms);
    let k_max = r.get("kmax", a.kmax, EvalConfig::default().k_max)?;
    if k_max == 0 {
        return Err(usage("--kmax must be at least 1"));
    }
    let model = model(r, &a.model)?;
    let beyond_flag = r.lookup("beyond_accuracy", a.beyond_accuracy.then_some(true))?;
    let beyond_accuracy = beyond_flag.unwrap_or(false) || model.rerank.is_some();
    r.record("beyond_accuracy", &beyond_accuracy);
    let config = EvalConfig {
        k_max,
        params: model.params,
        rerank: model.rerank,
        candidate_pool: model.candidates.max(k_max),
        beyond_accuracy,
    };
    let sink = Sink::new(r, "evaluate", spec.out_dir.clone())?;
    let (corpus, input) = load(&spec, log)?;

    let split = make_split(&corpus);
    if split.users.is_empty() {
        return Err(CliError::Data(
            "no seed user has a hashtagged tweet before their latest one".into(),
        ));
    }
    log.info(|| format!("evaluating {} users", split.users.len()));
    let ctx = EvalContext::new(&corpus, &split, config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Data(format!("thread pool: {e}")))?;
    // Indexed collect keeps user order whatever the scheduling.
    let per_user = pool.install(|| {
        split
            .users
            .par_iter()
            .map(|u| evaluate_user(&ctx, u, &algorithms))
            .collect::<Vec<_>>()
    });
    let report = aggregate(per_user, &algorithms, &config);

    for curve in &report.algorithms {
        let mut columns = vec!["k", "precision", "recall"];
        if beyond_accuracy {
            columns.extend(["ild", "serendipity"]);
        }
        let rows: String = curve
            .points
            .iter()
            .map(|p| match (p.ild, p.serendipity) {
                (Some(i), Some(s)) => format!("{}\t{}\t{}\t{i}\t{s}\n", p.k, p.precision, p.recall),
                _ => format!("{}\t{}\t{}\n", p.k, p.precision, p.recall),
            })
            .collect();
        sink.table(&format!("pr_{}.tsv", curve.algorithm), &columns, &rows)?;
    }
    sink.report(&Report {
        meta: &sink.meta,
        input: &input,
        report: &report,
    })
}

fn generate_cmd(r: &mut Resolver, a: &GenerateArgs, log: &Log) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct SourceCount {
        count: u64,
        fraction: Option<f64>,
    }
    #[derive(Serialize)]
    struct Report<'a> {
        meta: &'a Meta,
        #[serde(flatten)]
        stats: CorpusStats,
        /// Ground-truth sources of the seed users' assignments.
        ground_truth: BTreeMap<&'static str, SourceCount>,
        files: [&'static str; 3],
    }

    let dflt = GenParams::default();
    let params = GenParams {
        n_seed_users: r.get("n_seed_users", a.n_seed_users, dflt.n_seed_users)?,
        n_followees_per_seed: r.get(
            "n_followees_per_seed",
            a.n_followees_per_seed,
            dflt.n_followees_per_seed,
        )?,
        n_background_users: r.get(
            "n_background_users",
            a.n_background_users,
            dflt.n_background_users,
        )?,
        vocab_size: r.get("vocab_size", a.vocab_size, dflt.vocab_size)?,
        n_tweets_per_user: r.get("n_tweets_per_user", a.n_tweets_per_user, dflt.n_tweets_per_user)?,
        max_hashtags_per_tweet: r.get(
            "max_hashtags_per_tweet",
            a.max_hashtags_per_tweet,
            dflt.max_hashtags_per_tweet,
        )?,
        p_individual: r.get("p_individual", a.p_individual, dflt.p_individual)?,
        p_social: r.get("p_social", a.p_social, dflt.p_social)?,
        p_network: r.get("p_network", a.p_network, dflt.p_network)?,
        p_external: r.get("p_external", a.p_external, dflt.p_external)?,
        recency_exponent: r.get("recency_exponent", a.recency_exponent, dflt.recency_exponent)?,
        daily_amplitude: r.get("daily_amplitude", a.daily_amplitude, dflt.daily_amplitude)?,
        active_window_hours: r.get(
            "active_window_hours",
            a.active_window_hours,
            dflt.active_window_hours,
        )?,
        mean_gap_hours: r.get("mean_gap_hours", a.mean_gap_hours, dflt.mean_gap_hours)?,
        start_time: r.get("start_time", a.start_time, dflt.start_time)?,
        rng_seed: r.get("rng_seed", a.rng_seed, dflt.rng_seed)?,
    };
    params.validate().map_err(usage)?;
    let out_dir: PathBuf = r
        .lookup("out_dir", a.out_dir.clone())?
        .ok_or_else(|| usage("missing required parameter --out-dir"))?;
    let sink = Sink::new(r, "generate", Some(out_dir))?;

    log.info(|| "generating corpus".to_string());
    let generated = generate(&params).map_err(usage)?;
    let corpus = &generated.corpus;
    let mut truth_rows = String::new();
    let mut seed_counts = [0u64; 4];
    for (a, source) in corpus.assignments().iter().zip(&generated.truth.sources) {
        truth_rows.push_str(&format!(
            "{}\t{}\t{}\n",
            corpus.tweet_name(a.tweet),
            corpus.tag_name(a.tag),
            source.as_str()
        ));
        if corpus.is_seed(a.user) {
            seed_counts[*source as usize] += 1;
        }
    }
    let files = ["assignments.tsv", "network.tsv", "ground_truth.tsv"];
    sink.file(files[0], &io::assignments_tsv(corpus))?;
    sink.file(files[1], &io::network_tsv(corpus))?;
    sink.file(files[2], &truth_rows)?;
    let n_seed: u64 = seed_counts.iter().sum();
    let ground_truth = Source::ALL
        .iter()
        .map(|&s| {
            let count = seed_counts[s as usize];
            (
                s.as_str(),
                SourceCount {
                    count,
                    fraction: (n_seed > 0).then(|| count as f64 / n_seed as f64),
                },
            )
        })
        .collect();
    sink.report(&Report {
        meta: &sink.meta,
        stats: corpus.stats(),
        ground_truth,
        files,
    })
}
