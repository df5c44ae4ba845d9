use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use argimg::error::Error;
use argimg::{fixtures, image_io, index_file, judgments, report, resources, runfile, runner, synth, topics};
use argimg::{Corpus, InferClient};
use argimg_core::bm25::{index_terms, Bm25Params, Index, DEFAULT_MAX_CHARS};
use argimg_core::eval::qrels::RATERS;
use argimg_core::eval::{curate_all, evaluate, fleiss_kappa, paired_t_test, EvalConfig};
use argimg_core::imagegen::{generate, ImageGenerator, Prompt, Style, StubGenerator};
use argimg_core::pipeline::{OrderMode, PipelineConfig, PipelineId};
use argimg_core::stance::{StanceScorer, StubScorer};
use argimg_core::vision::matching::{match_pair, Features, ReferenceFeatures};
use argimg_core::vision::MatchParams;
use argimg_core::Topic;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "argimg", version, about = "Argument image retrieval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or query a BM25 index file
    #[command(subcommand)]
    Index(IndexCommand),
    /// Print the PRO and CON queries of a question
    Prep(PrepArgs),
    /// Run a retrieval pipeline and write a run file
    Run(RunArgs),
    /// Match one image against reference images
    Match(MatchArgs),
    /// Generate a reference image for a prompt
    Generate(GenerateArgs),
    /// Curate three-rater annotations into qrels
    Curate(CurateArgs),
    /// Fleiss' kappa of three-rater annotations
    Kappa(KappaArgs),
    /// Evaluate a run against qrels
    Eval(EvalArgs),
    /// Paired two-sided t-test on two lists of numbers
    Ttest(TtestArgs),
    /// Write the synthetic mini-corpus
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum IndexCommand {
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_CHARS)]
        max_chars: usize,
    },
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(short, long, default_value_t = 10)]
        k: usize,
    },
}

#[derive(Args)]
struct QueryPrepArgs {
    /// Zipf table override (`word<TAB>zipf`)
    #[arg(long)]
    zipf: Option<PathBuf>,
    /// Verb lexicon override (one word per line)
    #[arg(long)]
    verbs: Option<PathBuf>,
    #[arg(long)]
    zipf_threshold: Option<f64>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct QuestionSource {
    #[arg(long)]
    question: Option<String>,
    #[arg(long)]
    topics: Option<PathBuf>,
}

#[derive(Args)]
struct PrepArgs {
    #[command(flatten)]
    source: QuestionSource,
    #[command(flatten)]
    prep: QueryPrepArgs,
}

#[derive(Args)]
struct Backend {
    /// Deterministic stub scorer and generator
    #[arg(long, conflicts_with = "infer_url")]
    stub: bool,
    /// Inference service base URL (defaults to $ARGIMG_INFER_URL)
    #[arg(long)]
    infer_url: Option<String>,
    /// Request timeout for the inference service
    #[arg(long, default_value_t = 120)]
    timeout_secs: u64,
    /// Stance fixtures for the stub scorer (JSON)
    #[arg(long, requires = "stub")]
    stance_fixtures: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Match,
    Stance,
}

#[derive(Args)]
struct RunArgs {
    /// baseline, 0, 1, 2 or 3
    #[arg(long)]
    pipeline: String,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    topics: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Prebuilt index; must cover the corpus ids in order
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    preselect_k: usize,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long)]
    tag: Option<String>,
    #[arg(long, value_enum, default_value_t = Order::Match)]
    order: Order,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    prep: QueryPrepArgs,
    #[command(flatten)]
    backend: Backend,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    query_image: PathBuf,
    #[arg(long = "ref-image", required = true)]
    ref_images: Vec<PathBuf>,
    /// Ratio-test threshold
    #[arg(long, default_value_t = 0.7)]
    ratio: f32,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Photorealistic,
    Comic,
}

#[derive(Args)]
struct GenerateArgs {
    /// Prompt text before the style suffix
    #[arg(long)]
    prompt: String,
    #[arg(long, value_enum, default_value_t = StyleArg::Photorealistic)]
    style: StyleArg,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 512)]
    height: usize,
    /// Output image (.png or .pgm)
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    backend: Backend,
}

#[derive(Args)]
struct CurateArgs {
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(long)]
    annotations: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Topic set; defaults to every topic in the qrels and runs
    #[arg(long)]
    topics: Option<PathBuf>,
    #[arg(long)]
    neutral_relevant: bool,
    /// Ranks counted by AP; 0 means the whole list
    #[arg(long, default_value_t = 10)]
    ap_depth: usize,
    #[arg(long)]
    per_group: bool,
    /// Also write the report as JSON
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct TtestArgs {
    /// File of whitespace-separated numbers
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<argimg_core::Error> for Failure {
    fn from(e: argimg_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn read_file(path: &Path) -> CliResult<String> {
    Ok(fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?)
}

fn stdout_line(s: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

enum Services {
    Stub(StubScorer),
    Remote(InferClient),
    Missing,
}

impl Backend {
    fn resolve(&self) -> CliResult<Services> {
        if self.stub {
            let scorer = match &self.stance_fixtures {
                Some(p) => fixtures::load_fixtures(p)?,
                None => StubScorer::new(),
            };
            return Ok(Services::Stub(scorer));
        }
        let timeout = Duration::from_secs(self.timeout_secs);
        Ok(match &self.infer_url {
            Some(url) => Services::Remote(InferClient::new(url, timeout)),
            None => InferClient::from_env(timeout).map_or(Services::Missing, Services::Remote),
        })
    }
}

const NO_BACKEND: &str = "no inference backend: pass --stub or --infer-url, or set ARGIMG_INFER_URL";

fn load_questions(src: &QuestionSource) -> CliResult<Vec<Topic>> {
    match (&src.question, &src.topics) {
        (Some(q), _) => Ok(vec![Topic {
            id: 1,
            question: q.clone(),
        }]),
        (None, Some(p)) => Ok(topics::load_topics(p)?),
        (None, None) => Err(Failure::Usage("one of --question and --topics is required".into())),
    }
}

fn cmd_prep(args: &PrepArgs) -> CliResult {
    let builder = resources::query_builder(args.prep.zipf.as_deref(), args.prep.verbs.as_deref(), args.prep.zipf_threshold)?;
    let single = args.source.question.is_some();
    for t in load_questions(&args.source)? {
        match builder.build_queries(&t) {
            Ok((pro, con)) if single => {
                stdout_line(&format!("PRO: {}", pro.text()));
                stdout_line(&format!("CON: {}", con.text()));
            }
            Ok((pro, con)) => {
                stdout_line(&format!("{} PRO: {}", t.id, pro.text()));
                stdout_line(&format!("{} CON: {}", t.id, con.text()));
            }
            Err(e) if single => return Err(e.into()),
            Err(e) => log::warn!("topic {}: {e}", t.id),
        }
    }
    Ok(())
}

fn build_index(corpus: &Corpus, max_chars: usize) -> CliResult<Index> {
    let texts = corpus.page_texts()?;
    Ok(Index::build(texts.iter().map(|(i, t)| (i.as_str(), t.as_str())), max_chars)?)
}

fn cmd_index(cmd: &IndexCommand) -> CliResult {
    match cmd {
        IndexCommand::Build { corpus, out, max_chars } => {
            let corpus = Corpus::open(corpus)?;
            let index = build_index(&corpus, *max_chars)?;
            index_file::write_index(&index, out)?;
            log::info!("indexed {} documents, {} terms", index.num_docs(), index.num_terms());
        }
        IndexCommand::Query { index, query, k } => {
            let index = index_file::read_index(index)?;
            let terms = index_terms(query, usize::MAX);
            for (rank, hit) in index.retrieve(&terms, *k, Bm25Params::default()).iter().enumerate() {
                stdout_line(&format!("{} {} {:.6}", rank + 1, hit.image_id, hit.score));
            }
        }
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> CliResult {
    let id: PipelineId = args.pipeline.parse().map_err(|e: argimg_core::Error| Failure::Usage(e.to_string()))?;
    let mut config = PipelineConfig::new(id);
    config.preselect_k = args.preselect_k;
    config.output_depth = args.depth;
    config.order = match args.order {
        Order::Match => OrderMode::MatchDominant,
        Order::Stance => OrderMode::StanceDominant,
    };
    if let Some(tag) = &args.tag {
        config.tag = tag.clone();
    }
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let services = args.backend.resolve()?;
    if matches!(services, Services::Missing) && id != PipelineId::BaselineRef {
        return Err(Failure::Usage(NO_BACKEND.into()));
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let builder = resources::query_builder(args.prep.zipf.as_deref(), args.prep.verbs.as_deref(), args.prep.zipf_threshold)?;
    let topics = topics::load_topics(&args.topics)?;
    let corpus = Corpus::open(&args.corpus)?;
    let index = match &args.index {
        Some(p) => {
            let index = index_file::read_index(p)?;
            if index.doc_ids() != corpus.ids() {
                return Err(Failure::Runtime(format!(
                    "{}: index ids differ from corpus {}",
                    p.display(),
                    corpus.root().display()
                )));
            }
            index
        }
        None => build_index(&corpus, DEFAULT_MAX_CHARS)?,
    };
    let stub_scorer = StubScorer::new();
    let (scorer, generator): (&(dyn StanceScorer + Sync), &(dyn ImageGenerator + Sync)) = match &services {
        Services::Stub(s) => (s, &StubGenerator),
        Services::Remote(c) => (c, c),
        Services::Missing => (&stub_scorer, &StubGenerator),
    };
    let result = runner::run_parallel(&config, &topics, &corpus, &index, &builder, scorer, generator)?;
    for w in &result.warnings {
        log::warn!("{w}");
    }
    runfile::write_run(&result.entries, &args.out)?;
    log::info!("wrote {} entries to {}", result.entries.len(), args.out.display());
    Ok(())
}

fn cmd_match(args: &MatchArgs) -> CliResult {
    let params = MatchParams {
        threshold: args.ratio,
        ..MatchParams::default()
    };
    let query = image_io::load_image(&args.query_image)?;
    let cand = Features::extract(&query, &params.sift);
    stdout_line(&format!("query {} keypoints {}", args.query_image.display(), cand.len()));
    let mut total = 0;
    for path in &args.ref_images {
        let reference = ReferenceFeatures::extract(&image_io::load_image(path)?, &params);
        let pair = match_pair(&cand, &reference, &params);
        let inliers = pair.inliers.map_or_else(|| "-".to_string(), |n| n.to_string());
        stdout_line(&format!(
            "ref {} keypoints {} good {} inliers {}",
            path.display(),
            reference.features.len(),
            pair.good,
            inliers
        ));
        total += pair.score();
    }
    stdout_line(&format!("score {total}"));
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> CliResult {
    let style = match args.style {
        StyleArg::Photorealistic => Style::Photorealistic,
        StyleArg::Comic => Style::Comic,
    };
    let mut prompt = Prompt::new(&args.prompt, style);
    prompt.width = args.width;
    prompt.height = args.height;
    if let Some(s) = args.seed {
        prompt.seed = s;
    }
    prompt.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let img = match args.backend.resolve()? {
        Services::Stub(_) => generate(&StubGenerator, &prompt)?,
        Services::Remote(c) => generate(&c, &prompt)?,
        Services::Missing => return Err(Failure::Usage(NO_BACKEND.into())),
    };
    image_io::save_image(&img, &args.out)?;
    stdout_line(&format!("{} seed {}", prompt.text, prompt.seed));
    Ok(())
}

fn cmd_curate(args: &CurateArgs) -> CliResult {
    let annotations = judgments::load_annotations(&args.annotations)?;
    let qrels = curate_all(&annotations)?;
    judgments::write_qrels(&qrels, &args.out)?;
    log::info!("curated {} judgments", qrels.len());
    Ok(())
}

fn cmd_kappa(args: &KappaArgs) -> CliResult {
    let annotations = judgments::load_annotations(&args.annotations)?;
    let k = fleiss_kappa(&annotations, RATERS)?;
    stdout_line(&format!("{k:.6}"));
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> CliResult {
    let run = runfile::read_run(&args.run)?;
    let qrels = judgments::load_qrels(&args.qrels)?;
    let baseline = args.baseline.as_deref().map(runfile::read_run).transpose()?;
    let topic_ids: Vec<u32> = match &args.topics {
        Some(p) => topics::load_topics(p)?.iter().map(|t| t.id).collect(),
        None => {
            let mut ids: BTreeSet<u32> = qrels.keys().map(|(t, _)| *t).collect();
            ids.extend(run.iter().map(|e| e.topic_id));
            ids.extend(baseline.iter().flatten().map(|e| e.topic_id));
            ids.into_iter().collect()
        }
    };
    let cfg = EvalConfig {
        neutral_relevant: args.neutral_relevant,
        ap_depth: (args.ap_depth > 0).then_some(args.ap_depth),
    };
    let r = evaluate(&run, &qrels, &topic_ids, baseline.as_deref(), &cfg)?;
    let run_name = args.run.display().to_string();
    let base_name = args.baseline.as_ref().map(|b| b.display().to_string());
    let named = report::NamedReport {
        run: &run_name,
        baseline: base_name.as_deref(),
        report: &r,
    };
    print!("{}", report::to_table(&named, args.per_group));
    if let Some(p) = &args.json {
        write_file(p, report::to_json(&named))?;
    }
    Ok(())
}

fn parse_numbers(path: &Path) -> CliResult<Vec<f64>> {
    read_file(path)?
        .split_whitespace()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::Runtime(format!("{}: not a finite number: {s:?}", path.display())))
        })
        .collect()
}

fn cmd_ttest(args: &TtestArgs) -> CliResult {
    let t = paired_t_test(&parse_numbers(&args.a)?, &parse_numbers(&args.b)?)?;
    stdout_line(&format!("t {:.6}", t.t));
    stdout_line(&format!("df {}", t.df));
    stdout_line(&format!("p {:.6}", t.p));
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> CliResult {
    let builder = resources::query_builder(None, None, None)?;
    let corpus = synth::build(&builder, &synth::SynthParams::default())?;
    synth::write(&corpus, &args.out)?;
    log::info!("wrote {} documents to {}", corpus.documents.len(), args.out.display());
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Index(c) => cmd_index(c),
        Command::Prep(a) => cmd_prep(a),
        Command::Run(a) => cmd_run(a),
        Command::Match(a) => cmd_match(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Curate(a) => cmd_curate(a),
        Command::Kappa(a) => cmd_kappa(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Ttest(a) => cmd_ttest(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
