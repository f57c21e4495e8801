//! Command-line front end.
//!
//! Settings come from an optional TOML config file and are overridden by
//! flags. Relative paths in the config file are resolved against the
//! file's directory. Exit codes: 0 success, 1 usage, 2 data error, 3 I/O.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Deserialize;
use thiserror::Error;

use crate::engine::{read_queries, EngineError, Query, RankedList, SearchType, System};
use crate::evalkit::{
    self, apply_found_counts, delta_report, read_found_sidecar, read_qrels, read_trec_run, render_reports,
    threeway_report, EvalError, Qrels, ReportFormat, ReportSet, SystemEval,
};
use crate::index::{read_corpus, write_atomic, Bm25, BuildOptions, Index, IndexError, IndexMode};
use crate::lexicon::{Lexicon, LexiconError};
use crate::semantics::DEFAULT_MAX_CONCEPT_LEN;
use crate::textnorm::{read_stoplist, Analyzer, Stoplist};

pub const DEFAULT_DEPTH: usize = 1000;
pub const DEFAULT_TAG: &str = "semindex";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl From<LexiconError> for CliError {
    fn from(e: LexiconError) -> Self {
        match e {
            LexiconError::Io(e) => CliError::Io(format!("lexicon: {e}")),
            other => CliError::Data(format!("lexicon: {other}")),
        }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Io(e) => CliError::Io(e.to_string()),
            EngineError::UnknownSearchType(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(e) => CliError::Io(e.to_string()),
            EvalError::UnknownFormat(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "semindex", version, about = "Concept-based semantic indexing and retrieval experiments")]
pub struct Cli {
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct SettingsArgs {
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Lexicon JSONL, one synset per line.
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Corpus JSONL with `id` and `text` fields.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Stopword list, one word per line.
    #[arg(long, global = true)]
    pub stopwords: Option<PathBuf>,
    /// Queries as `qid<TAB>text` lines.
    #[arg(long, global = true)]
    pub queries: Option<PathBuf>,
    /// Relevance judgments (`qid 0 doc rel`).
    #[arg(long, global = true)]
    pub qrels: Option<PathBuf>,
    /// Directory for index files [default: index].
    #[arg(long, global = true)]
    pub index_dir: Option<PathBuf>,
    /// Directory for runs and reports [default: reports].
    #[arg(long, global = true)]
    pub report_dir: Option<PathBuf>,
    /// BM25 k1 [default: 1.2].
    #[arg(long, global = true)]
    pub k1: Option<f64>,
    /// BM25 b [default: 0.75].
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// Longest concept match in tokens [default: 4].
    #[arg(long, global = true)]
    pub max_concept_len: Option<usize>,
    /// Run depth [default: 1000]; 0 keeps every match.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Run tag written into run files and file names.
    #[arg(long, global = true)]
    pub tag: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a plain or semantic index from the corpus.
    Index {
        #[arg(long)]
        mode: IndexMode,
        /// Also write a JSON dump of the index.
        #[arg(long)]
        json: bool,
    },
    /// Run the query set under one search type (or all four).
    Batch {
        #[arg(long = "search-type", value_name = "R0|R1|R2|R3|all")]
        search_type: String,
    },
    /// Run one ad-hoc query and print the ranking.
    Search {
        #[arg(long = "search-type", default_value = "R1")]
        search_type: SearchType,
        #[arg(long = "top", default_value_t = 10)]
        top: usize,
        query: String,
    },
    /// Evaluate run files against the qrels.
    Eval {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
    /// Compare treatment runs against a baseline run.
    Compare {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(required = true)]
        treatments: Vec<PathBuf>,
    },
    /// Index both ways, run R0-R3, evaluate and compare.
    Pipeline,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    lexicon: Option<PathBuf>,
    corpus: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    queries: Option<PathBuf>,
    qrels: Option<PathBuf>,
    index_dir: Option<PathBuf>,
    report_dir: Option<PathBuf>,
    k1: Option<f64>,
    b: Option<f64>,
    max_concept_len: Option<usize>,
    depth: Option<usize>,
    workers: Option<usize>,
    tag: Option<String>,
}

/// Fully merged settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub lexicon: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub index_dir: PathBuf,
    pub report_dir: PathBuf,
    pub bm25: Bm25,
    pub max_concept_len: usize,
    /// `None` keeps every match.
    pub depth: Option<usize>,
    pub workers: usize,
    pub tag: String,
}

impl Config {
    pub fn from_args(args: &SettingsArgs) -> Result<Self, CliError> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                let file: FileConfig =
                    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                (file, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let resolve = |flag: &Option<PathBuf>, from_file: Option<PathBuf>| -> Option<PathBuf> {
            flag.clone().or_else(|| from_file.map(|p| if p.is_absolute() { p } else { base.join(p) }))
        };
        let depth = args.depth.or(file.depth).unwrap_or(DEFAULT_DEPTH);
        let max_concept_len = args.max_concept_len.or(file.max_concept_len).unwrap_or(DEFAULT_MAX_CONCEPT_LEN);
        if max_concept_len == 0 {
            return Err(CliError::Usage("max_concept_len must be at least 1".into()));
        }
        let bm25 = Bm25 {
            k1: args.k1.or(file.k1).unwrap_or(Bm25::default().k1),
            b: args.b.or(file.b).unwrap_or(Bm25::default().b),
        };
        if !(bm25.k1 >= 0.0 && (0.0..=1.0).contains(&bm25.b)) {
            return Err(CliError::Usage(format!("invalid BM25 parameters k1={} b={}", bm25.k1, bm25.b)));
        }
        let tag = args.tag.clone().or(file.tag).unwrap_or_else(|| DEFAULT_TAG.to_string());
        if tag.is_empty() || tag.chars().any(char::is_whitespace) {
            return Err(CliError::Usage(format!("invalid tag {tag:?}")));
        }
        Ok(Config {
            lexicon: resolve(&args.lexicon, file.lexicon),
            corpus: resolve(&args.corpus, file.corpus),
            stopwords: resolve(&args.stopwords, file.stopwords),
            queries: resolve(&args.queries, file.queries),
            qrels: resolve(&args.qrels, file.qrels),
            index_dir: resolve(&args.index_dir, file.index_dir).unwrap_or_else(|| PathBuf::from("index")),
            report_dir: resolve(&args.report_dir, file.report_dir).unwrap_or_else(|| PathBuf::from("reports")),
            bm25,
            max_concept_len,
            depth: (depth > 0).then_some(depth),
            workers: args.workers.or(file.workers).unwrap_or(0),
            tag,
        })
    }

    pub fn index_path(&self, mode: IndexMode) -> PathBuf {
        self.index_dir.join(format!("{mode}.idx"))
    }

    pub fn run_path(&self, st: SearchType) -> PathBuf {
        self.report_dir.join(format!("{}.{st}.run", self.tag))
    }

    fn require(&self, value: &Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
        let path = value.clone().ok_or_else(|| CliError::Usage(format!("--{what} is required")))?;
        if !path.is_file() {
            return Err(CliError::Io(format!("{what} file {} does not exist", path.display())));
        }
        Ok(path)
    }

    fn optional(&self, value: &Option<PathBuf>, what: &str) -> Result<Option<PathBuf>, CliError> {
        value.as_ref().map(|_| self.require(value, what)).transpose()
    }

    fn load_lexicon(&self, required: bool) -> Result<Lexicon, CliError> {
        let path = if required {
            Some(self.require(&self.lexicon, "lexicon")?)
        } else {
            self.optional(&self.lexicon, "lexicon")?
        };
        match path {
            None => Ok(Lexicon::default()),
            Some(path) => {
                let file = fs::File::open(&path).map_err(|e| io_err(&path, e))?;
                let lex = Lexicon::load(BufReader::new(file))?;
                let stats = lex.stats();
                info!("lexicon {}: {} synsets, {} lemmas", path.display(), stats.total_synsets, stats.total_words);
                Ok(lex)
            }
        }
    }

    fn analyzer(&self) -> Result<Analyzer, CliError> {
        let stoplist = match self.optional(&self.stopwords, "stopwords")? {
            None => Stoplist::new(),
            Some(path) => {
                let file = fs::File::open(&path).map_err(|e| io_err(&path, e))?;
                read_stoplist(BufReader::new(file)).map_err(|e| io_err(&path, e))?
            }
        };
        Ok(Analyzer::new(stoplist))
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|e| io_err(path, e))
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

fn load_index(cfg: &Config, mode: IndexMode) -> Result<Index, CliError> {
    let path = cfg.index_path(mode);
    if !path.is_file() {
        return Err(CliError::Io(format!(
            "missing {mode} index {}; run `semindex index --mode {mode}` first",
            path.display()
        )));
    }
    let mut index = Index::load(&path).map_err(|e| match e {
        IndexError::Io(e) => io_err(&path, e),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })?;
    index.set_bm25(cfg.bm25);
    Ok(index)
}

fn load_queries(cfg: &Config) -> Result<Vec<Query>, CliError> {
    let path = cfg.require(&cfg.queries, "queries")?;
    let file = fs::File::open(&path).map_err(|e| io_err(&path, e))?;
    read_queries(BufReader::new(file)).map_err(|e| match e {
        EngineError::Io(e) => io_err(&path, e),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })
}

fn load_qrels(cfg: &Config) -> Result<Qrels, CliError> {
    let path = cfg.require(&cfg.qrels, "qrels")?;
    let file = fs::File::open(&path).map_err(|e| io_err(&path, e))?;
    Ok(read_qrels(BufReader::new(file), &path.display().to_string())?)
}

/// Builds and saves one index.
pub fn cmd_index(cfg: &Config, mode: IndexMode, json: bool) -> Result<(), CliError> {
    let lexicon = cfg.load_lexicon(mode == IndexMode::Semantic)?;
    let analyzer = cfg.analyzer()?;
    let corpus_path = cfg.require(&cfg.corpus, "corpus")?;
    ensure_dir(&cfg.index_dir)?;

    let file = fs::File::open(&corpus_path).map_err(|e| io_err(&corpus_path, e))?;
    let (docs, skipped) = read_corpus(BufReader::new(file)).map_err(|e| io_err(&corpus_path, e))?;
    for s in &skipped {
        warn!("{}: line {}: skipped: {}", corpus_path.display(), s.line, s.reason);
    }
    let opts = BuildOptions { mode, lexicon: &lexicon, analyzer: &analyzer, max_concept_len: cfg.max_concept_len };
    let (index, mut report) = Index::build_with_workers(docs, opts, cfg.workers)?;
    report.docs_skipped = skipped.len();
    report.skipped = skipped;

    let path = cfg.index_path(mode);
    index.save(&path).map_err(|e| match e {
        IndexError::Io(e) => io_err(&path, e),
        other => CliError::Data(other.to_string()),
    })?;
    write_file(&cfg.index_dir.join(format!("{mode}.report.json")), &json_bytes(&report))?;
    if json {
        write_file(&cfg.index_dir.join(format!("{mode}.json")), &json_bytes(&index.to_json()))?;
    }
    info!(
        "{mode} index {}: {} docs indexed, {} skipped, {} terms",
        path.display(),
        report.docs_indexed,
        report.docs_skipped,
        report.vocabulary_size
    );
    Ok(())
}

fn parse_search_types(spec: &str) -> Result<Vec<SearchType>, CliError> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(SearchType::ALL.to_vec());
    }
    spec.split(',').map(|s| s.trim().parse::<SearchType>().map_err(CliError::from)).collect()
}

fn build_system(cfg: &Config, types: &[SearchType]) -> Result<System, CliError> {
    let needs_lexicon = types.iter().any(|st| st.expands_query());
    let lexicon = cfg.load_lexicon(needs_lexicon)?;
    let mut system =
        System::new(lexicon, cfg.analyzer()?).with_max_concept_len(cfg.max_concept_len).with_workers(cfg.workers);
    if types.iter().any(|st| st.index_mode() == IndexMode::Plain) {
        system = system.with_plain(load_index(cfg, IndexMode::Plain)?)?;
    }
    if types.iter().any(|st| st.index_mode() == IndexMode::Semantic) {
        system = system.with_semantic(load_index(cfg, IndexMode::Semantic)?)?;
        if needs_lexicon {
            if let Some(w) = system.lexicon_warning() {
                warn!("{w}");
            }
        }
    }
    Ok(system)
}

/// Runs the query set and writes `<tag>.<type>.run` plus its found-count
/// sidecar for each requested search type.
pub fn cmd_batch(cfg: &Config, types: &[SearchType]) -> Result<(), CliError> {
    let queries = load_queries(cfg)?;
    let system = build_system(cfg, types)?;
    ensure_dir(&cfg.report_dir)?;
    for &st in types {
        let run = system.batch_run(&queries, st, cfg.depth, &cfg.tag)?;
        write_run_files(cfg, &run)?;
    }
    Ok(())
}

fn sidecar_path(run_path: &Path) -> PathBuf {
    run_path.with_extension("found.json")
}

fn write_run_files(cfg: &Config, run: &crate::engine::Run) -> Result<(), CliError> {
    let path = cfg.run_path(run.search_type);
    write_file(&path, &run.trec_bytes())?;
    write_file(&sidecar_path(&path), &run.found_sidecar_bytes())?;
    info!("{}: {} queries", path.display(), run.lists.len());
    Ok(())
}

pub fn cmd_search(cfg: &Config, st: SearchType, top: usize, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let system = build_system(cfg, &[st])?;
    let list = system.run_query(&Query::new("adhoc", text), st, Some(top))?;
    let terms = system.query_terms(text, st);
    let io = |e: io::Error| CliError::Io(e.to_string());
    writeln!(out, "# {st} query terms: {terms}").map_err(io)?;
    writeln!(out, "# found {}", list.found_count).map_err(io)?;
    for hit in &list.hits {
        writeln!(out, "{}\t{}\t{:.6}", hit.rank, hit.doc_id, hit.score).map_err(io)?;
    }
    Ok(())
}

fn run_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().trim_end_matches(".run").to_string())
        .unwrap_or_else(|| path.display().to_string())
}

/// Reads a run file and, when present, its found-count sidecar.
pub fn read_run_file(path: &Path) -> Result<Vec<RankedList>, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut lists = read_trec_run(BufReader::new(file), &path.display().to_string())?;
    let sidecar = sidecar_path(path);
    if sidecar.is_file() {
        let bytes = fs::read(&sidecar).map_err(|e| io_err(&sidecar, e))?;
        let found = read_found_sidecar(&bytes, &sidecar.display().to_string())?;
        apply_found_counts(&mut lists, &found);
    } else {
        warn!("{}: no found-count sidecar; found counts are limited to the run depth", path.display());
    }
    Ok(lists)
}

fn evaluate(label: &str, lists: &[RankedList], qrels: &Qrels, depth: Option<usize>) -> SystemEval {
    let eval = evalkit::evaluate_run(label, lists, qrels, depth);
    for e in &eval.excluded {
        warn!("{label}: query {} excluded ({:?})", e.qid, e.reason);
    }
    SystemEval { label: label.to_string(), records: eval.records, excluded: eval.excluded, summary: eval.summary }
}

fn write_reports(cfg: &Config, stem: &str, set: &ReportSet) -> Result<(), CliError> {
    ensure_dir(&cfg.report_dir)?;
    for (ext, format) in [("tsv", ReportFormat::Tsv), ("json", ReportFormat::Json)] {
        let path = cfg.report_dir.join(format!("{stem}.{ext}"));
        write_file(&path, &render_reports(set, format))?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

pub fn cmd_eval(cfg: &Config, runs: &[PathBuf]) -> Result<(), CliError> {
    let qrels = load_qrels(cfg)?;
    let mut set = ReportSet::default();
    for path in runs {
        let lists = read_run_file(path)?;
        set.systems.push(evaluate(&run_label(path), &lists, &qrels, cfg.depth));
    }
    write_reports(cfg, &format!("{}.eval", cfg.tag), &set)
}

/// Deltas of every treatment against the baseline, and the three-way
/// comparison when exactly three treatments are given.
pub fn compare_systems(baseline: &SystemEval, treatments: &[SystemEval]) -> Result<ReportSet, CliError> {
    let mut set = ReportSet { systems: vec![baseline.clone()], ..Default::default() };
    set.systems.extend(treatments.iter().cloned());
    for t in treatments {
        set.deltas.push(delta_report(&baseline.label, &t.label, &baseline.records, &t.records)?);
    }
    if let [a, b, c] = treatments {
        set.threeway = Some(threeway_report([&a.label, &b.label, &c.label], &a.records, &b.records, &c.records)?);
    }
    Ok(set)
}

pub fn cmd_compare(cfg: &Config, baseline: &Path, treatments: &[PathBuf]) -> Result<(), CliError> {
    let qrels = load_qrels(cfg)?;
    let base = evaluate(&run_label(baseline), &read_run_file(baseline)?, &qrels, cfg.depth);
    let mut evaluated = Vec::with_capacity(treatments.len());
    for path in treatments {
        evaluated.push(evaluate(&run_label(path), &read_run_file(path)?, &qrels, cfg.depth));
    }
    let set = compare_systems(&base, &evaluated)?;
    write_reports(cfg, &format!("{}.compare", cfg.tag), &set)
}

/// Full experiment: both indexes, all four runs, evaluation of every run
/// and the comparison of R1-R3 against R0.
pub fn cmd_pipeline(cfg: &Config) -> Result<(), CliError> {
    // Validate every input before any work.
    cfg.require(&cfg.corpus, "corpus")?;
    cfg.require(&cfg.lexicon, "lexicon")?;
    cfg.require(&cfg.queries, "queries")?;
    cfg.require(&cfg.qrels, "qrels")?;
    cfg.optional(&cfg.stopwords, "stopwords")?;

    cmd_index(cfg, IndexMode::Plain, false)?;
    cmd_index(cfg, IndexMode::Semantic, false)?;
    let queries = load_queries(cfg)?;
    let qrels = load_qrels(cfg)?;
    let system = build_system(cfg, &SearchType::ALL)?;
    ensure_dir(&cfg.report_dir)?;

    let mut evaluated: BTreeMap<SearchType, SystemEval> = BTreeMap::new();
    for st in SearchType::ALL {
        // Evaluate the complete match set so relevant-found counts are not
        // capped by the run depth; the written run is cut at depth.
        let full = system.batch_run(&queries, st, None, &cfg.tag)?;
        write_run_files(cfg, &full.truncated(cfg.depth))?;
        evaluated.insert(st, evaluate(&st.to_string(), &full.lists, &qrels, cfg.depth));
    }
    let base = evaluated.remove(&SearchType::R0).expect("R0 evaluated");
    let treatments: Vec<SystemEval> = evaluated.into_values().collect();
    let set = compare_systems(&base, &treatments)?;
    write_reports(cfg, &format!("{}.report", cfg.tag), &set)
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = Config::from_args(&cli.settings)?;
    match cli.command {
        Command::Index { mode, json } => cmd_index(&cfg, mode, json),
        Command::Batch { search_type } => cmd_batch(&cfg, &parse_search_types(&search_type)?),
        Command::Search { search_type, top, query } => cmd_search(&cfg, search_type, top, &query, stdout),
        Command::Eval { runs } => cmd_eval(&cfg, &runs),
        Command::Compare { baseline, treatments } => cmd_compare(&cfg, &baseline, &treatments),
        Command::Pipeline => cmd_pipeline(&cfg),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> SettingsArgs {
        SettingsArgs::default()
    }

    #[test]
    fn defaults() {
        let cfg = Config::from_args(&settings()).unwrap();
        assert_eq!(cfg.bm25, Bm25 { k1: 1.2, b: 0.75 });
        assert_eq!(cfg.max_concept_len, 4);
        assert_eq!(cfg.depth, Some(1000));
        assert_eq!(cfg.tag, "semindex");
    }

    #[test]
    fn flags_override_file_and_paths_resolve_to_file_dir() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("exp.toml");
        fs::write(&conf, "corpus = \"docs.jsonl\"\nk1 = 2.0\ndepth = 50\ntag = \"fromfile\"\n").unwrap();
        let mut args = settings();
        args.config = Some(conf);
        args.depth = Some(0);
        let cfg = Config::from_args(&args).unwrap();
        assert_eq!(cfg.corpus, Some(dir.path().join("docs.jsonl")));
        assert_eq!(cfg.bm25.k1, 2.0);
        assert_eq!(cfg.depth, None);
        assert_eq!(cfg.tag, "fromfile");
        assert_eq!(cfg.run_path(SearchType::R2), PathBuf::from("reports/fromfile.R2.run"));
    }

    #[test]
    fn bad_config_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("bad.toml");
        fs::write(&conf, "unknown_key = 1\n").unwrap();
        let mut args = settings();
        args.config = Some(conf);
        assert_eq!(Config::from_args(&args).unwrap_err().exit_code(), 1);

        let mut args = settings();
        args.b = Some(3.0);
        assert_eq!(Config::from_args(&args).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn search_type_lists() {
        assert_eq!(parse_search_types("all").unwrap(), SearchType::ALL);
        assert_eq!(parse_search_types("R0,r3").unwrap(), [SearchType::R0, SearchType::R3]);
        assert_eq!(parse_search_types("R5").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("r/exp.R1.run")), PathBuf::from("r/exp.R1.found.json"));
        assert_eq!(run_label(Path::new("r/exp.R1.run")), "exp.R1");
    }
}
