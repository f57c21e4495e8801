//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints exactly one line; the process exits non-zero if any fails.

use std::collections::{BTreeSet, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use semindex::evalkit::{average_precision, delta_report, precision_at_k, EvalRecord, Percent, CUTOFFS};
use semindex::index::CorpusDoc;
use semindex::semantics::DEFAULT_MAX_CONCEPT_LEN;
use semindex::{Analyzer, BuildOptions, Index, IndexMode, Lexicon, Query, SearchType, System};

type Outcome = Result<String, String>;
type Criterion = (u8, &'static str, fn() -> Outcome, Duration);

enum Status {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lexicon(jsonl: &str) -> Lexicon {
    Lexicon::load(jsonl.as_bytes()).expect("fixture lexicon")
}

fn docs(pairs: &[(&str, &str)]) -> Vec<CorpusDoc> {
    pairs.iter().map(|(id, text)| CorpusDoc { id: id.to_string(), text: text.to_string() }).collect()
}

fn build(docs: Vec<CorpusDoc>, mode: IndexMode, lex: &Lexicon, workers: usize) -> Index {
    let analyzer = Analyzer::default();
    let opts = BuildOptions { mode, lexicon: lex, analyzer: &analyzer, max_concept_len: DEFAULT_MAX_CONCEPT_LEN };
    Index::build_with_workers(docs, opts, workers).expect("build").0
}

fn system(corpus: &[CorpusDoc], lex: Lexicon) -> System {
    let plain = build(corpus.to_vec(), IndexMode::Plain, &lex, 1);
    let semantic = build(corpus.to_vec(), IndexMode::Semantic, &lex, 1);
    System::new(lex, Analyzer::default()).with_plain(plain).and_then(|s| s.with_semantic(semantic)).expect("system")
}

fn found(sys: &System, text: &str, st: SearchType) -> usize {
    sys.run_query(&Query::new("q", text), st, None).expect("query").found_count
}

// Published per-query counts: (NDTB, NDTPB) for R0, then (NDTA, NDTPA) for
// R1, R2, R3.
const TABLE4: [(&str, [(usize, usize); 4]); 7] = [
    ("1", [(405, 164), (11588, 6287), (518, 329), (8937, 6092)]),
    ("2", [(674, 272), (9332, 5071), (2579, 1630), (1914, 1265)]),
    ("3", [(366, 96), (4237, 2225), (3560, 2163), (357, 95)]),
    ("4", [(3539, 361), (17687, 10985), (9825, 5564), (3781, 2438)]),
    ("49", [(681, 423), (6652, 3161), (4860, 1414), (663, 423)]),
    ("50", [(1578, 1129), (6163, 5267), (1938, 1154), (3077, 1451)]),
    ("70", [(170, 50), (7176, 3071), (573, 297), (155, 49)]),
];

// (D, DP) for R1, R2, R3 against R0, subtracted by hand from the table above.
const TABLE4_DELTAS: [[(i64, i64); 3]; 7] = [
    [(11183, 6123), (113, 165), (8532, 5928)],
    [(8658, 4799), (1905, 1358), (1240, 993)],
    [(3871, 2129), (3194, 2067), (-9, -1)],
    [(14148, 10624), (6286, 5203), (242, 2077)],
    [(5971, 2738), (4179, 991), (-18, 0)],
    [(4585, 4138), (360, 25), (1499, 322)],
    [(7006, 3021), (403, 247), (-15, -1)],
];

fn table4_deltas() -> Outcome {
    let records = |col: usize| -> Vec<EvalRecord> {
        TABLE4.iter().map(|(qid, row)| EvalRecord::counts(*qid, row[col].0, row[col].1)).collect()
    };
    let r0 = records(0);
    for (t, name) in ["R1", "R2", "R3"].iter().enumerate() {
        let report = delta_report("R0", name, &r0, &records(t + 1)).map_err(|e| e.to_string())?;
        for (row, rec) in report.records.iter().enumerate() {
            let (d, dp) = TABLE4_DELTAS[row][t];
            ensure(rec.qid == TABLE4[row].0 && rec.d == d && rec.dp == dp, || {
                format!("query {} R0->{name}: got D={} DP={}, want D={d} DP={dp}", rec.qid, rec.d, rec.dp)
            })?;
        }
    }
    Ok("21 query/type pairs exact; q1 R1 D=11183 DP=6123, q70 R3 D=-15 DP=-1".into())
}

fn table5_buckets() -> Outcome {
    // Found deltas split 0 negative / 9 zero / 61 positive, relevant deltas
    // 2 / 4 / 64.
    let before: Vec<EvalRecord> = (1..=70).map(|q| EvalRecord::counts(q.to_string(), 100, 50)).collect();
    let after: Vec<EvalRecord> = (1..=70)
        .map(|q| {
            let found = if q <= 9 { 100 } else { 100 + q };
            let relevant = match q {
                1..=2 => 49,
                3..=6 => 50,
                _ => 50 + q,
            };
            EvalRecord::counts(q.to_string(), found, relevant)
        })
        .collect();
    let report = delta_report("R0", "R2", &before, &after).map_err(|e| e.to_string())?;
    let f = report.found;
    ensure((f.negative, f.zero, f.positive) == (0, 9, 61), || format!("found buckets {f:?}"))?;
    let r = report.relevant;
    ensure((r.negative, r.zero, r.positive) == (2, 4, 64), || format!("relevant buckets {r:?}"))?;

    let check = |got: [Percent; 3], exact: [&str; 3], printed: [f64; 3]| -> Result<(), String> {
        for i in 0..3 {
            ensure(got[i].to_string() == exact[i], || format!("percent {} != {}", got[i], exact[i]))?;
            ensure((got[i].as_f64() - printed[i]).abs() <= 0.02 + 1e-9, || {
                format!("percent {} not within 0.02 of {}", got[i], printed[i])
            })?;
        }
        Ok(())
    };
    check(f.percentages(), ["0.00", "12.86", "87.14"], [0.0, 12.85, 87.15])?;
    check(r.percentages(), ["2.86", "5.71", "91.43"], [2.85, 5.72, 91.43])?;
    Ok("D 0/9/61 -> 0.00/12.86/87.14; DP 2/4/64 -> 2.86/5.71/91.43".into())
}

fn oracle_precision(ranking: &[String], relevant: &BTreeSet<String>, k: usize) -> f64 {
    let mut hits = 0usize;
    for i in 0..k {
        if i < ranking.len() && relevant.contains(&ranking[i]) {
            hits += 1;
        }
    }
    hits as f64 / k as f64
}

fn oracle_ap(ranking: &[String], relevant: &BTreeSet<String>) -> f64 {
    let mut sum = 0.0;
    for doc in relevant {
        if let Some(pos) = ranking.iter().position(|d| d == doc) {
            let rank = pos + 1;
            let above = ranking[..rank].iter().filter(|d| relevant.contains(*d)).count();
            sum += above as f64 / rank as f64;
        }
    }
    sum / relevant.len() as f64
}

fn metric_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let pool: Vec<String> = (0..80).map(|i| format!("d{i}")).collect();
    let trials = 2000;
    let mut worst_ap = 0.0f64;
    for trial in 0..trials {
        let len = rng.gen_range(0..=50);
        let ranking: Vec<String> = pool.choose_multiple(&mut rng, len).cloned().collect();
        let n_rel = rng.gen_range(1..=30);
        let relevant: BTreeSet<String> = pool.choose_multiple(&mut rng, n_rel).cloned().collect();
        for k in CUTOFFS {
            let got = precision_at_k(&ranking, &relevant, k);
            let want = oracle_precision(&ranking, &relevant, k);
            ensure(got == want, || format!("trial {trial}: P@{k} {got} != {want}"))?;
        }
        let got = average_precision(&ranking, &relevant).ok_or_else(|| format!("trial {trial}: AP undefined"))?;
        let want = oracle_ap(&ranking, &relevant);
        worst_ap = worst_ap.max((got - want).abs());
        ensure((got - want).abs() <= 1e-12, || format!("trial {trial}: AP {got} != {want}"))?;
    }
    Ok(format!("{trials} instances, max AP error {worst_ap:.1e}"))
}

const SIN: &str = r#"{"id":"sin","pos":"n","lemmas":["خطيئة","إثم"]}"#;

fn five_docs(first: &str) -> Vec<CorpusDoc> {
    docs(&[
        ("d1", first),
        ("d2", "كتاب عن الصحة والرياضة"),
        ("d3", "ذهب الولد إلى المدرسة"),
        ("d4", "المطر غزير هذا العام"),
        ("d5", "قرأت الجريدة في الصباح"),
    ])
}

fn synonym_unification() -> Outcome {
    let sys = system(&five_docs("خطيئة"), lexicon(SIN));
    let counts = [SearchType::R0, SearchType::R1, SearchType::R2].map(|st| found(&sys, "اثم", st));
    ensure(counts == [0, 1, 1], || format!("R0/R1/R2 found {counts:?}, want [0, 1, 1]"))?;
    Ok("query اثم: R0 0, R1 1, R2 1".into())
}

fn r3_regression() -> Outcome {
    let sys = system(&five_docs("اثم"), lexicon(SIN));
    let r0 = found(&sys, "اثم", SearchType::R0);
    let r3 = found(&sys, "اثم", SearchType::R3);
    ensure((r0, r3) == (1, 0), || format!("R0 {r0}, R3 {r3}; want 1, 0"))?;
    Ok("query اثم: R0 1, R3 0".into())
}

fn mode_collapse() -> Outcome {
    let corpus = docs(&[
        ("a", "ارتكب الرجل إثم الكذب"),
        ("b", "الخطيئة الأولى في القصة"),
        ("c", "خطيئة كبيرة"),
        ("d", "كتاب عن الصحة والرياضة"),
        ("e", "كتاب الرياضة الجديد"),
    ]);
    let sys = system(&corpus, lexicon(""));
    let queries = vec![Query::new("1", "إثم"), Query::new("2", "كتاب الرياضة"), Query::new("3", "مجهول")];
    let mut outputs = Vec::new();
    for st in SearchType::ALL {
        let run = sys.batch_run(&queries, st, Some(1000), "acc").map_err(|e| e.to_string())?;
        outputs.push((run.trec_bytes(), run.found_sidecar_bytes()));
    }
    ensure(!outputs[0].0.is_empty(), || "R0 run is empty".into())?;
    for (st, out) in SearchType::ALL.iter().zip(&outputs).skip(1) {
        ensure(out == &outputs[0], || format!("{st} output differs from R0"))?;
    }
    Ok(format!("4 runs identical ({} bytes)", outputs[0].0.len()))
}

fn synthetic_text(rng: &mut StdRng, vocab: usize, len: std::ops::RangeInclusive<usize>) -> String {
    let n = rng.gen_range(len);
    (0..n).map(|_| format!("w{}", rng.gen_range(0..vocab))).collect::<Vec<_>>().join(" ")
}

fn synthetic_lexicon(rng: &mut StdRng, vocab: usize, synsets: usize) -> Lexicon {
    let mut lines = Vec::new();
    for s in 0..synsets {
        let n = rng.gen_range(1..=4);
        let lemmas: Vec<String> = (0..n)
            .map(|_| {
                let words = if rng.gen_bool(0.2) { 2 } else { 1 };
                (0..words).map(|_| format!("w{}", rng.gen_range(0..vocab))).collect::<Vec<_>>().join(" ")
            })
            .collect();
        let pos = ["n", "v", "a", "r"][s % 4];
        lines.push(serde_json::json!({ "id": format!("s{s}"), "pos": pos, "lemmas": lemmas }).to_string());
    }
    lexicon(&lines.join("\n"))
}

fn determinism_and_persistence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let lex = synthetic_lexicon(&mut rng, 400, 120);
    let mut corpus: Vec<CorpusDoc> = (0..1000)
        .map(|i| CorpusDoc { id: format!("doc{i:04}"), text: synthetic_text(&mut rng, 400, 5..=60) })
        .collect();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for mode in [IndexMode::Plain, IndexMode::Semantic] {
        let serial = build(corpus.clone(), mode, &lex, 1);
        corpus.shuffle(&mut rng);
        let parallel = build(corpus.clone(), mode, &lex, 8);
        let bytes = serial.to_bytes();
        ensure(bytes == parallel.to_bytes(), || format!("{mode}: serial and 8-way bytes differ"))?;

        let a = dir.path().join(format!("{mode}.serial.idx"));
        let b = dir.path().join(format!("{mode}.parallel.idx"));
        serial.save(&a).map_err(|e| e.to_string())?;
        parallel.save(&b).map_err(|e| e.to_string())?;
        let (fa, fb) = (std::fs::read(&a).map_err(|e| e.to_string())?, std::fs::read(&b).map_err(|e| e.to_string())?);
        ensure(fa == fb, || format!("{mode}: saved files differ"))?;

        let loaded = Index::load(&a).map_err(|e| e.to_string())?;
        for q in 0..20 {
            let terms: Vec<String> = synthetic_text(&mut rng, 450, 1..=6).split(' ').map(str::to_string).collect();
            let depth = if q % 2 == 0 { None } else { Some(10) };
            ensure(serial.retrieve(&terms, depth) == loaded.retrieve(&terms, depth), || {
                format!("{mode}: retrieve differs after reload for {terms:?}")
            })?;
        }
    }
    Ok("1000 docs, plain+semantic: serial == 8-way, 20 queries stable across reload".into())
}

fn r2_containment() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let trials = 300;
    let mut strictly_larger = 0;
    for trial in 0..trials {
        let vocab = rng.gen_range(10..40);
        let synsets = rng.gen_range(0..15);
        let lex = synthetic_lexicon(&mut rng, vocab, synsets);
        let corpus: Vec<CorpusDoc> = (0..rng.gen_range(1..30))
            .map(|i| CorpusDoc { id: format!("d{i}"), text: synthetic_text(&mut rng, vocab, 0..=12) })
            .collect();
        let sys = system(&corpus, lex);
        for _ in 0..3 {
            let q = Query::new("q", synthetic_text(&mut rng, vocab + 5, 1..=4));
            let set = |st| -> Result<HashSet<String>, String> {
                let list = sys.run_query(&q, st, None).map_err(|e| e.to_string())?;
                ensure(list.hits.len() == list.found_count, || "untruncated list shorter than found".into())?;
                Ok(list.doc_ids().map(str::to_string).collect())
            };
            let (r0, r2) = (set(SearchType::R0)?, set(SearchType::R2)?);
            ensure(r2.is_superset(&r0), || format!("trial {trial}: query {:?} R2 misses {:?}", q.text, &r0 - &r2))?;
            if r2.len() > r0.len() {
                strictly_larger += 1;
            }
        }
    }
    Ok(format!("{trials} corpora x 3 queries; R2 strictly larger in {strictly_larger}"))
}

const AWN_ENV: &str = "SEMINDEX_AWN_LEXICON";

fn awn_counts() -> Status {
    let Some(path) = std::env::var_os(AWN_ENV) else {
        return Status::Skip(format!("{AWN_ENV} not set"));
    };
    let file = match std::fs::File::open(&path) {
        Ok(f) => f,
        Err(e) => return Status::Fail(format!("{}: {e}", path.to_string_lossy())),
    };
    let lex = match Lexicon::load(std::io::BufReader::new(file)) {
        Ok(l) => l,
        Err(e) => return Status::Fail(e.to_string()),
    };
    let stats = lex.stats();
    let per_pos: Vec<String> = stats.per_pos.iter().map(|(p, n)| format!("{}={n}", p.tag())).collect();
    let detail = format!("synsets {} words {} ({})", stats.total_synsets, stats.total_words, per_pos.join(" "));
    if stats.total_synsets == 11_269 && stats.total_words == 23_481 {
        Status::Pass(detail)
    } else {
        Status::Fail(format!("{detail}; want synsets 11269 words 23481"))
    }
}

fn main() -> ExitCode {
    let timed: [Criterion; 8] = [
        (1, "delta arithmetic on published counts", table4_deltas, Duration::from_secs(1)),
        (2, "sign buckets and percentages", table5_buckets, Duration::from_secs(1)),
        (3, "P@k and AP against brute-force oracles", metric_oracle, Duration::from_secs(10)),
        (4, "synonym unification", synonym_unification, Duration::from_secs(1)),
        (5, "R3 replacement regression", r3_regression, Duration::from_secs(1)),
        (6, "mode collapse with empty lexicon", mode_collapse, Duration::from_secs(1)),
        (7, "deterministic build and persistence", determinism_and_persistence, Duration::from_secs(30)),
        (8, "R2 found set contains R0 found set", r2_containment, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (n, name, check, limit) in timed {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let status = match outcome {
            Ok(_) if elapsed > limit => Status::Fail(format!("took {elapsed:.2?}, limit {limit:?}")),
            Ok(detail) => Status::Pass(detail),
            Err(detail) => Status::Fail(detail),
        };
        failed += report(n, name, status, Some(elapsed));
    }
    failed += report(9, "lexicon release counts", awn_counts(), None);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}

fn report(n: u8, name: &str, status: Status, elapsed: Option<Duration>) -> usize {
    let time = elapsed.map(|e| format!(" [{e:.2?}]")).unwrap_or_default();
    let (label, detail, failed) = match status {
        Status::Pass(d) => ("PASS", d, 0),
        Status::Fail(d) => ("FAIL", d, 1),
        Status::Skip(d) => ("SKIP", d, 0),
    };
    println!("{label} criterion {n}: {name}: {detail}{time}");
    failed
}
