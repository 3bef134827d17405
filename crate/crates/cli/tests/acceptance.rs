//! End-to-end acceptance run: one PASS/FAIL line per criterion.

#[path = "../../core/tests/support/mod.rs"]
mod support;

#[path = "../../harness/tests/support/stats_oracle.rs"]
mod stats_oracle;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::measure::violations;
use support::oracle::{evaluate, where_rows};
use support::{layout_for, library, small_config};
use tabexec_cli::commands::eval_item;
use tabexec_cli::config::standard_table_config;
use tabexec_cli::dataset::generate_lines;
use tabexec_cli::fsutil::{read_jsonl, sha256_file};
use tabexec_cli::{cmd_eval, cmd_gen, cmd_report, cmd_validate, DatasetLine, EvalRequest, GenConfig, GenRequest};
use tabexec_core::gen::{
    generate_dataset, AnswerLocation, DatasetOptions, KeywordsSetting, ListSetting, RangeSetting,
};
use tabexec_core::render::{multistep_steps, parse_markdown};
use tabexec_core::seed::rng_from_seed;
use tabexec_core::sql::{display_cells, Keyword, Phase};
use tabexec_core::table::TableGenerator;
use tabexec_core::{
    execute, generate_distribution_example, generate_table, instantiate, parse, render_sql, to_cot, to_flatten,
    to_markdown, to_multistep, DistributionPattern, GenError, Query, SetName, SqlConfig, Table, TableConfig,
    TemplateSet,
};
use tabexec_harness::{kendall_tau, pearson, run_eval, CallError, Client, Completion, EvalItem, MockClient, ModelEndpoint};

struct Outcome {
    pass: bool,
    detail: String,
    /// Extra lines printed under the verdict.
    notes: Vec<String>,
    /// A failure that does not fail the run: the implementation matches its
    /// oracle and the stated expectation is what disagrees.
    informational: bool,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into(), notes: Vec::new(), informational: false }
    }
}

fn fixture_dir() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "fixtures"].iter().collect()
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).expect("fixture")
}

fn table(name: &str) -> Table {
    parse_markdown(&fixture(name)).expect("fixture parses")
}

fn answer(t: &Table, sql: &str) -> String {
    match parse(sql).and_then(|q| execute(&q, t)) {
        Ok(a) => a.display(),
        Err(e) => e.to_string(),
    }
}

fn worked_examples() -> Outcome {
    let start = Instant::now();
    let cases = [
        ("sparse_table.md", "select boarfish from w where sixties = 'jcrbb'", "['qxgd', 'lorfaljob', 'qytocp', 'vkfzhqwj', 'xwijyubr']"),
        ("multi_answer_table.md", "select suiting from my_table group by suiting having count ( newburgh ) > 6", "['zbwamhiui', 'zroosgm']"),
        (
            "multi_answer_table.md",
            "select count ( chisel ) from my_table where highboy < brewpub group by newburgh having min ( highboy ) < 47",
            "5",
        ),
        (
            "fewshot_table.md",
            "select avg ( intrados ) from my_table where tiepolo > 146 group by huggins having count ( huggins ) > 1 order by count ( tiepolo ) asc limit 1",
            "146.5",
        ),
    ];
    let mut wrong = Vec::new();
    for (t, sql, want) in cases {
        let got = answer(&table(t), sql);
        if got != want {
            wrong.push(format!("{sql}: got {got}, want {want}"));
        }
    }
    let took = start.elapsed();
    let pass = wrong.is_empty() && took < Duration::from_secs(1);
    Outcome::new(pass, format!("{}/4 exact in {took:.2?}{}", 4 - wrong.len(), if wrong.is_empty() { String::new() } else { format!("; {}", wrong.join("; ")) }))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut pairs, mut templates, mut never) = (0, 0, Vec::new());
    let mut failures = Vec::new();
    for set in library() {
        for (ti, t) in set.templates.iter().enumerate() {
            templates += 1;
            let mut answered = 0;
            for n in 0..100u64 {
                let mut rng = rng_from_seed(n * 7919 + ti as u64 * 104729 + set.name as u64 + 0xacce);
                let rows = rng.gen_range(1..=8);
                let cfg = small_config(rows, layout_for(t, 4, &mut rng));
                let table = generate_table(&cfg, rng.gen()).expect("table");
                let q = match instantiate(t, &table, &mut rng) {
                    Ok(q) => q,
                    Err(GenError::SlotUnsatisfiable(_)) => continue,
                    Err(e) => {
                        failures.push(format!("{}: {e}", t.name));
                        continue;
                    }
                };
                pairs += 1;
                let engine = execute(&q, &table).map(|a| a.cells).map_err(|e| e.name());
                answered += usize::from(engine.is_ok());
                if engine != evaluate(&q, &table) {
                    failures.push(format!("{} | {}", t.name, render_sql(&q)));
                }
            }
            if answered == 0 {
                never.push(t.name.clone());
            }
        }
    }
    let took = start.elapsed();
    let pass = failures.is_empty() && never.is_empty() && pairs >= 5000 && took < Duration::from_secs(60);
    let mut o = Outcome::new(
        pass,
        format!("{pairs} pairs over {templates} skeletons, {} disagreements, {} never answered, {took:.2?}", failures.len(), never.len()),
    );
    o.notes = failures.into_iter().chain(never).take(10).collect();
    o
}

fn golden_files() -> Outcome {
    let t = table("markdown_golden.md");
    let md = to_markdown(&t) == fixture("markdown_golden.md").trim_end_matches('\n');
    let flat = to_flatten(&t) == fixture("flatten_golden.txt").trim_end_matches('\n');
    Outcome::new(md && flat, format!("markdown {}, flatten {}", if md { "exact" } else { "differs" }, if flat { "exact" } else { "differs" }))
}

fn constraint_soundness() -> Outcome {
    let dims: Vec<(&str, SetName, SqlConfig)> = vec![
        (
            "keywords",
            SetName::General,
            SqlConfig {
                keywords_setting: KeywordsSetting::without(&[Keyword::OrderBy, Keyword::GroupBy, Keyword::Having]),
                ..SqlConfig::default()
            },
        ),
        ("sql_length", SetName::General, SqlConfig { length_setting: RangeSetting::active(8, 12), ..SqlConfig::default() }),
        ("column_ratio", SetName::General, SqlConfig { column_ratio: RangeSetting::active(0.2, 0.4), ..SqlConfig::default() }),
        ("select_row_ratio", SetName::General, SqlConfig { select_row_ratio: RangeSetting::active(0.0, 0.2), ..SqlConfig::default() }),
        ("calculate_times", SetName::General, SqlConfig { calculate_times: ListSetting::active(vec![1]), ..SqlConfig::default() }),
        ("filter_times", SetName::General, SqlConfig { filter_times: ListSetting::active(vec![2]), ..SqlConfig::default() }),
        ("answer_location", SetName::Easy, SqlConfig { answer_location: AnswerLocation::ratio(0.1, 0.9), ..SqlConfig::default() }),
        ("answer_cells_number", SetName::Filter, SqlConfig { answer_cells_number: Some(3), ..SqlConfig::default() }),
    ];
    let tc = TableConfig::default();
    let generator = TableGenerator::new(tc.clone()).expect("config");
    let opts = DatasetOptions { max_attempts: 2000, ..DatasetOptions::default() };
    let mut summary = Vec::new();
    let mut pass = true;
    for (dim, set, cfg) in dims {
        let (examples, _) = match generate_dataset(&tc, &cfg, &TemplateSet::named(set), 1000, 4242, &opts) {
            Ok(r) => r,
            Err(e) => {
                pass = false;
                summary.push(format!("{dim}: {e}"));
                continue;
            }
        };
        let ok = examples
            .iter()
            .filter(|ex| {
                let table = generator.generate(ex.table_seed).expect("table");
                let rows = if cfg.answer_location.is_available { where_rows(&ex.query, &table).unwrap_or_default() } else { Vec::new() };
                violations(&ex.sql, &ex.query, &table, &cfg, &rows).is_empty()
            })
            .count();
        pass &= ok == 1000 && examples.len() == 1000;
        summary.push(format!("{dim} {ok}/1000"));
    }
    Outcome::new(pass, summary.join(", "))
}

fn length_scaling() -> Outcome {
    let mut summary = Vec::new();
    let mut pass = true;
    for budget in [2048usize, 4096, 8192, 16384] {
        let config = GenConfig { table_config: standard_table_config(), shots: 0, budget: Some(budget), ..GenConfig::default() };
        let req = GenRequest {
            config,
            count: 50,
            seed: budget as u64,
            out: PathBuf::new(),
            standard: false,
            inline_tables: false,
            force: false,
        };
        let (lines, parts, _) = match generate_lines(&req) {
            Ok(r) => r,
            Err(e) => {
                pass = false;
                summary.push(format!("{budget}: {e}"));
                continue;
            }
        };
        let b = budget as f64;
        let hits = lines.iter().filter(|l| (0.9 * b..=1.1 * b).contains(&(l.token_count as f64))).count();
        pass &= hits * 100 >= 95 * lines.len() && lines.len() == 50;
        summary.push(format!("{budget}: {hits}/50 at {} rows", parts[0].table_config.row_min));
    }
    Outcome::new(pass, summary.join(", "))
}

fn dense_sparse() -> Outcome {
    let tc = TableConfig::default();
    let cfg = SqlConfig::default();
    let mut summary = Vec::new();
    let mut pass = true;
    for pattern in [DistributionPattern::Dense, DistributionPattern::Sparse] {
        let mut rng = rng_from_seed(0xd15 + pattern as u64);
        let mut ok = 0;
        for _ in 0..500 {
            let Ok((table, ex)) = generate_distribution_example(&tc, &cfg, pattern, 5, &mut rng) else { continue };
            let rows = where_rows(&ex.query, &table).unwrap_or_default();
            let cells = evaluate(&ex.query, &table).map(|c| c.len()).unwrap_or(0);
            let shaped = match pattern {
                DistributionPattern::Dense => rows.windows(2).all(|w| w[1] == w[0] + 1),
                _ => rows.windows(2).all(|w| w[1] >= w[0] + 2) && 2 * (rows[rows.len() - 1] - rows[0]) >= table.num_rows(),
            };
            ok += usize::from(shaped && rows.len() == 5 && cells == 5 && rows == ex.answer_rows);
        }
        pass &= ok == 500;
        summary.push(format!("{pattern:?} {ok}/500"));
    }
    Outcome::new(pass, summary.join(", "))
}

fn statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_r = 0f64;
    let mut worst_t = 0f64;
    for k in 0..1000 {
        let n = rng.gen_range(3..40);
        let (xs, ys): (Vec<f64>, Vec<f64>) = if k % 2 == 0 {
            (0..n).map(|_| (rng.gen_range(-50..50) as f64, rng.gen_range(-50..50) as f64)).unzip()
        } else {
            (0..n).map(|_| (rng.gen_range(0..6) as f64, rng.gen_range(0..6) as f64)).unzip()
        };
        let xi: Vec<i64> = xs.iter().map(|v| *v as i64).collect();
        let yi: Vec<i64> = ys.iter().map(|v| *v as i64).collect();
        if let Ok(r) = pearson(&xs, &ys) {
            worst_r = worst_r.max((r - stats_oracle::pearson_exact(&xi, &yi)).abs());
            worst_r = worst_r.max((r - stats_oracle::pearson_raw(&xs, &ys)).abs());
        }
        if let Ok(t) = kendall_tau(&xs, &ys) {
            worst_t = worst_t.max((t - stats_oracle::kendall_pairs(&xs, &ys)).abs());
        }
    }
    let near = |a: Result<f64, _>, b: f64| a.map(|a| (a - b).abs() <= 1e-12).unwrap_or(false);
    let analytic = near(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 1.0)
        && near(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0)
        && near(kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]), 1.0)
        && near(kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]), -1.0);
    let (xs, ys) = ([1.0, 2.0, 3.0, 4.0], [1.0, 3.0, 2.0, 4.0]);
    let tau = kendall_tau(&xs, &ys).unwrap_or(f64::NAN);
    let pairs = stats_oracle::kendall_pairs(&xs, &ys);
    let stated = (tau - 1.0 / 3.0).abs() <= 1e-12;
    let oracles = worst_r <= 1e-12 && worst_t <= 1e-12;
    let mut o = Outcome::new(
        oracles && analytic && stated,
        format!(
            "oracle gap r {worst_r:.1e}, tau {worst_t:.1e}; r=+-1 and tau=+-1 {}; tau([1,2,3,4],[1,3,2,4]) = {tau:.6}, expected 1/3",
            if analytic { "exact" } else { "wrong" }
        ),
    );
    if !stated {
        o.notes.push(format!(
            "pair enumeration gives {pairs:.6}: 5 concordant, 1 discordant, (5-1)/6 = 2/3; the expected 1/3 miscounts the pairs"
        ));
        o.informational = oracles && analytic && (tau - pairs).abs() <= 1e-12;
    }
    o
}

fn gen_general(out: &Path, seed: u64) -> Result<(Duration, tabexec_cli::RunManifest), tabexec_cli::CliError> {
    let start = Instant::now();
    let req = GenRequest {
        config: GenConfig::default(),
        count: 10_000,
        seed,
        out: out.to_path_buf(),
        standard: false,
        inline_tables: false,
        force: true,
    };
    let m = cmd_gen(&req)?;
    Ok((start.elapsed(), m))
}

fn determinism_and_scale(dir: &Path) -> Outcome {
    let (a, b) = (dir.join("general-a.jsonl"), dir.join("general-b.jsonl"));
    let (ra, rb) = match (gen_general(&a, 2024), gen_general(&b, 2024)) {
        (Ok(ra), Ok(rb)) => (ra, rb),
        (Err(e), _) | (_, Err(e)) => return Outcome::new(false, e.to_string()),
    };
    let same = sha256_file(&a).ok() == sha256_file(&b).ok() && std::fs::read(&a).ok() == std::fs::read(&b).ok();
    let fast = ra.0 < Duration::from_secs(120) && rb.0 < Duration::from_secs(120);
    let m = &ra.1;
    let pass = same && fast && m.count == 10_000 && ra.1.stats == rb.1.stats;
    let mut o = Outcome::new(
        pass,
        format!(
            "10000 General examples, runs {:.2?} and {:.2?}, {} bytes, identical: {same}",
            ra.0,
            rb.0,
            std::fs::metadata(&a).map(|m| m.len()).unwrap_or(0)
        ),
    );
    o.notes.push(format!("acceptance rate {:.4} ({} attempts)", m.stats.acceptance_rate, m.stats.attempts));
    for (reason, n) in &m.stats.rejections {
        o.notes.push(format!("rejected {reason:<28} {n}"));
    }
    for (t, n) in &m.stats.per_template {
        o.notes.push(format!("template {t:<28} {n}"));
    }
    o
}

struct Dies {
    calls: AtomicUsize,
    budget: usize,
}

impl Client for Dies {
    fn complete(&self, item: &EvalItem) -> Result<Completion, CallError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) >= self.budget {
            return Err(CallError::Unreachable("connection refused".into()));
        }
        MockClient::Gold.complete(item)
    }
}

fn em_of(req: &EvalRequest) -> Option<f64> {
    cmd_eval(req).ok()?;
    cmd_report(&req.out, None).ok().and_then(|(r, _, _)| r.total.em)
}

fn pct(em: Option<f64>) -> String {
    em.map(|e| format!("{:.1}%", e * 100.0)).unwrap_or_else(|| "-".into())
}

fn harness(dir: &Path) -> Result<Outcome, String> {
    let data = dir.join("mixed.jsonl");
    let config = GenConfig { shots: 1, ..GenConfig::default() };
    let req = GenRequest { config, count: 96, seed: 9, out: data.clone(), standard: true, inline_tables: false, force: true };
    cmd_gen(&req).map_err(|e| e.to_string())?;
    let eval = |url: &str, name: &str| EvalRequest {
        dataset: data.clone(),
        endpoint: ModelEndpoint::new(url, "mock"),
        out: dir.join(name),
        fresh: true,
    };
    let gold = em_of(&eval("mock://gold", "gold.jsonl"));
    let empty = em_of(&eval("mock://empty", "empty.jsonl"));

    let lines: Vec<DatasetLine> = read_jsonl(&data).map_err(|e| e.to_string())?;
    let short = lines.iter().filter(|l| l.token_count < 4096).count();
    let long = lines.iter().filter(|l| (4096..=40960).contains(&l.token_count)).count();
    let (report, _, _) = cmd_report(&dir.join("gold.jsonl"), None).map_err(|e| e.to_string())?;
    let buckets = report.short_context.count == short
        && report.long_context.count == long
        && report.overflow.count == lines.len() - short - long
        && short > 0
        && long > 0;

    let partial = dir.join("resumed.jsonl");
    let items: Vec<EvalItem> = lines.iter().map(eval_item).collect();
    let mut ep = ModelEndpoint::new("mock://gold", "mock");
    ep.max_retries = 0;
    ep.backoff_ms = 1;
    let mut kept = Vec::new();
    let interrupted = run_eval(&items, &Dies { calls: AtomicUsize::new(0), budget: 37 }, &ep, &[], &mut |r| {
        kept.push(serde_json::to_string(r).expect("record"));
        Ok(())
    });
    let body: String = kept.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(&partial, format!("{body}{{\"id\": \"ex-0")).map_err(|e| e.to_string())?;
    let resumed = EvalRequest { fresh: false, ..eval("mock://gold", "resumed.jsonl") };
    cmd_eval(&resumed).map_err(|e| e.to_string())?;
    let identical = interrupted.is_err()
        && std::fs::read(&partial).map_err(|e| e.to_string())? == std::fs::read(dir.join("gold.jsonl")).map_err(|e| e.to_string())?;

    let pass = gold == Some(1.0) && empty == Some(0.0) && buckets && identical;
    Ok(Outcome::new(
        pass,
        format!(
            "gold EM {}, empty EM {}; short {} / long {} of {} (expected {short} / {long}); resume after {} records identical: {identical}",
            pct(gold),
            pct(empty),
            report.short_context.count,
            report.long_context.count,
            lines.len(),
            kept.len()
        ),
    ))
}

fn expected_phases(q: &Query) -> Vec<Phase> {
    let mut p = Vec::new();
    if !q.where_clause.is_empty() {
        p.push(Phase::Where);
    }
    if q.group_by.is_some() {
        p.push(Phase::GroupBy);
    }
    if !q.having.is_empty() {
        p.push(Phase::Having);
    }
    p.push(Phase::Select);
    match (&q.order_by, q.limit) {
        (Some(_), _) => p.push(Phase::OrderBy),
        (None, Some(_)) => p.push(Phase::Limit),
        _ => {}
    }
    p
}

const PHRASES: [(&str, fn(&Query) -> bool); 5] = [
    ("Please filter the rows by the column conditions", |q| !q.where_clause.is_empty()),
    ("grouped according to the value of the", |q| q.group_by.is_some()),
    ("Then filter some groups by the following condition", |q| !q.having.is_empty()),
    ("Select ", |_| true),
    ("Sort the obtained values", |q| q.order_by.is_some()),
];

fn multistep_cot() -> Outcome {
    let tc = TableConfig::with_shape(12, 5);
    let cfg = SqlConfig { answer_cells_number: None, ..SqlConfig::default() };
    let generator = TableGenerator::new(tc.clone()).expect("config");
    let sets = [SetName::General, SetName::Group, SetName::Superlative, SetName::Filter, SetName::Comparative];
    let (mut total, mut steps_ok, mut cot_ok) = (0, 0, 0);
    let mut bad = Vec::new();
    for (i, set) in sets.into_iter().enumerate() {
        let Ok((examples, _)) = generate_dataset(&tc, &cfg, &TemplateSet::named(set), 200, 100 + i as u64, &DatasetOptions::default()) else {
            continue;
        };
        for ex in examples {
            total += 1;
            let q = &ex.query;
            let text = to_multistep(q);
            let lines: Vec<&str> = text.lines().collect();
            let phases: Vec<Phase> = multistep_steps(q).iter().map(|s| s.phase).collect();
            let once = PHRASES.iter().all(|(phrase, present)| {
                let hits = lines.iter().filter(|l| l.contains(phrase) && (*phrase != "Select " || l.starts_with(phrase))).count();
                hits == usize::from(present(q))
            });
            if once && lines.len() == phases.len() && phases == expected_phases(q) {
                steps_ok += 1;
            } else {
                bad.push(format!("multistep: {}", ex.sql));
            }
            let table = generator.generate(ex.table_seed).expect("table");
            let engine = execute(q, &table).map(|a| a.display());
            let cot = to_cot(q, &table);
            match (engine, cot) {
                (Ok(gold), Ok(c)) if c.ends_with(&format!("\nAnswer: {gold}")) && Ok(gold.clone()) == evaluate(q, &table).map(|c| display_cells(&c)) => {
                    cot_ok += 1
                }
                _ => bad.push(format!("cot: {}", ex.sql)),
            }
        }
    }
    let mut o = Outcome::new(
        total == 1000 && steps_ok == total && cot_ok == total,
        format!("{total} queries; multi-step order and coverage {steps_ok}/{total}; cot final answer {cot_ok}/{total}"),
    );
    o.notes = bad.into_iter().take(10).collect();
    o
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("worked examples", Box::new(worked_examples)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("serializer golden files", Box::new(golden_files)),
        ("constraint soundness", Box::new(constraint_soundness)),
        ("length scaling", Box::new(length_scaling)),
        ("dense and sparse layouts", Box::new(dense_sparse)),
        ("statistics", Box::new(statistics)),
        ("determinism and scale", Box::new(|| determinism_and_scale(dir.path()))),
        ("harness correctness", Box::new(|| harness(dir.path()).unwrap_or_else(|e| Outcome::new(false, e)))),
        ("multi-step and cot faithfulness", Box::new(multistep_cot)),
    ];
    let mut failed = Vec::new();
    let mut blocking = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        for n in &o.notes {
            println!("        {n}");
        }
        if !o.pass {
            failed.push(i + 1);
            blocking += usize::from(!o.informational);
        }
    }
    let validated = cmd_validate(&dir.path().join("general-a.jsonl"), None).map(|r| r.ok()).unwrap_or(false);
    println!("      general dataset revalidates: {validated}");
    println!(
        "acceptance: {} passed, {} failed {:?}, {} blocking",
        criteria.len() - failed.len(),
        failed.len(),
        failed,
        blocking + usize::from(!validated)
    );
    if blocking > 0 || !validated {
        std::process::exit(1);
    }
}
