use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use tabexec_core::gen::{generate_dataset, partition_templates, table_seed, DatasetOptions, DatasetStats, Split, DEFAULT_MAX_ATTEMPTS};
use tabexec_core::render::budget::{fit_rows_with_overhead, prompt_overhead};
use tabexec_core::render::AnswerPosition;
use tabexec_core::seed::{derive_seed, rng_from_seed, STREAM_SHOTS};
use tabexec_core::table::TableGenerator;
use tabexec_core::{
    analyze, build_prompt, check_constraints, generate_example, parse, render_sql, row_coverage, to_cot, to_multistep,
    Answer, Example, Query, QueryAttributes, SerializerStyle, SetName, SqlConfig, Table, TableConfig, TaskStyle, Template,
    TemplateSet, TokenCounter, Verdict,
};

use crate::config::{standard_table_config, GenConfig, STANDARD_BUDGETS, STANDARD_SETS};
use crate::error::CliError;
use crate::fsutil::{read_jsonl, sha256_file, sidecar, write_atomic, write_json};

/// Seed stream separating the parts of a multi-part run.
pub const STREAM_PARTS: u64 = 0x7061_7274_7300;

/// Typical shot, used to reserve room for few-shot examples under a budget.
const SHOT_ALLOWANCE: &str = "SQL:select count ( aaaa ) , sum ( bbbb ) from my_table where cccc > 100 group by dddd \nAnswer:1234\n";

/// One example as stored on disk. Tables are referenced by part and seed
/// unless generated with `--inline-tables`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetLine {
    pub id: String,
    pub part: usize,
    pub table_seed: u64,
    pub template: String,
    pub reasoning_type: SetName,
    pub sql: String,
    pub instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cot: Option<String>,
    /// SQL of the few-shot examples, in prompt order.
    pub shots: Vec<String>,
    pub prompt: String,
    pub answer: Vec<String>,
    /// Gold answer text as scored by the harness.
    pub gold: String,
    pub token_count: usize,
    pub table_token_count: usize,
    pub answer_positions: Vec<AnswerPosition>,
    pub answer_rows: Vec<usize>,
    pub row_coverage: f64,
    pub attributes: QueryAttributes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Json>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub template_set: SetName,
    pub budget: Option<usize>,
    pub table_config: TableConfig,
    pub seed: u64,
    pub count: usize,
    /// Global index of the part's first line.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub standard: bool,
    pub sql_config: SqlConfig,
    pub style: SerializerStyle,
    pub task: TaskStyle,
    pub shots: usize,
    pub token_counter: TokenCounter,
    pub split: Option<Split>,
    pub holdout_fraction: f64,
    pub inline_tables: bool,
    pub parts: Vec<Part>,
    pub count: usize,
    pub stats: DatasetStats,
    pub dataset_file: String,
    pub dataset_sha256: String,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::io(path, format!("bad manifest: {e}")))
    }

    pub fn options(&self) -> DatasetOptions {
        DatasetOptions { split: self.split, holdout_fraction: self.holdout_fraction, max_attempts: DEFAULT_MAX_ATTEMPTS }
    }
}

#[derive(Debug, Clone)]
pub struct GenRequest {
    pub config: GenConfig,
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub standard: bool,
    pub inline_tables: bool,
    pub force: bool,
}

pub fn manifest_path(dataset: &Path) -> PathBuf {
    sidecar(dataset, "manifest.json")
}

fn shot_overhead(task: TaskStyle, shots: usize, counter: TokenCounter) -> usize {
    if shots == 0 {
        return 0;
    }
    let per = counter.count(SHOT_ALLOWANCE);
    let per = if task == TaskStyle::SqlText { per } else { 2 * per };
    counter.count(tabexec_core::render::prompt::FEW_SHOT_INTRO) + shots * per
}

fn fitted(cfg: &GenConfig, table: &TableConfig, budget: usize) -> Result<TableConfig, CliError> {
    let overhead = prompt_overhead(cfg.task, cfg.token_counter) + shot_overhead(cfg.task, cfg.shots, cfg.token_counter);
    let rows = fit_rows_with_overhead(table, budget, cfg.style, cfg.token_counter, overhead)?;
    Ok(table.clone().with_rows(rows))
}

/// Splits `count` over the requested sets and budgets. Earlier parts take
/// the remainder.
pub fn plan_parts(cfg: &GenConfig, count: usize, seed: u64, standard: bool) -> Result<Vec<Part>, CliError> {
    if !standard {
        let table_config = match cfg.budget {
            Some(b) => fitted(cfg, &cfg.table_config, b)?,
            None => cfg.table_config.clone(),
        };
        return Ok(vec![Part { template_set: cfg.template_set, budget: cfg.budget, table_config, seed, count, offset: 0 }]);
    }
    let base = standard_table_config();
    let mut tables = Vec::new();
    for b in STANDARD_BUDGETS {
        tables.push(fitted(cfg, &base, b)?);
    }
    let combos: Vec<(SetName, usize)> =
        STANDARD_SETS.iter().flat_map(|s| (0..STANDARD_BUDGETS.len()).map(move |b| (*s, b))).collect();
    let n = combos.len();
    let mut parts = Vec::with_capacity(n);
    let mut offset = 0;
    for (p, (set, b)) in combos.into_iter().enumerate() {
        let c = count / n + usize::from(p < count % n);
        parts.push(Part {
            template_set: set,
            budget: Some(STANDARD_BUDGETS[b]),
            table_config: tables[b].clone(),
            seed: derive_seed(seed, STREAM_PARTS, p as u64),
            count: c,
            offset,
        });
        offset += c;
    }
    Ok(parts)
}

/// Few-shot examples for index `i` of a part: drawn on the same table, never
/// repeating the target or each other.
pub fn draw_shots(
    table: &Table,
    set: &TemplateSet,
    cfg: &SqlConfig,
    part_seed: u64,
    i: usize,
    target_sql: &str,
    shots: usize,
) -> Result<Vec<(Query, Answer)>, CliError> {
    let mut rng = rng_from_seed(derive_seed(part_seed, STREAM_SHOTS, i as u64));
    let mut seen: HashSet<String> = HashSet::from([target_sql.to_string()]);
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots * 4 {
        if out.len() == shots {
            break;
        }
        let ex = generate_example(table, set, cfg, &mut rng, DEFAULT_MAX_ATTEMPTS)?;
        if seen.insert(ex.sql.clone()) {
            out.push((ex.query, ex.answer));
        }
    }
    Ok(out)
}

struct LineContext<'a> {
    manifest_like: &'a Settings,
    part: &'a Part,
    set: TemplateSet,
    generator: TableGenerator,
}

/// Settings shared by every line of a run.
#[derive(Debug, Clone)]
struct Settings {
    sql_config: SqlConfig,
    style: SerializerStyle,
    task: TaskStyle,
    shots: usize,
    counter: TokenCounter,
    inline_tables: bool,
    split: Option<Split>,
    holdout_fraction: f64,
}

impl Settings {
    fn of(m: &RunManifest) -> Settings {
        Settings {
            sql_config: m.sql_config.clone(),
            style: m.style,
            task: m.task,
            shots: m.shots,
            counter: m.token_counter,
            inline_tables: m.inline_tables,
            split: m.split,
            holdout_fraction: m.holdout_fraction,
        }
    }
}

/// Templates the part's targets were drawn from, so that shots obey the
/// same split.
fn shot_pool(s: &Settings, part: &Part) -> TemplateSet {
    let full = TemplateSet::named(part.template_set);
    let pool: Vec<Template> =
        full.filtered(&s.sql_config.include, &s.sql_config.exclude).into_iter().cloned().collect();
    let templates = match s.split {
        None => pool,
        Some(split) => {
            let (keep, out) = partition_templates(&pool, s.holdout_fraction, part.seed);
            let side = if split == Split::UnseenTemplate { out } else { keep };
            side.into_iter().cloned().collect()
        }
    };
    TemplateSet { name: full.name, templates }
}

impl<'a> LineContext<'a> {
    fn new(s: &'a Settings, part: &'a Part) -> Result<Self, CliError> {
        Ok(LineContext {
            manifest_like: s,
            part,
            set: shot_pool(s, part),
            generator: TableGenerator::new(part.table_config.clone())?,
        })
    }

    fn line(&self, p: usize, i: usize, ex: &Example) -> Result<DatasetLine, CliError> {
        let s = self.manifest_like;
        let table = self.generator.generate(ex.table_seed)?;
        let shots = draw_shots(&table, &self.set, &s.sql_config, self.part.seed, i, &ex.sql, s.shots)?;
        let prompt = build_prompt(&table, &shots, &ex.query, s.style, s.task, s.counter)?;
        let cot = match s.task {
            TaskStyle::ChainOfThought => Some(to_cot(&ex.query, &table)?),
            _ => None,
        };
        Ok(DatasetLine {
            id: format!("ex-{:06}", self.part.offset + i),
            part: p,
            table_seed: ex.table_seed,
            template: ex.template.clone(),
            reasoning_type: ex.reasoning_type,
            sql: ex.sql.clone(),
            instruction: to_multistep(&ex.query),
            cot,
            shots: shots.iter().map(|(q, _)| render_sql(q)).collect(),
            prompt: prompt.text,
            answer: ex.answer.cell_strings(),
            gold: ex.answer.display(),
            token_count: prompt.token_count,
            table_token_count: prompt.table_token_count,
            answer_positions: prompt.answer_positions,
            answer_rows: ex.answer_rows.clone(),
            row_coverage: ex.row_coverage,
            attributes: ex.attributes.clone(),
            table: s.inline_tables.then(|| table.to_json()),
        })
    }
}

/// Generates all lines in memory; the output is independent of thread count.
pub fn generate_lines(req: &GenRequest) -> Result<(Vec<DatasetLine>, Vec<Part>, DatasetStats), CliError> {
    let cfg = &req.config;
    cfg.sql_config.validate()?;
    let parts = plan_parts(cfg, req.count, req.seed, req.standard)?;
    let settings = Settings {
        sql_config: cfg.sql_config.clone(),
        style: cfg.style,
        task: cfg.task,
        shots: cfg.shots,
        counter: cfg.token_counter,
        inline_tables: req.inline_tables,
        split: cfg.split,
        holdout_fraction: cfg.holdout_fraction,
    };
    let opts = DatasetOptions { split: cfg.split, holdout_fraction: cfg.holdout_fraction, max_attempts: DEFAULT_MAX_ATTEMPTS };
    let mut lines = Vec::with_capacity(req.count);
    let mut all = Vec::with_capacity(req.count);
    for (p, part) in parts.iter().enumerate() {
        if part.count == 0 {
            continue;
        }
        let set = TemplateSet::named(part.template_set);
        let (examples, _) = generate_dataset(&part.table_config, &cfg.sql_config, &set, part.count, part.seed, &opts)?;
        let ctx = LineContext::new(&settings, part)?;
        let built: Result<Vec<DatasetLine>, CliError> =
            examples.par_iter().enumerate().map(|(i, ex)| ctx.line(p, i, ex)).collect();
        lines.extend(built?);
        all.extend(examples);
    }
    Ok((lines, parts, DatasetStats::from_examples(&all)))
}

/// `gen`: writes the dataset and its manifest, each atomically.
pub fn cmd_gen(req: &GenRequest) -> Result<RunManifest, CliError> {
    let mpath = manifest_path(&req.out);
    if !req.force {
        for p in [&req.out, &mpath] {
            if p.exists() {
                return Err(CliError::Usage(format!("{} exists; pass --force to replace it", p.display())));
            }
        }
    }
    let (lines, parts, stats) = generate_lines(req)?;
    write_atomic(&req.out, |w| {
        for l in &lines {
            serde_json::to_writer(&mut *w, l)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    let cfg = &req.config;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: req.seed,
        standard: req.standard,
        sql_config: cfg.sql_config.clone(),
        style: cfg.style,
        task: cfg.task,
        shots: cfg.shots,
        token_counter: cfg.token_counter,
        split: cfg.split,
        holdout_fraction: cfg.holdout_fraction,
        inline_tables: req.inline_tables,
        parts,
        count: lines.len(),
        stats,
        dataset_file: req.out.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        dataset_sha256: sha256_file(&req.out)?,
        warnings: cfg.warnings.clone(),
    };
    write_json(&mpath, &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub total: usize,
    pub failures: Vec<(String, String)>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn check_line(ctx: &LineContext, line: &DatasetLine, index: usize) -> Result<(), String> {
    let s = ctx.manifest_like;
    if line.table_seed != table_seed(ctx.part.seed, index as u64, s.split) {
        return Err("table seed does not follow from the part seed".into());
    }
    let table = ctx.generator.generate(line.table_seed).map_err(|e| format!("table: {e}"))?;
    if let Some(t) = &line.table {
        let inline = Table::from_json(t.clone()).map_err(|e| format!("inline table: {e}"))?;
        if inline != table {
            return Err("inline table differs from the regenerated one".into());
        }
    }
    let q = parse(&line.sql).map_err(|e| format!("sql: {e}"))?;
    if render_sql(&q) != line.sql {
        return Err("sql is not in canonical form".into());
    }
    let answer = tabexec_core::execute(&q, &table).map_err(|e| format!("execute: {e}"))?;
    if answer.cell_strings() != line.answer || answer.display() != line.gold {
        return Err(format!("answer mismatch: engine gives {}", answer.display()));
    }
    if answer.source_rows() != line.answer_rows {
        return Err("answer rows mismatch".into());
    }
    if analyze(&q).with_table_width(table.num_columns()) != line.attributes {
        return Err("attributes mismatch".into());
    }
    let cov = row_coverage(&q, &table).map_err(|e| format!("coverage: {e}"))?;
    if cov != line.row_coverage {
        return Err("row coverage mismatch".into());
    }
    if let Verdict::Reject(r) = check_constraints(&q, &table, &s.sql_config) {
        return Err(format!("constraint violated: {r}"));
    }
    if to_multistep(&q) != line.instruction {
        return Err("instruction mismatch".into());
    }
    if let Some(c) = &line.cot {
        if &to_cot(&q, &table).map_err(|e| e.to_string())? != c {
            return Err("cot mismatch".into());
        }
    }
    let mut shots = Vec::with_capacity(line.shots.len());
    for sql in &line.shots {
        let sq = parse(sql).map_err(|e| format!("shot: {e}"))?;
        let sa = tabexec_core::execute(&sq, &table).map_err(|e| format!("shot: {e}"))?;
        shots.push((sq, sa));
    }
    let expected = draw_shots(&table, &ctx.set, &s.sql_config, ctx.part.seed, index, &line.sql, s.shots)
        .map_err(|e| format!("shots: {e}"))?;
    if expected != shots {
        return Err("shots differ from the seeded draw".into());
    }
    let prompt = build_prompt(&table, &shots, &q, s.style, s.task, s.counter).map_err(|e| format!("prompt: {e}"))?;
    if prompt.text != line.prompt {
        return Err("prompt does not re-render byte for byte".into());
    }
    if prompt.token_count != line.token_count
        || prompt.table_token_count != line.table_token_count
        || prompt.answer_positions != line.answer_positions
    {
        return Err("prompt measurements mismatch".into());
    }
    Ok(())
}

/// `validate`: hash, structure, and a full re-derivation of every line.
pub fn cmd_validate(dataset: &Path, manifest: Option<&Path>) -> Result<ValidationReport, CliError> {
    let mpath = manifest.map(Path::to_path_buf).unwrap_or_else(|| manifest_path(dataset));
    let m = RunManifest::load(&mpath)?;
    let mut report = ValidationReport::default();
    let hash = sha256_file(dataset)?;
    if hash != m.dataset_sha256 {
        report.failures.push(("<file>".into(), format!("sha256 {hash} does not match manifest {}", m.dataset_sha256)));
    }
    let lines: Vec<DatasetLine> = read_jsonl(dataset)?;
    report.total = lines.len();
    if lines.len() != m.count {
        report.failures.push(("<file>".into(), format!("{} lines, manifest says {}", lines.len(), m.count)));
    }
    let settings = Settings::of(&m);
    let contexts: Vec<LineContext> = m.parts.iter().map(|p| LineContext::new(&settings, p)).collect::<Result<_, _>>()?;
    let mut ids = HashSet::new();
    for l in &lines {
        if !ids.insert(l.id.clone()) {
            report.failures.push((l.id.clone(), "duplicate id".into()));
        }
    }
    let failures: Vec<(String, String)> = lines
        .par_iter()
        .enumerate()
        .filter_map(|(g, l)| {
            let fail = |why: String| Some((l.id.clone(), why));
            let Some(ctx) = contexts.get(l.part) else {
                return fail(format!("unknown part {}", l.part));
            };
            let Some(i) = g.checked_sub(ctx.part.offset).filter(|i| *i < ctx.part.count) else {
                return fail("line lies outside its part".into());
            };
            if l.id != format!("ex-{g:06}") {
                return fail("id out of sequence".into());
            }
            check_line(ctx, l, i).err().and_then(fail)
        })
        .collect();
    report.failures.extend(failures);
    Ok(report)
}
