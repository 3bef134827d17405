use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SqlConfig;
use super::example::{generate_from, Example, DEFAULT_MAX_ATTEMPTS};
use super::template::{Template, TemplateSet};
use super::GenError;
use crate::seed::{derive_seed, mix64, rng_from_seed, STREAM_QUERY, STREAM_TABLE, STREAM_UNSEEN_TABLE};
use crate::table::{TableConfig, TableGenerator};

/// Dataset partition. `Seen` and `UnseenTable` share templates but not table
/// seeds; `UnseenTemplate` uses only the held-out templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Seen,
    UnseenTable,
    UnseenTemplate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetOptions {
    pub split: Option<Split>,
    /// Fraction of templates held out for `UnseenTemplate`.
    pub holdout_fraction: f64,
    pub max_attempts: usize,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions { split: None, holdout_fraction: 0.25, max_attempts: DEFAULT_MAX_ATTEMPTS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DatasetStats {
    pub examples: usize,
    pub attempts: usize,
    pub acceptance_rate: f64,
    pub rejections: BTreeMap<String, usize>,
    pub per_template: BTreeMap<String, usize>,
}

impl DatasetStats {
    pub fn from_examples(examples: &[Example]) -> DatasetStats {
        let mut s = DatasetStats { examples: examples.len(), ..Default::default() };
        for e in examples {
            s.attempts += e.attempts;
            for (k, v) in &e.rejections {
                *s.rejections.entry(k.clone()).or_default() += v;
            }
            *s.per_template.entry(e.template.clone()).or_default() += 1;
        }
        s.acceptance_rate = if s.attempts == 0 { 0.0 } else { s.examples as f64 / s.attempts as f64 };
        s
    }
}

/// Deterministic split of a template list into (kept, held out). Both sides
/// are nonempty whenever there are at least two templates.
pub fn partition_templates<'a>(templates: &'a [Template], fraction: f64, master_seed: u64) -> (Vec<&'a Template>, Vec<&'a Template>) {
    let mut keyed: Vec<(u64, &Template)> = templates
        .iter()
        .map(|t| {
            let h = t.name.bytes().fold(mix64(master_seed), |acc, b| mix64(acc ^ b as u64));
            (h, t)
        })
        .collect();
    keyed.sort_by_key(|(h, _)| *h);
    let n = templates.len();
    let mut held = ((n as f64) * fraction).round() as usize;
    if n >= 2 {
        held = held.clamp(1, n - 1);
    } else {
        held = 0;
    }
    let (out, keep) = keyed.split_at(held);
    let mut keep: Vec<&Template> = keep.iter().map(|(_, t)| *t).collect();
    let mut out: Vec<&Template> = out.iter().map(|(_, t)| *t).collect();
    keep.sort_by(|a, b| a.name.cmp(&b.name));
    out.sort_by(|a, b| a.name.cmp(&b.name));
    (keep, out)
}

pub fn table_seed(master_seed: u64, index: u64, split: Option<Split>) -> u64 {
    let stream = match split {
        Some(Split::UnseenTable) => STREAM_UNSEEN_TABLE,
        _ => STREAM_TABLE,
    };
    derive_seed(master_seed, stream, index)
}

/// Generates `count` examples, one fresh table each, in index order.
pub fn generate_dataset(
    table_cfg: &TableConfig,
    cfg: &SqlConfig,
    set: &TemplateSet,
    count: usize,
    master_seed: u64,
    opts: &DatasetOptions,
) -> Result<(Vec<Example>, DatasetStats), GenError> {
    cfg.validate()?;
    let generator = TableGenerator::new(table_cfg.clone())?;
    let pool: Vec<&Template> = set.filtered(&cfg.include, &cfg.exclude);
    let pool: Vec<&Template> = match opts.split {
        None => pool,
        Some(split) => {
            let owned: Vec<Template> = pool.iter().map(|t| (*t).clone()).collect();
            let (keep, out) = partition_templates(&owned, opts.holdout_fraction, master_seed);
            let names: Vec<String> =
                if split == Split::UnseenTemplate { out } else { keep }.iter().map(|t| t.name.clone()).collect();
            pool.into_iter().filter(|t| names.contains(&t.name)).collect()
        }
    };
    let examples: Result<Vec<Example>, GenError> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let at = |e: GenError| GenError::AtIndex { index: i as usize, source: Box::new(e) };
            let table = generator.generate(table_seed(master_seed, i, opts.split)).map_err(|e| at(e.into()))?;
            let mut rng = rng_from_seed(derive_seed(master_seed, STREAM_QUERY, i));
            let mut ex = generate_from(&table, &pool, set.name, cfg, &mut rng, opts.max_attempts).map_err(at)?;
            ex.id = format!("ex-{i:06}");
            Ok(ex)
        })
        .collect();
    let examples = examples?;
    let stats = DatasetStats::from_examples(&examples);
    Ok((examples, stats))
}
