//! The General grammar: eight clause productions whose nonterminals expand
//! against the columns and values of a concrete table.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

use super::template::value_literal;
use super::GenError;
use crate::seed::GenRng;
use crate::sql::quote;
use crate::table::{ColumnType, Table};
use crate::value::Value;

/// Deepest subquery nesting the grammar emits.
pub const MAX_NEST: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Where,
    Order,
    Group,
    Having,
}

pub const PRODUCTIONS: [&[Part]; 8] = [
    &[],
    &[Part::Where],
    &[Part::Order],
    &[Part::Where, Part::Order],
    &[Part::Group, Part::Having],
    &[Part::Where, Part::Group, Part::Having],
    &[Part::Where, Part::Group, Part::Having, Part::Order],
    &[Part::Group, Part::Having, Part::Order],
];

pub fn production_text(parts: &[Part]) -> String {
    let mut s = String::from("select <select_condition> from my_table");
    for p in parts {
        s.push_str(match p {
            Part::Where => " <where_condition>",
            Part::Order => " <order_condition>",
            Part::Group => " <group_condition>",
            Part::Having => " <having_condition>",
        });
    }
    s
}

pub fn satisfiable(_parts: &[Part], table: &Table) -> bool {
    table.num_columns() > 0 && table.num_rows() > 0
}

struct Ctx<'a> {
    table: &'a Table,
    rng: &'a mut GenRng,
    texts: Vec<usize>,
    ints: Vec<usize>,
    witness: usize,
}

fn pick<T: Copy>(rng: &mut GenRng, options: &[(f64, T)]) -> T {
    let w = WeightedIndex::new(options.iter().map(|o| o.0)).expect("positive weights");
    options[w.sample(rng)].1
}

impl Ctx<'_> {
    fn header(&self, c: usize) -> String {
        self.table.columns[c].header.clone()
    }

    fn any_col(&mut self) -> usize {
        self.rng.gen_range(0..self.table.num_columns())
    }

    fn int_col(&mut self) -> Option<usize> {
        self.ints.choose(self.rng).copied()
    }

    fn two_ints(&mut self) -> Option<(usize, usize)> {
        if self.ints.len() < 2 {
            return None;
        }
        let v: Vec<usize> = self.ints.choose_multiple(self.rng, 2).copied().collect();
        Some((v[0], v[1]))
    }

    fn random_row(&mut self) -> usize {
        self.rng.gen_range(0..self.table.num_rows())
    }

    fn cell(&self, row: usize, col: usize) -> &Value {
        &self.table.rows[row][col]
    }

    fn op(&mut self) -> &'static str {
        [">", "<", "="].choose(self.rng).expect("nonempty")
    }

    fn agg_of_int(&mut self, c: usize) -> String {
        let f = ["sum", "avg", "max", "min"].choose(self.rng).expect("nonempty");
        format!("{f} ( {} )", self.header(c))
    }

    fn select_item(&mut self, group: Option<usize>) -> String {
        #[derive(Clone, Copy)]
        enum S {
            Col,
            Agg,
            Count,
            CountDistinct,
            Arith,
            Compare,
            Pair,
            GroupCol,
        }
        let has_int = !self.ints.is_empty();
        let has_two = self.ints.len() >= 2;
        let mut opts = vec![(4.0, S::Col), (1.0, S::Count)];
        if group.is_some() {
            opts.push((4.0, S::GroupCol));
        }
        if has_int {
            opts.push((2.0, S::Agg));
        }
        if has_two {
            opts.push((1.0, S::Arith));
            opts.push((0.5, S::Compare));
        }
        opts.push((0.5, S::CountDistinct));
        if self.table.num_columns() >= 2 {
            opts.push((0.5, S::Pair));
        }
        match pick(self.rng, &opts) {
            S::Col => {
                let c = self.any_col();
                self.header(c)
            }
            S::GroupCol => self.header(group.expect("grouped")),
            S::Agg => {
                let c = self.int_col().expect("has int");
                self.agg_of_int(c)
            }
            S::Count => {
                let c = self.any_col();
                format!("count ( {} )", self.header(c))
            }
            S::CountDistinct => {
                let c = self.any_col();
                format!("count ( distinct {} )", self.header(c))
            }
            S::Arith => {
                let (a, b) = self.two_ints().expect("two ints");
                let op = ["+", "-", "*"].choose(self.rng).expect("nonempty");
                format!("{} {op} {}", self.header(a), self.header(b))
            }
            S::Compare => {
                let (a, b) = self.two_ints().expect("two ints");
                let op = [">", "<"].choose(self.rng).expect("nonempty");
                format!("{} {op} {}", self.header(a), self.header(b))
            }
            S::Pair => {
                let v: Vec<usize> = (0..self.table.num_columns()).collect::<Vec<_>>().choose_multiple(self.rng, 2).copied().collect();
                format!("{} , {}", self.header(v[0]), self.header(v[1]))
            }
        }
    }

    fn where_cond(&mut self, depth: usize) -> String {
        #[derive(Clone, Copy)]
        enum W {
            Eq,
            Cmp,
            ColCmp,
            Like,
            In,
            Sub,
        }
        let mut opts = vec![(4.0, W::Eq), (1.0, W::In)];
        let ordered: Vec<usize> = (0..self.table.num_columns())
            .filter(|&c| self.table.columns[c].ctype != ColumnType::Text)
            .collect();
        if !ordered.is_empty() {
            opts.push((3.0, W::Cmp));
        }
        if self.ints.len() >= 2 {
            opts.push((1.0, W::ColCmp));
        }
        if !self.texts.is_empty() {
            opts.push((1.0, W::Like));
        }
        if !self.ints.is_empty() && depth < MAX_NEST {
            opts.push((1.5, W::Sub));
        }
        match pick(self.rng, &opts) {
            W::Eq => {
                let c = self.any_col();
                format!("{} = {}", self.header(c), value_literal(self.cell(self.witness, c)))
            }
            W::Cmp => {
                let c = *ordered.choose(self.rng).expect("nonempty");
                let op = self.op();
                let v = if op == "=" { self.witness } else { self.random_row() };
                format!("{} {op} {}", self.header(c), value_literal(self.cell(v, c)))
            }
            W::ColCmp => {
                let (a, b) = self.two_ints().expect("two ints");
                let op = [">", "<"].choose(self.rng).expect("nonempty");
                format!("{} {op} {}", self.header(a), self.header(b))
            }
            W::Like => {
                let c = *self.texts.choose(self.rng).expect("nonempty");
                let s = self.cell(self.witness, c).render();
                let n = s.chars().count();
                let len = self.rng.gen_range(1..=n.clamp(1, 3));
                let start = self.rng.gen_range(0..=n - len);
                let frag: String = s.chars().skip(start).take(len).collect();
                let pat = match self.rng.gen_range(0..3) {
                    0 => format!("{frag}%"),
                    1 => format!("%{frag}"),
                    _ => format!("%{frag}%"),
                };
                format!("{} like {}", self.header(c), quote(&pat))
            }
            W::In => {
                let c = self.any_col();
                let r = self.random_row();
                let a = value_literal(self.cell(self.witness, c));
                let b = value_literal(self.cell(r, c));
                format!("{} in ( {a} , {b} )", self.header(c))
            }
            W::Sub => {
                let a = self.int_col().expect("has int");
                let b = self.int_col().expect("has int");
                let op = [">", "<"].choose(self.rng).expect("nonempty");
                let f = ["max", "min", "avg"].choose(self.rng).expect("nonempty");
                let mut inner = format!("select {f} ( {} ) from my_table", self.header(b));
                if self.rng.gen_bool(0.5) {
                    let saved = self.witness;
                    self.witness = self.random_row();
                    inner.push_str(&format!(" where {}", self.where_cond(depth + 1)));
                    self.witness = saved;
                }
                format!("{} {op} ( {inner} )", self.header(a))
            }
        }
    }

    fn where_clause(&mut self) -> String {
        let n = pick(self.rng, &[(0.65, 1usize), (0.3, 2), (0.05, 3)]);
        let conds: Vec<String> = (0..n).map(|_| self.where_cond(1)).collect();
        format!("where {}", conds.join(" and "))
    }

    fn having_cond(&mut self, group: usize) -> String {
        let use_agg = !self.ints.is_empty() && self.rng.gen_bool(0.5);
        if use_agg {
            let c = self.int_col().expect("has int");
            let key = self.cell(self.witness, group).clone();
            let members: Vec<i64> = self
                .table
                .rows
                .iter()
                .filter(|r| r[group] == key)
                .filter_map(|r| if let Value::Int(x) = r[c] { Some(x) } else { None })
                .collect();
            let f = *["sum", "max", "min", "avg"].choose(self.rng).expect("nonempty");
            let op = self.op();
            let v = match f {
                "sum" if op == "=" => members.iter().sum::<i64>(),
                "max" if op == "=" => members.iter().copied().max().unwrap_or(0),
                "min" if op == "=" => members.iter().copied().min().unwrap_or(0),
                _ => {
                    let r = self.random_row();
                    match self.cell(r, c) {
                        Value::Int(x) => *x,
                        _ => 0,
                    }
                }
            };
            format!("{f} ( {} ) {op} {v}", self.header(c))
        } else {
            let c = self.any_col();
            let op = self.op();
            let n = self.rng.gen_range(1..=4);
            format!("count ( {} ) {op} {n}", self.header(c))
        }
    }

    fn having_clause(&mut self, group: usize) -> String {
        let n = pick(self.rng, &[(0.8, 1usize), (0.2, 2)]);
        let conds: Vec<String> = (0..n).map(|_| self.having_cond(group)).collect();
        format!("having {}", conds.join(" and "))
    }

    fn order_clause(&mut self, group: Option<usize>) -> String {
        let key = match group {
            Some(g) => match self.rng.gen_range(0..3) {
                0 => self.header(g),
                1 if !self.ints.is_empty() => {
                    let c = self.int_col().expect("has int");
                    self.agg_of_int(c)
                }
                _ => {
                    let c = self.any_col();
                    let d = if self.rng.gen_bool(0.3) { "distinct " } else { "" };
                    format!("count ( {d}{} )", self.header(c))
                }
            },
            None => {
                let c = match self.int_col() {
                    Some(c) if self.rng.gen_bool(0.7) => c,
                    _ => self.any_col(),
                };
                self.header(c)
            }
        };
        let dir = pick(self.rng, &[(0.45, " asc"), (0.45, " desc"), (0.1, "")]);
        let limit = pick(self.rng, &[(0.75, Some(1)), (0.1, Some(2)), (0.05, Some(3)), (0.1, None)]);
        let mut s = format!("order by {key}{dir}");
        if let Some(n) = limit {
            s.push_str(&format!(" limit {n}"));
        }
        s
    }
}

/// Expands one General production into SQL text.
pub fn expand(parts: &[Part], table: &Table, rng: &mut GenRng) -> Result<String, GenError> {
    if !satisfiable(parts, table) {
        return Err(GenError::SlotUnsatisfiable("general grammar needs a nonempty table".into()));
    }
    let witness = rng.gen_range(0..table.num_rows());
    let mut ctx = Ctx {
        table,
        texts: table.columns_of_type(ColumnType::Text),
        ints: table.columns_of_type(ColumnType::Int),
        rng,
        witness,
    };
    let group = if parts.contains(&Part::Group) {
        Some(match ctx.texts.choose(ctx.rng).copied() {
            Some(t) if ctx.rng.gen_bool(0.7) => t,
            _ => ctx.any_col(),
        })
    } else {
        None
    };
    let mut out = vec!["select".to_string(), ctx.select_item(group), "from my_table".to_string()];
    for p in parts {
        let clause = match p {
            Part::Where => ctx.where_clause(),
            Part::Group => format!("group by {}", ctx.header(group.expect("grouped"))),
            Part::Having => ctx.having_clause(group.expect("grouped")),
            Part::Order => ctx.order_clause(group),
        };
        out.push(clause);
    }
    Ok(out.join(" "))
}
