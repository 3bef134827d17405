use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Zero};
use serde::{Deserialize, Serialize};

use super::ast::{AggFunc, BinOp, Expr, InList, Literal, Query};
use super::print::render_expr;
use super::SqlError;
use crate::table::{ColumnType, Table};
use crate::value::{parse_date, Value};
use crate::Rational;

/// Provenance of one answer cell: the table row and column it was read from.
///
/// Aggregates other than `max`/`min` have no single source row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CellSource {
    pub row: Option<usize>,
    pub column: Option<usize>,
}

/// Result of executing a query: cells in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub columns: Vec<String>,
    pub cells: Vec<Value>,
    pub sources: Vec<CellSource>,
}

impl Answer {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        if self.columns.is_empty() {
            0
        } else {
            self.cells.len() / self.columns.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Value]> {
        self.cells.chunks(self.columns.len().max(1))
    }

    pub fn cell_strings(&self) -> Vec<String> {
        self.cells.iter().map(Value::render).collect()
    }

    /// Distinct source rows in first-seen order.
    pub fn source_rows(&self) -> Vec<usize> {
        let mut seen = HashSet::new();
        self.sources.iter().filter_map(|s| s.row).filter(|r| seen.insert(*r)).collect()
    }

    /// Gold-answer text: a single cell bare, several as a bracketed list with
    /// text quoted and numbers bare, e.g. `['qxgd', 'lorfaljob']`.
    pub fn display(&self) -> String {
        display_cells(&self.cells)
    }
}

pub fn display_cells(cells: &[Value]) -> String {
    if cells.len() == 1 {
        return cells[0].render();
    }
    let items: Vec<String> = cells
        .iter()
        .map(|c| match c {
            Value::Text(_) | Value::Date(_) => format!("'{}'", c.render()),
            other => other.render(),
        })
        .collect();
    format!("[{}]", items.join(", "))
}

/// Clause phases in the order they are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    From,
    Where,
    GroupBy,
    Having,
    Select,
    OrderBy,
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub key: Option<Value>,
    pub rows: Vec<usize>,
    /// Row that bare column references read from.
    pub rep: Option<usize>,
}

/// Full record of one execution, clause by clause.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub trace: Vec<Phase>,
    /// Rows surviving `where`. For a query without `from`, the union of the
    /// rows its direct subqueries kept.
    pub filtered_rows: Vec<usize>,
    pub groups: Option<Vec<Group>>,
    pub having_groups: Option<Vec<Group>>,
    /// Select-list values per output unit, before `order by` and `limit`.
    pub selected: Vec<Vec<Value>>,
    /// Same units after `order by`, before `limit`.
    pub ordered: Vec<Vec<Value>>,
    pub answer: Answer,
}

pub fn execute(query: &Query, table: &Table) -> Result<Answer, SqlError> {
    execute_traced(query, table).map(|e| e.answer)
}

pub fn execute_traced(query: &Query, table: &Table) -> Result<Execution, SqlError> {
    typecheck(query, table)?;
    let mut ex = Executor { table, subs: HashMap::new() };
    ex.run(query)
}

/// Fraction of table rows that survive the query's top-level filter.
pub fn row_coverage(query: &Query, table: &Table) -> Result<f64, SqlError> {
    let ex = execute_traced(query, table)?;
    if table.num_rows() == 0 {
        return Ok(0.0);
    }
    Ok(ex.filtered_rows.len() as f64 / table.num_rows() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Decimal,
    Text,
    Date,
    Bool,
}

impl Ty {
    fn numeric(self) -> bool {
        matches!(self, Ty::Int | Ty::Decimal)
    }

    fn name(self) -> &'static str {
        match self {
            Ty::Int => "INT",
            Ty::Decimal => "DECIMAL",
            Ty::Text => "TEXT",
            Ty::Date => "DATE",
            Ty::Bool => "BOOL",
        }
    }
}

fn mismatch(msg: impl Into<String>) -> SqlError {
    SqlError::TypeMismatch(msg.into())
}

struct Checker<'a> {
    table: &'a Table,
}

/// Static checks: columns exist, operand types fit, subqueries are scalar.
pub fn typecheck(query: &Query, table: &Table) -> Result<(), SqlError> {
    Checker { table }.query(query).map(|_| ())
}

impl Checker<'_> {
    fn query(&self, q: &Query) -> Result<Vec<Ty>, SqlError> {
        let has_from = q.from.is_some();
        if let Some(g) = &q.group_by {
            if !has_from || self.table.column_index(g).is_none() {
                return Err(SqlError::ColumnNotFound(g.clone()));
            }
        }
        let mut tys = Vec::new();
        for e in &q.select {
            tys.push(self.expr(e, has_from, true)?);
        }
        for e in &q.where_clause {
            self.predicate(e, has_from, false, "where")?;
        }
        for e in &q.having {
            self.predicate(e, has_from, true, "having")?;
        }
        if let Some(o) = &q.order_by {
            self.expr(&o.expr, has_from, true)?;
        }
        Ok(tys)
    }

    fn predicate(&self, e: &Expr, has_from: bool, aggs: bool, clause: &str) -> Result<(), SqlError> {
        match self.expr(e, has_from, aggs)? {
            Ty::Bool => Ok(()),
            t => Err(mismatch(format!("{clause} condition `{}` is {}, not a truth value", render_expr(e), t.name()))),
        }
    }

    fn expr(&self, e: &Expr, has_from: bool, aggs: bool) -> Result<Ty, SqlError> {
        match e {
            Expr::Column(c) => {
                let idx = self
                    .table
                    .column_index(c)
                    .filter(|_| has_from)
                    .ok_or_else(|| SqlError::ColumnNotFound(c.clone()))?;
                Ok(match self.table.columns[idx].ctype {
                    ColumnType::Int => Ty::Int,
                    ColumnType::Text => Ty::Text,
                    ColumnType::Date => Ty::Date,
                })
            }
            Expr::Literal(Literal::Int(_)) => Ok(Ty::Int),
            Expr::Literal(Literal::Decimal(_)) => Ok(Ty::Decimal),
            Expr::Literal(Literal::Text(_)) => Ok(Ty::Text),
            Expr::Agg { func, arg, .. } => {
                if !aggs {
                    return Err(mismatch(format!("aggregate `{}` not allowed in where", render_expr(e))));
                }
                let t = self.expr(arg, has_from, false)?;
                match func {
                    AggFunc::Count => Ok(Ty::Int),
                    _ if !t.numeric() => Err(mismatch(format!(
                        "{} needs a numeric argument, `{}` is {}",
                        func.as_str(),
                        render_expr(arg),
                        t.name()
                    ))),
                    AggFunc::Avg => Ok(Ty::Decimal),
                    _ => Ok(t),
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs, has_from, aggs)?;
                let r = self.expr(rhs, has_from, aggs)?;
                if op.is_arithmetic() {
                    if !l.numeric() || !r.numeric() {
                        return Err(mismatch(format!("`{}` needs numeric operands", render_expr(e))));
                    }
                    Ok(if l == Ty::Int && r == Ty::Int { Ty::Int } else { Ty::Decimal })
                } else {
                    self.comparable(l, lhs, r, rhs)?;
                    Ok(Ty::Bool)
                }
            }
            Expr::In { expr, list } => {
                let l = self.expr(expr, has_from, aggs)?;
                match list {
                    InList::Values(vs) => {
                        for v in vs {
                            let r = self.expr(v, has_from, aggs)?;
                            self.comparable(l, expr, r, v)?;
                        }
                    }
                    InList::Subquery(q) => {
                        let tys = self.query(q)?;
                        if tys.len() != 1 {
                            return Err(mismatch("in-subquery must select exactly one column"));
                        }
                        let compatible = tys[0] == l || (tys[0].numeric() && l.numeric());
                        if !compatible {
                            return Err(mismatch(format!("`{}` compares {} with {}", render_expr(e), l.name(), tys[0].name())));
                        }
                    }
                }
                Ok(Ty::Bool)
            }
            Expr::Like { expr, .. } => match self.expr(expr, has_from, aggs)? {
                Ty::Text => Ok(Ty::Bool),
                t => Err(mismatch(format!("like needs TEXT, `{}` is {}", render_expr(expr), t.name()))),
            },
            Expr::Subquery(q) => {
                let tys = self.query(q)?;
                if tys.len() != 1 {
                    return Err(SqlError::SubqueryNotScalar { cells: tys.len() });
                }
                Ok(tys[0])
            }
            Expr::Paren(inner) => self.expr(inner, has_from, aggs),
        }
    }

    fn comparable(&self, l: Ty, le: &Expr, r: Ty, re: &Expr) -> Result<(), SqlError> {
        let date_text = |t: Ty, other: &Expr| {
            t == Ty::Date
                && matches!(other.unparen(), Expr::Literal(Literal::Text(s)) if parse_date(s).is_some())
        };
        let ok = l == r || (l.numeric() && r.numeric()) || date_text(l, re) || date_text(r, le);
        if ok {
            Ok(())
        } else {
            Err(mismatch(format!(
                "cannot compare `{}` ({}) with `{}` ({})",
                render_expr(le),
                l.name(),
                render_expr(re),
                r.name()
            )))
        }
    }
}

enum SubValue {
    Scalar(Value),
    List(Vec<Value>),
}

#[derive(Clone, Copy)]
enum Scope<'g> {
    NoRow,
    Row(usize),
    Group { rows: &'g [usize], rep: Option<usize> },
}

struct Executor<'a> {
    table: &'a Table,
    subs: HashMap<usize, SubValue>,
}

fn addr(q: &Query) -> usize {
    q as *const Query as usize
}

impl<'a> Executor<'a> {
    fn prepare(&mut self, q: &Query) -> Result<Vec<Execution>, SqlError> {
        let mut execs = Vec::new();
        for e in q.local_exprs() {
            self.prepare_expr(e, &mut execs)?;
        }
        Ok(execs)
    }

    fn prepare_expr(&mut self, e: &Expr, execs: &mut Vec<Execution>) -> Result<(), SqlError> {
        let mut pending: Vec<(&Query, bool)> = Vec::new();
        e.walk_local(&mut |x| match x {
            Expr::Subquery(q) => pending.push((q, true)),
            Expr::In { list: InList::Subquery(q), .. } => pending.push((q, false)),
            _ => {}
        });
        for (q, scalar) in pending {
            if self.subs.contains_key(&addr(q)) {
                continue;
            }
            let ex = self.run(q)?;
            let v = if scalar {
                if ex.answer.cells.len() != 1 {
                    return Err(SqlError::SubqueryNotScalar { cells: ex.answer.cells.len() });
                }
                SubValue::Scalar(ex.answer.cells[0].clone())
            } else {
                SubValue::List(ex.answer.cells.clone())
            };
            self.subs.insert(addr(q), v);
            execs.push(ex);
        }
        Ok(())
    }

    fn run(&mut self, q: &Query) -> Result<Execution, SqlError> {
        let sub_execs = self.prepare(q)?;
        let table = self.table;
        let mut trace = Vec::new();

        let filtered: Vec<usize>;
        let units_scopes: Vec<(Scope<'_>, Option<usize>)>;
        let mut groups_out = None;
        let mut having_out = None;
        let groups: Vec<Group>;

        if q.from.is_none() {
            let mut union: Vec<usize> = sub_execs.iter().flat_map(|e| e.filtered_rows.iter().copied()).collect();
            union.sort_unstable();
            union.dedup();
            filtered = union;
            let keep = if q.where_clause.is_empty() {
                true
            } else {
                trace.push(Phase::Where);
                self.all_true(&q.where_clause, Scope::NoRow)?
            };
            groups = Vec::new();
            units_scopes = if keep { vec![(Scope::NoRow, None)] } else { Vec::new() };
        } else {
            trace.push(Phase::From);
            let mut kept = Vec::new();
            if !q.where_clause.is_empty() {
                trace.push(Phase::Where);
                for r in 0..table.num_rows() {
                    if self.all_true(&q.where_clause, Scope::Row(r))? {
                        kept.push(r);
                    }
                }
            } else {
                kept.extend(0..table.num_rows());
            }
            filtered = kept;

            if q.is_aggregate() {
                let mut gs = match &q.group_by {
                    Some(col) => {
                        trace.push(Phase::GroupBy);
                        let j = table.column_index(col).ok_or_else(|| SqlError::ColumnNotFound(col.clone()))?;
                        self.group_rows(&filtered, j)?
                    }
                    None => vec![Group { key: None, rows: filtered.clone(), rep: None }],
                };
                let extreme = single_extreme_call(q);
                for g in &mut gs {
                    g.rep = match extreme {
                        Some((func, arg)) => self.extreme_row(func, arg, &g.rows)?,
                        None => g.rows.first().copied(),
                    };
                }
                if q.group_by.is_some() {
                    groups_out = Some(gs.clone());
                }
                if !q.having.is_empty() {
                    trace.push(Phase::Having);
                    let mut kept = Vec::new();
                    for g in gs {
                        if self.all_true(&q.having, Scope::Group { rows: &g.rows, rep: g.rep })? {
                            kept.push(g);
                        }
                    }
                    gs = kept;
                    having_out = Some(gs.clone());
                }
                groups = gs;
                units_scopes = Vec::new();
            } else {
                groups = Vec::new();
                units_scopes = filtered.iter().map(|&r| (Scope::Row(r), Some(r))).collect();
            }
        }

        let scopes: Vec<(Scope<'_>, Option<usize>)> = if q.from.is_some() && q.is_aggregate() {
            groups.iter().map(|g| (Scope::Group { rows: &g.rows, rep: g.rep }, g.rep)).collect()
        } else {
            units_scopes
        };

        trace.push(Phase::Select);
        let mut units: Vec<(Vec<Value>, Vec<CellSource>, Scope<'_>)> = Vec::with_capacity(scopes.len());
        for (scope, rep) in &scopes {
            let mut vals = Vec::with_capacity(q.select.len());
            let mut srcs = Vec::with_capacity(q.select.len());
            for item in &q.select {
                vals.push(self.eval(item, *scope)?);
                srcs.push(self.source(item, *scope, *rep)?);
            }
            units.push((vals, srcs, *scope));
        }
        let selected: Vec<Vec<Value>> = units.iter().map(|u| u.0.clone()).collect();

        if let Some(o) = &q.order_by {
            trace.push(Phase::OrderBy);
            let mut keyed = Vec::with_capacity(units.len());
            for u in units {
                let k = self.eval(&o.expr, u.2)?;
                keyed.push((k, u));
            }
            let mut err = None;
            keyed.sort_by(|a, b| match a.0.compare(&b.0) {
                Ok(ord) => {
                    if o.is_desc() {
                        ord.reverse()
                    } else {
                        ord
                    }
                }
                Err(_) => {
                    err.get_or_insert_with(|| mismatch("order by keys are not comparable"));
                    Ordering::Equal
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            units = keyed.into_iter().map(|(_, u)| u).collect();
        }
        let ordered: Vec<Vec<Value>> = units.iter().map(|u| u.0.clone()).collect();

        if let Some(n) = q.limit {
            trace.push(Phase::Limit);
            units.truncate(n as usize);
        }

        let columns = q.select.iter().map(render_expr).collect();
        let mut cells = Vec::new();
        let mut sources = Vec::new();
        for (vals, srcs, _) in units {
            cells.extend(vals);
            sources.extend(srcs);
        }
        Ok(Execution {
            trace,
            filtered_rows: filtered,
            groups: groups_out,
            having_groups: having_out,
            selected,
            ordered,
            answer: Answer { columns, cells, sources },
        })
    }

    /// Groups ordered by ascending key, rows within a group in table order.
    fn group_rows(&self, rows: &[usize], col: usize) -> Result<Vec<Group>, SqlError> {
        let mut index: HashMap<&Value, usize> = HashMap::new();
        let mut gs: Vec<Group> = Vec::new();
        for &r in rows {
            let v = &self.table.rows[r][col];
            match index.get(v) {
                Some(&g) => gs[g].rows.push(r),
                None => {
                    index.insert(v, gs.len());
                    gs.push(Group { key: Some(v.clone()), rows: vec![r], rep: None });
                }
            }
        }
        gs.sort_by(|a, b| {
            let (a, b) = (a.key.as_ref().unwrap(), b.key.as_ref().unwrap());
            a.compare(b).unwrap_or(Ordering::Equal)
        });
        Ok(gs)
    }

    fn all_true(&self, preds: &[Expr], scope: Scope<'_>) -> Result<bool, SqlError> {
        for p in preds {
            match self.eval(p, scope)? {
                Value::Bool(true) => {}
                Value::Bool(false) => return Ok(false),
                other => return Err(mismatch(format!("condition produced {}", other.type_name()))),
            }
        }
        Ok(true)
    }

    fn source(&self, e: &Expr, scope: Scope<'_>, rep: Option<usize>) -> Result<CellSource, SqlError> {
        let col_of = |e: &Expr| e.first_column().and_then(|c| self.table.column_index(c));
        Ok(match (e.unparen(), scope) {
            (_, Scope::NoRow) => CellSource::default(),
            (Expr::Agg { func: f @ (AggFunc::Max | AggFunc::Min), arg, .. }, Scope::Group { rows, .. }) => {
                CellSource { row: self.extreme_row(*f, arg, rows)?, column: col_of(arg) }
            }
            (Expr::Agg { .. }, _) => CellSource::default(),
            (inner, Scope::Row(r)) => CellSource { row: Some(r), column: col_of(inner) },
            (inner, Scope::Group { .. }) if !inner.contains_aggregate() => {
                CellSource { row: rep, column: col_of(inner) }
            }
            _ => CellSource::default(),
        })
    }

    /// First row holding the extreme value of `arg` among `rows`.
    fn extreme_row(&self, func: AggFunc, arg: &Expr, rows: &[usize]) -> Result<Option<usize>, SqlError> {
        let mut best: Option<(Value, usize)> = None;
        for &r in rows {
            let v = self.eval(arg, Scope::Row(r))?;
            let better = match &best {
                None => true,
                Some((b, _)) => {
                    let ord = v.compare(b).map_err(|_| mismatch("incomparable aggregate input"))?;
                    if func == AggFunc::Max {
                        ord == Ordering::Greater
                    } else {
                        ord == Ordering::Less
                    }
                }
            };
            if better {
                best = Some((v, r));
            }
        }
        Ok(best.map(|(_, r)| r))
    }

    fn eval(&self, e: &Expr, scope: Scope<'_>) -> Result<Value, SqlError> {
        match e {
            Expr::Column(c) => {
                let j = self.table.column_index(c).ok_or_else(|| SqlError::ColumnNotFound(c.clone()))?;
                match scope {
                    Scope::Row(r) => Ok(self.table.rows[r][j].clone()),
                    Scope::Group { rep: Some(r), .. } => Ok(self.table.rows[r][j].clone()),
                    Scope::Group { rep: None, .. } => Err(SqlError::EmptyAggregateInput(c.clone())),
                    Scope::NoRow => Err(SqlError::ColumnNotFound(c.clone())),
                }
            }
            Expr::Literal(l) => Ok(literal_value(l)),
            Expr::Agg { func, distinct, arg } => {
                let Scope::Group { rows, .. } = scope else {
                    return Err(mismatch("aggregate outside an aggregating query"));
                };
                self.aggregate(*func, *distinct, arg, rows)
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs, scope)?;
                let r = self.eval(rhs, scope)?;
                if op.is_arithmetic() {
                    arith(*op, &l, &r)
                } else {
                    let ord = l.compare(&r).map_err(|_| {
                        mismatch(format!("cannot compare {} with {}", l.type_name(), r.type_name()))
                    })?;
                    Ok(Value::Bool(match op {
                        BinOp::Gt => ord == Ordering::Greater,
                        BinOp::Lt => ord == Ordering::Less,
                        BinOp::Eq => ord == Ordering::Equal,
                        BinOp::Ne => ord != Ordering::Equal,
                        _ => unreachable!(),
                    }))
                }
            }
            Expr::In { expr, list } => {
                let l = self.eval(expr, scope)?;
                let hit = match list {
                    InList::Values(vs) => {
                        let mut hit = false;
                        for v in vs {
                            let v = self.eval(v, scope)?;
                            hit |= l.compare(&v) == Ok(Ordering::Equal);
                        }
                        hit
                    }
                    InList::Subquery(q) => match self.subs.get(&addr(q)) {
                        Some(SubValue::List(vs)) => vs.iter().any(|v| l.compare(v) == Ok(Ordering::Equal)),
                        _ => return Err(mismatch("subquery was not prepared")),
                    },
                };
                Ok(Value::Bool(hit))
            }
            Expr::Like { expr, pattern } => match self.eval(expr, scope)? {
                Value::Text(s) => Ok(Value::Bool(like_match(&s, pattern))),
                other => Err(mismatch(format!("like on {}", other.type_name()))),
            },
            Expr::Subquery(q) => match self.subs.get(&addr(q)) {
                Some(SubValue::Scalar(v)) => Ok(v.clone()),
                _ => Err(mismatch("subquery was not prepared")),
            },
            Expr::Paren(inner) => self.eval(inner, scope),
        }
    }

    fn aggregate(&self, func: AggFunc, distinct: bool, arg: &Expr, rows: &[usize]) -> Result<Value, SqlError> {
        let mut vals = Vec::with_capacity(rows.len());
        for &r in rows {
            vals.push(self.eval(arg, Scope::Row(r))?);
        }
        match func {
            AggFunc::Count => {
                let n = if distinct { vals.iter().collect::<HashSet<_>>().len() } else { vals.len() };
                Ok(Value::Int(n as i64))
            }
            AggFunc::Sum => sum_values(&vals),
            AggFunc::Avg => {
                if vals.is_empty() {
                    return Err(SqlError::EmptyAggregateInput(format!("avg ( {} )", render_expr(arg))));
                }
                let total = match sum_values(&vals)? {
                    Value::Int(i) => Rational::from_integer(i),
                    Value::Decimal(d) => d,
                    _ => unreachable!(),
                };
                let avg = total
                    .checked_div(&Rational::from_integer(vals.len() as i64))
                    .ok_or(SqlError::Overflow)?;
                Ok(Value::Decimal(avg))
            }
            AggFunc::Max | AggFunc::Min => {
                let Some(r) = self.extreme_row(func, arg, rows)? else {
                    return Err(SqlError::EmptyAggregateInput(format!(
                        "{} ( {} )",
                        func.as_str(),
                        render_expr(arg)
                    )));
                };
                self.eval(arg, Scope::Row(r))
            }
        }
    }
}

/// The lone `max`/`min` call of an aggregating query, if there is exactly one.
/// Bare columns then read from the row holding that extreme.
fn single_extreme_call(q: &Query) -> Option<(AggFunc, &Expr)> {
    let mut calls = Vec::new();
    for e in q.select.iter().chain(&q.having).chain(q.order_by.iter().map(|o| &o.expr)) {
        e.walk_local(&mut |x| {
            if let Expr::Agg { func: f @ (AggFunc::Max | AggFunc::Min), arg, .. } = x {
                calls.push((*f, arg.as_ref()));
            }
        });
    }
    if calls.len() == 1 {
        calls.pop()
    } else {
        None
    }
}

pub fn literal_value(l: &Literal) -> Value {
    match l {
        Literal::Int(i) => Value::Int(*i),
        Literal::Decimal(d) => Value::Decimal(*d),
        Literal::Text(s) => Value::Text(s.clone()),
    }
}

fn sum_values(vals: &[Value]) -> Result<Value, SqlError> {
    let mut acc = Value::Int(0);
    for v in vals {
        acc = arith(BinOp::Add, &acc, v)?;
    }
    Ok(acc)
}

fn arith(op: BinOp, l: &Value, r: &Value) -> Result<Value, SqlError> {
    match (l, r) {
        (Value::Int(a), Value::Int(b)) => {
            let out = match op {
                BinOp::Add => i64::checked_add(*a, *b),
                BinOp::Sub => i64::checked_sub(*a, *b),
                BinOp::Mul => i64::checked_mul(*a, *b),
                BinOp::Div => {
                    if *b == 0 {
                        return Err(SqlError::DivisionByZero);
                    }
                    i64::checked_div(*a, *b)
                }
                _ => unreachable!(),
            };
            out.map(Value::Int).ok_or(SqlError::Overflow)
        }
        _ => {
            let (Some(a), Some(b)) = (l.as_rational(), r.as_rational()) else {
                return Err(mismatch(format!("arithmetic on {} and {}", l.type_name(), r.type_name())));
            };
            let out = match op {
                BinOp::Add => a.checked_add(&b),
                BinOp::Sub => a.checked_sub(&b),
                BinOp::Mul => a.checked_mul(&b),
                BinOp::Div => {
                    if b.is_zero() {
                        return Err(SqlError::DivisionByZero);
                    }
                    a.checked_div(&b)
                }
                _ => unreachable!(),
            };
            out.map(Value::Decimal).ok_or(SqlError::Overflow)
        }
    }
}

/// SQL `like`: `%` matches any run, `_` exactly one character. Case-sensitive.
pub fn like_match(s: &str, pattern: &str) -> bool {
    let s: Vec<char> = s.chars().collect();
    let p: Vec<char> = pattern.chars().collect();
    let (mut i, mut j) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while i < s.len() {
        if j < p.len() && (p[j] == '_' || p[j] == s[i]) {
            i += 1;
            j += 1;
        } else if j < p.len() && p[j] == '%' {
            star = Some((j, i));
            j += 1;
        } else if let Some((sj, si)) = star {
            j = sj + 1;
            i = si + 1;
            star = Some((sj, si + 1));
        } else {
            return false;
        }
    }
    while j < p.len() && p[j] == '%' {
        j += 1;
    }
    j == p.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn like_patterns() {
        assert!(like_match("abcde", "ab%"));
        assert!(like_match("abcde", "%de"));
        assert!(like_match("abcde", "%c%"));
        assert!(like_match("abcde", "a_c%"));
        assert!(!like_match("abcde", "A%"));
        assert!(!like_match("abcde", "%x%"));
        assert!(like_match("", "%"));
        assert!(!like_match("", "_"));
        assert!(like_match("aaa", "%a%a%a%"));
    }

    #[test]
    fn display_forms() {
        assert_eq!(display_cells(&[Value::Int(5)]), "5");
        assert_eq!(
            display_cells(&[Value::Text("qxgd".into()), Value::Text("lorfaljob".into())]),
            "['qxgd', 'lorfaljob']"
        );
        assert_eq!(display_cells(&[Value::Int(1), Value::Int(2)]), "[1, 2]");
        assert_eq!(display_cells(&[]), "[]");
    }
}
