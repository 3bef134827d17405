//! Brute-force reference evaluator over the query AST.
//!
//! Written from the documented semantics alone. It shares the AST and the
//! cell type with the engine and nothing else: numbers are `i128` and
//! `Ratio<i128>`, dates are compared as ISO strings, grouping is a key scan,
//! sorting is an insertion sort.

#![allow(dead_code)]

use std::cmp::Ordering;

use num_rational::Ratio;
use tabexec_core::sql::{AggFunc, BinOp, Expr, InList, Literal, Query};
use tabexec_core::value::parse_date;
use tabexec_core::{Table, Value};

type Q = Ratio<i128>;
pub type OracleResult = Result<Vec<Value>, &'static str>;

#[derive(Clone, Debug, PartialEq)]
enum V {
    Int(i128),
    Num(Q),
    Str(String),
    Date(String),
    Bool(bool),
}

impl V {
    fn num(&self) -> Option<Q> {
        match self {
            V::Int(i) => Some(Q::from_integer(*i)),
            V::Num(q) => Some(*q),
            _ => None,
        }
    }
}

fn cell(v: &Value) -> V {
    match v {
        Value::Int(i) => V::Int(*i as i128),
        Value::Decimal(r) => V::Num(Q::new(*r.numer() as i128, *r.denom() as i128)),
        Value::Text(s) => V::Str(s.clone()),
        Value::Date(_) => V::Date(v.render()),
        Value::Bool(b) => V::Bool(*b),
    }
}

fn back(v: V) -> Result<Value, &'static str> {
    let small = |i: i128| i64::try_from(i).map_err(|_| "Overflow");
    Ok(match v {
        V::Int(i) => Value::Int(small(i)?),
        V::Num(q) => Value::Decimal(tabexec_core::Rational::new(small(*q.numer())?, small(*q.denom())?)),
        V::Str(s) => Value::Text(s),
        V::Date(s) => Value::Date(parse_date(&s).ok_or("TypeMismatch")?),
        V::Bool(b) => Value::Bool(b),
    })
}

fn cmp(a: &V, b: &V) -> Result<Ordering, &'static str> {
    match (a, b) {
        (V::Str(x), V::Str(y)) | (V::Date(x), V::Date(y)) | (V::Date(x), V::Str(y)) | (V::Str(x), V::Date(y)) => {
            Ok(x.cmp(y))
        }
        (V::Bool(x), V::Bool(y)) => Ok(x.cmp(y)),
        _ => match (a.num(), b.num()) {
            (Some(x), Some(y)) => Ok(x.cmp(&y)),
            _ => Err("TypeMismatch"),
        },
    }
}

fn like(s: &[char], p: &[char]) -> bool {
    match p.first() {
        None => s.is_empty(),
        Some('%') => (0..=s.len()).any(|k| like(&s[k..], &p[1..])),
        Some('_') => !s.is_empty() && like(&s[1..], &p[1..]),
        Some(c) => s.first() == Some(c) && like(&s[1..], &p[1..]),
    }
}

fn arith(op: BinOp, a: V, b: V) -> Result<V, &'static str> {
    let fits = |i: i128| i >= i64::MIN as i128 && i <= i64::MAX as i128;
    if let (V::Int(x), V::Int(y)) = (&a, &b) {
        let r = match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            _ => {
                if *y == 0 {
                    return Err("DivisionByZero");
                }
                x / y
            }
        };
        return if fits(r) { Ok(V::Int(r)) } else { Err("Overflow") };
    }
    let (Some(x), Some(y)) = (a.num(), b.num()) else { return Err("TypeMismatch") };
    Ok(V::Num(match op {
        BinOp::Add => x + y,
        BinOp::Sub => x - y,
        BinOp::Mul => x * y,
        _ => {
            if y == Q::from_integer(0) {
                return Err("DivisionByZero");
            }
            x / y
        }
    }))
}

#[derive(Clone, Copy)]
enum Ctx<'g> {
    Nothing,
    Row(usize),
    Group(&'g [usize], Option<usize>),
}

enum Sub {
    One(V),
    Many(Vec<V>),
}

struct Eval<'t> {
    table: &'t Table,
    subs: Vec<(*const Query, Sub)>,
}

fn local_walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    out.push(e);
    match e {
        Expr::Agg { arg, .. } => local_walk(arg, out),
        Expr::Binary { lhs, rhs, .. } => {
            local_walk(lhs, out);
            local_walk(rhs, out);
        }
        Expr::In { expr, list } => {
            local_walk(expr, out);
            if let InList::Values(vs) = list {
                for v in vs {
                    local_walk(v, out);
                }
            }
        }
        Expr::Like { expr, .. } => local_walk(expr, out),
        Expr::Paren(e) => local_walk(e, out),
        _ => {}
    }
}

fn top_level(q: &Query) -> Vec<&Expr> {
    let mut out = Vec::new();
    for e in q.select.iter().chain(&q.where_clause).chain(&q.having).chain(q.order_by.iter().map(|o| &o.expr)) {
        local_walk(e, &mut out);
    }
    out
}

fn aggregating(q: &Query) -> bool {
    let mut nodes = Vec::new();
    for e in q.select.iter().chain(&q.having).chain(q.order_by.iter().map(|o| &o.expr)) {
        local_walk(e, &mut nodes);
    }
    q.group_by.is_some() || nodes.iter().any(|e| matches!(e, Expr::Agg { .. }))
}

impl<'t> Eval<'t> {
    fn sub(&self, q: &Query) -> &Sub {
        &self.subs.iter().find(|(p, _)| std::ptr::eq(*p, q)).expect("subquery evaluated").1
    }

    fn value(&self, e: &Expr, ctx: Ctx<'_>) -> Result<V, &'static str> {
        match e {
            Expr::Column(c) => {
                let j = self.table.column_index(c).ok_or("ColumnNotFound")?;
                match ctx {
                    Ctx::Row(r) | Ctx::Group(_, Some(r)) => Ok(cell(&self.table.rows[r][j])),
                    Ctx::Group(_, None) => Err("EmptyAggregateInput"),
                    Ctx::Nothing => Err("ColumnNotFound"),
                }
            }
            Expr::Literal(Literal::Int(i)) => Ok(V::Int(*i as i128)),
            Expr::Literal(Literal::Decimal(d)) => Ok(V::Num(Q::new(*d.numer() as i128, *d.denom() as i128))),
            Expr::Literal(Literal::Text(s)) => Ok(V::Str(s.clone())),
            Expr::Paren(inner) => self.value(inner, ctx),
            Expr::Subquery(q) => match self.sub(q) {
                Sub::One(v) => Ok(v.clone()),
                Sub::Many(_) => unreachable!(),
            },
            Expr::Binary { op, lhs, rhs } => {
                let a = self.value(lhs, ctx)?;
                let b = self.value(rhs, ctx)?;
                if op.is_arithmetic() {
                    return arith(*op, a, b);
                }
                let o = cmp(&a, &b)?;
                Ok(V::Bool(match op {
                    BinOp::Gt => o == Ordering::Greater,
                    BinOp::Lt => o == Ordering::Less,
                    BinOp::Eq => o == Ordering::Equal,
                    _ => o != Ordering::Equal,
                }))
            }
            Expr::In { expr, list } => {
                let a = self.value(expr, ctx)?;
                let candidates = match list {
                    InList::Values(vs) => vs.iter().map(|v| self.value(v, ctx)).collect::<Result<Vec<_>, _>>()?,
                    InList::Subquery(q) => match self.sub(q) {
                        Sub::Many(vs) => vs.clone(),
                        Sub::One(_) => unreachable!(),
                    },
                };
                Ok(V::Bool(candidates.iter().any(|c| cmp(&a, c) == Ok(Ordering::Equal))))
            }
            Expr::Like { expr, pattern } => match self.value(expr, ctx)? {
                V::Str(s) => {
                    let s: Vec<char> = s.chars().collect();
                    let p: Vec<char> = pattern.chars().collect();
                    Ok(V::Bool(like(&s, &p)))
                }
                _ => Err("TypeMismatch"),
            },
            Expr::Agg { func, distinct, arg } => {
                let Ctx::Group(rows, _) = ctx else { return Err("TypeMismatch") };
                let mut vals = Vec::new();
                for &r in rows {
                    vals.push(self.value(arg, Ctx::Row(r))?);
                }
                match func {
                    AggFunc::Count => {
                        if !distinct {
                            return Ok(V::Int(vals.len() as i128));
                        }
                        let mut seen: Vec<&V> = Vec::new();
                        for v in &vals {
                            if !seen.iter().any(|s| *s == v) {
                                seen.push(v);
                            }
                        }
                        Ok(V::Int(seen.len() as i128))
                    }
                    AggFunc::Sum => {
                        let mut acc = V::Int(0);
                        for v in vals {
                            acc = arith(BinOp::Add, acc, v)?;
                        }
                        Ok(acc)
                    }
                    AggFunc::Avg => {
                        if vals.is_empty() {
                            return Err("EmptyAggregateInput");
                        }
                        let mut total = Q::from_integer(0);
                        for v in &vals {
                            total += v.num().ok_or("TypeMismatch")?;
                        }
                        Ok(V::Num(total / Q::from_integer(vals.len() as i128)))
                    }
                    AggFunc::Max | AggFunc::Min => {
                        let mut best: Option<V> = None;
                        for v in vals {
                            let take = match &best {
                                None => true,
                                Some(b) => {
                                    let o = cmp(&v, b)?;
                                    if *func == AggFunc::Max { o == Ordering::Greater } else { o == Ordering::Less }
                                }
                            };
                            if take {
                                best = Some(v);
                            }
                        }
                        best.ok_or("EmptyAggregateInput")
                    }
                }
            }
        }
    }

    fn holds(&self, preds: &[Expr], ctx: Ctx<'_>) -> Result<bool, &'static str> {
        for p in preds {
            match self.value(p, ctx)? {
                V::Bool(true) => {}
                V::Bool(false) => return Ok(false),
                _ => return Err("TypeMismatch"),
            }
        }
        Ok(true)
    }

    /// Row the bare columns of a group read from.
    fn representative(&self, q: &Query, rows: &[usize]) -> Result<Option<usize>, &'static str> {
        let mut nodes = Vec::new();
        for e in q.select.iter().chain(&q.having).chain(q.order_by.iter().map(|o| &o.expr)) {
            local_walk(e, &mut nodes);
        }
        let extremes: Vec<(AggFunc, &Expr)> = nodes
            .iter()
            .filter_map(|e| match e {
                Expr::Agg { func: f @ (AggFunc::Max | AggFunc::Min), arg, .. } => Some((*f, arg.as_ref())),
                _ => None,
            })
            .collect();
        let [(func, arg)] = extremes.as_slice() else { return Ok(rows.first().copied()) };
        let mut best: Option<(V, usize)> = None;
        for &r in rows {
            let v = self.value(arg, Ctx::Row(r))?;
            let take = match &best {
                None => true,
                Some((b, _)) => {
                    let o = cmp(&v, b)?;
                    if *func == AggFunc::Max { o == Ordering::Greater } else { o == Ordering::Less }
                }
            };
            if take {
                best = Some((v, r));
            }
        }
        Ok(best.map(|(_, r)| r))
    }
}

fn prepared<'t>(q: &Query, table: &'t Table) -> Result<Eval<'t>, &'static str> {
    let mut ev = Eval { table, subs: Vec::new() };
    for e in top_level(q) {
        let (sq, scalar) = match e {
            Expr::Subquery(sq) => (sq.as_ref(), true),
            Expr::In { list: InList::Subquery(sq), .. } => (sq.as_ref(), false),
            _ => continue,
        };
        let out: Vec<V> = rows_of(sq, table)?.into_iter().flatten().collect();
        let s = if scalar {
            if out.len() != 1 {
                return Err("SubqueryNotScalar");
            }
            Sub::One(out[0].clone())
        } else {
            Sub::Many(out)
        };
        ev.subs.push((sq as *const Query, s));
    }
    Ok(ev)
}

/// Rows kept by the top-level `where` of a query with a `from`.
pub fn where_rows(q: &Query, table: &Table) -> Result<Vec<usize>, &'static str> {
    let ev = prepared(q, table)?;
    let mut kept = Vec::new();
    for r in 0..table.num_rows() {
        if ev.holds(&q.where_clause, Ctx::Row(r))? {
            kept.push(r);
        }
    }
    Ok(kept)
}

fn rows_of(q: &Query, table: &Table) -> Result<Vec<Vec<V>>, &'static str> {
    let ev = prepared(q, table)?;

    let mut groups: Vec<(Vec<usize>, Option<usize>)> = Vec::new();
    let mut plain: Vec<usize> = Vec::new();
    let mut no_from_kept = false;
    let grouped;
    if q.from.is_none() {
        no_from_kept = ev.holds(&q.where_clause, Ctx::Nothing)?;
        grouped = false;
    } else {
        let mut kept = Vec::new();
        for r in 0..table.num_rows() {
            if ev.holds(&q.where_clause, Ctx::Row(r))? {
                kept.push(r);
            }
        }
        grouped = aggregating(q);
        if grouped {
            let parts: Vec<Vec<usize>> = match &q.group_by {
                None => vec![kept],
                Some(col) => {
                    let j = table.column_index(col).ok_or("ColumnNotFound")?;
                    let mut keys: Vec<V> = Vec::new();
                    for &r in &kept {
                        let k = cell(&table.rows[r][j]);
                        if !keys.contains(&k) {
                            keys.push(k);
                        }
                    }
                    for i in 1..keys.len() {
                        let mut k = i;
                        while k > 0 && cmp(&keys[k], &keys[k - 1])? == Ordering::Less {
                            keys.swap(k, k - 1);
                            k -= 1;
                        }
                    }
                    keys.iter().map(|key| kept.iter().copied().filter(|&r| cell(&table.rows[r][j]) == *key).collect()).collect()
                }
            };
            for rows in parts {
                let rep = ev.representative(q, &rows)?;
                if ev.holds(&q.having, Ctx::Group(&rows, rep))? {
                    groups.push((rows, rep));
                }
            }
        } else {
            plain = kept;
        }
    }

    let ctxs: Vec<Ctx<'_>> = if q.from.is_none() {
        if no_from_kept { vec![Ctx::Nothing] } else { Vec::new() }
    } else if grouped {
        groups.iter().map(|(rows, rep)| Ctx::Group(rows, *rep)).collect()
    } else {
        plain.iter().map(|&r| Ctx::Row(r)).collect()
    };

    let mut units: Vec<(Vec<V>, Ctx<'_>)> = Vec::new();
    for ctx in ctxs {
        let mut vals = Vec::new();
        for item in &q.select {
            vals.push(ev.value(item, ctx)?);
        }
        units.push((vals, ctx));
    }
    if let Some(o) = &q.order_by {
        let mut keyed = Vec::new();
        for u in units {
            keyed.push((ev.value(&o.expr, u.1)?, u));
        }
        let desc = o.is_desc();
        for i in 1..keyed.len() {
            let mut k = i;
            while k > 0 {
                let ord = cmp(&keyed[k].0, &keyed[k - 1].0)?;
                let before = if desc { ord == Ordering::Greater } else { ord == Ordering::Less };
                if !before {
                    break;
                }
                keyed.swap(k, k - 1);
                k -= 1;
            }
        }
        units = keyed.into_iter().map(|(_, u)| u).collect();
    }
    if let Some(n) = q.limit {
        units.truncate(n as usize);
    }
    Ok(units.into_iter().map(|(v, _)| v).collect())
}

/// Answer cells in row-major order, or the name of the error raised.
pub fn evaluate(q: &Query, table: &Table) -> OracleResult {
    rows_of(q, table)?.into_iter().flatten().map(back).collect()
}
