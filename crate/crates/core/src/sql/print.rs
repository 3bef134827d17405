use super::ast::{Expr, InList, Literal, Query};
use crate::value::format_decimal;

/// Canonical text: lowercase keywords, single spaces, spaced parentheses,
/// select items joined by ` , `.
pub fn render_sql(q: &Query) -> String {
    let mut out = Vec::new();
    write_query(q, &mut out);
    out.join(" ")
}

pub fn render_expr(e: &Expr) -> String {
    let mut out = Vec::new();
    write_expr(e, &mut out);
    out.join(" ")
}

pub fn render_literal(l: &Literal) -> String {
    match l {
        Literal::Int(i) => i.to_string(),
        Literal::Decimal(r) => format_decimal(r),
        Literal::Text(s) => quote(s),
    }
}

pub fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn write_query(q: &Query, out: &mut Vec<String>) {
    out.push("select".into());
    for (i, e) in q.select.iter().enumerate() {
        if i > 0 {
            out.push(",".into());
        }
        write_expr(e, out);
    }
    if let Some(t) = &q.from {
        out.push("from".into());
        out.push(t.clone());
    }
    write_conjunction("where", &q.where_clause, out);
    if let Some(g) = &q.group_by {
        out.push("group by".into());
        out.push(g.clone());
    }
    write_conjunction("having", &q.having, out);
    if let Some(o) = &q.order_by {
        out.push("order by".into());
        write_expr(&o.expr, out);
        if let Some(d) = o.direction {
            out.push(match d {
                super::ast::Direction::Asc => "asc".into(),
                super::ast::Direction::Desc => "desc".into(),
            });
        }
    }
    if let Some(n) = q.limit {
        out.push("limit".into());
        out.push(n.to_string());
    }
}

fn write_conjunction(kw: &str, preds: &[Expr], out: &mut Vec<String>) {
    for (i, p) in preds.iter().enumerate() {
        out.push(if i == 0 { kw.into() } else { "and".into() });
        write_expr(p, out);
    }
}

fn write_expr(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Column(c) => out.push(c.clone()),
        Expr::Literal(l) => out.push(render_literal(l)),
        Expr::Agg { func, distinct, arg } => {
            out.push(func.as_str().into());
            out.push("(".into());
            if *distinct {
                out.push("distinct".into());
            }
            write_expr(arg, out);
            out.push(")".into());
        }
        Expr::Binary { op, lhs, rhs } => {
            write_expr(lhs, out);
            out.push(op.symbol().into());
            write_expr(rhs, out);
        }
        Expr::In { expr, list } => {
            write_expr(expr, out);
            out.push("in".into());
            out.push("(".into());
            match list {
                InList::Values(vs) => {
                    for (i, v) in vs.iter().enumerate() {
                        if i > 0 {
                            out.push(",".into());
                        }
                        write_expr(v, out);
                    }
                }
                InList::Subquery(q) => write_query(q, out),
            }
            out.push(")".into());
        }
        Expr::Like { expr, pattern } => {
            write_expr(expr, out);
            out.push("like".into());
            out.push(quote(pattern));
        }
        Expr::Subquery(q) => {
            out.push("(".into());
            write_query(q, out);
            out.push(")".into());
        }
        Expr::Paren(inner) => {
            out.push("(".into());
            write_expr(inner, out);
            out.push(")".into());
        }
    }
}
