//! SQL to natural-language step instructions, one step per clause in
//! execution order: filter, group, group filter, select, sort/limit.

use crate::sql::{render_literal, render_sql, AggFunc, BinOp, Expr, InList, Phase, Query};

/// One instruction step and the clause it describes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub phase: Phase,
    pub text: String,
}

pub fn to_multistep(q: &Query) -> String {
    multistep_steps(q).into_iter().map(|s| s.text).collect::<Vec<_>>().join("\n")
}

pub fn multistep_steps(q: &Query) -> Vec<Step> {
    let mut steps = Vec::new();
    if !q.where_clause.is_empty() {
        let conds: Vec<String> = q.where_clause.iter().map(filter_condition).collect();
        steps.push(Step {
            phase: Phase::Where,
            text: format!("Please filter the rows by the column conditions, which need to be met: {}", conds.join(" ")),
        });
    }
    if let Some(g) = &q.group_by {
        let text = if q.where_clause.is_empty() {
            format!("The rows are grouped according to the value of the {g}.")
        } else {
            format!("The rows are then grouped according to the value of the {g} in the remaining rows.")
        };
        steps.push(Step { phase: Phase::GroupBy, text });
    }
    if !q.having.is_empty() {
        let conds: Vec<String> = q.having.iter().map(group_condition).collect();
        steps.push(Step {
            phase: Phase::Having,
            text: format!("Then filter some groups by the following condition:{}.", conds.join(" and ")),
        });
    }
    let items: Vec<String> = q.select.iter().map(select_item).collect();
    let scope = if q.from.is_none() {
        ""
    } else if !q.where_clause.is_empty() || !q.having.is_empty() {
        " in filtered rows"
    } else if q.group_by.is_some() {
        " in each group"
    } else {
        " in all rows"
    };
    steps.push(Step { phase: Phase::Select, text: format!("Select {}{scope}.", items.join(", ")) });
    match (&q.order_by, q.limit) {
        (Some(o), limit) => {
            let desc = o.is_desc();
            let dir = if desc { "descending" } else { "ascending" };
            let tail = match limit {
                Some(1) => format!(" and select the {} value to get the answer.", if desc { "largest" } else { "smallest" }),
                Some(n) => format!(" and select the first {n} values to get the answer."),
                None => " to get the answer.".to_string(),
            };
            steps.push(Step {
                phase: Phase::OrderBy,
                text: format!("Sort the obtained values in {dir} order of {}{tail}", sort_key(&o.expr)),
            });
        }
        (None, Some(n)) => {
            let text = if n == 1 {
                "Select the first value to get the answer.".to_string()
            } else {
                format!("Select the first {n} values to get the answer.")
            };
            steps.push(Step { phase: Phase::Limit, text });
        }
        (None, None) => {}
    }
    steps
}

fn subquery_phrase(q: &Query) -> String {
    format!("the result of ( {} )", render_sql(q))
}

/// An operand inside a sentence: `column x`, a literal, an aggregate phrase.
fn operand(e: &Expr) -> String {
    match e {
        Expr::Column(c) => format!("column {c}"),
        Expr::Literal(l) => render_literal(l),
        Expr::Subquery(q) => subquery_phrase(q),
        Expr::Paren(inner) => operand(inner),
        Expr::Agg { func, distinct, arg } => agg_phrase(*func, *distinct, arg),
        Expr::Binary { op, lhs, rhs } => format!("{} {} {}", operand(lhs), op_phrase(*op), operand(rhs)),
        other => crate::sql::render_expr(other),
    }
}

fn op_phrase(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "plus",
        BinOp::Sub => "minus",
        BinOp::Mul => "times",
        BinOp::Div => "divided by",
        BinOp::Gt => "is greater than",
        BinOp::Lt => "is less than",
        BinOp::Eq => "is",
        BinOp::Ne => "is not",
    }
}

/// `values of x column` or `values of column a plus column b`.
fn values_of(e: &Expr) -> String {
    match e.unparen() {
        Expr::Column(c) => format!("values of {c} column"),
        other => format!("values of {}", operand(other)),
    }
}

fn agg_phrase(func: AggFunc, distinct: bool, arg: &Expr) -> String {
    let v = values_of(arg);
    match func {
        AggFunc::Count if distinct => format!("the number of non-repeating {v}"),
        AggFunc::Count => format!("the number of {v}"),
        AggFunc::Sum => format!("the sum of {v}"),
        AggFunc::Avg => format!("the average of {v}"),
        AggFunc::Max => format!("the maximum of {v}"),
        AggFunc::Min => format!("the minimum of {v}"),
    }
}

fn select_item(e: &Expr) -> String {
    match e.unparen() {
        Expr::Column(_) => values_of(e),
        Expr::Agg { func, distinct, arg } => agg_phrase(*func, *distinct, arg),
        Expr::Binary { op, lhs, rhs } if op.is_comparison() => {
            format!("whether {} {} {}", operand(lhs), op_phrase(*op), operand(rhs))
        }
        Expr::Binary { .. } => values_of(e),
        other => operand(other),
    }
}

/// Right-hand side of a row filter: literals, `the value of column y`, subqueries.
fn filter_value(e: &Expr) -> String {
    match e.unparen() {
        Expr::Column(c) => format!("the value of column {c}"),
        other => operand(other),
    }
}

fn filter_subject(e: &Expr) -> String {
    match e.unparen() {
        Expr::Column(c) => format!("The value of column {c}"),
        other => format!("The value of {}", operand(other)),
    }
}

fn filter_condition(e: &Expr) -> String {
    match e.unparen() {
        Expr::Binary { op, lhs, rhs } => {
            let verb = match op {
                BinOp::Eq => "is",
                BinOp::Ne => "is not",
                BinOp::Gt => "needs to be greater than",
                BinOp::Lt => "needs to be less than",
                _ => return format!("{} is true.", filter_subject(e)),
            };
            format!("{} {verb} {}.", filter_subject(lhs), filter_value(rhs))
        }
        Expr::In { expr, list } => {
            let target = match list {
                InList::Values(vs) => vs.iter().map(filter_value).collect::<Vec<_>>().join(", "),
                InList::Subquery(q) => format!("the results of ( {} )", render_sql(q)),
            };
            format!("{} needs to be one of {target}.", filter_subject(expr))
        }
        Expr::Like { expr, pattern } => {
            format!("{} needs to match the pattern {}.", filter_subject(expr), crate::sql::quote(pattern))
        }
        other => format!("{} is true.", filter_subject(other)),
    }
}

/// Subject of a group condition: `the number of column x`, `the column x`.
fn group_subject(e: &Expr) -> String {
    match e.unparen() {
        Expr::Column(c) => format!("the column {c}"),
        Expr::Agg { func, distinct, arg } => {
            let col = match arg.unparen() {
                Expr::Column(c) => format!("column {c}"),
                other => operand(other),
            };
            match func {
                AggFunc::Count if *distinct => format!("the number of non-repeating {col}"),
                AggFunc::Count => format!("the number of {col}"),
                AggFunc::Sum => format!("the sum of {col}"),
                AggFunc::Avg => format!("the average of {col}"),
                AggFunc::Max => format!("the maximum of {col}"),
                AggFunc::Min => format!("the minimum of {col}"),
            }
        }
        other => operand(other),
    }
}

fn group_condition(e: &Expr) -> String {
    match e.unparen() {
        Expr::Binary { op, lhs, rhs } if op.is_comparison() => {
            format!("{} {} {}", group_subject(lhs), op_phrase(*op), group_subject(rhs))
        }
        Expr::In { expr, list } => {
            let target = match list {
                InList::Values(vs) => vs.iter().map(group_subject).collect::<Vec<_>>().join(", "),
                InList::Subquery(q) => format!("the results of ( {} )", render_sql(q)),
            };
            format!("{} is one of {target}", group_subject(expr))
        }
        Expr::Like { expr, pattern } => {
            format!("{} matches the pattern {}", group_subject(expr), crate::sql::quote(pattern))
        }
        other => format!("{} is true", group_subject(other)),
    }
}

fn sort_key(e: &Expr) -> String {
    match e.unparen() {
        Expr::Column(c) => c.clone(),
        Expr::Agg { func, distinct, arg } => {
            let col = match arg.unparen() {
                Expr::Column(c) => c.clone(),
                other => operand(other),
            };
            match func {
                AggFunc::Count if *distinct => format!("the number of non-repeating {col}"),
                AggFunc::Count => format!("the number of {col}"),
                AggFunc::Sum => format!("the sum of {col}"),
                AggFunc::Avg => format!("the average of {col}"),
                AggFunc::Max => format!("the maximum of {col}"),
                AggFunc::Min => format!("the minimum of {col}"),
            }
        }
        other => operand(other),
    }
}
