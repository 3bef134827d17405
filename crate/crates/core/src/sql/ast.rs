use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Int(i64),
    Decimal(Rational),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggFunc {
    Count,
    Sum,
    Min,
    Max,
    Avg,
}

impl AggFunc {
    pub fn as_str(self) -> &'static str {
        match self {
            AggFunc::Count => "count",
            AggFunc::Sum => "sum",
            AggFunc::Min => "min",
            AggFunc::Max => "max",
            AggFunc::Avg => "avg",
        }
    }

    pub fn from_name(name: &str) -> Option<AggFunc> {
        Some(match name.to_ascii_lowercase().as_str() {
            "count" => AggFunc::Count,
            "sum" => AggFunc::Sum,
            "min" => AggFunc::Min,
            "max" => AggFunc::Max,
            "avg" => AggFunc::Avg,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Gt,
    Lt,
    Eq,
    Ne,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Gt => ">",
            BinOp::Lt => "<",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    pub fn is_comparison(self) -> bool {
        !self.is_arithmetic()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InList {
    Values(Vec<Expr>),
    Subquery(Box<Query>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Column(String),
    Literal(Literal),
    Agg { func: AggFunc, distinct: bool, arg: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    In { expr: Box<Expr>, list: InList },
    Like { expr: Box<Expr>, pattern: String },
    Subquery(Box<Query>),
    Paren(Box<Expr>),
}

impl Expr {
    pub fn column(name: impl Into<String>) -> Expr {
        Expr::Column(name.into())
    }

    pub fn int(v: i64) -> Expr {
        Expr::Literal(Literal::Int(v))
    }

    pub fn text(v: impl Into<String>) -> Expr {
        Expr::Literal(Literal::Text(v.into()))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn agg(func: AggFunc, arg: Expr) -> Expr {
        Expr::Agg { func, distinct: false, arg: Box::new(arg) }
    }

    /// True if an aggregate call occurs in this expression outside subqueries.
    pub fn contains_aggregate(&self) -> bool {
        let mut found = false;
        self.walk_local(&mut |e| found |= matches!(e, Expr::Agg { .. }));
        found
    }

    /// Pre-order visit of this expression, not descending into subqueries.
    pub fn walk_local<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Column(_) | Expr::Literal(_) | Expr::Subquery(_) => {}
            Expr::Agg { arg, .. } => arg.walk_local(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk_local(f);
                rhs.walk_local(f);
            }
            Expr::In { expr, list } => {
                expr.walk_local(f);
                if let InList::Values(vs) = list {
                    for v in vs {
                        v.walk_local(f);
                    }
                }
            }
            Expr::Like { expr, .. } => expr.walk_local(f),
            Expr::Paren(e) => e.walk_local(f),
        }
    }

    /// Subqueries directly nested in this expression (not in deeper subqueries).
    pub fn direct_subqueries(&self) -> Vec<&Query> {
        let mut out = Vec::new();
        self.walk_local(&mut |e| match e {
            Expr::Subquery(q) => out.push(q.as_ref()),
            Expr::In { list: InList::Subquery(q), .. } => out.push(q.as_ref()),
            _ => {}
        });
        out
    }

    /// Strips any number of redundant parentheses.
    pub fn unparen(&self) -> &Expr {
        match self {
            Expr::Paren(e) => e.unparen(),
            e => e,
        }
    }

    /// The first column referenced in this expression, if any.
    pub fn first_column(&self) -> Option<&str> {
        let mut found = None;
        self.walk_local(&mut |e| {
            if let (None, Expr::Column(c)) = (&found, e) {
                found = Some(c.as_str());
            }
        });
        found
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderBy {
    pub expr: Expr,
    pub direction: Option<Direction>,
}

impl OrderBy {
    pub fn is_desc(&self) -> bool {
        self.direction == Some(Direction::Desc)
    }
}

/// One `select` statement of the supported subset.
///
/// `where_clause` and `having` are conjunctions: every predicate must hold.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub select: Vec<Expr>,
    pub from: Option<String>,
    pub where_clause: Vec<Expr>,
    pub group_by: Option<String>,
    pub having: Vec<Expr>,
    pub order_by: Option<OrderBy>,
    pub limit: Option<u64>,
}

impl Query {
    pub fn simple(select: Vec<Expr>, table: &str) -> Query {
        Query {
            select,
            from: Some(table.to_string()),
            where_clause: Vec::new(),
            group_by: None,
            having: Vec::new(),
            order_by: None,
            limit: None,
        }
    }

    /// Every top-level expression of this query, clause by clause.
    pub fn local_exprs(&self) -> impl Iterator<Item = &Expr> {
        self.select
            .iter()
            .chain(&self.where_clause)
            .chain(&self.having)
            .chain(self.order_by.iter().map(|o| &o.expr))
    }

    /// True when the query aggregates: it groups or uses an aggregate in
    /// `select`, `having` or `order by`.
    pub fn is_aggregate(&self) -> bool {
        self.group_by.is_some()
            || self
                .select
                .iter()
                .chain(&self.having)
                .chain(self.order_by.iter().map(|o| &o.expr))
                .any(Expr::contains_aggregate)
    }

    pub fn direct_subqueries(&self) -> Vec<&Query> {
        self.local_exprs().flat_map(Expr::direct_subqueries).collect()
    }

    /// 1 for a flat query, plus one per level of subquery nesting.
    pub fn nest_depth(&self) -> usize {
        1 + self.direct_subqueries().iter().map(|q| q.nest_depth()).max().unwrap_or(0)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render_sql(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render_expr(self))
    }
}
