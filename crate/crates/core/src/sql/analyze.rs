use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Expr, InList, Query};
use super::print::render_sql;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Keyword {
    #[serde(rename = "select")]
    Select,
    #[serde(rename = "where")]
    Where,
    #[serde(rename = "group by")]
    GroupBy,
    #[serde(rename = "having")]
    Having,
    #[serde(rename = "order by")]
    OrderBy,
}

impl Keyword {
    pub const ALL: [Keyword; 5] =
        [Keyword::Select, Keyword::Where, Keyword::GroupBy, Keyword::Having, Keyword::OrderBy];

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Select => "select",
            Keyword::Where => "where",
            Keyword::GroupBy => "group by",
            Keyword::Having => "having",
            Keyword::OrderBy => "order by",
        }
    }

    pub fn from_name(s: &str) -> Option<Keyword> {
        Keyword::ALL.into_iter().find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Static attributes of a query. `column_ratio` needs the table width and is
/// filled in once the query is paired with a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryAttributes {
    pub sql_length: usize,
    pub keywords: BTreeSet<Keyword>,
    pub calculate_times: usize,
    pub filter_times: usize,
    pub columns_used: BTreeSet<String>,
    pub column_ratio: Option<f64>,
    pub nest_depth: usize,
}

impl QueryAttributes {
    pub fn with_table_width(mut self, n: usize) -> Self {
        self.column_ratio = Some(if n == 0 { 0.0 } else { self.columns_used.len() as f64 / n as f64 });
        self
    }
}

pub fn analyze(q: &Query) -> QueryAttributes {
    let mut acc = Acc::default();
    acc.query(q);
    QueryAttributes {
        sql_length: render_sql(q).split(' ').count(),
        keywords: acc.keywords,
        calculate_times: acc.calc,
        filter_times: acc.filter,
        columns_used: acc.columns,
        column_ratio: None,
        nest_depth: q.nest_depth(),
    }
}

#[derive(Default)]
struct Acc {
    keywords: BTreeSet<Keyword>,
    calc: usize,
    filter: usize,
    columns: BTreeSet<String>,
}

impl Acc {
    fn query(&mut self, q: &Query) {
        self.keywords.insert(Keyword::Select);
        if !q.where_clause.is_empty() {
            self.keywords.insert(Keyword::Where);
        }
        if let Some(g) = &q.group_by {
            self.keywords.insert(Keyword::GroupBy);
            self.columns.insert(g.clone());
        }
        if !q.having.is_empty() {
            self.keywords.insert(Keyword::Having);
        }
        if q.order_by.is_some() {
            self.keywords.insert(Keyword::OrderBy);
        }
        for e in q.local_exprs() {
            self.expr(e);
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Column(c) => {
                self.columns.insert(c.clone());
            }
            Expr::Literal(_) => {}
            Expr::Agg { arg, .. } => {
                self.calc += 1;
                self.expr(arg);
            }
            Expr::Binary { op, lhs, rhs } => {
                if op.is_arithmetic() {
                    self.calc += 1;
                } else {
                    self.filter += 1;
                }
                self.expr(lhs);
                self.expr(rhs);
            }
            Expr::In { expr, list } => {
                self.filter += 1;
                self.expr(expr);
                match list {
                    InList::Values(vs) => vs.iter().for_each(|v| self.expr(v)),
                    InList::Subquery(q) => self.query(q),
                }
            }
            Expr::Like { expr, .. } => {
                self.filter += 1;
                self.expr(expr);
            }
            Expr::Subquery(q) => self.query(q),
            Expr::Paren(inner) => self.expr(inner),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn attrs(s: &str) -> QueryAttributes {
        analyze(&parse(s).unwrap())
    }

    #[test]
    fn counting_rules() {
        let a = attrs("select synset + refuge from my_table where blender = 'owxdbzjg'");
        assert_eq!((a.calculate_times, a.filter_times), (1, 1));
        assert_eq!(a.keywords, [Keyword::Select, Keyword::Where].into_iter().collect());

        let a = attrs("select lats from my_table group by shastan having sum ( logbook ) = 56");
        assert_eq!((a.calculate_times, a.filter_times), (1, 1));
        assert_eq!(
            a.keywords,
            [Keyword::Select, Keyword::GroupBy, Keyword::Having].into_iter().collect()
        );

        let a = attrs("select c from my_table");
        assert_eq!((a.sql_length, a.calculate_times, a.filter_times), (4, 0, 0));
        assert_eq!(a.nest_depth, 1);
    }

    #[test]
    fn nested_and_ratio() {
        let a = attrs("select ( select a from t where b = 'x' ) > ( select a from t where c = 'y' )");
        assert_eq!(a.filter_times, 3);
        assert_eq!(a.nest_depth, 2);
        assert_eq!(a.columns_used.len(), 3);
        assert_eq!(a.with_table_width(6).column_ratio, Some(0.5));
    }
}
