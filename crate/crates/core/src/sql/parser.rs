use super::ast::{AggFunc, BinOp, Direction, Expr, InList, Literal, OrderBy, Query};
use super::SqlError;
use crate::value::parse_decimal;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Gt,
    Lt,
    Eq,
    Ne,
    Ge,
    Le,
    LtGt,
    Semi,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number {s}"),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Le => "`<=`".into(),
            Tok::LtGt => "`<>`".into(),
            Tok::Semi => "`;`".into(),
        }
    }
}

/// Keywords recognised by the grammar; never valid as column names.
pub(crate) const KEYWORDS: &[&str] = &[
    "select", "from", "where", "group", "by", "having", "order", "asc", "desc", "limit", "and", "in",
    "like", "distinct",
];

/// Words of full SQL that the subset deliberately rejects.
pub(crate) const UNSUPPORTED: &[&str] = &[
    "join", "on", "as", "or", "not", "between", "is", "union", "inner", "left", "right", "outer",
    "cross", "case", "when", "exists", "offset", "null", "intersect", "except", "all", "any",
    "natural", "using", "with",
];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SqlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b';' => Tok::Semi,
            b'=' => Tok::Eq,
            b'>' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Ge
            }
            b'>' => Tok::Gt,
            b'<' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Le
            }
            b'<' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::LtGt
            }
            b'<' => Tok::Lt,
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Ne
            }
            b'\'' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match text[j..].find('\'') {
                        None => {
                            return Err(SqlError::syntax(start, &["closing quote"], "end of input"));
                        }
                        Some(k) => {
                            s.push_str(&text[j..j + k]);
                            j += k + 1;
                            if bytes.get(j) == Some(&b'\'') {
                                s.push('\'');
                                j += 1;
                            } else {
                                break;
                            }
                        }
                    }
                }
                i = j;
                out.push((Tok::Str(s), start));
                continue;
            }
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                i = j;
                out.push((Tok::Number(text[start..j].to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                i = j;
                out.push((Tok::Ident(text[start..j].to_string()), start));
                continue;
            }
            _ => {
                let found: String = text[i..].chars().next().map(String::from).unwrap_or_default();
                return Err(SqlError::syntax(start, &["token"], &format!("`{found}`")));
            }
        };
        i += 1;
        out.push((tok, start));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

pub fn parse(text: &str) -> Result<Query, SqlError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let q = p.query()?;
    if p.pos < p.toks.len() {
        return Err(p.fail(&["end of input"]));
    }
    Ok(q)
}

/// Parses a single expression, e.g. a select item.
pub fn parse_expr(text: &str) -> Result<Expr, SqlError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let e = p.expr(false)?;
    if p.pos < p.toks.len() {
        return Err(p.fail(&["end of input"]));
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Error for the current token: unsupported SQL gets its own variant.
    fn fail(&self, expected: &[&str]) -> SqlError {
        match self.peek() {
            None => SqlError::syntax(self.offset(), expected, "end of input"),
            Some(Tok::Ident(s)) if UNSUPPORTED.contains(&s.to_ascii_lowercase().as_str()) => {
                SqlError::UnsupportedFeature(s.to_ascii_lowercase())
            }
            Some(t @ (Tok::Ge | Tok::Le | Tok::LtGt | Tok::Star)) => {
                SqlError::UnsupportedFeature(t.describe().trim_matches('`').to_string())
            }
            Some(t) => SqlError::syntax(self.offset(), expected, &t.describe()),
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SqlError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.fail(&[kw]))
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), SqlError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.fail(&[&t.describe()]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SqlError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) && !is_unsupported(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.fail(&[what])),
        }
    }

    fn query(&mut self) -> Result<Query, SqlError> {
        self.expect_kw("select")?;
        if self.is_kw("distinct") {
            return Err(SqlError::UnsupportedFeature("distinct".into()));
        }
        let mut select = vec![self.expr(false)?];
        while self.eat(&Tok::Comma) {
            select.push(self.expr(false)?);
        }
        let from = if self.eat_kw("from") {
            let t = self.ident("table name")?;
            if self.peek() == Some(&Tok::Comma) {
                return Err(SqlError::UnsupportedFeature("join".into()));
            }
            Some(t)
        } else {
            None
        };
        let mut where_clause = Vec::new();
        if self.eat_kw("where") {
            where_clause.push(self.expr(false)?);
            while self.eat_kw("and") {
                where_clause.push(self.expr(false)?);
            }
        }
        let group_by = if self.is_kw("group") {
            self.pos += 1;
            self.expect_kw("by")?;
            let c = self.ident("column name")?;
            if self.peek() == Some(&Tok::Comma) {
                return Err(SqlError::UnsupportedFeature("multi-column group by".into()));
            }
            Some(c)
        } else {
            None
        };
        let mut having = Vec::new();
        if self.is_kw("having") {
            if group_by.is_none() {
                return Err(SqlError::syntax(self.offset(), &["group by"], "`having`"));
            }
            self.pos += 1;
            having.push(self.expr(false)?);
            while self.eat_kw("and") {
                having.push(self.expr(false)?);
            }
        }
        let order_by = if self.is_kw("order") {
            self.pos += 1;
            self.expect_kw("by")?;
            let expr = self.expr(false)?;
            let direction = if self.eat_kw("asc") {
                Some(Direction::Asc)
            } else if self.eat_kw("desc") {
                Some(Direction::Desc)
            } else {
                None
            };
            if self.peek() == Some(&Tok::Comma) {
                return Err(SqlError::UnsupportedFeature("multi-key order by".into()));
            }
            Some(OrderBy { expr, direction })
        } else {
            None
        };
        let limit = if self.eat_kw("limit") {
            match self.peek() {
                Some(Tok::Number(n)) => match n.parse::<u64>() {
                    Ok(v) if v > 0 => {
                        self.pos += 1;
                        Some(v)
                    }
                    _ => return Err(self.fail(&["positive integer"])),
                },
                _ => return Err(self.fail(&["positive integer"])),
            }
        } else {
            None
        };
        Ok(Query { select, from, where_clause, group_by, having, order_by, limit })
    }

    fn expr(&mut self, in_agg: bool) -> Result<Expr, SqlError> {
        let lhs = self.additive(in_agg)?;
        let op = match self.peek() {
            Some(Tok::Gt) => BinOp::Gt,
            Some(Tok::Lt) => BinOp::Lt,
            Some(Tok::Eq) => BinOp::Eq,
            Some(Tok::Ne) => BinOp::Ne,
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("in") => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let list = if self.is_kw("select") {
                    InList::Subquery(Box::new(self.query()?))
                } else {
                    let mut vs = vec![self.additive(in_agg)?];
                    while self.eat(&Tok::Comma) {
                        vs.push(self.additive(in_agg)?);
                    }
                    InList::Values(vs)
                };
                self.expect(Tok::RParen)?;
                return Ok(Expr::In { expr: Box::new(lhs), list });
            }
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("like") => {
                self.pos += 1;
                return match self.peek() {
                    Some(Tok::Str(p)) => {
                        let pattern = p.clone();
                        self.pos += 1;
                        Ok(Expr::Like { expr: Box::new(lhs), pattern })
                    }
                    _ => Err(self.fail(&["string pattern"])),
                };
            }
            Some(Tok::Ge | Tok::Le | Tok::LtGt) => return Err(self.fail(&[])),
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.additive(in_agg)?;
        if matches!(self.peek(), Some(Tok::Gt | Tok::Lt | Tok::Eq | Tok::Ne)) {
            return Err(SqlError::UnsupportedFeature("chained comparison".into()));
        }
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn additive(&mut self, in_agg: bool) -> Result<Expr, SqlError> {
        let mut lhs = self.term(in_agg)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term(in_agg)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self, in_agg: bool) -> Result<Expr, SqlError> {
        let mut lhs = self.primary(in_agg)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.primary(in_agg)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn number(&mut self, neg: bool) -> Result<Expr, SqlError> {
        let Some(Tok::Number(n)) = self.peek().cloned() else {
            return Err(self.fail(&["number"]));
        };
        let lit = if n.contains('.') {
            let r = parse_decimal(&n).ok_or_else(|| self.fail(&["number"]))?;
            Literal::Decimal(if neg { -r } else { r })
        } else {
            let v: i64 = n.parse().map_err(|_| self.fail(&["number"]))?;
            Literal::Int(if neg { -v } else { v })
        };
        self.pos += 1;
        Ok(Expr::Literal(lit))
    }

    fn primary(&mut self, in_agg: bool) -> Result<Expr, SqlError> {
        let expected = &["expression"];
        match self.peek().cloned() {
            Some(Tok::Number(_)) => self.number(false),
            Some(Tok::Minus) if matches!(self.peek_at(1), Some(Tok::Number(_))) => {
                self.pos += 1;
                self.number(true)
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Expr::Literal(Literal::Text(s)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = if self.is_kw("select") {
                    Expr::Subquery(Box::new(self.query()?))
                } else {
                    Expr::Paren(Box::new(self.expr(in_agg)?))
                };
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let (Some(func), Some(Tok::LParen)) = (AggFunc::from_name(&name), self.peek_at(1)) {
                    if in_agg {
                        return Err(SqlError::UnsupportedFeature("nested aggregate".into()));
                    }
                    self.pos += 2;
                    let distinct = self.eat_kw("distinct");
                    if distinct && func != AggFunc::Count {
                        return Err(SqlError::UnsupportedFeature(format!("{} ( distinct", func.as_str())));
                    }
                    if self.peek() == Some(&Tok::Star) {
                        return Err(SqlError::UnsupportedFeature("*".into()));
                    }
                    let arg = self.expr(true)?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::Agg { func, distinct, arg: Box::new(arg) });
                }
                if is_keyword(&name) || is_unsupported(&name) {
                    return Err(self.fail(expected));
                }
                if self.peek_at(1) == Some(&Tok::LParen) {
                    return Err(SqlError::UnsupportedFeature(format!("function {name}")));
                }
                self.pos += 1;
                Ok(Expr::Column(name))
            }
            _ => Err(self.fail(expected)),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s.to_ascii_lowercase().as_str())
}

fn is_unsupported(s: &str) -> bool {
    UNSUPPORTED.contains(&s.to_ascii_lowercase().as_str())
}
